use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_desc, to_complex, CMatrix, CVector, RMatrix, SpdFactor};
use crate::scalar::Real;

/// Unitary basis `L_u` whose first `n_int` columns span the interferers'
/// channels, with `Z` and `h_u` expressed in it.
///
/// `L^H Z L = [[upsilon, psi], [psi^H, xi]]` and `L^H h_u = [gamma; eta]`.
#[derive(Clone, Debug)]
pub struct NullSpaceBasis<T: Real> {
    pub v: CMatrix<T>,
    pub n_int: usize,
    pub eigenvalues: Vec<T>,
    pub upsilon: CMatrix<T>,
    pub psi: CMatrix<T>,
    pub xi: CMatrix<T>,
    pub gamma: CVector<T>,
    pub eta: CVector<T>,
}

impl<T: Real> NullSpaceBasis<T> {
    pub fn new(h: &CMatrix<T>, u: usize, z: &RMatrix<T>) -> Result<Self> {
        let m = h.nrows();
        if u >= h.ncols() {
            return Err(Error::invalid(format!(
                "user index {u} out of range for {} users",
                h.ncols()
            )));
        }
        if z.nrows() != m || z.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "impedance matrix vs channel length",
                expected: m,
                actual: z.nrows(),
            });
        }
        let mut r_int = CMatrix::zeros(m, m);
        for (i, hi) in h.column_iter().enumerate() {
            if i != u {
                r_int += hi * hi.adjoint();
            }
        }
        let (eigenvalues, v) = hermitian_eig_desc(&r_int);
        let top = eigenvalues.first().copied().unwrap_or_else(T::zero);
        let cutoff = top * T::rank_tolerance();
        let n_int = if top > T::zero() {
            eigenvalues.iter().take_while(|&&l| l > cutoff).count()
        } else {
            0
        };
        let zl = to_complex(z) * &v;
        let full = v.adjoint() * zl;
        let proj = v.adjoint() * h.column(u);
        let k = m - n_int;
        Ok(Self {
            upsilon: full.view((0, 0), (n_int, n_int)).clone_owned(),
            psi: full.view((0, n_int), (n_int, k)).clone_owned(),
            xi: full.view((n_int, n_int), (k, k)).clone_owned(),
            gamma: proj.rows(0, n_int).clone_owned(),
            eta: proj.rows(n_int, k).clone_owned(),
            v,
            n_int,
            eigenvalues,
        })
    }

    /// Columns of `L_u` orthogonal to every interferer.
    pub fn null_columns(&self) -> CMatrix<T> {
        let m = self.v.nrows();
        self.v.columns(self.n_int, m - self.n_int).clone_owned()
    }
}

/// Interference-nulling superdirective weights for user `u`, normalized to
/// `w^H Z w = 1`.
///
/// Maximizes `|w^T h_u|^2 / (w^T Z w^*)` subject to `h_i^T w = 0` for all
/// `i != u`. Writing `w = L^* [0; alpha]`, the optimum is
/// `alpha = conj(Xi^{-1} eta)`.
pub fn insp<T: Real>(h: &CMatrix<T>, u: usize, z: &RMatrix<T>) -> Result<CVector<T>> {
    let basis = NullSpaceBasis::new(h, u, z)?;
    let hu = h.column(u);
    let k = basis.eta.len();
    if k == 0 || basis.eta.norm() <= T::rank_tolerance() * hu.norm() {
        return Err(Error::Infeasible(format!(
            "target user {u} lies in the interference space"
        )));
    }
    let factor = SpdFactor::new(&basis.xi, T::zero(), "projected impedance matrix")?;
    let beta = factor.solve(&basis.eta);
    let w = (basis.null_columns() * beta).conjugate();
    super::normalize_power(&w, z)
}

/// [`insp`] designed against the loss-regularized impedance `Z_R`.
pub fn rinsp<T: Real>(h: &CMatrix<T>, u: usize, z_r: &RMatrix<T>) -> Result<CVector<T>> {
    insp(h, u, z_r)
}
