use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use superdirective::channel::{draw_channel, MultipathSpec};
use superdirective::em_array::{dipole_loss_resistance, impedance_matrix, regularized_impedance, ArrayConfig};
use superdirective::linalg::transpose_quad_real;
use superdirective::precoding::{build_precoder, nulling_residual, ArrayMatrices, PrecoderKind};
use superdirective::sim::{spectral_efficiency, InterferenceMode};
use superdirective::CMat;

fn channels(m: usize, users: usize, d: f64, seed: u64) -> (ArrayConfig<f64>, CMat) {
    let cfg = ArrayConfig::new(m, d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<_> = (0..users)
        .map(|u| {
            let base = u as f64 * std::f64::consts::PI / users as f64;
            let az: Vec<f64> = (0..4).map(|p| base + 0.1 * p as f64).collect();
            draw_channel(&MultipathSpec::planar(&az, 1.0), &cfg, 0, &mut rng).unwrap().h
        })
        .collect();
    (cfg, CMat::from_columns(&cols))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_precoder_meets_its_normalization(
        m in 4usize..=12,
        users in 1usize..=3,
        d in 0.2f64..0.6,
        lossy in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let (cfg, h) = channels(m, users, d, seed);
        let z = impedance_matrix(&cfg);
        let r_loss = dipole_loss_resistance(0.085, 0.75e-3, 1.6e9, 5.8e7, 4e-7 * std::f64::consts::PI).unwrap();
        let zr = regularized_impedance(&z, r_loss, 73.0).unwrap();
        let mats = ArrayMatrices { z: &z, z_r: if lossy { Some(&zr) } else { None } };
        let target = if lossy { &zr } else { &z };
        for kind in [PrecoderKind::Mrt, PrecoderKind::Zf, PrecoderKind::Sp, PrecoderKind::Insp, PrecoderKind::Rinsp] {
            let p = match build_precoder(kind, &h, mats) {
                Ok(p) => p,
                Err(e) if e.is_numerical() => continue,
                Err(e) => panic!("{kind}: {e}"),
            };
            for w in &p.weights {
                let q = transpose_quad_real(w, target);
                // evaluating the form itself costs about eps * |w|^T |A| |w|
                let mags = w.map(|c| c.norm());
                let floor = 16.0 * f64::EPSILON * (target.abs() * &mags).dot(&mags);
                prop_assert!((q - 1.0).abs() < floor.max(1e-10), "{} gives {} (floor {:e})", kind, q, floor);
            }
            if matches!(kind, PrecoderKind::Insp | PrecoderKind::Rinsp | PrecoderKind::Zf) {
                let scale = p.weights.iter().map(|w| w.norm()).fold(0.0, f64::max) * h.norm();
                prop_assert!(nulling_residual(&h, &p.weights) < 1e-8 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn literal_interference_matches_physical_for_one_user(
        m in 2usize..=8,
        seed in any::<u64>(),
        noise in 1e-3f64..10.0,
    ) {
        let (cfg, h) = channels(m, 1, 0.3, seed);
        let z = impedance_matrix(&cfg);
        let p = build_precoder(PrecoderKind::Sp, &h, ArrayMatrices { z: &z, z_r: None }).unwrap();
        let a = spectral_efficiency(&h, &p.weights, noise, InterferenceMode::Physical).unwrap();
        let b = spectral_efficiency(&h, &p.weights, noise, InterferenceMode::Literal).unwrap();
        prop_assert_eq!(a, b);
    }
}
