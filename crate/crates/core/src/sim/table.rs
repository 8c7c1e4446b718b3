//! Result rows, CSV emission and run metadata.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep,label,metric,mean,stderr,trials";

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep: f64,
    pub label: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub sweep: String,
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub version: String,
    /// Trials re-drawn because a precoder was infeasible for the first draw.
    pub redraws: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub meta: ResultMeta,
}

fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl ResultTable {
    pub fn new(meta: ResultMeta, mut rows: Vec<ResultRow>) -> Self {
        rows.sort_by(|a, b| a.sweep.total_cmp(&b.sweep).then_with(|| a.label.cmp(&b.label)));
        Self { rows, meta }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                float(r.sweep),
                r.label,
                r.metric,
                float(r.mean),
                float(r.stderr),
                r.trials
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        lines
            .enumerate()
            .map(|(i, line)| {
                let err = |m: &str| Error::Parse {
                    line: i + 2,
                    message: m.to_string(),
                };
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 6 {
                    return Err(err("expected 6 fields"));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
                Ok(ResultRow {
                    sweep: num(f[0])?,
                    label: f[1].to_string(),
                    metric: f[2].to_string(),
                    mean: num(f[3])?,
                    stderr: num(f[4])?,
                    trials: f[5].parse().map_err(|_| err("bad trial count"))?,
                })
            })
            .collect()
    }

    /// Rows matching `label` and `metric`, in sweep order.
    pub fn series(&self, label: &str, metric: &str) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.label == label && r.metric == metric)
            .collect()
    }

    /// Mean at a sweep value, if present.
    pub fn mean_at(&self, label: &str, metric: &str, sweep: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.metric == metric && r.sweep == sweep)
            .map(|r| r.mean)
    }

    /// Writes `<stem>.csv` and `<stem>.meta.json` into `dir`, returning the CSV path.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv, self.to_csv())?;
        let meta = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
        std::fs::write(dir.join(format!("{stem}.meta.json")), meta + "\n")?;
        Ok(csv)
    }
}
