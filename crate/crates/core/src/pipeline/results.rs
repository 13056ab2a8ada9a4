use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::biometric::{CellKey, ImpostorSampling};

use super::PipelineError;

pub const RESULTS_HEADER: &str = "condition,band,method,window_s,eer,auc,one_minus_auc,n_subjects,n_epochs_per_subject,n_genuine,n_impostor,impostor_sampling";
pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub cell: CellKey,
    pub eer: f64,
    pub auc: f64,
    pub one_minus_auc: f64,
    pub n_subjects: usize,
    /// (min, max) epochs contributed by a subject
    pub n_epochs_per_subject: (usize, usize),
    pub n_genuine: usize,
    pub n_impostor: usize,
    pub impostor_sampling: ImpostorSampling,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let (lo, hi) = self.n_epochs_per_subject;
        let epochs = if lo == hi {
            lo.to_string()
        } else {
            format!("{lo}-{hi}")
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.cell.condition,
            self.cell.band,
            self.cell.method,
            format_sig(self.cell.window_s),
            format_sig(self.eer),
            format_sig(self.auc),
            format_sig(self.one_minus_auc),
            self.n_subjects,
            epochs,
            self.n_genuine,
            self.n_impostor,
            self.impostor_sampling
        )
    }
}

/// Six significant digits, trailing zeros trimmed (like C's `%.6g`).
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Writes `results.csv` under `output_dir` and returns its path.
pub fn write_results(rows: &[ResultRow], output_dir: &Path) -> Result<PathBuf, PipelineError> {
    if rows.is_empty() {
        return Err(PipelineError::EmptyResults);
    }
    fs::create_dir_all(output_dir).map_err(|e| PipelineError::io(output_dir, e))?;
    let path = output_dir.join(RESULTS_FILE);
    let mut f = fs::File::create(&path).map_err(|e| PipelineError::io(&path, e))?;
    f.write_all(results_csv(rows).as_bytes())
        .map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}
