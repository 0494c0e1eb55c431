//! JSON/CSV rendering of reports.
//!
//! Complex numbers are written as `[re, im]` pairs. Non-finite floats become
//! JSON `null`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub(crate) fn complex_list<S: Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub(crate) fn complex_matrix<S: Serializer>(
    m: &DMatrix<Complex64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = m
        .row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    rows.serialize(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub trait Report: Serialize {
    /// CSV rendering for tabular reports; `None` for everything else.
    fn to_csv(&self) -> Option<String> {
        None
    }
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| Error::format(0, e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => report
            .to_csv()
            .ok_or_else(|| Error::format(0, "csv output is only available for tabular sweeps")),
    }
}

impl Report for crate::matrix::ValidationReport {}
impl Report for crate::spectral::SpectralSummary {}
impl Report for crate::pf::PfData {}
impl Report for crate::expansion::ExpansionResult {}
impl Report for crate::bounds::BoundReport {}
impl Report for crate::mixing::MixReport {}
impl Report for crate::mixing::ContinuousMixReport {}
impl Report for crate::mixing::PathBound {}

impl Report for crate::bounds::GammaRecord {
    fn to_csv(&self) -> Option<String> {
        std::slice::from_ref(self).to_csv()
    }
}

impl Report for [crate::bounds::GammaRecord] {
    fn to_csv(&self) -> Option<String> {
        let mut out = String::from("n,witness,inv_sqrt_n,inv_35n\n");
        for g in self {
            out.push_str(&format!(
                "{},{:?},{:?},{:?}\n",
                g.n,
                g.gamma_upper_witness,
                1.0 / (g.n as f64).sqrt(),
                g.gamma_lower_bound
            ));
        }
        Some(out)
    }
}

impl Report for Vec<crate::bounds::GammaRecord> {
    fn to_csv(&self) -> Option<String> {
        self.as_slice().to_csv()
    }
}
