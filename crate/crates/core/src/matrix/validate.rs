use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{NonnegMatrix, Tags};
use crate::error::{Error, Result};
use crate::pf::PfData;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub nonneg_ok: bool,
    pub row_sum_max_dev: f64,
    pub col_sum_max_dev: f64,
    pub doubly_stochastic_ok: bool,
    pub lazy_ok: bool,
    /// Largest entry of |A − ½(A+Aᵀ)|.
    pub symmetric_dev: f64,
    /// Largest entry of |D_u R D_v − D_v Rᵀ D_u|, when a positive pair is given.
    pub detailed_balance_dev: Option<f64>,
    pub tags: Tags,
}

pub fn validate(m: &NonnegMatrix, pf: Option<&PfData>, tol: f64) -> Result<ValidationReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let a = m.as_dmatrix();
    let n = m.n();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite entry".into()));
    }

    let (row_dev, col_dev, nonneg_ok, lazy_ok, symmetric_dev) = match m.exact() {
        Some(q) => {
            let dev = |sums: Vec<BigRational>| {
                sums.into_iter()
                    .map(|s| (s - BigRational::one()).abs())
                    .max()
                    .unwrap_or_else(BigRational::zero)
                    .to_f64()
                    .unwrap_or(f64::INFINITY)
            };
            let half = BigRational::new(1.into(), 2.into());
            let sym = (q.sub(&q.transpose()).max_abs() * &half)
                .to_f64()
                .unwrap_or(f64::INFINITY);
            (
                dev(q.row_sums()),
                dev(q.col_sums()),
                q.is_nonnegative(),
                q.min_diagonal() >= half,
                sym,
            )
        }
        None => {
            let row_dev = (0..n)
                .map(|i| (a.row(i).sum() - 1.0).abs())
                .fold(0.0, f64::max);
            let col_dev = (0..n)
                .map(|j| (a.column(j).sum() - 1.0).abs())
                .fold(0.0, f64::max);
            let sym = (a - a.transpose()).amax() / 2.0;
            (
                row_dev,
                col_dev,
                a.iter().all(|&x| x >= 0.0),
                (0..n).all(|i| a[(i, i)] >= 0.5),
                sym,
            )
        }
    };

    let detailed_balance_dev = pf
        .filter(|p| p.u.iter().chain(p.v.iter()).all(|&x| x > 0.0))
        .map(|p| {
            let mut dev: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d = p.u[i] * a[(i, j)] * p.v[j] - p.v[i] * a[(j, i)] * p.u[j];
                    dev = dev.max(d.abs());
                }
            }
            dev
        });

    let exact = m.exact().is_some();
    let within = |d: f64| if exact { d == 0.0 } else { d <= tol };
    let doubly_stochastic_ok = nonneg_ok && within(row_dev) && within(col_dev);
    let tags = Tags {
        doubly_stochastic: doubly_stochastic_ok,
        lazy: lazy_ok,
        symmetric: within(symmetric_dev),
    };
    Ok(ValidationReport {
        n,
        nonneg_ok,
        row_sum_max_dev: row_dev,
        col_sum_max_dev: col_dev,
        doubly_stochastic_ok,
        lazy_ok,
        symmetric_dev,
        detailed_balance_dev,
        tags,
    })
}
