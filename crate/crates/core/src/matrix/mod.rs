//! Dense nonnegative square matrices, their validation, serialization and
//! fixture generators.

mod generators;
mod io;
mod rational;
mod validate;

pub use generators::{named_matrix, random_doubly_stochastic, NamedKind};
pub use io::{load_matrix, save_matrix, to_json_string, Format};
pub use rational::RationalMatrix;
pub use validate::{validate, ValidationReport};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::pf::PfData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tags {
    pub doubly_stochastic: bool,
    pub lazy: bool,
    pub symmetric: bool,
}

#[derive(Debug, Clone)]
pub struct NonnegMatrix {
    data: DMatrix<f64>,
    exact: Option<RationalMatrix>,
    tags: Tags,
}

impl NonnegMatrix {
    /// Float-mode constructor. Entries in `[clamp_floor, 0)` are clamped to
    /// zero; anything more negative is rejected.
    pub fn from_dmatrix(mut data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Domain(format!(
                "matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.nrows() == 0 {
            return Err(Error::Domain("matrix dimension must be at least 1".into()));
        }
        let floor = Config::default().clamp_floor;
        let n = data.nrows();
        for i in 0..n {
            for j in 0..n {
                let x = data[(i, j)];
                if !x.is_finite() {
                    return Err(Error::Validation(format!("non-finite entry at ({i}, {j})")));
                }
                if x < floor {
                    return Err(Error::Validation(format!(
                        "negative entry {x:e} at ({i}, {j})"
                    )));
                }
                if x < 0.0 {
                    data[(i, j)] = 0.0;
                }
            }
        }
        let tags = float_tags(&data, Config::default().stochastic_tol);
        Ok(NonnegMatrix {
            data,
            exact: None,
            tags,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("rows must form a square matrix".into()));
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_rational(exact: RationalMatrix) -> Result<Self> {
        if exact.n() == 0 {
            return Err(Error::Domain("matrix dimension must be at least 1".into()));
        }
        if !exact.is_nonnegative() {
            return Err(Error::Validation(
                "negative entry in rational matrix".into(),
            ));
        }
        let tags = Tags {
            doubly_stochastic: exact.is_doubly_stochastic(),
            lazy: exact.min_diagonal() >= num_rational::BigRational::new(1.into(), 2.into()),
            symmetric: exact.is_symmetric(),
        };
        Ok(NonnegMatrix {
            data: exact.to_f64(),
            exact: Some(exact),
            tags,
        })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn mode(&self) -> Mode {
        if self.exact.is_some() {
            Mode::Rational
        } else {
            Mode::Float
        }
    }

    pub fn tags(&self) -> Tags {
        self.tags
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.tags.doubly_stochastic
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn exact(&self) -> Option<&RationalMatrix> {
        self.exact.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Drops the exact representation, keeping the float entries.
    pub fn to_float(&self) -> NonnegMatrix {
        NonnegMatrix {
            data: self.data.clone(),
            exact: None,
            tags: self.tags,
        }
    }

    pub fn transpose(&self) -> NonnegMatrix {
        match &self.exact {
            Some(q) => Self::from_rational(q.transpose()).expect("transpose keeps sign"),
            None => Self::from_dmatrix(self.data.transpose()).expect("transpose keeps sign"),
        }
    }

    /// Product, exact when both factors are exact.
    pub fn mul(&self, other: &NonnegMatrix) -> NonnegMatrix {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::from_rational(a.mul(b)).expect("product keeps sign"),
            _ => Self::from_dmatrix(&self.data * &other.data).expect("product keeps sign"),
        }
    }

    pub fn pow(&self, k: u32) -> NonnegMatrix {
        assert!(k >= 1, "power must be at least 1");
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Result<NonnegMatrix> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "scale factor {s} must be finite and nonnegative"
            )));
        }
        Self::from_dmatrix(&self.data * s)
    }
}

fn float_tags(m: &DMatrix<f64>, tol: f64) -> Tags {
    let n = m.nrows();
    let rows_ok = (0..n).all(|i| (m.row(i).sum() - 1.0).abs() <= tol);
    let cols_ok = (0..n).all(|j| (m.column(j).sum() - 1.0).abs() <= tol);
    Tags {
        doubly_stochastic: rows_ok && cols_ok,
        lazy: (0..n).all(|i| m[(i, i)] >= 0.5 - tol),
        symmetric: (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol)),
    }
}

/// Rescales `R` by its Perron value so the result has Perron value 1.
pub fn scale_to_unit_pf(r: &NonnegMatrix, pf: &PfData) -> Result<NonnegMatrix> {
    if !(pf.r > 0.0) {
        return Err(Error::DegeneratePf("Perron value is zero".into()));
    }
    if pf.r == 1.0 {
        return Ok(r.clone());
    }
    r.scaled(1.0 / pf.r)
}
