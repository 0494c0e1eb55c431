use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Mode, NonnegMatrix, RationalMatrix};
use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedKind {
    Identity,
    UniformJ,
    DirectedCycle,
}

/// Identity, the uniform matrix J = (1/n)·11ᵀ, or the cyclic shift i → i+1.
pub fn named_matrix(kind: NamedKind, n: usize, mode: Mode) -> Result<NonnegMatrix> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if kind == NamedKind::DirectedCycle && n < 2 {
        return Err(Error::Domain("directed cycle needs n >= 2".into()));
    }
    let entry = |i: usize, j: usize| -> BigRational {
        let hit = match kind {
            NamedKind::Identity => i == j,
            NamedKind::UniformJ => return BigRational::new(1.into(), (n as i64).into()),
            NamedKind::DirectedCycle => j == (i + 1) % n,
        };
        if hit {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    };
    let exact = RationalMatrix::from_fn(n, entry);
    let m = NonnegMatrix::from_rational(exact)?;
    Ok(match mode {
        Mode::Rational => m,
        Mode::Float => m.to_float(),
    })
}

/// Sinkhorn balancing of a seeded matrix with entries uniform in (0, 1].
pub fn random_doubly_stochastic(n: usize, seed: u64, sinkhorn_tol: f64) -> Result<NonnegMatrix> {
    if n < 2 {
        return Err(Error::Domain(
            "random doubly stochastic needs n >= 2".into(),
        ));
    }
    if !(sinkhorn_tol > 0.0) {
        return Err(Error::Domain("sinkhorn tolerance must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(n, n, |_, _| 1.0 - rng.random::<f64>());
    let max_sweeps = Config::default().sinkhorn_max_sweeps;
    let mut dev = f64::INFINITY;
    for _ in 0..max_sweeps {
        for mut row in m.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        for mut col in m.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        dev = (0..n)
            .map(|i| (m.row(i).sum() - 1.0).abs())
            .fold(0.0, f64::max);
        if dev <= sinkhorn_tol / 4.0 {
            return NonnegMatrix::from_dmatrix(m);
        }
    }
    Err(Error::Convergence {
        iterations: max_sweeps,
        residual: dev,
    })
}
