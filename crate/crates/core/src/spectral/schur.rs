//! Complex Schur decomposition M = U T U* by Hessenberg reduction followed
//! by single-shift QR sweeps with Wilkinson shifts.

use nalgebra::{DMatrix, Hessenberg};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct SchurFactors {
    #[serde(serialize_with = "crate::report::complex_matrix")]
    pub u: DMatrix<Complex64>,
    #[serde(serialize_with = "crate::report::complex_matrix")]
    pub t: DMatrix<Complex64>,
    /// ‖M − U T U*‖∞ / max(‖M‖∞, 1).
    pub reconstruction_residual: f64,
}

impl SchurFactors {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// ‖U U* − I‖∞ (max absolute row sum).
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.u.nrows();
        let d = &self.u * self.u.adjoint() - DMatrix::<Complex64>::identity(n, n);
        inf_norm(&d)
    }

    /// Largest modulus strictly below the diagonal of T.
    pub fn lower_residual(&self) -> f64 {
        let n = self.t.nrows();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in j + 1..n {
                m = m.max(self.t[(i, j)].norm());
            }
        }
        m
    }
}

pub(crate) fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Rotation G = [[c, s], [−s̄, c]] with G·[x; y] = [r; 0].
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let norm = ax.hypot(y.norm());
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

pub fn schur_complex(m: &DMatrix<f64>) -> Result<SchurFactors> {
    schur_of(to_complex(m), m.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

fn schur_of(mc: DMatrix<Complex64>, scale_hint: f64) -> Result<SchurFactors> {
    let n = mc.nrows();
    if n == 0 || mc.ncols() != n {
        return Err(Error::Domain(
            "Schur decomposition needs a nonempty square matrix".into(),
        ));
    }
    if mc.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation("non-finite entry".into()));
    }
    let hess = Hessenberg::new(mc.clone());
    let (mut z, mut h) = hess.unpack();
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }

    let ulp = f64::EPSILON;
    let norm = inf_norm(&h).max(scale_hint).max(f64::MIN_POSITIVE);
    let max_sweeps_per_eig = 60;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].norm() <= ulp * s {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > max_sweeps_per_eig {
            return Err(Error::Convergence {
                iterations: total,
                residual: h[(hi, hi - 1)].norm(),
            });
        }

        let mu = if iter % 11 == 10 {
            h[(hi, hi)] + Complex64::new(0.75, 0.5) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let first_col = if k == l { l } else { k - 1 };
            for j in first_col..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
            let last_row = (k + 2).min(hi);
            for i in 0..=last_row {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }

    let recon = &z * &h * z.adjoint();
    let reconstruction_residual = inf_norm(&(recon - &mc)) / inf_norm(&mc).max(1.0);
    Ok(SchurFactors {
        u: z,
        t: h,
        reconstruction_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    fn check(m: &DMatrix<f64>) -> SchurFactors {
        let f = schur_complex(m).unwrap();
        assert!(
            f.unitarity_residual() <= 1e-10,
            "unitarity {}",
            f.unitarity_residual()
        );
        assert!(f.lower_residual() <= 1e-12);
        assert!(
            f.reconstruction_residual <= 1e-8,
            "recon {}",
            f.reconstruction_residual
        );
        f
    }

    #[test]
    fn identity_is_its_own_form() {
        let f = check(&DMatrix::identity(3, 3));
        assert!(inf_norm(&(&f.t - DMatrix::<Complex64>::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn symmetric_gives_diagonal_t() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = DMatrix::from_fn(7, 7, |_, _| rng.random::<f64>());
        let s = &a + a.transpose();
        let f = check(&s);
        for i in 0..7 {
            for j in i + 1..7 {
                assert!(f.t[(i, j)].norm() < 1e-8);
            }
        }
    }

    #[test]
    fn rotation_eigenvalues() {
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let f = check(&c);
        for z in f.eigenvalues() {
            assert!(((z * z * z) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_real_schur_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 5, 9, 16, 30] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
            let mine = check(&a).eigenvalues();
            let oracle: Vec<Complex64> = nalgebra::Schur::try_new(a.clone(), 1e-15, 100_000)
                .unwrap()
                .complex_eigenvalues()
                .iter()
                .cloned()
                .collect();
            let d = crate::spectral::spectrum_distance(&mine, &oracle);
            assert!(d < 1e-8, "n={n}: distance {d}");
        }
    }

    #[test]
    fn zero_and_nilpotent_matrices() {
        check(&DMatrix::zeros(4, 4));
        let mut j = DMatrix::zeros(5, 5);
        for i in 0..4 {
            j[(i, i + 1)] = 1.0;
        }
        let f = check(&j);
        assert!(f.eigenvalues().iter().all(|z| z.norm() < 1e-2));
    }
}
