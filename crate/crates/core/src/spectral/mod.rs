//! Nontrivial spectra, singular values, and norm bounds for powers of
//! triangular matrices.

mod schur;

pub use schur::SchurFactors;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::matrix::{NonnegMatrix, RationalMatrix};

pub fn schur_decompose(m: &NonnegMatrix) -> Result<SchurFactors> {
    schur::schur_complex(m.as_dmatrix())
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    Ok(schur::schur_complex(m)?.eigenvalues())
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm: exact SVD up to n = 256, power iteration on MᵀM above.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() <= 256 {
        return singular_values(m).first().cloned().unwrap_or(0.0);
    }
    let mtm = m.transpose() * m;
    let mut x = DVector::from_element(m.ncols(), 1.0 / (m.ncols() as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..10_000 {
        let y = &mtm * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let next = ny.sqrt();
        x = y / ny;
        if (next - est).abs() <= 1e-14 * next {
            return next;
        }
        est = next;
    }
    est
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    #[serde(serialize_with = "crate::report::complex")]
    pub lambda2: Complex64,
    #[serde(serialize_with = "crate::report::complex")]
    pub lambda_m: Complex64,
    pub sigma2: f64,
    pub spectral_gap: f64,
    #[serde(serialize_with = "crate::report::complex_list")]
    pub nontrivial_eigs: Vec<Complex64>,
    /// Modulus of the eigenvalue removed as the deflated direction
    /// (or, for a supplied Schur form, the distance of the removed entry from 1).
    pub deflation_residual: f64,
}

fn check_balanced(a: &NonnegMatrix, w: &[f64]) -> Result<DVector<f64>> {
    let n = a.n();
    if w.len() != n {
        return Err(Error::Domain("w has the wrong length".into()));
    }
    let wv = DVector::from_column_slice(w);
    let m = a.as_dmatrix();
    let dev = (m * &wv - &wv).amax().max((m.tr_mul(&wv) - &wv).amax());
    if dev > 1e-8 || (wv.dot(&wv) - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "matrix is not balanced with respect to w (deviation {dev:e})"
        )));
    }
    Ok(wv)
}

fn summarize(nontrivial: Vec<Complex64>, sigma2: f64, deflation_residual: f64) -> SpectralSummary {
    let zero = Complex64::new(0.0, 0.0);
    let max_re = nontrivial
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-10 * max_re.abs().max(1.0);
    let lambda2 = nontrivial
        .iter()
        .filter(|z| z.re >= max_re - tie)
        .max_by(|a, b| {
            (a.im >= 0.0)
                .cmp(&(b.im >= 0.0))
                .then(a.re.total_cmp(&b.re))
        })
        .cloned()
        .unwrap_or(zero);
    let max_mod = nontrivial.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mod_tie = 1e-10 * max_mod.max(1.0);
    let lambda_m = nontrivial
        .iter()
        .filter(|z| z.norm() >= max_mod - mod_tie)
        .max_by(|a, b| {
            (a.im >= 0.0)
                .cmp(&(b.im >= 0.0))
                .then(a.re.total_cmp(&b.re))
        })
        .cloned()
        .unwrap_or(zero);
    SpectralSummary {
        lambda2,
        lambda_m,
        sigma2,
        spectral_gap: 1.0 - lambda2.re,
        nontrivial_eigs: nontrivial,
        deflation_residual,
    }
}

fn sigma2_of(m: &DMatrix<f64>) -> f64 {
    singular_values(m).get(1).cloned().unwrap_or(0.0)
}

/// Spectrum of a balanced matrix with the Perron direction deflated:
/// the eigenvalues of A − wwᵀ minus the one closest to zero.
pub fn spectral_summary(a: &NonnegMatrix, w: &[f64]) -> Result<SpectralSummary> {
    let wv = check_balanced(a, w)?;
    let b = a.as_dmatrix() - &wv * wv.transpose();
    let mut eigs = eigenvalues(&b)?;
    let (k, removed) = eigs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, z)| (k, z.norm()))
        .expect("n >= 1");
    eigs.remove(k);
    Ok(summarize(eigs, sigma2_of(a.as_dmatrix()), removed))
}

/// Same as [`spectral_summary`], but reads the spectrum from a supplied
/// Schur form of A, dropping the diagonal entry closest to 1.
pub fn spectral_summary_with_schur(
    a: &NonnegMatrix,
    w: &[f64],
    factors: &SchurFactors,
) -> Result<SpectralSummary> {
    check_balanced(a, w)?;
    if factors.t.nrows() != a.n() {
        return Err(Error::Domain("Schur factors have the wrong size".into()));
    }
    let mut eigs = factors.eigenvalues();
    let one = Complex64::new(1.0, 0.0);
    let (k, dist) = eigs
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - one).norm().total_cmp(&(y.1 - one).norm()))
        .map(|(k, z)| (k, (z - one).norm()))
        .expect("n >= 1");
    eigs.remove(k);
    Ok(summarize(eigs, sigma2_of(a.as_dmatrix()), dist))
}

/// min over j ≤ `max_power` of ‖(A − wwᵀ)^j‖₂^{1/j}; an upper bound on every
/// nontrivial eigenvalue modulus of a balanced A.
pub fn nontrivial_radius_bound(a: &NonnegMatrix, w: &[f64], max_power: usize) -> Result<f64> {
    let wv = check_balanced(a, w)?;
    let b = a.as_dmatrix() - &wv * wv.transpose();
    let mut p = b.clone();
    let mut best = f64::INFINITY;
    for j in 1..=max_power.max(1) {
        if j > 1 {
            p = &p * &b;
        }
        best = best.min(op_norm(&p).powf(1.0 / j as f64));
        if best == 0.0 {
            break;
        }
    }
    Ok(best)
}

/// For an exactly doubly stochastic Q, the first power 2^s with
/// (Q − J)^{2^s} = 0 in exact arithmetic, J the uniform matrix. Such a power
/// exists exactly when every nontrivial eigenvalue of Q is zero.
pub fn exact_deflated_nilpotency(q: &RationalMatrix) -> Result<Option<usize>> {
    if !q.is_doubly_stochastic() {
        return Err(Error::Domain(
            "exact nilpotency check needs a doubly stochastic matrix".into(),
        ));
    }
    let n = q.n();
    let j = RationalMatrix::from_fn(n, |_, _| BigRational::new(1.into(), (n as i64).into()));
    let mut b = q.sub(&j);
    let mut power = 1;
    loop {
        if b.is_zero() {
            return Ok(Some(power));
        }
        if power >= n {
            return Ok(None);
        }
        b = b.mul(&b);
        power *= 2;
    }
}

/// Largest distance in a greedy nearest-neighbour pairing of two spectra of
/// equal length; infinite when the lengths differ.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lengths match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// n·σⁿ·C(k+n, n)·β^{k−n}, evaluated in log space.
pub fn triangular_power_bound(n: usize, sigma: f64, beta: f64, k: usize) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::Domain("n and k must be at least 1".into()));
    }
    if !(sigma >= 1.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma = {sigma} is below 1")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta = {beta} must be nonnegative")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let ln_binom = ln_gamma(kf + nf + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0);
    let ln_beta_term = if k == n {
        0.0
    } else if beta == 0.0 {
        return Ok(if k > n { 0.0 } else { f64::INFINITY });
    } else {
        (kf - nf) * beta.ln()
    };
    Ok((nf.ln() + nf * sigma.ln() + ln_binom + ln_beta_term).exp())
}

/// ⌈(3.51·n + 1.385·ln(n/ε))/(1 − α)⌉.
pub fn triangular_mix_power(n: usize, alpha: f64, eps: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(((3.51 * nf + 1.385 * (nf / eps).ln()) / (1.0 - alpha)).ceil() as usize)
}

/// The looser form 4n + 2·ln(n/ε) over 1 − α.
pub fn triangular_mix_power_display(n: usize, alpha: f64, eps: f64) -> Result<usize> {
    triangular_mix_power(n, alpha, eps)?;
    let nf = n as f64;
    Ok(((4.0 * nf + 2.0 * (nf / eps).ln()) / (1.0 - alpha)).ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{named_matrix, random_doubly_stochastic, Mode, NamedKind};
    use crate::pf::{additive_symmetrize, pf_data};

    fn summary(m: &NonnegMatrix) -> SpectralSummary {
        let pf = pf_data(m, 1e-12).unwrap();
        spectral_summary(m, &pf.w).unwrap()
    }

    #[test]
    fn uniform_is_rank_one() {
        let j = named_matrix(NamedKind::UniformJ, 5, Mode::Float).unwrap();
        let s = summary(&j);
        assert_eq!(s.nontrivial_eigs.len(), 4);
        assert!(s.nontrivial_eigs.iter().all(|z| z.norm() < 1e-12));
        assert!(s.sigma2 < 1e-12);
        assert!((s.spectral_gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_four_spectrum() {
        let c = named_matrix(NamedKind::DirectedCycle, 4, Mode::Float).unwrap();
        let s = summary(&c);
        let mut want = vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        for z in &s.nontrivial_eigs {
            let k = want
                .iter()
                .position(|x| (x - z).norm() < 1e-10)
                .unwrap_or_else(|| panic!("unexpected eigenvalue {z}"));
            want.remove(k);
        }
        assert!(s.lambda2.re.abs() < 1e-10);
        assert!((s.lambda2.im - 1.0).abs() < 1e-10);
        assert!((s.lambda_m.norm() - 1.0).abs() < 1e-10);
        assert!((s.sigma2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_singular_values_are_moduli() {
        let a = random_doubly_stochastic(7, 2, 1e-12).unwrap();
        let m = additive_symmetrize(&a);
        let mut eig: Vec<f64> = eigenvalues(m.as_dmatrix())
            .unwrap()
            .iter()
            .map(|z| z.norm())
            .collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in eig.iter().zip(singular_values(m.as_dmatrix())) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let r = NonnegMatrix::from_rows(&[vec![0.2, 0.8], vec![0.3, 0.7]]).unwrap();
        assert!(spectral_summary(&r, &[0.5f64.sqrt(); 2]).is_err());
    }

    #[test]
    fn radius_certificate_on_uniform() {
        let j = named_matrix(NamedKind::UniformJ, 4, Mode::Float).unwrap();
        let r = nontrivial_radius_bound(&j, &[0.5; 4], 3).unwrap();
        assert!(r < 1e-15);
        let c = named_matrix(NamedKind::DirectedCycle, 4, Mode::Float).unwrap();
        let r = nontrivial_radius_bound(&c, &[0.5; 4], 8).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_power_branch_matches_svd() {
        let a = random_doubly_stochastic(300, 1, 1e-12).unwrap();
        let b = a.as_dmatrix() * 0.5 + DMatrix::identity(300, 300) * 0.25;
        let svd = singular_values(&b)[0];
        assert!((op_norm(&b) - svd).abs() < 1e-9);
    }

    #[test]
    fn triangular_bound_examples() {
        assert!((triangular_power_bound(1, 1.0, 0.5, 3).unwrap() - 1.0).abs() < 1e-12);
        let n = 5;
        let central: f64 = (6..=10).map(|x| x as f64).product::<f64>() / 120.0;
        let got = triangular_power_bound(n, 1.3, 1.0, n).unwrap();
        assert!((got - n as f64 * 1.3f64.powi(5) * central).abs() < 1e-9 * got);
        assert!(triangular_power_bound(2, 0.9, 0.5, 3).is_err());
        assert_eq!(triangular_power_bound(2, 1.0, 0.0, 3).unwrap(), 0.0);
        assert!(triangular_power_bound(3, 1.0, 0.0, 2)
            .unwrap()
            .is_infinite());
        assert!(triangular_power_bound(10, 1.0, 0.9, 1000)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn mix_power_examples() {
        assert_eq!(triangular_mix_power(4, 0.0, 0.1).unwrap(), 20);
        let k0 = triangular_mix_power(6, 0.0, 0.01).unwrap() as f64;
        let k_half = triangular_mix_power(6, 0.5, 0.01).unwrap() as f64;
        assert!((k_half - 2.0 * k0).abs() <= 1.0);
        assert!(triangular_mix_power(4, 1.0, 0.1).is_err());
        assert!(
            triangular_mix_power_display(4, 0.0, 0.1).unwrap()
                >= triangular_mix_power(4, 0.0, 0.1).unwrap()
        );
    }

    #[test]
    fn exact_nilpotency_examples() {
        let j = named_matrix(NamedKind::UniformJ, 4, Mode::Rational).unwrap();
        assert_eq!(
            exact_deflated_nilpotency(j.exact().unwrap()).unwrap(),
            Some(1)
        );
        let c = named_matrix(NamedKind::DirectedCycle, 4, Mode::Rational).unwrap();
        assert_eq!(exact_deflated_nilpotency(c.exact().unwrap()).unwrap(), None);
        let db = crate::construction::de_bruijn(3, Mode::Rational).unwrap();
        assert_eq!(
            exact_deflated_nilpotency(db.exact().unwrap()).unwrap(),
            Some(4)
        );
        let a = crate::construction::rogue_matrix(9, Mode::Rational).unwrap();
        assert_eq!(
            exact_deflated_nilpotency(a.exact().unwrap()).unwrap(),
            Some(8)
        );
        let bad = RationalMatrix::identity(2).scale(&BigRational::new(1.into(), 2.into()));
        assert!(exact_deflated_nilpotency(&bad).is_err());
    }
}
