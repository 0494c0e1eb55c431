//! The verification suite: thirteen numbered criteria, each reduced to a
//! pass/fail outcome with a one-line detail.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{bound_report_with, rogue_spectrum, submultiplicativity_check, BoundOptions};
use crate::config::Config;
use crate::construction::{
    construction_coefficients, de_bruijn, klawe_vazirani, perturbed_rogue, rogue_matrix,
    schur_witness_exact, witness_schur_factors,
};
use crate::error::Result;
use crate::expansion::{phi_exact, phi_single_cut};
use crate::matrix::{random_doubly_stochastic, Mode, NamedKind, NonnegMatrix, RationalMatrix};
use crate::mixing::{
    canonical_paths_bound, continuous_mixing_report, mixing_bounds_with, mixing_time, MixOptions,
};
use crate::pf::{additive_symmetrize, lazify, pf_data};
use crate::spectral::{
    eigenvalues, exact_deflated_nilpotency, nontrivial_radius_bound, op_norm, singular_values,
    spectral_summary, spectral_summary_with_schur, triangular_mix_power, triangular_power_bound,
    SchurFactors, SpectralSummary,
};

pub const CRITERIA: [(u8, &str); 13] = [
    (1, "construction exactness"),
    (2, "zero nontrivial spectrum"),
    (3, "singular values"),
    (4, "expansion bracket"),
    (5, "gamma witness table"),
    (6, "perturbation sensitivity"),
    (7, "inequality property suite"),
    (8, "submultiplicativity"),
    (9, "triangular power bounds"),
    (10, "mixing sandwiches"),
    (11, "construction mixing scaling"),
    (12, "continuous-time sandwich"),
    (13, "family spectra"),
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} [c{:02}] {}: {}",
            self.id, self.name, self.detail
        )
    }
}

const CONSTRUCTION_NS: [usize; 6] = [4, 9, 16, 25, 49, 100];

pub fn run_criterion(id: u8, quick: bool) -> Result<CriterionOutcome> {
    let (passed, detail) = match id {
        1 => construction_exactness(quick)?,
        2 => zero_spectrum()?,
        3 => singular_value_profile()?,
        4 => expansion_bracket()?,
        5 => gamma_table()?,
        6 => sensitivity()?,
        7 => inequality_suite(quick)?,
        8 => submultiplicativity(quick)?,
        9 => triangular_bounds(quick)?,
        10 => mixing_sandwiches(quick)?,
        11 => construction_scaling()?,
        12 => continuous_sandwich(quick)?,
        13 => family_spectra()?,
        _ => {
            return Err(crate::Error::Domain(format!(
                "no acceptance criterion {id}"
            )))
        }
    };
    let name = CRITERIA[usize::from(id) - 1].1;
    Ok(CriterionOutcome {
        id,
        name,
        passed,
        detail,
    })
}

pub fn run_all(quick: bool) -> Vec<Result<CriterionOutcome>> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, quick))
        .collect()
}

fn failures_detail(checked: usize, failures: &[String]) -> String {
    if failures.is_empty() {
        format!("{checked} checks")
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        format!(
            "{} of {checked} checks failed: {}",
            failures.len(),
            shown.join("; ")
        )
    }
}

fn construction_exactness(quick: bool) -> Result<(bool, String)> {
    let ns: &[usize] = if quick {
        &CONSTRUCTION_NS[..4]
    } else {
        &CONSTRUCTION_NS
    };
    let mut failures = Vec::new();
    for &n in ns {
        let a = rogue_matrix(n, Mode::Rational)?;
        let q = a.exact().expect("rational mode");
        let (u, t) = schur_witness_exact(n)?;
        if !q.is_doubly_stochastic() {
            failures.push(format!("n={n}: not doubly stochastic"));
        }
        if !u.mul(&u.transpose()).is_identity() {
            failures.push(format!("n={n}: U not orthogonal"));
        }
        if u.mul(&t).mul(&u.transpose()) != *q {
            failures.push(format!("n={n}: U T Uᵀ differs from A"));
        }
    }
    Ok((
        failures.is_empty(),
        failures_detail(3 * ns.len(), &failures),
    ))
}

fn max_nontrivial_generic(a: &NonnegMatrix) -> Result<f64> {
    let pf = pf_data(a, Config::default().pf_tol)?;
    let s = spectral_summary(a, &pf.w)?;
    Ok(s.nontrivial_eigs
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

fn zero_spectrum() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_generic = 0.0f64;
    for &n in &CONSTRUCTION_NS {
        let f = witness_schur_factors(n)?;
        let s = rogue_spectrum(n)?;
        let m = s
            .nontrivial_eigs
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(m);
        if m > 1e-7 || f.lower_residual() > 1e-12 || f.reconstruction_residual > 1e-12 {
            failures.push(format!(
                "n={n}: max |λ| {m:.2e}, lower part {:.2e}",
                f.lower_residual()
            ));
        }
        worst_generic = worst_generic.max(max_nontrivial_generic(&rogue_matrix(n, Mode::Float)?)?);
        let exact = rogue_matrix(n, Mode::Rational)?;
        if exact_deflated_nilpotency(exact.exact().expect("rational mode"))?.is_none() {
            failures.push(format!("n={n}: A − J is not nilpotent in exact arithmetic"));
        }
    }
    let detail = format!(
        "{}; max nontrivial |λ| from the witness Schur form {worst:.2e}, A − J nilpotent in exact arithmetic (unstructured eigensolver {worst_generic:.2e})",
        failures_detail(2 * CONSTRUCTION_NS.len(), &failures)
    );
    Ok((failures.is_empty(), detail))
}

fn singular_value_profile() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for &n in &CONSTRUCTION_NS {
        let r = construction_coefficients::<f64>(n)?.r;
        let s = singular_values(rogue_matrix(n, Mode::Float)?.as_dmatrix());
        let dev = s
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let want = if k == 0 {
                    1.0
                } else if k == n - 1 {
                    0.0
                } else {
                    r
                };
                (x - want).abs()
            })
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        if dev > 1e-8 {
            failures.push(format!("n={n}: deviation {dev:.2e}"));
        }
    }
    let detail = format!(
        "{}; max deviation {worst:.2e}",
        failures_detail(CONSTRUCTION_NS.len(), &failures)
    );
    Ok((failures.is_empty(), detail))
}

fn expansion_bracket() -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &n in &CONSTRUCTION_NS {
        let a = rogue_matrix(n, Mode::Float)?;
        let pf = pf_data(&a, Config::default().pf_tol)?;
        let sq = (n as f64).sqrt();
        let (lo, hi) = if n <= 16 {
            let phi = phi_exact(&a, &pf, 16)?.phi;
            (phi, phi)
        } else {
            let s2 = singular_values(a.as_dmatrix())[1];
            ((1.0 - s2) / 2.0, phi_single_cut(&a, &pf)?.phi)
        };
        let ok = if n <= 16 {
            lo >= 1.0 / (6.0 * sq) - tol && hi <= 1.0 / sq + tol
        } else {
            lo >= 1.0 / (6.0 * sq) - tol && hi < 1.0 / sq + tol && lo <= hi
        };
        rows.push(format!("n={n} [{lo:.5}, {hi:.5}]"));
        if !ok {
            failures.push(format!("n={n}: [{lo}, {hi}]"));
        }
    }
    let detail = format!(
        "{}; {}",
        failures_detail(CONSTRUCTION_NS.len(), &failures),
        rows.join(", ")
    );
    Ok((failures.is_empty(), detail))
}

fn gamma_table() -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &n in &CONSTRUCTION_NS {
        let g = crate::bounds::gamma_witness(n)?;
        let a = rogue_matrix(n, Mode::Float)?;
        let phi_lo = if n <= 16 {
            g.phi
        } else {
            (1.0 - singular_values(a.as_dmatrix())[1]) / 2.0
        };
        let lower_ratio = phi_lo / (1.0 - g.re_lambda2);
        let upper = 1.0 / (n as f64).sqrt();
        if g.gamma_upper_witness > upper + tol || lower_ratio < g.gamma_lower_bound - tol {
            failures.push(format!(
                "n={n}: ratio in [{lower_ratio}, {}]",
                g.gamma_upper_witness
            ));
        }
        rows.push(format!("n={n} {:.4}≤{upper:.4}", g.gamma_upper_witness));
    }
    let detail = format!(
        "{}; {}",
        failures_detail(2 * CONSTRUCTION_NS.len(), &failures),
        rows.join(", ")
    );
    Ok((failures.is_empty(), detail))
}

fn sensitivity() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for n in [16usize, 100] {
        let a = rogue_matrix(n, Mode::Rational)?;
        let p = perturbed_rogue(n, Mode::Rational)?;
        let diff = p
            .exact()
            .expect("rational")
            .sub(a.exact().expect("rational"));
        let moved = positive_mass(&diff);
        let b = construction_coefficients::<num_rational::BigRational>(n)?.b;
        let two_b = &b + &b;
        let bound = num_rational::BigRational::new(2.into(), num_integer::Roots::sqrt(&n).into());
        let mut eigs = eigenvalues(p.to_float().as_dmatrix())?;
        eigs.sort_by(|x, y| (x - 1.0).norm().total_cmp(&(y - 1.0).norm()));
        let dist = (eigs[1] - 1.0).norm();
        if moved != two_b || moved >= bound || dist > 1e-9 {
            failures.push(format!("n={n}: |λ₂ − 1| = {dist:.2e}, moved {moved}"));
        }
        rows.push(format!("n={n} |λ₂−1|={dist:.1e} moved={moved}"));
    }
    let detail = format!("{}; {}", failures_detail(2, &failures), rows.join(", "));
    Ok((failures.is_empty(), detail))
}

fn positive_mass(d: &RationalMatrix) -> num_rational::BigRational {
    let n = d.n();
    let mut acc = num_rational::BigRational::from_integer(0.into());
    for i in 0..n {
        for j in 0..n {
            let x = d.get(i, j);
            if x > num_rational::BigRational::from_integer(0.into()) {
                acc += x;
            }
        }
    }
    acc
}

/// Random doubly stochastic R with n ∈ [3, 16], and its lazy version,
/// square and additive symmetrization.
fn ds_fixtures(count: usize) -> Result<Vec<(String, NonnegMatrix)>> {
    let seed = Config::default().seed;
    let mut out = Vec::with_capacity(4 * count);
    for i in 0..count {
        let n = 3 + i % 14;
        let a = random_doubly_stochastic(n, seed + i as u64, Config::default().sinkhorn_tol)?;
        out.push((format!("ds{i}(n={n})"), a.clone()));
        out.push((format!("lazy ds{i}"), lazify(&a, 0.5)?));
        out.push((format!("ds{i}²"), a.mul(&a)));
        out.push((format!("sym ds{i}"), additive_symmetrize(&a)));
    }
    Ok(out)
}

fn inequality_suite(quick: bool) -> Result<(bool, String)> {
    let fixtures = ds_fixtures(if quick { 20 } else { 200 })?;
    let reports: Vec<_> = {
        use rayon::prelude::*;
        fixtures
            .par_iter()
            .map(|(name, m)| (name, bound_report_with(m, &BoundOptions::default())))
            .collect()
    };
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut records = 0;
    for (name, rep) in reports {
        let rep = rep?;
        records += rep.records.len();
        min_margin = min_margin.min(rep.min_margin());
        for r in &rep.records {
            if !r.informational && r.status == crate::bounds::Status::Fail {
                failures.push(format!("{name} {}: {} > {}", r.name, r.lhs, r.rhs));
            }
        }
    }
    let detail = format!(
        "{} over {} matrices; min margin {min_margin:.3e}",
        failures_detail(records, &failures),
        fixtures.len()
    );
    Ok((failures.is_empty(), detail))
}

fn submultiplicativity(quick: bool) -> Result<(bool, String)> {
    use rayon::prelude::*;
    let fixtures = ds_fixtures(if quick { 20 } else { 200 })?;
    let results: Vec<Result<Vec<(String, f64, f64)>>> = fixtures
        .par_iter()
        .map(|(name, m)| {
            let pf = pf_data(m, Config::default().pf_tol)?;
            [2u32, 3, 4]
                .iter()
                .map(|&k| {
                    let (pk, kp) = submultiplicativity_check(m, &pf, k)?;
                    Ok((format!("{name} k={k}"), pk, kp))
                })
                .collect()
        })
        .collect();
    let mut failures = Vec::new();
    let mut checked = 0;
    for r in results {
        for (name, pk, kp) in r? {
            checked += 1;
            if pk > kp + 1e-10 {
                failures.push(format!("{name}: {pk} > {kp}"));
            }
        }
    }
    Ok((failures.is_empty(), failures_detail(checked, &failures)))
}

fn random_triangular(rng: &mut ChaCha8Rng, n: usize, alpha: f64) -> DMatrix<f64> {
    let mut t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha * (2.0 * rng.random::<f64>() - 1.0)
        } else if i < j {
            2.0 * rng.random::<f64>() - 1.0
        } else {
            0.0
        }
    });
    let s = op_norm(&t);
    if s > 1.0 {
        t /= s;
    }
    t
}

fn triangular_bounds(quick: bool) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(Config::default().seed);
    let alphas = [0.0, 0.3, 0.7];
    let mut cases = Vec::new();
    for i in 0..if quick { 30 } else { 100 } {
        let n = 1 + i % 8;
        let alpha = alphas[i % 3];
        cases.push((n, alpha, random_triangular(&mut rng, n, alpha)));
    }
    for n in 1..=8 {
        for &alpha in &alphas {
            let jordan = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    alpha
                } else if j == i + 1 {
                    1.0 - alpha
                } else {
                    0.0
                }
            });
            cases.push((n, alpha, jordan));
        }
    }
    let mut failures = Vec::new();
    let mut checked = 0;
    for (idx, (n, alpha, t)) in cases.iter().enumerate() {
        let mut p = t.clone();
        for k in 1..=50 {
            if k > 1 {
                p = &p * t;
            }
            let bound = triangular_power_bound(*n, 1.0, *alpha, k)?;
            let norm = op_norm(&p);
            checked += 1;
            if norm > bound * (1.0 + 1e-9) + 1e-12 {
                failures.push(format!(
                    "case {idx} n={n} α={alpha} k={k}: {norm} > {bound}"
                ));
            }
        }
        for eps in [0.1, 0.01] {
            let k = triangular_mix_power(*n, *alpha, eps)?;
            let norm = op_norm(&matrix_power(t, k));
            checked += 1;
            if norm > eps {
                failures.push(format!(
                    "case {idx} n={n} α={alpha} ε={eps}: ‖T^{k}‖ = {norm}"
                ));
            }
        }
    }
    let detail = format!(
        "{} over {} matrices",
        failures_detail(checked, &failures),
        cases.len()
    );
    Ok((failures.is_empty(), detail))
}

fn matrix_power(t: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut acc = DMatrix::identity(t.nrows(), t.ncols());
    let mut base = t.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

fn positive_random(n: usize, seed: u64) -> Result<NonnegMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NonnegMatrix::from_dmatrix(
        DMatrix::from_fn(n, n, |_, _| {
            let x: f64 = rng.random();
            if x < 0.3 {
                0.0
            } else {
                x
            }
        }) + DMatrix::from_fn(n, n, |i, j| if j == (i + 1) % n { 1.0 } else { 0.0 }),
    )
}

/// Spectrum of pI + (1 − p)A_n read off the witness Schur form.
fn lazy_rogue_spectrum(n: usize, lazy: &NonnegMatrix) -> Result<SpectralSummary> {
    let f = witness_schur_factors(n)?;
    let id = DMatrix::<Complex64>::identity(n, n);
    let lazy_t = (&f.t + id) * Complex64::new(0.5, 0.0);
    let factors = SchurFactors {
        reconstruction_residual: f.reconstruction_residual,
        u: f.u,
        t: lazy_t,
    };
    let w = vec![1.0 / (n as f64).sqrt(); n];
    spectral_summary_with_schur(lazy, &w, &factors)
}

fn mixing_fixtures(quick: bool) -> Result<Vec<(String, NonnegMatrix, Option<SpectralSummary>)>> {
    let seed = Config::default().seed;
    let mut out = Vec::new();
    let step = if quick { 3 } else { 1 };
    for n in (3..=12).step_by(step) {
        for s in 0..2 {
            let a = random_doubly_stochastic(n, seed + 1000 + 10 * n as u64 + s, 1e-12)?;
            out.push((format!("lazy ds n={n} #{s}"), lazify(&a, 0.5)?, None));
        }
        let c = crate::matrix::named_matrix(NamedKind::DirectedCycle, n, Mode::Float)?;
        out.push((format!("lazy cycle n={n}"), lazify(&c, 0.5)?, None));
    }
    for n in (4..=8).step_by(step) {
        let r = positive_random(n, seed + n as u64)?;
        let unit = crate::matrix::scale_to_unit_pf(&r, &pf_data(&r, Config::default().pf_tol)?)?;
        out.push((format!("lazy positive n={n}"), lazify(&unit, 0.5)?, None));
    }
    for n in [4usize, 9] {
        let l = lazify(&rogue_matrix(n, Mode::Float)?, 0.5)?;
        let s = lazy_rogue_spectrum(n, &l)?;
        out.push((format!("lazy rogue n={n}"), l, Some(s)));
    }
    for p in [5usize, 7, 11] {
        out.push((
            format!("lazy kv p={p}"),
            lazify(&klawe_vazirani(p, Mode::Float)?, 0.5)?,
            None,
        ));
    }
    for k in [2usize, 3] {
        out.push((
            format!("lazy de bruijn k={k}"),
            lazify(&de_bruijn(k, Mode::Float)?, 0.5)?,
            None,
        ));
    }
    Ok(out)
}

fn mixing_sandwiches(quick: bool) -> Result<(bool, String)> {
    use rayon::prelude::*;
    let eps = Config::default().eps;
    let fixtures = mixing_fixtures(quick)?;
    let results: Vec<_> = fixtures
        .par_iter()
        .map(|(name, m, spec)| {
            let pf = pf_data(m, Config::default().pf_tol)?;
            let opts = MixOptions {
                spectrum: spec.clone(),
                ..MixOptions::default()
            };
            Ok((name, mixing_bounds_with(m, &pf, eps, &opts)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, rep) in results {
        if rep.tau.steps().is_none() {
            failures.push(format!("{name}: diverged"));
        }
        for r in &rep.records {
            checked += 1;
            if r.status != crate::bounds::Status::Pass {
                failures.push(format!(
                    "{name} {}: {} vs {} ({:?})",
                    r.name, r.lhs, r.rhs, r.status
                ));
            }
        }
    }
    let detail = format!(
        "{} over {} fixtures",
        failures_detail(checked, &failures),
        fixtures.len()
    );
    Ok((failures.is_empty(), detail))
}

fn construction_scaling() -> Result<(bool, String)> {
    let eps = Config::default().eps;
    let ns = [16usize, 64, 256];
    let mut cs = Vec::new();
    let mut rhos = Vec::new();
    let mut failures = Vec::new();
    for &n in &ns {
        let a = rogue_matrix(n, Mode::Float)?;
        let l = lazify(&a, 0.5)?;
        let pf = pf_data(&l, Config::default().pf_tol)?;
        let Some(tau) = mixing_time(&l, &pf, eps, Config::default().tau_max)?.steps() else {
            failures.push(format!("n={n}: diverged"));
            continue;
        };
        let nf = n as f64;
        cs.push(tau as f64 / (nf.sqrt() * nf.ln()));

        let aat = gram(&a)?;
        let pb = canonical_paths_bound(&aat, None, eps)?;
        rhos.push(pb.rho / nf.sqrt());
        if !pb.records[0].pass {
            failures.push(format!(
                "n={n}: 1/ρ = {} exceeds the gap {}",
                pb.gap_lower, pb.gap_actual
            ));
        }
        let pl = canonical_paths_bound(&gram(&l)?, None, eps)?;
        if tau as f64 > pl.tau_upper_singular {
            failures.push(format!(
                "n={n}: τ = {tau} > 2ρ ln(n/ε) = {}",
                pl.tau_upper_singular
            ));
        }
    }
    let stable = |v: &[f64]| {
        let c = v.iter().cloned().fold(0.0, f64::max);
        v.len() == ns.len() && v.iter().all(|&x| x >= 0.5 * c && x <= 1.5 * c)
    };
    if !stable(&cs) {
        failures.push(format!("τ/(√n ln n) not stable: {cs:?}"));
    }
    if !stable(&rhos) {
        failures.push(format!("ρ/√n not stable: {rhos:?}"));
    }
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let detail = format!(
        "{}; τ/(√n ln n) = [{}], ρ_W(AAᵀ)/√n = [{}] for n = 16, 64, 256",
        failures_detail(3 * ns.len() + 2, &failures),
        fmt(&cs),
        fmt(&rhos)
    );
    Ok((failures.is_empty(), detail))
}

/// Symmetrized A·Aᵀ.
fn gram(a: &NonnegMatrix) -> Result<NonnegMatrix> {
    let m = a.as_dmatrix();
    let p = m * m.transpose();
    NonnegMatrix::from_dmatrix((&p + p.transpose()) * 0.5)
}

fn continuous_sandwich(quick: bool) -> Result<(bool, String)> {
    use rayon::prelude::*;
    let cfg = Config::default();
    let seed = cfg.seed;
    let step = if quick { 3 } else { 1 };
    let mut fixtures = Vec::new();
    for n in (3..=10).step_by(step) {
        fixtures.push((
            format!("cycle n={n}"),
            crate::matrix::named_matrix(NamedKind::DirectedCycle, n, Mode::Float)?,
        ));
        fixtures.push((
            format!("ds n={n}"),
            random_doubly_stochastic(n, seed + 2000 + n as u64, 1e-12)?,
        ));
        fixtures.push((
            format!("positive n={n}"),
            positive_random(n, seed + 3000 + n as u64)?,
        ));
    }
    fixtures.push(("rogue n=4".into(), rogue_matrix(4, Mode::Float)?));
    fixtures.push(("rogue n=9".into(), rogue_matrix(9, Mode::Float)?));
    fixtures.push(("kv p=5".into(), klawe_vazirani(5, Mode::Float)?));
    fixtures.push(("kv p=7".into(), klawe_vazirani(7, Mode::Float)?));
    let results = fixtures
        .par_iter()
        .map(|(name, m)| {
            let pf = pf_data(m, cfg.pf_tol)?;
            Ok((name, continuous_mixing_report(m, &pf, cfg.eps, cfg.t_max)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, rep) in results {
        if rep.t.is_none() {
            failures.push(format!("{name}: diverged"));
        }
        for r in &rep.records {
            checked += 1;
            if r.status != crate::bounds::Status::Pass {
                failures.push(format!("{name} {}: {} vs {}", r.name, r.lhs, r.rhs));
            }
        }
    }
    let detail = format!(
        "{} over {} fixtures",
        failures_detail(checked, &failures),
        fixtures.len()
    );
    Ok((failures.is_empty(), detail))
}

/// De Bruijn orders k ≤ 6 whose nontrivial spectrum is not certified zero
/// or whose k-th power misses J.
pub fn de_bruijn_failures() -> Result<Vec<String>> {
    let mut failures = Vec::new();
    for k in 1..=6usize {
        let exact = de_bruijn(k, Mode::Rational)?;
        let certificate = exact_deflated_nilpotency(exact.exact().expect("rational mode"))?;
        let a = exact.to_float();
        let n = a.n();
        let j = DMatrix::from_element(n, n, 1.0 / n as f64);
        let dev = (matrix_power(a.as_dmatrix(), k) - j).amax();
        if certificate.is_none() || dev > 1e-12 {
            failures.push(format!(
                "de bruijn k={k}: nilpotency {certificate:?}, ‖A^k − J‖ {dev:.2e}"
            ));
        }
    }
    Ok(failures)
}

/// Distinct nontrivial eigenvalue moduli of klawe_vazirani(p) that are
/// neither 0 nor 1/2 (within 1e−8), ascending.
pub fn klawe_vazirani_offending_moduli(p: usize) -> Result<Vec<f64>> {
    let a = klawe_vazirani(p, Mode::Float)?;
    let mut eigs = eigenvalues(a.as_dmatrix())?;
    let k = eigs
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - 1.0).norm().total_cmp(&(y.1 - 1.0).norm()))
        .map(|x| x.0)
        .expect("p >= 3");
    eigs.remove(k);
    let mut off: Vec<f64> = eigs
        .iter()
        .map(|z| z.norm())
        .filter(|m| m.abs() > 1e-8 && (m - 0.5).abs() > 1e-8)
        .collect();
    off.sort_by(f64::total_cmp);
    off.dedup_by(|x, y| (*x - *y).abs() < 1e-8);
    Ok(off)
}

pub const KLAWE_VAZIRANI_PRIMES: [usize; 4] = [5, 7, 11, 13];

fn family_spectra() -> Result<(bool, String)> {
    let mut failures = de_bruijn_failures()?;
    let mut generic = 0.0f64;
    for k in [3usize, 6] {
        let a = de_bruijn(k, Mode::Float)?;
        let w = vec![1.0 / (a.n() as f64).sqrt(); a.n()];
        generic = generic.max(nontrivial_radius_bound(&a, &w, k)?);
    }
    for p in KLAWE_VAZIRANI_PRIMES {
        let off = klawe_vazirani_offending_moduli(p)?;
        if !off.is_empty() {
            let shown: Vec<String> = off.iter().map(|m| format!("{m:.6}")).collect();
            failures.push(format!("klawe-vazirani p={p}: moduli {}", shown.join(", ")));
        }
    }
    let detail = format!(
        "{}; de Bruijn A − J nilpotent in exact arithmetic (float Gelfand radius {generic:.1e})",
        failures_detail(10, &failures)
    );
    Ok((failures.is_empty(), detail))
}
