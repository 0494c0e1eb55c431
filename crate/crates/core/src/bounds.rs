//! Two-sided inequalities between edge expansion, the nontrivial spectrum,
//! singular values, κ and n, evaluated on concrete matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::config::Config;
use crate::construction::{construction_coefficients, rogue_matrix, witness_schur_factors};
use crate::error::{Error, Result};
use crate::expansion::{phi_exact, phi_single_cut, Method};
use crate::matrix::{scale_to_unit_pf, validate, Mode, NonnegMatrix};
use crate::pf::{additive_symmetrize, balance, pf_data, Classification, PfData};
use crate::spectral::{
    eigenvalues, singular_values, spectral_summary, spectral_summary_with_schur, SpectralSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
    NotApplicable,
}

/// One inequality lhs ≤ rhs.
#[derive(Debug, Clone, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub status: Status,
    /// Logged for comparison only; excluded from the verdict.
    pub informational: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiBracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub method: Method,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub classification: Classification,
    pub kappa: f64,
    pub phi: PhiBracket,
    pub re_lambda2: f64,
    pub mod_lambda_m: f64,
    pub sigma2: f64,
    pub lambda2_sym: f64,
    pub detailed_balance_dev: Option<f64>,
    pub records: Vec<Inequality>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.informational || r.status != Status::Fail)
    }

    pub fn record(&self, name: &str) -> Option<&Inequality> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn min_margin(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| !r.informational && matches!(r.status, Status::Pass | Status::Fail))
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn slack(lhs: f64, rhs: f64) -> f64 {
    Config::default().bound_slack * 1f64.max(lhs.abs()).max(rhs.abs())
}

pub(crate) fn decided(name: &str, lhs: f64, rhs: f64) -> Inequality {
    let margin = rhs - lhs;
    let pass = margin >= -slack(lhs, rhs);
    Inequality {
        name: name.into(),
        lhs,
        rhs,
        margin,
        pass,
        status: if pass { Status::Pass } else { Status::Fail },
        informational: false,
    }
}

pub(crate) fn not_applicable(name: &str) -> Inequality {
    Inequality {
        name: name.into(),
        lhs: f64::NAN,
        rhs: f64::NAN,
        margin: f64::NAN,
        pass: true,
        status: Status::NotApplicable,
        informational: false,
    }
}

/// X ≤ φ given φ ∈ [lo, hi].
fn lower_on_phi(name: &str, x: f64, phi: &PhiBracket) -> Inequality {
    if phi.exact || x <= phi.lower + slack(x, phi.lower) {
        return decided(name, x, phi.lower);
    }
    if x > phi.upper + slack(x, phi.upper) {
        return decided(name, x, phi.upper);
    }
    Inequality {
        status: Status::Indeterminate,
        pass: true,
        ..decided(name, x, phi.upper)
    }
}

/// φ ≤ X given φ ∈ [lo, hi].
fn upper_on_phi(name: &str, x: f64, phi: &PhiBracket) -> Inequality {
    if phi.exact || phi.upper <= x + slack(phi.upper, x) {
        return decided(name, phi.upper, x);
    }
    if phi.lower > x + slack(phi.lower, x) {
        return decided(name, phi.lower, x);
    }
    Inequality {
        status: Status::Indeterminate,
        pass: true,
        ..decided(name, phi.lower, x)
    }
}

/// Exact φ up to `n_limit`, otherwise [(1 − σ₂)/2, best single-vertex cut].
pub(crate) fn phi_bracket(
    unit: &NonnegMatrix,
    pf: &PfData,
    sigma2: f64,
    n_limit: usize,
) -> Result<PhiBracket> {
    if unit.n() <= n_limit {
        let res = phi_exact(unit, pf, n_limit)?;
        return Ok(PhiBracket {
            lower: res.phi,
            upper: res.phi,
            exact: true,
            method: res.method,
        });
    }
    let single = phi_single_cut(unit, pf)?;
    Ok(PhiBracket {
        lower: ((1.0 - sigma2) / 2.0).max(0.0),
        upper: single.phi,
        exact: false,
        method: Method::SingleCut,
    })
}

#[derive(Debug, Clone, Default)]
pub struct BoundOptions {
    pub n_limit: Option<usize>,
    /// Spectrum to use in place of the deflated eigensolver output.
    pub spectrum: Option<SpectralSummary>,
}

fn degenerate_spectrum(r: &NonnegMatrix, pf: &PfData) -> Result<Option<(f64, f64, f64)>> {
    if !(pf.r > 0.0) {
        return Ok(None);
    }
    let scaled = r.as_dmatrix() / pf.r;
    let mut eigs = eigenvalues(&scaled)?;
    let k = eigs
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.re - 1.0)
                .hypot(a.1.im)
                .total_cmp(&(b.1.re - 1.0).hypot(b.1.im))
        })
        .map(|x| x.0)
        .expect("n >= 1");
    eigs.remove(k);
    let re2 = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let m = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let s2 = singular_values(&scaled).get(1).cloned().unwrap_or(0.0);
    Ok(Some((re2.min(1.0), m, s2)))
}

pub fn bound_report(r: &NonnegMatrix) -> Result<BoundReport> {
    bound_report_with(r, &BoundOptions::default())
}

pub fn bound_report_with(r: &NonnegMatrix, opts: &BoundOptions) -> Result<BoundReport> {
    let cfg = Config::default();
    let n = r.n();
    let nf = n as f64;
    let pf = pf_data(r, cfg.pf_tol)?;

    if pf.classification == Classification::ReducibleDegenerate {
        let spec = degenerate_spectrum(r, &pf)?;
        let zero = PhiBracket {
            lower: 0.0,
            upper: 0.0,
            exact: true,
            method: Method::DefinitionZero,
        };
        let mut records = Vec::new();
        match spec {
            Some((re2, _, _)) => records.push(upper_on_phi(
                "fiedler_upper",
                (2.0 * (1.0 - re2)).max(0.0).sqrt(),
                &zero,
            )),
            None => records.push(not_applicable("fiedler_upper")),
        }
        for name in [
            "general_lower",
            "ds_lower_35n",
            "modulus_lower",
            "sigma_lower",
            "sigma_lower_c2",
            "sigma_lower_c3",
            "sigma_lower_c4",
            "sym_sandwich_lo",
            "sym_sandwich_hi",
        ] {
            records.push(not_applicable(name));
        }
        let (re2, m, s2) = spec.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        return Ok(BoundReport {
            n,
            classification: pf.classification,
            kappa: 0.0,
            phi: zero,
            re_lambda2: re2,
            mod_lambda_m: m,
            sigma2: s2,
            lambda2_sym: f64::NAN,
            detailed_balance_dev: None,
            records,
        });
    }

    let unit = scale_to_unit_pf(r, &pf)?;
    let pf_unit = if pf.r == 1.0 {
        pf.clone()
    } else {
        pf_data(&unit, cfg.pf_tol)?
    };
    let (a, w) = balance(&unit, &pf_unit)?;
    let spec = match &opts.spectrum {
        Some(s) => s.clone(),
        None => spectral_summary(&a, &w)?,
    };
    let kappa = pf_unit.kappa;
    let log_term = nf + (1.0 / kappa).ln();
    let gap = 1.0 - spec.lambda2.re;

    let phi = phi_bracket(
        &unit,
        &pf_unit,
        spec.sigma2,
        opts.n_limit.unwrap_or(cfg.phi_n_limit),
    )?;

    let m = additive_symmetrize(&a);
    let mut sym: Vec<f64> = SymmetricEigen::new(m.as_dmatrix().clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    sym.sort_by(|x, y| y.total_cmp(x));
    let lambda2_sym = sym.get(1).cloned().unwrap_or(0.0);
    let db_dev = validate(&unit, Some(&pf_unit), cfg.stochastic_tol)?.detailed_balance_dev;

    let mut records = vec![
        upper_on_phi("fiedler_upper", (2.0 * gap).max(0.0).sqrt(), &phi),
        lower_on_phi("general_lower", gap / (30.0 * log_term), &phi),
    ];
    if unit.is_doubly_stochastic() {
        records.push(lower_on_phi("ds_lower_35n", gap / (35.0 * nf), &phi));
    } else {
        records.push(not_applicable("ds_lower_35n"));
    }
    let mod_gap = 1.0 - spec.lambda_m.norm();
    records.push(lower_on_phi(
        "modulus_lower",
        mod_gap / (20.0 * log_term),
        &phi,
    ));
    let mut proof = lower_on_phi(
        "modulus_lower_proof_constant",
        mod_gap / (15.0 * log_term),
        &phi,
    );
    proof.informational = true;
    records.push(proof);
    records.push(lower_on_phi("sigma_lower", (1.0 - spec.sigma2) / 2.0, &phi));
    for c in [2, 3, 4] {
        let x = (1.0 - spec.sigma2.powi(c)) / (2.0 * c as f64);
        records.push(lower_on_phi(&format!("sigma_lower_c{c}"), x, &phi));
    }
    let ratio = gap / log_term;
    records.push(decided(
        "sym_sandwich_lo",
        ratio * ratio / 1800.0,
        1.0 - lambda2_sym,
    ));
    records.push(decided("sym_sandwich_hi", 1.0 - lambda2_sym, gap));
    match db_dev {
        Some(dev) if dev <= cfg.detailed_balance_tol => {
            records.push(lower_on_phi("detailed_balance_cheeger_lo", gap / 2.0, &phi));
            records.push(upper_on_phi(
                "detailed_balance_cheeger_hi",
                (2.0 * gap).max(0.0).sqrt(),
                &phi,
            ));
        }
        _ => {
            records.push(not_applicable("detailed_balance_cheeger_lo"));
            records.push(not_applicable("detailed_balance_cheeger_hi"));
        }
    }

    Ok(BoundReport {
        n,
        classification: pf.classification,
        kappa,
        phi,
        re_lambda2: spec.lambda2.re,
        mod_lambda_m: spec.lambda_m.norm(),
        sigma2: spec.sigma2,
        lambda2_sym,
        detailed_balance_dev: db_dev,
        records,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaRecord {
    pub n: usize,
    /// φ(A_n)/(1 − Re λ₂(A_n)), with φ replaced by its upper bracket when not enumerated.
    pub gamma_upper_witness: f64,
    pub gamma_lower_bound: f64,
    pub phi: f64,
    pub phi_method: Method,
    pub re_lambda2: f64,
}

const GAMMA_BRUTE_FORCE_MAX_N: usize = 16;

/// Spectral summary of the float A_n read off its closed-form Schur basis.
pub fn rogue_spectrum(n: usize) -> Result<SpectralSummary> {
    let a = rogue_matrix(n, Mode::Float)?;
    let w = vec![1.0 / (n as f64).sqrt(); n];
    spectral_summary_with_schur(&a, &w, &witness_schur_factors(n)?)
}

pub fn gamma_witness(n: usize) -> Result<GammaRecord> {
    let a = rogue_matrix(n, Mode::Float)?;
    let spec = rogue_spectrum(n)?;
    let (phi, phi_method) = if n <= GAMMA_BRUTE_FORCE_MAX_N {
        let pf = pf_data(&a, Config::default().pf_tol)?;
        (
            phi_exact(&a, &pf, GAMMA_BRUTE_FORCE_MAX_N)?.phi,
            Method::BruteForce,
        )
    } else {
        (construction_coefficients::<f64>(n)?.b, Method::SingleCut)
    };
    Ok(GammaRecord {
        n,
        gamma_upper_witness: phi / (1.0 - spec.lambda2.re),
        gamma_lower_bound: 1.0 / (35.0 * n as f64),
        phi,
        phi_method,
        re_lambda2: spec.lambda2.re,
    })
}

/// (φ(R^k), k·φ(R)) with both sides enumerated under R's own Perron pair.
pub fn submultiplicativity_check(r: &NonnegMatrix, pf: &PfData, k: u32) -> Result<(f64, f64)> {
    if pf.classification != Classification::Irreducible {
        return Err(Error::Domain(
            "submultiplicativity check needs an irreducible matrix".into(),
        ));
    }
    if !(1..=6).contains(&k) {
        return Err(Error::Domain(format!("power k = {k} must lie in 1..=6")));
    }
    let limit = Config::default().phi_n_limit;
    let phi = phi_exact(r, pf, limit)?.phi;
    let rk = NonnegMatrix::from_dmatrix(power(r.as_dmatrix(), k))?;
    let phi_k = phi_exact(&rk, pf, limit)?.phi;
    Ok((phi_k, k as f64 * phi))
}

fn power(m: &DMatrix<f64>, k: u32) -> DMatrix<f64> {
    let mut acc = m.clone();
    for _ in 1..k {
        acc = &acc * m;
    }
    acc
}

/// 30·δ·(n + ln(1/κ)).
pub fn perturbation_gap_bound(delta: f64, n: usize, kappa: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!(
            "delta = {delta} must be nonnegative"
        )));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Domain(format!("kappa = {kappa} must lie in (0, 1]")));
    }
    Ok(30.0 * delta * (n as f64 + (1.0 / kappa).ln()))
}
