//! Mixing times in the D_u-weighted ℓ₁ sense, for discrete powers and for the
//! continuous-time operator exp(t(R − I)), with the bound sandwiches that
//! surround them.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{decided, phi_bracket, Inequality, PhiBracket, Status};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::NonnegMatrix;
use crate::pf::{additive_symmetrize, balance, Classification, PfData};
use crate::spectral::{spectral_summary, SpectralSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tau {
    Steps(u64),
    /// The criterion was not met by the step cap.
    Diverged {
        cap: u64,
    },
}

impl Tau {
    pub fn steps(self) -> Option<u64> {
        match self {
            Tau::Steps(t) => Some(t),
            Tau::Diverged { .. } => None,
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            Tau::Steps(t) => (t as f64, t as f64),
            Tau::Diverged { cap } => (cap as f64 + 1.0, f64::INFINITY),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    Ok(())
}

fn check_pair(r: &NonnegMatrix, pf: &PfData) -> Result<()> {
    if pf.u.len() != r.n() || pf.v.len() != r.n() {
        return Err(Error::Domain(
            "Perron data does not match the matrix size".into(),
        ));
    }
    if !pf.has_positive_pair() || !(pf.r > 0.0) {
        return Err(Error::DegeneratePf(
            "mixing needs a positive Perron eigenvector pair".into(),
        ));
    }
    Ok(())
}

/// max_i (1/u_i) Σ_j u_j |P_ji − v_j u_i|: the worst basis-vector start.
pub fn mixing_residual(p: &DMatrix<f64>, pf: &PfData) -> f64 {
    let n = p.nrows();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let s: f64 = (0..n)
                .map(|j| pf.u[j] * (p[(j, i)] - pf.v[j] * pf.u[i]).abs())
                .sum();
            s / pf.u[i]
        })
        .reduce(|| 0.0, f64::max)
}

/// ‖D_u(P − v uᵀ)x‖₁ / ‖D_u x‖₁ for a single start x.
pub fn start_residual(p: &DMatrix<f64>, pf: &PfData, x: &[f64]) -> f64 {
    let n = p.nrows();
    let ux: f64 = (0..n).map(|i| pf.u[i] * x[i]).sum();
    let norm: f64 = (0..n).map(|i| pf.u[i] * x[i].abs()).sum();
    (0..n)
        .map(|j| {
            let px: f64 = (0..n).map(|i| p[(j, i)] * x[i]).sum();
            pf.u[j] * (px - pf.v[j] * ux).abs()
        })
        .sum::<f64>()
        / norm
}

/// Smallest τ ≤ `tau_max` whose power meets the criterion, found by doubling
/// and then scanning the bracketed octave.
pub fn mixing_time(r: &NonnegMatrix, pf: &PfData, eps: f64, tau_max: u64) -> Result<Tau> {
    check_eps(eps)?;
    check_pair(r, pf)?;
    if tau_max == 0 {
        return Err(Error::Domain("tau_max must be at least 1".into()));
    }
    let base = r.as_dmatrix() / pf.r;
    let ok = |p: &DMatrix<f64>| mixing_residual(p, pf) <= eps;

    let mut pows = vec![base.clone()];
    if ok(&base) {
        return Ok(Tau::Steps(1));
    }
    loop {
        let k = pows.len() - 1;
        let next = 1u64 << (k + 1);
        if next > tau_max {
            let capped = power_from_cache(&mut pows, tau_max);
            if !ok(&capped) {
                return Ok(Tau::Diverged { cap: tau_max });
            }
            return Ok(Tau::Steps(scan(&pows[k], &base, 1 << k, tau_max, &ok)));
        }
        let sq = &pows[k] * &pows[k];
        let hit = ok(&sq);
        pows.push(sq);
        if hit {
            return Ok(Tau::Steps(scan(&pows[k], &base, 1 << k, next, &ok)));
        }
    }
}

/// First τ in (from, to] meeting the criterion, starting from p = R^from; `to` when none earlier.
fn scan(
    p: &DMatrix<f64>,
    base: &DMatrix<f64>,
    from: u64,
    to: u64,
    ok: &impl Fn(&DMatrix<f64>) -> bool,
) -> u64 {
    let mut p = p.clone();
    for tau in from + 1..to {
        p = &p * base;
        if ok(&p) {
            return tau;
        }
    }
    to
}

fn power_from_cache(pows: &mut Vec<DMatrix<f64>>, e: u64) -> DMatrix<f64> {
    let bits = 64 - e.leading_zeros() as usize;
    while pows.len() < bits {
        let last = pows.last().expect("nonempty");
        let sq = last * last;
        pows.push(sq);
    }
    let mut acc: Option<DMatrix<f64>> = None;
    for (b, p) in pows.iter().enumerate().take(bits) {
        if e >> b & 1 == 1 {
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => a * p,
            });
        }
    }
    acc.expect("e >= 1")
}

#[derive(Debug, Clone, Serialize)]
pub struct MixReport {
    pub n: usize,
    pub epsilon: f64,
    pub tau: Tau,
    pub lazy: bool,
    pub classification: Classification,
    pub kappa: f64,
    pub phi: PhiBracket,
    pub re_lambda2: f64,
    pub sigma2: f64,
    /// (1/2 − ε)/φ.
    pub lower_phi: f64,
    /// 4·ln(n/(κε))/φ².
    pub upper_phi: f64,
    pub lower_lambda: f64,
    pub upper_lambda: f64,
    pub upper_sigma_c1: f64,
    pub upper_sigma_c2: f64,
    /// τ_ε of M = (A + Aᵀ)/2 for the balanced A.
    pub tau_sym: Tau,
    pub sym_lower: f64,
    pub sym_upper: f64,
    /// ln(n/(κε))/(1 − λ₂), present under detailed balance.
    pub upper_reversible: Option<f64>,
    pub records: Vec<Inequality>,
}

impl MixReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn record(&self, name: &str) -> Option<&Inequality> {
        self.records.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct MixOptions {
    pub tau_max: u64,
    pub n_limit: usize,
    /// Spectrum of the balanced matrix to use in place of the eigensolver output.
    pub spectrum: Option<SpectralSummary>,
}

impl Default for MixOptions {
    fn default() -> Self {
        let cfg = Config::default();
        MixOptions {
            tau_max: cfg.tau_max,
            n_limit: cfg.phi_n_limit,
            spectrum: None,
        }
    }
}

/// ⌈lower⌉ ≤ τ, with τ known to lie in `range`.
fn tau_lower(name: &str, lower: f64, range: (f64, f64)) -> Inequality {
    let l = (lower - Config::default().bound_slack).ceil().max(0.0);
    if l <= range.0 {
        return decided(name, l, range.0);
    }
    if l > range.1 {
        return decided(name, l, range.1);
    }
    Inequality {
        status: Status::Indeterminate,
        pass: true,
        ..decided(name, l, range.0)
    }
}

/// τ ≤ upper, with τ known to lie in `range`.
fn tau_upper(name: &str, upper: f64, range: (f64, f64)) -> Inequality {
    if range.1 <= upper {
        return decided(name, range.1, upper);
    }
    if range.0 > upper {
        return decided(name, range.0, upper);
    }
    Inequality {
        status: Status::Indeterminate,
        pass: true,
        ..decided(name, range.0, upper)
    }
}

fn inapplicable(mut rec: Inequality) -> Inequality {
    rec.status = Status::NotApplicable;
    rec.pass = true;
    rec
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

pub fn mixing_bounds(r: &NonnegMatrix, pf: &PfData, eps: f64) -> Result<MixReport> {
    mixing_bounds_with(r, pf, eps, &MixOptions::default())
}

pub fn mixing_bounds_with(
    r: &NonnegMatrix,
    pf: &PfData,
    eps: f64,
    opts: &MixOptions,
) -> Result<MixReport> {
    check_eps(eps)?;
    check_pair(r, pf)?;
    let cfg = Config::default();
    let n = r.n();
    let nf = n as f64;
    let unit = NonnegMatrix::from_dmatrix(r.as_dmatrix() / pf.r)?;
    let unit_pf = PfData {
        r: 1.0,
        ..pf.clone()
    };
    let (a, w) = balance(&unit, &unit_pf)?;
    let spec = match &opts.spectrum {
        Some(s) => s.clone(),
        None => spectral_summary(&a, &w)?,
    };
    let phi = phi_bracket(&unit, &unit_pf, spec.sigma2, opts.n_limit)?;
    let kappa = pf.kappa;
    let ln_nke = (nf / (kappa * eps)).ln();
    let gap = 1.0 - spec.lambda2.re;

    let tau = mixing_time(&unit, &unit_pf, eps, opts.tau_max)?;
    let m = additive_symmetrize(&a);
    let m_pf = PfData {
        u: w.clone(),
        v: w.clone(),
        ..unit_pf.clone()
    };
    let tau_sym = mixing_time(&m, &m_pf, eps, opts.tau_max)?;

    let lower_phi = ratio(0.5 - eps, phi.upper);
    let upper_phi = ratio(4.0 * ln_nke, phi.lower * phi.lower);
    let lower_lambda = ratio(0.5 - eps, (2.0 * gap).max(0.0).sqrt());
    let upper_lambda = ratio(20.0 * (nf + (1.0 / (kappa * eps)).ln()), gap);
    let ln_sigma = (nf.sqrt() / (kappa.sqrt() * eps)).ln();
    let upper_sigma = |c: i32| ratio(c as f64 * ln_sigma, 1.0 - spec.sigma2.powi(c));
    let (tsl, tsh) = tau_sym.range();
    let sym_lower = (1.0 - 2.0 * eps) / (4.0 * ln_nke.sqrt()) * tsl.sqrt();
    let sym_upper = 2.0 * ln_nke / (1.0 / eps).ln() * tsh;

    let db = {
        let f = DMatrix::from_fn(n, n, |i, j| pf.u[i] * unit.get(i, j) * pf.v[j]);
        (&f - f.transpose()).amax() <= cfg.detailed_balance_tol
    };
    let upper_reversible = db.then(|| {
        let mut ev: Vec<f64> = SymmetricEigen::new(m.as_dmatrix().clone())
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ratio(ln_nke, 1.0 - ev.get(1).cloned().unwrap_or(0.0))
    });

    let range = tau.range();
    let mut records = vec![
        tau_lower("phi_lower", lower_phi, range),
        tau_upper("phi_upper", upper_phi, range),
        tau_lower("lambda_lower", lower_lambda, range),
        tau_upper("lambda_upper", upper_lambda, range),
        tau_upper("sigma_upper_c1", upper_sigma(1), range),
        tau_upper("sigma_upper_c2", upper_sigma(2), range),
        tau_lower("sym_lower", sym_lower, range),
        tau_upper("sym_upper", sym_upper, range),
    ];
    if let Some(u) = upper_reversible {
        records.push(tau_upper("reversible_upper", u, range));
    }
    let lazy = unit.tags().lazy;
    let contract = lazy && pf.classification == Classification::Irreducible;
    if !contract {
        records = records
            .into_iter()
            .map(|rec| {
                if rec.name.starts_with("sigma_upper") {
                    rec
                } else {
                    inapplicable(rec)
                }
            })
            .collect();
    }
    if pf.classification != Classification::Irreducible {
        records = records.into_iter().map(inapplicable).collect();
    }

    Ok(MixReport {
        n,
        epsilon: eps,
        tau,
        lazy,
        classification: pf.classification,
        kappa,
        phi,
        re_lambda2: spec.lambda2.re,
        sigma2: spec.sigma2,
        lower_phi,
        upper_phi,
        lower_lambda,
        upper_lambda,
        upper_sigma_c1: upper_sigma(1),
        upper_sigma_c2: upper_sigma(2),
        tau_sym,
        sym_lower,
        sym_upper,
        upper_reversible,
        records,
    })
}

/// exp(t(M − I)), computed as (e^{−t/2^s} exp(tM/2^s))^{2^s} so that the
/// e^{−t} factor never underflows against exp(tM).
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64, tol: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix must be square and finite".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "t = {t} must be finite and nonnegative"
        )));
    }
    let n = m.nrows();
    let norm = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    while t * norm / 2f64.powi(s as i32) > 0.5 || t / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let h = t / 2f64.powi(s as i32);
    let x = m * h;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=60 {
        term = &term * &x / k as f64;
        sum += &term;
        if term.amax() <= tol * sum.amax() {
            break;
        }
    }
    let mut e = sum * (-h).exp();
    for _ in 0..s {
        e = &e * &e;
    }
    for v in e.iter_mut() {
        if *v < 0.0 && *v >= -1e-14 {
            *v = 0.0;
        }
    }
    Ok(e)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousMixReport {
    pub n: usize,
    pub epsilon: f64,
    /// Right end of the final bisection interval; `None` on divergence.
    pub t: Option<f64>,
    pub t_max: f64,
    pub kappa: f64,
    pub phi: PhiBracket,
    pub lower: f64,
    pub upper: f64,
    pub records: Vec<Inequality>,
}

impl ContinuousMixReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }
}

/// Smallest t (to relative resolution) at which exp(t(R − I)) meets the
/// criterion; `None` when t_max is not enough.
pub fn continuous_mixing_time(
    r: &NonnegMatrix,
    pf: &PfData,
    eps: f64,
    t_max: f64,
) -> Result<Option<f64>> {
    check_eps(eps)?;
    check_pair(r, pf)?;
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("t_max = {t_max} must be positive")));
    }
    let cfg = Config::default();
    let base = r.as_dmatrix() / pf.r;
    let res = |t: f64| -> Result<f64> {
        Ok(mixing_residual(
            &matrix_exponential(&base, t, cfg.expm_tol)?,
            pf,
        ))
    };
    let mut hi = 1.0f64.min(t_max);
    let mut lo = 0.0;
    while res(hi)? > eps {
        if hi >= t_max {
            return Ok(None);
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
    }
    while hi - lo > cfg.t_rel_resolution * hi {
        let mid = 0.5 * (lo + hi);
        if res(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

pub fn continuous_mixing_report(
    r: &NonnegMatrix,
    pf: &PfData,
    eps: f64,
    t_max: f64,
) -> Result<ContinuousMixReport> {
    let cfg = Config::default();
    let t = continuous_mixing_time(r, pf, eps, t_max)?;
    let unit = NonnegMatrix::from_dmatrix(r.as_dmatrix() / pf.r)?;
    let unit_pf = PfData {
        r: 1.0,
        ..pf.clone()
    };
    let n = r.n();
    let phi = if n <= cfg.phi_n_limit {
        phi_bracket(&unit, &unit_pf, 1.0, cfg.phi_n_limit)?
    } else {
        let (a, w) = balance(&unit, &unit_pf)?;
        let s2 = spectral_summary(&a, &w)?.sigma2;
        phi_bracket(&unit, &unit_pf, s2, cfg.phi_n_limit)?
    };
    let lower = ratio(0.5 - eps, phi.upper);
    let upper = ratio(
        100.0 * (n as f64 / (pf.kappa * eps)).ln(),
        phi.lower * phi.lower,
    );
    let range = match t {
        Some(t) => (t, t),
        None => (t_max, f64::INFINITY),
    };
    let lo_rec = if lower <= range.0 {
        decided("contchain_lower", lower, range.0)
    } else {
        decided("contchain_lower", lower, range.1)
    };
    let mut records = vec![lo_rec, tau_upper("contchain_upper", upper, range)];
    if pf.classification != Classification::Irreducible {
        records = records.into_iter().map(inapplicable).collect();
    }
    Ok(ContinuousMixReport {
        n,
        epsilon: eps,
        t,
        t_max,
        kappa: pf.kappa,
        phi,
        lower,
        upper,
        records,
    })
}

/// γ_{u,v} for ordered pairs u ≠ v, each a list of directed edges.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathEnsemble {
    pub paths: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
}

#[derive(Serialize, Deserialize)]
struct PathEnsembleJson {
    paths: BTreeMap<String, Vec<[usize; 2]>>,
}

impl PathEnsemble {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PathEnsembleJson =
            serde_json::from_str(text).map_err(|e| Error::format(e.line(), e.to_string()))?;
        let mut paths = BTreeMap::new();
        for (key, edges) in raw.paths {
            let (a, b) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::Validation(format!("bad pair key {key:?}")))?;
            paths.insert((a, b), edges.into_iter().map(|[x, y]| (x, y)).collect());
        }
        Ok(PathEnsemble { paths })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw = PathEnsembleJson {
            paths: self
                .paths
                .iter()
                .map(|(&(a, b), es)| {
                    (
                        format!("{a},{b}"),
                        es.iter().map(|&(x, y)| [x, y]).collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data")
    }

    /// BFS shortest paths over the positive off-diagonal support, visiting
    /// neighbours in increasing index order. Unreachable pairs are omitted.
    pub fn shortest(m: &NonnegMatrix) -> Self {
        let n = m.n();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && m.get(i, j) > 0.0).collect())
            .collect();
        let per_source: Vec<Vec<(Pair, Vec<Pair>)>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut parent = vec![usize::MAX; n];
                parent[s] = s;
                let mut queue = VecDeque::from([s]);
                while let Some(x) = queue.pop_front() {
                    for &y in &adj[x] {
                        if parent[y] == usize::MAX {
                            parent[y] = x;
                            queue.push_back(y);
                        }
                    }
                }
                (0..n)
                    .filter(|&t| t != s && parent[t] != usize::MAX)
                    .map(|t| {
                        let mut edges = Vec::new();
                        let mut y = t;
                        while y != s {
                            edges.push((parent[y], y));
                            y = parent[y];
                        }
                        edges.reverse();
                        ((s, t), edges)
                    })
                    .collect()
            })
            .collect();
        PathEnsemble {
            paths: per_source.into_iter().flatten().collect(),
        }
    }
}

type Pair = (usize, usize);

#[derive(Debug, Clone, Serialize)]
pub struct PathBound {
    pub n: usize,
    pub epsilon: f64,
    /// Congestion ρ_W; infinite when some pair has no path.
    pub rho: f64,
    pub gap_lower: f64,
    pub gap_actual: f64,
    /// ρ·ln(n/ε).
    pub tau_upper: f64,
    /// 2ρ·ln(n/ε), the bound on τ(A) when the input is AAᵀ.
    pub tau_upper_singular: f64,
    pub records: Vec<Inequality>,
}

/// Congestion bound for a symmetric doubly stochastic M.
pub fn canonical_paths_bound(
    m: &NonnegMatrix,
    ensemble: Option<&PathEnsemble>,
    eps: f64,
) -> Result<PathBound> {
    let tags = m.tags();
    if !(tags.symmetric && tags.doubly_stochastic) {
        return Err(Error::Domain(
            "canonical paths need a symmetric doubly stochastic matrix".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    let n = m.n();
    let default;
    let w = match ensemble {
        Some(w) => w,
        None => {
            default = PathEnsemble::shortest(m);
            &default
        }
    };
    let mut load = DMatrix::<f64>::zeros(n, n);
    let mut complete = true;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let Some(path) = w.paths.get(&(a, b)) else {
                complete = false;
                continue;
            };
            check_path(m, a, b, path)?;
            for &(x, y) in path {
                load[(x, y)] += path.len() as f64;
            }
        }
    }
    if w.paths.keys().any(|&(a, b)| a >= n || b >= n || a == b) {
        return Err(Error::Validation(
            "path ensemble names a pair outside the matrix".into(),
        ));
    }
    let rho = if complete {
        let mut rho = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                if load[(x, y)] > 0.0 {
                    rho = rho.max(load[(x, y)] / (n as f64 * m.get(x, y)));
                }
            }
        }
        rho
    } else {
        f64::INFINITY
    };
    let mut ev: Vec<f64> = SymmetricEigen::new(m.as_dmatrix().clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    let gap_actual = 1.0 - ev.get(1).cloned().unwrap_or(0.0);
    let gap_lower = if rho > 0.0 { 1.0 / rho } else { f64::INFINITY };
    let ln = (n as f64 / eps).ln();
    let records = vec![decided("path_gap_lower", gap_lower, gap_actual)];
    Ok(PathBound {
        n,
        epsilon: eps,
        rho,
        gap_lower,
        gap_actual,
        tau_upper: rho * ln,
        tau_upper_singular: 2.0 * rho * ln,
        records,
    })
}

fn check_path(m: &NonnegMatrix, a: usize, b: usize, path: &[(usize, usize)]) -> Result<()> {
    let n = m.n();
    let bad = |why: &str| Err(Error::Validation(format!("path {a},{b}: {why}")));
    if path.is_empty() {
        return bad("empty");
    }
    if path[0].0 != a || path[path.len() - 1].1 != b {
        return bad("does not join its endpoints");
    }
    for (k, &(x, y)) in path.iter().enumerate() {
        if x >= n || y >= n {
            return bad("vertex out of range");
        }
        if k > 0 && path[k - 1].1 != x {
            return bad("edges are not consecutive");
        }
        if !(m.get(x, y) > 0.0) {
            return bad("uses a zero-weight edge");
        }
    }
    Ok(())
}
