//! Perron-Frobenius structure of nonnegative matrices.
//!
//! Irreducibility is decided on the support digraph; the eigenvectors come
//! from power iteration on the half-lazy matrix (I + R/ρ)/2, which removes
//! periodicity without moving the eigenvectors.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::{NonnegMatrix, RationalMatrix};
use crate::spectral::eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Irreducible,
    ReducibleWithPositivePair,
    ReducibleDegenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentStructure {
    /// Each component sorted ascending; components ordered by smallest index.
    pub components: Vec<Vec<usize>>,
    /// Pairs (a, b) of component indices with an edge from a into b.
    pub condensation_edges: Vec<(usize, usize)>,
    pub per_component_pf: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PfData {
    pub r: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub kappa: f64,
    pub normalized: bool,
    pub classification: Classification,
    /// Largest relative ∞-norm residual of the two eigenvector equations.
    pub residual: f64,
}

impl PfData {
    pub fn has_positive_pair(&self) -> bool {
        self.classification != Classification::ReducibleDegenerate
    }
}

pub fn strong_components(r: &NonnegMatrix) -> ComponentStructure {
    let a = r.as_dmatrix();
    let n = r.n();
    let mut g = DiGraph::<usize, ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|i| g.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut idx: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    components.sort_by_key(|c| c[0]);

    let mut owner = vec![0; n];
    for (k, c) in components.iter().enumerate() {
        for &i in c {
            owner[i] = k;
        }
    }
    let mut condensation_edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] > 0.0 && owner[i] != owner[j] {
                condensation_edges.push((owner[i], owner[j]));
            }
        }
    }
    condensation_edges.sort_unstable();
    condensation_edges.dedup();

    let cfg = Config::default();
    let per_component_pf = components
        .iter()
        .map(|c| {
            let block = submatrix(a, c);
            if c.len() == 1 {
                block[(0, 0)]
            } else {
                perron_right(&block, cfg.pf_tol, cfg.pf_max_iter)
                    .map(|(rho, _, _)| rho)
                    .unwrap_or_else(|e| match e {
                        Error::Convergence { .. } => collatz_wielandt_mid(&block),
                        _ => 0.0,
                    })
            }
        })
        .collect();

    ComponentStructure {
        components,
        condensation_edges,
        per_component_pf,
    }
}

fn submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

fn collatz_wielandt_mid(a: &DMatrix<f64>) -> f64 {
    let sums: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().cloned().fold(0.0, f64::max);
    0.5 * (lo + hi)
}

/// Right Perron pair of an irreducible block: (ρ, v with Σv = 1, residual).
fn perron_right(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<(f64, DVector<f64>, f64)> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let y = a * &x;
        let rho = y.sum() / x.sum();
        if !(rho > 0.0) {
            return Err(Error::DegeneratePf("Perron value is zero".into()));
        }
        residual = (&y - &x * rho).amax() / (rho * x.amax());
        if residual <= tol {
            return Ok((rho, x, residual));
        }
        x = (&x + &y / rho) * 0.5;
        let s = x.sum();
        x /= s;
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// Scales u, v so that ⟨u,v⟩ = target and ‖u‖₂ = ‖v‖₂.
fn normalize_pair(u: &mut [f64], v: &mut [f64], target: f64) {
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = (target * nu / (nv * dot)).sqrt();
    let b = target / (a * dot);
    v.iter_mut().for_each(|x| *x *= a);
    u.iter_mut().for_each(|x| *x *= b);
}

fn classify(cs: &ComponentStructure, rel_tol: f64) -> (Classification, f64) {
    let r_max = cs.per_component_pf.iter().cloned().fold(0.0, f64::max);
    if !(r_max > 0.0) {
        return (Classification::ReducibleDegenerate, 0.0);
    }
    if cs.components.len() == 1 {
        return (Classification::Irreducible, r_max);
    }
    let all_top = cs
        .per_component_pf
        .iter()
        .all(|&p| (p - r_max).abs() <= rel_tol * r_max);
    if cs.condensation_edges.is_empty() && all_top {
        (Classification::ReducibleWithPositivePair, r_max)
    } else {
        (Classification::ReducibleDegenerate, r_max)
    }
}

fn residual_of(a: &DMatrix<f64>, r: f64, u: &[f64], v: &[f64]) -> f64 {
    let vv = DVector::from_column_slice(v);
    let uu = DVector::from_column_slice(u);
    let rv = (a * &vv - &vv * r).amax() / (r * vv.amax());
    let ru = (a.tr_mul(&uu) - &uu * r).amax() / (r * uu.amax());
    rv.max(ru)
}

/// Perron data of `R`. Doubly stochastic inputs take the closed form
/// u = v = 1/√n, r = 1, κ = 1/n.
pub fn pf_data(rm: &NonnegMatrix, tol: f64) -> Result<PfData> {
    let cfg = Config::default();
    let a = rm.as_dmatrix();
    let n = rm.n();
    let cs = strong_components(rm);
    let (classification, r_max) = classify(&cs, cfg.pf_block_rel_tol);

    if classification == Classification::ReducibleDegenerate {
        return Ok(PfData {
            r: r_max,
            u: vec![0.0; n],
            v: vec![0.0; n],
            w: vec![0.0; n],
            kappa: 0.0,
            normalized: false,
            classification,
            residual: 0.0,
        });
    }

    let (r, u, v) = if rm.is_doubly_stochastic() {
        let s = 1.0 / (n as f64).sqrt();
        (1.0, vec![s; n], vec![s; n])
    } else {
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut rho_sum = 0.0;
        for comp in &cs.components {
            let block = submatrix(a, comp);
            let (rho_v, bv, _) = perron_right(&block, tol, cfg.pf_max_iter)?;
            let (rho_u, bu, _) = perron_right(&block.transpose(), tol, cfg.pf_max_iter)?;
            let mut bu: Vec<f64> = bu.iter().cloned().collect();
            let mut bv: Vec<f64> = bv.iter().cloned().collect();
            normalize_pair(&mut bu, &mut bv, comp.len() as f64 / n as f64);
            for (k, &i) in comp.iter().enumerate() {
                u[i] = bu[k];
                v[i] = bv[k];
            }
            rho_sum += 0.5 * (rho_u + rho_v) * comp.len() as f64;
        }
        (rho_sum / n as f64, u, v)
    };

    let residual = residual_of(a, r, &u, &v);
    if residual > cfg.pf_accept.max(tol) {
        return Err(Error::Convergence {
            iterations: cfg.pf_max_iter,
            residual,
        });
    }
    if !rm.is_doubly_stochastic() && n <= cfg.pf_crosscheck_n {
        let top = eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (top - r).abs() > 1e-8 * r.max(1.0) {
            return Err(Error::Convergence {
                iterations: cfg.pf_max_iter,
                residual: (top - r).abs(),
            });
        }
    }

    let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| (a * b).sqrt()).collect();
    let kappa = if rm.is_doubly_stochastic() {
        1.0 / n as f64
    } else {
        u.iter()
            .zip(&v)
            .map(|(a, b)| a * b)
            .fold(f64::INFINITY, f64::min)
    };
    Ok(PfData {
        r,
        u,
        v,
        w,
        kappa,
        normalized: true,
        classification,
        residual,
    })
}

/// A = D_u^{1/2} D_v^{-1/2} R D_u^{-1/2} D_v^{1/2}, returned with w = (u∘v)^{1/2}.
pub fn balance(rm: &NonnegMatrix, pf: &PfData) -> Result<(NonnegMatrix, Vec<f64>)> {
    if !pf.has_positive_pair() || pf.u.iter().chain(&pf.v).any(|&x| !(x > 0.0)) {
        return Err(Error::DegeneratePf(
            "balancing needs strictly positive u and v".into(),
        ));
    }
    if !pf.normalized {
        return Err(Error::DegeneratePf("Perron pair is not normalized".into()));
    }
    if pf.u == pf.v {
        return Ok((rm.clone(), pf.w.clone()));
    }
    let n = rm.n();
    let d: Vec<f64> =
        pf.u.iter()
            .zip(&pf.v)
            .map(|(u, v)| (u / v).sqrt())
            .collect();
    let a = DMatrix::from_fn(n, n, |i, j| d[i] * rm.get(i, j) / d[j]);
    Ok((NonnegMatrix::from_dmatrix(a)?, pf.w.clone()))
}

/// pI + (1 − p)A, exact when A is exact (p is taken at its binary value).
pub fn lazify(a: &NonnegMatrix, p: f64) -> Result<NonnegMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("laziness {p} must lie in [0, 1]")));
    }
    let n = a.n();
    match a.exact() {
        Some(q) => {
            let pq = BigRational::from_float(p).expect("finite p");
            let rest = BigRational::from_integer(1.into()) - &pq;
            let out = RationalMatrix::identity(n).scale(&pq).add(&q.scale(&rest));
            NonnegMatrix::from_rational(out)
        }
        None => {
            let out = DMatrix::identity(n, n) * p + a.as_dmatrix() * (1.0 - p);
            NonnegMatrix::from_dmatrix(out)
        }
    }
}

/// M = (A + Aᵀ)/2.
pub fn additive_symmetrize(a: &NonnegMatrix) -> NonnegMatrix {
    match a.exact() {
        Some(q) => {
            let half = BigRational::new(1.into(), 2.into());
            NonnegMatrix::from_rational(q.add(&q.transpose()).scale(&half))
                .expect("sum of nonnegative matrices")
        }
        None => {
            let m = a.as_dmatrix();
            NonnegMatrix::from_dmatrix((m + m.transpose()) * 0.5)
                .expect("sum of nonnegative matrices")
        }
    }
}
