//! Edge expansion of nonnegative matrices: single cuts and exact minimization
//! by Gray-code enumeration.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::NonnegMatrix;
use crate::pf::{Classification, PfData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cut {
    /// Bit i set when index i lies in S.
    pub members: u64,
    pub weight: f64,
    pub phi_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    DefinitionZero,
    SingleCut,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionResult {
    pub phi: f64,
    pub argmin_cut: Option<Cut>,
    pub method: Method,
}

/// F_ij = u_i R_ij v_j.
fn flow(r: &NonnegMatrix, pf: &PfData) -> DMatrix<f64> {
    let n = r.n();
    DMatrix::from_fn(n, n, |i, j| pf.u[i] * r.get(i, j) * pf.v[j])
}

fn require_pair(r: &NonnegMatrix, pf: &PfData) -> Result<()> {
    if pf.u.len() != r.n() || pf.v.len() != r.n() {
        return Err(Error::Domain(
            "Perron data does not match the matrix size".into(),
        ));
    }
    if !pf.has_positive_pair() {
        return Err(Error::DegeneratePf(
            "no positive eigenvector pair; expansion is zero by definition".into(),
        ));
    }
    Ok(())
}

fn check_mask(n: usize, members: u64) -> Result<()> {
    if n > 63 {
        return Err(Error::Capacity(format!(
            "cuts are bitmasks over at most 63 indices, got n = {n}"
        )));
    }
    let full = (1u64 << n) - 1;
    if members == 0 || members & full == full || members & !full != 0 {
        return Err(Error::Domain("cut must be a proper nonempty subset".into()));
    }
    Ok(())
}

/// Crossing mass out of S over min(w(S), w(S̄)).
pub fn phi_cut(r: &NonnegMatrix, pf: &PfData, members: u64) -> Result<f64> {
    require_pair(r, pf)?;
    let n = r.n();
    check_mask(n, members)?;
    Ok(cut_of(&flow(r, pf), pf, members).phi_s)
}

fn cut_of(f: &DMatrix<f64>, pf: &PfData, members: u64) -> Cut {
    let n = f.nrows();
    let inside = |i: usize| members >> i & 1 == 1;
    let mut out = 0.0;
    let mut w_in = 0.0;
    let mut w_out = 0.0;
    for i in 0..n {
        let wi = pf.u[i] * pf.v[i];
        if inside(i) {
            w_in += wi;
            for j in 0..n {
                if !inside(j) {
                    out += f[(i, j)];
                }
            }
        } else {
            w_out += wi;
        }
    }
    Cut {
        members,
        weight: w_in,
        phi_s: out / w_in.min(w_out),
    }
}

struct Walker<'a> {
    f: &'a DMatrix<f64>,
    wt: &'a [f64],
    members: u64,
    out: f64,
    inn: f64,
    weight: f64,
}

impl<'a> Walker<'a> {
    fn start(f: &'a DMatrix<f64>, wt: &'a [f64], members: u64) -> Self {
        let n = f.nrows();
        let inside = |i: usize| members >> i & 1 == 1;
        let (mut out, mut inn, mut weight) = (0.0, 0.0, 0.0);
        for i in 0..n {
            if inside(i) {
                weight += wt[i];
            }
            for j in 0..n {
                match (inside(i), inside(j)) {
                    (true, false) => out += f[(i, j)],
                    (false, true) => inn += f[(i, j)],
                    _ => {}
                }
            }
        }
        Walker {
            f,
            wt,
            members,
            out,
            inn,
            weight,
        }
    }

    fn flip(&mut self, k: usize) {
        let n = self.f.nrows();
        let adding = self.members >> k & 1 == 0;
        let (mut to_k_in, mut to_k_out, mut from_k_in, mut from_k_out) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            if i == k {
                continue;
            }
            if self.members >> i & 1 == 1 {
                to_k_in += self.f[(i, k)];
                from_k_in += self.f[(k, i)];
            } else {
                to_k_out += self.f[(i, k)];
                from_k_out += self.f[(k, i)];
            }
        }
        if adding {
            self.out += from_k_out - to_k_in;
            self.inn += to_k_out - from_k_in;
            self.weight += self.wt[k];
        } else {
            self.out += to_k_in - from_k_out;
            self.inn += from_k_in - to_k_out;
            self.weight -= self.wt[k];
        }
        self.members ^= 1 << k;
    }
}

const CHUNK: u64 = 1 << 12;

/// Exact φ by enumerating all subsets that contain index 0, scoring both S
/// and its complement under the weight ≤ 1/2 constraint.
pub fn phi_exact(r: &NonnegMatrix, pf: &PfData, n_limit: usize) -> Result<ExpansionResult> {
    let n = r.n();
    if pf.classification == Classification::ReducibleDegenerate {
        return Ok(ExpansionResult {
            phi: 0.0,
            argmin_cut: None,
            method: Method::DefinitionZero,
        });
    }
    require_pair(r, pf)?;
    if n > n_limit || n > 63 {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the enumeration limit {n_limit}; use the certified bracket instead"
        )));
    }
    if n < 2 {
        return Err(Error::Domain("a 1x1 matrix has no proper cut".into()));
    }
    let f = flow(r, pf);
    let wt: Vec<f64> = pf.u.iter().zip(&pf.v).map(|(a, b)| a * b).collect();
    let total: f64 = wt.iter().sum();
    let limit = 0.5 * total + Config::default().weight_slack;
    let full = (1u64 << n) - 1;
    let count = 1u64 << (n - 1);
    let gray = |i: u64| i ^ (i >> 1);

    let best = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut walk = Walker::start(&f, &wt, 1 | gray(lo) << 1);
            let mut best: Option<(f64, u64)> = None;
            let mut offer = |phi: f64, mask: u64| {
                let better = match best {
                    None => true,
                    Some((bp, bm)) => phi.total_cmp(&bp).then(mask.cmp(&bm)).is_lt(),
                };
                if better {
                    best = Some((phi, mask));
                }
            };
            for i in lo..hi {
                if i > lo {
                    walk.flip(i.trailing_zeros() as usize + 1);
                }
                if walk.members == full {
                    continue;
                }
                let w_s = walk.weight;
                let w_c = total - w_s;
                if w_s <= limit {
                    offer(walk.out / w_s, walk.members);
                }
                if w_c <= limit {
                    offer(walk.inn / w_c, full & !walk.members);
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(x), Some(y)) => Some(if y.0.total_cmp(&x.0).then(y.1.cmp(&x.1)).is_lt() {
                    y
                } else {
                    x
                }),
            },
        );

    let (_, mask) = best.ok_or_else(|| Error::Domain("no eligible cut".into()))?;
    let cut = cut_of(&f, pf, mask);
    Ok(ExpansionResult {
        phi: cut.phi_s,
        argmin_cut: Some(cut),
        method: Method::BruteForce,
    })
}

/// Best cut among singletons and their complements, an upper bound on φ.
pub fn phi_single_cut(r: &NonnegMatrix, pf: &PfData) -> Result<ExpansionResult> {
    if pf.classification == Classification::ReducibleDegenerate {
        return Ok(ExpansionResult {
            phi: 0.0,
            argmin_cut: None,
            method: Method::DefinitionZero,
        });
    }
    require_pair(r, pf)?;
    let n = r.n();
    if n < 2 {
        return Err(Error::Domain("a 1x1 matrix has no proper cut".into()));
    }
    let f = flow(r, pf);
    let total: f64 = (0..n).map(|i| pf.u[i] * pf.v[i]).sum();
    let (best, phi) = (0..n)
        .map(|i| {
            let wi = pf.u[i] * pf.v[i];
            let out: f64 = (0..n).filter(|&j| j != i).map(|j| f[(i, j)]).sum();
            (i, out / wi.min(total - wi))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 2");
    Ok(ExpansionResult {
        phi,
        argmin_cut: (n <= 63).then(|| cut_of(&f, pf, 1 << best)),
        method: Method::SingleCut,
    })
}

/// ‖D_u R D_v 1 − D_v Rᵀ D_u 1‖∞.
pub fn eulerian_defect(r: &NonnegMatrix, pf: &PfData) -> f64 {
    let f = flow(r, pf);
    (0..r.n())
        .map(|i| (f.row(i).sum() - f.column(i).sum()).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{named_matrix, random_doubly_stochastic, Mode, NamedKind};
    use crate::pf::pf_data;

    fn pf(m: &NonnegMatrix) -> PfData {
        pf_data(m, 1e-12).unwrap()
    }

    /// Direct enumeration over every proper subset with the constrained form.
    fn oracle(r: &NonnegMatrix, p: &PfData) -> f64 {
        let n = r.n();
        let mut best = f64::INFINITY;
        for mask in 1..(1u64 << n) - 1 {
            let inside = |i: usize| mask >> i & 1 == 1;
            let w: f64 = (0..n).filter(|&i| inside(i)).map(|i| p.u[i] * p.v[i]).sum();
            if w > 0.5 + 1e-12 {
                continue;
            }
            let mut num = 0.0;
            for i in (0..n).filter(|&i| inside(i)) {
                for j in (0..n).filter(|&j| !inside(j)) {
                    num += r.get(i, j) * p.u[i] * p.v[j];
                }
            }
            best = best.min(num / w);
        }
        best
    }

    #[test]
    fn cut_examples() {
        let j = named_matrix(NamedKind::UniformJ, 4, Mode::Float).unwrap();
        assert!((phi_cut(&j, &pf(&j), 0b1).unwrap() - 0.75).abs() < 1e-15);
        let c = named_matrix(NamedKind::DirectedCycle, 4, Mode::Float).unwrap();
        assert!((phi_cut(&c, &pf(&c), 0b11).unwrap() - 0.5).abs() < 1e-15);
        let i4 = named_matrix(NamedKind::Identity, 4, Mode::Float).unwrap();
        for mask in 1..15 {
            assert_eq!(phi_cut(&i4, &pf(&i4), mask).unwrap(), 0.0);
        }
        assert!(phi_cut(&j, &pf(&j), 0).is_err());
        assert!(phi_cut(&j, &pf(&j), 0b1111).is_err());
    }

    #[test]
    fn cycles_have_two_over_n() {
        for n in [4, 6, 8] {
            let c = named_matrix(NamedKind::DirectedCycle, n, Mode::Float).unwrap();
            let res = phi_exact(&c, &pf(&c), 24).unwrap();
            assert!((res.phi - 2.0 / n as f64).abs() < 1e-12);
            assert_eq!(res.method, Method::BruteForce);
        }
    }

    #[test]
    fn disconnected_blocks_have_zero() {
        let m = DMatrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 { 0.5 } else { 0.0 });
        let r = NonnegMatrix::from_dmatrix(m).unwrap();
        let res = phi_exact(&r, &pf(&r), 24).unwrap();
        assert_eq!(res.phi, 0.0);
        assert_eq!(res.argmin_cut.unwrap().members, 0b0011);
    }

    #[test]
    fn degenerate_is_zero_by_definition() {
        let r = NonnegMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let res = phi_exact(&r, &pf(&r), 24).unwrap();
        assert_eq!(res.method, Method::DefinitionZero);
        assert_eq!(res.phi, 0.0);
    }

    #[test]
    fn capacity_error_beyond_limit() {
        let j = named_matrix(NamedKind::UniformJ, 6, Mode::Float).unwrap();
        assert!(matches!(phi_exact(&j, &pf(&j), 5), Err(Error::Capacity(_))));
    }

    #[test]
    fn matches_direct_enumeration() {
        for seed in 0..12 {
            let n = 3 + (seed as usize % 8);
            let a = random_doubly_stochastic(n, seed, 1e-12).unwrap();
            let p = pf(&a);
            let got = phi_exact(&a, &p, 24).unwrap();
            assert!((got.phi - oracle(&a, &p)).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn ties_pick_lowest_mask() {
        let j = named_matrix(NamedKind::UniformJ, 4, Mode::Float).unwrap();
        let res = phi_exact(&j, &pf(&j), 24).unwrap();
        assert!((res.phi - 0.5).abs() < 1e-12);
        assert_eq!(res.argmin_cut.unwrap().members, 0b0011);
    }

    #[test]
    fn eulerian_defect_detects_corruption() {
        let a = random_doubly_stochastic(6, 4, 1e-12).unwrap();
        let mut p = pf(&a);
        assert!(eulerian_defect(&a, &p) < 1e-12);
        let r = NonnegMatrix::from_dmatrix(DMatrix::from_fn(5, 5, |i, j| {
            (1.0 + i as f64) / (5.0 * (1.0 + j as f64)) + if i == j { 0.3 } else { 0.0 }
        }))
        .unwrap();
        let mut q = pf(&r);
        assert!(eulerian_defect(&r, &q) < 1e-10);
        q.v[0] += 1e-3;
        assert!(eulerian_defect(&r, &q) > 1e-6);
        p.v[1] += 1e-3;
        assert!(eulerian_defect(&a, &p) > 1e-6);
    }
}
