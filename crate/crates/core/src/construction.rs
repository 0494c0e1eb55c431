//! The low-expansion, zero-spectrum doubly stochastic family A_n with its
//! explicit Schur form, its one-entry perturbation, and the de Bruijn and
//! Klawe-Vazirani comparison families.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Zero};

use crate::error::{Error, Result};
use crate::matrix::{Mode, NonnegMatrix, RationalMatrix};
use crate::spectral::SchurFactors;

/// Scalars that can host the construction: floats for any n, rationals for
/// perfect squares.
pub trait Scalar: Num + Clone + FromPrimitive {
    fn sqrt_of(n: usize) -> Result<Self>;
}

impl Scalar for f64 {
    fn sqrt_of(n: usize) -> Result<Self> {
        Ok((n as f64).sqrt())
    }
}

impl Scalar for BigRational {
    fn sqrt_of(n: usize) -> Result<Self> {
        let m = n.sqrt();
        if m * m != n {
            return Err(Error::Mode(format!(
                "exact arithmetic needs a perfect square n, got {n}"
            )));
        }
        Ok(BigRational::from_integer(m.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionCoefficients<T> {
    pub n: usize,
    pub m: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
    pub r: T,
    pub alpha: T,
    pub beta: T,
}

fn k<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("small integers are representable")
}

pub fn construction_coefficients<T: Scalar>(n: usize) -> Result<ConstructionCoefficients<T>> {
    if n < 4 {
        return Err(Error::Domain(format!(
            "the construction needs n >= 4, got {n}"
        )));
    }
    let m = T::sqrt_of(n)?;
    let one = T::one();
    let two = k::<T>(2);
    let m1 = m.clone() + one.clone();
    let m2 = m.clone() + two.clone();
    let mm = m.clone() * m.clone();
    let m_m1 = m.clone() * m1.clone();
    let m_m1_m2 = m_m1.clone() * m2.clone();
    let co = ConstructionCoefficients {
        n,
        a: (mm.clone() + m.clone() - one.clone()) / (m.clone() * m2.clone()),
        b: m1.clone() / (m.clone() * m2.clone()),
        c: one.clone() / m_m1.clone(),
        d: (mm.clone() * m.clone() + two.clone() * mm.clone() + m.clone() + one.clone())
            / m_m1_m2.clone(),
        e: one.clone() / m_m1_m2.clone(),
        f: (two.clone() * m.clone() + k::<T>(3)) / m_m1_m2,
        r: one.clone() - one.clone() / m2,
        alpha: one.clone() / m_m1.clone() - one.clone(),
        beta: one / m_m1,
        m,
    };
    Ok(co)
}

impl<T: Scalar> ConstructionCoefficients<T> {
    /// The six defining identities as lhs − rhs; all vanish.
    pub fn identity_residuals(&self) -> [T; 6] {
        let one = T::one();
        let nn = k::<T>(self.n);
        let inv_n = one.clone() / nn;
        let inv_m = one.clone() / self.m.clone();
        let n2 = k::<T>(self.n - 2);
        let n3 = k::<T>(self.n - 3);
        let two = k::<T>(2);
        [
            self.a.clone() + self.b.clone() - one.clone(),
            self.c.clone() + self.d.clone() + n3.clone() * self.e.clone() - one.clone(),
            self.b.clone() + self.f.clone() + n2.clone() * self.c.clone() - one.clone(),
            inv_n.clone()
                + self.alpha.clone() * self.alpha.clone()
                + n2.clone() * self.beta.clone() * self.beta.clone()
                - one,
            inv_m + self.alpha.clone() + n2 * self.beta.clone(),
            inv_n
                + two * self.alpha.clone() * self.beta.clone()
                + n3 * self.beta.clone() * self.beta.clone(),
        ]
    }

    fn rogue_entry(&self, i: usize, j: usize) -> T {
        let n = self.n;
        let z = T::zero();
        if i == 0 {
            match j {
                0 => self.a.clone(),
                1 => self.b.clone(),
                _ => z,
            }
        } else if i == n - 1 {
            match j {
                0 => self.b.clone(),
                1 => self.f.clone(),
                _ => self.c.clone(),
            }
        } else {
            match j {
                0 => z,
                1 => self.c.clone(),
                _ if j == i + 1 => self.d.clone(),
                _ => self.e.clone(),
            }
        }
    }

    fn u_entry(&self, i: usize, j: usize) -> T {
        if i == 0 || j == 0 {
            T::one() / self.m.clone()
        } else if i == j {
            self.alpha.clone()
        } else {
            self.beta.clone()
        }
    }

    fn t_entry(&self, i: usize, j: usize) -> T {
        if i == 0 && j == 0 {
            T::one()
        } else if i >= 1 && i + 2 <= self.n && j == i + 1 {
            self.r.clone()
        } else {
            T::zero()
        }
    }
}

fn build<T: Scalar>(n: usize, entry: impl Fn(usize, usize) -> T) -> Vec<T> {
    (0..n * n).map(|x| entry(x / n, x % n)).collect()
}

fn to_matrix(
    mode: Mode,
    n: usize,
    exact: impl Fn(usize, usize) -> BigRational,
    float: impl Fn(usize, usize) -> f64,
) -> Result<NonnegMatrix> {
    match mode {
        Mode::Rational => NonnegMatrix::from_rational(RationalMatrix::from_fn(n, exact)),
        Mode::Float => NonnegMatrix::from_dmatrix(DMatrix::from_fn(n, n, float)),
    }
}

/// A_n: row 1 = (a, b, 0, …), middle rows (0, c, e, …, d on the
/// superdiagonal, …, e), last row (b, f, c, …, c).
pub fn rogue_matrix(n: usize, mode: Mode) -> Result<NonnegMatrix> {
    match mode {
        Mode::Rational => {
            let co = construction_coefficients::<BigRational>(n)?;
            let e = build(n, |i, j| co.rogue_entry(i, j));
            to_matrix(mode, n, |i, j| e[i * n + j].clone(), |_, _| 0.0)
        }
        Mode::Float => {
            let co = construction_coefficients::<f64>(n)?;
            to_matrix(
                mode,
                n,
                |_, _| BigRational::zero(),
                |i, j| co.rogue_entry(i, j),
            )
        }
    }
}

/// Exact witness pair (U_n, T_n) with A_n = U_n T_n U_nᵀ.
pub fn schur_witness_exact(n: usize) -> Result<(RationalMatrix, RationalMatrix)> {
    let co = construction_coefficients::<BigRational>(n)?;
    Ok((
        RationalMatrix::from_fn(n, |i, j| co.u_entry(i, j)),
        RationalMatrix::from_fn(n, |i, j| co.t_entry(i, j)),
    ))
}

/// Float witness pair (U_n, T_n), valid for any n >= 4.
pub fn schur_witness_float(n: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let co = construction_coefficients::<f64>(n)?;
    Ok((
        DMatrix::from_fn(n, n, |i, j| co.u_entry(i, j)),
        DMatrix::from_fn(n, n, |i, j| co.t_entry(i, j)),
    ))
}

/// Schur factors of the float A_n built from the closed-form U_n: T is the
/// computed product U_nᵀ A_n U_n, so its diagonal carries the spectrum up to
/// rounding in that product alone.
pub fn witness_schur_factors(n: usize) -> Result<SchurFactors> {
    let a = rogue_matrix(n, Mode::Float)?;
    let (u, _) = schur_witness_float(n)?;
    let t = u.transpose() * a.as_dmatrix() * &u;
    let uc = u.map(|x| Complex64::new(x, 0.0));
    let tc = t.map(|x| Complex64::new(x, 0.0));
    let recon = (&uc * &tc * uc.adjoint()).map(|z| z.re) - a.as_dmatrix();
    let inf = |m: &DMatrix<f64>| {
        m.row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Ok(SchurFactors {
        reconstruction_residual: inf(&recon) / inf(a.as_dmatrix()).max(1.0),
        u: uc,
        t: tc,
    })
}

/// A′_n: the two b_n entries are moved onto (1,1) and onto f_n, decoupling
/// the first index.
pub fn perturbed_rogue(n: usize, mode: Mode) -> Result<NonnegMatrix> {
    let last = n.saturating_sub(1);
    match mode {
        Mode::Rational => {
            let co = construction_coefficients::<BigRational>(n)?;
            let e = build(n, |i, j| perturbed_entry(&co, i, j, last));
            to_matrix(mode, n, |i, j| e[i * n + j].clone(), |_, _| 0.0)
        }
        Mode::Float => {
            let co = construction_coefficients::<f64>(n)?;
            to_matrix(
                mode,
                n,
                |_, _| BigRational::zero(),
                |i, j| perturbed_entry(&co, i, j, last),
            )
        }
    }
}

fn perturbed_entry<T: Scalar>(
    co: &ConstructionCoefficients<T>,
    i: usize,
    j: usize,
    last: usize,
) -> T {
    match (i, j) {
        (0, 0) => co.a.clone() + co.b.clone(),
        (0, 1) => T::zero(),
        (x, 0) if x == last => T::zero(),
        (x, 1) if x == last => co.f.clone() + co.b.clone(),
        _ => co.rogue_entry(i, j),
    }
}

const DE_BRUIJN_MAX_K: usize = 12;

/// Binary de Bruijn walk on 2^k states; v₁ is the most significant bit.
pub fn de_bruijn(k: usize, mode: Mode) -> Result<NonnegMatrix> {
    if k == 0 {
        return Err(Error::Domain("de Bruijn order must be at least 1".into()));
    }
    if k > DE_BRUIJN_MAX_K {
        return Err(Error::Capacity(format!(
            "de Bruijn order {k} exceeds the dense limit {DE_BRUIJN_MAX_K}"
        )));
    }
    let n = 1usize << k;
    let hit = |v: usize, j: usize| (v << 1) & (n - 1) == j & !1;
    to_matrix(
        mode,
        n,
        |v, j| {
            if hit(v, j) {
                BigRational::new(1.into(), 2.into())
            } else {
                BigRational::zero()
            }
        },
        |v, j| if hit(v, j) { 0.5 } else { 0.0 },
    )
}

pub fn is_odd_prime(p: usize) -> bool {
    p >= 3
        && p % 2 == 1
        && (3..)
            .step_by(2)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// v ↦ v + 1 and v ↦ 2v on Z/p, each with weight 1/2.
pub fn klawe_vazirani(p: usize, mode: Mode) -> Result<NonnegMatrix> {
    if !is_odd_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    let weight = |v: usize, j: usize| usize::from((v + 1) % p == j) + usize::from((2 * v) % p == j);
    to_matrix(
        mode,
        p,
        |v, j| BigRational::new(weight(v, j).into(), 2.into()),
        |v, j| weight(v, j) as f64 / 2.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn coefficients_at_four() {
        let co = construction_coefficients::<BigRational>(4).unwrap();
        assert_eq!(
            [&co.a, &co.b, &co.c, &co.d, &co.e, &co.f],
            [
                &q(5, 8),
                &q(3, 8),
                &q(1, 6),
                &q(19, 24),
                &q(1, 24),
                &q(7, 24)
            ]
        );
        assert_eq!(co.r, q(3, 4));
        assert_eq!(co.alpha, q(-5, 6));
        assert_eq!(co.beta, q(1, 6));
    }

    #[test]
    fn coefficients_at_nine() {
        let co = construction_coefficients::<BigRational>(9).unwrap();
        assert_eq!(co.a, q(11, 15));
        assert_eq!(co.b, q(4, 15));
        assert_eq!(co.r, q(4, 5));
    }

    #[test]
    fn identities_hold() {
        for n in [4, 9, 16, 25, 36, 49, 64, 81, 100] {
            let co = construction_coefficients::<BigRational>(n).unwrap();
            assert!(co.identity_residuals().iter().all(Zero::is_zero), "n={n}");
        }
        for n in 4..40 {
            let co = construction_coefficients::<f64>(n).unwrap();
            assert!(
                co.identity_residuals().iter().all(|x| x.abs() < 1e-12),
                "n={n}"
            );
        }
    }

    #[test]
    fn rational_mode_rejects_non_squares() {
        assert!(matches!(
            construction_coefficients::<BigRational>(5),
            Err(Error::Mode(_))
        ));
        assert!(rogue_matrix(3, Mode::Float).is_err());
        assert!(rogue_matrix(7, Mode::Float).is_ok());
    }

    #[test]
    fn rogue_four_template() {
        let a = rogue_matrix(4, Mode::Rational).unwrap();
        let want = [
            [q(5, 8), q(3, 8), q(0, 1), q(0, 1)],
            [q(0, 1), q(1, 6), q(19, 24), q(1, 24)],
            [q(0, 1), q(1, 6), q(1, 24), q(19, 24)],
            [q(3, 8), q(7, 24), q(1, 6), q(1, 6)],
        ];
        let ex = a.exact().unwrap();
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert_eq!(&ex.get(i, j), w);
            }
        }
        assert!(a.is_doubly_stochastic());
    }

    #[test]
    fn witness_reconstructs_at_four() {
        let a = rogue_matrix(4, Mode::Rational).unwrap();
        let (u, t) = schur_witness_exact(4).unwrap();
        assert_eq!(u.get(0, 2), q(1, 2));
        assert_eq!(u.get(1, 1), q(-5, 6));
        assert_eq!(u.get(1, 2), q(1, 6));
        assert!(u.mul(&u.transpose()).is_identity());
        assert_eq!(&u.mul(&t).mul(&u.transpose()), a.exact().unwrap());
    }

    #[test]
    fn witness_is_unitary_at_nine() {
        let (u, _) = schur_witness_exact(9).unwrap();
        assert!(u.mul(&u.transpose()).is_identity());
    }

    #[test]
    fn witness_t_shape() {
        let (_, t) = schur_witness_float(6).unwrap();
        let r = 1.0 - 1.0 / (6f64.sqrt() + 2.0);
        for i in 0..6 {
            for j in 0..6 {
                let want = match (i, j) {
                    (0, 0) => 1.0,
                    (i, j) if (1..=4).contains(&i) && j == i + 1 => r,
                    _ => 0.0,
                };
                assert!((t[(i, j)] - want).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn float_witness_reconstructs_non_square_sizes() {
        for n in [5, 7, 10] {
            let f = witness_schur_factors(n).unwrap();
            assert!(f.reconstruction_residual < 1e-14);
            assert!(f.unitarity_residual() < 1e-14);
            assert!(f.lower_residual() < 1e-14);
        }
    }

    #[test]
    fn perturbation_at_four() {
        let p = perturbed_rogue(4, Mode::Rational).unwrap();
        let ex = p.exact().unwrap();
        assert_eq!(ex.get(0, 0), q(1, 1));
        assert_eq!(ex.get(0, 1), q(0, 1));
        assert_eq!(ex.get(3, 0), q(0, 1));
        assert_eq!(ex.get(3, 1), q(2, 3));
        assert!(p.is_doubly_stochastic());
    }

    #[test]
    fn de_bruijn_small() {
        let a = de_bruijn(1, Mode::Float).unwrap();
        assert!(a.as_dmatrix().iter().all(|&x| x == 0.5));
        let a = de_bruijn(3, Mode::Rational).unwrap();
        assert!(a.is_doubly_stochastic());
        assert_eq!(a.get(0b101, 0b010), 0.5);
        assert_eq!(a.get(0b101, 0b011), 0.5);
        assert_eq!(a.get(0b101, 0b101), 0.0);
        assert!(de_bruijn(0, Mode::Float).is_err());
        assert!(matches!(
            de_bruijn(30, Mode::Float),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn klawe_vazirani_small() {
        let a = klawe_vazirani(3, Mode::Rational).unwrap();
        assert_eq!(a.get(0, 0), 0.5);
        assert_eq!(a.get(0, 1), 0.5);
        assert!(a.is_doubly_stochastic());
        for bad in [1, 2, 9, 15] {
            assert!(klawe_vazirani(bad, Mode::Float).is_err());
        }
        assert!(is_odd_prime(13) && !is_odd_prime(21));
    }
}
