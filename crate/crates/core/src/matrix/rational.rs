//! Exact square matrices over the rationals.
//!
//! Entries share one positive common denominator so products reduce to
//! integer arithmetic followed by a single normalization.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    num: Vec<BigInt>,
    den: BigInt,
}

impl RationalMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let entries: Vec<BigRational> = (0..n * n).map(|k| f(k / n, k % n)).collect();
        let den = entries
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let num = entries
            .iter()
            .map(|q| q.numer() * (&den / q.denom()))
            .collect();
        RationalMatrix { n, num, den }.normalized()
    }

    pub fn zeros(n: usize) -> Self {
        RationalMatrix {
            n,
            num: vec![BigInt::zero(); n * n],
            den: BigInt::one(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.num[i * n + i] = BigInt::one();
        }
        m
    }

    fn normalized(mut self) -> Self {
        let g = self.num.iter().fold(self.den.clone(), |acc, x| acc.gcd(x));
        if !g.is_one() && !g.is_zero() {
            for x in &mut self.num {
                *x /= &g;
            }
            self.den /= &g;
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.num[i * self.n + j].clone(), self.den.clone())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let num = (0..n * n)
            .map(|k| self.num[(k % n) * n + k / n].clone())
            .collect();
        RationalMatrix {
            n,
            num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut num = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.num[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.num[k * n + j];
                    if !b.is_zero() {
                        num[i * n + j] += a * b;
                    }
                }
            }
        }
        RationalMatrix {
            n,
            num,
            den: &self.den * &other.den,
        }
        .normalized()
    }

    pub fn sub(&self, other: &RationalMatrix) -> RationalMatrix {
        self.combine(other, |a, b| a - b)
    }

    pub fn add(&self, other: &RationalMatrix) -> RationalMatrix {
        self.combine(other, |a, b| a + b)
    }

    fn combine(&self, other: &RationalMatrix, op: impl Fn(BigInt, BigInt) -> BigInt) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let den = self.den.lcm(&other.den);
        let fa = &den / &self.den;
        let fb = &den / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| op(a * &fa, b * &fb))
            .collect();
        RationalMatrix {
            n: self.n,
            num,
            den,
        }
        .normalized()
    }

    pub fn scale(&self, q: &BigRational) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            num: self.num.iter().map(|x| x * q.numer()).collect(),
            den: &self.den * q.denom(),
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.sub(&Self::identity(self.n)).is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.num.iter().all(|x| !x.is_negative())
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..i).all(|j| self.num[i * n + j] == self.num[j * n + i]))
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let s: BigInt = self.num[i * n..(i + 1) * n].iter().sum();
                BigRational::new(s, self.den.clone())
            })
            .collect()
    }

    pub fn col_sums(&self) -> Vec<BigRational> {
        self.transpose().row_sums()
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.is_nonnegative()
            && self
                .row_sums()
                .iter()
                .chain(self.col_sums().iter())
                .all(One::is_one)
    }

    pub fn min_diagonal(&self) -> BigRational {
        (0..self.n)
            .map(|i| self.get(i, i))
            .min()
            .unwrap_or_else(BigRational::zero)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> BigRational {
        let m = self.num.iter().map(|x| x.abs()).max().unwrap_or_default();
        BigRational::new(m, self.den.clone())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }
}
