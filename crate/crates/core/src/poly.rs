//! Dense univariate polynomials with big-integer coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Coefficients are stored lowest degree first; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x`
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// `x - r`
    pub fn linear(r: i64) -> Self {
        Self::from_i64(&[-r, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| {
            acc * z + c.to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Synthetic division by `x - r`; `None` unless the division is exact.
    pub fn div_linear(&self, r: i64) -> Option<Self> {
        let n = self.coeffs.len();
        if n == 0 {
            return Some(Self::zero());
        }
        let r = BigInt::from(r);
        let mut q = vec![BigInt::zero(); n - 1];
        let mut carry = BigInt::zero();
        for k in (0..n).rev() {
            let v = &self.coeffs[k] + &carry * &r;
            if k == 0 {
                return v.is_zero().then(|| Self::new(q));
            }
            q[k - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    /// Multiplicity of the integer root `r`.
    pub fn root_multiplicity(&self, r: i64) -> usize {
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            match p.div_linear(r) {
                Some(q) => {
                    p = q;
                    m += 1;
                }
                None => break,
            }
        }
        m
    }

    /// Divides out all factors `x - r` for the given integer roots and
    /// returns the multiplicities together with the cofactor.
    pub fn strip_integer_roots(&self, roots: &[i64]) -> (Vec<usize>, Self) {
        let mut p = self.clone();
        let mult = roots
            .iter()
            .map(|&r| {
                let m = p.root_multiplicity(r);
                for _ in 0..m {
                    p = p.div_linear(r).expect("multiplicity was just counted");
                }
                m
            })
            .collect();
        (mult, p)
    }

    /// Content-free part of `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) < 1 {
            return self.clone();
        }
        let p = RatPoly::from_int(self);
        let g = p.gcd(&RatPoly::from_int(&self.derivative()));
        p.div_exact(&g).to_primitive()
    }

    /// All complex roots (with multiplicity collapsed) of the polynomial.
    pub fn distinct_roots(&self) -> Vec<Complex64> {
        let sf = self.squarefree_part();
        let coeffs: Vec<Complex64> = sf
            .coeffs
            .iter()
            .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
            .collect();
        aberth_roots(&coeffs)
    }
}

impl fmt::Display for IntPoly {
    /// Highest degree first, e.g. `x^3 - 2x + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_mag = !mag.is_one() || k == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

/// Polynomial over ℚ, used only for exact gcds.
#[derive(Clone, Debug, PartialEq)]
struct RatPoly(Vec<BigRational>);

impl RatPoly {
    fn from_int(p: &IntPoly) -> Self {
        Self(p.coeffs.iter().cloned().map(BigRational::from_integer).collect())
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn div_rem(&self, d: &Self) -> (Self, Self) {
        let mut r = self.0.clone();
        let dl = d.0.last().expect("division by zero polynomial").clone();
        let dn = d.0.len();
        if r.len() < dn {
            return (Self(vec![]), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dn + 1];
        for k in (0..q.len()).rev() {
            let factor = &r[k + dn - 1] / &dl;
            if !factor.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &factor * dc;
                }
            }
            q[k] = factor;
        }
        (Self(q).trim(), Self(r).trim())
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone().trim();
        let mut b = other.clone().trim();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        debug_assert!(r.is_zero());
        q
    }

    fn to_primitive(&self) -> IntPoly {
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().is_some_and(Signed::is_negative) {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let g = if g.is_zero() { BigInt::one() } else { g * sign };
        IntPoly::new(ints.into_iter().map(|c| c / &g).collect())
    }
}

/// Simultaneous root iteration (Aberth–Ehrlich) followed by Newton polishing.
/// Intended for polynomials with simple roots; coefficients lowest first.
pub fn aberth_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for c in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    // Cauchy bound for the initial circle
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[k] -= step;
            moved = moved.max(step.norm() / (1.0 + z[k].norm()));
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zk);
            if dp.is_zero() {
                break;
            }
            *zk -= p / dp;
        }
    }
    z
}
