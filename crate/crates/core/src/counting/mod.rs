//! Periodic point counts of the Coxeter transformation.
//!
//! Everything here is exact integer arithmetic except [`solver`], which finds
//! the periodic points numerically. Three integer sequences carry the counts:
//!
//! * `s_N = (2+√5)^N + (2-√5)^N`, with `s_0 = 2`, `s_1 = 4`, `s_{N+2} = 4 s_{N+1} + s_N`;
//! * `C_N = (9+4√5)^N + (9-4√5)^N`, with `C_0 = 2`, `C_1 = 18`, `C_{N+2} = 18 C_{N+1} - C_N`;
//! * the trace `tr((c*)^N)` on `H²`.

pub mod solver;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{coxeter_star, LatticeEndo};
use crate::{Error, Result};

pub use solver::{solve_periodic, Cluster, CountReport, PeriodicPoint, SolveStatus, SolverConfig};

/// Which compactification a count refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Affine,
    Projective,
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(Self::Affine),
            "projective" => Ok(Self::Projective),
            other => Err(Error::Parse(format!("unknown space '{other}'"))),
        }
    }
}

/// Serializes big integers as decimal strings.
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Second-order integer recurrence `u_{n+2} = p u_{n+1} + q u_n`.
fn recurrence(u0: i64, u1: i64, p: i64, q: i64, n: u32) -> BigInt {
    let (mut a, mut b) = (BigInt::from(u0), BigInt::from(u1));
    for _ in 0..n {
        let next = &b * p + &a * q;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// `s_N = (2+√5)^N + (2-√5)^N`.
pub fn surd_trace(n: u32) -> BigInt {
    recurrence(2, 4, 4, 1, n)
}

/// `C_N = (9+4√5)^N + (9-4√5)^N` from its recurrence.
pub fn c_sequence(n: u32) -> BigInt {
    recurrence(2, 18, 18, -1, n)
}

fn sign_term(n: u32) -> BigInt {
    if n % 2 == 0 {
        BigInt::from(4)
    } else {
        BigInt::from(-4)
    }
}

/// An element `u + v√5` of `Z[√5]`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Surd {
    u: BigInt,
    v: BigInt,
}

impl Surd {
    fn mul(&self, o: &Self) -> Self {
        Self {
            u: &self.u * &o.u + &self.v * &o.v * 5,
            v: &self.u * &o.v + &self.v * &o.u,
        }
    }

    fn pow(&self, n: u32) -> Self {
        let mut acc = Self {
            u: BigInt::one(),
            v: BigInt::zero(),
        };
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// `(9+4√5)^N + (9-4√5)^N` by exact powering in `Z[√5]`.
pub fn c_sequence_direct(n: u32) -> BigInt {
    let p = Surd {
        u: BigInt::from(9),
        v: BigInt::from(4),
    }
    .pow(n);
    p.u * 2
}

/// The Lefschetz number of `c^N` on the compact surface, computed twice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lefschetz {
    pub n: u32,
    /// `1 + tr((c*)^N) + 1`.
    #[serde(with = "bigint_string")]
    pub from_trace: BigInt,
    /// `s_N + 4(-1)^N + 2`.
    #[serde(with = "bigint_string")]
    pub closed_form: BigInt,
    /// `(2+√5)^N + (2-√5)^N + 4(-1)^N + 2` in floating point.
    pub approx: f64,
}

impl Lefschetz {
    pub fn agrees(&self) -> bool {
        self.from_trace == self.closed_form
    }
}

fn lefschetz_from(cn: &LatticeEndo, n: u32) -> Lefschetz {
    let s5 = 5f64.sqrt();
    let sign = if n % 2 == 0 { 4.0 } else { -4.0 };
    Lefschetz {
        n,
        from_trace: cn.trace() + 2,
        closed_form: surd_trace(n) + sign_term(n) + 2,
        approx: (2.0 + s5).powi(n as i32) + (2.0 - s5).powi(n as i32) + sign + 2.0,
    }
}

pub fn lefschetz_number(n: u32) -> Result<Lefschetz> {
    check_n(n)?;
    let c = coxeter_star()?;
    Ok(lefschetz_from(&c.pow(n), n))
}

/// Lefschetz numbers for N = 1..=n_max, sharing the matrix powers.
pub fn lefschetz_numbers(n_max: u32) -> Result<Vec<Lefschetz>> {
    let c = coxeter_star()?;
    let mut cn = LatticeEndo::identity();
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        cn = cn.mul(&c);
        out.push(lefschetz_from(&cn, n));
    }
    Ok(out)
}

/// Number of points of period N (not necessarily minimal) of c.
pub fn per_count_closed(n: u32, space: Space) -> Result<BigInt> {
    check_n(n)?;
    let affine = surd_trace(n) + sign_term(n);
    Ok(match space {
        Space::Affine => affine,
        Space::Projective => affine + 1,
    })
}

/// Number of points of period N of the Pochhammer monodromy, `C_N + 4`.
pub fn per_kappa_closed(n: u32) -> Result<BigInt> {
    check_n(n)?;
    Ok(c_sequence(n) + 4)
}

/// Denominator `(1-z)^4 (1 - 18z + z²)` of the zeta function, lowest degree first.
fn zeta_denominator() -> Vec<BigInt> {
    let mut d = vec![BigInt::one(), BigInt::from(-18), BigInt::one()];
    for _ in 0..4 {
        let mut next = vec![BigInt::zero(); d.len() + 1];
        for (k, v) in d.iter().enumerate() {
            next[k] += v;
            next[k + 1] -= v;
        }
        d = next;
    }
    d
}

/// Taylor coefficients `Z_0..=Z_order` of `1/((1-z)^4 (1-18z+z²))`.
pub fn zeta_coefficients(order: usize) -> Vec<BigInt> {
    let d = zeta_denominator();
    let mut z: Vec<BigInt> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut v = if n == 0 { BigInt::one() } else { BigInt::zero() };
        for k in 1..d.len().min(n + 1) {
            v -= &d[k] * &z[n - k];
        }
        z.push(v);
    }
    z
}

/// Coefficients of `exp(Σ_{N≥1} P_N z^N / N)` with `P_N = per_kappa_closed(N)`,
/// through the recurrence `n Z_n = Σ_{k=1}^{n} P_k Z_{n-k}`.
pub fn zeta_from_counts(order: usize) -> Vec<BigRational> {
    let p: Vec<BigRational> = (1..=order as u32)
        .map(|k| BigRational::from_integer(c_sequence(k) + 4))
        .collect();
    let mut z = vec![BigRational::one()];
    for n in 1..=order {
        let s: BigRational = (1..=n).map(|k| &p[k - 1] * &z[n - k]).sum();
        z.push(s / BigRational::from_integer(BigInt::from(n)));
    }
    z
}

/// One row of [`verify_counts`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: u32,
    #[serde(with = "bigint_string")]
    pub lefschetz: BigInt,
    #[serde(with = "bigint_string")]
    pub per_affine: BigInt,
    #[serde(with = "bigint_string")]
    pub per_projective: BigInt,
    #[serde(with = "bigint_string")]
    pub per_affine_double: BigInt,
    #[serde(with = "bigint_string")]
    pub per_kappa: BigInt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n_max: u32,
    pub identities: Vec<String>,
    pub rows: Vec<CountRow>,
    pub zeta_order: usize,
}

fn ensure(ok: bool, identity: &str, n: u32) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::CountMismatch {
            identity: identity.to_string(),
            n,
        })
    }
}

const IDENTITIES: [&str; 7] = [
    "lefschetz trace = closed form",
    "projective - affine = 1",
    "lefschetz - projective = 1",
    "per_kappa(N) = per_affine(2N)",
    "C_N recursion = Z[sqrt5] power",
    "per_kappa(N) - 4 - C_N = 0",
    "zeta series = exp of counts",
];

/// Checks the web of exact count identities for N = 1..=n_max, stopping at
/// the first failure.
pub fn verify_counts(n_max: u32) -> Result<VerifyReport> {
    check_n(n_max)?;
    let lef = lefschetz_numbers(n_max)?;
    let mut rows = Vec::with_capacity(n_max as usize);
    for (l, n) in lef.into_iter().zip(1..) {
        let aff = per_count_closed(n, Space::Affine)?;
        let proj = per_count_closed(n, Space::Projective)?;
        let aff2 = per_count_closed(2 * n, Space::Affine)?;
        let pk = per_kappa_closed(n)?;
        ensure(l.agrees(), IDENTITIES[0], n)?;
        ensure(&proj - &aff == BigInt::one(), IDENTITIES[1], n)?;
        ensure(&l.from_trace - &proj == BigInt::one(), IDENTITIES[2], n)?;
        ensure(pk == aff2, IDENTITIES[3], n)?;
        ensure(c_sequence(n) == c_sequence_direct(n), IDENTITIES[4], n)?;
        ensure((&pk - BigInt::from(4) - c_sequence(n)).is_zero(), IDENTITIES[5], n)?;
        rows.push(CountRow {
            n,
            lefschetz: l.from_trace,
            per_affine: aff,
            per_projective: proj,
            per_affine_double: aff2,
            per_kappa: pk,
        });
    }
    let order = (n_max as usize).min(12);
    let series = zeta_coefficients(order);
    let from_counts = zeta_from_counts(order);
    for (n, (a, b)) in series.iter().zip(&from_counts).enumerate() {
        let ok = b.is_integer() && b.to_integer() == *a;
        ensure(ok, IDENTITIES[6], n as u32)?;
    }
    Ok(VerifyReport {
        n_max,
        identities: IDENTITIES.iter().map(|s| s.to_string()).collect(),
        rows,
        zeta_order: order,
    })
}

/// Exact divisors of `n` below `n`.
pub(crate) fn proper_divisors(n: u32) -> Vec<u32> {
    (1..n).filter(|d| n % d == 0).collect()
}

/// `f64` view of a count, for display.
pub fn approx(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
