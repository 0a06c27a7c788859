//! Parameter spaces κ, a, b, θ and the maps between them.
//!
//! κ lives in the hyperplane `2κ0 + κ1 + κ2 + κ3 + κ4 = 1`; only κ1..κ4 enter
//! the maps below, κ0 is carried along for completeness.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Residual allowed on the κ constraint when built from floats.
pub const KAPPA_CONSTRAINT_TOL: f64 = 1e-12;

/// Default tolerance for tolerant wall detection.
pub const DEFAULT_WALL_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of the Painlevé parameter space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 5]", into = "[Complex64; 5]")]
pub struct KappaPoint {
    values: [Complex64; 5],
    exact: Option<[BigRational; 5]>,
}

impl KappaPoint {
    /// Builds κ from all five entries, checking the linear constraint.
    pub fn new(values: [Complex64; 5]) -> Result<Self> {
        let residual =
            (values[0] * 2.0 + values[1] + values[2] + values[3] + values[4] - 1.0).norm();
        if !(residual <= KAPPA_CONSTRAINT_TOL) {
            return Err(Error::KappaConstraint { residual });
        }
        Ok(Self {
            values,
            exact: None,
        })
    }

    /// Builds κ from κ1..κ4, reconstructing κ0.
    pub fn from_tail(tail: [Complex64; 4]) -> Self {
        let k0 = (Complex64::new(1.0, 0.0) - tail[0] - tail[1] - tail[2] - tail[3]) / 2.0;
        Self {
            values: [k0, tail[0], tail[1], tail[2], tail[3]],
            exact: None,
        }
    }

    /// Builds κ from rational κ1..κ4. The exact values are kept for wall tests.
    pub fn from_rationals(tail: [BigRational; 4]) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let k0 = (BigRational::one() - &tail[0] - &tail[1] - &tail[2] - &tail[3]) / two;
        let exact = [k0, tail[0].clone(), tail[1].clone(), tail[2].clone(), tail[3].clone()];
        let values = exact
            .clone()
            .map(|q| Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0));
        Self {
            values,
            exact: Some(exact),
        }
    }

    /// Convenience for small rationals given as `(numerator, denominator)`.
    pub fn from_fractions(tail: [(i64, i64); 4]) -> Self {
        Self::from_rationals(tail.map(|(p, q)| BigRational::new(p.into(), q.into())))
    }

    /// κ_i for `i` in 0..=4.
    pub fn kappa(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn values(&self) -> &[Complex64; 5] {
        &self.values
    }

    /// κ1..κ4.
    pub fn tail(&self) -> [Complex64; 4] {
        [self.values[1], self.values[2], self.values[3], self.values[4]]
    }

    /// Exact κ0..κ4 when the point was built from rationals.
    pub fn exact(&self) -> Option<&[BigRational; 5]> {
        self.exact.as_ref()
    }
}

impl TryFrom<[Complex64; 5]> for KappaPoint {
    type Error = Error;

    fn try_from(values: [Complex64; 5]) -> Result<Self> {
        Self::new(values)
    }
}

impl From<KappaPoint> for [Complex64; 5] {
    fn from(k: KappaPoint) -> Self {
        k.values
    }
}

/// Local monodromy traces a1..a4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonodromyTraces(pub [Complex64; 4]);

/// Monodromy eigenvalues b1..b4, all nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 4]", into = "[Complex64; 4]")]
pub struct EigenParams([Complex64; 4]);

impl EigenParams {
    pub fn new(b: [Complex64; 4]) -> Result<Self> {
        if let Some(pos) = b.iter().position(|v| v.is_zero() || !v.is_finite()) {
            return Err(Error::ZeroEigenvalue { index: pos + 1 });
        }
        Ok(Self(b))
    }

    pub fn values(&self) -> &[Complex64; 4] {
        &self.0
    }

    /// b_l for `l` in 1..=4.
    pub fn b(&self, l: usize) -> Complex64 {
        self.0[l - 1]
    }
}

impl TryFrom<[Complex64; 4]> for EigenParams {
    type Error = Error;

    fn try_from(b: [Complex64; 4]) -> Result<Self> {
        Self::new(b)
    }
}

impl From<EigenParams> for [Complex64; 4] {
    fn from(b: EigenParams) -> Self {
        b.0
    }
}

/// Coefficients θ1..θ4 of the cubic surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThetaPoint(pub [Complex64; 4]);

impl ThetaPoint {
    /// θ_i for `i` in 1..=4.
    pub fn theta(&self, i: usize) -> Complex64 {
        self.0[i - 1]
    }
}

pub fn kappa_to_traces(kappa: &KappaPoint) -> MonodromyTraces {
    let k = kappa.tail();
    let a = |z: Complex64| (z * PI).cos() * 2.0;
    MonodromyTraces([a(k[0]), a(k[1]), a(k[2]), -a(k[3])])
}

pub fn kappa_to_eigen(kappa: &KappaPoint) -> EigenParams {
    let k = kappa.tail();
    let e = |z: Complex64| (I * PI * z).exp();
    // exp never vanishes
    EigenParams([e(k[0]), e(k[1]), e(k[2]), -e(k[3])])
}

pub fn traces_from_eigen(b: &EigenParams) -> Result<MonodromyTraces> {
    let b = EigenParams::new(b.0)?;
    Ok(MonodromyTraces(b.0.map(|v| v + v.inv())))
}

/// The polynomial map a ↦ θ.
pub fn traces_to_theta(a: &MonodromyTraces) -> ThetaPoint {
    let [a1, a2, a3, a4] = a.0;
    ThetaPoint([
        a1 * a4 + a2 * a3,
        a2 * a4 + a3 * a1,
        a3 * a4 + a1 * a2,
        a1 * a2 * a3 * a4 + a1 * a1 + a2 * a2 + a3 * a3 + a4 * a4 - 4.0,
    ])
}

/// Parameter-level Riemann–Hilbert map κ ↦ θ.
pub fn rh_params(kappa: &KappaPoint) -> ThetaPoint {
    traces_to_theta(&kappa_to_traces(kappa))
}

/// Discriminant of `S(θ)` in eigenvalue coordinates: the 4 squared factors
/// `(b_l - 1/b_l)²` times the 16 factors `(b^ε - 1)`.
pub fn discriminant(b: &EigenParams) -> Complex64 {
    let v = b.0;
    let mut d = Complex64::new(1.0, 0.0);
    for bl in v {
        let t = bl - bl.inv();
        d *= t * t;
    }
    for mask in 0..16u32 {
        let mut prod = Complex64::new(1.0, 0.0);
        for (l, bl) in v.iter().enumerate() {
            prod *= if mask & (1 << l) == 0 { *bl } else { bl.inv() };
        }
        d *= prod - 1.0;
    }
    d
}

/// Discriminant divided by a natural scale so it can be compared with a
/// unitless tolerance.
pub fn relative_discriminant(b: &EigenParams) -> f64 {
    let v = b.0;
    let mut scale = 1.0;
    for bl in v {
        let t = bl.norm() + bl.inv().norm();
        scale *= t * t;
    }
    for mask in 0..16u32 {
        let mut prod = 1.0;
        for (l, bl) in v.iter().enumerate() {
            prod *= if mask & (1 << l) == 0 {
                bl.norm()
            } else {
                bl.inv().norm()
            };
        }
        scale *= prod + 1.0;
    }
    discriminant(b).norm() / scale
}

/// Smallest factor of the discriminant, each scaled to at most 1. Unlike
/// [`relative_discriminant`] this does not shrink with the number of factors.
pub fn discriminant_margin(b: &EigenParams) -> f64 {
    let v = b.0;
    let mut m = f64::INFINITY;
    for bl in v {
        m = m.min((bl - bl.inv()).norm() / (bl.norm() + bl.inv().norm()));
    }
    for mask in 0..16u32 {
        let mut prod = Complex64::new(1.0, 0.0);
        for (l, bl) in v.iter().enumerate() {
            prod *= if mask & (1 << l) == 0 { *bl } else { bl.inv() };
        }
        m = m.min((prod - 1.0).norm() / (prod.norm() + 1.0));
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WallMode {
    /// Rational arithmetic; requires a κ built from rationals.
    Exact,
    /// Float residuals against the given tolerance.
    Tolerant { tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    /// κ_i = m
    #[serde(rename = "kappa_i_integer")]
    KappaInteger,
    /// κ1 ± κ2 ± κ3 ± κ4 = 2m + 1
    #[serde(rename = "signed_sum_odd")]
    SignedSumOdd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallWitness {
    pub kind: RelationKind,
    /// 1..=4 for [`RelationKind::KappaInteger`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    /// Signs applied to κ1..κ4 for [`RelationKind::SignedSumOdd`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub signs: Option<[i8; 4]>,
    pub m: i64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallReport {
    pub on_wall: bool,
    pub witnesses: Vec<WallWitness>,
}

impl WallReport {
    fn from_witnesses(witnesses: Vec<WallWitness>) -> Self {
        Self {
            on_wall: !witnesses.is_empty(),
            witnesses,
        }
    }
}

/// Sign patterns (+, ±, ±, ±). Flipping every sign gives the same family of
/// hyperplanes with m ↦ -m - 1, so κ1 keeps a plus sign.
fn sign_patterns() -> impl Iterator<Item = [i8; 4]> {
    (0..8u8).map(|mask| {
        let s = |bit: u8| if mask & bit == 0 { 1 } else { -1 };
        [1, s(1), s(2), s(4)]
    })
}

/// Tests whether κ lies on a reflecting hyperplane of the affine Weyl group
/// of type D4.
pub fn wall_membership(kappa: &KappaPoint, mode: WallMode) -> Result<WallReport> {
    match mode {
        WallMode::Exact => {
            let exact = kappa.exact().ok_or(Error::InexactKappa)?;
            Ok(exact_walls(&exact[1..]))
        }
        WallMode::Tolerant { tol } => Ok(tolerant_walls(&kappa.tail(), tol)),
    }
}

fn exact_walls(k: &[BigRational]) -> WallReport {
    let mut witnesses = Vec::new();
    for (i, ki) in k.iter().enumerate() {
        if ki.is_integer() {
            witnesses.push(WallWitness {
                kind: RelationKind::KappaInteger,
                index: Some(i + 1),
                signs: None,
                m: ki.to_integer().to_i64().unwrap_or(i64::MAX),
                residual: 0.0,
            });
        }
    }
    for signs in sign_patterns() {
        let sum = k
            .iter()
            .zip(signs)
            .fold(BigRational::zero(), |acc, (ki, s)| {
                if s > 0 {
                    acc + ki
                } else {
                    acc - ki
                }
            });
        if sum.is_integer() && sum.to_integer().is_odd() {
            let m = (sum.to_integer() - BigInt::one()) / BigInt::from(2);
            witnesses.push(WallWitness {
                kind: RelationKind::SignedSumOdd,
                index: None,
                signs: Some(signs),
                m: m.to_i64().unwrap_or(i64::MAX),
                residual: 0.0,
            });
        }
    }
    WallReport::from_witnesses(witnesses)
}

fn tolerant_walls(k: &[Complex64; 4], tol: f64) -> WallReport {
    let bound = m_scan_bound(k);
    let mut witnesses = Vec::new();
    for (i, ki) in k.iter().enumerate() {
        for m in -bound..=bound {
            let residual = (ki - m as f64).norm();
            if residual <= tol {
                witnesses.push(WallWitness {
                    kind: RelationKind::KappaInteger,
                    index: Some(i + 1),
                    signs: None,
                    m,
                    residual,
                });
            }
        }
    }
    for signs in sign_patterns() {
        let sum: Complex64 = k.iter().zip(signs).map(|(ki, s)| ki * s as f64).sum();
        for m in -bound..=bound {
            let residual = (sum - (2 * m + 1) as f64).norm();
            if residual <= tol {
                witnesses.push(WallWitness {
                    kind: RelationKind::SignedSumOdd,
                    index: None,
                    signs: Some(signs),
                    m,
                    residual,
                });
            }
        }
    }
    WallReport::from_witnesses(witnesses)
}

/// Range of m worth scanning: any wall value satisfies |m| ≤ Σ|κ_i| + 1.
fn m_scan_bound(k: &[Complex64; 4]) -> i64 {
    let total: f64 = k.iter().map(|z| z.norm()).sum();
    total.ceil() as i64 + 1
}

/// Distance from κ1..κ4 to the nearest wall, measured in the same residuals
/// the tolerant test uses.
pub fn wall_distance(kappa: &KappaPoint) -> f64 {
    let k = kappa.tail();
    let mut best = f64::INFINITY;
    for ki in k {
        best = best.min((ki - ki.re.round()).norm());
    }
    for signs in sign_patterns() {
        let sum: Complex64 = k.iter().zip(signs).map(|(ki, s)| ki * s as f64).sum();
        let odd = 2.0 * ((sum.re - 1.0) / 2.0).round() + 1.0;
        best = best.min((sum - odd).norm());
    }
    best
}

/// Draws rational κ1..κ4 that are certified off every wall by the exact test
/// and stay at least `margin` away from the walls. Denominators are at most
/// `max_den`.
pub fn random_generic_kappa<R: Rng + ?Sized>(rng: &mut R, max_den: i64, margin: f64) -> KappaPoint {
    assert!(max_den >= 2 && margin < 0.25);
    loop {
        let tail: [BigRational; 4] = std::array::from_fn(|_| {
            let q = rng.gen_range(2..=max_den);
            let p = rng.gen_range(1..q);
            BigRational::new(p.into(), q.into())
        });
        let kappa = KappaPoint::from_rationals(tail);
        let on_wall = wall_membership(&kappa, WallMode::Exact)
            .map(|r| r.on_wall)
            .unwrap_or(true);
        if !on_wall && wall_distance(&kappa) >= margin {
            return kappa;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn traces_at_zero_and_half() {
        let a = kappa_to_traces(&KappaPoint::from_tail([c(0.0); 4]));
        for (got, want) in a.0.iter().zip([2.0, 2.0, 2.0, -2.0]) {
            assert!(close(*got, c(want), 1e-15));
        }
        let a = kappa_to_traces(&KappaPoint::from_tail([c(0.5); 4]));
        assert!(a.0.iter().all(|v| v.norm() < 1e-15));
        let a = kappa_to_traces(&KappaPoint::from_fractions([(1, 3); 4]));
        for (got, want) in a.0.iter().zip([1.0, 1.0, 1.0, -1.0]) {
            assert!(close(*got, c(want), 1e-14));
        }
    }

    #[test]
    fn eigen_examples() {
        let b = kappa_to_eigen(&KappaPoint::from_fractions([(0, 1), (1, 2), (1, 3), (0, 1)]));
        assert!(close(b.b(1), c(1.0), 1e-15));
        assert!(close(b.b(2), I, 1e-15));
        assert!(close(b.b(4), c(-1.0), 1e-15));
    }

    #[test]
    fn traces_from_eigen_examples() {
        let a = traces_from_eigen(&EigenParams::new([c(1.0); 4]).unwrap()).unwrap();
        assert_eq!(a.0, [c(2.0); 4]);
        let a = traces_from_eigen(&EigenParams::new([I; 4]).unwrap()).unwrap();
        assert!(a.0.iter().all(|v| v.norm() < 1e-15));
        let a = traces_from_eigen(&EigenParams::new([c(2.0), c(3.0), c(5.0), c(7.0)]).unwrap())
            .unwrap();
        let want = [5.0 / 2.0, 10.0 / 3.0, 26.0 / 5.0, 50.0 / 7.0];
        for (got, w) in a.0.iter().zip(want) {
            assert!(close(*got, c(w), 1e-14));
        }
    }

    #[test]
    fn zero_eigenvalue_rejected() {
        let err = EigenParams::new([c(1.0), c(0.0), c(1.0), c(1.0)]).unwrap_err();
        assert_eq!(err, Error::ZeroEigenvalue { index: 2 });
        let json = "[[1,0],[1,0],[0,0],[1,0]]";
        assert!(serde_json::from_str::<EigenParams>(json).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_eq!(
            traces_to_theta(&MonodromyTraces([c(0.0); 4])).0,
            [c(0.0), c(0.0), c(0.0), c(-4.0)]
        );
        assert_eq!(
            traces_to_theta(&MonodromyTraces([c(2.0); 4])).0,
            [c(8.0), c(8.0), c(8.0), c(28.0)]
        );
        assert_eq!(
            traces_to_theta(&MonodromyTraces([c(0.0), c(0.0), c(0.0), c(-2.0)])).0,
            [c(0.0); 4]
        );
    }

    #[test]
    fn rh_examples() {
        let t = rh_params(&KappaPoint::from_tail([c(0.5); 4]));
        for (got, want) in t.0.iter().zip([0.0, 0.0, 0.0, -4.0]) {
            assert!(close(*got, c(want), 1e-14));
        }
        // a = (2,2,2,-2): θ_i = -4 + 4 = 0, θ4 = -16 + 16 - 4 = -4
        let t = rh_params(&KappaPoint::from_tail([c(0.0); 4]));
        for (got, want) in t.0.iter().zip([0.0, 0.0, 0.0, -4.0]) {
            assert!(close(*got, c(want), 1e-13));
        }
    }

    #[test]
    fn kappa_constraint_checked() {
        assert!(KappaPoint::new([c(0.0), c(0.25), c(0.25), c(0.25), c(0.25)]).is_ok());
        let err = KappaPoint::new([c(0.1), c(0.25), c(0.25), c(0.25), c(0.25)]).unwrap_err();
        assert!(matches!(err, Error::KappaConstraint { .. }));
        let k = KappaPoint::from_fractions([(1, 5), (1, 7), (1, 11), (1, 13)]);
        let sum = k.values()[0] * 2.0 + k.values()[1] + k.values()[2] + k.values()[3] + k.values()[4];
        assert!(close(sum, c(1.0), 1e-15));
        let e = k.exact().unwrap();
        assert_eq!(
            &e[0] * BigRational::from_integer(2.into()) + &e[1] + &e[2] + &e[3] + &e[4],
            BigRational::one()
        );
    }

    #[test]
    fn discriminant_examples() {
        let b = EigenParams::new([c(1.0), c(2.0), c(3.0), c(5.0)]).unwrap();
        assert_eq!(discriminant(&b), c(0.0));
        let b = EigenParams::new([I; 4]).unwrap();
        assert!(discriminant(&b).norm() < 1e-12);
        let b = EigenParams::new([c(2.0), c(3.0), c(5.0), c(7.0)]).unwrap();
        assert!(discriminant(&b).norm() > 1.0);
        assert!(relative_discriminant(&b) > 1e-8);
    }

    #[test]
    fn wall_examples() {
        let r = wall_membership(&KappaPoint::from_fractions([(1, 1), (1, 3), (1, 5), (1, 7)]), WallMode::Exact)
            .unwrap();
        assert!(r.on_wall);
        assert!(r
            .witnesses
            .iter()
            .any(|w| w.kind == RelationKind::KappaInteger && w.index == Some(1) && w.m == 1));

        let r = wall_membership(&KappaPoint::from_fractions([(1, 4); 4]), WallMode::Exact).unwrap();
        assert!(r.on_wall);
        assert!(r.witnesses.iter().any(|w| w.kind == RelationKind::SignedSumOdd
            && w.signs == Some([1, 1, 1, 1])
            && w.m == 0));

        let generic = KappaPoint::from_fractions([(1, 5), (1, 7), (1, 11), (1, 13)]);
        let r = wall_membership(&generic, WallMode::Exact).unwrap();
        assert!(!r.on_wall && r.witnesses.is_empty());
        let r = wall_membership(&generic, WallMode::Tolerant { tol: DEFAULT_WALL_TOL }).unwrap();
        assert!(!r.on_wall);
    }

    #[test]
    fn exact_mode_needs_rationals() {
        let k = KappaPoint::from_tail([c(0.2), c(0.3), c(0.1), c(0.05)]);
        assert_eq!(wall_membership(&k, WallMode::Exact), Err(Error::InexactKappa));
        assert_eq!(Error::InexactKappa.to_string(), "exact mode requires rational κ");
    }

    #[test]
    fn tolerant_mode_handles_large_kappa() {
        // 37 is far outside any fixed scan window
        let k = KappaPoint::from_tail([c(37.0 + 1e-12), c(0.3), c(0.1), c(0.05)]);
        let r = wall_membership(&k, WallMode::Tolerant { tol: 1e-9 }).unwrap();
        assert!(r.witnesses.iter().any(|w| w.index == Some(1) && w.m == 37));
        let k = KappaPoint::from_tail([c(20.25), c(-20.25), c(0.25), c(0.25)]);
        let r = wall_membership(&k, WallMode::Tolerant { tol: 1e-9 }).unwrap();
        assert!(r.on_wall);
    }

    #[test]
    fn tolerant_mode_sees_complex_offset() {
        let k = KappaPoint::from_tail([Complex64::new(1.0, 1e-3), c(0.3), c(0.1), c(0.05)]);
        let r = wall_membership(&k, WallMode::Tolerant { tol: 1e-9 }).unwrap();
        assert!(!r.on_wall);
    }

    #[test]
    fn wall_report_json_kinds() {
        let r = wall_membership(&KappaPoint::from_fractions([(1, 1), (1, 4), (1, 4), (1, 4)]), WallMode::Exact)
            .unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"kappa_i_integer\""));
        let r = wall_membership(&KappaPoint::from_fractions([(1, 4); 4]), WallMode::Exact).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"signed_sum_odd\""));
        let back: WallReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn parameter_json_is_pairs() {
        let k = KappaPoint::from_tail([c(0.25), Complex64::new(0.1, 0.2), c(0.0), c(0.5)]);
        let json = serde_json::to_string(&k).unwrap();
        assert!(json.starts_with("[[") && json.contains("[0.1,0.2]"));
        let back: KappaPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values(), k.values());
        let t = rh_params(&k);
        let back: ThetaPoint = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn generated_kappa_is_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let k = random_generic_kappa(&mut rng, 30, 0.02);
            assert!(!wall_membership(&k, WallMode::Exact).unwrap().on_wall);
            assert!(relative_discriminant(&kappa_to_eigen(&k)) > 0.0);
        }
    }
}
