//! The affine cubic `S(θ)`:
//!
//! `f(x, θ) = x1 x2 x3 + x1² + x2² + x3² - θ1 x1 - θ2 x2 - θ3 x3 + θ4`,
//!
//! its involutions σ_i, the braid maps g_i, and words in both.
//!
//! The maps are written once over [`Scalar`] so the same code runs in complex
//! doubles and in exact rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::ThetaPoint;
use crate::{Error, Result};

pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e8;
pub const DEFAULT_SURFACE_TOL: f64 = 1e-9;

/// Ring operations needed by the polynomial maps.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// The other two indices of `i` (0-based), in increasing order.
fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => panic!("coordinate index out of range"),
    }
}

/// The cyclic triple `(i, j, k)` starting at `i` (0-based).
fn cyclic(i: usize) -> (usize, usize, usize) {
    (i, (i + 1) % 3, (i + 2) % 3)
}

fn check_index(i: usize) {
    assert!((1..=3).contains(&i), "generator index must be 1..=3, got {i}");
}

pub fn cubic<T: Scalar>(x: &[T; 3], theta: &[T; 4]) -> T {
    let [x1, x2, x3] = x.clone();
    let [t1, t2, t3, t4] = theta.clone();
    x1.clone() * x2.clone() * x3.clone() + x1.clone() * x1.clone() + x2.clone() * x2.clone()
        + x3.clone() * x3.clone()
        - t1 * x1
        - t2 * x2
        - t3 * x3
        + t4
}

pub fn gradient<T: Scalar>(x: &[T; 3], theta: &[T; 4]) -> [T; 3] {
    let [x1, x2, x3] = x.clone();
    [
        x2.clone() * x3.clone() + x1.clone() + x1.clone() - theta[0].clone(),
        x1.clone() * x3.clone() + x2.clone() + x2.clone() - theta[1].clone(),
        x1 * x2 + x3.clone() + x3 - theta[2].clone(),
    ]
}

/// σ_i, `i` in 1..=3: `x_i ↦ θ_i - x_i - x_j x_k`.
pub fn sigma<T: Scalar>(i: usize, x: &[T; 3], theta: &[T; 4]) -> [T; 3] {
    check_index(i);
    let i = i - 1;
    let (j, k) = others(i);
    let mut y = x.clone();
    y[i] = theta[i].clone() - x[i].clone() - x[j].clone() * x[k].clone();
    y
}

/// g_i, `i` in 1..=3, with `(i, j, k)` the cyclic triple starting at i.
pub fn g_forward<T: Scalar>(i: usize, x: &[T; 3], theta: &[T; 4]) -> ([T; 3], [T; 4]) {
    check_index(i);
    let (i, j, k) = cyclic(i - 1);
    let mut y = x.clone();
    y[i] = theta[j].clone() - x[j].clone() - x[k].clone() * x[i].clone();
    y[j] = x[i].clone();
    let mut t = theta.clone();
    t.swap(i, j);
    (y, t)
}

/// The inverse of [`g_forward`].
pub fn g_inverse<T: Scalar>(i: usize, x: &[T; 3], theta: &[T; 4]) -> ([T; 3], [T; 4]) {
    check_index(i);
    let (i, j, k) = cyclic(i - 1);
    let mut t = theta.clone();
    t.swap(i, j);
    let mut y = x.clone();
    y[i] = x[j].clone();
    y[j] = t[j].clone() - x[i].clone() - x[k].clone() * x[j].clone();
    (y, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorLetter {
    /// σ_i
    Sigma(u8),
    /// g_i (`inverse == false`) or g_i⁻¹
    G { index: u8, inverse: bool },
}

impl GeneratorLetter {
    pub fn sigma(i: u8) -> Result<Self> {
        check_letter_index(i)?;
        Ok(Self::Sigma(i))
    }

    pub fn g(i: u8, power: i8) -> Result<Self> {
        check_letter_index(i)?;
        match power {
            1 => Ok(Self::G { index: i, inverse: false }),
            -1 => Ok(Self::G { index: i, inverse: true }),
            _ => Err(Error::InvalidArgument(format!("letter power {power} must be ±1"))),
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Self::Sigma(i) => Self::Sigma(i),
            Self::G { index, inverse } => Self::G { index, inverse: !inverse },
        }
    }

    pub fn apply<T: Scalar>(self, x: &[T; 3], theta: &[T; 4]) -> ([T; 3], [T; 4]) {
        match self {
            Self::Sigma(i) => (sigma(i as usize, x, theta), theta.clone()),
            Self::G { index, inverse: false } => g_forward(index as usize, x, theta),
            Self::G { index, inverse: true } => g_inverse(index as usize, x, theta),
        }
    }
}

fn check_letter_index(i: u8) -> Result<()> {
    if (1..=3).contains(&i) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("generator index {i} not in 1..=3")))
    }
}

impl fmt::Display for GeneratorLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sigma(i) => write!(f, "s{i}"),
            Self::G { index, inverse: false } => write!(f, "g{index}"),
            Self::G { index, inverse: true } => write!(f, "g{index}^-1"),
        }
    }
}

/// A word in the generators, written in composition order: the last letter
/// acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupWord(pub Vec<GeneratorLetter>);

impl GroupWord {
    pub fn new(letters: Vec<GeneratorLetter>) -> Self {
        Self(letters)
    }

    /// `c = σ1 σ2 σ3`
    pub fn coxeter() -> Self {
        Self(vec![
            GeneratorLetter::Sigma(1),
            GeneratorLetter::Sigma(2),
            GeneratorLetter::Sigma(3),
        ])
    }

    pub fn power(&self, n: usize) -> Self {
        Self(self.0.iter().copied().cycle().take(self.0.len() * n).collect())
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Evaluates the word with no escape control.
    pub fn apply<T: Scalar>(&self, x: &[T; 3], theta: &[T; 4]) -> ([T; 3], [T; 4]) {
        let mut state = (x.clone(), theta.clone());
        for letter in self.0.iter().rev() {
            state = letter.apply(&state.0, &state.1);
        }
        state
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses words such as `"s1 s2 s3"`, `"g1^2 g2^-2 g1^-2 g2^2"` or `"c^2"`.
/// Tokens are separated by whitespace; `c` expands to `s1 s2 s3`. The leftmost
/// token acts last.
impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let (base, exp) = match token.split_once('^') {
                Some((b, e)) => (
                    b,
                    e.parse::<i32>()
                        .map_err(|_| Error::Parse(format!("bad exponent in '{token}'")))?,
                ),
                None => (token, 1),
            };
            let block: Vec<GeneratorLetter> = match base {
                "c" => GroupWord::coxeter().0,
                _ => {
                    let (kind, idx) = base.split_at(1);
                    let i: u8 = idx
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad generator '{token}'")))?;
                    let letter = match kind {
                        "s" => GeneratorLetter::sigma(i),
                        "g" => GeneratorLetter::g(i, 1),
                        _ => return Err(Error::Parse(format!("unknown generator '{token}'"))),
                    }
                    .map_err(|e| Error::Parse(e.to_string()))?;
                    vec![letter]
                }
            };
            let block = GroupWord(block);
            let block = if exp < 0 { block.inverse() } else { block };
            letters.extend(block.power(exp.unsigned_abs() as usize).0);
        }
        Ok(Self(letters))
    }
}

/// A point of ℂ³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePoint {
    pub x: [Complex64; 3],
}

impl AffinePoint {
    pub fn new(x: [Complex64; 3]) -> Self {
        Self { x }
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn residual(&self, theta: &ThetaPoint) -> f64 {
        cubic_eval(self, theta).norm()
    }

    /// `|f(x, θ)| ≤ tol (1 + |x|³)`.
    pub fn on_surface(&self, theta: &ThetaPoint, tol: f64) -> bool {
        self.residual(theta) <= tol * (1.0 + self.norm().powi(3))
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
    }

    /// JSON record `{"x": [...], "residual": ...}` relative to θ.
    pub fn record(&self, theta: &ThetaPoint) -> PointRecord {
        PointRecord {
            x: self.x,
            residual: self.residual(theta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: [Complex64; 3],
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapStatus {
    Ok,
    Escaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub point: AffinePoint,
    pub theta: ThetaPoint,
    pub status: MapStatus,
}

pub fn cubic_eval(x: &AffinePoint, theta: &ThetaPoint) -> Complex64 {
    cubic(&x.x, &theta.0)
}

pub fn cubic_gradient(x: &AffinePoint, theta: &ThetaPoint) -> [Complex64; 3] {
    gradient(&x.x, &theta.0)
}

pub fn sigma_apply(i: usize, x: &AffinePoint, theta: &ThetaPoint) -> AffinePoint {
    AffinePoint::new(sigma(i, &x.x, &theta.0))
}

/// g_i (`sign = +1`) or g_i⁻¹ (`sign = -1`).
pub fn g_apply(i: usize, sign: i8, x: &AffinePoint, theta: &ThetaPoint) -> Result<MapResult> {
    let letter = GeneratorLetter::g(i as u8, sign)?;
    let (y, t) = letter.apply(&x.x, &theta.0);
    Ok(finish(y, t, DEFAULT_ESCAPE_RADIUS))
}

fn finish(y: [Complex64; 3], t: [Complex64; 4], escape_radius: f64) -> MapResult {
    let point = AffinePoint::new(y);
    let status = if point.is_finite() && point.max_abs() <= escape_radius {
        MapStatus::Ok
    } else {
        MapStatus::Escaped
    };
    MapResult {
        point,
        theta: ThetaPoint(t),
        status,
    }
}

/// Applies the word letter by letter, tracking θ and stopping once a
/// coordinate exceeds `escape_radius`.
pub fn word_apply(
    w: &GroupWord,
    x: &AffinePoint,
    theta: &ThetaPoint,
    escape_radius: f64,
) -> MapResult {
    let mut y = x.x;
    let mut t = theta.0;
    for letter in w.0.iter().rev() {
        (y, t) = letter.apply(&y, &t);
        let p = AffinePoint::new(y);
        if !p.is_finite() || p.max_abs() > escape_radius {
            return MapResult {
                point: p,
                theta: ThetaPoint(t),
                status: MapStatus::Escaped,
            };
        }
    }
    finish(y, t, escape_radius)
}

/// `c = σ1 ∘ σ2 ∘ σ3` (σ3 acts first).
pub fn coxeter_apply(x: &AffinePoint, theta: &ThetaPoint) -> MapResult {
    let y = sigma(1, &sigma(2, &sigma(3, &x.x, &theta.0), &theta.0), &theta.0);
    finish(y, theta.0, DEFAULT_ESCAPE_RADIUS)
}

/// `c⁻¹ = σ3 ∘ σ2 ∘ σ1`.
pub fn coxeter_inverse_apply(x: &AffinePoint, theta: &ThetaPoint) -> MapResult {
    let y = sigma(3, &sigma(2, &sigma(1, &x.x, &theta.0), &theta.0), &theta.0);
    finish(y, theta.0, DEFAULT_ESCAPE_RADIUS)
}

pub type Mat3 = [[Complex64; 3]; 3];

pub fn identity3() -> Mat3 {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    [[l, o, o], [o, l, o], [o, o, l]]
}

/// A point carried together with the Jacobian of the map that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub x: [Complex64; 3],
    pub jac: Mat3,
}

impl Jet {
    pub fn seed(x: [Complex64; 3]) -> Self {
        Self { x, jac: identity3() }
    }

    /// Applies σ_i (1-based) and updates the Jacobian by the chain rule.
    pub fn sigma(&mut self, i: usize, theta: &[Complex64; 4]) {
        check_index(i);
        let i = i - 1;
        let (j, k) = others(i);
        let (xj, xk) = (self.x[j], self.x[k]);
        self.x[i] = theta[i] - self.x[i] - xj * xk;
        let rj = self.jac[j];
        let rk = self.jac[k];
        for c in 0..3 {
            self.jac[i][c] = -self.jac[i][c] - xk * rj[c] - xj * rk[c];
        }
    }

    /// Applies a sequence of involution indices in composition order (the
    /// last entry acts first).
    pub fn sigmas(&mut self, word: &[usize], theta: &[Complex64; 4]) {
        for &i in word.iter().rev() {
            self.sigma(i, theta);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Jacobian of the polynomial map `c^n` at x, by the chain rule.
pub fn coxeter_jacobian(x: &AffinePoint, theta: &ThetaPoint, n: usize) -> Result<Mat3> {
    coxeter_jacobian_with_radius(x, theta, n, DEFAULT_ESCAPE_RADIUS)
}

pub fn coxeter_jacobian_with_radius(
    x: &AffinePoint,
    theta: &ThetaPoint,
    n: usize,
    escape_radius: f64,
) -> Result<Mat3> {
    let mut jet = Jet::seed(x.x);
    for step in 0..n {
        jet.sigmas(&[1, 2, 3], &theta.0);
        if !(jet.max_abs() <= escape_radius) {
            return Err(Error::Escaped {
                radius: escape_radius,
                steps: step + 1,
            });
        }
    }
    Ok(jet.jac)
}

/// A point of `S(θ)` built by solving the quadratic in x1 for the given
/// `(x2, x3)`; `root` picks between the two solutions.
pub fn lift_to_surface(x2: Complex64, x3: Complex64, theta: &ThetaPoint, root: bool) -> AffinePoint {
    let t = theta.0;
    let b = x2 * x3 - t[0];
    let c = x2 * x2 + x3 * x3 - t[1] * x2 - t[2] * x3 + t[3];
    let disc = (b * b - c * 4.0).sqrt();
    let x1 = if root { (-b + disc) / 2.0 } else { (-b - disc) / 2.0 };
    AffinePoint::new([x1, x2, x3])
}
