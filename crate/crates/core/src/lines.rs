//! The 27 lines on the projective closure `S̄(θ) ⊂ P³`.
//!
//! In homogeneous coordinates `X = [X0:X1:X2:X3]` with `x_i = X_i / X0` the
//! surface is
//!
//! `F = X1 X2 X3 + X0 (X1² + X2² + X3²) - X0² (θ1 X1 + θ2 X2 + θ3 X3) + θ4 X0³`.
//!
//! The plane at infinity cuts out the triangle `L_i = {X0 = X_i = 0}`. Each
//! `L_i` meets eight affine lines, written in terms of the eigenvalue
//! parameters b; together with the triangle these give all 27.

use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::LineLabel;
use crate::params::{discriminant_margin, traces_from_eigen, traces_to_theta, EigenParams, ThetaPoint};
use crate::surface::sigma;
use crate::{Error, Result};

/// Minimum modulus of a normalized 2×2 minor for two forms to define a line.
pub const RANK_TOL: f64 = 1e-12;

/// Default relative residual for a line to count as lying on the surface.
pub const DEFAULT_LINE_TOL: f64 = 1e-8;

/// Relative singular value below which a direction counts as a kernel vector.
const SINGULAR_TOL: f64 = 1e-9;

/// Below this discriminant margin the lines are not trusted to be distinct.
const GENERAL_POSITION_TOL: f64 = 1e-10;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// A point of P³, scaled so its largest-modulus coordinate is exactly 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint(pub [C; 4]);

impl ProjectivePoint {
    /// Returns `None` for the zero vector.
    pub fn new(x: [C; 4]) -> Option<Self> {
        let (idx, m) = x
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(m > 0.0) || !m.is_finite() {
            return None;
        }
        let s = x[idx];
        Some(Self(x.map(|v| v / s)))
    }

    pub fn coords(&self) -> &[C; 4] {
        &self.0
    }

    /// Distance between normalized representatives, up to a unit phase.
    pub fn distance(&self, other: &Self) -> f64 {
        let (k, _) = self
            .0
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if other.0[k].norm() < 1e-300 {
            return f64::INFINITY;
        }
        let s = self.0[k] / other.0[k];
        (0..4).map(|a| (self.0[a] - other.0[a] * s).norm()).fold(0.0, f64::max)
    }

    /// Affine coordinates `X_i / X0`, if the point is not at infinity.
    pub fn affine(&self) -> Option<[C; 3]> {
        let x0 = self.0[0];
        if x0.norm() < 1e-14 {
            return None;
        }
        Some([self.0[1] / x0, self.0[2] / x0, self.0[3] / x0])
    }
}

/// The homogeneous cubic F.
pub fn homogeneous_cubic(x: &[C; 4], theta: &ThetaPoint) -> C {
    let [x0, x1, x2, x3] = *x;
    let t = theta.0;
    x1 * x2 * x3 + x0 * (x1 * x1 + x2 * x2 + x3 * x3)
        - x0 * x0 * (t[0] * x1 + t[1] * x2 + t[2] * x3)
        + t[3] * x0 * x0 * x0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecialName {
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
}

/// Vertices `p_i` of the triangle at infinity and the points `q_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub name: SpecialName,
    pub coords: ProjectivePoint,
}

impl SpecialPoint {
    pub fn new(name: SpecialName) -> Self {
        let (o, l) = (c(0.0), c(1.0));
        let x = match name {
            SpecialName::P1 => [o, l, o, o],
            SpecialName::P2 => [o, o, l, o],
            SpecialName::P3 => [o, o, o, l],
            SpecialName::Q1 => [o, o, l, l],
            SpecialName::Q2 => [o, l, o, l],
            SpecialName::Q3 => [o, l, l, o],
        };
        Self {
            name,
            coords: ProjectivePoint(x),
        }
    }

    pub fn all() -> [Self; 6] {
        use SpecialName::*;
        [P1, P2, P3, Q1, Q2, Q3].map(Self::new)
    }
}

/// Which table entry produced a line: group `i` (the triangle side it
/// meets) and slot 1..=8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotRecord {
    pub group: u8,
    pub slot: u8,
}

/// A line of P³ cut out by two independent linear forms on `(X0..X3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveLine {
    forms: [[C; 4]; 2],
    pub label: Option<LineLabel>,
    pub slot: Option<SlotRecord>,
}

impl ProjectiveLine {
    pub fn new(forms: [[C; 4]; 2]) -> Result<Self> {
        let n0 = norm4(&forms[0]);
        let n1 = norm4(&forms[1]);
        if !(n0 > 0.0 && n1 > 0.0) {
            return Err(Error::DegenerateLine);
        }
        let u = forms[0].map(|v| v / n0);
        let w = forms[1].map(|v| v / n1);
        let mut best = 0.0f64;
        for a in 0..4 {
            for b in a + 1..4 {
                best = best.max((u[a] * w[b] - u[b] * w[a]).norm());
            }
        }
        if !(best > RANK_TOL) {
            return Err(Error::DegenerateLine);
        }
        Ok(Self {
            forms,
            label: None,
            slot: None,
        })
    }

    pub fn with_label(mut self, label: LineLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn forms(&self) -> &[[C; 4]; 2] {
        &self.forms
    }

    /// Two points spanning the line: an affine point (X0 = 1) when the line
    /// is not at infinity, and a point at infinity.
    pub fn spanning_points(&self) -> ([C; 4], [C; 4]) {
        let z = [0.0; 4].map(c);
        let k = kernel(&[self.forms[0], self.forms[1], z, z]);
        let (u, v) = (k[0], k[1]);
        let dir = std::array::from_fn(|a| u[a] * v[0] - v[a] * u[0]);
        let base = if u[0].norm() >= v[0].norm() { u } else { v };
        if base[0].norm() < 1e-12 {
            // the line lies in the plane at infinity
            return (u, v);
        }
        let b0 = base[0];
        (base.map(|x| x / b0), normalize(dir))
    }

    /// Points `p + t d` for `t` in `ts`, with `(p, d)` from [`spanning_points`](Self::spanning_points).
    pub fn sample(&self, ts: &[f64]) -> Vec<[C; 4]> {
        let (p, d) = self.spanning_points();
        ts.iter()
            .map(|&t| std::array::from_fn(|a| p[a] + d[a] * t))
            .collect()
    }

    /// Largest modulus of the two forms at `x`, each form scaled to unit norm
    /// and `x` to unit max-modulus.
    pub fn residual_at(&self, x: &[C; 4]) -> f64 {
        let m = x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        self.forms
            .iter()
            .map(|f| {
                let n = norm4(f);
                (0..4).map(|a| f[a] * x[a]).sum::<C>().norm() / (n * m)
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ProjectiveLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.label {
            write!(f, "{l}: ")?;
        }
        let show = |v: &[C; 4]| {
            v.iter()
                .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "[{}] ∧ [{}]", show(&self.forms[0]), show(&self.forms[1]))
    }
}

fn norm4(v: &[C; 4]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: [C; 4]) -> [C; 4] {
    let n = norm4(&v);
    v.map(|z| z / n)
}

/// Singular values (descending) and the matching right singular vectors of
/// a 4×4 complex matrix given by rows.
fn svd4(rows: &[[C; 4]; 4]) -> Vec<(f64, [C; 4])> {
    let m = Matrix4::from_fn(|r, col| rows[r][col]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let mut out: Vec<(f64, [C; 4])> = (0..4)
        .map(|r| (svd.singular_values[r], std::array::from_fn(|col| vt[(r, col)].conj())))
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

/// Orthonormal basis of the numerical kernel.
fn kernel(rows: &[[C; 4]; 4]) -> Vec<[C; 4]> {
    let normed = rows.map(|r| {
        let n = norm4(&r);
        if n > 0.0 {
            r.map(|z| z / n)
        } else {
            r
        }
    });
    let sv = svd4(&normed);
    let top = sv[0].0.max(1e-300);
    sv.into_iter()
        .filter(|(s, _)| *s <= SINGULAR_TOL * top)
        .map(|(_, v)| v)
        .collect()
}

/// The tritangent line `L_i = {X0 = X_i = 0}`, `i` in 1..=3.
pub fn tritangent_line(i: usize) -> Result<ProjectiveLine> {
    if !(1..=3).contains(&i) {
        return Err(Error::InvalidArgument(format!("tritangent index {i} not in 1..=3")));
    }
    let mut f0 = [c(0.0); 4];
    f0[0] = c(1.0);
    let mut fi = [c(0.0); 4];
    fi[i] = c(1.0);
    let (p, q) = crate::lattice::blown_down_pair(i);
    Ok(ProjectiveLine::new([f0, fi])?.with_label(LineLabel::F(p as u8, q as u8)))
}

/// Cyclic triple `(i, j, k)` starting at `i`, 1-based.
fn cyclic(i: usize) -> (usize, usize, usize) {
    (i, i % 3 + 1, (i + 1) % 3 + 1)
}

/// Label of table slot `slot` in group `g`.
pub fn slot_label(g: usize, slot: usize) -> LineLabel {
    const F: [[(u8, u8); 4]; 3] = [
        [(4, 6), (3, 5), (3, 6), (4, 5)],
        [(2, 6), (1, 5), (2, 5), (1, 6)],
        [(2, 4), (1, 3), (1, 4), (2, 3)],
    ];
    let p = (2 * g - 1) as u8;
    let q = (2 * g) as u8;
    match slot {
        1 => LineLabel::E(p),
        2 => LineLabel::G(q),
        3 => LineLabel::E(q),
        4 => LineLabel::G(p),
        5..=8 => {
            let (a, b) = F[g - 1][slot - 5];
            LineLabel::F(a, b)
        }
        _ => panic!("slot {slot} not in 1..=8"),
    }
}

/// `L_i(β_i, β_4; β_j, β_k)`: the forms
/// `X_i - (β_i β_4 + 1/(β_i β_4)) X0` and
/// `X_j + β_i β_4 X_k - (β_i (β_k + 1/β_k) + β_4 (β_j + 1/β_j)) X0`.
fn line_forms(i: usize, beta: [C; 4]) -> [[C; 4]; 2] {
    let (i, j, k) = cyclic(i);
    let [bi, b4, bj, bk] = beta;
    let p = bi * b4;
    let mut f1 = [c(0.0); 4];
    f1[i] = c(1.0);
    f1[0] = -(p + p.inv());
    let mut f2 = [c(0.0); 4];
    f2[j] = c(1.0);
    f2[k] = p;
    f2[0] = -(bi * (bk + bk.inv()) + b4 * (bj + bj.inv()));
    [f1, f2]
}

/// Arguments `(β_i, β_4, β_j, β_k)` for each slot, in table order.
fn slot_arguments(i: usize, slot: usize, b: &EigenParams) -> [C; 4] {
    let (i, j, k) = cyclic(i);
    let (bi, bj, bk, b4) = (b.b(i), b.b(j), b.b(k), b.b(4));
    match slot {
        1 => [bi, b4, bj, bk],
        2 => [bi.inv(), b4.inv(), bj, bk],
        3 => [bj, bk, bi, b4],
        4 => [bj.inv(), bk.inv(), bi, b4],
        5 => [bi.inv(), b4, bj, bk],
        6 => [bi, b4.inv(), bj, bk],
        7 => [bj.inv(), bk, bi, b4],
        8 => [bj, bk.inv(), bi, b4],
        _ => unreachable!(),
    }
}

/// Line `slot` (1..=8) among the eight meeting `L_i`.
pub fn line_from_params(i: usize, slot: usize, b: &EigenParams) -> Result<ProjectiveLine> {
    if !(1..=3).contains(&i) || !(1..=8).contains(&slot) {
        return Err(Error::InvalidArgument(format!(
            "line slot ({i}, {slot}) out of range"
        )));
    }
    let b = EigenParams::new(*b.values())?;
    if discriminant_margin(&b) < GENERAL_POSITION_TOL {
        log::warn!("eigenvalue parameters lie on the discriminant; lines may coincide");
    }
    let mut line = ProjectiveLine::new(line_forms(i, slot_arguments(i, slot, &b)))?;
    line.label = Some(slot_label(i, slot));
    line.slot = Some(SlotRecord {
        group: i as u8,
        slot: slot as u8,
    });
    Ok(line)
}

/// All 27 lines: groups 1..3 with slots 1..8, then L1, L2, L3.
pub fn all_lines(b: &EigenParams) -> Result<Vec<ProjectiveLine>> {
    let mut out = Vec::with_capacity(27);
    for i in 1..=3 {
        for slot in 1..=8 {
            out.push(line_from_params(i, slot, b)?);
        }
    }
    for i in 1..=3 {
        out.push(tritangent_line(i)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCheck {
    pub on_surface: bool,
    pub max_residual: f64,
}

/// Evaluates F at five points of the line (four affine, one at infinity).
/// The reported residual is `|F(X)| / (1 + ‖X‖³)`.
pub fn line_on_surface(line: &ProjectiveLine, theta: &ThetaPoint, tol: f64) -> SurfaceCheck {
    let (p, d) = line.spanning_points();
    let mut pts = line.sample(&[0.0, 1.0, -1.0, 2.0]);
    pts.push(d);
    pts.push(p);
    let max_residual = pts
        .iter()
        .map(|x| {
            let n = norm4(x);
            homogeneous_cubic(x, theta).norm() / (1.0 + n * n * n)
        })
        .fold(0.0, f64::max);
    SurfaceCheck {
        on_surface: max_residual <= tol,
        max_residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "point", rename_all = "lowercase")]
pub enum Intersection {
    Point(ProjectivePoint),
    Disjoint,
    Equal,
}

impl Intersection {
    pub fn meets(&self) -> bool {
        !matches!(self, Self::Disjoint)
    }
}

/// Intersects two lines by the kernel of the stacked 4×4 system.
pub fn lines_intersection(l1: &ProjectiveLine, l2: &ProjectiveLine) -> Intersection {
    let rows = [l1.forms[0], l1.forms[1], l2.forms[0], l2.forms[1]];
    let k = kernel(&rows);
    match k.len() {
        0 => Intersection::Disjoint,
        1 => ProjectivePoint::new(k[0]).map_or(Intersection::Disjoint, Intersection::Point),
        _ => Intersection::Equal,
    }
}

/// One pointwise check that σ_g carries `source` onto `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapCheck {
    pub involution: u8,
    pub source: LineLabel,
    pub target: LineLabel,
    pub max_residual: f64,
}

/// Roots of the quadratic cutting `σ_g(E) ∩ E` for the first line E of group g.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCheck {
    pub involution: u8,
    pub line: LineLabel,
    pub roots: [C; 2],
    pub points: [[C; 3]; 2],
    pub max_residual: f64,
}

/// The single point of `σ_g(E) ∩ E'` for the two E-lines of group g.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseCheck {
    pub involution: u8,
    pub source: LineLabel,
    pub target: LineLabel,
    pub determinant: C,
    pub point: [C; 3],
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaLineReport {
    pub swaps: Vec<SwapCheck>,
    pub quadratics: Vec<QuadraticCheck>,
    pub transverse: Vec<TransverseCheck>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Affine residual of a line's forms at `x`, scaled by `1 + |x|`.
fn affine_residual(line: &ProjectiveLine, x: &[C; 3]) -> f64 {
    let h = [c(1.0), x[0], x[1], x[2]];
    let scale = 1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    line.forms
        .iter()
        .map(|f| (0..4).map(|a| f[a] * h[a]).sum::<C>().norm() / (norm4(f) * scale))
        .fold(0.0, f64::max)
}

/// Checks how each σ_g acts on lines: σ_g swaps the first two and the
/// second two slots of both other groups, pointwise; `σ_g(E) ∩ E` is cut out
/// by a quadratic with two roots; `σ_g(E) ∩ E'` is a single point.
pub fn verify_sigma_line_action(b: &EigenParams, tol: f64) -> Result<SigmaLineReport> {
    let b = EigenParams::new(*b.values())?;
    if discriminant_margin(&b) < GENERAL_POSITION_TOL {
        return Err(Error::NotGeneralPosition);
    }
    let a = traces_from_eigen(&b)?.0;
    let theta = traces_to_theta(&traces_from_eigen(&b)?);

    let mut swaps = Vec::new();
    for g in 1..=3usize {
        for h in (1..=3).filter(|&h| h != g) {
            for (s, t) in [(1, 2), (2, 1), (3, 4), (4, 3)] {
                let src = line_from_params(h, s, &b)?;
                let dst = line_from_params(h, t, &b)?;
                let mut worst = 0.0f64;
                for x in src.sample(&[0.0, 1.0, -1.0]) {
                    let y = [x[1] / x[0], x[2] / x[0], x[3] / x[0]];
                    let z = sigma(g, &y, &theta.0);
                    worst = worst.max(affine_residual(&dst, &z));
                }
                swaps.push(SwapCheck {
                    involution: g as u8,
                    source: slot_label(h, s),
                    target: slot_label(h, t),
                    max_residual: worst,
                });
            }
        }
    }

    let mut quadratics = Vec::new();
    let mut transverse = Vec::new();
    for g in 1..=3usize {
        let (i, j, k) = cyclic(g);
        let (bi, bj, bk, b4) = (b.b(i), b.b(j), b.b(k), b.b(4));
        let (ai, aj, ak, a4) = (a[i - 1], a[j - 1], a[k - 1], a[3]);
        let e = line_from_params(g, 1, &b)?;
        let p = bi * b4;
        let xi = p + p.inv();
        let rhs = ak * bi + aj * b4;
        // p x_k² - rhs x_k + θ_i - 2 x_i = 0
        let qa = p;
        let qb = -rhs;
        let qc = theta.theta(i) - xi * 2.0;
        let disc = (qb * qb - qa * qc * 4.0).sqrt();
        let roots = [(-qb + disc) / (qa * 2.0), (-qb - disc) / (qa * 2.0)];
        let mut worst = 0.0f64;
        let points = roots.map(|xk| {
            let mut x = [c(0.0); 3];
            x[i - 1] = xi;
            x[k - 1] = xk;
            x[j - 1] = rhs - p * xk;
            x
        });
        for x in &points {
            let scale = 1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let q = (qa * x[k - 1] * x[k - 1] + qb * x[k - 1] + qc).norm() / (scale * scale);
            worst = worst.max(q);
            worst = worst.max(affine_residual(&e, x));
            worst = worst.max(affine_residual(&e, &sigma(g, x, &theta.0)));
        }
        quadratics.push(QuadraticCheck {
            involution: g as u8,
            line: slot_label(g, 1),
            roots,
            points,
            max_residual: worst,
        });

        // the other E-line of the group: x_i = q + 1/q, x_j + q x_k = a4 b_j + a_i b_k
        let e2 = line_from_params(g, 3, &b)?;
        let qv = bj * bk;
        let det = qv - p;
        let scale = 1.0 + qv.norm() + p.norm();
        if det.norm() < 1e-12 * scale {
            return Err(Error::NotGeneralPosition);
        }
        let r2 = a4 * bj + ai * bk;
        // x_j + p x_k = rhs, x_j + qv x_k = r2
        let xk = (r2 - rhs) / det;
        let xj = rhs - p * xk;
        let mut src = [c(0.0); 3];
        src[i - 1] = xi;
        src[j - 1] = xj;
        src[k - 1] = xk;
        let image = sigma(g, &src, &theta.0);
        let worst = affine_residual(&e, &src).max(affine_residual(&e2, &image));
        transverse.push(TransverseCheck {
            involution: g as u8,
            source: slot_label(g, 1),
            target: slot_label(g, 3),
            determinant: det,
            point: image,
            max_residual: worst,
        });
    }

    let max_residual = swaps
        .iter()
        .map(|s| s.max_residual)
        .chain(quadratics.iter().map(|q| q.max_residual))
        .chain(transverse.iter().map(|t| t.max_residual))
        .fold(0.0, f64::max);
    Ok(SigmaLineReport {
        swaps,
        quadratics,
        transverse,
        max_residual,
        passed: max_residual < tol,
    })
}

/// `[1 : x1 : x2 : x3]`.
pub fn homogeneous(x: &[C; 3]) -> [C; 4] {
    [c(1.0), x[0], x[1], x[2]]
}
