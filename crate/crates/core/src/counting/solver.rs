//! Multistart solver for the points of period N of c on `S(θ)`.
//!
//! The fixed locus of `c^N` in ambient ℂ³ contains curves, so Newton on the
//! square system `c^N(x) = x` stalls or lands off the surface. Instead the
//! word `c^N = σ_{w_1} ⋯ σ_{w_{3N}}` is split as `L ∘ R` and the solver works
//! on the overdetermined system
//!
//! `R(x) - L⁻¹(x) = 0`, `f(x, θ) = 0`
//!
//! with Gauss–Newton steps. Both halves have roughly half the degree of the
//! full word and every σ is an involution, so `L⁻¹` is `L` read backwards.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::{Matrix4x3, Vector4};

use super::{bigint_string, per_count_closed, proper_divisors, Space};
use crate::params::{discriminant_margin, EigenParams, ThetaPoint};
use crate::surface::{
    coxeter_jacobian, cubic, gradient, lift_to_surface, sigma, AffinePoint, Jet, Mat3,
    DEFAULT_ESCAPE_RADIUS, DEFAULT_SURFACE_TOL,
};
use crate::{Error, Result};

type C = Complex64;

/// Discriminant margin below which θ is refused.
pub const NONGENERIC_TOL: f64 = 1e-10;

/// Relative size of `det(I - Dc^N)` on the tangent plane below which a point
/// is flagged as possibly multiple.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Total number of starts.
    pub seeds: usize,
    pub rng_seed: u64,
    pub newton_max_iter: usize,
    /// Bound on `|c^N(x) - x| / (1 + |x|)` for an accepted root.
    pub newton_tol: f64,
    /// Two roots closer than `dedup_radius (1 + |x|)` are one cluster.
    pub dedup_radius: f64,
    /// Bound on `|f(x, θ)| / (1 + |x|³)`.
    pub surface_tol: f64,
    /// Trailing batches without a new cluster needed to call the search saturated.
    pub saturation_batches: usize,
    /// Number of equal batches the seeds are split into.
    pub batches: usize,
    pub escape_radius: f64,
    /// Half-width of the box the starting `(x2, x3)` are drawn from.
    pub seed_radius: f64,
}

impl SolverConfig {
    /// Defaults scaled to N: more starts for longer words.
    pub fn for_period(n: u32) -> Self {
        let seeds = match n {
            0..=2 => 20_000,
            _ => 200_000,
        };
        Self {
            seeds,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = self.seeds > 0
            && self.newton_max_iter > 0
            && self.newton_tol > 0.0
            && self.dedup_radius > 0.0
            && self.surface_tol > 0.0
            && self.saturation_batches > 0
            && self.batches > 0
            && self.escape_radius > 0.0
            && self.seed_radius > 0.0;
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidArgument("solver settings must all be positive".into()))
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seeds: 20_000,
            rng_seed: 0,
            newton_max_iter: 100,
            newton_tol: 1e-10,
            dedup_radius: 1e-6,
            surface_tol: DEFAULT_SURFACE_TOL,
            saturation_batches: 5,
            batches: 10,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            seed_radius: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    /// Saturated and the count matches the closed form.
    Complete,
    /// No new clusters in the trailing batches, but the count or a
    /// multiplicity check disagrees.
    Saturated,
    Partial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub x: [C; 3],
    /// `|f(x, θ)| / (1 + |x|³)`.
    pub surface_residual: f64,
    /// `|c^N(x) - x| / (1 + |x|)`.
    pub cycle_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Index into [`CountReport::points`].
    pub point: usize,
    /// Number of starts that converged here.
    pub hits: usize,
    pub minimal_period: u32,
    /// `det(I - Dc^N)` restricted to the tangent plane.
    pub tangent_det: C,
    /// 1 when the tangent determinant is clearly nonzero, 2 when it is not
    /// (a lower bound).
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub n: u32,
    #[serde(with = "bigint_string")]
    pub closed_form: BigInt,
    pub found: usize,
    pub points: Vec<PeriodicPoint>,
    pub clusters: Vec<Cluster>,
    /// Cycles of c on the clusters, as cluster indices in orbit order.
    pub orbits: Vec<Vec<usize>>,
    /// Whether c maps every cluster onto a cluster.
    pub orbit_closure: bool,
    pub seeds_run: usize,
    pub converged: usize,
    pub escaped: usize,
    /// New clusters contributed by each batch that was run.
    pub new_per_batch: Vec<usize>,
    pub status: SolveStatus,
}

impl CountReport {
    /// Number of clusters per minimal period, indexed by period.
    pub fn period_histogram(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for c in &self.clusters {
            match out.iter_mut().find(|(p, _)| *p == c.minimal_period) {
                Some(e) => e.1 += 1,
                None => out.push((c.minimal_period, 1)),
            }
        }
        out.sort();
        out
    }
}

enum Outcome {
    Root([C; 3]),
    Escaped,
    Stalled,
}

fn norm3(x: &[C; 3]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dist3(a: &[C; 3], b: &[C; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).norm_sqr()).sum::<f64>().sqrt()
}

/// The σ-word of `c^N`, rotated to `B A` from `c^N = A B` and split in half.
/// A root y of the rotated word gives the root `A(y)` of `c^N`.
struct SplitWord {
    right: Vec<usize>,
    left_inverse: Vec<usize>,
    rotated: Vec<usize>,
    prefix: Vec<usize>,
    full: Vec<usize>,
}

impl SplitWord {
    fn new(n: u32) -> Self {
        Self::rotated(n, 0)
    }

    fn rotated(n: u32, r: usize) -> Self {
        let full: Vec<usize> = (0..n).flat_map(|_| [1, 2, 3]).collect();
        let r = r % full.len();
        let prefix = full[..r].to_vec();
        let rotated: Vec<usize> = full[r..].iter().chain(&full[..r]).copied().collect();
        let h = rotated.len() / 2;
        let mut left_inverse = rotated[..h].to_vec();
        left_inverse.reverse();
        Self {
            right: rotated[h..].to_vec(),
            left_inverse,
            rotated,
            prefix,
            full,
        }
    }
}

fn apply_sigmas(word: &[usize], x: &[C; 3], theta: &[C; 4]) -> [C; 3] {
    word.iter().rev().fold(*x, |y, &i| sigma(i, &y, theta))
}

fn cycle_residual(word: &[usize], x: &[C; 3], theta: &[C; 4]) -> f64 {
    dist3(&apply_sigmas(word, x, theta), x) / (1.0 + norm3(x))
}

fn surface_residual(x: &[C; 3], theta: &[C; 4]) -> f64 {
    let n = norm3(x);
    cubic(x, theta).norm() / (1.0 + n * n * n)
}

fn start_point(idx: usize, theta: &ThetaPoint, cfg: &SolverConfig) -> [C; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(idx as u64);
    let r = cfg.seed_radius;
    let mut draw = || C::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
    if idx % 4 == 3 {
        // ambient start
        [draw(), draw(), draw()]
    } else {
        let (x2, x3) = (draw(), draw());
        lift_to_surface(x2, x3, theta, idx % 2 == 0).x
    }
}

/// Least-squares step `argmin |A d + r|` for the 4×3 system.
fn lstsq(a: &Matrix4x3<C>, r: &Vector4<C>) -> Option<[C; 3]> {
    let svd = a.svd(true, true);
    let d = svd.solve(&(-r), 1e-14).ok()?;
    let out = [d[0], d[1], d[2]];
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn residual_system(w: &SplitWord, x: &[C; 3], theta: &[C; 4]) -> (Vector4<C>, Matrix4x3<C>) {
    let mut a = Jet::seed(*x);
    a.sigmas(&w.right, theta);
    let mut b = Jet::seed(*x);
    b.sigmas(&w.left_inverse, theta);
    let g = gradient(x, theta);
    let r = Vector4::new(a.x[0] - b.x[0], a.x[1] - b.x[1], a.x[2] - b.x[2], cubic(x, theta));
    let m = Matrix4x3::from_fn(|row, col| {
        if row < 3 {
            a.jac[row][col] - b.jac[row][col]
        } else {
            g[col]
        }
    });
    (r, m)
}

fn gauss_newton(w: &SplitWord, x0: [C; 3], theta: &[C; 4], cfg: &SolverConfig) -> Outcome {
    let mut x = x0;
    let mut polish = 0;
    for _ in 0..cfg.newton_max_iter {
        let (r, a) = residual_system(w, &x, theta);
        if !r.iter().all(|v| v.is_finite()) {
            return Outcome::Escaped;
        }
        let Some(mut d) = lstsq(&a, &r) else {
            return Outcome::Stalled;
        };
        let scale = 1.0 + norm3(&x);
        let step = norm3(&d);
        let cap = 0.5 * scale;
        if step > cap {
            let s = cap / step;
            d = d.map(|v| v * s);
        }
        for k in 0..3 {
            x[k] += d[k];
        }
        if !(norm3(&x) <= cfg.escape_radius) {
            return Outcome::Escaped;
        }
        if step < 1e-13 * scale {
            polish += 1;
            if polish >= 2 {
                break;
            }
        }
    }
    if cycle_residual(&w.rotated, &x, theta) >= cfg.newton_tol {
        return Outcome::Stalled;
    }
    let x = apply_sigmas(&w.prefix, &x, theta);
    if cycle_residual(&w.full, &x, theta) < cfg.newton_tol
        && surface_residual(&x, theta) < cfg.surface_tol
    {
        Outcome::Root(x)
    } else {
        Outcome::Stalled
    }
}

/// `det(I - J)` on the tangent plane of a fixed point of `J = Dc^N`.
///
/// `∇f` is a left eigenvector of J with eigenvalue 1, so the characteristic
/// polynomial is `(λ - 1) q(λ)`, and the tangent determinant is
/// `q(1) = p'(1) = 3 - 2 tr J + c₂(J)`.
pub fn tangent_determinant(j: &Mat3) -> C {
    let tr = j[0][0] + j[1][1] + j[2][2];
    let minor = |a: usize, b: usize| j[a][a] * j[b][b] - j[a][b] * j[b][a];
    let c2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    C::new(3.0, 0.0) - tr * 2.0 + c2
}

struct ClusterSet {
    reps: Vec<[C; 3]>,
    hits: Vec<usize>,
    radius: f64,
}

impl ClusterSet {
    fn find(&self, x: &[C; 3], radius: f64) -> Option<usize> {
        self.reps
            .iter()
            .position(|r| dist3(r, x) < radius * (1.0 + norm3(r)))
    }

    /// Returns true when `x` starts a new cluster.
    fn insert(&mut self, x: [C; 3]) -> bool {
        match self.find(&x, self.radius) {
            Some(k) => {
                self.hits[k] += 1;
                false
            }
            None => {
                self.reps.push(x);
                self.hits.push(1);
                true
            }
        }
    }
}

/// Finds the points of period N of c on `S(θ)` from random starts.
///
/// When `b` is given, θ on the discriminant is refused. Results depend only
/// on `cfg`, not on thread scheduling.
pub fn solve_periodic(
    theta: &ThetaPoint,
    n: u32,
    cfg: &SolverConfig,
    b: Option<&EigenParams>,
) -> Result<CountReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    cfg.validate()?;
    match b {
        Some(b) if discriminant_margin(b) < NONGENERIC_TOL => return Err(Error::NonGeneric),
        Some(_) => {}
        None => log::warn!("no eigenvalue parameters given; genericity of θ is not checked"),
    }
    if !theta.0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("θ must be finite".into()));
    }
    let closed_form = per_count_closed(n, Space::Affine)?;
    let word = SplitWord::new(n);
    let words: Vec<SplitWord> = (0..3 * n as usize).map(|r| SplitWord::rotated(n, r)).collect();
    let t = theta.0;

    let batch_size = cfg.seeds.div_ceil(cfg.batches);
    let mut set = ClusterSet {
        reps: Vec::new(),
        hits: Vec::new(),
        radius: cfg.dedup_radius,
    };
    let (mut converged, mut escaped, mut seeds_run) = (0, 0, 0);
    let mut new_per_batch = Vec::new();
    let mut quiet = 0;
    for batch in 0..cfg.batches {
        let lo = batch * batch_size;
        let hi = ((batch + 1) * batch_size).min(cfg.seeds);
        if lo >= hi {
            break;
        }
        let outcomes: Vec<Outcome> = (lo..hi)
            .into_par_iter()
            .map(|idx| {
                let w = &words[(idx / 4) % words.len()];
                gauss_newton(w, start_point(idx, theta, cfg), &t, cfg)
            })
            .collect();
        seeds_run += hi - lo;
        let mut added = 0;
        for o in outcomes {
            match o {
                Outcome::Root(x) => {
                    converged += 1;
                    if set.insert(x) {
                        added += 1;
                    }
                }
                Outcome::Escaped => escaped += 1,
                Outcome::Stalled => {}
            }
        }
        new_per_batch.push(added);
        log::debug!("batch {batch}: {added} new, {} total", set.reps.len());
        quiet = if added == 0 { quiet + 1 } else { 0 };
        if quiet >= cfg.saturation_batches {
            break;
        }
    }
    let saturated = quiet >= cfg.saturation_batches;

    let points: Vec<PeriodicPoint> = set
        .reps
        .iter()
        .map(|x| PeriodicPoint {
            x: *x,
            surface_residual: surface_residual(x, &t),
            cycle_residual: cycle_residual(&word.full, x, &t),
        })
        .collect();

    let divisors = proper_divisors(n);
    let mut clusters = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let scale = 1.0 + norm3(&p.x);
        let minimal_period = divisors
            .iter()
            .copied()
            .find(|&d| {
                let w = SplitWord::new(d);
                dist3(&apply_sigmas(&w.full, &p.x, &t), &p.x) < cfg.dedup_radius * scale
            })
            .unwrap_or(n);
        let (tangent_det, multiplicity) =
            match coxeter_jacobian(&AffinePoint::new(p.x), theta, n as usize) {
                Ok(j) => {
                    let det = tangent_determinant(&j);
                    let tr = j[0][0] + j[1][1] + j[2][2];
                    let flat = det.norm() < MULTIPLICITY_TOL * (1.0 + tr.norm());
                    (det, if flat { 2 } else { 1 })
                }
                Err(_) => (C::new(f64::NAN, f64::NAN), 2),
            };
        clusters.push(Cluster {
            point: k,
            hits: set.hits[k],
            minimal_period,
            tangent_det,
            multiplicity,
        });
    }

    let (orbits, orbit_closure) = group_orbits(&set, &t, cfg.dedup_radius);
    let found = points.len();
    let simple = clusters.iter().all(|c| c.multiplicity == 1);
    let matches = closed_form.to_usize() == Some(found);
    let status = if converged == 0 && escaped == seeds_run {
        SolveStatus::Partial
    } else if saturated && matches && simple && orbit_closure {
        SolveStatus::Complete
    } else if saturated {
        SolveStatus::Saturated
    } else {
        SolveStatus::Partial
    };

    Ok(CountReport {
        n,
        closed_form,
        found,
        points,
        clusters,
        orbits,
        orbit_closure,
        seeds_run,
        converged,
        escaped,
        new_per_batch,
        status,
    })
}

/// Follows c on the clusters. Returns the cycles and whether every image
/// landed on a cluster.
fn group_orbits(set: &ClusterSet, theta: &[C; 4], radius: f64) -> (Vec<Vec<usize>>, bool) {
    let tol = radius * 100.0;
    let image: Vec<Option<usize>> = set
        .reps
        .iter()
        .map(|x| set.find(&apply_sigmas(&[1, 2, 3], x, theta), tol))
        .collect();
    let closure = image.iter().all(Option::is_some);
    let mut seen = vec![false; set.reps.len()];
    let mut orbits = Vec::new();
    for start in 0..set.reps.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut cur = start;
        while let Some(next) = image[cur] {
            if next == start || seen[next] {
                break;
            }
            seen[next] = true;
            orbit.push(next);
            cur = next;
        }
        orbits.push(orbit);
    }
    (orbits, closure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{kappa_to_eigen, random_generic_kappa, rh_params};
    use crate::surface::coxeter_jacobian;

    fn generic(seed: u64) -> (ThetaPoint, EigenParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_generic_kappa(&mut rng, 97, 1e-3);
        (rh_params(&k), kappa_to_eigen(&k))
    }

    #[test]
    fn split_word_recombines() {
        let w = SplitWord::new(3);
        assert_eq!(w.full, vec![1, 2, 3, 1, 2, 3, 1, 2, 3]);
        assert_eq!(w.right.len() + w.left_inverse.len(), 9);
        let r = SplitWord::rotated(2, 2);
        assert_eq!(r.rotated, vec![3, 1, 2, 3, 1, 2]);
        assert_eq!(r.prefix, vec![1, 2]);
        let (theta, _) = generic(1);
        let x = [C::new(0.3, 0.1), C::new(-0.2, 0.4), C::new(0.5, -0.3)];
        let mut left = w.left_inverse.clone();
        left.reverse();
        let lr = apply_sigmas(&left, &apply_sigmas(&w.right, &x, &theta.0), &theta.0);
        assert!(dist3(&lr, &apply_sigmas(&w.full, &x, &theta.0)) < 1e-10);
    }

    #[test]
    fn tangent_determinant_of_a_known_matrix() {
        // eigenvalues 1 (normal), 2, 3: q(1) = (1-2)(1-3) = 2
        let c = |v: f64| C::new(v, 0.0);
        let j = [[c(1.0), c(0.0), c(0.0)], [c(0.0), c(2.0), c(0.0)], [c(0.0), c(0.0), c(3.0)]];
        assert!((tangent_determinant(&j) - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn no_fixed_points() {
        let (theta, b) = generic(5);
        let cfg = SolverConfig {
            seeds: 2000,
            ..SolverConfig::default()
        };
        let rep = solve_periodic(&theta, 1, &cfg, Some(&b)).unwrap();
        assert_eq!(rep.found, 0);
        assert_eq!(rep.status, SolveStatus::Complete);
    }

    #[test]
    fn period_two_points() {
        let (theta, b) = generic(6);
        let cfg = SolverConfig {
            seeds: 4000,
            ..SolverConfig::default()
        };
        let rep = solve_periodic(&theta, 2, &cfg, Some(&b)).unwrap();
        assert_eq!(rep.found, 22, "{:?}", rep.new_per_batch);
        assert_eq!(rep.orbits.len(), 11);
        assert!(rep.orbits.iter().all(|o| o.len() == 2));
        assert!(rep.clusters.iter().all(|c| c.minimal_period == 2));
        for p in &rep.points {
            assert!(p.cycle_residual < cfg.newton_tol);
            assert!(p.surface_residual < cfg.surface_tol);
            let j = coxeter_jacobian(&AffinePoint::new(p.x), &theta, 2).unwrap();
            assert!(tangent_determinant(&j).norm() > 1e-6);
        }
        assert_eq!(rep.status, SolveStatus::Complete);
    }

    #[test]
    fn deterministic_for_a_fixed_seed() {
        let (theta, b) = generic(7);
        let cfg = SolverConfig {
            seeds: 600,
            rng_seed: 42,
            ..SolverConfig::default()
        };
        let a = solve_periodic(&theta, 2, &cfg, Some(&b)).unwrap();
        let c = solve_periodic(&theta, 2, &cfg, Some(&b)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn refuses_singular_parameters() {
        let b = EigenParams::new([1.0, 0.5, 2.0, 3.0].map(|v| C::new(v, 0.0))).unwrap();
        let theta = ThetaPoint([C::new(1.0, 0.0); 4]);
        let err = solve_periodic(&theta, 2, &SolverConfig::default(), Some(&b)).unwrap_err();
        assert_eq!(err, Error::NonGeneric);
    }
}
