//! One function per subcommand. Each returns the rendered output and whether
//! every check it ran passed.

use anyhow::{bail, Context, Result};
use cubic_core::counting::solver::NONGENERIC_TOL;
use cubic_core::counting::{
    per_count_closed, per_kappa_closed, solve_periodic, verify_counts, zeta_coefficients,
    CountReport, SolveStatus, SolverConfig, Space, VerifyReport,
};
use cubic_core::lattice::{
    charpoly, class_of, coxeter_star, eigenvector_checks, expected_coxeter_charpoly, intersection,
    sigma_star, spectral_radius, LatticeEndo,
};
use cubic_core::lines::{
    all_lines, line_on_surface, lines_intersection, verify_sigma_line_action, ProjectiveLine,
};
use cubic_core::params::{
    discriminant, discriminant_margin, kappa_to_eigen, kappa_to_traces, relative_discriminant,
    rh_params, traces_to_theta, wall_membership, EigenParams, KappaPoint, ThetaPoint, WallMode, WallReport,
};
use cubic_core::surface::{lift_to_surface, word_apply, AffinePoint, GroupWord, MapStatus};
use cubic_core::Complex64;
use num_bigint::BigInt;
use serde::Serialize;

use crate::input::fmt_complex;
use crate::Format;

pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().context("flushing csv")?;
    Ok(String::from_utf8(bytes)?.trim_end().to_string())
}

fn joined(v: &[Complex64]) -> String {
    v.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(", ")
}

/// Exact wall test for rational κ, tolerant otherwise.
pub fn wall_report(kappa: &KappaPoint, tol: f64) -> Result<(WallReport, &'static str)> {
    if kappa.exact().is_some() {
        Ok((wall_membership(kappa, WallMode::Exact)?, "exact"))
    } else {
        Ok((wall_membership(kappa, WallMode::Tolerant { tol })?, "tolerant"))
    }
}

#[derive(Serialize)]
struct ParamsOut {
    kappa: [Complex64; 5],
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_exact: Option<Vec<String>>,
    a: [Complex64; 4],
    b: [Complex64; 4],
    theta: [Complex64; 4],
    wall_mode: &'static str,
    wall: WallReport,
}

pub fn params(kappa: &KappaPoint, wall_tol: f64, fmt: Format) -> Result<Outcome> {
    let a = kappa_to_traces(kappa);
    let b = kappa_to_eigen(kappa);
    let theta = traces_to_theta(&a);
    let (wall, wall_mode) = wall_report(kappa, wall_tol)?;
    let out = ParamsOut {
        kappa: *kappa.values(),
        kappa_exact: kappa.exact().map(|q| q.iter().map(|x| x.to_string()).collect()),
        a: a.0,
        b: *b.values(),
        theta: theta.0,
        wall_mode,
        wall,
    };
    let text = match fmt {
        Format::Json => json(&out)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for (name, vals) in [
                ("kappa", &out.kappa[..]),
                ("a", &out.a[..]),
                ("b", &out.b[..]),
                ("theta", &out.theta[..]),
            ] {
                let first = if name == "kappa" { 0 } else { 1 };
                for (k, z) in vals.iter().enumerate() {
                    rows.push(vec![name.to_string(), (k + first).to_string(), fmt_complex(*z)]);
                }
            }
            rows.push(vec!["on_wall".into(), String::new(), out.wall.on_wall.to_string()]);
            csv_table(&["quantity", "index", "value"], rows)?
        }
        Format::Pretty => {
            let mut s = format!("kappa  {}\n", joined(&out.kappa));
            if let Some(q) = &out.kappa_exact {
                s += &format!("exact  {}\n", q.join(", "));
            }
            s += &format!("a      {}\nb      {}\ntheta  {}\n", joined(&out.a), joined(&out.b), joined(&out.theta));
            s += &format!("wall   {} ({} test)", if out.wall.on_wall { "on a wall" } else { "off all walls" }, wall_mode);
            for w in &out.wall.witnesses {
                s += &format!("\n  {:?} index={:?} signs={:?} m={}", w.kind, w.index, w.signs, w.m);
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct DiscOut {
    b: [Complex64; 4],
    discriminant: Complex64,
    relative_discriminant: f64,
    margin: f64,
    generic: bool,
}

pub fn disc(b: &EigenParams, fmt: Format) -> Result<Outcome> {
    let margin = discriminant_margin(b);
    let out = DiscOut {
        b: *b.values(),
        discriminant: discriminant(b),
        relative_discriminant: relative_discriminant(b),
        margin,
        generic: margin >= NONGENERIC_TOL,
    };
    let text = match fmt {
        Format::Json => json(&out)?,
        Format::Csv => csv_table(
            &["discriminant", "relative", "margin", "generic"],
            [vec![
                fmt_complex(out.discriminant),
                out.relative_discriminant.to_string(),
                out.margin.to_string(),
                out.generic.to_string(),
            ]],
        )?,
        Format::Pretty => format!(
            "discriminant {}\nrelative     {:e}\nmargin       {:e}\ngeneric      {}",
            fmt_complex(out.discriminant),
            out.relative_discriminant,
            out.margin,
            out.generic
        ),
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct CharpolyOut {
    coefficients: Vec<String>,
    polynomial: String,
    matches_expected: bool,
}

#[derive(Serialize)]
struct EigenOut {
    name: String,
    value: i64,
    expected: i64,
    passed: bool,
}

#[derive(Serialize)]
struct LatticeOut {
    matrices: Vec<(String, Vec<Vec<String>>)>,
    charpoly: CharpolyOut,
    spectral_radius: f64,
    spectral_radius_expected: f64,
    eigen_checks: Vec<EigenOut>,
    passed: bool,
}

/// Spectral radius agreement with 2 + √5.
const RADIUS_TOL: f64 = 1e-12;

fn matrix_rows(m: &LatticeEndo) -> Vec<Vec<String>> {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.to_string()).collect())
        .collect()
}

/// Integer rows as a JSON array; entries are small enough to print bare.
fn matrix_json(rows: &[Vec<String>]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| format!("[{}]", r.join(", "))).collect();
    format!("[{}]", inner.join(", "))
}

pub fn lattice(charpoly_only: bool, matrix: Option<&str>, fmt: Format) -> Result<Outcome> {
    let c = coxeter_star()?;
    let p = charpoly(&c);
    let cp = CharpolyOut {
        coefficients: p.coeffs().iter().map(|x| x.to_string()).collect(),
        polynomial: p.to_string(),
        matches_expected: p == expected_coxeter_charpoly(),
    };
    if charpoly_only {
        let text = match fmt {
            Format::Json => format!(
                "{{\n  \"coefficients\": [{}],\n  \"polynomial\": {},\n  \"matches_expected\": {}\n}}",
                cp.coefficients.join(", "),
                serde_json::to_string(&cp.polynomial)?,
                cp.matches_expected
            ),
            Format::Csv => csv_table(
                &["degree", "coefficient"],
                cp.coefficients.iter().enumerate().map(|(k, v)| vec![k.to_string(), v.clone()]),
            )?,
            Format::Pretty => cp.polynomial.clone(),
        };
        return Ok(Outcome { text, passed: cp.matches_expected });
    }

    let mut matrices = Vec::new();
    for g in 1..=3 {
        matrices.push((format!("sigma{g}"), matrix_rows(&sigma_star(g)?)));
    }
    matrices.push(("coxeter".to_string(), matrix_rows(&c)));
    if let Some(name) = matrix {
        matrices.retain(|(n, _)| n == name);
        if matrices.is_empty() {
            bail!(crate::Usage(format!(
                "unknown matrix '{name}'; expected sigma1, sigma2, sigma3 or coxeter"
            )));
        }
    }
    let expected_radius = 2.0 + 5f64.sqrt();
    let radius = spectral_radius(&c);
    let eigen_checks: Vec<EigenOut> = eigenvector_checks()?
        .checks
        .into_iter()
        .map(|e| EigenOut {
            passed: e.value == e.expected,
            name: e.name,
            value: e.value,
            expected: e.expected,
        })
        .collect();
    let passed = cp.matches_expected
        && (radius - expected_radius).abs() < RADIUS_TOL
        && eigen_checks.iter().all(|e| e.passed);
    let out = LatticeOut {
        matrices,
        charpoly: cp,
        spectral_radius: radius,
        spectral_radius_expected: expected_radius,
        eigen_checks,
        passed,
    };
    let text = match fmt {
        Format::Json => {
            let mats: Vec<String> = out
                .matrices
                .iter()
                .map(|(n, rows)| format!("    \"{n}\": {}", matrix_json(rows)))
                .collect();
            format!(
                "{{\n  \"matrices\": {{\n{}\n  }},\n  \"charpoly\": {{\"coefficients\": [{}], \"polynomial\": {}, \"matches_expected\": {}}},\n  \"spectral_radius\": {},\n  \"spectral_radius_expected\": {},\n  \"eigen_checks\": {},\n  \"passed\": {}\n}}",
                mats.join(",\n"),
                out.charpoly.coefficients.join(", "),
                serde_json::to_string(&out.charpoly.polynomial)?,
                out.charpoly.matches_expected,
                serde_json::to_string(&out.spectral_radius)?,
                serde_json::to_string(&out.spectral_radius_expected)?,
                serde_json::to_string(&out.eigen_checks)?,
                out.passed
            )
        }
        Format::Csv => {
            let mut header = vec!["matrix", "row"];
            let cols: Vec<String> = (0..7).map(|k| format!("c{k}")).collect();
            header.extend(cols.iter().map(|s| s.as_str()));
            let rows = out.matrices.iter().flat_map(|(n, rows)| {
                rows.iter().enumerate().map(move |(r, row)| {
                    let mut v = vec![n.clone(), r.to_string()];
                    v.extend(row.iter().cloned());
                    v
                })
            });
            csv_table(&header, rows)?
        }
        Format::Pretty => {
            let mut s = String::new();
            for (n, rows) in &out.matrices {
                s += &format!("{n}*\n");
                for r in rows {
                    s += &format!("  {}\n", r.iter().map(|x| format!("{x:>3}")).collect::<String>());
                }
            }
            s += &format!("charpoly         {}\n", out.charpoly.polynomial);
            s += &format!("spectral radius  {:.15}\n", out.spectral_radius);
            for e in &out.eigen_checks {
                s += &format!("{:<16} {:>3} (expected {:>3}) {}\n", e.name, e.value, e.expected, pass(e.passed));
            }
            s += &format!("overall          {}", pass(out.passed));
            s
        }
    };
    Ok(Outcome { text, passed })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct LineOut {
    label: Option<String>,
    group: Option<u8>,
    slot: Option<u8>,
    forms: [[Complex64; 4]; 2],
    residual: f64,
    on_surface: bool,
}

#[derive(Serialize)]
struct LineChecks {
    all_on_surface: bool,
    max_residual: f64,
    incidence_pairs: usize,
    incidence_mismatches: usize,
    sigma_action_passed: bool,
    sigma_action_max_residual: f64,
}

#[derive(Serialize)]
struct LinesOut {
    theta: [Complex64; 4],
    lines: Vec<LineOut>,
    checks: LineChecks,
    passed: bool,
}

/// Pairs of lines whose computed incidence disagrees with the lattice.
fn incidence_mismatches(lines: &[ProjectiveLine]) -> (usize, usize) {
    let mut pairs = 0;
    let mut bad = 0;
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            let (Some(la), Some(lb)) = (a.label, b.label) else { continue };
            pairs += 1;
            let meets = lines_intersection(a, b).meets();
            let predicted = intersection(&class_of(la), &class_of(lb)) == BigInt::from(1);
            if meets != predicted {
                bad += 1;
            }
        }
    }
    (pairs, bad)
}

pub fn lines(kappa: &KappaPoint, tol: f64, fmt: Format) -> Result<Outcome> {
    let b = kappa_to_eigen(kappa);
    let theta = rh_params(kappa);
    let lines = all_lines(&b)?;
    let sigma = verify_sigma_line_action(&b, tol)?;
    let (pairs, bad) = incidence_mismatches(&lines);
    let rows: Vec<LineOut> = lines
        .iter()
        .map(|l| {
            let chk = line_on_surface(l, &theta, tol);
            LineOut {
                label: l.label.map(|x| x.to_string()),
                group: l.slot.map(|s| s.group),
                slot: l.slot.map(|s| s.slot),
                forms: *l.forms(),
                residual: chk.max_residual,
                on_surface: chk.on_surface,
            }
        })
        .collect();
    let checks = LineChecks {
        all_on_surface: rows.iter().all(|r| r.on_surface),
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        incidence_pairs: pairs,
        incidence_mismatches: bad,
        sigma_action_passed: sigma.passed,
        sigma_action_max_residual: sigma.max_residual,
    };
    let passed = checks.all_on_surface && bad == 0 && sigma.passed;
    let out = LinesOut {
        theta: theta.0,
        lines: rows,
        checks,
        passed,
    };
    let opt = |v: Option<u8>| v.map(|x| x.to_string()).unwrap_or_default();
    let text = match fmt {
        Format::Json => json(&out)?,
        Format::Csv => {
            let header = [
                "label", "group", "slot", "residual", "on_surface", "f1_0", "f1_1", "f1_2", "f1_3",
                "f2_0", "f2_1", "f2_2", "f2_3",
            ];
            csv_table(
                &header,
                out.lines.iter().map(|l| {
                    let mut v = vec![
                        l.label.clone().unwrap_or_default(),
                        opt(l.group),
                        opt(l.slot),
                        l.residual.to_string(),
                        l.on_surface.to_string(),
                    ];
                    v.extend(l.forms.iter().flatten().map(|z| fmt_complex(*z)));
                    v
                }),
            )?
        }
        Format::Pretty => {
            let mut s = String::new();
            for l in &out.lines {
                s += &format!(
                    "{:<4} residual {:.2e}  [{}] ∧ [{}]\n",
                    l.label.as_deref().unwrap_or("?"),
                    l.residual,
                    joined(&l.forms[0]),
                    joined(&l.forms[1])
                );
            }
            let c = &out.checks;
            s += &format!(
                "on surface {}  incidences {}/{}  sigma action {}  overall {}",
                pass(c.all_on_surface),
                pairs - bad,
                pairs,
                pass(c.sigma_action_passed),
                pass(out.passed)
            );
            s
        }
    };
    Ok(Outcome { text, passed })
}

pub enum Start {
    Point([Complex64; 3]),
    Lift { x2: Complex64, x3: Complex64, branch: bool },
}

#[derive(Serialize)]
struct OrbitStep {
    step: usize,
    x: [Complex64; 3],
    theta: [Complex64; 4],
    residual: f64,
    status: MapStatus,
}

pub fn orbit(
    theta: &ThetaPoint,
    start: Start,
    word: &GroupWord,
    steps: usize,
    escape_radius: f64,
    fmt: Format,
) -> Result<Outcome> {
    let mut x = match start {
        Start::Point(p) => AffinePoint::new(p),
        Start::Lift { x2, x3, branch } => lift_to_surface(x2, x3, theta, branch),
    };
    let mut t = *theta;
    let mut trace = vec![OrbitStep {
        step: 0,
        x: x.x,
        theta: t.0,
        residual: x.residual(&t),
        status: MapStatus::Ok,
    }];
    for step in 1..=steps {
        let r = word_apply(word, &x, &t, escape_radius);
        (x, t) = (r.point, r.theta);
        trace.push(OrbitStep {
            step,
            x: x.x,
            theta: t.0,
            residual: x.residual(&t),
            status: r.status,
        });
        if r.status == MapStatus::Escaped {
            break;
        }
    }
    let text = match fmt {
        Format::Json => json(&trace)?,
        Format::Csv => csv_table(
            &["step", "x1", "x2", "x3", "residual", "status"],
            trace.iter().map(|s| {
                vec![
                    s.step.to_string(),
                    fmt_complex(s.x[0]),
                    fmt_complex(s.x[1]),
                    fmt_complex(s.x[2]),
                    s.residual.to_string(),
                    format!("{:?}", s.status).to_lowercase(),
                ]
            }),
        )?,
        Format::Pretty => trace
            .iter()
            .map(|s| {
                format!(
                    "{:>4}  {}  residual {:.2e}{}",
                    s.step,
                    joined(&s.x),
                    s.residual,
                    if s.status == MapStatus::Escaped { "  escaped" } else { "" }
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
    };
    Ok(Outcome::ok(text))
}

fn scalar(name: &str, n: u32, v: &BigInt, fmt: Format) -> Result<Outcome> {
    let text = match fmt {
        Format::Json | Format::Pretty => v.to_string(),
        Format::Csv => csv_table(&["n", name], [vec![n.to_string(), v.to_string()]])?,
    };
    Ok(Outcome::ok(text))
}

pub fn count(n: u32, space: Space, fmt: Format) -> Result<Outcome> {
    scalar("count", n, &per_count_closed(n, space)?, fmt)
}

pub fn count_kappa(n: u32, fmt: Format) -> Result<Outcome> {
    scalar("count", n, &per_kappa_closed(n)?, fmt)
}

pub fn zeta(order: usize, fmt: Format) -> Result<Outcome> {
    let c = zeta_coefficients(order);
    let text = match fmt {
        Format::Json => format!(
            "[{}]",
            c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        ),
        Format::Csv => csv_table(
            &["k", "coefficient"],
            c.iter().enumerate().map(|(k, x)| vec![k.to_string(), x.to_string()]),
        )?,
        Format::Pretty => c
            .iter()
            .enumerate()
            .map(|(k, x)| match k {
                0 => x.to_string(),
                1 => format!("{x} z"),
                _ => format!("{x} z^{k}"),
            })
            .collect::<Vec<_>>()
            .join(" + "),
    };
    Ok(Outcome::ok(text))
}

pub fn solve(
    theta: &ThetaPoint,
    n: u32,
    cfg: &SolverConfig,
    b: Option<&EigenParams>,
    fmt: Format,
) -> Result<Outcome> {
    let report = solve_periodic(theta, n, cfg, b)?;
    let passed = report.status == SolveStatus::Complete;
    let text = match fmt {
        Format::Json => json(&report)?,
        Format::Csv => solve_csv(&report)?,
        Format::Pretty => {
            let hist: Vec<String> = report
                .period_histogram()
                .iter()
                .map(|(p, k)| format!("period {p}: {k}"))
                .collect();
            format!(
                "N = {}: found {} points of period dividing N (closed form {}), {} orbits\n{}\nseeds {} converged {} escaped {}\nstatus {}",
                report.n,
                report.found,
                report.closed_form,
                report.orbits.len(),
                hist.join(", "),
                report.seeds_run,
                report.converged,
                report.escaped,
                format!("{:?}", report.status).to_lowercase()
            )
        }
    };
    Ok(Outcome { text, passed })
}

fn solve_csv(r: &CountReport) -> Result<String> {
    csv_table(
        &["cluster", "x1", "x2", "x3", "hits", "minimal_period", "multiplicity", "tangent_det"],
        r.clusters.iter().enumerate().map(|(k, c)| {
            let x = r.points[c.point].x;
            vec![
                k.to_string(),
                fmt_complex(x[0]),
                fmt_complex(x[1]),
                fmt_complex(x[2]),
                c.hits.to_string(),
                c.minimal_period.to_string(),
                c.multiplicity.to_string(),
                fmt_complex(c.tangent_det),
            ]
        }),
    )
}

pub fn verify(n_max: u32, fmt: Format) -> Result<Outcome> {
    let report: VerifyReport = verify_counts(n_max)?;
    let text = match fmt {
        Format::Json => json(&report)?,
        Format::Csv => csv_table(
            &["n", "lefschetz", "per_affine", "per_projective", "per_kappa"],
            report.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.lefschetz.to_string(),
                    r.per_affine.to_string(),
                    r.per_projective.to_string(),
                    r.per_kappa.to_string(),
                ]
            }),
        )?,
        Format::Pretty => {
            let mut s = String::new();
            for id in &report.identities {
                s += &format!("PASS  {id}\n");
            }
            s += &format!("{:>3} {:>24} {:>24} {:>24}\n", "N", "lefschetz", "per_affine", "per_kappa");
            for r in &report.rows {
                s += &format!("{:>3} {:>24} {:>24} {:>24}\n", r.n, r.lefschetz, r.per_affine, r.per_kappa);
            }
            s.trim_end().to_string()
        }
    };
    Ok(Outcome::ok(text))
}

