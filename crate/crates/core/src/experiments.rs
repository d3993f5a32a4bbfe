//! Reproducible experiment runners.
//!
//! Every runner returns a typed summary and, when given an output directory,
//! writes its fields as CSV plus `summary.json`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::continuum::{normalized_infinity_laplacian, SecondOrderJet};
use crate::distance::{distance_to, distance_transform, high_ridge, lambda1, lambda2_two_ball};
use crate::error::{Error, Result};
use crate::field::{linf_diff, ScalarField};
use crate::geometry::{DomainSpec, Point, Shape};
use crate::grid::{build_grid, lattice_coord, set_pinned, stencil_errors, Grid};
use crate::io::{write_field_csv, write_json};
use crate::laplacian::rectangle_mode_order;
use crate::schemes::{
    f1_plus, f1_plus_argmax, f2_oberman, oberman_pair, residual_with, Execution, SchemeSpec,
};
use crate::solver::{eigen_defect, pin_ground_state_ridge, solve, solve_observed, Init, SolveReport, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    StencilStudy,
    SquareVsHarmonic,
    RectangleNonuniqueness,
    Gallery,
    DumbbellRidge,
    SecondEigenfunctions,
    HigherSquare,
    TriangleNormalized,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::StencilStudy,
        Experiment::SquareVsHarmonic,
        Experiment::RectangleNonuniqueness,
        Experiment::Gallery,
        Experiment::DumbbellRidge,
        Experiment::SecondEigenfunctions,
        Experiment::HigherSquare,
        Experiment::TriangleNormalized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::StencilStudy => "stencil_study",
            Experiment::SquareVsHarmonic => "square_vs_harmonic",
            Experiment::RectangleNonuniqueness => "rectangle_nonuniqueness",
            Experiment::Gallery => "gallery",
            Experiment::DumbbellRidge => "dumbbell_ridge",
            Experiment::SecondEigenfunctions => "second_eigenfunctions",
            Experiment::HigherSquare => "higher_square",
            Experiment::TriangleNormalized => "triangle_normalized",
        }
    }

    fn default_size(self) -> (usize, usize) {
        match self {
            Experiment::SecondEigenfunctions => (49, 3),
            _ => (97, 5),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOptions {
    pub n: Option<usize>,
    pub stencil: Option<usize>,
    pub seed: Option<u64>,
    pub execution: Execution,
}

impl ExperimentOptions {
    fn size(&self, exp: Experiment) -> (usize, usize) {
        let (n, s) = exp.default_size();
        (self.n.unwrap_or(n), self.stencil.unwrap_or(s))
    }

    fn solver(&self, init: Init) -> SolverConfig {
        SolverConfig {
            init,
            execution: self.execution,
            ..SolverConfig::default()
        }
    }
}

/// Runs `exp` and returns its summary as JSON.
pub fn run(exp: Experiment, opts: &ExperimentOptions, out: Option<&Path>) -> Result<serde_json::Value> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let value = match exp {
        Experiment::StencilStudy => to_value(stencil_study(opts, out)?),
        Experiment::SquareVsHarmonic => to_value(square_vs_harmonic(opts, out)?),
        Experiment::RectangleNonuniqueness => to_value(rectangle_nonuniqueness(opts, out)?),
        Experiment::Gallery => to_value(gallery(opts, out)?),
        Experiment::DumbbellRidge => to_value(dumbbell_ridge(opts, out)?),
        Experiment::SecondEigenfunctions => to_value(second_eigenfunctions(opts, out)?),
        Experiment::HigherSquare => to_value(higher_square(opts, out)?),
        Experiment::TriangleNormalized => to_value(triangle_normalized(opts, out)?),
    }?;
    if let Some(dir) = out {
        write_json(dir.join("summary.json"), &value)?;
    }
    Ok(value)
}

fn to_value<T: Serialize>(summary: T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(summary)?)
}

fn save(out: Option<&Path>, name: &str, grid: &Grid, u: &ScalarField) -> Result<Option<String>> {
    match out {
        Some(dir) => {
            let file = format!("{name}.csv");
            write_field_csv(dir.join(&file), grid, u)?;
            Ok(Some(file))
        }
        None => Ok(None),
    }
}

/// One solver run inside an experiment.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub lambda: f64,
    pub report: SolveReport,
    pub max: f64,
    pub min: f64,
    pub field: Option<String>,
}

impl RunSummary {
    fn new(
        label: impl Into<String>,
        lambda: f64,
        report: SolveReport,
        u: &ScalarField,
        field: Option<String>,
    ) -> Self {
        RunSummary {
            label: label.into(),
            lambda,
            report,
            max: u.max(),
            min: u.min(),
            field,
        }
    }
}

/// Nodes with `u_i >= max u - eps`.
pub fn argmax_set(u: &ScalarField, eps: f64) -> Vec<usize> {
    let top = u.max() - eps;
    (0..u.len()).filter(|&i| u[i] >= top).collect()
}

/// Number of 4-connected components of `{u > eps}` and `{u < -eps}` among interior nodes.
pub fn nodal_domains(grid: &Grid, u: &ScalarField, eps: f64) -> (usize, usize) {
    let count = |sign: f64| {
        let inside = |i: usize| !grid.is_pinned(i) && sign * u[i] > eps;
        let mut seen = vec![false; grid.len()];
        let mut components = 0;
        for &start in grid.interior() {
            if seen[start] || !inside(start) {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let [ix, iy] = grid.lattice_position(i);
                let around = [
                    (ix.wrapping_sub(1), iy),
                    (ix + 1, iy),
                    (ix, iy.wrapping_sub(1)),
                    (ix, iy + 1),
                ];
                for (x, y) in around {
                    if let Some(j) = grid.node_at(x, y) {
                        if !seen[j] && inside(j) {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        components
    };
    (count(1.0), count(-1.0))
}

/// Largest distance from a sign change of `u` to the line through `center`
/// with unit normal `normal`. Sign changes are interior zeros and midpoints of
/// lattice edges joining interior nodes of opposite sign.
pub fn nodal_line_offset(grid: &Grid, u: &ScalarField, center: Point, normal: Point) -> Option<f64> {
    let offset = |p: Point| ((p[0] - center[0]) * normal[0] + (p[1] - center[1]) * normal[1]).abs();
    let mut worst: Option<f64> = None;
    let mut record = |off: f64| worst = Some(worst.map_or(off, |w: f64| w.max(off)));
    for &i in grid.interior() {
        if u[i] == 0.0 {
            record(offset(grid.node(i)));
            continue;
        }
        let [ix, iy] = grid.lattice_position(i);
        for (x, y) in [(ix + 1, iy), (ix, iy + 1)] {
            let Some(j) = grid.node_at(x, y) else { continue };
            if grid.is_pinned(j) || u[i] * u[j] >= 0.0 {
                continue;
            }
            let (a, b) = (grid.node(i), grid.node(j));
            record(offset([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]));
        }
    }
    worst
}

/// Smooth and singular test functions with analytic jets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `sin(1.3x + 0.4) cos(0.7y - 0.2) + 0.5x`
    Trigonometric,
    /// `exp(0.5x) cos(0.8y)`
    Exponential,
    /// `|x|^(4/3) - |y|^(4/3)`, infinity harmonic off the axes.
    Aronsson,
}

impl TestFunction {
    pub fn jet(self, [x, y]: Point) -> SecondOrderJet {
        match self {
            TestFunction::Trigonometric => {
                let (a, b) = (1.3 * x + 0.4, 0.7 * y - 0.2);
                let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
                let mxy = -0.91 * ca * sb;
                SecondOrderJet::new(
                    sa * cb + 0.5 * x,
                    [1.3 * ca * cb + 0.5, -0.7 * sa * sb],
                    [[-1.69 * sa * cb, mxy], [mxy, -0.49 * sa * cb]],
                )
            }
            TestFunction::Exponential => {
                let e = (0.5 * x).exp();
                let (s, c) = ((0.8 * y).sin(), (0.8 * y).cos());
                let mxy = -0.4 * e * s;
                SecondOrderJet::new(
                    e * c,
                    [0.5 * e * c, -0.8 * e * s],
                    [[0.25 * e * c, mxy], [mxy, -0.64 * e * c]],
                )
            }
            TestFunction::Aronsson => {
                let third = 1.0 / 3.0;
                SecondOrderJet::new(
                    x.abs().powf(4.0 * third) - y.abs().powf(4.0 * third),
                    [
                        4.0 * third * x.signum() * x.abs().powf(third),
                        -4.0 * third * y.signum() * y.abs().powf(third),
                    ],
                    [
                        [4.0 / 9.0 * x.abs().powf(-2.0 * third), 0.0],
                        [0.0, -4.0 / 9.0 * y.abs().powf(-2.0 * third)],
                    ],
                )
            }
        }
    }

    pub fn value(self, p: Point) -> f64 {
        self.jet(p).u
    }
}

/// Largest scaled scheme errors over a fixed set of probe points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConsistencyErrors {
    /// `|f1_plus / d_imax - (|p| - Λ u)|`
    pub f1_plus: f64,
    /// `|f2 / (d_r d_s) + (p^T M p) / (2 |p|^2)|`
    pub f2: f64,
    pub points: usize,
}

/// Probe points: the nodes of the `n = 25` lattice in `[-1/2, 1/2]^2`, shared
/// by every lattice with `n - 1` a multiple of 24. The Aronsson function
/// additionally keeps a distance `1/4` from the axes.
pub fn probe_points(test: TestFunction) -> Vec<Point> {
    let mut pts = Vec::new();
    for iy in 0..25 {
        for ix in 0..25 {
            let p = [lattice_coord(ix, 25), lattice_coord(iy, 25)];
            let core = p[0].abs() <= 0.5 && p[1].abs() <= 0.5;
            let off_axes = p[0].abs() >= 0.25 && p[1].abs() >= 0.25;
            if core && (test != TestFunction::Aronsson || off_axes) {
                pts.push(p);
            }
        }
    }
    pts
}

pub fn consistency_errors(grid: &Grid, test: TestFunction, lambda: f64) -> Result<ConsistencyErrors> {
    let u = ScalarField::new(grid.nodes().iter().map(|&p| test.value(p)).collect())?;
    let dist = |i: usize, j: usize| {
        let (a, b) = (grid.node(i), grid.node(j));
        (a[0] - b[0]).hypot(a[1] - b[1])
    };
    let mut errors = ConsistencyErrors {
        f1_plus: 0.0,
        f2: 0.0,
        points: 0,
    };
    for p in probe_points(test) {
        let i = grid.nearest_node(p);
        let q = grid.node(i);
        if (q[0] - p[0]).abs() > 1e-12 || (q[1] - p[1]).abs() > 1e-12 || grid.is_pinned(i) {
            return Err(Error::InvalidGrid(format!(
                "probe point {p:?} is not an interior lattice node"
            )));
        }
        let jet = test.jet(p);
        let imax = f1_plus_argmax(grid, &u, i);
        let f1 = f1_plus(grid, &u, lambda, i) / dist(i, imax);
        errors.f1_plus = errors
            .f1_plus
            .max((f1 - (jet.grad_norm() - lambda * jet.u)).abs());
        let [r, s] = oberman_pair(grid, &u, i)?;
        let f2 = f2_oberman(grid, &u, i)? / (dist(i, r) * dist(i, s));
        errors.f2 = errors
            .f2
            .max((f2 + 0.5 * normalized_infinity_laplacian(&jet)).abs());
        errors.points += 1;
    }
    Ok(errors)
}

#[derive(Clone, Debug, Serialize)]
pub struct StencilCase {
    pub stencil: usize,
    pub neighbors: usize,
    pub dx: f64,
    pub dtheta: f64,
    pub consistency: ConsistencyErrors,
    pub run: RunSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct StencilStudy {
    pub n: usize,
    pub test_function: TestFunction,
    pub cases: Vec<StencilCase>,
}

/// Square ground states for the stencil radii 1, 2, 3 and 5.
pub fn stencil_study(opts: &ExperimentOptions, out: Option<&Path>) -> Result<StencilStudy> {
    let (n, _) = opts.size(Experiment::StencilStudy);
    let test = TestFunction::Trigonometric;
    let mut cases = Vec::new();
    for s in [1, 2, 3, 5] {
        let base = build_grid(&DomainSpec::square(), n, s)?;
        let centre = base.nearest_node([0.0, 0.0]);
        let (nb, _) = base.neighbors(centre);
        let offsets: Vec<Point> = nb
            .iter()
            .map(|&j| {
                let (a, b) = (base.node(centre), base.node(j));
                [b[0] - a[0], b[1] - a[1]]
            })
            .collect();
        let err = stencil_errors(&offsets);
        let (grid, lambda) = pin_ground_state_ridge(&base)?;
        let consistency = consistency_errors(&base, test, lambda)?;
        let spec = SchemeSpec::ground_state(lambda)?;
        let (u, report) = solve(&grid, &spec, &opts.solver(Init::Distance))?;
        let field = save(out, &format!("ground_state_s{s}"), &grid, &u)?;
        cases.push(StencilCase {
            stencil: s,
            neighbors: nb.len(),
            dx: err.dx,
            dtheta: err.dtheta,
            consistency,
            run: RunSummary::new(format!("s={s}"), lambda, report, &u, field),
        });
    }
    Ok(StencilStudy {
        n,
        test_function: test,
        cases,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareVsHarmonic {
    pub n: usize,
    pub stencil: usize,
    pub ground_state: RunSummary,
    pub harmonic: RunSummary,
    pub linf_diff: f64,
}

/// Fields on the square with the centre pinned to one: the ground state and
/// the infinity harmonic function of the punctured square.
pub fn square_vs_harmonic_fields(
    opts: &ExperimentOptions,
) -> Result<(Grid, ScalarField, ScalarField, SquareVsHarmonic)> {
    let (n, s) = opts.size(Experiment::SquareVsHarmonic);
    let base = build_grid(&DomainSpec::square(), n, s)?;
    let (grid, lambda) = pin_ground_state_ridge(&base)?;
    let (u, gs_report) = solve(&grid, &SchemeSpec::ground_state(lambda)?, &opts.solver(Init::Distance))?;
    let punctured = set_pinned(&base, &[(base.nearest_node([0.0, 0.0]), 1.0)])?;
    let (v, h_report) = solve(&punctured, &SchemeSpec::infinity_harmonic(), &opts.solver(Init::Distance))?;
    let summary = SquareVsHarmonic {
        n,
        stencil: s,
        linf_diff: linf_diff(&u, &v)?,
        ground_state: RunSummary::new("ground_state", lambda, gs_report, &u, None),
        harmonic: RunSummary::new("harmonic", 0.0, h_report, &v, None),
    };
    Ok((grid, u, v, summary))
}

pub fn square_vs_harmonic(opts: &ExperimentOptions, out: Option<&Path>) -> Result<SquareVsHarmonic> {
    let (grid, u, v, mut summary) = square_vs_harmonic_fields(opts)?;
    summary.ground_state.field = save(out, "ground_state", &grid, &u)?;
    summary.harmonic.field = save(out, "harmonic", &grid, &v)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct RectangleNonuniqueness {
    pub n: usize,
    pub stencil: usize,
    pub distance_init: RunSummary,
    pub zero_init: RunSummary,
    pub linf_diff: f64,
    pub ridge: Vec<Point>,
    pub distance_argmax: Vec<Point>,
    pub zero_argmax: Vec<Point>,
    pub distance_argmax_covers_ridge: bool,
    pub zero_argmax_radius: f64,
}

/// Ground states of the 2 x 1 rectangle with the origin pinned to `1/2`,
/// started from the distance function and from zero.
pub fn rectangle_nonuniqueness(opts: &ExperimentOptions, out: Option<&Path>) -> Result<RectangleNonuniqueness> {
    let (n, s) = opts.size(Experiment::RectangleNonuniqueness);
    let domain = DomainSpec::new(
        Shape::Rectangle {
            half_width: 1.0,
            half_height: 0.5,
        },
        vec![],
    )?;
    let base = build_grid(&domain, n, s)?;
    let d = distance_transform(&base)?;
    let est = lambda1(&d)?;
    let ridge = high_ridge(&d, 0.5 * base.spacing());
    let grid = set_pinned(&base, &[(base.nearest_node([0.0, 0.0]), 0.5)])?;
    let spec = SchemeSpec::ground_state(est.lambda)?;

    let config = opts.solver(Init::Distance);
    let eps = 10.0 * config.tolerance(&grid);
    let (u, ru) = solve(&grid, &spec, &config)?;
    let (v, rv) = solve(&grid, &spec, &opts.solver(Init::Zero))?;
    let au = argmax_set(&u, eps);
    let av = argmax_set(&v, eps);
    let points = |ids: &[usize]| ids.iter().map(|&i| grid.node(i)).collect::<Vec<_>>();
    Ok(RectangleNonuniqueness {
        n,
        stencil: s,
        linf_diff: linf_diff(&u, &v)?,
        distance_argmax_covers_ridge: ridge.iter().all(|i| au.contains(i)),
        zero_argmax_radius: av
            .iter()
            .map(|&i| grid.node(i)[0].hypot(grid.node(i)[1]))
            .fold(0.0, f64::max),
        ridge: points(&ridge),
        distance_argmax: points(&au),
        zero_argmax: points(&av),
        distance_init: RunSummary::new("distance_init", est.lambda, ru, &u, save(out, "distance_init", &grid, &u)?),
        zero_init: RunSummary::new("zero_init", est.lambda, rv, &v, save(out, "zero_init", &grid, &v)?),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainRun {
    pub domain: DomainSpec,
    pub inradius: f64,
    pub ridge_nodes: usize,
    pub run: RunSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct Gallery {
    pub n: usize,
    pub stencil: usize,
    pub domains: Vec<DomainRun>,
}

pub fn gallery_domains() -> Vec<DomainSpec> {
    let shapes = [
        Shape::Square,
        Shape::Rectangle {
            half_width: 1.0,
            half_height: 0.5,
        },
        Shape::Disk { radius: 1.0 },
        Shape::Ellipse {
            semi_axis_a: 1.0,
            semi_axis_b: 0.6,
        },
        Shape::default_triangle(),
        Shape::LShape,
        Shape::Heart,
        Shape::default_square_minus_disk(),
        Shape::default_dumbbell(),
    ];
    shapes
        .into_iter()
        .map(|s| DomainSpec::new(s, vec![]).expect("gallery shapes are valid"))
        .collect()
}

fn ground_state_on(
    domain: &DomainSpec,
    n: usize,
    s: usize,
    opts: &ExperimentOptions,
) -> Result<(Grid, ScalarField, DomainRun)> {
    let base = build_grid(domain, n, s)?;
    let (grid, lambda) = pin_ground_state_ridge(&base)?;
    let ridge_nodes = grid.pinned().count() - base.pinned().count();
    let (u, report) = solve(&grid, &SchemeSpec::ground_state(lambda)?, &opts.solver(Init::Distance))?;
    let run = DomainRun {
        domain: domain.clone(),
        inradius: 1.0 / lambda,
        ridge_nodes,
        run: RunSummary::new(domain.shape().name(), lambda, report, &u, None),
    };
    Ok((grid, u, run))
}

/// Ground states on the standard set of domains.
pub fn gallery(opts: &ExperimentOptions, out: Option<&Path>) -> Result<Gallery> {
    let (n, s) = opts.size(Experiment::Gallery);
    let mut domains = Vec::new();
    for domain in gallery_domains() {
        let (grid, u, mut run) = ground_state_on(&domain, n, s, opts)?;
        run.run.field = save(out, domain.shape().name(), &grid, &u)?;
        domains.push(run);
    }
    Ok(Gallery {
        n,
        stencil: s,
        domains,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DumbbellRidge {
    pub n: usize,
    pub stencil: usize,
    pub ground_state: DomainRun,
    pub ridge: Vec<Point>,
    pub centre_value: f64,
    /// `(x, u)` along the segment `y = 0` joining the two maxima.
    pub axis_profile: Vec<[f64; 2]>,
}

/// Dumbbell ground state and its profile along the line joining the bulbs.
pub fn dumbbell_ridge(opts: &ExperimentOptions, out: Option<&Path>) -> Result<DumbbellRidge> {
    let (n, s) = opts.size(Experiment::DumbbellRidge);
    let domain = DomainSpec::new(Shape::default_dumbbell(), vec![])?;
    let (grid, u, mut run) = ground_state_on(&domain, n, s, opts)?;
    run.run.field = save(out, "dumbbell", &grid, &u)?;
    let base = build_grid(&domain, n, s)?;
    let d = distance_transform(&base)?;
    let ridge = high_ridge(&d, 0.5 * grid.spacing())
        .into_iter()
        .map(|i| grid.node(i))
        .collect();
    let row = (n - 1) / 2;
    let axis_profile = (0..n)
        .filter_map(|ix| grid.node_at(ix, row))
        .filter(|&i| grid.node(i)[1] == 0.0)
        .map(|i| [grid.node(i)[0], u[i]])
        .collect();
    let centre = grid.nearest_node([0.0, 0.0]);
    Ok(DumbbellRidge {
        n,
        stencil: s,
        centre_value: u[centre],
        ground_state: run,
        ridge,
        axis_profile,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondEigenfunction {
    pub domain: DomainSpec,
    pub lambda2: f64,
    pub radius: f64,
    pub peaks: [Point; 2],
    pub run: RunSummary,
    pub nodal_domains: (usize, usize),
    /// Largest distance of the nodal line from the bisector of the two peaks.
    pub bisector_offset: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondEigenfunctions {
    pub n: usize,
    pub stencil: usize,
    pub cases: Vec<SecondEigenfunction>,
}

/// Second eigenfunction with `Λ₂ = 1 / r₂` and the two packing centres pinned
/// to `+r₂` and `-r₂`, started from zero.
pub fn second_eigenfunction_on(
    domain: &DomainSpec,
    n: usize,
    s: usize,
    opts: &ExperimentOptions,
) -> Result<(Grid, ScalarField, SecondEigenfunction)> {
    let base = build_grid(domain, n, s)?;
    let d = distance_transform(&base)?;
    let est = lambda2_two_ball(&base, &d)?;
    let (a, b) = (est.witness[0], est.witness[1]);
    let grid = set_pinned(&base, &[(a, est.radius), (b, -est.radius)])?;
    let (u, report) = solve(&grid, &SchemeSpec::higher(est.lambda)?, &opts.solver(Init::Zero))?;
    let (pa, pb) = (grid.node(a), grid.node(b));
    let centre = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
    let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
    let normal = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
    let case = SecondEigenfunction {
        domain: domain.clone(),
        lambda2: est.lambda,
        radius: est.radius,
        peaks: [pa, pb],
        nodal_domains: nodal_domains(&grid, &u, 0.0),
        bisector_offset: nodal_line_offset(&grid, &u, centre, normal),
        run: RunSummary::new(domain.shape().name(), est.lambda, report, &u, None),
    };
    Ok((grid, u, case))
}

pub fn second_eigenfunctions(opts: &ExperimentOptions, out: Option<&Path>) -> Result<SecondEigenfunctions> {
    let (n, s) = opts.size(Experiment::SecondEigenfunctions);
    let shapes = [Shape::Square, Shape::Disk { radius: 1.0 }, Shape::LShape, Shape::Heart];
    let mut cases = Vec::new();
    for shape in shapes {
        let domain = DomainSpec::new(shape, vec![])?;
        let (grid, u, mut case) = second_eigenfunction_on(&domain, n, s, opts)?;
        case.run.field = save(out, &format!("second_{}", domain.shape().name()), &grid, &u)?;
        cases.push(case);
    }
    Ok(SecondEigenfunctions { n, stencil: s, cases })
}

#[derive(Clone, Debug, Serialize)]
pub struct HigherCase {
    pub k: usize,
    pub mode: (usize, usize),
    pub run: RunSummary,
    pub eigen_defect: f64,
    pub nodal_domains: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct HigherSquare {
    pub n: usize,
    pub stencil: usize,
    pub cases: Vec<HigherCase>,
}

/// `1 / max` of the distance to the boundary and to the sign changes of `v`.
pub fn nodal_eigenvalue(grid: &Grid, v: &ScalarField) -> Result<f64> {
    let scale = v.linf_norm();
    let mut sources: Vec<usize> = grid.pinned().filter(|&(_, x)| x == 0.0).map(|(i, _)| i).collect();
    for &i in grid.interior() {
        let (nb, _) = grid.neighbors(i);
        let touches = nb.iter().any(|&j| {
            let [a, b] = [grid.lattice_position(i), grid.lattice_position(j)];
            let adjacent = a[0].abs_diff(b[0]) + a[1].abs_diff(b[1]) == 1;
            adjacent && v[i] * v[j] < 0.0 && v[i].abs() <= v[j].abs()
        });
        if touches || v[i].abs() <= 1e-12 * scale {
            sources.push(i);
        }
    }
    let d = distance_to(grid, &sources)?;
    Ok(lambda1(&d)?.lambda)
}

/// Unpinned square eigenfunctions started from the first three Dirichlet
/// Laplacian modes, with `Λ` read off the nodal domains of each mode.
pub fn higher_square(opts: &ExperimentOptions, out: Option<&Path>) -> Result<HigherSquare> {
    let (n, s) = opts.size(Experiment::HigherSquare);
    let grid = build_grid(&DomainSpec::square(), n, s)?;
    let modes = rectangle_mode_order(1.0, 1.0, 3);
    let mut cases = Vec::new();
    for k in 1..=3 {
        let init = Init::LaplacianEigen { k };
        let v = crate::solver::initialize(&grid, None, &init)?;
        let lambda = nodal_eigenvalue(&grid, &v)?;
        let spec = SchemeSpec::higher(lambda)?;
        let (u, report) = solve(&grid, &spec, &opts.solver(init))?;
        let f = residual_with(&grid, &u, &spec, opts.execution)?;
        cases.push(HigherCase {
            k,
            mode: modes[k - 1],
            eigen_defect: eigen_defect(&f, &u),
            nodal_domains: nodal_domains(&grid, &u, 0.0),
            run: RunSummary::new(format!("k={k}"), lambda, report, &u, save(out, &format!("higher_k{k}"), &grid, &u)?),
        });
    }
    Ok(HigherSquare { n, stencil: s, cases })
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangleNormalized {
    pub n: usize,
    pub stencil: usize,
    pub seed: u64,
    pub domain: DomainSpec,
    pub run: RunSummary,
    pub nodal_domains: (usize, usize),
    pub snapshots: Vec<(usize, Option<String>)>,
}

/// Iterations at which the triangle run stores intermediate fields.
pub const TRIANGLE_SNAPSHOTS: [usize; 2] = [0, 300];

/// Random start on the triangle with the positive and negative parts
/// rescaled after every step, `Λ = Λ₂` from the two-ball radius.
pub fn triangle_normalized(opts: &ExperimentOptions, out: Option<&Path>) -> Result<TriangleNormalized> {
    let (n, s) = opts.size(Experiment::TriangleNormalized);
    let seed = opts.seed.unwrap_or(0);
    let domain = DomainSpec::new(Shape::default_triangle(), vec![])?;
    let grid = build_grid(&domain, n, s)?;
    let d = distance_transform(&grid)?;
    let est = lambda2_two_ball(&grid, &d)?;
    let spec = SchemeSpec::higher(est.lambda)?;
    let config = SolverConfig {
        normalize: true,
        ..opts.solver(Init::Random { seed })
    };
    let mut snapshots = Vec::new();
    let mut failure = None;
    let (u, report) = solve_observed(&grid, &spec, &config, &mut |k, u| {
        if TRIANGLE_SNAPSHOTS.contains(&k) && failure.is_none() {
            match save(out, &format!("triangle_iter{k}"), &grid, u) {
                Ok(file) => snapshots.push((k, file)),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let field = save(out, "triangle_final", &grid, &u)?;
    snapshots.push((report.iterations, field.clone()));
    Ok(TriangleNormalized {
        n,
        stencil: s,
        seed,
        domain,
        nodal_domains: nodal_domains(&grid, &u, 0.0),
        run: RunSummary::new("triangle", est.lambda, report, &u, field),
        snapshots,
    })
}
