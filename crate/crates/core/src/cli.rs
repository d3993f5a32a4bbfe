//! JSON run configurations for the command line driver.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distance::{distance_transform, lambda1, lambda2_two_ball};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{DomainSpec, Point};
use crate::grid::{build_grid, set_pinned, Grid};
use crate::io::{write_field_csv, write_json};
use crate::schemes::{Execution, SchemeKind, SchemeSpec};
use crate::solver::{pin_ground_state_ridge, solve, Init, SolveReport, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSettings {
    pub kind: SchemeKind,
    /// Defaults to `1 / max d` for ground states and to the two-ball
    /// estimate for higher eigenfunctions.
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub rho: f64,
    pub max_iters: usize,
    pub tol: Option<f64>,
    pub normalize: bool,
    pub restart: bool,
    pub init: Init,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolverSettings {
            rho: c.rho,
            max_iters: c.max_iters,
            tol: c.tol,
            normalize: c.normalize,
            restart: c.restart,
            init: c.init,
        }
    }
}

impl SolverSettings {
    pub fn config(&self, execution: Execution) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            max_iters: self.max_iters,
            tol: self.tol,
            normalize: self.normalize,
            restart: self.restart,
            init: self.init.clone(),
            execution,
        }
    }
}

/// Dirichlet value imposed at the node nearest to `point`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinSpec {
    pub point: Point,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub field: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_stencil")]
    pub stencil: usize,
    pub scheme: SchemeSettings,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub pins: Vec<PinSpec>,
    /// Pin the high ridge of the distance function to `1 / Λ₁`. Defaults
    /// to true for ground states without explicit pins.
    #[serde(default)]
    pub pin_ridge: Option<bool>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_n() -> usize {
    97
}

fn default_stencil() -> usize {
    5
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunOutput {
    pub lambda: f64,
    pub nodes: usize,
    pub interior: usize,
    #[serde(flatten)]
    pub report: SolveReport,
}

/// Builds the grid described by `config`, solves, and writes the requested outputs.
pub fn run_solve(config: &RunConfig, execution: Execution) -> Result<(Grid, ScalarField, RunOutput)> {
    let base = build_grid(&config.domain, config.n, config.stencil)?;
    let kind = config.scheme.kind;
    let ridge = config
        .pin_ridge
        .unwrap_or(kind == SchemeKind::GroundState && config.pins.is_empty());
    if ridge && kind != SchemeKind::GroundState {
        return Err(Error::InvalidConfig(
            "pin_ridge applies to ground states only".into(),
        ));
    }
    let (mut grid, ridge_lambda) = if ridge {
        let (g, l) = pin_ground_state_ridge(&base)?;
        (g, Some(l))
    } else {
        (base, None)
    };
    if !config.pins.is_empty() {
        let assignments: Vec<(usize, f64)> = config
            .pins
            .iter()
            .map(|p| (grid.nearest_node(p.point), p.value))
            .collect();
        grid = set_pinned(&grid, &assignments)?;
    }
    let lambda = match (config.scheme.lambda, kind) {
        (Some(l), _) => l,
        (None, SchemeKind::InfinityHarmonic) => 0.0,
        (None, SchemeKind::GroundState) => match ridge_lambda {
            Some(l) => l,
            None => lambda1(&distance_transform(&grid)?)?.lambda,
        },
        (None, SchemeKind::Higher) => {
            let plain = build_grid(&config.domain, config.n, config.stencil)?;
            lambda2_two_ball(&plain, &distance_transform(&plain)?)?.lambda
        }
    };
    let spec = match kind {
        SchemeKind::InfinityHarmonic => SchemeSpec::infinity_harmonic(),
        _ => SchemeSpec::new(kind, lambda)?,
    };
    let (u, report) = solve(&grid, &spec, &config.solver.config(execution))?;
    let output = RunOutput {
        lambda,
        nodes: grid.len(),
        interior: grid.interior().len(),
        report,
    };
    if let Some(path) = &config.output.field {
        write_field_csv(path, &grid, &u)?;
    }
    if let Some(path) = &config.output.report {
        write_json(path, &output)?;
    }
    Ok((grid, u, output))
}

/// Parses a domain given either inline as JSON or as a path to a JSON file.
pub fn parse_domain_arg(arg: &str) -> Result<DomainSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        std::fs::read_to_string(arg)?
    };
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(
            r#"{"domain": {"shape": "square"}, "scheme": {"kind": "ground_state"}}"#,
        )
        .unwrap();
        assert_eq!((c.n, c.stencil), (97, 5));
        assert_eq!(c.solver, SolverSettings::default());
        assert!(c.pins.is_empty() && c.pin_ridge.is_none());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = r#"{"domain": {"shape": "square"}, "scheme": {"kind": "ground_state"}, "nn": 3}"#;
        assert!(RunConfig::from_json(bad).is_err());
    }

    #[test]
    fn ground_state_run_pins_the_ridge() {
        let c = RunConfig::from_json(
            r#"{"domain": {"shape": "square"}, "n": 17, "stencil": 2,
                "scheme": {"kind": "ground_state"}}"#,
        )
        .unwrap();
        let (g, u, out) = run_solve(&c, Execution::Serial).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.lambda, 1.0);
        assert_eq!(u[g.nearest_node([0.0, 0.0])], 1.0);
    }

    #[test]
    fn harmonic_run_with_explicit_pins() {
        let c = RunConfig::from_json(
            r#"{"domain": {"shape": "square"}, "n": 17, "stencil": 2,
                "scheme": {"kind": "infinity_harmonic"},
                "pins": [{"point": [0.0, 0.0], "value": 1.0}],
                "solver": {"init": "zero", "max_iters": 5}}"#,
        )
        .unwrap();
        let (_, u, out) = run_solve(&c, Execution::Serial).unwrap();
        assert_eq!(out.report.iterations, 5);
        assert!(!out.report.converged);
        assert_eq!(u.max(), 1.0);
    }

    #[test]
    fn ridge_pinning_rejected_for_higher() {
        let c = RunConfig::from_json(
            r#"{"domain": {"shape": "square"}, "n": 17, "stencil": 2,
                "scheme": {"kind": "higher", "lambda": 2.0}, "pin_ridge": true}"#,
        )
        .unwrap();
        assert!(matches!(run_solve(&c, Execution::Serial), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn domain_argument_inline() {
        let d = parse_domain_arg(r#"{"shape": "disk", "params": {"radius": 0.5}}"#).unwrap();
        assert_eq!(d.shape().name(), "disk");
        assert!(parse_domain_arg("/nonexistent/domain.json").is_err());
    }
}
