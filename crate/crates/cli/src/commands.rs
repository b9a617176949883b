use serde::Serialize;
use serde_json::{json, Value};
use spinstat_core::currents::BundleErrors;
use spinstat_core::polarization::spin_density_closed;
use spinstat_core::polarization::{averaged_polarization_with, AverageOptions};
use spinstat_core::quadrature::check_admissible;
use spinstat_core::sampling::{random_momentum, random_state, rng_from_seed, SamplingRanges};
use spinstat_core::spinor::{spin_density_from_spinors, verify_trace_identities};
use spinstat_core::statistics::Species;
use spinstat_core::thermo::run_checks;
use spinstat_core::{evaluate_currents, CurrentsBundle, Error, FluidState, IdentityReport, Statistics};

use crate::config::{Format, RunConfig, ScanParameter};
use crate::output::Table;

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some scan points were skipped or failed.
    ScanIncomplete,
    /// An identity check or the spinor oracle failed.
    ChecksFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::ScanIncomplete => 4,
            Status::ChecksFailed => 5,
        }
    }
}

pub struct CommandOutput {
    pub document: Value,
    pub table: Table,
    /// Human-readable lines for standard error.
    pub summary: Vec<String>,
    pub status: Status,
    pub default_format: Format,
}

/// The state a run used, in the frame of the configuration.
#[derive(Serialize)]
struct StateEcho {
    mass: f64,
    temperature: f64,
    mu: f64,
    xi: f64,
    u: [f64; 4],
    beta: [f64; 4],
    /// Contravariant `omega^{mu nu}` for pairs `01,02,03,12,13,23`.
    omega_upper: [f64; 6],
    omega_e: [f64; 3],
    omega_b: [f64; 3],
}

fn state_echo(s: &FluidState) -> StateEcho {
    let eb = s.omega().eb();
    StateEcho {
        mass: s.mass(),
        temperature: s.temperature(),
        mu: s.mu(),
        xi: s.xi(),
        u: s.velocity().0,
        beta: s.beta().0,
        omega_upper: s.omega().upper_components(),
        omega_e: eb.e,
        omega_b: eb.b,
    }
}

fn average_options(config: &RunConfig) -> AverageOptions {
    AverageOptions {
        statistics: config.polarization.statistics,
        particles_only: config.polarization.particles_only,
    }
}

struct PointResult {
    zeta: f64,
    currents: CurrentsBundle,
    errors: BundleErrors,
    refinements_used: usize,
    polarization: [f64; 3],
}

fn evaluate_point(config: &RunConfig, s: &FluidState) -> spinstat_core::Result<PointResult> {
    let r = evaluate_currents(s, &config.quadrature)?;
    let p = averaged_polarization_with(s, &config.quadrature, &average_options(config))?;
    Ok(PointResult {
        zeta: r.zeta,
        currents: r.currents,
        errors: r.errors,
        refinements_used: r.refinements_used,
        polarization: p.0,
    })
}

fn magnitude(p: &[f64; 3]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn point_columns() -> Vec<String> {
    let mut h: Vec<String> = ["zeta", "converged", "refinements_used"].map(String::from).to_vec();
    h.extend(CurrentsBundle::component_labels());
    h.extend(["P_x", "P_y", "P_z", "P_abs"].map(String::from));
    h
}

fn point_cells(r: &PointResult) -> Vec<String> {
    let mut row = vec![r.zeta.to_string(), "true".into(), r.refinements_used.to_string()];
    row.extend(r.currents.flatten().iter().map(|x| x.to_string()));
    row.extend(r.polarization.iter().map(|x| x.to_string()));
    row.push(magnitude(&r.polarization).to_string());
    row
}

pub fn currents(config: &RunConfig) -> anyhow::Result<CommandOutput> {
    let s = config.fluid_state()?;
    let r = evaluate_point(config, &s)?;
    let document = json!({
        "config": config,
        "state": state_echo(&s),
        "zeta": r.zeta,
        "currents": r.currents,
        "errors": r.errors,
        "refinements_used": r.refinements_used,
        "polarization": r.polarization,
        "polarization_magnitude": magnitude(&r.polarization),
    });
    let table = Table {
        header: point_columns(),
        rows: vec![point_cells(&r)],
    };
    let [_, _, pz] = r.polarization;
    let summary = vec![format!(
        "zeta {:.4}, N^0 {:.6e} GeV^3, T^00 {:.6e} GeV^4, <P_z> {pz:.6e}",
        r.zeta, r.currents.n.0[0], r.currents.t[0][0]
    )];
    Ok(CommandOutput {
        document,
        table,
        summary,
        status: Status::Ok,
        default_format: Format::Json,
    })
}

fn report_line(r: &IdentityReport) -> String {
    let order = r
        .convergence_order
        .map(|o| format!(", order {o:.2}"))
        .unwrap_or_default();
    format!(
        "{} {}: max relative residual {:.3e} (tolerance {:.1e}{order})",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.max_relative_residual,
        r.tolerance
    )
}

pub fn verify(config: &RunConfig) -> anyhow::Result<CommandOutput> {
    let s = config.fluid_state()?;
    let zeta = check_admissible(&s.multipliers(), &config.quadrature)?;
    let reports = run_checks(
        &s,
        &config.quadrature,
        &config.verify.perturbation,
        &config.verify.checks,
    )?;
    let passed = reports.iter().all(|r| r.passed);
    let table = Table {
        header: [
            "identity",
            "passed",
            "max_relative_residual",
            "tolerance",
            "convergence_order",
        ]
        .map(String::from)
        .to_vec(),
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.passed.to_string(),
                    r.max_relative_residual.to_string(),
                    r.tolerance.to_string(),
                    r.convergence_order.map(|o| o.to_string()).unwrap_or_default(),
                ]
            })
            .collect(),
    };
    let summary = reports.iter().map(report_line).collect();
    let document = json!({
        "config": config,
        "state": state_echo(&s),
        "zeta": zeta,
        "reports": reports,
        "passed": passed,
    });
    Ok(CommandOutput {
        document,
        table,
        summary,
        status: if passed { Status::Ok } else { Status::ChecksFailed },
        default_format: Format::Json,
    })
}

#[derive(Serialize)]
struct ScanRow {
    value: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinements_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    currents: Option<CurrentsBundle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<BundleErrors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    polarization: Option<[f64; 3]>,
}

pub fn scan(config: &RunConfig) -> anyhow::Result<CommandOutput> {
    let spec = config
        .scan
        .ok_or_else(|| crate::config::config_error("scan needs a [scan] table"))?;
    spec.validate()?;
    let parameter: ScanParameter = spec.parameter;
    // config problems such as a missing [vortex] table abort before any point runs
    config.with_parameter(parameter, spec.lo)?;

    let mut header = vec![parameter.name().to_string(), "status".into()];
    header.extend(point_columns());
    header.push("message".into());
    let width = header.len();

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut summary = Vec::new();
    let mut incomplete = 0;
    for value in spec.values() {
        let point = config
            .with_parameter(parameter, value)
            .and_then(|c| c.fluid_state())
            .and_then(|s| Ok(evaluate_point(config, &s)?));
        match point {
            Ok(r) => {
                let mut line = vec![value.to_string(), "ok".into()];
                line.extend(point_cells(&r));
                line.push(String::new());
                cells.push(line);
                rows.push(ScanRow {
                    value,
                    status: "ok",
                    message: None,
                    zeta: Some(r.zeta),
                    converged: true,
                    refinements_used: Some(r.refinements_used),
                    currents: Some(r.currents),
                    errors: Some(r.errors),
                    polarization: Some(r.polarization),
                });
            }
            Err(err) => {
                incomplete += 1;
                let (status, zeta) = match err.downcast_ref::<Error>() {
                    Some(Error::Inadmissible { zeta, .. }) => ("skipped", Some(*zeta)),
                    _ => ("failed", None),
                };
                let message = err.to_string();
                summary.push(format!("{} = {value}: {status}: {message}", parameter.name()));
                let mut line = vec![String::new(); width];
                line[0] = value.to_string();
                line[1] = status.into();
                line[2] = zeta.map(|z| z.to_string()).unwrap_or_default();
                line[3] = "false".into();
                line[width - 1] = message.clone();
                cells.push(line);
                rows.push(ScanRow {
                    value,
                    status,
                    message: Some(message),
                    zeta,
                    converged: false,
                    refinements_used: None,
                    currents: None,
                    errors: None,
                    polarization: None,
                });
            }
        }
    }
    summary.push(format!(
        "{} of {} scan points completed",
        rows.len() - incomplete,
        rows.len()
    ));
    let document = json!({
        "config": config,
        "parameter": parameter.name(),
        "rows": rows,
    });
    Ok(CommandOutput {
        document,
        table: Table { header, rows: cells },
        summary,
        status: if incomplete == 0 {
            Status::Ok
        } else {
            Status::ScanIncomplete
        },
        default_format: Format::Csv,
    })
}

/// Residual limit for both oracle comparisons.
const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Serialize, Default)]
struct ResidualStats {
    max: f64,
    mean: f64,
}

impl ResidualStats {
    fn from(values: &[f64]) -> Self {
        ResidualStats {
            max: values.iter().fold(0.0, |a, x| a.max(*x)),
            mean: values.iter().sum::<f64>() / values.len().max(1) as f64,
        }
    }
}

/// Spinor-built spin density matrices and trace reductions against the
/// closed forms on seeded random states and momenta.
pub fn oracle(config: Option<&RunConfig>, seed: u64, trials: usize) -> anyhow::Result<CommandOutput> {
    if trials == 0 {
        return Err(crate::config::config_error("--trials must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let ranges = SamplingRanges::default();
    let mut density = Vec::with_capacity(trials);
    let mut traces = Vec::with_capacity(trials);
    let mut failing: Vec<&'static str> = Vec::new();
    for _ in 0..trials {
        let s = random_state(&mut rng, &ranges)?;
        let p = random_momentum(&mut rng, s.mass(), ranges.momentum)?;
        let mut worst: f64 = 0.0;
        for species in [Species::Particle, Species::Antiparticle] {
            let closed = spin_density_closed(&s, &p, species, Statistics::FermiDirac)?;
            let built = spin_density_from_spinors(&s, &p, species, Statistics::FermiDirac)?;
            worst = worst.max(closed.max_abs_diff(&built));
        }
        density.push(worst);
        let report = verify_trace_identities(&s, &p, Statistics::FermiDirac)?;
        for c in report.failures() {
            if !failing.contains(&c.name) {
                failing.push(c.name);
            }
        }
        traces.push(report.max_residual);
    }
    let density = ResidualStats::from(&density);
    let traces = ResidualStats::from(&traces);
    let passed = density.max < ORACLE_TOLERANCE && traces.max < ORACLE_TOLERANCE && failing.is_empty();
    let summary = vec![
        format!(
            "{} spin density: max residual {:.3e}, mean {:.3e} over {trials} states",
            if density.max < ORACLE_TOLERANCE { "PASS" } else { "FAIL" },
            density.max,
            density.mean
        ),
        format!(
            "{} trace identities: max residual {:.3e}, mean {:.3e}",
            if traces.max < ORACLE_TOLERANCE && failing.is_empty() {
                "PASS"
            } else {
                "FAIL"
            },
            traces.max,
            traces.mean
        ),
    ];
    let table = Table {
        header: [
            "seed",
            "trials",
            "density_max",
            "density_mean",
            "trace_max",
            "trace_mean",
            "passed",
        ]
        .map(String::from)
        .to_vec(),
        rows: vec![vec![
            seed.to_string(),
            trials.to_string(),
            density.max.to_string(),
            density.mean.to_string(),
            traces.max.to_string(),
            traces.mean.to_string(),
            passed.to_string(),
        ]],
    };
    let document = json!({
        "config": config,
        "seed": seed,
        "trials": trials,
        "tolerance": ORACLE_TOLERANCE,
        "spin_density": density,
        "traces": traces,
        "failing_traces": failing,
        "passed": passed,
    });
    Ok(CommandOutput {
        document,
        table,
        summary,
        status: if passed { Status::Ok } else { Status::ChecksFailed },
        default_format: Format::Json,
    })
}
