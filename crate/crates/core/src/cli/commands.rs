//! Experiment runners behind the command-line subcommands. Each returns a
//! typed report that renders to CSV or JSON.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    Experiment, ExperimentConfig, OutputConfig, RunConfig, SimulateConfig, SweepVariable,
};
use super::format::{opt6, sig6};
use crate::analytic::closed_form;
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::h2::{h2_norm, H2Diagnostics, H2Method};
use crate::models::{
    assemble, augment_frequency_penalty, check_assumptions, AnalyticFormula, AssumptionReport,
    Controller, GridParameters, StateSpaceModel,
};
use crate::sim::{
    estimate_steady_state_variance, simulate_with, EstimatorConfig, Integrator, SimOptions,
    VarianceEstimate,
};

/// A table of pre-formatted CSV fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Closed-form value next to a numerical one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub value: f64,
    pub formula: AnalyticFormula,
    /// `analytic` for exact closed forms, `upper_bound` for bounds.
    pub kind: H2Method,
    /// `|numerical - analytic| / analytic` for exact forms.
    pub rel_err: Option<f64>,
    /// `analytic >= numerical` for bounds.
    pub bound_holds: Option<bool>,
}

fn compare(
    numerical: Option<f64>,
    formula: AnalyticFormula,
    value: f64,
    kind: H2Method,
) -> AnalyticComparison {
    let (rel_err, bound_holds) = match (numerical, kind) {
        (Some(x), H2Method::UpperBound) => (None, Some(x <= value * (1.0 + 1e-10))),
        (Some(x), _) => (Some((x - value).abs() / value.abs()), None),
        (None, _) => (None, None),
    };
    AnalyticComparison {
        value,
        formula,
        kind,
        rel_err,
        bound_holds,
    }
}

/// The closed form for this output, or the reason there is none.
fn analytic_for(
    exp: &Experiment,
    controller: Controller,
    numerical: Option<f64>,
) -> std::result::Result<AnalyticComparison, String> {
    if let OutputConfig::CostPlusFrequency { sqrt_pi } = exp.output {
        if sqrt_pi != 0.0 {
            return Err("closed form not applicable: frequency penalty in the output".into());
        }
    }
    match closed_form(controller, &exp.graph, &exp.params) {
        Ok((formula, result)) => Ok(compare(numerical, formula, result.value, result.method)),
        Err(Error::AssumptionViolated(msg)) => Err(msg),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub controller: String,
    pub n: usize,
    pub output: OutputConfig,
    /// Squared H2 norm from the Lyapunov solve.
    pub numerical: Option<f64>,
    pub diagnostics: Option<H2Diagnostics>,
    pub analytic: Option<AnalyticComparison>,
    /// Why no closed form is reported.
    pub analytic_note: Option<String>,
    pub assumptions: AssumptionReport,
}

impl AnalyzeReport {
    pub fn to_csv(&self) -> CsvTable {
        let a = self.analytic.as_ref();
        CsvTable {
            header: header(&[
                "controller",
                "n",
                "numerical",
                "analytic",
                "analytic_kind",
                "rel_err",
                "note",
            ]),
            rows: vec![vec![
                self.controller.clone(),
                self.n.to_string(),
                opt6(self.numerical),
                opt6(a.map(|a| a.value)),
                a.map(|a| kind_str(a.kind).to_string()).unwrap_or_default(),
                opt6(a.and_then(|a| a.rel_err)),
                self.analytic_note.clone().unwrap_or_default(),
            ]],
        }
    }
}

fn kind_str(kind: H2Method) -> &'static str {
    match kind {
        H2Method::Lyapunov => "lyapunov",
        H2Method::Analytic => "exact",
        H2Method::MonteCarlo => "monte_carlo",
        H2Method::UpperBound => "upper_bound",
    }
}

/// Numerical squared H2 norm plus the matching closed form when the
/// assumptions permit (`run.kind = "analytic"` skips the numerical solve
/// and fails if no closed form applies).
pub fn cmd_analyze(config: &ExperimentConfig) -> Result<AnalyzeReport> {
    let numerical_wanted = match config.run {
        RunConfig::H2 => true,
        RunConfig::Analytic => false,
        _ => {
            return Err(Error::Config(
                "analyze expects run.kind = \"h2\" or \"analytic\"".into(),
            ))
        }
    };
    let exp = config.resolve()?;
    let controller = exp.controller;
    let (numerical, diagnostics) = if numerical_wanted {
        let result = h2_norm(&exp.model()?)?;
        (Some(result.value), result.diagnostics)
    } else {
        (None, None)
    };
    let (analytic, analytic_note) = match analytic_for(&exp, controller, numerical) {
        Ok(a) => (Some(a), None),
        Err(note) if numerical_wanted => (None, Some(note)),
        Err(note) => return Err(Error::AssumptionViolated(note)),
    };
    Ok(AnalyzeReport {
        controller: controller.label(),
        n: exp.graph.n(),
        output: exp.output,
        numerical,
        diagnostics,
        analytic,
        analytic_note,
        assumptions: check_assumptions(&controller.apply(&exp.params), &exp.graph),
    })
}

/// Frequency-penalty weights `sqrt(pi)` of the case-study table.
pub const TABLE1_SQRT_PI: [f64; 6] = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5];

/// Published values, columns as in [`table1_controllers`].
pub const TABLE1_PUBLISHED: [[f64; 4]; 6] = [
    [0.417, 0.569, 0.088, 0.083],
    [0.639, 0.791, 0.311, 0.308],
    [1.307, 1.458, 0.981, 0.983],
    [2.421, 2.569, 2.095, 2.108],
    [3.980, 4.125, 3.656, 3.683],
    [5.984, 6.125, 5.663, 5.708],
];

pub const TABLE1_COLUMNS: [&str; 4] = ["pd_alpha0", "pd_alpha5", "dapi_gamma5", "broadcast"];

/// Relative deviation above which the table flags the network topology as
/// the likely cause.
pub const TABLE1_FLAG_RTOL: f64 = 0.05;

/// Primal-dual at `alpha = 0` and `alpha = 5` (unit communication weight),
/// distributed averaging at `gamma = 5`, broadcast.
pub fn table1_controllers() -> [Controller; 4] {
    [
        Controller::PrimalDual { alpha: 0.0 },
        Controller::PrimalDual { alpha: 5.0 },
        Controller::Dapi { gamma: 5.0 },
        Controller::Broadcast,
    ]
}

/// Five-bus path, case-study parameters; primal-dual uses `gamma = 1`.
pub fn table1_setup() -> (NetworkGraph, GridParameters) {
    let g = NetworkGraph::build_path(5, 1.0).expect("five-bus path");
    (g, GridParameters::case_study(5).with_gamma(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub sqrt_pi: f64,
    pub computed: [f64; 4],
    pub published: [f64; 4],
    /// `computed - published`.
    pub deviation: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub columns: [&'static str; 4],
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn max_relative_deviation(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| {
                r.deviation
                    .iter()
                    .zip(r.published)
                    .map(|(d, p)| (d / p).abs())
            })
            .fold(0.0, f64::max)
    }

    /// A warning when some cell is off by more than [`TABLE1_FLAG_RTOL`].
    pub fn topology_note(&self) -> Option<String> {
        let worst = self.max_relative_deviation();
        (worst > TABLE1_FLAG_RTOL).then(|| {
            format!(
                "largest relative deviation {:.1}% exceeds 5%; the published table may use a different five-bus topology",
                100.0 * worst
            )
        })
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut names = vec!["sqrt_pi".to_string()];
        for prefix in ["", "published_", "deviation_"] {
            names.extend(self.columns.iter().map(|c| format!("{prefix}{c}")));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(sig6(r.sqrt_pi))
                    .chain(
                        r.computed
                            .iter()
                            .chain(&r.published)
                            .chain(&r.deviation)
                            .map(|v| sig6(*v)),
                    )
                    .collect()
            })
            .collect();
        CsvTable {
            header: names,
            rows,
        }
    }
}

fn with_output(model: StateSpaceModel, sqrt_pi: f64) -> Result<StateSpaceModel> {
    if sqrt_pi == 0.0 {
        Ok(model)
    } else {
        augment_frequency_penalty(&model, sqrt_pi * sqrt_pi)
    }
}

/// Squared H2 norms of the cost-plus-frequency output for the case study.
pub fn cmd_table1() -> Result<Table1> {
    let (g, params) = table1_setup();
    let models = table1_controllers()
        .iter()
        .map(|&c| assemble(c, &g, &params))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(TABLE1_SQRT_PI.len());
    for (i, &sqrt_pi) in TABLE1_SQRT_PI.iter().enumerate() {
        let mut computed = [0.0; 4];
        for (j, model) in models.iter().enumerate() {
            computed[j] = h2_norm(&with_output(model.clone(), sqrt_pi)?)?.value;
        }
        let published = TABLE1_PUBLISHED[i];
        let deviation = std::array::from_fn(|j| computed[j] - published[j]);
        rows.push(Table1Row {
            sqrt_pi,
            computed,
            published,
            deviation,
        });
    }
    Ok(Table1 {
        columns: TABLE1_COLUMNS,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub controller: String,
    pub numerical: f64,
    pub analytic: Option<AnalyticComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> CsvTable {
        CsvTable {
            header: header(&[
                self.variable.as_str(),
                "controller",
                "numerical",
                "analytic",
                "analytic_kind",
                "rel_err",
            ]),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let a = r.analytic.as_ref();
                    vec![
                        sig6(r.value),
                        r.controller.clone(),
                        sig6(r.numerical),
                        opt6(a.map(|a| a.value)),
                        a.map(|a| kind_str(a.kind).to_string()).unwrap_or_default(),
                        opt6(a.and_then(|a| a.rel_err)),
                    ]
                })
                .collect(),
        }
    }

    /// Numerical values of one controller in grid order.
    pub fn column(&self, controller: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.controller == controller)
            .map(|r| r.numerical)
            .collect()
    }
}

fn sweep_point(
    config: &ExperimentConfig,
    variable: SweepVariable,
    value: f64,
    controller: Controller,
) -> Result<SweepRow> {
    let mut exp = config.resolve()?;
    let controller = match variable {
        SweepVariable::N => {
            let n = value as usize;
            exp.graph = NetworkGraph::build_path(n, 1.0)?;
            exp.params = config.params.resolve(n)?;
            controller
        }
        SweepVariable::Gamma => {
            exp.params.gamma = value;
            match controller {
                Controller::Dapi { .. } => Controller::Dapi { gamma: value },
                other => other,
            }
        }
        SweepVariable::Alpha => {
            exp.params.alpha = value;
            match controller {
                Controller::PrimalDual { .. } => Controller::PrimalDual { alpha: value },
                other => other,
            }
        }
    };
    let numerical = h2_norm(&exp.model_for(controller)?)?.value;
    Ok(SweepRow {
        value,
        controller: controller_name(controller),
        numerical,
        analytic: analytic_for(&exp, controller, Some(numerical)).ok(),
    })
}

/// Controller family plus the gain that is not swept.
fn controller_name(c: Controller) -> String {
    c.tag().as_str().to_string()
}

/// One row per grid point and controller, in grid order; points are
/// evaluated concurrently.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    let RunConfig::Sweep { variable, grid, .. } = &config.run else {
        return Err(Error::Config(
            "sweep expects run.kind = \"sweep\" with run.variable and run.grid".into(),
        ));
    };
    config.validate()?;
    let controllers = config.controllers();
    let jobs: Vec<(f64, Controller)> = grid
        .iter()
        .flat_map(|&v| controllers.iter().map(move |&c| (v, c)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(value, c)| {
            sweep_point(config, *variable, value, c).map_err(|e| {
                e.context(format!(
                    "{} = {} ({})",
                    variable.as_str(),
                    sig6(value),
                    c.label()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        variable: *variable,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub controller: String,
    /// Squared H2 norm from the Lyapunov solve.
    pub lyapunov: f64,
    pub estimate: VarianceEstimate,
    pub ci_contains_lyapunov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub master_seed: u64,
    /// Replicate `i` uses noise stream `i` of the master seed.
    pub replicates: usize,
    pub parameters: GridParameters,
    pub records: Vec<SimulationRecord>,
}

impl SimulateReport {
    pub fn to_csv(&self) -> CsvTable {
        CsvTable {
            header: header(&[
                "controller",
                "lyapunov",
                "mean_sq",
                "ci_low",
                "ci_high",
                "ci_contains_lyapunov",
                "n_seeds",
                "master_seed",
                "dt",
                "horizon",
                "burn_in",
                "integrator",
            ]),
            rows: self
                .records
                .iter()
                .map(|r| {
                    let e = &r.estimate;
                    vec![
                        r.controller.clone(),
                        sig6(r.lyapunov),
                        sig6(e.mean_sq),
                        sig6(e.ci_low),
                        sig6(e.ci_high),
                        r.ci_contains_lyapunov.to_string(),
                        e.n_seeds.to_string(),
                        e.master_seed.to_string(),
                        sig6(e.dt),
                        sig6(e.horizon),
                        sig6(e.burn_in),
                        match e.integrator {
                            Integrator::EulerMaruyama => "euler_maruyama",
                            Integrator::ExactGaussian => "exact_gaussian",
                        }
                        .to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn record(&self, controller: &str) -> Option<&SimulationRecord> {
        self.records.iter().find(|r| r.controller == controller)
    }
}

/// Estimator settings for `model`: spectrum-based defaults overridden by
/// whatever the config specifies.
pub fn estimator_config(
    model: &StateSpaceModel,
    sim: &SimulateConfig,
    seed: u64,
) -> EstimatorConfig {
    let base = match sim.integrator {
        Integrator::EulerMaruyama => EstimatorConfig::defaults_for(model, seed),
        Integrator::ExactGaussian => EstimatorConfig::exact_defaults_for(model, seed),
    };
    let horizon = sim.horizon.unwrap_or(base.horizon);
    EstimatorConfig {
        n_seeds: sim.seeds,
        dt: sim.dt.unwrap_or(base.dt),
        horizon,
        burn_in: sim.burn_in.unwrap_or(0.2 * horizon),
        ..base
    }
}

/// Trace rows kept when `record_every` is not configured.
pub const DEFAULT_TRACE_ROWS: usize = 10_000;

/// Monte Carlo estimate of the stationary output power for each
/// controller, with replicate 0 optionally exported as a trace with columns
/// `t, controller, y_1..y_p, yty`.
pub fn cmd_simulate(
    config: &ExperimentConfig,
    seed: Option<u64>,
    with_trace: bool,
) -> Result<(SimulateReport, Option<CsvTable>)> {
    let RunConfig::Simulate(sim) = &config.run else {
        return Err(Error::Config(
            "simulate expects run.kind = \"simulate\"".into(),
        ));
    };
    config.validate()?;
    let exp = config.resolve()?;
    let master_seed = seed.unwrap_or(sim.seed);
    let mut records = Vec::new();
    let mut trace: Option<CsvTable> = None;
    for controller in config.controllers() {
        let label = controller.label();
        let model = exp
            .model_for(controller)
            .map_err(|e| e.context(label.clone()))?;
        let lyapunov = h2_norm(&model).map_err(|e| e.context(label.clone()))?.value;
        let est_config = estimator_config(&model, sim, master_seed);
        let estimate = estimate_steady_state_variance(&model, &est_config)
            .map_err(|e| e.context(label.clone()))?;
        if with_trace {
            let steps = (est_config.horizon / est_config.dt).round() as usize;
            let every = sim
                .record_every
                .unwrap_or_else(|| steps.div_ceil(DEFAULT_TRACE_ROWS).max(1));
            let options = SimOptions {
                integrator: est_config.integrator,
                record_every: every,
                ..SimOptions::default()
            };
            let tr = simulate_with(
                &model,
                master_seed,
                est_config.dt,
                est_config.horizon,
                &options,
            )?;
            let table = trace.get_or_insert_with(|| {
                let mut names = header(&["t", "controller"]);
                names.extend((1..=model.output_dim()).map(|i| format!("y_{i}")));
                names.push("yty".into());
                CsvTable {
                    header: names,
                    rows: Vec::new(),
                }
            });
            if table.header.len() != model.output_dim() + 3 {
                return Err(Error::DimensionMismatch(
                    "compared controllers must have equal output dimensions".into(),
                ));
            }
            for (t, y) in tr.times.iter().zip(&tr.outputs) {
                let mut row = vec![sig6(*t), label.clone()];
                row.extend(y.iter().map(|v| sig6(*v)));
                row.push(sig6(y.iter().map(|v| v * v).sum()));
                table.rows.push(row);
            }
        }
        records.push(SimulationRecord {
            controller: label,
            lyapunov,
            ci_contains_lyapunov: estimate.contains(lyapunov),
            estimate,
        });
    }
    let report = SimulateReport {
        master_seed,
        replicates: sim.seeds,
        parameters: exp.params.clone(),
        records,
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn analyze_default_broadcast() {
        let report = cmd_analyze(&ExperimentConfig::default()).unwrap();
        assert!((report.numerical.unwrap() - 0.0833).abs() < 1e-4);
        let a = report.analytic.unwrap();
        assert!((a.value - 1.0 / 12.0).abs() < 1e-15);
        assert!(a.rel_err.unwrap() <= 1e-8);
        assert_eq!(a.kind, H2Method::Analytic);
    }

    #[test]
    fn analyze_dapi_and_bound() {
        let mut cfg = ExperimentConfig {
            controller: Controller::Dapi { gamma: 5.0 }.into(),
            ..ExperimentConfig::default()
        };
        let report = cmd_analyze(&cfg).unwrap();
        assert!((report.numerical.unwrap() - 0.0888).abs() < 1e-3);
        assert!(report.analytic.unwrap().rel_err.unwrap() < 1e-8);
        cfg.controller = Controller::PrimalDual { alpha: 5.0 }.into();
        let report = cmd_analyze(&cfg).unwrap();
        let a = report.analytic.unwrap();
        assert_eq!(a.kind, H2Method::UpperBound);
        assert_eq!(a.bound_holds, Some(true));
    }

    #[test]
    fn analyze_reports_missing_closed_form() {
        let cfg = config("[network]\nkind = \"path\"\nn = 3\n[params]\nm = [1.0, 2.0, 1.0]\n[controller]\nkind = \"broadcast\"\n");
        let report = cmd_analyze(&cfg).unwrap();
        assert!(report.numerical.is_some());
        assert!(report.analytic.is_none());
        assert!(report.analytic_note.unwrap().contains("not applicable"));
        assert!(!report.assumptions.uniform);
        let only = ExperimentConfig {
            run: RunConfig::Analytic,
            ..cfg
        };
        assert!(matches!(
            cmd_analyze(&only),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn analyze_rejects_other_runs() {
        let cfg = ExperimentConfig {
            run: RunConfig::Table1,
            ..ExperimentConfig::default()
        };
        assert!(matches!(cmd_analyze(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn table1_layout() {
        let t = cmd_table1().unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.header.len(), 13);
        assert_eq!(csv.rows.len(), 6);
        assert_eq!(csv.header[1], "pd_alpha0");
        assert_eq!(csv.header[12], "deviation_broadcast");
        for row in &t.rows {
            assert!(row.computed[0] > row.computed[3]);
        }
        assert!(t.topology_note().is_none());
    }

    #[test]
    fn sweep_over_size() {
        let cfg = config(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n[run]\nkind = \"sweep\"\nvariable = \"n\"\ngrid = [5, 10, 20, 40]\ncontrollers = [{ kind = \"broadcast\" }, { kind = \"primal_dual\", alpha = 0.0 }]\n",
        );
        let report = cmd_sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 8);
        for (v, n) in report.column("broadcast").iter().zip([5, 10, 20, 40]) {
            assert!((v - 1.0 / 12.0).abs() < 1e-9, "n={n}");
        }
        for (v, n) in report
            .column("primal_dual")
            .iter()
            .zip([5.0, 10.0, 20.0, 40.0])
        {
            assert!((v - n / 12.0).abs() < 1e-8 * n);
        }
        assert_eq!(report.to_csv().header[0], "n");
    }

    #[test]
    fn gamma_sweep_decreases_toward_broadcast() {
        let cfg = config(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"dapi\"\ngamma = 5.0\n[run]\nkind = \"sweep\"\nvariable = \"gamma\"\ngrid = [1, 10, 100, 1000]\n",
        );
        let col = cmd_sweep(&cfg).unwrap().column("dapi");
        assert!(col.windows(2).all(|w| w[1] < w[0]));
        assert!(col[3] > 1.0 / 12.0 && col[3] - 1.0 / 12.0 < 1e-3);
    }

    #[test]
    fn sweep_errors_name_the_grid_point() {
        let cfg = config(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"dapi\"\ngamma = 5.0\n[run]\nkind = \"sweep\"\nvariable = \"gamma\"\ngrid = [0, 1]\n",
        );
        let err = cmd_sweep(&cfg).unwrap_err();
        assert!(err.to_string().starts_with("gamma = 0"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn simulate_broadcast_exact() {
        let cfg = config(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n[run]\nkind = \"simulate\"\nseeds = 8\nseed = 3\nintegrator = \"exact_gaussian\"\n",
        );
        let (report, trace) = cmd_simulate(&cfg, Some(4), true).unwrap();
        assert_eq!(report.master_seed, 4);
        let r = &report.records[0];
        assert!((r.lyapunov - 1.0 / 12.0).abs() < 1e-9);
        assert!((r.estimate.mean_sq - r.lyapunov).abs() < 0.01);
        let trace = trace.unwrap();
        assert_eq!(trace.header.len(), 5 + 3);
        assert!(trace.rows.len() <= DEFAULT_TRACE_ROWS + 1);
        let (again, _) = cmd_simulate(&cfg, Some(4), false).unwrap();
        assert_eq!(again, report);
    }

    #[test]
    fn simulate_rejects_large_step() {
        let cfg = config(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n[run]\nkind = \"simulate\"\ndt = 1.0\nhorizon = 10.0\n",
        );
        let err = cmd_simulate(&cfg, None, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
