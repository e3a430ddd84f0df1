//! TOML experiment configuration. Every table rejects unknown keys.
//!
//! ```toml
//! [network]
//! kind = "path"          # or "edges" with `edges = [[1, 2, 1.0], ...]` (1-based)
//! n = 5
//! weight = 1.0
//!
//! [params]               # every field optional; defaults are the case study
//! m = 1.0                # scalar or per-bus list; likewise d, b, k
//! d = 1.0
//! b = 1.0
//! k = 4.0
//! tau_mu = 6.0
//! tau_nu = 6.0
//! tau = 6.0
//! gamma = 5.0
//! alpha = 0.0
//! # r = [0.2, 0.2, 0.2, 0.2, 0.2]
//! # heterogeneity = { seed = 7, spread = 0.5 }   # m, d, k scaled by U[1-s, 1+s]
//!
//! [controller]
//! kind = "broadcast"     # "swing" | "broadcast" | "primal_dual" (alpha) | "dapi" (gamma)
//!
//! [output]
//! kind = "cost"          # or "cost_plus_frequency" with `sqrt_pi = 0.3`
//!
//! [run]
//! kind = "h2"            # "h2" | "analytic" | "simulate" | "table1" | "sweep"
//! ```

use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::models::{
    assemble, augment_frequency_penalty, Controller, GridParameters, StateSpaceModel,
};
use crate::sim::Integrator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkConfig {
    Path {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Edges {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

fn one() -> f64 {
    1.0
}

/// A per-bus quantity given either as one value for all buses or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerBus {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerBus {
    fn expand(&self, name: &str, n: usize) -> Result<DVector<f64>> {
        match self {
            PerBus::Uniform(v) => Ok(DVector::from_element(n, *v)),
            PerBus::List(values) if values.len() == n => Ok(DVector::from_vec(values.clone())),
            PerBus::List(values) => Err(Error::Config(format!(
                "params.{name} lists {} values but the network has {n} buses",
                values.len()
            ))),
        }
    }

    fn is_list(&self) -> bool {
        matches!(self, PerBus::List(_))
    }
}

/// Seeded multiplicative perturbation of `m`, `d` and `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Heterogeneity {
    pub seed: u64,
    #[serde(default = "half")]
    pub spread: f64,
}

fn half() -> f64 {
    0.5
}

impl Heterogeneity {
    /// Scales every bus's `m`, `d`, `k` by an independent `U[1 - spread, 1 + spread]`
    /// draw, in the order all `m`, then all `d`, then all `k`.
    pub fn apply(&self, params: &mut GridParameters) -> Result<()> {
        if !(0.0..1.0).contains(&self.spread) {
            return Err(Error::Config(format!(
                "heterogeneity spread must lie in [0, 1), got {}",
                self.spread
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for v in [&mut params.m, &mut params.d, &mut params.k] {
            for x in v.iter_mut() {
                *x *= rng.random_range(1.0 - self.spread..=1.0 + self.spread);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub m: PerBus,
    pub d: PerBus,
    pub b: PerBus,
    pub k: PerBus,
    pub tau_mu: f64,
    pub tau_nu: f64,
    pub tau: f64,
    pub gamma: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heterogeneity: Option<Heterogeneity>,
}

impl Default for ParamsConfig {
    /// The case-study values.
    fn default() -> Self {
        ParamsConfig {
            m: PerBus::Uniform(1.0),
            d: PerBus::Uniform(1.0),
            b: PerBus::Uniform(1.0),
            k: PerBus::Uniform(4.0),
            tau_mu: 6.0,
            tau_nu: 6.0,
            tau: 6.0,
            gamma: 5.0,
            alpha: 0.0,
            r: None,
            heterogeneity: None,
        }
    }
}

impl ParamsConfig {
    pub fn resolve(&self, n: usize) -> Result<GridParameters> {
        let r = match &self.r {
            None => DVector::from_element(n, 1.0 / n as f64),
            Some(r) => PerBus::List(r.clone()).expand("r", n)?,
        };
        let mut params = GridParameters {
            m: self.m.expand("m", n)?,
            d: self.d.expand("d", n)?,
            b: self.b.expand("b", n)?,
            k: self.k.expand("k", n)?,
            tau_mu: self.tau_mu,
            tau_nu: self.tau_nu,
            tau: self.tau,
            gamma: self.gamma,
            alpha: self.alpha,
            r,
        };
        if let Some(h) = &self.heterogeneity {
            h.apply(&mut params)?;
        }
        params.validate(n)?;
        Ok(params)
    }

    /// Whether the values are tied to one specific network size.
    pub fn is_size_specific(&self) -> bool {
        [&self.m, &self.d, &self.b, &self.k]
            .iter()
            .any(|v| v.is_list())
            || self.r.is_some()
    }
}

/// Mirrors [`Controller`] with strict key checking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    Swing,
    Broadcast,
    PrimalDual { alpha: f64 },
    Dapi { gamma: f64 },
}

impl From<ControllerConfig> for Controller {
    fn from(c: ControllerConfig) -> Self {
        match c {
            ControllerConfig::Swing => Controller::Swing,
            ControllerConfig::Broadcast => Controller::Broadcast,
            ControllerConfig::PrimalDual { alpha } => Controller::PrimalDual { alpha },
            ControllerConfig::Dapi { gamma } => Controller::Dapi { gamma },
        }
    }
}

impl From<Controller> for ControllerConfig {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Swing => ControllerConfig::Swing,
            Controller::Broadcast => ControllerConfig::Broadcast,
            Controller::PrimalDual { alpha } => ControllerConfig::PrimalDual { alpha },
            Controller::Dapi { gamma } => ControllerConfig::Dapi { gamma },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputConfig {
    #[default]
    Cost,
    CostPlusFrequency {
        sqrt_pi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    N,
    Gamma,
    Alpha,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::N => "n",
            SweepVariable::Gamma => "gamma",
            SweepVariable::Alpha => "alpha",
        }
    }
}

/// Simulation settings; omitted values follow the spectrum-based defaults of
/// [`crate::sim::EstimatorConfig::defaults_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "twenty")]
    pub seeds: usize,
    #[serde(default)]
    pub seed: u64,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub burn_in: Option<f64>,
    #[serde(default)]
    pub integrator: Integrator,
    /// Trace CSV keeps every `record_every`-th step (default: at most
    /// 10 000 rows).
    pub record_every: Option<usize>,
    /// Compare several controllers on the same network and parameters
    /// instead of the single `[controller]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controllers: Vec<ControllerConfig>,
}

fn twenty() -> usize {
    20
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            seeds: 20,
            seed: 0,
            dt: None,
            horizon: None,
            burn_in: None,
            integrator: Integrator::EulerMaruyama,
            record_every: None,
            controllers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    #[default]
    H2,
    Analytic,
    Simulate(SimulateConfig),
    Table1,
    Sweep {
        variable: SweepVariable,
        grid: Vec<f64>,
        /// Evaluate several controllers per grid point instead of the
        /// single `[controller]`.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controllers: Vec<ControllerConfig>,
    },
}

/// A fully resolved experiment: network, parameters, controller and output.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub graph: NetworkGraph,
    pub params: GridParameters,
    pub controller: Controller,
    pub output: OutputConfig,
}

impl Experiment {
    pub fn model(&self) -> Result<StateSpaceModel> {
        self.model_for(self.controller)
    }

    pub fn model_for(&self, controller: Controller) -> Result<StateSpaceModel> {
        let model = assemble(controller, &self.graph, &self.params)?;
        match self.output {
            OutputConfig::Cost => Ok(model),
            OutputConfig::CostPlusFrequency { sqrt_pi } => {
                augment_frequency_penalty(&model, sqrt_pi * sqrt_pi)
            }
        }
    }
}

impl NetworkConfig {
    pub fn n(&self) -> usize {
        match self {
            NetworkConfig::Path { n, .. } | NetworkConfig::Edges { n, .. } => *n,
        }
    }

    pub fn build(&self) -> Result<NetworkGraph> {
        match self {
            NetworkConfig::Path { n, weight } => NetworkGraph::build_path(*n, *weight),
            NetworkConfig::Edges { n, edges } => NetworkGraph::build_from_edges(*n, edges),
        }
    }
}

impl Default for ExperimentConfig {
    /// Five-bus path with the case-study parameters and broadcast control.
    fn default() -> Self {
        ExperimentConfig {
            network: NetworkConfig::Path { n: 5, weight: 1.0 },
            params: ParamsConfig::default(),
            controller: ControllerConfig::Broadcast,
            output: OutputConfig::Cost,
            run: RunConfig::H2,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize to TOML")
    }

    /// Checks everything that can be checked without assembling a model.
    pub fn validate(&self) -> Result<()> {
        self.resolve()?;
        match self.output {
            OutputConfig::CostPlusFrequency { sqrt_pi }
                if !(sqrt_pi >= 0.0 && sqrt_pi.is_finite()) =>
            {
                return Err(Error::Config(format!(
                    "output.sqrt_pi must be finite and nonnegative, got {sqrt_pi}"
                )));
            }
            _ => {}
        }
        match &self.run {
            RunConfig::Sweep { variable, grid, .. } => {
                if grid.is_empty() {
                    return Err(Error::Config("run.grid must not be empty".into()));
                }
                if grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("run.grid must be strictly ascending".into()));
                }
                if *variable == SweepVariable::N {
                    if grid.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                        return Err(Error::Config(
                            "an n-sweep grid must hold positive integers".into(),
                        ));
                    }
                    if self.params.is_size_specific() {
                        return Err(Error::Config(
                            "an n-sweep needs scalar m, d, b, k and no explicit r".into(),
                        ));
                    }
                }
            }
            RunConfig::Simulate(sim) => {
                if sim.seeds < 2 {
                    return Err(Error::Config(format!(
                        "run.seeds must be at least 2, got {}",
                        sim.seeds
                    )));
                }
                for (name, value) in [("dt", sim.dt), ("horizon", sim.horizon)] {
                    if let Some(v) = value {
                        if !(v > 0.0 && v.is_finite()) {
                            return Err(Error::Config(format!(
                                "run.{name} must be positive, got {v}"
                            )));
                        }
                    }
                }
                if let Some(b) = sim.burn_in {
                    if !(b >= 0.0) {
                        return Err(Error::Config(format!(
                            "run.burn_in must be nonnegative, got {b}"
                        )));
                    }
                }
                if sim.record_every == Some(0) {
                    return Err(Error::Config("run.record_every must be positive".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The run's controller list, or the single `[controller]`.
    pub fn controllers(&self) -> Vec<Controller> {
        let listed = match &self.run {
            RunConfig::Sweep { controllers, .. } => controllers.as_slice(),
            RunConfig::Simulate(sim) => sim.controllers.as_slice(),
            _ => &[],
        };
        if listed.is_empty() {
            vec![self.controller.into()]
        } else {
            listed.iter().map(|&c| c.into()).collect()
        }
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let graph = self.network.build()?;
        let params = self.params.resolve(graph.n())?;
        Ok(Experiment {
            graph,
            params,
            controller: self.controller.into(),
            output: self.output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[network]
kind = "edges"
n = 3
edges = [[1, 2, 1.0], [2, 3, 2]]

[params]
m = [1.0, 2.0, 1.5]
k = 4
gamma = 2.0

[controller]
kind = "primal_dual"
alpha = 1.5

[output]
kind = "cost_plus_frequency"
sqrt_pi = 0.3

[run]
kind = "simulate"
seeds = 4
dt = 0.001
"#;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::from_toml(FULL).unwrap();
        assert_eq!(cfg.controller, ControllerConfig::PrimalDual { alpha: 1.5 });
        assert_eq!(cfg.output, OutputConfig::CostPlusFrequency { sqrt_pi: 0.3 });
        let exp = cfg.resolve().unwrap();
        assert_eq!(exp.graph.n(), 3);
        assert_eq!(exp.params.m[1], 2.0);
        assert_eq!(exp.params.k[2], 4.0);
        assert_eq!(exp.params.tau_mu, 6.0);
        let RunConfig::Simulate(sim) = &cfg.run else {
            panic!()
        };
        assert_eq!(sim.seeds, 4);
        assert_eq!(sim.horizon, None);
        assert_eq!(exp.model().unwrap().output_dim(), 6);
    }

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_config_uses_case_study() {
        let cfg = ExperimentConfig::from_toml(
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n",
        )
        .unwrap();
        assert_eq!(cfg.resolve().unwrap().params, GridParameters::case_study(5));
        assert_eq!(cfg.run, RunConfig::H2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for bad in [
            "[network]\nkind = \"path\"\nn = 5\nwieght = 1.0\n[controller]\nkind = \"broadcast\"\n",
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"dapi\"\ngamma = 1.0\nalpha = 2.0\n",
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n[params]\ntaumu = 1.0\n",
            "[network]\nkind = \"path\"\nn = 5\n[controller]\nkind = \"broadcast\"\n[extra]\n",
            "[network]\nkind = \"ring\"\nn = 5\n[controller]\nkind = \"broadcast\"\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn semantic_errors_are_reported() {
        let wrong_len = "[network]\nkind = \"path\"\nn = 3\n[params]\nm = [1.0, 2.0]\n[controller]\nkind = \"broadcast\"\n";
        assert!(matches!(
            ExperimentConfig::from_toml(wrong_len),
            Err(Error::Config(_))
        ));
        let disconnected = "[network]\nkind = \"edges\"\nn = 3\nedges = [[1, 2, 1.0]]\n[controller]\nkind = \"broadcast\"\n";
        assert!(matches!(
            ExperimentConfig::from_toml(disconnected),
            Err(Error::Disconnected { .. })
        ));
        let descending = "[network]\nkind = \"path\"\nn = 3\n[controller]\nkind = \"broadcast\"\n[run]\nkind = \"sweep\"\nvariable = \"gamma\"\ngrid = [2.0, 1.0]\n";
        assert!(ExperimentConfig::from_toml(descending).is_err());
        let fractional = "[network]\nkind = \"path\"\nn = 3\n[controller]\nkind = \"broadcast\"\n[run]\nkind = \"sweep\"\nvariable = \"n\"\ngrid = [2.5]\n";
        assert!(ExperimentConfig::from_toml(fractional).is_err());
        let negative_gain = "[network]\nkind = \"path\"\nn = 3\n[params]\ntau = -1.0\n[controller]\nkind = \"broadcast\"\n";
        assert!(ExperimentConfig::from_toml(negative_gain).is_err());
    }

    #[test]
    fn heterogeneity_is_seeded_and_bounded() {
        let mut a = GridParameters::case_study(5);
        let mut b = GridParameters::case_study(5);
        let h = Heterogeneity {
            seed: 3,
            spread: 0.5,
        };
        h.apply(&mut a).unwrap();
        h.apply(&mut b).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_uniform());
        assert!(a.m.iter().all(|v| (0.5..=1.5).contains(v)));
        assert!(a.k.iter().all(|v| (2.0..=6.0).contains(v)));
        assert_eq!(a.b, GridParameters::case_study(5).b);
        assert!(Heterogeneity {
            seed: 0,
            spread: 1.0
        }
        .apply(&mut b)
        .is_err());
    }
}
