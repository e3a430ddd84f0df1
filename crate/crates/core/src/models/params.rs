use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetworkGraph;

const UNIFORM_RTOL: f64 = 1e-12;

/// Physical and controller constants. Per-bus quantities are vectors of
/// length `n`; gains are scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParameters {
    /// Inertia per bus.
    pub m: DVector<f64>,
    /// Damping / droop per bus.
    pub d: DVector<f64>,
    /// Disturbance gain per bus (`B1 = diag(b)`).
    pub b: DVector<f64>,
    /// Reserve cost coefficient per bus (`K = diag(k)`).
    pub k: DVector<f64>,
    /// Broadcast integrator gain, also the primal-dual `mu` gain.
    pub tau_mu: f64,
    /// Primal-dual edge-multiplier gain.
    pub tau_nu: f64,
    /// Distributed averaging integral gain.
    pub tau: f64,
    /// Communication Laplacian scale, `L_c = gamma * L`.
    pub gamma: f64,
    /// Frequency feedback gain of the primal-dual controller.
    pub alpha: f64,
    /// Convex averaging coefficients of the broadcast controller.
    pub r: DVector<f64>,
}

impl GridParameters {
    /// Uniform physical parameters, unit gains, `alpha = 0`, `r = 1/n`.
    pub fn uniform(n: usize, m: f64, d: f64, b: f64, k: f64) -> Self {
        GridParameters {
            m: DVector::from_element(n, m),
            d: DVector::from_element(n, d),
            b: DVector::from_element(n, b),
            k: DVector::from_element(n, k),
            tau_mu: 1.0,
            tau_nu: 1.0,
            tau: 1.0,
            gamma: 1.0,
            alpha: 0.0,
            r: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    /// The five-bus case-study values: `m = d = b = 1`, `k = 4`,
    /// `tau_mu = tau_nu = tau = 6`, `gamma = 5`, `alpha = 0`.
    pub fn case_study(n: usize) -> Self {
        GridParameters {
            tau_mu: 6.0,
            tau_nu: 6.0,
            tau: 6.0,
            gamma: 5.0,
            ..Self::uniform(n, 1.0, 1.0, 1.0, 4.0)
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_gains(mut self, tau_mu: f64, tau_nu: f64, tau: f64) -> Self {
        self.tau_mu = tau_mu;
        self.tau_nu = tau_nu;
        self.tau = tau;
        self
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in [
            ("m", &self.m),
            ("d", &self.d),
            ("b", &self.b),
            ("k", &self.k),
            ("r", &self.r),
        ] {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has length {}, network has {n} buses",
                    v.len()
                )));
            }
        }
        for (name, v) in [
            ("m", &self.m),
            ("d", &self.d),
            ("b", &self.b),
            ("k", &self.k),
        ] {
            if let Some(x) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} entries must be positive, got {x}"
                )));
            }
        }
        for (name, x) in [
            ("tau_mu", self.tau_mu),
            ("tau_nu", self.tau_nu),
            ("tau", self.tau),
        ] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {x}"
                )));
            }
        }
        for (name, x) in [("gamma", self.gamma), ("alpha", self.alpha)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {x}"
                )));
            }
        }
        if self.r.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "averaging coefficients r must be nonnegative".into(),
            ));
        }
        let sum = self.r.sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "averaging coefficients r sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    /// Constant `m`, `d`, `b`, `k` and `r = (1/n) 1`.
    pub fn is_uniform(&self) -> bool {
        let n = self.n();
        n > 0
            && [&self.m, &self.d, &self.b, &self.k]
                .iter()
                .all(|v| is_constant(v))
            && self.r.iter().all(|x| (x - 1.0 / n as f64).abs() <= 1e-12)
    }

    pub fn has_identical_costs(&self) -> bool {
        is_constant(&self.k)
    }

    /// Scalar view `(m, d, b, k)` when the parameters are uniform.
    pub fn uniform_values(&self) -> Result<(f64, f64, f64, f64)> {
        if !self.is_uniform() {
            return Err(Error::AssumptionViolated(
                "uniform parameters required (constant m, d, b, k and r = 1/n)".into(),
            ));
        }
        Ok((self.m[0], self.d[0], self.b[0], self.k[0]))
    }
}

fn is_constant(v: &DVector<f64>) -> bool {
    match v.iter().next() {
        None => true,
        Some(&first) => v
            .iter()
            .all(|x| (x - first).abs() <= UNIFORM_RTOL * first.abs().max(1.0)),
    }
}

/// How the marginal phase-rotation mode is removed from the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflationStrategy {
    /// `phi = E^T theta` on the (spanning) tree itself.
    TreeCoordinates,
    /// `phi = Lambda_+^{1/2} O_+^T theta` from the nonzero Laplacian eigenpairs.
    Eigenbasis,
}

impl DeflationStrategy {
    pub fn for_graph(g: &NetworkGraph) -> Self {
        if g.is_acyclic() {
            DeflationStrategy::TreeCoordinates
        } else {
            DeflationStrategy::Eigenbasis
        }
    }
}

/// Closed-form results that the analytic module can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticFormula {
    BroadcastClosedForm,
    PrimalDualAlpha0,
    PrimalDualBound,
    DapiModalSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub uniform: bool,
    pub acyclic: bool,
    pub identical_costs: bool,
    pub deflation: DeflationStrategy,
    pub valid_formulas: Vec<AnalyticFormula>,
}

impl AssumptionReport {
    pub fn permits(&self, formula: AnalyticFormula) -> bool {
        self.valid_formulas.contains(&formula)
    }
}

/// Report-only check of uniform parameters, communication structure and
/// identical costs. The numerical path is never gated by this.
pub fn check_assumptions(params: &GridParameters, g: &NetworkGraph) -> AssumptionReport {
    let uniform = params.n() == g.n() && params.is_uniform();
    let identical_costs = params.has_identical_costs();
    let valid_formulas = if uniform && identical_costs {
        vec![
            AnalyticFormula::BroadcastClosedForm,
            AnalyticFormula::PrimalDualAlpha0,
            AnalyticFormula::PrimalDualBound,
            AnalyticFormula::DapiModalSum,
        ]
    } else {
        Vec::new()
    };
    AssumptionReport {
        uniform,
        acyclic: g.is_acyclic(),
        identical_costs,
        deflation: DeflationStrategy::for_graph(g),
        valid_formulas,
    }
}

/// Economic-dispatch optimum and the pre-secondary frequency offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub p_star: DVector<f64>,
    pub p_opt: DVector<f64>,
    pub theta_opt: DVector<f64>,
    pub omega_ss: f64,
}

impl OperatingPoint {
    /// `|1^T (P* + p_opt)|`.
    pub fn balance_residual(&self) -> f64 {
        (&self.p_star + &self.p_opt).sum().abs()
    }

    /// Spread of the marginal costs `k_i p_i`.
    pub fn marginal_cost_spread(&self, k: &DVector<f64>) -> f64 {
        let mc = k.component_mul(&self.p_opt);
        mc.max() - mc.min()
    }
}

/// Optimal reserves `p_opt = -(1^T P* / 1^T K^-1 1) K^-1 1`, the matching
/// angles `theta_opt = L^+ (P* + p_opt)` and `omega_ss = sum P* / sum d`.
pub fn optimal_dispatch(
    p_star: &DVector<f64>,
    params: &GridParameters,
    g: &NetworkGraph,
) -> Result<OperatingPoint> {
    let n = g.n();
    if p_star.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "P* has length {}, network has {n} buses",
            p_star.len()
        )));
    }
    params.validate(n)?;
    let k_inv = params.k.map(|k| 1.0 / k);
    let total = p_star.sum();
    let p_opt = -(total / k_inv.sum()) * &k_inv;
    let residual_injection = p_star + &p_opt;
    // For v orthogonal to 1, (L + 11^T/n)^{-1} v = L^+ v.
    let shifted = g.laplacian() + DMatrix::from_element(n, n, 1.0 / n as f64);
    let theta_opt = shifted
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("Laplacian shift is not positive definite".into()))?
        .solve(&residual_injection);
    Ok(OperatingPoint {
        p_star: p_star.clone(),
        p_opt,
        theta_opt,
        omega_ss: total / params.d.sum(),
    })
}
