//! Stochastic time-domain validation: integrate `dx = A x dt + B dW` and
//! estimate the stationary output power `lim E[y^T y]`, which equals the
//! squared H2 norm.
//!
//! Noise streams: replicate `i` of master seed `s` draws from ChaCha8 keyed
//! by `seed_from_u64(s)` with stream id `i`, and uses the ziggurat standard
//! normal sampler. Traces are reproducible given `(seed, dt, horizon)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::models::{ControllerTag, StateSpaceModel};

/// Euler-Maruyama requires `max|eig(A)| * dt` below this.
pub const EM_STABILITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `x + dt A x + sqrt(dt) B w`.
    #[default]
    EulerMaruyama,
    /// Exact Gaussian transition `e^{A dt} x + chol(Q_dt) w`; unbiased for
    /// any step.
    ExactGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub outputs: Vec<Vec<f64>>,
    pub states: Option<Vec<Vec<f64>>>,
    pub seed: u64,
    pub dt: f64,
    pub controller: ControllerTag,
}

impl SimulationTrace {
    /// `y^T y` per sample.
    pub fn output_power(&self) -> Vec<f64> {
        self.outputs
            .iter()
            .map(|y| y.iter().map(|v| v * v).sum())
            .collect()
    }

    /// Time average of `y^T y` over samples with `t >= burn_in`.
    pub fn mean_output_power(&self, burn_in: f64) -> f64 {
        let power = self.output_power();
        let kept: Vec<f64> = self
            .times
            .iter()
            .zip(power)
            .filter(|(t, _)| **t >= burn_in)
            .map(|(_, p)| p)
            .collect();
        kept.iter().sum::<f64>() / kept.len().max(1) as f64
    }
}

/// Precomputed one-step transition `x' = F x + G w`.
struct Stepper {
    f: DMatrix<f64>,
    g: DMatrix<f64>,
}

impl Stepper {
    fn new(model: &StateSpaceModel, dt: f64, integrator: Integrator) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {dt}"
            )));
        }
        let n = model.state_dim();
        match integrator {
            Integrator::EulerMaruyama => {
                let product = model.spectral_radius() * dt;
                if product >= EM_STABILITY_LIMIT {
                    return Err(Error::StepSize { dt, product });
                }
                Ok(Stepper {
                    f: DMatrix::identity(n, n) + &model.a * dt,
                    g: &model.b * dt.sqrt(),
                })
            }
            Integrator::ExactGaussian => {
                let (f, q) = exact_discretization(&model.a, &model.b, dt);
                Ok(Stepper {
                    f,
                    g: psd_factor(&q),
                })
            }
        }
    }
}

/// Van Loan: `exp([[-A, BB^T], [0, A^T]] dt) = [[*, G12], [0, F22]]` gives
/// `Phi = F22^T` and `Q = Phi G12`.
fn exact_discretization(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    dt: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-a * dt));
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(b * b.transpose() * dt));
    block
        .view_mut((n, n), (n, n))
        .copy_from(&(a.transpose() * dt));
    let e = block.exp();
    let phi = e.view((n, n), (n, n)).transpose();
    let q = &phi * e.view((0, n), (n, n));
    let q = (&q + q.transpose()) * 0.5;
    (phi, q)
}

/// `G` with `G G^T = Q` for symmetric PSD `Q` (negative roundoff clipped).
fn psd_factor(q: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = q.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// Runs the recursion from `x = 0`, calling `visit(k, x)` for `k = 0..=steps`.
fn run<Fv: FnMut(usize, &DVector<f64>)>(
    stepper: &Stepper,
    steps: usize,
    rng: &mut ChaCha8Rng,
    mut visit: Fv,
) -> Result<()> {
    let n = stepper.f.nrows();
    let inputs = stepper.g.ncols();
    let mut x = DVector::zeros(n);
    let mut next = DVector::zeros(n);
    let mut w = DVector::zeros(inputs);
    visit(0, &x);
    for k in 1..=steps {
        for wi in w.iter_mut() {
            *wi = StandardNormal.sample(rng);
        }
        next.gemv(1.0, &stepper.f, &x, 0.0);
        next.gemv(1.0, &stepper.g, &w, 1.0);
        std::mem::swap(&mut x, &mut next);
        if k % 1024 == 0 && !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: k });
        }
        visit(k, &x);
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence { step: steps });
    }
    Ok(())
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok((horizon / dt).round().max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub integrator: Integrator,
    /// Keep every `record_every`-th sample.
    pub record_every: usize,
    pub record_states: bool,
    /// Replicate index selecting the noise stream of `seed`.
    pub replicate: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            integrator: Integrator::EulerMaruyama,
            record_every: 1,
            record_states: false,
            replicate: 0,
        }
    }
}

/// Euler-Maruyama trace from `x = 0`, recording every step.
pub fn simulate(
    model: &StateSpaceModel,
    seed: u64,
    dt: f64,
    horizon: f64,
) -> Result<SimulationTrace> {
    simulate_with(model, seed, dt, horizon, &SimOptions::default())
}

pub fn simulate_with(
    model: &StateSpaceModel,
    seed: u64,
    dt: f64,
    horizon: f64,
    options: &SimOptions,
) -> Result<SimulationTrace> {
    let stepper = Stepper::new(model, dt, options.integrator)?;
    let steps = step_count(dt, horizon)?;
    let every = options.record_every.max(1);
    let mut rng = replicate_rng(seed, options.replicate);
    let mut trace = SimulationTrace {
        times: Vec::new(),
        outputs: Vec::new(),
        states: options.record_states.then(Vec::new),
        seed,
        dt,
        controller: model.controller,
    };
    let mut y = DVector::zeros(model.output_dim());
    run(&stepper, steps, &mut rng, |k, x| {
        if k % every == 0 {
            y.gemv(1.0, &model.c, x, 0.0);
            trace.times.push(k as f64 * dt);
            trace.outputs.push(y.iter().copied().collect());
            if let Some(states) = trace.states.as_mut() {
                states.push(x.iter().copied().collect());
            }
        }
    })?;
    Ok(trace)
}

/// Settings of the replicate-based variance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub master_seed: u64,
    pub n_seeds: usize,
    pub dt: f64,
    pub horizon: f64,
    pub burn_in: f64,
    pub integrator: Integrator,
}

impl EstimatorConfig {
    /// 20 replicates, `dt = 1e-3 min(1, 1/max|eig(A)|)`,
    /// `horizon = 500 / |max Re eig(A)|`, burn-in 20% of the horizon.
    pub fn defaults_for(model: &StateSpaceModel, master_seed: u64) -> Self {
        let radius = model.spectral_radius();
        let slowest = model.max_real_eigenvalue().abs();
        let horizon = 500.0 / slowest;
        EstimatorConfig {
            master_seed,
            n_seeds: 20,
            dt: 1e-3 * (1.0f64).min(1.0 / radius),
            horizon,
            burn_in: 0.2 * horizon,
            integrator: Integrator::EulerMaruyama,
        }
    }

    /// Default horizon and burn-in with exact transitions sampled every
    /// `min(1/max|eig(A)|, 0.1/|max Re eig(A)|)`.
    pub fn exact_defaults_for(model: &StateSpaceModel, master_seed: u64) -> Self {
        let base = Self::defaults_for(model, master_seed);
        let radius = model.spectral_radius();
        let slowest = model.max_real_eigenvalue().abs();
        EstimatorConfig {
            dt: (1.0 / radius).min(0.1 / slowest),
            integrator: Integrator::ExactGaussian,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean_sq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_seeds: usize,
    pub burn_in: f64,
    pub master_seed: u64,
    pub dt: f64,
    pub horizon: f64,
    pub integrator: Integrator,
    /// Time average of `y^T y` after burn-in, one per replicate.
    pub per_seed: Vec<f64>,
}

impl VarianceEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Post-burn-in time average of `y^T y` for one replicate.
pub fn replicate_mean_power(
    model: &StateSpaceModel,
    config: &EstimatorConfig,
    replicate: u64,
) -> Result<f64> {
    let stepper = Stepper::new(model, config.dt, config.integrator)?;
    replicate_with(&stepper, model, config, replicate)
}

fn replicate_with(
    stepper: &Stepper,
    model: &StateSpaceModel,
    config: &EstimatorConfig,
    replicate: u64,
) -> Result<f64> {
    let steps = step_count(config.dt, config.horizon)?;
    let first = (config.burn_in / config.dt).ceil() as usize;
    let mut rng = replicate_rng(config.master_seed, replicate);
    let mut y = DVector::zeros(model.output_dim());
    let mut sum = 0.0;
    let mut count = 0usize;
    run(stepper, steps, &mut rng, |k, x| {
        if k >= first {
            y.gemv(1.0, &model.c, x, 0.0);
            sum += y.norm_squared();
            count += 1;
        }
    })?;
    Ok(sum / count.max(1) as f64)
}

/// Mean and 95% t-interval of per-replicate time averages of `y^T y`.
/// Replicates run in parallel; the result is independent of scheduling.
pub fn estimate_steady_state_variance(
    model: &StateSpaceModel,
    config: &EstimatorConfig,
) -> Result<VarianceEstimate> {
    if config.n_seeds < 2 {
        return Err(Error::InvalidParameter(
            "at least two replicates are needed".into(),
        ));
    }
    if !(config.burn_in >= 0.0 && config.burn_in < config.horizon) {
        return Err(Error::InvalidParameter(format!(
            "burn-in {} must lie in [0, horizon = {})",
            config.burn_in, config.horizon
        )));
    }
    let stepper = Stepper::new(model, config.dt, config.integrator)?;
    let per_seed = (0..config.n_seeds as u64)
        .into_par_iter()
        .map(|i| replicate_with(&stepper, model, config, i))
        .collect::<Result<Vec<f64>>>()?;
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().sum::<f64>() / n;
    let var = per_seed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n).sqrt();
    Ok(VarianceEstimate {
        mean_sq: mean,
        ci_low: (mean - half).max(0.0),
        ci_high: mean + half,
        n_seeds: config.n_seeds,
        burn_in: config.burn_in,
        master_seed: config.master_seed,
        dt: config.dt,
        horizon: config.horizon,
        integrator: config.integrator,
        per_seed,
    })
}

/// Deterministic response to a constant forcing, `x' = A x + f`, by RK4.
pub fn integrate_forced(
    model: &StateSpaceModel,
    forcing: &DVector<f64>,
    x0: &DVector<f64>,
    dt: f64,
    horizon: f64,
) -> Result<DVector<f64>> {
    if forcing.len() != model.state_dim() || x0.len() != model.state_dim() {
        return Err(Error::DimensionMismatch(
            "forcing and initial state must match the state dimension".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let steps = step_count(dt, horizon)?;
    let rhs = |x: &DVector<f64>| &model.a * x + forcing;
    let mut x = x0.clone();
    for _ in 0..steps {
        let k1 = rhs(&x);
        let k2 = rhs(&(&x + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&x + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence { step: steps });
    }
    Ok(x)
}
