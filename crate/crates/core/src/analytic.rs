//! Closed-form squared H2 norms under uniform parameters and identical
//! costs. These serve both as fast evaluators and as independent checks on
//! the Lyapunov path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::h2::H2Result;
use crate::models::{check_assumptions, AnalyticFormula, Controller, GridParameters};

/// Per-mode decomposition of the distributed-averaging norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DapiModalTerms {
    pub z1: f64,
    pub z2: f64,
    /// `1 / (z2 lambda^2 + z1 lambda + 1)` per Laplacian eigenvalue.
    pub terms: Vec<f64>,
}

fn uniform(params: &GridParameters) -> Result<(f64, f64, f64, f64)> {
    params.uniform_values()
}

/// `b^2 / (2 tau_mu d)`, independent of network size.
pub fn broadcast_h2(params: &GridParameters) -> Result<f64> {
    let (_m, d, b, _k) = uniform(params)?;
    Ok(b * b / (2.0 * params.tau_mu * d))
}

/// `(b^2 / 2 tau_mu) n` for the feed-forward primal-dual cascade.
pub fn pd_h2_exact_alpha0(params: &GridParameters, n: usize) -> Result<f64> {
    let (_m, _d, b, _k) = uniform(params)?;
    Ok(b * b / (2.0 * params.tau_mu) * n as f64)
}

/// `(b^2 / 2 tau_mu) n + b^2 alpha n / (2 m)`; tight at `alpha = 0`.
pub fn pd_h2_upper_bound(params: &GridParameters, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let (m, _d, b, _k) = uniform(params)?;
    Ok(pd_h2_exact_alpha0(params, n)? + b * b * alpha * n as f64 / (2.0 * m))
}

/// Eigenvalues within `ZERO_MODE_TOL` of zero are the rotation mode and are
/// snapped to exactly zero.
const ZERO_MODE_TOL: f64 = 1e-10;

fn clean_spectrum(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = eigenvalues.iter().find(|&&l| l < -ZERO_MODE_TOL) {
        return Err(Error::InvalidParameter(format!(
            "negative Laplacian eigenvalue {bad}"
        )));
    }
    if eigenvalues.is_empty() {
        return Err(Error::InvalidSize("empty spectrum".into()));
    }
    Ok(eigenvalues
        .iter()
        .map(|&l| if l.abs() <= ZERO_MODE_TOL { 0.0 } else { l })
        .collect())
}

/// `z2 = m k gamma^2 / tau`, `z1 = m gamma / (d tau) + k d gamma + k tau`.
pub fn dapi_coefficients(params: &GridParameters) -> Result<(f64, f64)> {
    let (m, d, _b, k) = uniform(params)?;
    let (tau, gamma) = (params.tau, params.gamma);
    let z2 = m * k * gamma * gamma / tau;
    let z1 = m * gamma / (d * tau) + k * d * gamma + k * tau;
    Ok((z1, z2))
}

/// `(b^2 / 2 tau d) sum_i 1 / (z2 lambda_i^2 + z1 lambda_i + 1)` over the
/// grid Laplacian spectrum (the zero mode contributes exactly 1).
pub fn dapi_h2(params: &GridParameters, eigenvalues: &[f64]) -> Result<(f64, DapiModalTerms)> {
    let eigenvalues = clean_spectrum(eigenvalues)?;
    let (_m, d, b, _k) = uniform(params)?;
    let (z1, z2) = dapi_coefficients(params)?;
    let terms: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| 1.0 / (z2 * l * l + z1 * l + 1.0))
        .collect();
    let value = b * b / (2.0 * params.tau * d) * terms.iter().sum::<f64>();
    Ok((value, DapiModalTerms { z1, z2, terms }))
}

/// Vanishing-inertia limit: `(b^2 / 2 tau d) sum_i 1 / (1 + (k tau + k d gamma) lambda_i)`.
pub fn dapi_h2_overdamped(params: &GridParameters, eigenvalues: &[f64]) -> Result<f64> {
    let eigenvalues = clean_spectrum(eigenvalues)?;
    let (_m, d, b, k) = uniform(params)?;
    let slope = k * params.tau + k * d * params.gamma;
    let sum: f64 = eigenvalues.iter().map(|&l| 1.0 / (1.0 + slope * l)).sum();
    Ok(b * b / (2.0 * params.tau * d) * sum)
}

/// Infinite averaging gain: `b^2 / (2 tau d)`, the broadcast value at `tau_mu = tau`.
pub fn dapi_h2_highgain(params: &GridParameters) -> Result<f64> {
    let (_m, d, b, _k) = uniform(params)?;
    Ok(b * b / (2.0 * params.tau * d))
}

/// Closed form matching `controller` for the cost output, if the
/// assumptions permit one: exact for broadcast, primal-dual at `alpha = 0`
/// and distributed averaging, an upper bound for primal-dual at
/// `alpha > 0`.
pub fn closed_form(
    controller: Controller,
    g: &NetworkGraph,
    params: &GridParameters,
) -> Result<(AnalyticFormula, H2Result)> {
    let params = controller.apply(params);
    let report = check_assumptions(&params, g);
    let formula = match controller {
        Controller::Swing => {
            return Err(Error::AssumptionViolated(
                "closed form not applicable: no secondary control".into(),
            ));
        }
        Controller::Broadcast => AnalyticFormula::BroadcastClosedForm,
        Controller::PrimalDual { alpha: 0.0 } => AnalyticFormula::PrimalDualAlpha0,
        Controller::PrimalDual { .. } => AnalyticFormula::PrimalDualBound,
        Controller::Dapi { .. } => AnalyticFormula::DapiModalSum,
    };
    if !report.permits(formula) {
        let reason = if !report.uniform {
            "non-uniform parameters"
        } else {
            "non-identical costs"
        };
        return Err(Error::AssumptionViolated(format!(
            "closed form not applicable: {reason}"
        )));
    }
    let n = g.n();
    let result = match formula {
        AnalyticFormula::BroadcastClosedForm => H2Result::analytic(broadcast_h2(&params)?),
        AnalyticFormula::PrimalDualAlpha0 => H2Result::analytic(pd_h2_exact_alpha0(&params, n)?),
        AnalyticFormula::PrimalDualBound => {
            H2Result::upper_bound(pd_h2_upper_bound(&params, n, params.alpha)?)
        }
        AnalyticFormula::DapiModalSum => H2Result::analytic(dapi_h2(&params, &g.spectrum())?.0),
    };
    Ok((formula, result))
}
