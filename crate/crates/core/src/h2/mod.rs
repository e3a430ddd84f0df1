//! Squared H2 norms through the observability Gramian, plus verification
//! of the closed-form and generalized Gramians of the broadcast and
//! primal-dual loops.

mod lyapunov;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::models::{BlockKind, ControllerTag, GridParameters, StateSpaceModel};

pub use lyapunov::{balance, lyapunov_residual, max_abs, solve_lyapunov, LYAPUNOV_RTOL};

/// Tolerance on the largest eigenvalue of the generalized-Gramian inequality.
pub const LMI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Method {
    Lyapunov,
    Analytic,
    MonteCarlo,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Diagnostics {
    /// `|X A + A^T X + C^T C|_max` in the model's own coordinates.
    pub residual: f64,
    /// `residual / |C^T C|_max`.
    pub relative_residual: f64,
    pub max_real_eigenvalue: f64,
    /// `max |eig(A)| / min |Re eig(A)|`.
    pub stiffness: f64,
    pub gramian_min_eigenvalue: f64,
    pub gramian_max_eigenvalue: f64,
    /// Gramian numerically positive definite, i.e. `(C, A)` observable.
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Result {
    /// Squared H2 norm.
    pub value: f64,
    pub method: H2Method,
    pub diagnostics: Option<H2Diagnostics>,
}

impl H2Result {
    pub fn analytic(value: f64) -> Self {
        H2Result {
            value,
            method: H2Method::Analytic,
            diagnostics: None,
        }
    }

    pub fn upper_bound(value: f64) -> Self {
        H2Result {
            value,
            method: H2Method::UpperBound,
            diagnostics: None,
        }
    }
}

/// `max |X A + A^T X + C^T C|`.
pub fn gramian_residual(x: &DMatrix<f64>, a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || x.shape() != (n, n) || c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "X {:?}, A {:?}, C {:?}",
            x.shape(),
            a.shape(),
            c.shape()
        )));
    }
    Ok(lyapunov_residual(x, a, &(c.transpose() * c)))
}

/// `Tr(B^T X B)`.
pub fn gramian_trace(x: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (b.transpose() * x * b).trace()
}

/// Observability Gramian of the model, solved after diagonal balancing of `A`
/// and mapped back to the model's coordinates.
pub fn observability_gramian(model: &StateSpaceModel) -> Result<DMatrix<f64>> {
    let (x_bal, d, _, _) = balanced_gramian(model)?;
    let d_inv = d.map(|v| 1.0 / v);
    Ok(DMatrix::from_diagonal(&d_inv) * x_bal * DMatrix::from_diagonal(&d_inv))
}

/// Balanced Gramian, balancing scaling, and the balanced `A` and `B`.
type Balanced = (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DMatrix<f64>);

fn balanced_gramian(model: &StateSpaceModel) -> Result<Balanced> {
    let d = balance(&model.a);
    let d_inv = d.map(|v| 1.0 / v);
    let a_bal = DMatrix::from_diagonal(&d_inv) * &model.a * DMatrix::from_diagonal(&d);
    let b_bal = DMatrix::from_diagonal(&d_inv) * &model.b;
    let c_bal = &model.c * DMatrix::from_diagonal(&d);
    let x_bal = solve_lyapunov(&a_bal, &(c_bal.transpose() * &c_bal))?;
    Ok((x_bal, d, a_bal, b_bal))
}

/// Squared H2 norm `Tr(B^T X B)` with `X A + A^T X + C^T C = 0`.
pub fn h2_norm(model: &StateSpaceModel) -> Result<H2Result> {
    if model.state_dim() == 0 {
        return Ok(H2Result {
            value: 0.0,
            method: H2Method::Lyapunov,
            diagnostics: None,
        });
    }
    let (x_bal, d, a_bal, b_bal) = balanced_gramian(model)?;
    let value = gramian_trace(&x_bal, &b_bal).max(0.0);

    let d_inv = d.map(|v| 1.0 / v);
    let x = DMatrix::from_diagonal(&d_inv) * &x_bal * DMatrix::from_diagonal(&d_inv);
    let q = model.c.transpose() * &model.c;
    let residual = lyapunov_residual(&x, &model.a, &q);
    let q_max = max_abs(&q);

    let eig = a_bal.complex_eigenvalues();
    let max_real = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_abs_real = eig.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gram_eig = x_bal.clone().symmetric_eigenvalues();
    let (gmin, gmax) = (gram_eig.min(), gram_eig.max());

    Ok(H2Result {
        value,
        method: H2Method::Lyapunov,
        diagnostics: Some(H2Diagnostics {
            residual,
            relative_residual: if q_max > 0.0 {
                residual / q_max
            } else {
                residual
            },
            max_real_eigenvalue: max_real,
            stiffness: radius / min_abs_real,
            gramian_min_eigenvalue: gmin,
            gramian_max_eigenvalue: gmax,
            observable: gmax > 0.0 && gmin > 1e-10 * gmax,
        }),
    })
}

/// Explicit observability Gramian of the broadcast loop under uniform
/// parameters, in the coordinates of [`crate::models::assemble_broadcast`]:
/// zero on the angle block, `z 11^T` on frequencies, `(m/2) 1` coupling to
/// the multiplier and `beta` on the multiplier, with
/// `z = m^2 / (2 n d tau_mu)` and `beta = n tau_mu (d/2 + z 1^T K^-1 1 / m)`.
pub fn closed_form_broadcast_gramian(
    g: &NetworkGraph,
    params: &GridParameters,
) -> Result<DMatrix<f64>> {
    let n = g.n();
    params.validate(n)?;
    let (m, d, _b, k) = params.uniform_values()?;
    let (z, beta) = broadcast_gramian_coefficients(n, m, d, k, params.tau_mu);
    let phi = n - 1;
    let dim = phi + n + 1;
    let mut x = DMatrix::zeros(dim, dim);
    x.view_mut((phi, phi), (n, n)).fill(z);
    for i in 0..n {
        x[(phi + i, dim - 1)] = m / 2.0;
        x[(dim - 1, phi + i)] = m / 2.0;
    }
    x[(dim - 1, dim - 1)] = beta;
    Ok(x)
}

/// `(z, beta)` of the explicit broadcast Gramian.
pub fn broadcast_gramian_coefficients(n: usize, m: f64, d: f64, k: f64, tau_mu: f64) -> (f64, f64) {
    let n = n as f64;
    let z = m * m / (2.0 * n * d * tau_mu);
    let beta = n * tau_mu * (d / 2.0 + z * (n / k) / m);
    (z, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedGramianCheck {
    /// Largest eigenvalue of `X A + A^T X + C^T C`; must be `<= 1e-9`.
    pub max_eigenvalue: f64,
    /// `Tr(B^T X B)`, an upper bound on the squared H2 norm.
    pub bound: f64,
}

/// Checks `X A + A^T X + C^T C <= 0` for
/// `X = 1/2 blkdiag(alpha I, alpha m I, tau_mu I, tau_nu I)` on the
/// primal-dual model and returns the resulting bound `Tr(B^T X B)`.
///
/// `params` must be the parameters the model was assembled with.
pub fn verify_generalized_gramian(
    model: &StateSpaceModel,
    params: &GridParameters,
) -> Result<GeneralizedGramianCheck> {
    if model.controller != ControllerTag::PrimalDual {
        return Err(Error::InvalidParameter(format!(
            "generalized Gramian applies to the primal-dual loop, got {}",
            model.controller.as_str()
        )));
    }
    let alpha = params.alpha;
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let (m, _d, _b, _k) = params.uniform_values()?;
    let mut diag = DVector::zeros(model.state_dim());
    for blk in &model.blocks {
        let value = match blk.kind {
            BlockKind::PhaseDifference => alpha,
            BlockKind::Frequency => alpha * m,
            BlockKind::Multiplier => params.tau_mu,
            BlockKind::EdgeMultiplier => params.tau_nu,
            BlockKind::Reserve => {
                return Err(Error::InvalidParameter("unexpected reserve block".into()))
            }
        };
        diag.rows_mut(blk.offset, blk.len).fill(0.5 * value);
    }
    let x = DMatrix::from_diagonal(&diag);
    let xa = &x * &model.a;
    let lmi = &xa + xa.transpose() + model.c.transpose() * &model.c;
    let max_eigenvalue = lmi.symmetric_eigenvalues().max();
    if max_eigenvalue > LMI_TOL {
        return Err(Error::LmiViolated { max_eigenvalue });
    }
    Ok(GeneralizedGramianCheck {
        max_eigenvalue,
        bound: gramian_trace(&x, &model.b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        assemble_broadcast, assemble_primal_dual, OutputBlock, OutputKind, StateBlock,
    };

    fn scalar_model(a: f64, b: f64, c: f64) -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
            vec![StateBlock {
                kind: BlockKind::Frequency,
                offset: 0,
                len: 1,
            }],
            vec![OutputBlock {
                kind: OutputKind::Frequency,
                offset: 0,
                len: 1,
            }],
            ControllerTag::Swing,
        )
        .unwrap()
    }

    #[test]
    fn scalar_ou_norm() {
        let r = h2_norm(&scalar_model(-1.0, 1.0, 1.0)).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!(r.method, H2Method::Lyapunov);
        let diag = r.diagnostics.unwrap();
        assert!(diag.observable);
        assert!(diag.residual < 1e-15);
    }

    #[test]
    fn gramian_residual_cases() {
        let a = DMatrix::from_element(2, 2, -1.0) - DMatrix::identity(2, 2);
        assert_eq!(
            gramian_residual(&DMatrix::zeros(2, 2), &a, &DMatrix::zeros(1, 2)).unwrap(),
            0.0
        );
        assert!(gramian_residual(&DMatrix::zeros(3, 3), &a, &DMatrix::zeros(1, 2)).is_err());

        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = solve_lyapunov(&a, &(c.transpose() * &c)).unwrap();
        assert!(gramian_residual(&x, &a, &c).unwrap() <= 1e-8);
        // a perturbation of one entry moves the residual linearly
        let r = |eps: f64| {
            let mut xp = x.clone();
            xp[(0, 1)] += eps;
            gramian_residual(&xp, &a, &c).unwrap()
        };
        let (r1, r2) = (r(1e-3), r(2e-3));
        assert!((r2 / r1 - 2.0).abs() < 1e-6, "{r1} {r2}");
    }

    #[test]
    fn broadcast_gramian_coefficients_case_study() {
        let (z, beta) = broadcast_gramian_coefficients(5, 1.0, 1.0, 4.0, 6.0);
        assert!((z - 1.0 / 60.0).abs() < 1e-15);
        assert!((beta - 15.625).abs() < 1e-12);
    }

    #[test]
    fn closed_form_gramian_solves_broadcast_lyapunov() {
        let g = NetworkGraph::build_path(5, 1.0).unwrap();
        let params = GridParameters::case_study(5);
        let model = assemble_broadcast(&g, &params).unwrap();
        let x = closed_form_broadcast_gramian(&g, &params).unwrap();
        assert!(gramian_residual(&x, &model.a, &model.c).unwrap() <= 1e-9);
        let tr = gramian_trace(&x, &model.b);
        assert!((tr - 1.0 / 12.0).abs() <= 1e-10 / 12.0);
        let numeric = observability_gramian(&model).unwrap();
        assert!((numeric - &x).amax() < 1e-10);
    }

    #[test]
    fn closed_form_gramian_requires_uniform_parameters() {
        let g = NetworkGraph::build_path(3, 1.0).unwrap();
        let mut params = GridParameters::case_study(3);
        params.d[2] = 2.0;
        assert!(matches!(
            closed_form_broadcast_gramian(&g, &params),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn generalized_gramian_bound_case_study() {
        let g = NetworkGraph::build_path(5, 1.0).unwrap();
        let params = GridParameters::case_study(5)
            .with_gamma(1.0)
            .with_alpha(5.0);
        let model = assemble_primal_dual(&g, &params).unwrap();
        let check = verify_generalized_gramian(&model, &params).unwrap();
        assert!(check.max_eigenvalue <= 1e-9);
        assert!((check.bound - (5.0 / 12.0 + 12.5)).abs() < 1e-12);
        let actual = h2_norm(&model).unwrap().value;
        assert!(actual <= check.bound);
    }

    #[test]
    fn generalized_gramian_single_bus() {
        let g = NetworkGraph::build_path(1, 1.0).unwrap();
        let params = GridParameters::uniform(1, 2.0, 1.0, 1.5, 3.0)
            .with_gains(4.0, 5.0, 1.0)
            .with_alpha(1.0);
        let model = assemble_primal_dual(&g, &params).unwrap();
        let check = verify_generalized_gramian(&model, &params).unwrap();
        let want = 1.5f64.powi(2) / 8.0 + 1.5f64.powi(2) / 4.0;
        assert!((check.bound - want).abs() < 1e-14);
    }

    #[test]
    fn generalized_gramian_rejects_wrong_inputs() {
        let g = NetworkGraph::build_path(3, 1.0).unwrap();
        let params = GridParameters::case_study(3);
        let pd = assemble_primal_dual(&g, &params).unwrap();
        assert!(verify_generalized_gramian(&pd, &params).is_err()); // alpha = 0
        let bc = assemble_broadcast(&g, &params).unwrap();
        assert!(verify_generalized_gramian(&bc, &params.clone().with_alpha(1.0)).is_err());
    }

    #[test]
    fn input_scaling_is_quadratic() {
        let g = NetworkGraph::build_path(4, 1.0).unwrap();
        let model = assemble_broadcast(&g, &GridParameters::case_study(4)).unwrap();
        let base = h2_norm(&model).unwrap().value;
        let scaled = h2_norm(&model.with_scaled_input(3.0)).unwrap().value;
        assert!((scaled - 9.0 * base).abs() <= 1e-12 * scaled);
    }
}
