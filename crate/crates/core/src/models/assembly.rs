use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::params::{DeflationStrategy, GridParameters};
use super::{
    BlockKind, ControllerTag, Deflation, OutputBlock, OutputKind, StateBlock, StateSpaceModel,
};
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;

/// Reduced angle coordinates `phi = factor^T theta` with
/// `factor * factor^T = L`, so that `L theta = factor * phi` and the
/// uniform rotation `theta = c 1` is invisible.
#[derive(Debug, Clone)]
pub struct AngleCoordinates {
    pub strategy: DeflationStrategy,
    /// `n x (n-1)` factor of the Laplacian.
    pub factor: DMatrix<f64>,
}

impl AngleCoordinates {
    pub fn for_graph(g: &NetworkGraph) -> Self {
        match DeflationStrategy::for_graph(g) {
            DeflationStrategy::TreeCoordinates => Self::tree(g),
            DeflationStrategy::Eigenbasis => Self::eigenbasis(g),
        }
    }

    /// Requires an acyclic graph; the weighted incidence matrix is already
    /// `n x (n-1)`.
    pub fn tree(g: &NetworkGraph) -> Self {
        AngleCoordinates {
            strategy: DeflationStrategy::TreeCoordinates,
            factor: g.incidence(),
        }
    }

    /// `O_+ Lambda_+^{1/2}` from the `n-1` nonzero Laplacian eigenpairs.
    pub fn eigenbasis(g: &NetworkGraph) -> Self {
        let n = g.n();
        let eig = SymmetricEigen::new(g.laplacian());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut factor = DMatrix::zeros(n, n.saturating_sub(1));
        for (col, &idx) in order.iter().skip(1).enumerate() {
            let scale = eig.eigenvalues[idx].max(0.0).sqrt();
            factor.set_column(col, &(eig.eigenvectors.column(idx) * scale));
        }
        AngleCoordinates {
            strategy: DeflationStrategy::Eigenbasis,
            factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.factor.ncols()
    }
}

/// Controller selection with its distinguishing gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Controller {
    Swing,
    Broadcast,
    PrimalDual { alpha: f64 },
    Dapi { gamma: f64 },
}

impl Controller {
    pub fn tag(&self) -> ControllerTag {
        match self {
            Controller::Swing => ControllerTag::Swing,
            Controller::Broadcast => ControllerTag::Broadcast,
            Controller::PrimalDual { .. } => ControllerTag::PrimalDual,
            Controller::Dapi { .. } => ControllerTag::Dapi,
        }
    }

    /// `params` with this controller's gain substituted in.
    pub fn apply(&self, params: &GridParameters) -> GridParameters {
        match *self {
            Controller::PrimalDual { alpha } => params.clone().with_alpha(alpha),
            Controller::Dapi { gamma } => params.clone().with_gamma(gamma),
            _ => params.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Controller::Swing => "swing".into(),
            Controller::Broadcast => "broadcast".into(),
            Controller::PrimalDual { alpha } => format!("primal_dual(alpha={alpha})"),
            Controller::Dapi { gamma } => format!("dapi(gamma={gamma})"),
        }
    }
}

pub fn assemble(
    controller: Controller,
    g: &NetworkGraph,
    params: &GridParameters,
) -> Result<StateSpaceModel> {
    let params = controller.apply(params);
    match controller {
        Controller::Swing => assemble_swing(g, &params),
        Controller::Broadcast => assemble_broadcast(g, &params),
        Controller::PrimalDual { .. } => assemble_primal_dual(g, &params),
        Controller::Dapi { .. } => assemble_dapi(g, &params),
    }
}

/// Incremental layout of a block state vector.
struct Layout {
    blocks: Vec<StateBlock>,
    dim: usize,
}

impl Layout {
    fn new() -> Self {
        Layout {
            blocks: Vec::new(),
            dim: 0,
        }
    }

    fn push(&mut self, kind: BlockKind, len: usize) -> usize {
        let offset = self.dim;
        self.blocks.push(StateBlock { kind, offset, len });
        self.dim += len;
        offset
    }
}

fn put(target: &mut DMatrix<f64>, row: usize, col: usize, block: &DMatrix<f64>) {
    target.view_mut((row, col), block.shape()).copy_from(block);
}

fn inv_diag(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&v.map(|x| 1.0 / x))
}

/// Common `(phi, omega)` rows of the swing dynamics:
/// `phi' = F^T omega`, `omega' = M^{-1}(-F phi - D omega + B1 eta)`.
struct SwingCore {
    n: usize,
    coords: AngleCoordinates,
    m_inv: DMatrix<f64>,
}

impl SwingCore {
    fn new(g: &NetworkGraph, params: &GridParameters) -> Result<Self> {
        params.validate(g.n())?;
        Ok(SwingCore {
            n: g.n(),
            coords: AngleCoordinates::for_graph(g),
            m_inv: inv_diag(&params.m),
        })
    }

    fn fill(
        &self,
        a: &mut DMatrix<f64>,
        b: &mut DMatrix<f64>,
        phi: usize,
        omega: usize,
        params: &GridParameters,
    ) {
        let f = &self.coords.factor;
        put(a, phi, omega, &f.transpose());
        put(a, omega, phi, &(-&self.m_inv * f));
        put(
            a,
            omega,
            omega,
            &(-&self.m_inv * DMatrix::from_diagonal(&params.d)),
        );
        put(
            b,
            omega,
            0,
            &(&self.m_inv * DMatrix::from_diagonal(&params.b)),
        );
    }

    fn deflation(&self, extra: usize) -> Deflation {
        Deflation {
            strategy: self.coords.strategy,
            removed_directions: 1 + extra,
        }
    }
}

fn finish(
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    layout: Layout,
    output: OutputKind,
    deflation: Deflation,
    tag: ControllerTag,
) -> Result<StateSpaceModel> {
    let outputs = vec![OutputBlock {
        kind: output,
        offset: 0,
        len: c.nrows(),
    }];
    let mut model = StateSpaceModel::new(a, b, c, layout.blocks, outputs, tag)?;
    model.deflation = Some(deflation);
    model.ensure_hurwitz()?;
    Ok(model)
}

/// Swing dynamics with `p = 0`; the output is the frequency vector.
pub fn assemble_swing(g: &NetworkGraph, params: &GridParameters) -> Result<StateSpaceModel> {
    let core = SwingCore::new(g, params)?;
    let n = core.n;
    let mut layout = Layout::new();
    let phi = layout.push(BlockKind::PhaseDifference, core.coords.dim());
    let omega = layout.push(BlockKind::Frequency, n);
    let mut a = DMatrix::zeros(layout.dim, layout.dim);
    let mut b = DMatrix::zeros(layout.dim, n);
    core.fill(&mut a, &mut b, phi, omega, params);
    let mut c = DMatrix::zeros(n, layout.dim);
    put(&mut c, 0, omega, &DMatrix::identity(n, n));
    finish(
        a,
        b,
        c,
        layout,
        OutputKind::Frequency,
        core.deflation(0),
        ControllerTag::Swing,
    )
}

/// Gather-and-broadcast controller: `tau_mu mu' = r^T omega`,
/// `p = -mu K^{-1} 1`, output `y = -K^{-1/2} 1 mu`.
pub fn assemble_broadcast(g: &NetworkGraph, params: &GridParameters) -> Result<StateSpaceModel> {
    let core = SwingCore::new(g, params)?;
    let n = core.n;
    let mut layout = Layout::new();
    let phi = layout.push(BlockKind::PhaseDifference, core.coords.dim());
    let omega = layout.push(BlockKind::Frequency, n);
    let mu = layout.push(BlockKind::Multiplier, 1);
    let mut a = DMatrix::zeros(layout.dim, layout.dim);
    let mut b = DMatrix::zeros(layout.dim, n);
    core.fill(&mut a, &mut b, phi, omega, params);

    let k_inv = params.k.map(|k| 1.0 / k);
    let drive = -(&core.m_inv * &k_inv);
    put(
        &mut a,
        omega,
        mu,
        &DMatrix::from_column_slice(n, 1, drive.as_slice()),
    );
    let avg = params.r.transpose() / params.tau_mu;
    put(
        &mut a,
        mu,
        omega,
        &DMatrix::from_row_slice(1, n, avg.as_slice()),
    );

    let mut c = DMatrix::zeros(n, layout.dim);
    for i in 0..n {
        c[(i, mu)] = -k_inv[i].sqrt();
    }
    finish(
        a,
        b,
        c,
        layout,
        OutputKind::Cost,
        core.deflation(0),
        ControllerTag::Broadcast,
    )
}

/// Primal-dual controller with frequency feedback:
/// `T_mu mu' = alpha K^{-1} omega - K^{-1} mu - E_c nu + B1 eta`,
/// `T_nu nu' = E_c^T mu`, `p = -K^{-1} mu`, output `y = -K^{-1/2} mu`,
/// with `E_c = sqrt(gamma) E`.
pub fn assemble_primal_dual(g: &NetworkGraph, params: &GridParameters) -> Result<StateSpaceModel> {
    let core = SwingCore::new(g, params)?;
    let n = core.n;
    let mut layout = Layout::new();
    let phi = layout.push(BlockKind::PhaseDifference, core.coords.dim());
    let omega = layout.push(BlockKind::Frequency, n);
    let mu = layout.push(BlockKind::Multiplier, n);
    let nu = layout.push(BlockKind::EdgeMultiplier, core.coords.dim());
    let mut a = DMatrix::zeros(layout.dim, layout.dim);
    let mut b = DMatrix::zeros(layout.dim, n);
    core.fill(&mut a, &mut b, phi, omega, params);

    let k_inv = inv_diag(&params.k);
    let e_c = &core.coords.factor * params.gamma.sqrt();
    put(&mut a, omega, mu, &(-&core.m_inv * &k_inv));
    put(
        &mut a,
        mu,
        omega,
        &(&k_inv * (params.alpha / params.tau_mu)),
    );
    put(&mut a, mu, mu, &(-&k_inv / params.tau_mu));
    put(&mut a, mu, nu, &(-&e_c / params.tau_mu));
    put(&mut a, nu, mu, &(e_c.transpose() / params.tau_nu));
    put(
        &mut b,
        mu,
        0,
        &(DMatrix::from_diagonal(&params.b) / params.tau_mu),
    );

    let mut c = DMatrix::zeros(n, layout.dim);
    for i in 0..n {
        c[(i, mu + i)] = -(1.0 / params.k[i]).sqrt();
    }
    let cycle_space = g.edge_count() + 1 - n;
    finish(
        a,
        b,
        c,
        layout,
        OutputKind::Cost,
        core.deflation(cycle_space),
        ControllerTag::PrimalDual,
    )
}

/// Distributed averaging PI controller:
/// `tau K p' = -omega - gamma L K p`, output `y = K^{1/2} p`.
pub fn assemble_dapi(g: &NetworkGraph, params: &GridParameters) -> Result<StateSpaceModel> {
    let core = SwingCore::new(g, params)?;
    let n = core.n;
    let mut layout = Layout::new();
    let phi = layout.push(BlockKind::PhaseDifference, core.coords.dim());
    let omega = layout.push(BlockKind::Frequency, n);
    let p = layout.push(BlockKind::Reserve, n);
    let mut a = DMatrix::zeros(layout.dim, layout.dim);
    let mut b = DMatrix::zeros(layout.dim, n);
    core.fill(&mut a, &mut b, phi, omega, params);

    let k = DMatrix::from_diagonal(&params.k);
    let tk_inv = inv_diag(&params.k) / params.tau;
    put(&mut a, omega, p, &core.m_inv);
    put(&mut a, p, omega, &(-&tk_inv));
    put(
        &mut a,
        p,
        p,
        &(-(&tk_inv * g.laplacian() * &k) * params.gamma),
    );

    let mut c = DMatrix::zeros(n, layout.dim);
    for i in 0..n {
        c[(i, p + i)] = params.k[i].sqrt();
    }
    finish(
        a,
        b,
        c,
        layout,
        OutputKind::Cost,
        core.deflation(0),
        ControllerTag::Dapi,
    )
}

/// Appends `sqrt(pi) * omega` to the output. `A` and `B` are untouched.
pub fn augment_frequency_penalty(model: &StateSpaceModel, pi: f64) -> Result<StateSpaceModel> {
    if !(pi >= 0.0) || !pi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency penalty must be nonnegative, got {pi}"
        )));
    }
    let omega = model
        .block(BlockKind::Frequency)
        .ok_or(Error::MissingBlock("frequency"))?;
    let rows = model.output_dim();
    let mut c = model.c.clone().resize_vertically(rows + omega.len, 0.0);
    let weight = pi.sqrt();
    for i in 0..omega.len {
        c[(rows + i, omega.offset + i)] = weight;
    }
    let mut outputs = model.outputs.clone();
    outputs.push(OutputBlock {
        kind: OutputKind::FrequencyPenalty,
        offset: rows,
        len: omega.len,
    });
    Ok(StateSpaceModel {
        c,
        outputs,
        ..model.clone()
    })
}

/// Constant right-hand side produced by nominal injections `P*`:
/// `M^{-1} P*` on the frequency rows and, for the primal-dual loop, the
/// feed-forward term `P* / tau_mu` on the multiplier rows.
pub fn injection_forcing(
    model: &StateSpaceModel,
    params: &GridParameters,
    p_star: &DVector<f64>,
) -> Result<DVector<f64>> {
    let omega = model
        .block(BlockKind::Frequency)
        .ok_or(Error::MissingBlock("frequency"))?;
    if p_star.len() != omega.len || params.m.len() != omega.len {
        return Err(Error::DimensionMismatch(format!(
            "P* has length {}, model has {} buses",
            p_star.len(),
            omega.len
        )));
    }
    let mut f = DVector::zeros(model.state_dim());
    f.rows_mut(omega.offset, omega.len)
        .copy_from(&p_star.component_div(&params.m));
    if model.controller == ControllerTag::PrimalDual {
        let mu = model
            .block(BlockKind::Multiplier)
            .ok_or(Error::MissingBlock("multiplier"))?;
        f.rows_mut(mu.offset, mu.len)
            .copy_from(&(p_star / params.tau_mu));
    }
    Ok(f)
}

/// Secondary reserve inputs `p` implied by a closed-loop state.
pub fn reserves(
    model: &StateSpaceModel,
    params: &GridParameters,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let k_inv = params.k.map(|k| 1.0 / k);
    match model.controller {
        ControllerTag::Swing => Ok(DVector::zeros(params.k.len())),
        ControllerTag::Broadcast => {
            let mu = model
                .block(BlockKind::Multiplier)
                .ok_or(Error::MissingBlock("multiplier"))?;
            Ok(-x[mu.offset] * k_inv)
        }
        ControllerTag::PrimalDual => {
            let mu = model
                .block(BlockKind::Multiplier)
                .ok_or(Error::MissingBlock("multiplier"))?;
            Ok(-x.rows(mu.offset, mu.len).component_mul(&k_inv))
        }
        ControllerTag::Dapi => {
            let p = model
                .block(BlockKind::Reserve)
                .ok_or(Error::MissingBlock("reserve"))?;
            Ok(x.rows(p.offset, p.len).into_owned())
        }
    }
}
