//! Closed-loop state-space models of the swing dynamics under each
//! secondary controller, in the normalized form `x' = A x + B eta`,
//! `y = C x`.

mod assembly;
mod params;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assembly::{
    assemble, assemble_broadcast, assemble_dapi, assemble_primal_dual, assemble_swing,
    augment_frequency_penalty, injection_forcing, reserves, AngleCoordinates, Controller,
};
pub use params::{
    check_assumptions, optimal_dispatch, AnalyticFormula, AssumptionReport, DeflationStrategy,
    GridParameters, OperatingPoint,
};

/// Assembled models must satisfy `max Re(eig(A)) < -HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerTag {
    Swing,
    Broadcast,
    PrimalDual,
    Dapi,
}

impl ControllerTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerTag::Swing => "swing",
            ControllerTag::Broadcast => "broadcast",
            ControllerTag::PrimalDual => "primal_dual",
            ControllerTag::Dapi => "dapi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Reduced phase-angle coordinates.
    PhaseDifference,
    Frequency,
    /// Broadcast scalar multiplier or per-bus primal-dual multipliers.
    Multiplier,
    EdgeMultiplier,
    Reserve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateBlock {
    pub kind: BlockKind,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// `K^{1/2} p`.
    Cost,
    Frequency,
    /// `sqrt(pi) * omega`.
    FrequencyPenalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputBlock {
    pub kind: OutputKind,
    pub offset: usize,
    pub len: usize,
}

/// Marginal directions removed from the physical state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deflation {
    pub strategy: DeflationStrategy,
    /// Uniform phase rotation plus, on cyclic graphs, the cycle-space
    /// components of edge variables.
    pub removed_directions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub blocks: Vec<StateBlock>,
    pub outputs: Vec<OutputBlock>,
    pub deflation: Option<Deflation>,
    pub controller: ControllerTag,
}

impl StateSpaceModel {
    /// Checks dimensions and that `blocks` / `outputs` tile the state and
    /// output vectors. Stability is not checked here.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        blocks: Vec<StateBlock>,
        outputs: Vec<OutputBlock>,
        controller: ControllerTag,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}",
                n,
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, A has {n}",
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C has {} columns, A has {n}",
                c.ncols()
            )));
        }
        let mut next = 0;
        for blk in &blocks {
            if blk.offset != next {
                return Err(Error::DimensionMismatch(
                    "state blocks must be contiguous".into(),
                ));
            }
            next += blk.len;
        }
        if next != n {
            return Err(Error::DimensionMismatch(format!(
                "state blocks cover {next} of {n} states"
            )));
        }
        let mut next = 0;
        for out in &outputs {
            if out.offset != next {
                return Err(Error::DimensionMismatch(
                    "output blocks must be contiguous".into(),
                ));
            }
            next += out.len;
        }
        if next != c.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "output blocks cover {next} of {} outputs",
                c.nrows()
            )));
        }
        Ok(StateSpaceModel {
            a,
            b,
            c,
            blocks,
            outputs,
            deflation: None,
            controller,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn block(&self, kind: BlockKind) -> Option<StateBlock> {
        self.blocks.iter().copied().find(|b| b.kind == kind)
    }

    pub fn eigenvalues(&self) -> Vec<nalgebra::Complex<f64>> {
        if self.state_dim() == 0 {
            return Vec::new();
        }
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    /// Largest real part of the spectrum of `A` (`-inf` for an empty state).
    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spectral radius of `A`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hurwitz(&self) -> bool {
        self.max_real_eigenvalue() < -HURWITZ_MARGIN
    }

    pub fn ensure_hurwitz(&self) -> Result<()> {
        let max_real = self.max_real_eigenvalue();
        if max_real < -HURWITZ_MARGIN {
            Ok(())
        } else {
            Err(Error::NotHurwitz { max_real })
        }
    }

    /// Same model with `B` replaced by `factor * B`.
    pub fn with_scaled_input(&self, factor: f64) -> Self {
        StateSpaceModel {
            b: &self.b * factor,
            ..self.clone()
        }
    }
}
