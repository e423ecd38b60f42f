//! Physics-informed loss assembly on the gradient tape.
//!
//! The total loss is
//! `L = lambda_res L_res + lambda_data (lambda_init L_init + lambda_bc L_bc + lambda_meas L_meas)`
//! with every component a mean of squared misfits. Components whose effective
//! weight is zero are skipped entirely; a non-zero weight paired with an empty
//! point set is a configuration error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::network::{Architecture, NetworkParams};
use crate::problems::{ProblemSpec, TrainingSet};
use crate::scalar::Scalar;
use crate::tape::{Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub lambda_res: f64,
    pub lambda_data: f64,
    pub lambda_init: f64,
    pub lambda_bc: f64,
    pub lambda_meas: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_res: 1.0,
            lambda_data: 1.0,
            lambda_init: 1.0,
            lambda_bc: 1.0,
            lambda_meas: 0.0,
        }
    }
}

/// Unweighted per-component means of squares plus the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub res: f64,
    pub init: f64,
    pub bc: f64,
    pub meas: f64,
    pub total: f64,
}

/// The recorded loss graph: leaves to update, component nodes to read, and the
/// scalar total to differentiate.
#[derive(Clone)]
pub struct LossGraph<'t> {
    pub param_leaves: Vec<Var<'t>>,
    pub kappa_leaf: Option<Var<'t>>,
    pub res: Option<Var<'t>>,
    pub init: Option<Var<'t>>,
    pub bc: Option<Var<'t>>,
    pub meas: Option<Var<'t>>,
    pub total: Var<'t>,
}

impl<'t> LossGraph<'t> {
    pub fn breakdown(&self, tape: &Tape) -> LossBreakdown {
        let read = |v: Option<Var<'t>>| v.map_or(0.0, |v| tape.value(v));
        LossBreakdown {
            res: read(self.res),
            init: read(self.init),
            bc: read(self.bc),
            meas: read(self.meas),
            total: tape.value(self.total),
        }
    }
}

/// Combine per-component mean-square nodes into the weighted total.
pub fn assemble_total<'t>(
    tape: &'t Tape,
    weights: &LossWeights,
    res: Option<Var<'t>>,
    init: Option<Var<'t>>,
    bc: Option<Var<'t>>,
    meas: Option<Var<'t>>,
) -> Var<'t> {
    let mut terms: Vec<Var<'t>> = Vec::new();
    if let Some(r) = res {
        terms.push(r.scale(weights.lambda_res));
    }
    let data = [
        (init, weights.lambda_init),
        (bc, weights.lambda_bc),
        (meas, weights.lambda_meas),
    ];
    for (component, lambda) in data {
        if let Some(c) = component {
            terms.push(c.scale(weights.lambda_data * lambda));
        }
    }
    if terms.is_empty() {
        return tape.scalar(0.0);
    }
    Var::sum(&terms)
}

/// Record the full physics-informed loss for `problem` on `tape`.
///
/// `kappa0` seeds the trainable reaction coefficient and must be given exactly
/// when the problem is in inverse mode.
pub fn build_loss<'t>(
    tape: &'t Tape,
    arch: &Architecture,
    params: &NetworkParams,
    kappa0: Option<f64>,
    problem: &ProblemSpec,
    set: &TrainingSet,
    weights: &LossWeights,
) -> Result<LossGraph<'t>> {
    if problem.inverse_mode != kappa0.is_some() {
        return Err(Error::InvalidConfig(
            "kappa0 must be supplied exactly when the problem is in inverse mode".into(),
        ));
    }
    if arch.input_dim() != problem.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.input_dim(),
            got: arch.input_dim(),
        });
    }

    let param_leaves: Vec<Var<'t>> = params.flat.iter().map(|&p| tape.scalar(p)).collect();
    let kappa_leaf = kappa0.map(|k| tape.scalar(k));

    let check = |name: &'static str, weight: f64, len: usize| -> Result<bool> {
        if weight == 0.0 {
            return Ok(false);
        }
        if len == 0 {
            return Err(Error::EmptyPointSet {
                component: name,
                weight,
            });
        }
        Ok(true)
    };

    let axes = problem.input_dim();
    let batch_inputs = |points: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut cols = vec![Vec::with_capacity(points.len()); axes];
        for p in points {
            for (col, &x) in cols.iter_mut().zip(p) {
                col.push(x);
            }
        }
        cols
    };

    let res = if check("residual", weights.lambda_res, set.res_points.len())? {
        let one = tape.scalar(1.0);
        let second: u8 = problem
            .second_order_axes()
            .iter()
            .fold(0, |m, a| m | (1 << a));
        let jets: Vec<Jet<Var<'t>>> = batch_inputs(&set.res_points)
            .into_iter()
            .enumerate()
            .map(|(axis, col)| {
                Jet::seed(tape.batch(col), one, axis, axes, second & (1 << axis) != 0)
            })
            .collect();
        let u = problem_forward(arch, &param_leaves, &jets)?;
        let f = tape.batch(set.res_source.clone());
        let r = problem.residual(&u, f, kappa_leaf)?;
        Some(r.mean_sq())
    } else {
        None
    };

    let data_component = |name: &'static str,
                          lambda: f64,
                          points: &[Vec<f64>],
                          targets: &[f64]|
     -> Result<Option<Var<'t>>> {
        if !check(name, weights.lambda_data * lambda, points.len())? {
            return Ok(None);
        }
        let jets: Vec<Jet<Var<'t>>> = batch_inputs(points)
            .into_iter()
            .map(|col| Jet::constant(tape.batch(col), 0))
            .collect();
        let u = problem_forward(arch, &param_leaves, &jets)?;
        let misfit = u.v - tape.batch(targets.to_vec());
        Ok(Some(misfit.mean_sq()))
    };

    // Steady problems have no initial-condition component at all.
    let init = if problem.has_initial_condition() {
        data_component(
            "initial",
            weights.lambda_init,
            &set.init_points,
            &set.init_targets,
        )?
    } else {
        None
    };
    let bc = data_component(
        "boundary",
        weights.lambda_bc,
        &set.bc_points,
        &set.bc_targets,
    )?;
    let meas = data_component(
        "measurement",
        weights.lambda_meas,
        &set.meas_points,
        &set.meas_targets,
    )?;

    let total = assemble_total(tape, weights, res, init, bc, meas);
    Ok(LossGraph {
        param_leaves,
        kappa_leaf,
        res,
        init,
        bc,
        meas,
        total,
    })
}

fn problem_forward<'t>(
    arch: &Architecture,
    params: &[Var<'t>],
    input: &[Jet<Var<'t>>],
) -> Result<Jet<Var<'t>>> {
    let mut out = arch.forward_jets(params, input)?;
    debug_assert_eq!(out.len(), 1);
    Ok(out.pop().unwrap())
}
