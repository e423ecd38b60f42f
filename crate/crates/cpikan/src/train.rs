//! Full-batch Adam training loop, error metrics, evaluation grids, and
//! checkpoints.
//!
//! The loss graph is recorded once; every epoch overwrites the parameter
//! leaves, re-runs the forward sweep, and backpropagates, so the training loop
//! allocates nothing per step and repeated runs are bit-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{build_loss, LossBreakdown, LossWeights};
use crate::network::{Architecture, NetworkParams};
use crate::problems::{ProblemKind, ProblemSpec, TrainingSet};
use crate::reference::Grid1d;
use crate::tape::Tape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Loss is recorded every `log_interval` epochs (pre-update) plus once
    /// after the final update.
    pub log_interval: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 10_000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            log_interval: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub params: NetworkParams,
    pub kappa: Option<f64>,
    pub history: Vec<TrainingRecord>,
}

/// Loss magnitude beyond which training is treated as diverged.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// Train `arch` on `problem` with full-batch Adam. `kappa0` seeds the
/// trainable reaction coefficient in inverse mode.
pub fn train(
    arch: &Architecture,
    params0: &NetworkParams,
    kappa0: Option<f64>,
    problem: &ProblemSpec,
    set: &TrainingSet,
    weights: &LossWeights,
    config: &TrainingConfig,
) -> Result<TrainingOutcome> {
    let tape = Tape::new();
    let graph = build_loss(&tape, arch, params0, kappa0, problem, set, weights)?;

    let mut leaves = graph.param_leaves.clone();
    if let Some(k) = graph.kappa_leaf {
        leaves.push(k);
    }
    let n = leaves.len();
    let mut theta: Vec<f64> = params0.flat.clone();
    theta.extend(kappa0);
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];

    let mut history = Vec::new();
    let interval = config.log_interval.max(1);

    for epoch in 0..config.epochs {
        if epoch > 0 {
            tape.forward();
        }
        let total = tape.value(graph.total);
        if !total.is_finite() || total > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { epoch, loss: total });
        }
        if epoch % interval == 0 {
            history.push(TrainingRecord {
                epoch,
                loss: graph.breakdown(&tape),
                kappa: graph.kappa_leaf.map(|k| tape.value(k)),
            });
        }

        tape.backward(graph.total);
        let t = (epoch + 1) as f64;
        let bc1 = 1.0 - config.beta1.powf(t);
        let bc2 = 1.0 - config.beta2.powf(t);
        for i in 0..n {
            let g = tape.grad(leaves[i]);
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            let step = config.learning_rate * (m[i] / bc1) / ((v[i] / bc2).sqrt() + config.epsilon);
            theta[i] -= step;
            tape.set_scalar(leaves[i], theta[i]);
        }
    }

    if config.epochs > 0 {
        tape.forward();
    }
    let total = tape.value(graph.total);
    if !total.is_finite() || total > DIVERGENCE_LIMIT {
        return Err(Error::Diverged {
            epoch: config.epochs,
            loss: total,
        });
    }
    history.push(TrainingRecord {
        epoch: config.epochs,
        loss: graph.breakdown(&tape),
        kappa: graph.kappa_leaf.map(|k| tape.value(k)),
    });

    let kappa = graph.kappa_leaf.map(|_| theta[n - 1]);
    let params = NetworkParams::from_flat(arch, theta[..params0.flat.len()].to_vec())?;
    Ok(TrainingOutcome {
        params,
        kappa,
        history,
    })
}

/// Relative L2 error `||pred - truth|| / ||truth||`.
pub fn relative_l2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    assert_eq!(pred.len(), truth.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        num += (p - t) * (p - t);
        den += t * t;
    }
    if den == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    Ok((num / den).sqrt())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Uniform evaluation grid in physical coordinates: `256 x 100` space-time
/// nodes for the 1-D dynamic problems, `128 x 128` for Helmholtz, and 512
/// nodes for the steady 1-D problem.
pub fn evaluation_grid(problem: &ProblemSpec) -> Vec<Vec<f64>> {
    match problem.kind {
        ProblemKind::Diffusion | ProblemKind::AllenCahn => {
            let m = problem.domain.half_width(0);
            let t_final = problem.domain.time_span().unwrap();
            let xs = linspace(-m, m, 256);
            let ts = linspace(0.0, t_final, 100);
            let mut out = Vec::with_capacity(xs.len() * ts.len());
            for &t in &ts {
                for &x in &xs {
                    out.push(vec![x, t]);
                }
            }
            out
        }
        ProblemKind::Helmholtz2d => {
            let mx = problem.domain.half_width(0);
            let my = problem.domain.half_width(1);
            let xs = linspace(-mx, mx, 128);
            let ys = linspace(-my, my, 128);
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for &y in &ys {
                for &x in &xs {
                    out.push(vec![x, y]);
                }
            }
            out
        }
        ProblemKind::ReactionDiffusion => {
            let m = problem.domain.half_width(0);
            linspace(-m, m, 512).into_iter().map(|x| vec![x]).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Relative L2 error of the predicted solution on the evaluation grid.
    pub re_u: f64,
    /// Relative L2 error of the reconstructed source term (steady
    /// reaction-diffusion only).
    pub re_f: Option<f64>,
    /// Recovered reaction coefficient (inverse mode only).
    pub kappa: Option<f64>,
    /// Absolute error of the recovered coefficient against the true value.
    pub kappa_error: Option<f64>,
}

/// Network prediction at a physical point (spatial coordinates then time).
pub fn predict(
    arch: &Architecture,
    params: &NetworkParams,
    problem: &ProblemSpec,
    point: &[f64],
) -> Result<f64> {
    let d = problem.spatial_dims();
    let mut input = problem.domain.to_reference(&point[..d])?;
    input.extend_from_slice(&point[d..]);
    Ok(arch.forward(params, &input)?[0])
}

/// Evaluate a trained network on the standard grid. `reference` supplies the
/// ground truth for Allen-Cahn; `kappa` is the trained coefficient in inverse
/// mode.
pub fn evaluate(
    arch: &Architecture,
    params: &NetworkParams,
    kappa: Option<f64>,
    problem: &ProblemSpec,
    reference: Option<&Grid1d>,
) -> Result<EvalReport> {
    let grid = evaluation_grid(problem);
    let mut pred = Vec::with_capacity(grid.len());
    let mut truth = Vec::with_capacity(grid.len());
    for p in &grid {
        pred.push(predict(arch, params, problem, p)?);
        let t = match problem.kind {
            ProblemKind::AllenCahn => {
                let g = reference.ok_or_else(|| {
                    Error::InvalidConfig("Allen-Cahn evaluation needs a reference solution".into())
                })?;
                g.sample(p[0], p[1])
            }
            _ => problem.ground_truth(p).unwrap(),
        };
        truth.push(t);
    }
    let re_u = relative_l2(&pred, &truth)?;
    let re_f = if problem.kind == ProblemKind::ReactionDiffusion {
        Some(source_error(arch, params, kappa, problem, &grid)?)
    } else {
        None
    };
    let kappa_error = kappa.map(|k| (k - problem.params.kappa).abs());
    Ok(EvalReport {
        re_u,
        re_f,
        kappa,
        kappa_error,
    })
}

/// Relative L2 error of the source term reconstructed by pushing the network
/// through the scaled operator (with the trained coefficient in inverse mode).
fn source_error(
    arch: &Architecture,
    params: &NetworkParams,
    kappa: Option<f64>,
    problem: &ProblemSpec,
    grid: &[Vec<f64>],
) -> Result<f64> {
    let mut pred = Vec::with_capacity(grid.len());
    let mut truth = Vec::with_capacity(grid.len());
    for p in grid {
        let x_ref = problem.domain.to_reference(p)?;
        let jet = crate::jet::Jet::seed(x_ref[0], 1.0, 0, 1, true);
        let u = arch
            .forward_jets(&params.flat, &[jet])?
            .pop()
            .unwrap();
        // Residual against a zero source is exactly the reconstructed source.
        pred.push(problem.residual(&u, 0.0, kappa)?);
        truth.push(problem.source(p));
    }
    relative_l2(&pred, &truth)
}

/// Serialized training state: architecture, flat parameters, and the trained
/// reaction coefficient when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub arch: Architecture,
    pub params: Vec<f64>,
    pub kappa: Option<f64>,
    pub epoch: usize,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let file = std::fs::File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(file)?;
        NetworkParams::from_flat(&ckpt.arch, ckpt.params.clone())?;
        Ok(ckpt)
    }
}
