//! Config-driven experiment runner: loads a TOML or JSON experiment
//! description, trains the requested method, and writes machine-readable
//! artifacts (config echo, loss history CSV, summary JSON, prediction grid
//! CSV). A suite runner aggregates many configs into one comparison table.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LossBreakdown, LossWeights};
use crate::network::{init_params, Architecture, CkanArchitecture, MlpArchitecture};
use crate::problems::{NoiseSpec, PointCounts, ProblemKind, ProblemSpec};
use crate::reference::Grid1d;
use crate::train::{evaluate, train, Checkpoint, TrainingConfig, TrainingRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ScaledCkan,
    ScaledMlp,
    Ckan,
    Mlp,
}

impl Method {
    pub fn is_scaled(self) -> bool {
        matches!(self, Method::ScaledCkan | Method::ScaledMlp)
    }

    pub fn is_ckan(self) -> bool {
        matches!(self, Method::ScaledCkan | Method::Ckan)
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::ScaledCkan => "scaled_ckan",
            Method::ScaledMlp => "scaled_mlp",
            Method::Ckan => "ckan",
            Method::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Spatial half-width M (x axis).
    #[serde(default = "default_m")]
    pub m: f64,
    /// Half-width of the y axis (Helmholtz); defaults to `m`.
    #[serde(default)]
    pub m_y: Option<f64>,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub diffusion: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub a1: Option<f64>,
    #[serde(default)]
    pub a2: Option<f64>,
    #[serde(default)]
    pub inverse: bool,
    /// Initial guess for the trainable reaction coefficient in inverse mode.
    #[serde(default)]
    pub kappa_init: f64,
}

fn default_m() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub hidden_layers: usize,
    pub neurons: usize,
    /// Chebyshev degree; required for the cKAN methods, ignored for MLPs.
    #[serde(default)]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub method: Method,
    pub problem: ProblemConfig,
    pub architecture: ArchitectureConfig,
    #[serde(default)]
    pub weights: LossWeights,
    pub counts: PointCounts,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub seed: u64,
    /// Suppresses wall-clock timing in the summary so artifacts are
    /// byte-identical across reruns.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Load from a TOML file, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.counts.n_res == 0 && self.weights.lambda_res != 0.0 {
            return bad("counts.n_res must be positive when weights.lambda_res is nonzero");
        }
        if self.problem.m <= 0.0 {
            return bad("problem.m must be positive");
        }
        if self.training.learning_rate <= 0.0 {
            return bad("training.learning_rate must be positive");
        }
        if self.method.is_ckan() {
            match self.architecture.degree {
                Some(k) if k >= 1 => {}
                _ => return bad("architecture.degree (>= 1) is required for cKAN methods"),
            }
        }
        match self.problem.kind {
            ProblemKind::Helmholtz2d => {
                if self.problem.kappa.is_none()
                    || self.problem.a1.is_none()
                    || self.problem.a2.is_none()
                {
                    return bad("problem.kappa, problem.a1, problem.a2 are required for helmholtz2d");
                }
                if self.problem.inverse {
                    return bad("problem.inverse is only supported for reaction_diffusion");
                }
            }
            ProblemKind::ReactionDiffusion => {
                if self.problem.kappa.is_none() {
                    return bad("problem.kappa is required for reaction_diffusion");
                }
                if self.problem.inverse && self.counts.n_meas == 0 {
                    return bad("counts.n_meas must be positive in inverse mode");
                }
            }
            ProblemKind::Diffusion | ProblemKind::AllenCahn => {
                if self.problem.inverse {
                    return bad("problem.inverse is only supported for reaction_diffusion");
                }
            }
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let p = &self.problem;
        let scaled = self.method.is_scaled();
        let t_final = p.t_final.unwrap_or(1.0);
        match p.kind {
            ProblemKind::Diffusion => {
                ProblemSpec::diffusion(p.m, p.diffusion.unwrap_or(0.1), t_final, scaled)
            }
            ProblemKind::Helmholtz2d => ProblemSpec::helmholtz(
                p.m,
                p.m_y.unwrap_or(p.m),
                p.kappa.unwrap(),
                p.a1.unwrap(),
                p.a2.unwrap(),
                scaled,
            ),
            ProblemKind::AllenCahn => {
                ProblemSpec::allen_cahn(p.m, p.diffusion.unwrap_or(1e-4), t_final, scaled)
            }
            ProblemKind::ReactionDiffusion => ProblemSpec::reaction_diffusion(
                p.m,
                p.diffusion.unwrap_or(1e-2),
                p.kappa.unwrap(),
                scaled,
                p.inverse,
            ),
        }
    }

    pub fn architecture(&self, problem: &ProblemSpec) -> Architecture {
        let a = &self.architecture;
        let d = problem.input_dim();
        if self.method.is_ckan() {
            Architecture::Ckan(CkanArchitecture::new(
                d,
                a.hidden_layers,
                a.neurons,
                a.degree.unwrap(),
            ))
        } else {
            Architecture::Mlp(MlpArchitecture::new(d, a.hidden_layers, a.neurons))
        }
    }

    /// Default run name: method and problem kind.
    pub fn run_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!("{}_{:?}", self.method.label(), self.problem.kind).to_lowercase()
        })
    }
}

/// Command-line overrides folded into a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epochs_scale: Option<f64>,
    pub deterministic: bool,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(f) = self.epochs_scale {
            config.training.epochs = ((config.training.epochs as f64) * f).round() as usize;
        }
        if self.deterministic {
            config.deterministic = true;
        }
        if let Some(d) = &self.out_dir {
            config.out_dir = Some(d.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub method: Method,
    pub problem: ProblemKind,
    pub m: f64,
    pub status: String,
    pub seed: u64,
    pub epochs: usize,
    pub parameter_count: usize,
    pub relative_l2: Option<f64>,
    pub relative_l2_f: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_true: Option<f64>,
    pub kappa_error: Option<f64>,
    pub final_loss: Option<LossBreakdown>,
    pub diverged_epoch: Option<usize>,
    pub wall_time_s: Option<f64>,
}

fn splitmix(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run one experiment and write its artifact bundle into `out_dir`:
/// `config.json`, `history.csv`, `summary.json`, `prediction.csv`,
/// `checkpoint.json`. Training divergence is reported in the summary with
/// status `"diverged"` rather than as an error.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let problem = config.problem_spec();
    let arch = config.architecture(&problem);

    let reference: Option<Grid1d> = if problem.kind == ProblemKind::AllenCahn {
        Some(problem.reference_solution()?)
    } else {
        None
    };

    let set = problem.sample_training_set(
        &config.counts,
        &config.noise,
        splitmix(config.seed, 1),
        reference.as_ref(),
    )?;
    let params0 = init_params(&arch, splitmix(config.seed, 2));
    let kappa0 = problem.inverse_mode.then_some(config.problem.kappa_init);

    std::fs::write(
        out_dir.join("config.json"),
        serde_json::to_string_pretty(config)?,
    )?;

    let outcome = train(
        &arch,
        &params0,
        kappa0,
        &problem,
        &set,
        &config.weights,
        &config.training,
    );

    let mut summary = RunSummary {
        name: config.run_name(),
        method: config.method,
        problem: problem.kind,
        m: config.problem.m,
        status: "ok".into(),
        seed: config.seed,
        epochs: config.training.epochs,
        parameter_count: arch.parameter_count(),
        relative_l2: None,
        relative_l2_f: None,
        kappa: None,
        kappa_true: problem.inverse_mode.then_some(problem.params.kappa),
        kappa_error: None,
        final_loss: None,
        diverged_epoch: None,
        wall_time_s: None,
    };

    match outcome {
        Ok(out) => {
            write_history_csv(&out_dir.join("history.csv"), &out.history)?;
            let report = evaluate(&arch, &out.params, out.kappa, &problem, reference.as_ref())?;
            summary.relative_l2 = Some(report.re_u);
            summary.relative_l2_f = report.re_f;
            summary.kappa = report.kappa;
            summary.kappa_error = report.kappa_error;
            summary.final_loss = out.history.last().map(|r| r.loss);
            write_prediction_csv(
                &out_dir.join("prediction.csv"),
                &arch,
                &out.params,
                &problem,
                reference.as_ref(),
            )?;
            Checkpoint {
                arch: arch.clone(),
                params: out.params.flat.clone(),
                kappa: out.kappa,
                epoch: config.training.epochs,
            }
            .save(&out_dir.join("checkpoint.json"))?;
        }
        Err(Error::Diverged { epoch, loss }) => {
            summary.status = "diverged".into();
            summary.diverged_epoch = Some(epoch);
            summary.final_loss = Some(LossBreakdown {
                res: f64::NAN,
                init: f64::NAN,
                bc: f64::NAN,
                meas: f64::NAN,
                total: loss,
            });
            write_history_csv(&out_dir.join("history.csv"), &[])?;
        }
        Err(e) => return Err(e),
    }

    if !config.deterministic {
        summary.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

fn write_history_csv(path: &Path, history: &[TrainingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "res", "init", "bc", "meas", "total", "kappa"])?;
    for rec in history {
        w.write_record([
            rec.epoch.to_string(),
            format!("{:.12e}", rec.loss.res),
            format!("{:.12e}", rec.loss.init),
            format!("{:.12e}", rec.loss.bc),
            format!("{:.12e}", rec.loss.meas),
            format!("{:.12e}", rec.loss.total),
            rec.kappa.map_or(String::new(), |k| format!("{k:.12e}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_prediction_csv(
    path: &Path,
    arch: &Architecture,
    params: &crate::network::NetworkParams,
    problem: &ProblemSpec,
    reference: Option<&Grid1d>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = vec!["x"];
    if problem.spatial_dims() > 1 {
        header.push("y");
    }
    if problem.has_time() {
        header.push("t");
    }
    header.extend(["u_pred", "u_true", "abs_err"]);
    w.write_record(&header)?;
    for point in crate::train::evaluation_grid(problem) {
        let pred = crate::train::predict(arch, params, problem, &point)?;
        let truth = match problem.kind {
            ProblemKind::AllenCahn => reference
                .expect("reference grid is built for Allen-Cahn runs")
                .sample(point[0], point[1]),
            _ => problem.ground_truth(&point).unwrap(),
        };
        let mut rec: Vec<String> = point.iter().map(|v| format!("{v:.12e}")).collect();
        rec.push(format!("{pred:.12e}"));
        rec.push(format!("{truth:.12e}"));
        rec.push(format!("{:.12e}", (pred - truth).abs()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    /// Config paths, relative to the manifest file's directory.
    pub configs: Vec<PathBuf>,
}

/// Run every config in a suite manifest, continuing past per-run failures,
/// and write a `suite.csv` comparison table into `out_dir`.
pub fn run_suite(
    manifest_path: &Path,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<Vec<RunSummary>> {
    let text = std::fs::read_to_string(manifest_path)?;
    let manifest: SuiteManifest = if manifest_path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?
    };
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(out_dir)?;

    let mut rows = Vec::new();
    for config_path in &manifest.configs {
        let full = base.join(config_path);
        let stem = full
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let result = ExperimentConfig::load(&full).and_then(|mut config| {
            overrides.apply(&mut config);
            run_experiment(&config, &out_dir.join(&stem))
        });
        match result {
            Ok(summary) => rows.push(summary),
            Err(e) => rows.push(RunSummary {
                name: stem,
                method: Method::ScaledCkan,
                problem: ProblemKind::Diffusion,
                m: f64::NAN,
                status: format!("error: {e}").replace(['\n', '\r'], " "),
                seed: 0,
                epochs: 0,
                parameter_count: 0,
                relative_l2: None,
                relative_l2_f: None,
                kappa: None,
                kappa_true: None,
                kappa_error: None,
                final_loss: None,
                diverged_epoch: None,
                wall_time_s: None,
            }),
        }
    }
    write_suite_csv(&out_dir.join("suite.csv"), &rows)?;
    Ok(rows)
}

fn write_suite_csv(path: &Path, rows: &[RunSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "name",
        "method",
        "problem",
        "m",
        "status",
        "re_u",
        "re_f",
        "kappa",
        "kappa_error",
        "final_total_loss",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6e}"));
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.method.label().to_string(),
            format!("{:?}", r.problem).to_lowercase(),
            format!("{}", r.m),
            r.status.clone(),
            opt(r.relative_l2),
            opt(r.relative_l2_f),
            opt(r.kappa),
            opt(r.kappa_error),
            opt(r.final_loss.map(|l| l.total)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write the Allen-Cahn reference solution as a long-format CSV `(t, x, u)`.
pub fn emit_reference(m: f64, diffusion: f64, t_final: f64, path: &Path) -> Result<()> {
    let problem = ProblemSpec::allen_cahn(m, diffusion, t_final, true);
    let grid = problem.reference_solution()?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "u"])?;
    for (j, row) in grid.u.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            w.write_record([
                format!("{:.12e}", grid.ts[j]),
                format!("{:.12e}", grid.xs[i]),
                format!("{v:.12e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
