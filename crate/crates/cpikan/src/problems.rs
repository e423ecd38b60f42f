//! The four benchmark problems: residual operators, boundary/initial data,
//! source terms, analytic ground truths, noise injection, and training-set
//! generation.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::reference::{solve_allen_cahn, Grid1d};
use crate::scalar::Scalar;
use crate::scaling::ScaledDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Diffusion,
    Helmholtz2d,
    AllenCahn,
    ReactionDiffusion,
}

/// Named PDE parameters; which entries are meaningful depends on the problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeParams {
    pub diffusion: f64,
    pub kappa: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Default for PdeParams {
    fn default() -> Self {
        PdeParams {
            diffusion: 0.0,
            kappa: 0.0,
            a1: 0.0,
            a2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub params: PdeParams,
    pub domain: ScaledDomain,
    /// Marks `kappa` as trainable (reaction-diffusion only).
    pub inverse_mode: bool,
}

impl ProblemSpec {
    pub fn diffusion(m: f64, diffusion: f64, t_final: f64, scaled: bool) -> Self {
        let domain = if scaled {
            ScaledDomain::scaling(vec![m], Some(t_final))
        } else {
            ScaledDomain::identity(vec![m], Some(t_final))
        };
        ProblemSpec {
            kind: ProblemKind::Diffusion,
            params: PdeParams {
                diffusion,
                ..Default::default()
            },
            domain,
            inverse_mode: false,
        }
    }

    pub fn helmholtz(mx: f64, my: f64, kappa: f64, a1: f64, a2: f64, scaled: bool) -> Self {
        let hw = vec![mx, my];
        let domain = if scaled {
            ScaledDomain::scaling(hw, None)
        } else {
            ScaledDomain::identity(hw, None)
        };
        ProblemSpec {
            kind: ProblemKind::Helmholtz2d,
            params: PdeParams {
                kappa,
                a1,
                a2,
                ..Default::default()
            },
            domain,
            inverse_mode: false,
        }
    }

    pub fn allen_cahn(m: f64, diffusion: f64, t_final: f64, scaled: bool) -> Self {
        let domain = if scaled {
            ScaledDomain::scaling(vec![m], Some(t_final))
        } else {
            ScaledDomain::identity(vec![m], Some(t_final))
        };
        ProblemSpec {
            kind: ProblemKind::AllenCahn,
            params: PdeParams {
                diffusion,
                ..Default::default()
            },
            domain,
            inverse_mode: false,
        }
    }

    pub fn reaction_diffusion(
        m: f64,
        diffusion: f64,
        kappa: f64,
        scaled: bool,
        inverse_mode: bool,
    ) -> Self {
        let domain = if scaled {
            ScaledDomain::scaling(vec![m], None)
        } else {
            ScaledDomain::identity(vec![m], None)
        };
        ProblemSpec {
            kind: ProblemKind::ReactionDiffusion,
            params: PdeParams {
                diffusion,
                kappa,
                ..Default::default()
            },
            domain,
            inverse_mode,
        }
    }

    pub fn spatial_dims(&self) -> usize {
        self.domain.spatial_dims()
    }

    pub fn has_time(&self) -> bool {
        self.domain.time_span().is_some()
    }

    /// Network input dimension: spatial axes, then time if present.
    pub fn input_dim(&self) -> usize {
        self.spatial_dims() + usize::from(self.has_time())
    }

    pub fn time_axis(&self) -> Option<usize> {
        self.has_time().then(|| self.spatial_dims())
    }

    pub fn has_initial_condition(&self) -> bool {
        self.has_time()
    }

    /// Number of trainable PDE parameters (1 for inverse mode, else 0).
    pub fn trainable_parameter_count(&self) -> usize {
        usize::from(self.inverse_mode)
    }

    /// Initial value at a physical spatial point (time-dependent problems only).
    pub fn initial_condition(&self, x: &[f64]) -> f64 {
        match self.kind {
            ProblemKind::Diffusion => (PI * x[0]).sin(),
            ProblemKind::AllenCahn => {
                let m = self.domain.half_width(0);
                (x[0] / m).powi(2) * (PI * x[0] / m).cos()
            }
            _ => unreachable!("steady problem has no initial condition"),
        }
    }

    /// Prescribed boundary value at a physical point `(x, [t])`.
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        match self.kind {
            ProblemKind::Diffusion => 0.0,
            ProblemKind::Helmholtz2d => 0.0,
            ProblemKind::AllenCahn => -1.0,
            ProblemKind::ReactionDiffusion => (6.0 * x[0]).sin().powi(3),
        }
    }

    /// Source term at a physical spatial point (and time, where applicable).
    pub fn source(&self, x: &[f64]) -> f64 {
        match self.kind {
            ProblemKind::Diffusion | ProblemKind::AllenCahn => 0.0,
            ProblemKind::Helmholtz2d => {
                let PdeParams { kappa, a1, a2, .. } = self.params;
                (kappa * kappa - (a1 * a1 + a2 * a2) * PI * PI)
                    * (a1 * PI * x[0]).sin()
                    * (a2 * PI * x[1]).sin()
            }
            ProblemKind::ReactionDiffusion => {
                let PdeParams {
                    diffusion, kappa, ..
                } = self.params;
                let s = (6.0 * x[0]).sin();
                let c = (6.0 * x[0]).cos();
                // (sin^3(6x))'' = 108 (2 sin cos^2 - sin^3)(6x)
                let uxx = 108.0 * (2.0 * s * c * c - s * s * s);
                diffusion * uxx + kappa * (s * s * s).tanh()
            }
        }
    }

    /// Analytic ground truth at a physical point, when one exists.
    /// Allen-Cahn has none; use [`ProblemSpec::reference_solution`] instead.
    pub fn ground_truth(&self, x: &[f64]) -> Option<f64> {
        match self.kind {
            ProblemKind::Diffusion => {
                let d = self.params.diffusion;
                Some((PI * x[0]).sin() * (-PI * PI * d * x[1]).exp())
            }
            ProblemKind::Helmholtz2d => {
                Some((self.params.a1 * PI * x[0]).sin() * (self.params.a2 * PI * x[1]).sin())
            }
            ProblemKind::AllenCahn => None,
            ProblemKind::ReactionDiffusion => Some((6.0 * x[0]).sin().powi(3)),
        }
    }

    /// Finite-difference reference solution (Allen-Cahn only).
    pub fn reference_solution(&self) -> Result<Grid1d> {
        if self.kind != ProblemKind::AllenCahn {
            return Err(Error::InvalidConfig(
                "reference solver is defined for the Allen-Cahn problem only".into(),
            ));
        }
        let t_final = self.domain.time_span().unwrap();
        Ok(solve_allen_cahn(
            self.domain.half_width(0),
            self.params.diffusion,
            t_final,
        ))
    }

    /// Scaled residual `N^s[u](point) - f` from a jet of the network output.
    ///
    /// `f` is the (possibly noise-corrupted) scaled source value at the point,
    /// and `kappa` overrides the fixed reaction coefficient when the parameter
    /// is trainable.
    pub fn residual<T: Scalar>(&self, u: &Jet<T>, f: T, kappa: Option<T>) -> Result<T> {
        let need = |v: Option<T>, what: &str| {
            v.ok_or_else(|| Error::InvalidConfig(format!("jet is missing the {what} channel")))
        };
        match self.kind {
            ProblemKind::Diffusion => {
                let fac = self.domain.derivative_factor(0, 2);
                let ut = need(u.d1(1), "d/dt")?;
                let uxx = need(u.d2(0), "d2/dx2")?;
                Ok(ut - uxx.scale(self.params.diffusion * fac) - f)
            }
            ProblemKind::Helmholtz2d => {
                let fx = self.domain.derivative_factor(0, 2);
                let fy = self.domain.derivative_factor(1, 2);
                let uxx = need(u.d2(0), "d2/dx2")?;
                let uyy = need(u.d2(1), "d2/dy2")?;
                let k2 = self.params.kappa * self.params.kappa;
                Ok(uxx.scale(fx) + uyy.scale(fy) + u.v.scale(k2) - f)
            }
            ProblemKind::AllenCahn => {
                let fac = self.domain.derivative_factor(0, 2);
                let ut = need(u.d1(1), "d/dt")?;
                let uxx = need(u.d2(0), "d2/dx2")?;
                let cubic = (u.v * u.v * u.v - u.v).scale(5.0);
                Ok(ut - uxx.scale(self.params.diffusion * fac) + cubic - f)
            }
            ProblemKind::ReactionDiffusion => {
                let fac = self.domain.derivative_factor(0, 2);
                let uxx = need(u.d2(0), "d2/dx2")?;
                let reaction = match kappa {
                    Some(k) => k * u.v.tanh(),
                    None => u.v.tanh().scale(self.params.kappa),
                };
                Ok(uxx.scale(self.params.diffusion * fac) + reaction - f)
            }
        }
    }

    /// Axes whose diagonal second derivative the residual operator consumes.
    pub fn second_order_axes(&self) -> Vec<usize> {
        match self.kind {
            ProblemKind::Helmholtz2d => vec![0, 1],
            _ => vec![0],
        }
    }

    /// Convert a reference-coordinate input point to physical coordinates
    /// (spatial part mapped through the domain, time untouched).
    pub fn to_physical_point(&self, p: &[f64]) -> Vec<f64> {
        let d = self.spatial_dims();
        let mut out = self.domain.to_physical(&p[..d]);
        out.extend_from_slice(&p[d..]);
        out
    }

    /// Sample a training set in reference coordinates, deterministically per seed.
    ///
    /// `reference` supplies measurement targets for Allen-Cahn (the only
    /// benchmark without an analytic ground truth).
    pub fn sample_training_set(
        &self,
        counts: &PointCounts,
        noise: &NoiseSpec,
        seed: u64,
        reference: Option<&Grid1d>,
    ) -> Result<TrainingSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.spatial_dims();
        let t_final = self.domain.time_span();

        let interior = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let mut p = Vec::with_capacity(self.input_dim());
            for axis in 0..d {
                let h = self.domain.reference_half_width(axis);
                p.push(rng.random_range(-h..h));
            }
            if let Some(t) = t_final {
                p.push(rng.random_range(0.0..t));
            }
            p
        };

        let res_points: Vec<Vec<f64>> = (0..counts.n_res).map(|_| interior(&mut rng)).collect();
        let mut res_source: Vec<f64> = res_points
            .iter()
            .map(|p| self.source(&self.to_physical_point(p)))
            .collect();

        let mut init_points = Vec::new();
        let mut init_targets = Vec::new();
        if counts.n_init > 0 {
            if !self.has_initial_condition() {
                return Err(Error::InvalidConfig(
                    "initial points requested for a steady problem".into(),
                ));
            }
            for _ in 0..counts.n_init {
                let mut p = interior(&mut rng);
                *p.last_mut().unwrap() = 0.0;
                init_targets.push(self.initial_condition(&self.to_physical_point(&p)));
                init_points.push(p);
            }
        }

        let mut bc_points = Vec::new();
        let mut bc_targets = Vec::new();
        for i in 0..counts.n_bc {
            let mut p = interior(&mut rng);
            // Cycle faces so each of the 2d boundary faces gets even coverage.
            let face = i % (2 * d);
            let axis = face / 2;
            let sign = if face.is_multiple_of(2) { -1.0 } else { 1.0 };
            p[axis] = sign * self.domain.reference_half_width(axis);
            bc_targets.push(self.boundary_value(&self.to_physical_point(&p)));
            bc_points.push(p);
        }

        let mut meas_points = Vec::new();
        let mut meas_targets = Vec::new();
        for _ in 0..counts.n_meas {
            let p = interior(&mut rng);
            let phys = self.to_physical_point(&p);
            let target = match self.kind {
                ProblemKind::AllenCahn => {
                    let grid = reference.ok_or_else(|| {
                        Error::InvalidConfig(
                            "Allen-Cahn measurement targets need a reference solution".into(),
                        )
                    })?;
                    grid.sample(phys[0], phys[1])
                }
                _ => self.ground_truth(&phys).unwrap(),
            };
            meas_targets.push(target);
            meas_points.push(p);
        }

        let noise_seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        meas_targets = add_noise(&meas_targets, noise.delta_u, noise_seed);
        res_source = add_noise(&res_source, noise.delta_f, noise_seed.wrapping_add(1));

        Ok(TrainingSet {
            res_points,
            res_source,
            init_points,
            init_targets,
            bc_points,
            bc_targets,
            meas_points,
            meas_targets,
            noise: NoiseRecord {
                delta_u: noise.delta_u,
                delta_f: noise.delta_f,
                seed,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCounts {
    pub n_res: usize,
    #[serde(default)]
    pub n_init: usize,
    #[serde(default)]
    pub n_bc: usize,
    #[serde(default)]
    pub n_meas: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct NoiseSpec {
    pub delta_u: f64,
    pub delta_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub delta_u: f64,
    pub delta_f: f64,
    pub seed: u64,
}

/// Collocation, boundary, initial, and measurement point sets, all stored in
/// reference coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub res_points: Vec<Vec<f64>>,
    /// Scaled source values at the residual points (noise-corrupted when
    /// `delta_f > 0`).
    pub res_source: Vec<f64>,
    pub init_points: Vec<Vec<f64>>,
    pub init_targets: Vec<f64>,
    pub bc_points: Vec<Vec<f64>>,
    pub bc_targets: Vec<f64>,
    pub meas_points: Vec<Vec<f64>>,
    pub meas_targets: Vec<f64>,
    pub noise: NoiseRecord,
}

/// Corrupt `values` with i.i.d. Gaussian noise of standard deviation `delta`.
/// `delta = 0` returns the input unchanged.
pub fn add_noise(values: &[f64], delta: f64, seed: u64) -> Vec<f64> {
    assert!(delta >= 0.0);
    if delta == 0.0 || values.is_empty() {
        return values.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, delta).unwrap();
    values.iter().map(|v| v + dist.sample(&mut rng)).collect()
}

impl TrainingSet {
    /// Write one CSV file per point class into `dir`.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_points_csv(&dir.join("residual.csv"), &self.res_points, &self.res_source)?;
        write_points_csv(&dir.join("initial.csv"), &self.init_points, &self.init_targets)?;
        write_points_csv(&dir.join("boundary.csv"), &self.bc_points, &self.bc_targets)?;
        write_points_csv(
            &dir.join("measurement.csv"),
            &self.meas_points,
            &self.meas_targets,
        )?;
        Ok(())
    }

    /// Read a training set previously written by [`TrainingSet::write_csv_dir`].
    pub fn read_csv_dir(dir: &Path) -> Result<TrainingSet> {
        let (res_points, res_source) = read_points_csv(&dir.join("residual.csv"))?;
        let (init_points, init_targets) = read_points_csv(&dir.join("initial.csv"))?;
        let (bc_points, bc_targets) = read_points_csv(&dir.join("boundary.csv"))?;
        let (meas_points, meas_targets) = read_points_csv(&dir.join("measurement.csv"))?;
        Ok(TrainingSet {
            res_points,
            res_source,
            init_points,
            init_targets,
            bc_points,
            bc_targets,
            meas_points,
            meas_targets,
            noise: NoiseRecord {
                delta_u: 0.0,
                delta_f: 0.0,
                seed: 0,
            },
        })
    }
}

fn write_points_csv(path: &Path, points: &[Vec<f64>], targets: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = points.first().map_or(0, |p| p.len());
    let mut header: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
    header.push("target".into());
    w.write_record(&header)?;
    for (p, t) in points.iter().zip(targets) {
        let mut rec: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
        rec.push(format!("{t:.17e}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn read_points_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut points = Vec::new();
    let mut targets = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("bad CSV number: {e}")))?;
        let (coords, target) = vals.split_at(vals.len() - 1);
        points.push(coords.to_vec());
        targets.push(target[0]);
    }
    Ok((points, targets))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed_pair(x: f64, t: f64) -> (Jet<f64>, Jet<f64>) {
        (
            Jet::seed(x, 1.0, 0, 2, true),
            Jet::seed(t, 1.0, 1, 2, false),
        )
    }

    /// Manufactured u = x^2 t in reference coordinates: u_t = x^2, u_xx = 2t.
    #[test]
    fn diffusion_residual_matches_hand_derivation() {
        let p = ProblemSpec::diffusion(4.0, 0.1, 1.0, true);
        let (x, t) = (0.3, 0.7);
        let (jx, jt) = seed_pair(x, t);
        let u = jx.mul(&jx).mul(&jt);
        let r = p.residual(&u, 0.0, None).unwrap();
        let want = x * x - 0.1 / 16.0 * 2.0 * t;
        assert!((r - want).abs() < 1e-14, "{r} vs {want}");
    }

    /// Manufactured u = x^2 y^2: u_xx = 2y^2, u_yy = 2x^2.
    #[test]
    fn helmholtz_residual_matches_hand_derivation() {
        let p = ProblemSpec::helmholtz(2.0, 3.0, 4.0, 1.0, 4.0, true);
        let (x, y) = (-0.4, 0.6);
        let jx = Jet::seed(x, 1.0, 0, 2, true);
        let jy = Jet::seed(y, 1.0, 1, 2, true);
        let u = jx.mul(&jx).mul(&jy).mul(&jy);
        let f = 1.25;
        let r = p.residual(&u, f, None).unwrap();
        let want = 2.0 * y * y / 4.0 + 2.0 * x * x / 9.0 + 16.0 * x * x * y * y - f;
        assert!((r - want).abs() < 1e-13, "{r} vs {want}");
    }

    #[test]
    fn allen_cahn_residual_matches_hand_derivation() {
        let p = ProblemSpec::allen_cahn(2.0, 1e-4, 1.0, true);
        let (x, t) = (0.5, 0.25);
        let (jx, jt) = seed_pair(x, t);
        let u = jx.mul(&jx).mul(&jt);
        let uv = x * x * t;
        let r = p.residual(&u, 0.0, None).unwrap();
        let want = x * x - 1e-4 / 4.0 * 2.0 * t + 5.0 * (uv.powi(3) - uv);
        assert!((r - want).abs() < 1e-14, "{r} vs {want}");
    }

    /// Manufactured u = tanh(x): u_xx = -2 tanh(x)(1 - tanh^2 x).
    #[test]
    fn reaction_diffusion_residual_matches_hand_derivation() {
        let p = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, false);
        let x = 0.2;
        let jx = Jet::seed(x, 1.0, 0, 1, true);
        let u = jx.tanh();
        let f = -0.3;
        let r = p.residual(&u, f, None).unwrap();
        let y = x.tanh();
        let uxx = -2.0 * y * (1.0 - y * y);
        let want = 1e-2 / (PI * PI) * uxx + 0.7 * y.tanh() - f;
        assert!((r - want).abs() < 1e-14, "{r} vs {want}");
    }

    #[test]
    fn trainable_kappa_overrides_fixed_coefficient() {
        let p = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, true);
        let jx = Jet::seed(0.4, 1.0, 0, 1, true);
        let u = jx.tanh();
        let with_fixed = p.residual(&u, 0.0, Some(0.7)).unwrap();
        let plain = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, false)
            .residual(&u, 0.0, None)
            .unwrap();
        assert!((with_fixed - plain).abs() < 1e-15);
        let other = p.residual(&u, 0.0, Some(0.2)).unwrap();
        assert!((other - plain).abs() > 1e-3);
    }

    /// The analytic truths satisfy their PDEs: finite-difference the truth and
    /// compare the assembled operator against the source term.
    #[test]
    fn truths_satisfy_pdes_by_finite_differences() {
        let h = 1e-5;
        // Diffusion: u_t - D u_xx = 0.
        let p = ProblemSpec::diffusion(2.0, 0.1, 1.0, true);
        let u = |x: f64, t: f64| p.ground_truth(&[x, t]).unwrap();
        let (x, t) = (0.37, 0.52);
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
        assert!((ut - 0.1 * uxx).abs() < 1e-5);

        // Helmholtz: u_xx + u_yy + kappa^2 u = f.
        let ph = ProblemSpec::helmholtz(1.0, 1.0, 4.0, 1.0, 4.0, true);
        let v = |x: f64, y: f64| ph.ground_truth(&[x, y]).unwrap();
        let (x, y) = (0.21, -0.43);
        let vxx = (v(x + h, y) - 2.0 * v(x, y) + v(x - h, y)) / (h * h);
        let vyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
        let lhs = vxx + vyy + 16.0 * v(x, y);
        assert!((lhs - ph.source(&[x, y])).abs() < 1e-4, "{lhs}");

        // Reaction-diffusion: D u_xx + kappa tanh(u) = f.
        let pr = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, false);
        let w = |x: f64| pr.ground_truth(&[x]).unwrap();
        let x = 0.31;
        let wxx = (w(x + h) - 2.0 * w(x) + w(x - h)) / (h * h);
        let lhs = 1e-2 * wxx + 0.7 * w(x).tanh();
        assert!((lhs - pr.source(&[x])).abs() < 1e-5, "{lhs}");
    }

    #[test]
    fn boundary_and_initial_data_are_consistent_with_truth() {
        let p = ProblemSpec::diffusion(2.0, 0.1, 1.0, true);
        assert!((p.ground_truth(&[2.0, 0.3]).unwrap() - 0.0).abs() < 1e-12);
        assert!((p.initial_condition(&[0.5]) - p.ground_truth(&[0.5, 0.0]).unwrap()).abs() < 1e-12);
        let pr = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, false);
        assert!(
            (pr.boundary_value(&[PI]) - pr.ground_truth(&[PI]).unwrap()).abs() < 1e-12
        );
        let pa = ProblemSpec::allen_cahn(2.0, 1e-4, 1.0, true);
        assert_eq!(pa.boundary_value(&[2.0, 0.5]), -1.0);
        assert!((pa.initial_condition(&[2.0]) + 1.0).abs() < 1e-12);
    }

    fn counts() -> PointCounts {
        PointCounts {
            n_res: 50,
            n_init: 10,
            n_bc: 12,
            n_meas: 8,
        }
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let p = ProblemSpec::diffusion(6.0, 0.1, 1.0, true);
        let a = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 7, None)
            .unwrap();
        let b = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 7, None)
            .unwrap();
        let c = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 8, None)
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a.res_points, c.res_points);
    }

    #[test]
    fn sampled_points_respect_domain_and_classes() {
        let p = ProblemSpec::diffusion(6.0, 0.1, 1.0, true);
        let s = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 3, None)
            .unwrap();
        assert_eq!(s.res_points.len(), 50);
        assert_eq!(s.init_points.len(), 10);
        assert_eq!(s.bc_points.len(), 12);
        assert_eq!(s.meas_points.len(), 8);
        for pt in &s.res_points {
            assert!(pt[0].abs() < 1.0 && pt[1] > 0.0 && pt[1] < 1.0);
        }
        for pt in &s.init_points {
            assert_eq!(pt[1], 0.0);
        }
        let mut minus = 0;
        for pt in &s.bc_points {
            assert_eq!(pt[0].abs(), 1.0);
            if pt[0] < 0.0 {
                minus += 1;
            }
        }
        assert_eq!(minus, 6);
    }

    #[test]
    fn helmholtz_boundary_points_cover_all_faces() {
        let p = ProblemSpec::helmholtz(1.0, 1.0, 4.0, 1.0, 4.0, true);
        let s = p
            .sample_training_set(
                &PointCounts {
                    n_res: 4,
                    n_init: 0,
                    n_bc: 8,
                    n_meas: 0,
                },
                &NoiseSpec::default(),
                1,
                None,
            )
            .unwrap();
        let mut faces = [0usize; 4];
        for pt in &s.bc_points {
            if pt[0] == -1.0 {
                faces[0] += 1;
            } else if pt[0] == 1.0 {
                faces[1] += 1;
            } else if pt[1] == -1.0 {
                faces[2] += 1;
            } else if pt[1] == 1.0 {
                faces[3] += 1;
            }
        }
        assert_eq!(faces, [2, 2, 2, 2]);
    }

    #[test]
    fn steady_problem_rejects_initial_points() {
        let p = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, false);
        let err = p
            .sample_training_set(
                &PointCounts {
                    n_res: 4,
                    n_init: 4,
                    n_bc: 2,
                    n_meas: 0,
                },
                &NoiseSpec::default(),
                1,
                None,
            )
            .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn unscaled_domain_samples_physical_coordinates() {
        let p = ProblemSpec::diffusion(6.0, 0.1, 1.0, false);
        let s = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 3, None)
            .unwrap();
        assert!(s.res_points.iter().any(|pt| pt[0].abs() > 1.0));
        for pt in &s.bc_points {
            assert_eq!(pt[0].abs(), 6.0);
        }
    }

    #[test]
    fn noise_is_zero_mean_with_requested_scale() {
        let values = vec![0.0; 4000];
        let noisy = add_noise(&values, 0.05, 99);
        let mean = noisy.iter().sum::<f64>() / noisy.len() as f64;
        let var = noisy.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / noisy.len() as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var.sqrt() - 0.05).abs() < 0.005, "std {}", var.sqrt());
        assert_eq!(add_noise(&values, 0.0, 99), values);
    }

    #[test]
    fn noisy_sampling_changes_targets_not_points() {
        let p = ProblemSpec::reaction_diffusion(PI, 1e-2, 0.7, true, true);
        let c = PointCounts {
            n_res: 20,
            n_init: 0,
            n_bc: 2,
            n_meas: 10,
        };
        let clean = p
            .sample_training_set(&c, &NoiseSpec::default(), 5, None)
            .unwrap();
        let noisy = p
            .sample_training_set(
                &c,
                &NoiseSpec {
                    delta_u: 0.05,
                    delta_f: 0.05,
                },
                5,
                None,
            )
            .unwrap();
        assert_eq!(clean.res_points, noisy.res_points);
        assert_eq!(clean.meas_points, noisy.meas_points);
        assert_ne!(clean.meas_targets, noisy.meas_targets);
        assert_ne!(clean.res_source, noisy.res_source);
    }

    #[test]
    fn allen_cahn_measurements_require_reference() {
        let p = ProblemSpec::allen_cahn(2.0, 1e-4, 1.0, true);
        let c = PointCounts {
            n_res: 4,
            n_init: 2,
            n_bc: 2,
            n_meas: 3,
        };
        assert!(p
            .sample_training_set(&c, &NoiseSpec::default(), 1, None)
            .is_err());
        let grid = p.reference_solution().unwrap();
        let s = p
            .sample_training_set(&c, &NoiseSpec::default(), 1, Some(&grid))
            .unwrap();
        assert!(s.meas_targets.iter().all(|t| t.abs() <= 1.0 + 1e-6));
    }

    #[test]
    fn training_set_csv_round_trip() {
        let p = ProblemSpec::diffusion(2.0, 0.1, 1.0, true);
        let s = p
            .sample_training_set(&counts(), &NoiseSpec::default(), 13, None)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.write_csv_dir(dir.path()).unwrap();
        let back = TrainingSet::read_csv_dir(dir.path()).unwrap();
        assert_eq!(back.res_points, s.res_points);
        assert_eq!(back.res_source, s.res_source);
        assert_eq!(back.bc_targets, s.bc_targets);
        assert_eq!(back.meas_targets, s.meas_targets);
    }
}
