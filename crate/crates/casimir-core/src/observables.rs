//! Energy-versus-parameter sweeps, finite-difference forces and torques,
//! and power-law exponent fits.
//!
//! A sweep re-poses one body of a scene along a separation axis or about a
//! rotation axis through its own centre, evaluates the interaction energy
//! on a grid, and differentiates by central differences. The same
//! quadrature nodes are reused across the whole sweep (including every
//! stencil point), so quadrature bias cancels out of the differences
//! instead of being amplified by them.

use nalgebra::{Unit, Vector3};
use rayon::prelude::*;
use std::io::Write;

use crate::error::CoreError;
use crate::geometry::{Body, Scene};
use crate::materials::PolarizabilityModel;
use crate::spectrum::{
    build_decoupled_cache, interaction_energy, interaction_energy_cached, DecoupledCache, NodeSet,
    QuadScheme, QuadratureSpec,
};
use crate::units::Mode;

/// Swept parameter: a separation along an axis or a rotation angle about
/// an axis through the moving body's centre. `reference` is the parameter
/// value the scene is currently posed at; grid values are reached by
/// moving relative to that pose, so the caller's separation convention
/// carries through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepParameter {
    Separation {
        axis: Unit<Vector3<f64>>,
        reference_um: f64,
    },
    Angle {
        axis: Unit<Vector3<f64>>,
        reference_rad: f64,
    },
}

/// Sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// Strictly increasing parameter grid.
    pub grid: Vec<f64>,
    /// Index of the body that moves or rotates.
    pub body_index: usize,
    /// Relative finite-difference step; in [1e-6, 1e-1].
    pub fd_step: f64,
    /// Fall back to one-sided differences at grid ends whose stencil
    /// leaves the valid region; when disabled such rows carry no
    /// derivative.
    pub allow_one_sided: bool,
}

pub const DEFAULT_FD_STEP: f64 = 1e-3;

impl SweepSpec {
    pub fn separation(
        axis: Unit<Vector3<f64>>,
        reference_um: f64,
        grid: Vec<f64>,
        body_index: usize,
    ) -> Self {
        Self {
            parameter: SweepParameter::Separation { axis, reference_um },
            grid,
            body_index,
            fd_step: DEFAULT_FD_STEP,
            allow_one_sided: false,
        }
    }

    pub fn angle(
        axis: Unit<Vector3<f64>>,
        reference_rad: f64,
        grid: Vec<f64>,
        body_index: usize,
    ) -> Self {
        Self {
            parameter: SweepParameter::Angle {
                axis,
                reference_rad,
            },
            grid,
            body_index,
            fd_step: DEFAULT_FD_STEP,
            allow_one_sided: false,
        }
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    fn validate(&self, scene: &Scene) -> Result<(), CoreError> {
        if self.grid.is_empty() {
            return Err(CoreError::invalid("sweep grid", "must not be empty"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::invalid(
                "sweep grid",
                "must be strictly increasing",
            ));
        }
        if !(1e-6..=1e-1).contains(&self.fd_step) {
            return Err(CoreError::invalid(
                "fd_step",
                format!("{} must lie in [1e-6, 1e-1]", self.fd_step),
            ));
        }
        if self.body_index >= scene.bodies().len() {
            return Err(CoreError::invalid("body_index", "out of range"));
        }
        Ok(())
    }

    /// Absolute finite-difference step at a grid value: multiplicative for
    /// separations, multiplicative with a one-degree floor for angles.
    fn step_at(&self, param: f64) -> f64 {
        match self.parameter {
            SweepParameter::Separation { .. } => self.fd_step * param.abs(),
            SweepParameter::Angle { .. } => {
                self.fd_step * param.abs().max(std::f64::consts::PI / 180.0)
            }
        }
    }
}

/// One sweep row. The derivative is the conjugate force of the swept
/// coordinate: `F = −dU/dz` (eV/μm) or `τ = −dU/dθ` (eV/rad).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub energy_ev: f64,
    pub derivative: Option<f64>,
    pub quad_error_ev: f64,
}

/// Sweep output plus the metadata needed to reproduce it.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub scene_digest: u64,
    pub mode: Mode,
    pub quad: QuadratureSpec,
    pub parameter_kind: &'static str,
    pub fd_step: f64,
}

/// Pose the scene at a parameter value.
fn pose_scene(scene: &Scene, spec: &SweepSpec, param: f64) -> Result<Scene, CoreError> {
    let body: &Body = &scene.bodies()[spec.body_index];
    let posed = match &spec.parameter {
        SweepParameter::Separation { axis, reference_um } => {
            body.translated((param - reference_um) * axis.into_inner())
        }
        SweepParameter::Angle {
            axis,
            reference_rad,
        } => body.rotated_about_center(*axis, param - reference_rad),
    };
    scene.with_body(spec.body_index, posed)
}

/// Run a sweep over the grid.
pub fn sweep(
    scene: &Scene,
    spec: &SweepSpec,
    quad: &QuadratureSpec,
) -> Result<SweepResult, CoreError> {
    spec.validate(scene)?;
    quad.validate()?;

    // Every pose of the sweep, grid points and stencil points alike.
    #[derive(Clone, Copy)]
    struct Pose {
        param: f64,
        grid_index: usize,
        role: i8, // -1, 0, +1 relative to the grid point
    }
    let mut poses: Vec<Pose> = Vec::with_capacity(3 * spec.grid.len());
    for (gi, &p) in spec.grid.iter().enumerate() {
        let h = spec.step_at(p);
        for (role, param) in [(0i8, p), (-1, p - h), (1, p + h)] {
            poses.push(Pose {
                param,
                grid_index: gi,
                role,
            });
        }
    }

    let scenes: Vec<Result<Scene, CoreError>> = poses
        .iter()
        .map(|pose| {
            pose_scene(scene, spec, pose.param).map_err(|e| CoreError::Stencil {
                param: pose.param,
                reason: e.to_string(),
            })
        })
        .collect();

    // Invalid stencil poses are tolerated only at the grid ends (one-sided
    // fallback or a missing derivative); anything else is an error.
    let last = spec.grid.len() - 1;
    for (pose, s) in poses.iter().zip(scenes.iter()) {
        if let Err(e) = s {
            let at_end = pose.grid_index == 0 || pose.grid_index == last;
            if pose.role == 0 || !at_end {
                return Err(e.clone());
            }
        }
    }

    // Shared decoupled-system cache: rigid re-posing of a body conjugates
    // its intra-body block orthogonally, leaving the decoupled
    // log-determinants untouched across the whole sweep.
    let cache: Option<(NodeSet, DecoupledCache)> =
        if matches!(quad.scheme, QuadScheme::GaussLegendreMapped) {
            let min_r = scenes
                .iter()
                .flatten()
                .filter_map(|s| s.min_inter_center_distance())
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                });
            let nodes = NodeSet::for_spec(quad);
            let cache = build_decoupled_cache(scene, &nodes, min_r)?;
            Some((nodes, cache))
        } else {
            None
        };

    let energies: Vec<Option<Result<(f64, f64), CoreError>>> = scenes
        .par_iter()
        .map(|posed| match posed {
            Err(_) => None,
            Ok(s) => Some(
                match &cache {
                    Some((_, c)) => interaction_energy_cached(s, quad, c),
                    None => interaction_energy(s, quad),
                }
                .map(|r| (r.energy_ev, r.quad_error_ev)),
            ),
        })
        .collect();

    // Deterministic error propagation: first failure in pose order, with
    // the offending parameter attached.
    for (pose, e) in poses.iter().zip(energies.iter()) {
        if let Some(Err(err)) = e {
            return Err(CoreError::Stencil {
                param: pose.param,
                reason: err.to_string(),
            });
        }
    }

    let value = |gi: usize, role: i8| -> Option<(f64, f64)> {
        poses
            .iter()
            .position(|p| p.grid_index == gi && p.role == role)
            .and_then(|i| energies[i].as_ref())
            .and_then(|r| r.as_ref().ok())
            .copied()
    };

    let mut rows = Vec::with_capacity(spec.grid.len());
    for (gi, &p) in spec.grid.iter().enumerate() {
        let (energy, err) = value(gi, 0).expect("grid pose evaluated");
        let h = spec.step_at(p);
        let minus = value(gi, -1);
        let plus = value(gi, 1);
        let derivative = match (minus, plus) {
            (Some((um, _)), Some((up, _))) => Some(-(up - um) / (2.0 * h)),
            (None, Some((up, _))) if spec.allow_one_sided => Some(-(up - energy) / h),
            (Some((um, _)), None) if spec.allow_one_sided => Some(-(energy - um) / h),
            _ => None,
        };
        rows.push(SweepRow {
            param: p,
            energy_ev: energy,
            derivative,
            quad_error_ev: err,
        });
    }

    Ok(SweepResult {
        rows,
        scene_digest: scene_digest(scene),
        mode: scene.mode,
        quad: quad.clone(),
        parameter_kind: match spec.parameter {
            SweepParameter::Separation { .. } => "separation",
            SweepParameter::Angle { .. } => "angle",
        },
        fd_step: spec.fd_step,
    })
}

/// Least-squares power-law fit of |derivative| against the parameter over
/// a window: returns (exponent, standard error of the exponent).
pub fn fit_power_law(result: &SweepResult, window: (f64, f64)) -> Result<(f64, f64), CoreError> {
    let pts: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.param >= window.0 && r.param <= window.1)
        .filter_map(|r| r.derivative.map(|d| (r.param, d)))
        .collect();
    if pts.len() < 4 {
        return Err(CoreError::invalid(
            "fit window",
            format!("needs >= 4 points with derivatives, found {}", pts.len()),
        ));
    }
    if pts.iter().any(|&(p, _)| p <= 0.0) {
        return Err(CoreError::invalid("fit window", "parameters must be > 0"));
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|&(_, d)| d == 0.0 || d.signum() != sign) {
        return Err(CoreError::NonPowerLaw);
    }
    let xs: Vec<f64> = pts.iter().map(|&(p, _)| p.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, d)| d.abs().ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let fit = ym + slope * (x - xm);
            (y - fit) * (y - fit)
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Write a sweep as CSV; appends the power-law footer when a fit is given.
pub fn write_sweep_csv<W: Write>(
    result: &SweepResult,
    mut w: W,
    fit: Option<(f64, f64)>,
) -> std::io::Result<()> {
    writeln!(w, "param,energy_eV,derivative,quad_error_eV")?;
    for row in &result.rows {
        match row.derivative {
            Some(d) => writeln!(
                w,
                "{},{:e},{:e},{:e}",
                row.param, row.energy_ev, d, row.quad_error_ev
            )?,
            None => writeln!(
                w,
                "{},{:e},,{:e}",
                row.param, row.energy_ev, row.quad_error_ev
            )?,
        }
    }
    if let Some((exponent, stderr)) = fit {
        writeln!(w, "# exponent={exponent} stderr={stderr}")?;
    }
    Ok(())
}

/// Stable FNV-1a digest of a scene's full description (mode, poses,
/// particle positions, polarizability models), for run manifests.
pub fn scene_digest(scene: &Scene) -> u64 {
    let mut h = Fnv1a::new();
    h.u8(match scene.mode {
        Mode::Retarded => 1,
        Mode::NonRetarded => 0,
    });
    for body in scene.bodies() {
        let q = body.rotation.quaternion();
        for v in [q.w, q.i, q.j, q.k] {
            h.f64(v);
        }
        for v in body.translation_um.iter() {
            h.f64(*v);
        }
        for p in body.particles() {
            for v in p.position_um.iter() {
                h.f64(*v);
            }
            hash_polarizability(&mut h, &p.polarizability);
        }
    }
    h.finish()
}

fn hash_polarizability(h: &mut Fnv1a, p: &PolarizabilityModel) {
    match p {
        PolarizabilityModel::SphereRadiative {
            radius_um,
            material,
        } => {
            h.u8(1);
            h.f64(*radius_um);
            hash_material(h, material);
        }
        PolarizabilityModel::SphereStatic {
            radius_um,
            material,
        } => {
            h.u8(2);
            h.f64(*radius_um);
            hash_material(h, material);
        }
        PolarizabilityModel::SpheroidStatic {
            semi_axes_um,
            orientation,
            material,
        } => {
            h.u8(3);
            h.f64(semi_axes_um.0);
            h.f64(semi_axes_um.1);
            h.f64(semi_axes_um.2);
            let q = orientation.quaternion();
            for v in [q.w, q.i, q.j, q.k] {
                h.f64(v);
            }
            hash_material(h, material);
        }
    }
}

fn hash_material(h: &mut Fnv1a, m: &crate::materials::DielectricModel) {
    use crate::materials::DielectricModel as D;
    match m {
        D::Drude {
            plasma_ev,
            damping_ev,
        } => {
            h.u8(1);
            h.f64(*plasma_ev);
            h.f64(*damping_ev);
        }
        D::Lorentz { oscillators } => {
            h.u8(2);
            for o in oscillators {
                h.f64(o.strength_ev2);
                h.f64(o.resonance_ev);
                h.f64(o.damping_ev);
            }
        }
        D::Constant { eps } => {
            h.u8(3);
            h.f64(*eps);
        }
        D::PerfectMetal => h.u8(4),
        D::Tabulated { .. } => h.u8(5),
        D::MaxwellGarnett {
            inclusion,
            host,
            fill,
        } => {
            h.u8(6);
            hash_material(h, inclusion);
            hash_material(h, host);
            h.f64(*fill);
        }
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }
    fn u8(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x100000001b3);
    }
    fn f64(&mut self, v: f64) {
        for b in v.to_bits().to_le_bytes() {
            self.u8(b);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// Test seam: the grid/stencil machinery applied to an injected
/// closed-form energy, bypassing the solver.
#[cfg(test)]
pub(crate) fn sweep_injected<F>(spec: &SweepSpec, energy: F) -> Vec<SweepRow>
where
    F: Fn(f64) -> f64,
{
    spec.grid
        .iter()
        .map(|&p| {
            let h = spec.step_at(p);
            let d = -(energy(p + h) - energy(p - h)) / (2.0 * h);
            SweepRow {
                param: p,
                energy_ev: energy(p),
                derivative: Some(d),
                quad_error_ev: 0.0,
            }
        })
        .collect()
}
