//! Scenario configuration: TOML schema, exhaustive validation, and
//! conversion into solver types.
//!
//! Unknown keys are rejected everywhere (typo safety) and every physical
//! field carries its unit as a suffix. Validation collects all violations
//! instead of stopping at the first; each message names the offending
//! field and the bound it broke. The full grammar is documented in
//! `docs/config.md`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use nalgebra::{Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use casimir_core::materials::{DielectricTable, LorentzOscillator, PolarizabilityModel};
use casimir_core::observables::{SweepSpec, DEFAULT_FD_STEP};
use casimir_core::spectrum::{QuadScheme, QuadratureSpec};
use casimir_core::{
    build_cluster, preset_scene, transform_body, Body, DielectricModel, Lattice, Mode,
    PresetParams, Scene, SeparationConvention, Shape,
};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// "retarded" or "nonretarded"; defaults to the preset's mode, or
    /// retarded for explicit scenes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub scene: SceneConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PresetParamsConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bodies: Vec<BodyConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PresetParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_um2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_um: Option<f64>,
    /// "sphere_surface_gap", "face_gap" or "center_distance".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_um: Option<f64>,
    /// Bundled material name (gold, aluminum, perfect_metal, silicon,
    /// polystyrene).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub static_spheres: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub shape: ShapeConfig,
    pub lattice: LatticeConfig,
    pub inclusion: InclusionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    /// "cube", "box" or "circular_cylinder".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lx_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ly_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lz_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_um: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub spacing_um: [f64; 3],
    pub counts: [u32; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stretch: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InclusionConfig {
    /// "sphere_radiative", "sphere_static" or "spheroid_static".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes_um: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_rad: Option<f64>,
    pub material: MaterialConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    /// "drude", "lorentz", "constant", "perfect_metal", "tabulated",
    /// "maxwell_garnett", or a bundled material name.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plasma_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oscillators: Vec<OscillatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Two-column CSV (xi_eV,eps) with a header row, strictly increasing xi.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion: Option<Box<MaterialConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<Box<MaterialConfig>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub strength_ev2: f64,
    pub resonance_ev: f64,
    #[serde(default)]
    pub damping_ev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation_um: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_rad: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// "gauss_legendre_mapped" (default) or "adaptive_simpson".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Map scale ξ₀ in eV; derived from the scene when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_scale_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// "separation" or "angle".
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_count: Option<usize>,
    /// "linear" (default) or "log".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_spacing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_index: Option<usize>,
    /// Parameter value of the configured pose; defaults to the preset's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_one_sided: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dump_integrand: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

/// Parse a config document, collecting every validation violation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))?;
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Config(violations))
    }
}

fn validate(config: &ScenarioConfig) -> Vec<String> {
    let mut v = Vec::new();
    let bound = |v: &mut Vec<String>, field: &str, value: f64, lo: f64, hi: f64| {
        if !(value.is_finite() && value >= lo && value <= hi) {
            v.push(format!("{field}: {value} outside [{lo}, {hi}]"));
        }
    };
    let positive = |v: &mut Vec<String>, field: &str, value: f64| {
        if !(value.is_finite() && value > 0.0) {
            v.push(format!("{field}: {value} must be finite and > 0"));
        }
    };

    if let Some(mode) = &config.mode {
        if !matches!(mode.as_str(), "retarded" | "nonretarded") {
            v.push(format!("mode: '{mode}' is not 'retarded' or 'nonretarded'"));
        }
    }

    let has_preset = config.scene.preset.is_some();
    let has_bodies = !config.scene.bodies.is_empty();
    if has_preset == has_bodies {
        v.push("scene: exactly one of `preset` or `bodies` must be given".into());
    }
    if let Some(name) = &config.scene.preset {
        if !casimir_core::PRESET_NAMES.contains(&name.as_str()) {
            v.push(format!(
                "scene.preset: unknown '{name}' (expected one of {:?})",
                casimir_core::PRESET_NAMES
            ));
        }
    }
    if let Some(p) = &config.scene.params {
        if !has_preset {
            v.push("scene.params: only valid together with scene.preset".into());
        }
        if let Some(x) = p.length_um {
            positive(&mut v, "scene.params.length_um", x);
        }
        if let Some(x) = p.area_um2 {
            positive(&mut v, "scene.params.area_um2", x);
        }
        if let Some(x) = p.separation_um {
            positive(&mut v, "scene.params.separation_um", x);
        }
        if let Some(c) = &p.convention {
            if parse_convention(c).is_none() {
                v.push(format!(
                    "scene.params.convention: '{c}' is not sphere_surface_gap, face_gap or center_distance"
                ));
            }
        }
        if let Some(r) = p.resolution {
            if r == 0 {
                v.push("scene.params.resolution: must be >= 1".into());
            }
        }
        if let Some(m) = &p.material {
            if casimir_core::materials::builtin_material(m).is_none() {
                v.push(format!(
                    "scene.params.material: unknown bundled material '{m}' (expected one of {:?})",
                    casimir_core::materials::builtin_material_names()
                ));
            }
        }
    }
    for (i, body) in config.scene.bodies.iter().enumerate() {
        validate_body(&mut v, &format!("scene.bodies[{i}]"), body);
    }

    if let Some(q) = &config.quadrature {
        if let Some(s) = &q.scheme {
            if !matches!(s.as_str(), "gauss_legendre_mapped" | "adaptive_simpson") {
                v.push(format!(
                    "quadrature.scheme: '{s}' is not gauss_legendre_mapped or adaptive_simpson"
                ));
            }
        }
        if let Some(n) = q.nodes {
            if n < 4 {
                v.push(format!("quadrature.nodes: {n} must be >= 4"));
            }
        }
        if let Some(x) = q.map_scale_ev {
            positive(&mut v, "quadrature.map_scale_ev", x);
        }
        if let Some(t) = q.rel_tol {
            if !(t > 0.0 && t <= 0.1) {
                v.push(format!("quadrature.rel_tol: {t} outside (0, 0.1]"));
            }
        }
    }

    if let Some(s) = &config.sweep {
        if !matches!(s.parameter.as_str(), "separation" | "angle") {
            v.push(format!(
                "sweep.parameter: '{}' is not separation or angle",
                s.parameter
            ));
        }
        let explicit = !s.grid.is_empty();
        let generated = s.grid_start.is_some() || s.grid_stop.is_some() || s.grid_count.is_some();
        match (explicit, generated) {
            (true, true) => {
                v.push("sweep: give either `grid` or grid_start/stop/count, not both".into())
            }
            (false, false) => v.push("sweep: needs `grid` or grid_start/stop/count".into()),
            (false, true) => match (s.grid_start, s.grid_stop, s.grid_count) {
                (Some(a), Some(b), Some(n)) => {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        v.push(format!("sweep: grid_start {a} must be < grid_stop {b}"));
                    }
                    if n < 2 {
                        v.push("sweep.grid_count: must be >= 2".into());
                    }
                    if let Some(sp) = &s.grid_spacing {
                        if !matches!(sp.as_str(), "linear" | "log") {
                            v.push(format!("sweep.grid_spacing: '{sp}' is not linear or log"));
                        }
                        if sp == "log" && a <= 0.0 {
                            v.push("sweep: log spacing needs grid_start > 0".into());
                        }
                    }
                }
                _ => {
                    v.push("sweep: grid_start, grid_stop and grid_count must all be present".into())
                }
            },
            (true, false) => {
                if s.grid.windows(2).any(|w| w[0] >= w[1]) {
                    v.push("sweep.grid: must be strictly increasing".into());
                }
            }
        }
        if let Some(f) = s.fd_step {
            bound(&mut v, "sweep.fd_step", f, 1e-6, 1e-1);
        }
        if !has_preset && s.reference.is_none() {
            v.push("sweep.reference: required for explicit-body scenes".into());
        }
    }

    if let Some(o) = &config.output {
        if let Some([lo, hi]) = o.fit_window {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                v.push(format!(
                    "output.fit_window: [{lo}, {hi}] must be increasing"
                ));
            }
        }
    }
    v
}

fn validate_body(v: &mut Vec<String>, path: &str, body: &BodyConfig) {
    match body.shape.kind.as_str() {
        "cube" => {
            if body.shape.side_um.is_none() {
                v.push(format!("{path}.shape: cube needs side_um"));
            }
        }
        "box" => {
            if body.shape.lx_um.is_none()
                || body.shape.ly_um.is_none()
                || body.shape.lz_um.is_none()
            {
                v.push(format!("{path}.shape: box needs lx_um, ly_um, lz_um"));
            }
        }
        "circular_cylinder" => {
            if body.shape.radius_um.is_none() || body.shape.height_um.is_none() {
                v.push(format!(
                    "{path}.shape: circular_cylinder needs radius_um, height_um"
                ));
            }
        }
        other => v.push(format!(
            "{path}.shape.kind: '{other}' is not cube, box or circular_cylinder"
        )),
    }
    for (i, d) in body.lattice.spacing_um.iter().enumerate() {
        if !(d.is_finite() && *d > 0.0) {
            v.push(format!("{path}.lattice.spacing_um[{i}]: {d} must be > 0"));
        }
    }
    if body.lattice.counts.contains(&0) {
        v.push(format!("{path}.lattice.counts: all must be >= 1"));
    }
    if let Some(st) = body.lattice.stretch {
        if st.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            v.push(format!("{path}.lattice.stretch: all factors must be > 0"));
        }
    }
    match body.inclusion.kind.as_str() {
        "sphere_radiative" | "sphere_static" => {
            match body.inclusion.radius_um {
                Some(r) if r.is_finite() && r > 0.0 => {}
                _ => v.push(format!("{path}.inclusion.radius_um: must be > 0")),
            }
        }
        "spheroid_static" => match body.inclusion.semi_axes_um {
            Some(axes) if axes.iter().all(|&a| a.is_finite() && a > 0.0) => {}
            _ => v.push(format!("{path}.inclusion.semi_axes_um: three positive values required")),
        },
        other => v.push(format!(
            "{path}.inclusion.kind: '{other}' is not sphere_radiative, sphere_static or spheroid_static"
        )),
    }
    validate_material(
        v,
        &format!("{path}.inclusion.material"),
        &body.inclusion.material,
    );
}

fn validate_material(v: &mut Vec<String>, path: &str, m: &MaterialConfig) {
    match m.kind.as_str() {
        "drude" => {
            if !m.plasma_ev.is_some_and(|x| x.is_finite() && x > 0.0) {
                v.push(format!("{path}.plasma_ev: must be > 0"));
            }
            if !m.damping_ev.is_some_and(|x| x.is_finite() && x >= 0.0) {
                v.push(format!("{path}.damping_ev: must be >= 0"));
            }
        }
        "lorentz" => {
            if m.oscillators.is_empty() {
                v.push(format!("{path}.oscillators: at least one required"));
            }
            for (i, o) in m.oscillators.iter().enumerate() {
                if !(o.strength_ev2 > 0.0 && o.resonance_ev > 0.0 && o.damping_ev >= 0.0) {
                    v.push(format!(
                        "{path}.oscillators[{i}]: strengths and resonances must be > 0"
                    ));
                }
            }
        }
        "constant" => {
            if !m.eps.is_some_and(|e| e.is_finite() && e >= 1.0) {
                v.push(format!("{path}.eps: must be >= 1"));
            }
        }
        "perfect_metal" => {}
        "tabulated" => {
            if m.csv_path.is_none() {
                v.push(format!("{path}.csv_path: required for tabulated data"));
            }
        }
        "maxwell_garnett" => {
            match m.fill {
                Some(f) if (0.0..=1.0).contains(&f) => {}
                Some(f) => v.push(format!("{path}.fill: {f} outside [0, 1]")),
                None => v.push(format!("{path}.fill: required")),
            }
            match (&m.inclusion, &m.host) {
                (Some(i), Some(h)) => {
                    validate_material(v, &format!("{path}.inclusion"), i);
                    validate_material(v, &format!("{path}.host"), h);
                }
                _ => v.push(format!("{path}: maxwell_garnett needs inclusion and host")),
            }
        }
        name if casimir_core::materials::builtin_material(name).is_some() => {}
        other => v.push(format!(
            "{path}.kind: unknown material '{other}' (models: drude, lorentz, constant, \
             perfect_metal, tabulated, maxwell_garnett; bundled: {:?})",
            casimir_core::materials::builtin_material_names()
        )),
    }
}

fn parse_convention(s: &str) -> Option<SeparationConvention> {
    match s {
        "sphere_surface_gap" => Some(SeparationConvention::SphereSurfaceGap),
        "face_gap" => Some(SeparationConvention::FaceGap),
        "center_distance" => Some(SeparationConvention::CenterDistance),
        _ => None,
    }
}

/// A validated config resolved into solver inputs.
pub struct BuiltScenario {
    pub scene: Scene,
    pub quad: QuadratureSpec,
    pub sweep: Option<SweepSpec>,
    pub output: OutputConfig,
}

/// Resolve a parsed config against the filesystem (tabulated data) and
/// build the scene, quadrature and sweep objects.
pub fn build_scenario(config: &ScenarioConfig, base_dir: &Path) -> Result<BuiltScenario, CliError> {
    let mode = match config.mode.as_deref() {
        Some("retarded") => Some(Mode::Retarded),
        Some("nonretarded") => Some(Mode::NonRetarded),
        _ => None,
    };

    let (scene, preset_axis, preset_reference) = if let Some(name) = &config.scene.preset {
        let p = config.scene.params.clone().unwrap_or_default();
        let params = PresetParams {
            length_um: p.length_um,
            area_um2: p.area_um2,
            separation_um: p.separation_um,
            convention: p.convention.as_deref().and_then(parse_convention),
            angle_rad: p.angle_rad,
            resolution: p.resolution,
            counts: p.counts.map(|c| (c[0], c[1], c[2])),
            radius_um: p.radius_um,
            material: p
                .material
                .as_deref()
                .and_then(casimir_core::materials::builtin_material),
            mode,
            static_spheres: p.static_spheres,
            variant: p.variant.clone(),
        };
        let preset = preset_scene(name, &params)?;
        let reference = match config.sweep.as_ref().map(|s| s.parameter.as_str()) {
            Some("angle") => preset.angle_rad,
            _ => preset.separation_um,
        };
        (preset.scene, Some(preset.axis), Some(reference))
    } else {
        let mut bodies = Vec::with_capacity(config.scene.bodies.len());
        for (i, bc) in config.scene.bodies.iter().enumerate() {
            bodies.push(build_body(bc, base_dir).map_err(|e| match e {
                CliError::Config(mut msgs) => {
                    for m in &mut msgs {
                        *m = format!("scene.bodies[{i}]: {m}");
                    }
                    CliError::Config(msgs)
                }
                other => other,
            })?);
        }
        let scene = Scene::new(bodies, mode.unwrap_or(Mode::Retarded))?;
        (scene, None, None)
    };

    let quad = build_quadrature(config.quadrature.as_ref(), &scene)?;
    let sweep = match &config.sweep {
        None => None,
        Some(s) => Some(build_sweep(s, preset_axis, preset_reference)?),
    };
    Ok(BuiltScenario {
        scene,
        quad,
        sweep,
        output: config.output.clone().unwrap_or_default(),
    })
}

fn build_body(bc: &BodyConfig, base_dir: &Path) -> Result<Body, CliError> {
    let shape = match bc.shape.kind.as_str() {
        "cube" => Shape::Cube {
            side_um: bc.shape.side_um.unwrap(),
        },
        "box" => Shape::Box {
            lx_um: bc.shape.lx_um.unwrap(),
            ly_um: bc.shape.ly_um.unwrap(),
            lz_um: bc.shape.lz_um.unwrap(),
        },
        _ => Shape::CircularCylinder {
            radius_um: bc.shape.radius_um.unwrap(),
            height_um: bc.shape.height_um.unwrap(),
        },
    };
    let lattice = Lattice {
        spacings_um: (
            bc.lattice.spacing_um[0],
            bc.lattice.spacing_um[1],
            bc.lattice.spacing_um[2],
        ),
        counts: (
            bc.lattice.counts[0],
            bc.lattice.counts[1],
            bc.lattice.counts[2],
        ),
        stretch: bc
            .lattice
            .stretch
            .map(|s| (s[0], s[1], s[2]))
            .unwrap_or((1.0, 1.0, 1.0)),
    };
    let material = build_material(&bc.inclusion.material, base_dir)?;
    let inclusion = match bc.inclusion.kind.as_str() {
        "sphere_radiative" => PolarizabilityModel::SphereRadiative {
            radius_um: bc.inclusion.radius_um.unwrap(),
            material,
        },
        "sphere_static" => PolarizabilityModel::SphereStatic {
            radius_um: bc.inclusion.radius_um.unwrap(),
            material,
        },
        _ => {
            let axes = bc.inclusion.semi_axes_um.unwrap();
            let orientation = match (bc.inclusion.orientation_axis, bc.inclusion.orientation_rad) {
                (Some(axis), Some(angle)) => UnitQuaternion::from_axis_angle(
                    &Unit::new_normalize(Vector3::new(axis[0], axis[1], axis[2])),
                    angle,
                ),
                _ => UnitQuaternion::identity(),
            };
            PolarizabilityModel::SpheroidStatic {
                semi_axes_um: (axes[0], axes[1], axes[2]),
                orientation,
                material,
            }
        }
    };
    let mut body = build_cluster(&shape, &lattice, &inclusion)?;
    if let Some(t) = &bc.transform {
        let rotation = match (t.rotation_axis, t.rotation_rad) {
            (Some(axis), Some(angle)) => UnitQuaternion::from_axis_angle(
                &Unit::new_normalize(Vector3::new(axis[0], axis[1], axis[2])),
                angle,
            ),
            _ => UnitQuaternion::identity(),
        };
        let translation = t
            .translation_um
            .map(|v| Vector3::new(v[0], v[1], v[2]))
            .unwrap_or_else(Vector3::zeros);
        body = transform_body(&body, rotation, translation);
    }
    Ok(body)
}

fn build_material(mc: &MaterialConfig, base_dir: &Path) -> Result<DielectricModel, CliError> {
    Ok(match mc.kind.as_str() {
        "drude" => DielectricModel::drude(mc.plasma_ev.unwrap(), mc.damping_ev.unwrap()),
        "lorentz" => DielectricModel::lorentz(
            mc.oscillators
                .iter()
                .map(|o| LorentzOscillator {
                    strength_ev2: o.strength_ev2,
                    resonance_ev: o.resonance_ev,
                    damping_ev: o.damping_ev,
                })
                .collect(),
        ),
        "constant" => DielectricModel::constant(mc.eps.unwrap())?,
        "perfect_metal" => DielectricModel::PerfectMetal,
        "tabulated" => {
            let path = mc.csv_path.as_ref().unwrap();
            let resolved = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            let file = File::open(&resolved).map_err(CliError::Io)?;
            DielectricModel::Tabulated {
                table: DielectricTable::from_csv(BufReader::new(file))?,
            }
        }
        "maxwell_garnett" => DielectricModel::maxwell_garnett(
            build_material(mc.inclusion.as_ref().unwrap(), base_dir)?,
            build_material(mc.host.as_ref().unwrap(), base_dir)?,
            mc.fill.unwrap(),
        )?,
        name => casimir_core::materials::builtin_material(name)
            .expect("validated bundled material name"),
    })
}

fn build_quadrature(
    qc: Option<&QuadratureConfig>,
    scene: &Scene,
) -> Result<QuadratureSpec, CliError> {
    let scheme = match qc.and_then(|q| q.scheme.as_deref()) {
        Some("adaptive_simpson") => QuadScheme::AdaptiveSimpson,
        _ => QuadScheme::GaussLegendreMapped,
    };
    let nodes = qc.and_then(|q| q.nodes).unwrap_or(40);
    let map_scale = qc
        .and_then(|q| q.map_scale_ev)
        .unwrap_or_else(|| casimir_core::suggested_map_scale(scene));
    let spec = match scheme {
        QuadScheme::GaussLegendreMapped => QuadratureSpec::gauss_mapped(nodes, map_scale)?,
        QuadScheme::AdaptiveSimpson => {
            QuadratureSpec::adaptive(nodes, map_scale, qc.and_then(|q| q.rel_tol).unwrap_or(1e-4))?
        }
    };
    Ok(spec)
}

fn build_sweep(
    sc: &SweepConfig,
    preset_axis: Option<Unit<Vector3<f64>>>,
    preset_reference: Option<f64>,
) -> Result<SweepSpec, CliError> {
    let axis = sc
        .axis
        .map(|a| Unit::new_normalize(Vector3::new(a[0], a[1], a[2])))
        .or(preset_axis)
        .unwrap_or_else(Vector3::z_axis);
    let grid = if !sc.grid.is_empty() {
        sc.grid.clone()
    } else {
        let (a, b, n) = (
            sc.grid_start.unwrap(),
            sc.grid_stop.unwrap(),
            sc.grid_count.unwrap(),
        );
        match sc.grid_spacing.as_deref() {
            Some("log") => (0..n)
                .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
                .collect(),
            _ => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    };
    let reference = sc
        .reference
        .or(preset_reference)
        .expect("validated: reference required for explicit scenes");
    let body_index = sc.body_index.unwrap_or(1);
    let mut spec = match sc.parameter.as_str() {
        "separation" => SweepSpec::separation(axis, reference, grid, body_index),
        _ => SweepSpec::angle(axis, reference, grid, body_index),
    };
    spec.fd_step = sc.fd_step.unwrap_or(DEFAULT_FD_STEP);
    spec.allow_one_sided = sc.allow_one_sided;
    Ok(spec)
}
