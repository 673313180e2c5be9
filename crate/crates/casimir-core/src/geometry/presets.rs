//! Bundled two-body scenarios.
//!
//! Each preset builds a pair of nano-structured bodies with documented
//! default dimensions and exposes which body a sweep should move or rotate.
//! Defaults can be overridden through [`PresetParams`]; resolutions are
//! deliberately overridable so desk-scale runs stay cheap.

use nalgebra::{Unit, UnitQuaternion, Vector3};

use super::{build_cluster, Body, Lattice, Scene, Shape};
use crate::error::CoreError;
use crate::materials::{DielectricModel, PolarizabilityModel};
use crate::units::Mode;

/// How a separation parameter is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationConvention {
    /// Gap between the nearest inclusion surfaces of the two bodies.
    SphereSurfaceGap,
    /// Gap between the bounding shape faces along the stacking axis.
    FaceGap,
    /// Distance between the body centres.
    CenterDistance,
}

/// Overridable knobs of a preset. `Default` leaves every choice to the
/// preset's documented defaults.
#[derive(Debug, Clone, Default)]
pub struct PresetParams {
    /// Object scale L in μm (cube/box presets, cylinder's matching cube).
    pub length_um: Option<f64>,
    /// Base area A in μm² (fig4 preset).
    pub area_um2: Option<f64>,
    /// Separation parameter in μm.
    pub separation_um: Option<f64>,
    /// Interpretation of `separation_um`.
    pub convention: Option<SeparationConvention>,
    /// Relative rotation of the swept body, radians.
    pub angle_rad: Option<f64>,
    /// Lattice sites per object edge (cubes) or per √A (fig4).
    pub resolution: Option<u32>,
    /// Explicit lattice counts (fig3 preset).
    pub counts: Option<(u32, u32, u32)>,
    /// Inclusion radius override in μm.
    pub radius_um: Option<f64>,
    /// Sphere material; defaults to Drude gold.
    pub material: Option<DielectricModel>,
    /// Interaction mode override.
    pub mode: Option<Mode>,
    /// Use the static sphere polarizability instead of the
    /// radiative-corrected one.
    pub static_spheres: bool,
    /// Anisotropy variant of the fig4 preset.
    pub variant: Option<String>,
}

/// A preset scene plus the bookkeeping a sweep needs.
#[derive(Debug, Clone)]
pub struct PresetScene {
    pub scene: Scene,
    /// Stacking axis of the two bodies.
    pub axis: Unit<Vector3<f64>>,
    /// Separation the scene was built at, in the preset's convention.
    pub separation_um: f64,
    /// Relative rotation the scene was built at, radians.
    pub angle_rad: f64,
    /// Body index a sweep should move or rotate.
    pub sweep_body: usize,
}

pub const PRESET_NAMES: [&str; 6] = [
    "fig1_cubes",
    "fig1_cylinder",
    "fig2_materials",
    "fig2_resolution",
    "fig3_rect_torque",
    "fig4_aniso_torque",
];

/// One-line description per preset, for `presets list`.
pub fn preset_descriptions() -> Vec<(&'static str, String)> {
    vec![
        (
            "fig1_cubes",
            "two cubes of lattice spheres; defaults L=1 um, 10^3 sites, r=d/3 (fill 4pi/81), gold, retarded, sphere-surface gap L/2".into(),
        ),
        (
            "fig1_cylinder",
            "two circular cylinders, base area L^2 and height 0.8L; defaults L=5 um, spacing L/10, gold, retarded".into(),
        ),
        (
            "fig2_materials",
            "fig1_cubes geometry at L=0.5 um with selectable sphere material".into(),
        ),
        (
            "fig2_resolution",
            "fig1_cubes geometry at L=5 um with selectable lattice resolution at fixed filling fraction".into(),
        ),
        (
            "fig3_rect_torque",
            "two rectangular boxes L x 2L x 0.5L, 10x20x5 lattice, face gap 0.35L, one box rotated about the stacking axis; non-retarded".into(),
        ),
        (
            "fig4_aniso_torque",
            "two circular cylinders of anisotropic metamaterial (variants: spheres_asymmetric, prolates_symmetric, combined); area 1 um^2, height 0.43 um, face gap 0.4 um; non-retarded".into(),
        ),
    ]
}

/// Build a named preset scene.
pub fn preset_scene(name: &str, params: &PresetParams) -> Result<PresetScene, CoreError> {
    match name {
        "fig1_cubes" => cubes_preset(params, 1.0, Mode::Retarded),
        "fig1_cylinder" => cylinder_pair_preset(params),
        "fig2_materials" => cubes_preset(params, 0.5, Mode::Retarded),
        "fig2_resolution" => cubes_preset(params, 5.0, Mode::Retarded),
        "fig3_rect_torque" => rect_torque_preset(params),
        "fig4_aniso_torque" => aniso_torque_preset(params),
        other => Err(CoreError::UnknownPreset(other.to_string())),
    }
}

fn sphere_model(params: &PresetParams, radius_um: f64) -> PolarizabilityModel {
    let material = params
        .material
        .clone()
        .unwrap_or(DielectricModel::drude(9.0, 0.035));
    if params.static_spheres {
        PolarizabilityModel::SphereStatic {
            radius_um,
            material,
        }
    } else {
        PolarizabilityModel::SphereRadiative {
            radius_um,
            material,
        }
    }
}

/// Stack two bodies along `axis` at the requested separation.
fn stack_pair(
    body0: Body,
    body1: Body,
    axis: Unit<Vector3<f64>>,
    separation_um: f64,
    convention: SeparationConvention,
    half_extents: (f64, f64),
    mode: Mode,
) -> Result<Scene, CoreError> {
    let center_distance = match convention {
        SeparationConvention::CenterDistance => separation_um,
        SeparationConvention::SphereSurfaceGap => {
            let reach0 = body0.max_reach_along(&axis);
            let reach1 = body1.max_reach_along(&Unit::new_normalize(-axis.into_inner()));
            separation_um + reach0 + reach1
        }
        SeparationConvention::FaceGap => separation_um + half_extents.0 + half_extents.1,
    };
    let b0 = body0.translated(-0.5 * center_distance * axis.into_inner());
    let b1 = body1.translated(0.5 * center_distance * axis.into_inner());
    Scene::new(vec![b0, b1], mode)
}

fn cubes_preset(
    params: &PresetParams,
    default_l: f64,
    default_mode: Mode,
) -> Result<PresetScene, CoreError> {
    let l = params.length_um.unwrap_or(default_l);
    let res = params.resolution.unwrap_or(10);
    let spacing = l / res as f64;
    let radius = params.radius_um.unwrap_or(spacing / 3.0);
    let shape = Shape::Cube { side_um: l };
    let lattice = Lattice::cubic(spacing, res);
    let inclusion = sphere_model(params, radius);
    let body = build_cluster(&shape, &lattice, &inclusion)?;
    let axis = Vector3::z_axis();
    let sep = params.separation_um.unwrap_or(l / 2.0);
    let convention = params
        .convention
        .unwrap_or(SeparationConvention::SphereSurfaceGap);
    let mode = params.mode.unwrap_or(default_mode);
    let scene = stack_pair(
        body.clone(),
        body,
        axis,
        sep,
        convention,
        (l / 2.0, l / 2.0),
        mode,
    )?;
    Ok(PresetScene {
        scene,
        axis,
        separation_um: sep,
        angle_rad: 0.0,
        sweep_body: 1,
    })
}

fn cylinder_pair_preset(params: &PresetParams) -> Result<PresetScene, CoreError> {
    let l = params.length_um.unwrap_or(5.0);
    let res = params.resolution.unwrap_or(10);
    let spacing = l / res as f64;
    // Base area equals the matching cube's L², height is 0.8 L.
    let radius_cyl = l / std::f64::consts::PI.sqrt();
    let height = 0.8 * l;
    let shape = Shape::CircularCylinder {
        radius_um: radius_cyl,
        height_um: height,
    };
    let lattice = covering_lattice(radius_cyl, height, (spacing, spacing, spacing));
    let radius = params.radius_um.unwrap_or(spacing / 3.0);
    let inclusion = sphere_model(params, radius);
    let body = build_cluster(&shape, &lattice, &inclusion)?;
    let axis = Vector3::z_axis();
    let sep = params.separation_um.unwrap_or(l / 2.0);
    let convention = params
        .convention
        .unwrap_or(SeparationConvention::SphereSurfaceGap);
    let mode = params.mode.unwrap_or(Mode::Retarded);
    let half = height / 2.0;
    let scene = stack_pair(
        body.clone(),
        body,
        axis,
        sep,
        convention,
        (half, half),
        mode,
    )?;
    Ok(PresetScene {
        scene,
        axis,
        separation_um: sep,
        angle_rad: 0.0,
        sweep_body: 1,
    })
}

fn rect_torque_preset(params: &PresetParams) -> Result<PresetScene, CoreError> {
    let l = params.length_um.unwrap_or(1.0);
    let counts = params.counts.unwrap_or((10, 20, 5));
    let (lx, ly, lz) = (l, 2.0 * l, 0.5 * l);
    let spacings = (
        lx / counts.0 as f64,
        ly / counts.1 as f64,
        lz / counts.2 as f64,
    );
    let min_spacing = spacings.0.min(spacings.1).min(spacings.2);
    let radius = params.radius_um.unwrap_or(min_spacing / 3.0);
    let shape = Shape::Box {
        lx_um: lx,
        ly_um: ly,
        lz_um: lz,
    };
    let lattice = Lattice {
        spacings_um: spacings,
        counts,
        stretch: (1.0, 1.0, 1.0),
    };
    let inclusion = sphere_model(params, radius);
    let body = build_cluster(&shape, &lattice, &inclusion)?;
    let axis = Vector3::z_axis();
    let angle = params.angle_rad.unwrap_or(0.0);
    let rotated = body.rotated_about_center(axis, angle);
    let sep = params.separation_um.unwrap_or(0.35 * l);
    let convention = params.convention.unwrap_or(SeparationConvention::FaceGap);
    let mode = params.mode.unwrap_or(Mode::NonRetarded);
    let half = lz / 2.0;
    let scene = stack_pair(body, rotated, axis, sep, convention, (half, half), mode)?;
    Ok(PresetScene {
        scene,
        axis,
        separation_um: sep,
        angle_rad: angle,
        sweep_body: 1,
    })
}

fn aniso_torque_preset(params: &PresetParams) -> Result<PresetScene, CoreError> {
    let area = params.area_um2.unwrap_or(1.0);
    let sqrt_a = area.sqrt();
    let res = params.resolution.unwrap_or(14);
    let d = sqrt_a / res as f64;
    let radius_cyl = (area / std::f64::consts::PI).sqrt();
    let height = 0.43 * sqrt_a;
    let variant = params.variant.as_deref().unwrap_or("prolates_symmetric");
    const STRETCH: f64 = 1.2;
    const ASPECT: f64 = 1.2;
    // The long semi-axis (prolates) and sphere radius both default to d/3.
    let r_incl = params.radius_um.unwrap_or(d / 3.0);
    let material = params
        .material
        .clone()
        .unwrap_or(DielectricModel::drude(9.0, 0.035));
    let (stretch, inclusion) = match variant {
        // Spheres on a lattice stretched along x.
        "spheres_asymmetric" => ((STRETCH, 1.0, 1.0), sphere_model(params, r_incl)),
        // Prolate spheroids (long axis x) on a cubic lattice.
        "prolates_symmetric" => (
            (1.0, 1.0, 1.0),
            PolarizabilityModel::SpheroidStatic {
                semi_axes_um: (r_incl, r_incl / ASPECT, r_incl / ASPECT),
                orientation: UnitQuaternion::identity(),
                material,
            },
        ),
        // Both anisotropies, long axis along the stretched direction.
        "combined" => (
            (STRETCH, 1.0, 1.0),
            PolarizabilityModel::SpheroidStatic {
                semi_axes_um: (r_incl, r_incl / ASPECT, r_incl / ASPECT),
                orientation: UnitQuaternion::identity(),
                material,
            },
        ),
        other => {
            return Err(CoreError::invalid(
                "fig4 variant",
                format!("'{other}' (expected spheres_asymmetric, prolates_symmetric or combined)"),
            ))
        }
    };
    let shape = Shape::CircularCylinder {
        radius_um: radius_cyl,
        height_um: height,
    };
    let lattice = covering_lattice(
        radius_cyl,
        height,
        (d * stretch.0, d * stretch.1, d * stretch.2),
    );
    let body = build_cluster(&shape, &lattice, &inclusion)?;
    let axis = Vector3::z_axis();
    let angle = params.angle_rad.unwrap_or(0.0);
    let rotated = body.rotated_about_center(axis, angle);
    let sep = params.separation_um.unwrap_or(0.4 * sqrt_a);
    let convention = params.convention.unwrap_or(SeparationConvention::FaceGap);
    let mode = params.mode.unwrap_or(Mode::NonRetarded);
    let half = height / 2.0;
    let scene = stack_pair(body, rotated, axis, sep, convention, (half, half), mode)?;
    Ok(PresetScene {
        scene,
        axis,
        separation_um: sep,
        angle_rad: angle,
        sweep_body: 1,
    })
}

/// Lattice that covers a cylinder of the given radius/height: the in-plane
/// grid overshoots the disc (the shape cut trims it), the axial count tiles
/// the height.
fn covering_lattice(radius: f64, height: f64, spacings: (f64, f64, f64)) -> Lattice {
    let (dx, dy, dz) = spacings;
    let nx = (2.0 * radius / dx).ceil() as u32 + 1;
    let ny = (2.0 * radius / dy).ceil() as u32 + 1;
    let nz = ((height / dz + 1e-9).floor() as u32).max(1);
    Lattice {
        spacings_um: (dx, dy, dz),
        counts: (nx, ny, nz),
        stretch: (1.0, 1.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn fig1_cubes_defaults() {
        let p = PresetParams {
            length_um: Some(0.5),
            separation_um: Some(0.25),
            ..Default::default()
        };
        let preset = preset_scene("fig1_cubes", &p).unwrap();
        assert_eq!(preset.scene.particle_count(), 2000);
        assert_eq!(preset.scene.mode, Mode::Retarded);
        // Sphere-surface gap equals the requested separation.
        let labs0 = preset.scene.bodies()[0].lab_positions();
        let labs1 = preset.scene.bodies()[1].lab_positions();
        let r = 0.5 / 30.0;
        let mut min_gap = f64::INFINITY;
        for a in &labs0 {
            for b in &labs1 {
                min_gap = min_gap.min((a - b).norm() - 2.0 * r);
            }
        }
        assert_relative_eq!(min_gap, 0.25, max_relative = 1e-10);
    }

    #[test]
    fn fig1_cubes_filling_fraction_exact() {
        for res in [4, 6, 8, 10] {
            let p = PresetParams {
                resolution: Some(res),
                ..Default::default()
            };
            let preset = preset_scene("fig1_cubes", &p).unwrap();
            let body = &preset.scene.bodies()[0];
            assert_eq!(body.len(), (res * res * res) as usize);
            let d = 1.0 / res as f64;
            let r = body.particles()[0].polarizability.contact_radius_um();
            let fill = 4.0 / 3.0 * PI * (r / d).powi(3);
            assert!((fill - 4.0 * PI / 81.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fig3_box_counts() {
        let preset = preset_scene("fig3_rect_torque", &PresetParams::default()).unwrap();
        assert_eq!(preset.scene.bodies()[0].len(), 10 * 20 * 5);
        assert_eq!(preset.scene.mode, Mode::NonRetarded);
        let desk = PresetParams {
            counts: Some((5, 10, 3)),
            ..Default::default()
        };
        let preset = preset_scene("fig3_rect_torque", &desk).unwrap();
        assert_eq!(preset.scene.bodies()[0].len(), 150);
    }

    #[test]
    fn fig3_aligned_at_zero_angle() {
        let preset = preset_scene("fig3_rect_torque", &PresetParams::default()).unwrap();
        assert_eq!(preset.angle_rad, 0.0);
        let b0 = &preset.scene.bodies()[0];
        let b1 = &preset.scene.bodies()[1];
        // Same body-frame clusters, only translated along z.
        assert_eq!(b0.particles(), b1.particles());
        assert_eq!(b0.rotation, UnitQuaternion::identity());
        assert_eq!(b1.rotation, UnitQuaternion::identity());
    }

    #[test]
    fn fig4_variants() {
        for (variant, expect_spheroid) in [
            ("spheres_asymmetric", false),
            ("prolates_symmetric", true),
            ("combined", true),
        ] {
            let p = PresetParams {
                resolution: Some(7),
                variant: Some(variant.into()),
                ..Default::default()
            };
            let preset = preset_scene("fig4_aniso_torque", &p).unwrap();
            let body = &preset.scene.bodies()[0];
            let is_spheroid = matches!(
                body.particles()[0].polarizability,
                PolarizabilityModel::SpheroidStatic { .. }
            );
            assert_eq!(is_spheroid, expect_spheroid, "variant {variant}");
            // In-plane containment.
            let rad = (1.0 / PI).sqrt();
            for pos in body.lab_positions() {
                let xy = pos.x * pos.x + pos.y * pos.y;
                assert!(xy <= rad * rad + 1e-9);
            }
        }
    }

    #[test]
    fn fig4_stretch_changes_count() {
        let mk = |variant: &str| {
            let p = PresetParams {
                resolution: Some(7),
                variant: Some(variant.into()),
                ..Default::default()
            };
            preset_scene("fig4_aniso_torque", &p)
                .unwrap()
                .scene
                .bodies()[0]
                .len()
        };
        let cubic = mk("prolates_symmetric");
        let stretched = mk("spheres_asymmetric");
        assert_ne!(cubic, stretched);
        assert!(stretched < cubic, "stretched lattice holds fewer sites");
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            preset_scene("fig9_wormholes", &PresetParams::default()),
            Err(CoreError::UnknownPreset(_))
        ));
    }

    #[test]
    fn angle_parameter_rotates_second_body() {
        let p = PresetParams {
            counts: Some((5, 10, 3)),
            angle_rad: Some(0.3),
            ..Default::default()
        };
        let preset = preset_scene("fig3_rect_torque", &p).unwrap();
        let b1 = &preset.scene.bodies()[1];
        let expected = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3);
        assert_relative_eq!(b1.rotation.angle(), expected.angle(), max_relative = 1e-12);
    }
}
