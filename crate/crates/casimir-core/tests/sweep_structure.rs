//! Structural checks of preset sweeps that go beyond single-module units:
//! symmetry properties the torque curves must inherit from the geometry.

use casimir_core::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn fig4_torques(variant: &str, grid: Vec<f64>) -> Vec<f64> {
    let params = PresetParams {
        resolution: Some(5),
        variant: Some(variant.into()),
        angle_rad: Some(grid[0]),
        ..Default::default()
    };
    let preset = preset_scene("fig4_aniso_torque", &params).unwrap();
    let quad = QuadratureSpec::gauss_mapped(8, suggested_map_scale(&preset.scene)).unwrap();
    let spec = SweepSpec::angle(preset.axis, preset.angle_rad, grid, 1);
    sweep(&preset.scene, &spec, &quad)
        .unwrap()
        .rows
        .iter()
        .map(|r| r.derivative.unwrap())
        .collect()
}

/// The stretched-lattice cylinder has C₂ symmetry in the plane, so its
/// torque has period π and is antisymmetric about θ = π/2:
/// τ(π/2 + x) = −τ(π/2 − x).
#[test]
fn fig4_torque_antisymmetry_about_half_pi() {
    let x = [0.3, 0.6, 0.9];
    let mut grid: Vec<f64> = x
        .iter()
        .flat_map(|&v| [FRAC_PI_2 - v, FRAC_PI_2 + v])
        .collect();
    grid.push(FRAC_PI_2 - 0.3 + PI); // period check partner
    grid.sort_by(f64::total_cmp);
    let tau = fig4_torques("spheres_asymmetric", grid.clone());
    let scale = tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));

    let at = |v: f64| {
        let i = grid.iter().position(|&g| (g - v).abs() < 1e-12).unwrap();
        tau[i]
    };
    for &v in &x {
        let plus = at(FRAC_PI_2 + v);
        let minus = at(FRAC_PI_2 - v);
        assert!(
            (plus + minus).abs() <= 1e-3 * scale,
            "x = {v}: tau(pi/2+x) = {plus:e}, tau(pi/2-x) = {minus:e}"
        );
    }
    // Period π.
    let a = at(FRAC_PI_2 - 0.3);
    let b = at(FRAC_PI_2 - 0.3 + PI);
    assert!(
        (a - b).abs() <= 1e-3 * scale,
        "tau not pi-periodic: {a:e} vs {b:e}"
    );
}

/// Near alignment the torque opposes the displacement (restoring), for
/// both torque presets.
#[test]
fn torque_is_restoring_near_alignment() {
    let theta = 0.15;
    let tau4 = fig4_torques("prolates_symmetric", vec![theta]);
    assert!(tau4[0] < 0.0, "fig4 torque at +{theta} rad: {:e}", tau4[0]);

    let params = PresetParams {
        counts: Some((4, 8, 2)),
        angle_rad: Some(theta),
        ..Default::default()
    };
    let preset = preset_scene("fig3_rect_torque", &params).unwrap();
    let quad = QuadratureSpec::gauss_mapped(8, suggested_map_scale(&preset.scene)).unwrap();
    let spec = SweepSpec::angle(preset.axis, preset.angle_rad, vec![theta], 1);
    let result = sweep(&preset.scene, &spec, &quad).unwrap();
    let tau3 = result.rows[0].derivative.unwrap();
    assert!(tau3 < 0.0, "fig3 torque at +{theta} rad: {tau3:e}");
}
