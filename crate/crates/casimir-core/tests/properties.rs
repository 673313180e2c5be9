//! Property tests for the solver's structural invariants.

use casimir_core::materials::PolarizabilityModel;
use casimir_core::*;
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// ε(iξ) decays monotonically towards 1 on the imaginary axis for
    /// Drude and Lorentz models.
    #[test]
    fn epsilon_monotone_decay(
        plasma in 1.0..30.0f64,
        damping in 0.0..1.0f64,
        strength in 1.0..300.0f64,
        resonance in 0.5..20.0f64,
        xi1 in 0.01..50.0f64,
        factor in 1.01..10.0f64,
    ) {
        let xi2 = xi1 * factor;
        for model in [
            DielectricModel::drude(plasma, damping),
            DielectricModel::lorentz(vec![materials::LorentzOscillator {
                strength_ev2: strength,
                resonance_ev: resonance,
                damping_ev: damping,
            }]),
        ] {
            let e1 = model.eval(ImagFrequency::non_retarded(xi1).unwrap()).unwrap();
            let e2 = model.eval(ImagFrequency::non_retarded(xi2).unwrap()).unwrap();
            prop_assert!(e1 >= 1.0 && e2 >= 1.0);
            prop_assert!(e2 <= e1 * (1.0 + 1e-14));
        }
    }

    /// The radiative sphere polarizability at κ = 0 equals the static one
    /// exactly, for any material and frequency.
    #[test]
    fn radiative_reduces_to_static(
        radius in 0.005..0.3f64,
        xi in 0.01..30.0f64,
        plasma in 1.0..20.0f64,
    ) {
        let material = DielectricModel::drude(plasma, 0.05);
        let rad = PolarizabilityModel::SphereRadiative { radius_um: radius, material: material.clone() };
        let stat = PolarizabilityModel::SphereStatic { radius_um: radius, material };
        let f = ImagFrequency::non_retarded(xi).unwrap();
        prop_assert_eq!(rad.alpha(f).unwrap(), stat.alpha(f).unwrap());
    }

    /// Ellipsoid depolarization factors sum to 1 for aspect ratios up to 10.
    #[test]
    fn depolarization_sum_rule(
        a in 0.1..1.0f64,
        aspect1 in 1.0..10.0f64,
        aspect2 in 1.0..10.0f64,
    ) {
        let (l1, l2, l3) = materials::depolarization_factors((a * aspect1, a, a / aspect2));
        prop_assert!((l1 + l2 + l3 - 1.0).abs() < 1e-12);
        prop_assert!(l1 > 0.0 && l2 > 0.0 && l3 > 0.0);
    }

    /// Dipole tensor parity and symmetry for arbitrary separations.
    #[test]
    fn dipole_tensor_parity(
        x in -5.0..5.0f64,
        y in -5.0..5.0f64,
        z in 0.1..5.0f64,
        kappa in 0.0..20.0f64,
    ) {
        let r = Vector3::new(x, y, z);
        let t = coupling::dipole_tensor(&r, kappa).unwrap();
        let t_neg = coupling::dipole_tensor(&(-r), kappa).unwrap();
        prop_assert!((t - t_neg).norm() <= 1e-14 * t.norm());
        prop_assert!((t - t.transpose()).norm() <= 1e-14 * t.norm());
    }

    /// Rigid transforms preserve intra-body distances and the overlap
    /// invariant.
    #[test]
    fn transforms_preserve_distances(
        angle in 0.0..std::f64::consts::TAU,
        ax in -1.0..1.0f64,
        ay in -1.0..1.0f64,
        tz in -3.0..3.0f64,
    ) {
        let axis = Vector3::new(ax, ay, 1.0);
        let q = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let body = build_cluster(
            &Shape::Cube { side_um: 1.0 },
            &Lattice::cubic(0.25, 4),
            &PolarizabilityModel::SphereStatic {
                radius_um: 0.08,
                material: DielectricModel::PerfectMetal,
            },
        )
        .unwrap();
        let moved = transform_body(&body, q, Vector3::new(0.0, 0.0, tz));
        let before = body.lab_positions();
        let after = moved.lab_positions();
        for i in 0..before.len().min(12) {
            for j in (i + 1)..before.len().min(12) {
                let d0 = (before[i] - before[j]).norm();
                let d1 = (after[i] - after[j]).norm();
                prop_assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }

    /// Rotating a whole scene rigidly leaves the log-determinant
    /// difference invariant (frame invariance of the energy integrand).
    #[test]
    fn frame_invariance_of_delta_logdet(
        angle in 0.0..std::f64::consts::TAU,
        xi in 0.05..3.0f64,
    ) {
        let p = PolarizabilityModel::SphereRadiative {
            radius_um: 0.03,
            material: DielectricModel::drude(9.0, 0.035),
        };
        let mk = |pos: Vector3<f64>| Body::new(vec![Particle { position_um: pos, polarizability: p.clone() }]).unwrap();
        let b0 = mk(Vector3::new(0.05, -0.02, 0.0));
        let b1 = mk(Vector3::new(0.1, 0.2, 0.5));
        let scene = Scene::new(vec![b0.clone(), b1.clone()], Mode::Retarded).unwrap();
        let q = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), angle);
        let rotated = Scene::new(
            vec![
                transform_body(&b0, q, Vector3::zeros()),
                transform_body(&b1, q, Vector3::zeros()),
            ],
            Mode::Retarded,
        )
        .unwrap();
        let f = ImagFrequency::retarded(xi).unwrap();
        let d0 = delta_logdet(&scene, f).unwrap();
        let d1 = delta_logdet(&rotated, f).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-10 * d0.abs().max(1e-30));
    }
}
