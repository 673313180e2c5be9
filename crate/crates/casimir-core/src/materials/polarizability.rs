//! Particle polarizability tensors on the imaginary frequency axis.

use nalgebra::{Matrix3, UnitQuaternion};

use super::{depolarization_factors, DielectricModel};
use crate::error::CoreError;
use crate::units::ImagFrequency;

/// Polarizability of a single inclusion, in μm³.
///
/// Spheres support the finite-size radiative correction; spheroids are
/// static only (no correction is defined for them here) and in retarded
/// scenes are used with their static tensor, a documented limitation.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizabilityModel {
    /// Sphere with the radiative correction evaluated at q = iκ. The
    /// denominator is `3 + (ε−1)(1 − (κa)² − (2/3)(κa)³)`, which stays
    /// meaningful only for κa < 1; outside that the model reports a
    /// singular-polarizability error rather than integrating garbage.
    SphereRadiative {
        radius_um: f64,
        material: DielectricModel,
    },
    /// Sphere in the static (Clausius–Mossotti) limit: a³(ε−1)/(ε+2).
    SphereStatic {
        radius_um: f64,
        material: DielectricModel,
    },
    /// General static ellipsoid, αᵢ = (a₁a₂a₃/3)(ε−1)/(1 + Lᵢ(ε−1)),
    /// with the body-frame orientation rotating the principal axes.
    SpheroidStatic {
        semi_axes_um: (f64, f64, f64),
        orientation: UnitQuaternion<f64>,
        material: DielectricModel,
    },
}

/// Evaluated polarizability: scalar for spheres, full tensor for spheroids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaTensor {
    Scalar(f64),
    Tensor(Matrix3<f64>),
}

impl AlphaTensor {
    /// Dense 3×3 form.
    pub fn as_matrix(&self) -> Matrix3<f64> {
        match self {
            AlphaTensor::Scalar(a) => Matrix3::from_diagonal_element(*a),
            AlphaTensor::Tensor(t) => *t,
        }
    }

    /// Inverse as a 3×3 block for the system-matrix diagonal.
    pub fn inverse(&self, xi: ImagFrequency) -> Result<Matrix3<f64>, CoreError> {
        match self {
            AlphaTensor::Scalar(a) => {
                if *a <= 0.0 || !a.is_finite() {
                    return Err(CoreError::SingularPolarizability {
                        xi_ev: xi.xi_ev,
                        kappa_a: 0.0,
                    });
                }
                Ok(Matrix3::from_diagonal_element(1.0 / a))
            }
            AlphaTensor::Tensor(t) => t.try_inverse().ok_or(CoreError::SingularPolarizability {
                xi_ev: xi.xi_ev,
                kappa_a: 0.0,
            }),
        }
    }

    /// Symmetric square root, used for the unit-diagonal scaling of the
    /// system matrix. Requires a positive (semi-)definite tensor.
    pub fn sqrt(&self, xi: ImagFrequency) -> Result<Matrix3<f64>, CoreError> {
        match self {
            AlphaTensor::Scalar(a) => {
                if *a <= 0.0 || !a.is_finite() {
                    return Err(CoreError::SingularPolarizability {
                        xi_ev: xi.xi_ev,
                        kappa_a: 0.0,
                    });
                }
                Ok(Matrix3::from_diagonal_element(a.sqrt()))
            }
            AlphaTensor::Tensor(t) => {
                let eig = t.symmetric_eigen();
                if eig.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
                    return Err(CoreError::SingularPolarizability {
                        xi_ev: xi.xi_ev,
                        kappa_a: 0.0,
                    });
                }
                let d = Matrix3::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
                Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
            }
        }
    }
}

impl PolarizabilityModel {
    pub fn material(&self) -> &DielectricModel {
        match self {
            PolarizabilityModel::SphereRadiative { material, .. }
            | PolarizabilityModel::SphereStatic { material, .. }
            | PolarizabilityModel::SpheroidStatic { material, .. } => material,
        }
    }

    /// Radius of the bounding sphere, used for overlap checks.
    pub fn contact_radius_um(&self) -> f64 {
        match self {
            PolarizabilityModel::SphereRadiative { radius_um, .. }
            | PolarizabilityModel::SphereStatic { radius_um, .. } => *radius_um,
            PolarizabilityModel::SpheroidStatic { semi_axes_um, .. } => {
                semi_axes_um.0.max(semi_axes_um.1).max(semi_axes_um.2)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            PolarizabilityModel::SphereRadiative { radius_um, .. }
            | PolarizabilityModel::SphereStatic { radius_um, .. } => {
                if !ok(*radius_um) {
                    return Err(CoreError::invalid(
                        "sphere radius",
                        format!("{radius_um} um must be finite and > 0"),
                    ));
                }
            }
            PolarizabilityModel::SpheroidStatic { semi_axes_um, .. } => {
                let (a, b, c) = *semi_axes_um;
                if !(ok(a) && ok(b) && ok(c)) {
                    return Err(CoreError::invalid(
                        "spheroid semi-axes",
                        format!("({a}, {b}, {c}) um must all be finite and > 0"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Evaluate the polarizability at the given node. The tensor is in the
    /// model's own (body) frame; rigid-body rotation is applied by the
    /// geometry layer.
    pub fn alpha(&self, xi: ImagFrequency) -> Result<AlphaTensor, CoreError> {
        match self {
            PolarizabilityModel::SphereRadiative {
                radius_um,
                material,
            } => Ok(AlphaTensor::Scalar(sphere_alpha(
                *radius_um,
                material,
                xi,
                xi.kappa(),
            )?)),
            PolarizabilityModel::SphereStatic {
                radius_um,
                material,
            } => Ok(AlphaTensor::Scalar(sphere_alpha(
                *radius_um, material, xi, 0.0,
            )?)),
            PolarizabilityModel::SpheroidStatic {
                semi_axes_um,
                orientation,
                material,
            } => {
                let t = spheroid_alpha(*semi_axes_um, material, xi)?;
                let r = orientation.to_rotation_matrix();
                Ok(AlphaTensor::Tensor(r * t * r.transpose()))
            }
        }
    }
}

/// Scalar sphere polarizability at q = iκ:
/// `a³(ε−1) / (3 + (ε−1)(1 − (κa)² − (2/3)(κa)³))`,
/// with the ε → ∞ limit `a³ / (1 − (κa)² − (2/3)(κa)³)` for perfect metal.
fn sphere_alpha(
    radius_um: f64,
    material: &DielectricModel,
    xi: ImagFrequency,
    kappa: f64,
) -> Result<f64, CoreError> {
    let a = radius_um;
    let ka = kappa * a;
    if ka >= 1.0 {
        return Err(CoreError::SingularPolarizability {
            xi_ev: xi.xi_ev,
            kappa_a: ka,
        });
    }
    let bracket = 1.0 - ka * ka - 2.0 / 3.0 * ka * ka * ka;
    let eps = material.eval(xi)?;
    let (num, den) = if eps.is_infinite() {
        (a * a * a, bracket)
    } else {
        (a * a * a * (eps - 1.0), 3.0 + (eps - 1.0) * bracket)
    };
    if den <= 0.0 || !den.is_finite() {
        return Err(CoreError::SingularPolarizability {
            xi_ev: xi.xi_ev,
            kappa_a: ka,
        });
    }
    Ok(num / den)
}

/// Static ellipsoid polarizability tensor in its principal frame,
/// normalized so the degenerate sphere recovers a³(ε−1)/(ε+2).
fn spheroid_alpha(
    semi_axes: (f64, f64, f64),
    material: &DielectricModel,
    xi: ImagFrequency,
) -> Result<Matrix3<f64>, CoreError> {
    let (a1, a2, a3) = semi_axes;
    let vol3 = a1 * a2 * a3 / 3.0;
    let (l1, l2, l3) = depolarization_factors(semi_axes);
    let eps = material.eval(xi)?;
    let alpha_i = |l: f64| {
        if eps.is_infinite() {
            vol3 / l
        } else {
            vol3 * (eps - 1.0) / (1.0 + l * (eps - 1.0))
        }
    };
    Ok(Matrix3::from_diagonal(&nalgebra::Vector3::new(
        alpha_i(l1),
        alpha_i(l2),
        alpha_i(l3),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ImagFrequency, HBAR_C_EV_UM};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn nr(v: f64) -> ImagFrequency {
        ImagFrequency::non_retarded(v).unwrap()
    }

    #[test]
    fn static_clausius_mossotti() {
        let m = PolarizabilityModel::SphereRadiative {
            radius_um: 1.0,
            material: DielectricModel::constant(3.0).unwrap(),
        };
        // κ = 0 collapses the radiative formula to (ε−1)/(ε+2).
        match m.alpha(nr(1.0)).unwrap() {
            AlphaTensor::Scalar(a) => assert_relative_eq!(a, 0.4, max_relative = 1e-15),
            _ => panic!("expected scalar"),
        }
    }

    #[test]
    fn perfect_metal_static_limit() {
        let m = PolarizabilityModel::SphereStatic {
            radius_um: 0.1,
            material: DielectricModel::PerfectMetal,
        };
        match m.alpha(nr(2.0)).unwrap() {
            AlphaTensor::Scalar(a) => assert_relative_eq!(a, 1e-3, max_relative = 1e-15),
            _ => panic!("expected scalar"),
        }
    }

    #[test]
    fn radiative_matches_independent_formula() {
        // Re-evaluate the closed formula through an independent expression.
        let a = 0.05;
        let gold = DielectricModel::drude(9.0, 0.035);
        let xi = ImagFrequency::retarded(1.0).unwrap();
        let m = PolarizabilityModel::SphereRadiative {
            radius_um: a,
            material: gold.clone(),
        };
        let got = match m.alpha(xi).unwrap() {
            AlphaTensor::Scalar(v) => v,
            _ => unreachable!(),
        };
        let eps = 1.0 + 9.0_f64.powi(2) / (1.0 * (1.0 + 0.035));
        let ka = (1.0 / HBAR_C_EV_UM) * a;
        let expect = a.powi(3) * (eps - 1.0)
            / (3.0 + (eps - 1.0) * (1.0 - ka.powi(2) - 2.0 / 3.0 * ka.powi(3)));
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn radiative_equals_static_at_zero_kappa() {
        let gold = DielectricModel::drude(9.0, 0.035);
        for radius in [0.01, 0.05, 0.2] {
            let rad = PolarizabilityModel::SphereRadiative {
                radius_um: radius,
                material: gold.clone(),
            };
            let stat = PolarizabilityModel::SphereStatic {
                radius_um: radius,
                material: gold.clone(),
            };
            for v in [0.1, 1.0, 10.0] {
                let a = rad.alpha(nr(v)).unwrap();
                let b = stat.alpha(nr(v)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn kappa_validity_enforced() {
        let m = PolarizabilityModel::SphereRadiative {
            radius_um: 0.5,
            material: DielectricModel::PerfectMetal,
        };
        // κa = 0.5/ħc · 0.5 ≈ 1.27 ≥ 1 must fail loudly.
        let xi = ImagFrequency::retarded(0.5).unwrap();
        match m.alpha(xi) {
            Err(CoreError::SingularPolarizability { kappa_a, .. }) => assert!(kappa_a >= 1.0),
            other => panic!("expected singular polarizability, got {other:?}"),
        }
    }

    #[test]
    fn perfect_metal_denominator_guard() {
        // κa just below 1 still drives the perfect-metal bracket negative.
        let m = PolarizabilityModel::SphereRadiative {
            radius_um: 0.18,
            material: DielectricModel::PerfectMetal,
        };
        let xi = ImagFrequency::retarded(1.0).unwrap(); // κa ≈ 0.912
        assert!(matches!(
            m.alpha(xi),
            Err(CoreError::SingularPolarizability { .. })
        ));
    }

    #[test]
    fn spheroid_sphere_limit() {
        let m = PolarizabilityModel::SpheroidStatic {
            semi_axes_um: (1.0, 1.0, 1.0),
            orientation: UnitQuaternion::identity(),
            material: DielectricModel::constant(3.0).unwrap(),
        };
        let t = m.alpha(nr(1.0)).unwrap().as_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.4 } else { 0.0 };
                assert_relative_eq!(t[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn prolate_anisotropy_and_rotation() {
        let aspect: f64 = 1.2;
        let m = PolarizabilityModel::SpheroidStatic {
            semi_axes_um: (aspect * 0.01, 0.01, 0.01),
            orientation: UnitQuaternion::identity(),
            material: DielectricModel::PerfectMetal,
        };
        let t = m.alpha(nr(1.0)).unwrap().as_matrix();
        assert!(t[(0, 0)] > t[(1, 1)], "long axis must polarize more");
        assert_relative_eq!(t[(1, 1)], t[(2, 2)], max_relative = 1e-10);

        // Rotating the body frame by π/2 about z swaps the x and y axes.
        let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2);
        let m_rot = PolarizabilityModel::SpheroidStatic {
            semi_axes_um: (aspect * 0.01, 0.01, 0.01),
            orientation: rot,
            material: DielectricModel::PerfectMetal,
        };
        let tr = m_rot.alpha(nr(1.0)).unwrap().as_matrix();
        assert_relative_eq!(tr[(1, 1)], t[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(tr[(0, 0)], t[(1, 1)], max_relative = 1e-12);
    }

    #[test]
    fn vacuum_inclusion_is_zero_tensor() {
        let m = PolarizabilityModel::SpheroidStatic {
            semi_axes_um: (1.2, 1.0, 1.0),
            orientation: UnitQuaternion::identity(),
            material: DielectricModel::constant(1.0).unwrap(),
        };
        let t = m.alpha(nr(1.0)).unwrap().as_matrix();
        assert_eq!(t, Matrix3::zeros());
    }

    #[test]
    fn alpha_sqrt_roundtrip() {
        let m = PolarizabilityModel::SpheroidStatic {
            semi_axes_um: (1.2, 1.0, 1.0),
            orientation: UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.7),
            material: DielectricModel::constant(4.0).unwrap(),
        };
        let alpha = m.alpha(nr(0.5)).unwrap();
        let s = alpha.sqrt(nr(0.5)).unwrap();
        let back = s * s;
        let t = alpha.as_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(back[(i, j)], t[(i, j)], epsilon = 1e-14);
            }
        }
    }
}
