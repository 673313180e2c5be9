//! Cluster construction, rigid transforms, and scenes.
//!
//! A [`Body`] is a rigid cluster of polarizable inclusions: particle
//! positions in the body frame plus a rigid transform into the lab frame.
//! Clusters come from cutting a (possibly stretched) rectangular lattice to
//! a [`Shape`]; a site is kept when its cell centre lies inside the shape.

pub mod presets;

use nalgebra::{Matrix3, Unit, UnitQuaternion, Vector3};

use crate::error::CoreError;
use crate::materials::{AlphaTensor, PolarizabilityModel};
use crate::units::{ImagFrequency, Mode};

/// Rectangular lattice: spacings and site counts per axis, with optional
/// per-axis stretch factors multiplying the spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub spacings_um: (f64, f64, f64),
    pub counts: (u32, u32, u32),
    pub stretch: (f64, f64, f64),
}

impl Lattice {
    pub fn cubic(spacing_um: f64, count: u32) -> Self {
        Self {
            spacings_um: (spacing_um, spacing_um, spacing_um),
            counts: (count, count, count),
            stretch: (1.0, 1.0, 1.0),
        }
    }

    pub fn with_stretch(mut self, stretch: (f64, f64, f64)) -> Self {
        self.stretch = stretch;
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let (d1, d2, d3) = self.spacings_um;
        let (s1, s2, s3) = self.stretch;
        let (n1, n2, n3) = self.counts;
        if !(d1 > 0.0 && d2 > 0.0 && d3 > 0.0) {
            return Err(CoreError::invalid("lattice", "spacings must be > 0"));
        }
        if !(s1 > 0.0 && s2 > 0.0 && s3 > 0.0) {
            return Err(CoreError::invalid("lattice", "stretch factors must be > 0"));
        }
        if n1 < 1 || n2 < 1 || n3 < 1 {
            return Err(CoreError::invalid("lattice", "counts must be >= 1"));
        }
        Ok(())
    }

    /// Effective spacings after stretch.
    pub fn effective_spacings(&self) -> (f64, f64, f64) {
        (
            self.spacings_um.0 * self.stretch.0,
            self.spacings_um.1 * self.stretch.1,
            self.spacings_um.2 * self.stretch.2,
        )
    }

    /// Site positions of the grid, centred on the origin.
    fn sites(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        let (dx, dy, dz) = self.effective_spacings();
        let (nx, ny, nz) = self.counts;
        let off = |n: u32| (n as f64 - 1.0) / 2.0;
        let (ox, oy, oz) = (off(nx), off(ny), off(nz));
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| {
                (0..nx).map(move |i| {
                    Vector3::new(
                        (i as f64 - ox) * dx,
                        (j as f64 - oy) * dy,
                        (k as f64 - oz) * dz,
                    )
                })
            })
        })
    }
}

/// Solid region that cuts a lattice into a cluster, centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Cube { side_um: f64 },
    Box { lx_um: f64, ly_um: f64, lz_um: f64 },
    CircularCylinder { radius_um: f64, height_um: f64 },
}

impl Shape {
    pub fn validate(&self) -> Result<(), CoreError> {
        let dims: Vec<f64> = match self {
            Shape::Cube { side_um } => vec![*side_um],
            Shape::Box {
                lx_um,
                ly_um,
                lz_um,
            } => vec![*lx_um, *ly_um, *lz_um],
            Shape::CircularCylinder {
                radius_um,
                height_um,
            } => vec![*radius_um, *height_um],
        };
        if dims.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(CoreError::invalid("shape", "all dimensions must be > 0"));
        }
        Ok(())
    }

    /// Closed containment predicate for a cell centre.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Shape::Cube { side_um } => {
                let h = side_um / 2.0;
                p.x.abs() <= h && p.y.abs() <= h && p.z.abs() <= h
            }
            Shape::Box {
                lx_um,
                ly_um,
                lz_um,
            } => p.x.abs() <= lx_um / 2.0 && p.y.abs() <= ly_um / 2.0 && p.z.abs() <= lz_um / 2.0,
            Shape::CircularCylinder {
                radius_um,
                height_um,
            } => p.x * p.x + p.y * p.y <= radius_um * radius_um && p.z.abs() <= height_um / 2.0,
        }
    }

    /// Half-extent of the shape along a direction (axis-aligned support),
    /// used by face-gap placement.
    pub fn half_extent_along(&self, axis: &Unit<Vector3<f64>>) -> f64 {
        let a = axis.into_inner().map(f64::abs);
        match self {
            Shape::Cube { side_um } => side_um / 2.0 * (a.x + a.y + a.z),
            Shape::Box {
                lx_um,
                ly_um,
                lz_um,
            } => (lx_um * a.x + ly_um * a.y + lz_um * a.z) / 2.0,
            Shape::CircularCylinder {
                radius_um,
                height_um,
            } => radius_um * (a.x * a.x + a.y * a.y).sqrt() + height_um / 2.0 * a.z,
        }
    }
}

/// One inclusion of a body: position in the body frame plus its
/// polarizability model.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position_um: Vector3<f64>,
    pub polarizability: PolarizabilityModel,
}

/// Rigid cluster of particles with a lab-frame transform
/// (rotate-then-translate: `lab = R p + t`).
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    particles: Vec<Particle>,
    pub rotation: UnitQuaternion<f64>,
    pub translation_um: Vector3<f64>,
}

impl Body {
    /// Build a body from body-frame particles, validating the no-overlap
    /// invariant (pairwise centre distance > sum of contact radii).
    pub fn new(particles: Vec<Particle>) -> Result<Self, CoreError> {
        if particles.is_empty() {
            return Err(CoreError::EmptyCluster);
        }
        for p in &particles {
            p.polarizability.validate()?;
            if !p.position_um.iter().all(|v| v.is_finite()) {
                return Err(CoreError::invalid("particle position", "non-finite"));
            }
        }
        for i in 0..particles.len() {
            for j in (i + 1)..particles.len() {
                let dist = (particles[i].position_um - particles[j].position_um).norm();
                let contact = particles[i].polarizability.contact_radius_um()
                    + particles[j].polarizability.contact_radius_um();
                if dist <= contact {
                    return Err(CoreError::ParticleOverlap {
                        i,
                        j,
                        dist_um: dist,
                        contact_um: contact,
                    });
                }
            }
        }
        Ok(Self {
            particles,
            rotation: UnitQuaternion::identity(),
            translation_um: Vector3::zeros(),
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Lab-frame particle positions.
    pub fn lab_positions(&self) -> Vec<Vector3<f64>> {
        let r = self.rotation.to_rotation_matrix();
        self.particles
            .iter()
            .map(|p| r * p.position_um + self.translation_um)
            .collect()
    }

    /// Body translated by `delta` in the lab frame.
    pub fn translated(&self, delta_um: Vector3<f64>) -> Body {
        let mut b = self.clone();
        b.translation_um += delta_um;
        b
    }

    /// Body rotated in place about its own centre (the translation point).
    pub fn rotated_about_center(&self, axis: Unit<Vector3<f64>>, angle_rad: f64) -> Body {
        let mut b = self.clone();
        b.rotation = UnitQuaternion::from_axis_angle(&axis, angle_rad) * b.rotation;
        b
    }

    /// Largest particle extent along `axis` measured from the body centre,
    /// including the inclusion radius. Used by surface-gap placement.
    pub fn max_reach_along(&self, axis: &Unit<Vector3<f64>>) -> f64 {
        let r = self.rotation.to_rotation_matrix();
        self.particles
            .iter()
            .map(|p| (r * p.position_um).dot(axis) + p.polarizability.contact_radius_um())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cut a lattice to a shape. Sites are kept when the cell centre satisfies
/// the closed containment predicate; the result is sorted by (z, y, x) so
/// construction is deterministic and ordering-stable.
pub fn build_cluster(
    shape: &Shape,
    lattice: &Lattice,
    inclusion: &PolarizabilityModel,
) -> Result<Body, CoreError> {
    shape.validate()?;
    lattice.validate()?;
    inclusion.validate()?;
    let mut positions: Vec<Vector3<f64>> = lattice.sites().filter(|p| shape.contains(p)).collect();
    if positions.is_empty() {
        return Err(CoreError::EmptyCluster);
    }
    positions.sort_by(|a, b| {
        a.z.total_cmp(&b.z)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    Body::new(
        positions
            .into_iter()
            .map(|position_um| Particle {
                position_um,
                polarizability: inclusion.clone(),
            })
            .collect(),
    )
}

/// Apply a rigid transform on top of a body's current pose:
/// every lab-frame position becomes `R·x + t` where `x` was the previous
/// lab-frame position. The rotation must be proper (unit quaternions are).
pub fn transform_body(
    body: &Body,
    rotation: UnitQuaternion<f64>,
    translation_um: Vector3<f64>,
) -> Body {
    let mut b = body.clone();
    b.rotation = rotation * b.rotation;
    b.translation_um = rotation * b.translation_um + translation_um;
    b
}

/// A set of bodies sharing one interaction mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    bodies: Vec<Body>,
    pub mode: Mode,
}

impl Scene {
    /// Validates the inter-body gap invariant: every pair of bodies keeps a
    /// strictly positive surface-to-surface clearance.
    pub fn new(bodies: Vec<Body>, mode: Mode) -> Result<Self, CoreError> {
        if bodies.is_empty() {
            return Err(CoreError::invalid("scene", "needs at least one body"));
        }
        let scene = Self { bodies, mode };
        scene.check_gaps()?;
        Ok(scene)
    }

    fn check_gaps(&self) -> Result<(), CoreError> {
        let labs: Vec<(Vec<Vector3<f64>>, &Body)> =
            self.bodies.iter().map(|b| (b.lab_positions(), b)).collect();
        for a in 0..labs.len() {
            for b in (a + 1)..labs.len() {
                let mut min_gap = f64::INFINITY;
                for (i, pa) in labs[a].0.iter().enumerate() {
                    let ra = labs[a].1.particles[i].polarizability.contact_radius_um();
                    for (j, pb) in labs[b].0.iter().enumerate() {
                        let rb = labs[b].1.particles[j].polarizability.contact_radius_um();
                        min_gap = min_gap.min((pa - pb).norm() - ra - rb);
                    }
                }
                if min_gap <= 0.0 {
                    return Err(CoreError::BodyOverlap {
                        a,
                        b,
                        gap_um: min_gap,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    /// Replace one body (used by sweeps); revalidates gaps.
    pub fn with_body(&self, index: usize, body: Body) -> Result<Scene, CoreError> {
        let mut bodies = self.bodies.clone();
        bodies[index] = body;
        Scene::new(bodies, self.mode)
    }

    /// Total particle count.
    pub fn particle_count(&self) -> usize {
        self.bodies.iter().map(Body::len).sum()
    }

    /// Lab-frame snapshot of every particle: position, evaluated
    /// polarizability rotated into the lab frame, and owning body index.
    pub fn lab_particles(&self, xi: ImagFrequency) -> Result<Vec<LabParticle>, CoreError> {
        let mut out = Vec::with_capacity(self.particle_count());
        for (body_index, body) in self.bodies.iter().enumerate() {
            let rot = body.rotation.to_rotation_matrix();
            let rmat: Matrix3<f64> = *rot.matrix();
            for p in &body.particles {
                let alpha = match p.polarizability.alpha(xi)? {
                    AlphaTensor::Scalar(a) => AlphaTensor::Scalar(a),
                    AlphaTensor::Tensor(t) => AlphaTensor::Tensor(rmat * t * rmat.transpose()),
                };
                out.push(LabParticle {
                    position_um: rot * p.position_um + body.translation_um,
                    alpha,
                    body_index,
                });
            }
        }
        Ok(out)
    }

    /// Minimal centre-to-centre distance between particles of different
    /// bodies; `None` for single-body scenes.
    pub fn min_inter_center_distance(&self) -> Option<f64> {
        if self.bodies.len() < 2 {
            return None;
        }
        let labs: Vec<Vec<Vector3<f64>>> = self.bodies.iter().map(|b| b.lab_positions()).collect();
        let mut best = f64::INFINITY;
        for a in 0..labs.len() {
            for b in (a + 1)..labs.len() {
                for pa in &labs[a] {
                    for pb in &labs[b] {
                        best = best.min((pa - pb).norm());
                    }
                }
            }
        }
        Some(best)
    }

    /// Particle index ranges per body, in flattened scene order.
    pub fn body_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.bodies.len());
        let mut start = 0;
        for b in &self.bodies {
            out.push(start..start + b.len());
            start += b.len();
        }
        out
    }
}

/// Lab-frame particle snapshot at one frequency node.
#[derive(Debug, Clone)]
pub struct LabParticle {
    pub position_um: Vector3<f64>,
    pub alpha: AlphaTensor,
    pub body_index: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::DielectricModel;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gold_sphere(radius: f64) -> PolarizabilityModel {
        PolarizabilityModel::SphereRadiative {
            radius_um: radius,
            material: DielectricModel::drude(9.0, 0.035),
        }
    }

    #[test]
    fn cube_lattice_tiles_exactly() {
        let side = 1.0;
        let n = 10;
        let body = build_cluster(
            &Shape::Cube { side_um: side },
            &Lattice::cubic(side / n as f64, n),
            &gold_sphere(side / 30.0),
        )
        .unwrap();
        assert_eq!(body.len(), 1000);
        // Filling fraction (4π/3)(r/d)³ with r = d/3 equals 4π/81 = 4π/3⁴.
        let d = side / n as f64;
        let r = side / 30.0;
        let f = 4.0 / 3.0 * PI * (r / d).powi(3);
        assert_relative_eq!(f, 4.0 * PI / 81.0, max_relative = 1e-12);
    }

    #[test]
    fn single_site_lattice() {
        let body = build_cluster(
            &Shape::Cube { side_um: 1.0 },
            &Lattice::cubic(1.0, 1),
            &gold_sphere(0.1),
        )
        .unwrap();
        assert_eq!(body.len(), 1);
        assert_eq!(body.particles()[0].position_um, Vector3::zeros());
    }

    #[test]
    fn cylinder_containment() {
        let shape = Shape::CircularCylinder {
            radius_um: 0.5,
            height_um: 0.4,
        };
        let body = build_cluster(&shape, &Lattice::cubic(0.07, 17), &gold_sphere(0.02)).unwrap();
        for p in body.particles() {
            let q = p.position_um;
            assert!(q.x * q.x + q.y * q.y <= 0.25 + 1e-12);
            assert!(q.z.abs() <= 0.2 + 1e-12);
        }
        // The covering grid must have cut something.
        assert!(body.len() < 17 * 17 * 17);
    }

    #[test]
    fn empty_cut_is_error() {
        let shape = Shape::Cube { side_um: 0.1 };
        // All grid sites fall outside the tiny cube.
        let r = build_cluster(&shape, &Lattice::cubic(1.0, 2), &gold_sphere(0.01));
        assert!(matches!(r, Err(CoreError::EmptyCluster)));
    }

    #[test]
    fn ordering_is_deterministic() {
        let shape = Shape::Cube { side_um: 1.0 };
        let a = build_cluster(&shape, &Lattice::cubic(0.25, 4), &gold_sphere(0.05)).unwrap();
        let b = build_cluster(&shape, &Lattice::cubic(0.25, 4), &gold_sphere(0.05)).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.particles().to_vec();
        sorted.sort_by(|p, q| {
            p.position_um
                .z
                .total_cmp(&q.position_um.z)
                .then(p.position_um.y.total_cmp(&q.position_um.y))
                .then(p.position_um.x.total_cmp(&q.position_um.x))
        });
        assert_eq!(a.particles(), sorted.as_slice());
    }

    #[test]
    fn overlap_detection() {
        let p = |x: f64| Particle {
            position_um: Vector3::new(x, 0.0, 0.0),
            polarizability: gold_sphere(0.3),
        };
        assert!(matches!(
            Body::new(vec![p(0.0), p(0.5)]),
            Err(CoreError::ParticleOverlap { .. })
        ));
        assert!(Body::new(vec![p(0.0), p(0.61)]).is_ok());
    }

    #[test]
    fn identity_transform_is_noop() {
        let body = build_cluster(
            &Shape::Cube { side_um: 1.0 },
            &Lattice::cubic(0.25, 4),
            &gold_sphere(0.05),
        )
        .unwrap();
        let same = transform_body(&body, UnitQuaternion::identity(), Vector3::zeros());
        assert_eq!(body.lab_positions(), same.lab_positions());
    }

    #[test]
    fn half_turn_maps_box_onto_itself() {
        let body = build_cluster(
            &Shape::Box {
                lx_um: 1.0,
                ly_um: 2.0,
                lz_um: 0.5,
            },
            &Lattice {
                spacings_um: (0.2, 0.2, 0.125),
                counts: (5, 10, 4),
                stretch: (1.0, 1.0, 1.0),
            },
            &gold_sphere(0.04),
        )
        .unwrap();
        let rot = transform_body(
            &body,
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), PI),
            Vector3::zeros(),
        );
        let mut orig = body.lab_positions();
        let mut turned = rot.lab_positions();
        // Quantized sort keys: the finite-precision rotation perturbs
        // coordinates at the 1e-16 level, which must not affect pairing.
        let key = |v: &Vector3<f64>| {
            let q = |x: f64| (x * 1e9).round() as i64;
            (q(v.z), q(v.y), q(v.x))
        };
        orig.sort_by_key(key);
        turned.sort_by_key(key);
        for (a, b) in orig.iter().zip(turned.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_preserves_intra_distances() {
        let body = build_cluster(
            &Shape::Cube { side_um: 1.0 },
            &Lattice::cubic(0.5, 2),
            &gold_sphere(0.05),
        )
        .unwrap();
        let moved = body.translated(Vector3::new(0.0, 0.0, 3.0));
        let a = body.lab_positions();
        let b = moved.lab_positions();
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                assert_relative_eq!(
                    (a[i] - a[j]).norm(),
                    (b[i] - b[j]).norm(),
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn scene_gap_validation() {
        let body = build_cluster(
            &Shape::Cube { side_um: 1.0 },
            &Lattice::cubic(0.5, 2),
            &gold_sphere(0.1),
        )
        .unwrap();
        let far = body.translated(Vector3::new(0.0, 0.0, 2.0));
        assert!(Scene::new(vec![body.clone(), far], Mode::Retarded).is_ok());
        let touching = body.translated(Vector3::new(0.0, 0.0, 0.65));
        assert!(matches!(
            Scene::new(vec![body, touching], Mode::Retarded),
            Err(CoreError::BodyOverlap { .. })
        ));
    }
}
