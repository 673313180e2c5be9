//! Interaction energy as an imaginary-frequency integral of the
//! log-determinant difference between the coupled and decoupled systems.
//!
//! The energy of interaction between the bodies of a scene is
//!
//! ```text
//! U = (1/2π) ∫₀^∞ dξ [ log det M(iξ) − log det M_decoupled(iξ) ]
//! ```
//!
//! with ξ measured as a photon energy in eV, which makes U an energy in eV
//! directly. The sign convention is fixed so that two like bodies in
//! vacuum attract (negative U), which reproduces both the non-retarded
//! London limit and the fully retarded two-particle asymptote.

mod logdet;
pub mod quadrature;

use rayon::prelude::*;

use crate::coupling::assemble_scaled;
use crate::error::CoreError;
use crate::geometry::Scene;
use crate::units::{ImagFrequency, Mode, HBAR_C_EV_UM};
use logdet::logdet_unit_deviation;
use quadrature::mapped_rule;

/// Nodes with `κ · r_min` beyond this are skipped as exact zeros: the
/// integrand decays like `e^{−2κr}`, so past this point it is below 1e−50
/// of its peak, far under any reported tolerance. Skipping also avoids
/// querying the radiative polarizability at wavenumbers where its validity
/// check would fire even though the node cannot contribute.
const TAIL_CUTOFF_KAPPA_R: f64 = 60.0;

/// Fallback map scale when no material provides a resonance energy.
const DEFAULT_MAP_SCALE_EV: f64 = 5.0;

/// Quadrature configuration for the frequency integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: QuadScheme,
    /// Node count (mapped Gauss-Legendre) or initial panel count
    /// (adaptive); at least 4.
    pub nodes: usize,
    /// Scale ξ₀ of the substitution ξ = ξ₀ u/(1−u), eV.
    pub map_scale_ev: f64,
    /// Relative tolerance, used by the adaptive scheme.
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadScheme {
    GaussLegendreMapped,
    AdaptiveSimpson,
}

impl QuadratureSpec {
    pub fn gauss_mapped(nodes: usize, map_scale_ev: f64) -> Result<Self, CoreError> {
        let spec = Self {
            scheme: QuadScheme::GaussLegendreMapped,
            nodes,
            map_scale_ev,
            rel_tol: 1e-6,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn adaptive(nodes: usize, map_scale_ev: f64, rel_tol: f64) -> Result<Self, CoreError> {
        let spec = Self {
            scheme: QuadScheme::AdaptiveSimpson,
            nodes,
            map_scale_ev,
            rel_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.nodes < 4 {
            return Err(CoreError::invalid("quadrature", "nodes must be >= 4"));
        }
        if !(self.map_scale_ev.is_finite() && self.map_scale_ev > 0.0) {
            return Err(CoreError::invalid("quadrature", "map scale must be > 0"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(CoreError::invalid(
                "quadrature",
                "rel_tol must lie in (0, 0.1]",
            ));
        }
        Ok(())
    }
}

/// Recommended map scale for a scene: `ħc/r_min` in retarded mode (the
/// integrand peaks near κ·r ~ 1) and half the smallest material resonance
/// energy in non-retarded mode.
pub fn suggested_map_scale(scene: &Scene) -> f64 {
    match scene.mode {
        Mode::Retarded => scene
            .min_inter_center_distance()
            .map(|r| HBAR_C_EV_UM / r)
            .unwrap_or(DEFAULT_MAP_SCALE_EV),
        Mode::NonRetarded => {
            let scale = scene
                .bodies()
                .iter()
                .flat_map(|b| b.particles())
                .filter_map(|p| p.polarizability.material().resonance_scale_ev())
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                });
            0.5 * scale.unwrap_or(2.0 * DEFAULT_MAP_SCALE_EV)
        }
    }
}

/// Interaction energy with its quadrature error estimate and the sampled
/// integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyResult {
    /// Interaction energy in eV; negative means attraction.
    pub energy_ev: f64,
    /// Error estimate in eV, from node-count doubling (mapped rule) or the
    /// adaptive refinement estimate.
    pub quad_error_ev: f64,
    /// Sampled (ξ in eV, Δ log det) pairs, sorted by ξ.
    pub integrand_samples: Vec<(f64, f64)>,
    /// Total number of integrand evaluations behind the result.
    pub node_count: usize,
}

/// Log-determinant difference between the coupled scene and its decoupled
/// (non-interacting bodies) reference at one frequency.
///
/// Both factorizations run on the unit-diagonal scaled system, whose
/// congruence factors cancel exactly in the difference; the decoupled
/// system is block-diagonal per body, so its factorization splits into the
/// per-body diagonal blocks.
pub fn delta_logdet(scene: &Scene, xi: ImagFrequency) -> Result<f64, CoreError> {
    let sys = assemble_scaled(scene, xi)?;
    let mut dec = 0.0;
    for mut block in sys.body_blocks {
        dec += logdet_unit_deviation(&mut block, xi.xi_ev)?;
    }
    let mut full = sys.full;
    let full_ld = logdet_unit_deviation(&mut full, xi.xi_ev)?;
    Ok(full_ld - dec)
}

/// Decoupled log-determinants precomputed per quadrature node. Rigid
/// motion of whole bodies conjugates each intra-body block orthogonally,
/// so these values are reusable across every pose of a sweep.
#[derive(Debug, Clone)]
pub(crate) struct DecoupledCache {
    xis: Vec<f64>,
    logdets: Vec<Option<f64>>,
}

/// The merged evaluation grid of a mapped-rule energy call: the n-node and
/// 2n-node rules, evaluated in one pass.
#[derive(Debug, Clone)]
pub(crate) struct NodeSet {
    /// (ξ, coarse weight, fine weight); exactly one weight is non-zero per
    /// node.
    entries: Vec<(f64, f64, f64)>,
}

impl NodeSet {
    pub(crate) fn for_spec(spec: &QuadratureSpec) -> NodeSet {
        let coarse = mapped_rule(spec.nodes, spec.map_scale_ev);
        let fine = mapped_rule(2 * spec.nodes, spec.map_scale_ev);
        let mut entries: Vec<(f64, f64, f64)> = coarse
            .into_iter()
            .map(|(x, w)| (x, w, 0.0))
            .chain(fine.into_iter().map(|(x, w)| (x, 0.0, w)))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        NodeSet { entries }
    }

    pub(crate) fn xis(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

/// Build the per-node decoupled log-determinants for every node that can
/// matter anywhere in a sweep whose minimal inter-body centre distance is
/// `min_r`. Nodes beyond the tail cutoff at that distance stay `None`.
pub(crate) fn build_decoupled_cache(
    scene: &Scene,
    nodes: &NodeSet,
    min_r: Option<f64>,
) -> Result<DecoupledCache, CoreError> {
    let mode = scene.mode;
    let logdets: Vec<Option<f64>> = nodes
        .entries
        .par_iter()
        .map(|&(xi_ev, _, _)| -> Result<Option<f64>, CoreError> {
            if skip_node(mode, xi_ev, min_r) {
                return Ok(None);
            }
            let xi = ImagFrequency::for_mode(mode, xi_ev)?;
            let sys = assemble_scaled(scene, xi)?;
            let mut dec = 0.0;
            for mut block in sys.body_blocks {
                dec += logdet_unit_deviation(&mut block, xi.xi_ev)?;
            }
            Ok(Some(dec))
        })
        .collect::<Result<_, _>>()?;
    Ok(DecoupledCache {
        xis: nodes.xis().collect(),
        logdets,
    })
}

fn skip_node(mode: Mode, xi_ev: f64, min_r: Option<f64>) -> bool {
    match (mode, min_r) {
        (_, None) => true, // single body: no interaction at any node
        (Mode::NonRetarded, _) => false,
        (Mode::Retarded, Some(r)) => (xi_ev / HBAR_C_EV_UM) * r > TAIL_CUTOFF_KAPPA_R,
    }
}

/// Interaction energy of a scene under the given quadrature.
pub fn interaction_energy(scene: &Scene, quad: &QuadratureSpec) -> Result<EnergyResult, CoreError> {
    interaction_energy_impl(scene, quad, None)
}

pub(crate) fn interaction_energy_cached(
    scene: &Scene,
    quad: &QuadratureSpec,
    cache: &DecoupledCache,
) -> Result<EnergyResult, CoreError> {
    interaction_energy_impl(scene, quad, Some(cache))
}

fn interaction_energy_impl(
    scene: &Scene,
    quad: &QuadratureSpec,
    cache: Option<&DecoupledCache>,
) -> Result<EnergyResult, CoreError> {
    quad.validate()?;
    match quad.scheme {
        QuadScheme::GaussLegendreMapped => gauss_mapped_energy(scene, quad, cache),
        QuadScheme::AdaptiveSimpson => adaptive_energy(scene, quad),
    }
}

fn node_delta(
    scene: &Scene,
    xi_ev: f64,
    min_r: Option<f64>,
    cached_dec: Option<f64>,
) -> Result<f64, CoreError> {
    if skip_node(scene.mode, xi_ev, min_r) {
        return Ok(0.0);
    }
    let xi = ImagFrequency::for_mode(scene.mode, xi_ev)?;
    match cached_dec {
        None => delta_logdet(scene, xi),
        Some(dec) => {
            let sys = assemble_scaled(scene, xi)?;
            let mut full = sys.full;
            let full_ld = logdet_unit_deviation(&mut full, xi.xi_ev)?;
            Ok(full_ld - dec)
        }
    }
}

fn gauss_mapped_energy(
    scene: &Scene,
    quad: &QuadratureSpec,
    cache: Option<&DecoupledCache>,
) -> Result<EnergyResult, CoreError> {
    let nodes = NodeSet::for_spec(quad);
    let min_r = scene.min_inter_center_distance();
    if let Some(c) = cache {
        assert_eq!(
            c.xis,
            nodes.xis().collect::<Vec<_>>(),
            "decoupled cache built for a different node set"
        );
    }

    // Parallel map over nodes; the reduction below is a sequential sum in
    // node order, so results are bit-stable across thread counts.
    let deltas: Vec<f64> = nodes
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, &(xi_ev, _, _))| {
            let cached = cache.and_then(|c| c.logdets[i]);
            node_delta(scene, xi_ev, min_r, cached)
        })
        .collect::<Result<_, _>>()?;

    let mut coarse = 0.0;
    let mut fine = 0.0;
    for (&(_, wc, wf), &d) in nodes.entries.iter().zip(deltas.iter()) {
        coarse += wc * d;
        fine += wf * d;
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI);
    let energy_ev = norm * fine;
    let quad_error_ev = (norm * (fine - coarse)).abs();
    let integrand_samples: Vec<(f64, f64)> = nodes.xis().zip(deltas).collect();
    let node_count = integrand_samples.len();
    Ok(EnergyResult {
        energy_ev,
        quad_error_ev,
        integrand_samples,
        node_count,
    })
}

/// Adaptive Simpson on the mapped unit interval. The integrand limit at
/// u = 0 is taken at a tiny positive ξ (the physical limit exists); at
/// u = 1 it is taken as zero, which holds whenever the integral converges.
/// Non-decaying integrands therefore fail the tolerance check and surface
/// as a convergence error instead of returning a silently wrong number.
fn adaptive_energy(scene: &Scene, quad: &QuadratureSpec) -> Result<EnergyResult, CoreError> {
    let min_r = scene.min_inter_center_distance();
    let x0 = quad.map_scale_ev;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut eval = |u: f64| -> Result<f64, CoreError> {
        if u >= 1.0 {
            return Ok(0.0);
        }
        let xi_ev = if u <= 0.0 {
            1e-12 * x0
        } else {
            x0 * u / (1.0 - u)
        };
        let d = node_delta(scene, xi_ev, min_r, None)?;
        samples.push((xi_ev, d));
        let jac = x0 / ((1.0 - u) * (1.0 - u));
        Ok(d * jac)
    };

    // Initial uniform panels, then recursive refinement per panel.
    let panels = quad.nodes;
    let mut total = 0.0_f64;
    let mut err_total = 0.0_f64;
    let mut stack: Vec<(f64, f64, f64, f64, f64, u32)> = Vec::new();
    for p in 0..panels {
        let a = p as f64 / panels as f64;
        let b = (p + 1) as f64 / panels as f64;
        let fa = eval(a)?;
        let fm = eval(0.5 * (a + b))?;
        let fb = eval(b)?;
        stack.push((a, b, fa, fm, fb, 0));
    }
    const MAX_DEPTH: u32 = 24;
    let panel_tol = quad.rel_tol / panels as f64;
    while let Some((a, b, fa, fm, fb, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let flm = eval(0.5 * (a + m))?;
        let frm = eval(0.5 * (m + b))?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        // Scale-free acceptance: compare against the running magnitude.
        let scale = total.abs().max((left + right).abs()).max(1e-300);
        if depth >= MAX_DEPTH || diff.abs() <= panel_tol * scale {
            total += left + right + diff / 15.0;
            err_total += diff.abs() / 15.0;
        } else {
            stack.push((a, m, fa, flm, fm, depth + 1));
            stack.push((m, b, fm, frm, fb, depth + 1));
        }
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI);
    let energy_ev = norm * total;
    let quad_error_ev = norm * err_total;
    samples.sort_by(|p, q| p.0.total_cmp(&q.0));
    samples.dedup_by(|p, q| p.0 == q.0);
    let node_count = samples.len();
    let result = EnergyResult {
        energy_ev,
        quad_error_ev,
        integrand_samples: samples,
        node_count,
    };
    if quad_error_ev > quad.rel_tol * energy_ev.abs().max(1e-300) && energy_ev != 0.0 {
        return Err(CoreError::Convergence {
            energy_ev,
            estimate_ev: quad_error_ev,
            partial: Box::new(result),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Body, Particle};
    use crate::materials::{DielectricModel, PolarizabilityModel};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn sphere_body(pos: Vector3<f64>, radius: f64, material: DielectricModel) -> Body {
        Body::new(vec![Particle {
            position_um: pos,
            polarizability: PolarizabilityModel::SphereRadiative {
                radius_um: radius,
                material,
            },
        }])
        .unwrap()
    }

    fn two_sphere_scene(r: f64, radius: f64, material: DielectricModel, mode: Mode) -> Scene {
        Scene::new(
            vec![
                sphere_body(Vector3::zeros(), radius, material.clone()),
                sphere_body(Vector3::new(0.0, 0.0, r), radius, material),
            ],
            mode,
        )
        .unwrap()
    }

    #[test]
    fn single_body_delta_is_zero() {
        let scene = Scene::new(
            vec![sphere_body(
                Vector3::zeros(),
                0.05,
                DielectricModel::drude(9.0, 0.035),
            )],
            Mode::NonRetarded,
        )
        .unwrap();
        let xi = ImagFrequency::non_retarded(1.0).unwrap();
        assert_eq!(delta_logdet(&scene, xi).unwrap(), 0.0);
        let quad = QuadratureSpec::gauss_mapped(8, 2.0).unwrap();
        let res = interaction_energy(&scene, &quad).unwrap();
        assert_eq!(res.energy_ev, 0.0);
    }

    #[test]
    fn two_dipole_static_delta_matches_closed_form() {
        // log(1 − 4α²/r⁶) + 2 log(1 − α²/r⁶) for identical spheres.
        let radius = 0.05;
        let material = DielectricModel::constant(3.0).unwrap();
        let r = 0.4;
        let scene = two_sphere_scene(r, radius, material, Mode::NonRetarded);
        let xi = ImagFrequency::non_retarded(0.7).unwrap();
        let alpha = radius.powi(3) * (3.0 - 1.0) / (3.0 + 2.0);
        let c = alpha * alpha / r.powi(6);
        let expect = (-4.0 * c).ln_1p() + 2.0 * (-c).ln_1p();
        let got = delta_logdet(&scene, xi).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn huge_gap_delta_vanishes() {
        // r/a = 10⁴ static: |Δ| bounded by the 6α²/r⁶ leading term.
        let radius = 1.0;
        let material = DielectricModel::PerfectMetal;
        let r = 1.0e4;
        let scene = two_sphere_scene(r, radius, material, Mode::NonRetarded);
        let xi = ImagFrequency::non_retarded(1.0).unwrap();
        let got = delta_logdet(&scene, xi).unwrap();
        assert!(
            got < 0.0,
            "attractive configuration must give negative delta"
        );
        assert!(
            got.abs() < 1e-12,
            "leading term is 6/r⁶·a⁶ = 6e-24: got {got}"
        );
        // And it is resolved, not rounded to zero.
        assert!(got.abs() > 1e-25);
    }

    #[test]
    fn delta_is_negative_for_like_bodies() {
        let material = DielectricModel::drude(9.0, 0.035);
        // Radius small enough that κa stays valid at every probed node.
        for mode in [Mode::NonRetarded, Mode::Retarded] {
            let scene = two_sphere_scene(0.5, 0.005, material.clone(), mode);
            for xi_ev in [0.05, 0.5, 2.0, 8.0] {
                let xi = ImagFrequency::for_mode(mode, xi_ev).unwrap();
                let d = delta_logdet(&scene, xi).unwrap();
                assert!(d < 0.0, "mode {mode:?} xi {xi_ev}: delta {d}");
            }
        }
    }

    #[test]
    fn retarded_integrand_tail_collapses() {
        let scene = two_sphere_scene(1.0, 0.01, DielectricModel::PerfectMetal, Mode::Retarded);
        let peak = delta_logdet(&scene, ImagFrequency::retarded(0.05).unwrap())
            .unwrap()
            .abs();
        let tail_xi = 30.0 * HBAR_C_EV_UM; // κ·gap = 30
        let tail = delta_logdet(&scene, ImagFrequency::retarded(tail_xi).unwrap())
            .unwrap()
            .abs();
        assert!(tail < 1e-12 * peak, "tail {tail} vs peak {peak}");
    }

    #[test]
    fn doubling_agreement_within_reported_error() {
        let scene = two_sphere_scene(
            0.5,
            0.05,
            DielectricModel::drude(9.0, 0.035),
            Mode::NonRetarded,
        );
        let x0 = suggested_map_scale(&scene);
        let e_n =
            interaction_energy(&scene, &QuadratureSpec::gauss_mapped(8, x0).unwrap()).unwrap();
        let e_2n =
            interaction_energy(&scene, &QuadratureSpec::gauss_mapped(16, x0).unwrap()).unwrap();
        assert!(
            (e_n.energy_ev - e_2n.energy_ev).abs() <= e_n.quad_error_ev.max(1e-300),
            "doubling must agree within the reported estimate"
        );
        assert!(e_n.energy_ev < 0.0);
    }

    #[test]
    fn cached_energy_matches_uncached() {
        let scene = two_sphere_scene(
            0.6,
            0.005,
            DielectricModel::drude(9.0, 0.035),
            Mode::Retarded,
        );
        let quad = QuadratureSpec::gauss_mapped(12, suggested_map_scale(&scene)).unwrap();
        let nodes = NodeSet::for_spec(&quad);
        let cache =
            build_decoupled_cache(&scene, &nodes, scene.min_inter_center_distance()).unwrap();
        let plain = interaction_energy(&scene, &quad).unwrap();
        let cached = interaction_energy_cached(&scene, &quad, &cache).unwrap();
        assert_eq!(plain.energy_ev, cached.energy_ev);
    }

    #[test]
    fn scale_invariance_non_retarded() {
        let material = DielectricModel::drude(9.0, 0.035);
        let base = two_sphere_scene(0.5, 0.05, material.clone(), Mode::NonRetarded);
        let quad = QuadratureSpec::gauss_mapped(24, suggested_map_scale(&base)).unwrap();
        let e_base = interaction_energy(&base, &quad).unwrap().energy_ev;
        for s in [0.1, 10.0] {
            let scaled = two_sphere_scene(0.5 * s, 0.05 * s, material.clone(), Mode::NonRetarded);
            let e_scaled = interaction_energy(&scaled, &quad).unwrap().energy_ev;
            assert_relative_eq!(e_base, e_scaled, max_relative = 1e-10);
        }
    }

    #[test]
    fn adaptive_matches_mapped_rule() {
        let scene = two_sphere_scene(
            0.5,
            0.05,
            DielectricModel::drude(9.0, 0.035),
            Mode::NonRetarded,
        );
        let x0 = suggested_map_scale(&scene);
        let gl =
            interaction_energy(&scene, &QuadratureSpec::gauss_mapped(32, x0).unwrap()).unwrap();
        let ad =
            interaction_energy(&scene, &QuadratureSpec::adaptive(8, x0, 1e-6).unwrap()).unwrap();
        assert_relative_eq!(gl.energy_ev, ad.energy_ev, max_relative = 1e-5);
    }

    #[test]
    fn energy_is_deterministic() {
        let scene = two_sphere_scene(
            0.5,
            0.005,
            DielectricModel::drude(9.0, 0.035),
            Mode::Retarded,
        );
        let quad = QuadratureSpec::gauss_mapped(16, suggested_map_scale(&scene)).unwrap();
        let a = interaction_energy(&scene, &quad).unwrap();
        let b = interaction_energy(&scene, &quad).unwrap();
        assert_eq!(a.energy_ev.to_bits(), b.energy_ev.to_bits());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::gauss_mapped(3, 1.0).is_err());
        assert!(QuadratureSpec::gauss_mapped(4, 0.0).is_err());
        assert!(QuadratureSpec::adaptive(8, 1.0, 0.5).is_err());
        assert!(QuadratureSpec::adaptive(8, 1.0, 0.01).is_ok());
    }
}
