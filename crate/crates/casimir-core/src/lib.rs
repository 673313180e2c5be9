//! Coupled-dipole solver for Casimir and van der Waals interactions
//! between finite 3D clusters of polarizable nanoparticles.
//!
//! Bodies are rigid arrangements of small spheres (or spheroids) with a
//! frequency-dependent polarizability, coupled through the full dipole
//! interaction tensor. The interaction energy between bodies is an
//! imaginary-frequency integral of the log-determinant difference between
//! the coupled system and the reference in which the bodies do not
//! interact. Retarded and non-retarded (`c → ∞`) modes are supported, as
//! are sweeps over separation or mutual rotation angle with
//! finite-difference forces and torques.
//!
//! Conventions: lengths in μm, frequencies as photon energies in eV,
//! energies in eV. Negative interaction energy means attraction.

pub mod coupling;
pub mod error;
pub mod geometry;
pub mod materials;
pub mod observables;
pub mod oracle;
pub mod spectrum;
pub mod units;

pub use error::CoreError;
pub use geometry::presets::{
    preset_descriptions, preset_scene, PresetParams, PresetScene, SeparationConvention,
    PRESET_NAMES,
};
pub use geometry::{build_cluster, transform_body, Body, Lattice, Particle, Scene, Shape};
pub use materials::{DielectricModel, PolarizabilityModel};
pub use observables::{fit_power_law, sweep, SweepParameter, SweepResult, SweepRow, SweepSpec};
pub use spectrum::{
    delta_logdet, interaction_energy, suggested_map_scale, EnergyResult, QuadScheme, QuadratureSpec,
};
pub use units::{ImagFrequency, Mode, HBAR_C_EV_UM};
