//! Error type shared by all solver modules.

use crate::spectrum::EnergyResult;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CoreError {
    /// Drude dielectric functions diverge at ξ = 0.
    #[error("Drude dielectric function is undefined at xi = 0")]
    StaticDrude,

    /// Tabulated dielectric data failed load-time validation.
    #[error("tabulated dielectric data invalid at row {row}: {reason}")]
    TabulatedData { row: usize, reason: String },

    /// The radiative-corrected sphere polarizability lost its validity:
    /// either κa ≥ 1 or the denominator of the closed formula is not
    /// positive. Carries the offending frequency and κa so callers can see
    /// which quadrature node broke.
    #[error(
        "singular polarizability at xi = {xi_ev} eV (kappa*a = {kappa_a:.6}): \
         dipole model invalid at this node"
    )]
    SingularPolarizability { xi_ev: f64, kappa_a: f64 },

    /// A cluster construction kept no lattice sites.
    #[error("empty cluster: no lattice site lies inside the shape")]
    EmptyCluster,

    /// Two particles of one body closer than contact.
    #[error(
        "overlapping particles {i} and {j}: centre distance {dist_um} um <= contact {contact_um} um"
    )]
    ParticleOverlap {
        i: usize,
        j: usize,
        dist_um: f64,
        contact_um: f64,
    },

    /// Two bodies of a scene touch or interpenetrate.
    #[error("bodies {a} and {b} overlap: minimum surface gap {gap_um} um <= 0")]
    BodyOverlap { a: usize, b: usize, gap_um: f64 },

    /// Dipole tensor requested for a zero separation vector.
    #[error("coincident particles: dipole tensor undefined at r = 0")]
    CoincidentParticles,

    /// A factorization pivot went non-positive: the system determinant is
    /// not positive, which signals an unphysical regime (or a κa validity
    /// breach upstream).
    #[error(
        "non-positive pivot {pivot:e} at matrix index {index} (xi = {xi_ev} eV): \
         determinant sign is not positive"
    )]
    PivotSign {
        index: usize,
        pivot: f64,
        xi_ev: f64,
    },

    /// Factorization broke down on a non-finite entry.
    #[error("factorization breakdown at matrix index {index} (xi = {xi_ev} eV)")]
    SingularMatrix { index: usize, xi_ev: f64 },

    /// Adaptive quadrature failed to meet its tolerance; carries the best
    /// result obtained so far.
    #[error(
        "quadrature did not converge: error estimate {estimate_ev:e} eV exceeds \
         tolerance for energy {energy_ev:e} eV"
    )]
    Convergence {
        energy_ev: f64,
        estimate_ev: f64,
        partial: Box<EnergyResult>,
    },

    /// Power-law fit rejected because the derivative changes sign inside
    /// the fit window.
    #[error("derivative changes sign inside the fit window: not a power law")]
    NonPowerLaw,

    /// A finite-difference stencil point produced an invalid scene.
    #[error("invalid scene at finite-difference stencil point param = {param}: {reason}")]
    Stencil { param: f64, reason: String },

    /// Two-dipole reference determinant hit a non-positive log argument.
    #[error("two-dipole determinant argument <= 0 at xi = {xi_ev} eV: contact regime")]
    ContactRegime { xi_ev: f64 },

    /// Reference dispersion integral does not decay and no cutoff was given.
    #[error("dispersion integral diverges: polarizabilities do not decay and no cutoff supplied")]
    DivergentIntegral,

    /// Unknown preset name.
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    /// Generic domain validation failure.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
}

impl CoreError {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        CoreError::Invalid {
            what,
            why: why.into(),
        }
    }
}
