//! Unit conventions and the imaginary-frequency argument type.
//!
//! The solver works entirely on the imaginary frequency axis, where every
//! response function is real. Frequencies are stored as photon energies in
//! eV, lengths in micrometres, so wavenumbers are in inverse micrometres and
//! interaction energies come out in eV.

use crate::error::CoreError;

/// ħc in eV·μm; converts a photon energy to a vacuum wavenumber.
pub const HBAR_C_EV_UM: f64 = 0.197327;

/// Interaction mode of a scene: whether the dipole coupling carries the
/// finite-light-speed propagation factors or their `c → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Retarded,
    NonRetarded,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Retarded => "retarded",
            Mode::NonRetarded => "nonretarded",
        }
    }
}

/// A point `ω = iξ` on the imaginary frequency axis.
///
/// `kappa` is the spatial wavenumber `ξ/(ħc)` and is populated only in
/// retarded mode; non-retarded evaluation sets it to zero exactly, which
/// collapses all propagation factors to their static limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagFrequency {
    /// Imaginary-axis frequency as a photon energy, eV. Always ≥ 0.
    pub xi_ev: f64,
    /// Wavenumber ξ/(ħc) in μm⁻¹ when retarded, `None` otherwise.
    pub kappa_um_inv: Option<f64>,
}

impl ImagFrequency {
    /// Retarded-mode frequency: populates `kappa = ξ/(ħc)`.
    pub fn retarded(xi_ev: f64) -> Result<Self, CoreError> {
        Self::check_xi(xi_ev)?;
        Ok(Self {
            xi_ev,
            kappa_um_inv: Some(xi_ev / HBAR_C_EV_UM),
        })
    }

    /// Non-retarded frequency: `kappa` absent (treated as exactly zero).
    pub fn non_retarded(xi_ev: f64) -> Result<Self, CoreError> {
        Self::check_xi(xi_ev)?;
        Ok(Self {
            xi_ev,
            kappa_um_inv: None,
        })
    }

    /// Frequency for the given scene mode.
    pub fn for_mode(mode: Mode, xi_ev: f64) -> Result<Self, CoreError> {
        match mode {
            Mode::Retarded => Self::retarded(xi_ev),
            Mode::NonRetarded => Self::non_retarded(xi_ev),
        }
    }

    /// Wavenumber in μm⁻¹; zero in non-retarded mode.
    pub fn kappa(&self) -> f64 {
        self.kappa_um_inv.unwrap_or(0.0)
    }

    fn check_xi(xi_ev: f64) -> Result<(), CoreError> {
        if !xi_ev.is_finite() || xi_ev < 0.0 {
            return Err(CoreError::Invalid {
                what: "imaginary frequency",
                why: format!("xi = {xi_ev} eV must be finite and >= 0"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_is_xi_over_hbar_c() {
        let f = ImagFrequency::retarded(1.0).unwrap();
        assert_eq!(f.kappa(), 1.0 / HBAR_C_EV_UM);
        let g = ImagFrequency::non_retarded(1.0).unwrap();
        assert_eq!(g.kappa(), 0.0);
        assert!(g.kappa_um_inv.is_none());
    }

    #[test]
    fn negative_xi_rejected() {
        assert!(ImagFrequency::retarded(-0.5).is_err());
        assert!(ImagFrequency::non_retarded(f64::NAN).is_err());
    }
}
