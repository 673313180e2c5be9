//! Independent reference results for validation: the analytic two-dipole
//! determinant and high-resolution 1D integrals for the non-retarded
//! (London) and fully retarded (Casimir–Polder) two-particle limits.
//!
//! Nothing here shares matrix code with the solver; the determinant is
//! written straight from the 2-particle block structure and the dispersion
//! integrals use their own adaptive quadrature. That independence is the
//! point: these are the cross-checks the solver is accepted against.

use crate::error::CoreError;
use crate::materials::{AlphaTensor, PolarizabilityModel};
use crate::units::{ImagFrequency, Mode, HBAR_C_EV_UM};

/// A pair of scalar-polarizability particles at centre distance `r_um`.
#[derive(Debug, Clone)]
pub struct TwoDipoleConfig {
    pub alpha1: PolarizabilityModel,
    pub alpha2: PolarizabilityModel,
    pub r_um: f64,
    pub mode: Mode,
}

impl TwoDipoleConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.r_um.is_finite() && self.r_um > 0.0) {
            return Err(CoreError::invalid("two-dipole gap", "r must be > 0"));
        }
        self.alpha1.validate()?;
        self.alpha2.validate()
    }
}

fn scalar_alpha(model: &PolarizabilityModel, xi: ImagFrequency) -> Result<f64, CoreError> {
    match model.alpha(xi)? {
        AlphaTensor::Scalar(a) => Ok(a),
        AlphaTensor::Tensor(_) => Err(CoreError::invalid(
            "two-dipole oracle",
            "requires scalar (sphere) polarizabilities",
        )),
    }
}

/// Closed-form log-determinant difference for two coupled dipoles.
///
/// With the longitudinal and transverse couplings
/// `T_L = 2 e^{−κr}(1+κr)/r³` and `T_T = e^{−κr}(1+κr+κ²r²)/r³`
/// the 6×6 system factorizes per polarization channel into
/// `Δ = log(1 − α₁α₂T_L²) + 2 log(1 − α₁α₂T_T²)`;
/// κ = 0 gives the static form `log(1 − 4α₁α₂/r⁶) + 2 log(1 − α₁α₂/r⁶)`.
pub fn two_dipole_delta_logdet(cfg: &TwoDipoleConfig, xi_ev: f64) -> Result<f64, CoreError> {
    cfg.validate()?;
    let xi = ImagFrequency::for_mode(cfg.mode, xi_ev)?;
    let a1 = scalar_alpha(&cfg.alpha1, xi)?;
    let a2 = scalar_alpha(&cfg.alpha2, xi)?;
    let r = cfg.r_um;
    let kr = xi.kappa() * r;
    let damp = (-kr).exp();
    let r3 = r * r * r;
    let t_long = 2.0 * damp * (1.0 + kr) / r3;
    let t_trans = damp * (1.0 + kr + kr * kr) / r3;
    let c_long = a1 * a2 * t_long * t_long;
    let c_trans = a1 * a2 * t_trans * t_trans;
    if c_long >= 1.0 || c_trans >= 1.0 {
        return Err(CoreError::ContactRegime { xi_ev });
    }
    Ok((-c_long).ln_1p() + 2.0 * (-c_trans).ln_1p())
}

/// Dispersion coefficient `C₆ = (3/π) ∫₀^∞ α₁(iξ) α₂(iξ) dξ` (eV·μm⁶),
/// so that the far-field non-retarded pair energy is `−C₆/r⁶`.
///
/// Polarizabilities are taken in their static (κ = 0) form. Decaying
/// integrands are integrated over the whole axis; a non-decaying product
/// (perfect metal, constant ε) needs an explicit frequency cutoff and is
/// rejected otherwise.
pub fn london_c6(
    alpha1: &PolarizabilityModel,
    alpha2: &PolarizabilityModel,
    cutoff_ev: Option<f64>,
) -> Result<f64, CoreError> {
    alpha1.validate()?;
    alpha2.validate()?;
    let product = |xi_ev: f64| -> Result<f64, CoreError> {
        let xi = ImagFrequency::non_retarded(xi_ev)?;
        Ok(scalar_alpha(alpha1, xi)? * scalar_alpha(alpha2, xi)?)
    };
    let integral = match cutoff_ev {
        Some(cut) => {
            if !(cut.is_finite() && cut > 0.0) {
                return Err(CoreError::invalid("cutoff", "must be finite and > 0"));
            }
            adaptive_simpson(&product, 1e-9 * cut, cut, 1e-10)?
        }
        None => {
            let scale = alpha1
                .material()
                .resonance_scale_ev()
                .or(alpha2.material().resonance_scale_ev())
                .unwrap_or(1.0);
            // Decay probe: the product must have fallen off by several
            // orders far above the resonance scale.
            let low = product(0.3 * scale)?;
            let high = product(3.0e3 * scale)?;
            if high.abs() > 1e-9 * low.abs() {
                return Err(CoreError::DivergentIntegral);
            }
            // Map (0, ∞) to (0, 1) and integrate the transformed integrand.
            let g = |u: f64| -> Result<f64, CoreError> {
                if u >= 1.0 {
                    return Ok(0.0);
                }
                let xi = scale * u / (1.0 - u);
                let jac = scale / ((1.0 - u) * (1.0 - u));
                Ok(product(xi.max(1e-12 * scale))? * jac)
            };
            adaptive_simpson(&g, 0.0, 1.0, 1e-10)?
        }
    };
    Ok(3.0 / std::f64::consts::PI * integral)
}

/// Fully retarded two-particle asymptote for static polarizabilities:
/// `U = −23 ħc α₁α₂ / (4π r⁷)` in eV for μm³ inputs.
pub fn casimir_polder_u(alpha1_static_um3: f64, alpha2_static_um3: f64, r_um: f64) -> f64 {
    -23.0 * HBAR_C_EV_UM * alpha1_static_um3 * alpha2_static_um3
        / (4.0 * std::f64::consts::PI * r_um.powi(7))
}

/// Adaptive Simpson quadrature with a relative tolerance; independent of
/// the solver's quadrature module by construction.
fn adaptive_simpson<F>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64, CoreError>
where
    F: Fn(f64) -> Result<f64, CoreError>,
{
    // First pass on a coarse composite rule to get the magnitude scale.
    const PANELS: usize = 16;
    const MAX_DEPTH: u32 = 48;
    let mut total = 0.0;
    let mut panels = Vec::with_capacity(PANELS);
    for p in 0..PANELS {
        let pa = a + (b - a) * p as f64 / PANELS as f64;
        let pb = a + (b - a) * (p + 1) as f64 / PANELS as f64;
        let fa = f(pa)?;
        let fm = f(0.5 * (pa + pb))?;
        let fb = f(pb)?;
        total += (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        panels.push((pa, pb, fa, fm, fb));
    }
    let scale = total.abs().max(f64::MIN_POSITIVE);
    let mut sum = 0.0;
    for (pa, pb, fa, fm, fb) in panels {
        sum += simpson_recurse(
            f,
            pa,
            pb,
            fa,
            fm,
            fb,
            rel_tol * scale / PANELS as f64,
            MAX_DEPTH,
        )?;
    }
    Ok(sum)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, CoreError>
where
    F: Fn(f64) -> Result<f64, CoreError>,
{
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m))?;
    let frm = f(0.5 * (m + b))?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        Ok(left + right + diff / 15.0)
    } else {
        Ok(simpson_recurse(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)?
            + simpson_recurse(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)?)
    }
}
