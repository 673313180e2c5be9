//! Dielectric functions on the imaginary frequency axis and particle
//! polarizabilities.
//!
//! All dielectric evaluation happens at `ω = iξ`, where the response of a
//! passive material is real and ≥ 1 and decays monotonically towards 1 as
//! ξ grows. A perfect metal is represented by the marker value
//! [`f64::INFINITY`], which only the polarizability routines consume (they
//! take the closed ε → ∞ limit).
//!
//! Real-axis optics, absorption spectra and Kramers–Kronig transforms are
//! out of scope; externally measured data enters through the tabulated
//! variant, loaded from two-column CSV (`xi_eV,eps`).

mod depolarization;
mod polarizability;

pub use depolarization::{carlson_rd, depolarization_factors};
pub use polarizability::{AlphaTensor, PolarizabilityModel};

use std::io::BufRead;
use std::sync::OnceLock;

use crate::error::CoreError;
use crate::units::ImagFrequency;

/// Dielectric function ε(iξ) of a particle or host material.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    /// Drude metal: ε(iξ) = 1 + ωp²/(ξ(ξ+γ)). Parameters in eV.
    Drude { plasma_ev: f64, damping_ev: f64 },
    /// Sum of Lorentz oscillators: ε(iξ) = 1 + Σ sᵢ/(ωᵢ² + ξ² + γᵢξ).
    /// Strengths in eV², resonances and dampings in eV.
    Lorentz { oscillators: Vec<LorentzOscillator> },
    /// Frequency-independent ε ≥ 1.
    Constant { eps: f64 },
    /// Perfect conductor: ε(iξ) = ∞ at every ξ.
    PerfectMetal,
    /// Tabulated (ξ, ε) samples, strictly increasing in ξ, interpolated
    /// log-log and clamped to the endpoints outside the tabulated range.
    Tabulated { table: DielectricTable },
    /// Maxwell-Garnett composite of spherical inclusions in a host.
    MaxwellGarnett {
        inclusion: Box<DielectricModel>,
        host: Box<DielectricModel>,
        fill: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOscillator {
    pub strength_ev2: f64,
    pub resonance_ev: f64,
    pub damping_ev: f64,
}

impl DielectricModel {
    pub fn drude(plasma_ev: f64, damping_ev: f64) -> Self {
        DielectricModel::Drude {
            plasma_ev,
            damping_ev,
        }
    }

    pub fn lorentz(oscillators: Vec<LorentzOscillator>) -> Self {
        DielectricModel::Lorentz { oscillators }
    }

    pub fn constant(eps: f64) -> Result<Self, CoreError> {
        if !(eps.is_finite() && eps >= 1.0) {
            return Err(CoreError::invalid(
                "constant dielectric",
                format!("eps = {eps} must be finite and >= 1"),
            ));
        }
        Ok(DielectricModel::Constant { eps })
    }

    pub fn maxwell_garnett(
        inclusion: DielectricModel,
        host: DielectricModel,
        fill: f64,
    ) -> Result<Self, CoreError> {
        if !(0.0..=1.0).contains(&fill) {
            return Err(CoreError::invalid(
                "Maxwell-Garnett filling fraction",
                format!("fill = {fill} must lie in [0, 1]"),
            ));
        }
        Ok(DielectricModel::MaxwellGarnett {
            inclusion: Box::new(inclusion),
            host: Box::new(host),
            fill,
        })
    }

    /// Evaluate ε(iξ). Returns [`f64::INFINITY`] for a perfect metal; that
    /// marker is consumed only by the polarizability operations.
    pub fn eval(&self, xi: ImagFrequency) -> Result<f64, CoreError> {
        let x = xi.xi_ev;
        match self {
            DielectricModel::Drude {
                plasma_ev,
                damping_ev,
            } => {
                if x == 0.0 {
                    return Err(CoreError::StaticDrude);
                }
                Ok(1.0 + plasma_ev * plasma_ev / (x * (x + damping_ev)))
            }
            DielectricModel::Lorentz { oscillators } => Ok(1.0
                + oscillators
                    .iter()
                    .map(|o| {
                        o.strength_ev2
                            / (o.resonance_ev * o.resonance_ev + x * x + o.damping_ev * x)
                    })
                    .sum::<f64>()),
            DielectricModel::Constant { eps } => Ok(*eps),
            DielectricModel::PerfectMetal => Ok(f64::INFINITY),
            DielectricModel::Tabulated { table } => Ok(table.eval(x)),
            DielectricModel::MaxwellGarnett {
                inclusion,
                host,
                fill,
            } => {
                let eps_h = host.eval(xi)?;
                if eps_h.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                let eps_i = inclusion.eval(xi)?;
                // η → 1 in the metal-inclusion limit.
                let eta = if eps_i.is_infinite() {
                    1.0
                } else {
                    (eps_i - eps_h) / (eps_i + 2.0 * eps_h)
                };
                Ok(eps_h * (1.0 + 3.0 * fill * eta / (1.0 - fill * eta)))
            }
        }
    }

    /// Characteristic resonance energy used to pick quadrature map scales:
    /// the sphere-resonance energy ωp/√3 for a Drude metal, the analogous
    /// √(ω₀² + s/3) for the lowest Lorentz oscillator, the half-decay
    /// frequency for a table. `None` when the model has no intrinsic scale.
    pub fn resonance_scale_ev(&self) -> Option<f64> {
        match self {
            DielectricModel::Drude { plasma_ev, .. } => Some(plasma_ev / 3.0_f64.sqrt()),
            DielectricModel::Lorentz { oscillators } => oscillators
                .iter()
                .map(|o| (o.resonance_ev * o.resonance_ev + o.strength_ev2 / 3.0).sqrt())
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                }),
            DielectricModel::Constant { .. } | DielectricModel::PerfectMetal => None,
            DielectricModel::Tabulated { table } => Some(table.half_decay_xi()),
            DielectricModel::MaxwellGarnett {
                inclusion, host, ..
            } => match (inclusion.resonance_scale_ev(), host.resonance_scale_ev()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// Validated tabulated dielectric data.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricTable {
    /// (ξ in eV, ε) rows, strictly increasing ξ > 0, ε ≥ 1 non-increasing.
    rows: Vec<(f64, f64)>,
}

impl DielectricTable {
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self, CoreError> {
        if rows.len() < 2 {
            return Err(CoreError::TabulatedData {
                row: 0,
                reason: "need at least two rows".into(),
            });
        }
        for (i, &(x, e)) in rows.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(CoreError::TabulatedData {
                    row: i,
                    reason: format!("xi = {x} must be finite and > 0"),
                });
            }
            if !e.is_finite() || e < 1.0 {
                return Err(CoreError::TabulatedData {
                    row: i,
                    reason: format!("eps = {e} must be finite and >= 1"),
                });
            }
            if i > 0 {
                let (xp, ep) = rows[i - 1];
                if x <= xp {
                    return Err(CoreError::TabulatedData {
                        row: i,
                        reason: format!("xi must be strictly increasing ({xp} -> {x})"),
                    });
                }
                if e > ep {
                    return Err(CoreError::TabulatedData {
                        row: i,
                        reason: format!("eps must be non-increasing in xi ({ep} -> {e})"),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    /// Parse two-column CSV `xi_eV,eps` with a mandatory header row.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self, CoreError> {
        let mut rows = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CoreError::TabulatedData {
                row: lineno,
                reason: format!("read error: {e}"),
            })?;
            let line = line.trim();
            if lineno == 0 {
                // Header row required; reject files that start with data.
                if line.parse::<f64>().is_ok()
                    || line
                        .split(',')
                        .next()
                        .unwrap_or("")
                        .trim()
                        .parse::<f64>()
                        .is_ok()
                {
                    return Err(CoreError::TabulatedData {
                        row: 0,
                        reason: "missing header row (expected `xi_eV,eps`)".into(),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, CoreError> {
                s.map(str::trim)
                    .ok_or_else(|| CoreError::TabulatedData {
                        row: lineno,
                        reason: "expected two comma-separated columns".into(),
                    })?
                    .parse::<f64>()
                    .map_err(|e| CoreError::TabulatedData {
                        row: lineno,
                        reason: format!("parse error: {e}"),
                    })
            };
            let x = parse(parts.next())?;
            let e = parse(parts.next())?;
            rows.push((x, e));
        }
        Self::new(rows)
    }

    /// Monotone log-log interpolation, clamped to the end values outside
    /// the tabulated range.
    fn eval(&self, xi: f64) -> f64 {
        let rows = &self.rows;
        if xi <= rows[0].0 {
            return rows[0].1;
        }
        if xi >= rows[rows.len() - 1].0 {
            return rows[rows.len() - 1].1;
        }
        let idx = rows.partition_point(|&(x, _)| x < xi);
        let (x0, e0) = rows[idx - 1];
        let (x1, e1) = rows[idx];
        if e0 == e1 {
            return e0;
        }
        let t = (xi.ln() - x0.ln()) / (x1.ln() - x0.ln());
        (e0.ln() + t * (e1.ln() - e0.ln())).exp()
    }

    /// ξ at which ε − 1 first drops below half its low-frequency value.
    fn half_decay_xi(&self) -> f64 {
        let target = (self.rows[0].1 - 1.0) / 2.0;
        self.rows
            .iter()
            .find(|&&(_, e)| e - 1.0 <= target)
            .map(|&(x, _)| x)
            .unwrap_or(self.rows[self.rows.len() - 1].0)
    }
}

/// Bundled default materials. Gold and aluminum are Drude metals; silicon
/// and polystyrene are single-oscillator surrogates for measured data and
/// are documented as such. Exact reproduction of externally measured
/// spectra goes through [`DielectricModel::Tabulated`].
pub fn builtin_material(name: &str) -> Option<DielectricModel> {
    builtin_registry()
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, m)| m.clone())
}

/// Names of the bundled materials.
pub fn builtin_material_names() -> Vec<&'static str> {
    builtin_registry().iter().map(|(n, _)| *n).collect()
}

fn builtin_registry() -> &'static Vec<(&'static str, DielectricModel)> {
    static REGISTRY: OnceLock<Vec<(&'static str, DielectricModel)>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let data = include_str!("../../data/default_materials.csv");
        let mut out = Vec::new();
        for line in data.lines().skip(1) {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let name: &'static str = Box::leak(f[0].to_owned().into_boxed_str());
            let p = |i: usize| f[i].parse::<f64>().expect("bundled material data");
            let model = match f[1] {
                "drude" => DielectricModel::drude(p(2), p(3)),
                "lorentz" => DielectricModel::lorentz(vec![LorentzOscillator {
                    resonance_ev: p(2),
                    damping_ev: p(3),
                    strength_ev2: p(4),
                }]),
                "perfect_metal" => DielectricModel::PerfectMetal,
                other => panic!("bundled material data: unknown model {other}"),
            };
            out.push((name, model));
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ImagFrequency;
    use approx::assert_relative_eq;

    fn xi(v: f64) -> ImagFrequency {
        ImagFrequency::non_retarded(v).unwrap()
    }

    #[test]
    fn drude_matches_hand_evaluation() {
        let gold = DielectricModel::drude(9.0, 0.035);
        // Independent hand calculation of 1 + ωp²/(ξ(ξ+γ)) at ξ = ωp.
        let expect = 1.0 + 81.0 / (9.0 * 9.035);
        assert_relative_eq!(gold.eval(xi(9.0)).unwrap(), expect, max_relative = 1e-14);
        assert_relative_eq!(expect, 1.99613, max_relative = 1e-5);
    }

    #[test]
    fn drude_high_frequency_limit_is_vacuum() {
        let gold = DielectricModel::drude(9.0, 0.035);
        let e = gold.eval(xi(1e8)).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn drude_static_is_domain_error() {
        let gold = DielectricModel::drude(9.0, 0.035);
        assert!(matches!(gold.eval(xi(0.0)), Err(CoreError::StaticDrude)));
    }

    #[test]
    fn maxwell_garnett_zero_fill_is_host() {
        let host = DielectricModel::constant(2.25).unwrap();
        let mg =
            DielectricModel::maxwell_garnett(DielectricModel::drude(9.0, 0.035), host.clone(), 0.0)
                .unwrap();
        for v in [0.1, 1.0, 10.0] {
            assert_eq!(mg.eval(xi(v)).unwrap(), host.eval(xi(v)).unwrap());
        }
    }

    #[test]
    fn maxwell_garnett_metal_inclusions() {
        // η = 1 limit: ε = ε_h (1 + 3f/(1−f)).
        let mg = DielectricModel::maxwell_garnett(
            DielectricModel::PerfectMetal,
            DielectricModel::constant(1.0).unwrap(),
            0.25,
        )
        .unwrap();
        assert_relative_eq!(mg.eval(xi(1.0)).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn maxwell_garnett_fill_bounds() {
        let gold = DielectricModel::drude(9.0, 0.035);
        let host = DielectricModel::constant(1.0).unwrap();
        assert!(DielectricModel::maxwell_garnett(gold.clone(), host.clone(), 1.2).is_err());
        assert!(DielectricModel::maxwell_garnett(gold, host, -0.1).is_err());
    }

    #[test]
    fn lorentz_is_finite_at_zero_and_decays() {
        let si = builtin_material("silicon").unwrap();
        let e0 = si.eval(xi(0.0)).unwrap();
        assert!(e0 > 10.0 && e0 < 13.0, "silicon surrogate static eps: {e0}");
        let e1 = si.eval(xi(20.0)).unwrap();
        assert!(e1 < e0 && e1 >= 1.0);
    }

    #[test]
    fn monotone_decay_on_imaginary_axis() {
        let models = [
            builtin_material("gold").unwrap(),
            builtin_material("aluminum").unwrap(),
            builtin_material("silicon").unwrap(),
            builtin_material("polystyrene").unwrap(),
        ];
        for m in &models {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let v = m.eval(xi(0.05 * i as f64)).unwrap();
                assert!(v <= prev + 1e-15 && v >= 1.0);
                prev = v;
            }
        }
    }

    #[test]
    fn tabulated_validation_and_interpolation() {
        assert!(DielectricTable::new(vec![(1.0, 2.0), (0.5, 1.5)]).is_err());
        assert!(DielectricTable::new(vec![(-1.0, 2.0), (0.5, 1.5)]).is_err());
        assert!(DielectricTable::new(vec![(0.5, 1.5), (1.0, 2.0)]).is_err()); // increasing eps

        let t = DielectricTable::new(vec![(0.1, 4.0), (1.0, 2.0), (10.0, 1.1)]).unwrap();
        let m = DielectricModel::Tabulated { table: t };
        // Clamped outside the range.
        assert_eq!(m.eval(xi(0.01)).unwrap(), 4.0);
        assert_eq!(m.eval(xi(100.0)).unwrap(), 1.1);
        // Exact at the nodes, monotone between them.
        assert_eq!(m.eval(xi(1.0)).unwrap(), 2.0);
        let mid = m.eval(xi(0.3)).unwrap();
        assert!(mid < 4.0 && mid > 2.0);
    }

    #[test]
    fn tabulated_csv_requires_header() {
        let ok = "xi_eV,eps\n0.1,4.0\n1.0,2.0\n";
        assert!(DielectricTable::from_csv(ok.as_bytes()).is_ok());
        let missing = "0.1,4.0\n1.0,2.0\n";
        assert!(DielectricTable::from_csv(missing.as_bytes()).is_err());
    }

    #[test]
    fn builtin_names_present() {
        for name in [
            "gold",
            "aluminum",
            "perfect_metal",
            "silicon",
            "polystyrene",
        ] {
            assert!(builtin_material(name).is_some(), "missing builtin {name}");
        }
    }
}
