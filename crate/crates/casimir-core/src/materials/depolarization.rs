//! Ellipsoid depolarization factors.
//!
//! The factor along axis i of an ellipsoid with semi-axes (a₁, a₂, a₃) is
//!
//! ```text
//! L_i = (a₁a₂a₃ / 2) ∫₀^∞ ds / ((s + aᵢ²) √((s+a₁²)(s+a₂²)(s+a₃²)))
//! ```
//!
//! which is `(a₁a₂a₃ / 3) · R_D(a_j², a_k², a_i²)` in terms of Carlson's
//! degenerate elliptic integral. The duplication algorithm below handles
//! all aspect ratios, including the degenerate sphere, with one code path
//! and keeps `L₁ + L₂ + L₃ = 1` to near machine precision.

/// Carlson's symmetric elliptic integral R_D(x, y, z)
/// = (3/2) ∫₀^∞ dt / ((t+z) √((t+x)(t+y)(t+z))).
///
/// Duplication-theorem evaluation; x, y ≥ 0 and z > 0.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    assert!(x >= 0.0 && y >= 0.0 && z > 0.0, "carlson_rd domain");
    const ERRTOL: f64 = 1e-7; // error scales as ERRTOL^6
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let sqrt_x = x.sqrt();
        let sqrt_y = y.sqrt();
        let sqrt_z = z.sqrt();
        let lambda = sqrt_x * (sqrt_y + sqrt_z) + sqrt_y * sqrt_z;
        sum += fac / (sqrt_z * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let mu = (x + y + 3.0 * z) / 5.0;
        let dev = (mu - x).abs().max((mu - y).abs()).max((mu - z).abs());
        if dev < ERRTOL * mu {
            // Fifth-order series tail at the converged point.
            let del_x = (mu - x) / mu;
            let del_y = (mu - y) / mu;
            let del_z = (mu - z) / mu;
            let ea = del_x * del_y;
            let eb = del_z * del_z;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            const C1: f64 = 3.0 / 14.0;
            const C2: f64 = 1.0 / 6.0;
            const C3: f64 = 9.0 / 22.0;
            const C4: f64 = 3.0 / 26.0;
            const C5: f64 = 0.25 * C3;
            const C6: f64 = 1.5 * C4;
            let series = 1.0
                + ed * (-C1 + C5 * ed - C6 * del_z * ee)
                + del_z * (C2 * ee + del_z * (-C3 * ec + del_z * C4 * ea));
            return 3.0 * sum + fac * series / (mu * mu.sqrt());
        }
    }
}

/// Depolarization factors (L₁, L₂, L₃) of an ellipsoid with the given
/// semi-axes, aligned with the coordinate axes.
pub fn depolarization_factors(semi_axes: (f64, f64, f64)) -> (f64, f64, f64) {
    let (a, b, c) = semi_axes;
    assert!(a > 0.0 && b > 0.0 && c > 0.0, "semi-axes must be positive");
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let v3 = a * b * c / 3.0;
    (
        v3 * carlson_rd(b2, c2, a2),
        v3 * carlson_rd(c2, a2, b2),
        v3 * carlson_rd(a2, b2, c2),
    )
}
