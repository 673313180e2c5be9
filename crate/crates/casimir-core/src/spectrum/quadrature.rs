//! Gauss-Legendre nodes and the semi-infinite map used for the frequency
//! integral.
//!
//! The substitution `ξ = ξ₀ u/(1−u)` takes `u ∈ (0,1)` to `ξ ∈ (0,∞)` with
//! Jacobian `ξ₀/(1−u)²`; Gauss-Legendre points on the unit interval then
//! sample the whole axis with geometric convergence for smooth decaying
//! integrands.

/// Gauss-Legendre nodes and weights on (−1, 1), by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Mapped rule for `∫₀^∞ f(ξ) dξ`: returns (ξᵢ, wᵢ) such that the integral
/// is approximated by `Σ wᵢ f(ξᵢ)`.
pub fn mapped_rule(n: usize, map_scale: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter()
        .zip(w.iter())
        .map(|(&xi, &wi)| {
            let u = 0.5 * (xi + 1.0);
            let wu = 0.5 * wi;
            let denom = 1.0 - u;
            (map_scale * u / denom, wu * map_scale / (denom * denom))
        })
        .collect()
}
