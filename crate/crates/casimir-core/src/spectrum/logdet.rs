//! Log-determinant of the unit-diagonal scaled system by blocked Cholesky.
//!
//! The input matrix is stored as its deviation `E = M − I` with only the
//! lower triangle meaningful. Each pivot is `1 + e_jj` where `e_jj` has
//! accumulated only subtractive Schur updates, never the leading 1, so
//! `log(pivot) = log1p(e_jj)` keeps full relative precision even when the
//! coupling is ~1e−20 — which is exactly the regime of far-separated
//! bodies, where the physically meaningful log-determinant difference is
//! that small.
//!
//! A non-positive pivot means the determinant sign is not positive, i.e.
//! the dipole system left its stable regime; that is reported as an error
//! rather than silently integrated over.

use nalgebra::DMatrix;

use crate::error::CoreError;

const BLOCK: usize = 64;

/// Factorize `I + E` (E symmetric, lower triangle stored, destroyed in
/// place) and return `log det (I + E)` as the sum of pivot logarithms.
pub(crate) fn logdet_unit_deviation(e: &mut DMatrix<f64>, xi_ev: f64) -> Result<f64, CoreError> {
    let n = e.nrows();
    debug_assert_eq!(n, e.ncols());
    let mut acc = 0.0_f64;
    let mut p0 = 0;
    while p0 < n {
        let pb = BLOCK.min(n - p0);
        // Unblocked factorization of the panel columns [p0, p0+pb).
        {
            let data = e.as_mut_slice();
            for j in p0..p0 + pb {
                let dev = data[j * n + j];
                if !dev.is_finite() {
                    return Err(CoreError::SingularMatrix { index: j, xi_ev });
                }
                let pivot = 1.0 + dev;
                if pivot < 0.0 {
                    return Err(CoreError::PivotSign {
                        index: j,
                        pivot,
                        xi_ev,
                    });
                }
                if pivot == 0.0 {
                    return Err(CoreError::SingularMatrix { index: j, xi_ev });
                }
                acc += dev.ln_1p();
                let inv_l = 1.0 / pivot.sqrt();
                for v in &mut data[j * n + j + 1..j * n + n] {
                    *v *= inv_l;
                }
                // Right-looking update of the remaining panel columns.
                for c in j + 1..p0 + pb {
                    let (head, tail) = data.split_at_mut(c * n);
                    let col_j = &head[j * n..(j + 1) * n];
                    let col_c = &mut tail[..n];
                    let l_cj = col_j[c];
                    if l_cj != 0.0 {
                        for i in c..n {
                            col_c[i] -= l_cj * col_j[i];
                        }
                    }
                }
            }
        }
        // Trailing update: E[t0.., t0..] −= L21 L21ᵀ, lower blocks only.
        let t0 = p0 + pb;
        if t0 < n {
            let l21 = e.view((t0, p0), (n - t0, pb)).clone_owned();
            let l21_t = l21.transpose();
            let mut c0 = t0;
            while c0 < n {
                let cb = BLOCK.min(n - c0);
                let mut cview = e.view_mut((c0, c0), (n - c0, cb));
                cview.gemm(
                    -1.0,
                    &l21.view((c0 - t0, 0), (n - c0, pb)),
                    &l21_t.view((0, c0 - t0), (pb, cb)),
                    1.0,
                );
                c0 += cb;
            }
        }
        p0 += pb;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_spd_deviation(n: usize, scale: f64, seed: u64) -> DMatrix<f64> {
        // Small deterministic LCG; E = scale · (B + Bᵀ)/2 with ‖E‖ < 1.
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = DMatrix::from_fn(n, n, |_, _| next());
        (&b + b.transpose()) * (scale / n as f64)
    }

    #[test]
    fn matches_reference_cholesky() {
        for (n, scale) in [(5usize, 0.4), (40, 0.6), (150, 0.8)] {
            let e = random_spd_deviation(n, scale, 42 + n as u64);
            let mut full = e.clone();
            for i in 0..n {
                full[(i, i)] += 1.0;
            }
            let chol = nalgebra::Cholesky::new(full.clone()).expect("SPD by construction");
            let reference: f64 = (0..n).map(|i| 2.0 * chol.l()[(i, i)].ln()).sum();
            let got = logdet_unit_deviation(&mut e.clone(), 1.0).unwrap();
            assert_relative_eq!(got, reference, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn tiny_coupling_keeps_relative_precision() {
        // I + E with a single off-diagonal pair ±t: det = 1 − t², so
        // logdet = log1p(−t²). At t = 1e−9 the naive route through
        // dense 1−t² loses everything; this one must not.
        for t in [1e-3, 1e-6, 1e-9, 1e-12] {
            let mut e = DMatrix::zeros(4, 4);
            e[(2, 0)] = t; // lower triangle entry
            let got = logdet_unit_deviation(&mut e, 1.0).unwrap();
            let expect = (-(t * t)).ln_1p();
            assert_relative_eq!(got, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn non_positive_pivot_is_reported() {
        // Deviation −1.5 on the diagonal gives pivot −0.5.
        let mut e = DMatrix::zeros(3, 3);
        e[(1, 1)] = -1.5;
        match logdet_unit_deviation(&mut e, 2.5) {
            Err(CoreError::PivotSign { index, xi_ev, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(xi_ev, 2.5);
            }
            other => panic!("expected pivot-sign error, got {other:?}"),
        }
    }

    #[test]
    fn strong_offdiagonal_coupling_trips_pivot_sign() {
        // det(I + E) with e(1,0) = e(0,1) = 2 is 1 − 4 < 0.
        let mut e = DMatrix::zeros(2, 2);
        e[(1, 0)] = 2.0;
        assert!(matches!(
            logdet_unit_deviation(&mut e, 0.1),
            Err(CoreError::PivotSign { .. })
        ));
    }

    #[test]
    fn identity_has_zero_logdet() {
        let mut e = DMatrix::zeros(100, 100);
        assert_eq!(logdet_unit_deviation(&mut e, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn blocked_and_small_sizes_agree_across_block_boundary() {
        // Sizes straddling the block size to exercise panel + trailing code.
        for n in [63, 64, 65, 129] {
            let e = random_spd_deviation(n, 0.7, 7 * n as u64);
            let mut full = e.clone();
            for i in 0..n {
                full[(i, i)] += 1.0;
            }
            let chol = nalgebra::Cholesky::new(full).unwrap();
            let reference: f64 = (0..n).map(|i| 2.0 * chol.l()[(i, i)].ln()).sum();
            let got = logdet_unit_deviation(&mut e.clone(), 1.0).unwrap();
            assert_relative_eq!(got, reference, max_relative = 1e-9, epsilon = 1e-12);
        }
    }
}
