//! Dipole–dipole interaction tensor and assembly of the 3N×3N system
//! matrix `M(iξ) = diag(α⁻¹) + A`.
//!
//! On the imaginary axis every entry is real. For a pair at separation
//! `r = |r_jk|` with unit vector `û` and wavenumber κ the tensor has
//! eigenvalue `e^{−κr}(1 + κr + κ²r²)/r³` on the plane transverse to `û`
//! and `−2 e^{−κr}(1 + κr)/r³` along `û`; κ = 0 reproduces the static
//! dipole kernel.
//!
//! Dense storage only: target cluster sizes are a few thousand particles,
//! where O(N²) assembly and O(N³) factorization are well within desk
//! scale, so no hierarchical acceleration is attempted.

use std::io::Write;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::CoreError;
use crate::geometry::Scene;
use crate::units::{ImagFrequency, Mode};

/// Interaction tensor between two dipoles separated by `r_jk`, μm⁻³.
///
/// Even in both arguments: `dipole_tensor(−r, κ) = dipole_tensor(r, κ)`.
pub fn dipole_tensor(r_jk: &Vector3<f64>, kappa: f64) -> Result<Matrix3<f64>, CoreError> {
    let r = r_jk.norm();
    if r == 0.0 {
        return Err(CoreError::CoincidentParticles);
    }
    let u = r_jk / r;
    let kr = kappa * r;
    let damp = (-kr).exp();
    let inv_r3 = 1.0 / (r * r * r);
    let transverse = damp * (1.0 + kr + kr * kr) * inv_r3;
    let longitudinal = -2.0 * damp * (1.0 + kr) * inv_r3;
    let uu = u * u.transpose();
    Ok(Matrix3::identity() * transverse + uu * (longitudinal - transverse))
}

/// Dense symmetric system matrix. Row `3j + β` corresponds to particle `j`,
/// cartesian component `β`. Diagonal 3×3 blocks hold inverse
/// polarizability tensors, off-diagonal blocks the interaction tensor;
/// self-interaction blocks are zero by construction.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub matrix: DMatrix<f64>,
    pub mode: Mode,
    pub xi: ImagFrequency,
}

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Flat index of (particle, cartesian component).
    pub fn index(&self, particle: usize, component: usize) -> usize {
        3 * particle + component
    }
}

/// Assemble `M = diag(α⁻¹) + A` over all particle pairs of the scene.
pub fn assemble(scene: &Scene, xi: ImagFrequency) -> Result<CouplingMatrix, CoreError> {
    assemble_inner(scene, xi, false)
}

/// As [`assemble`] but with every inter-body block zeroed: the
/// block-diagonal reference system in which the bodies do not interact
/// (intra-body coupling retained).
pub fn assemble_decoupled(scene: &Scene, xi: ImagFrequency) -> Result<CouplingMatrix, CoreError> {
    assemble_inner(scene, xi, true)
}

fn assemble_inner(
    scene: &Scene,
    xi: ImagFrequency,
    decoupled: bool,
) -> Result<CouplingMatrix, CoreError> {
    let particles = scene.lab_particles(xi)?;
    let kappa = xi.kappa();
    let n = particles.len();
    let dim = 3 * n;

    let inverses: Vec<Matrix3<f64>> = particles
        .iter()
        .map(|p| p.alpha.inverse(xi))
        .collect::<Result<_, _>>()?;

    let mut data = vec![0.0; dim * dim];
    // Column-major: chunk c holds the three columns of particle c.
    let cols: Result<Vec<()>, CoreError> = data
        .par_chunks_mut(3 * dim)
        .enumerate()
        .map(|(c, chunk)| {
            for j in 0..n {
                let block = if j == c {
                    inverses[c]
                } else if decoupled && particles[j].body_index != particles[c].body_index {
                    continue;
                } else {
                    dipole_tensor(
                        &(particles[j].position_um - particles[c].position_um),
                        kappa,
                    )?
                };
                for col in 0..3 {
                    for row in 0..3 {
                        chunk[col * dim + 3 * j + row] = block[(row, col)];
                    }
                }
            }
            Ok(())
        })
        .collect();
    cols?;

    let matrix = DMatrix::from_vec(dim, dim, data);
    debug_assert!(
        symmetry_defect(&matrix) <= 1e-13 * matrix.norm(),
        "assembled matrix must be symmetric"
    );
    Ok(CouplingMatrix {
        matrix,
        mode: scene.mode,
        xi,
    })
}

#[allow(dead_code)]
fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut defect: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j {
            defect = defect.hypot(m[(i, j)] - m[(j, i)]);
        }
    }
    defect
}

/// Unit-diagonal scaled system used for log-determinant evaluation.
///
/// With `D = diag(α_j^{1/2})` the congruent matrix `D M D` has exactly the
/// identity on its diagonal blocks and `√α_j A_jk √α_k` off the diagonal.
/// The congruence adds `Σ_j log det α_j` to the log-determinant, the same
/// amount for the coupled and the decoupled system, so their difference is
/// untouched while every factorization pivot stays O(1).
///
/// Matrices are stored as the deviation from the identity (the diagonal
/// holds `M'_jj − 1 = 0` at assembly time), which lets the factorization
/// accumulate `log1p` of pivot deviations at full relative precision even
/// when the coupling is ~1e−20.
pub(crate) struct ScaledSystem {
    /// Deviation form of the full scaled matrix; only the lower triangle
    /// is meaningful.
    pub full: DMatrix<f64>,
    /// Deviation form of each body's diagonal block (the decoupled system
    /// is block-diagonal, so its factorization splits per body).
    pub body_blocks: Vec<DMatrix<f64>>,
}

pub(crate) fn assemble_scaled(scene: &Scene, xi: ImagFrequency) -> Result<ScaledSystem, CoreError> {
    let particles = scene.lab_particles(xi)?;
    let kappa = xi.kappa();
    let n = particles.len();
    let dim = 3 * n;

    let roots: Vec<Matrix3<f64>> = particles
        .iter()
        .map(|p| p.alpha.sqrt(xi))
        .collect::<Result<_, _>>()?;

    let mut data = vec![0.0; dim * dim];
    let cols: Result<Vec<()>, CoreError> = data
        .par_chunks_mut(3 * dim)
        .enumerate()
        .map(|(c, chunk)| {
            // Lower triangle only: rows j > c. Diagonal blocks stay zero
            // (deviation from identity).
            for j in (c + 1)..n {
                let a = dipole_tensor(
                    &(particles[j].position_um - particles[c].position_um),
                    kappa,
                )?;
                let block = roots[j] * a * roots[c];
                for col in 0..3 {
                    for row in 0..3 {
                        chunk[col * dim + 3 * j + row] = block[(row, col)];
                    }
                }
            }
            Ok(())
        })
        .collect();
    cols?;
    let full = DMatrix::from_vec(dim, dim, data);

    let body_blocks = scene
        .body_ranges()
        .into_iter()
        .map(|range| {
            let bdim = 3 * (range.end - range.start);
            full.view((3 * range.start, 3 * range.start), (bdim, bdim))
                .clone_owned()
        })
        .collect();

    Ok(ScaledSystem { full, body_blocks })
}

/// Write the dense matrix in the diagnostic binary format: a 16-byte header
/// (dimension as little-endian u64, then a mode flag u64: 0 = non-retarded,
/// 1 = retarded) followed by row-major little-endian f64 entries.
pub fn write_matrix_binary<W: Write>(m: &CouplingMatrix, mut w: W) -> std::io::Result<()> {
    let dim = m.dim() as u64;
    let flag: u64 = match m.mode {
        Mode::NonRetarded => 0,
        Mode::Retarded => 1,
    };
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&flag.to_le_bytes())?;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            w.write_all(&m.matrix[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}
