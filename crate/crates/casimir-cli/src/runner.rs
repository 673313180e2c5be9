//! Run orchestration: artifacts on disk, per-row flushing, and the run
//! manifest.
//!
//! `run` writes `sweep.csv` (or `energy.csv` for sweep-less configs) plus
//! a `manifest.toml`. The manifest is written up front with
//! `status = "incomplete"` and rewritten on completion, so an interrupted
//! run leaves behind flushed partial rows and a manifest that says so.
//! The `[config]` table of the manifest is the parsed config echoed back;
//! re-parsing it reproduces the run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use casimir_core::observables::{fit_power_law, scene_digest, sweep};
use casimir_core::spectrum::interaction_energy;
use casimir_core::ImagFrequency;

use crate::config::{BuiltScenario, ScenarioConfig};
use crate::CliError;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    status: &'a str,
    version: &'a str,
    started_unix_s: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    finished_unix_s: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_count: Option<usize>,
    scene_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ManifestError>,
    config: &'a ScenarioConfig,
}

#[derive(Debug, Serialize)]
struct ManifestError {
    kind: String,
    message: String,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let text = toml::to_string(manifest)
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    fs::write(path, text)?;
    Ok(())
}

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub fit: Option<(f64, f64)>,
    pub quiet: bool,
}

/// Execute a full scenario run; returns the path of the results CSV.
pub fn run(
    config: &ScenarioConfig,
    built: &BuiltScenario,
    opts: &RunOptions,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&opts.out_dir)?;
    let manifest_path = opts.out_dir.join("manifest.toml");
    let started = unix_now();
    let timer = Instant::now();
    let digest = format!("{:016x}", scene_digest(&built.scene));
    let mut manifest = Manifest {
        status: "incomplete",
        version: env!("CARGO_PKG_VERSION"),
        started_unix_s: started,
        finished_unix_s: None,
        wall_s: None,
        node_count: None,
        scene_digest: digest,
        error: None,
        config,
    };
    write_manifest(&manifest_path, &manifest)?;

    let outcome = run_inner(built, opts);
    match outcome {
        Ok((csv_path, node_count)) => {
            manifest.status = "complete";
            manifest.finished_unix_s = Some(unix_now());
            manifest.wall_s = Some(timer.elapsed().as_secs_f64());
            manifest.node_count = Some(node_count);
            write_manifest(&manifest_path, &manifest)?;
            Ok(csv_path)
        }
        Err(e) => {
            manifest.status = "failed";
            manifest.finished_unix_s = Some(unix_now());
            manifest.wall_s = Some(timer.elapsed().as_secs_f64());
            manifest.error = Some(ManifestError {
                kind: e.kind().to_string(),
                message: e.to_string(),
            });
            write_manifest(&manifest_path, &manifest)?;
            Err(e)
        }
    }
}

fn run_inner(built: &BuiltScenario, opts: &RunOptions) -> Result<(PathBuf, usize), CliError> {
    match &built.sweep {
        Some(spec) => {
            let result = sweep(&built.scene, spec, &built.quad)?;
            let fit_window = opts.fit.or(built.output.fit_window.map(|w| (w[0], w[1])));
            let fit = match fit_window {
                Some(window) => Some(fit_power_law(&result, window)?),
                None => None,
            };
            let csv_path = opts.out_dir.join("sweep.csv");
            // Rows are flushed as they are written so an interrupted run
            // keeps what it paid for.
            let mut file = File::create(&csv_path)?;
            writeln!(file, "param,energy_eV,derivative,quad_error_eV")?;
            for row in &result.rows {
                match row.derivative {
                    Some(d) => writeln!(
                        file,
                        "{},{:e},{:e},{:e}",
                        row.param, row.energy_ev, d, row.quad_error_ev
                    )?,
                    None => writeln!(
                        file,
                        "{},{:e},,{:e}",
                        row.param, row.energy_ev, row.quad_error_ev
                    )?,
                }
                file.flush()?;
            }
            if let Some((exponent, stderr)) = fit {
                writeln!(file, "# exponent={exponent} stderr={stderr}")?;
                if !opts.quiet {
                    println!("fit: exponent={exponent} stderr={stderr}");
                }
            }
            file.flush()?;
            let nodes = 3 * result.rows.len() * expected_nodes(&built.quad);
            if !opts.quiet {
                println!("wrote {}", csv_path.display());
            }
            if built.output.dump_integrand {
                // One integrand dump for the first grid pose.
                let energy = interaction_energy(&built.scene, &built.quad)?;
                dump_integrand(
                    &opts.out_dir.join("integrand.csv"),
                    &energy.integrand_samples,
                )?;
            }
            Ok((csv_path, nodes))
        }
        None => {
            let energy = interaction_energy(&built.scene, &built.quad)?;
            let csv_path = opts.out_dir.join("energy.csv");
            let mut file = BufWriter::new(File::create(&csv_path)?);
            writeln!(file, "energy_eV,quad_error_eV,node_count")?;
            writeln!(
                file,
                "{:e},{:e},{}",
                energy.energy_ev, energy.quad_error_ev, energy.node_count
            )?;
            file.flush()?;
            if built.output.dump_integrand {
                dump_integrand(
                    &opts.out_dir.join("integrand.csv"),
                    &energy.integrand_samples,
                )?;
            }
            if !opts.quiet {
                println!(
                    "energy_eV = {:e}  quad_error_eV = {:e}  nodes = {}",
                    energy.energy_ev, energy.quad_error_ev, energy.node_count
                );
                println!("wrote {}", csv_path.display());
            }
            Ok((csv_path, energy.node_count))
        }
    }
}

fn expected_nodes(quad: &casimir_core::QuadratureSpec) -> usize {
    match quad.scheme {
        casimir_core::QuadScheme::GaussLegendreMapped => 3 * quad.nodes,
        casimir_core::QuadScheme::AdaptiveSimpson => quad.nodes,
    }
}

pub fn dump_integrand(path: &Path, samples: &[(f64, f64)]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "xi_eV,delta_logdet")?;
    for (xi, delta) in samples {
        writeln!(file, "{xi:e},{delta:e}")?;
    }
    file.flush()?;
    Ok(())
}

/// `geometry dump`: lab-frame particle positions and contact radii.
pub fn dump_geometry<W: Write>(scene: &casimir_core::Scene, mut w: W) -> Result<(), CliError> {
    writeln!(w, "x_um,y_um,z_um,radius_um")?;
    for body in scene.bodies() {
        let positions = body.lab_positions();
        for (p, particle) in positions.iter().zip(body.particles()) {
            writeln!(
                w,
                "{},{},{},{}",
                p.x,
                p.y,
                p.z,
                particle.polarizability.contact_radius_um()
            )?;
        }
    }
    Ok(())
}

/// `coupling dump`: dense system matrix at one frequency, binary format.
pub fn dump_coupling(scene: &casimir_core::Scene, xi_ev: f64, path: &Path) -> Result<(), CliError> {
    let xi = ImagFrequency::for_mode(scene.mode, xi_ev)?;
    let matrix = casimir_core::coupling::assemble(scene, xi)?;
    let mut file = BufWriter::new(File::create(path)?);
    casimir_core::coupling::write_matrix_binary(&matrix, &mut file)?;
    file.flush()?;
    Ok(())
}
