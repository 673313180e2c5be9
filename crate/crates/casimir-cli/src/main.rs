//! `casimir` — coupled-dipole Casimir / van der Waals solver CLI.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use casimir_cli::config::{build_scenario, parse_config};
use casimir_cli::runner::{self, RunOptions};
use casimir_cli::CliError;
use casimir_core::materials::PolarizabilityModel;
use casimir_core::{oracle, DielectricModel, Mode};

#[derive(Parser)]
#[command(
    name = "casimir",
    version,
    about = "Casimir / van der Waals interactions between nano-structured bodies"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalFlags {
    /// Worker threads (0 = auto). Falls back to CASIMIR_THREADS.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Assert the run is free of random number generation (it always is;
    /// the flag exists so scripts can state the expectation).
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config: sweep (or single energy) plus manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's output.directory, or `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a power-law fit footer over the window zmin:zmax.
        #[arg(long, value_parser = parse_fit_window)]
        fit: Option<(f64, f64)>,
    },
    /// Compute the interaction energy of the configured scene.
    Energy {
        config: PathBuf,
        /// Write the sampled integrand (xi_eV, delta_logdet) as CSV.
        #[arg(long)]
        dump_integrand: Option<PathBuf>,
    },
    /// Geometry inspection.
    Geometry {
        #[command(subcommand)]
        command: GeometryCommand,
    },
    /// Coupling-matrix diagnostics.
    Coupling {
        #[command(subcommand)]
        command: CouplingCommand,
    },
    /// Reference results for spot checks.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Bundled scenario presets.
    Presets {
        #[command(subcommand)]
        command: PresetsCommand,
    },
}

#[derive(Subcommand)]
enum GeometryCommand {
    /// Emit particle positions and radii as CSV (x_um,y_um,z_um,radius_um).
    Dump {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CouplingCommand {
    /// Write the dense system matrix at one frequency (binary: u64 dim,
    /// u64 mode flag, then row-major little-endian f64).
    Dump {
        config: PathBuf,
        /// Imaginary-axis frequency in eV.
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value = "coupling.bin")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Dispersion coefficient C6 for two spheres of bundled materials.
    LondonC6 {
        #[arg(long, default_value = "gold")]
        material: String,
        #[arg(long)]
        radius_um: f64,
        #[arg(long)]
        material2: Option<String>,
        #[arg(long)]
        radius2_um: Option<f64>,
        /// Frequency cutoff in eV, required for non-decaying materials.
        #[arg(long)]
        cutoff_ev: Option<f64>,
    },
    /// Closed-form two-dipole log-determinant difference.
    TwoDipole {
        #[arg(long, default_value = "gold")]
        material: String,
        #[arg(long)]
        radius_um: f64,
        #[arg(long)]
        r_um: f64,
        #[arg(long)]
        xi_ev: f64,
        #[arg(long, default_value = "retarded")]
        mode: String,
    },
    /// Retarded two-particle asymptote −23ħc α₁α₂/(4π r⁷).
    CasimirPolder {
        #[arg(long)]
        alpha1_um3: f64,
        #[arg(long)]
        alpha2_um3: f64,
        #[arg(long)]
        r_um: f64,
    },
}

#[derive(Subcommand)]
enum PresetsCommand {
    /// List bundled presets and their defaults.
    List,
}

fn parse_fit_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| "expected zmin:zmax".to_string())?;
    let lo: f64 = a.parse().map_err(|e| format!("zmin: {e}"))?;
    let hi: f64 = b.parse().map_err(|e| format!("zmax: {e}"))?;
    if lo >= hi {
        return Err(format!("window [{lo}, {hi}] must be increasing"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(&cli.global);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_threads(flags: &GlobalFlags) {
    let threads = if flags.threads > 0 {
        flags.threads
    } else {
        std::env::var("CASIMIR_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0)
    };
    if threads > 0 {
        // The CLI owns the global pool; solver modules only inherit it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn load(
    config_path: &PathBuf,
) -> Result<
    (
        casimir_cli::config::ScenarioConfig,
        casimir_cli::config::BuiltScenario,
    ),
    CliError,
> {
    let text = fs::read_to_string(config_path)?;
    let config = parse_config(&text)?;
    let base_dir = config_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let built = build_scenario(&config, &base_dir).map_err(CliError::into_config_phase)?;
    Ok((config, built))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, fit } => {
            let (parsed, built) = load(&config)?;
            let out_dir = out
                .or_else(|| built.output.directory.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let opts = RunOptions {
                out_dir,
                fit,
                quiet: cli.global.quiet,
            };
            runner::run(&parsed, &built, &opts)?;
            Ok(())
        }
        Command::Energy {
            config,
            dump_integrand,
        } => {
            let (_, built) = load(&config)?;
            let energy = casimir_core::interaction_energy(&built.scene, &built.quad)?;
            println!(
                "energy_eV = {:e}  quad_error_eV = {:e}  nodes = {}",
                energy.energy_ev, energy.quad_error_ev, energy.node_count
            );
            if let Some(path) = dump_integrand {
                runner::dump_integrand(&path, &energy.integrand_samples)?;
                if !cli.global.quiet {
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Geometry { command } => match command {
            GeometryCommand::Dump { config, out } => {
                let (_, built) = load(&config)?;
                match out {
                    Some(path) => {
                        let file = fs::File::create(&path)?;
                        runner::dump_geometry(&built.scene, file)?;
                        if !cli.global.quiet {
                            println!("wrote {}", path.display());
                        }
                    }
                    None => runner::dump_geometry(&built.scene, std::io::stdout().lock())?,
                }
                Ok(())
            }
        },
        Command::Coupling { command } => match command {
            CouplingCommand::Dump { config, xi, out } => {
                let (_, built) = load(&config)?;
                runner::dump_coupling(&built.scene, xi, &out)?;
                if !cli.global.quiet {
                    println!("wrote {}", out.display());
                }
                Ok(())
            }
        },
        Command::Oracle { command } => run_oracle(command),
        Command::Presets { command } => match command {
            PresetsCommand::List => {
                for (name, description) in casimir_core::preset_descriptions() {
                    println!("{name}: {description}");
                }
                Ok(())
            }
        },
    }
}

fn lookup_material(name: &str) -> Result<DielectricModel, CliError> {
    casimir_core::materials::builtin_material(name).ok_or_else(|| {
        CliError::Config(vec![format!(
            "unknown bundled material '{name}' (expected one of {:?})",
            casimir_core::materials::builtin_material_names()
        )])
    })
}

fn run_oracle(command: OracleCommand) -> Result<(), CliError> {
    match command {
        OracleCommand::LondonC6 {
            material,
            radius_um,
            material2,
            radius2_um,
            cutoff_ev,
        } => {
            let m1 = lookup_material(&material)?;
            let m2 = match &material2 {
                Some(n) => lookup_material(n)?,
                None => m1.clone(),
            };
            let a1 = PolarizabilityModel::SphereStatic {
                radius_um,
                material: m1,
            };
            let a2 = PolarizabilityModel::SphereStatic {
                radius_um: radius2_um.unwrap_or(radius_um),
                material: m2,
            };
            let c6 = oracle::london_c6(&a1, &a2, cutoff_ev)?;
            println!("C6_eV_um6 = {c6:e}");
            Ok(())
        }
        OracleCommand::TwoDipole {
            material,
            radius_um,
            r_um,
            xi_ev,
            mode,
        } => {
            let mode = match mode.as_str() {
                "retarded" => Mode::Retarded,
                "nonretarded" => Mode::NonRetarded,
                other => {
                    return Err(CliError::Config(vec![format!(
                        "mode: '{other}' is not 'retarded' or 'nonretarded'"
                    )]))
                }
            };
            let m = lookup_material(&material)?;
            let alpha = PolarizabilityModel::SphereRadiative {
                radius_um,
                material: m,
            };
            let cfg = oracle::TwoDipoleConfig {
                alpha1: alpha.clone(),
                alpha2: alpha,
                r_um,
                mode,
            };
            let delta = oracle::two_dipole_delta_logdet(&cfg, xi_ev)?;
            println!("delta_logdet = {delta:e}");
            Ok(())
        }
        OracleCommand::CasimirPolder {
            alpha1_um3,
            alpha2_um3,
            r_um,
        } => {
            let u = oracle::casimir_polder_u(alpha1_um3, alpha2_um3, r_um);
            println!("U_eV = {u:e}");
            Ok(())
        }
    }
}
