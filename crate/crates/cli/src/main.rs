//! `cohmap`: batch front end for coherence-area noise mapping.
//!
//! Subcommands: `simulate` (scene file -> noise-map CSV), `fit` (map CSV
//! -> layout report), `plot` (map CSV -> SVG), `modecount` (angular mode
//! estimate). All randomness flows from `--seed`; without the flag the
//! scene's seed (default 0) applies, never wall-clock time.

mod error;
mod mapfile;
mod plot;
mod scene;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cohmap_core::fit::{estimate_mode_count, fit_layout, select_model, FitModel, FitOptions};
use cohmap_core::scan::{axial_sweep, run_raster, sweep_1d, NoiseMap};

use error::{CliError, Result};
use mapfile::{from_curve, DocKind, MapDocument};
use scene::{parse_scene, SceneKind};

#[derive(Parser)]
#[command(name = "cohmap", version, about = "Noise mapping of two-mode squeezed twin beams")]
struct Cli {
    /// RNG seed; overrides the scene file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads (default: all cores). Results do not depend
    /// on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a scene file into a noise-map CSV.
    Simulate {
        scene: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Fit a coherence-area layout to a noise-map CSV.
    Fit {
        map: PathBuf,
        /// Fit exactly this many pairs instead of selecting K.
        #[arg(long)]
        pairs: Option<usize>,
        /// Smallest pair count tried by model selection.
        #[arg(long, default_value_t = 1)]
        min_k: usize,
        /// Largest pair count tried by model selection.
        #[arg(long, default_value_t = 4)]
        max_k: usize,
        /// Report destination (default: stdout).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render a noise-map CSV as an SVG heatmap or curve.
    Plot {
        map: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Estimate the number of spatial modes in the angular acceptance.
    Modecount {
        #[arg(long)]
        waist_mm: f64,
        #[arg(long, default_value_t = 795.0)]
        wavelength_nm: f64,
        #[arg(long)]
        acceptance_mrad: f64,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_simulate(scene_path: &Path, out: &Path, seed_flag: Option<u64>) -> Result<()> {
    let text = read_to_string(scene_path)?;
    let scene = parse_scene(&text, &scene_path.display().to_string())?;
    let seed = seed_flag.unwrap_or(scene.seed);
    let layout = scene.layout()?;
    let doc = match scene.kind {
        SceneKind::Raster => {
            let plan = scene.scan_plan(seed)?;
            let config = scene.channels.resolve()?;
            let engine = match plan.engine {
                cohmap_core::scan::Engine::Analytic => "analytic".to_string(),
                cohmap_core::scan::Engine::MonteCarlo { n_samples, .. } => {
                    format!("monte-carlo samples={n_samples}")
                }
            };
            MapDocument {
                kind: DocKind::Raster,
                engine,
                seed,
                map: run_raster(&layout, &plan, &config)?,
            }
        }
        SceneKind::Sweep => {
            let (axis, positions, opts) = scene.sweep_options()?;
            let curve = sweep_1d(&layout, axis, &positions, opts)?;
            from_curve(
                DocKind::Sweep,
                "multimode-model".into(),
                seed,
                curve,
                cohmap_core::scan::ChannelConfig::all_diff(),
                layout.fingerprint(),
            )
        }
        SceneKind::Axial => {
            let (arm, zs) = scene.axial_options()?;
            let sweep = axial_sweep(&layout, &zs, arm, scene.detection())?;
            from_curve(
                DocKind::Axial,
                "analytic".into(),
                seed,
                sweep.points,
                cohmap_core::scan::ChannelConfig::ad_only(),
                layout.fingerprint(),
            )
        }
    };
    std::fs::write(out, mapfile::write_document(&doc))?;
    Ok(())
}

fn fit_report(map: &NoiseMap, pairs: Option<usize>, k_range: (usize, usize), seed: u64) -> Result<(String, bool)> {
    let opts = FitOptions {
        seed,
        ..FitOptions::default()
    };
    let mut report = String::new();
    let np = map.probe_coords.len();
    let nc = map.conj_coords.len();
    writeln!(report, "cohmap fit report").unwrap();
    writeln!(report, "map: {} cells ({np} x {nc})", map.n_cells()).unwrap();
    let (best_k, fits) = match pairs {
        Some(k) => {
            let fit = fit_layout(map, &FitModel::for_map(k, map), &opts)?;
            (k, vec![(k, fit)])
        }
        None => {
            let (lo, hi) = k_range;
            if lo > hi {
                return Err(CliError::Input(format!(
                    "empty K range: --min-k {lo} > --max-k {hi}"
                )));
            }
            let sel = select_model(map, lo..=hi, &opts)?;
            (sel.best_k, sel.fits)
        }
    };
    for (k, fit) in &fits {
        writeln!(
            report,
            "K={k}: score={:.4} residual_rms_db={:.6} converged={}",
            fit.score, fit.residual_rms_db, fit.converged
        )
        .unwrap();
    }
    writeln!(report, "best K: {best_k}").unwrap();
    let best = &fits.iter().find(|(k, _)| *k == best_k).unwrap().1;
    for (i, p) in best.pairs.iter().enumerate() {
        writeln!(
            report,
            "pair {}: center_x={:.4} mm center_y={:.4} mm sigma={:.4} mm gain={:.4} weight={:.4}",
            i + 1,
            p.center_x,
            p.center_y,
            p.sigma,
            p.gain,
            p.weight
        )
        .unwrap();
    }
    writeln!(report, "residual rms: {:.6} dB", best.residual_rms_db).unwrap();
    writeln!(report, "converged: {}", best.converged).unwrap();
    Ok((report, best.converged))
}

fn cmd_fit(
    map_path: &Path,
    pairs: Option<usize>,
    k_range: (usize, usize),
    out: Option<&Path>,
    seed: u64,
) -> Result<()> {
    let doc = mapfile::read_document(&read_to_string(map_path)?, &map_path.display().to_string())?;
    if doc.kind != DocKind::Raster {
        return Err(CliError::Input(format!(
            "{}: layout fits need a raster map, found kind '{}'",
            map_path.display(),
            match doc.kind {
                DocKind::Raster => "raster",
                DocKind::Sweep => "sweep",
                DocKind::Axial => "axial",
            }
        )));
    }
    let (report, converged) = fit_report(&doc.map, pairs, k_range, seed)?;
    match out {
        Some(p) => std::fs::write(p, &report)?,
        None => print!("{report}"),
    }
    if !converged {
        return Err(CliError::NonConvergence(
            "fit did not converge; partial report emitted".into(),
        ));
    }
    Ok(())
}

fn cmd_plot(map_path: &Path, out: &Path) -> Result<()> {
    let doc = mapfile::read_document(&read_to_string(map_path)?, &map_path.display().to_string())?;
    let svg = if doc.kind == DocKind::Raster && doc.map.conj_coords.len() > 1 {
        plot::heatmap(&doc)
    } else {
        plot::polyline(&doc)
    };
    std::fs::write(out, svg)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { scene, out } => cmd_simulate(&scene, &out, cli.seed),
        Cmd::Fit {
            map,
            pairs,
            min_k,
            max_k,
            out,
        } => cmd_fit(
            &map,
            pairs,
            (min_k, max_k),
            out.as_deref(),
            cli.seed.unwrap_or(0),
        ),
        Cmd::Plot { map, out } => cmd_plot(&map, &out),
        Cmd::Modecount {
            waist_mm,
            wavelength_nm,
            acceptance_mrad,
        } => {
            let n = estimate_mode_count(waist_mm, wavelength_nm, acceptance_mrad)?;
            println!("{n:.1}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Sizing the global pool is advisory: results are identical for
        // any worker count.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
