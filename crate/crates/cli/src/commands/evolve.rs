//! `hel evolve`: integrate the particle SDE from exact ensemble draws;
//! writes binary HEL1 frames, long-format CSVs, and a telemetry summary.

use super::{ensure_out_dir, parse_alpha};
use crate::manifest::{load_partial, resolve, write_manifest};
use crate::{default_workers, runtime_err, CliError};
use clap::Args;
use hel_core::dynamics::{
    evolve, trajectory_to_csv, write_frames, DriftMode, DriftSpec, IntegratorConfig, Scheme,
};
use hel_core::ensemble::{sample_batch, EnsembleSpec, Sampler};
use hel_core::{parallel, rng};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

const STAGE_CLI_EVOLVE: u64 = 20;

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// particle count N
    #[arg(long)]
    n: Option<usize>,
    /// drift mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// time horizon T
    #[arg(long)]
    t: Option<f64>,
    /// number of trajectories
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt_max: Option<f64>,
    #[arg(long)]
    dt_min: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    #[arg(long)]
    origin_floor: Option<f64>,
    #[arg(long)]
    collision_floor: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// moving-window size (isde mode; default: all particles)
    #[arg(long)]
    window: Option<usize>,
    /// interaction cutoff radius (isde mode; default: unbounded)
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    FiniteN,
    Isde,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum SchemeArg {
    EmAdaptive,
    Tamed,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::EmAdaptive => Scheme::EulerMaruyamaAdaptive,
            SchemeArg::Tamed => Scheme::TamedEuler,
        }
    }
}

#[derive(Deserialize, Default)]
struct FileConfig {
    alpha: Option<f64>,
    n: Option<usize>,
    mode: Option<ModeArg>,
    t: Option<f64>,
    trajectories: Option<usize>,
    seed: Option<u64>,
    dt_max: Option<f64>,
    dt_min: Option<f64>,
    safety: Option<f64>,
    origin_floor: Option<f64>,
    collision_floor: Option<f64>,
    scheme: Option<Scheme>,
    window: Option<usize>,
    cutoff: Option<f64>,
    workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub alpha: f64,
    pub n: usize,
    pub mode: ModeArg,
    pub t: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    pub window: Option<usize>,
    pub cutoff: Option<f64>,
    pub workers: usize,
}

#[derive(Serialize)]
struct TelemetrySummary {
    completed: usize,
    blowups: usize,
    telemetry: Vec<serde_json::Value>,
    min_gap: f64,
    min_origin: f64,
}

pub fn run(args: EvolveArgs) -> Result<(), CliError> {
    let file: FileConfig = load_partial(&args.config)?;
    let defaults = IntegratorConfig::default();
    let config = EvolveConfig {
        alpha: resolve(args.alpha, file.alpha, 1.0),
        n: resolve(args.n, file.n, 5),
        mode: resolve(args.mode, file.mode, ModeArg::FiniteN),
        t: resolve(args.t, file.t, 0.1),
        trajectories: resolve(args.trajectories, file.trajectories, 1),
        seed: resolve(args.seed, file.seed, 0),
        integrator: IntegratorConfig {
            dt_max: resolve(args.dt_max, file.dt_max, defaults.dt_max),
            dt_min: resolve(args.dt_min, file.dt_min, defaults.dt_min),
            safety: resolve(args.safety, file.safety, defaults.safety),
            origin_floor: resolve(args.origin_floor, file.origin_floor, defaults.origin_floor),
            collision_floor: resolve(
                args.collision_floor,
                file.collision_floor,
                defaults.collision_floor,
            ),
            scheme: resolve(args.scheme.map(Into::into), file.scheme, defaults.scheme),
        },
        window: args.window.or(file.window),
        cutoff: args.cutoff.or(file.cutoff),
        workers: resolve(args.workers, file.workers, default_workers()),
    };
    let alpha = parse_alpha(config.alpha)?;
    if config.trajectories == 0 {
        return Err(CliError::Usage("--trajectories must be at least 1".into()));
    }
    if config.t.is_nan() || config.t <= 0.0 {
        return Err(CliError::Usage("--t must be positive".into()));
    }
    config
        .integrator
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mode = match config.mode {
        ModeArg::FiniteN => DriftMode::FiniteN { n: config.n },
        ModeArg::Isde => DriftMode::IsdeTruncated {
            active: config.window.unwrap_or(config.n),
            cutoff: config.cutoff.unwrap_or(f64::INFINITY),
        },
    };
    let drift_spec = DriftSpec { alpha, mode };

    let ens = EnsembleSpec::new(alpha, config.n, config.seed, Sampler::Tridiagonal)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let initial = sample_batch(&ens, config.trajectories, config.workers).map_err(runtime_err)?;

    let runs: Vec<_> = parallel::map_indexed(config.workers, config.trajectories, |i| {
        let traj_seed = rng::mix(config.seed, &[STAGE_CLI_EVOLVE, i as u64]);
        evolve(
            &initial[i],
            &drift_spec,
            &config.integrator,
            config.t,
            traj_seed,
        )
    });

    ensure_out_dir(&args.out)?;
    let mut summary = TelemetrySummary {
        completed: 0,
        blowups: 0,
        telemetry: Vec::new(),
        min_gap: f64::INFINITY,
        min_origin: f64::INFINITY,
    };
    let mut first_blowup = None;
    for (i, run) in runs.iter().enumerate() {
        match run {
            Ok(bundle) => {
                summary.completed += 1;
                summary.min_gap = summary.min_gap.min(bundle.telemetry.min_gap);
                summary.min_origin = summary.min_origin.min(bundle.telemetry.min_origin);
                summary
                    .telemetry
                    .push(serde_json::to_value(bundle.telemetry)?);
                let mut frame = Vec::new();
                write_frames(&mut frame, alpha, &config.integrator, bundle).map_err(runtime_err)?;
                std::fs::write(args.out.join(format!("traj_{i:04}.hel1")), frame)?;
                std::fs::write(
                    args.out.join(format!("traj_{i:04}.csv")),
                    trajectory_to_csv(bundle),
                )?;
            }
            Err(e) => {
                summary.blowups += 1;
                summary
                    .telemetry
                    .push(serde_json::json!({"error": e.to_string()}));
                if first_blowup.is_none() {
                    first_blowup = Some(e.to_string());
                }
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(args.out.join("telemetry.json"), text)?;
    write_manifest(&args.out, "evolve", &config)?;

    if let Some(msg) = first_blowup {
        return Err(CliError::Blowup(format!(
            "{} of {} trajectories blew up; first: {msg}",
            summary.blowups, config.trajectories
        )));
    }
    println!(
        "evolve: {} trajectories to T = {} (min origin distance {:.3e}) in {}",
        summary.completed,
        config.t,
        summary.min_origin,
        args.out.display()
    );
    Ok(())
}
