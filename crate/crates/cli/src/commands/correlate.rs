//! `hel correlate`: binned one- and two-point correlation estimates from
//! saved draws, with exact kernel values as overlay columns.

use super::ensure_out_dir;
use crate::manifest::{read_manifest, write_manifest};
use crate::{default_workers, runtime_err, CliError};
use clap::Args;
use hel_core::ensemble::{PointConfiguration, ScaleTag};
use hel_core::estimators::{edges_with_min_expected, estimate_rho1, estimate_rho2};
use hel_core::kernels::{correlation_fn, CorrelationKernel, LaguerreKernelN};
use hel_core::quad;
use hel_core::specfun::Order;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    /// directory produced by `hel sample`
    #[arg(long)]
    input: PathBuf,
    /// output directory
    #[arg(long)]
    out: PathBuf,
    /// explicit comma-separated bin edges (default: pilot-based)
    #[arg(long)]
    edges: Option<String>,
    /// cap on automatic bin count
    #[arg(long)]
    max_bins: Option<usize>,
    /// minimum expected counts per automatic bin
    #[arg(long)]
    min_expected: Option<usize>,
    /// number of cells per axis in the pair-correlation grid
    #[arg(long)]
    pair_grid: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelateConfig {
    pub input: String,
    pub alpha: f64,
    pub n: usize,
    pub draws: usize,
    pub edges: Vec<f64>,
    pub pair_edges: Vec<f64>,
    pub workers: usize,
}

#[derive(Deserialize)]
struct SampleManifestConfig {
    alpha: f64,
    n: usize,
}

fn read_draws(dir: &std::path::Path) -> Result<Vec<PointConfiguration>, CliError> {
    let path = dir.join("draws.jsonl");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("no draws at {}: {e}", path.display())))?;
    let mut draws = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::Usage(format!("bad JSONL line {}: {e}", ln + 1)))?;
        let points: Vec<f64> = v["points"]
            .as_array()
            .ok_or_else(|| CliError::Usage(format!("line {} has no points", ln + 1)))?
            .iter()
            .map(|p| p.as_f64().unwrap_or(f64::NAN))
            .collect();
        draws.push(
            PointConfiguration::new(points, ScaleTag::HardEdgeScale)
                .map_err(|e| CliError::Usage(format!("line {}: {e}", ln + 1)))?,
        );
    }
    if draws.is_empty() {
        return Err(CliError::Usage(format!(
            "{} contains no draws",
            path.display()
        )));
    }
    Ok(draws)
}

fn bin_average<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    quad::integrate(f, lo, hi, 1e-9).unwrap_or(f64::NAN) / (hi - lo)
}

pub fn run(args: CorrelateArgs) -> Result<(), CliError> {
    let manifest = read_manifest::<SampleManifestConfig>(&args.input)?;
    if manifest.command != "sample" {
        return Err(CliError::Usage(format!(
            "{} was produced by `{}`, expected `sample`",
            args.input.display(),
            manifest.command
        )));
    }
    let alpha = Order::new(manifest.config.alpha)
        .map_err(|e| CliError::Usage(format!("manifest alpha invalid: {e}")))?;
    let n = manifest.config.n;
    let draws = read_draws(&args.input)?;
    let kernel = LaguerreKernelN::new(alpha, n).map_err(runtime_err)?;

    // one-point histogram edges: explicit list or pilot policy
    let edges: Vec<f64> = match &args.edges {
        Some(list) => {
            let parsed: Result<Vec<f64>, _> = list.split(',').map(str::parse).collect();
            let parsed = parsed.map_err(|e| CliError::Usage(format!("bad --edges list: {e}")))?;
            if parsed.len() < 2 || parsed.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Usage(
                    "--edges must be a strictly increasing list of at least two values".into(),
                ));
            }
            parsed
        }
        None => edges_with_min_expected(
            &draws,
            args.min_expected.unwrap_or(100),
            args.max_bins.unwrap_or(60),
        )
        .map_err(runtime_err)?,
    };
    let hist = estimate_rho1(&draws, &edges).map_err(runtime_err)?;

    let mut rho1_csv = String::from("bin_lo,bin_hi,estimate,stderr,kernel\n");
    for i in 0..hist.bins() {
        let overlay = bin_average(
            &|x: f64| kernel.rho1(x.max(1e-300)).unwrap_or(f64::NAN),
            hist.edges[i],
            hist.edges[i + 1],
        );
        rho1_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            hist.edges[i],
            hist.edges[i + 1],
            hist.density(i),
            hist.stderr(i),
            overlay
        ));
    }

    // pair-correlation grid from coarse quantiles
    let cells = args.pair_grid.unwrap_or(6).max(2);
    let pair_edges =
        edges_with_min_expected(&draws, draws.len() / cells, cells).map_err(runtime_err)?;
    let pair = estimate_rho2(&draws, &pair_edges, &pair_edges).map_err(runtime_err)?;
    let mut rho2_csv = String::from("y_lo,y_hi,z_lo,z_hi,estimate,stderr,kernel\n");
    let pc = pair_edges.len() - 1;
    for i in 0..pc {
        for j in 0..pc {
            // cell-averaged determinant overlay on a midpoint subgrid
            let m = 3;
            let mut avg = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let y = pair_edges[i]
                        + (pair_edges[i + 1] - pair_edges[i]) * (a as f64 + 0.5) / m as f64;
                    let z = pair_edges[j]
                        + (pair_edges[j + 1] - pair_edges[j]) * (b as f64 + 0.5) / m as f64;
                    avg += if (y - z).abs() < 1e-12 {
                        0.0
                    } else {
                        correlation_fn(&kernel, &[y, z]).unwrap_or(f64::NAN)
                    };
                }
            }
            avg /= (m * m) as f64;
            rho2_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                pair_edges[i],
                pair_edges[i + 1],
                pair_edges[j],
                pair_edges[j + 1],
                pair.density(i, j),
                pair.stderr(i, j),
                avg
            ));
        }
    }

    ensure_out_dir(&args.out)?;
    std::fs::write(args.out.join("rho1.csv"), rho1_csv)?;
    std::fs::write(args.out.join("rho2.csv"), rho2_csv)?;
    let config = CorrelateConfig {
        input: args.input.display().to_string(),
        alpha: manifest.config.alpha,
        n,
        draws: draws.len(),
        edges,
        pair_edges,
        workers: args.workers.unwrap_or_else(default_workers),
    };
    write_manifest(&args.out, "correlate", &config)?;
    println!(
        "correlate: {} draws binned into {} cells; tables in {}",
        draws.len(),
        hist.bins(),
        args.out.display()
    );
    Ok(())
}
