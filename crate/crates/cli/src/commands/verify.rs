//! `hel verify`: named diagnostic suites with versioned parameter profiles;
//! exit 0 iff every report passes.

use super::{ensure_out_dir, parse_alpha};
use crate::manifest::write_manifest;
use crate::{default_workers, runtime_err, CliError};
use clap::Args;
use hel_core::diagnostics::{
    envelope_report, hilb_residual, ibp_identity_check, tail_trend_report, HilbSpec,
    IbpTestFunction,
};
use hel_core::dynamics::{stationarity_test, IntegratorConfig};
use hel_core::kernels::kernel_convergence_report;
use hel_core::report::DiagnosticReport;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

const QUICK_PROFILE: &str = include_str!("../../profiles/quick.json");
const FULL_PROFILE: &str = include_str!("../../profiles/full.json");

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// which suite to run
    #[arg(long, value_enum)]
    suite: Suite,
    /// parameter profile
    #[arg(long, value_enum, default_value = "quick")]
    profile: ProfileArg,
    /// restrict to a single alpha (overrides the profile lists)
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// override the ensemble-size list, comma separated
    #[arg(long)]
    n_list: Option<String>,
    /// override stochastic-suite seeds
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// where to write the report JSONs (default: no files, stdout only)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Suite {
    KernelConvergence,
    /// density-envelope stability (alias: `envelope`)
    #[value(alias = "envelope")]
    Lemma52,
    Tails,
    Hilb,
    Ibp,
    Stationarity,
    All,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileArg {
    Quick,
    Full,
}

#[derive(Debug, Deserialize, Serialize)]
struct Profile {
    name: String,
    kernel_convergence: ConvergenceParams,
    lemma52: EnvelopeParams,
    tails: TailParams,
    hilb: HilbParams,
    ibp: IbpParams,
    stationarity: StationarityParams,
}

#[derive(Debug, Deserialize, Serialize)]
struct ConvergenceParams {
    alphas: Vec<f64>,
    n_list: Vec<usize>,
    r: f64,
    grid: usize,
    target: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct EnvelopeParams {
    alphas: Vec<f64>,
    n_list: Vec<usize>,
    omega: f64,
    rel_tol: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct TailParams {
    alpha: f64,
    n_list: Vec<usize>,
    xs: Vec<f64>,
    ss: Vec<f64>,
    omega: f64,
    margin: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct HilbParams {
    alphas: Vec<f64>,
    degrees: Vec<usize>,
    x_lo: f64,
    x_hi: f64,
    grid: usize,
}

#[derive(Debug, Deserialize, Serialize)]
struct IbpParams {
    alpha: f64,
    n: usize,
    draws: usize,
    seed: u64,
}

#[derive(Debug, Deserialize, Serialize)]
struct StationarityParams {
    alpha: f64,
    n: usize,
    horizon: f64,
    draws: usize,
    seed: u64,
}

fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let list: Result<Vec<usize>, _> = s.split(',').map(str::parse).collect();
    let list = list.map_err(|e| CliError::Usage(format!("bad --n-list: {e}")))?;
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage(
            "--n-list must be a strictly increasing list".into(),
        ));
    }
    Ok(list)
}

pub fn run(args: VerifyArgs) -> Result<(), CliError> {
    let text = match args.profile {
        ProfileArg::Quick => QUICK_PROFILE,
        ProfileArg::Full => FULL_PROFILE,
    };
    let mut profile: Profile = serde_json::from_str(text)
        .map_err(|e| CliError::Runtime(format!("embedded profile is invalid: {e}")))?;

    if let Some(alpha) = args.alpha {
        parse_alpha(alpha)?;
        profile.kernel_convergence.alphas = vec![alpha];
        profile.lemma52.alphas = vec![alpha];
        profile.tails.alpha = alpha;
        profile.hilb.alphas = vec![alpha];
        profile.ibp.alpha = alpha;
        profile.stationarity.alpha = alpha;
    }
    if let Some(list) = &args.n_list {
        let list = parse_n_list(list)?;
        profile.kernel_convergence.n_list = list.clone();
        profile.lemma52.n_list = list.clone();
        profile.tails.n_list = list.clone();
        profile.hilb.degrees = list;
    }
    if let Some(seed) = args.seed {
        profile.ibp.seed = seed;
        profile.stationarity.seed = seed;
    }
    let workers = args.workers.unwrap_or_else(default_workers);

    let mut reports: Vec<DiagnosticReport> = Vec::new();
    let run_suite = |suite: Suite, reports: &mut Vec<DiagnosticReport>| -> Result<(), CliError> {
        match suite {
            Suite::KernelConvergence => {
                let p = &profile.kernel_convergence;
                for &a in &p.alphas {
                    reports.push(
                        kernel_convergence_report(
                            parse_alpha(a)?,
                            &p.n_list,
                            p.r,
                            p.grid,
                            p.target,
                        )
                        .map_err(runtime_err)?,
                    );
                }
            }
            Suite::Lemma52 => {
                let p = &profile.lemma52;
                for &a in &p.alphas {
                    reports.push(
                        envelope_report(parse_alpha(a)?, &p.n_list, p.omega, p.rel_tol)
                            .map_err(runtime_err)?,
                    );
                }
            }
            Suite::Tails => {
                let p = &profile.tails;
                for which in ['a', 'b', 'c', 'd'] {
                    reports.push(
                        tail_trend_report(
                            which,
                            parse_alpha(p.alpha)?,
                            &p.n_list,
                            &p.xs,
                            &p.ss,
                            p.omega,
                            p.margin,
                        )
                        .map_err(runtime_err)?,
                    );
                }
            }
            Suite::Hilb => {
                let p = &profile.hilb;
                for &a in &p.alphas {
                    let spec =
                        HilbSpec::new(parse_alpha(a)?, p.degrees.clone(), p.x_lo, p.x_hi, p.grid)
                            .map_err(|e| CliError::Usage(e.to_string()))?;
                    reports.push(hilb_residual(&spec).map_err(runtime_err)?);
                }
            }
            Suite::Ibp => {
                let p = &profile.ibp;
                for f in IbpTestFunction::family() {
                    reports.push(
                        ibp_identity_check(
                            parse_alpha(p.alpha)?,
                            p.n,
                            &f,
                            p.draws,
                            p.seed,
                            workers,
                        )
                        .map_err(runtime_err)?,
                    );
                }
            }
            Suite::Stationarity => {
                let p = &profile.stationarity;
                reports.push(
                    stationarity_test(
                        parse_alpha(p.alpha)?,
                        p.n,
                        &IntegratorConfig::default(),
                        p.horizon,
                        p.draws,
                        p.seed,
                        workers,
                    )
                    .map_err(runtime_err)?,
                );
            }
            Suite::All => unreachable!("expanded by the caller"),
        }
        Ok(())
    };

    let suites: Vec<Suite> = if args.suite == Suite::All {
        vec![
            Suite::KernelConvergence,
            Suite::Lemma52,
            Suite::Tails,
            Suite::Hilb,
            Suite::Ibp,
            Suite::Stationarity,
        ]
    } else {
        vec![args.suite]
    };
    for suite in suites {
        run_suite(suite, &mut reports)?;
    }

    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        for (i, report) in reports.iter().enumerate() {
            let stem = format!("report-{:02}-{}", i, report.name);
            let mut text = report.to_json();
            text.push('\n');
            std::fs::write(out.join(format!("{stem}.json")), text)?;
            std::fs::write(out.join(format!("{stem}.csv")), report.entries_csv())?;
        }
        write_manifest(
            out,
            "verify",
            &serde_json::json!({
                "profile": profile,
                "workers": workers,
            }),
        )?;
    }

    let mut all_pass = true;
    for report in &reports {
        let ok = report.passed();
        all_pass &= ok;
        let failed = report.entries.iter().filter(|e| !e.pass).count();
        println!(
            "{}: {} ({} entries, {} failing)",
            report.name,
            if ok { "PASS" } else { "FAIL" },
            report.entries.len(),
            failed
        );
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Runtime("one or more suites failed".into()))
    }
}
