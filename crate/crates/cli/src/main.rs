//! Command-line front end: every analysis of the library as a subcommand
//! with CSV/JSON output suitable for plotting.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use traffic_qbd::extremes::{
    chi_closed_form, conjecture_q2c2, conjecture_rho_ell, gumbel_cdf, mt_moments, MaxLawApprox,
};
use traffic_qbd::model::ModelParams;
use traffic_qbd::oracle_l2::ExactL2;
use traffic_qbd::qbd_agg::QbdSolution;
use traffic_qbd::qbd_detail::DetailedSolution;
use traffic_qbd::sim::{ks_distance, simulate_max, SimConfig, SimMode};

/// Environment variable consulted for the seed when `--seed` is absent.
const SEED_ENV: &str = "TRAFFIC_QBD_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "traffic-qbd",
    version,
    about = "Analyze the discrete-time traffic-light queue: stationary laws, decay rates and maximum-queue statistics",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Instance {
    /// Arrival probability per time slot, in (0, 0.5).
    #[arg(long)]
    p: f64,
    /// Red (= green) interval length.
    #[arg(long)]
    ell: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary queue-length probabilities of both chains (CSV k,pi_k,pihat_k).
    Stationary {
        #[command(flatten)]
        instance: Instance,
        /// Largest queue length emitted.
        #[arg(long, default_value_t = 200)]
        kmax: usize,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Detailed-chain stationary distribution for several interval lengths
    /// (CSV ell,k,pihat_k,pihat_cdf).
    StationarySweep {
        /// Arrival probability per time slot, in (0, 0.5).
        #[arg(long)]
        p: f64,
        /// Comma-separated interval lengths, e.g. 1,5,10,20.
        #[arg(long, value_delimiter = ',')]
        ell_list: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        kmax: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Decay rates and coefficients of both chains (JSON).
    Decay {
        #[command(flatten)]
        instance: Instance,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Clump constants (JSON; includes the closed form for ell ≤ 3).
    Chi {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Clump constants for ell = 1..=ell_max (CSV ell,chi,chi_hat).
    ChiSweep {
        /// Arrival probability per time slot, in (0, 0.5).
        #[arg(long)]
        p: f64,
        #[arg(long)]
        ell_max: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Heuristic law of the cycle-end maximum (CSV k,heuristic_cdf).
    Maxdist {
        #[command(flatten)]
        instance: Instance,
        /// Horizon in time slots.
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long, default_value_t = 200)]
        kmax: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Asymptotic mean and variance of the maximum (JSON).
    Moments {
        #[command(flatten)]
        instance: Instance,
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo distribution of the maximum against the heuristic law
    /// (CSV k,count,empirical_cdf,heuristic_cdf,ks).
    Simulate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        /// Replication seed; falls back to TRAFFIC_QBD_SEED, then 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Which maximum to record: aggregated (cycle ends) or detailed.
        #[arg(long, default_value = "aggregated")]
        mode: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Both conjecture reports on a p-grid (CSV conjecture,p,lhs,rhs,ratio).
    Conjectures {
        #[arg(long)]
        ell: usize,
        /// Comma-separated arrival probabilities.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45"
        )]
        p_grid: Vec<f64>,
        #[arg(long)]
        output: PathBuf,
    },
    /// All half-cycle-2 closed forms (JSON).
    OracleL2 {
        /// Arrival probability per time slot, in (0, 0.5).
        #[arg(long)]
        p: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<traffic_qbd::Error> for CliError {
    fn from(e: traffic_qbd::Error) -> Self {
        match e {
            traffic_qbd::Error::InvalidParam(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

/// 17 significant digits: enough to reparse to the identical f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be a 64-bit integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn meta(p: f64, ell: Option<usize>, seed: Option<u64>) -> serde_json::Value {
    let mut m = json!({
        "p": p,
        "version": env!("CARGO_PKG_VERSION"),
        "theta_convention": {
            "chi2": "sqrt(1+4pq)",
            "chi3": "sqrt(1+4pq+16p^2q^2)"
        },
    });
    if let Some(ell) = ell {
        m["ell"] = json!(ell);
    }
    if let Some(seed) = seed {
        m["seed"] = json!(seed);
    }
    m
}

fn write_csv(path: &PathBuf, content: &str, rows: usize) -> Result<(), CliError> {
    std::fs::write(path, content)?;
    println!("wrote {} ({rows} rows)", path.display());
    Ok(())
}

fn emit_json(value: &serde_json::Value, output: &Option<PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serialization");
    match output {
        Some(path) => {
            std::fs::write(path, text + "\n")?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stationary {
            instance,
            kmax,
            output,
        } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let agg = QbdSolution::solve(&m)?;
            let det = DetailedSolution::solve(&m)?;
            let k_blocks = kmax / m.ell() + 1;
            let st = agg.stationary(k_blocks.max(1))?;
            let dst = det.stationary(kmax.max(1))?;
            let mut out = String::from("k,pi_k,pihat_k\n");
            for k in 0..=kmax {
                writeln!(out, "{k},{},{}", fmt(st.probs[k]), fmt(dst.pi_hat[k])).unwrap();
            }
            write_csv(&output, &out, kmax + 1)
        }
        Command::StationarySweep {
            p,
            ell_list,
            kmax,
            output,
        } => {
            if ell_list.is_empty() {
                return Err(CliError::Usage("--ell-list must not be empty".into()));
            }
            let mut out = String::from("ell,k,pihat_k,pihat_cdf\n");
            let mut rows = 0;
            for &ell in &ell_list {
                let m = ModelParams::new(p, ell)?;
                let det = DetailedSolution::solve(&m)?;
                let st = det.stationary(kmax.max(1))?;
                let mut cdf = 0.0;
                for k in 0..=kmax {
                    cdf += st.pi_hat[k];
                    writeln!(out, "{ell},{k},{},{}", fmt(st.pi_hat[k]), fmt(cdf)).unwrap();
                    rows += 1;
                }
            }
            write_csv(&output, &out, rows)
        }
        Command::Decay { instance, output } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let agg = QbdSolution::solve(&m)?;
            let det = DetailedSolution::solve(&m)?;
            let value = json!({
                "eta": agg.eta,
                "eta_hat": det.eta_hat,
                "c": agg.decay_c,
                "c_hat": det.c_hat,
                "meta": meta(instance.p, Some(instance.ell), None),
            });
            emit_json(&value, &output)
        }
        Command::Chi { instance, output } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let agg = QbdSolution::solve(&m)?;
            let det = DetailedSolution::solve(&m)?;
            let mut value = json!({
                "chi": agg.chi,
                "chi_hat": det.chi_hat,
                "meta": meta(instance.p, Some(instance.ell), None),
            });
            if instance.ell <= 3 {
                value["chi_closed_form"] = json!(chi_closed_form(instance.ell, instance.p)?);
            }
            emit_json(&value, &output)
        }
        Command::ChiSweep { p, ell_max, output } => {
            if ell_max < 1 {
                return Err(CliError::Usage("--ell-max must be ≥ 1".into()));
            }
            let mut out = String::from("ell,chi,chi_hat\n");
            for ell in 1..=ell_max {
                let m = ModelParams::new(p, ell)?;
                let agg = QbdSolution::solve(&m)?;
                let det = DetailedSolution::solve(&m)?;
                writeln!(out, "{ell},{},{}", fmt(agg.chi), fmt(det.chi_hat)).unwrap();
            }
            write_csv(&output, &out, ell_max)
        }
        Command::Maxdist {
            instance,
            horizon,
            kmax,
            output,
        } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let agg = QbdSolution::solve(&m)?;
            let law = MaxLawApprox::aggregated(&agg, horizon);
            let mut out = String::from("k,heuristic_cdf\n");
            let mut rows = 0;
            for k in 0..=kmax as i64 {
                // P[M ≤ k]
                let cdf = gumbel_cdf(&law, k + 1);
                writeln!(out, "{k},{}", fmt(cdf)).unwrap();
                rows += 1;
                if 1.0 - cdf < 1e-12 {
                    break;
                }
            }
            write_csv(&output, &out, rows)
        }
        Command::Moments {
            instance,
            horizon,
            output,
        } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let agg = QbdSolution::solve(&m)?;
            let law = MaxLawApprox::aggregated(&agg, horizon);
            let mm = mt_moments(&law)?;
            let value = json!({
                "mean": mm.mean,
                "variance": mm.variance,
                "periodic_terms_omitted": mm.periodic_terms_omitted,
                "T": horizon,
                "meta": meta(instance.p, Some(instance.ell), None),
            });
            emit_json(&value, &output)
        }
        Command::Simulate {
            instance,
            horizon,
            reps,
            seed,
            mode,
            output,
        } => {
            let m = ModelParams::new(instance.p, instance.ell)?;
            let seed = resolve_seed(seed)?;
            let sim_mode = match mode.as_str() {
                "aggregated" => SimMode::Aggregated,
                "detailed" => SimMode::Detailed,
                other => {
                    return Err(CliError::Usage(format!(
                        "--mode must be aggregated or detailed, got {other:?}"
                    )))
                }
            };
            let cfg = SimConfig::new(horizon, reps, seed, sim_mode);
            let hist = simulate_max(&m, &cfg)?;
            let law = match sim_mode {
                SimMode::Aggregated => {
                    MaxLawApprox::aggregated(&QbdSolution::solve(&m)?, horizon)
                }
                SimMode::Detailed => {
                    MaxLawApprox::detailed(&DetailedSolution::solve(&m)?, horizon)
                }
            };
            // the heuristic approximates the strict tail P[M < k], so
            // P[M ≤ k] is its value at k+1
            let ks = ks_distance(&hist, |k| gumbel_cdf(&law, k + 1));
            let top = hist.max_value().unwrap_or(0);
            let mut out = String::from("k,count,empirical_cdf,heuristic_cdf,ks\n");
            let counts: std::collections::BTreeMap<u64, u64> = hist.counts().collect();
            for k in 0..=top {
                let count = counts.get(&k).copied().unwrap_or(0);
                writeln!(
                    out,
                    "{k},{count},{},{},{}",
                    fmt(hist.cdf_at(k as i64)),
                    fmt(gumbel_cdf(&law, k as i64 + 1)),
                    fmt(ks)
                )
                .unwrap();
            }
            write_csv(&output, &out, top as usize + 1)
        }
        Command::Conjectures {
            ell,
            p_grid,
            output,
        } => {
            if p_grid.is_empty() {
                return Err(CliError::Usage("--p-grid must not be empty".into()));
            }
            let mut out = String::from("conjecture,p,lhs,rhs,ratio\n");
            let mut rows = 0;
            for &p in &p_grid {
                let m = ModelParams::new(p, ell)?;
                let agg = QbdSolution::solve(&m)?;
                let det = DetailedSolution::solve(&m)?;
                let q2 = conjecture_q2c2(&agg);
                writeln!(
                    out,
                    "chi_over_2ell_vs_q2c2,{},{},{},{}",
                    fmt(p),
                    fmt(q2.lhs),
                    fmt(q2.rhs),
                    fmt(q2.ratio)
                )
                .unwrap();
                let re = conjecture_rho_ell(&agg, &det);
                writeln!(
                    out,
                    "chi_vs_chihat_rho_ell,{},{},{},{}",
                    fmt(p),
                    fmt(re.lhs),
                    fmt(re.rhs),
                    fmt(re.ratio)
                )
                .unwrap();
                rows += 2;
            }
            write_csv(&output, &out, rows)
        }
        Command::OracleL2 { p, output } => {
            let e = ExactL2::new(p)?;
            let value = json!({
                "theta": e.theta,
                "z1": e.z1,
                "z2": e.z2,
                "z3": e.z3,
                "pi0": e.pi0,
                "pi1": e.pi1,
                "A": e.a_decay,
                "nu0": e.nu0,
                "nu1": e.nu1,
                "nu_m1": e.nu_m1,
                "nu_m2": e.nu_m2,
                "L": e.l_tail,
                "lambda_coeff": traffic_qbd::oracle_l2::clump_rates(p).0,
                "lambda_prime_coeff": traffic_qbd::oracle_l2::clump_rates(p).1,
                "meta": meta(p, Some(2), None),
            });
            emit_json(&value, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; everything else is usage
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
