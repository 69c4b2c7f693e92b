//! `mmorder`: command-line front end.
//!
//! Exit codes: 0 success (or "related"), 1 negative verdict, 2 usage or
//! runtime error.

mod reproduce;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mmorder::genealogy::{
    simulate_coupled_coalescent_trees, simulate_coupled_gw, simulate_er_family, simulate_moran, SimConfig, SimOutput,
};
use mmorder::mmcore::{
    canonicalize, distance_matrix_measure, read_raw, read_space, space_to_json, validate, write_space,
    DEFAULT_ENUM_LIMIT,
};
use mmorder::order::{compare, CheckOptions, OrderKind, DEFAULT_MAX_POINTS};
use mmorder::stats::estimate_wasserstein_coupled;
use mmorder::transport::{eurandom, gen_eurandom, lub, EurandomConfig};

#[derive(Parser, Debug)]
#[command(name = "mmorder", version, about = "Partial orders and distances on finite metric measure spaces")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Absolute tolerance for float comparisons.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a space file against the axioms; exit 1 when violated.
    Validate { file: PathBuf },
    /// Print (or write) the canonical form of a space.
    Canon {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide an order between two spaces; exit 0 when A ≤ B, 1 otherwise.
    Compare {
        #[arg(long, value_enum)]
        order: OrderArg,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
    },
    /// Distance matrix measure of order m.
    Dmm {
        file: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
        limit: f64,
    },
    /// Eurandom distance (or the generalized one).
    Dist {
        #[arg(long)]
        lambda: f64,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        generalized: bool,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Least upper bound of two probability spaces.
    Lub {
        #[arg(long)]
        lambda: f64,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Accept an uncertified coupling.
        #[arg(long)]
        best_effort: bool,
    },
    /// Run a seeded genealogy simulator and write spaces plus meta.json.
    Simulate {
        #[arg(value_enum)]
        model: Model,
        #[arg(long)]
        seed: u64,
        #[arg(short = 'N', long = "n", default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma2: f64,
        #[arg(long)]
        t: Option<f64>,
        /// Edge probabilities for the ER family.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b2: f64,
        #[arg(long, default_value_t = 4)]
        generations: usize,
        #[arg(long, default_value_t = 10)]
        n_gw: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo estimates.
    Estimate {
        #[arg(value_enum)]
        what: EstimateKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma2: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        /// Population size for the monomial estimate.
        #[arg(short = 'N', long = "n", default_value_t = 6)]
        n: usize,
        /// Also write the result to this file.
        #[arg(long = "json-out")]
        json_out: Option<PathBuf>,
    },
    /// Rerun a named reference scenario.
    Reproduce {
        #[arg(value_enum)]
        scenario: reproduce::Scenario,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    Measure,
    Metric,
    Gen,
    Global,
}

impl From<OrderArg> for OrderKind {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Measure => OrderKind::Measure,
            OrderArg::Metric => OrderKind::Metric,
            OrderArg::Gen => OrderKind::Gen,
            OrderArg::Global => OrderKind::Global,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Moran,
    Coalescent,
    Er,
    Gw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimateKind {
    Wasserstein,
    R12,
    Monomial,
}

/// What a command reports: text for humans, JSON for scripts, and the exit code.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub ok: bool,
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<Report> {
    let tol = cli.tol;
    match cli.command {
        Command::Validate { file } => {
            let raw = read_raw(&file)?;
            let report = validate(&raw.dist, &raw.mass)?;
            let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Ok(Report {
                text: if report.is_valid() {
                    format!("valid (ultrametric: {})", report.is_ultrametric)
                } else {
                    format!("invalid: {report}")
                },
                json: json!({
                    "valid": report.is_valid(),
                    "ultrametric": report.is_ultrametric,
                    "violations": violations,
                }),
                ok: report.is_valid(),
            })
        }
        Command::Canon { file, out } => {
            let c = canonicalize(&read_space(&file)?);
            let text = space_to_json(&c);
            if let Some(out) = out {
                write_space(&c, &out)?;
            }
            Ok(Report {
                json: serde_json::from_str(&text)?,
                text,
                ok: true,
            })
        }
        Command::Compare {
            order,
            a,
            b,
            witness,
            max_points,
        } => {
            let (x, y) = (read_space(&a)?, read_space(&b)?);
            let kind: OrderKind = order.into();
            let d = compare(kind, &x, &y, CheckOptions { tol, max_points })?;
            let j = serde_json::to_value(&d)?;
            if let (Some(path), Some(w)) = (witness, &d.witness) {
                write_json(&path, &serde_json::to_value(w)?)?;
            }
            Ok(Report {
                text: format!(
                    "{} ≤{:?} {}: {} ({} nodes)",
                    a.display(),
                    kind,
                    b.display(),
                    d.verdict,
                    d.stats.nodes
                ),
                json: j,
                ok: d.verdict,
            })
        }
        Command::Dmm { file, m, limit } => {
            let x = read_space(&file)?;
            let nu = distance_matrix_measure(&x, m, limit)?;
            let atoms: Vec<Value> = nu
                .atoms
                .iter()
                .map(|(r, w)| {
                    json!({
                        "upper": r.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "weight": w.to_string(),
                    })
                })
                .collect();
            let text = nu
                .atoms
                .iter()
                .map(|(r, w)| {
                    let r: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                    format!("[{}] {w}", r.join(", "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report {
                text,
                json: json!({ "order": m, "atoms": atoms }),
                ok: true,
            })
        }
        Command::Dist {
            lambda,
            a,
            b,
            generalized,
            restarts,
            seed,
            coupling,
        } => {
            let (x, y) = (read_space(&a)?, read_space(&b)?);
            let cfg = EurandomConfig {
                restarts,
                seed,
                ..EurandomConfig::default()
            };
            let r = if generalized {
                gen_eurandom(&x, &y, lambda, &cfg)?
            } else {
                eurandom(&x, &y, lambda, &cfg)?
            };
            if let Some(path) = coupling {
                write_json(&path, &serde_json::to_value(&r.coupling)?)?;
            }
            Ok(Report {
                text: format!(
                    "d = {:.12} (lower bound {:.12}, certified: {})",
                    r.upper_bound, r.lower_bound, r.certified
                ),
                json: serde_json::to_value(&r)?,
                ok: true,
            })
        }
        Command::Lub {
            lambda,
            a,
            b,
            out,
            report,
            seed,
            best_effort,
        } => {
            let (x, y) = (read_space(&a)?, read_space(&b)?);
            let cfg = EurandomConfig {
                seed,
                ..EurandomConfig::default()
            };
            let l = lub(&x, &y, lambda, &cfg, best_effort)?;
            write_space(&l.zbar, &out)?;
            let rj = serde_json::to_value(&l.report)?;
            write_json(&report, &rj)?;
            Ok(Report {
                text: format!(
                    "zbar: {} points; le_metric {:?}; additivity residual {:.3e}",
                    l.zbar.len(),
                    l.report.le_metric,
                    l.report.residual
                ),
                json: rj,
                ok: true,
            })
        }
        Command::Simulate {
            model,
            seed,
            n,
            gamma,
            gamma2,
            t,
            p,
            b1,
            b2,
            generations,
            n_gw,
            out,
        } => {
            let cfg = SimConfig {
                seed,
                n,
                gamma,
                gamma_prime: gamma2,
                t,
                p,
                b1,
                b2,
                generations,
                n_gw,
                ..SimConfig::default()
            };
            let sim: SimOutput = match model {
                Model::Moran => simulate_moran(&cfg)?,
                Model::Coalescent => simulate_coupled_coalescent_trees(&cfg)?,
                Model::Er => {
                    if cfg.p.is_empty() {
                        bail!("--p is required for the ER family");
                    }
                    simulate_er_family(&cfg)?
                }
                Model::Gw => simulate_coupled_gw(&cfg)?,
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut files = Vec::new();
            for (i, s) in sim.spaces.iter().enumerate() {
                let path = out.join(format!("space_{i}.json"));
                write_space(s, &path)?;
                files.push(path.display().to_string());
            }
            let meta = serde_json::to_value(&sim.meta)?;
            write_json(&out.join("meta.json"), &meta)?;
            Ok(Report {
                text: format!("wrote {} and meta.json", files.join(", ")),
                json: json!({ "files": files, "meta": meta }),
                ok: true,
            })
        }
        Command::Estimate {
            what,
            seed,
            gamma,
            gamma2,
            lambda,
            reps,
            n,
            json_out,
        } => {
            let (est, target) = match what {
                EstimateKind::Wasserstein => (
                    estimate_wasserstein_coupled(gamma, gamma2, lambda, reps, seed)?,
                    gamma2 / (gamma2 + lambda) - gamma / (gamma + lambda),
                ),
                EstimateKind::R12 => reproduce::laplace_of_pair_distance(gamma, lambda, reps, seed)?,
                EstimateKind::Monomial => reproduce::coalescent_pair_monomial(gamma, lambda, n, reps, seed)?,
            };
            let j = json!({
                "estimate": est,
                "target": target,
                "within_3se": est.within(target, 3.0),
                "config": { "gamma": gamma, "gamma2": gamma2, "lambda": lambda, "reps": reps, "seed": seed, "n": n },
            });
            if let Some(path) = json_out {
                write_json(&path, &j)?;
            }
            Ok(Report {
                text: format!("{:.6} ± {:.6} (closed form {:.6})", est.value, est.std_error, target),
                json: j,
                ok: true,
            })
        }
        Command::Reproduce { scenario } => reproduce::run(scenario),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let as_json = cli.json;
    match run(cli) {
        Ok(report) => {
            if as_json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("JSON value"));
            } else {
                println!("{}", report.text);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
