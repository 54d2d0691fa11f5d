//! `treestrip`: strip and topological entropies of Markov hom tree-shifts.
//!
//! Exit codes: 0 success, 1 runtime guard or numerical failure, 2 invalid
//! configuration, 3 verification mismatch.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use treestrip::counting::{Counter, Mode};
use treestrip::entropy::{strip_convergence, topological_entropy};
use treestrip::matrices::is_primitive;
use treestrip::ray::check_profile_periodicity;
use treestrip::report::{convergence_csv, entropy_csv, strip_csv, to_csv, to_json};
use treestrip::transfer::{period_matrix, strip_entropy_closed, strip_entropy_iterative};
use treestrip::verify::{oracle_sweep, SweepConfig};
use treestrip::Error;

use config::{ConfigError, Format, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "treestrip", version, about = "Strip entropies of Markov hom tree-shifts on Markov-Cayley trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check hypotheses: primitivity, tree shape, ray, period matrices.
    Check(Common),
    /// Block-count estimates of the topological entropy up to depth n.
    Entropy(Common),
    /// Strip entropy along the ray for each n.
    Strip {
        #[command(flatten)]
        common: Common,
        /// Use direct iteration to m_max instead of the closed form.
        #[arg(long)]
        iterative: bool,
    },
    /// Strip entropies against the reference entropy, with a rate fit.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Block depth for the reference entropy.
        #[arg(long, default_value_t = treestrip::entropy::DEFAULT_N_BUDGET)]
        n_ref: usize,
    },
    /// Seeded comparison of count recursions against brute force.
    Verify(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Symbol matrix: G, E:k, or a JSON matrix.
    #[arg(long = "A", value_name = "MATRIX")]
    a: Option<String>,
    /// Tree shape: G, E:d, crt:d, or a JSON matrix.
    #[arg(long = "M", value_name = "MATRIX")]
    m: Option<String>,
    /// Ray such as "f1^inf" or "f2(f1 f2)^inf".
    #[arg(long)]
    ray: Option<String>,
    /// Width or depth: 5, 2..14, or 2,14.
    #[arg(long)]
    n: Option<String>,
    /// Strip length for iterative evaluation (default 1000).
    #[arg(long)]
    m_max: Option<usize>,
    /// Arithmetic: exact integers, log-domain floats, or by predicted size.
    #[arg(long, value_parser = ["exact", "log", "auto"])]
    mode: Option<String>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for the verification sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
    Mismatch(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InadmissibleRay(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let file = match &self.config {
            Some(p) => config::load_file(p)?,
            None => config::FileConfig::default(),
        };
        let mode = self.mode.as_deref().map(|s| s.parse::<Mode>()).transpose()?;
        let over = Overrides {
            a: self.a.clone(),
            m: self.m.clone(),
            ray: self.ray.clone(),
            n: self.n.clone(),
            m_max: self.m_max,
            mode,
            format: self.format,
            seed: self.seed,
        };
        Ok(config::resolve(file, over)?)
    }
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    ok: bool,
    detail: String,
}

fn row(check: impl Into<String>, ok: bool, detail: impl Into<String>) -> CheckRow {
    CheckRow { check: check.into(), ok, detail: detail.into() }
}

fn cmd_check(cfg: &RunConfig) -> Result<String, Failure> {
    let mut rows = Vec::new();
    let prim = is_primitive(&cfg.a);
    rows.push(row(
        "A primitive",
        prim.primitive,
        match prim.exponent {
            Some(e) => format!("A^{e} > 0"),
            None => "A not primitive".into(),
        },
    ));
    rows.push(row("tree", true, format!("d = {}, shape {:?}", cfg.tree.d(), cfg.tree.shape().to_rows())));
    let full = cfg.tree.full_rows();
    rows.push(row(
        "full rows",
        !full.is_empty(),
        format!("{} ({})", full.len(), full.iter().map(|t| format!("f{}", t + 1)).collect::<Vec<_>>().join(" ")),
    ));
    match cfg.tree.is_complete_recursive() {
        Ok(w) => {
            let detail = match &w.ordering {
                Some(o) => format!("ordering {}", o.iter().map(|t| format!("f{}", t + 1)).collect::<Vec<_>>().join(" ")),
                None => "no witness ordering".into(),
            };
            rows.push(row("complete recursive", w.is_crt, detail));
        }
        Err(e) => rows.push(row("complete recursive", false, e.to_string())),
    }
    match cfg.ray.to_ray(&cfg.tree) {
        Err(e) => rows.push(row("ray admissible", false, e.to_string())),
        Ok(ray) => {
            rows.push(row("ray admissible", true, ray.shorthand()));
            let horizon = ray.c() + 2 * ray.ell() + 50;
            for n in cfg.n_lo.max(1)..=cfg.n_hi {
                let periodic = check_profile_periodicity(&cfg.tree, &ray, n, horizon)?;
                let mut counter = Counter::checked(&cfg.tree, &cfg.a, cfg.mode, n)?;
                let pm = period_matrix(&mut counter, &ray, n)?;
                rows.push(row(format!("n={n} profiles periodic"), periodic, format!("horizon {horizon}")));
                rows.push(row(
                    format!("n={n} D primitive"),
                    pm.primitivity.primitive,
                    format!("{} step(s), {} sites per period", pm.steps, pm.denominator),
                ));
            }
        }
    }
    Ok(match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => to_csv(
            &["check", "ok", "detail"],
            &rows.iter().map(|r| vec![r.check.clone(), r.ok.to_string(), r.detail.clone()]).collect::<Vec<_>>(),
        ),
    })
}

fn cmd_entropy(cfg: &RunConfig) -> Result<String, Failure> {
    let t = topological_entropy(&cfg.tree, &cfg.a, cfg.n_hi);
    Ok(match cfg.format {
        Format::Json => to_json(&t),
        Format::Csv => entropy_csv(&t),
    })
}

fn cmd_strip(cfg: &RunConfig, iterative: bool) -> Result<String, Failure> {
    let ray = cfg.ray()?;
    let ns: Vec<usize> = (cfg.n_lo.max(1)..=cfg.n_hi).collect();
    use rayon::prelude::*;
    let results = ns
        .par_iter()
        .map(|&n| {
            let mut counter = Counter::checked(&cfg.tree, &cfg.a, cfg.mode, n)?;
            if iterative {
                strip_entropy_iterative(&mut counter, &ray, n, cfg.m_max)
            } else {
                strip_entropy_closed(&mut counter, &ray, n)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match cfg.format {
        Format::Json => to_json(&json!({"ray": ray.shorthand(), "results": results})),
        Format::Csv => strip_csv(&results),
    })
}

fn cmd_converge(cfg: &RunConfig, n_ref: usize) -> Result<String, Failure> {
    let ray = cfg.ray()?;
    let rep = strip_convergence(&cfg.tree, &cfg.a, &ray, cfg.n_lo.max(1)..=cfg.n_hi, n_ref, cfg.mode)?;
    Ok(match cfg.format {
        Format::Json => to_json(&rep),
        Format::Csv => convergence_csv(&rep),
    })
}

fn cmd_verify(cfg: &RunConfig) -> Result<String, Failure> {
    let rep = oracle_sweep(&SweepConfig::standard(cfg.seed))?;
    let text = match cfg.format {
        Format::Json => to_json(&rep),
        Format::Csv => {
            let mut s = format!(
                "seed {}: {} configurations, {} checks, {} mismatches\n",
                rep.seed,
                rep.configurations,
                rep.checks,
                rep.mismatches.len()
            );
            for m in &rep.mismatches {
                s.push_str(&serde_json::to_string(m).expect("serializable"));
                s.push('\n');
            }
            s
        }
    };
    if rep.mismatches.is_empty() {
        Ok(text)
    } else {
        Err(Failure::Mismatch(text))
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.cmd {
        Cmd::Check(c) | Cmd::Entropy(c) | Cmd::Verify(c) => c,
        Cmd::Strip { common, .. } | Cmd::Converge { common, .. } => common,
    };
    if let Some(j) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let cfg = common.resolve()?;
    let result = match &cli.cmd {
        Cmd::Check(_) => cmd_check(&cfg),
        Cmd::Entropy(_) => cmd_entropy(&cfg),
        Cmd::Strip { iterative, .. } => cmd_strip(&cfg, *iterative),
        Cmd::Converge { n_ref, .. } => cmd_converge(&cfg, *n_ref),
        Cmd::Verify(_) => cmd_verify(&cfg),
    };
    match result {
        Ok(text) => emit(common.out.as_ref(), &text),
        Err(Failure::Mismatch(text)) => {
            emit(common.out.as_ref(), &text)?;
            Err(Failure::Mismatch("oracle mismatch".into()))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use treestrip::ray::RaySpec;
    use treestrip::report::fmt_g;
    use treestrip::{BinaryMatrix, MarkovTree};

    fn cfg(a: BinaryMatrix, tree: MarkovTree, ray: &str, n: (usize, usize)) -> RunConfig {
        RunConfig {
            a,
            tree,
            ray: RaySpec::parse(ray).unwrap(),
            n_lo: n.0,
            n_hi: n.1,
            m_max: 1000,
            mode: Mode::Auto,
            format: Format::Csv,
            seed: 0,
        }
    }

    #[test]
    fn check_flags() {
        let ok = cmd_check(&cfg(BinaryMatrix::golden(), MarkovTree::golden(), "f1^inf", (1, 3))).unwrap();
        assert!(!ok.contains(",false,"), "{ok}");
        let swap = BinaryMatrix::new(&[[0u8, 1], [1, 0]]).unwrap();
        let out = cmd_check(&cfg(swap, MarkovTree::golden(), "f1^inf", (1, 1))).unwrap();
        assert!(out.contains("A primitive,false,A not primitive"));
        let out = cmd_check(&cfg(BinaryMatrix::golden(), MarkovTree::crt_preset(3).unwrap(), "f2(f2)^inf", (1, 1)))
            .unwrap();
        assert!(out.contains("ray admissible,false"));
    }

    #[test]
    fn full_shift_rows() {
        let c = cfg(BinaryMatrix::full(2), MarkovTree::full(2), "f1^inf", (1, 5));
        let out = cmd_entropy(&c).unwrap();
        for line in out.lines().skip(1) {
            assert_eq!(line.split(',').nth(3).unwrap(), fmt_g(2f64.ln()));
        }
    }
}
