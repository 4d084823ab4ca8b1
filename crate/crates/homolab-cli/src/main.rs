//! `homolab` command-line interface.
//!
//! Subcommands: `generate`, `metrics`, `theorem`, `coeff-grid`, `evaluate`,
//! `sweep`. Every file output is written atomically and accompanied by a
//! `<output>.manifest.json` sidecar recording the resolved configuration,
//! seeds, library version and content digests.
//!
//! Exit codes: 0 success, 2 validation error, 3 degenerate-math error,
//! 4 I/O or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use homolab::error::{Error, Result};
use homolab::eval::{self, EvalModel, SweepSpec};
use homolab::gen::{self, GeneratorConfig};
use homolab::io::{self, RunManifest};
use homolab::metrics;
use homolab::theory::{self, ModelKind, TheorySetup};

/// Seed fallback used when neither flag nor config file provides one.
const SEED_ENV_VAR: &str = "HOMOLAB_SEED";

#[derive(Parser)]
#[command(
    name = "homolab",
    version,
    about = "Synthetic graphs with controllable local homophily, closed-form \
             linear graph models, and stratified evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and write it as canonical JSON.
    Generate(GenerateArgs),
    /// Compute homophily metrics of a graph (global, per-node, compatibility).
    Metrics {
        /// Input graph JSON.
        #[arg(long)]
        graph: PathBuf,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a closed-form prediction-shift law at one parameter point.
    Theorem {
        /// Model family.
        #[arg(long, value_enum)]
        kind: TheoryKindArg,
        /// Global homophily in [0, 1].
        #[arg(long)]
        h: f64,
        /// Node degree (positive integer).
        #[arg(long)]
        d: u32,
        /// Feature agreement in (0, 0.5].
        #[arg(long)]
        p: f64,
        /// Local-homophily shift; h + alpha must stay in [0, 1].
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Tabulate the one-layer and concatenation coefficients over (d, h).
    CoeffGrid {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Degrees to tabulate [default: 1,5,10,15,20,25].
        #[arg(long, value_delimiter = ',')]
        d_values: Option<Vec<f64>>,
        /// Grid step in h; must divide 1 [default: 0.001].
        #[arg(long)]
        h_step: Option<f64>,
    },
    /// Split a graph, fit one model, and report per-bin macro F1.
    Evaluate {
        /// Input graph JSON.
        #[arg(long)]
        graph: PathBuf,
        /// Model family to fit.
        #[arg(long, value_enum)]
        kind: EvalKindArg,
        /// Split seed [default: HOMOLAB_SEED or 0].
        #[arg(long)]
        seed: Option<u64>,
        /// Local-homophily bin edges [default: 0,0.25,0.5,0.75,1].
        #[arg(long, value_delimiter = ',')]
        bins: Option<Vec<f64>>,
        /// Train/validation/test ratios [default: 0.5,0.25,0.25].
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a multi-config, multi-seed sweep described by a JSON file.
    Sweep {
        /// Sweep description (configs, kinds, seeds, optional bins/ratios).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Total node count (required here or in the config file).
    #[arg(long)]
    n: Option<usize>,
    /// Edges per arriving node (required here or in the config file).
    #[arg(long)]
    m: Option<usize>,
    /// Target global homophily in [0, 1] (required here or in the file).
    #[arg(long)]
    h: Option<f64>,
    /// Uniformity probability in [0, 1] [default: 0, with a warning].
    #[arg(long)]
    rho: Option<f64>,
    /// Feature signal strength in [0, 1] [default: 0.5].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Drift threshold [default: 5].
    #[arg(long)]
    delta: Option<u32>,
    /// Number of classes [default: 2, or the length of --class-probs].
    #[arg(long)]
    classes: Option<usize>,
    /// Class probabilities, comma-separated [default: uniform].
    #[arg(long, value_delimiter = ',')]
    class_probs: Option<Vec<f64>>,
    /// RNG seed [default: HOMOLAB_SEED or 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Give every feature dimension the mean epsilon * label instead of
    /// epsilon * onehot(label).
    #[arg(long)]
    literal_feature_means: bool,
    /// Output graph JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryKindArg {
    /// One-layer ego-plus-neighbors model.
    Homophilous,
    /// Two stacked aggregation layers.
    Homophilous2Layer,
    /// Ego and neighbor blocks kept separate.
    Concat,
}

impl From<TheoryKindArg> for ModelKind {
    fn from(kind: TheoryKindArg) -> Self {
        match kind {
            TheoryKindArg::Homophilous => ModelKind::Homophilous1Layer,
            TheoryKindArg::Homophilous2Layer => ModelKind::Homophilous2Layer,
            TheoryKindArg::Concat => ModelKind::HeterophilousConcat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalKindArg {
    Homophilous,
    Concat,
    Baseline,
}

impl From<EvalKindArg> for EvalModel {
    fn from(kind: EvalKindArg) -> Self {
        match kind {
            EvalKindArg::Homophilous => EvalModel::Homophilous,
            EvalKindArg::Concat => EvalModel::Concat,
            EvalKindArg::Baseline => EvalModel::Baseline,
        }
    }
}

/// Generator config file: every field optional, unknown keys rejected.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateFileConfig {
    n: Option<usize>,
    m: Option<usize>,
    h: Option<f64>,
    rho: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<u32>,
    classes: Option<usize>,
    class_probs: Option<Vec<f64>>,
    seed: Option<u64>,
    literal_feature_means: Option<bool>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::NoEdges | Error::IsolatedNode(_) => 2,
        Error::Degenerate(_) => 3,
        Error::Io(_) | Error::Parse(_) => 4,
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::Validation(format!("{SEED_ENV_VAR}: not a valid seed: {text:?}"))),
        Err(_) => Ok(None),
    }
}

/// Seed precedence: flag, then config file, then environment, then 0.
fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    Ok(flag.or(file).or(seed_from_env()?).unwrap_or(0))
}

fn to_value<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

/// Print to stdout or write atomically with a manifest sidecar.
fn emit(
    text: &str,
    out: Option<&PathBuf>,
    config: serde_json::Value,
    seeds: Vec<u64>,
) -> Result<()> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            io::write_atomic(path, text.as_bytes())?;
            let mut manifest = RunManifest::new(command_line(), config, seeds);
            manifest.record_output(path)?;
            manifest.write_sidecar(path)?;
            Ok(())
        }
    }
}

fn resolve_generate_config(args: &GenerateArgs) -> Result<GeneratorConfig> {
    let file: GenerateFileConfig = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => GenerateFileConfig::default(),
    };
    let n = args
        .n
        .or(file.n)
        .ok_or_else(|| Error::Validation("n: required (flag or config file)".into()))?;
    let m = args
        .m
        .or(file.m)
        .ok_or_else(|| Error::Validation("m: required (flag or config file)".into()))?;
    let h = args
        .h
        .or(file.h)
        .ok_or_else(|| Error::Validation("h: required (flag or config file)".into()))?;
    let rho = args.rho.or(file.rho).unwrap_or_else(|| {
        eprintln!("warning: rho not given; defaulting to 0.0");
        0.0
    });
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.5);
    let delta = args.delta.or(file.delta).unwrap_or(5);
    let seed = resolve_seed(args.seed, file.seed)?;
    let classes = args.classes.or(file.classes);
    let class_probs = match (args.class_probs.clone().or(file.class_probs), classes) {
        (Some(probs), Some(c)) if probs.len() != c => {
            return Err(Error::Validation(format!(
                "class-probs: {} entries do not match classes = {c}",
                probs.len()
            )));
        }
        (Some(probs), _) => probs,
        (None, c) => {
            let c = c.unwrap_or(2);
            if c < 2 {
                return Err(Error::Validation("classes: must be at least 2".into()));
            }
            vec![1.0 / c as f64; c]
        }
    };
    let literal_feature_means =
        args.literal_feature_means || file.literal_feature_means.unwrap_or(false);

    let config = GeneratorConfig {
        n,
        m,
        class_probs,
        h,
        rho,
        epsilon,
        delta,
        seed,
        literal_feature_means,
    };
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let config = resolve_generate_config(&args)?;
            let built = gen::generate(&config)?;
            io::write_graph(&args.out, &built.graph)?;
            let mut manifest =
                RunManifest::new(command_line(), to_value(&config)?, vec![config.seed]);
            manifest.record_output(&args.out)?;
            manifest.write_sidecar(&args.out)?;
            eprintln!(
                "generated {} nodes, {} edges ({} sampling fallbacks) -> {}",
                built.graph.node_count(),
                built.graph.edge_count(),
                built.fallback_events,
                args.out.display()
            );
            Ok(())
        }
        Command::Metrics { graph, out } => {
            let g = io::read_graph(&graph)?;
            let summary = metrics::summarize(&g)?;
            emit(
                &to_pretty(&summary)?,
                out.as_ref(),
                serde_json::json!({ "graph": graph.display().to_string() }),
                vec![],
            )
        }
        Command::Theorem {
            kind,
            h,
            d,
            p,
            alpha,
        } => {
            let setup = TheorySetup::new(h, d, p)?;
            let check = theory::verify_theorem(kind.into(), &setup, alpha)?;
            println!("{}", to_pretty(&check)?);
            Ok(())
        }
        Command::CoeffGrid {
            out,
            d_values,
            h_step,
        } => {
            let d_values = d_values.unwrap_or_else(|| vec![1.0, 5.0, 10.0, 15.0, 20.0, 25.0]);
            let h_step = h_step.unwrap_or(0.001);
            let rows = theory::coefficient_grid(&d_values, h_step)?;
            let csv = io::grid_csv(&rows);
            io::write_atomic(&out, csv.as_bytes())?;
            let mut manifest = RunManifest::new(
                command_line(),
                serde_json::json!({ "d_values": d_values, "h_step": h_step }),
                vec![],
            );
            manifest.record_output(&out)?;
            manifest.write_sidecar(&out)?;
            eprintln!("wrote {} grid rows -> {}", rows.len(), out.display());
            Ok(())
        }
        Command::Evaluate {
            graph,
            kind,
            seed,
            bins,
            ratios,
            out,
        } => {
            let g = io::read_graph(&graph)?;
            let seed = resolve_seed(seed, None)?;
            let bins = bins.unwrap_or_else(|| eval::DEFAULT_BIN_EDGES.to_vec());
            let ratios = match ratios {
                None => eval::DEFAULT_SPLIT_RATIOS,
                Some(r) if r.len() == 3 => [r[0], r[1], r[2]],
                Some(r) => {
                    return Err(Error::Validation(format!(
                        "ratios: expected 3 values, got {}",
                        r.len()
                    )));
                }
            };
            let kind: EvalModel = kind.into();
            let split = eval::split_nodes(&g, ratios, seed)?;
            let weights = eval::fit_linear_gnn(&g, &split.train, kind)?;
            let report = eval::evaluate_binned(&g, &split, &weights, kind, &bins)?;
            emit(
                &to_pretty(&report)?,
                out.as_ref(),
                serde_json::json!({
                    "graph": graph.display().to_string(),
                    "kind": kind.tag(),
                    "bins": bins,
                    "ratios": ratios,
                    "seed": seed,
                }),
                vec![seed],
            )
        }
        Command::Sweep { config, out } => {
            let spec: SweepSpec = serde_json::from_str(&fs::read_to_string(&config)?)?;
            let rows = eval::run_sweep(&spec)?;
            let csv = io::sweep_csv(&rows);
            io::write_atomic(&out, csv.as_bytes())?;
            let seeds = spec.configs.iter().map(|c| c.seed).collect();
            let mut manifest = RunManifest::new(command_line(), to_value(&spec)?, seeds);
            manifest.record_output(&out)?;
            manifest.write_sidecar(&out)?;
            eprintln!("wrote {} sweep rows -> {}", rows.len(), out.display());
            Ok(())
        }
    }
}
