//! Command-line interface: simulation batches, model fitting, prediction,
//! cross-validation, tree training, and report rendering.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use mfpls::app::{self, BasisSpec, ComponentsArg};
use mfpls::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mfpls",
    about = "Partial least squares regression and classification for multivariate functional data",
    version
)]
struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replications, folds and candidate fits (default 1).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study and emit its results table.
    Simulate {
        /// Simulation setting: 1 (regression), 2 (peak classification),
        /// 3 (curve plus image classification).
        #[arg(long)]
        setting: Option<u8>,
        /// Scenario of setting 2 (1 or 2).
        #[arg(long)]
        scenario: Option<u8>,
        /// Comma-separated signal-to-noise ratios (settings 1 and 3);
        /// defaults to the full grid of the study.
        #[arg(long)]
        snr: Option<String>,
        /// Replications per configuration.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated methods: mfpls, mfpls_dimJ, tmfpls_h1, tmfpls_hcv.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        train_frac: Option<f64>,
        /// Sample size override.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cv_folds: Option<usize>,
        #[arg(long)]
        h_max: Option<usize>,
        /// Output directory for results.csv / results.json / beta dumps.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write replication 0 as CSV dataset files (train/test).
        #[arg(long)]
        export_data: bool,
    },
    /// Fit a model on CSV data; the response header selects the task
    /// (y: regression, label: classification).
    Fit {
        /// Comma-separated per-dimension data files.
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        response: Option<PathBuf>,
        /// Comma-separated per-dimension basis sizes: '20' (curves) or
        /// 'AxB' (images).
        #[arg(long)]
        basis_size: Option<String>,
        /// Component count: an integer or 'cv:K'.
        #[arg(long)]
        components: Option<String>,
        #[arg(long)]
        h_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict with a fitted model.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data: Option<String>,
        /// Optional truth file; writes metrics.json when given.
        #[arg(long)]
        response: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the component count.
    Cv {
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        response: Option<PathBuf>,
        #[arg(long)]
        basis_size: Option<String>,
        #[arg(long)]
        cv_folds: Option<usize>,
        #[arg(long)]
        h_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a PLS-split decision tree (depth estimated by repeated
    /// train/prune splits).
    Tree {
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        response: Option<PathBuf>,
        #[arg(long)]
        basis_size: Option<String>,
        /// Groups of 1-based dimensions: "1;2;1,2". Defaults to singletons
        /// plus the all-dimensions group.
        #[arg(long)]
        groups: Option<String>,
        /// Node component count: an integer or 'cv:K'.
        #[arg(long)]
        components: Option<String>,
        /// Impurity below which a node is terminal.
        #[arg(long)]
        purity: Option<f64>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        min_node_size: Option<usize>,
        #[arg(long)]
        h_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a results.json table.
    Report {
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Merge {
    map: HashMap<String, String>,
}

impl Merge {
    fn get<T: FromStr + Clone>(&self, cli: Option<T>, key: &str, default: T) -> Result<T> {
        self.get_opt(cli, key)?
            .map_or_else(|| Ok(default.clone()), Ok)
    }

    fn get_opt<T: FromStr + Clone>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Validation(format!("config key '{key}': cannot parse '{raw}'"))),
            None => Ok(None),
        }
    }

    fn get_required<T: FromStr + Clone>(&self, cli: Option<T>, key: &str) -> Result<T> {
        self.get_opt(cli, key)?
            .ok_or_else(|| Error::Validation(format!("missing required option --{}", key.replace('_', "-"))))
    }

    fn get_flag(&self, cli: bool, key: &str) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse::<bool>()
                .map_err(|_| Error::Validation(format!("config key '{key}': cannot parse '{raw}'"))),
            None => Ok(false),
        }
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

fn parse_paths(s: &str) -> Vec<PathBuf> {
    split_list(s).into_iter().map(PathBuf::from).collect()
}

fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    split_list(s)
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad snr value '{p}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let map = match &cli.config {
        Some(path) => app::parse_config_file(path)?,
        None => HashMap::new(),
    };
    let merge = Merge { map };
    let jobs = merge.get(cli.jobs, "jobs", 1usize)?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();

    match cli.command {
        Command::Simulate {
            setting,
            scenario,
            snr,
            reps,
            seed,
            methods,
            train_frac,
            n,
            cv_folds,
            h_max,
            out,
            export_data,
        } => {
            let args = app::SimulateArgs {
                setting: merge.get_required(setting, "setting")?,
                scenario: merge.get(scenario, "scenario", 1)?,
                snr: merge
                    .get_opt(snr, "snr")?
                    .map(|s: String| parse_snr_list(&s))
                    .transpose()?,
                reps: merge.get(reps, "reps", 50)?,
                seed: merge.get(seed, "seed", 0)?,
                methods: merge.get_opt(methods, "methods")?.map(|s: String| split_list(&s)),
                train_frac: merge.get_opt(train_frac, "train_frac")?,
                n: merge.get_opt(n, "n")?,
                cv_folds: merge.get(cv_folds, "cv_folds", 10)?,
                h_max: merge.get(h_max, "h_max", 20)?,
                out: merge.get_opt(out, "out")?,
                export_data: merge.get_flag(export_data, "export_data")?,
            };
            app::cmd_simulate(&args)
        }
        Command::Fit { data, response, basis_size, components, h_max, seed, out } => {
            let args = app::FitArgs {
                data: parse_paths(&merge.get_required::<String>(data, "data")?),
                response: merge.get_required(response, "response")?,
                basis: BasisSpec::parse_list(&merge.get_required::<String>(basis_size, "basis_size")?)?,
                components: ComponentsArg::parse(&merge.get(
                    components,
                    "components",
                    "cv:10".to_string(),
                )?)?,
                h_max: merge.get(h_max, "h_max", 20)?,
                seed: merge.get(seed, "seed", 0)?,
                out: merge.get(out, "out", PathBuf::from("."))?,
            };
            app::cmd_fit(&args)
        }
        Command::Predict { model, data, response, out } => {
            let args = app::PredictArgs {
                model: merge.get_required(model, "model")?,
                data: parse_paths(&merge.get_required::<String>(data, "data")?),
                response: merge.get_opt(response, "response")?,
                out: merge.get(out, "out", PathBuf::from("."))?,
            };
            app::cmd_predict(&args)
        }
        Command::Cv { data, response, basis_size, cv_folds, h_max, seed, out } => {
            let args = app::CvArgs {
                data: parse_paths(&merge.get_required::<String>(data, "data")?),
                response: merge.get_required(response, "response")?,
                basis: BasisSpec::parse_list(&merge.get_required::<String>(basis_size, "basis_size")?)?,
                k_folds: merge.get(cv_folds, "cv_folds", 10)?,
                h_max: merge.get(h_max, "h_max", 20)?,
                seed: merge.get(seed, "seed", 0)?,
                out: merge.get(out, "out", PathBuf::from("."))?,
            };
            app::cmd_cv(&args)
        }
        Command::Tree {
            data,
            response,
            basis_size,
            groups,
            components,
            purity,
            max_depth,
            min_node_size,
            h_max,
            seed,
            out,
        } => {
            let args = app::TreeArgs {
                data: parse_paths(&merge.get_required::<String>(data, "data")?),
                response: merge.get_required(response, "response")?,
                basis: BasisSpec::parse_list(&merge.get_required::<String>(basis_size, "basis_size")?)?,
                groups: merge.get_opt(groups, "groups")?,
                components: ComponentsArg::parse(&merge.get(components, "components", "1".to_string())?)?,
                purity: merge.get(purity, "purity", 0.01)?,
                max_depth: merge.get(max_depth, "max_depth", 10)?,
                min_node_size: merge.get(min_node_size, "min_node_size", 5)?,
                h_max: merge.get(h_max, "h_max", 20)?,
                seed: merge.get(seed, "seed", 0)?,
                out: merge.get(out, "out", PathBuf::from("."))?,
            };
            app::cmd_tree(&args)
        }
        Command::Report { results, out } => {
            let args = app::ReportArgs {
                results: merge.get_required(results, "results")?,
                out: merge.get_opt(out, "out")?,
            };
            app::cmd_report(&args)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            println!("{doc}");
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
