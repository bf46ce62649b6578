//! Command-line front end for genesift.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use genesift::config::Settings;
use genesift::data::{load_csv, read_manifest, write_csv, Dataset};
use genesift::fitness::Objective;
use genesift::metaheuristics::{run_search, Algorithm, SearchResult};
use genesift::pipeline::{
    self, bench, bench_csv, format_table, gen_synthetic, run_pipeline_full, run_pipeline_split, BenchRow, CSV_HEADER,
};
use genesift::{Error, Stage};
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable consulted for the seed when neither the config file
/// nor `--seed` sets one.
pub const SEED_ENV: &str = "GENESIFT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "genesift",
    version,
    about = "Bio-inspired gene selection with a deep softmax classifier"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for every random stream; overrides all section seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override a single config key, e.g. `--set net.updater=adam`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Print the resolved configuration before running.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its ground-truth mask.
    Gensynth(GensynthArgs),
    /// Run feature selection only and write the selected mask.
    Select(SelectArgs),
    /// Select, train and evaluate on one dataset.
    Run(RunArgs),
    /// Run every dataset in a manifest with each algorithm.
    Bench(BenchArgs),
    /// Print the resolved configuration and exit.
    Config,
}

#[derive(Debug, Args)]
pub struct GensynthArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Output CSV; the mask goes next to it with a `.mask` extension.
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    /// Where to write the selected column indices (default: `<data>.selected.mask`).
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    /// Write the per-iteration log as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Separate test file; the classifier then trains on `--data` and is scored here.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    /// Append the CSV row to this file (header written when the file is new).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave time_s empty in CSV output.
    #[arg(long)]
    pub omit_time: bool,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Algorithms to run, in order (default: firefly then elephant).
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Vec<Algorithm>,
    /// Write the report CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave time_s empty so reruns compare byte for byte.
    #[arg(long)]
    pub omit_time: bool,
    /// Rows run in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Error plus the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => EXIT_USAGE,
            e if e.is_data_error() => EXIT_DATA,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Resolves defaults < `GENESIFT_SEED` < config file < flags < `--seed`.
pub fn resolve_settings(global: &GlobalArgs, env_seed: Option<&str>) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(raw) = env_seed {
        let seed = raw
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{SEED_ENV} must be an unsigned integer, got {raw:?}")))?;
        s.set_seed(seed);
    }
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        s.apply_text(&text)?;
    }
    for kv in &global.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        s.set(k.trim(), v)?;
    }
    Ok(s)
}

fn finish_settings(s: &mut Settings, global: &GlobalArgs, algorithm: Option<Algorithm>, jobs: Option<usize>) {
    if let Some(a) = algorithm {
        s.pipeline.algorithm = a;
    }
    if let Some(j) = jobs {
        s.pipeline.jobs = j;
    }
    if let Some(seed) = global.seed {
        s.set_seed(seed);
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn load(path: &Path, s: &Settings) -> Result<Dataset, Failure> {
    load_csv(path, &s.load).map_err(|e| Failure::from(e.at_stage(Stage::Load)))
}

/// Sidecar path for a generated dataset's ground-truth mask.
pub fn mask_path_for(data: &Path) -> PathBuf {
    data.with_extension("mask")
}

fn cmd_gensynth(a: &GensynthArgs, s: &Settings, out: &mut dyn Write) -> Result<i32, Failure> {
    let seed = s.pipeline.seed;
    let (ds, truth) = gen_synthetic(a.n, a.d, a.k, a.classes, a.noise, seed).map_err(|e| match e {
        Error::Config(m) => Failure::usage(m),
        other => other.into(),
    })?;
    let ds = ds.with_name(
        a.out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "synthetic".into()),
    );
    write_csv(&ds, &a.out).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    })?;
    let mask_path = mask_path_for(&a.out);
    write_file(&mask_path, &format!("{}\n", truth.index_list()))?;
    let _ = writeln!(out, "{}", a.out.display());
    let _ = writeln!(out, "{}", mask_path.display());
    Ok(EXIT_OK)
}

fn trace_csv(result: &SearchResult) -> String {
    let mut text = String::from("iteration,best_fitness,popcount\n");
    for t in &result.trace {
        text.push_str(&format!("{},{:?},{}\n", t.iteration, t.best_fitness, t.popcount));
    }
    text
}

fn cmd_select(a: &SelectArgs, s: &Settings, out: &mut dyn Write) -> Result<i32, Failure> {
    let ds = load(&a.data, s)?;
    let cfg = &s.pipeline;
    cfg.validate()?;
    let normalized = Arc::new(genesift::data::minmax_normalize(&ds));
    let start = std::time::Instant::now();
    let result = Objective::new(cfg.objective.clone(), Arc::clone(&normalized), Some(cfg.net.clone()))
        .and_then(|obj| run_search(&cfg.search_params(), &obj, normalized.n_features(), cfg.jobs))
        .map_err(|e| Failure::from(e.at_stage(Stage::Select)))?;
    let secs = start.elapsed().as_secs_f64();
    let mask_path = a
        .mask_out
        .clone()
        .unwrap_or_else(|| a.data.with_extension("selected.mask"));
    write_file(&mask_path, &format!("{}\n", result.best_mask.index_list()))?;
    if let Some(trace) = &a.trace {
        write_file(trace, &trace_csv(&result))?;
    }
    let _ = writeln!(out, "algorithm: {}", cfg.algorithm);
    let _ = writeln!(out, "original attributes: {}", ds.n_features());
    let _ = writeln!(out, "reduced attributes: {}", result.best_mask.popcount());
    let _ = writeln!(out, "best fitness: {:.6}", result.best_fitness);
    let _ = writeln!(out, "selection time (s): {secs:.2}");
    let _ = writeln!(out, "mask: {}", mask_path.display());
    Ok(EXIT_OK)
}

fn append_row(path: &Path, row: &str) -> Result<(), Failure> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("cannot open {}: {e}", path.display()),
        })?;
    let text = if fresh {
        format!("{CSV_HEADER}\n{row}\n")
    } else {
        format!("{row}\n")
    };
    f.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn cmd_run(a: &RunArgs, s: &Settings, out: &mut dyn Write) -> Result<i32, Failure> {
    let ds = load(&a.data, s)?;
    let run = match &a.test {
        Some(test) => run_pipeline_split(&ds, &load(test, s)?, &s.pipeline)?,
        None => run_pipeline_full(&ds, &s.pipeline)?,
    };
    let _ = writeln!(out, "{}", run.report);
    if let Some(path) = &a.out {
        append_row(path, &pipeline::csv_row(&run.report, a.omit_time))?;
    }
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs, s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let entries = read_manifest(&a.manifest).map_err(|e| Failure::from(e.at_stage(Stage::Load)))?;
    let algorithms = if a.algorithm.is_empty() {
        vec![Algorithm::Firefly, Algorithm::Elephant]
    } else {
        a.algorithm.clone()
    };
    s.pipeline.validate()?;
    let cfgs: Vec<_> = algorithms
        .iter()
        .map(|&alg| s.pipeline.clone().with_algorithm(alg))
        .collect();
    if a.jobs == 0 {
        return Err(Failure::usage("--jobs must be >= 1"));
    }
    let rows = bench(&entries, &cfgs, &s.load, a.jobs);
    let _ = write!(out, "{}", format_table(&rows));
    let csv = bench_csv(&rows, a.omit_time);
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => {
            let _ = write!(out, "\n{csv}");
        }
    }
    Ok(bench_status(&rows, err))
}

fn bench_status(rows: &[BenchRow], err: &mut dyn Write) -> i32 {
    let mut code = EXIT_OK;
    for row in rows {
        if let Err(f) = &row.outcome {
            let _ = writeln!(
                err,
                "{} ({}): {}",
                row.dataset,
                pipeline::method_label(row.algorithm),
                f.message
            );
            let row_code = if f.data_error { EXIT_DATA } else { EXIT_RUNTIME };
            code = code.max(row_code);
        }
    }
    code
}

/// Runs the CLI on `args` and returns the exit status.
pub fn run<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, env_seed, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut s = resolve_settings(&cli.global, env_seed)?;
    let (algorithm, jobs) = match &cli.command {
        Command::Select(a) => (a.algorithm, a.jobs),
        Command::Run(a) => (a.algorithm, a.jobs),
        _ => (None, None),
    };
    finish_settings(&mut s, &cli.global, algorithm, jobs);
    if cli.global.print_config || matches!(cli.command, Command::Config) {
        let _ = write!(out, "{}", s.to_text());
    }
    match &cli.command {
        Command::Gensynth(a) => cmd_gensynth(a, &s, out),
        Command::Select(a) => cmd_select(a, &s, out),
        Command::Run(a) => cmd_run(a, &s, out),
        Command::Bench(a) => cmd_bench(a, &s, out, err),
        Command::Config => Ok(EXIT_OK),
    }
}
