//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 config error, 3 model error,
//! 4 data error, 5 campaign runs missing.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::nn::{self, CellKind, Dataset, GridSpace, ModelConfig, NnError, RecurrentModel};
use crate::sim::{run, HoMode, RunError, RunOptions, Scenario};
use crate::stats::{summarize, GroupSamples, StatsError};
use crate::traffic::Aggregates;

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_MISSING_RUNS: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("missing runs: {0}")]
    MissingRuns(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(_) => EXIT_MODEL,
            CliError::Data(_) => EXIT_DATA,
            CliError::MissingRuns(_) => EXIT_MISSING_RUNS,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(m) => CliError::Config(m),
            RunError::Model(m) => CliError::Model(m),
            RunError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn nn_error(e: NnError) -> CliError {
    match e {
        NnError::InvalidConfig(m) => CliError::Config(m),
        NnError::Io(m) => CliError::Io(m),
        other => CliError::Data(other.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "ricsim", version, about = "Vehicular RAN and near-RT RIC co-simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario.
    Run(RunArgs),
    /// Run every mode over a range of seeds.
    Campaign(CampaignArgs),
    /// Train a forecasting model.
    Train(TrainArgs),
    /// Rank hyperparameter combinations by validation error.
    GridSearch(GridArgs),
    /// Dump the RSRP history of a run as a training dataset.
    GenData(GenDataArgs),
    /// Compare modes of a finished campaign.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Default,
    Oracle,
    Lstm,
    Gru,
}

impl From<ModeArg> for HoMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Default => HoMode::Default,
            ModeArg::Oracle => HoMode::Oracle,
            ModeArg::Lstm => HoMode::Lstm,
            ModeArg::Gru => HoMode::Gru,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Lstm,
    Gru,
}

impl From<ArchArg> for CellKind {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Lstm => CellKind::Lstm,
            ArchArg::Gru => CellKind::Gru,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario's `ho_mode`.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Model file for lstm/gru modes; overrides the scenario's `model_ref`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the final SDL contents to `<out>/sdl.csv`.
    #[arg(long)]
    pub sdl_dump: bool,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "default,oracle")]
    pub modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 30)]
    pub runs: u64,
    #[arg(long, default_value_t = 1)]
    pub seed_base: u64,
    /// Model files; each serves the mode matching its architecture.
    #[arg(long)]
    pub model: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Parallel workers.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct Hyper {
    #[arg(long, value_enum)]
    pub arch: ArchArg,
    /// Recurrent layer sizes, bottom first (e.g. `64,32`).
    #[arg(long, value_delimiter = ',')]
    pub units: Option<Vec<usize>>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub lookback: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Stop once validation MAE (normalized) drops below this value.
    #[arg(long)]
    pub target_mae: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Hyper {
    pub fn config(&self) -> ModelConfig {
        let mut c = ModelConfig::preset(self.arch.into());
        if let Some(u) = &self.units {
            c.units = u.clone();
        }
        if let Some(v) = self.dropout {
            c.dropout = v;
        }
        if let Some(v) = self.lookback {
            c.lookback = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.patience {
            c.patience = v;
        }
        c.target_val_mae = self.target_mae;
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model file; the training report goes next to it as `<stem>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Report file, one JSON object per evaluated config, best first.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of configs to sample from the grid; all when absent.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub campaign: PathBuf,
    /// One of the aggregate metrics; all of them when absent.
    #[arg(long)]
    pub metric: Option<String>,
    /// CSV output file; a text table goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ricsim: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(a) => cmd_run(a),
        Command::Campaign(a) => cmd_campaign(a).map(|digest| println!("campaign digest {digest}")),
        Command::Train(a) => cmd_train(a),
        Command::GridSearch(a) => cmd_grid_search(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Report(a) => cmd_report(a).map(|text| print!("{text}")),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let s = Scenario::load(path).map_err(CliError::Config)?;
    s.validate().map_err(CliError::Config)?;
    Ok(s)
}

fn load_model(path: &Path) -> Result<Arc<RecurrentModel>, CliError> {
    nn::persist::load(path).map(Arc::new).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

fn model_for(mode: HoMode, explicit: Option<&Path>, scenario: &Scenario) -> Result<Option<Arc<RecurrentModel>>, CliError> {
    if !mode.needs_model() {
        return Ok(None);
    }
    let path = explicit
        .map(Path::to_path_buf)
        .or_else(|| scenario.model_ref.clone())
        .ok_or_else(|| CliError::Model(format!("mode {mode} needs --model")))?;
    load_model(&path).map(Some)
}

pub fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    let mode = a.mode.map_or(scenario.ho_mode, HoMode::from);
    let model = model_for(mode, a.model.as_deref(), &scenario)?;
    let out = run(&scenario, &RunOptions { mode, model })?;
    if a.sdl_dump {
        fs::create_dir_all(&a.out)?;
        let f = fs::File::create(a.out.join("sdl.csv"))?;
        out.sdl.dump_csv(f).map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.write_to(&a.out)?;
    Ok(())
}

/// Runs the campaign and returns a SHA-256 digest over every run's
/// aggregates, in mode then seed order.
pub fn cmd_campaign(a: &CampaignArgs) -> Result<String, CliError> {
    if a.runs == 0 {
        return Err(CliError::Config("--runs must be >= 1".into()));
    }
    if a.modes.is_empty() {
        return Err(CliError::Config("--modes is empty".into()));
    }
    let scenario = load_scenario(&a.scenario)?;
    let mut models: BTreeMap<CellKind, Arc<RecurrentModel>> = BTreeMap::new();
    for path in &a.model {
        let m = load_model(path)?;
        models.insert(m.config().arch, m);
    }
    let mut modes: Vec<HoMode> = Vec::new();
    for m in &a.modes {
        let mode = HoMode::from(*m);
        if !modes.contains(&mode) {
            modes.push(mode);
        }
    }
    let mut opts = Vec::new();
    for &mode in &modes {
        let model = match mode {
            HoMode::Lstm | HoMode::Gru => {
                let arch = if mode == HoMode::Lstm { CellKind::Lstm } else { CellKind::Gru };
                match models.get(&arch) {
                    Some(m) => Some(m.clone()),
                    None => model_for(mode, None, &scenario)?,
                }
            }
            _ => None,
        };
        opts.push(RunOptions { mode, model });
    }

    let jobs: Vec<(usize, u64)> = (0..opts.len())
        .flat_map(|i| (0..a.runs).map(move |k| (i, a.seed_base + k)))
        .filter(|&(i, seed)| !run_dir(&a.out, opts[i].mode, seed).join("aggregates.json").is_file())
        .collect();
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<CliError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                if failure.lock().expect("worker panicked").is_some() {
                    break;
                }
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, seed)) = jobs.get(j) else { break };
                let mut sc = scenario.clone();
                sc.seed = seed;
                let res = run(&sc, &opts[i])
                    .map_err(CliError::from)
                    .and_then(|out| out.write_to(&run_dir(&a.out, opts[i].mode, seed)).map_err(CliError::from));
                if let Err(e) = res {
                    failure.lock().expect("worker panicked").get_or_insert(e);
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("worker panicked") {
        return Err(e);
    }

    let mut hasher = Sha256::new();
    for o in &opts {
        for k in 0..a.runs {
            let seed = a.seed_base + k;
            let bytes = fs::read(run_dir(&a.out, o.mode, seed).join("aggregates.json"))?;
            hasher.update(format!("{}/{}\n", o.mode, seed).as_bytes());
            hasher.update(&bytes);
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn run_dir(out: &Path, mode: HoMode, seed: u64) -> PathBuf {
    out.join(mode.as_str()).join(seed.to_string())
}

fn report_path(model_path: &Path) -> PathBuf {
    let stem = model_path.file_stem().map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    model_path.with_file_name(format!("{stem}.report.json"))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let ds = Dataset::load_csv(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if ds.samples() == 0 {
        return Err(CliError::Data(format!("{}: no samples", path.display())));
    }
    Ok(ds)
}

pub fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let config = a.hyper.config();
    config.validate().map_err(nn_error)?;
    let ds = load_dataset(&a.data)?;
    let (model, report) = nn::train(&config, &ds).map_err(nn_error)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    nn::persist::save(&model, &a.out).map_err(nn_error)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(report_path(&a.out), json + "\n")?;
    Ok(())
}

pub fn cmd_grid_search(a: &GridArgs) -> Result<(), CliError> {
    let base = a.hyper.config();
    base.validate().map_err(nn_error)?;
    let ds = load_dataset(&a.data)?;
    let results = nn::grid_search(&GridSpace::default(), &base, &ds, a.budget, a.threads).map_err(nn_error)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(&a.out)?;
    for r in &results {
        let line = serde_json::to_string(r).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    // keep the whole run in the SDL
    let reports = scenario.duration_ms / scenario.radio.report_period_ms + 1;
    scenario.ric.sdl_capacity = scenario.ric.sdl_capacity.max(reports as usize);
    let out = run(&scenario, &RunOptions { mode: HoMode::Default, model: None })?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let f = fs::File::create(&a.out)?;
    out.sdl.dump_dataset_csv(f).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

/// Per-mode, per-seed aggregates found under a campaign directory.
pub fn read_campaign(dir: &Path) -> Result<BTreeMap<HoMode, BTreeMap<u64, Aggregates>>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::MissingRuns(format!("{}: {e}", dir.display())))?;
    let mut out: BTreeMap<HoMode, BTreeMap<u64, Aggregates>> = BTreeMap::new();
    let mut missing = Vec::new();
    for entry in entries {
        let entry = entry?;
        let Some(mode) = entry.file_name().to_str().and_then(|n| n.parse::<HoMode>().ok()) else { continue };
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let runs = out.entry(mode).or_default();
        for seed_dir in fs::read_dir(entry.path())? {
            let seed_dir = seed_dir?;
            let Some(seed) = seed_dir.file_name().to_str().and_then(|n| n.parse::<u64>().ok()) else { continue };
            let path = seed_dir.path().join("aggregates.json");
            match fs::read_to_string(&path) {
                Ok(text) => {
                    let agg: Aggregates = serde_json::from_str(&text)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    runs.insert(seed, agg);
                }
                Err(_) => missing.push(format!("{mode}/{seed}")),
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::MissingRuns(format!("no mode directories in {}", dir.display())));
    }
    let all_seeds: std::collections::BTreeSet<u64> = out.values().flat_map(|r| r.keys().copied()).collect();
    for (mode, runs) in &out {
        for seed in &all_seeds {
            if !runs.contains_key(seed) && !missing.contains(&format!("{mode}/{seed}")) {
                missing.push(format!("{mode}/{seed}"));
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(CliError::MissingRuns(missing.join(", ")));
    }
    Ok(out)
}

/// Builds the comparison tables; writes CSV to `--out` when given and
/// returns the text rendering.
pub fn cmd_report(a: &ReportArgs) -> Result<String, CliError> {
    let names = Aggregates::METRIC_NAMES;
    let probe = Aggregates { ota_completion_ms: Some(0.0), ..Aggregates::from_rows("", 0, &[]) };
    if let Some(m) = a.metric.as_deref().filter(|m| probe.value(m).is_none()) {
        return Err(CliError::Config(format!("unknown metric {m:?}; expected one of {names:?}")));
    }
    let campaign = read_campaign(&a.campaign)?;
    let metrics: Vec<&str> = match &a.metric {
        Some(m) => vec![m.as_str()],
        // skip metrics the campaign never produced, e.g. OTA completion of a streaming run
        None => names
            .into_iter()
            .filter(|m| campaign.values().flat_map(|r| r.values()).all(|agg| agg.value(m).is_some()))
            .collect(),
    };
    let mut text = String::new();
    let mut csv = String::new();
    for (k, metric) in metrics.iter().enumerate() {
        let mut groups = Vec::new();
        for (mode, runs) in &campaign {
            let mut values = Vec::new();
            for agg in runs.values() {
                match agg.value(metric) {
                    Some(v) => values.push(v),
                    None => {
                        return Err(CliError::Data(format!("{mode} seed {}: metric {metric} has no value", agg.seed)))
                    }
                }
            }
            groups.push(GroupSamples::new(mode.as_str(), values));
        }
        let summary = summarize(metric, &groups).map_err(|e| match e {
            StatsError::TooFewSamples(m) => CliError::MissingRuns(m),
            other => CliError::Data(other.to_string()),
        })?;
        if k > 0 {
            text.push('\n');
        }
        text.push_str(&summary.to_text());
        let table = summary.to_csv();
        // one header for the whole file
        let skip = usize::from(k > 0);
        csv.extend(table.lines().skip(skip).flat_map(|l| [l, "\n"]));
    }
    if let Some(path) = &a.out {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &csv)?;
    }
    Ok(text)
}
