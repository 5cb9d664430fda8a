//! Argument parsing and subcommand dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use loracap_core::scenario::sf_params;
use loracap_core::{
    analytic, CodingRate, J1Rule, Model, Orthogonality, Policy, QuadratureSpec, Scenario, SpreadingFactor,
    SuccessMetric,
};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::report::compare_report;
use crate::sweep::{read_csv, run_sweep, write_csv, Engine, SweepSpec, DEFAULT_N_VALUES};

#[derive(Debug, Parser)]
#[command(name = "loracap", version, about = "LoRa uplink capacity: analytic model and Monte Carlo simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the number of devices and write CSV rows.
    Sweep(SweepArgs),
    /// Compare analytic and Monte Carlo rows (from --input or a fresh sweep).
    Compare(CompareArgs),
    /// Per-SF bit-rates, thresholds and distance boundaries.
    Table(ScenarioArgs),
    /// Per-count terms of the analytic success probability for one SF.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Montecarlo,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    SfDistance,
    SfRandom,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Perfect,
    Imperfect,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    PerPacket,
    SlotCapture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum J1RuleArg {
    Guarded,
    InterSfOnly,
    Strict,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// key = value scenario file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub radius_m: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p0_dbm: Option<f64>,
    #[arg(long)]
    pub fc_mhz: Option<f64>,
    #[arg(long)]
    pub bw_hz: Option<f64>,
    #[arg(long)]
    pub nf_db: Option<f64>,
    /// Coding rate 4/(4+n).
    #[arg(long)]
    pub cr_n: Option<u8>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, value_enum)]
    pub j1_rule: Option<J1RuleArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Device counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    #[arg(long, value_enum)]
    pub orthogonality: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "both")]
    pub engine: EngineArg,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Sweep CSV to read instead of running a sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 7)]
    pub sf: u8,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    #[arg(long, value_enum)]
    pub orthogonality: Option<ModeArg>,
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        context: "cannot read config",
        path: path.to_path_buf(),
        source,
    })?;
    ConfigFile::parse(&text)
}

impl ScenarioArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<(Scenario, ConfigFile)> {
        let mut s = Scenario::default();
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => ConfigFile::default(),
        };
        file.apply(&mut s)?;
        if let Some(v) = self.radius_m {
            s.radius_m = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.p0_dbm {
            s.p0_dbm = v;
        }
        if let Some(v) = self.fc_mhz {
            s.fc_mhz = v;
        }
        if let Some(v) = self.bw_hz {
            s.bw_hz = v;
        }
        if let Some(v) = self.nf_db {
            s.nf_db = v;
        }
        if let Some(n) = self.cr_n {
            s.coding_rate = CodingRate::new(n).map_err(CliError::Scenario)?;
        }
        if let Some(m) = self.metric {
            s.metric = match m {
                MetricArg::PerPacket => SuccessMetric::PerPacket,
                MetricArg::SlotCapture => SuccessMetric::SlotCapture,
            };
        }
        if let Some(r) = self.j1_rule {
            s.j1_rule = match r {
                J1RuleArg::Guarded => J1Rule::Guarded,
                J1RuleArg::InterSfOnly => J1Rule::InterSfOnly,
                J1RuleArg::Strict => J1Rule::Strict,
            };
        }
        s.validate().map_err(CliError::Scenario)?;
        Ok((s, file))
    }
}

fn policies(arg: Option<PolicyArg>, file: &ConfigFile, s: &Scenario) -> Vec<Policy> {
    match arg {
        Some(PolicyArg::SfDistance) => vec![Policy::Distance],
        Some(PolicyArg::SfRandom) => vec![Policy::Random],
        Some(PolicyArg::Both) => Policy::ALL.to_vec(),
        None if file.has("policy") => vec![s.policy],
        None => vec![Policy::Distance],
    }
}

fn modes(arg: Option<ModeArg>, file: &ConfigFile, s: &Scenario) -> Vec<Orthogonality> {
    match arg {
        Some(ModeArg::Perfect) => vec![Orthogonality::Perfect],
        Some(ModeArg::Imperfect) => vec![Orthogonality::Imperfect],
        Some(ModeArg::Both) => Orthogonality::ALL.to_vec(),
        None if file.has("orthogonality") => vec![s.orthogonality],
        None => Orthogonality::ALL.to_vec(),
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<(SweepSpec, Scenario)> {
        let (scenario, file) = self.scenario.resolve()?;
        let n_values = match &self.nodes {
            Some(n) => n.clone(),
            None if file.has("nodes") => vec![scenario.nodes],
            None => DEFAULT_N_VALUES.to_vec(),
        };
        let engines = match self.engine {
            EngineArg::Analytic => vec![Engine::Analytic],
            EngineArg::Montecarlo => vec![Engine::MonteCarlo],
            EngineArg::Both => vec![Engine::Analytic, Engine::MonteCarlo],
        };
        let spec = SweepSpec {
            n_values,
            engines,
            modes: modes(self.orthogonality, &file, &scenario),
            policies: policies(self.policy, &file, &scenario),
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
        };
        spec.validate()?;
        Ok((spec, scenario))
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            context: "cannot write output",
            path: path.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text).map_err(|source| CliError::Io {
            context: "cannot write output",
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn table(scenario: &Scenario) -> Result<String> {
    let params = sf_params(scenario).map_err(CliError::from_core)?;
    let mut s = String::from("sf,bitrate_bps,sensitivity_dbm,q_sf_db,q_isf_db,l_lo_m,l_hi_m\n");
    for p in params {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.m.value(),
            p.bitrate,
            p.sensitivity_dbm,
            p.q_sf_db,
            p.q_isf_db,
            p.annulus.lo,
            p.annulus.hi
        ));
    }
    Ok(s)
}

fn inspect(args: &InspectArgs) -> Result<String> {
    let (mut scenario, file) = args.scenario.resolve()?;
    if let Some(n) = args.nodes {
        scenario.nodes = n;
    }
    scenario.policy = *policies(args.policy, &file, &scenario).first().expect("one policy");
    let mode = match args.orthogonality {
        Some(ModeArg::Perfect) => Orthogonality::Perfect,
        Some(ModeArg::Imperfect) | Some(ModeArg::Both) => Orthogonality::Imperfect,
        None => scenario.orthogonality,
    };
    let sf = SpreadingFactor::new(args.sf).map_err(CliError::Scenario)?;
    let model = Model::new(&scenario).map_err(CliError::from_core)?;
    let terms = analytic::inspect(&model, sf, scenario.nodes, mode, &QuadratureSpec::default())
        .map_err(CliError::from_core)?;
    let mut s = String::from("j,weight,p_rx,p_cosf,p_intsf,capture,contribution\n");
    let mut total = 0.0;
    for t in &terms {
        total += t.contribution;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t.j, t.weight, t.p_rx, t.p_cosf, t.p_intsf, t.capture, t.contribution
        ));
    }
    log::info!("{sf}: N={} {mode} total {total}", scenario.nodes);
    Ok(s)
}

/// Run a parsed command, writing results to `stdout` unless `--out` is given.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Sweep(args) => {
            let (spec, scenario) = args.resolve()?;
            let rows = run_sweep(&spec, &scenario, &QuadratureSpec::default())?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(args.out.as_deref(), stdout, &buf)
        }
        Command::Compare(args) => {
            let rows = match &args.input {
                Some(path) => {
                    let file = fs::File::open(path).map_err(|source| CliError::Io {
                        context: "cannot read sweep",
                        path: path.clone(),
                        source,
                    })?;
                    read_csv(file)?
                }
                None => {
                    let (mut spec, scenario) = args.sweep.resolve()?;
                    spec.engines = vec![Engine::Analytic, Engine::MonteCarlo];
                    run_sweep(&spec, &scenario, &QuadratureSpec::default())?
                }
            };
            let report = compare_report(&rows);
            emit(args.sweep.out.as_deref(), stdout, report.to_string().as_bytes())
        }
        Command::Table(args) => {
            let (scenario, _) = args.resolve()?;
            emit(None, stdout, table(&scenario)?.as_bytes())
        }
        Command::Inspect(args) => emit(None, stdout, inspect(args)?.as_bytes()),
    }
}
