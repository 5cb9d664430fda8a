//! Sweeps over the number of devices, one CSV row per
//! `(N, policy, mode, engine)`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use loracap_core::{analytic, Model, Orthogonality, Policy, QuadratureSpec, Scenario, SF_COUNT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::parallel;

pub const DEFAULT_N_VALUES: [usize; 13] = [1, 2, 5, 10, 15, 20, 25, 35, 50, 75, 100, 150, 200];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Engine {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "montecarlo",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "montecarlo" | "mc" => Ok(Engine::MonteCarlo),
            _ => Err(format!("unknown engine `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub engines: Vec<Engine>,
    pub modes: Vec<Orthogonality>,
    pub policies: Vec<Policy>,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_values: DEFAULT_N_VALUES.to_vec(),
            engines: vec![Engine::Analytic, Engine::MonteCarlo],
            modes: Orthogonality::ALL.to_vec(),
            policies: vec![Policy::Distance],
            trials: 100_000,
            seed: 1,
            workers: 0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.n_values.is_empty() {
            return usage("n_values must not be empty");
        }
        if self.n_values[0] < 1 || self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return usage("n_values must be strictly increasing and at least 1");
        }
        if self.engines.is_empty() || self.modes.is_empty() || self.policies.is_empty() {
            return usage("engines, modes and policies must each have at least one entry");
        }
        if self.engines.contains(&Engine::MonteCarlo) && self.trials == 0 {
            return usage("trials must be at least 1");
        }
        Ok(())
    }
}

mod display_str {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| de::Error::custom(format!("unrecognised value `{s}`")))
    }
}

/// One CSV record. Column order is the stable schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(with = "display_str")]
    pub policy: Policy,
    #[serde(with = "display_str")]
    pub mode: Orthogonality,
    pub engine: Engine,
    pub tau_bps: f64,
    pub p_sf7: f64,
    pub p_sf8: f64,
    pub p_sf9: f64,
    pub p_sf10: f64,
    pub p_sf11: f64,
    pub p_sf12: f64,
    pub ci95: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl SweepRow {
    fn new(n: usize, policy: Policy, mode: Orthogonality, engine: Engine, tau: f64, p: [f64; SF_COUNT]) -> Self {
        Self {
            n,
            policy,
            mode,
            engine,
            tau_bps: tau,
            p_sf7: p[0],
            p_sf8: p[1],
            p_sf9: p[2],
            p_sf10: p[3],
            p_sf11: p[4],
            p_sf12: p[5],
            ci95: None,
            trials: None,
            seed: None,
        }
    }

    pub fn per_sf(&self) -> [f64; SF_COUNT] {
        [self.p_sf7, self.p_sf8, self.p_sf9, self.p_sf10, self.p_sf11, self.p_sf12]
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    n: usize,
    policy: Policy,
    mode: Orthogonality,
    engine: Engine,
}

fn jobs(spec: &SweepSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for &n in &spec.n_values {
        for &policy in &spec.policies {
            for &mode in &spec.modes {
                for &engine in &spec.engines {
                    out.push(Job { n, policy, mode, engine });
                }
            }
        }
    }
    out
}

fn run_job(job: Job, model: &Model, spec: &SweepSpec, quad: &QuadratureSpec) -> Result<SweepRow> {
    match job.engine {
        Engine::Analytic => {
            let prof = analytic::throughput(model, job.n, job.mode, quad).map_err(CliError::from_core)?;
            Ok(SweepRow::new(job.n, job.policy, job.mode, job.engine, prof.throughput_bps, prof.per_sf))
        }
        Engine::MonteCarlo => {
            let res = parallel::estimate(model, job.n, job.mode, spec.trials, spec.seed)?;
            let mut row =
                SweepRow::new(job.n, job.policy, job.mode, job.engine, res.throughput_bps, res.per_sf_success);
            row.ci95 = Some(res.ci95);
            row.trials = Some(res.trials);
            row.seed = Some(res.seed);
            Ok(row)
        }
    }
}

/// Rows ordered by N, then policy, mode and engine as listed in `spec`.
pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario, quad: &QuadratureSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let models = spec
        .policies
        .iter()
        .map(|&policy| {
            Model::new(&Scenario { policy, ..scenario.clone() }).map(|m| (policy, m)).map_err(CliError::from_core)
        })
        .collect::<Result<Vec<_>>>()?;
    let model_for = |p: Policy| &models.iter().find(|(q, _)| *q == p).expect("model per policy").1;
    let jobs = jobs(spec);
    let pool = parallel::pool(spec.workers)?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&job| run_job(job, model_for(job.policy), spec, quad))
            .collect::<Result<Vec<_>>>()
    })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits UTF-8"))
}
