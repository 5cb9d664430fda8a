//! Monte Carlo oracle for the capture model.
//!
//! One trial is one slot in which all `N` devices transmit fully overlapped.
//! Positions are uniform on the disc, fading gains are unit-mean
//! exponential, and each device is checked against the reception, co-SF and
//! (in imperfect mode) inter-SF conditions directly.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial
//! index)`, and trials are grouped in fixed-size batches whose accumulators
//! are merged in batch order. The result is therefore independent of how
//! batches are scheduled across threads.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math::{self, log, sqrt};
use crate::scenario::{Model, Orthogonality, Policy, RadialSet, Region, SpreadingFactor, SuccessMetric, SF_COUNT};

/// Trials per batch. Part of the determinism contract: changing it changes
/// the floating-point reduction order.
pub const BATCH_SIZE: u64 = 1024;

/// Uniform draw on `(0, 1]`.
pub fn uniform_open_closed<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse CDF of `h(r) = 2r/R²`.
pub fn position_from_uniform(u: f64, radius: f64) -> f64 {
    radius * sqrt(u)
}

pub fn draw_positions<R: RngCore + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| position_from_uniform(uniform_open_closed(rng), radius)).collect()
}

/// Rayleigh power gain `|h|²`, unit-mean exponential.
pub fn draw_fading<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -log(uniform_open_closed(rng))
}

/// Uniform position inside `region` (density proportional to `r`).
fn draw_in_region<R: RngCore + ?Sized>(region: Region, rng: &mut R) -> f64 {
    let (lo2, hi2) = (region.lo * region.lo, region.hi * region.hi);
    sqrt(lo2 + (hi2 - lo2) * uniform_open_closed(rng))
}

fn draw_in_set<R: RngCore + ?Sized>(set: &RadialSet, radius: f64, rng: &mut R) -> f64 {
    let parts = set.parts();
    let mut u = uniform_open_closed(rng) * set.mass(radius);
    for part in parts {
        let m = part.mass(radius);
        if u <= m {
            return draw_in_region(*part, rng);
        }
        u -= m;
    }
    draw_in_region(parts[parts.len() - 1], rng)
}

pub fn assign_sf<R: RngCore + ?Sized>(
    distances: &[f64],
    model: &Model,
    rng: &mut R,
) -> Result<Vec<SpreadingFactor>> {
    match model.policy() {
        Policy::Distance => distances.iter().map(|&r| model.sf_for_distance(r)).collect(),
        Policy::Random => distances
            .iter()
            .map(|&r| {
                if !(0.0..=model.radius()).contains(&r) {
                    return Err(Error::DistanceOutOfCell { r, radius_m: model.radius() });
                }
                let k = (uniform_open_closed(rng) * SF_COUNT as f64 - 1e-300) as usize;
                Ok(SpreadingFactor::from_index(k.min(SF_COUNT - 1)))
            })
            .collect(),
    }
}

/// One simulated end-device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRealization {
    pub r: f64,
    pub g: f64,
    pub sf: SpreadingFactor,
    /// Instantaneous SNR `c·g / r^alpha`.
    pub snr: f64,
}

impl NodeRealization {
    pub fn new(model: &Model, r: f64, g: f64, sf: SpreadingFactor) -> Self {
        Self { r, g, sf, snr: model.link().c * g / math::powf(r, model.alpha()) }
    }
}

/// Draw positions, then fading gains, then SFs.
pub fn realize<R: RngCore + ?Sized>(model: &Model, n: usize, rng: &mut R) -> Result<Vec<NodeRealization>> {
    let positions = draw_positions(n, model.radius(), rng);
    let gains: Vec<f64> = (0..n).map(|_| draw_fading(rng)).collect();
    let sfs = assign_sf(&positions, model, rng)?;
    Ok(positions
        .into_iter()
        .zip(gains)
        .zip(sfs)
        .map(|((r, g), sf)| NodeRealization::new(model, r, g, sf))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: Vec<bool>,
    pub successes: [u32; SF_COUNT],
    pub devices: [u32; SF_COUNT],
    /// Devices that passed the co-SF test while sharing their SF.
    pub cosf_captures: [u32; SF_COUNT],
}

impl TrialOutcome {
    /// Per-SF success value under `metric`.
    pub fn per_sf(&self, metric: SuccessMetric) -> [f64; SF_COUNT] {
        core::array::from_fn(|k| match metric {
            SuccessMetric::PerPacket if self.devices[k] > 0 => {
                self.successes[k] as f64 / self.devices[k] as f64
            }
            SuccessMetric::PerPacket => 0.0,
            SuccessMetric::SlotCapture => (self.successes[k] > 0) as u8 as f64,
        })
    }

    /// Whether some SF saw two simultaneous co-SF captures.
    pub fn multi_capture(&self) -> bool {
        self.cosf_captures.iter().any(|&c| c > 1)
    }
}

/// Apply the capture conditions to one slot.
///
/// A device succeeds iff its SNR clears the reception threshold, its SINR
/// against same-SF devices clears the co-SF threshold (only checked when it
/// shares its SF) and, in imperfect mode, its SINR against devices on other
/// SFs clears the inter-SF threshold of its SF.
pub fn evaluate_trial(nodes: &[NodeRealization], model: &Model, mode: Orthogonality) -> TrialOutcome {
    let mut sf_power = [0.0; SF_COUNT];
    let mut devices = [0u32; SF_COUNT];
    for n in nodes {
        sf_power[n.sf.index()] += n.snr;
        devices[n.sf.index()] += 1;
    }
    let total: f64 = sf_power.iter().sum();
    let q_cosf = model.q_cosf();
    let mut successes = [0u32; SF_COUNT];
    let mut cosf_captures = [0u32; SF_COUNT];
    let success = nodes
        .iter()
        .map(|n| {
            let k = n.sf.index();
            let same = (sf_power[k] - n.snr).max(0.0);
            let rx = n.snr >= model.q_sf(n.sf);
            let shared = devices[k] > 1;
            let cosf = !shared || n.snr >= q_cosf * (same + 1.0);
            if shared && cosf {
                cosf_captures[k] += 1;
            }
            let intsf = match mode {
                Orthogonality::Perfect => true,
                Orthogonality::Imperfect => {
                    let cross = (total - sf_power[k]).max(0.0);
                    n.snr >= model.q_isf(n.sf) * (cross + 1.0)
                }
            };
            let ok = rx && cosf && intsf;
            if ok {
                successes[k] += 1;
            }
            ok
        })
        .collect();
    TrialOutcome { success, successes, devices, cosf_captures }
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            sqrt(self.variance() / self.count as f64)
        }
    }
}

/// Mergeable per-batch statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Accumulator {
    pub per_sf: [Welford; SF_COUNT],
    pub throughput: Welford,
    pub multi_capture_events: u64,
}

impl Accumulator {
    pub fn push(&mut self, outcome: &TrialOutcome, model: &Model) {
        let values = outcome.per_sf(model.scenario().metric);
        let mut tau = 0.0;
        for (k, v) in values.iter().enumerate() {
            self.per_sf[k].push(*v);
            tau += model.bitrates()[k] * v;
        }
        self.throughput.push(tau);
        if outcome.multi_capture() {
            self.multi_capture_events += 1;
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.per_sf.iter_mut().zip(other.per_sf.iter()) {
            a.merge(b);
        }
        self.throughput.merge(&other.throughput);
        self.multi_capture_events += other.multi_capture_events;
    }
}

/// Monte Carlo estimate of the per-SF success probabilities and throughput.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputResult {
    pub per_sf_success: [f64; SF_COUNT],
    pub per_sf_std_error: [f64; SF_COUNT],
    pub throughput_bps: f64,
    pub throughput_std_error: f64,
    /// Half-width of the normal-approximation 95% interval on the throughput.
    pub ci95: f64,
    pub trials: u64,
    pub seed: u64,
    pub multi_capture_events: u64,
}

impl ThroughputResult {
    pub fn from_accumulator(acc: &Accumulator, seed: u64) -> Self {
        let se = acc.throughput.std_error();
        Self {
            per_sf_success: core::array::from_fn(|k| acc.per_sf[k].mean),
            per_sf_std_error: core::array::from_fn(|k| acc.per_sf[k].std_error()),
            throughput_bps: acc.throughput.mean,
            throughput_std_error: se,
            ci95: 1.96 * se,
            trials: acc.throughput.count,
            seed,
            multi_capture_events: acc.multi_capture_events,
        }
    }
}

/// Independent random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn batch_count(trials: u64) -> u64 {
    trials.div_ceil(BATCH_SIZE)
}

/// Run batch `batch` of a `trials`-trial experiment.
pub fn run_batch(
    model: &Model,
    nodes: usize,
    mode: Orthogonality,
    seed: u64,
    batch: u64,
    trials: u64,
) -> Result<Accumulator> {
    let start = batch * BATCH_SIZE;
    let end = (start + BATCH_SIZE).min(trials);
    let mut acc = Accumulator::default();
    for t in start..end {
        let mut rng = trial_rng(seed, t);
        let realization = realize(model, nodes, &mut rng)?;
        let outcome = evaluate_trial(&realization, model, mode);
        acc.push(&outcome, model);
    }
    Ok(acc)
}

/// Merge batch accumulators in batch order.
pub fn reduce_batches<I: IntoIterator<Item = Accumulator>>(batches: I) -> Accumulator {
    batches.into_iter().fold(Accumulator::default(), |mut acc, b| {
        acc.merge(&b);
        acc
    })
}

/// Sequential estimate; bit-identical to any parallel schedule that runs the
/// same batches and reduces them with [`reduce_batches`].
pub fn estimate(
    model: &Model,
    nodes: usize,
    mode: Orthogonality,
    trials: u64,
    seed: u64,
) -> Result<ThroughputResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter { name: "trials", value: 0.0 });
    }
    if nodes == 0 {
        return Err(Error::InvalidParameter { name: "nodes", value: 0.0 });
    }
    let batches = (0..batch_count(trials))
        .map(|b| run_batch(model, nodes, mode, seed, b, trials))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThroughputResult::from_accumulator(&reduce_batches(batches), seed))
}

/// Condition outcomes of a tagged device given exactly `j` of `nodes`
/// devices on its SF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedEvents {
    /// `γ ≥ q_SF`.
    pub rx: bool,
    /// `γ ≥ q_coSF (Σ co-SF γ + 1)`; with `j = 1` this is `γ ≥ q_coSF`.
    pub cosf: bool,
    /// `γ ≥ q_iSF (Σ cross-SF γ + 1)`.
    pub intsf: bool,
}

/// One trial of the count-conditioned oracle: the tagged device and its
/// `j - 1` co-SF peers are uniform on the SF region, the other `nodes - j`
/// uniform on the cross region.
pub fn conditioned_trial<R: RngCore + ?Sized>(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    rng: &mut R,
) -> Result<TaggedEvents> {
    if j == 0 || j > nodes {
        return Err(Error::InvalidCount { j, nodes });
    }
    let region = model.region(sf);
    let cross = model.cross_region(sf);
    if region.is_empty() || (nodes > j && cross.is_empty()) {
        return Err(Error::InvalidCount { j, nodes });
    }
    let snr = |r: f64, rng: &mut R| model.link().c * draw_fading(rng) / math::powf(r, model.alpha());
    let r_tag = draw_in_region(region, rng);
    let tagged = snr(r_tag, rng);
    let mut co = 0.0;
    for _ in 1..j {
        let r = draw_in_region(region, rng);
        co += snr(r, rng);
    }
    let mut other = 0.0;
    for _ in j..nodes {
        let r = draw_in_set(&cross, model.radius(), rng);
        other += snr(r, rng);
    }
    Ok(TaggedEvents {
        rx: tagged >= model.q_sf(sf),
        cosf: tagged >= model.q_cosf() * (co + 1.0),
        intsf: tagged >= model.q_isf(sf) * (other + 1.0),
    })
}

/// Sample proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn mean(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Binomial standard error, floored at one hit so that estimates of
    /// zero still carry an uncertainty.
    pub fn std_error(&self) -> f64 {
        let p = self.mean();
        let n = self.trials as f64;
        sqrt((p * (1.0 - p)).max(1.0 / n) / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedEstimate {
    pub rx: Proportion,
    pub cosf: Proportion,
    pub intsf: Proportion,
    /// All three conditions at once.
    pub joint: Proportion,
}

pub fn estimate_conditioned(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    trials: u64,
    seed: u64,
) -> Result<ConditionedEstimate> {
    let mut hits = [0u64; 4];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let ev = conditioned_trial(model, sf, j, nodes, &mut rng)?;
        hits[0] += ev.rx as u64;
        hits[1] += ev.cosf as u64;
        hits[2] += ev.intsf as u64;
        hits[3] += (ev.rx && ev.cosf && ev.intsf) as u64;
    }
    let p = |h| Proportion { hits: h, trials };
    Ok(ConditionedEstimate { rx: p(hits[0]), cosf: p(hits[1]), intsf: p(hits[2]), joint: p(hits[3]) })
}
