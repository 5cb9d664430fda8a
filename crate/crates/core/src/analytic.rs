//! Capture probabilities and throughput by numerical integration.
//!
//! Under Rayleigh fading the SNR of a device at distance `r` is exponential
//! with mean `c / r^alpha`. Conditioning on positions, a tagged device at
//! `r_i` beats noise plus interferers at `r_k` with threshold `q` with
//! probability
//!
//! ```text
//! exp(-q r_i^alpha / c) * prod_k 1 / (1 + q (r_i / r_k)^alpha)
//! ```
//!
//! and averaging each interferer over its radial density gives the kernel
//! `I(r_i) = ∫ h(r) / (1 + q (r_i/r)^alpha) dr` with `h(r) = 2r/R²`.
//!
//! Two families of functions live here:
//!
//! * `p_cap_*` return the mass-weighted integrals over the SF region with the
//!   un-normalised density `h`, so a region of mass `p` contributes at most
//!   `p` (resp. `p^j`, `p·(1-p)^(N-j)`).
//! * `conditional_*` divide every density by the mass of its region. These
//!   are tagged-device probabilities given the SF counts, and they are what
//!   [`p_success`] mixes with explicit binomial weights.

use alloc::vec::Vec;

use crate::binomial;
use crate::error::{Error, Result};
use crate::math::{self, atan, exp, sqrt, CompensatedSum};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::scenario::{
    J1Rule, Model, Orthogonality, RadialSet, Region, SpreadingFactor, SuccessMetric, SF_COUNT,
};

/// Deviation outside `[0, 1]` beyond which clamping is logged.
const CLAMP_WARN: f64 = 1e-9;

/// Antiderivative in `r` of `h(r) / (1 + q (r_i/r)^4)` with `h(r) = 2r/R²`:
///
/// `J(r_i, r) = (r/R)² − (r_i/R)² √q · atan(r² / (r_i² √q))`,
///
/// which vanishes at `r = 0`. Only defined for `alpha = 4`.
pub fn primitive_j(r_i: f64, r: f64, q: f64, radius: f64, alpha: f64) -> Result<f64> {
    if alpha != 4.0 {
        return Err(Error::UnsupportedExponent(alpha));
    }
    if r <= 0.0 || q.is_infinite() {
        return Ok(0.0);
    }
    let x = r / radius;
    if q == 0.0 || r_i == 0.0 {
        return Ok(x * x);
    }
    let s = sqrt(q);
    let y = r_i / radius;
    Ok(x * x - y * y * s * atan((r * r) / (r_i * r_i * s)))
}

/// How interferer kernels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPath {
    /// Closed form when `alpha = 4`, quadrature otherwise.
    #[default]
    Auto,
    /// Always integrate numerically.
    Quadrature,
}

/// `∫_set h(r) / (1 + q (r_i/r)^alpha) dr`, un-normalised.
pub fn interferer_integral(
    r_i: f64,
    set: &RadialSet,
    q: f64,
    model: &Model,
    quad: &QuadratureSpec,
    path: KernelPath,
) -> Result<f64> {
    let radius = model.radius();
    let alpha = model.alpha();
    if set.is_empty() {
        return Ok(0.0);
    }
    if q == 0.0 || r_i == 0.0 {
        return Ok(set.mass(radius));
    }
    if q.is_infinite() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for part in set.parts() {
        total += if alpha == 4.0 && path == KernelPath::Auto {
            primitive_j(r_i, part.hi, q, radius, alpha)? - primitive_j(r_i, part.lo, q, radius, alpha)?
        } else {
            let ri_a = math::powf(r_i, alpha);
            let r2 = radius * radius;
            integrate(
                |r| {
                    let ra = math::powf(r, alpha);
                    2.0 * r / r2 * ra / (ra + q * ri_a)
                },
                part.lo,
                part.hi,
                quad,
            )?
        };
    }
    Ok(total.clamp(0.0, set.mass(radius)))
}

/// Co-SF kernel `I(r_i)` over the region of `sf`.
pub fn interferer_integral_cosf(
    r_i: f64,
    sf: SpreadingFactor,
    model: &Model,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let set = RadialSet::single(model.region(sf));
    interferer_integral(r_i, &set, model.q_cosf(), model, quad, KernelPath::Auto)
}

/// Cross-SF kernel `Ĩ(r_i)` over the region of the other SFs.
pub fn interferer_integral_intsf(
    r_i: f64,
    sf: SpreadingFactor,
    model: &Model,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let set = model.cross_region(sf);
    interferer_integral(r_i, &set, model.q_kernel_intsf(sf), model, quad, KernelPath::Auto)
}

struct Kernel {
    set: RadialSet,
    q: f64,
    power: u64,
}

/// `∫_region exp(-threshold r^alpha / c) [K(r)]^power h(r) dr`, with every
/// density divided by its region mass when `normalized`.
fn capture_integral(
    model: &Model,
    region: Region,
    threshold: f64,
    kernel: Option<Kernel>,
    normalized: bool,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let radius = model.radius();
    let mass = region.mass(radius);
    if mass == 0.0 || threshold.is_infinite() {
        return Ok(0.0);
    }
    let kernel = kernel.filter(|k| k.power > 0);
    let kernel_scale = match &kernel {
        Some(k) if normalized => {
            let m = k.set.mass(radius);
            if m == 0.0 {
                // No room for interferers; such counts carry zero weight.
                return Ok(0.0);
            }
            1.0 / m
        }
        _ => 1.0,
    };
    let scale = if normalized { 1.0 / mass } else { 1.0 };
    let c = model.link().c;
    let alpha = model.alpha();
    let r2 = radius * radius;
    let mut failure = None;
    let value = integrate(
        |r| {
            let mut v = 2.0 * r / r2 * exp(-threshold * math::powf(r, alpha) / c);
            if let Some(k) = &kernel {
                if v > 0.0 {
                    match interferer_integral(r, &k.set, k.q, model, quad, KernelPath::Auto) {
                        Ok(i) => v *= math::powi((i * kernel_scale).min(1.0), k.power),
                        Err(e) => {
                            failure.get_or_insert(e);
                        }
                    }
                }
            }
            v
        },
        region.lo,
        region.hi,
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((value * scale).max(0.0))
}

fn cosf_kernel(model: &Model, sf: SpreadingFactor, power: u64) -> Kernel {
    Kernel { set: RadialSet::single(model.region(sf)), q: model.q_cosf(), power }
}

fn intsf_kernel(model: &Model, sf: SpreadingFactor, power: u64) -> Kernel {
    Kernel { set: model.cross_region(sf), q: model.q_kernel_intsf(sf), power }
}

/// Reception term: `∫_region exp(-q_SF r^alpha / c) h(r) dr`.
pub fn p_cap_rx(model: &Model, sf: SpreadingFactor, quad: &QuadratureSpec) -> Result<f64> {
    capture_integral(model, model.region(sf), model.q_sf(sf), None, false, quad)
}

/// Co-SF capture term with `j - 1` same-SF interferers.
pub fn p_cap_cosf(model: &Model, sf: SpreadingFactor, j: usize, quad: &QuadratureSpec) -> Result<f64> {
    let power = j.saturating_sub(1) as u64;
    capture_integral(model, model.region(sf), model.q_cosf(), Some(cosf_kernel(model, sf, power)), false, quad)
}

/// Inter-SF capture term with `nodes - j` devices on other SFs.
pub fn p_cap_intsf(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_counts(j, nodes)?;
    let power = (nodes - j) as u64;
    capture_integral(model, model.region(sf), model.q_isf(sf), Some(intsf_kernel(model, sf, power)), false, quad)
}

fn check_counts(j: usize, nodes: usize) -> Result<()> {
    if j == 0 || j > nodes {
        Err(Error::InvalidCount { j, nodes })
    } else {
        Ok(())
    }
}

/// `P(γ ≥ q_SF)` for a device uniform on the SF region.
pub fn conditional_rx(model: &Model, sf: SpreadingFactor, quad: &QuadratureSpec) -> Result<f64> {
    capture_integral(model, model.region(sf), model.q_sf(sf), None, true, quad)
}

/// Co-SF capture of a tagged device given `j` devices on its SF, all
/// uniform on the SF region.
pub fn conditional_cosf(model: &Model, sf: SpreadingFactor, j: usize, quad: &QuadratureSpec) -> Result<f64> {
    let power = j.saturating_sub(1) as u64;
    capture_integral(model, model.region(sf), model.q_cosf(), Some(cosf_kernel(model, sf, power)), true, quad)
}

/// Inter-SF capture of a tagged device given `j` of `nodes` devices on its
/// SF; the other `nodes - j` are uniform on the cross region.
pub fn conditional_intsf(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_counts(j, nodes)?;
    let power = (nodes - j) as u64;
    capture_integral(model, model.region(sf), model.q_isf(sf), Some(intsf_kernel(model, sf, power)), true, quad)
}

fn conditional_intsf_strict(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let power = (nodes - j) as u64;
    let threshold = model.q_isf(sf).max(model.q_sf(sf));
    capture_integral(model, model.region(sf), threshold, Some(intsf_kernel(model, sf, power)), true, quad)
}

/// Tagged-device probabilities for every SF count `j = 1..=nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureTriplet {
    pub p_rx: f64,
    /// `p_cosf[j - 1]`: `j - 1` co-SF interferers.
    pub p_cosf: Vec<f64>,
    /// `p_intsf[j - 1]`: `nodes - j` cross-SF interferers.
    pub p_intsf: Vec<f64>,
}

pub fn capture_triplet(
    model: &Model,
    sf: SpreadingFactor,
    nodes: usize,
    quad: &QuadratureSpec,
) -> Result<CaptureTriplet> {
    let p_rx = conditional_rx(model, sf, quad)?;
    let mut p_cosf = Vec::with_capacity(nodes);
    let mut p_intsf = Vec::with_capacity(nodes);
    for j in 1..=nodes {
        p_cosf.push(conditional_cosf(model, sf, j, quad)?);
        p_intsf.push(conditional_intsf(model, sf, j, nodes, quad)?);
    }
    Ok(CaptureTriplet { p_rx, p_cosf, p_intsf })
}

/// Success probability of a tagged SF-`sf` device when exactly `j` of the
/// `nodes` devices use that SF.
pub fn capture_given_count(
    model: &Model,
    sf: SpreadingFactor,
    j: usize,
    nodes: usize,
    mode: Orthogonality,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_counts(j, nodes)?;
    let rx = conditional_rx(model, sf, quad)?;
    let value = match (mode, j) {
        (Orthogonality::Perfect, 1) => rx,
        (Orthogonality::Perfect, _) => conditional_cosf(model, sf, j, quad)?.min(rx),
        (Orthogonality::Imperfect, 1) => match model.scenario().j1_rule {
            J1Rule::InterSfOnly => conditional_intsf(model, sf, 1, nodes, quad)?,
            J1Rule::Guarded => conditional_intsf(model, sf, 1, nodes, quad)?.min(rx),
            J1Rule::Strict => conditional_intsf_strict(model, sf, 1, nodes, quad)?,
        },
        (Orthogonality::Imperfect, _) => {
            let cosf = conditional_cosf(model, sf, j, quad)?;
            let intsf = conditional_intsf(model, sf, j, nodes, quad)?;
            cosf.min(intsf).min(rx)
        }
    };
    Ok(value)
}

fn metric_factor(metric: SuccessMetric, j: usize) -> f64 {
    match metric {
        SuccessMetric::PerPacket => 1.0,
        // Captures within one SF are disjoint, so the probability that one
        // of j devices gets through is j times the tagged probability.
        SuccessMetric::SlotCapture => j as f64,
    }
}

fn clamp_probability(p: f64, what: &str) -> f64 {
    if !(-CLAMP_WARN..=1.0 + CLAMP_WARN).contains(&p) {
        log::warn!("{what} = {p} clamped to [0, 1]");
    }
    p.clamp(0.0, 1.0)
}

/// `P_success(SF_m)`: the binomial mixture over the number `j` of devices on
/// `sf` of the tagged capture probability.
pub fn p_success(
    model: &Model,
    sf: SpreadingFactor,
    nodes: usize,
    mode: Orthogonality,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if nodes == 0 {
        return Err(Error::InvalidParameter { name: "nodes", value: 0.0 });
    }
    let p = model.p(sf);
    if p == 0.0 || model.region(sf).mass(model.radius()) == 0.0 {
        return Ok(0.0);
    }
    let metric = model.scenario().metric;
    let mut sum = CompensatedSum::new();
    for (j, w) in binomial::weights_descending(nodes as u64, 1..=nodes as u64, p) {
        let j = j as usize;
        let capture = capture_given_count(model, sf, j, nodes, mode, quad)?;
        sum.add(w * metric_factor(metric, j) * capture);
    }
    Ok(clamp_probability(sum.value(), "P_success"))
}

/// Per-SF success probabilities and the aggregate throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProfile {
    pub per_sf: [f64; SF_COUNT],
    pub throughput_bps: f64,
}

impl SuccessProfile {
    /// `τ = Σ_m R_m · P_success(SF_m)`, summed in SF order.
    pub fn from_per_sf(per_sf: [f64; SF_COUNT], bitrates: &[f64; SF_COUNT]) -> Self {
        let throughput_bps = per_sf.iter().zip(bitrates).fold(0.0, |acc, (p, r)| acc + r * p);
        Self { per_sf, throughput_bps }
    }
}

pub fn throughput(
    model: &Model,
    nodes: usize,
    mode: Orthogonality,
    quad: &QuadratureSpec,
) -> Result<SuccessProfile> {
    let mut per_sf = [0.0; SF_COUNT];
    for sf in SpreadingFactor::ALL {
        per_sf[sf.index()] = p_success(model, sf, nodes, mode, quad)?;
    }
    Ok(SuccessProfile::from_per_sf(per_sf, model.bitrates()))
}

/// One term of the binomial mixture, for debugging and oracle checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermInspection {
    pub j: usize,
    pub weight: f64,
    pub p_rx: f64,
    pub p_cosf: f64,
    pub p_intsf: f64,
    /// Capture probability actually used for this `j`.
    pub capture: f64,
    /// `weight × metric factor × capture`.
    pub contribution: f64,
}

pub fn inspect(
    model: &Model,
    sf: SpreadingFactor,
    nodes: usize,
    mode: Orthogonality,
    quad: &QuadratureSpec,
) -> Result<Vec<TermInspection>> {
    let p = model.p(sf);
    let metric = model.scenario().metric;
    let p_rx = conditional_rx(model, sf, quad)?;
    (1..=nodes)
        .map(|j| {
            let weight = binomial::pmf(nodes as u64, j as u64, p);
            let capture = capture_given_count(model, sf, j, nodes, mode, quad)?;
            Ok(TermInspection {
                j,
                weight,
                p_rx,
                p_cosf: conditional_cosf(model, sf, j, quad)?,
                p_intsf: conditional_intsf(model, sf, j, nodes, quad)?,
                capture,
                contribution: weight * metric_factor(metric, j) * capture,
            })
        })
        .collect()
}
