//! LoRa domain constants, link budget and spreading-factor geometry.
//!
//! Conventions: carrier frequency in MHz, distances in meters, powers in dBm
//! at the boundary and linear mW inside. Thresholds are stored in dB exactly
//! as tabulated and converted to linear when a [`Model`] is built.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math;

pub const SF_COUNT: usize = 6;

/// Spreading factor index, always in `7..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpreadingFactor(u8);

impl SpreadingFactor {
    pub const MIN: u8 = 7;
    pub const MAX: u8 = 12;
    pub const ALL: [SpreadingFactor; SF_COUNT] = [
        SpreadingFactor(7),
        SpreadingFactor(8),
        SpreadingFactor(9),
        SpreadingFactor(10),
        SpreadingFactor(11),
        SpreadingFactor(12),
    ];

    pub fn new(m: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&m) {
            Ok(Self(m))
        } else {
            Err(Error::InvalidSpreadingFactor(m))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Position in per-SF arrays (SF7 → 0).
    pub fn index(self) -> usize {
        (self.0 - Self::MIN) as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

impl fmt::Display for SpreadingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SF{}", self.0)
    }
}

/// Coding rate `4/(4+n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodingRate(u8);

impl CodingRate {
    pub const CR_4_5: CodingRate = CodingRate(1);

    pub fn new(n: u8) -> Result<Self> {
        if (1..=4).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::InvalidCodingRate(n))
        }
    }

    pub fn n(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        4.0 / (4.0 + self.0 as f64)
    }
}

impl Default for CodingRate {
    fn default() -> Self {
        Self::CR_4_5
    }
}

/// Tabulated per-SF radio constants at 125 kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfConstants {
    pub m: SpreadingFactor,
    pub sensitivity_dbm: f64,
    /// Reception (demodulation) SNR threshold.
    pub q_sf_db: f64,
    /// Inter-SF capture SINR threshold.
    pub q_isf_db: f64,
}

pub const SF_TABLE: [SfConstants; SF_COUNT] = [
    SfConstants { m: SpreadingFactor(7), sensitivity_dbm: -123.0, q_sf_db: -6.0, q_isf_db: -7.5 },
    SfConstants { m: SpreadingFactor(8), sensitivity_dbm: -126.0, q_sf_db: -9.0, q_isf_db: -9.0 },
    SfConstants { m: SpreadingFactor(9), sensitivity_dbm: -129.0, q_sf_db: -12.0, q_isf_db: -13.5 },
    SfConstants { m: SpreadingFactor(10), sensitivity_dbm: -132.0, q_sf_db: -15.0, q_isf_db: -15.0 },
    SfConstants { m: SpreadingFactor(11), sensitivity_dbm: -134.5, q_sf_db: -17.5, q_isf_db: -18.0 },
    SfConstants { m: SpreadingFactor(12), sensitivity_dbm: -137.0, q_sf_db: -20.0, q_isf_db: -22.5 },
];

/// Raw bit-rate `m·CR / (2^m / BW)` in bits per second.
pub fn bitrate(sf: SpreadingFactor, cr: CodingRate, bw_hz: f64) -> f64 {
    let m = sf.value();
    let symbol_time = (1u32 << m) as f64 / bw_hz;
    m as f64 * cr.value() / symbol_time
}

/// Thermal noise floor `-174 + NF + 10·log10(BW)` in dBm.
pub fn noise_power_dbm(nf_db: f64, bw_hz: f64) -> f64 {
    -174.0 + nf_db + 10.0 * math::log10(bw_hz)
}

/// Deterministic path-loss factor `A(fc) = (fc² · 10^-2.8)^-1`, fc in MHz,
/// to be divided by `d^alpha` with d in meters.
pub fn deterministic_loss(fc_mhz: f64) -> f64 {
    1.0 / (fc_mhz * fc_mhz * math::pow(10.0, -2.8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    /// Every device picks an SF uniformly at random.
    Random,
    /// The SF is set by the annulus the device lies in.
    Distance,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Distance, Policy::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Random => "sf-random",
            Policy::Distance => "sf-distance",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" | "sf-random" | "sf_random" => Ok(Policy::Random),
            "distance" | "sf-distance" | "sf_distance" => Ok(Policy::Distance),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orthogonality {
    /// No inter-SF interference.
    Perfect,
    /// Devices on other SFs interfere and must be captured against.
    Imperfect,
}

impl Orthogonality {
    pub const ALL: [Orthogonality; 2] = [Orthogonality::Perfect, Orthogonality::Imperfect];

    pub fn as_str(self) -> &'static str {
        match self {
            Orthogonality::Perfect => "perfect",
            Orthogonality::Imperfect => "imperfect",
        }
    }
}

impl fmt::Display for Orthogonality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orthogonality {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(Orthogonality::Perfect),
            "imperfect" => Ok(Orthogonality::Imperfect),
            _ => Err(()),
        }
    }
}

/// Linear co-SF capture threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoSfThreshold {
    /// 4, the customary rounding of 6 dB.
    Rounded,
    /// 10^0.6 ≈ 3.981.
    ExactDb,
    Linear(f64),
}

impl CoSfThreshold {
    pub fn linear(self) -> f64 {
        match self {
            CoSfThreshold::Rounded => 4.0,
            CoSfThreshold::ExactDb => math::db_to_linear(6.0),
            CoSfThreshold::Linear(q) => q,
        }
    }
}

/// How the analytic imperfect-orthogonality model treats a device that is
/// alone on its SF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum J1Rule {
    /// `min(P_rx, P_intSF)`: the inter-SF term where it dominates, never
    /// above the reception probability.
    Guarded,
    /// `P_intSF` alone (reception dropped).
    InterSfOnly,
    /// `P_intSF` multiplied pointwise by the conditional reception factor.
    Strict,
}

/// Threshold used inside the cross-SF interferer kernel `Ĩ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterSfKernel {
    /// `q_iSF_m`, the threshold of the inter-SF SINR event.
    InterSfThreshold,
    /// The co-SF threshold.
    CoSfThreshold,
}

/// What `P_success(SF_m)` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuccessMetric {
    /// Fraction of SF-m packets in a slot that get through (0 when the SF is
    /// unused).
    PerPacket,
    /// Probability that the gateway decodes some SF-m packet in a slot.
    SlotCapture,
}

impl SuccessMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SuccessMetric::PerPacket => "per-packet",
            SuccessMetric::SlotCapture => "slot-capture",
        }
    }
}

impl FromStr for SuccessMetric {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per-packet" | "packet" => Ok(SuccessMetric::PerPacket),
            "slot-capture" | "slot" => Ok(SuccessMetric::SlotCapture),
            _ => Err(()),
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radius_m: f64,
    pub nodes: usize,
    pub p0_dbm: f64,
    pub fc_mhz: f64,
    pub bw_hz: f64,
    pub alpha: f64,
    pub nf_db: f64,
    pub coding_rate: CodingRate,
    pub policy: Policy,
    pub orthogonality: Orthogonality,
    pub sf_table: [SfConstants; SF_COUNT],
    pub cosf_threshold: CoSfThreshold,
    pub j1_rule: J1Rule,
    pub intsf_kernel: InterSfKernel,
    pub metric: SuccessMetric,
}

impl Default for Scenario {
    /// 1 km cell, 14 dBm at 868 MHz, 125 kHz, alpha = 4, NF = 6 dB, CR 4/5.
    fn default() -> Self {
        Self {
            radius_m: 1000.0,
            nodes: 10,
            p0_dbm: 14.0,
            fc_mhz: 868.0,
            bw_hz: 125_000.0,
            alpha: 4.0,
            nf_db: 6.0,
            coding_rate: CodingRate::CR_4_5,
            policy: Policy::Distance,
            orthogonality: Orthogonality::Imperfect,
            sf_table: SF_TABLE,
            cosf_threshold: CoSfThreshold::Rounded,
            j1_rule: J1Rule::Guarded,
            intsf_kernel: InterSfKernel::InterSfThreshold,
            metric: SuccessMetric::PerPacket,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, value: f64, ok: bool) -> Result<()> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        }
        check("radius_m", self.radius_m, self.radius_m > 0.0)?;
        check("nodes", self.nodes as f64, self.nodes >= 1)?;
        check("alpha", self.alpha, self.alpha > 2.0)?;
        check("bw_hz", self.bw_hz, self.bw_hz > 0.0)?;
        check("fc_mhz", self.fc_mhz, self.fc_mhz > 0.0)?;
        check("p0_dbm", self.p0_dbm, true)?;
        check("nf_db", self.nf_db, true)?;
        let q = self.cosf_threshold.linear();
        if q.is_nan() || q < 0.0 {
            return Err(Error::InvalidParameter { name: "q_cosf", value: q });
        }
        for (i, row) in self.sf_table.iter().enumerate() {
            if row.m.index() != i {
                return Err(Error::InvalidParameter { name: "sf_table", value: row.m.value() as f64 });
            }
            check("sensitivity_dbm", row.sensitivity_dbm, true)?;
            for (name, v) in [("q_sf_db", row.q_sf_db), ("q_isf_db", row.q_isf_db)] {
                if v.is_nan() {
                    return Err(Error::InvalidParameter { name, value: v });
                }
            }
        }
        Ok(())
    }

    pub fn p0_mw(&self) -> f64 {
        math::db_to_linear(self.p0_dbm)
    }
}

/// Derived radio constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// AWGN power in mW.
    pub noise_mw: f64,
    /// `A(fc)`.
    pub a_fc: f64,
    /// Path-loss constant `P0·A(fc)/σ²`, so that the mean SNR is `c / r^alpha`.
    pub c: f64,
}

impl LinkBudget {
    pub fn new(scenario: &Scenario) -> Self {
        let noise_mw = math::db_to_linear(noise_power_dbm(scenario.nf_db, scenario.bw_hz));
        let a_fc = deterministic_loss(scenario.fc_mhz);
        let c = scenario.p0_mw() * a_fc / noise_mw;
        Self { noise_mw, a_fc, c }
    }

    pub fn mean_snr(&self, r: f64, alpha: f64) -> f64 {
        self.c / math::powf(r, alpha)
    }
}

/// SF boundaries `l_6..=l_12` in meters, with `l_6 = 0` and `l_12 = R`.
pub fn distance_thresholds(scenario: &Scenario) -> Result<[f64; SF_COUNT + 1]> {
    let numerator = scenario.p0_mw() * deterministic_loss(scenario.fc_mhz);
    let mut l = [0.0; SF_COUNT + 1];
    for (i, row) in scenario.sf_table.iter().enumerate().take(SF_COUNT - 1) {
        let theta = math::db_to_linear(row.sensitivity_dbm);
        let lm = math::pow(numerator / theta, 1.0 / scenario.alpha);
        if lm > scenario.radius_m {
            return Err(Error::CellTooLarge {
                sf: row.m,
                threshold_m: lm,
                radius_m: scenario.radius_m,
            });
        }
        if lm < l[i] {
            return Err(Error::InvalidParameter { name: "sensitivity_dbm", value: row.sensitivity_dbm });
        }
        l[i + 1] = lm;
    }
    l[SF_COUNT] = scenario.radius_m;
    Ok(l)
}

/// Receiver sensitivity (dBm) that places an SF boundary at `l_m`; the
/// inverse of the threshold formula.
pub fn sensitivity_for_threshold(scenario: &Scenario, l_m: f64) -> f64 {
    let numerator = scenario.p0_mw() * deterministic_loss(scenario.fc_mhz);
    math::linear_to_db(numerator / math::powf(l_m, scenario.alpha))
}

/// Radial interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Probability that a device uniform on the disc of radius `radius` lands
    /// here.
    pub fn mass(&self, radius: f64) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.hi * self.hi - self.lo * self.lo) / (radius * radius)
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }
}

/// Union of at most two disjoint radial intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSet {
    parts: [Region; 2],
    len: usize,
}

impl RadialSet {
    pub fn single(region: Region) -> Self {
        let mut set = Self { parts: [Region::new(0.0, 0.0); 2], len: 0 };
        set.push(region);
        set
    }

    /// `[0, radius]` minus `hole`.
    pub fn disc_without(radius: f64, hole: Region) -> Self {
        let mut set = Self { parts: [Region::new(0.0, 0.0); 2], len: 0 };
        if hole.is_empty() {
            set.push(Region::new(0.0, radius));
        } else {
            set.push(Region::new(0.0, hole.lo));
            set.push(Region::new(hole.hi, radius));
        }
        set
    }

    fn push(&mut self, region: Region) {
        if !region.is_empty() {
            self.parts[self.len] = region;
            self.len += 1;
        }
    }

    pub fn parts(&self) -> &[Region] {
        &self.parts[..self.len]
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mass(&self, radius: f64) -> f64 {
        self.parts().iter().map(|r| r.mass(radius)).sum()
    }
}

/// Per-SF selection probabilities and the radial domain of each SF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationProfile {
    pub p: [f64; SF_COUNT],
    pub region: [Region; SF_COUNT],
}

pub fn allocation_profile(scenario: &Scenario) -> Result<AllocationProfile> {
    let r = scenario.radius_m;
    match scenario.policy {
        Policy::Random => Ok(AllocationProfile {
            p: [1.0 / SF_COUNT as f64; SF_COUNT],
            region: [Region::new(0.0, r); SF_COUNT],
        }),
        Policy::Distance => {
            let l = distance_thresholds(scenario)?;
            let mut p = [0.0; SF_COUNT];
            let mut region = [Region::new(0.0, 0.0); SF_COUNT];
            for i in 0..SF_COUNT {
                region[i] = Region::new(l[i], l[i + 1]);
                p[i] = region[i].mass(r);
            }
            Ok(AllocationProfile { p, region })
        }
    }
}

/// Per-SF parameters resolved for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfParams {
    pub m: SpreadingFactor,
    pub bitrate: f64,
    pub sensitivity_dbm: f64,
    pub q_sf_db: f64,
    pub q_isf_db: f64,
    /// `[l_{m-1}, l_m]`; only meaningful under the distance policy.
    pub annulus: Region,
}

pub fn sf_params(scenario: &Scenario) -> Result<[SfParams; SF_COUNT]> {
    let l = distance_thresholds(scenario)?;
    Ok(core::array::from_fn(|i| {
        let row = scenario.sf_table[i];
        SfParams {
            m: row.m,
            bitrate: bitrate(row.m, scenario.coding_rate, scenario.bw_hz),
            sensitivity_dbm: row.sensitivity_dbm,
            q_sf_db: row.q_sf_db,
            q_isf_db: row.q_isf_db,
            annulus: Region::new(l[i], l[i + 1]),
        }
    }))
}

/// A validated scenario together with everything derived from it. Both
/// engines run off this.
#[derive(Debug, Clone)]
pub struct Model {
    scenario: Scenario,
    link: LinkBudget,
    thresholds: [f64; SF_COUNT + 1],
    profile: AllocationProfile,
    bitrates: [f64; SF_COUNT],
    q_sf: [f64; SF_COUNT],
    q_isf: [f64; SF_COUNT],
    q_cosf: f64,
}

impl Model {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let thresholds = distance_thresholds(scenario)?;
        let profile = allocation_profile(scenario)?;
        let table = &scenario.sf_table;
        Ok(Self {
            link: LinkBudget::new(scenario),
            thresholds,
            profile,
            bitrates: core::array::from_fn(|i| {
                bitrate(SpreadingFactor::from_index(i), scenario.coding_rate, scenario.bw_hz)
            }),
            q_sf: core::array::from_fn(|i| math::db_to_linear(table[i].q_sf_db)),
            q_isf: core::array::from_fn(|i| math::db_to_linear(table[i].q_isf_db)),
            q_cosf: scenario.cosf_threshold.linear(),
            scenario: scenario.clone(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn link(&self) -> &LinkBudget {
        &self.link
    }

    pub fn profile(&self) -> &AllocationProfile {
        &self.profile
    }

    pub fn thresholds(&self) -> &[f64; SF_COUNT + 1] {
        &self.thresholds
    }

    pub fn bitrates(&self) -> &[f64; SF_COUNT] {
        &self.bitrates
    }

    pub fn radius(&self) -> f64 {
        self.scenario.radius_m
    }

    pub fn alpha(&self) -> f64 {
        self.scenario.alpha
    }

    pub fn policy(&self) -> Policy {
        self.scenario.policy
    }

    pub fn q_sf(&self, sf: SpreadingFactor) -> f64 {
        self.q_sf[sf.index()]
    }

    pub fn q_isf(&self, sf: SpreadingFactor) -> f64 {
        self.q_isf[sf.index()]
    }

    pub fn q_cosf(&self) -> f64 {
        self.q_cosf
    }

    /// Threshold inside the cross-SF kernel for `sf`.
    pub fn q_kernel_intsf(&self, sf: SpreadingFactor) -> f64 {
        match self.scenario.intsf_kernel {
            InterSfKernel::InterSfThreshold => self.q_isf(sf),
            InterSfKernel::CoSfThreshold => self.q_cosf,
        }
    }

    /// Selection probability of `sf`.
    pub fn p(&self, sf: SpreadingFactor) -> f64 {
        self.profile.p[sf.index()]
    }

    /// Where SF-`m` devices live.
    pub fn region(&self, sf: SpreadingFactor) -> Region {
        self.profile.region[sf.index()]
    }

    /// Where devices on other SFs live: the disc minus the annulus under the
    /// distance policy, the whole disc under the random one.
    pub fn cross_region(&self, sf: SpreadingFactor) -> RadialSet {
        match self.scenario.policy {
            Policy::Distance => RadialSet::disc_without(self.radius(), self.region(sf)),
            Policy::Random => RadialSet::single(Region::new(0.0, self.radius())),
        }
    }

    pub fn mean_snr(&self, r: f64) -> f64 {
        self.link.mean_snr(r, self.scenario.alpha)
    }

    /// SF of a device at distance `r` under the distance policy. Boundaries
    /// belong to the inner annulus.
    pub fn sf_for_distance(&self, r: f64) -> Result<SpreadingFactor> {
        let radius = self.radius();
        if !(0.0..=radius).contains(&r) {
            return Err(Error::DistanceOutOfCell { r, radius_m: radius });
        }
        let l = &self.thresholds;
        let idx = (1..=SF_COUNT).find(|&k| r <= l[k]).unwrap_or(SF_COUNT);
        Ok(SpreadingFactor::from_index(idx - 1))
    }
}
