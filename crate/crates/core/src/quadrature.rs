//! One-dimensional quadrature on bounded intervals.
//!
//! Both rules are built on the 15-point Gauss–Kronrod pair with its embedded
//! 7-point Gauss rule; the difference of the two gives the error estimate.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::fabs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    /// Global adaptive bisection of the interval with the largest error.
    Adaptive,
    /// `max_subdivisions` equal panels, no adaptivity.
    FixedPanels,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadRule,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rule: QuadRule::Adaptive, abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 64 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.abs_tol.is_nan() || self.abs_tol <= 0.0 {
            return Err(Error::InvalidParameter { name: "abs_tol", value: self.abs_tol });
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::InvalidParameter { name: "rel_tol", value: self.rel_tol });
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter { name: "max_subdivisions", value: 0.0 });
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * fabs(value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5]) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Single G7K15 panel on `[a, b]`.
pub fn gauss_kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Estimate { value: kronrod * half, error: fabs((kronrod - gauss) * half) }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

/// Integrate `f` over `[a, b]`. An empty or reversed interval integrates to 0.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_error(&mut f, a, b, spec).map(|e| e.value)
}

pub fn integrate_with_error<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if a.is_nan() || b.is_nan() || b <= a {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    match spec.rule {
        QuadRule::Adaptive => adaptive(f, a, b, spec),
        QuadRule::FixedPanels => fixed(f, a, b, spec),
    }
}

fn fixed<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let n = spec.max_subdivisions;
    let width = (b - a) / n as f64;
    let (mut value, mut error) = (0.0, 0.0);
    for i in 0..n {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n { b } else { lo + width };
        let e = gauss_kronrod_15(f, lo, hi);
        value += e.value;
        error += e.error;
    }
    if error > spec.tolerance(value) {
        return Err(Error::QuadratureNonConvergence { estimate: value, residual: error, subdivisions: n });
    }
    Ok(Estimate { value, error })
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let mut panels: Vec<Panel> = Vec::with_capacity(spec.max_subdivisions.min(256));
    panels.push(Panel { a, b, est: gauss_kronrod_15(f, a, b) });
    loop {
        let value: f64 = panels.iter().map(|p| p.est.value).sum();
        let error: f64 = panels.iter().map(|p| p.est.error).sum();
        if error <= spec.tolerance(value) {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                estimate: value,
                residual: error,
                subdivisions: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.est.error.total_cmp(&y.1.est.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let Panel { a: lo, b: hi, .. } = panels[worst];
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureNonConvergence {
                estimate: value,
                residual: error,
                subdivisions: panels.len(),
            });
        }
        panels[worst] = Panel { a: lo, b: mid, est: gauss_kronrod_15(f, lo, mid) };
        panels.push(Panel { a: mid, b: hi, est: gauss_kronrod_15(f, mid, hi) });
    }
}
