//! Analytic-vs-Monte-Carlo comparison of a sweep CSV.

use std::collections::BTreeMap;
use std::fmt;

use loracap_core::{Orthogonality, Policy};

use crate::sweep::{Engine, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub policy: Policy,
    pub mode: Orthogonality,
    pub tau_analytic: f64,
    pub tau_mc: f64,
    pub ci95: f64,
    /// `|τ_analytic − τ_mc| / τ_mc`; 0 when both are 0.
    pub relative_error: f64,
    /// Analytic value outside the MC 95% interval.
    pub outside_ci: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub comparisons: Vec<Comparison>,
    /// Rows with no counterpart from the other engine.
    pub unmatched: Vec<SweepRow>,
}

impl Report {
    pub fn flagged(&self) -> usize {
        self.comparisons.iter().filter(|c| c.outside_ci).count()
    }

    /// Largest relative error over comparisons accepted by `filter`.
    pub fn max_relative_error(&self, filter: impl Fn(&Comparison) -> bool) -> Option<f64> {
        self.comparisons.iter().filter(|c| filter(c)).map(|c| c.relative_error).reduce(f64::max)
    }
}

fn relative_error(analytic: f64, mc: f64) -> f64 {
    if analytic == mc {
        0.0
    } else {
        (analytic - mc).abs() / mc.abs()
    }
}

pub fn compare_report(rows: &[SweepRow]) -> Report {
    type Key = (usize, Policy, Orthogonality);
    let mut groups: BTreeMap<Key, (Vec<&SweepRow>, Vec<&SweepRow>)> = BTreeMap::new();
    for row in rows {
        let entry = groups.entry((row.n, row.policy, row.mode)).or_default();
        match row.engine {
            Engine::Analytic => entry.0.push(row),
            Engine::MonteCarlo => entry.1.push(row),
        }
    }
    let mut report = Report::default();
    for ((n, policy, mode), (analytic, mc)) in groups {
        if analytic.len() == 1 && mc.len() == 1 {
            let (a, m) = (analytic[0], mc[0]);
            let ci95 = m.ci95.unwrap_or(0.0);
            report.comparisons.push(Comparison {
                n,
                policy,
                mode,
                tau_analytic: a.tau_bps,
                tau_mc: m.tau_bps,
                ci95,
                relative_error: relative_error(a.tau_bps, m.tau_bps),
                outside_ci: (a.tau_bps - m.tau_bps).abs() > ci95,
            });
        } else {
            report.unmatched.extend(analytic.into_iter().chain(mc).cloned());
        }
    }
    report
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>5} {:<12} {:<10} {:>12} {:>12} {:>10} {:>9} flag", "N", "policy", "mode", "analytic", "montecarlo", "ci95", "rel_err")?;
        for c in &self.comparisons {
            writeln!(
                f,
                "{:>5} {:<12} {:<10} {:>12.2} {:>12.2} {:>10.2} {:>8.2}% {}",
                c.n,
                c.policy,
                c.mode,
                c.tau_analytic,
                c.tau_mc,
                c.ci95,
                100.0 * c.relative_error,
                if c.outside_ci { "outside-ci" } else { "" }
            )?;
        }
        if let Some(max) = self.max_relative_error(|_| true) {
            writeln!(f, "max relative error: {:.2}%", 100.0 * max)?;
        }
        writeln!(f, "analytic outside MC 95% CI: {} of {}", self.flagged(), self.comparisons.len())?;
        for row in &self.unmatched {
            writeln!(f, "unmatched: N={} {} {} {}", row.n, row.policy, row.mode, row.engine)?;
        }
        Ok(())
    }
}
