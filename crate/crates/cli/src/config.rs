//! `key = value` scenario files.
//!
//! Blank lines and lines starting with `#` are skipped. Recognised keys:
//!
//! | key             | meaning                                   |
//! |-----------------|-------------------------------------------|
//! | `radius_m`      | cell radius in meters                     |
//! | `nodes`         | number of end-devices                     |
//! | `p0_dbm`        | transmit power                            |
//! | `fc_mhz`        | carrier frequency                         |
//! | `bw_hz`         | bandwidth                                 |
//! | `alpha`         | path-loss exponent                        |
//! | `nf_db`         | receiver noise figure                     |
//! | `cr_n`          | coding rate `4/(4+n)`, n in 1..=4         |
//! | `policy`        | `sf-random` or `sf-distance`              |
//! | `orthogonality` | `perfect` or `imperfect`                  |
//! | `metric`        | `per-packet` or `slot-capture`            |
//! | `j1_rule`       | `guarded`, `inter-sf-only` or `strict`    |
//! | `intsf_kernel`  | `inter-sf` or `co-sf`                     |
//! | `q_cosf`        | `rounded`, `exact-db` or a linear number  |

use std::str::FromStr;

use loracap_core::{CoSfThreshold, CodingRate, InterSfKernel, J1Rule, Policy, Scenario, SuccessMetric};

use crate::error::{CliError, Result};

/// Keys present in a parsed file, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<(usize, String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(CliError::Config { line, message: format!("expected `key = value`, got `{trimmed}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config { line, message: format!("unknown key `{key}`") });
            }
            entries.push((line, key.to_string(), value.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|(_, k, _)| k == key)
    }

    /// Apply every entry on top of `scenario`.
    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        for (line, key, value) in &self.entries {
            apply_key(scenario, key, value).map_err(|message| CliError::Config { line: *line, message })?;
        }
        Ok(())
    }
}

pub const KEYS: [&str; 14] = [
    "radius_m",
    "nodes",
    "p0_dbm",
    "fc_mhz",
    "bw_hz",
    "alpha",
    "nf_db",
    "cr_n",
    "policy",
    "orthogonality",
    "metric",
    "j1_rule",
    "intsf_kernel",
    "q_cosf",
];

fn number<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("key `{key}`: cannot parse `{value}` as a number"))
}

fn choice<T: FromStr>(key: &str, value: &str, expected: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("key `{key}`: `{value}` is not one of {expected}"))
}

/// Set one key; the error message names the key.
pub fn apply_key(s: &mut Scenario, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "radius_m" => s.radius_m = number(key, value)?,
        "nodes" => s.nodes = number(key, value)?,
        "p0_dbm" => s.p0_dbm = number(key, value)?,
        "fc_mhz" => s.fc_mhz = number(key, value)?,
        "bw_hz" => s.bw_hz = number(key, value)?,
        "alpha" => s.alpha = number(key, value)?,
        "nf_db" => s.nf_db = number(key, value)?,
        "cr_n" => {
            let n: u8 = number(key, value)?;
            s.coding_rate = CodingRate::new(n).map_err(|e| format!("key `{key}`: {e}"))?;
        }
        "policy" => s.policy = choice::<Policy>(key, value, "sf-random, sf-distance")?,
        "orthogonality" => s.orthogonality = choice(key, value, "perfect, imperfect")?,
        "metric" => s.metric = choice::<SuccessMetric>(key, value, "per-packet, slot-capture")?,
        "j1_rule" => {
            s.j1_rule = match value.to_ascii_lowercase().as_str() {
                "guarded" => J1Rule::Guarded,
                "inter-sf-only" => J1Rule::InterSfOnly,
                "strict" => J1Rule::Strict,
                _ => return Err(format!("key `{key}`: `{value}` is not one of guarded, inter-sf-only, strict")),
            }
        }
        "intsf_kernel" => {
            s.intsf_kernel = match value.to_ascii_lowercase().as_str() {
                "inter-sf" => InterSfKernel::InterSfThreshold,
                "co-sf" => InterSfKernel::CoSfThreshold,
                _ => return Err(format!("key `{key}`: `{value}` is not one of inter-sf, co-sf")),
            }
        }
        "q_cosf" => {
            s.cosf_threshold = match value.to_ascii_lowercase().as_str() {
                "rounded" => CoSfThreshold::Rounded,
                "exact-db" => CoSfThreshold::ExactDb,
                _ => CoSfThreshold::Linear(number(key, value)?),
            }
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parse a file's text into a scenario on top of the defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut s = Scenario::default();
    ConfigFile::parse(text)?.apply(&mut s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_spec_keys() {
        let text = "\
# reference scenario
radius_m = 1000
nodes = 25
p0_dbm = 14
fc_mhz = 868
bw_hz = 125000
alpha = 4
nf_db = 6
cr_n = 1
policy = sf-random
orthogonality = perfect
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.nodes, 25);
        assert_eq!(s.policy, Policy::Random);
        assert_eq!(s.orthogonality, loracap_core::Orthogonality::Perfect);
        assert_eq!(s.radius_m, 1000.0);
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse_scenario("nodes = 3\n\nalpha = four\n").unwrap_err();
        match err {
            CliError::Config { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("alpha"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let err = parse_scenario("radius = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config { line: 1, ref message } if message.contains("radius")));
        let err = parse_scenario("cr_n = 7\n").unwrap_err();
        assert!(matches!(err, CliError::Config { line: 1, ref message } if message.contains("cr_n")));
        assert!(parse_scenario("just text\n").is_err());
    }

    #[test]
    fn model_switches() {
        let s = parse_scenario("metric = slot-capture\nj1_rule = strict\nintsf_kernel = co-sf\nq_cosf = exact-db\n").unwrap();
        assert_eq!(s.metric, SuccessMetric::SlotCapture);
        assert_eq!(s.j1_rule, J1Rule::Strict);
        assert_eq!(s.intsf_kernel, InterSfKernel::CoSfThreshold);
        assert_eq!(s.cosf_threshold, CoSfThreshold::ExactDb);
        let s = parse_scenario("q_cosf = 3.5").unwrap();
        assert_eq!(s.cosf_threshold, CoSfThreshold::Linear(3.5));
    }
}
