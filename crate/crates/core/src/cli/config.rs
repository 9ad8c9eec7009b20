//! Flat `key=value` campaign configuration files.

use std::collections::HashSet;

use crate::bernstein::BernsteinFunction;
use crate::error::{Error, Result};
use crate::operators::IdealNorm;
use crate::verify::{CampaignConfig, CheckerKind};

/// Keys accepted in a configuration file.
pub const CONFIG_KEYS: &[&str] = &[
    "checker",
    "psi",
    "dim",
    "arity",
    "norm",
    "trials",
    "seed",
    "kappa_max",
    "omega",
    "output",
    "format",
    "quad.delta_split",
    "quad.panels_per_decade",
    "quad.nodes_per_panel",
    "quad.origin_cutoff",
    "quad.tail_truncation_tol",
    "quad.target_tol",
    "quad.max_truncation",
];

const LIST_KEYS: &[&str] = &["checker", "psi", "dim", "arity", "norm"];

fn number<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("line {line}: `{key}` expects a number, got `{v}`")))
}

/// Parse a configuration. Blank lines and `#` comments are skipped; list
/// keys may repeat and replace the default list; scalar keys may appear once.
/// `checker=all` selects every checker.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let mut c = CampaignConfig::default();
    let mut seen: HashSet<&str> = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .map(|(a, b)| (a.trim(), b.trim()))
            .ok_or_else(|| Error::Parse(format!("line {line}: expected key=value, got `{body}`")))?;
        let key: &str = CONFIG_KEYS.iter().copied().find(|&x| x == key).ok_or_else(|| {
            Error::Parse(format!("line {line}: unknown key `{key}`; valid keys: {}", CONFIG_KEYS.join(", ")))
        })?;
        let first = seen.insert(key);
        if !first && !LIST_KEYS.contains(&key) {
            return Err(Error::Parse(format!("line {line}: `{key}` given more than once")));
        }
        match key {
            "checker" => {
                if first {
                    c.checkers.clear();
                }
                if value == "all" {
                    c.checkers.extend_from_slice(CheckerKind::ALL);
                } else {
                    c.checkers.push(value.parse().map_err(|e: Error| Error::Parse(format!("line {line}: {e}")))?);
                }
            }
            "psi" => {
                if first {
                    c.psis.clear();
                }
                BernsteinFunction::from_name(value)?;
                c.psis.push(value.to_string());
            }
            "dim" => {
                if first {
                    c.dims.clear();
                }
                c.dims.push(number(key, value, line)?);
            }
            "arity" => {
                if first {
                    c.arities.clear();
                }
                c.arities.push(number(key, value, line)?);
            }
            "norm" => {
                if first {
                    c.norms.clear();
                }
                c.norms.push(value.parse()?);
            }
            "trials" => c.trials = number(key, value, line)?,
            "seed" => c.seed = number(key, value, line)?,
            "kappa_max" => c.kappa_max = number(key, value, line)?,
            "omega" => c.omega = number(key, value, line)?,
            "output" => c.output = Some(value.to_string()),
            "format" => c.format = value.parse()?,
            "quad.delta_split" => c.quadrature.delta_split = number(key, value, line)?,
            "quad.panels_per_decade" => c.quadrature.panels_per_decade = number(key, value, line)?,
            "quad.nodes_per_panel" => c.quadrature.nodes_per_panel = number(key, value, line)?,
            "quad.origin_cutoff" => c.quadrature.origin_cutoff = number(key, value, line)?,
            "quad.tail_truncation_tol" => c.quadrature.tail_truncation_tol = number(key, value, line)?,
            "quad.target_tol" => c.quadrature.target_tol = number(key, value, line)?,
            "quad.max_truncation" => c.quadrature.max_truncation = number(key, value, line)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    dedup(&mut c.checkers);
    if c.norms.is_empty() {
        c.norms.push(IdealNorm::Operator);
    }
    c.validate()?;
    Ok(c)
}

fn dedup(kinds: &mut Vec<CheckerKind>) {
    let mut seen = HashSet::new();
    kinds.retain(|k| seen.insert(*k));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::OutputFormat;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(parse_config("").unwrap(), CampaignConfig::default());
        let c = parse_config(
            "# comment\nchecker = thm1\nchecker=cor9\npsi=log\ndim=3\ntrials=7 # inline\nnorm=trace\nformat=csv\nquad.target_tol=1e-8\n",
        )
        .unwrap();
        assert_eq!(c.checkers, vec![CheckerKind::Thm1, CheckerKind::Lemma1]);
        assert_eq!(c.psis, vec!["log"]);
        assert_eq!(c.dims, vec![3]);
        assert_eq!(c.trials, 7);
        assert_eq!(c.norms, vec![IdealNorm::Trace]);
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.quadrature.target_tol, 1e-8);
    }

    #[test]
    fn errors_name_valid_choices() {
        let e = parse_config("colour=red").unwrap_err().to_string();
        assert!(e.contains("valid keys") && e.contains("checker"));
        let e = parse_config("checker=thm42").unwrap_err().to_string();
        assert!(e.contains("thm1"));
        let e = parse_config("psi=cosh").unwrap_err().to_string();
        assert!(e.contains("sqrt"));
        assert!(parse_config("trials=3\ntrials=4").is_err());
        assert!(parse_config("dim=zero").is_err());
        assert!(parse_config("dim=0").is_err());
        assert!(parse_config("omega=0.5").is_err());
        assert!(parse_config("just words").is_err());
    }
}
