use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use super::{BenchError, CaseSource, ExperimentSpec};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys are lower-cased with `-` read as `_`; a repeated key keeps
/// its last value.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: k + 1,
                message: format!("expected key=value, got '{line}'"),
            });
        };
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(ConfigError {
                line: k + 1,
                message: "empty key".into(),
            });
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, BenchError> {
    value
        .parse()
        .map_err(|_| BenchError::InvalidSpec(format!("{key}: cannot parse '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool, BenchError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(BenchError::InvalidSpec(format!(
            "{key}: expected a boolean, got '{value}'"
        ))),
    }
}

impl ExperimentSpec {
    /// Applies settings named like the command-line flags (`algo`, `pop`,
    /// `iters`, `lambda_v`, ...). Unknown keys are an error. Changing the
    /// case without `iters` also resets the iteration budget to that case's
    /// default.
    pub fn apply_settings(&mut self, settings: &BTreeMap<String, String>) -> Result<(), BenchError> {
        for (key, value) in settings {
            match key.as_str() {
                "case" => {
                    self.case = value.parse::<CaseSource>().expect("infallible");
                    if !settings.contains_key("iters") {
                        self.iterations = self.case.default_iterations();
                    }
                }
                "objective" => self.objective = value.parse()?,
                "algo" => self.variant = value.parse()?,
                "runs" => self.runs = parsed(key, value)?,
                "pop" => self.population = parsed(key, value)?,
                "iters" => self.iterations = parsed(key, value)?,
                "seed" => self.master_seed = parsed(key, value)?,
                "out" => self.output_dir = PathBuf::from(value),
                "lambda_v" => self.penalty.lambda_v = parsed(key, value)?,
                "lambda_q" => self.penalty.lambda_q = parsed(key, value)?,
                "lambda_s" => self.penalty.lambda_s = parsed(key, value)?,
                "pulse_time_dependent" => self.pulse_time_dependent = flag(key, value)?,
                "velocity_sign" => self.velocity_sign = value.parse()?,
                "std" => self.std_kind = value.parse()?,
                "workers" => self.workers = Some(parsed(key, value)?),
                _ => return Err(BenchError::InvalidSpec(format!("unknown setting '{key}'"))),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbbat::{Variant, VelocitySign};
    use crate::bench::StdKind;
    use crate::netmodel::EmbeddedCase;
    use crate::orpd::ObjectiveKind;

    #[test]
    fn parses_and_applies() {
        let text = "# campaign\ncase = ieee57\nobjective=tvd\nalgo = gbbba\nruns=3\npop = 40\niters = 25\nseed=9\n\
                    lambda-v = 50\npulse_time_dependent = yes\nvelocity_sign = conventional\nstd = sample\nout = /tmp/x\n";
        let map = parse_config(text).unwrap();
        let mut spec = ExperimentSpec::new(
            CaseSource::Embedded(EmbeddedCase::Ieee14),
            ObjectiveKind::ActiveLoss,
            Variant::Degbbba,
        );
        spec.apply_settings(&map).unwrap();
        assert_eq!(spec.case, CaseSource::Embedded(EmbeddedCase::Ieee57));
        assert_eq!(spec.objective, ObjectiveKind::TotalVoltageDeviation);
        assert_eq!(spec.variant, Variant::Gbbba);
        assert_eq!(
            (spec.runs, spec.population, spec.iterations, spec.master_seed),
            (3, 40, 25, 9)
        );
        assert_eq!(spec.penalty.lambda_v, 50.0);
        assert!(spec.pulse_time_dependent);
        assert_eq!(spec.velocity_sign, VelocitySign::Conventional);
        assert_eq!(spec.std_kind, StdKind::Sample);
        assert_eq!(spec.output_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn reports_bad_lines() {
        assert_eq!(parse_config("a=1\nnonsense\n").unwrap_err().line, 2);
        let mut spec = ExperimentSpec::new(
            CaseSource::Embedded(EmbeddedCase::Ieee14),
            ObjectiveKind::ActiveLoss,
            Variant::Degbbba,
        );
        let map = parse_config("colour = red").unwrap();
        assert!(spec.apply_settings(&map).is_err());
        let map = parse_config("runs = many").unwrap();
        assert!(spec.apply_settings(&map).is_err());
    }
}
