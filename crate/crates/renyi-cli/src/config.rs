use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Numeric and path parameters shared by every subcommand. A flag wins over
/// the same key in the JSON config file, which wins over the defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Channel: bsc:<p>, bec:<p>, haroutunian, or a JSON file with "rows".
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub channel: Option<String>,
    /// Poisson channel spec as a JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rate: Option<f64>,
    /// Relative width of the averaging window.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub width: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<f64>,
    /// Orders (α₀, α₁) of the feedback bound.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a0: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a1: Option<f64>,
    #[arg(short = 'M', long = "messages", global = true)]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u64>,
    #[arg(short = 'L', long = "list", global = true)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none", default)]
    pub l: Option<u64>,
    /// ln(M/L), for codes too large for integer M.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ln_ratio: Option<f64>,
    #[arg(short = 'n', long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    /// Poisson duration T.
    #[arg(long = "duration", global = true)]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none", default)]
    pub duration: Option<f64>,
    /// Poisson intensity floor A.
    #[arg(long = "floor", global = true)]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub floor: Option<f64>,
    /// Poisson intensity ceiling B.
    #[arg(long = "ceiling", global = true)]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none", default)]
    pub ceiling: Option<f64>,
    /// Number of orders or rates in a report.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<usize>,
    /// Largest order sampled by a report.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instances: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "RENYI_WORKERS")]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub workers: Option<usize>,
    /// Output format: json, csv or text.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub format: Option<String>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Params {
    /// Fields of `self` where set, otherwise those of `lower`.
    pub fn over(self, lower: Params) -> Params {
        overlay!(self, lower; channel, spec, order, rate, width, kappa, eps, phi, a0, a1, m, l, ln_ratio, n,
            duration, floor, ceiling, points, alpha_max, suite, instances, tol, seed, workers, format)
    }

    pub fn from_file(path: &str) -> Result<Params, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(renyi::capacity::DEFAULT_TOL)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.format.as_deref().unwrap_or("json") {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(CliError::Precondition(format!(
                "format must be json, csv or text, got {other}"
            ))),
        }
    }

    pub fn need<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Precondition(format!("missing --{name}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let flags = Params {
            order: Some(2.0),
            ..Default::default()
        };
        let file: Params = serde_json::from_str(r#"{"order": 0.5, "rate": 0.1, "M": 4}"#).unwrap();
        let merged = flags.over(file);
        assert_eq!(merged.order, Some(2.0));
        assert_eq!(merged.rate, Some(0.1));
        assert_eq!(merged.m, Some(4));
        assert_eq!(merged.tol(), renyi::capacity::DEFAULT_TOL);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Params>(r#"{"ordre": 1}"#).is_err());
    }
}
