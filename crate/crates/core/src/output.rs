//! Result files: per-strategy CDF tables, `summary.json` and
//! `manifest.json`. Everything except the manifest's wall time is a pure
//! function of the campaign result.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{SimConfig, StrategySpec};
use crate::engine::{CampaignResult, StrategyOutcome};
use crate::error::{Error, Result};
use crate::metrics::{EmpiricalCdf, Metric};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%g`-style formatting with 9 significant digits.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// CDF table: header `value,cdf`, one row per distinct value, LF endings.
pub fn cdf_csv(cdf: &EmpiricalCdf) -> String {
    let mut out = String::from("value,cdf\n");
    for (v, p) in cdf.sorted_values.iter().zip(&cdf.probabilities) {
        out.push_str(&format_sig9(*v));
        out.push(',');
        out.push_str(&format_sig9(*p));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Percentiles {
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub label: String,
    pub users: usize,
    pub percentiles: BTreeMap<String, Percentiles>,
    pub mean_spectral_eff: f64,
    /// Sweep slots a codebook strategy would spend per selection. Not
    /// charged against the reported spectral efficiency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_sweep_slots: Option<usize>,
}

/// Median differences of a strategy against the baseline. Coupling loss is
/// `baseline − strategy` so that a positive number is an improvement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianDelta {
    pub strategy: String,
    pub baseline: String,
    pub coupling_loss_gain_db: f64,
    pub sinr_gain_db: f64,
    pub spectral_eff_gain: f64,
    pub spectral_eff_gain_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tool_version: String,
    pub seed: u64,
    pub drops: usize,
    pub config_hash: String,
    pub clamped_links: usize,
    pub strategies: Vec<StrategySummary>,
    pub median_deltas: Vec<MedianDelta>,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// The canonical config text; running it reproduces the results.
    pub config_toml: String,
    pub files: Vec<String>,
}

fn strategy_summary(o: &StrategyOutcome) -> Result<StrategySummary> {
    let mut percentiles = BTreeMap::new();
    for m in Metric::ALL {
        let cdf = o.cdf(m)?;
        percentiles.insert(
            m.name().to_string(),
            Percentiles {
                p5: cdf.percentile(5.0)?,
                p50: cdf.percentile(50.0)?,
                p95: cdf.percentile(95.0)?,
            },
        );
    }
    let se = o.values(Metric::SpectralEfficiency);
    Ok(StrategySummary {
        strategy: o.spec.to_string(),
        label: o.spec.label(),
        users: se.len(),
        percentiles,
        mean_spectral_eff: se.iter().sum::<f64>() / se.len() as f64,
        beam_sweep_slots: match o.spec {
            StrategySpec::Codebook(b) => Some(b),
            _ => None,
        },
    })
}

pub fn median_delta(strategy: &StrategyOutcome, baseline: &StrategyOutcome) -> Result<MedianDelta> {
    let cl = baseline.median(Metric::CouplingLoss)? - strategy.median(Metric::CouplingLoss)?;
    let sinr = strategy.median(Metric::Sinr)? - baseline.median(Metric::Sinr)?;
    let se_s = strategy.median(Metric::SpectralEfficiency)?;
    let se_b = baseline.median(Metric::SpectralEfficiency)?;
    Ok(MedianDelta {
        strategy: strategy.spec.to_string(),
        baseline: baseline.spec.to_string(),
        coupling_loss_gain_db: cl,
        sinr_gain_db: sinr,
        spectral_eff_gain: se_s - se_b,
        spectral_eff_gain_relative: if se_b > 0.0 { se_s / se_b - 1.0 } else { f64::NAN },
    })
}

pub fn summarize(result: &CampaignResult) -> Result<Summary> {
    let strategies = result.outcomes.iter().map(strategy_summary).collect::<Result<Vec<_>>>()?;
    let baseline = result
        .outcome(StrategySpec::NoRis)
        .or_else(|| result.outcomes.first())
        .ok_or_else(|| Error::invalid("campaign has no strategies"))?;
    let median_deltas = result
        .outcomes
        .iter()
        .filter(|o| o.spec != baseline.spec)
        .map(|o| median_delta(o, baseline))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary {
        tool_version: TOOL_VERSION.into(),
        seed: result.config.run.seed,
        drops: result.config.run.drops,
        config_hash: result.config.hash(),
        clamped_links: result.clamped_links(),
        strategies,
        median_deltas,
        config: result.config.clone(),
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn csv_name(spec: StrategySpec, metric: Metric) -> String {
    format!("{}_{}.csv", spec.label(), metric.name())
}

/// Writes CDF tables for `metrics` of every strategy, `summary.json` and
/// `manifest.json` into `out_dir` (created if missing).
pub fn write_results(result: &CampaignResult, out_dir: &Path, metrics: &[Metric], wall_time_s: f64) -> Result<RunManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    for o in &result.outcomes {
        for &m in metrics {
            let name = csv_name(o.spec, m);
            write(&out_dir.join(&name), &cdf_csv(&o.cdf(m)?))?;
            files.push(name);
        }
    }
    let summary = summarize(result)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    text.push('\n');
    write(&out_dir.join("summary.json"), &text)?;
    files.push("summary.json".into());
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.into(),
        config_hash: result.config.hash(),
        seed: result.config.run.seed,
        wall_time_s,
        config_toml: result.config.to_toml(),
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    write(&out_dir.join("manifest.json"), &text)?;
    Ok(manifest)
}

/// Path of a strategy's CDF table inside `out_dir`.
pub fn csv_path(out_dir: &Path, spec: StrategySpec, metric: Metric) -> PathBuf {
    out_dir.join(csv_name(spec, metric))
}
