//! Link metrics and empirical distributions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise power in watts over `bandwidth_hz`.
pub fn noise_power_watts(density_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(density_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// `P_t · ‖h_eq‖²`, i.e. the power after matched-filter transmission.
pub fn received_power(h_eq: &[Complex64], tx_power: f64) -> Result<f64> {
    if h_eq.is_empty() {
        return Err(Error::invalid("effective channel is empty"));
    }
    Ok(tx_power * h_eq.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn coupling_loss_db(tx_power_dbm: f64, rx_power_dbm: f64) -> f64 {
    tx_power_dbm - rx_power_dbm
}

pub fn sinr(serving_rx: f64, interferers_rx: &[f64], noise: f64) -> Result<f64> {
    if !(noise > 0.0) {
        return Err(Error::invalid("noise power must be > 0"));
    }
    Ok(serving_rx / (interferers_rx.iter().sum::<f64>() + noise))
}

pub fn spectral_efficiency(sinr_linear: f64) -> f64 {
    (1.0 + sinr_linear).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserMetrics {
    pub coupling_loss_db: f64,
    pub sinr_db: f64,
    pub snr_db: f64,
    pub spectral_eff: f64,
    pub serving_sector: usize,
    /// Selected codebook beam; `None` for other strategies or when the
    /// direct-only configuration won.
    pub best_beam: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DropMetrics {
    pub users: Vec<UserMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CouplingLoss,
    Sinr,
    Snr,
    SpectralEfficiency,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::CouplingLoss,
        Metric::Sinr,
        Metric::Snr,
        Metric::SpectralEfficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::CouplingLoss => "coupling_loss_db",
            Metric::Sinr => "sinr_db",
            Metric::Snr => "snr_db",
            Metric::SpectralEfficiency => "spectral_eff",
        }
    }

    pub fn of(self, u: &UserMetrics) -> f64 {
        match self {
            Metric::CouplingLoss => u.coupling_loss_db,
            Metric::Sinr => u.sinr_db,
            Metric::Snr => u.snr_db,
            Metric::SpectralEfficiency => u.spectral_eff,
        }
    }
}

/// Step CDF over distinct sample values; `probabilities[i]` is the fraction
/// of samples `≤ sorted_values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub sorted_values: Vec<f64>,
    pub probabilities: Vec<f64>,
    samples: Vec<f64>,
}

pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf> {
    if values.is_empty() {
        return Err(Error::invalid("empirical CDF needs at least one value"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("empirical CDF input contains NaN"));
    }
    let mut samples = values.to_vec();
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut sorted_values = Vec::new();
    let mut probabilities = Vec::new();
    for (i, &v) in samples.iter().enumerate() {
        if i + 1 < samples.len() && samples[i + 1] == v {
            continue;
        }
        sorted_values.push(v);
        probabilities.push((i + 1) as f64 / n);
    }
    Ok(EmpiricalCdf {
        sorted_values,
        probabilities,
        samples,
    })
}

impl EmpiricalCdf {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// All samples in ascending order, duplicates kept.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Linear-interpolated percentile, `p` in [0, 100], at position
    /// `p/100·(n−1)` of the sorted samples.
    pub fn percentile(&self, p: f64) -> Result<f64> {
        if !(0.0..=100.0).contains(&p) {
            return Err(Error::invalid(format!("percentile {p} outside [0, 100]")));
        }
        let pos = p / 100.0 * (self.samples.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        Ok(self.samples[lo] + (self.samples[hi] - self.samples[lo]) * frac)
    }

    pub fn median(&self) -> f64 {
        self.percentile(50.0).expect("50 is a valid percentile")
    }

    /// Fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.samples.len() as f64
    }
}
