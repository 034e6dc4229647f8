//! Closed-form rate expressions for a single-antenna user served through a
//! direct path and `N` reflecting elements.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateInputs {
    /// `|H|`.
    pub direct_mag: f64,
    /// `|r_n|` per element.
    pub cascade_mags: Vec<f64>,
    /// `P_t` in watts.
    pub tx_power: f64,
    /// `σ²` in watts.
    pub noise_power: f64,
    pub d_levels: usize,
}

impl RateInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.direct_mag >= 0.0) || self.cascade_mags.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::invalid("magnitudes must be finite and >= 0"));
        }
        if !(self.tx_power > 0.0) || !(self.noise_power > 0.0) {
            return Err(Error::invalid("powers must be > 0"));
        }
        if self.d_levels == 0 {
            return Err(Error::invalid("d_levels must be >= 1"));
        }
        Ok(())
    }

    fn snr_scale(&self) -> f64 {
        self.tx_power / self.noise_power
    }
}

/// Unnormalised `sin(π/D)/(π/D)`.
pub fn sinc_factor(d_levels: usize) -> Result<f64> {
    if d_levels == 0 {
        return Err(Error::invalid("d_levels must be >= 1"));
    }
    if d_levels == 1 {
        // sin(π) is not exactly zero in floating point
        return Ok(0.0);
    }
    let x = PI / d_levels as f64;
    Ok(x.sin() / x)
}

/// `log2(1 + (P/σ²)(|H| + Σ|r_n|)²)`.
pub fn rate_ideal(inputs: &RateInputs) -> Result<f64> {
    inputs.validate()?;
    let amp = inputs.direct_mag + inputs.cascade_mags.iter().sum::<f64>();
    Ok((1.0 + inputs.snr_scale() * amp * amp).log2())
}

/// `log2(1 + (P/σ²)(|H| + N·sinc(π/D)·E[r])²)` with `D = inputs.d_levels`.
pub fn rate_discrete_asymptotic(inputs: &RateInputs, n_elements: usize, mean_cascade: f64) -> Result<f64> {
    inputs.validate()?;
    if n_elements == 0 {
        return Err(Error::invalid("n_elements must be >= 1"));
    }
    if !(mean_cascade >= 0.0) {
        return Err(Error::invalid("mean cascade magnitude must be >= 0"));
    }
    let amp = inputs.direct_mag + n_elements as f64 * sinc_factor(inputs.d_levels)? * mean_cascade;
    Ok((1.0 + inputs.snr_scale() * amp * amp).log2())
}

/// `log2(1 + P|H|²/σ²)`.
pub fn rate_no_ris(direct_mag: f64, tx_power: f64, noise_power: f64) -> Result<f64> {
    if !(direct_mag >= 0.0) {
        return Err(Error::invalid("direct magnitude must be >= 0"));
    }
    if !(tx_power > 0.0) || !(noise_power > 0.0) {
        return Err(Error::invalid("powers must be > 0"));
    }
    Ok((1.0 + tx_power * direct_mag * direct_mag / noise_power).log2())
}

/// One row of the table printed by the `theory` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub levels: usize,
    pub sinc: f64,
    pub rate_discrete: f64,
}

/// Table of discrete-phase rates over `levels` for fixed channel statistics.
pub fn theory_table(levels: &[usize], inputs: &RateInputs, n_elements: usize, mean_cascade: f64) -> Result<Vec<TheoryRow>> {
    levels
        .iter()
        .map(|&d| {
            let with_d = RateInputs {
                d_levels: d,
                ..inputs.clone()
            };
            Ok(TheoryRow {
                levels: d,
                sinc: sinc_factor(d)?,
                rate_discrete: rate_discrete_asymptotic(&with_d, n_elements, mean_cascade)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};

    fn inputs(direct: f64, mags: Vec<f64>, snr: f64, d: usize) -> RateInputs {
        RateInputs {
            direct_mag: direct,
            cascade_mags: mags,
            tx_power: snr,
            noise_power: 1.0,
            d_levels: d,
        }
    }

    #[test]
    fn sinc_examples() {
        assert_eq!(sinc_factor(1).unwrap(), 0.0);
        assert!((sinc_factor(2).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((sinc_factor(4).unwrap() - 2.0 * 2f64.sqrt() / PI).abs() < 1e-15);
        assert!((sinc_factor(16).unwrap() - 0.9936).abs() < 5e-5);
        assert!(sinc_factor(0).is_err());
        let mut prev = 0.0;
        for d in 2..5000 {
            let s = sinc_factor(d).unwrap();
            assert!(s > prev && s < 1.0);
            prev = s;
        }
    }

    #[test]
    fn rate_examples() {
        assert!((rate_ideal(&inputs(1.0, vec![], 1.0, 1)).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate_ideal(&inputs(1.0, vec![0.25, 0.75], 1.0, 1)).unwrap() - 5f64.log2()).abs() < 1e-12);
        assert_eq!(rate_no_ris(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!((rate_no_ris(1.0, 3.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let x = inputs(0.7, vec![0.1; 8], 2.0, 1);
        assert_eq!(rate_discrete_asymptotic(&x, 8, 0.1).unwrap(), rate_no_ris(0.7, 2.0, 1.0).unwrap());
        let big = inputs(0.7, vec![0.1; 8], 2.0, 1 << 20);
        assert!((rate_discrete_asymptotic(&big, 8, 0.1).unwrap() - rate_ideal(&big).unwrap()).abs() < 1e-9);
        assert!(rate_no_ris(1.0, 0.0, 1.0).is_err());
        assert!(rate_ideal(&inputs(-1.0, vec![], 1.0, 1)).is_err());
    }

    #[test]
    fn table_rows() {
        let t = theory_table(&[1, 2, 4, 16], &inputs(1.0, vec![], 1.0, 1), 256, 0.01).unwrap();
        let want = [0.0, 0.6366, 0.9003, 0.9936];
        assert_eq!(t.len(), 4);
        for (row, w) in t.iter().zip(want) {
            assert!((row.sinc - w).abs() < 5e-5);
        }
    }

    proptest! {
        #[test]
        fn ordering_and_monotonicity(h in 0.0..2.0f64, r in 0.0..0.1f64, snr in 0.01..100.0f64, d in 1usize..2048) {
            let n = 16;
            let x = inputs(h, vec![r; n], snr, d);
            let x2 = RateInputs { d_levels: 2 * d, ..x.clone() };
            let none = rate_no_ris(h, snr, 1.0).unwrap();
            let a = rate_discrete_asymptotic(&x, n, r).unwrap();
            let b = rate_discrete_asymptotic(&x2, n, r).unwrap();
            let top = rate_ideal(&x).unwrap();
            prop_assert!(none <= a + 1e-12 && a <= b + 1e-12 && b <= top + 1e-12);
            let louder = RateInputs { tx_power: snr * 1.5, ..x.clone() };
            prop_assert!(rate_ideal(&louder).unwrap() > top);
            prop_assert!(rate_no_ris(h + 0.1, snr, 1.0).unwrap() > none);
        }
    }
}
