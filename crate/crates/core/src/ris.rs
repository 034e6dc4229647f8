//! RIS phase-shift strategies.
//!
//! Steering phases and codebooks work on [`DirectionLocal`] values in the
//! steering frame (see [`DirectionLocal::steering_frame`]). The per-user
//! strategies work on the scalar cascade terms `r_n`, for which the
//! effective single-antenna channel is `h_eq = H + Σ_n e^{jθ_n} r_n`.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrays::{axis_components, AntennaPanel, DirectionLocal};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseConstraint {
    Ideal,
    Discrete(usize),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    /// θ_n in radians, element order as in [`crate::arrays::element_positions`].
    pub phases: Vec<f64>,
    pub constraint: PhaseConstraint,
}

impl PhaseConfig {
    pub fn zeros(n: usize) -> Self {
        PhaseConfig {
            phases: vec![0.0; n],
            constraint: PhaseConstraint::Ideal,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// `e^{jθ_n}` for every element.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&t| Complex64::cis(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// Target azimuth in degrees, relative to the RIS boresight.
    pub azimuth_deg: f64,
    /// Target zenith in degrees, panel frame.
    pub zenith_deg: f64,
    pub config: PhaseConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodebook {
    pub beams: Vec<Beam>,
}

impl BeamCodebook {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

fn in_front(dir: DirectionLocal) -> bool {
    dir.zenith <= FRAC_PI_2 + 1e-12
}

/// Progressive steering phases that turn a wave arriving from `aoa` towards
/// `target` (both in the steering frame):
/// `β_y = k·dy·(s_o − s_a)`, `β_z = k·dz·(c_o − c_a)`, element (m, n) gets
/// `m·β_y + n·β_z` reduced to [0, 2π).
pub fn optimal_steering_phases(
    panel: &AntennaPanel,
    aoa: DirectionLocal,
    target: DirectionLocal,
) -> Result<PhaseConfig> {
    if !in_front(aoa) || !in_front(target) {
        return Err(Error::Domain(format!(
            "steering directions must lie in the front half-space (aoa zenith {:.4} rad, target zenith {:.4} rad)",
            aoa.zenith, target.zenith
        )));
    }
    let (beta_y, beta_z) = steering_betas(panel, aoa, target);
    let mut phases = Vec::with_capacity(panel.element_count());
    for m in 0..panel.n_horizontal {
        for n in 0..panel.n_vertical {
            phases.push((m as f64 * beta_y + n as f64 * beta_z).rem_euclid(TAU));
        }
    }
    Ok(PhaseConfig {
        phases,
        constraint: PhaseConstraint::Ideal,
    })
}

/// The progressive phase increments (β_y, β_z) of [`optimal_steering_phases`].
pub fn steering_betas(panel: &AntennaPanel, aoa: DirectionLocal, target: DirectionLocal) -> (f64, f64) {
    let (sa, ca) = axis_components(aoa);
    let (so, co) = axis_components(target);
    (TAU * panel.dy * (so - sa), TAU * panel.dz * (co - ca))
}

/// Azimuth targets (degrees) of a `b`-beam codebook: cell centres of a
/// uniform grid over `span_deg`, centred on boresight.
pub fn codebook_azimuths(b: usize, span_deg: f64) -> Vec<f64> {
    let step = span_deg / b as f64;
    (0..b)
        .map(|i| -span_deg / 2.0 + (i as f64 + 0.5) * step)
        .collect()
}

/// Builds `b` beams fanned across `azimuth_span_deg` at a fixed panel-frame
/// zenith. `aoa` is the panel-frame direction towards the serving BS.
pub fn make_codebook(
    panel: &AntennaPanel,
    aoa: DirectionLocal,
    b: usize,
    azimuth_span_deg: f64,
    zenith_deg: f64,
) -> Result<BeamCodebook> {
    if b == 0 {
        return Err(Error::invalid("codebook needs at least one beam"));
    }
    let aoa_s = aoa.steering_frame(false);
    let beams = codebook_azimuths(b, azimuth_span_deg)
        .into_iter()
        .map(|az| {
            let target = DirectionLocal::from_degrees(zenith_deg, az).steering_frame(true);
            Ok(Beam {
                azimuth_deg: az,
                zenith_deg,
                config: optimal_steering_phases(panel, aoa_s, target)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamCodebook { beams })
}

fn arg_or_zero(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

/// Co-phasing solution `θ_n = ∠H − ∠r_n`, which yields `|H| + Σ|r_n|`.
/// `∠0` is taken as 0.
pub fn ideal_phases(h_direct: Complex64, cascade: &[Complex64]) -> PhaseConfig {
    let ah = arg_or_zero(h_direct);
    PhaseConfig {
        phases: cascade
            .iter()
            .map(|&r| (ah - arg_or_zero(r)).rem_euclid(TAU))
            .collect(),
        constraint: PhaseConstraint::Ideal,
    }
}

/// Maps every phase to the nearest of the `d` levels `2πi/d`; exact ties go
/// to the lower level index.
pub fn quantize_phases(ideal: &PhaseConfig, d: usize) -> Result<PhaseConfig> {
    if d == 0 {
        return Err(Error::invalid("number of phase levels must be >= 1"));
    }
    let step = TAU / d as f64;
    let phases = ideal
        .phases
        .iter()
        .map(|&t| {
            let x = t.rem_euclid(TAU) / step;
            let idx = ((x - 0.5).ceil() as usize) % d;
            idx as f64 * step
        })
        .collect();
    Ok(PhaseConfig {
        phases,
        constraint: PhaseConstraint::Discrete(d),
    })
}

pub fn random_phases(n: usize, rng: &mut Stream) -> Result<PhaseConfig> {
    if n == 0 {
        return Err(Error::invalid("random phase configuration needs n >= 1"));
    }
    Ok(PhaseConfig {
        phases: (0..n).map(|_| rng.random::<f64>() * TAU).collect(),
        constraint: PhaseConstraint::Random,
    })
}

/// `H + Σ_n e^{jθ_n} r_n`.
pub fn scalar_effective(h_direct: Complex64, cascade: &[Complex64], config: &PhaseConfig) -> Complex64 {
    h_direct
        + cascade
            .iter()
            .zip(&config.phases)
            .map(|(r, &t)| r * Complex64::cis(t))
            .sum::<Complex64>()
}
