//! Planar antenna panels, element patterns, spherical unit vectors, steering
//! vectors and the RIS array factor.
//!
//! Panel-local frame: zenith θ from local +z (up), azimuth φ from local +x
//! counter-clockwise, boresight along local +x. Elements lie in the local y-z
//! plane, element (m, n) at (0, m·dy, n·dz) in wavelengths, indexed
//! `m * n_vertical + n`.
//!
//! The geometric steering formulas use a second, relabelled frame (the
//! *steering frame*) in which θ is measured from the panel normal, the
//! "sinφ·sinθ" component runs along the horizontal element axis and the
//! "cosφ·sinθ" component along the vertical element axis. See
//! [`DirectionLocal::steering_frame`].

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Peak gain of the 3GPP sectoral element.
pub const SECTORAL_MAX_GAIN_DBI: f64 = 8.0;
const SECTORAL_HPBW_DEG: f64 = 65.0;
const SECTORAL_SLA_DB: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    Sectoral3gpp,
    Omni,
    PassiveReflector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPanel {
    /// Elements along the horizontal (local y) axis.
    pub n_horizontal: usize,
    /// Elements along the vertical (local z) axis.
    pub n_vertical: usize,
    /// Horizontal spacing in wavelengths.
    pub dy: f64,
    /// Vertical spacing in wavelengths.
    pub dz: f64,
    pub boresight_azimuth: f64,
    /// Mechanical downtilt in degrees, positive towards the ground.
    pub downtilt: f64,
    pub pattern: ElementPattern,
}

impl AntennaPanel {
    pub fn new(n_horizontal: usize, n_vertical: usize, pattern: ElementPattern) -> Self {
        AntennaPanel {
            n_horizontal,
            n_vertical,
            dy: 0.5,
            dz: 0.5,
            boresight_azimuth: 0.0,
            downtilt: 0.0,
            pattern,
        }
    }

    pub fn oriented(mut self, boresight_azimuth: f64, downtilt: f64) -> Self {
        self.boresight_azimuth = boresight_azimuth;
        self.downtilt = downtilt;
        self
    }

    pub fn with_spacing(mut self, dy: f64, dz: f64) -> Self {
        self.dy = dy;
        self.dz = dz;
        self
    }

    pub fn element_count(&self) -> usize {
        self.n_horizontal * self.n_vertical
    }

    /// Rotates a global unit vector into the panel-local frame.
    pub fn to_local(&self, v: [f64; 3]) -> [f64; 3] {
        let (sa, ca) = self.boresight_azimuth.to_radians().sin_cos();
        // undo azimuth rotation about z
        let x1 = ca * v[0] + sa * v[1];
        let y1 = -sa * v[0] + ca * v[1];
        let z1 = v[2];
        // undo downtilt: boresight (1,0,0) was tilted to (cos t, 0, -sin t)
        let (st, ct) = self.downtilt.to_radians().sin_cos();
        [ct * x1 - st * z1, y1, st * x1 + ct * z1]
    }

    /// Direction of a global unit vector as seen in the panel frame.
    pub fn local_direction(&self, v: [f64; 3]) -> DirectionLocal {
        DirectionLocal::from_vector(self.to_local(v))
    }
}

/// A direction in a panel frame: zenith θ ∈ [0, π], azimuth φ ∈ (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionLocal {
    pub zenith: f64,
    pub azimuth: f64,
}

impl DirectionLocal {
    pub fn new(zenith: f64, azimuth: f64) -> Self {
        DirectionLocal {
            zenith: zenith.clamp(0.0, PI),
            azimuth: wrap_pi(azimuth),
        }
    }

    pub fn from_degrees(zenith_deg: f64, azimuth_deg: f64) -> Self {
        Self::new(zenith_deg.to_radians(), azimuth_deg.to_radians())
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 {
            return DirectionLocal::new(PI / 2.0, 0.0);
        }
        DirectionLocal::new((v[2] / n).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        spherical_unit_vector(*self)
    }

    /// Re-expresses a panel-frame direction in the steering frame used by
    /// [`crate::ris::optimal_steering_phases`] and [`array_factor`]: the panel
    /// normal becomes the zenith axis, the vertical element axis becomes the
    /// azimuth reference and the horizontal element axis stays the y axis.
    ///
    /// With `outgoing = true` the in-plane components are negated, which is
    /// how a departing direction enters the steering formulas under the
    /// `exp(+j2π r·d)` response convention used by the channel.
    pub fn steering_frame(&self, outgoing: bool) -> DirectionLocal {
        let r = self.unit_vector();
        let sign = if outgoing { -1.0 } else { 1.0 };
        DirectionLocal::from_vector([sign * r[2], sign * r[1], r[0]])
    }
}

fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// (sinθ cosφ, sinθ sinφ, cosθ).
pub fn spherical_unit_vector(dir: DirectionLocal) -> [f64; 3] {
    let (st, ct) = dir.zenith.sin_cos();
    let (sp, cp) = dir.azimuth.sin_cos();
    [st * cp, st * sp, ct]
}

pub fn element_positions(panel: &AntennaPanel) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(panel.element_count());
    for m in 0..panel.n_horizontal {
        for n in 0..panel.n_vertical {
            out.push([0.0, m as f64 * panel.dy, n as f64 * panel.dz]);
        }
    }
    out
}

/// Per-element response `exp(j2π r·d)` for a panel-local direction.
pub fn steering_vector(panel: &AntennaPanel, dir: DirectionLocal) -> Vec<Complex64> {
    steering_vector_from_unit(panel, spherical_unit_vector(dir))
}

/// [`steering_vector`] for a unit vector already in the panel frame. The
/// element grid is separable, so only `n_horizontal + n_vertical` complex
/// exponentials are evaluated.
pub fn steering_vector_from_unit(panel: &AntennaPanel, r: [f64; 3]) -> Vec<Complex64> {
    let horiz: Vec<Complex64> = (0..panel.n_horizontal)
        .map(|m| Complex64::cis(TAU * r[1] * m as f64 * panel.dy))
        .collect();
    let vert: Vec<Complex64> = (0..panel.n_vertical)
        .map(|n| Complex64::cis(TAU * r[2] * n as f64 * panel.dz))
        .collect();
    let mut out = Vec::with_capacity(panel.element_count());
    for h in &horiz {
        for v in &vert {
            out.push(h * v);
        }
    }
    out
}

/// Element gain in dB for a panel-local direction.
pub fn element_gain_db(pattern: ElementPattern, dir: DirectionLocal) -> f64 {
    match pattern {
        ElementPattern::Sectoral3gpp => {
            let theta = dir.zenith.to_degrees();
            let phi = dir.azimuth.to_degrees();
            let a_v = -(12.0 * ((theta - 90.0) / SECTORAL_HPBW_DEG).powi(2)).min(SECTORAL_SLA_DB);
            let a_h = -(12.0 * (phi / SECTORAL_HPBW_DEG).powi(2)).min(SECTORAL_SLA_DB);
            -(-(a_v + a_h)).min(SECTORAL_SLA_DB) + SECTORAL_MAX_GAIN_DBI
        }
        ElementPattern::Omni => 0.0,
        ElementPattern::PassiveReflector => {
            let amp = reflector_amplitude(dir);
            if amp > 0.0 {
                20.0 * amp.log10()
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

/// Field amplitude of an element: `10^(gain/20)`, with the reflector's
/// cos(incidence) taken directly and zero behind the surface.
pub fn element_amplitude(pattern: ElementPattern, dir: DirectionLocal) -> f64 {
    match pattern {
        ElementPattern::PassiveReflector => reflector_amplitude(dir),
        ElementPattern::Omni => 1.0,
        ElementPattern::Sectoral3gpp => 10f64.powf(element_gain_db(pattern, dir) / 20.0),
    }
}

fn reflector_amplitude(dir: DirectionLocal) -> f64 {
    let c = dir.zenith.sin() * dir.azimuth.cos();
    c.clamp(0.0, 1.0)
}

/// Spatial frequencies of a steering-frame direction along the horizontal
/// (`sinφ sinθ`) and vertical (`cosφ sinθ`) element axes.
#[inline]
pub(crate) fn axis_components(dir: DirectionLocal) -> (f64, f64) {
    let st = dir.zenith.sin();
    let (sp, cp) = dir.azimuth.sin_cos();
    (sp * st, cp * st)
}

/// Array factor of a uniformly progressive phase profile (β_y, β_z), for an
/// incident direction `aoa` and an observation direction `out_dir`, both in
/// the steering frame:
///
/// `AF = Σ_m Σ_n exp(j m (k·dy·(s_aoa − s_out) + β_y)) · exp(j n (k·dz·(c_aoa − c_out) + β_z))`
///
/// with `s = sinφ sinθ`, `c = cosφ sinθ` and `k = 2π` (spacings are in
/// wavelengths).
pub fn array_factor(
    panel: &AntennaPanel,
    beta_y: f64,
    beta_z: f64,
    aoa: DirectionLocal,
    out_dir: DirectionLocal,
) -> Complex64 {
    let (sa, ca) = axis_components(aoa);
    let (so, co) = axis_components(out_dir);
    let psi_y = TAU * panel.dy * (sa - so) + beta_y;
    let psi_z = TAU * panel.dz * (ca - co) + beta_z;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..panel.n_horizontal {
        for n in 0..panel.n_vertical {
            acc += Complex64::cis(m as f64 * psi_y) * Complex64::cis(n as f64 * psi_z);
        }
    }
    acc
}

/// Array factor for an arbitrary per-element phase profile (element order as
/// in [`element_positions`]).
pub fn array_factor_with_phases(
    panel: &AntennaPanel,
    phases: &[f64],
    aoa: DirectionLocal,
    out_dir: DirectionLocal,
) -> Complex64 {
    let (sa, ca) = axis_components(aoa);
    let (so, co) = axis_components(out_dir);
    let ky = TAU * panel.dy * (sa - so);
    let kz = TAU * panel.dz * (ca - co);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..panel.n_horizontal {
        for n in 0..panel.n_vertical {
            let i = m * panel.n_vertical + n;
            acc += Complex64::cis(m as f64 * ky + n as f64 * kz + phases[i]);
        }
    }
    acc
}
