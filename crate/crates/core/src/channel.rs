//! Large-scale (UMa path loss, shadowing, LOS state) and small-scale
//! (cluster/ray) synthesis for the direct BS→user link `H`, the BS→RIS link
//! `G` and the RIS→user link `F`, plus the effective channel `H + F·Θ·G`.

use std::f64::consts::{PI, TAU};
use std::ops::{Index, IndexMut};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arrays::{element_amplitude, steering_vector_from_unit, AntennaPanel};
use crate::error::{Error, Result};
use crate::geometry::Position3D;
use crate::ris::PhaseConfig;
use crate::rng::Stream;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const MIN_D2D: f64 = 10.0;
const EFFECTIVE_ENV_HEIGHT: f64 = 1.0;

static PATHLOSS_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Number of path-loss evaluations whose 2-D distance was clamped to the
/// model's 10 m lower validity bound, process-wide.
pub fn pathloss_clamp_count() -> u64 {
    PATHLOSS_CLAMPS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosMode {
    Probabilistic,
    Los,
    Nlos,
}

/// Environment profile: UMa defaults, all overridable from the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvProfile {
    pub carrier_ghz: f64,
    pub shadow_sigma_los_db: f64,
    pub shadow_sigma_nlos_db: f64,
    pub clusters_los: usize,
    pub clusters_nlos: usize,
    pub rays_per_cluster: usize,
    /// Ricean K-factor of the LOS specular ray.
    pub k_factor_db: f64,
    pub specular_los: bool,
    pub delay_scaling_los: f64,
    pub delay_scaling_nlos: f64,
    /// Per-cluster shadowing of the cluster powers.
    pub cluster_shadow_db: f64,
    /// Spread of the cluster mean angles around the LOS direction.
    pub cluster_asd_deg: f64,
    pub cluster_asa_deg: f64,
    pub cluster_zsd_deg: f64,
    pub cluster_zsa_deg: f64,
    /// Intra-cluster (ray offset) spreads.
    pub ray_asd_deg: f64,
    pub ray_asa_deg: f64,
    pub ray_zsd_deg: f64,
    pub ray_zsa_deg: f64,
    /// LOS state of BS→user and RIS→user links.
    pub access_los: LosMode,
    /// LOS state of the BS→RIS link.
    pub bs_ris_los: LosMode,
    pub bandwidth_mhz: f64,
    pub tx_power_dbm: f64,
    pub thermal_noise_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// User speed for the Doppler term; 0 gives a static snapshot.
    pub ue_speed_mps: f64,
    pub ue_heading_deg: f64,
    pub eval_time_s: f64,
}

impl Default for EnvProfile {
    fn default() -> Self {
        EnvProfile {
            carrier_ghz: 2.0,
            shadow_sigma_los_db: 4.0,
            shadow_sigma_nlos_db: 6.0,
            clusters_los: 8,
            clusters_nlos: 12,
            rays_per_cluster: 20,
            k_factor_db: 9.0,
            specular_los: true,
            delay_scaling_los: 2.5,
            delay_scaling_nlos: 2.3,
            cluster_shadow_db: 3.0,
            cluster_asd_deg: 15.0,
            cluster_asa_deg: 50.0,
            cluster_zsd_deg: 5.0,
            cluster_zsa_deg: 15.0,
            ray_asd_deg: 5.0,
            ray_asa_deg: 11.0,
            ray_zsd_deg: 3.0,
            ray_zsa_deg: 7.0,
            access_los: LosMode::Probabilistic,
            bs_ris_los: LosMode::Los,
            bandwidth_mhz: 10.0,
            tx_power_dbm: 43.0,
            thermal_noise_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            ue_speed_mps: 0.0,
            ue_heading_deg: 0.0,
            eval_time_s: 0.0,
        }
    }
}

impl EnvProfile {
    /// One deterministic ray along the geometric path: one cluster, one ray,
    /// no angular spread, no specular split.
    pub fn single_path() -> Self {
        EnvProfile {
            clusters_los: 1,
            clusters_nlos: 1,
            rays_per_cluster: 1,
            specular_los: false,
            cluster_shadow_db: 0.0,
            cluster_asd_deg: 0.0,
            cluster_asa_deg: 0.0,
            cluster_zsd_deg: 0.0,
            cluster_zsa_deg: 0.0,
            ray_asd_deg: 0.0,
            ray_asa_deg: 0.0,
            ray_zsd_deg: 0.0,
            ray_zsa_deg: 0.0,
            ..EnvProfile::default()
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)
    }

    pub fn doppler(&self) -> DopplerSpec {
        DopplerSpec {
            speed: self.ue_speed_mps,
            time: self.eval_time_s,
            heading_deg: self.ue_heading_deg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_ghz > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if self.clusters_los == 0 || self.clusters_nlos == 0 || self.rays_per_cluster == 0 {
            return Err(Error::invalid("cluster and ray counts must be >= 1"));
        }
        if !(self.shadow_sigma_los_db >= 0.0) || !(self.shadow_sigma_nlos_db >= 0.0) {
            return Err(Error::invalid("shadow fading sigma must be >= 0"));
        }
        if !(self.bandwidth_mhz > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        let finite = [
            self.k_factor_db,
            self.tx_power_dbm,
            self.thermal_noise_dbm_hz,
            self.noise_figure_db,
            self.ue_speed_mps,
            self.ue_heading_deg,
            self.eval_time_s,
            self.cluster_shadow_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("environment values must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale {
    pub pathloss_db: f64,
    pub shadow_db: f64,
    pub is_los: bool,
}

impl LargeScale {
    /// Amplitude scaling `10^(-(PL+SF)/20)`.
    pub fn amplitude(&self) -> f64 {
        10f64.powf(-(self.pathloss_db + self.shadow_db) / 20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkRole {
    /// BS→user, `H`.
    Direct,
    /// BS→RIS, `G`.
    BsToRis,
    /// RIS→user, `F`.
    RisToUser,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DopplerSpec {
    /// Receiver speed in m/s.
    pub speed: f64,
    /// Evaluation time in seconds.
    pub time: f64,
    /// Heading of the receiver velocity, degrees from global +x.
    pub heading_deg: f64,
}

/// End points of a link after the wraparound image has been applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx: Position3D,
    pub rx: Position3D,
}

impl LinkGeometry {
    pub fn new(tx: Position3D, rx: Position3D) -> Self {
        LinkGeometry { tx, rx }
    }

    pub fn d2d(&self) -> f64 {
        self.tx.distance_2d(&self.rx)
    }

    pub fn d3d(&self) -> f64 {
        self.tx.distance_3d(&self.rx)
    }
}

/// UMa LOS probability.
pub fn los_probability(d2d: f64) -> f64 {
    if d2d <= 18.0 {
        1.0
    } else {
        18.0 / d2d + (-d2d / 63.0).exp() * (1.0 - 18.0 / d2d)
    }
}

/// UMa path loss in dB (`fc` in GHz). Distances below the 10 m validity
/// bound are clamped and counted, see [`pathloss_clamp_count`].
pub fn pathloss_uma_db(d2d: f64, d3d: f64, fc: f64, h_bs: f64, h_ut: f64, los: bool) -> f64 {
    let dh = h_bs - h_ut;
    let (d2d, d3d) = if d2d < MIN_D2D {
        PATHLOSS_CLAMPS.fetch_add(1, Ordering::Relaxed);
        (MIN_D2D, (MIN_D2D * MIN_D2D + dh * dh).sqrt())
    } else {
        (d2d, d3d)
    };
    let hb = (h_bs - EFFECTIVE_ENV_HEIGHT).max(0.0);
    let hu = (h_ut - EFFECTIVE_ENV_HEIGHT).max(0.0);
    let d_bp = 4.0 * hb * hu * fc * 1e9 / SPEED_OF_LIGHT;
    let pl_los = if d2d <= d_bp {
        28.0 + 22.0 * d3d.log10() + 20.0 * fc.log10()
    } else {
        28.0 + 40.0 * d3d.log10() + 20.0 * fc.log10() - 9.0 * (d_bp * d_bp + dh * dh).log10()
    };
    if los {
        pl_los
    } else {
        let pl_nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * fc.log10() - 0.6 * (h_ut - 1.5);
        pl_los.max(pl_nlos)
    }
}

/// Draws LOS state and shadowing for a link and evaluates its path loss.
pub fn draw_large_scale(
    geom: &LinkGeometry,
    env: &EnvProfile,
    mode: LosMode,
    rng: &mut Stream,
) -> LargeScale {
    let d2d = geom.d2d();
    let u: f64 = rng.random();
    let is_los = match mode {
        LosMode::Probabilistic => u < los_probability(d2d),
        LosMode::Los => true,
        LosMode::Nlos => false,
    };
    let z: f64 = StandardNormal.sample(rng);
    let sigma = if is_los {
        env.shadow_sigma_los_db
    } else {
        env.shadow_sigma_nlos_db
    };
    LargeScale {
        pathloss_db: pathloss_uma_db(d2d, geom.d3d(), env.carrier_ghz, geom.tx.z, geom.rx.z, is_los),
        shadow_db: sigma * z,
        is_los,
    }
}

/// Angular offsets (radians) of one ray from the geometric LOS directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub power: f64,
    pub aod_azimuth: f64,
    pub aod_zenith: f64,
    pub aoa_azimuth: f64,
    pub aoa_zenith: f64,
    /// Initial phase on (−π, π].
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub power: f64,
    pub aod_azimuth: f64,
    pub aod_zenith: f64,
    pub aoa_azimuth: f64,
    pub aoa_zenith: f64,
    pub rays: Vec<Ray>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    /// Power of the LOS specular ray, when present.
    pub specular_power: Option<f64>,
}

impl ClusterSet {
    pub fn total_power(&self) -> f64 {
        self.clusters.iter().map(|c| c.power).sum::<f64>() + self.specular_power.unwrap_or(0.0)
    }

    pub fn ray_count(&self) -> usize {
        self.clusters.iter().map(|c| c.rays.len()).sum::<usize>()
            + usize::from(self.specular_power.is_some())
    }
}

fn laplace(rng: &mut Stream, std_dev: f64) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn gaussian(rng: &mut Stream, std_dev: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std_dev * z
}

/// Draws clusters and rays: exponential-decay cluster powers with per-cluster
/// shadowing, Gaussian cluster means, Laplacian ray offsets and uniform ray
/// phases. Powers (including the LOS specular ray) sum to one.
pub fn synth_clusters(env: &EnvProfile, los: bool, rng: &mut Stream) -> ClusterSet {
    let n = if los { env.clusters_los } else { env.clusters_nlos };
    let r_tau = if los {
        env.delay_scaling_los
    } else {
        env.delay_scaling_nlos
    };
    let mut clusters = Vec::with_capacity(n);
    for _ in 0..n {
        let x = -(1.0 - rng.random::<f64>()).ln();
        let z = gaussian(rng, env.cluster_shadow_db);
        let power = (-x * (r_tau - 1.0) / r_tau).exp() * 10f64.powf(-z / 10.0);
        let aod_azimuth = gaussian(rng, env.cluster_asd_deg.to_radians());
        let aod_zenith = gaussian(rng, env.cluster_zsd_deg.to_radians());
        let aoa_azimuth = gaussian(rng, env.cluster_asa_deg.to_radians());
        let aoa_zenith = gaussian(rng, env.cluster_zsa_deg.to_radians());
        let rays = (0..env.rays_per_cluster)
            .map(|_| Ray {
                power: 0.0,
                aod_azimuth: aod_azimuth + laplace(rng, env.ray_asd_deg.to_radians()),
                aod_zenith: aod_zenith + laplace(rng, env.ray_zsd_deg.to_radians()),
                aoa_azimuth: aoa_azimuth + laplace(rng, env.ray_asa_deg.to_radians()),
                aoa_zenith: aoa_zenith + laplace(rng, env.ray_zsa_deg.to_radians()),
                phase: PI - TAU * rng.random::<f64>(),
            })
            .collect();
        clusters.push(Cluster {
            power,
            aod_azimuth,
            aod_zenith,
            aoa_azimuth,
            aoa_zenith,
            rays,
        });
    }
    let specular_power = (los && env.specular_los).then(|| {
        let k = 10f64.powf(env.k_factor_db / 10.0);
        k / (k + 1.0)
    });
    let scatter_total = 1.0 - specular_power.unwrap_or(0.0);
    let sum: f64 = clusters.iter().map(|c| c.power).sum();
    for c in &mut clusters {
        c.power *= scatter_total / sum;
        let per_ray = c.power / c.rays.len() as f64;
        for r in &mut c.rays {
            r.power = per_ray;
        }
    }
    ClusterSet {
        clusters,
        specular_power,
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    /// Rows are receive elements, columns transmit elements.
    pub matrix: CMatrix,
    pub large_scale: LargeScale,
    pub role: LinkRole,
}

fn direction_vector(zenith: f64, azimuth: f64) -> [f64; 3] {
    let (st, ct) = zenith.sin_cos();
    let (sp, cp) = azimuth.sin_cos();
    [st * cp, st * sp, ct]
}

fn zenith_azimuth(v: [f64; 3]) -> (f64, f64) {
    (v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

/// Synthesises the channel matrix of one link.
///
/// Entry (u, m) sums, over rays, `√P · g_rx · g_tx · exp(j2π r_rx·d_u) ·
/// exp(j2π r_tx·d_m) · exp(jψ) · exp(j2π (r_rx·v̂) ν t / λ)`, then scales by
/// the large-scale amplitude. The Doppler factor is left out for
/// [`LinkRole::BsToRis`] since the RIS does not move.
pub fn synth_link(
    tx_panel: &AntennaPanel,
    rx_panel: &AntennaPanel,
    geom: &LinkGeometry,
    clusters: &ClusterSet,
    large: &LargeScale,
    doppler: &DopplerSpec,
    role: LinkRole,
    wavelength: f64,
) -> Result<LinkChannel> {
    let (n_rx, n_tx) = (rx_panel.element_count(), tx_panel.element_count());
    if n_rx == 0 || n_tx == 0 {
        return Err(Error::invalid("panels must have at least one element"));
    }
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength must be positive"));
    }
    let dep = geom.tx.direction_to(&geom.rx);
    let arr = geom.rx.direction_to(&geom.tx);
    let (zd, ad) = zenith_azimuth(dep);
    let (za, aa) = zenith_azimuth(arr);
    let heading = doppler.heading_deg.to_radians();
    let velocity = [heading.cos(), heading.sin(), 0.0];
    let doppler_on = role != LinkRole::BsToRis && doppler.speed != 0.0 && doppler.time != 0.0;

    let mut matrix = CMatrix::zeros(n_rx, n_tx);
    let mut add_ray = |dep_g: [f64; 3], arr_g: [f64; 3], power: f64, phase: f64| {
        let tx_local = tx_panel.to_local(dep_g);
        let rx_local = rx_panel.to_local(arr_g);
        let g = element_amplitude(tx_panel.pattern, crate::arrays::DirectionLocal::from_vector(tx_local))
            * element_amplitude(rx_panel.pattern, crate::arrays::DirectionLocal::from_vector(rx_local));
        if g == 0.0 || power == 0.0 {
            return;
        }
        let mut total_phase = phase;
        if doppler_on {
            let proj = arr_g[0] * velocity[0] + arr_g[1] * velocity[1] + arr_g[2] * velocity[2];
            total_phase += TAU * proj * doppler.speed * doppler.time / wavelength;
        }
        let coeff = Complex64::from_polar(power.sqrt() * g, total_phase);
        let a_tx = steering_vector_from_unit(tx_panel, tx_local);
        let a_rx = steering_vector_from_unit(rx_panel, rx_local);
        for (u, ar) in a_rx.iter().enumerate() {
            let w = coeff * ar;
            let row = &mut matrix.data[u * n_tx..(u + 1) * n_tx];
            for (z, at) in row.iter_mut().zip(&a_tx) {
                *z += w * at;
            }
        }
    };

    if let Some(p) = clusters.specular_power {
        let phase = -TAU * (geom.d3d() / wavelength).fract();
        add_ray(dep, arr, p, phase);
    }
    for c in &clusters.clusters {
        for r in &c.rays {
            add_ray(
                direction_vector(zd + r.aod_zenith, ad + r.aod_azimuth),
                direction_vector(za + r.aoa_zenith, aa + r.aoa_azimuth),
                r.power,
                r.phase,
            );
        }
    }
    matrix.scale(large.amplitude());
    Ok(LinkChannel {
        matrix,
        large_scale: *large,
        role,
    })
}

/// `H + F·Θ·G` with `Θ = diag(e^{jθ_n})`; returns a U×M matrix.
pub fn effective_channel(h: &CMatrix, f: &CMatrix, g: &CMatrix, theta: &PhaseConfig) -> Result<CMatrix> {
    let (u, m, n) = (h.rows, h.cols, g.rows);
    if f.rows != u || f.cols != n || g.cols != m || theta.phases.len() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: H {}x{}, F {}x{}, G {}x{}, theta {}",
            h.rows,
            h.cols,
            f.rows,
            f.cols,
            g.rows,
            g.cols,
            theta.phases.len()
        )));
    }
    let rot: Vec<Complex64> = theta.phases.iter().map(|&t| Complex64::cis(t)).collect();
    let mut out = h.clone();
    for r in 0..u {
        for k in 0..n {
            let w = f[(r, k)] * rot[k];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let grow = g.row(k);
            let orow = &mut out.data[r * m..(r + 1) * m];
            for (o, gv) in orow.iter_mut().zip(grow) {
                *o += w * gv;
            }
        }
    }
    Ok(out)
}
