//! Monte-Carlo driver.
//!
//! A drop places users, synthesises every direct link `H` (user × sector,
//! nearest wraparound image), every RIS→user link `F` (user × RIS, same image
//! as the sector's BS) and each sector's own BS→RIS link `G`. Channels are
//! shared by all strategies evaluated in the same campaign, so strategy
//! comparisons are paired.
//!
//! Per user: attachment is by direct-link power; the serving sector's RIS is
//! configured for that user; every other sector transmits to its own
//! scheduled user with its RIS configured for that user, and the BS precoder
//! is the matched filter of the intended user's effective channel.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrays::{AntennaPanel, ElementPattern};
use crate::channel::{draw_large_scale, synth_clusters, synth_link, CMatrix, LinkGeometry, LinkRole};
use crate::config::{SimConfig, StrategySpec};
use crate::error::{Error, Result};
use crate::geometry::{build_hex_layout_with, drop_users, place_ris, wrap_distance, NetworkLayout, UserDrop};
use crate::metrics::{
    coupling_loss_db, dbm_to_watts, empirical_cdf, noise_power_watts, sinr, spectral_efficiency, to_db,
    watts_to_dbm, DropMetrics, EmpiricalCdf, Metric, UserMetrics,
};
use crate::ris::{ideal_phases, make_codebook, quantize_phases, random_phases, BeamCodebook, PhaseConfig};
use crate::rng::{stream, tag};

const ALTERNATION_ROUNDS: usize = 64;
const POWER_ITERATIONS: usize = 200;

/// Scalar view of a served link under the final precoder `w`:
/// `|H·w|` and `Σ_n |F_n (G·w)_n|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarLink {
    pub direct_mag: f64,
    pub cascade_sum: f64,
    pub elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropResult {
    pub drop_index: usize,
    pub strategy: StrategySpec,
    pub metrics: DropMetrics,
    /// Filled for `ideal` and `discrete` users.
    pub links: Vec<Option<ScalarLink>>,
    /// Links whose 2-D distance fell below the path-loss validity bound.
    pub clamped_links: usize,
}

/// Channels of one drop.
#[derive(Debug, Clone)]
pub struct DropChannels {
    pub users: UserDrop,
    /// `h[k * S + j]`: 1×M direct channel from sector `j` to user `k`.
    pub h: Vec<CMatrix>,
    /// `f[k * S + j]`: 1×N channel from RIS `j` to user `k`.
    pub f: Vec<CMatrix>,
    /// `g[j]`: N×M channel from BS `j` to its own RIS.
    pub g: Vec<CMatrix>,
    pub scheduled: Vec<usize>,
    pub clamped_links: usize,
}

impl DropChannels {
    fn sectors(&self) -> usize {
        self.g.len().max(self.h.len() / self.users.positions.len().max(1))
    }
}

/// Serving-sector index per user: argmax of `‖H‖²` (any common transmit
/// power cancels), ties to the lower sector index.
pub fn attach_users(direct_power: &[Vec<f64>]) -> Vec<usize> {
    direct_power
        .iter()
        .map(|row| {
            let mut best = 0;
            for (j, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn dot(row: &[Complex64], w: &[Complex64]) -> Complex64 {
    row.iter().zip(w).map(|(a, b)| a * b).sum()
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Matched-filter precoder `h^H / ‖h‖`; all-zero channels get a uniform
/// unit-norm vector.
pub fn mrt(h: &[Complex64]) -> Vec<Complex64> {
    let n = norm_sq(h).sqrt();
    if n == 0.0 {
        let u = 1.0 / (h.len() as f64).sqrt();
        return vec![Complex64::new(u, 0.0); h.len()];
    }
    h.iter().map(|z| z.conj() / n).collect()
}

/// `H + F·Θ·G` for a single-antenna user; `None` leaves the RIS out.
pub fn effective_row(h: &[Complex64], f: &[Complex64], g: &CMatrix, phases: Option<&PhaseConfig>) -> Vec<Complex64> {
    let mut out = h.to_vec();
    if let Some(p) = phases {
        for (n, (&fn_, &t)) in f.iter().zip(&p.phases).enumerate() {
            let c = fn_ * Complex64::cis(t);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (o, gv) in out.iter_mut().zip(g.row(n)) {
                *o += c * gv;
            }
        }
    }
    out
}

/// Dominant right singular vector of `g` by power iteration on `GᴴG`.
pub fn dominant_right_singular(g: &CMatrix) -> Vec<Complex64> {
    let m = g.cols;
    let mut v = vec![Complex64::new(1.0 / (m as f64).sqrt(), 0.0); m];
    for _ in 0..POWER_ITERATIONS {
        let gv = g.mul_vec(&v);
        let mut next = vec![Complex64::new(0.0, 0.0); m];
        for (n, x) in gv.iter().enumerate() {
            for (o, gnm) in next.iter_mut().zip(g.row(n)) {
                *o += gnm.conj() * x;
            }
        }
        let nn = norm_sq(&next).sqrt();
        if nn == 0.0 {
            break;
        }
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a / nn - b).norm_sqr()).sum();
        v = next.into_iter().map(|z| z / nn).collect();
        if delta < 1e-28 {
            break;
        }
    }
    v
}

/// Per-element cascade terms `r_n = F_n (G·w)_n`.
pub fn cascade_terms(f: &[Complex64], g: &CMatrix, w: &[Complex64]) -> Vec<Complex64> {
    g.mul_vec(w).iter().zip(f).map(|(gw, fv)| gw * fv).collect()
}

#[derive(Debug, Clone)]
pub struct IdealSolution {
    pub phases: PhaseConfig,
    pub power_gain: f64,
    pub link: ScalarLink,
}

/// Co-phasing RIS configuration for a matched-filter BS.
///
/// Starts from two precoders (matched to `H`, and the dominant direction of
/// `G`), alternates "co-phase for the current precoder" with "matched
/// filter to the new effective channel" until the gain stops growing, and
/// keeps the better result. Each step cannot lower `‖h_eq‖²`.
pub fn ideal_configuration(h: &[Complex64], f: &[Complex64], g: &CMatrix) -> IdealSolution {
    let starts = [mrt(h), dominant_right_singular(g)];
    let mut best: Option<IdealSolution> = None;
    for w0 in starts {
        let mut w = w0;
        let mut current: Option<(PhaseConfig, f64)> = None;
        for _ in 0..ALTERNATION_ROUNDS {
            let r = cascade_terms(f, g, &w);
            let phases = ideal_phases(dot(h, &w), &r);
            let eff = effective_row(h, f, g, Some(&phases));
            let p = norm_sq(&eff);
            let improved = current.as_ref().map_or(true, |(_, q)| p > *q * (1.0 + 1e-14));
            if current.as_ref().map_or(true, |(_, q)| p >= *q) {
                current = Some((phases, p));
            }
            if !improved {
                break;
            }
            w = mrt(&eff);
        }
        let (phases, p) = current.expect("at least one round runs");
        if best.as_ref().map_or(true, |b| p > b.power_gain) {
            let eff = effective_row(h, f, g, Some(&phases));
            let w = mrt(&eff);
            let link = ScalarLink {
                direct_mag: dot(h, &w).norm(),
                cascade_sum: cascade_terms(f, g, &w).iter().map(|z| z.norm()).sum(),
                elements: f.len(),
            };
            best = Some(IdealSolution {
                phases,
                power_gain: p,
                link,
            });
        }
    }
    best.expect("two starting points")
}

/// Best codebook beam for one user, or `None` when the direct link alone
/// is strongest. Returns the winning `‖h_eq‖²`.
pub fn select_best_beam(h: &[Complex64], f: &[Complex64], g: &CMatrix, codebook: &BeamCodebook) -> (Option<usize>, f64) {
    let mut best = (None, norm_sq(h));
    for (b, beam) in codebook.beams.iter().enumerate() {
        let p = norm_sq(&effective_row(h, f, g, Some(&beam.config)));
        if p > best.1 {
            best = (Some(b), p);
        }
    }
    best
}

/// RIS state chosen for one (sector, intended user) pair.
#[derive(Debug, Clone)]
struct RisChoice {
    phases: Option<PhaseConfig>,
    beam: Option<usize>,
    link: Option<ScalarLink>,
}

/// Precomputed per-campaign state: layout, panels, codebooks.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    strategies: Vec<StrategySpec>,
    layout: NetworkLayout,
    bs_panels: Vec<AntennaPanel>,
    ris_panels: Vec<AntennaPanel>,
    ut_panel: AntennaPanel,
    codebooks: BTreeMap<usize, Vec<BeamCodebook>>,
    tx_power_w: f64,
    noise_w: f64,
}

impl Simulator {
    pub fn new(config: SimConfig, strategies: &[StrategySpec]) -> Result<Self> {
        config.validate()?;
        if strategies.is_empty() {
            return Err(Error::invalid("at least one strategy is required"));
        }
        for s in strategies {
            match s {
                StrategySpec::Codebook(0) | StrategySpec::Discrete(0) => {
                    return Err(Error::invalid(format!("invalid strategy {s}")))
                }
                _ => {}
            }
        }
        let l = &config.layout;
        let layout = place_ris(
            &build_hex_layout_with(l.isd, l.num_rings, l.bs_height, l.downtilt_deg)?,
            l.ris_height,
        );
        let p = &config.panels;
        let bs_panels = layout
            .sectors
            .iter()
            .map(|s| {
                AntennaPanel::new(p.bs_horizontal, p.bs_vertical, ElementPattern::Sectoral3gpp)
                    .with_spacing(p.bs_spacing, p.bs_spacing)
                    .oriented(s.boresight_azimuth, s.downtilt)
            })
            .collect::<Vec<_>>();
        let ris_panels = layout
            .ris
            .iter()
            .map(|r| {
                AntennaPanel::new(p.ris_horizontal, p.ris_vertical, ElementPattern::PassiveReflector)
                    .with_spacing(p.ris_spacing, p.ris_spacing)
                    .oriented(r.boresight_azimuth, 0.0)
            })
            .collect::<Vec<_>>();
        let mut codebooks = BTreeMap::new();
        for s in strategies {
            if let StrategySpec::Codebook(b) = *s {
                if codebooks.contains_key(&b) {
                    continue;
                }
                let books = layout
                    .ris
                    .iter()
                    .zip(&layout.sectors)
                    .zip(&ris_panels)
                    .map(|((ris, sector), panel)| {
                        let aoa = panel.local_direction(ris.position.direction_to(&sector.bs_position));
                        make_codebook(panel, aoa, b, config.strategy.codebook_span_deg, config.codebook_zenith_deg())
                    })
                    .collect::<Result<Vec<_>>>()?;
                codebooks.insert(b, books);
            }
        }
        let env = &config.environment;
        let tx_power_w = dbm_to_watts(env.tx_power_dbm);
        let noise_w = noise_power_watts(env.thermal_noise_dbm_hz, env.bandwidth_mhz * 1e6, env.noise_figure_db);
        Ok(Simulator {
            strategies: strategies.to_vec(),
            layout,
            bs_panels,
            ris_panels,
            ut_panel: AntennaPanel::new(1, 1, ElementPattern::Omni),
            codebooks,
            tx_power_w,
            noise_w,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    pub fn strategies(&self) -> &[StrategySpec] {
        &self.strategies
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_w
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power_w
    }

    fn needs_ris(&self) -> bool {
        self.strategies.iter().any(StrategySpec::uses_ris)
    }

    /// Drops users and synthesises all links of drop `d`.
    pub fn synthesize_drop(&self, d: usize) -> Result<DropChannels> {
        let seed = self.config.run.seed;
        let d64 = d as u64;
        let l = &self.config.layout;
        let env = &self.config.environment;
        let wavelength = env.wavelength();
        let doppler = env.doppler();
        let mut users = drop_users(
            &self.layout,
            l.users_per_sector,
            l.min_bs_distance,
            l.ut_height,
            &mut stream(seed, &[tag::DROP, d64, tag::USERS]),
        )?;
        let s_count = self.layout.sectors.len();
        let k_count = users.positions.len();
        let with_ris = self.needs_ris();
        let mut clamped = 0;

        let mut link = |role: LinkRole, tx_panel: &AntennaPanel, rx_panel: &AntennaPanel, geom: LinkGeometry, path: &[u64]| {
            let mode = match role {
                LinkRole::BsToRis => env.bs_ris_los,
                _ => env.access_los,
            };
            if geom.d2d() < 10.0 {
                clamped += 1;
            }
            let mut ls_path = path.to_vec();
            ls_path.push(tag::LARGE_SCALE);
            let large = draw_large_scale(&geom, env, mode, &mut stream(seed, &ls_path));
            let mut cl_path = path.to_vec();
            cl_path.push(tag::CLUSTERS);
            let clusters = synth_clusters(env, large.is_los, &mut stream(seed, &cl_path));
            synth_link(tx_panel, rx_panel, &geom, &clusters, &large, &doppler, role, wavelength).map(|c| c.matrix)
        };

        let mut g = Vec::new();
        if with_ris {
            for j in 0..s_count {
                let geom = LinkGeometry::new(self.layout.sectors[j].bs_position, self.layout.ris[j].position);
                g.push(link(LinkRole::BsToRis, &self.bs_panels[j], &self.ris_panels[j], geom, &[tag::DROP, d64, tag::LINK_BS_RIS, j as u64])?);
            }
        }
        let mut h = Vec::with_capacity(k_count * s_count);
        let mut f = Vec::with_capacity(if with_ris { k_count * s_count } else { 0 });
        for (k, pos) in users.positions.iter().enumerate() {
            for j in 0..s_count {
                let bs = self.layout.sectors[j].bs_position;
                let offset = wrap_distance(&self.layout, pos, &bs).offset;
                let path = [tag::DROP, d64, tag::LINK_DIRECT, j as u64, k as u64];
                h.push(link(LinkRole::Direct, &self.bs_panels[j], &self.ut_panel, LinkGeometry::new(bs.translated(offset), *pos), &path)?);
                if with_ris {
                    let ris = self.layout.ris[j].position.translated(offset);
                    let path = [tag::DROP, d64, tag::LINK_RIS_USER, j as u64, k as u64];
                    f.push(link(LinkRole::RisToUser, &self.ris_panels[j], &self.ut_panel, LinkGeometry::new(ris, *pos), &path)?);
                }
            }
        }

        let powers: Vec<Vec<f64>> = (0..k_count)
            .map(|k| (0..s_count).map(|j| h[k * s_count + j].frobenius_sq()).collect())
            .collect();
        let serving = attach_users(&powers);
        for (slot, s) in users.serving_sector.iter_mut().zip(&serving) {
            *slot = Some(*s);
        }
        let scheduled = (0..s_count)
            .map(|j| {
                let mut pool: Vec<usize> = (0..k_count).filter(|&k| serving[k] == j).collect();
                if pool.is_empty() {
                    pool = (0..k_count).filter(|&k| users.drop_sector[k] == j).collect();
                }
                let mut rng = stream(seed, &[tag::DROP, d64, tag::SCHEDULE, j as u64]);
                pool[rng.random_range(0..pool.len())]
            })
            .collect();
        Ok(DropChannels {
            users,
            h,
            f,
            g,
            scheduled,
            clamped_links: clamped,
        })
    }

    fn choose(&self, ch: &DropChannels, spec: StrategySpec, j: usize, k: usize, random: &[PhaseConfig]) -> Result<RisChoice> {
        let s = ch.sectors();
        let h = ch.h[k * s + j].row(0);
        let none = RisChoice {
            phases: None,
            beam: None,
            link: None,
        };
        Ok(match spec {
            StrategySpec::NoRis => none,
            StrategySpec::Random => RisChoice {
                phases: Some(random[j].clone()),
                ..none
            },
            StrategySpec::Codebook(b) => {
                let book = &self.codebooks[&b][j];
                let (beam, _) = select_best_beam(h, ch.f[k * s + j].row(0), &ch.g[j], book);
                RisChoice {
                    phases: beam.map(|i| book.beams[i].config.clone()),
                    beam,
                    link: None,
                }
            }
            StrategySpec::Ideal => {
                let sol = ideal_configuration(h, ch.f[k * s + j].row(0), &ch.g[j]);
                RisChoice {
                    phases: Some(sol.phases),
                    beam: None,
                    link: Some(sol.link),
                }
            }
            StrategySpec::Discrete(dl) => {
                let f = ch.f[k * s + j].row(0);
                let sol = ideal_configuration(h, f, &ch.g[j]);
                let q = quantize_phases(&sol.phases, dl)?;
                let eff = effective_row(h, f, &ch.g[j], Some(&q));
                let w = mrt(&eff);
                let link = ScalarLink {
                    direct_mag: dot(h, &w).norm(),
                    cascade_sum: cascade_terms(f, &ch.g[j], &w).iter().map(|z| z.norm()).sum(),
                    elements: f.len(),
                };
                RisChoice {
                    phases: Some(q),
                    beam: None,
                    link: Some(link),
                }
            }
        })
    }

    fn eff(&self, ch: &DropChannels, j: usize, k: usize, phases: Option<&PhaseConfig>) -> Vec<Complex64> {
        let s = ch.sectors();
        let h = ch.h[k * s + j].row(0);
        match phases {
            Some(p) => effective_row(h, ch.f[k * s + j].row(0), &ch.g[j], Some(p)),
            None => h.to_vec(),
        }
    }

    /// Evaluates one strategy on already synthesised channels.
    pub fn evaluate(&self, ch: &DropChannels, d: usize, spec: StrategySpec) -> Result<DropResult> {
        let s_count = self.layout.sectors.len();
        let n = self.config.ris_elements();
        let random = if spec == StrategySpec::Random {
            (0..s_count)
                .map(|j| random_phases(n, &mut stream(self.config.run.seed, &[tag::DROP, d as u64, tag::RANDOM_PHASES, j as u64])))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let mute = self.config.run.mute_interferers;
        // what each sector transmits towards its own scheduled user
        let tx_state = if mute {
            Vec::new()
        } else {
            (0..s_count)
                .map(|j| {
                    let u = ch.scheduled[j];
                    let c = self.choose(ch, spec, j, u, &random)?;
                    let w = mrt(&self.eff(ch, j, u, c.phases.as_ref()));
                    Ok((c.phases, w))
                })
                .collect::<Result<Vec<_>>>()?
        };

        let p_w = self.tx_power_w;
        let p_dbm = self.config.environment.tx_power_dbm;
        let mut users = Vec::with_capacity(ch.users.positions.len());
        let mut links = Vec::with_capacity(users.capacity());
        for k in 0..ch.users.positions.len() {
            let serving = ch.users.serving_sector[k].expect("attached during synthesis");
            let choice = self.choose(ch, spec, serving, k, &random)?;
            let eff = self.eff(ch, serving, k, choice.phases.as_ref());
            let rx = p_w * norm_sq(&eff);
            let interference: Vec<f64> = tx_state
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != serving)
                .map(|(j, (phases, w))| p_w * dot(&self.eff(ch, j, k, phases.as_ref()), w).norm_sqr())
                .collect();
            let snr = rx / self.noise_w;
            let sinr_lin = sinr(rx, &interference, self.noise_w)?;
            users.push(UserMetrics {
                coupling_loss_db: coupling_loss_db(p_dbm, watts_to_dbm(rx)),
                sinr_db: to_db(sinr_lin),
                snr_db: to_db(snr),
                spectral_eff: spectral_efficiency(sinr_lin),
                serving_sector: serving,
                best_beam: choice.beam,
            });
            links.push(choice.link);
        }
        Ok(DropResult {
            drop_index: d,
            strategy: spec,
            metrics: DropMetrics { users },
            links,
            clamped_links: ch.clamped_links,
        })
    }

    /// Runs drop `d` for every configured strategy on shared channels.
    pub fn run_drop(&self, d: usize) -> Result<Vec<DropResult>> {
        let ch = self.synthesize_drop(d)?;
        self.strategies.iter().map(|&s| self.evaluate(&ch, d, s)).collect()
    }

    /// Runs all drops. `threads = 0` uses the global pool; results do not
    /// depend on the thread count.
    pub fn run_campaign(&self, threads: usize) -> Result<CampaignResult> {
        let drops = self.config.run.drops;
        let work = || (0..drops).into_par_iter().map(|d| self.run_drop(d)).collect::<Result<Vec<_>>>();
        let per_drop = if threads == 0 {
            work()?
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
                .install(work)?
        };
        let mut outcomes: Vec<StrategyOutcome> = self
            .strategies
            .iter()
            .map(|&spec| StrategyOutcome { spec, drops: Vec::with_capacity(drops) })
            .collect();
        for results in per_drop {
            for (o, r) in outcomes.iter_mut().zip(results) {
                o.drops.push(r);
            }
        }
        Ok(CampaignResult {
            config: self.config.clone(),
            outcomes,
        })
    }
}

/// Runs drop `d` of the configured strategy.
pub fn run_drop(config: &SimConfig, d: usize) -> Result<DropResult> {
    let spec = config.strategy_spec()?;
    let sim = Simulator::new(config.clone(), &[spec])?;
    Ok(sim.run_drop(d)?.remove(0))
}

/// Runs the configured strategy over all drops on the global thread pool.
pub fn run_campaign(config: &SimConfig) -> Result<CampaignResult> {
    let spec = config.strategy_spec()?;
    Simulator::new(config.clone(), &[spec])?.run_campaign(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutcome {
    pub spec: StrategySpec,
    pub drops: Vec<DropResult>,
}

impl StrategyOutcome {
    pub fn users(&self) -> impl Iterator<Item = &UserMetrics> {
        self.drops.iter().flat_map(|d| d.metrics.users.iter())
    }

    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.users().map(|u| metric.of(u)).collect()
    }

    pub fn cdf(&self, metric: Metric) -> Result<EmpiricalCdf> {
        empirical_cdf(&self.values(metric))
    }

    pub fn median(&self, metric: Metric) -> Result<f64> {
        Ok(self.cdf(metric)?.median())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub config: SimConfig,
    pub outcomes: Vec<StrategyOutcome>,
}

impl CampaignResult {
    pub fn outcome(&self, spec: StrategySpec) -> Option<&StrategyOutcome> {
        self.outcomes.iter().find(|o| o.spec == spec)
    }

    pub fn clamped_links(&self) -> usize {
        self.outcomes
            .first()
            .map_or(0, |o| o.drops.iter().map(|d| d.clamped_links).sum())
    }
}
