//! C ABI over the `rissim` simulator.
//!
//! Handles are opaque heap objects owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`RissimStatus`];
//! on failure a message is available from [`rissim_last_error`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rissim::cli::resolve_strategies;
use rissim::config::{SimConfig, StrategySpec};
use rissim::engine::{CampaignResult, Simulator};
use rissim::metrics::Metric;
use rissim::output::write_results;
use rissim::theory::{self, RateInputs};
use rissim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RissimStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    ConfigError = 3,
    RuntimeError = 4,
    DomainError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RissimMetric {
    CouplingLossDb = 0,
    SinrDb = 1,
    SnrDb = 2,
    SpectralEfficiency = 3,
}

impl From<RissimMetric> for Metric {
    fn from(m: RissimMetric) -> Self {
        match m {
            RissimMetric::CouplingLossDb => Metric::CouplingLoss,
            RissimMetric::SinrDb => Metric::Sinr,
            RissimMetric::SnrDb => Metric::Snr,
            RissimMetric::SpectralEfficiency => Metric::SpectralEfficiency,
        }
    }
}

/// Simulation configuration plus the strategies and thread count to run.
pub struct RissimConfig {
    config: SimConfig,
    strategies: Option<Vec<StrategySpec>>,
    threads: usize,
}

/// Results of a finished campaign.
pub struct RissimCampaign {
    result: CampaignResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

struct Failure(RissimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => RissimStatus::InvalidArgument,
            Error::Domain(_) => RissimStatus::DomainError,
            Error::Config { .. } => RissimStatus::ConfigError,
            Error::Io { .. } => RissimStatus::RuntimeError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RissimStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(RissimStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RissimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RissimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RissimStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn config_mut<'a>(cfg: *mut RissimConfig) -> Result<&'a mut RissimConfig, Failure> {
    cfg.as_mut().ok_or_else(|| null("config"))
}

unsafe fn campaign_ref<'a>(c: *const RissimCampaign) -> Result<&'a RissimCampaign, Failure> {
    c.as_ref().ok_or_else(|| null("campaign"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed(config: SimConfig) -> *mut RissimConfig {
    Box::into_raw(Box::new(RissimConfig {
        config,
        strategies: None,
        threads: 0,
    }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rissim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next `rissim_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rissim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_default(out: *mut *mut RissimConfig) -> RissimStatus {
    guard(|| write_out(out, boxed(SimConfig::default())))
}

/// Parses TOML text. Missing keys take their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_from_toml(toml: *const c_char, out: *mut *mut RissimConfig) -> RissimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let cfg = SimConfig::from_toml_str(str_arg(toml, "toml")?)?;
        write_out(out, boxed(cfg))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_load(path: *const c_char, out: *mut *mut RissimConfig) -> RissimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let cfg = SimConfig::load(Path::new(str_arg(path, "path")?))?;
        write_out(out, boxed(cfg))
    })
}

/// # Safety
/// `cfg` must come from a `rissim_config_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_free(cfg: *mut RissimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_set_seed(cfg: *mut RissimConfig, seed: u64) -> RissimStatus {
    guard(|| {
        config_mut(cfg)?.config.run.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_set_drops(cfg: *mut RissimConfig, drops: usize) -> RissimStatus {
    guard(|| {
        if drops == 0 {
            return Err(invalid("drops must be >= 1"));
        }
        config_mut(cfg)?.config.run.drops = drops;
        Ok(())
    })
}

/// Worker threads for [`rissim_campaign_run`]; 0 uses all cores.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_set_threads(cfg: *mut RissimConfig, threads: usize) -> RissimStatus {
    guard(|| {
        config_mut(cfg)?.threads = threads;
        Ok(())
    })
}

/// Comma-separated strategy list, e.g. `"no_ris,discrete(16),ideal"`.
/// Without a call the config's own strategy is run.
///
/// # Safety
/// `cfg` must be a live config handle; `list` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rissim_config_set_strategies(cfg: *mut RissimConfig, list: *const c_char) -> RissimStatus {
    guard(|| {
        let handle = config_mut(cfg)?;
        let names: Vec<String> = str_arg(list, "list")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if names.is_empty() {
            return Err(invalid("strategy list is empty"));
        }
        handle.strategies = Some(resolve_strategies(&names, &[], None, &handle.config)?);
        Ok(())
    })
}

/// Runs every drop of the campaign.
///
/// # Safety
/// `cfg` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_run(cfg: *const RissimConfig, out: *mut *mut RissimCampaign) -> RissimStatus {
    guard(|| {
        let handle = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let strategies = match &handle.strategies {
            Some(s) => s.clone(),
            None => resolve_strategies(&[], &[], None, &handle.config)?,
        };
        let result = Simulator::new(handle.config.clone(), &strategies)?.run_campaign(handle.threads)?;
        write_out(out, Box::into_raw(Box::new(RissimCampaign { result })))
    })
}

/// # Safety
/// `c` must come from [`rissim_campaign_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_free(c: *mut RissimCampaign) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live campaign handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_strategy_count(c: *const RissimCampaign, out: *mut usize) -> RissimStatus {
    guard(|| write_out(out, campaign_ref(c)?.result.outcomes.len()))
}

/// Copies the label of strategy `index` (e.g. `discrete_16`) into `buf`,
/// NUL-terminated. `needed` receives the required size including the NUL.
///
/// # Safety
/// `buf` must hold `len` bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_strategy_label(
    c: *const RissimCampaign,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> RissimStatus {
    guard(|| {
        let outcome = campaign_ref(c)?
            .result
            .outcomes
            .get(index)
            .ok_or_else(|| invalid(format!("strategy index {index} out of range")))?;
        let label = outcome.spec.label();
        let size = label.len() + 1;
        if !needed.is_null() {
            needed.write(size);
        }
        if len < size {
            return Err(invalid(format!("buffer of {len} bytes is too small, need {size}")));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(label.as_ptr().cast::<c_char>(), buf, label.len());
        buf.add(label.len()).write(0);
        Ok(())
    })
}

fn outcome(c: &RissimCampaign, index: usize) -> Result<&rissim::engine::StrategyOutcome, Failure> {
    c.result.outcomes.get(index).ok_or_else(|| invalid(format!("strategy index {index} out of range")))
}

/// # Safety
/// `c` must be a live campaign handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_user_count(c: *const RissimCampaign, strategy: usize, out: *mut usize) -> RissimStatus {
    guard(|| write_out(out, outcome(campaign_ref(c)?, strategy)?.users().count()))
}

/// Per-user values of `metric` in drop order. Pass a null `buf` to query
/// the count through `written`.
///
/// # Safety
/// `buf` must hold `len` doubles or be null.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_metric_values(
    c: *const RissimCampaign,
    strategy: usize,
    metric: RissimMetric,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> RissimStatus {
    guard(|| {
        let values = outcome(campaign_ref(c)?, strategy)?.values(metric.into());
        if !written.is_null() {
            written.write(values.len());
        }
        if buf.is_null() {
            return if written.is_null() { Err(null("buffer")) } else { Ok(()) };
        }
        if len < values.len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Empirical percentile, `p` in [0, 100].
///
/// # Safety
/// `c` must be a live campaign handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_percentile(
    c: *const RissimCampaign,
    strategy: usize,
    metric: RissimMetric,
    p: f64,
    out: *mut f64,
) -> RissimStatus {
    guard(|| {
        let cdf = outcome(campaign_ref(c)?, strategy)?.cdf(metric.into())?;
        write_out(out, cdf.percentile(p)?)
    })
}

/// Writes CDF tables, `summary.json` and `manifest.json` into `dir`.
///
/// # Safety
/// `c` must be a live campaign handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rissim_campaign_write_results(c: *const RissimCampaign, dir: *const c_char) -> RissimStatus {
    guard(|| {
        let campaign = campaign_ref(c)?;
        write_results(&campaign.result, Path::new(str_arg(dir, "dir")?), &Metric::ALL, 0.0)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_sinc_factor(levels: usize, out: *mut f64) -> RissimStatus {
    guard(|| write_out(out, theory::sinc_factor(levels)?))
}

unsafe fn rate_inputs(direct: f64, mags: *const f64, n: usize, tx_power: f64, noise: f64, levels: usize) -> Result<RateInputs, Failure> {
    Ok(RateInputs {
        direct_mag: direct,
        cascade_mags: slice_arg(mags, n, "cascade magnitudes")?.to_vec(),
        tx_power,
        noise_power: noise,
        d_levels: levels,
    })
}

/// Rate with co-phased cascade terms, bits/s/Hz.
///
/// # Safety
/// `mags` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_rate_ideal(
    direct_mag: f64,
    cascade_mags: *const f64,
    n: usize,
    tx_power: f64,
    noise_power: f64,
    out: *mut f64,
) -> RissimStatus {
    guard(|| write_out(out, theory::rate_ideal(&rate_inputs(direct_mag, cascade_mags, n, tx_power, noise_power, 1)?)?))
}

/// Large-N rate with `levels` phase levels; the cascade mean is taken
/// from the supplied magnitudes.
///
/// # Safety
/// `mags` must hold `n >= 1` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_rate_discrete_asymptotic(
    direct_mag: f64,
    cascade_mags: *const f64,
    n: usize,
    tx_power: f64,
    noise_power: f64,
    levels: usize,
    out: *mut f64,
) -> RissimStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("need at least one cascade magnitude"));
        }
        let inputs = rate_inputs(direct_mag, cascade_mags, n, tx_power, noise_power, levels)?;
        let mean = inputs.cascade_mags.iter().sum::<f64>() / n as f64;
        write_out(out, theory::rate_discrete_asymptotic(&inputs, n, mean)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rissim_rate_no_ris(direct_mag: f64, tx_power: f64, noise_power: f64, out: *mut f64) -> RissimStatus {
    guard(|| write_out(out, theory::rate_no_ris(direct_mag, tx_power, noise_power)?))
}
