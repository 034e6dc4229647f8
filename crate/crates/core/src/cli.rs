//! Command-line front end. Exit codes: 0 success, 2 configuration or usage
//! error, 3 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{SimConfig, StrategyKind, StrategySpec};
use crate::engine::Simulator;
use crate::error::{Error, Result};
use crate::metrics::{dbm_to_watts, noise_power_watts, Metric};
use crate::output::{format_sig9, median_delta, write_results, MedianDelta};
use crate::theory::{rate_ideal, rate_no_ris, theory_table, RateInputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rissim", version, about = "System-level Monte-Carlo simulator for RIS-assisted cellular networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one campaign and write CDF tables and a summary.
    Run(RunArgs),
    /// Run several strategies, phase-level counts and RIS sizes on shared channels.
    Sweep(SweepArgs),
    /// Print closed-form rates against the number of phase levels.
    Theory(TheoryArgs),
    /// Run the no-RIS configuration and write coupling-loss and SINR CDFs.
    Calibrate(CommonArgs),
    /// Print the default configuration as TOML.
    EmitDefaults,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; every key is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<usize>,
    /// Output directory.
    #[arg(long, env = "RISSIM_OUT_DIR", default_value = "rissim-out")]
    pub out: PathBuf,
    /// Worker threads for drops; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    /// Comma-separated strategies: no_ris, random, codebook(B), ideal, discrete(D).
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<String>,
    /// Phase levels for a bare `discrete` entry.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<usize>,
    /// Beam count for a bare `codebook` entry.
    #[arg(long)]
    pub beams: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub strategies: StrategyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub strategies: StrategyArgs,
    /// RIS sizes as HxV, e.g. 8x8,16x16.
    #[arg(long, value_delimiter = ',')]
    pub ris_sizes: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,256,4096")]
    pub levels: Vec<usize>,
    /// Reflecting elements N.
    #[arg(long, default_value_t = 256)]
    pub elements: usize,
    /// Direct-link SNR `P|H|²/σ²` in dB.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub direct_snr_db: f64,
    /// `N·E[r] / |H|`: total cascade amplitude relative to the direct path.
    #[arg(long, default_value_t = 1.0)]
    pub cascade_ratio: f64,
}

fn usage(e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::config(m, None),
        other => other,
    }
}

fn load_config(common: &CommonArgs) -> Result<SimConfig> {
    let mut cfg = match &common.config {
        // an unreadable config file is a configuration problem, not a runtime one
        Some(p) => SimConfig::load(p).map_err(|e| match e {
            Error::Io { .. } => Error::config(e.to_string(), None),
            other => other,
        })?,
        None => SimConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(d) = common.drops {
        cfg.run.drops = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn push_unique(out: &mut Vec<StrategySpec>, s: StrategySpec) {
    if !out.contains(&s) {
        out.push(s);
    }
}

/// Expands strategy names into fully parameterised strategies. Bare
/// `discrete` takes every `levels` entry (or `strategy.levels`); bare
/// `codebook` takes `beams` (or `strategy.beams`).
pub fn resolve_strategies(names: &[String], levels: &[usize], beams: Option<usize>, cfg: &SimConfig) -> Result<Vec<StrategySpec>> {
    let levels: Vec<usize> = if levels.is_empty() {
        cfg.strategy.levels.into_iter().collect()
    } else {
        levels.to_vec()
    };
    let beams = beams.or(cfg.strategy.beams);
    let mut out = Vec::new();
    if names.is_empty() {
        match cfg.strategy.kind {
            StrategyKind::Discrete if !levels.is_empty() => {
                for &d in &levels {
                    push_unique(&mut out, format!("discrete({d})").parse().map_err(usage)?);
                }
            }
            StrategyKind::Codebook if beams.is_some() => {
                push_unique(&mut out, StrategySpec::Codebook(beams.unwrap_or(1)));
            }
            _ => push_unique(&mut out, cfg.strategy_spec()?),
        }
        return Ok(out);
    }
    for name in names {
        let n = name.trim();
        match n {
            "discrete" => {
                if levels.is_empty() {
                    return Err(Error::config("discrete needs --levels or strategy.levels", None));
                }
                for &d in &levels {
                    push_unique(&mut out, format!("discrete({d})").parse().map_err(usage)?);
                }
            }
            "codebook" => {
                let b = beams.ok_or_else(|| Error::config("codebook needs --beams or strategy.beams", None))?;
                push_unique(&mut out, format!("codebook({b})").parse().map_err(usage)?);
            }
            other => push_unique(&mut out, other.parse().map_err(usage)?),
        }
    }
    Ok(out)
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::config(format!("invalid RIS size '{s}' (expected HxV, e.g. 16x16)"), None);
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let h: usize = a.trim().parse().map_err(|_| bad())?;
    let v: usize = b.trim().parse().map_err(|_| bad())?;
    if h == 0 || v == 0 {
        return Err(bad());
    }
    Ok((h, v))
}

fn campaign(cfg: SimConfig, specs: &[StrategySpec], threads: usize, out: &Path, metrics: &[Metric]) -> Result<crate::engine::CampaignResult> {
    let start = Instant::now();
    let sim = Simulator::new(cfg, specs)?;
    let result = sim.run_campaign(threads)?;
    write_results(&result, out, metrics, start.elapsed().as_secs_f64())?;
    Ok(result)
}

fn print_medians(result: &crate::engine::CampaignResult) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{:<14} {:>10} {:>18} {:>14} {:>12}", "strategy", "users", "coupling_loss_db", "sinr_db", "se_bps_hz");
    for o in &result.outcomes {
        let _ = writeln!(
            stdout,
            "{:<14} {:>10} {:>18} {:>14} {:>12}",
            o.spec.label(),
            o.values(Metric::Sinr).len(),
            format_sig9(o.median(Metric::CouplingLoss)?),
            format_sig9(o.median(Metric::Sinr)?),
            format_sig9(o.median(Metric::SpectralEfficiency)?)
        );
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let s = &args.strategies;
    let specs = resolve_strategies(&s.strategy, &s.levels, s.beams, &cfg)?;
    let result = campaign(cfg, &specs, args.common.threads, &args.common.out, &Metric::ALL)?;
    print_medians(&result)?;
    eprintln!("results written to {}", args.common.out.display());
    Ok(())
}

#[derive(Serialize)]
struct SweepEntry {
    ris_size: String,
    directory: String,
    median_deltas: Vec<MedianDelta>,
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let s = &args.strategies;
    let specs = if s.strategy.is_empty() {
        let levels = if s.levels.is_empty() { vec![2, 4, 16] } else { s.levels.clone() };
        let mut v = vec![StrategySpec::NoRis, StrategySpec::Random];
        v.push(StrategySpec::Codebook(s.beams.or(cfg.strategy.beams).unwrap_or(8)));
        for d in levels {
            if d == 0 {
                return Err(Error::config("--levels entries must be >= 1", None));
            }
            v.push(StrategySpec::Discrete(d));
        }
        v.push(StrategySpec::Ideal);
        v
    } else {
        resolve_strategies(&s.strategy, &s.levels, s.beams, &cfg)?
    };
    let sizes = if args.ris_sizes.is_empty() {
        vec![(cfg.panels.ris_horizontal, cfg.panels.ris_vertical)]
    } else {
        args.ris_sizes.iter().map(|x| parse_size(x)).collect::<Result<Vec<_>>>()?
    };
    let mut entries = Vec::new();
    for (h, v) in sizes {
        let mut c = cfg.clone();
        c.panels.ris_horizontal = h;
        c.panels.ris_vertical = v;
        let dir_name = format!("ris_{h}x{v}");
        let dir = args.common.out.join(&dir_name);
        let result = campaign(c, &specs, args.common.threads, &dir, &Metric::ALL)?;
        println!("RIS {h}x{v}");
        print_medians(&result)?;
        let baseline = result.outcome(StrategySpec::NoRis).unwrap_or(&result.outcomes[0]);
        let deltas = result
            .outcomes
            .iter()
            .filter(|o| o.spec != baseline.spec)
            .map(|o| median_delta(o, baseline))
            .collect::<Result<Vec<_>>>()?;
        for d in &deltas {
            println!(
                "  {} vs {}: coupling loss {} dB, SINR {} dB, SE {} ({}%)",
                d.strategy,
                d.baseline,
                format_sig9(d.coupling_loss_gain_db),
                format_sig9(d.sinr_gain_db),
                format_sig9(d.spectral_eff_gain),
                format_sig9(100.0 * d.spectral_eff_gain_relative)
            );
        }
        entries.push(SweepEntry {
            ris_size: format!("{h}x{v}"),
            directory: dir_name,
            median_deltas: deltas,
        });
    }
    let path = args.common.out.join("sweep.json");
    let mut text = serde_json::to_string_pretty(&entries).expect("sweep summary serialises");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

fn cmd_theory(args: &TheoryArgs) -> Result<()> {
    if args.elements == 0 || !(args.cascade_ratio >= 0.0) {
        return Err(Error::config("--elements must be >= 1 and --cascade-ratio >= 0", None));
    }
    let defaults = SimConfig::default();
    let env = &defaults.environment;
    let noise = noise_power_watts(env.thermal_noise_dbm_hz, env.bandwidth_mhz * 1e6, env.noise_figure_db);
    let tx = dbm_to_watts(env.tx_power_dbm);
    let direct = (10f64.powf(args.direct_snr_db / 10.0) * noise / tx).sqrt();
    let mean_r = args.cascade_ratio * direct / args.elements as f64;
    let inputs = RateInputs {
        direct_mag: direct,
        cascade_mags: vec![mean_r; args.elements],
        tx_power: tx,
        noise_power: noise,
        d_levels: 1,
    };
    let rows = theory_table(&args.levels, &inputs, args.elements, mean_r).map_err(usage)?;
    println!("# N = {}, direct SNR = {} dB, N*E[r]/|H| = {}", args.elements, args.direct_snr_db, args.cascade_ratio);
    println!("# rate_no_ris = {:.6} b/s/Hz, rate_ideal = {:.6} b/s/Hz", rate_no_ris(direct, tx, noise)?, rate_ideal(&inputs)?);
    println!("{:>6} {:>10} {:>14}", "D", "sinc", "rate_bps_hz");
    for r in rows {
        println!("{:>6} {:>10.4} {:>14.6}", r.levels, r.sinc, r.rate_discrete);
    }
    Ok(())
}

fn cmd_calibrate(args: &CommonArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let result = campaign(cfg, &[StrategySpec::NoRis], args.threads, &args.out, &[Metric::CouplingLoss, Metric::Sinr])?;
    print_medians(&result)?;
    let o = &result.outcomes[0];
    let cl = o.cdf(Metric::CouplingLoss)?;
    println!(
        "coupling loss p1/p50/p99: {} / {} / {} dB",
        format_sig9(cl.percentile(1.0)?),
        format_sig9(cl.percentile(50.0)?),
        format_sig9(cl.percentile(99.0)?)
    );
    Ok(())
}

/// Runs a parsed command and maps the outcome to an exit code.
pub fn run_subcommand(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::EmitDefaults => {
            print!("{}", SimConfig::default().to_toml());
            Ok(())
        }
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_subcommand(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_bare_names() {
        let cfg = SimConfig::default();
        let names: Vec<String> = ["no_ris", "discrete", "ideal"].iter().map(|s| s.to_string()).collect();
        let got = resolve_strategies(&names, &[2, 16], None, &cfg).unwrap();
        assert_eq!(got, vec![StrategySpec::NoRis, StrategySpec::Discrete(2), StrategySpec::Discrete(16), StrategySpec::Ideal]);
        assert!(resolve_strategies(&["discrete".into()], &[], None, &cfg).is_err());
        assert!(resolve_strategies(&["codebook".into()], &[], None, &cfg).is_err());
        assert_eq!(resolve_strategies(&["codebook".into()], &[], Some(4), &cfg).unwrap(), vec![StrategySpec::Codebook(4)]);
        assert_eq!(resolve_strategies(&[], &[], None, &cfg).unwrap(), vec![StrategySpec::Ideal]);
        let err = resolve_strategies(&["bogus".into()], &[], None, &cfg).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("16x8").unwrap(), (16, 8));
        assert!(parse_size("0x8").is_err());
        assert!(parse_size("16").is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["rissim", "run", "--seed", "7", "--strategy", "no_ris,discrete(16)", "--threads", "2"]).unwrap();
        match cli.command {
            Command::Run(a) => {
                assert_eq!(a.common.seed, Some(7));
                assert_eq!(a.strategies.strategy, vec!["no_ris".to_string(), "discrete(16)".to_string()]);
                assert_eq!(a.common.threads, 2);
            }
            other => panic!("{other:?}"),
        }
    }
}
