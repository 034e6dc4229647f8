//! Acceptance suite: nine end-to-end criteria, one PASS/FAIL line each.
//! Exits non-zero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use rissim::arrays::{array_factor, array_factor_with_phases, AntennaPanel, DirectionLocal, ElementPattern};
use rissim::channel::{EnvProfile, LosMode};
use rissim::config::{SimConfig, StrategySpec};
use rissim::engine::Simulator;
use rissim::geometry::{build_hex_layout, placement_coverage_scan};
use rissim::metrics::Metric;
use rissim::ris::{ideal_phases, optimal_steering_phases, quantize_phases, random_phases, scalar_effective, steering_betas, PhaseConfig, PhaseConstraint};
use rissim::rng::{stream, Stream};
use rissim::theory::{rate_discrete_asymptotic, rate_ideal, rate_no_ris, sinc_factor, RateInputs};

struct Outcome {
    pass: bool,
    detail: String,
}

fn cn(rng: &mut Stream, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

fn steering_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(101, &[]);
    let mut worst: f64 = 0.0;
    let mut largest = 0;
    for _ in 0..200 {
        let nh = rng.random_range(1..=16);
        let nv = rng.random_range(1..=16);
        let panel = AntennaPanel::new(nh, nv, ElementPattern::PassiveReflector)
            .with_spacing(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let aoa = DirectionLocal::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(-PI..PI));
        let target = DirectionLocal::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(-PI..PI));
        let cfg = optimal_steering_phases(&panel, aoa, target).expect("front half-space");
        let n = (nh * nv) as f64;
        let (by, bz) = steering_betas(&panel, aoa, target);
        for af in [
            array_factor_with_phases(&panel, &cfg.phases, aoa, target),
            array_factor(&panel, by, bz, aoa, target),
        ] {
            worst = worst.max((af.norm() - n).abs() / n);
        }
        largest = largest.max(nh * nv);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-9 && secs < 1.0,
        detail: format!("max relative |AF| error {worst:.2e} over 200 cases (largest N = {largest}), {secs:.3} s"),
    }
}

fn sinc_law() -> Outcome {
    let start = Instant::now();
    let n = 4096;
    let trials = 64;
    let mut rng = stream(202, &[]);
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [1usize, 2, 4, 8, 16] {
        let half = PI / d as f64;
        let mut acc = 0.0;
        for _ in 0..trials {
            let mags: Vec<f64> = (0..n).map(|_| cn(&mut rng, 1.0).norm()).collect();
            let mean = mags.iter().sum::<f64>() / n as f64;
            let sum: Complex64 = mags
                .iter()
                .map(|&r| Complex64::from_polar(r, rng.random_range(-half..=half)))
                .sum();
            acc += sum.norm() / (n as f64 * mean);
        }
        let ratio = acc / trials as f64;
        let sinc = sinc_factor(d).unwrap();
        if d == 1 {
            pass &= ratio < 0.05;
            parts.push(format!("D=1 ratio {ratio:.4}"));
        } else {
            let rel = (ratio - sinc).abs() / sinc;
            pass &= rel <= 0.01;
            parts.push(format!("D={d} {ratio:.5}/{sinc:.5} ({:.2}%)", 100.0 * rel));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 5.0;
    Outcome {
        pass,
        detail: format!("{}; {secs:.2} s", parts.join(", ")),
    }
}

fn rate_ordering() -> Outcome {
    let n = 64;
    let snr = 10.0;
    let chain: Vec<usize> = (0..=12).map(|e| 1usize << e).collect();
    let mut rng = stream(303, &[]);
    let mut formula_violations = 0;
    let mut bracket_violations = 0;
    let mut worst_4096: f64 = 0.0;
    let mut worst_formula_4096: f64 = 0.0;
    let mut sim_chain_violations = 0;
    for _ in 0..1000 {
        let h = cn(&mut rng, 1.0);
        let r: Vec<Complex64> = (0..n).map(|_| cn(&mut rng, 1.0 / n as f64)).collect();
        let mags: Vec<f64> = r.iter().map(|z| z.norm()).collect();
        let mean = mags.iter().sum::<f64>() / n as f64;
        let inputs = |d: usize| RateInputs {
            direct_mag: h.norm(),
            cascade_mags: mags.clone(),
            tx_power: snr,
            noise_power: 1.0,
            d_levels: d,
        };
        let none = rate_no_ris(h.norm(), snr, 1.0).unwrap();
        let ideal = rate_ideal(&inputs(1)).unwrap();

        // closed-form chain
        let formula: Vec<f64> = chain.iter().map(|&d| rate_discrete_asymptotic(&inputs(d), n, mean).unwrap()).collect();
        let top = rate_ideal(&RateInputs { cascade_mags: vec![mean; n], ..inputs(1) }).unwrap();
        if none > formula[0] + 1e-12 || formula.windows(2).any(|w| w[0] > w[1] + 1e-12) || *formula.last().unwrap() > top + 1e-12 {
            formula_violations += 1;
        }
        worst_formula_4096 = worst_formula_4096.max((top - formula.last().unwrap()) / top);

        // simulated quantize-of-ideal
        let opt = ideal_phases(h, &r);
        let sim_rate = |cfg: &PhaseConfig| (1.0 + snr * scalar_effective(h, &r, cfg).norm_sqr()).log2();
        let sim: Vec<f64> = chain.iter().map(|&d| sim_rate(&quantize_phases(&opt, d).unwrap())).collect();
        let sim_ideal = sim_rate(&opt);
        assert!((sim_ideal - ideal).abs() < 1e-9 * ideal.max(1.0));
        for (i, &d) in chain.iter().enumerate() {
            if d >= 2 && (sim[i] < none - 1e-12 || sim[i] > ideal + 1e-12) {
                bracket_violations += 1;
            }
        }
        if none > sim[0] + 1e-12 || sim.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            sim_chain_violations += 1;
        }
        worst_4096 = worst_4096.max((ideal - sim.last().unwrap()) / ideal);
    }
    Outcome {
        pass: formula_violations == 0 && bracket_violations == 0 && worst_4096 <= 1e-6 && worst_formula_4096 <= 1e-6,
        detail: format!(
            "closed-form chain violations {formula_violations}/1000; simulated no-RIS <= discrete(D>=2) <= ideal violations {bracket_violations}; \
             discrete(4096) gap to ideal {worst_4096:.1e} simulated, {worst_formula_4096:.1e} closed-form; \
             simulated per-realisation doubling-chain breaks (informational) {sim_chain_violations}/1000"
        ),
    }
}

/// Quantized/exhaustive ratios and the ideal-bound flag for `instances`
/// draws with H ~ CN(0,1) and r_n ~ CN(0, cascade_var).
fn oracle_ratios(seed: u64, cascade_var: f64, instances: usize) -> (Vec<f64>, bool) {
    let n = 6;
    let d: usize = 8;
    let levels: Vec<Complex64> = (0..d).map(|i| Complex64::cis(TAU * i as f64 / d as f64)).collect();
    let mut rng = stream(seed, &[]);
    let mut ratios = Vec::with_capacity(instances);
    let mut bound_ok = true;
    for _ in 0..instances {
        let h = cn(&mut rng, 1.0);
        let r: Vec<Complex64> = (0..n).map(|_| cn(&mut rng, cascade_var)).collect();
        let mut best: f64 = 0.0;
        for code in 0..d.pow(n as u32) {
            let mut c = code;
            let mut acc = h;
            for rv in &r {
                acc += rv * levels[c % d];
                c /= d;
            }
            best = best.max(acc.norm());
        }
        let opt = ideal_phases(h, &r);
        let analytic = scalar_effective(h, &r, &opt).norm();
        let quant = scalar_effective(h, &r, &quantize_phases(&opt, d).unwrap()).norm();
        bound_ok &= analytic >= best - 1e-12;
        ratios.push(quant / best);
    }
    (ratios, bound_ok)
}

fn brute_force_oracle() -> Outcome {
    let (ratios, bound_ok) = oracle_ratios(404, 1.0, 50);
    let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let below = ratios.iter().filter(|&&x| x < 0.99).count();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    // Informational only: weak cascade as in the rate criteria.
    let (weak, _) = oracle_ratios(405, 1.0 / 6.0, 50);
    let weak_worst = weak.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: worst >= 0.99 && bound_ok,
        detail: format!(
            "worst quantized/exhaustive {worst:.5}, mean {mean:.5}, {below}/50 below 0.99 (8^6 configs each, r_n ~ CN(0,1)); \
             ideal bounds optimum: {bound_ok}; informational r_n ~ CN(0,1/6) worst {weak_worst:.5}"
        ),
    }
}

fn random_vs_no_ris() -> Outcome {
    let snr = 10.0;
    let realisations = 10_000;
    let gap = |n: usize| {
        let mut rng = stream(505, &[n as u64]);
        let (mut sum_rand, mut sum_none) = (0.0, 0.0);
        for _ in 0..realisations {
            let h = cn(&mut rng, 1.0);
            let r: Vec<Complex64> = (0..n).map(|_| cn(&mut rng, 1.0) / n as f64).collect();
            let cfg = random_phases(n, &mut rng).unwrap();
            assert_eq!(cfg.constraint, PhaseConstraint::Random);
            sum_rand += (1.0 + snr * scalar_effective(h, &r, &cfg).norm_sqr()).log2();
            sum_none += rate_no_ris(h.norm(), snr, 1.0).unwrap();
        }
        ((sum_rand - sum_none) / sum_none).abs()
    };
    let g64 = gap(64);
    let g1024 = gap(1024);
    Outcome {
        pass: g1024 < g64 && g1024 < 0.02,
        detail: format!("relative mean-rate gap N=64 {:.4}%, N=1024 {:.4}%", 100.0 * g64, 100.0 * g1024),
    }
}

struct SystemRun {
    result: rissim::engine::CampaignResult,
    secs: f64,
}

fn system_campaign() -> SystemRun {
    let cfg = SimConfig::default();
    assert_eq!(cfg.layout.num_rings, 1);
    assert_eq!(cfg.run.drops, 20);
    assert_eq!(cfg.ris_elements(), 256);
    let specs = [StrategySpec::NoRis, StrategySpec::Random, StrategySpec::Discrete(16), StrategySpec::Ideal];
    let start = Instant::now();
    let result = Simulator::new(cfg, &specs).unwrap().run_campaign(1).unwrap();
    SystemRun {
        result,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn system_reproduction(run: &SystemRun) -> Outcome {
    let get = |s: StrategySpec, m: Metric| run.result.outcome(s).unwrap().median(m).unwrap();
    let cl_gain = get(StrategySpec::NoRis, Metric::CouplingLoss) - get(StrategySpec::Ideal, Metric::CouplingLoss);
    let sinr_gain = get(StrategySpec::Ideal, Metric::Sinr) - get(StrategySpec::NoRis, Metric::Sinr);
    let se = |s| get(s, Metric::SpectralEfficiency);
    let (se_none, se_rand, se_d16, se_ideal) = (se(StrategySpec::NoRis), se(StrategySpec::Random), se(StrategySpec::Discrete(16)), se(StrategySpec::Ideal));
    let se_gain = se_ideal / se_none - 1.0;
    let cl_ok = (1.5..=6.0).contains(&cl_gain);
    let sinr_ok = (0.5..=4.0).contains(&sinr_gain);
    let se_ok = se_gain >= 0.10;
    let order_ok = (se_rand / se_none - 1.0).abs() <= 0.05 && se_rand < se_d16 && se_d16 <= se_ideal && se_none < se_d16;
    let time_ok = run.secs < 600.0;
    Outcome {
        pass: cl_ok && sinr_ok && se_ok && order_ok && time_ok,
        detail: format!(
            "coupling-loss gain {cl_gain:.3} dB [1.5,6] {}; SINR gain {sinr_gain:.3} dB [0.5,4] {}; SE gain {:.2}% [>=10%] {}; \
             median SE no_ris {se_none:.4} random {se_rand:.4} discrete16 {se_d16:.4} ideal {se_ideal:.4} ordering {}; {:.0} s single-threaded",
            ok(cl_ok),
            ok(sinr_ok),
            100.0 * se_gain,
            ok(se_ok),
            ok(order_ok),
            run.secs
        ),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISS"
    }
}

fn placement_scan() -> Outcome {
    let layout = build_hex_layout(500.0, 1).unwrap();
    let offsets: Vec<f64> = (-40..=40).map(f64::from).collect();
    let scan = placement_coverage_scan(&layout, &offsets).unwrap();
    let (best_delta, _) = scan
        .iter()
        .cloned()
        .fold((f64::NAN, f64::INFINITY), |acc, (d, v)| if v < acc.1 { (d, v) } else { acc });
    let at_zero = scan.iter().find(|(d, _)| *d == 0.0).unwrap().1;
    let radius = layout.sector_radius();
    let rel = (at_zero - radius).abs() / radius;
    Outcome {
        pass: best_delta == 0.0 && rel <= 0.01,
        detail: format!("argmin δ = {best_delta}°, max distance at δ=0 {at_zero:.3} m vs sector radius {radius:.3} m ({:.3}%)", 100.0 * rel),
    }
}

fn run_cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rissim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RISSIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["run", "--seed", "7", "--drops", "4", "--strategy", "no_ris,codebook(8),discrete(4),ideal"];
    let mut dirs = Vec::new();
    for (i, threads) in ["1", "1", "8"].iter().enumerate() {
        let dir = tmp.path().join(format!("run{i}"));
        let mut args = base.to_vec();
        args.extend(["--threads", threads]);
        let out = run_cli(&args, &dir);
        if !out.status.success() {
            return Outcome {
                pass: false,
                detail: format!("run failed: {}", String::from_utf8_lossy(&out.stderr)),
            };
        }
        dirs.push(read_outputs(&dir));
    }
    let same_seed = dirs[0] == dirs[1];
    let cdf = |files: &[(String, Vec<u8>)]| files.iter().filter(|(n, _)| n.ends_with(".csv")).cloned().collect::<Vec<_>>();
    let same_threads = cdf(&dirs[0]) == cdf(&dirs[2]) && !cdf(&dirs[0]).is_empty();
    Outcome {
        pass: same_seed && same_threads,
        detail: format!(
            "{} result files byte-identical across reruns: {same_seed}; CDF tables identical for 1 vs 8 threads: {same_threads}",
            dirs[0].len()
        ),
    }
}

fn calibration(run: &SystemRun) -> Outcome {
    let cdf = run.result.outcome(StrategySpec::NoRis).unwrap().cdf(Metric::CouplingLoss).unwrap();
    let monotone = cdf.sorted_values.windows(2).all(|w| w[0] < w[1]) && cdf.probabilities.windows(2).all(|w| w[0] < w[1]);
    let p1 = cdf.percentile(1.0).unwrap();
    let p99 = cdf.percentile(99.0).unwrap();
    let span_ok = (40.0..=75.0).contains(&p1) && (105.0..=150.0).contains(&p99);

    let scaled = |s: f64| {
        let mut cfg = SimConfig::default();
        cfg.layout.num_rings = 0;
        cfg.layout.isd *= s;
        cfg.layout.bs_height *= s;
        cfg.layout.ris_height *= s;
        cfg.layout.ut_height *= s;
        cfg.layout.min_bs_distance *= s;
        cfg.run.drops = 10;
        cfg.environment = EnvProfile {
            access_los: LosMode::Los,
            shadow_sigma_los_db: 0.0,
            shadow_sigma_nlos_db: 0.0,
            ..EnvProfile::single_path()
        };
        Simulator::new(cfg, &[StrategySpec::NoRis])
            .unwrap()
            .run_campaign(0)
            .unwrap()
            .outcomes[0]
            .median(Metric::CouplingLoss)
            .unwrap()
    };
    let shift = scaled(2.0) - scaled(1.0);
    let want = 22.0 * 2f64.log10();
    let shift_ok = (shift - want).abs() <= 1e-6;
    Outcome {
        pass: monotone && span_ok && shift_ok,
        detail: format!(
            "monotone {monotone}; p1 {p1:.2} dB [40,75], p99 {p99:.2} dB [105,150] {}; median shift for s=2 {shift:.9} dB vs {want:.9} {}",
            ok(span_ok),
            ok(shift_ok)
        ),
    }
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!("criterion {n} [{name}]: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    };
    report(1, "steering exactness", steering_exactness());
    report(2, "sinc quantization law", sinc_law());
    report(3, "rate ordering and convergence", rate_ordering());
    report(4, "brute-force phase oracle", brute_force_oracle());
    report(5, "random phases vs no RIS", random_vs_no_ris());
    let system = system_campaign();
    report(6, "system-level reproduction", system_reproduction(&system));
    report(7, "placement scan", placement_scan());
    report(8, "determinism", determinism());
    report(9, "calibration sanity", calibration(&system));
    if failures > 0 {
        println!("{failures} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
