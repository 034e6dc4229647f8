use std::ffi::{CStr, CString};
use std::ptr;

use rissim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rissim_last_error()) }.to_string_lossy().into_owned()
}

fn small_config(strategies: &str) -> *mut RissimConfig {
    let toml = CString::new("[layout]\nnum_rings = 0\nusers_per_sector = 3\n[panels]\nris_horizontal = 4\nris_vertical = 4\n").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(rissim_config_from_toml(toml.as_ptr(), &mut cfg), RissimStatus::Ok, "{}", last_error());
        assert_eq!(rissim_config_set_drops(cfg, 2), RissimStatus::Ok);
        assert_eq!(rissim_config_set_seed(cfg, 11), RissimStatus::Ok);
        let list = CString::new(strategies).unwrap();
        assert_eq!(rissim_config_set_strategies(cfg, list.as_ptr()), RissimStatus::Ok, "{}", last_error());
    }
    cfg
}

fn run(cfg: *mut RissimConfig, threads: usize) -> *mut RissimCampaign {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(rissim_config_set_threads(cfg, threads), RissimStatus::Ok);
        assert_eq!(rissim_campaign_run(cfg, &mut c), RissimStatus::Ok, "{}", last_error());
    }
    c
}

fn values(c: *const RissimCampaign, s: usize, m: RissimMetric) -> Vec<f64> {
    unsafe {
        let mut n = 0;
        assert_eq!(rissim_campaign_metric_values(c, s, m, ptr::null_mut(), 0, &mut n), RissimStatus::Ok);
        let mut buf = vec![0.0; n];
        assert_eq!(rissim_campaign_metric_values(c, s, m, buf.as_mut_ptr(), n, &mut n), RissimStatus::Ok);
        buf
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(rissim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn campaign_round_trip() {
    let cfg = small_config("no_ris,discrete(4),ideal");
    let c = run(cfg, 1);
    unsafe {
        let mut count = 0;
        assert_eq!(rissim_campaign_strategy_count(c, &mut count), RissimStatus::Ok);
        assert_eq!(count, 3);

        let mut needed = 0;
        assert_eq!(rissim_campaign_strategy_label(c, 1, ptr::null_mut(), 0, &mut needed), RissimStatus::InvalidArgument);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(rissim_campaign_strategy_label(c, 1, buf.as_mut_ptr(), needed, &mut needed), RissimStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "discrete_4");

        let mut users = 0;
        assert_eq!(rissim_campaign_user_count(c, 0, &mut users), RissimStatus::Ok);
        // one site, three sectors, three users each, two drops
        assert_eq!(users, 18);

        let se_none = values(c, 0, RissimMetric::SpectralEfficiency);
        let se_ideal = values(c, 2, RissimMetric::SpectralEfficiency);
        assert_eq!(se_none.len(), users);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&se_ideal) >= mean(&se_none) - 1e-12);

        let mut median = 0.0;
        assert_eq!(rissim_campaign_percentile(c, 0, RissimMetric::CouplingLossDb, 50.0, &mut median), RissimStatus::Ok);
        let mut cl = values(c, 0, RissimMetric::CouplingLossDb);
        cl.sort_by(f64::total_cmp);
        assert!(median >= cl[0] && median <= cl[cl.len() - 1]);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(rissim_campaign_write_results(c, path.as_ptr()), RissimStatus::Ok, "{}", last_error());
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join("ideal_sinr_db.csv").exists());

        rissim_campaign_free(c);
        rissim_config_free(cfg);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small_config("random,ideal");
    let a = run(cfg, 1);
    let b = run(cfg, 4);
    for s in 0..2 {
        assert_eq!(values(a, s, RissimMetric::SinrDb), values(b, s, RissimMetric::SinrDb));
    }
    unsafe {
        rissim_campaign_free(a);
        rissim_campaign_free(b);
        rissim_config_free(cfg);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(rissim_config_default(ptr::null_mut()), RissimStatus::NullPointer);
        assert_eq!(rissim_config_from_toml(ptr::null(), &mut cfg), RissimStatus::NullPointer);

        let bad = CString::new("[run]\nseed = \"x\"\n").unwrap();
        assert_eq!(rissim_config_from_toml(bad.as_ptr(), &mut cfg), RissimStatus::ConfigError);
        assert!(last_error().contains("line 2"), "{}", last_error());
        assert!(cfg.is_null());

        let missing = CString::new("/nonexistent/rissim.toml").unwrap();
        assert_eq!(rissim_config_load(missing.as_ptr(), &mut cfg), RissimStatus::RuntimeError);

        assert_eq!(rissim_config_default(&mut cfg), RissimStatus::Ok);
        assert!(last_error().is_empty());
        assert_eq!(rissim_config_set_drops(cfg, 0), RissimStatus::InvalidArgument);
        let unknown = CString::new("no_ris,teleport").unwrap();
        assert_ne!(rissim_config_set_strategies(cfg, unknown.as_ptr()), RissimStatus::Ok);
        assert_eq!(rissim_config_set_seed(ptr::null_mut(), 1), RissimStatus::NullPointer);
        rissim_config_free(cfg);
        rissim_config_free(ptr::null_mut());
        rissim_campaign_free(ptr::null_mut());

        let mut x = 0.0;
        assert_eq!(rissim_sinc_factor(0, &mut x), RissimStatus::InvalidArgument);
        assert_eq!(rissim_rate_no_ris(1.0, -1.0, 1.0, &mut x), RissimStatus::InvalidArgument);
        assert_eq!(rissim_rate_discrete_asymptotic(1.0, ptr::null(), 0, 1.0, 1.0, 4, &mut x), RissimStatus::InvalidArgument);
    }
}

#[test]
fn closed_form_rates() {
    let mags = [0.5, 0.25, 0.25];
    unsafe {
        let mut sinc = 0.0;
        assert_eq!(rissim_sinc_factor(2, &mut sinc), RissimStatus::Ok);
        assert!((sinc - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(rissim_sinc_factor(1, &mut sinc), RissimStatus::Ok);
        assert_eq!(sinc, 0.0);

        let (mut ideal, mut none, mut disc) = (0.0, 0.0, 0.0);
        assert_eq!(rissim_rate_ideal(1.0, mags.as_ptr(), 3, 1.0, 1.0, &mut ideal), RissimStatus::Ok);
        assert!((ideal - 5f64.log2()).abs() < 1e-12);
        assert_eq!(rissim_rate_no_ris(1.0, 1.0, 1.0, &mut none), RissimStatus::Ok);
        assert!((none - 1.0).abs() < 1e-12);
        assert_eq!(rissim_rate_discrete_asymptotic(1.0, mags.as_ptr(), 3, 1.0, 1.0, 4096, &mut disc), RissimStatus::Ok);
        assert!(none <= disc && disc <= ideal);
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let header_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("librissim_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "rissim.h"
int main(void) {
    RissimConfig *cfg = NULL;
    double s = 0.0;
    if (rissim_config_default(&cfg) != RISSIM_STATUS_OK) return 1;
    if (rissim_config_set_seed(cfg, 3) != RISSIM_STATUS_OK) return 2;
    if (rissim_sinc_factor(4, &s) != RISSIM_STATUS_OK || s < 0.9 || s > 0.91) return 3;
    if (rissim_config_set_drops(cfg, 0) != RISSIM_STATUS_INVALID_ARGUMENT) return 4;
    if (strlen(rissim_last_error()) == 0) return 5;
    rissim_config_free(cfg);
    printf("%s\n", rissim_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I", header_dir])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
