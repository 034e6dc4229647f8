//! Simulation configuration: TOML sections `layout`, `environment`,
//! `panels`, `strategy` and `run`. Every key is optional; an empty file gives
//! the reference deployment.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::EnvProfile;
use crate::error::{Error, Result};
use crate::geometry::{
    DEFAULT_BS_HEIGHT, DEFAULT_DOWNTILT_DEG, DEFAULT_MIN_BS_DIST, DEFAULT_RIS_HEIGHT, DEFAULT_UT_HEIGHT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub isd: f64,
    pub num_rings: usize,
    pub bs_height: f64,
    pub ris_height: f64,
    pub ut_height: f64,
    pub min_bs_distance: f64,
    pub downtilt_deg: f64,
    pub users_per_sector: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            isd: 500.0,
            num_rings: 1,
            bs_height: DEFAULT_BS_HEIGHT,
            ris_height: DEFAULT_RIS_HEIGHT,
            ut_height: DEFAULT_UT_HEIGHT,
            min_bs_distance: DEFAULT_MIN_BS_DIST,
            downtilt_deg: DEFAULT_DOWNTILT_DEG,
            users_per_sector: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelsConfig {
    pub bs_horizontal: usize,
    pub bs_vertical: usize,
    pub bs_spacing: f64,
    pub ris_horizontal: usize,
    pub ris_vertical: usize,
    pub ris_spacing: f64,
    pub ut_elements: usize,
}

impl Default for PanelsConfig {
    fn default() -> Self {
        PanelsConfig {
            bs_horizontal: 10,
            bs_vertical: 4,
            bs_spacing: 0.5,
            ris_horizontal: 16,
            ris_vertical: 16,
            ris_spacing: 0.5,
            ut_elements: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    NoRis,
    Random,
    Codebook,
    Ideal,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Phase levels D for `discrete`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Beam count B for `codebook`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beams: Option<usize>,
    pub codebook_span_deg: f64,
    /// Panel-frame zenith of the codebook beams; when absent the beams aim
    /// at user height at 0.35·ISD from the RIS.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebook_zenith_deg: Option<f64>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::Ideal,
            levels: None,
            beams: None,
            codebook_span_deg: 120.0,
            codebook_zenith_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub drops: usize,
    /// Drops interference from every non-serving sector (SINR = SNR).
    pub mute_interferers: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            drops: 20,
            mute_interferers: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub layout: LayoutConfig,
    pub environment: EnvProfile,
    pub panels: PanelsConfig,
    pub strategy: StrategyConfig,
    pub run: RunConfig,
}

/// A fully parameterised RIS strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategySpec {
    NoRis,
    Random,
    Codebook(usize),
    Ideal,
    Discrete(usize),
}

impl StrategySpec {
    /// File-name friendly label, e.g. `discrete_16`.
    pub fn label(&self) -> String {
        match self {
            StrategySpec::NoRis => "no_ris".into(),
            StrategySpec::Random => "random".into(),
            StrategySpec::Codebook(b) => format!("codebook_{b}"),
            StrategySpec::Ideal => "ideal".into(),
            StrategySpec::Discrete(d) => format!("discrete_{d}"),
        }
    }

    pub fn uses_ris(&self) -> bool {
        !matches!(self, StrategySpec::NoRis)
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Codebook(b) => write!(f, "codebook({b})"),
            StrategySpec::Discrete(d) => write!(f, "discrete({d})"),
            other => f.write_str(&other.label()),
        }
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    let n: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("invalid {what} '{s}'")))?;
    if n == 0 {
        return Err(Error::invalid(format!("{what} must be >= 1")));
    }
    Ok(n)
}

/// Splits `name(arg)`, `name:arg` or `name_arg` into name and argument.
fn split_param(s: &str) -> (&str, Option<&str>) {
    if let Some(open) = s.find('(') {
        if let Some(inner) = s[open + 1..].strip_suffix(')') {
            return (&s[..open], Some(inner));
        }
    }
    if let Some((a, b)) = s.split_once(':') {
        return (a, Some(b));
    }
    for name in ["codebook_", "discrete_"] {
        if let Some(rest) = s.strip_prefix(name) {
            return (&name[..name.len() - 1], Some(rest));
        }
    }
    (s, None)
}

impl FromStr for StrategySpec {
    type Err = Error;

    /// Accepts `no_ris`, `random`, `ideal`, `codebook(B)`, `discrete(D)`;
    /// `codebook:B`, `discrete:D` and the label forms are accepted too.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = split_param(s);
        match (name, arg) {
            ("no_ris", None) => Ok(StrategySpec::NoRis),
            ("random", None) => Ok(StrategySpec::Random),
            ("ideal", None) => Ok(StrategySpec::Ideal),
            ("codebook", Some(b)) => Ok(StrategySpec::Codebook(parse_count(b, "beam count")?)),
            ("discrete", Some(d)) => Ok(StrategySpec::Discrete(parse_count(d, "level count")?)),
            ("codebook", None) => Err(Error::invalid("codebook needs a beam count, e.g. codebook(8)")),
            ("discrete", None) => Err(Error::invalid("discrete needs a level count, e.g. discrete(16)")),
            _ => Err(Error::invalid(format!(
                "unknown strategy '{s}' (expected no_ris, random, codebook(B), ideal or discrete(D))"
            ))),
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line (1-based) where `section.key` is set; `key = ""` finds the section
/// header.
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    if key.is_empty() {
        header
    } else {
        None
    }
}

impl SimConfig {
    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            let snippet = line
                .and_then(|l| text.lines().nth(l - 1))
                .map(|l| format!(" (in `{}`)", l.trim()))
                .unwrap_or_default();
            Error::config(format!("{}{}", e.message().trim(), snippet), line)
        })?;
        cfg.validate_with_source(Some(text))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML text; parsing it gives back an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_source(None)
    }

    /// The strategy selected by the `[strategy]` section.
    pub fn strategy_spec(&self) -> Result<StrategySpec> {
        let s = &self.strategy;
        Ok(match s.kind {
            StrategyKind::NoRis => StrategySpec::NoRis,
            StrategyKind::Random => StrategySpec::Random,
            StrategyKind::Ideal => StrategySpec::Ideal,
            StrategyKind::Codebook => match s.beams {
                Some(b) if b >= 1 => StrategySpec::Codebook(b),
                Some(_) => return Err(Error::config("strategy.beams must be >= 1", None)),
                None => return Err(Error::config("strategy.beams is required for kind = \"codebook\"", None)),
            },
            StrategyKind::Discrete => match s.levels {
                Some(d) if d >= 1 => StrategySpec::Discrete(d),
                Some(_) => return Err(Error::config("strategy.levels must be >= 1", None)),
                None => return Err(Error::config("strategy.levels is required for kind = \"discrete\"", None)),
            },
        })
    }

    /// Zenith (degrees, RIS panel frame) used for codebook beams.
    pub fn codebook_zenith_deg(&self) -> f64 {
        self.strategy.codebook_zenith_deg.unwrap_or_else(|| {
            let drop = self.layout.ris_height - self.layout.ut_height;
            90.0 + drop.atan2(0.35 * self.layout.isd).to_degrees()
        })
    }

    pub fn ris_elements(&self) -> usize {
        self.panels.ris_horizontal * self.panels.ris_vertical
    }

    pub fn bs_elements(&self) -> usize {
        self.panels.bs_horizontal * self.panels.bs_vertical
    }

    fn validate_with_source(&self, text: Option<&str>) -> Result<()> {
        let at = |section: &str, key: &str| text.and_then(|t| key_line(t, section, key));
        let fail = |section: &str, key: &str, msg: String| {
            Error::config(msg, at(section, key).or_else(|| at(section, "")))
        };

        if let Err(Error::Config { message, .. }) = self.strategy_spec() {
            let key = if message.contains("levels") { "levels" } else { "beams" };
            let line = at("strategy", key)
                .or_else(|| at("strategy", "kind"))
                .or_else(|| at("strategy", ""));
            return Err(Error::config(message, line));
        }

        let l = &self.layout;
        let checks: [(&str, f64); 5] = [
            ("isd", l.isd),
            ("bs_height", l.bs_height),
            ("ris_height", l.ris_height),
            ("ut_height", l.ut_height),
            ("downtilt_deg", l.downtilt_deg + 90.0),
        ];
        for (key, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(fail("layout", key, format!("layout.{key} is out of range")));
            }
        }
        if l.users_per_sector == 0 {
            return Err(fail("layout", "users_per_sector", "layout.users_per_sector must be >= 1".into()));
        }
        if !(l.min_bs_distance >= 0.0) || l.min_bs_distance >= l.isd / 3f64.sqrt() {
            return Err(fail(
                "layout",
                "min_bs_distance",
                "layout.min_bs_distance must be in [0, ISD/√3)".into(),
            ));
        }

        let p = &self.panels;
        for (key, v) in [
            ("bs_horizontal", p.bs_horizontal),
            ("bs_vertical", p.bs_vertical),
            ("ris_horizontal", p.ris_horizontal),
            ("ris_vertical", p.ris_vertical),
        ] {
            if v == 0 {
                return Err(fail("panels", key, format!("panels.{key} must be >= 1")));
            }
        }
        if p.ut_elements != 1 {
            return Err(fail(
                "panels",
                "ut_elements",
                "panels.ut_elements must be 1 (single-antenna users)".into(),
            ));
        }
        for (key, v) in [("bs_spacing", p.bs_spacing), ("ris_spacing", p.ris_spacing)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(fail("panels", key, format!("panels.{key} must be positive")));
            }
        }

        let s = &self.strategy;
        if !(s.codebook_span_deg > 0.0 && s.codebook_span_deg <= 180.0) {
            return Err(fail("strategy", "codebook_span_deg", "strategy.codebook_span_deg must be in (0, 180]".into()));
        }
        if let Some(z) = s.codebook_zenith_deg {
            if !(0.0..=180.0).contains(&z) {
                return Err(fail("strategy", "codebook_zenith_deg", "strategy.codebook_zenith_deg must be in [0, 180]".into()));
            }
        }
        if self.run.drops == 0 {
            return Err(fail("run", "drops", "run.drops must be >= 1".into()));
        }
        self.environment
            .validate()
            .map_err(|e| Error::config(format!("environment: {e}"), at("environment", "")))
    }
}
