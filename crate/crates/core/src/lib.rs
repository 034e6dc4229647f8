//! System-level Monte-Carlo simulator for cellular networks assisted by
//! reconfigurable intelligent surfaces (RIS).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: hexagonal multi-site layout, sectors, RIS placement,
//!   wraparound distances and user dropping.
//! - [`arrays`]: planar panels, element patterns, steering vectors and the
//!   RIS array factor.
//! - [`channel`]: UMa large-scale terms, cluster/ray synthesis and the
//!   effective channel `H + F·Θ·G`.
//! - [`ris`]: phase-shifter strategies (geometric steering, codebooks, ideal,
//!   discrete, random).
//! - [`theory`]: closed-form rate expressions used as analytic oracles.
//! - [`metrics`]: received power, coupling loss, SINR and empirical CDFs.
//! - [`engine`]: per-drop synthesis, attachment, beam selection, interference
//!   accounting and campaign aggregation.
//! - [`config`], [`output`], [`cli`]: configuration files, result files and
//!   the command-line front end.
//!
//! Every random draw flows through [`rng::stream`], so a `(seed, config)` pair
//! fully determines the output regardless of thread count.

pub mod arrays;
pub mod channel;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod ris;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
