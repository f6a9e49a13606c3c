//! Flat `key = value` configuration with `#` comments.
//!
//! Every key has a default, so an empty file is a valid configuration. Lists
//! are comma-separated. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Known keys, their defaults, and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("ports", "16", "switch ports N"),
    ("cell_size", "64", "cell size S in bytes"),
    ("speedup", "1.0", "fabric speed-up"),
    ("islip_iterations", "auto", "iSLIP iterations; auto is ceil(log2 N)"),
    ("merge", "false", "merge packet trailers into the next packet's cell"),
    ("merge_timeout_cells", "10", "hold-back timer in cell times"),
    ("warmup_fraction", "0.1", "leading fraction of the run excluded from statistics"),
    ("instability_threshold", "1000", "queued cells at one input that count as unstable"),
    ("stop_on_unstable", "true", "end a run once it is flagged unstable"),
    ("drain", "false", "keep running until every packet has left"),
    ("max_slots", "0", "cap on internal slots, 0 for none"),
    ("seed", "1", "base seed"),
    ("utilization", "0.9", "target utilization for simulate and min-speedup"),
    ("utilization_list", "0.5,0.6,0.7,0.8,0.85,0.9,0.95,0.97,0.99", "sweep utilizations"),
    ("speedup_list", "1.0,1.05,1.1", "sweep speed-ups"),
    ("search_step", "0.01", "min-speedup search step"),
    ("search_max", "2.0", "largest speed-up tried by min-speedup"),
    ("L", "100,500,1000", "mean packet lengths in bytes for analyze"),
    ("S", "64", "cell size in bytes for analyze"),
    ("rho_list", "0.5,0.6,0.7,0.8,0.85,0.9,0.95,0.99", "offered loads for analyze"),
    ("quantize.dist", "gamma", "gamma, exponential, hyperexp2 or erlang2"),
    ("quantize.mean", "1.74", "gamma: sample mean"),
    ("quantize.stddev", "0.89", "gamma: sample standard deviation"),
    ("quantize.rate", "0.64", "exponential and erlang2 rate"),
    ("quantize.weights", "0.5,0.5", "hyperexp2 phase weights"),
    ("quantize.rates", "1,2", "hyperexp2 phase rates"),
    ("quantize.tail_epsilon", "1e-12", "pmf truncation tail mass"),
    ("traffic.source", "synthetic", "synthetic or trace"),
    ("traffic.trace", "", "trace file for traffic.source = trace"),
    ("traffic.arrival", "poisson", "poisson or cbr"),
    ("traffic.rate", "1.0", "poisson packets per time unit (rescaled later)"),
    ("traffic.interval", "1.0", "cbr packet spacing (rescaled later)"),
    ("traffic.length", "bimodal", "bimodal, exponential or fixed"),
    ("traffic.mean_length", "764", "exponential mean length in bytes"),
    ("traffic.fixed_length", "65", "fixed length in bytes"),
    ("traffic.dest", "uniform", "uniform or a fixed output port"),
    ("traffic.inputs", "all", "all, or a list of active input ports"),
    ("traffic.packets_per_input", "20000", "packets generated per active input"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

fn known(key: &str) -> Result<&'static str> {
    KEYS.iter()
        .map(|k| k.0)
        .find(|k| *k == key)
        .ok_or_else(|| anyhow!("unknown configuration key {key:?}"))
}

impl Default for Config {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|(k, v, _)| (*k, v.to_string())).collect() }
    }
}

impl Config {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", idx + 1))?;
            let key = known(key.trim()).with_context(|| format!("line {}", idx + 1))?;
            if let Some(first) = seen.insert(key, idx + 1) {
                bail!("line {}: {key} already set on line {first}", idx + 1);
            }
            cfg.values.insert(key, value.trim().to_string());
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) =
            assignment.split_once('=').ok_or_else(|| anyhow!("override {assignment:?} is not key=value"))?;
        let key = known(key.trim())?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("unregistered key {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse().map_err(|e| anyhow!("{key} = {raw:?}: {e}"))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        let items = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| anyhow!("{key}: item {s:?}: {e}")))
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            bail!("{key} must list at least one value");
        }
        Ok(items)
    }

    /// The effective configuration as `# key = value` lines.
    pub fn comment_block(&self) -> String {
        self.values.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }
}
