//! Utilization sweeps and minimum speed-up search.

use rayon::prelude::*;

use super::{run_simulation, SimError, SimStats, SwitchConfig};
use crate::traffic::{derive_seed, TrafficPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub utilization: f64,
    pub speedup: f64,
    pub stats: SimStats,
}

/// Runs every `(utilization, speedup)` pair, in parallel.
///
/// Traffic for a utilization is seeded from `cfg.seed` and the utilization
/// index only, so all speed-ups at one load see the same packets. Results
/// come back in row-major grid order regardless of scheduling.
pub fn sweep_utilization(
    cfg: &SwitchConfig,
    plan: &TrafficPlan,
    utilizations: &[f64],
    speedups: &[f64],
) -> Result<Vec<SweepPoint>, SimError> {
    cfg.validate()?;
    let traffic = utilizations
        .par_iter()
        .enumerate()
        .map(|(ui, &u)| plan.build(cfg.ports, cfg.cell_size, u, derive_seed(cfg.seed, &[ui as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    let grid: Vec<(usize, usize)> =
        (0..utilizations.len()).flat_map(|u| (0..speedups.len()).map(move |s| (u, s))).collect();
    grid.par_iter()
        .map(|&(ui, si)| {
            let run = SwitchConfig {
                speedup: speedups[si],
                seed: derive_seed(cfg.seed, &[ui as u64, si as u64]),
                ..cfg.clone()
            };
            let stats = run_simulation(&run, &traffic[ui])?;
            Ok(SweepPoint { utilization: utilizations[ui], speedup: speedups[si], stats })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupSearch {
    pub start: f64,
    pub step: f64,
    pub max: f64,
}

impl Default for SpeedupSearch {
    fn default() -> Self {
        Self { start: 1.0, step: 0.01, max: 2.0 }
    }
}

impl SpeedupSearch {
    pub fn candidates(&self) -> Vec<f64> {
        let steps = ((self.max - self.start) / self.step + 1e-9).floor().max(0.0) as usize;
        // Rounded so printed values are exact hundredths.
        (0..=steps).map(|k| ((self.start + k as f64 * self.step) * 1e9).round() / 1e9).collect()
    }
}

/// Smallest candidate speed-up at which the run stays stable.
///
/// Candidates are tried in ascending batches of one per worker thread; the
/// first stable one in grid order wins, so the answer does not depend on
/// the thread count.
pub fn find_min_speedup(
    cfg: &SwitchConfig,
    plan: &TrafficPlan,
    utilization: f64,
    search: SpeedupSearch,
) -> Result<(f64, SimStats), SimError> {
    cfg.validate()?;
    if !(search.step > 0.0 && search.start >= 1.0 && search.max >= search.start) {
        return Err(SimError::Config(format!("bad speed-up search range {search:?}")));
    }
    let traffic = plan.build(cfg.ports, cfg.cell_size, utilization, derive_seed(cfg.seed, &[0]))?;
    let candidates = search.candidates();
    let batch = rayon::current_num_threads().max(1);
    for chunk in candidates.chunks(batch) {
        let results = chunk
            .par_iter()
            .map(|&s| run_simulation(&SwitchConfig { speedup: s, ..cfg.clone() }, &traffic))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some((s, stats)) = chunk.iter().zip(results).find(|(_, st)| !st.unstable) {
            return Ok((*s, stats));
        }
    }
    Err(SimError::SearchFailed { max_speedup: search.max })
}
