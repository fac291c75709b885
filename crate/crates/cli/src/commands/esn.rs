use mcens::esn::{angle_concentration, gap_grid, write_gap_grid_csv, AngleStats, GapGridRow};
use mcens::rng::derive_seed;
use serde::{Deserialize, Serialize};

use super::{par_map, write_json};
use crate::config::RunConfig;
use crate::error::{AtPath, CliResult};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnReport {
    pub draws: u64,
    pub rows: Vec<GapGridRow>,
    /// Whether the closed-form gap is negative on every row with `M > 1`
    /// and `ε < 0`.
    pub gap_negative: bool,
    /// Largest `|gap − mc_gap| / mc_se` over rows with a nonzero SE.
    pub max_abs_z: f64,
    pub angles: Vec<AngleRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleRow {
    pub dim: usize,
    pub pairs: usize,
    #[serde(flatten)]
    pub stats: AngleStats,
}

pub fn run(cfg: &RunConfig) -> CliResult<EsnReport> {
    let layout = Layout::new(&cfg.out);
    let e = &cfg.esn;
    let rows = gap_grid(&e.mu, &e.sigma, &e.eps, &e.members, e.draws, cfg.esn_seed())?;
    layout.ensure("esn")?;
    let path = layout.esn_grid();
    write_gap_grid_csv(&rows, &path).at(&path)?;

    let gap_negative = rows.iter().filter(|r| r.members > 1 && r.eps < 0.0).all(|r| r.gap < 0.0);
    let max_abs_z = rows
        .iter()
        .filter(|r| r.mc_se > 0.0)
        .map(|r| ((r.gap - r.mc_gap) / r.mc_se).abs())
        .fold(0.0, f64::max);
    let angles = par_map(&e.angle_dims, |&dim| {
        let seed = derive_seed(cfg.esn_seed(), &format!("angles/{dim}"));
        Ok(AngleRow { dim, pairs: e.angle_pairs, stats: angle_concentration(dim, e.angle_pairs, seed)? })
    })?;
    let report = EsnReport { draws: e.draws, rows, gap_negative, max_abs_z, angles };
    write_json(&report, &layout.esn_json())?;
    Ok(report)
}
