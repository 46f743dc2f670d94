//! `chernoff-map`: a grid of Chernoff ratios over the two-block plane.
//!
//! The plane is parameterized by x = min(a,c)/max(a,c) and y = b/max(a,c)
//! with max(a,c) pinned to a base scale, so each cell is the balanced
//! two-block model B = [scale, y*scale; y*scale, x*scale]. Cells whose
//! off-diagonal would leave [0, 1] are flagged and skipped; cells where
//! the ratio is undefined (a flat matrix, or a vanishing Chernoff value)
//! are flagged as degenerate. The y = sqrt(x) boundary curve is sampled
//! alongside for plotting.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use sgc_core::chernoff::chernoff_ratio;
use sgc_core::sbm::SbmParams;
use sgc_core::util::derive_seed;

use crate::cli::ChernoffMapFlags;
use crate::config::Global;
use crate::out;
use crate::pool;
use crate::Outcome;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChernoffMapParams {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Grid points per axis.
    pub resolution: usize,
    /// max(a, c) of every cell's connectivity matrix.
    pub scale: f64,
    /// Graph size for the large-sample limit at each cell.
    pub n_big: usize,
}

impl Default for ChernoffMapParams {
    fn default() -> Self {
        ChernoffMapParams {
            x_min: 0.05,
            x_max: 1.0,
            y_min: 0.05,
            y_max: 1.0,
            resolution: 9,
            scale: 0.4,
            n_big: 1500,
        }
    }
}

impl ChernoffMapParams {
    pub fn overlay(&mut self, flags: ChernoffMapFlags) {
        if let Some(v) = flags.x_min {
            self.x_min = v;
        }
        if let Some(v) = flags.x_max {
            self.x_max = v;
        }
        if let Some(v) = flags.y_min {
            self.y_min = v;
        }
        if let Some(v) = flags.y_max {
            self.y_max = v;
        }
        if let Some(v) = flags.resolution {
            self.resolution = v;
        }
        if let Some(v) = flags.scale {
            self.scale = v;
        }
        if let Some(v) = flags.n_big {
            self.n_big = v;
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_min <= self.x_max && self.x_max <= 1.0) {
            bail!(
                "x range must satisfy 0 < x_min <= x_max <= 1, got [{}, {}]",
                self.x_min,
                self.x_max
            );
        }
        if !(self.y_min > 0.0 && self.y_min <= self.y_max) {
            bail!(
                "y range must satisfy 0 < y_min <= y_max, got [{}, {}]",
                self.y_min,
                self.y_max
            );
        }
        if self.resolution == 0 {
            bail!("resolution must be at least 1");
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            bail!("scale must be in (0, 1], got {}", self.scale);
        }
        if self.n_big < 400 {
            bail!("n_big below 400 cannot estimate a two-dimensional limit");
        }
        Ok(())
    }
}

struct Cell {
    x: f64,
    y: f64,
    a: f64,
    b: f64,
    c: f64,
    rho: Option<f64>,
    chernoff_ase: Option<f64>,
    chernoff_lse: Option<f64>,
    flag: &'static str,
}

fn axis(lo: f64, hi: f64, steps: usize, i: usize) -> f64 {
    if steps <= 1 {
        lo
    } else {
        lo + (hi - lo) * (i as f64) / ((steps - 1) as f64)
    }
}

/// Evaluate the grid and write chernoff_map.csv plus sqrt_curve.csv.
///
/// Flagged cells are an expected part of the output, not failures; the
/// command only fails on invalid parameters or output errors.
///
/// # Errors
///
/// Fails on parameter validation or filesystem errors.
pub fn run(global: &Global, params: &ChernoffMapParams) -> Result<Outcome> {
    params.validate()?;
    out::ensure_dir(&global.out_dir)?;

    let res = params.resolution;
    let n_cells = res * res;
    let cells = pool::run_indexed(n_cells, global.threads, |idx| {
        let (yi, xi) = (idx / res, idx % res);
        let x = axis(params.x_min, params.x_max, res, xi);
        let y = axis(params.y_min, params.y_max, res, yi);
        evaluate_cell(x, y, params, derive_seed(global.seed, idx as u64))
    });

    let rows: Vec<String> = cells
        .iter()
        .map(|cell| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                cell.x,
                cell.y,
                cell.a,
                cell.b,
                cell.c,
                out::csv_opt_f64(cell.rho),
                out::csv_opt_f64(cell.chernoff_ase),
                out::csv_opt_f64(cell.chernoff_lse),
                cell.flag,
            )
        })
        .collect();
    out::write_csv(
        &global.out_dir.join("chernoff_map.csv"),
        "x,y,a,b,c,rho,chernoff_ase,chernoff_lse,flag",
        &rows,
    )?;

    let curve_rows: Vec<String> = (0..201)
        .map(|i| {
            let x = axis(params.x_min, params.x_max, 201, i);
            format!("{},{}", x, x.sqrt())
        })
        .collect();
    out::write_csv(&global.out_dir.join("sqrt_curve.csv"), "x,y", &curve_rows)?;
    out::write_resolved_config(&global.out_dir, "chernoff-map", global, params)?;

    let flagged = cells.iter().filter(|c| !c.flag.is_empty()).count();
    log::info!(
        "evaluated {} cells ({} flagged) into {}",
        n_cells,
        flagged,
        global.out_dir.display()
    );
    Ok(Outcome::Success)
}

fn evaluate_cell(x: f64, y: f64, params: &ChernoffMapParams, seed: u64) -> Cell {
    let a = params.scale;
    let c = x * params.scale;
    let b = y * params.scale;
    let mut cell = Cell {
        x,
        y,
        a,
        b,
        c,
        rho: None,
        chernoff_ase: None,
        chernoff_lse: None,
        flag: "",
    };
    if !(0.0..=1.0).contains(&b) {
        cell.flag = "skipped_invalid_b";
        return cell;
    }
    let model = match SbmParams::new(vec![0.5, 0.5], vec![vec![a, b], vec![b, c]]) {
        Ok(model) => model,
        Err(_) => {
            cell.flag = "skipped_invalid_b";
            return cell;
        }
    };
    match chernoff_ratio(&model, params.n_big, seed) {
        Ok(result) => {
            cell.rho = Some(result.rho);
            cell.chernoff_ase = Some(result.chernoff_ase);
            cell.chernoff_lse = Some(result.chernoff_lse);
        }
        Err(err) => {
            log::debug!("cell ({x}, {y}) degenerate: {err}");
            cell.flag = "degenerate";
        }
    }
    cell
}
