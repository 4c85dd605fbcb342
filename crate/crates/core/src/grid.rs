//! Search grids over the duct parameters (and optionally source range).

use crate::error::{Error, Result};
use crate::profile::DualChannelParams;

/// Inclusive arithmetic progression `start, start+step, ..` up to `stop`
/// (within half a step of rounding slack).
pub fn arange(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Exhaustive-search grid over duct intensity `I`, duct width `W`, and
/// optionally source range `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    i_values: Vec<f64>,
    w_values: Vec<f64>,
    r_values: Option<Vec<f64>>,
}

impl ParamGrid {
    /// Build a grid, validating that every `(I, W)` combination is a legal
    /// parameter pair.
    pub fn new(i_values: Vec<f64>, w_values: Vec<f64>) -> Result<Self> {
        if i_values.is_empty() || w_values.is_empty() {
            return Err(Error::InvalidGrid("empty I or W axis".into()));
        }
        for &i in &i_values {
            for &w in &w_values {
                DualChannelParams::new(i, w)?;
            }
        }
        Ok(Self { i_values, w_values, r_values: None })
    }

    /// Attach a range axis (metres) for joint source-range search.
    pub fn with_ranges(mut self, r_values: Vec<f64>) -> Result<Self> {
        if r_values.is_empty() {
            return Err(Error::InvalidGrid("empty range axis".into()));
        }
        if r_values.iter().any(|&r| r <= 0.0) {
            return Err(Error::InvalidGrid("ranges must be positive".into()));
        }
        self.r_values = Some(r_values);
        Ok(self)
    }

    /// Default profile-fit grid: I in [0, 15] m/s step 0.5, W in [5, 120] m
    /// step 1.
    pub fn default_profile_grid() -> Self {
        Self::new(arange(0.0, 15.0, 0.5), arange(5.0, 120.0, 1.0))
            .expect("default grid is valid")
    }

    /// Default joint-range axis: 100 km to 600 km step 5 km.
    pub fn default_range_axis() -> Vec<f64> {
        arange(100_000.0, 600_000.0, 5_000.0)
    }

    pub fn i_values(&self) -> &[f64] {
        &self.i_values
    }

    pub fn w_values(&self) -> &[f64] {
        &self.w_values
    }

    pub fn r_values(&self) -> Option<&[f64]> {
        self.r_values.as_deref()
    }

    /// Number of `(I, W)` combinations.
    pub fn len_iw(&self) -> usize {
        self.i_values.len() * self.w_values.len()
    }

    /// Flattened index of `(i_idx, w_idx)`, W fastest.
    pub fn idx(&self, i_idx: usize, w_idx: usize) -> usize {
        i_idx * self.w_values.len() + w_idx
    }

    /// Inverse of [`ParamGrid::idx`].
    pub fn unflatten(&self, flat: usize) -> (usize, usize) {
        (flat / self.w_values.len(), flat % self.w_values.len())
    }

    /// Parameter pair at a flattened `(I, W)` index.
    pub fn params_at(&self, flat: usize) -> DualChannelParams {
        let (ii, wi) = self.unflatten(flat);
        DualChannelParams::new(self.i_values[ii], self.w_values[wi])
            .expect("grid points validated at construction")
    }

    /// Iterate `(flat_index, I, W)` in row-major order.
    pub fn iter_iw(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let nw = self.w_values.len();
        (0..self.len_iw()).map(move |flat| {
            (flat, self.i_values[flat / nw], self.w_values[flat % nw])
        })
    }
}

/// Cost values over a [`ParamGrid`], with the argmin and degeneracy
/// diagnostics attached.
///
/// Layout is row-major with W fastest, I next, and (when present) range
/// slowest: `idx = (r_idx * nI + i_idx) * nW + w_idx`. Ties at the minimum
/// resolve to the smallest W, then smallest I, then smallest r.
#[derive(Debug, Clone)]
pub struct CostSurface {
    grid: ParamGrid,
    costs: Vec<f64>,
    best_flat: usize,
    degenerate: bool,
    min_gap_rel: f64,
}

impl CostSurface {
    fn build(grid: ParamGrid, costs: Vec<f64>, expect_len: usize) -> Result<Self> {
        if costs.len() != expect_len {
            return Err(Error::InvalidGrid(format!(
                "{} costs for a {} point grid",
                costs.len(),
                expect_len
            )));
        }
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("non-finite cost in surface".into()));
        }
        let nw = grid.w_values().len();
        let ni = grid.i_values().len();
        // Tie-break key: (cost, W index, I index, r index).
        let key = |flat: usize| {
            let w = flat % nw;
            let i = (flat / nw) % ni;
            let r = flat / (nw * ni);
            (w, i, r)
        };
        let mut best_flat = 0usize;
        for flat in 1..costs.len() {
            let better = match costs[flat].partial_cmp(&costs[best_flat]).unwrap() {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => key(flat) < key(best_flat),
                std::cmp::Ordering::Greater => false,
            };
            if better {
                best_flat = flat;
            }
        }
        let best = costs[best_flat];
        let max = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        let tie_tol = 1e-9 * mean.abs();
        let ties = costs.iter().filter(|&&c| c <= best + tie_tol).count();
        let second_best = costs
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != best_flat)
            .map(|(_, &c)| c)
            .fold(f64::INFINITY, f64::min);
        let range = max - best;
        let min_gap_rel = if second_best.is_finite() && range > 0.0 {
            (second_best - best) / range
        } else {
            0.0
        };
        let degenerate = ties > 1 || (costs.len() > 1 && range == 0.0);
        Ok(Self { grid, costs, best_flat, degenerate, min_gap_rel })
    }

    /// Surface over the `(I, W)` plane only.
    pub fn new_iw(grid: ParamGrid, costs: Vec<f64>) -> Result<Self> {
        let n = grid.len_iw();
        Self::build(grid, costs, n)
    }

    /// Surface over `(I, W, r)`; the grid must carry a range axis.
    pub fn new_iwr(grid: ParamGrid, costs: Vec<f64>) -> Result<Self> {
        let nr = grid
            .r_values()
            .ok_or_else(|| Error::InvalidGrid("grid has no range axis".into()))?
            .len();
        let n = grid.len_iw() * nr;
        Self::build(grid, costs, n)
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Flattened `(I, W)` index of the minimum (2-D surfaces).
    pub fn best_flat_iw(&self) -> usize {
        self.best_flat % self.grid.len_iw()
    }

    /// `(i_idx, w_idx, r_idx)` of the minimum.
    pub fn best_indices(&self) -> (usize, usize, usize) {
        let nw = self.grid.w_values().len();
        let ni = self.grid.i_values().len();
        let w = self.best_flat % nw;
        let i = (self.best_flat / nw) % ni;
        let r = self.best_flat / (nw * ni);
        (i, w, r)
    }

    pub fn best_cost(&self) -> f64 {
        self.costs[self.best_flat]
    }

    /// True when several grid points tie the minimum (or the surface is
    /// entirely flat), meaning the argmin is not unique.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// `(second best - best) / (max - best)`; small values mean a shallow,
    /// poorly localized minimum.
    pub fn min_gap_rel(&self) -> f64 {
        self.min_gap_rel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arange_hits_endpoints() {
        let v = arange(0.0, 15.0, 0.5);
        assert_eq!(v.len(), 31);
        assert_eq!(v[0], 0.0);
        assert_eq!(*v.last().unwrap(), 15.0);
    }

    #[test]
    fn default_grid_dimensions() {
        let g = ParamGrid::default_profile_grid();
        assert_eq!(g.i_values().len(), 31);
        assert_eq!(g.w_values().len(), 116);
        assert_eq!(g.len_iw(), 31 * 116);
    }

    #[test]
    fn rejects_empty_axis() {
        assert!(ParamGrid::new(vec![], vec![10.0]).is_err());
    }

    #[test]
    fn rejects_overwide_duct() {
        // W = 130 breaks 31 + 3W <= 400.
        assert!(ParamGrid::new(vec![1.0], vec![130.0]).is_err());
    }

    #[test]
    fn flat_index_round_trip() {
        let g = ParamGrid::new(vec![0.0, 1.0, 2.0], vec![10.0, 20.0]).unwrap();
        for flat in 0..g.len_iw() {
            let (i, w) = g.unflatten(flat);
            assert_eq!(g.idx(i, w), flat);
        }
    }

    #[test]
    fn surface_argmin_and_tiebreak() {
        let g = ParamGrid::new(vec![0.0, 1.0], vec![10.0, 20.0]).unwrap();
        // Ties at cost 1.0 on (I=0,W=20) and (I=1,W=10): smallest W wins.
        let s = CostSurface::new_iw(g, vec![5.0, 1.0, 1.0, 7.0]).unwrap();
        let (i, w, _) = s.best_indices();
        assert_eq!((i, w), (1, 0));
        assert!(s.degenerate());
    }

    #[test]
    fn surface_unique_min_not_degenerate() {
        let g = ParamGrid::new(vec![0.0, 1.0], vec![10.0, 20.0]).unwrap();
        let s = CostSurface::new_iw(g, vec![5.0, 0.5, 1.0, 7.0]).unwrap();
        assert!(!s.degenerate());
        assert_eq!(s.best_cost(), 0.5);
        assert!((s.min_gap_rel() - (1.0 - 0.5) / (7.0 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn surface_length_mismatch_errors() {
        let g = ParamGrid::new(vec![0.0], vec![10.0]).unwrap();
        assert!(CostSurface::new_iw(g, vec![1.0, 2.0]).is_err());
    }
}
