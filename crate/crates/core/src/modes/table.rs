//! Precomputed modal group velocities over the duct parameter grid.
//!
//! Inversion needs `v_g(I, W, mode, f)` for every candidate profile, so the
//! solves are done once and persisted. The cache is a single binary file:
//!
//! ```text
//! magic   8 bytes  "ARCTGVT1"
//! version u32 LE
//! baseline content hash, 32 bytes (sha256 over depth/speed samples)
//! total_depth f64, dz f64, bottom u8 (0 rigid / 1 pressure-release),
//! n_modes u16, pad u8
//! nI u32, I values f64...
//! nW u32, W values f64...
//! nF u32, f values f64...
//! values f64 LE, row-major [I][W][mode][f]
//! ```
//!
//! Identical inputs produce identical bytes, so a rebuilt table can be
//! compared byte for byte against the cache.

use super::{solve_modes, BottomBc, WaveguideSpec, DEFAULT_DZ, DEFAULT_TOTAL_DEPTH};
use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::modes::curves::{dispersion_curves, DispersionCurveSet};
use crate::par;
use crate::profile::{build_profile, DepthProfile};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"ARCTGVT1";
const VERSION: u32 = 1;

/// Waveguide discretization settings a table was built with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub total_depth: f64,
    pub dz: f64,
    pub bottom_bc: BottomBc,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { total_depth: DEFAULT_TOTAL_DEPTH, dz: DEFAULT_DZ, bottom_bc: BottomBc::Rigid }
    }
}

/// How a table build was satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildOutcome {
    /// Solved from scratch (and cached if a path was given).
    Computed,
    /// Loaded from a cache file with matching metadata.
    CacheHit,
    /// Cache existed but its metadata disagreed; recomputed.
    CacheMismatch,
}

/// Group velocities for every `(I, W, mode, frequency)` on a declared grid.
#[derive(Debug, Clone)]
pub struct GroupVelocityTable {
    i_values: Vec<f64>,
    w_values: Vec<f64>,
    freqs: Vec<f64>,
    n_modes: usize,
    /// Row-major `[I][W][mode][f]`.
    values: Vec<f64>,
    baseline_hash: [u8; 32],
    settings: SolverSettings,
}

/// Content hash of a profile (samples only, label excluded).
pub fn baseline_hash(p: &DepthProfile) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((p.depths().len() as u64).to_le_bytes());
    for &d in p.depths() {
        h.update(d.to_le_bytes());
    }
    for &c in p.speeds() {
        h.update(c.to_le_bytes());
    }
    h.finalize().into()
}

impl GroupVelocityTable {
    pub fn i_values(&self) -> &[f64] {
        &self.i_values
    }

    pub fn w_values(&self) -> &[f64] {
        &self.w_values
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn settings(&self) -> SolverSettings {
        self.settings
    }

    fn value_idx(&self, i_idx: usize, w_idx: usize, mode0: usize, f_idx: usize) -> usize {
        ((i_idx * self.w_values.len() + w_idx) * self.n_modes + mode0) * self.freqs.len() + f_idx
    }

    /// Group velocity at a grid node (`mode` is 1-based).
    pub fn vg_at_node(&self, i_idx: usize, w_idx: usize, mode: usize, f_idx: usize) -> f64 {
        self.values[self.value_idx(i_idx, w_idx, mode - 1, f_idx)]
    }

    /// Group velocity with linear interpolation in frequency.
    pub fn vg(&self, i_idx: usize, w_idx: usize, mode: usize, f: f64) -> Result<f64> {
        let fs = &self.freqs;
        if f < fs[0] || f > fs[fs.len() - 1] {
            return Err(Error::OutOfRange(format!(
                "{f} Hz outside table band [{}, {}]",
                fs[0],
                fs[fs.len() - 1]
            )));
        }
        let idx = fs.partition_point(|&x| x < f);
        if idx < fs.len() && fs[idx] == f {
            return Ok(self.vg_at_node(i_idx, w_idx, mode, idx));
        }
        let (f0, f1) = (fs[idx - 1], fs[idx]);
        let (v0, v1) = (
            self.vg_at_node(i_idx, w_idx, mode, idx - 1),
            self.vg_at_node(i_idx, w_idx, mode, idx),
        );
        Ok(v0 + (v1 - v0) * (f - f0) / (f1 - f0))
    }

    /// Absolute dispersion curves for one grid node at range `r`.
    pub fn curves_at(&self, i_idx: usize, w_idx: usize, range_m: f64) -> DispersionCurveSet {
        let vg: Vec<(usize, Vec<(f64, f64)>)> = (1..=self.n_modes)
            .map(|mode| {
                (
                    mode,
                    self.freqs
                        .iter()
                        .enumerate()
                        .map(|(fi, &f)| (f, self.vg_at_node(i_idx, w_idx, mode, fi)))
                        .collect(),
                )
            })
            .collect();
        dispersion_curves(&vg, range_m)
    }

    /// Locate the grid node for exact parameter values.
    pub fn node_of(&self, i: f64, w: f64) -> Option<(usize, usize)> {
        let ii = self.i_values.iter().position(|&x| (x - i).abs() < 1e-9)?;
        let wi = self.w_values.iter().position(|&x| (x - w).abs() < 1e-9)?;
        Some((ii, wi))
    }

    /// Serialize to the documented binary layout.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::with_capacity(128 + self.values.len() * 8);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.baseline_hash);
        buf.extend_from_slice(&self.settings.total_depth.to_le_bytes());
        buf.extend_from_slice(&self.settings.dz.to_le_bytes());
        buf.push(match self.settings.bottom_bc {
            BottomBc::Rigid => 0,
            BottomBc::PressureRelease => 1,
        });
        buf.extend_from_slice(&(self.n_modes as u16).to_le_bytes());
        buf.push(0);
        for axis in [&self.i_values, &self.w_values, &self.freqs] {
            buf.extend_from_slice(&(axis.len() as u32).to_le_bytes());
            for &v in axis {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        for &v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// Read a table back; byte-exact inverse of [`GroupVelocityTable::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::open(path)?;
        let mut data = Vec::new();
        file.read_to_end(&mut data)?;
        let mut cur = std::io::Cursor::new(data);

        let mut magic = [0u8; 8];
        cur.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Cache(format!("{}: bad magic", path.display())));
        }
        let version = read_u32(&mut cur)?;
        if version != VERSION {
            return Err(Error::Cache(format!("unsupported table version {version}")));
        }
        let mut baseline_hash = [0u8; 32];
        cur.read_exact(&mut baseline_hash)?;
        let total_depth = read_f64(&mut cur)?;
        let dz = read_f64(&mut cur)?;
        let mut b = [0u8; 1];
        cur.read_exact(&mut b)?;
        let bottom_bc = match b[0] {
            0 => BottomBc::Rigid,
            1 => BottomBc::PressureRelease,
            x => return Err(Error::Cache(format!("unknown bottom bc tag {x}"))),
        };
        let mut m = [0u8; 2];
        cur.read_exact(&mut m)?;
        let n_modes = u16::from_le_bytes(m) as usize;
        cur.read_exact(&mut [0u8; 1])?;

        let mut axes = Vec::new();
        for _ in 0..3 {
            let n = read_u32(&mut cur)? as usize;
            let mut axis = Vec::with_capacity(n);
            for _ in 0..n {
                axis.push(read_f64(&mut cur)?);
            }
            axes.push(axis);
        }
        let freqs = axes.pop().unwrap();
        let w_values = axes.pop().unwrap();
        let i_values = axes.pop().unwrap();

        let n_values = i_values.len() * w_values.len() * n_modes * freqs.len();
        let mut values = Vec::with_capacity(n_values);
        for _ in 0..n_values {
            values.push(read_f64(&mut cur)?);
        }
        Ok(Self {
            i_values,
            w_values,
            freqs,
            n_modes,
            values,
            baseline_hash,
            settings: SolverSettings { total_depth, dz, bottom_bc },
        })
    }

    fn matches(
        &self,
        hash: &[u8; 32],
        grid: &ParamGrid,
        freqs: &[f64],
        n_modes: usize,
        settings: &SolverSettings,
    ) -> bool {
        self.baseline_hash == *hash
            && self.i_values == grid.i_values()
            && self.w_values == grid.w_values()
            && self.freqs == freqs
            && self.n_modes == n_modes
            && self.settings == *settings
    }
}

fn read_u32(cur: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    cur.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(cur: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    cur.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Build (or load from cache) the group-velocity table for every `(I, W)`
/// grid node, mode 1..=`max_modes`, and frequency in `fgrid`.
///
/// Any node where a requested mode is missing or untrapped is an error: the
/// inversion grids must be hole-free.
pub fn build_gv_table(
    baseline: &DepthProfile,
    grid: &ParamGrid,
    fgrid: &[f64],
    max_modes: usize,
    settings: SolverSettings,
    cache: Option<&Path>,
) -> Result<(GroupVelocityTable, BuildOutcome)> {
    if fgrid.is_empty() {
        return Err(Error::InvalidGrid("empty frequency grid".into()));
    }
    if max_modes == 0 {
        return Err(Error::InvalidGrid("zero modes requested".into()));
    }
    let hash = baseline_hash(baseline);

    let mut outcome = BuildOutcome::Computed;
    if let Some(path) = cache {
        if path.exists() {
            match GroupVelocityTable::load(path) {
                Ok(t) if t.matches(&hash, grid, fgrid, max_modes, &settings) => {
                    return Ok((t, BuildOutcome::CacheHit));
                }
                _ => outcome = BuildOutcome::CacheMismatch,
            }
        }
    }

    let n_iw = grid.len_iw();
    let nf = fgrid.len();
    let per_node: Vec<Result<Vec<f64>>> = par::map_indexed(n_iw, |flat| {
        let params = grid.params_at(flat);
        let dual = build_profile(baseline, &params)?;
        let spec =
            WaveguideSpec::new(dual, settings.total_depth, settings.dz, settings.bottom_bc)?;
        let mut out = vec![f64::NAN; max_modes * nf];
        for (fi, &f) in fgrid.iter().enumerate() {
            let ms = solve_modes(&spec.refined_for(f), f, max_modes)?;
            for (m0, mode) in ms.modes.iter().enumerate() {
                out[m0 * nf + fi] = mode.group_velocity;
            }
        }
        Ok(out)
    });

    let mut values = Vec::with_capacity(n_iw * max_modes * nf);
    for (flat, node) in per_node.into_iter().enumerate() {
        let node = node?;
        if let Some(hole) = node.iter().position(|v| v.is_nan()) {
            let (ii, wi) = grid.unflatten(flat);
            let (m0, fi) = (hole / nf, hole % nf);
            return Err(Error::Table(format!(
                "mode {} untrapped at I={}, W={}, f={} Hz",
                m0 + 1,
                grid.i_values()[ii],
                grid.w_values()[wi],
                fgrid[fi]
            )));
        }
        values.extend_from_slice(&node);
    }

    let table = GroupVelocityTable {
        i_values: grid.i_values().to_vec(),
        w_values: grid.w_values().to_vec(),
        freqs: fgrid.to_vec(),
        n_modes: max_modes,
        values,
        baseline_hash: hash,
        settings,
    };
    if let Some(path) = cache {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        table.save(path)?;
    }
    Ok((table, outcome))
}

/// Long-format CSV export: `I,W,mode,freq_hz,vg_mps`.
pub fn write_table_csv(table: &GroupVelocityTable, out: &mut impl Write) -> Result<()> {
    writeln!(out, "I,W,mode,freq_hz,vg_mps")?;
    for (ii, &i) in table.i_values.iter().enumerate() {
        for (wi, &w) in table.w_values.iter().enumerate() {
            for mode in 1..=table.n_modes {
                for (fi, &f) in table.freqs.iter().enumerate() {
                    writeln!(out, "{i},{w},{mode},{f},{}", table.vg_at_node(ii, wi, mode, fi))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::arange;

    fn tiny_inputs() -> (DepthProfile, ParamGrid, Vec<f64>) {
        let baseline = DepthProfile::synthetic_baseline(3800.0);
        let grid = ParamGrid::new(vec![7.5], vec![69.0]).unwrap();
        let fgrid = arange(20.0, 30.0, 5.0);
        (baseline, grid, fgrid)
    }

    #[test]
    fn degenerate_grid_matches_direct_solve() {
        let (baseline, grid, fgrid) = tiny_inputs();
        let (table, outcome) =
            build_gv_table(&baseline, &grid, &fgrid, 3, SolverSettings::default(), None).unwrap();
        assert_eq!(outcome, BuildOutcome::Computed);

        let params = grid.params_at(0);
        let dual = build_profile(&baseline, &params).unwrap();
        let spec = WaveguideSpec::with_defaults(dual).unwrap();
        for (fi, &f) in fgrid.iter().enumerate() {
            let ms = solve_modes(&spec.refined_for(f), f, 3).unwrap();
            for (m0, mode) in ms.modes.iter().enumerate() {
                assert_eq!(table.vg_at_node(0, 0, m0 + 1, fi), mode.group_velocity);
            }
        }
    }

    #[test]
    fn cache_round_trip_is_exact_and_hit_detected() {
        let (baseline, grid, fgrid) = tiny_inputs();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gv.tbl");
        let (t1, o1) =
            build_gv_table(&baseline, &grid, &fgrid, 2, SolverSettings::default(), Some(&path))
                .unwrap();
        assert_eq!(o1, BuildOutcome::Computed);
        let (t2, o2) =
            build_gv_table(&baseline, &grid, &fgrid, 2, SolverSettings::default(), Some(&path))
                .unwrap();
        assert_eq!(o2, BuildOutcome::CacheHit);
        assert_eq!(t1.values, t2.values);
        assert_eq!(t1.freqs, t2.freqs);

        let loaded = GroupVelocityTable::load(&path).unwrap();
        assert_eq!(loaded.values, t1.values);
    }

    #[test]
    fn cache_mismatch_triggers_recompute() {
        let (baseline, grid, fgrid) = tiny_inputs();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gv.tbl");
        build_gv_table(&baseline, &grid, &fgrid, 2, SolverSettings::default(), Some(&path))
            .unwrap();
        // Different frequency grid: metadata mismatch.
        let fgrid2 = arange(20.0, 30.0, 10.0);
        let (_, outcome) =
            build_gv_table(&baseline, &grid, &fgrid2, 2, SolverSettings::default(), Some(&path))
                .unwrap();
        assert_eq!(outcome, BuildOutcome::CacheMismatch);
    }

    #[test]
    fn vg_interpolates_between_frequency_nodes() {
        let (baseline, grid, fgrid) = tiny_inputs();
        let (table, _) =
            build_gv_table(&baseline, &grid, &fgrid, 1, SolverSettings::default(), None).unwrap();
        let v0 = table.vg_at_node(0, 0, 1, 0);
        let v1 = table.vg_at_node(0, 0, 1, 1);
        let mid = table.vg(0, 0, 1, 22.5).unwrap();
        assert!((mid - 0.5 * (v0 + v1)).abs() < 1e-12);
        assert!(table.vg(0, 0, 1, 5.0).is_err());
    }
}
