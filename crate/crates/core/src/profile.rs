//! Sound speed profiles and their two-parameter duct representation.
//!
//! An Arctic dual-duct profile is modeled as a reference (half-waveguide)
//! profile plus a piecewise-linear perturbation controlled by two numbers:
//! the duct intensity `I` (m/s) and the duct width `W` (m). The perturbation
//! is -1 m/s above 30 m, rises to +I at `31+W`, falls back to zero at
//! `31+3W`, dips to -I over the first third of the remaining span to 400 m,
//! recovers to zero at 400 m, and vanishes below. Fitting inverts `(I, W)`
//! from a measured profile by exhaustive search of the squared-difference
//! cost over a parameter grid.
//!
//! All perturbation arithmetic lives on a 1 m integer depth grid; queries
//! between integers interpolate linearly. The only discontinuity is the
//! documented -1 to 0 step between 30 m and 31 m, which the interpolation
//! closes with a ramp.

use crate::error::{Error, Result};
use crate::grid::{CostSurface, ParamGrid};
use crate::par;

/// Depth above which the perturbation is a constant -1 m/s.
const SURFACE_LAYER_M: f64 = 30.0;
/// Depth where the rising limb starts.
const DUCT_TOP_M: f64 = 31.0;
/// Depth below which the perturbation vanishes.
const DUCT_BOTTOM_M: f64 = 400.0;
/// Profiles must cover this depth before a duct can be imposed.
pub const MIN_COVERAGE_M: f64 = 501.0;

/// Sanity bounds for polar seawater sound speed.
const SPEED_MIN_MPS: f64 = 1380.0;
const SPEED_MAX_MPS: f64 = 1600.0;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Sampled sound speed versus depth.
///
/// Depths are strictly increasing and start at the surface (0 m); speeds are
/// bounded to plausible polar seawater values.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    depths: Vec<f64>,
    speeds: Vec<f64>,
    /// Free-text description carried through exports.
    pub label: String,
}

impl DepthProfile {
    /// Validate and build a profile.
    pub fn new(depths: Vec<f64>, speeds: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if depths.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        if depths.len() != speeds.len() {
            return Err(Error::InvalidProfile(format!(
                "{} depths vs {} speeds",
                depths.len(),
                speeds.len()
            )));
        }
        if depths[0] != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "profile must start at 0 m, got {}",
                depths[0]
            )));
        }
        for pair in depths.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidProfile(format!(
                    "depths not strictly increasing at {} m",
                    pair[1]
                )));
            }
        }
        for (&z, &c) in depths.iter().zip(&speeds) {
            if !c.is_finite() || !(SPEED_MIN_MPS..=SPEED_MAX_MPS).contains(&c) {
                return Err(Error::InvalidProfile(format!(
                    "speed {c} m/s at {z} m outside [{SPEED_MIN_MPS}, {SPEED_MAX_MPS}]"
                )));
            }
        }
        Ok(Self { depths, speeds, label: label.into() })
    }

    /// Two-segment synthetic reference profile used throughout the tests:
    /// 1435 m/s at the surface, 0.040 1/s gradient to 200 m, 0.016 1/s below.
    pub fn synthetic_baseline(max_depth: f64) -> Self {
        assert!(max_depth >= MIN_COVERAGE_M, "baseline must reach {MIN_COVERAGE_M} m");
        let depths = vec![0.0, 200.0, max_depth];
        let speeds = vec![1435.0, 1443.0, 1443.0 + 0.016 * (max_depth - 200.0)];
        Self::new(depths, speeds, "synthetic-baseline").expect("fixture profile is valid")
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn max_depth(&self) -> f64 {
        *self.depths.last().unwrap()
    }

    pub fn min_speed(&self) -> f64 {
        self.speeds.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation of sound speed at depth `z`.
    pub fn sample(&self, z: f64) -> Result<f64> {
        if z < self.depths[0] || z > self.max_depth() {
            return Err(Error::OutOfRange(format!(
                "depth {z} m outside [{}, {}] m",
                self.depths[0],
                self.max_depth()
            )));
        }
        let idx = match self.depths.binary_search_by(|d| d.partial_cmp(&z).unwrap()) {
            Ok(i) => return Ok(self.speeds[i]),
            Err(i) => i,
        };
        let (z0, z1) = (self.depths[idx - 1], self.depths[idx]);
        let (c0, c1) = (self.speeds[idx - 1], self.speeds[idx]);
        Ok(c0 + (c1 - c0) * (z - z0) / (z1 - z0))
    }

    /// Sound speed extended below the profile by constant-gradient
    /// extrapolation from the two deepest samples.
    pub fn sample_extended(&self, z: f64) -> f64 {
        if z <= self.max_depth() {
            return self.sample(z.max(0.0)).expect("within support");
        }
        let n = self.depths.len();
        if n == 1 {
            return self.speeds[0];
        }
        let dz = self.depths[n - 1] - self.depths[n - 2];
        let grad = (self.speeds[n - 1] - self.speeds[n - 2]) / dz;
        self.speeds[n - 1] + grad * (z - self.max_depth())
    }
}

/// Resample a profile onto a new depth grid by linear interpolation.
/// Grid points must lie inside the profile's depth support.
pub fn resample_profile(p: &DepthProfile, grid: &[f64]) -> Result<DepthProfile> {
    let speeds = grid.iter().map(|&z| p.sample(z)).collect::<Result<Vec<_>>>()?;
    DepthProfile::new(grid.to_vec(), speeds, p.label.clone())
}

/// The duct parameter pair `(I, W)`.
///
/// `I` is the duct intensity in m/s (peak positive and negative deviation)
/// and `W` the duct width in m (length of the rising limb). `31 + 3W` must
/// stay above 400 m so the whole perturbation fits the varying layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualChannelParams {
    intensity: f64,
    width: f64,
}

impl DualChannelParams {
    pub fn new(intensity: f64, width: f64) -> Result<Self> {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::InvalidParams(format!("intensity {intensity} must be >= 0")));
        }
        if !width.is_finite() || width < 1.0 {
            return Err(Error::InvalidParams(format!("width {width} must be >= 1 m")));
        }
        if DUCT_TOP_M + 3.0 * width > DUCT_BOTTOM_M {
            return Err(Error::InvalidParams(format!(
                "width {width} m too large: 31 + 3W must not exceed {DUCT_BOTTOM_M} m"
            )));
        }
        Ok(Self { intensity, width })
    }

    /// Duct intensity `I` in m/s.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Duct width `W` in m (rising-limb length).
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Full positive-lobe extent `3W` in m, the alternative width convention
    /// some summaries report alongside `W`.
    pub fn full_width(&self) -> f64 {
        3.0 * self.width
    }
}

/// Dual-duct minus reference sound speed on a common 1 m grid, with the
/// summary statistics used by the difference analysis.
#[derive(Debug, Clone)]
pub struct DifferenceCurve {
    pub depths: Vec<f64>,
    pub delta_speeds: Vec<f64>,
    /// Largest positive difference (m/s).
    pub max_positive: f64,
    /// Magnitude of the most negative difference (m/s).
    pub max_negative_abs: f64,
    /// Depth where the main positive lobe hands over to the negative lobe,
    /// if the curve has one.
    pub zero_crossing_depth: Option<f64>,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Perturbation value at integer depth `z` (metres).
fn perturbation_integer(z: f64, i: f64, w: f64) -> f64 {
    if z <= SURFACE_LAYER_M {
        return -1.0;
    }
    let rise_end = DUCT_TOP_M + w;
    let fall_end = DUCT_TOP_M + 3.0 * w;
    if z <= rise_end {
        return (z - DUCT_TOP_M) * i / w;
    }
    if z <= fall_end {
        return i - (z - rise_end) * i / (2.0 * w);
    }
    if z <= DUCT_BOTTOM_M {
        // The span from 31+3W down to 400 m splits 1:2 between the dip to -I
        // and the recovery back to zero.
        let third = (DUCT_BOTTOM_M - fall_end) / 3.0;
        if z <= fall_end + third {
            return -(z - fall_end) * i / third;
        }
        return -(DUCT_BOTTOM_M - z) * i / (2.0 * third);
    }
    0.0
}

/// Duct perturbation (m/s) at depth `z` for parameters `params`.
///
/// Integer depths take the branch value directly (boundary metres belong to
/// the earlier branch); fractional depths interpolate between the flanking
/// integers. Identically -1 down to 30 m and identically zero from 401 m.
pub fn eval_perturbation(z: f64, params: &DualChannelParams) -> f64 {
    assert!(z >= 0.0, "depth must be non-negative");
    let (i, w) = (params.intensity, params.width);
    let z0 = z.floor();
    if z == z0 {
        return perturbation_integer(z0, i, w);
    }
    let lo = perturbation_integer(z0, i, w);
    let hi = perturbation_integer(z0 + 1.0, i, w);
    lo + (hi - lo) * (z - z0)
}

/// Integer-metre depth grid 0..=floor(max).
fn metre_grid(max: f64) -> Vec<f64> {
    (0..=max.floor() as usize).map(|z| z as f64).collect()
}

/// Impose the duct perturbation on a reference profile.
///
/// The reference is resampled to a 1 m grid over its full depth span and the
/// perturbation added; below 400 m the values revert to the reference.
pub fn build_profile(baseline: &DepthProfile, params: &DualChannelParams) -> Result<DepthProfile> {
    if baseline.max_depth() < MIN_COVERAGE_M {
        return Err(Error::Coverage(format!(
            "baseline reaches {} m, needs {} m",
            baseline.max_depth(),
            MIN_COVERAGE_M
        )));
    }
    let grid = metre_grid(baseline.max_depth());
    let speeds = grid
        .iter()
        .map(|&z| Ok(baseline.sample(z)? + eval_perturbation(z, params)))
        .collect::<Result<Vec<_>>>()?;
    DepthProfile::new(
        grid,
        speeds,
        format!("dual-duct I={} W={}", params.intensity, params.width),
    )
}

/// Squared-difference cost of representing `measured` as
/// `baseline + perturbation(I, W)`, summed over the 1 m grid 0..=501 m.
fn fit_cost(c0: &[f64], cm: &[f64], i: f64, w: f64) -> f64 {
    let mut acc = 0.0;
    for (z, (&b, &m)) in c0.iter().zip(cm).enumerate() {
        let d = b + perturbation_integer(z as f64, i, w) - m;
        acc += d * d;
    }
    acc
}

/// Exhaustive-search fit of `(I, W)` to a measured profile.
///
/// Returns the best parameters and the full cost surface. Ties at the
/// minimum prefer the smallest width, then the smallest intensity; the
/// surface's degeneracy flag is raised when more than one grid point attains
/// the minimum within 1e-9 of the surface mean (an intensity of zero makes
/// the width unidentifiable).
pub fn fit_params(
    measured: &DepthProfile,
    baseline: &DepthProfile,
    grid: &ParamGrid,
) -> Result<(DualChannelParams, CostSurface)> {
    for (p, which) in [(measured, "measured"), (baseline, "baseline")] {
        if p.max_depth() < MIN_COVERAGE_M {
            return Err(Error::Coverage(format!(
                "{which} profile reaches {} m, needs {} m",
                p.max_depth(),
                MIN_COVERAGE_M
            )));
        }
    }
    let zgrid = metre_grid(MIN_COVERAGE_M);
    let c0 = zgrid.iter().map(|&z| baseline.sample(z)).collect::<Result<Vec<_>>>()?;
    let cm = zgrid.iter().map(|&z| measured.sample(z)).collect::<Result<Vec<_>>>()?;

    let points: Vec<(f64, f64)> = grid.iter_iw().map(|(_, i, w)| (i, w)).collect();
    let costs = par::map_indexed(points.len(), |flat| {
        let (i, w) = points[flat];
        fit_cost(&c0, &cm, i, w)
    });
    let surface = CostSurface::new_iw(grid.clone(), costs)?;
    let best = grid.params_at(surface.best_flat_iw());
    Ok((best, surface))
}

/// Pointwise difference between a dual-duct profile and the reference on
/// their common 1 m depth grid, with lobe statistics.
pub fn difference_curve(dual: &DepthProfile, baseline: &DepthProfile) -> Result<DifferenceCurve> {
    let common_max = dual.max_depth().min(baseline.max_depth());
    if common_max < DUCT_BOTTOM_M {
        return Err(Error::Coverage(format!(
            "profiles overlap only to {common_max} m, need {DUCT_BOTTOM_M} m"
        )));
    }
    let depths = metre_grid(common_max);
    let delta: Vec<f64> = depths
        .iter()
        .map(|&z| Ok(dual.sample(z)? - baseline.sample(z)?))
        .collect::<Result<Vec<_>>>()?;

    let max_positive = delta.iter().cloned().fold(0.0_f64, f64::max);
    let max_negative_abs = -delta.iter().cloned().fold(0.0_f64, f64::min);

    // Zero crossing: where the main positive lobe hands over to the negative
    // lobe. Found as the first non-positive sample after the positive peak.
    let zero_crossing_depth = if max_positive > 0.0 {
        let peak = delta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, _)| j)
            .unwrap();
        let mut crossing = None;
        for j in peak + 1..delta.len() {
            if delta[j] <= 0.0 {
                crossing = Some(if delta[j] == 0.0 {
                    depths[j]
                } else {
                    // Interpolate between the last positive and first
                    // negative samples.
                    let (d0, d1) = (delta[j - 1], delta[j]);
                    depths[j - 1] + d0 / (d0 - d1)
                });
                break;
            }
        }
        crossing
    } else {
        None
    };

    Ok(DifferenceCurve {
        depths,
        delta_speeds: delta,
        max_positive,
        max_negative_abs,
        zero_crossing_depth,
    })
}
