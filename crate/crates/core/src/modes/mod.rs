//! Normal-mode solutions of the depth-separated waveguide and the modal
//! group velocities that set dispersion.
//!
//! The water column is discretized on a uniform vertical grid and the
//! eigenproblem `psi'' + (w^2/c^2 - k^2) psi = 0` solved with a
//! pressure-release surface and a rigid (default) or pressure-release
//! bottom. Only modes inside the trapped wavenumber window are computed:
//! for a refracting profile (sound speed at the bottom above the column
//! minimum) that window is `k in (w/c_bottom, w/c_min)`, which excludes
//! bottom-interacting modes by construction; for non-refracting profiles
//! (isovelocity tanks) it widens to all propagating wavenumbers. Density is
//! constant and attenuation ignored: arrival times, not levels, drive the
//! inversion.

mod eigen;
pub mod curves;
pub mod table;

pub use curves::{
    dispersion_curves, make_relative, Anchor, CurveKind, CurvePoint, DispersionCurve,
    DispersionCurveSet, Provenance,
};
pub use table::{build_gv_table, BuildOutcome, GroupVelocityTable, SolverSettings};

use crate::error::{Error, Result};
use crate::profile::DepthProfile;
use eigen::SymTridiag;
use std::f64::consts::PI;

/// Default water depth in metres.
pub const DEFAULT_TOTAL_DEPTH: f64 = 3800.0;
/// Default vertical grid step in metres.
pub const DEFAULT_DZ: f64 = 1.0;
/// Default number of modes carried through the pipeline.
pub const DEFAULT_MODE_COUNT: usize = 3;
/// Required points per vertical wavelength.
const POINTS_PER_WAVELENGTH: f64 = 20.0;
/// A trapped mode must have decayed to this fraction of its peak by the
/// bottom for the artificial bottom condition to be immaterial.
const TRAPPED_DECAY: f64 = 1e-3;

/// Bottom boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BottomBc {
    /// psi'(D) = 0 (default; harmless once modes decay before the bottom).
    Rigid,
    /// psi(D) = 0.
    PressureRelease,
}

/// A sound speed profile embedded in a finite waveguide with declared
/// boundary conditions and vertical resolution.
#[derive(Debug, Clone)]
pub struct WaveguideSpec {
    profile: DepthProfile,
    total_depth: f64,
    dz: f64,
    bottom_bc: BottomBc,
}

impl WaveguideSpec {
    /// Standard deep-Arctic waveguide; `total_depth` must cover the full
    /// 501 m perturbed layer.
    pub fn new(profile: DepthProfile, total_depth: f64, dz: f64, bottom_bc: BottomBc) -> Result<Self> {
        if total_depth < crate::profile::MIN_COVERAGE_M {
            return Err(Error::InvalidProfile(format!(
                "total depth {total_depth} m must reach {} m",
                crate::profile::MIN_COVERAGE_M
            )));
        }
        Self::unchecked_depth(profile, total_depth, dz, bottom_bc)
    }

    /// Waveguide without the deep-coverage requirement, for shallow test
    /// tanks (e.g. the isovelocity oracle case).
    pub fn unchecked_depth(
        profile: DepthProfile,
        total_depth: f64,
        dz: f64,
        bottom_bc: BottomBc,
    ) -> Result<Self> {
        if total_depth <= 0.0 || dz <= 0.0 {
            return Err(Error::InvalidProfile("depth and dz must be positive".into()));
        }
        let steps = total_depth / dz;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(Error::InvalidProfile(format!(
                "dz {dz} m does not divide total depth {total_depth} m"
            )));
        }
        Ok(Self { profile, total_depth, dz, bottom_bc })
    }

    /// Deep-Arctic defaults: 3800 m column, 1 m grid, rigid bottom.
    pub fn with_defaults(profile: DepthProfile) -> Result<Self> {
        Self::new(profile, DEFAULT_TOTAL_DEPTH, DEFAULT_DZ, BottomBc::Rigid)
    }

    pub fn profile(&self) -> &DepthProfile {
        &self.profile
    }

    pub fn total_depth(&self) -> f64 {
        self.total_depth
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn bottom_bc(&self) -> BottomBc {
        self.bottom_bc
    }

    /// Sound speed sampled on the `dz` grid, extended below the profile by
    /// constant-gradient extrapolation.
    pub fn speeds_on_grid(&self) -> Vec<f64> {
        let n = (self.total_depth / self.dz).round() as usize;
        (0..=n).map(|j| self.profile.sample_extended(j as f64 * self.dz)).collect()
    }

    /// Minimum sound speed over the discretized column.
    pub fn min_speed(&self) -> f64 {
        self.speeds_on_grid().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The same waveguide with `dz` halved until `f` is resolved by at
    /// least 20 points per vertical wavelength.
    pub fn refined_for(&self, f: f64) -> Self {
        let c_min = self.min_speed();
        let mut dz = self.dz;
        while dz > c_min / (POINTS_PER_WAVELENGTH * f) {
            dz *= 0.5;
        }
        Self { dz, ..self.clone() }
    }
}

/// One trapped mode at a single frequency.
#[derive(Debug, Clone)]
pub struct Mode {
    /// Horizontal wavenumber (rad/m).
    pub wavenumber: f64,
    /// Eigenfunction sampled on the `dz` grid from the surface to the
    /// bottom, normalized to unit L2 (trapezoid).
    pub eigenfunction: Vec<f64>,
    /// Group velocity (m/s) from the integral formula.
    pub group_velocity: f64,
    /// Deepest depth where the mode still oscillates (m).
    pub turning_depth: f64,
}

/// Modal solutions at one frequency, sorted by descending wavenumber
/// (mode 1 first).
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub frequency: f64,
    pub modes: Vec<Mode>,
    /// Candidates discarded because their eigenfunction had not decayed by
    /// the bottom.
    pub discarded: usize,
    /// Grid step the eigenfunctions are sampled on (m).
    pub dz: f64,
}

/// Assemble the interior finite-difference matrix. Returns the matrix and
/// the sound speed on the full grid.
fn assemble(spec: &WaveguideSpec, omega: f64) -> (SymTridiag, Vec<f64>) {
    let c = spec.speeds_on_grid();
    let n = c.len() - 1; // grid 0..=n
    let dz2 = spec.dz * spec.dz;
    let m = match spec.bottom_bc {
        BottomBc::Rigid => n,
        BottomBc::PressureRelease => n - 1,
    };
    let mut diag = Vec::with_capacity(m);
    let mut off = vec![1.0 / dz2; m - 1];
    for j in 1..=m {
        diag.push(-2.0 / dz2 + omega * omega / (c[j] * c[j]));
    }
    if spec.bottom_bc == BottomBc::Rigid {
        // Ghost-point Neumann row symmetrized by scaling the last unknown
        // by sqrt(2); eigenvalues are untouched and eigenvectors transform
        // back below.
        off[m - 2] = std::f64::consts::SQRT_2 / dz2;
    }
    (SymTridiag { diag, off }, c)
}

/// Rebuild the physical eigenfunction on the full grid from the interior
/// eigenvector.
fn to_full_grid(phi: &[f64], bottom: BottomBc) -> Vec<f64> {
    let mut psi = Vec::with_capacity(phi.len() + 2);
    psi.push(0.0);
    psi.extend_from_slice(phi);
    match bottom {
        BottomBc::Rigid => {
            let last = psi.len() - 1;
            psi[last] *= std::f64::consts::SQRT_2;
        }
        BottomBc::PressureRelease => psi.push(0.0),
    }
    psi
}

fn trapezoid(values: impl Iterator<Item = f64>, dz: f64) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    let mut s = 0.5 * (v[0] + v[n - 1]);
    for x in &v[1..n - 1] {
        s += x;
    }
    s * dz
}

/// Solve for up to `max_modes` trapped modes at frequency `f`.
///
/// Returns an empty set (with diagnostics) when nothing is trapped, and a
/// resolution error when `dz` undersamples the vertical wavelength.
pub fn solve_modes(spec: &WaveguideSpec, f: f64, max_modes: usize) -> Result<ModeSet> {
    if !(1.0..=500.0).contains(&f) {
        return Err(Error::OutOfRange(format!("frequency {f} Hz outside [1, 500] Hz")));
    }
    let omega = 2.0 * PI * f;
    let (t, c) = assemble(spec, omega);
    let c_min = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_bot = *c.last().unwrap();
    let dz_max = c_min / (POINTS_PER_WAVELENGTH * f);
    if spec.dz > dz_max {
        return Err(Error::Resolution(format!(
            "dz {} m too coarse for {f} Hz, need <= {dz_max:.4} m",
            spec.dz
        )));
    }

    let refracted = c_bot - c_min > 1e-9;
    let hi = (omega / c_min).powi(2);
    let lo = if refracted { (omega / c_bot).powi(2) } else { 0.0 };

    let raw = t.eigenvalues_in(lo, hi, max_modes + 8);
    let mut modes = Vec::new();
    let mut discarded = 0usize;
    for lambda in raw {
        if modes.len() == max_modes {
            break;
        }
        let (lam, phi) = t.eigenvector(lambda);
        let mut psi = to_full_grid(&phi, spec.bottom_bc);
        // Deterministic sign: peak positive.
        let peak = psi
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap();
        if peak < 0.0 {
            for v in &mut psi {
                *v = -*v;
            }
        }
        if refracted {
            let decay = psi.last().unwrap().abs() / peak.abs();
            if decay >= TRAPPED_DECAY {
                discarded += 1;
                continue;
            }
        }
        let norm = trapezoid(psi.iter().map(|v| v * v), spec.dz).sqrt();
        for v in &mut psi {
            *v /= norm;
        }
        let k = lam.sqrt();
        let inv_c2 = trapezoid(psi.iter().zip(&c).map(|(v, cc)| v * v / (cc * cc)), spec.dz);
        let group_velocity = (k / omega) / inv_c2;
        let vp = omega / k;
        let turning_depth = c
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &cc)| cc <= vp)
            .map(|(j, _)| j as f64 * spec.dz)
            .unwrap_or(0.0);
        modes.push(Mode { wavenumber: k, eigenfunction: psi, group_velocity, turning_depth });
    }
    Ok(ModeSet { frequency: f, modes, discarded, dz: spec.dz })
}

/// Group velocity of every mode in `ms` by the integral formula
/// `v_g = (k/w) * Int(psi^2) / Int(psi^2 / c^2)`.
pub fn group_velocity(ms: &ModeSet, spec: &WaveguideSpec) -> Vec<f64> {
    let grid = WaveguideSpec { dz: ms.dz, ..spec.clone() };
    let c = grid.speeds_on_grid();
    let omega = 2.0 * PI * ms.frequency;
    ms.modes
        .iter()
        .map(|m| {
            let num = trapezoid(m.eigenfunction.iter().map(|v| v * v), ms.dz);
            let den =
                trapezoid(m.eigenfunction.iter().zip(&c).map(|(v, cc)| v * v / (cc * cc)), ms.dz);
            (m.wavenumber / omega) * num / den
        })
        .collect()
}

/// L2 residual ratio of the finite-difference mode equation on the interior
/// grid for mode `idx`; a solver health check.
pub fn eigen_residual(ms: &ModeSet, spec: &WaveguideSpec, idx: usize) -> f64 {
    let grid = WaveguideSpec { dz: ms.dz, ..spec.clone() };
    let c = grid.speeds_on_grid();
    let omega = 2.0 * PI * ms.frequency;
    let m = &ms.modes[idx];
    let k2 = m.wavenumber * m.wavenumber;
    let dz2 = ms.dz * ms.dz;
    let psi = &m.eigenfunction;
    let mut res = 0.0;
    let mut norm = 0.0;
    for j in 1..psi.len() - 1 {
        let lap = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / dz2;
        let r = lap + (omega * omega / (c[j] * c[j]) - k2) * psi[j];
        res += r * r;
        norm += psi[j] * psi[j];
    }
    (res / norm).sqrt()
}

/// Orthogonality defect `Int(psi_a psi_b dz)` between two modes of one set.
pub fn mode_overlap(ms: &ModeSet, a: usize, b: usize) -> f64 {
    trapezoid(
        ms.modes[a].eigenfunction.iter().zip(&ms.modes[b].eigenfunction).map(|(x, y)| x * y),
        ms.dz,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn isovelocity_tank(depth: f64, dz: f64, c: f64) -> WaveguideSpec {
        let p = DepthProfile::new(vec![0.0, depth], vec![c, c], "tank").unwrap();
        WaveguideSpec::unchecked_depth(p, depth, dz, BottomBc::Rigid).unwrap()
    }

    #[test]
    fn isovelocity_wavenumbers_match_analytic() {
        let spec = isovelocity_tank(100.0, 0.1, 1500.0);
        let f = 50.0;
        let ms = solve_modes(&spec, f, 16).unwrap();
        let omega = 2.0 * PI * f;
        let analytic: Vec<f64> = (1..)
            .map(|m| {
                let kz = (m as f64 - 0.5) * PI / 100.0;
                (omega / 1500.0).powi(2) - kz * kz
            })
            .take_while(|&l| l > 0.0)
            .map(f64::sqrt)
            .collect();
        assert_eq!(ms.modes.len(), analytic.len());
        for (mode, ka) in ms.modes.iter().zip(&analytic) {
            let rel = (mode.wavenumber - ka).abs() / ka;
            assert!(rel < 1e-3, "k {} vs analytic {ka}, rel {rel}", mode.wavenumber);
        }
    }

    #[test]
    fn isovelocity_group_velocity_matches_analytic() {
        let spec = isovelocity_tank(100.0, 0.1, 1500.0);
        let f = 50.0;
        let omega = 2.0 * PI * f;
        let ms = solve_modes(&spec, f, 4).unwrap();
        for mode in &ms.modes {
            let analytic = 1500.0 * 1500.0 * mode.wavenumber / omega;
            let rel = (mode.group_velocity - analytic).abs() / analytic;
            assert!(rel < 1e-3, "vg {} vs {analytic}", mode.group_velocity);
        }
    }

    #[test]
    fn below_cutoff_yields_empty_set() {
        let spec = isovelocity_tank(100.0, 0.5, 1500.0);
        // First cutoff for D=100 m, c=1500: f1 = c/(4D) = 3.75 Hz.
        let ms = solve_modes(&spec, 2.0, 4).unwrap();
        assert!(ms.modes.is_empty());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = isovelocity_tank(100.0, 1.0, 1500.0);
        // 1 m grid resolves only up to 75 Hz at 1500 m/s.
        assert!(matches!(solve_modes(&spec, 100.0, 4), Err(Error::Resolution(_))));
    }

    #[test]
    fn frequency_bounds_enforced() {
        let spec = isovelocity_tank(100.0, 0.5, 1500.0);
        assert!(solve_modes(&spec, 0.5, 4).is_err());
        assert!(solve_modes(&spec, 600.0, 4).is_err());
    }

    #[test]
    fn eigenfunctions_are_normalized_and_orthogonal() {
        let spec = isovelocity_tank(200.0, 0.25, 1480.0);
        let ms = solve_modes(&spec, 40.0, 3).unwrap();
        assert!(ms.modes.len() >= 2);
        for m in 0..ms.modes.len() {
            let self_overlap = mode_overlap(&ms, m, m);
            assert!((self_overlap - 1.0).abs() < 1e-6);
            for n in 0..m {
                assert!(mode_overlap(&ms, m, n).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn wavenumbers_sorted_descending() {
        let spec = isovelocity_tank(100.0, 0.25, 1500.0);
        let ms = solve_modes(&spec, 60.0, 8).unwrap();
        for pair in ms.modes.windows(2) {
            assert!(pair[0].wavenumber > pair[1].wavenumber);
        }
    }

    #[test]
    fn refined_spec_resolves_high_frequency() {
        let p = DepthProfile::synthetic_baseline(3800.0);
        let spec = WaveguideSpec::with_defaults(p).unwrap();
        let fine = spec.refined_for(100.0);
        assert!(fine.dz() <= fine.min_speed() / (POINTS_PER_WAVELENGTH * 100.0));
        assert!(solve_modes(&fine, 100.0, 3).is_ok());
    }

    #[test]
    fn rejects_nondividing_dz() {
        let p = DepthProfile::synthetic_baseline(3800.0);
        assert!(WaveguideSpec::new(p, 3800.0, 0.7, BottomBc::Rigid).is_err());
    }
}
