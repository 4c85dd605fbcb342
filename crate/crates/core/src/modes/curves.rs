//! Per-mode dispersion curves: arrival time versus frequency, absolute or
//! relative to a reference point.

use crate::error::{Error, Result};

/// How a curve point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Forward model (table or direct solve).
    Model,
    /// Warping-based extraction on the non-crossing segment.
    Warped,
    /// Per-frequency energy-peak extraction on the crossing segment.
    Peak,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Model => "model",
            Provenance::Warped => "warped",
            Provenance::Peak => "peak",
        }
    }
}

/// Reference point `(mode, frequency)` that a relative curve set is pinned
/// to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub mode: usize,
    pub freq_hz: f64,
}

/// Whether times are absolute arrivals over a known range or relative to an
/// anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    Absolute { range_m: f64 },
    Relative { anchor: Anchor },
}

/// One sample of a dispersion curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub freq_hz: f64,
    pub time_s: f64,
    /// Extraction quality in [0, 1]; 1 for modeled points.
    pub quality: f64,
    pub provenance: Provenance,
}

/// Arrival-time curve of a single mode; frequencies strictly increasing.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    /// 1-based mode number.
    pub mode: usize,
    pub points: Vec<CurvePoint>,
}

impl DispersionCurve {
    /// Linear interpolation of the curve at `f`, if inside the support.
    pub fn time_at(&self, f: f64) -> Option<f64> {
        let pts = &self.points;
        if pts.is_empty() || f < pts[0].freq_hz || f > pts[pts.len() - 1].freq_hz {
            return None;
        }
        let idx = pts.partition_point(|p| p.freq_hz < f);
        if idx < pts.len() && pts[idx].freq_hz == f {
            return Some(pts[idx].time_s);
        }
        let (a, b) = (&pts[idx - 1], &pts[idx]);
        Some(a.time_s + (b.time_s - a.time_s) * (f - a.freq_hz) / (b.freq_hz - a.freq_hz))
    }

    fn sort_points(&mut self) {
        self.points.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).unwrap());
    }
}

/// A set of per-mode dispersion curves sharing one time convention.
#[derive(Debug, Clone)]
pub struct DispersionCurveSet {
    pub kind: CurveKind,
    pub curves: Vec<DispersionCurve>,
}

impl DispersionCurveSet {
    pub fn curve(&self, mode: usize) -> Option<&DispersionCurve> {
        self.curves.iter().find(|c| c.mode == mode)
    }

    pub fn anchor(&self) -> Option<Anchor> {
        match self.kind {
            CurveKind::Relative { anchor } => Some(anchor),
            CurveKind::Absolute { .. } => None,
        }
    }

    /// Total number of points across all modes.
    pub fn len_points(&self) -> usize {
        self.curves.iter().map(|c| c.points.len()).sum()
    }
}

/// Absolute dispersion curves `t_m(f) = r / v_g_m(f)` from per-mode group
/// velocities. Input: `(mode, [(freq_hz, vg_mps)])` per mode.
pub fn dispersion_curves(vg: &[(usize, Vec<(f64, f64)>)], range_m: f64) -> DispersionCurveSet {
    assert!(range_m > 0.0, "range must be positive");
    let curves = vg
        .iter()
        .map(|(mode, pts)| {
            let mut c = DispersionCurve {
                mode: *mode,
                points: pts
                    .iter()
                    .map(|&(f, v)| CurvePoint {
                        freq_hz: f,
                        time_s: range_m / v,
                        quality: 1.0,
                        provenance: Provenance::Model,
                    })
                    .collect(),
            };
            c.sort_points();
            c
        })
        .collect();
    DispersionCurveSet { kind: CurveKind::Absolute { range_m }, curves }
}

/// Shift all times so the anchor point sits at zero.
///
/// The anchor frequency is interpolated within the anchor mode's support;
/// anchoring an already relative set re-anchors it (idempotent for the same
/// anchor).
pub fn make_relative(d: &DispersionCurveSet, anchor: Anchor) -> Result<DispersionCurveSet> {
    let curve = d
        .curve(anchor.mode)
        .ok_or_else(|| Error::Anchor(format!("mode {} absent from curve set", anchor.mode)))?;
    let t0 = curve.time_at(anchor.freq_hz).ok_or_else(|| {
        Error::Anchor(format!(
            "mode {} has no support at {} Hz",
            anchor.mode, anchor.freq_hz
        ))
    })?;
    let curves = d
        .curves
        .iter()
        .map(|c| DispersionCurve {
            mode: c.mode,
            points: c
                .points
                .iter()
                .map(|p| CurvePoint { time_s: p.time_s - t0, ..*p })
                .collect(),
        })
        .collect();
    Ok(DispersionCurveSet { kind: CurveKind::Relative { anchor }, curves })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode_set() -> DispersionCurveSet {
        let vg = vec![
            (1usize, vec![(10.0, 1450.0), (20.0, 1445.0), (30.0, 1440.0)]),
            (2usize, vec![(10.0, 1455.0), (20.0, 1452.0), (30.0, 1449.0)]),
        ];
        dispersion_curves(&vg, 200_000.0)
    }

    #[test]
    fn arrival_time_is_range_over_group_velocity() {
        let vg = vec![(1usize, vec![(50.0, 1450.0)])];
        let set = dispersion_curves(&vg, 200_000.0);
        let t = set.curves[0].points[0].time_s;
        assert!((t - 137.931034).abs() < 1e-5);
    }

    #[test]
    fn relative_anchor_time_is_zero() {
        let set = two_mode_set();
        let rel = make_relative(&set, Anchor { mode: 1, freq_hz: 20.0 }).unwrap();
        assert_eq!(rel.curve(1).unwrap().time_at(20.0).unwrap(), 0.0);
    }

    #[test]
    fn make_relative_is_idempotent() {
        let set = two_mode_set();
        let anchor = Anchor { mode: 1, freq_hz: 20.0 };
        let r1 = make_relative(&set, anchor).unwrap();
        let r2 = make_relative(&r1, anchor).unwrap();
        for (a, b) in r1.curves.iter().zip(&r2.curves) {
            for (p, q) in a.points.iter().zip(&b.points) {
                assert_eq!(p.time_s, q.time_s);
            }
        }
    }

    #[test]
    fn relative_curves_cancel_clock_offsets() {
        let set = two_mode_set();
        let mut shifted = set.clone();
        for c in &mut shifted.curves {
            for p in &mut c.points {
                p.time_s += 17.25;
            }
        }
        let anchor = Anchor { mode: 2, freq_hz: 28.0 };
        let r1 = make_relative(&set, anchor).unwrap();
        let r2 = make_relative(&shifted, anchor).unwrap();
        for (a, b) in r1.curves.iter().zip(&r2.curves) {
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!((p.time_s - q.time_s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn anchor_interpolates_between_samples() {
        let set = two_mode_set();
        let rel = make_relative(&set, Anchor { mode: 1, freq_hz: 15.0 }).unwrap();
        // t(15) interpolated between t(10) and t(20); after shifting it is 0.
        let c = rel.curve(1).unwrap();
        assert!((c.time_at(15.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn missing_anchor_mode_errors() {
        let set = two_mode_set();
        assert!(make_relative(&set, Anchor { mode: 9, freq_hz: 20.0 }).is_err());
    }

    #[test]
    fn anchor_outside_support_errors() {
        let set = two_mode_set();
        assert!(make_relative(&set, Anchor { mode: 1, freq_hz: 99.0 }).is_err());
    }
}
