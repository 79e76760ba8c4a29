use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{Environment, Point};
use crate::error::{Error, Result};

/// A continuous monotone sweep. Every point maps to an arrival time and a
/// key that orders points along the frontier at that time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepSchedule {
    /// Straight frontier moving along the unit direction at `angle` (radians).
    Vertical { angle: f64 },
    /// Circles of growing radius around `center`. Keys are angles in
    /// `[cut, cut + 2π)`.
    Circular { center: Point, cut: f64 },
    /// A ray rotating counter-clockwise around `center`, starting at `start`.
    Radial { center: Point, start: f64 },
}

/// `θ` shifted into `[base, base + 2π)`.
pub fn normalize_angle(theta: f64, base: f64) -> f64 {
    let v = base + (theta - base).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if v >= base + TAU {
        base
    } else {
        v
    }
}

/// `θ` wrapped into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let v = normalize_angle(theta, -PI);
    if v == -PI {
        PI
    } else {
        v
    }
}

impl SweepSchedule {
    pub fn vertical_degrees(deg: f64) -> Self {
        SweepSchedule::Vertical { angle: deg.to_radians() }
    }

    pub fn circular(center: Point) -> Self {
        SweepSchedule::Circular { center, cut: -PI }
    }

    pub fn radial(center: Point, start: f64) -> Self {
        SweepSchedule::Radial { center, start }
    }

    pub fn center(&self) -> Option<Point> {
        match *self {
            SweepSchedule::Vertical { .. } => None,
            SweepSchedule::Circular { center, .. } | SweepSchedule::Radial { center, .. } => Some(center),
        }
    }

    pub fn is_polar(&self) -> bool {
        !matches!(self, SweepSchedule::Vertical { .. })
    }

    /// Arrival time and frontier key of `p`.
    pub fn frame(&self, p: Point) -> Result<(f64, f64)> {
        match *self {
            SweepSchedule::Vertical { angle } => {
                let (s, c) = angle.sin_cos();
                Ok((p.x * c + p.y * s, -p.x * s + p.y * c))
            }
            SweepSchedule::Circular { center, cut } => {
                let d = p - center;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::UndefinedAngle(p));
                }
                Ok((r, normalize_angle(d.y.atan2(d.x), cut)))
            }
            SweepSchedule::Radial { center, start } => {
                let d = p - center;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::UndefinedAngle(p));
                }
                Ok((normalize_angle(d.y.atan2(d.x), start), r))
            }
        }
    }

    pub fn arrival(&self, p: Point) -> Result<f64> {
        match *self {
            SweepSchedule::Circular { center, .. } => Ok(p.dist(center)),
            _ => self.frame(p).map(|f| f.0),
        }
    }

    pub fn frontier_key(&self, p: Point) -> Result<f64> {
        self.frame(p).map(|f| f.1)
    }

    /// Frontier arc length between two keys at time `t`.
    pub fn frontier_length(&self, t: f64, key_lo: f64, key_hi: f64) -> Result<f64> {
        if key_hi < key_lo {
            return Err(Error::Contract(format!(
                "frontier span is negative: {key_lo} > {key_hi}"
            )));
        }
        Ok(self.length_unchecked(t, key_hi - key_lo))
    }

    pub(crate) fn length_unchecked(&self, t: f64, span: f64) -> f64 {
        match self {
            SweepSchedule::Circular { .. } => t * span,
            _ => span,
        }
    }

    /// Key change corresponding to a frontier distance `len` at time `t`.
    pub(crate) fn key_span(&self, t: f64, len: f64) -> f64 {
        match self {
            SweepSchedule::Circular { .. } if t > 0.0 => len / t,
            SweepSchedule::Circular { .. } => 0.0,
            _ => len,
        }
    }

    /// Inverse of [`frame`](Self::frame).
    pub fn point_at(&self, arrival: f64, key: f64) -> Point {
        match *self {
            SweepSchedule::Vertical { angle } => {
                let (s, c) = angle.sin_cos();
                Point::new(arrival * c - key * s, arrival * s + key * c)
            }
            SweepSchedule::Circular { center, .. } => {
                let (s, c) = key.sin_cos();
                center + Point::new(c, s) * arrival
            }
            SweepSchedule::Radial { center, .. } => {
                let (s, c) = arrival.sin_cos();
                center + Point::new(c, s) * key
            }
        }
    }

    /// Range of arrival times over the free space.
    pub fn time_domain(&self, env: &Environment) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        match *self {
            SweepSchedule::Vertical { .. } => {
                for p in env.outer().vertices() {
                    let a = self.frame(*p)?.0;
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
            }
            SweepSchedule::Circular { center, .. } => {
                hi = env
                    .outer()
                    .vertices()
                    .iter()
                    .map(|p| p.dist(center))
                    .fold(0.0, f64::max);
                lo = if env.contains(center) {
                    0.0
                } else if env.outer().contains(center) {
                    env.obstacles()
                        .iter()
                        .filter(|o| o.contains(center))
                        .map(|o| o.boundary_distance(center))
                        .fold(env.boundary_distance(center), f64::min)
                } else {
                    env.outer().boundary_distance(center)
                };
            }
            SweepSchedule::Radial { center, start } => {
                let mut crosses = false;
                for poly in env.polygons() {
                    for (a, b) in poly.edges() {
                        if a == center || b == center {
                            continue;
                        }
                        let ta = self.frame(a)?.0;
                        let tb = self.frame(b)?.0;
                        let delta = wrap_angle(tb - ta);
                        if ta + delta < start || ta + delta > start + TAU {
                            crosses = true;
                        }
                        lo = lo.min(ta);
                        hi = hi.max(ta);
                    }
                }
                if crosses || env.polygons().any(|p| p.vertices().contains(&center)) {
                    lo = lo.min(start);
                    hi = hi.max(start + TAU);
                }
            }
        }
        Ok((lo, hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Vertical,
    Circular,
    Radial,
}

/// JSON form of a schedule; angles are in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_angle: Option<f64>,
    /// Angle of the ray where circular frontier keys wrap around.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_angle: Option<f64>,
}

impl TryFrom<&ScheduleSpec> for SweepSchedule {
    type Error = Error;

    fn try_from(spec: &ScheduleSpec) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidSchedule(format!("{name} must be finite")))
            }
        };
        let center = || {
            spec.center
                .filter(|c| c.is_finite())
                .ok_or_else(|| Error::InvalidSchedule("a finite center is required".into()))
        };
        Ok(match spec.kind {
            ScheduleKind::Vertical => SweepSchedule::Vertical {
                angle: finite("angle", spec.angle.unwrap_or(0.0))?.to_radians(),
            },
            ScheduleKind::Circular => SweepSchedule::Circular {
                center: center()?,
                cut: finite("cutAngle", spec.cut_angle.unwrap_or(-180.0))?.to_radians(),
            },
            ScheduleKind::Radial => SweepSchedule::Radial {
                center: center()?,
                start: finite("startAngle", spec.start_angle.unwrap_or(0.0))?.to_radians(),
            },
        })
    }
}

impl From<&SweepSchedule> for ScheduleSpec {
    fn from(s: &SweepSchedule) -> Self {
        let mut spec = ScheduleSpec {
            kind: ScheduleKind::Vertical,
            angle: None,
            center: None,
            start_angle: None,
            cut_angle: None,
        };
        match *s {
            SweepSchedule::Vertical { angle } => spec.angle = Some(angle.to_degrees()),
            SweepSchedule::Circular { center, cut } => {
                spec.kind = ScheduleKind::Circular;
                spec.center = Some(center);
                spec.cut_angle = Some(cut.to_degrees());
            }
            SweepSchedule::Radial { center, start } => {
                spec.kind = ScheduleKind::Radial;
                spec.center = Some(center);
                spec.start_angle = Some(start.to_degrees());
            }
        }
        spec
    }
}

impl SweepSchedule {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ScheduleSpec = serde_json::from_str(s)?;
        SweepSchedule::try_from(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ScheduleSpec::from(self)).expect("schedule serializes")
    }
}
