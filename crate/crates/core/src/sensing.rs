//! One-dimensional probabilistic line-guard sensing.
//!
//! A guard at distance `r` along the frontier detects a target with
//! probability `ρ(r)`. Interior points are watched by their two neighbouring
//! guards, end points by the nearest guard only.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BISECT_TOL: f64 = 1e-10;
const BISECT_MAX_ITERS: usize = 200;

/// Largest guard count reported before giving up as infeasible.
pub const MAX_GUARDS: u64 = 1 << 40;

#[derive(Clone)]
pub enum SensingModel {
    /// `ρ(r) = e^(−c·r)`.
    Exponential { c: f64 },
    /// Any non-increasing `ρ` with `ρ(0) ≤ 1`.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SensingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensingModel::Exponential { c } => f.debug_struct("Exponential").field("c", c).finish(),
            SensingModel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// JSON descriptor of a model. Only the exponential family serializes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Exponential { c: f64 },
}

impl SensingModel {
    pub fn exponential(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Contract(format!("decay rate must be positive, got {c}")));
        }
        Ok(SensingModel::Exponential { c })
    }

    pub fn custom(rho: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let r0 = rho(0.0);
        if !(0.0..=1.0).contains(&r0) {
            return Err(Error::Contract(format!("ρ(0) must lie in [0, 1], got {r0}")));
        }
        Ok(SensingModel::Custom(Arc::new(rho)))
    }

    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Exponential { c } => SensingModel::exponential(c),
        }
    }

    pub fn spec(&self) -> Option<ModelSpec> {
        match *self {
            SensingModel::Exponential { c } => Some(ModelSpec::Exponential { c }),
            SensingModel::Custom(_) => None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        SensingModel::from_spec(serde_json::from_str(s)?)
    }

    pub fn rho(&self, r: f64) -> f64 {
        match self {
            SensingModel::Exponential { c } => (-c * r).exp(),
            SensingModel::Custom(f) => f(r),
        }
    }

    pub fn detect_single(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Contract(format!("negative distance {r}")));
        }
        Ok(self.rho(r))
    }

    pub fn detect_pair(&self, r1: f64, r2: f64) -> Result<f64> {
        let (p, q) = (self.detect_single(r1)?, self.detect_single(r2)?);
        Ok(p + q - p * q)
    }

    fn check_requirement(&self, rho0: f64) -> Result<()> {
        if !(rho0 > 0.0 && rho0 <= 1.0) {
            return Err(Error::Contract(format!("rho0 must lie in (0, 1], got {rho0}")));
        }
        if self.rho(0.0) < rho0 {
            return Err(Error::Infeasible(format!(
                "ρ(0) = {} is below the requirement {rho0}",
                self.rho(0.0)
            )));
        }
        Ok(())
    }

    /// Largest distance `d₁` with `ρ(d₁) ≥ ρ₀`.
    pub fn end_reach(&self, rho0: f64) -> Result<f64> {
        self.check_requirement(rho0)?;
        match self {
            SensingModel::Exponential { c } => Ok(-rho0.ln() / c),
            SensingModel::Custom(_) => Ok(largest_satisfying(0.0, |d| self.rho(d) >= rho0)),
        }
    }

    /// Largest gap `d₂` between neighbouring guards whose worst interior
    /// point is still covered with probability `ρ₀`.
    pub fn pair_spacing(&self, rho0: f64) -> Result<f64> {
        self.check_requirement(rho0)?;
        match self {
            SensingModel::Exponential { c } => Ok(-2.0 * (1.0 - (1.0 - rho0).sqrt()).ln() / c),
            SensingModel::Custom(_) => {
                let d1 = self.end_reach(rho0)?;
                if d1.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                Ok(largest_satisfying(2.0 * d1, |g| self.worst_in_gap(g) >= rho0))
            }
        }
    }

    /// Minimum pairwise coverage over a gap of width `g`.
    fn worst_in_gap(&self, g: f64) -> f64 {
        let f = |x: f64| {
            let (p, q) = (self.rho(x), self.rho(g - x));
            p + q - p * q
        };
        const GRID: usize = 64;
        let (mut best_i, mut best) = (0, f(0.0));
        for i in 1..=GRID {
            let v = f(g * i as f64 / GRID as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let lo = g * best_i.saturating_sub(1) as f64 / GRID as f64;
        let hi = g * (best_i + 1).min(GRID) as f64 / GRID as f64;
        best.min(golden_min(f, lo, hi))
    }

    /// Precomputes `d₁` and `d₂` for a requirement.
    pub fn requirement(&self, rho0: f64) -> Result<Sensing> {
        let d1 = self.end_reach(rho0)?;
        let d2 = self.pair_spacing(rho0)?;
        Ok(Sensing { model: self.clone(), rho0, d1, d2 })
    }
}

/// Largest `x ≥ lo` with `ok(x)`, assuming `ok` holds on `[lo, x*]` only.
fn largest_satisfying(lo: f64, ok: impl Fn(f64) -> bool) -> f64 {
    let mut lo = lo;
    let mut hi = lo.max(1.0);
    let mut grow = 0;
    while ok(hi) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 1100 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..BISECT_MAX_ITERS {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..BISECT_MAX_ITERS {
        if b - a <= BISECT_TOL {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// A model bound to a requirement `ρ₀` with its derived reach `d₁` and
/// spacing `d₂`.
#[derive(Clone, Debug)]
pub struct Sensing {
    model: SensingModel,
    rho0: f64,
    d1: f64,
    d2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentPlacement {
    pub length: f64,
    pub offsets: Vec<f64>,
}

impl SegmentPlacement {
    pub fn count(&self) -> usize {
        self.offsets.len()
    }
}

impl Sensing {
    pub fn model(&self) -> &SensingModel {
        &self.model
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Minimum number of guards covering a segment of length `len`.
    pub fn zeta(&self, len: f64) -> Result<u64> {
        if len < 0.0 || len.is_nan() {
            return Err(Error::Contract(format!("negative segment length {len}")));
        }
        if len <= 2.0 * self.d1 {
            return Ok(1);
        }
        if self.d2 <= 0.0 {
            return Err(Error::Infeasible(format!(
                "ρ₀ = {} admits no spacing; a segment of length {len} cannot be covered",
                self.rho0
            )));
        }
        let n = 1.0 + ((len - 2.0 * self.d1) / self.d2).ceil();
        if n > MAX_GUARDS as f64 {
            return Err(Error::Infeasible(format!("segment of length {len} needs more than {MAX_GUARDS} guards")));
        }
        Ok(n as u64)
    }

    pub fn place_guards(&self, len: f64) -> Result<SegmentPlacement> {
        let n = self.zeta(len)?;
        Ok(self.place_n(len, n as usize))
    }

    /// Spreads `n ≥ ζ(len)` guards symmetrically: end margins and gaps are
    /// `d₁` and `d₂` scaled by the same factor, so both stay within their
    /// caps.
    pub fn place_n(&self, len: f64, n: usize) -> SegmentPlacement {
        let mut offsets = Vec::with_capacity(n);
        self.fill_offsets(len, n, &mut offsets);
        SegmentPlacement { length: len, offsets }
    }

    pub(crate) fn fill_offsets(&self, len: f64, n: usize, out: &mut Vec<f64>) {
        out.clear();
        if n == 0 {
            return;
        }
        let span = 2.0 * self.d1 + (n - 1) as f64 * self.d2;
        if len <= 0.0 || !span.is_finite() || span <= 0.0 {
            let step = len.max(0.0) / n as f64;
            out.extend((0..n).map(|i| step * (i as f64 + 0.5)));
            return;
        }
        let s = len / span;
        let (m, g) = (s * self.d1, s * self.d2);
        out.extend((0..n).map(|i| (m + g * i as f64).min(len)));
    }

    /// Detection probability at `x` on a segment watched by guards at the
    /// sorted `offsets`.
    pub fn coverage(&self, offsets: &[f64], x: f64) -> f64 {
        let Some((&first, &last)) = offsets.first().zip(offsets.last()) else {
            return 0.0;
        };
        if x <= first {
            return self.model.rho(first - x);
        }
        if x >= last {
            return self.model.rho(x - last);
        }
        let j = offsets.partition_point(|&o| o <= x);
        let (p, q) = (self.model.rho(x - offsets[j - 1]), self.model.rho(offsets[j] - x));
        p + q - p * q
    }
}
