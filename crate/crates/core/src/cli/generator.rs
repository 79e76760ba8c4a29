//! Seeded random workspaces: star-shaped obstacles in a rectangle.

use std::f64::consts::TAU;

use clap::ValueEnum;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Environment, Point, Polygon};

/// Side of the square slot each obstacle gets in the layout grid.
pub const SLOT: f64 = 10.0;

/// Average vertices per obstacle with the default range.
pub const MEAN_VERTICES: f64 = 26.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Jittered grid, similar sizes.
    RegularSimilar,
    /// Uniform random centers, similar sizes.
    RandomSimilar,
    /// Grid centers, sizes spread log-uniformly.
    RegularVariedSize,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::RegularSimilar, Setting::RandomSimilar, Setting::RegularVariedSize];

    pub fn name(self) -> &'static str {
        match self {
            Setting::RegularSimilar => "regular-similar",
            Setting::RandomSimilar => "random-similar",
            Setting::RegularVariedSize => "regular-varied-size",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub setting: Setting,
    pub obstacle_count: usize,
    pub vertex_range: (usize, usize),
    pub seed: u64,
    /// Workspace size; derived from the obstacle count when `None`.
    pub dims: Option<(f64, f64)>,
}

impl GeneratorConfig {
    pub fn new(setting: Setting, obstacle_count: usize, seed: u64) -> Self {
        GeneratorConfig { setting, obstacle_count, vertex_range: (3, 50), seed, dims: None }
    }

    fn grid(&self) -> (usize, usize, f64, f64) {
        let n = self.obstacle_count.max(1);
        match self.dims {
            Some((w, h)) => {
                let cols = ((n as f64 * w / h).sqrt().ceil() as usize).max(1);
                let rows = n.div_ceil(cols);
                (cols, rows, w, h)
            }
            None => {
                let cols = (n as f64).sqrt().ceil() as usize;
                let rows = n.div_ceil(cols);
                (cols, rows, cols as f64 * SLOT, rows as f64 * SLOT)
            }
        }
    }
}

/// Polygon around `c` with `n` vertices at jittered angles and radii in
/// `[0.6 r, r]`. Angular gaps stay below π so the result is star-shaped.
fn star(rng: &mut ChaCha8Rng, c: Point, r: f64, n: usize) -> Result<Polygon> {
    let phase = rng.random_range(0.0..TAU);
    let pts = (0..n)
        .map(|i| {
            let a = phase + TAU * (i as f64 + rng.random_range(-0.2..0.2)) / n as f64;
            let rr = r * rng.random_range(0.6..=1.0);
            Point::new(c.x + rr * a.cos(), c.y + rr * a.sin())
        })
        .collect();
    Polygon::new(pts)
}

pub fn gen_env(cfg: &GeneratorConfig) -> Result<Environment> {
    let (vlo, vhi) = cfg.vertex_range;
    if vlo < 3 || vhi < vlo {
        return Err(Error::Contract(format!("bad vertex range [{vlo}, {vhi}]")));
    }
    let (cols, rows, w, h) = cfg.grid();
    let outer = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)])?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (sx, sy) = (w / cols as f64, h / rows as f64);
    let slot = sx.min(sy);
    let mut obstacles = Vec::with_capacity(cfg.obstacle_count);
    match cfg.setting {
        Setting::RegularSimilar | Setting::RegularVariedSize => {
            for i in 0..cfg.obstacle_count {
                let (col, row) = (i % cols, i / cols);
                let mut c = Point::new((col as f64 + 0.5) * sx, (row as f64 + 0.5) * sy);
                let r = if cfg.setting == Setting::RegularSimilar {
                    c.x += rng.random_range(-0.15..0.15) * slot;
                    c.y += rng.random_range(-0.15..0.15) * slot;
                    slot * rng.random_range(0.27..0.3)
                } else {
                    slot * rng.random_range((0.06f64).ln()..(0.42f64).ln()).exp()
                };
                let n = rng.random_range(vlo..=vhi);
                obstacles.push(star(&mut rng, c, r, n)?);
            }
        }
        Setting::RandomSimilar => {
            let mut placed: Vec<(Point, f64)> = Vec::new();
            let margin = 0.05 * slot;
            for _ in 0..cfg.obstacle_count {
                let r = slot * rng.random_range(0.27..0.3);
                let mut tries = 0;
                let c = loop {
                    tries += 1;
                    if tries > 2000 {
                        return Err(Error::InvalidEnvironment(format!(
                            "could not place obstacle {} of {}; lower the density",
                            placed.len() + 1,
                            cfg.obstacle_count
                        )));
                    }
                    let c = Point::new(
                        rng.random_range(r + margin..w - r - margin),
                        rng.random_range(r + margin..h - r - margin),
                    );
                    if placed.iter().all(|&(q, rq)| q.dist(c) > r + rq + margin) {
                        break c;
                    }
                };
                placed.push((c, r));
                let n = rng.random_range(vlo..=vhi);
                obstacles.push(star(&mut rng, c, r, n)?);
            }
        }
    }
    Environment::new(outer, obstacles)
}
