#![allow(dead_code)]

use sweepguard::geometry::{Environment, Point, Polygon};

pub fn poly(pts: &[(f64, f64)]) -> Polygon {
    Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    poly(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

/// Single non-convex obstacle in a rectangle.
pub fn single_obstacle_env() -> Environment {
    Environment::new(
        rect(-1.0, -1.0, 2.0, 1.0),
        vec![poly(&[(0.0, 0.0), (0.4, -0.5), (0.6, -0.6), (0.8, -0.5), (1.1, 0.1), (0.6, 0.5), (0.3, 0.5)])],
    )
    .unwrap()
}

/// Non-convex obstacle with a notch and a pocket.
pub fn notched_env() -> Environment {
    Environment::new(
        rect(-1.0, -0.5, 3.0, 2.3),
        vec![poly(&[(-0.2, 0.0), (1.85, 0.1), (1.3, 1.0), (2.0, 1.6), (0.1, 1.6), (0.7, 0.9)])],
    )
    .unwrap()
}

/// Two obstacles in a row: 7 cells in a double diamond.
pub fn two_obstacle_env() -> Environment {
    Environment::new(rect(0.0, 0.0, 20.0, 10.0), vec![rect(4.0, 3.0, 8.0, 7.0), rect(12.0, 3.0, 16.0, 7.0)]).unwrap()
}

/// Corridor version of the two-obstacle world: with c = 1 and ρ₀ = 0.8 the
/// open parts need 3 guards and each corridor 2.
pub fn corridor_env() -> Environment {
    Environment::new(rect(0.0, 0.0, 20.0, 2.5), vec![rect(4.0, 1.0, 8.0, 1.5), rect(12.0, 1.0, 16.0, 1.5)]).unwrap()
}

/// Rough regular polygon approximating a disc.
pub fn ngon(cx: f64, cy: f64, r: f64, n: usize, phase: f64) -> Polygon {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = phase + std::f64::consts::TAU * i as f64 / n as f64;
            (cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    poly(&pts)
}

/// Obstacle around the origin plus two others, for polar sweeps.
pub fn ring_env() -> Environment {
    Environment::new(
        rect(-10.0, -10.0, 10.0, 10.0),
        vec![ngon(0.0, 0.0, 1.5, 7, 0.3), rect(3.0, 2.0, 5.0, 6.0), ngon(-5.0, -4.0, 2.0, 5, 0.1)],
    )
    .unwrap()
}

/// Polar sweeps centered on the outer boundary.
pub fn corner_env() -> Environment {
    Environment::new(rect(0.0, 0.0, 10.0, 8.0), vec![rect(3.0, 2.0, 5.0, 4.0), ngon(7.0, 6.0, 1.0, 6, 0.2)]).unwrap()
}
