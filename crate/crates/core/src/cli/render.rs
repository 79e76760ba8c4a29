//! SVG output in workspace units, y axis pointing up.

use std::fmt::Write;

use crate::allocation::AllocationPlan;
use crate::decomposition::CellDag;
use crate::geometry::{Environment, Point};

const ARC_STEPS: usize = 24;

/// Boundary of a cell: along the lower chain forward, back along the upper.
pub fn cell_outline(dag: &CellDag, cell: usize) -> Vec<Point> {
    let sched = dag.schedule();
    let bps = dag.breakpoints(cell);
    let mut ts = vec![bps[0]];
    for w in bps.windows(2) {
        if sched.is_polar() {
            ts.extend((1..ARC_STEPS).map(|s| w[0] + (w[1] - w[0]) * s as f64 / ARC_STEPS as f64));
        }
        ts.push(w[1]);
    }
    let keys: Vec<(f64, f64, f64)> = ts
        .iter()
        .map(|&t| {
            let (lo, hi) = dag.keys_at(cell, t);
            (t, lo, hi)
        })
        .collect();
    let mut pts: Vec<Point> = keys.iter().map(|&(t, lo, _)| sched.point_at(t, lo)).collect();
    let (t_end, lo_end, hi_end) = *keys.last().expect("cells have a birth and death");
    if sched.is_polar() && hi_end > lo_end {
        pts.extend((1..ARC_STEPS).map(|s| sched.point_at(t_end, lo_end + (hi_end - lo_end) * s as f64 / ARC_STEPS as f64)));
    }
    pts.extend(keys.iter().rev().map(|&(t, _, hi)| sched.point_at(t, hi)));
    let (t0, lo0, hi0) = keys[0];
    if sched.is_polar() && hi0 > lo0 {
        pts.extend((1..ARC_STEPS).rev().map(|s| sched.point_at(t0, lo0 + (hi0 - lo0) * s as f64 / ARC_STEPS as f64)));
    }
    pts
}

fn points_attr(pts: &[Point]) -> String {
    let mut s = String::new();
    for p in pts {
        let _ = write!(s, "{:.6},{:.6} ", p.x, p.y);
    }
    s.trim_end().to_string()
}

pub fn render_svg(env: &Environment, dag: Option<&CellDag>, plan: Option<&AllocationPlan>, samples: usize) -> String {
    let bb = env.bbox();
    let (w, h) = (bb.max.x - bb.min.x, bb.max.y - bb.min.y);
    let pad = 0.02 * w.max(h);
    let stroke = 0.002 * w.max(h);
    let px = 800.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{} {} {} {}">"#,
        px,
        px * (h + 2.0 * pad) / (w + 2.0 * pad),
        bb.min.x - pad,
        -bb.max.y - pad,
        w + 2.0 * pad,
        h + 2.0 * pad
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" stroke-width="{stroke}" stroke-linejoin="round">"#);
    let _ = writeln!(s, r#"<polygon points="{}" fill="white" stroke="black"/>"#, points_attr(env.outer().vertices()));
    if let Some(dag) = dag {
        let n = dag.cells().len().max(1);
        for c in 0..dag.cells().len() {
            let hue = (c * 360 / n + c * 137) % 360;
            let _ = writeln!(
                s,
                r#"<polygon class="cell" data-cell="{c}" points="{}" fill="hsl({hue},70%,70%)" fill-opacity="0.5" stroke="gray"/>"#,
                points_attr(&cell_outline(dag, c))
            );
        }
    }
    for o in env.obstacles() {
        let _ = writeln!(s, r#"<polygon points="{}" fill="dimgray" stroke="black"/>"#, points_attr(o.vertices()));
    }
    if let Some(plan) = plan {
        let ts = plan.sample_times(samples);
        for r in 0..plan.robot_count() {
            // break the line wherever the robot is idle
            let mut run: Vec<Point> = Vec::new();
            let flush = |run: &mut Vec<Point>, s: &mut String| {
                if run.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline class="robot" data-robot="{r}" points="{}" fill="none" stroke="crimson"/>"#,
                        points_attr(run)
                    );
                }
                run.clear();
            };
            for &t in &ts {
                match plan.position(r, t) {
                    Some(p) => run.push(p),
                    None => flush(&mut run, &mut s),
                }
            }
            flush(&mut run, &mut s);
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
