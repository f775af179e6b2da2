//! SVG snapshots of a round: amoebots as hexagons, pins on the bonds,
//! wires inside each amoebot, and pins whose circuit beeped in red.

use std::fmt::Write as _;

use crate::engine::{RoundTrace, Structure};
use crate::grid::GridCoord;

const SIZE: f64 = 20.0;

fn center(c: GridCoord) -> (f64, f64) {
    let x = SIZE * 3f64.sqrt() * (c.q as f64 + c.r as f64 / 2.0);
    let y = -SIZE * 1.5 * c.r as f64;
    (x, y)
}

/// Position of local pin `pin` of amoebot `i`, on the shared bond.
fn pin_position(s: &Structure, i: usize, pin: usize) -> Option<(f64, f64)> {
    let map = s.local_pin_map(i);
    let id = map[pin];
    if id == u32::MAX {
        return None;
    }
    let p = s.physical_pin(id as usize);
    let (a, b) = (center(p.edge.canonical), center(p.edge.other()));
    let (mx, my) = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = (dx * dx + dy * dy).sqrt();
    let (px, py) = (-dy / len, dx / len);
    let k = s.pins_per_edge() as f64;
    let t = (p.slot as f64 - (k - 1.0) / 2.0) * SIZE * 0.9 / k.max(1.0);
    Some((mx + px * t, my + py * t))
}

fn hexagon(c: (f64, f64)) -> String {
    (0..6)
        .map(|j| {
            let a = std::f64::consts::PI / 180.0 * (60.0 * j as f64 + 30.0);
            format!("{:.2},{:.2}", c.0 + SIZE * a.cos(), c.1 + SIZE * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders `round` on `s`. Amoebots missing from the trace are drawn empty.
pub fn render_round(s: &Structure, round: &RoundTrace) -> String {
    let centers: Vec<(f64, f64)> = s.coords().iter().map(|c| center(*c)).collect();
    let min_x = centers.iter().map(|c| c.0).fold(f64::INFINITY, f64::min) - 2.0 * SIZE;
    let max_x = centers.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max) + 2.0 * SIZE;
    let min_y = centers.iter().map(|c| c.1).fold(f64::INFINITY, f64::min) - 2.0 * SIZE;
    let max_y = centers.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max) + 2.0 * SIZE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.1} {:.1} {:.1} {:.1}">"#,
        min_x,
        min_y,
        max_x - min_x,
        max_y - min_y
    );
    let _ = writeln!(out, r#"<title>round {} ({} circuits, {} beeping)</title>"#, round.round, round.circuits, round.beeping_circuits);
    for c in &centers {
        let _ = writeln!(out, r##"<polygon points="{}" fill="#eef2f7" stroke="#9aa5b1" stroke-width="1"/>"##, hexagon(*c));
    }
    let k = s.pins_per_edge();
    for (i, a) in round.amoebots.iter().enumerate().take(s.len()) {
        for &(x, y) in &a.wires {
            if let (Some(p), Some(q)) = (pin_position(s, i, x as usize), pin_position(s, i, y as usize)) {
                let c = centers[i];
                let color = if a.received >> x & 1 == 1 { "#d62728" } else { "#1f4e79" };
                let _ = writeln!(
                    out,
                    r#"<path d="M{:.2},{:.2} Q{:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                    p.0, p.1, c.0, c.1, q.0, q.1
                );
            }
        }
        for pin in 0..6 * k {
            if let Some(p) = pin_position(s, i, pin) {
                let fill = if a.received >> pin & 1 == 1 { "#d62728" } else { "#52606d" };
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{fill}"/>"#, p.0, p.1);
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
