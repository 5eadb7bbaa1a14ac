//! Vector output of a mission: a heatmap of per-target values with the
//! routes drawn on top, as SVG, and the same content as GeoJSON in local
//! metric coordinates.

use std::fmt::Write;

use gcortop::instance::Node;
use gcortop::{Instance, Solution};
use serde_json::{json, Value};

const WIDTH: f64 = 800.0;

/// Viridis control points.
const RAMP: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

const ROUTE_COLORS: [&str; 6] = ["#e6194b", "#f58231", "#ffffff", "#f032e6", "#46f0f0", "#bcf60c"];

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = RAMP.iter().position(|p| p.0 >= t).unwrap_or(RAMP.len() - 1).max(1);
    let ((t0, c0), (t1, c1)) = (RAMP[k - 1], RAMP[k]);
    let f = (t - t0) / (t1 - t0);
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]))
}

/// Depot-to-depot coordinates of every route that samples something.
fn route_paths<'a>(inst: &Instance, sol: &'a Solution) -> Vec<(&'a gcortop::Route, Vec<(f64, f64)>)> {
    sol.routes
        .iter()
        .filter(|r| !r.stops.is_empty())
        .map(|r| {
            let pts = inst.route_nodes(r).into_iter().map(|n: Node| inst.location(n)).map(|l| (l.x, l.y)).collect();
            (r, pts)
        })
        .collect()
}

/// SVG heatmap of `values` (one per target) with the solution's routes.
pub fn render_svg(inst: &Instance, sol: Option<&Solution>, values: &[f64], title: &str) -> String {
    let cell = inst.typical_spacing().max(1e-9);
    let pts = inst.targets.iter().chain(&inst.depots);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let (x0, y0, x1, y1) = (x0 - cell, y0 - cell, x1 + cell, y1 + cell);
    let s = WIDTH / (x1 - x0);
    let height = ((y1 - y0) * s).ceil();
    let header = 24.0;
    // Flip y so north is up.
    let px = |x: f64| (x - x0) * s;
    let py = |y: f64| header + (y1 - y) * s;

    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
        w = WIDTH,
        h = height + header
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{WIDTH:.0}" height="{:.0}" fill="#202020"/>"##, height + header);
    let _ = writeln!(
        out,
        r##"<text x="6" y="17" font-family="sans-serif" font-size="14" fill="#ffffff">{} — {} [{lo:.1}, {hi:.1}]</text>"##,
        escape(&inst.name),
        escape(title)
    );
    let _ = writeln!(out, r#"<g id="heatmap">"#);
    let side = cell * s;
    for (t, &v) in inst.targets.iter().zip(values) {
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="{}"/>"#,
            px(t.x) - side / 2.0,
            py(t.y) - side / 2.0,
            ramp(norm(v))
        );
    }
    let _ = writeln!(out, "</g>");
    if let Some(sol) = sol {
        let _ = writeln!(out, r#"<g id="routes" fill="none" stroke-width="3" stroke-linejoin="round">"#);
        for (r, path) in route_paths(inst, sol) {
            let coords: Vec<String> = path.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(out, r#"<polyline stroke="{}" points="{}"/>"#, ROUTE_COLORS[r.vehicle % ROUTE_COLORS.len()], coords.join(" "));
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r##"<g id="samples" fill="#000000">"##);
        for r in &sol.routes {
            for &i in &r.stops {
                let t = inst.targets[i];
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(t.x), py(t.y));
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r##"<g id="depots" fill="#ffffff" stroke="#000000" stroke-width="2">"##);
    for d in &inst.depots {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="6"/>"#, px(d.x), py(d.y));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// GeoJSON feature collection: target points (with `priority` and the
/// rendered values under `label`), depot points and one line string per
/// nonempty route.
/// Coordinates are the instance's local meters.
pub fn render_geojson(inst: &Instance, sol: Option<&Solution>, values: &[f64], label: &str) -> Value {
    let mut features = Vec::new();
    for (k, t) in inst.targets.iter().enumerate() {
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [t.x, t.y]},
            "properties": {"kind": "target", "id": t.id, "priority": inst.priorities[k], label: values[k]},
        }));
    }
    for (k, d) in inst.depots.iter().enumerate() {
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [d.x, d.y]},
            "properties": {"kind": "depot", "id": k},
        }));
    }
    if let Some(sol) = sol {
        for (r, path) in route_paths(inst, sol) {
            let coords: Vec<[f64; 2]> = path.iter().map(|&(x, y)| [x, y]).collect();
            features.push(json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "kind": "route",
                    "vehicle": inst.vehicles[r.vehicle].id,
                    "stops": r.stops.iter().map(|&i| inst.targets[i].id).collect::<Vec<_>>(),
                    "duration": r.duration,
                },
            }));
        }
    }
    json!({"type": "FeatureCollection", "name": inst.name, "features": features})
}
