//! Static SVG rendering of a simulation log: lanes and trajectories in road
//! coordinates, plus one speed-over-time panel per controlled vehicle.

use std::fmt::Write;

use crate::simloop::SimLog;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const UNCONTROLLED: &str = "#999999";

const WIDTH: f64 = 900.0;
const MARGIN: f64 = 50.0;
const ROAD_HEIGHT: f64 = 220.0;
const PANEL_HEIGHT: f64 = 120.0;

/// Stroke color per roster entry: palette colors for controlled vehicles in
/// id order, gray for everything else.
pub fn vehicle_colors(log: &SimLog) -> Vec<&'static str> {
    let mut next = 0;
    log.roster
        .iter()
        .map(|r| {
            if r.controlled {
                let c = PALETTE[next % PALETTE.len()];
                next += 1;
                c
            } else {
                UNCONTROLLED
            }
        })
        .collect()
}

struct Frame {
    s_min: f64,
    s_max: f64,
    d_min: f64,
    d_max: f64,
}

impl Frame {
    fn x(&self, s: f64) -> f64 {
        MARGIN + (s - self.s_min) / (self.s_max - self.s_min).max(1e-9) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, d: f64) -> f64 {
        MARGIN + (d - self.d_min) / (self.d_max - self.d_min).max(1e-9) * ROAD_HEIGHT
    }
}

pub fn render_svg(log: &SimLog) -> String {
    let lay = &log.layout;
    let (mut s_min, mut s_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in &log.ticks {
        for v in &t.vehicles {
            s_min = s_min.min(v.s);
            s_max = s_max.max(v.s);
        }
    }
    if !s_min.is_finite() {
        (s_min, s_max) = (0.0, 1.0);
    }
    if let Some(r) = lay.ramp {
        s_max = s_max.max(r.merge_end_s + 10.0);
    }
    s_min = (s_min - 10.0).max(0.0);
    s_max += 10.0;
    let half = 0.5 * lay.lane_width;
    let frame = Frame { s_min, s_max, d_min: -half, d_max: lay.lane_center(lay.total_lanes() - 1) + half };

    let controlled: Vec<usize> = (0..log.roster.len()).filter(|&i| log.roster[i].controlled).collect();
    let height = 2.0 * MARGIN + ROAD_HEIGHT + controlled.len() as f64 * (PANEL_HEIGHT + MARGIN);
    let colors = vehicle_colors(log);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{:.1}">{} seed {} ({})</text>"#,
        MARGIN - 20.0,
        log.scenario_id,
        log.seed,
        log.mode
    );

    // Lane edges; the ramp lane is drawn only up to its merge end.
    for k in 0..=lay.main_lanes {
        let d = lay.lane_center(k) - half;
        let dash = if k == 0 || k == lay.main_lanes { "" } else { r#" stroke-dasharray="8,6""# };
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#444"{dash}/>"##,
            frame.x(s_min),
            frame.y(d),
            frame.x(s_max),
            frame.y(d)
        );
    }
    if let Some(r) = lay.ramp {
        let outer = lay.lane_center(r.lane) + half;
        let end = r.merge_end_s.min(s_max);
        let _ = writeln!(
            svg,
            r##"<polyline class="ramp" points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="#eeeeee" stroke="#444"/>"##,
            frame.x(s_min),
            frame.y(outer),
            frame.x(end),
            frame.y(outer),
            frame.x(end),
            frame.y(outer - lay.lane_width)
        );
    }

    for (i, r) in log.roster.iter().enumerate() {
        let pts: Vec<String> = log
            .ticks
            .iter()
            .filter_map(|t| t.vehicles.get(i))
            .map(|v| format!("{:.1},{:.1}", frame.x(v.s), frame.y(v.d)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="vehicle-{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            r.id,
            pts.join(" "),
            colors[i]
        );
    }

    // Speed panels.
    let duration = log.duration().max(log.tick);
    let v_max = log
        .ticks
        .iter()
        .flat_map(|t| t.vehicles.iter().map(|v| v.v))
        .fold(1.0, f64::max);
    for (p, &i) in controlled.iter().enumerate() {
        let top = 2.0 * MARGIN + ROAD_HEIGHT + p as f64 * (PANEL_HEIGHT + MARGIN);
        let px = |t: f64| MARGIN + t / duration * (WIDTH - 2.0 * MARGIN);
        let py = |v: f64| top + PANEL_HEIGHT - v / v_max * PANEL_HEIGHT;
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{top:.1}" width="{:.1}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##,
            WIDTH - 2.0 * MARGIN
        );
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="{:.1}">vehicle {} speed (0 to {:.1} m/s over {:.1} s)</text>"#,
            top - 5.0,
            log.roster[i].id,
            v_max,
            duration
        );
        let pts: Vec<String> = log
            .ticks
            .iter()
            .filter_map(|t| t.vehicles.get(i).map(|v| (t.tick as f64 * log.tick, v.v)))
            .map(|(t, v)| format!("{:.1},{:.1}", px(t), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            colors[i]
        );
    }
    svg.push_str("</svg>\n");
    svg
}
