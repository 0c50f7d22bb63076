//! SVG export of scenes and benchmark curves.

use std::fmt::Write;

use crate::bench::{ExperimentReport, SummaryRow};
use crate::envs::{Environment, Scene};
use crate::geometry::{Aabb, Config, ConfigSpace, ObstacleSet};
use crate::models::FeasibilityModel;
use crate::roadmap::{EdgeStatus, Roadmap};

const PANEL: f64 = 560.0;
const PAD: f64 = 20.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// What to draw on top of the workspace.
#[derive(Default)]
pub struct SceneLayers<'a> {
    pub roadmap: Option<&'a Roadmap>,
    pub path: Option<&'a [Config]>,
    /// Drawn as hollow markers, e.g. the initial particles.
    pub particles: Option<&'a [Config]>,
    pub start: Option<&'a [f64]>,
    pub goal: Option<&'a [f64]>,
    /// Shade the background by `p(z=1|x)` on a `heatmap x heatmap` raster.
    pub heatmap: usize,
    /// Free text stored in the SVG metadata element.
    pub metadata: Option<String>,
}

/// Affine map from a 2D box to a square-ish pixel panel.
struct View {
    x0: f64,
    y1: f64,
    scale: f64,
    ox: f64,
}

impl View {
    fn new(lo: [f64; 2], hi: [f64; 2], ox: f64) -> (Self, f64) {
        let scale = PANEL / (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let h = (hi[1] - lo[1]) * scale;
        (View { x0: lo[0], y1: hi[1], scale, ox }, h)
    }

    fn px(&self, p: &[f64]) -> (f64, f64) {
        (self.ox + PAD + (p[0] - self.x0) * self.scale, PAD + (self.y1 - p[1]) * self.scale)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn rect(out: &mut String, v: &View, b: &Aabb, fill: &str) {
    let (x, y) = v.px(&[b.min[0], b.max[1]]);
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
        (b.max[0] - b.min[0]) * v.scale,
        (b.max[1] - b.min[1]) * v.scale
    );
}

fn obstacles(out: &mut String, v: &View, obs: &ObstacleSet) {
    for b in &obs.boxes {
        rect(out, v, b, "#444");
    }
    for c in &obs.circles {
        let (x, y) = v.px(&c.center);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="#444"/>"##, c.radius * v.scale);
    }
}

fn heatmap(out: &mut String, v: &View, space: &ConfigSpace, model: &dyn FeasibilityModel, res: usize) {
    let (lo, hi) = (space.lower(), space.upper());
    let (dx, dy) = ((hi[0] - lo[0]) / res as f64, (hi[1] - lo[1]) / res as f64);
    for i in 0..res {
        for j in 0..res {
            let c = [lo[0] + (i as f64 + 0.5) * dx, lo[1] + (j as f64 + 0.5) * dy];
            let g = (255.0 * model.probability(&c)).round() as u8;
            let b = Aabb { min: [c[0] - 0.5 * dx, c[1] - 0.5 * dy], max: [c[0] + 0.5 * dx, c[1] + 0.5 * dy] };
            rect(out, v, &b, &format!("rgb({g},{g},{g})"));
        }
    }
}

fn graph(out: &mut String, v: &View, layers: &SceneLayers<'_>, axes: [usize; 2]) {
    let pick = |p: &[f64]| [p[axes[0]], p[axes[1]]];
    if let Some(r) = layers.roadmap {
        for e in r.edges() {
            let style = match e.status {
                EdgeStatus::Feasible => r##"stroke="#888" stroke-width="0.8""##,
                EdgeStatus::Infeasible => r##"stroke="#d62728" stroke-width="0.8" stroke-dasharray="3,2""##,
                EdgeStatus::Unevaluated => r##"stroke="#ccc" stroke-width="0.4""##,
            };
            let (a, b) = (v.px(&pick(&r.vertices()[e.i])), v.px(&pick(&r.vertices()[e.j])));
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#, a.0, a.1, b.0, b.1);
        }
    }
    if let Some(ps) = layers.particles {
        for p in ps {
            let (x, y) = v.px(&pick(p));
            let _ = writeln!(
                out,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="none" stroke="#9467bd" stroke-width="0.7"/>"##
            );
        }
    }
    if let Some(r) = layers.roadmap {
        for p in r.vertices() {
            let (x, y) = v.px(&pick(p));
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="black"/>"#);
        }
    }
    if let Some(path) = layers.path.filter(|p| p.len() > 1) {
        let pts: Vec<String> = path
            .iter()
            .map(|p| {
                let (x, y) = v.px(&pick(p));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2.5"/>"##,
            pts.join(" ")
        );
    }
    for (p, color) in [(layers.start, "#2ca02c"), (layers.goal, "#d62728")] {
        if let Some(p) = p {
            let (x, y) = v.px(&pick(p));
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
        }
    }
}

fn frame(out: &mut String, v: &View, lo: [f64; 2], hi: [f64; 2]) {
    let (x, y) = v.px(&[lo[0], hi[1]]);
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        (hi[0] - lo[0]) * v.scale,
        (hi[1] - lo[1]) * v.scale
    );
}

fn arm_poses(out: &mut String, v: &View, model: &crate::models::TsdfArmModel, layers: &SceneLayers<'_>) {
    let mut poses: Vec<(&[f64], &str, f64)> = Vec::new();
    if let Some(path) = layers.path {
        for q in path {
            poses.push((q, "#1f77b4", 0.35));
        }
    }
    if let Some(q) = layers.start {
        poses.push((q, "#2ca02c", 1.0));
    }
    if let Some(q) = layers.goal {
        poses.push((q, "#d62728", 1.0));
    }
    for (q, color, alpha) in poses {
        let Ok(joints) = model.chain.joint_positions(q) else { continue };
        let pts: Vec<String> = joints
            .iter()
            .map(|p| {
                let (x, y) = v.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let w = 2.0 * model.chain.sphere_radius * v.scale;
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-opacity="{alpha}" stroke-width="{w:.2}" stroke-linecap="round" stroke-linejoin="round"/>"#,
            pts.join(" ")
        );
    }
}

/// Draws the environment with the roadmap and path. Arm scenes get a
/// workspace panel and a panel of the first two joint angles.
pub fn render_scene(env: &Environment, layers: &SceneLayers<'_>) -> String {
    let mut body = String::new();
    let (lo, hi) = (env.space.lower(), env.space.upper());
    let (width, height) = match &env.scene {
        Scene::Arm(model) => {
            let r = model.chain.reach() + model.chain.sphere_radius;
            let base = model.chain.base;
            let mut wlo = [base[0] - r, base[1] - r];
            let mut whi = [base[0] + r, base[1] + r];
            for bx in &model.obstacles.boxes {
                for k in 0..2 {
                    wlo[k] = wlo[k].min(bx.min[k]);
                    whi[k] = whi[k].max(bx.max[k]);
                }
            }
            for c in &model.obstacles.circles {
                for k in 0..2 {
                    wlo[k] = wlo[k].min(c.center[k] - c.radius);
                    whi[k] = whi[k].max(c.center[k] + c.radius);
                }
            }
            let (wv, h) = View::new(wlo, whi, 0.0);
            obstacles(&mut body, &wv, &model.obstacles);
            arm_poses(&mut body, &wv, model, layers);
            frame(&mut body, &wv, wlo, whi);
            let (jlo, jhi) = ([lo[0], lo[1]], [hi[0], hi[1]]);
            let (jv, jh) = View::new(jlo, jhi, PANEL + 2.0 * PAD);
            graph(&mut body, &jv, layers, [0, 1]);
            frame(&mut body, &jv, jlo, jhi);
            (2.0 * (PANEL + 2.0 * PAD), h.max(jh) + 2.0 * PAD)
        }
        scene => {
            let (blo, bhi) = ([lo[0], lo[1]], [hi[0], hi[1]]);
            let (v, h) = View::new(blo, bhi, 0.0);
            if layers.heatmap > 0 {
                heatmap(&mut body, &v, &env.space, env.model.as_ref(), layers.heatmap);
            }
            match scene {
                Scene::Grid(grid) if layers.heatmap == 0 => {
                    let [cw, ch] = grid.cell_size();
                    for r in 0..grid.height {
                        let mut c = 0;
                        while c < grid.width {
                            if !grid.is_occupied(r, c) {
                                c += 1;
                                continue;
                            }
                            let start = c;
                            while c < grid.width && grid.is_occupied(r, c) {
                                c += 1;
                            }
                            let top = grid.extent[3] - r as f64 * ch;
                            let b = Aabb {
                                min: [grid.extent[0] + start as f64 * cw, top - ch],
                                max: [grid.extent[0] + c as f64 * cw, top],
                            };
                            rect(&mut body, &v, &b, "#444");
                        }
                    }
                }
                Scene::Points { walls, clip, .. } => {
                    if let (Some(w), 0) = (walls, layers.heatmap) {
                        obstacles(&mut body, &v, w);
                    }
                    if let Some(c) = clip {
                        let (x, y) = v.px(&[c[0], c[3]]);
                        let _ = writeln!(
                            body,
                            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#ff7f0e" stroke-dasharray="6,4"/>"##,
                            (c[2] - c[0]) * v.scale,
                            (c[3] - c[1]) * v.scale
                        );
                    }
                }
                _ => {}
            }
            graph(&mut body, &v, layers, [0, 1]);
            frame(&mut body, &v, blo, bhi);
            (PANEL + 2.0 * PAD, h + 2.0 * PAD)
        }
    };
    wrap(width, height, &body, layers.metadata.as_deref())
}

fn wrap(width: f64, height: f64, body: &str, metadata: Option<&str>) -> String {
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    out.push('\n');
    if let Some(m) = metadata {
        let _ = writeln!(out, "<metadata>{}</metadata>", escape(m));
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push_str(body);
    out.push_str("</svg>\n");
    out
}

fn line_chart(out: &mut String, ox: f64, title: &str, xs: &[f64], series: &[(String, Vec<Option<f64>>)], y_max: f64) {
    let (w, h) = (PANEL, 0.6 * PANEL);
    let (x_lo, x_hi) =
        (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let top = 2.0 * PAD;
    let px = |x: f64| {
        let t = if x_hi > x_lo { (x - x_lo) / span } else { 0.5 };
        ox + PAD + 40.0 + t * (w - 60.0)
    };
    let py = |y: f64| top + h - 30.0 - y / y_max * (h - 40.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">{}</text>"#,
        ox + PAD + 40.0,
        top - 8.0,
        escape(title)
    );
    let (left, right) = (ox + PAD + 40.0, ox + w - 20.0 + PAD);
    let _ = writeln!(
        out,
        r#"<line x1="{left:.1}" y1="{:.1}" x2="{right:.1}" y2="{:.1}" stroke="black"/>"#,
        py(0.0),
        py(0.0)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{left:.1}" y1="{:.1}" x2="{left:.1}" y2="{:.1}" stroke="black"/>"#,
        py(0.0),
        py(y_max)
    );
    for &x in xs {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{x}</text>"#,
            px(x),
            py(0.0) + 14.0
        );
    }
    for k in 0..=4 {
        let y = y_max * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{:.2}</text>"#,
            left - 4.0,
            py(y) + 4.0,
            y
        );
    }
    for (s, (label, ys)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let pts: Vec<String> =
            xs.iter().zip(ys).filter_map(|(x, y)| y.map(|y| format!("{:.1},{:.1}", px(*x), py(y)))).collect();
        let _ =
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = top + 14.0 * s as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            ox + w - 110.0,
            ly + 10.0,
            escape(label)
        );
    }
}

/// Per-sampler curves against the particle count: success rate and mean
/// solved-path cost when planning ran, final MMD and coverage when scored.
pub fn render_curves(report: &ExperimentReport) -> String {
    let bench = &report.config.bench;
    let xs: Vec<f64> = bench.n.iter().map(|&n| n as f64).collect();
    type Pick = fn(&SummaryRow) -> Option<f64>;
    let mut panels: Vec<(&str, Pick)> = Vec::new();
    if bench.plan {
        panels.push(("success rate", |r| Some(r.successes as f64 / r.trials as f64)));
        panels.push(("mean path cost", |r| r.cost_mean));
    }
    if bench.mmd.is_some() {
        panels.push(("final MMD^2", |r| r.mmd_final_mean));
    }
    if bench.coverage.is_some() {
        panels.push(("coverage", |r| r.coverage_mean));
    }
    let mut body = String::new();
    for (k, (title, pick)) in panels.iter().enumerate() {
        let series: Vec<(String, Vec<Option<f64>>)> = bench
            .samplers
            .iter()
            .map(|s| {
                let label = s.label();
                let ys = bench.n.iter().map(|&n| report.summary_for(&label, n).and_then(pick)).collect();
                (label, ys)
            })
            .collect();
        let y_max = series.iter().flat_map(|(_, v)| v.iter().flatten()).cloned().fold(0.0, f64::max).max(1e-9) * 1.1;
        line_chart(&mut body, k as f64 * (PANEL + PAD), title, &xs, &series, y_max);
    }
    let panels = panels.len().max(1) as f64;
    wrap(panels * PANEL + (panels + 1.0) * PAD, 0.6 * PANEL + 3.0 * PAD, &body, None)
}
