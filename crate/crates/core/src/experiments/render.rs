// Static SVG rendering for sweeps and line data. No plotting dependency; the
// CSV outputs remain the canonical artifacts.

use std::fmt::Write as _;

use crate::analysis::stability_boundary;
use crate::scenarios::ServiceProfile;

use super::{LinePoint, SweepCell, SweepSpec};

const PLOT: f64 = 480.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 30.0;
const RIGHT: f64 = 110.0;
const BOTTOM: f64 = 60.0;

/// Cell edges along one axis: midpoints between neighbours, half a gap past
/// either end.
fn edges(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n == 1 {
        let pad = if grid[0] > 0.0 { 0.5 * grid[0] } else { 0.01 };
        return vec![grid[0] - pad, grid[0] + pad];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(grid[0] - 0.5 * (grid[1] - grid[0]));
    for w in grid.windows(2) {
        e.push(0.5 * (w[0] + w[1]));
    }
    e.push(grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]));
    e
}

struct Axis {
    lo: f64,
    hi: f64,
    px0: f64,
    px1: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }
}

fn gray(level: f64) -> String {
    let g = (255.0 * (1.0 - level.clamp(0.0, 1.0))).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
}

/// Heatmap of mean delay over the `(λ1, λ2)` grid with the stability-criterion
/// boundary overlaid. Shade saturates at `spec.cutoff`; diverged cells are
/// drawn black.
pub fn heatmap_svg(spec: &SweepSpec, cells: &[SweepCell]) -> String {
    let xe = edges(&spec.lambda1_grid);
    let ye = edges(&spec.lambda2_grid);
    let xa = Axis {
        lo: xe[0],
        hi: xe[xe.len() - 1],
        px0: LEFT,
        px1: LEFT + PLOT,
    };
    let ya = Axis {
        lo: ye[0],
        hi: ye[ye.len() - 1],
        px0: TOP + PLOT,
        px1: TOP,
    };
    let width = LEFT + PLOT + RIGHT;
    let height = TOP + PLOT + BOTTOM;

    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}"/></clipPath></defs>"#
    );

    let n2 = spec.lambda2_grid.len();
    for (k, c) in cells.iter().enumerate() {
        let (i, j) = (k / n2, k % n2);
        let x0 = xa.map(xe[i]);
        let x1 = xa.map(xe[i + 1]);
        let y0 = ya.map(ye[j + 1]);
        let y1 = ya.map(ye[j]);
        let fill = if c.diverged {
            gray(1.0)
        } else {
            gray(c.mean_delay / spec.cutoff)
        };
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>λ1={:.4} λ2={:.4} delay={:.4}</title></rect>"#,
            x1 - x0,
            y1 - y0,
            c.lambda1,
            c.lambda2,
            c.mean_delay
        );
    }

    if let Ok(params) = spec.profile.with_rates(0.0, 0.0) {
        if let Some(vertices) = stability_boundary(&params) {
            let pts: Vec<String> = vertices
                .iter()
                .map(|&(l1, l2)| format!("{:.2},{:.2}", xa.map(l1), ya.map(l2)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline clip-path="url(#plot)" points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
    }

    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    ticks(&mut out, &spec.lambda1_grid, &xa, true);
    ticks(&mut out, &spec.lambda2_grid, &ya, false);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">λ1 (veh/s)</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">λ2 (veh/s)</text>"#,
        TOP + PLOT / 2.0,
        TOP + PLOT / 2.0
    );

    // legend
    let lx = LEFT + PLOT + 25.0;
    for k in 0..=10 {
        let level = 1.0 - k as f64 / 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#,
            TOP + k as f64 * PLOT / 22.0,
            PLOT / 22.0,
            gray(level)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">≥ {:.0} s</text>"#,
        lx + 25.0,
        TOP + 10.0,
        spec.cutoff
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">0 s</text>"#,
        lx + 25.0,
        TOP + PLOT / 2.0
    );
    out.push_str("</svg>\n");
    out
}

fn ticks(out: &mut String, grid: &[f64], axis: &Axis, horizontal: bool) {
    let every = grid.len().div_ceil(8).max(1);
    for v in grid.iter().step_by(every) {
        let p = axis.map(*v);
        if horizontal {
            let _ = writeln!(
                out,
                r#"<text x="{p:.2}" y="{}" text-anchor="middle">{v:.2}</text>"#,
                TOP + PLOT + 18.0
            );
        } else {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
                LEFT - 6.0,
                p + 4.0
            );
        }
    }
}

/// Simulated delay (solid) and analytical bound (dashed) against the common
/// per-direction rate, with the criterion threshold as a dotted vertical.
pub fn line_svg(profile: &ServiceProfile, points: &[LinePoint]) -> String {
    let width = LEFT + PLOT + RIGHT;
    let height = TOP + PLOT + BOTTOM;
    let mut out = String::new();
    header(&mut out, width, height);
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }

    let lo = points[0].lambda;
    let hi = points[points.len() - 1].lambda;
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.01, hi + 0.01)
    };
    let ymax = points
        .iter()
        .flat_map(|p| [p.mean_delay + p.ci_half_width, p.bound.unwrap_or(0.0)])
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.05;
    let xa = Axis {
        lo,
        hi,
        px0: LEFT,
        px1: LEFT + PLOT,
    };
    let ya = Axis {
        lo: 0.0,
        hi: ymax,
        px0: TOP + PLOT,
        px1: TOP,
    };

    let sim: Vec<String> = points
        .iter()
        .map(|p| format!("{:.2},{:.2}", xa.map(p.lambda), ya.map(p.mean_delay)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        sim.join(" ")
    );

    // bound polyline, broken wherever the bound is undefined
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, out: &mut String| {
        if run.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2" stroke-dasharray="6 4"/>"#,
                run.join(" ")
            );
        }
        run.clear();
    };
    for p in points {
        match p.bound {
            Some(b) => run.push(format!("{:.2},{:.2}", xa.map(p.lambda), ya.map(b))),
            None => flush(&mut run, &mut out),
        }
    }
    flush(&mut run, &mut out);

    if let Ok(params) = profile.with_rates(0.0, 0.0) {
        if let Some([_, (diag, _), _]) = stability_boundary(&params) {
            if diag > lo && diag < hi {
                let x = xa.map(diag);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="gray" stroke-dasharray="2 3"/>"#,
                    TOP + PLOT
                );
            }
        }
    }

    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    ticks(&mut out, &lambdas, &xa, true);
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            LEFT - 6.0,
            ya.map(v) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">λ per direction (veh/s)</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">mean delay (s)</text>"#,
        TOP + PLOT / 2.0,
        TOP + PLOT / 2.0
    );
    out.push_str("</svg>\n");
    out
}
