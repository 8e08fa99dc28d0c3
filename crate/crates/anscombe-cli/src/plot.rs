//! Multi-panel SVG scatter plots with fitted regression lines.
//!
//! Output is deterministic for fixed input. Each dataset gets one panel
//! (`<g class="panel">`); points are `<circle class="pt">` elements and the
//! fitted line is a `<line class="fit">` carrying its data-space endpoints
//! in `data-*` attributes so downstream tooling can check them without
//! undoing the pixel transform.

use anscombe::{linregress, DatasetPair};

use crate::dataset_io::fmt_sig;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 48.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 26.0;
const MARGIN_B: f64 = 40.0;
const TICKS: usize = 5;

pub struct Panel {
    pub label: String,
    pub dataset: DatasetPair,
}

struct Scale {
    min: f64,
    max: f64,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl Scale {
    fn new(min: f64, max: f64, pixel_lo: f64, pixel_hi: f64) -> Self {
        let (min, max) = if min == max {
            (min - 1.0, max + 1.0)
        } else {
            let pad = 0.06 * (max - min);
            (min - pad, max + pad)
        };
        Self {
            min,
            max,
            pixel_lo,
            pixel_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v - self.min) / (self.max - self.min);
        self.pixel_lo + t * (self.pixel_hi - self.pixel_lo)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

pub fn render(panels: &[Panel]) -> String {
    let cols = (panels.len() as f64).sqrt().ceil().max(1.0) as usize;
    let rows = panels.len().div_ceil(cols);
    let width = cols as f64 * PANEL_W;
    let height = rows as f64 * PANEL_H;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(
        "<style>text{font-family:sans-serif;font-size:11px;fill:#333}\
         .title{font-size:13px;font-weight:bold}\
         .pt{fill:#3572b0;fill-opacity:0.85;stroke:#1d4e89;stroke-width:0.6}\
         .fit{stroke:#c0392b;stroke-width:1.4}\
         .axis{stroke:#333;stroke-width:1;fill:none}\
         .tick{stroke:#333;stroke-width:0.7}\
         .grid{stroke:#ddd;stroke-width:0.6}</style>\n",
    );
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));

    for (i, panel) in panels.iter().enumerate() {
        let ox = (i % cols) as f64 * PANEL_W;
        let oy = (i / cols) as f64 * PANEL_H;
        render_panel(&mut svg, panel, ox, oy);
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let d = &panel.dataset;
    let fit = linregress(d).ok();

    let x_min = d.xs().iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = d.xs().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = d.ys().iter().copied().fold(f64::INFINITY, f64::min);
    let mut y_max = d.ys().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(fit) = &fit {
        for edge in [x_min, x_max] {
            let y = fit.beta0 + fit.beta1 * edge;
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }

    let sx = Scale::new(x_min, x_max, ox + MARGIN_L, ox + PANEL_W - MARGIN_R);
    // SVG y axis grows downward.
    let sy = Scale::new(y_min, y_max, oy + PANEL_H - MARGIN_B, oy + MARGIN_T);

    svg.push_str(&format!(
        "<g class=\"panel\" data-label=\"{}\">\n",
        panel.label
    ));
    svg.push_str(&format!(
        "<text class=\"title\" x=\"{}\" y=\"{}\">{}</text>\n",
        px(ox + MARGIN_L),
        px(oy + 16.0),
        panel.label
    ));

    // Axis ticks, gridlines, labels.
    for k in 0..TICKS {
        let t = k as f64 / (TICKS - 1) as f64;
        let xv = sx.min + t * (sx.max - sx.min);
        let yv = sy.min + t * (sy.max - sy.min);
        let xp = sx.map(xv);
        let yp = sy.map(yv);
        svg.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            px(xp),
            px(oy + MARGIN_T),
            px(xp),
            px(oy + PANEL_H - MARGIN_B)
        ));
        svg.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            px(ox + MARGIN_L),
            px(yp),
            px(ox + PANEL_W - MARGIN_R),
            px(yp)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(xp),
            px(oy + PANEL_H - MARGIN_B + 16.0),
            fmt_sig(xv, 4)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            px(ox + MARGIN_L - 5.0),
            px(yp + 3.5),
            fmt_sig(yv, 4)
        ));
    }
    svg.push_str(&format!(
        "<rect class=\"axis\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
        px(ox + MARGIN_L),
        px(oy + MARGIN_T),
        px(PANEL_W - MARGIN_L - MARGIN_R),
        px(PANEL_H - MARGIN_T - MARGIN_B)
    ));

    if let Some(fit) = &fit {
        let y1 = fit.beta0 + fit.beta1 * x_min;
        let y2 = fit.beta0 + fit.beta1 * x_max;
        svg.push_str(&format!(
            "<line class=\"fit\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" \
             data-x1=\"{}\" data-y1=\"{}\" data-x2=\"{}\" data-y2=\"{}\"/>\n",
            px(sx.map(x_min)),
            px(sy.map(y1)),
            px(sx.map(x_max)),
            px(sy.map(y2)),
            fmt_sig(x_min, 12),
            fmt_sig(y1, 12),
            fmt_sig(x_max, 12),
            fmt_sig(y2, 12),
        ));
    }

    for (x, y) in d.points() {
        svg.push_str(&format!(
            "<circle class=\"pt\" cx=\"{}\" cy=\"{}\" r=\"3.2\"/>\n",
            px(sx.map(x)),
            px(sy.map(y))
        ));
    }
    svg.push_str("</g>\n");
}
