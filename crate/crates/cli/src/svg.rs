//! Minimal self-contained SVG line plots.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub panels: Vec<Panel>,
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const DASHES: [&str; 4] = ["", "6,4", "2,3", "8,3,2,3"];

impl Figure {
    pub fn render(&self) -> String {
        let cols = self.panels.len().clamp(1, 2);
        let rows = self.panels.len().div_ceil(cols).max(1);
        let width = cols as f64 * (PANEL_W + MARGIN_L + MARGIN_R);
        let height = 30.0 + rows as f64 * (PANEL_H + MARGIN_T + MARGIN_B);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="15">{}</text>"#, width / 2.0, escape(&self.title));
        for (i, p) in self.panels.iter().enumerate() {
            let x0 = (i % cols) as f64 * (PANEL_W + MARGIN_L + MARGIN_R) + MARGIN_L;
            let y0 = 30.0 + (i / cols) as f64 * (PANEL_H + MARGIN_T + MARGIN_B) + MARGIN_T;
            p.render(&mut s, x0, y0);
        }
        s.push_str("</svg>\n");
        s
    }
}

impl Panel {
    fn transform(&self, v: f64, log: bool) -> Option<f64> {
        if log {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    fn range(&self, log: bool, pick: impl Fn(&Series) -> &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for se in &self.series {
            for &v in pick(se) {
                if let Some(t) = self.transform(v, log) {
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
            }
        }
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-300 {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            return (lo - pad, hi + pad);
        }
        (lo, hi)
    }

    fn render(&self, s: &mut String, x0: f64, y0: f64) {
        let (xl, xh) = self.range(self.log_x, |se| &se.xs);
        let (yl, yh) = self.range(self.log_y, |se| &se.ys);
        let px = |v: f64| x0 + (v - xl) / (xh - xl) * PANEL_W;
        let py = |v: f64| y0 + PANEL_H - (v - yl) / (yh - yl) * PANEL_H;

        let _ = writeln!(s, r#"<g>"#);
        let _ = writeln!(s, r#"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#, x0 + PANEL_W / 2.0, y0 - 10.0, escape(&self.title));
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = xl + f * (xh - xl);
            let yv = yl + f * (yh - yl);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(xv), y0 + PANEL_H + 16.0, tick(xv, self.log_x));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, py(yv) + 4.0, tick(yv, self.log_y));
            let _ = writeln!(s, r##"<line x1="{:.1}" y1="{y0:.1}" x2="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, px(xv), px(xv), y0 + PANEL_H);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + PANEL_W / 2.0, y0 + PANEL_H + 36.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            x0 - 55.0,
            y0 + PANEL_H / 2.0,
            x0 - 55.0,
            y0 + PANEL_H / 2.0,
            escape(&self.y_label)
        );
        for (i, se) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let dash = DASHES[(i / COLORS.len() + i) % DASHES.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for (&x, &y) in se.xs.iter().zip(&se.ys) {
                match (self.transform(x, self.log_x), self.transform(y, self.log_y)) {
                    (Some(tx), Some(ty)) => {
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(tx), py(ty));
                        pen_down = true;
                    }
                    _ => pen_down = false,
                }
            }
            let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
            let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#, d.trim_end());
            let ly = y0 + 14.0 + 15.0 * i as f64;
            let _ =
                writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#, x0 + 8.0, x0 + 30.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x0 + 34.0, ly + 4.0, escape(&se.label));
        }
        let _ = writeln!(s, "</g>");
    }
}

fn tick(v: f64, log: bool) -> String {
    let v = if log { 10f64.powf(v) } else { v };
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-2 && v.abs() < 1e4 {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
