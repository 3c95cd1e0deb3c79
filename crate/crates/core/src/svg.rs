//! Minimal self-contained SVG plots of EDC step curves.

use std::fmt::Write;

use crate::curve::CurvePoint;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct PlotCurve<'a> {
    pub label: &'a str,
    pub points: &'a [CurvePoint],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + x / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - y / self.y_max * (HEIGHT - TOP - BOTTOM)
    }
}

/// Step path made of horizontal and vertical segments only.
fn step_path(frame: &Frame, points: &[CurvePoint]) -> String {
    let mut d = String::new();
    let Some(first) = points.first() else {
        return d;
    };
    write!(
        d,
        "M{:.3},{:.3}",
        frame.px(first.discard_fraction),
        frame.py(first.value)
    )
    .unwrap();
    for p in &points[1..] {
        if p.discard_fraction > frame.x_max {
            break;
        }
        write!(d, " H{:.3} V{:.3}", frame.px(p.discard_fraction), frame.py(p.value)).unwrap();
    }
    write!(d, " H{:.3}", frame.px(frame.x_max)).unwrap();
    d
}

/// Plot curves over `[0, x_max]` together with the constant starting error
/// line and the dashed theoretical best `max(0, starting_error - x)`.
pub fn render_edc(curves: &[PlotCurve<'_>], starting_error: f64, x_max: f64, y_label: &str) -> String {
    let x_max = if x_max > 0.0 { x_max } else { 1.0 };
    let visible_max = curves
        .iter()
        .flat_map(|c| c.points.iter().filter(|p| p.discard_fraction <= x_max).map(|p| p.value))
        .fold(starting_error, f64::max);
    let frame = Frame {
        x_max,
        y_max: if visible_max > 0.0 { visible_max * 1.1 } else { 1.0 },
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    // axes and ticks
    let (x0, y0) = (frame.px(0.0), frame.py(0.0));
    let (x1, y1) = (frame.px(x_max), frame.py(frame.y_max));
    writeln!(
        s,
        r#"<path d="M{x0:.3},{y1:.3} V{y0:.3} H{x1:.3}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=5 {
        let fx = x_max * i as f64 / 5.0;
        let fy = frame.y_max * i as f64 / 5.0;
        let (tx, ty) = (frame.px(fx), frame.py(fy));
        writeln!(
            s,
            r#"<text x="{tx:.3}" y="{:.3}" text-anchor="middle">{fx:.3}</text>"#,
            y0 + 16.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{fy:.4}</text>"#,
            x0 - 6.0,
            ty + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">Discard fraction</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(14,{:.3}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();

    // reference lines
    let se = frame.py(starting_error);
    writeln!(
        s,
        r##"<path d="M{x0:.3},{se:.3} H{x1:.3}" fill="none" stroke="#777777" stroke-width="1"/>"##
    )
    .unwrap();
    let corner = starting_error.min(x_max);
    writeln!(
        s,
        r##"<path d="M{x0:.3},{se:.3} L{:.3},{:.3} L{x1:.3},{:.3}" fill="none" stroke="#000000" stroke-dasharray="6 4"/>"##,
        frame.px(corner),
        frame.py(starting_error - corner),
        frame.py((starting_error - x_max).max(0.0))
    )
    .unwrap();

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            step_path(&frame, c.points)
        )
        .unwrap();
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(
            s,
            r#"<path d="M{lx:.3},{ly:.3} H{:.3}" stroke="{color}" stroke-width="2"/><text x="{:.3}" y="{:.3}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(c.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_curves_use_only_h_and_v() {
        let pts = vec![
            CurvePoint::new(0.0, 0.1),
            CurvePoint::new(0.25, 0.05),
            CurvePoint::new(0.5, 0.0),
        ];
        let frame = Frame { x_max: 1.0, y_max: 0.2 };
        let d = step_path(&frame, &pts);
        assert!(d.starts_with('M'));
        assert!(d[1..]
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .all(|c| c == 'H' || c == 'V'));
        let svg = render_edc(
            &[PlotCurve {
                label: "a<b",
                points: &pts,
            }],
            0.1,
            1.0,
            "FNMR",
        );
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("href"));
        assert_eq!(
            svg,
            render_edc(
                &[PlotCurve {
                    label: "a<b",
                    points: &pts
                }],
                0.1,
                1.0,
                "FNMR"
            )
        );
    }
}
