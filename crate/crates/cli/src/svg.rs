//! Minimal static SVG line chart of the share path.

use std::fmt::Write;

use jevons_core::Trajectory;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Frame {
    t_end: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * t / self.t_end
    }

    fn y(&self, share: f64) -> f64 {
        HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * share
    }
}

/// Share against time, with a circle where σ = 1 and a cross where σ = 2
/// (markers omitted when outside the horizon).
pub fn share_chart(
    traj: &Trajectory,
    title: &str,
    sigma_one: Option<(f64, f64)>,
    sigma_two: Option<(f64, f64)>,
) -> String {
    let t_end = *traj
        .times
        .last()
        .expect("trajectory has at least two samples");
    let frame = Frame { t_end };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes
    let (x0, x1) = (frame.x(0.0), frame.x(t_end));
    let (y0, y1) = (frame.y(0.0), frame.y(1.0));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let y = frame.y(v);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{v:.2}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    for i in 0..=5 {
        let t = t_end * i as f64 / 5.0;
        let x = frame.x(t);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            trim_number(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">t (years)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">AI revenue share</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let points: Vec<String> = traj
        .times
        .iter()
        .zip(&traj.share)
        .map(|(&t, &r)| format!("{:.2},{:.2}", frame.x(t), frame.y(r)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points.join(" ")
    );

    if let Some((t, r)) = sigma_one {
        let _ = writeln!(
            s,
            r#"<circle class="sigma-one" cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="black" stroke-width="2"/>"#,
            frame.x(t),
            frame.y(r)
        );
    }
    if let Some((t, r)) = sigma_two {
        let (cx, cy) = (frame.x(t), frame.y(r));
        let _ = writeln!(
            s,
            r#"<path class="sigma-two" d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - 6.0,
            cy - 6.0,
            cx + 6.0,
            cy + 6.0,
            cx - 6.0,
            cy + 6.0,
            cx + 6.0,
            cy - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use jevons_core::{trajectory, Scenario};

    #[test]
    fn markers_and_viewbox() {
        let s = Scenario::new(0.001, 0.5, 1.5, 0.5, 0.15).unwrap();
        let tr = trajectory(&s, 30.0, 31).unwrap();
        let svg = share_chart(&tr, "a < b", Some((4.444, 0.001)), Some((8.889, 0.2)));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"viewBox="0 0 800 500""#));
        assert!(svg.contains("sigma-one"));
        assert!(svg.contains("sigma-two"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);

        let none = share_chart(&tr, "x", None, None);
        assert!(!none.contains("sigma-one"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(trim_number(30.0), "30");
        assert_eq!(trim_number(4.5), "4.5");
    }
}
