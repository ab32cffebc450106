//! Presentation-only SVG rendering: CFO-vs-time traces and frame schedule
//! Gantt charts. Acceptance checks never read these.

use coofdma_core::mac::{FrameKind, FrameTx, FreqFootprint, Node};
use coofdma_core::report::CfoRow;

const W: f64 = 1000.0;
const H: f64 = 420.0;
const ML: f64 = 90.0;
const MR: f64 = 30.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        esc(title)
    )
}

fn kind_color(kind: FrameKind) -> &'static str {
    match kind {
        FrameKind::Rts => "#d95f02",
        FrameKind::Cts => "#7570b3",
        FrameKind::Ack => "#66a61e",
        FrameKind::DataSu | FrameKind::DataMu => "#1b9e77",
        FrameKind::CoOfdma => "#e7298a",
        FrameKind::TriggerWired => "#666666",
    }
}

/// Per-node lanes, frames as rectangles, microsecond x axis.
pub fn schedule_svg(nodes: &[Node], frames: &[FrameTx], title: &str) -> String {
    let mut out = svg_open(title);
    let t_max_us = frames
        .iter()
        .map(|f| f.end().as_us_f64())
        .fold(1.0, f64::max);
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let lane_h = plot_h / nodes.len().max(1) as f64;
    let x = |us: f64| ML + us / t_max_us * plot_w;

    for (i, node) in nodes.iter().enumerate() {
        let y = MT + i as f64 * lane_h;
        out.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            y + lane_h,
            W - MR,
            y + lane_h
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 8.0,
            y + lane_h / 2.0 + 4.0,
            esc(&node.name)
        ));
    }
    for f in frames {
        let lane = f.tx_node;
        let y = MT + lane as f64 * lane_h + lane_h * 0.15;
        let x0 = x(f.start.as_us_f64());
        let x1 = x(f.end().as_us_f64());
        let label = match &f.footprint {
            FreqFootprint::Rf { rus: Some(rus), .. } if !rus.is_empty() => {
                format!(
                    "{} {}",
                    f.kind.label(),
                    rus.iter()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join("+")
                )
            }
            _ => f.kind.label().to_string(),
        };
        out.push_str(&format!(
            "<rect x=\"{x0:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\" \
             fill-opacity=\"0.8\"><title>{} {:.1}-{:.1} us</title></rect>\n",
            (x1 - x0).max(1.0),
            lane_h * 0.7,
            kind_color(f.kind),
            esc(&label),
            f.start.as_us_f64(),
            f.end().as_us_f64()
        ));
        if x1 - x0 > 60.0 {
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"white\">{}</text>\n",
                (x0 + x1) / 2.0,
                y + lane_h * 0.45,
                esc(&label)
            ));
        }
    }
    // x axis ticks
    for i in 0..=5 {
        let us = t_max_us * i as f64 / 5.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{us:.0}</text>\n",
            x(us),
            H - MB + 20.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">time [us]</text>\n",
        ML + plot_w / 2.0,
        H - 10.0
    ));
    out.push_str("</svg>\n");
    out
}

/// Residual-CFO traces for every AP with guide lines at +-350 Hz.
pub fn cfo_svg(series: &[(String, Vec<CfoRow>)], title: &str) -> String {
    let mut out = svg_open(title);
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let t_max = series
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.t_s))
        .fold(1.0, f64::max);
    let y_abs = series
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.true_offset_hz.abs()))
        .fold(400.0, f64::max);
    let x = |t: f64| ML + t / t_max * plot_w;
    let y = |hz: f64| MT + plot_h / 2.0 - hz / y_abs * (plot_h / 2.0);

    for guide in [-350.0, 0.0, 350.0] {
        let dash = if guide == 0.0 {
            ""
        } else {
            " stroke-dasharray=\"6 4\""
        };
        out.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#bbbbbb\"{dash}/>\n",
            y(guide),
            W - MR,
            y(guide)
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{guide:.0} Hz</text>\n",
            ML - 8.0,
            y(guide) + 4.0
        ));
    }

    let colors = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a"];
    for (i, (name, rows)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let points: Vec<String> = rows
            .iter()
            .map(|r| {
                format!(
                    "{:.1},{:.1}",
                    x(r.t_s),
                    y(r.true_offset_hz.clamp(-y_abs, y_abs))
                )
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            W - MR - 120.0,
            MT + 16.0 * (i + 1) as f64,
            esc(name)
        ));
        // tuning events as vertical ticks
        for r in rows.iter().filter(|r| r.tuned) {
            out.push_str(&format!(
                "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"{color}\" stroke-opacity=\"0.35\"/>\n",
                x(r.t_s),
                MT,
                MT + plot_h
            ));
        }
    }
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t:.0}</text>\n",
            x(t),
            H - MB + 20.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">time [s]</text>\n",
        ML + plot_w / 2.0,
        H - 10.0
    ));
    out.push_str("</svg>\n");
    out
}
