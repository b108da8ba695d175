//! Dependency-free grouped bar charts as self-contained SVG.

use std::fmt::Write as _;

/// One bar series: a label plus (mean, stddev) per group.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub groups: Vec<String>,
    pub series: Vec<Series>,
}

const COLORS: [&str; 4] = ["#4c78a8", "#f58518", "#54a24b", "#b279a2"];

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

pub fn render_grouped_bars(chart: &BarChart) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    // y range covers zero plus every mean +/- sd
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    for s in &chart.series {
        for &(mean, sd) in &s.points {
            lo = lo.min(mean - sd);
            hi = hi.max(mean + sd);
        }
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.08;
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let n_groups = chart.groups.len().max(1);
    let n_series = chart.series.len().max(1);
    let group_w = plot_w / n_groups as f64;
    let bar_w = (group_w * 0.8) / n_series as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(&chart.title)
    );

    // horizontal gridlines with tick labels
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" \
             stroke=\"#dddddd\"/>",
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>",
            MARGIN_LEFT - 6.0,
            yy + 4.0,
            v
        );
    }
    // zero line
    let zero_y = y(0.0);
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{zero_y:.1}\" x2=\"{:.1}\" y2=\"{zero_y:.1}\" \
         stroke=\"#555555\"/>",
        WIDTH - MARGIN_RIGHT
    );

    // bars with stddev whiskers
    for (gi, group) in chart.groups.iter().enumerate() {
        let gx = MARGIN_LEFT + gi as f64 * group_w + group_w * 0.1;
        for (si, series) in chart.series.iter().enumerate() {
            let Some(&(mean, sd)) = series.points.get(gi) else {
                continue;
            };
            let x = gx + si as f64 * bar_w;
            let (top, bottom) = if mean >= 0.0 {
                (y(mean), zero_y)
            } else {
                (zero_y, y(mean))
            };
            let color = COLORS[si % COLORS.len()];
            let _ = writeln!(
                svg,
                "<rect x=\"{x:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
                 fill=\"{color}\"/>",
                bar_w * 0.92,
                (bottom - top).abs().max(0.5)
            );
            if sd > 0.0 {
                let cx = x + bar_w * 0.46;
                let _ = writeln!(
                    svg,
                    "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" \
                     stroke=\"#333333\"/>",
                    y(mean + sd),
                    y(mean - sd)
                );
            }
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            MARGIN_LEFT + gi as f64 * group_w + group_w / 2.0,
            HEIGHT - MARGIN_BOTTOM + 18.0,
            escape(group)
        );
    }

    // y axis label and legend
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\" \
         text-anchor=\"middle\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );
    for (si, series) in chart.series.iter().enumerate() {
        let x = MARGIN_LEFT + si as f64 * 150.0;
        let yy = HEIGHT - 22.0;
        let color = COLORS[si % COLORS.len()];
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
            yy - 10.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{yy:.1}\" font-size=\"12\">{}</text>",
            x + 16.0,
            escape(&series.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_valid_and_deterministic() {
        let chart = BarChart {
            title: "deltas".into(),
            y_label: "delta".into(),
            groups: vec!["0".into(), "0.1".into()],
            series: vec![
                Series {
                    label: "d_f1".into(),
                    points: vec![(0.02, 0.005), (0.01, 0.002)],
                },
                Series {
                    label: "d_fpr".into(),
                    points: vec![(-0.01, 0.001), (-0.005, 0.0)],
                },
            ],
        };
        let a = render_grouped_bars(&chart);
        let b = render_grouped_bars(&chart);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(a.contains("d_f1"));
        assert_eq!(a.matches("<rect").count(), 1 + 4 + 2); // background + 4 bars + 2 legend keys
    }

    #[test]
    fn labels_are_escaped() {
        let chart = BarChart {
            title: "a<b & c".into(),
            y_label: "y".into(),
            groups: vec!["g".into()],
            series: vec![Series {
                label: "s".into(),
                points: vec![(1.0, 0.0)],
            }],
        };
        let svg = render_grouped_bars(&chart);
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
