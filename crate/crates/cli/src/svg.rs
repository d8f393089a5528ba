//! Self-contained SVG contour rendering: filled cell bands in equirectangular
//! projection, 21 quantized levels on a symmetric diverging palette, extrema
//! markers, and a value legend.

use tetraflow::sphharm::{Grid, GridField};
use tetraflow::verify::CriticalPoint;

const PLOT_X: f64 = 70.0;
const PLOT_Y: f64 = 56.0;
const PLOT_W: f64 = 720.0;
const PLOT_H: f64 = 360.0;
const LEVELS: i32 = 10; // bands run -LEVELS..=+LEVELS, 21 in total

fn band_color(band: i32) -> String {
    // blue (-) -> white (0) -> red (+)
    let t = band as f64 / LEVELS as f64;
    let (r, g, b) = if t < 0.0 {
        let s = -t;
        (
            33.0 * s + 255.0 * (1.0 - s),
            102.0 * s + 255.0 * (1.0 - s),
            172.0 * s + 255.0 * (1.0 - s),
        )
    } else {
        let s = t;
        (
            178.0 * s + 255.0 * (1.0 - s),
            24.0 * s + 255.0 * (1.0 - s),
            43.0 * s + 255.0 * (1.0 - s),
        )
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn x_of_phi(phi: f64) -> f64 {
    PLOT_X + phi / (2.0 * std::f64::consts::PI) * PLOT_W
}

fn y_of_theta(theta: f64) -> f64 {
    PLOT_Y + (1.0 - (theta + std::f64::consts::FRAC_PI_2) / std::f64::consts::PI) * PLOT_H
}

/// Render the field as an SVG document string.
pub fn render(field: &GridField, extrema: &[CriticalPoint], title: &str, subtitle: &str) -> String {
    let grid: &Grid = &field.grid;
    let vmax = field.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut out = String::with_capacity(256 * 1024);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"520\" \
         viewBox=\"0 0 880 520\" font-family=\"monospace\">\n\
         <rect width=\"880\" height=\"520\" fill=\"white\"/>\n\
         <text x=\"{PLOT_X}\" y=\"24\" font-size=\"15\">{title}</text>\n\
         <text x=\"{PLOT_X}\" y=\"42\" font-size=\"12\" fill=\"#444\">{subtitle}</text>\n"
    ));

    // latitude cell boundaries: pole to pole, midway between Gauss nodes
    let mut theta_edges = Vec::with_capacity(grid.n_theta + 1);
    theta_edges.push(-std::f64::consts::FRAC_PI_2);
    for i in 1..grid.n_theta {
        theta_edges.push((grid.theta(i - 1) + grid.theta(i)) / 2.0);
    }
    theta_edges.push(std::f64::consts::FRAC_PI_2);

    let dphi = 2.0 * std::f64::consts::PI / grid.n_phi as f64;
    for i in 0..grid.n_theta {
        let y1 = y_of_theta(theta_edges[i + 1]);
        let y0 = y_of_theta(theta_edges[i]);
        let (top, height) = (y1.min(y0), (y0 - y1).abs());
        for j in 0..grid.n_phi {
            let v = field.value(i, j);
            let band = if vmax > 0.0 {
                ((v / vmax) * LEVELS as f64).round() as i32
            } else {
                0
            };
            let color = band_color(band.clamp(-LEVELS, LEVELS));
            let left = grid.phi_nodes[j] - dphi / 2.0;
            let width = dphi / (2.0 * std::f64::consts::PI) * PLOT_W;
            if left < 0.0 {
                // the first column wraps around the date line
                out.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{height:.2}\" fill=\"{color}\"/>\n",
                    x_of_phi(0.0),
                    width / 2.0
                ));
                out.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{height:.2}\" fill=\"{color}\"/>\n",
                    x_of_phi(left + 2.0 * std::f64::consts::PI),
                    width / 2.0
                ));
            } else {
                out.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{width:.2}\" height=\"{height:.2}\" fill=\"{color}\"/>\n",
                    x_of_phi(left)
                ));
            }
        }
    }

    // frame and axis labels
    out.push_str(&format!(
        "<rect x=\"{PLOT_X}\" y=\"{PLOT_Y}\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         fill=\"none\" stroke=\"black\"/>\n"
    ));
    for (frac, label) in [(0.0, "0"), (0.25, "90"), (0.5, "180"), (0.75, "270"), (1.0, "360")] {
        let x = PLOT_X + frac * PLOT_W;
        out.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{label}</text>\n",
            PLOT_Y + PLOT_H + 16.0
        ));
    }
    for (theta, label) in [
        (std::f64::consts::FRAC_PI_2, "90"),
        (0.0, "0"),
        (-std::f64::consts::FRAC_PI_2, "-90"),
    ] {
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{label}</text>\n",
            PLOT_X - 8.0,
            y_of_theta(theta) + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">longitude (deg)</text>\n",
        PLOT_X + PLOT_W / 2.0,
        PLOT_Y + PLOT_H + 34.0
    ));

    // extrema markers
    for p in extrema {
        let marker = if p.value >= 0.0 { "+" } else { "-" };
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"7\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{marker}</text>\n",
            x_of_phi(p.phi),
            y_of_theta(p.theta),
            x_of_phi(p.phi),
            y_of_theta(p.theta) + 4.0
        ));
    }

    // color bar
    let bar_x = 810.0;
    for band in -LEVELS..=LEVELS {
        let y = PLOT_Y + (LEVELS - band) as f64 / (2 * LEVELS + 1) as f64 * PLOT_H;
        let h = PLOT_H / (2 * LEVELS + 1) as f64;
        out.push_str(&format!(
            "<rect x=\"{bar_x}\" y=\"{y:.2}\" width=\"22\" height=\"{h:.2}\" fill=\"{}\" stroke=\"none\"/>\n",
            band_color(band)
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{bar_x}\" y=\"{PLOT_Y}\" width=\"22\" height=\"{PLOT_H}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{bar_x}\" y=\"{:.1}\" font-size=\"11\">{:+.3e}</text>\n\
         <text x=\"{bar_x}\" y=\"{:.1}\" font-size=\"11\">{:+.3e}</text>\n",
        PLOT_Y - 6.0,
        vmax,
        PLOT_Y + PLOT_H + 14.0,
        -vmax
    ));

    // legend: strongest positive and negative vortices
    let strongest_max = extrema.iter().filter(|p| p.value > 0.0).fold(None::<&CriticalPoint>, |acc, p| {
        Some(acc.map_or(p, |a| if p.value > a.value { p } else { a }))
    });
    let strongest_min = extrema.iter().filter(|p| p.value < 0.0).fold(None::<&CriticalPoint>, |acc, p| {
        Some(acc.map_or(p, |a| if p.value < a.value { p } else { a }))
    });
    let mut legend_y = PLOT_Y + PLOT_H + 52.0;
    for (label, point) in [("max", strongest_max), ("min", strongest_min)] {
        if let Some(p) = point {
            out.push_str(&format!(
                "<text x=\"{PLOT_X}\" y=\"{legend_y:.1}\" font-size=\"12\">{label} {:+.6e} at theta = {:+.2} deg, phi = {:.2} deg (|{label}| = {:.6e})</text>\n",
                p.value,
                p.theta.to_degrees(),
                p.phi.to_degrees(),
                p.value.abs()
            ));
            legend_y += 18.0;
        }
    }
    out.push_str("</svg>\n");
    out
}
