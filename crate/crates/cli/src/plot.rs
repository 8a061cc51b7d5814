//! Standalone SVG rendering: a heatmap for 2D rasters, a polyline chart
//! for 1D sweeps. The color scale is diverging and symmetric about 0 dB
//! so squeezing (blue) and excess noise (red) are visually comparable.

use crate::mapfile::{DocKind, MapDocument};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 48.0;

/// Diverging blue-white-red color for `v` in `[-limit, limit]`.
fn diverging_color(v: f64, limit: f64) -> String {
    let t = if limit > 0.0 {
        (v / limit).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let (r, g, b) = if t < 0.0 {
        // white -> blue for squeezing
        let s = -t;
        (
            (255.0 * (1.0 - s * 0.85)) as u8,
            (255.0 * (1.0 - s * 0.65)) as u8,
            255u8,
        )
    } else {
        // white -> red for excess noise
        (
            255u8,
            (255.0 * (1.0 - t * 0.65)) as u8,
            (255.0 * (1.0 - t * 0.85)) as u8,
        )
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn axis_labels(kind: DocKind) -> (&'static str, &'static str) {
    match kind {
        DocKind::Raster => ("probe cut (mm)", "conjugate cut (mm)"),
        DocKind::Sweep => ("cut position (mm)", "noise (dB rel. SNL)"),
        DocKind::Axial => ("defocus z (cm)", "noise (dB rel. SNL)"),
    }
}

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    )
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders a 2D noise map as a cell heatmap with mm axes.
pub fn heatmap(doc: &MapDocument) -> String {
    let map = &doc.map;
    let np = map.probe_coords.len();
    let nc = map.conj_coords.len();
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cell_w = plot_w / np as f64;
    let cell_h = plot_h / nc as f64;
    let limit = map
        .values
        .iter()
        .map(|v| v.nrf_db.abs())
        .fold(0.0, f64::max);

    let mut svg = svg_header(&format!(
        "noise map ({np} x {nc} cells, scale +/-{} dB)",
        fmt(limit)
    ));
    for (i, _) in map.probe_coords.iter().enumerate() {
        for (j, _) in map.conj_coords.iter().enumerate() {
            let v = map.values[i * nc + j].nrf_db;
            let x = MARGIN_L + i as f64 * cell_w;
            // SVG y grows downward; put low conjugate coordinates at the
            // bottom like a conventional plot.
            let y = MARGIN_T + plot_h - (j + 1) as f64 * cell_h;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>probe {} mm, conj {} mm: {} dB</title></rect>\n",
                cell_w + 0.5,
                cell_h + 0.5,
                diverging_color(v, limit),
                fmt(map.probe_coords[i]),
                fmt(map.conj_coords[j]),
                fmt(v),
            ));
        }
    }
    svg.push_str(&frame_and_labels(
        map.probe_coords[0],
        map.probe_coords[np - 1],
        map.conj_coords[0],
        map.conj_coords[nc - 1],
        axis_labels(doc.kind),
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Renders a 1D sweep as a polyline of `nrf_db` against the coordinate.
pub fn polyline(doc: &MapDocument) -> String {
    let map = &doc.map;
    let xs = &map.probe_coords;
    let ys: Vec<f64> = map.values.iter().map(|v| v.nrf_db).collect();
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let y_lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = (0.05 * (y_hi - y_lo)).max(0.05);
    let (y_lo, y_hi) = (y_lo.min(0.0) - pad, y_hi.max(0.0) + pad);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let to_x = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo).max(1e-300) * plot_w;
    let to_y = |y: f64| MARGIN_T + (y_hi - y) / (y_hi - y_lo).max(1e-300) * plot_h;

    let mut svg = svg_header(&format!("noise sweep ({} points)", xs.len()));
    // Shot-noise reference line at 0 dB.
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
        MARGIN_L,
        to_y(0.0),
        WIDTH - MARGIN_R,
        to_y(0.0)
    ));
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    svg.push_str(&frame_and_labels(x_lo, x_hi, y_lo, y_hi, axis_labels(doc.kind)));
    svg.push_str("</svg>\n");
    svg
}

fn frame_and_labels(
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    (x_label, y_label): (&str, &str),
) -> String {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x0 = MARGIN_L;
    let y0 = MARGIN_T;
    format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{x0}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"{x0}\" y=\"{}\" text-anchor=\"start\">{}</text>\n",
        y0 + plot_h + 16.0,
        fmt(x_lo),
        x0 + plot_w,
        y0 + plot_h + 16.0,
        fmt(x_hi),
        x0 + plot_w / 2.0,
        y0 + plot_h + 34.0,
        y0 + plot_h / 2.0,
        y0 + plot_h / 2.0,
        x0 - 6.0,
        y0 + 10.0,
        fmt(y_hi),
        y0 + plot_h - 2.0,
        fmt(y_lo),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverging_scale_is_symmetric_and_clamped() {
        assert_eq!(diverging_color(0.0, 1.0), "#ffffff");
        assert_eq!(diverging_color(-2.0, 1.0), diverging_color(-1.0, 1.0));
        let blue = diverging_color(-1.0, 1.0);
        let red = diverging_color(1.0, 1.0);
        assert!(blue.ends_with("ff"), "{blue}");
        assert!(red.starts_with("#ff"), "{red}");
        assert_eq!(diverging_color(0.5, 0.0), "#ffffff");
    }
}
