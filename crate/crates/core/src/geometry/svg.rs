//! Deterministic SVG output.

use std::fmt::Write as _;
use std::path::Path;

use super::{GeometryError, RealizedPatch};

/// Fill rule for tiles.
#[derive(Clone, Debug, PartialEq)]
pub enum Coloring {
    ByType,
    /// One class index per tile, in patch order.
    ByClass(Vec<usize>),
}

/// Color `i` of the palette: hues spaced by the golden angle.
pub fn palette_color(i: usize) -> String {
    let hue = (i as f64 * 137.507_764_050_037_85) % 360.0;
    let (s, l) = (0.55, 0.62 - 0.12 * ((i / 7) % 2) as f64);
    let c = (1.0 - (2.0 * l - 1.0_f64).abs()) * s;
    let hp = hue / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", to(r), to(g), to(b))
}

fn num(x: f64) -> String {
    // adding 0.0 turns -0.0 into 0.0
    format!("{:.6}", x + 0.0)
}

/// SVG document with one polygon per tile, sorted by `(type, address)`.
pub fn svg_string(realized: &RealizedPatch, coloring: &Coloring) -> String {
    let bbox = realized.bbox();
    let (x0, y0, w, h) = if realized.is_empty() {
        (0.0, 0.0, 1.0, 1.0)
    } else {
        let (px, py) = (0.02 * bbox.width(), 0.02 * bbox.height());
        // y is flipped, so the top edge of the view is -max_y
        (bbox.min[0] - px, -bbox.max[1] - py, bbox.width() + 2.0 * px, bbox.height() + 2.0 * py)
    };
    let stroke = 0.002 * w.max(h);
    let mut order: Vec<usize> = (0..realized.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (&realized.tiles[a], &realized.tiles[b]);
        (ta.kind, &ta.addr).cmp(&(tb.kind, &tb.addr))
    });
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    let _ = writeln!(
        out,
        "<g stroke=\"#202020\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
        num(stroke)
    );
    for i in order {
        let tile = &realized.tiles[i];
        let class = match coloring {
            Coloring::ByType => tile.kind,
            Coloring::ByClass(classes) => classes[i],
        };
        let points: Vec<String> = tile
            .polygon
            .vertices
            .iter()
            .map(|v| format!("{},{}", num(v[0]), num(-v[1])))
            .collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"{}\"/>",
            points.join(" "),
            palette_color(class)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn render_svg(realized: &RealizedPatch, coloring: &Coloring, path: &Path) -> Result<(), GeometryError> {
    std::fs::write(path, svg_string(realized, coloring))?;
    Ok(())
}
