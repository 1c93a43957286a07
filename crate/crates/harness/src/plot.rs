//! Static line charts and coverage maps as SVG text or PNG images.

use std::fmt::Write as _;

use edgewatch_core::coverage::{CoverageCell, Zone};
use image::{ImageEncoder, Rgb, RgbImage};

const W: u32 = 800;
const H: u32 = 400;
const MARGIN: f64 = 50.0;
const PALETTE: [(u8, u8, u8); 5] = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (148, 103, 189), (255, 127, 14)];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    /// Points drawn as a step line when `step` is set.
    pub points: Vec<(f64, f64)>,
    pub step: bool,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub series: Vec<Series>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(chart: &Chart) -> Frame {
        let pts = chart.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y1) = (0.0, 1.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        Frame { x: (x0, x1), y: (y0, y1) }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x.0) / (self.x.1 - self.x.0);
        let fy = (y - self.y.0) / (self.y.1 - self.y.0);
        (MARGIN + fx * (f64::from(W) - 2.0 * MARGIN), f64::from(H) - MARGIN - fy * (f64::from(H) - 2.0 * MARGIN))
    }
}

fn path(s: &Series) -> Vec<(f64, f64)> {
    if !s.step {
        return s.points.clone();
    }
    let mut out = Vec::with_capacity(s.points.len() * 2);
    for (k, &(x, y)) in s.points.iter().enumerate() {
        if k > 0 {
            out.push((x, s.points[k - 1].1));
        }
        out.push((x, y));
    }
    out
}

pub fn chart_svg(chart: &Chart) -> String {
    let f = Frame::fit(chart);
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (l, b) = (MARGIN, f64::from(H) - MARGIN);
    let (r, t) = (f64::from(W) - MARGIN, MARGIN);
    writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, f64::from(W) / 2.0, chart.title).unwrap();
    writeln!(out, r#"<text x="{l}" y="{}" font-family="sans-serif" font-size="11">{:.1}</text>"#, b + 16.0, f.x.0).unwrap();
    writeln!(out, r#"<text x="{r}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1}</text>"#, b + 16.0, f.x.1).unwrap();
    writeln!(out, r#"<text x="{}" y="{b}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1}</text>"#, l - 4.0, f.y.0).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1}</text>"#, l - 4.0, t + 4.0, f.y.1).unwrap();
    for (k, s) in chart.series.iter().enumerate() {
        let (cr, cg, cb) = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = path(s)
            .iter()
            .map(|&(x, y)| {
                let (px, py) = f.px(x, y);
                format!("{px:.1},{py:.1}")
            })
            .collect();
        writeln!(out, r#"<polyline points="{}" stroke="rgb({cr},{cg},{cb})" fill="none" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="rgb({cr},{cg},{cb})" text-anchor="end">{}</text>"#,
            r,
            t + 14.0 * (k as f64 + 1.0),
            s.name
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let (mut x0, mut y0) = (a.0.round() as i64, a.1.round() as i64);
    let (x1, y1) = (b.0.round() as i64, b.1.round() as i64);
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        if x0 >= 0 && y0 >= 0 && (x0 as u32) < img.width() && (y0 as u32) < img.height() {
            img.put_pixel(x0 as u32, y0 as u32, c);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn encode(img: &RgbImage) -> Vec<u8> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)
        .expect("in-memory PNG encoding");
    out
}

pub fn chart_png(chart: &Chart) -> Vec<u8> {
    let f = Frame::fit(chart);
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let black = Rgb([0, 0, 0]);
    let (l, b) = (MARGIN, f64::from(H) - MARGIN);
    let (r, t) = (f64::from(W) - MARGIN, MARGIN);
    line(&mut img, (l, t), (l, b), black);
    line(&mut img, (l, b), (r, b), black);
    for (k, s) in chart.series.iter().enumerate() {
        let (cr, cg, cb) = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = path(s).iter().map(|&(x, y)| f.px(x, y)).collect();
        for w in pts.windows(2) {
            line(&mut img, w[0], w[1], Rgb([cr, cg, cb]));
        }
    }
    encode(&img)
}

fn zone_rgb(z: Zone) -> (u8, u8, u8) {
    match z {
        Zone::Excellent => (46, 160, 67),
        Zone::Good => (240, 200, 30),
        Zone::Mid => (245, 130, 20),
        Zone::CellEdge => (214, 39, 40),
    }
}

/// Map cells into an `H × H` square keeping the aspect ratio of the grid.
fn map_frame(cells: &[CoverageCell]) -> impl Fn(f64, f64) -> (f64, f64) {
    let lon0 = cells.iter().map(|c| c.sw.lon).fold(f64::INFINITY, f64::min);
    let lon1 = cells.iter().map(|c| c.ne.lon).fold(f64::NEG_INFINITY, f64::max);
    let lat0 = cells.iter().map(|c| c.sw.lat).fold(f64::INFINITY, f64::min);
    let lat1 = cells.iter().map(|c| c.ne.lat).fold(f64::NEG_INFINITY, f64::max);
    let kx = lat0.to_radians().cos();
    let span = ((lon1 - lon0) * kx).max(lat1 - lat0).max(1e-12);
    let size = f64::from(H) - 2.0 * 20.0;
    move |lat, lon| (20.0 + (lon - lon0) * kx / span * size, 20.0 + (lat1 - lat) / span * size)
}

pub fn coverage_svg(cells: &[CoverageCell]) -> String {
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{H}" height="{H}" viewBox="0 0 {H} {H}">"#).unwrap();
    writeln!(out, r#"<rect width="{H}" height="{H}" fill="white"/>"#).unwrap();
    if !cells.is_empty() {
        let to_px = map_frame(cells);
        for c in cells {
            let (x0, y0) = to_px(c.ne.lat, c.sw.lon);
            let (x1, y1) = to_px(c.sw.lat, c.ne.lon);
            let (r, g, b) = zone_rgb(c.zone);
            writeln!(
                out,
                r#"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="rgb({r},{g},{b})"><title>{:.1} dBm</title></rect>"#,
                (x1 - x0).max(0.5),
                (y1 - y0).max(0.5),
                c.rsrp_median
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn coverage_png(cells: &[CoverageCell]) -> Vec<u8> {
    let mut img = RgbImage::from_pixel(H, H, Rgb([255, 255, 255]));
    if !cells.is_empty() {
        let to_px = map_frame(cells);
        for c in cells {
            let (x0, y0) = to_px(c.ne.lat, c.sw.lon);
            let (x1, y1) = to_px(c.sw.lat, c.ne.lon);
            let (r, g, b) = zone_rgb(c.zone);
            let xs = x0.floor() as u32..(x1.ceil() as u32).max(x0.floor() as u32 + 1).min(H);
            for x in xs {
                for y in y0.floor() as u32..(y1.ceil() as u32).max(y0.floor() as u32 + 1).min(H) {
                    img.put_pixel(x, y, Rgb([r, g, b]));
                }
            }
        }
    }
    encode(&img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart {
            title: "t".into(),
            series: vec![Series { name: "a".into(), points: vec![(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)], step: true }],
        }
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let a = chart_svg(&chart());
        assert_eq!(a, chart_svg(&chart()));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 1);
    }

    #[test]
    fn png_decodes() {
        let bytes = chart_png(&chart());
        let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).unwrap();
        assert_eq!((img.width(), img.height()), (W, H));
        let empty = Chart { title: "e".into(), series: vec![] };
        assert!(!chart_png(&empty).is_empty());
    }
}
