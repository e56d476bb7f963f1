//! Minimal raster plots: line charts and heatmaps written as PNG.

use std::path::Path;

use image::{Rgb, RgbImage};

const W: u32 = 640;
const H: u32 = 400;
const PAD: u32 = 30;
const COLORS: [Rgb<u8>; 4] = [Rgb([200, 30, 30]), Rgb([30, 60, 200]), Rgb([20, 140, 60]), Rgb([120, 120, 120])];

fn bounds(series: &[Vec<(f64, f64)>]) -> Option<(f64, f64, f64, f64)> {
    let pts = series.iter().flatten().filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    Some((x0, x1, y0, y1))
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let n = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Overlaid line series on shared axes with a frame.
pub fn line_plot(series: &[Vec<(f64, f64)>], y_floor: Option<f64>) -> RgbImage {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let clipped: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.iter().map(|&(x, y)| (x, y_floor.map_or(y, |f| y.max(f)))).collect()).collect();
    let (l, r, t, b) = (PAD as f64, (W - PAD) as f64, PAD as f64, (H - PAD) as f64);
    let frame = Rgb([0, 0, 0]);
    line(&mut img, (l, t), (r, t), frame);
    line(&mut img, (l, b), (r, b), frame);
    line(&mut img, (l, t), (l, b), frame);
    line(&mut img, (r, t), (r, b), frame);
    let Some((x0, x1, y0, y1)) = bounds(&clipped) else {
        return img;
    };
    let map = |p: (f64, f64)| (l + (p.0 - x0) / (x1 - x0) * (r - l), b - (p.1 - y0) / (y1 - y0) * (b - t));
    for (k, s) in clipped.iter().enumerate() {
        for w in s.windows(2) {
            if w.iter().all(|p| p.0.is_finite() && p.1.is_finite()) {
                line(&mut img, map(w[0]), map(w[1]), COLORS[k % COLORS.len()]);
            }
        }
    }
    img
}

/// Row-major `values` (`ny` rows of `nx`) on a white-to-red scale; non-positive cells are grey.
pub fn heatmap(values: &[f64], nx: usize, ny: usize) -> RgbImage {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let (cw, ch) = ((W - 2 * PAD) as f64 / nx as f64, (H - 2 * PAD) as f64 / ny as f64);
    for row in 0..ny {
        for col in 0..nx {
            let v = values[row * nx + col];
            let c = if v > 0.0 && max > 0.0 {
                let s = (v / max).clamp(0.0, 1.0);
                Rgb([255, (255.0 * (1.0 - s)) as u8, (255.0 * (1.0 - s)) as u8])
            } else {
                Rgb([200, 200, 200])
            };
            let (xa, xb) = ((PAD as f64 + col as f64 * cw) as u32, (PAD as f64 + (col + 1) as f64 * cw) as u32);
            // Rows grow upward.
            let (ya, yb) = ((H - PAD) - ((row + 1) as f64 * ch) as u32, (H - PAD) - (row as f64 * ch) as u32);
            for x in xa..xb {
                for y in ya..yb {
                    img.put_pixel(x, y, c);
                }
            }
        }
    }
    img
}

pub fn save(img: &RgbImage, path: &Path) -> Result<(), String> {
    img.save(path).map_err(|e| format!("{}: {e}", path.display()))
}
