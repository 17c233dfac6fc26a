//! Static PNG rendering of fields and tomogram rows.

use image::{Rgb, RgbImage};
use tomokit::{PhaseSpaceField, Tomogram};

const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const AXIS: Rgb<u8> = Rgb([40, 40, 40]);
const MARGIN: u32 = 12;

const PALETTE: [Rgb<u8>; 8] = [
    Rgb([31, 119, 180]),
    Rgb([255, 127, 14]),
    Rgb([44, 160, 44]),
    Rgb([214, 39, 40]),
    Rgb([148, 103, 189]),
    Rgb([140, 86, 75]),
    Rgb([227, 119, 194]),
    Rgb([23, 190, 207]),
];

/// Diverging map: blue below zero, white at zero, red above.
fn diverging(t: f64) -> Rgb<u8> {
    let t = t.clamp(-1.0, 1.0);
    let fade = |c: f64| (255.0 * (1.0 - c)).round() as u8;
    if t >= 0.0 {
        Rgb([255, fade(t), fade(t)])
    } else {
        Rgb([fade(-t), fade(-t), 255])
    }
}

/// Heatmap with `q` along the horizontal axis and `p` increasing upward.
pub fn field_heatmap(field: &PhaseSpaceField, width: u32, height: u32) -> RgbImage {
    let g = field.grid();
    let scale = field.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    RgbImage::from_fn(width, height, |px, py| {
        let i = ((px as f64 + 0.5) / width as f64 * g.n_q as f64) as usize;
        let j = ((height - 1 - py) as f64 + 0.5) / height as f64 * g.n_p as f64;
        diverging(field.value(i.min(g.n_q - 1), (j as usize).min(g.n_p - 1)) / scale)
    })
}

/// Default row selection: at most eight evenly spaced rows.
pub fn default_rows(n_frames: usize) -> Vec<usize> {
    let n = n_frames.min(PALETTE.len());
    (0..n).map(|k| k * n_frames / n).collect()
}

/// Line plot of the selected rows on a shared vertical scale.
pub fn tomogram_lines(tomogram: &Tomogram, rows: &[usize], width: u32, height: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(width, height, BACKGROUND);
    let (x0, x1) = (MARGIN, width - 1 - MARGIN);
    let (y0, y1) = (MARGIN, height - 1 - MARGIN);
    line(&mut img, (x0 as i64, y1 as i64), (x1 as i64, y1 as i64), AXIS);
    line(&mut img, (x0 as i64, y0 as i64), (x0 as i64, y1 as i64), AXIS);

    let top = rows
        .iter()
        .flat_map(|&k| tomogram.row(k).iter())
        .fold(0.0f64, |m, &v| m.max(v));
    let top = if top > 0.0 { top } else { 1.0 };
    let n = tomogram.x_grid().n;
    let to_px = |m: usize, v: f64| {
        let x = x0 as f64 + (x1 - x0) as f64 * m as f64 / (n - 1) as f64;
        let y = y1 as f64 - (y1 - y0) as f64 * (v / top).clamp(0.0, 1.0);
        (x.round() as i64, y.round() as i64)
    };
    for (c, &k) in rows.iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        let row = tomogram.row(k);
        for m in 1..n {
            line(&mut img, to_px(m - 1, row[m - 1]), to_px(m, row[m]), color);
        }
    }
    img
}

/// Bresenham segment, clipped to the image.
fn line(img: &mut RgbImage, (mut x, mut y): (i64, i64), (xe, ye): (i64, i64), color: Rgb<u8>) {
    let dx = (xe - x).abs();
    let dy = -(ye - y).abs();
    let sx = if x < xe { 1 } else { -1 };
    let sy = if y < ye { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
        if x == xe && y == ye {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
