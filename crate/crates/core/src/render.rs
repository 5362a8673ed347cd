//! Heatmaps of polar fields as binary PPM (`P6`) images.
//!
//! Both colormaps send zero to white, the colour of the masked wire disk
//! and of everything outside `r_max`, so an empty field renders as a
//! uniform image.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const DEFAULT_IMAGE_SIZE: usize = 512;
pub const BACKGROUND: [u8; 3] = [255, 255, 255];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    /// White through yellow and red to near-black, scaled to the maximum.
    Sequential,
    /// Blue (negative), white (zero), red (positive), scaled to the largest magnitude.
    Diverging,
}

const SEQUENTIAL: [(f64, [f64; 3]); 5] = [
    (0.0, [255.0, 255.0, 255.0]),
    (0.2, [255.0, 237.0, 160.0]),
    (0.45, [254.0, 178.0, 76.0]),
    (0.75, [227.0, 26.0, 28.0]),
    (1.0, [60.0, 0.0, 20.0]),
];

const DIVERGING: [(f64, [f64; 3]); 5] = [
    (-1.0, [5.0, 48.0, 97.0]),
    (-0.5, [103.0, 169.0, 207.0]),
    (0.0, [255.0, 255.0, 255.0]),
    (0.5, [239.0, 138.0, 98.0]),
    (1.0, [103.0, 0.0, 31.0]),
];

fn lerp_table(table: &[(f64, [f64; 3])], t: f64) -> [u8; 3] {
    let t = t.clamp(table[0].0, table[table.len() - 1].0);
    let k = table.windows(2).position(|w| t <= w[1].0).unwrap_or(table.len() - 2);
    let ((t0, c0), (t1, c1)) = (table[k], table[k + 1]);
    let u = (t - t0) / (t1 - t0);
    std::array::from_fn(|c| (c0[c] + u * (c1[c] - c0[c])).round() as u8)
}

impl Colormap {
    /// Colour of `value` given the normalising scale (> 0).
    pub fn colour(self, value: f64, scale: f64) -> [u8; 3] {
        if !(scale > 0.0) {
            return BACKGROUND;
        }
        let t = value / scale;
        match self {
            Colormap::Sequential => lerp_table(&SEQUENTIAL, t),
            Colormap::Diverging => lerp_table(&DIVERGING, t),
        }
    }

    fn scale(self, field: &[f64]) -> f64 {
        match self {
            Colormap::Sequential => field.iter().fold(0.0, |m, v| m.max(*v)),
            Colormap::Diverging => field.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major from the top-left pixel.
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }
}

/// Bilinear interpolation in `(r, θ)`, periodic in θ; `None` outside the annulus.
pub fn sample_polar(field: &[f64], grid: &Grid, x: f64, y: f64) -> Option<f64> {
    let r = x.hypot(y);
    let r0 = grid.r_values[0];
    if r < r0 || r > grid.r_max {
        return None;
    }
    let fr = ((r - r0) / grid.hr).min((grid.nr - 1) as f64);
    let i = (fr.floor() as usize).min(grid.nr - 2);
    let a = fr - i as f64;
    let ft = y.atan2(x).rem_euclid(std::f64::consts::TAU) / grid.htheta;
    let j = (ft.floor() as usize) % grid.ntheta;
    let b = ft - ft.floor();
    let j1 = (j + 1) % grid.ntheta;
    let v = |i: usize, j: usize| field[grid.index(i, j)];
    Some(
        (1.0 - a) * ((1.0 - b) * v(i, j) + b * v(i, j1))
            + a * ((1.0 - b) * v(i + 1, j) + b * v(i + 1, j1)),
    )
}

/// Rasterises a polar field onto a `size × size` image of the square
/// `[-view, view]²`.
pub fn rasterize(field: &[f64], grid: &Grid, colormap: Colormap, size: usize, view: f64) -> Result<Image> {
    grid.check_len(field.len(), "field")?;
    if size == 0 || !(view > 0.0) {
        return Err(Error::Domain(format!("image size {size} and view radius {view} must be positive")));
    }
    if let Some(k) = field.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("field value {k} is not finite")));
    }
    let scale = colormap.scale(field);
    let px = 2.0 * view / size as f64;
    let mut pixels = Vec::with_capacity(size * size);
    for row in 0..size {
        let y = view - (row as f64 + 0.5) * px;
        for col in 0..size {
            let x = -view + (col as f64 + 0.5) * px;
            pixels.push(match sample_polar(field, grid, x, y) {
                Some(v) => colormap.colour(v, scale),
                None => BACKGROUND,
            });
        }
    }
    Ok(Image {
        width: size,
        height: size,
        pixels,
    })
}

/// Renders the full domain at the default size and writes a PPM file.
pub fn render_heatmap(field: &[f64], grid: &Grid, colormap: Colormap, path: impl AsRef<Path>) -> Result<()> {
    let image = rasterize(field, grid, colormap, DEFAULT_IMAGE_SIZE, grid.r_max)?;
    let path = path.as_ref();
    fs::write(path, image.to_ppm()).map_err(|e| Error::io(path, e))
}
