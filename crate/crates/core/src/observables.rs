//! Densities, spin densities, angular profiles and scalar diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::Grid;

/// Trace density `½(|φ₊|² + |φ₋|²)`.
pub fn density(spinor: &SpinorField) -> Vec<f64> {
    spinor
        .plus
        .iter()
        .zip(&spinor.minus)
        .map(|(p, m)| 0.5 * (p.norm_sqr() + m.norm_sqr()))
        .collect()
}

/// Coefficient of `e_θ` in the local spin density, `½(|φ₊|² - |φ₋|²)`.
pub fn spin_density(spinor: &SpinorField) -> Vec<f64> {
    spinor
        .plus
        .iter()
        .zip(&spinor.minus)
        .map(|(p, m)| 0.5 * (p.norm_sqr() - m.norm_sqr()))
        .collect()
}

/// Channel populations `n± = Σ_runs |φ±|²` of an unpolarised ensemble,
/// each normalised to one at launch.
///
/// For the adiabatic model both channels start from the full packet and a
/// single run suffices; for the exact model the incoming |↑⟩ and |↓⟩ runs
/// are summed, which is the same mixture written in the lab basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDensities {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl ChannelDensities {
    pub fn zeros(len: usize) -> Self {
        ChannelDensities {
            plus: vec![0.0; len],
            minus: vec![0.0; len],
        }
    }

    pub fn from_spinor(spinor: &SpinorField) -> Self {
        let mut out = Self::zeros(spinor.len());
        out.accumulate(spinor);
        out
    }

    pub fn accumulate(&mut self, spinor: &SpinorField) {
        for (acc, z) in self.plus.iter_mut().zip(&spinor.plus) {
            *acc += z.norm_sqr();
        }
        for (acc, z) in self.minus.iter_mut().zip(&spinor.minus) {
            *acc += z.norm_sqr();
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(p, m)| 0.5 * (p + m)).collect()
    }

    pub fn spin_density(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(p, m)| 0.5 * (p - m)).collect()
    }
}

/// Radial band `[inner, outer]` used for angular profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub inner: f64,
    pub outer: f64,
}

impl Band {
    pub fn new(inner: f64, outer: f64) -> Self {
        Band { inner, outer }
    }

    /// Default observation band: one packet width `w` downstream of the
    /// wire surface, `[1 + w/2, 1 + 3w/2]`.
    pub fn downstream(packet_width: f64) -> Self {
        Band::new(1.0 + 0.5 * packet_width, 1.0 + 1.5 * packet_width)
    }

    pub fn centre(&self) -> f64 {
        0.5 * (self.inner + self.outer)
    }

    fn rings<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = usize> + 'a {
        (0..grid.nr).filter(move |&i| {
            let r = grid.r_values[i];
            r >= self.inner && r <= self.outer
        })
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(1.0 < self.inner && self.inner < self.outer && self.outer < grid.r_max) {
            return Err(Error::Domain(format!(
                "band [{}, {}] must satisfy 1 < r1 < r2 < r_max = {}",
                self.inner, self.outer, grid.r_max
            )));
        }
        if self.rings(grid).next().is_none() {
            return Err(Error::Domain(format!(
                "band [{}, {}] contains no grid rings",
                self.inner, self.outer
            )));
        }
        Ok(())
    }
}

/// `P(θ_j) = Σ_{r_i ∈ band} ρ_ij r_i hr`.
pub fn angular_profile(density: &[f64], grid: &Grid, band: Band) -> Result<Vec<f64>> {
    grid.check_len(density.len(), "density")?;
    band.validate(grid)?;
    let mut profile = vec![0.0; grid.ntheta];
    for i in band.rings(grid) {
        let w = grid.r_values[i] * grid.hr;
        let ring = &density[i * grid.ntheta..(i + 1) * grid.ntheta];
        for (p, d) in profile.iter_mut().zip(ring) {
            *p += d * w;
        }
    }
    Ok(profile)
}

/// Minimum number of angular bins the window must span on each side of
/// the forward direction.
pub const MIN_WINDOW_BINS: usize = 5;

/// `V = 1 - P(0) / max_{|θ| ≤ window} P(θ)`; 1 for a perfect forward node.
pub fn forward_visibility(profile: &[f64], grid: &Grid, window: f64) -> Result<f64> {
    if profile.len() != grid.ntheta {
        return Err(Error::GridMismatch(format!(
            "profile has {} bins, grid has {} angles",
            profile.len(),
            grid.ntheta
        )));
    }
    let bins = (window / grid.htheta + 1e-9).floor() as usize;
    if bins < MIN_WINDOW_BINS {
        return Err(Error::Domain(format!(
            "window {window} rad spans {bins} bins per side, need {MIN_WINDOW_BINS}"
        )));
    }
    let n = grid.ntheta;
    let bins = bins.min((n - 1) / 2);
    let peak = (0..=bins)
        .flat_map(|k| [profile[k], profile[(n - k) % n]])
        .fold(0.0f64, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Undefined("angular profile vanishes inside the window".into()));
    }
    Ok(1.0 - profile[0] / peak)
}

/// Total-variation distance `½ ∫ |ρ_a - ρ_b| dA`.
pub fn adiabaticity_distance(rho_exact: &[f64], rho_adiabatic: &[f64], grid: &Grid) -> Result<f64> {
    grid.check_len(rho_exact.len(), "exact density")?;
    grid.check_len(rho_adiabatic.len(), "adiabatic density")?;
    let diff: Vec<f64> = rho_exact
        .iter()
        .zip(rho_adiabatic)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(0.5 * grid.integrate(&diff))
}

/// `∫ ρ dA` over the rings within `cells` radial spacings of `r_max`.
pub fn wall_population(density: &[f64], grid: &Grid, cells: usize) -> f64 {
    let first = grid.nr.saturating_sub(cells + 1);
    (first..grid.nr)
        .map(|i| {
            grid.quad_weights[i] * density[i * grid.ntheta..(i + 1) * grid.ntheta].iter().sum::<f64>()
        })
        .sum()
}

/// `∫ f dA` over a sector `|θ| ≤ half_angle` of a radial band.
pub fn sector_integral(f: &[f64], grid: &Grid, band: Band, half_angle: f64) -> f64 {
    let mut total = 0.0;
    for i in band.rings(grid) {
        let w = grid.quad_weights[i];
        for j in 0..grid.ntheta {
            let t = grid.theta_values[j];
            let dist = t.min(2.0 * std::f64::consts::PI - t);
            if dist <= half_angle + 1e-12 {
                total += w * f[grid.index(i, j)];
            }
        }
    }
    total
}

/// Mean `x` of the density over the forward half-plane `x > 0`, or `None`
/// when that half-plane is empty.
pub fn forward_centroid(density: &[f64], grid: &Grid) -> Option<f64> {
    let (mut mass, mut first) = (0.0, 0.0);
    for i in 0..grid.nr {
        let w = grid.quad_weights[i];
        for j in 0..grid.ntheta {
            let (x, _) = grid.xy(i, j);
            if x > 0.0 {
                let d = w * density[grid.index(i, j)];
                mass += d;
                first += d * x;
            }
        }
    }
    (mass > 0.0).then(|| first / mass)
}

/// Channel balance over the scattered region: the band restricted to the
/// forward half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinBalance {
    /// `∫ ½(n₊ - n₋) dA`.
    pub spin: f64,
    pub plus: f64,
    pub minus: f64,
}

impl SpinBalance {
    /// `n₋ / n₊`; infinite when the plus channel is absent.
    pub fn minus_to_plus(&self) -> f64 {
        self.minus / self.plus
    }
}

pub fn spin_balance(channels: &ChannelDensities, grid: &Grid, band: Band) -> Result<SpinBalance> {
    grid.check_len(channels.plus.len(), "plus density")?;
    grid.check_len(channels.minus.len(), "minus density")?;
    band.validate(grid)?;
    let half = std::f64::consts::FRAC_PI_2;
    Ok(SpinBalance {
        spin: sector_integral(&channels.spin_density(), grid, band, half),
        plus: sector_integral(&channels.plus, grid, band, half),
        minus: sector_integral(&channels.minus, grid, band, half),
    })
}

/// Centroid and spread of a density in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub total: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

pub fn moments(density: &[f64], grid: &Grid) -> Moments {
    let mut s = [0.0; 5];
    for i in 0..grid.nr {
        let w = grid.quad_weights[i];
        for j in 0..grid.ntheta {
            let (x, y) = grid.xy(i, j);
            let d = w * density[grid.index(i, j)];
            s[0] += d;
            s[1] += d * x;
            s[2] += d * y;
            s[3] += d * x * x;
            s[4] += d * y * y;
        }
    }
    let mean_x = s[1] / s[0];
    let mean_y = s[2] / s[0];
    Moments {
        total: s[0],
        mean_x,
        mean_y,
        var_x: s[3] / s[0] - mean_x * mean_x,
        var_y: s[4] / s[0] - mean_y * mean_y,
    }
}

/// `(⟨-i∂x⟩, ⟨-i∂y⟩)` using the grid's SBP and periodic first derivatives.
pub fn momentum_expectation(field: &[Complex64], grid: &Grid) -> (f64, f64) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    let mut dr = vec![Complex64::default(); grid.len()];
    let mut dth = vec![Complex64::default(); grid.len()];
    let mut col = vec![Complex64::default(); nr];
    let mut dcol = vec![Complex64::default(); nr];
    for j in 0..nt {
        for i in 0..nr {
            col[i] = field[i * nt + j];
        }
        grid.radial.d1.apply(&col, &mut dcol);
        for i in 0..nr {
            dr[i * nt + j] = dcol[i];
        }
    }
    let stencil = grid.angular.d1.map(|c| Complex64::new(c, 0.0));
    for i in 0..nr {
        crate::sbp::apply_periodic(&stencil, &field[i * nt..(i + 1) * nt], &mut dth[i * nt..(i + 1) * nt]);
    }
    let mut px = Vec::with_capacity(grid.len());
    let mut py = Vec::with_capacity(grid.len());
    for i in 0..nr {
        let r = grid.r_values[i];
        for j in 0..nt {
            let (s, c) = grid.theta_values[j].sin_cos();
            let k = i * nt + j;
            let dx = dr[k] * c - dth[k] * (s / r);
            let dy = dr[k] * s + dth[k] * (c / r);
            px.push(-Complex64::i() * dx);
            py.push(-Complex64::i() * dy);
        }
    }
    let norm = grid.norm_sq(field);
    (grid.inner(field, &px).re / norm, grid.inner(field, &py).re / norm)
}
