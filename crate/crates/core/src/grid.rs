use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sbp::{build_periodic, build_sbp, PeriodicStencils, SbpOperators};

/// Annular polar mesh `r ∈ [1, r_max]`, `θ ∈ [0, 2π)`, stored ring-major:
/// node `(i, j)` lives at `i * ntheta + j`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub nr: usize,
    pub ntheta: usize,
    pub r_max: f64,
    pub r_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub hr: f64,
    pub htheta: f64,
    /// Area weight `H_i r_i hθ` of every node on ring `i`.
    pub quad_weights: Vec<f64>,
    pub radial: SbpOperators,
    pub angular: PeriodicStencils,
}

impl Grid {
    pub fn new(nr: usize, ntheta: usize, r_max: f64) -> Result<Self> {
        if !(r_max > 1.0 && r_max.is_finite()) {
            return Err(Error::Domain(format!("r_max must exceed the wire radius 1 (got {r_max})")));
        }
        if nr < 2 {
            return Err(Error::Domain(format!("nr must be at least 2 (got {nr})")));
        }
        if ntheta == 0 {
            return Err(Error::Domain("ntheta must be positive".into()));
        }
        let hr = (r_max - 1.0) / (nr - 1) as f64;
        let htheta = 2.0 * PI / ntheta as f64;
        let radial = build_sbp(nr, hr)?;
        let angular = build_periodic(ntheta, htheta)?;
        let r_values: Vec<f64> = (0..nr)
            .map(|i| if i == nr - 1 { r_max } else { 1.0 + i as f64 * hr })
            .collect();
        let theta_values = (0..ntheta).map(|j| j as f64 * htheta).collect();
        let quad_weights = r_values
            .iter()
            .zip(&radial.norm_weights)
            .map(|(r, h)| r * h * htheta)
            .collect();
        Ok(Grid {
            nr,
            ntheta,
            r_max,
            r_values,
            theta_values,
            hr,
            htheta,
            quad_weights,
            radial,
            angular,
        })
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }

    /// Cartesian position of node `(i, j)`.
    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        let (s, c) = self.theta_values[j].sin_cos();
        (self.r_values[i] * c, self.r_values[i] * s)
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.nr == other.nr && self.ntheta == other.ntheta && self.r_max == other.r_max
    }

    pub fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what} has {len} values, grid {}x{} needs {}",
                self.nr,
                self.ntheta,
                self.len()
            )))
        }
    }

    /// `∫ f dA` with the SBP-weighted quadrature.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.chunks_exact(self.ntheta)
            .zip(&self.quad_weights)
            .map(|(ring, w)| w * ring.iter().sum::<f64>())
            .sum()
    }

    /// `⟨u, v⟩ = ∫ ū v dA`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.chunks_exact(self.ntheta)
            .zip(v.chunks_exact(self.ntheta))
            .zip(&self.quad_weights)
            .map(|((a, b), w)| {
                a.iter().zip(b).map(|(a, b)| a.conj() * b).sum::<Complex64>() * w
            })
            .sum()
    }

    pub fn norm_sq(&self, u: &[Complex64]) -> f64 {
        u.chunks_exact(self.ntheta)
            .zip(&self.quad_weights)
            .map(|(ring, w)| w * ring.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Index of the θ node closest to `theta` (mod 2π).
    pub fn nearest_theta(&self, theta: f64) -> usize {
        let t = theta.rem_euclid(2.0 * PI);
        ((t / self.htheta).round() as usize) % self.ntheta
    }

    pub fn nearest_r(&self, r: f64) -> usize {
        (((r - 1.0) / self.hr).round().max(0.0) as usize).min(self.nr - 1)
    }
}
