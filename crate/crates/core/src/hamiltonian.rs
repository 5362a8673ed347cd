//! Right-hand sides of the two-channel Schrödinger equations on the
//! annular grid, initial wave packets and the spin-frame projection.
//!
//! In wire-radius units each channel obeys
//!
//! ```text
//! i ∂s φ± = [-∂r² - (1/r)∂r - (1/r²)(∂θ + iα)² ± κ f(r)] φ±      (adiabatic)
//! ```
//!
//! and the exact model adds the Born-Huang term `1/(4r²)` and the channel
//! coupling `(1/(2r²) - (i/r²)∂θ) φ∓`, with `α = ½`.
//!
//! The radial part is applied as `R^{-1/2} (-D2 + P) R^{1/2} - 1/(4r²)`,
//! which equals `-∂r² - (1/r)∂r` for smooth fields and makes the whole
//! operator self-adjoint in the inner product weighted by `H_i r_i hθ`.
//! `P` is the Dirichlet SAT at both walls.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ModelTag, SpinorField};
use crate::grid::Grid;
use crate::sbp::{sat_dirichlet, Side, CLOSURE_WIDTH};
use crate::units::DimensionlessParams;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radial profile of the wire's field: `1/r` outside, `r` inside.
pub fn field_profile(r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!("radius must be non-negative (got {r})")));
    }
    Ok(if r >= 1.0 { 1.0 / r } else { r })
}

/// Line integral of the Mead-Berry potential `A = -(α/r) e_θ` around ring `i`.
pub fn loop_flux(grid: &Grid, alpha: f64, ring: usize) -> f64 {
    let r = grid.r_values[ring];
    let a_theta = -alpha / r;
    (0..grid.ntheta).map(|_| a_theta * r * grid.htheta).sum()
}

#[derive(Debug, Clone)]
struct RadialRow {
    start: usize,
    len: usize,
    coef: [f64; CLOSURE_WIDTH],
}

/// The discretised operator for one model on one grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    nr: usize,
    ntheta: usize,
    tag: ModelTag,
    kappa: f64,
    rows: Vec<RadialRow>,
    inv_r2: Vec<f64>,
    /// Diagonal potential per ring, `[plus, minus]`.
    potential: [Vec<f64>; 2],
    /// `d2θ + 2iα d1θ`; enters as `-(1/r²)` times this.
    angular: [Complex64; 7],
    /// `½ δ - i d1θ`; enters as `(1/r²)` times this on the other channel.
    coupling: [Complex64; 7],
}

impl Hamiltonian {
    pub fn new(grid: &Grid, tag: ModelTag, kappa: f64) -> Self {
        Self::build(grid, tag, kappa, true)
    }

    /// Same operator without the wall penalties; only useful as a negative
    /// control, the result is neither self-adjoint nor stable.
    pub fn without_wall_penalty(grid: &Grid, tag: ModelTag, kappa: f64) -> Self {
        Self::build(grid, tag, kappa, false)
    }

    fn build(grid: &Grid, tag: ModelTag, kappa: f64, walls: bool) -> Self {
        let nr = grid.nr;
        let ops = &grid.radial;
        let mut dense_rows: Vec<(usize, Vec<f64>)> = (0..nr)
            .map(|i| {
                let row = ops.d2.row(i);
                (row.start, row.coefficients.iter().map(|c| -c).collect())
            })
            .collect();
        if walls {
            for side in [Side::Inner, Side::Outer] {
                let sat = sat_dirichlet(ops, side, 0.0);
                for (i, w) in sat.weights {
                    let (start, coef) = &mut dense_rows[i];
                    let k = sat.boundary_index - *start;
                    coef[k] += w;
                }
            }
        }
        let sqrt_r: Vec<f64> = grid.r_values.iter().map(|r| r.sqrt()).collect();
        let rows = dense_rows
            .into_iter()
            .enumerate()
            .map(|(i, (start, c))| {
                let mut coef = [0.0; CLOSURE_WIDTH];
                for (k, v) in c.iter().enumerate() {
                    coef[k] = v * sqrt_r[start + k] / sqrt_r[i];
                }
                RadialRow {
                    start,
                    len: c.len(),
                    coef,
                }
            })
            .collect();

        let alpha = tag.alpha();
        let born_huang = if tag == ModelTag::Exact { 0.25 } else { 0.0 };
        let inv_r2: Vec<f64> = grid.r_values.iter().map(|r| 1.0 / (r * r)).collect();
        let potential = [1.0, -1.0].map(|sign: f64| {
            grid.r_values
                .iter()
                .zip(&inv_r2)
                .map(|(&r, &ir2)| {
                    let f = field_profile(r).expect("grid radii are >= 1");
                    (alpha * alpha - 0.25 + born_huang) * ir2 + sign * kappa * f
                })
                .collect()
        });
        let ang = &grid.angular;
        let mut angular = [Complex64::default(); 7];
        let mut coupling = [Complex64::default(); 7];
        for k in 0..7 {
            angular[k] = Complex64::new(ang.d2[k], 2.0 * alpha * ang.d1[k]);
            coupling[k] = Complex64::new(if k == 3 { 0.5 } else { 0.0 }, -ang.d1[k]);
        }
        Hamiltonian {
            nr,
            ntheta: grid.ntheta,
            tag,
            kappa,
            rows,
            inv_r2,
            potential,
            angular,
            coupling,
        }
    }

    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_coupled(&self) -> bool {
        self.tag == ModelTag::Exact
    }

    fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    /// `out = scale · (H_diag u + H_offdiag w)` for one channel, where
    /// `channel` is 0 for plus and 1 for minus.
    fn kernel(
        &self,
        channel: usize,
        u: &[Complex64],
        other: Option<&[Complex64]>,
        scale: Complex64,
        out: &mut [Complex64],
    ) {
        let nt = self.ntheta;
        assert_eq!(u.len(), self.len());
        assert_eq!(out.len(), self.len());
        let potential = &self.potential[channel];
        out.par_chunks_mut(nt).enumerate().for_each(|(i, ring_out)| {
            let ring = &u[i * nt..(i + 1) * nt];
            let v = potential[i];
            for (o, z) in ring_out.iter_mut().zip(ring) {
                *o = z * v;
            }
            accumulate_periodic(&self.angular, -self.inv_r2[i], ring, ring_out);
            let row = &self.rows[i];
            for m in 0..row.len {
                let c = row.coef[m];
                let src = &u[(row.start + m) * nt..(row.start + m + 1) * nt];
                for (o, z) in ring_out.iter_mut().zip(src) {
                    *o += z * c;
                }
            }
            if let Some(w) = other {
                let wring = &w[i * nt..(i + 1) * nt];
                accumulate_periodic(&self.coupling, self.inv_r2[i], wring, ring_out);
            }
            if scale != Complex64::new(1.0, 0.0) {
                ring_out.iter_mut().for_each(|o| *o *= scale);
            }
        });
    }

    /// Applies the Hamiltonian (not the time derivative) to a spinor.
    pub fn apply_operator(
        &self,
        plus: &[Complex64],
        minus: &[Complex64],
        out_plus: &mut [Complex64],
        out_minus: &mut [Complex64],
    ) {
        self.apply_scaled(plus, minus, out_plus, out_minus, Complex64::new(1.0, 0.0));
    }

    /// Time derivative `∂s φ = -i H φ` of both channels.
    pub fn rhs(
        &self,
        plus: &[Complex64],
        minus: &[Complex64],
        out_plus: &mut [Complex64],
        out_minus: &mut [Complex64],
    ) {
        self.apply_scaled(plus, minus, out_plus, out_minus, -I);
    }

    fn apply_scaled(
        &self,
        plus: &[Complex64],
        minus: &[Complex64],
        out_plus: &mut [Complex64],
        out_minus: &mut [Complex64],
        scale: Complex64,
    ) {
        let coupled = self.is_coupled();
        self.kernel(0, plus, coupled.then_some(minus), scale, out_plus);
        self.kernel(1, minus, coupled.then_some(plus), scale, out_minus);
    }

    /// Applies a single decoupled channel; `sign` is +1 or -1.
    pub fn apply_channel(&self, u: &[Complex64], sign: i32, out: &mut [Complex64], time_derivative: bool) {
        let channel = if sign >= 0 { 0 } else { 1 };
        let scale = if time_derivative { -I } else { Complex64::new(1.0, 0.0) };
        self.kernel(channel, u, None, scale, out);
    }
}

/// `out[j] += scale · Σ_k stencil[k] src[j + k - 3]` on a periodic ring.
#[inline]
fn accumulate_periodic(stencil: &[Complex64; 7], scale: f64, src: &[Complex64], out: &mut [Complex64]) {
    let n = src.len();
    let s = stencil.map(|c| c * scale);
    let edge = |j: usize| -> Complex64 {
        let mut acc = Complex64::default();
        for (k, c) in s.iter().enumerate() {
            acc += c * src[(j + n + k - 3) % n];
        }
        acc
    };
    for j in (0..3).chain(n - 3..n) {
        out[j] += edge(j);
    }
    for (j, o) in out.iter_mut().enumerate().take(n - 3).skip(3) {
        let w = &src[j - 3..j + 4];
        *o += s[0] * w[0] + s[1] * w[1] + s[2] * w[2] + s[3] * w[3] + s[4] * w[4] + s[5] * w[5] + s[6] * w[6];
    }
}

/// `∂s φ` of one adiabatic channel.
pub fn apply_adiabatic_rhs(
    field: &[Complex64],
    grid: &Grid,
    kappa: f64,
    alpha: f64,
    channel_sign: i32,
) -> Result<Vec<Complex64>> {
    grid.check_len(field.len(), "field")?;
    if channel_sign != 1 && channel_sign != -1 {
        return Err(Error::Domain(format!("channel sign must be ±1 (got {channel_sign})")));
    }
    let h = Hamiltonian::new(grid, ModelTag::adiabatic(alpha)?, kappa);
    let mut out = vec![Complex64::default(); grid.len()];
    h.apply_channel(field, channel_sign, &mut out, true);
    Ok(out)
}

/// `∂s φ±` of the exact coupled equations.
pub fn apply_exact_rhs(spinor: &SpinorField, grid: &Grid, kappa: f64) -> Result<SpinorField> {
    spinor.check(grid)?;
    let h = Hamiltonian::new(grid, ModelTag::Exact, kappa);
    let mut out = SpinorField::zeros(grid, ModelTag::Exact);
    h.rhs(&spinor.plus, &spinor.minus, &mut out.plus, &mut out.minus);
    Ok(out)
}

/// Normalised Gaussian `exp(-|r - r₀|²/(4σ²)) exp(i k₀ x)` centred at `(x0, 0)`.
pub fn init_gaussian(grid: &Grid, dp: &DimensionlessParams) -> Result<Vec<Complex64>> {
    gaussian_packet(grid, dp.x0, 0.0, dp.sigma, dp.k0, 0.0)
}

/// General Gaussian packet centred at `(x0, y0)` with mean momentum `(kx, ky)`.
pub fn gaussian_packet(
    grid: &Grid,
    x0: f64,
    y0: f64,
    sigma: f64,
    kx: f64,
    ky: f64,
) -> Result<Vec<Complex64>> {
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("packet width must be positive (got {sigma})")));
    }
    let d = x0.hypot(y0);
    if d - 3.0 * sigma < 1.0 {
        return Err(Error::Config(format!(
            "packet at distance {d} with sigma {sigma} overlaps the wire (need >= 3 sigma clearance)"
        )));
    }
    if d + 3.0 * sigma > grid.r_max {
        return Err(Error::Config(format!(
            "packet at distance {d} with sigma {sigma} reaches the outer boundary r_max = {}",
            grid.r_max
        )));
    }
    let mut field = vec![Complex64::default(); grid.len()];
    for i in 0..grid.nr {
        for j in 0..grid.ntheta {
            let (x, y) = grid.xy(i, j);
            let env = (-((x - x0).powi(2) + (y - y0).powi(2)) / (4.0 * sigma * sigma)).exp();
            field[grid.index(i, j)] = Complex64::from_polar(env, kx * x + ky * y);
        }
    }
    // Dirichlet walls.
    for j in 0..grid.ntheta {
        field[grid.index(0, j)] = Complex64::default();
        field[grid.index(grid.nr - 1, j)] = Complex64::default();
    }
    let norm = grid.norm_sq(&field).sqrt();
    field.iter_mut().for_each(|z| *z /= norm);
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncomingSpin {
    Up,
    Down,
}

/// Decomposes `spatial ⊗ |spin⟩` in the local frame
/// `χ±(θ) = (∓i|↑⟩ + e^{iθ}|↓⟩)/√2`.
pub fn project_spin_basis(spatial: &[Complex64], spin: IncomingSpin, grid: &Grid) -> SpinorField {
    let mut out = SpinorField::zeros(grid, ModelTag::Exact);
    for i in 0..grid.nr {
        for j in 0..grid.ntheta {
            let k = grid.index(i, j);
            let (p, m) = match spin {
                IncomingSpin::Up => (I * FRAC_1_SQRT_2, -I * FRAC_1_SQRT_2),
                IncomingSpin::Down => {
                    let c = Complex64::from_polar(FRAC_1_SQRT_2, -grid.theta_values[j]);
                    (c, c)
                }
            };
            out.plus[k] = p * spatial[k];
            out.minus[k] = m * spatial[k];
        }
    }
    out
}

/// Recombines channel amplitudes into lab-frame `(ψ↑, ψ↓)`.
pub fn lab_frame(spinor: &SpinorField, grid: &Grid) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut up = vec![Complex64::default(); grid.len()];
    let mut down = vec![Complex64::default(); grid.len()];
    for i in 0..grid.nr {
        for j in 0..grid.ntheta {
            let k = grid.index(i, j);
            let phase = Complex64::from_polar(FRAC_1_SQRT_2, grid.theta_values[j]);
            up[k] = (-I * spinor.plus[k] + I * spinor.minus[k]) * FRAC_1_SQRT_2;
            down[k] = phase * (spinor.plus[k] + spinor.minus[k]);
        }
    }
    (up, down)
}
