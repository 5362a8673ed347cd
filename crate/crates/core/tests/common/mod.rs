//! Helpers shared by the integration tests.
#![allow(dead_code)]

use abflux::hamiltonian::Hamiltonian;
use abflux::{field_profile, Grid, ModelTag};
use num_complex::Complex64;

pub const KAPPA: f64 = 28.98;

/// Grids for the convergence study: three doublings in both directions.
pub const REFINEMENT: [(usize, usize); 4] = [(41, 24), (81, 48), (161, 96), (321, 192)];

pub fn apply(h: &Hamiltonian, grid: &Grid, plus: &[Complex64], minus: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut op = vec![Complex64::default(); grid.len()];
    let mut om = vec![Complex64::default(); grid.len()];
    h.apply_operator(plus, minus, &mut op, &mut om);
    (op, om)
}

/// Smooth radial profile vanishing exactly at both walls: a Gaussian minus
/// the straight line through its wall values.
pub struct Profile {
    pub r_max: f64,
}

impl Profile {
    fn g(r: f64) -> [f64; 3] {
        let e = (-(r - 5.0) * (r - 5.0)).exp();
        [e, -2.0 * (r - 5.0) * e, (4.0 * (r - 5.0) * (r - 5.0) - 2.0) * e]
    }

    /// Value, first and second derivative.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        let (a, b) = (Self::g(1.0)[0], Self::g(self.r_max)[0]);
        let slope = (b - a) / (self.r_max - 1.0);
        let [g, g1, g2] = Self::g(r);
        [g - a - slope * (r - 1.0), g1 - slope, g2]
    }
}

/// Weighted L2 error of the discrete operator against the analytic one on
/// `G(r) e^{i m θ}` in both channels.
pub fn manufactured_error(tag: ModelTag, nr: usize, ntheta: usize) -> f64 {
    const M: f64 = 3.0;
    let r_max = 9.0;
    let grid = Grid::new(nr, ntheta, r_max).unwrap();
    let p = Profile { r_max };
    let mut phi = vec![Complex64::default(); grid.len()];
    let mut exact = [vec![Complex64::default(); grid.len()], vec![Complex64::default(); grid.len()]];
    let alpha = tag.alpha();
    let exact_model = tag == ModelTag::Exact;
    for i in 0..nr {
        let r = grid.r_values[i];
        let [g, g1, g2] = p.eval(r);
        let f = field_profile(r).unwrap();
        let mut base = -g2 - g1 / r + (M + alpha).powi(2) / (r * r) * g;
        if exact_model {
            base += 0.25 / (r * r) * g + (0.5 + M) / (r * r) * g;
        }
        for j in 0..ntheta {
            let k = grid.index(i, j);
            let e = Complex64::from_polar(1.0, M * grid.theta_values[j]);
            phi[k] = g * e;
            exact[0][k] = (base + KAPPA * f * g) * e;
            exact[1][k] = (base - KAPPA * f * g) * e;
        }
    }
    let h = Hamiltonian::new(&grid, tag, KAPPA);
    let (op, om) = apply(&h, &grid, &phi, &phi);
    let diff = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    (grid.norm_sq(&diff(&op, &exact[0])) + grid.norm_sq(&diff(&om, &exact[1]))).sqrt()
}


pub fn manufactured_errors(tag: ModelTag) -> Vec<f64> {
    REFINEMENT.iter().map(|&(nr, nt)| manufactured_error(tag, nr, nt)).collect()
}
