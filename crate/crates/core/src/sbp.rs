//! Sixth-order diagonal-norm summation-by-parts operators on a uniform
//! line, periodic central stencils for the angular direction, and
//! Dirichlet SAT penalties.
//!
//! Boundary closures are the (6,3) family: interior stencils are
//! sixth-order, the six boundary rows at each end are exact on cubics
//! (`d1`) and on quartics (`d2`). Everything is stored as banded stencils
//! and applied matrix-free.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Rows at each end that carry a boundary closure.
pub const CLOSURE_ROWS: usize = 6;
/// Columns touched by a closure row.
pub const CLOSURE_WIDTH: usize = 9;
/// Smallest line that fits both closures.
pub const MIN_POINTS: usize = 2 * CLOSURE_ROWS;
/// Smallest periodic ring for a 7-point stencil.
pub const MIN_PERIODIC_POINTS: usize = 8;

/// Borrowing fraction used for the SAT strength. The largest `β` with
/// `M - β h s sᵀ ⪰ 0` for the `d2` closure below is about 0.152.
pub const SAT_BORROWING: f64 = 0.12;

/// Diagonal norm weights of the boundary rows, in units of `h`.
const NORM: [f64; CLOSURE_ROWS] = [
    13649.0 / 43200.0,
    12013.0 / 8640.0,
    2711.0 / 4320.0,
    5359.0 / 4320.0,
    7877.0 / 8640.0,
    43801.0 / 43200.0,
];

/// `Q = H d1` boundary block; `Q + Qᵀ = diag(-1, 0, .., 0, 1)`.
const Q_CLOSURE: [[f64; CLOSURE_WIDTH]; CLOSURE_ROWS] = [
    [-1.0 / 2.0, 104009.0 / 172800.0, 30443.0 / 259200.0, -33311.0 / 86400.0, 5621.0 / 28800.0, -601.0 / 20736.0, 0.0, 0.0, 0.0],
    [-104009.0 / 172800.0, 0.0, -311.0 / 51840.0, 6743.0 / 5760.0, -24337.0 / 34560.0, 36661.0 / 259200.0, 0.0, 0.0, 0.0],
    [-30443.0 / 259200.0, 311.0 / 51840.0, 0.0, -2231.0 / 5184.0, 41287.0 / 51840.0, -7333.0 / 28800.0, 0.0, 0.0, 0.0],
    [33311.0 / 86400.0, -6743.0 / 5760.0, 2231.0 / 5184.0, 0.0, 4147.0 / 17280.0, 25427.0 / 259200.0, 1.0 / 60.0, 0.0, 0.0],
    [-5621.0 / 28800.0, 24337.0 / 34560.0, -41287.0 / 51840.0, -4147.0 / 17280.0, 0.0, 342523.0 / 518400.0, -3.0 / 20.0, 1.0 / 60.0, 0.0],
    [601.0 / 20736.0, -36661.0 / 259200.0, 7333.0 / 28800.0, -25427.0 / 259200.0, -342523.0 / 518400.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
];

/// `d2 = H⁻¹(-M + B S)` boundary block, already divided by the norm.
const D2_CLOSURE: [[f64; CLOSURE_WIDTH]; CLOSURE_ROWS] = [
    [117050.0 / 40947.0, -457307.0 / 54596.0, 365209.0 / 40947.0, -334597.0 / 81894.0, 8547.0 / 13649.0, 9515.0 / 163788.0, 0.0, 0.0, 0.0],
    [233893.0 / 240260.0, -70306.0 / 36039.0, 77003.0 / 72078.0, -2823.0 / 12013.0, 28951.0 / 144156.0, -10241.0 / 180195.0, 0.0, 0.0, 0.0],
    [-23591.0 / 81330.0, 77003.0 / 32532.0, -12382.0 / 2711.0, 55315.0 / 16266.0, -18169.0 / 16266.0, 11209.0 / 54220.0, 0.0, 0.0, 0.0],
    [11003.0 / 321540.0, -2823.0 / 10718.0, 2405.0 / 1398.0, -47134.0 / 16077.0, 34169.0 / 21436.0, -26099.0 / 160770.0, 48.0 / 5359.0, 0.0, 0.0],
    [-2253.0 / 39385.0, 28951.0 / 94524.0, -18169.0 / 23631.0, 34169.0 / 15754.0, -73504.0 / 23631.0, 762671.0 / 472620.0, -1296.0 / 7877.0, 96.0 / 7877.0, 0.0],
    [9515.0 / 525612.0, -10241.0 / 131403.0, 11209.0 / 87602.0, -26099.0 / 131403.0, 762671.0 / 525612.0, -116640.0 / 43801.0, 64800.0 / 43801.0, -6480.0 / 43801.0, 480.0 / 43801.0],
];

/// Central sixth-order first derivative, offsets -3..=3.
pub const D1_INTERIOR: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];

/// Central sixth-order second derivative, offsets -3..=3.
pub const D2_INTERIOR: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// Fourth-order one-sided first derivative at the left end.
const BOUNDARY_D1: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0];

/// One row of a banded operator: first column and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub start: usize,
    pub coefficients: Vec<f64>,
}

/// A banded operator with identical closures at both ends, mirrored with
/// `parity` (-1 for odd derivatives, +1 for even ones).
#[derive(Debug, Clone)]
pub struct BandedOperator {
    n: usize,
    scale: f64,
    interior: [f64; 7],
    closure: [[f64; CLOSURE_WIDTH]; CLOSURE_ROWS],
    parity: f64,
}

impl BandedOperator {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, i: usize) -> Row {
        let n = self.n;
        assert!(i < n, "row {i} out of range for n = {n}");
        if i < CLOSURE_ROWS {
            Row {
                start: 0,
                coefficients: self.closure[i].iter().map(|c| c * self.scale).collect(),
            }
        } else if i >= n - CLOSURE_ROWS {
            let k = n - 1 - i;
            Row {
                start: n - CLOSURE_WIDTH,
                coefficients: self.closure[k]
                    .iter()
                    .rev()
                    .map(|c| self.parity * c * self.scale)
                    .collect(),
            }
        } else {
            Row {
                start: i - 3,
                coefficients: self.interior.iter().map(|c| c * self.scale).collect(),
            }
        }
    }

    pub fn apply<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.n;
        assert_eq!(u.len(), n);
        assert_eq!(out.len(), n);
        for (i, c) in self.closure.iter().enumerate() {
            let mut acc = T::default();
            for (j, &cj) in c.iter().enumerate() {
                acc = acc + u[j] * cj;
            }
            out[i] = acc * self.scale;

            let mut acc = T::default();
            for (j, &cj) in c.iter().enumerate() {
                acc = acc + u[n - 1 - j] * cj;
            }
            out[n - 1 - i] = acc * (self.parity * self.scale);
        }
        for i in CLOSURE_ROWS..n - CLOSURE_ROWS {
            let mut acc = T::default();
            for (k, &ck) in self.interior.iter().enumerate() {
                acc = acc + u[i + k - 3] * ck;
            }
            out[i] = acc * self.scale;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let mut dense = vec![0.0; self.n];
                for (k, c) in row.coefficients.iter().enumerate() {
                    dense[row.start + k] = *c;
                }
                dense
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SbpOperators {
    pub n: usize,
    pub h: f64,
    /// Diagonal of the norm matrix `H`.
    pub norm_weights: Vec<f64>,
    pub d1: BandedOperator,
    pub d2: BandedOperator,
    /// One-sided first-derivative rows `[left, right]` used by `d2`'s
    /// boundary term and by the SAT penalty.
    pub boundary_derivative: [Row; 2],
}

pub fn build_sbp(n: usize, h: f64) -> Result<SbpOperators> {
    if n < MIN_POINTS {
        return Err(Error::Construction(format!(
            "sixth-order SBP closures need at least {MIN_POINTS} points (got {n})"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Construction(format!("spacing must be positive (got {h})")));
    }

    let mut norm_weights = vec![h; n];
    for (i, w) in NORM.iter().enumerate() {
        norm_weights[i] = w * h;
        norm_weights[n - 1 - i] = w * h;
    }

    let mut d1_closure = Q_CLOSURE;
    for (row, w) in d1_closure.iter_mut().zip(NORM) {
        row.iter_mut().for_each(|c| *c /= w);
    }

    let left = Row {
        start: 0,
        coefficients: BOUNDARY_D1.iter().map(|c| c / h).collect(),
    };
    let right = Row {
        start: n - BOUNDARY_D1.len(),
        coefficients: BOUNDARY_D1.iter().rev().map(|c| -c / h).collect(),
    };

    Ok(SbpOperators {
        n,
        h,
        norm_weights,
        d1: BandedOperator {
            n,
            scale: 1.0 / h,
            interior: D1_INTERIOR,
            closure: d1_closure,
            parity: -1.0,
        },
        d2: BandedOperator {
            n,
            scale: 1.0 / (h * h),
            interior: D2_INTERIOR,
            closure: D2_CLOSURE,
            parity: 1.0,
        },
        boundary_derivative: [left, right],
    })
}

/// Circulant sixth-order stencils on a periodic ring.
#[derive(Debug, Clone)]
pub struct PeriodicStencils {
    pub n: usize,
    pub h: f64,
    /// `d1` coefficients for offsets -3..=3, scaled by `1/h`.
    pub d1: [f64; 7],
    /// `d2` coefficients for offsets -3..=3, scaled by `1/h²`.
    pub d2: [f64; 7],
}

pub fn build_periodic(n: usize, h: f64) -> Result<PeriodicStencils> {
    if n < MIN_PERIODIC_POINTS {
        return Err(Error::Construction(format!(
            "periodic stencils need at least {MIN_PERIODIC_POINTS} points (got {n})"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Construction(format!("spacing must be positive (got {h})")));
    }
    Ok(PeriodicStencils {
        n,
        h,
        d1: D1_INTERIOR.map(|c| c / h),
        d2: D2_INTERIOR.map(|c| c / (h * h)),
    })
}

/// Applies a 7-point stencil (offsets -3..=3) on a periodic ring.
#[inline]
pub fn apply_periodic<T>(stencil: &[T; 7], u: &[T], out: &mut [T])
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    let n = u.len();
    debug_assert_eq!(out.len(), n);
    let at = |j: usize| -> T {
        let mut acc = T::default();
        for (k, &c) in stencil.iter().enumerate() {
            acc = acc + c * u[(j + n + k - 3) % n];
        }
        acc
    };
    for j in (0..3).chain(n - 3..n) {
        out[j] = at(j);
    }
    for j in 3..n - 3 {
        let w = &u[j - 3..j + 4];
        let mut acc = T::default();
        for k in 0..7 {
            acc = acc + stencil[k] * w[k];
        }
        out[j] = acc;
    }
}

impl PeriodicStencils {
    pub fn apply_d1(&self, u: &[f64], out: &mut [f64]) {
        apply_periodic(&self.d1, u, out);
    }

    pub fn apply_d2(&self, u: &[f64], out: &mut [f64]) {
        apply_periodic(&self.d2, u, out);
    }

    pub fn circulant(stencil: &[f64; 7], n: usize) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (k, c) in stencil.iter().enumerate() {
                row[(i + n + k - 3) % n] += c;
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

/// Weak Dirichlet condition `u_b = g` for the operator `-d²/dx²`.
///
/// With `L = -d2` the penalised operator is `L + P`, where
/// `P u = H⁻¹ (τ e_b ∓ s_b)(u_b - g)` and `s_b` is the one-sided boundary
/// derivative. `H (L + P)` is symmetric for every real `τ`; for
/// `τ ≥ 1/(β h)` it is also positive semidefinite, `β` being the
/// borrowing constant of `d2`. For the Schrödinger equation the term
/// enters the right-hand side as `-i P u`.
#[derive(Debug, Clone)]
pub struct SatPenalty<T> {
    pub side: Side,
    pub boundary_index: usize,
    pub target: T,
    pub tau: f64,
    /// `(row, weight)` pairs of `H⁻¹ (τ e_b ∓ s_b)`.
    pub weights: Vec<(usize, f64)>,
}

/// Penalty strength used by [`sat_dirichlet`].
pub fn sat_strength(h: f64) -> f64 {
    1.0 / (SAT_BORROWING * h)
}

pub fn sat_dirichlet<T: Copy>(ops: &SbpOperators, side: Side, target: T) -> SatPenalty<T> {
    let tau = sat_strength(ops.h);
    let n = ops.n;
    let (b, row, sign) = match side {
        Side::Inner => (0, &ops.boundary_derivative[0], 1.0),
        Side::Outer => (n - 1, &ops.boundary_derivative[1], -1.0),
    };
    let mut dense = vec![0.0; n];
    dense[b] += tau;
    for (k, c) in row.coefficients.iter().enumerate() {
        dense[row.start + k] += sign * c;
    }
    let weights = dense
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, w)| (i, w / ops.norm_weights[i]))
        .collect();
    SatPenalty {
        side,
        boundary_index: b,
        target,
        tau,
        weights,
    }
}

impl<T> SatPenalty<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::AddAssign + Mul<f64, Output = T>,
{
    /// Adds `P (u_b - g)` to `out`.
    pub fn apply(&self, u: &[T], out: &mut [T]) {
        let mismatch = u[self.boundary_index] - self.target;
        for &(i, w) in &self.weights {
            out[i] += mismatch * w;
        }
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense_apply(m: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(build_sbp(11, 0.1).is_err());
        assert!(build_sbp(12, 0.1).is_ok());
        assert!(build_periodic(7, 0.1).is_err());
        assert!(build_periodic(8, 0.1).is_ok());
    }

    #[test]
    fn sbp_identity_holds() {
        for n in [12, 16, 64, 256] {
            let h = 1.0 / (n - 1) as f64;
            let ops = build_sbp(n, h).unwrap();
            let d1 = ops.d1.to_dense();
            for i in 0..n {
                for j in 0..n {
                    let q = ops.norm_weights[i] * d1[i][j] + ops.norm_weights[j] * d1[j][i];
                    let b = match (i, j) {
                        (0, 0) => -1.0,
                        _ if i == n - 1 && j == n - 1 => 1.0,
                        _ => 0.0,
                    };
                    assert!((q - b).abs() <= 1e-14, "n={n} ({i},{j}): {q}");
                }
            }
        }
    }

    #[test]
    fn d2_is_symmetric_negative_plus_boundary_term() {
        // H d2 - B S must be symmetric.
        let n = 20;
        let h = 0.3;
        let ops = build_sbp(n, h).unwrap();
        let d2 = ops.d2.to_dense();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = ops.norm_weights[i] * d2[i][j];
            }
        }
        let [left, right] = &ops.boundary_derivative;
        for (k, c) in left.coefficients.iter().enumerate() {
            m[0][left.start + k] += c;
        }
        for (k, c) in right.coefficients.iter().enumerate() {
            m[n - 1][right.start + k] -= c;
        }
        for i in 0..n {
            for j in 0..n {
                assert!((m[i][j] - m[j][i]).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    fn exactness(op: &BandedOperator, x: &[f64], deriv: usize, max_deg: usize, rows: std::ops::Range<usize>) {
        let dense = op.to_dense();
        for p in 0..=max_deg as i32 {
            let u: Vec<f64> = x.iter().map(|x| x.powi(p)).collect();
            let du = dense_apply(&dense, &u);
            for i in rows.clone() {
                let exact = match deriv {
                    1 if p >= 1 => p as f64 * x[i].powi(p - 1),
                    2 if p >= 2 => (p * (p - 1)) as f64 * x[i].powi(p - 2),
                    _ => 0.0,
                };
                let scale = 1.0 + exact.abs() + x[i].abs().powi(p);
                assert!(
                    (du[i] - exact).abs() <= 1e-12 * scale * 10f64.powi(p),
                    "deriv {deriv} deg {p} row {i}: {} vs {exact}",
                    du[i]
                );
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        let n = 40;
        let h = 0.05;
        let x: Vec<f64> = (0..n).map(|i| 0.3 + i as f64 * h).collect();
        let ops = build_sbp(n, h).unwrap();
        exactness(&ops.d1, &x, 1, 3, 0..n);
        exactness(&ops.d1, &x, 1, 6, CLOSURE_ROWS..n - CLOSURE_ROWS);
        exactness(&ops.d2, &x, 2, 4, 0..n);
        exactness(&ops.d2, &x, 2, 7, 9..n - 9);
    }

    #[test]
    fn constants_and_lines() {
        let n = 30;
        let h = 0.1;
        let ops = build_sbp(n, h).unwrap();
        let ones = vec![1.0; n];
        let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let mut out = vec![0.0; n];
        ops.d1.apply(&ones, &mut out);
        out.iter().for_each(|v| assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12));
        ops.d1.apply(&x, &mut out);
        out.iter().for_each(|v| assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12));
    }

    #[test]
    fn banded_apply_matches_dense() {
        let n = 23;
        let ops = build_sbp(n, 0.17).unwrap();
        let u: Vec<f64> = (0..n).map(|i| (0.37 * i as f64).sin() + 0.1 * i as f64).collect();
        for op in [&ops.d1, &ops.d2] {
            let mut out = vec![0.0; n];
            op.apply(&u, &mut out);
            let dense = dense_apply(&op.to_dense(), &u);
            for (a, b) in out.iter().zip(&dense) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-11);
            }
        }
    }

    /// Max error of d2 on sin(fx) over `[0, 1]`, split into boundary rows and
    /// the rest.
    fn d2_sin_error(n: usize, f: f64) -> (f64, f64) {
        let h = 1.0 / (n - 1) as f64;
        let ops = build_sbp(n, h).unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let u: Vec<f64> = x.iter().map(|x| (f * x).sin()).collect();
        let mut out = vec![0.0; n];
        ops.d2.apply(&u, &mut out);
        let mut boundary = 0.0f64;
        let mut interior = 0.0f64;
        for i in 0..n {
            let e = (out[i] + f * f * (f * x[i]).sin()).abs();
            if i < CLOSURE_ROWS || i >= n - CLOSURE_ROWS {
                boundary = boundary.max(e);
            } else {
                interior = interior.max(e);
            }
        }
        (boundary, interior)
    }

    #[test]
    fn d2_convergence_orders() {
        // Interior errors reach round-off (eps/h²) long before the boundary
        // rows are asymptotic, so the two rates use different grid pairs.
        // A higher frequency keeps the interior pair clear of round-off.
        let (_, i1) = d2_sin_error(31, 6.0);
        let (_, i2) = d2_sin_error(61, 6.0);
        let (b1, _) = d2_sin_error(81, 2.0);
        let (b2, _) = d2_sin_error(161, 2.0);
        let boundary_order = (b1 / b2).log2();
        let interior_order = (i1 / i2).log2();
        // The boundary estimate approaches 3 from below (2.9989 at 41/81).
        assert!(boundary_order >= 2.99, "boundary order {boundary_order}");
        // Likewise the interior rate approaches 6 from below (5.993 here).
        assert!(interior_order >= 5.99, "interior order {interior_order}");
    }

    #[test]
    fn periodic_d1_on_sine() {
        let n = 64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let p = build_periodic(n, h).unwrap();
        let th: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        let u: Vec<f64> = th.iter().map(|t| t.sin()).collect();
        let mut out = vec![0.0; n];
        p.apply_d1(&u, &mut out);
        for (o, t) in out.iter().zip(&th) {
            assert!((o - t.cos()).abs() < 1e-6);
        }
        p.apply_d1(&vec![3.0; n], &mut out);
        out.iter().for_each(|v| assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12));
    }

    #[test]
    fn periodic_structure() {
        let n = 12;
        let p = build_periodic(n, 0.4).unwrap();
        let d1 = PeriodicStencils::circulant(&p.d1, n);
        let d2 = PeriodicStencils::circulant(&p.d2, n);
        for i in 0..n {
            assert_abs_diff_eq!(d1[i].iter().sum::<f64>(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d2[i].iter().sum::<f64>(), 0.0, epsilon = 1e-12);
            for j in 0..n {
                assert_abs_diff_eq!(d1[i][j], -d1[j][i], epsilon = 1e-15);
                assert_abs_diff_eq!(d2[i][j], d2[j][i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn sat_zero_when_boundary_satisfied() {
        let ops = build_sbp(16, 0.1).unwrap();
        let mut u = vec![1.0; 16];
        u[0] = 0.0;
        let sat = sat_dirichlet(&ops, Side::Inner, 0.0);
        let mut out = vec![0.0; 16];
        sat.apply(&u, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));

        u[15] = 2.0;
        let sat = sat_dirichlet(&ops, Side::Outer, 2.0);
        sat.apply(&u, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sat_weights_mirror_between_ends() {
        let n = 20;
        let ops = build_sbp(n, 0.25).unwrap();
        let inner = sat_dirichlet(&ops, Side::Inner, 0.0);
        let outer = sat_dirichlet(&ops, Side::Outer, 0.0);
        assert_eq!(inner.weights.len(), outer.weights.len());
        for (a, b) in inner.weights.iter().zip(outer.weights.iter().rev()) {
            assert_eq!(a.0, n - 1 - b.0);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
        }
    }
}
