//! SI experiment parameters and their reduction to wire-radius units.
//!
//! Lengths are measured in units of the wire radius `R` and time in
//! `s = ħt / (2mR²)`, so the kinetic operator becomes `-∇²` and the Zeeman
//! splitting enters as `±κ f(r)` with `κ = 2mR²V₀/ħ²`. A plane wave
//! `exp(i k x)` then has dispersion `ω = k²` and group velocity `2k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 4.0 * PI * 1e-7;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Neutron mass, kg.
pub const NEUTRON_MASS: f64 = 1.67e-27;
/// Neutron magnetic moment, J/T.
pub const NEUTRON_MOMENT: f64 = -9.65e-27;

/// Ratio between the intensity FWHM of a Gaussian and its standard deviation.
pub fn fwhm_per_sigma() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Wire current `I_w`, A.
    pub wire_current: f64,
    /// Wire radius `R`, m.
    pub wire_radius: f64,
    /// Velocity of the packet centre towards the wire, m/s.
    pub incoming_velocity: f64,
    pub neutron_mass: f64,
    /// Signed magnetic moment, J/T.
    pub neutron_moment: f64,
    pub vacuum_permeability: f64,
    pub hbar: f64,
    /// Intensity FWHM of the incoming packet, m.
    pub packet_width: f64,
    /// Initial distance of the packet centre from the wire axis, m.
    pub launch_distance: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            wire_current: 10e-3,
            wire_radius: 1e-5,
            incoming_velocity: 0.02,
            neutron_mass: NEUTRON_MASS,
            neutron_moment: NEUTRON_MOMENT,
            vacuum_permeability: MU_0,
            hbar: HBAR,
            packet_width: 20e-6,
            launch_distance: 10e-5,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let errors = self.violations();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(errors.join("; ")))
        }
    }

    /// Every violated invariant, in field order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be positive and finite (got {v})"));
            }
        };
        positive("wire_radius", self.wire_radius);
        positive("incoming_velocity", self.incoming_velocity);
        positive("neutron_mass", self.neutron_mass);
        positive("packet_width", self.packet_width);
        positive("vacuum_permeability", self.vacuum_permeability);
        positive("hbar", self.hbar);
        if !(self.wire_current.is_finite() && self.wire_current >= 0.0) {
            out.push(format!(
                "wire_current must be non-negative (got {})",
                self.wire_current
            ));
        }
        if !self.neutron_moment.is_finite() {
            out.push("neutron_moment must be finite".into());
        }
        if !(self.launch_distance > self.wire_radius + self.packet_width) {
            out.push(format!(
                "launch_distance ({}) must exceed wire_radius + packet_width ({})",
                self.launch_distance,
                self.wire_radius + self.packet_width
            ));
        }
        out
    }

    /// Seconds per unit of dimensionless time, `2mR²/ħ`.
    pub fn time_unit(&self) -> f64 {
        2.0 * self.neutron_mass * self.wire_radius * self.wire_radius / self.hbar
    }
}

/// Zeeman barrier height `V₀ = |μ| μ₀ I_w / (4πR)` in joules.
pub fn potential_height(p: &PhysicalParams) -> Result<f64> {
    if !(p.wire_radius > 0.0) {
        return Err(Error::Domain(format!(
            "wire radius must be positive (got {})",
            p.wire_radius
        )));
    }
    Ok(p.neutron_moment.abs() * p.vacuum_permeability * p.wire_current
        / (4.0 * PI * p.wire_radius))
}

/// Everything the solver consumes, in wire-radius units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub kappa: f64,
    /// Mead-Berry gauge parameter: ½ with the geometric flux, 0 without.
    pub alpha: f64,
    pub k0: f64,
    /// Standard deviation of the packet intensity.
    pub sigma: f64,
    /// Launch x-coordinate (negative: the packet starts left of the wire).
    pub x0: f64,
    pub r_max: f64,
    pub t_final: f64,
}

impl DimensionlessParams {
    /// Group speed of the packet centre.
    pub fn group_speed(&self) -> f64 {
        2.0 * self.k0
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.kappa >= 0.0) {
            errs.push(format!("kappa must be >= 0 (got {})", self.kappa));
        }
        if let Err(e) = check_alpha(self.alpha) {
            errs.push(e.to_string());
        }
        if !(self.k0 > 0.0) {
            errs.push(format!("k0 must be positive (got {})", self.k0));
        }
        if !(self.sigma > 0.0) {
            errs.push(format!("sigma must be positive (got {})", self.sigma));
        }
        if !(self.t_final >= 0.0) {
            errs.push(format!("t_final must be >= 0 (got {})", self.t_final));
        }
        if !(self.r_max > self.x0.abs() + 3.0 * self.sigma) {
            errs.push(format!(
                "r_max ({}) must exceed |x0| + 3 sigma ({})",
                self.r_max,
                self.x0.abs() + 3.0 * self.sigma
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(errs.join("; ")))
        }
    }
}

/// Only the trivial and the semi-fluxon gauge are physical for a planar spin.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 || alpha == 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be 0 or 0.5 (got {alpha})")))
    }
}

/// `κ = 2 m R² V₀ / ħ²`.
pub fn kappa(p: &PhysicalParams) -> Result<f64> {
    let r = p.wire_radius;
    Ok(2.0 * p.neutron_mass * r * r * potential_height(p)? / (p.hbar * p.hbar))
}

pub fn derive_dimensionless(
    p: &PhysicalParams,
    alpha: f64,
    r_max: f64,
    t_final: f64,
) -> Result<DimensionlessParams> {
    check_alpha(alpha)?;
    let r = p.wire_radius;
    Ok(DimensionlessParams {
        kappa: kappa(p)?,
        alpha,
        k0: p.neutron_mass * p.incoming_velocity * r / p.hbar,
        sigma: p.packet_width / (r * fwhm_per_sigma()),
        x0: -p.launch_distance / r,
        r_max,
        t_final,
    })
}

/// Time for the packet centre to move ballistically from `x0` to `x_target`.
pub fn ballistic_time(x0: f64, x_target: f64, k0: f64) -> f64 {
    (x_target - x0) / (2.0 * k0)
}
