use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Which equations produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    /// Coupled two-channel equations, Born-Huang term included.
    Exact,
    /// Decoupled channels with the semi-fluxon gauge potential.
    AdiabaticHalf,
    /// Decoupled channels, geometric flux dropped.
    AdiabaticZero,
}

impl ModelTag {
    pub fn code(self) -> u32 {
        match self {
            ModelTag::Exact => 0,
            ModelTag::AdiabaticHalf => 1,
            ModelTag::AdiabaticZero => 2,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(ModelTag::Exact),
            1 => Ok(ModelTag::AdiabaticHalf),
            2 => Ok(ModelTag::AdiabaticZero),
            other => Err(Error::Format(format!("unknown model tag {other}"))),
        }
    }

    pub fn adiabatic(alpha: f64) -> Result<Self> {
        if alpha == 0.5 {
            Ok(ModelTag::AdiabaticHalf)
        } else if alpha == 0.0 {
            Ok(ModelTag::AdiabaticZero)
        } else {
            Err(Error::Domain(format!("alpha must be 0 or 0.5 (got {alpha})")))
        }
    }

    /// Gauge parameter entering `(∂θ + iα)²`.
    pub fn alpha(self) -> f64 {
        match self {
            ModelTag::Exact | ModelTag::AdiabaticHalf => 0.5,
            ModelTag::AdiabaticZero => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Exact => "exact",
            ModelTag::AdiabaticHalf => "adiabatic-1/2",
            ModelTag::AdiabaticZero => "adiabatic-0",
        }
    }
}

/// Channel amplitudes `φ±` in the local spin frame `χ±(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    pub tag: ModelTag,
}

impl SpinorField {
    pub fn zeros(grid: &Grid, tag: ModelTag) -> Self {
        SpinorField {
            plus: vec![Complex64::default(); grid.len()],
            minus: vec![Complex64::default(); grid.len()],
            tag,
        }
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        grid.check_len(self.plus.len(), "plus channel")?;
        grid.check_len(self.minus.len(), "minus channel")
    }

    pub fn is_finite(&self) -> bool {
        self.plus
            .iter()
            .chain(&self.minus)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `[‖φ₊‖², ‖φ₋‖²]`.
    pub fn channel_norms(&self, grid: &Grid) -> [f64; 2] {
        [grid.norm_sq(&self.plus), grid.norm_sq(&self.minus)]
    }
}
