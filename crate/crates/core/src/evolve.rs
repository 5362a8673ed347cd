//! Explicit RK4 time marching with conservation and boundary guards.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::field::{ModelTag, SpinorField};
use crate::grid::Grid;
use crate::hamiltonian::{init_gaussian, project_spin_basis, Hamiltonian, IncomingSpin};
use crate::observables::{wall_population, ChannelDensities, SpinBalance};
use crate::sbp::SAT_BORROWING;
use crate::snapshot::SnapshotRecord;
use crate::units::DimensionlessParams;

/// Stability limit of classical RK4 on the imaginary axis is `2√2`.
pub const RK4_IMAGINARY_LIMIT: f64 = 2.8;
pub const DEFAULT_CFL_SAFETY: f64 = 0.5;

/// Spectral radius of `-d2` plus both wall penalties at unit spacing.
pub const RADIAL_STENCIL_RADIUS: f64 = 21.1;
/// Maximum symbol of the periodic sixth-order `-d2` stencil (272/45).
pub const ANGULAR_D2_RADIUS: f64 = 272.0 / 45.0;
/// Maximum symbol of the periodic sixth-order `d1` stencil.
pub const ANGULAR_D1_RADIUS: f64 = 1.586;

/// Largest allowed drift of any channel norm before a run is aborted.
pub const ABORT_DRIFT: f64 = 1e-3;
/// Density allowed within [`GUARD_CELLS`] of the outer wall.
pub const GUARD_THRESHOLD: f64 = 1e-4;
pub const GUARD_CELLS: usize = 2;

/// Upper bound on the spectral radius of `H_eff` (any model, α ≤ ½):
/// `c_r/hr² + (c_θ/hθ² + 2c₁/hθ + 1)/r_min² + κ max f`.
pub fn spectral_radius_bound(grid: &Grid, kappa: f64) -> f64 {
    debug_assert!((SAT_BORROWING - 0.12).abs() < 1e-12, "radial constant assumes beta = 0.12");
    let r_min = grid.r_values[0];
    let ht = grid.htheta;
    RADIAL_STENCIL_RADIUS / (grid.hr * grid.hr)
        + (ANGULAR_D2_RADIUS / (ht * ht) + 2.0 * ANGULAR_D1_RADIUS / ht + 1.0) / (r_min * r_min)
        + kappa.abs()
}

pub fn stable_dt(grid: &Grid, kappa: f64) -> f64 {
    stable_dt_with(grid, kappa, DEFAULT_CFL_SAFETY)
}

pub fn stable_dt_with(grid: &Grid, kappa: f64, safety: f64) -> f64 {
    safety * RK4_IMAGINARY_LIMIT / spectral_radius_bound(grid, kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub time: f64,
    /// `[‖φ₊‖, ‖φ₋‖]`.
    pub norms: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardFlag {
    pub time: f64,
    pub wall_population: f64,
}

/// One pure-state evolution.
#[derive(Debug, Clone)]
pub struct RunState {
    pub spinor: SpinorField,
    pub time: f64,
    pub step_count: u64,
    pub norm_history: Vec<NormSample>,
    pub guard_flags: Vec<GuardFlag>,
}

impl RunState {
    pub fn new(spinor: SpinorField, grid: &Grid) -> Self {
        let mut state = RunState {
            spinor,
            time: 0.0,
            step_count: 0,
            norm_history: Vec::new(),
            guard_flags: Vec::new(),
        };
        state.record_norms(grid);
        state
    }

    pub fn norms(&self, grid: &Grid) -> [f64; 2] {
        self.spinor.channel_norms(grid).map(f64::sqrt)
    }

    pub fn record_norms(&mut self, grid: &Grid) -> NormSample {
        let sample = NormSample {
            time: self.time,
            norms: self.norms(grid),
        };
        self.norm_history.push(sample);
        sample
    }

    pub fn initial_norms(&self) -> [f64; 2] {
        self.norm_history.first().map(|s| s.norms).unwrap_or([0.0; 2])
    }

    /// Largest drift of the per-channel norms (adiabatic) or of the total
    /// spinor norm (coupled) over the recorded history.
    pub fn max_norm_drift(&self, coupled: bool) -> f64 {
        let total = |n: [f64; 2]| (n[0] * n[0] + n[1] * n[1]).sqrt();
        let first = self.initial_norms();
        self.norm_history
            .iter()
            .map(|s| {
                if coupled {
                    (total(s.norms) - total(first)).abs()
                } else {
                    (s.norms[0] - first[0]).abs().max((s.norms[1] - first[1]).abs())
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Scratch storage for [`rk4_step`].
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    acc: [Vec<Complex64>; 2],
    stage: [Vec<Complex64>; 2],
    k: [Vec<Complex64>; 2],
}

impl Rk4Workspace {
    pub fn new(len: usize) -> Self {
        let z = || vec![Complex64::default(); len];
        Rk4Workspace {
            acc: [z(), z()],
            stage: [z(), z()],
            k: [z(), z()],
        }
    }
}

/// Classical four-stage Runge-Kutta step of both channels.
pub fn rk4_step(state: &mut RunState, dt: f64, h: &Hamiltonian, ws: &mut Rk4Workspace) -> Result<()> {
    let y = [&mut state.spinor.plus, &mut state.spinor.minus];
    let [y_plus, y_minus] = y;
    for (acc, y) in ws.acc.iter_mut().zip([&*y_plus, &*y_minus]) {
        acc.copy_from_slice(y);
    }
    // (stage weight into acc, offset for the next stage input)
    let plan = [(dt / 6.0, dt / 2.0), (dt / 3.0, dt / 2.0), (dt / 3.0, dt), (dt / 6.0, 0.0)];
    for (s, &(weight, offset)) in plan.iter().enumerate() {
        {
            let [kp, km] = &mut ws.k;
            if s == 0 {
                h.rhs(y_plus, y_minus, kp, km);
            } else {
                h.rhs(&ws.stage[0], &ws.stage[1], kp, km);
            }
        }
        for c in 0..2 {
            let y = if c == 0 { &*y_plus } else { &*y_minus };
            let k = &ws.k[c];
            for (a, kv) in ws.acc[c].iter_mut().zip(k) {
                *a += kv * weight;
            }
            if s < 3 {
                for ((st, yv), kv) in ws.stage[c].iter_mut().zip(y).zip(k) {
                    *st = yv + kv * offset;
                }
            }
        }
    }
    let finite = ws
        .acc
        .iter()
        .flat_map(|v| v.iter())
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(Error::Instability {
            step: state.step_count + 1,
            time: state.time + dt,
            reason: "non-finite field values".into(),
        });
    }
    y_plus.copy_from_slice(&ws.acc[0]);
    y_minus.copy_from_slice(&ws.acc[1]);
    state.time += dt;
    state.step_count += 1;
    Ok(())
}

/// An unpolarised scattering run: one or two pure-state components sharing
/// a grid and an operator.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub params: DimensionlessParams,
    pub tag: ModelTag,
    pub components: Vec<RunState>,
    hamiltonian: Hamiltonian,
    workspace: Rk4Workspace,
    dt: f64,
}

impl Simulation {
    /// Launches the Gaussian of `params` as an unpolarised beam.
    pub fn new(grid: Grid, params: DimensionlessParams, tag: ModelTag, cfl_safety: f64) -> Result<Self> {
        params.validate()?;
        if tag != ModelTag::Exact && tag.alpha() != params.alpha {
            return Err(Error::Domain(format!(
                "model {} does not match alpha = {}",
                tag.name(),
                params.alpha
            )));
        }
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(Error::Domain(format!("cfl_safety must be in (0, 1] (got {cfl_safety})")));
        }
        let spatial = init_gaussian(&grid, &params)?;
        let components = match tag {
            ModelTag::Exact => vec![
                project_spin_basis(&spatial, IncomingSpin::Up, &grid),
                project_spin_basis(&spatial, IncomingSpin::Down, &grid),
            ],
            _ => vec![SpinorField {
                plus: spatial.clone(),
                minus: spatial,
                tag,
            }],
        };
        let dt = stable_dt_with(&grid, params.kappa, cfl_safety);
        Ok(Self::from_components(grid, params, tag, components, dt))
    }

    pub fn from_components(
        grid: Grid,
        params: DimensionlessParams,
        tag: ModelTag,
        components: Vec<SpinorField>,
        dt: f64,
    ) -> Self {
        let hamiltonian = Hamiltonian::new(&grid, tag, params.kappa);
        let components = components.into_iter().map(|s| RunState::new(s, &grid)).collect();
        let workspace = Rk4Workspace::new(grid.len());
        Simulation {
            grid,
            params,
            tag,
            components,
            hamiltonian,
            workspace,
            dt,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.components[0].time
    }

    pub fn step_count(&self) -> u64 {
        self.components[0].step_count
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn step_with(&mut self, dt: f64) -> Result<()> {
        for state in &mut self.components {
            rk4_step(state, dt, &self.hamiltonian, &mut self.workspace)?;
        }
        Ok(())
    }

    /// Number of equal steps, none longer than the stable step, reaching
    /// `duration`; and their length.
    pub fn plan(&self, duration: f64) -> (u64, f64) {
        if duration <= 0.0 {
            return (0, 0.0);
        }
        let n = (duration / self.dt).ceil().max(1.0);
        (n as u64, duration / n)
    }

    /// Records norms, checks drift and the outer-wall guard.
    pub fn checkpoint(&mut self) -> Result<bool> {
        let coupled = self.hamiltonian.is_coupled();
        let mut guard = false;
        for state in &mut self.components {
            state.record_norms(&self.grid);
            let drift = state.max_norm_drift(coupled);
            if drift > ABORT_DRIFT {
                return Err(Error::Instability {
                    step: state.step_count,
                    time: state.time,
                    reason: format!("norm drift {drift:.3e} exceeds {ABORT_DRIFT:e}"),
                });
            }
        }
        let rho = self.channel_densities().density();
        let wall = wall_population(&rho, &self.grid, GUARD_CELLS);
        if wall > GUARD_THRESHOLD {
            guard = true;
            let flag = GuardFlag {
                time: self.time(),
                wall_population: wall,
            };
            self.components.iter_mut().for_each(|s| s.guard_flags.push(flag));
        }
        Ok(guard)
    }

    pub fn channel_densities(&self) -> ChannelDensities {
        let mut out = ChannelDensities::zeros(self.grid.len());
        for s in &self.components {
            out.accumulate(&s.spinor);
        }
        out
    }

    /// Current norms: `[‖φ₊‖, ‖φ₋‖]` for the adiabatic model, the total
    /// spinor norm of each pure-state run for the exact model.
    pub fn norms(&self) -> Vec<f64> {
        if self.hamiltonian.is_coupled() {
            self.components
                .iter()
                .map(|s| {
                    let n = s.norms(&self.grid);
                    (n[0] * n[0] + n[1] * n[1]).sqrt()
                })
                .collect()
        } else {
            self.components[0].norms(&self.grid).to_vec()
        }
    }

    pub fn max_norm_drift(&self) -> f64 {
        let coupled = self.hamiltonian.is_coupled();
        self.components
            .iter()
            .map(|s| s.max_norm_drift(coupled))
            .fold(0.0, f64::max)
    }

    pub fn guard_tripped(&self) -> bool {
        self.components.iter().any(|s| !s.guard_flags.is_empty())
    }
}

/// Scalar observables of one emitted snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub index: usize,
    pub time: f64,
    pub step: u64,
    pub forward_visibility: f64,
    pub forward_centroid: f64,
    pub guard: bool,
    pub norms: Vec<f64>,
    pub spin_balance: Option<SpinBalance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tag: ModelTag,
    pub config_hash: String,
    pub kappa: f64,
    pub k0: f64,
    pub dt: f64,
    pub steps: u64,
    pub t_final: f64,
    pub band_centre: f64,
    pub max_norm_drift: f64,
    pub guard_tripped: bool,
    pub snapshots: Vec<SnapshotSummary>,
}

impl RunSummary {
    /// First snapshot whose forward centroid reached the band centre.
    pub fn headline(&self) -> Option<&SnapshotSummary> {
        self.snapshots
            .iter()
            .find(|s| s.forward_centroid >= self.band_centre)
    }
}

/// Runs a configuration to completion, collecting every snapshot.
pub fn run(config: &SimConfig) -> Result<Vec<SnapshotRecord>> {
    let mut out = Vec::new();
    run_with(config, |rec| {
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

/// Runs a configuration, handing each snapshot to `emit` as it is taken:
/// at launch, every `snapshot_stride` steps and at `t_final`.
pub fn run_with(config: &SimConfig, mut emit: impl FnMut(SnapshotRecord) -> Result<()>) -> Result<RunSummary> {
    config.validate()?;
    let dp = config.dimensionless()?;
    let grid = config.build_grid()?;
    let mut sim = Simulation::new(grid, dp, config.tag(), config.run.cfl_safety)?;
    let (band, window, hash) = (config.band(), config.window(), config.hash());
    let (steps, dt) = sim.plan(dp.t_final);
    let mut summary = RunSummary {
        tag: sim.tag,
        config_hash: config.hash_hex(),
        kappa: dp.kappa,
        k0: dp.k0,
        dt,
        steps,
        t_final: dp.t_final,
        band_centre: band.centre(),
        max_norm_drift: 0.0,
        guard_tripped: false,
        snapshots: Vec::new(),
    };
    let mut take = |sim: &Simulation, summary: &mut RunSummary| -> Result<()> {
        let rec = SnapshotRecord::from_simulation(sim, band, window, hash);
        summary.snapshots.push(SnapshotSummary {
            index: summary.snapshots.len(),
            time: rec.time,
            step: rec.step,
            forward_visibility: rec.forward_visibility,
            forward_centroid: rec.forward_centroid,
            guard: rec.guard,
            norms: rec.norms.clone(),
            spin_balance: rec.spin_balance(&sim.grid).ok(),
        });
        emit(rec)
    };
    sim.checkpoint()?;
    take(&sim, &mut summary)?;
    let stride = config.run.snapshot_stride.max(1);
    for k in 1..=steps {
        sim.step_with(dt)?;
        if k % stride == 0 || k == steps {
            sim.checkpoint()?;
            take(&sim, &mut summary)?;
        }
    }
    summary.max_norm_drift = sim.max_norm_drift();
    summary.guard_tripped = sim.guard_tripped();
    Ok(summary)
}
