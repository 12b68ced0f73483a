use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::solver::{default_time_step, Discretization, FieldState, Simulation, Snapshot, StepEvent};

use super::cases::{convection_exact, initial_condition, setup_case};
use super::config::{CaseKind, RunConfig};
use super::norms::{difference_norm, error_norm, NormKind};
use super::reference::{default_cache_dir, fv_reference, ReferenceCase};

/// Steady flag threshold relative to the first step's change rate.
pub const STEADY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    /// Against the projected initial condition (convection, one full period).
    pub l1_projected: Option<f64>,
    pub l2_projected: Option<f64>,
    /// Against the exact solution or the finite-volume reference.
    pub l1_reference: Option<f64>,
    pub l2_reference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub case: String,
    pub p: usize,
    pub n: usize,
    pub n_elements: usize,
    pub dof: usize,
    pub components: usize,
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub initial_totals: Vec<f64>,
    pub final_totals: Vec<f64>,
    /// `|final - initial| / max(|initial|, 1e-300)` per component.
    pub conservation_drift: Vec<f64>,
    pub final_min: Vec<f64>,
    pub final_max: Vec<f64>,
    pub max_gamma_final: f64,
    pub active_elements_final: usize,
    pub initial_change_rate: f64,
    pub final_change_rate: f64,
    /// First time `||U^{k+1} - U^k|| / dt` fell below the steady tolerance.
    pub steady_time: Option<f64>,
    pub errors: ErrorSummary,
}

pub struct RunArtifacts {
    pub config: RunConfig,
    pub disc: Discretization,
    pub initial: FieldState,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<StepEvent>,
    pub summary: Summary,
}

impl RunArtifacts {
    pub fn final_state(&self) -> &FieldState {
        &self.snapshots.last().expect("final snapshot").state
    }
}

/// Time step used for `cfg`: the fixed value or the CFL rule on the initial state.
pub fn resolve_time_step(cfg: &RunConfig, disc: &Discretization, initial: &FieldState) -> Result<f64> {
    match cfg.dt {
        Some(dt) => Ok(dt),
        None => default_time_step(disc, initial, cfg.cfl),
    }
}

/// Runs `cfg` to its final time. `observer` sees every step.
pub fn run_case_with<F>(cfg: &RunConfig, dt: Option<f64>, mut observer: F) -> Result<RunArtifacts>
where
    F: FnMut(&StepEvent, &FieldState),
{
    let setup = setup_case(cfg)?;
    let dt = match dt {
        Some(dt) => dt,
        None => resolve_time_step(cfg, &setup.disc, &setup.initial)?,
    };
    let disc_copy = setup.disc.clone();
    let initial = setup.initial.clone();
    let mut sim = Simulation::new(setup.disc, setup.initial, setup.mode)?;
    if let Some((l, g)) = cfg.force_gamma {
        sim.force_penalty(l, g)?;
    }
    let start = Instant::now();
    let mut first_rate = None;
    let mut steady_time = None;
    let traj = sim.advance(dt, cfg.t_final, &cfg.snapshot_times, |ev, state| {
        let r0 = *first_rate.get_or_insert(ev.change_rate);
        if steady_time.is_none() && ev.change_rate < STEADY_TOLERANCE * r0 {
            steady_time = Some(ev.time);
        }
        observer(ev, state);
        true
    })?;
    let wall = start.elapsed().as_secs_f64();
    let disc = disc_copy;
    let last = traj.snapshots.last().expect("final snapshot");
    let initial_totals = disc.conserved_totals(&initial);
    let final_totals = disc.conserved_totals(&last.state);
    let conservation_drift = initial_totals
        .iter()
        .zip(&final_totals)
        .map(|(a, b)| (b - a).abs() / a.abs().max(1e-300))
        .collect();
    let m = disc.components();
    let mut final_min = vec![f64::INFINITY; m];
    let mut final_max = vec![f64::NEG_INFINITY; m];
    for l in 0..disc.mesh().n_elements() {
        for c in 0..m {
            for a in disc.subcell_averages(&last.state, l, c) {
                final_min[c] = final_min[c].min(a);
                final_max[c] = final_max[c].max(a);
            }
        }
    }
    let errors = compute_errors(cfg, &disc, &initial, &last.state)?;
    let summary = Summary {
        case: cfg.case.name().to_string(),
        p: cfg.p,
        n: cfg.n,
        n_elements: cfg.n_elements,
        dof: disc.dof(),
        components: m,
        dt,
        t_final: last.time,
        steps: traj.events.len(),
        wall_time_s: wall,
        initial_totals,
        final_totals,
        conservation_drift,
        final_min,
        final_max,
        max_gamma_final: last.sensor.gamma.iter().cloned().fold(0.0, f64::max),
        active_elements_final: last.sensor.gamma.iter().filter(|g| **g > 0.0).count(),
        initial_change_rate: traj.events.first().map_or(0.0, |e| e.change_rate),
        final_change_rate: traj.events.last().map_or(0.0, |e| e.change_rate),
        steady_time,
        errors,
    };
    Ok(RunArtifacts {
        config: cfg.clone(),
        disc,
        initial,
        snapshots: traj.snapshots,
        events: traj.events,
        summary,
    })
}

pub fn run_case(cfg: &RunConfig) -> Result<RunArtifacts> {
    run_case_with(cfg, None, |_, _| {})
}

fn compute_errors(
    cfg: &RunConfig,
    disc: &Discretization,
    initial: &FieldState,
    last: &FieldState,
) -> Result<ErrorSummary> {
    let mut out = ErrorSummary {
        l1_projected: None,
        l2_projected: None,
        l1_reference: None,
        l2_reference: None,
    };
    let t = last.time;
    if cfg.case.is_convection() {
        let breaks = initial_condition(cfg.case).1;
        let shifted: Vec<f64> = breaks.iter().map(|b| (b + t).rem_euclid(1.0)).collect();
        let exact = |x: f64| convection_exact(cfg.case, x, t).expect("convection case");
        out.l1_reference = Some(error_norm(disc, last, 0, exact, &shifted, NormKind::L1));
        out.l2_reference = Some(error_norm(disc, last, 0, exact, &shifted, NormKind::L2));
        if (t - t.round()).abs() < 1e-12 {
            out.l1_projected = Some(difference_norm(disc, last, initial, 0, NormKind::L1));
            out.l2_projected = Some(difference_norm(disc, last, initial, 0, NormKind::L2));
        }
    } else if let Some(cells) = cfg.reference_cells {
        if cfg.case.is_shock_tube() || cfg.case == CaseKind::Burgers {
            let rc = ReferenceCase::Case(cfg.case);
            if (t - rc.default_final_time()).abs() < 1e-12 {
                let cache = default_cache_dir();
                let reference = fv_reference(rc, cells, Some(&cache))?;
                let breaks = reference.breaks();
                let f = |x: f64| reference.sample(x)[0];
                out.l1_reference = Some(error_norm(disc, last, 0, f, &breaks, NormKind::L1));
                out.l2_reference = Some(error_norm(disc, last, 0, f, &breaks, NormKind::L2));
            }
        }
    }
    Ok(out)
}
