use serde::Serialize;

use crate::error::{Error, Result};
use crate::sensor::{FieldSensor, SensorParams, SensorReport};

use super::discretization::{Discretization, FrozenPenaltySystem};
use super::imex::{explicit_ars_step, imex_step, ImexTableau};
use super::state::FieldState;

/// Time steps shorter than this fraction of `dt` are merged into the previous one.
const LANDING_SLACK: f64 = 1e-9;

/// Source of the element penalties used in each step.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaMode {
    /// Penalty from the sub-cell sensor.
    Sensor(SensorParams),
    /// No penalty; the explicit part alone is integrated.
    Off,
    /// Fixed penalty per element.
    Fixed(Vec<f64>),
}

/// Summary of one completed step.
#[derive(Debug, Clone, Serialize)]
pub struct StepEvent {
    pub step: usize,
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    /// `||U^{k+1} - U^k|| / dt` on the coefficient vector.
    pub change_rate: f64,
    pub max_gamma: f64,
    pub active_elements: usize,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub state: FieldState,
    pub sensor: SensorReport,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<StepEvent>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.events.len()
    }

    pub fn last_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

/// `cfl * h_sub / lambda_max` for the current state.
pub fn default_time_step(disc: &Discretization, state: &FieldState, cfl: f64) -> Result<f64> {
    let lam = disc.max_wave_speed(state)?;
    let h = disc.mesh().min_subcell_width();
    if lam <= 0.0 {
        return Err(Error::Config("zero wave speed, time step undefined".into()));
    }
    Ok(cfl * h / lam)
}

/// A discretization, its current state and the stepping machinery.
pub struct Simulation {
    disc: Discretization,
    state: FieldState,
    mode: GammaMode,
    sensor: Option<FieldSensor>,
    tableau: ImexTableau,
    forced: Vec<(usize, f64)>,
    steps: usize,
}

impl Simulation {
    pub fn new(disc: Discretization, initial: FieldState, mode: GammaMode) -> Result<Self> {
        let sensor = match &mode {
            GammaMode::Sensor(params) if disc.p() > 0 => {
                Some(FieldSensor::new(disc.reference().clone(), *params)?)
            }
            GammaMode::Fixed(g) => {
                if g.len() != disc.mesh().n_elements() {
                    return Err(Error::Config(format!(
                        "{} fixed penalties for {} elements",
                        g.len(),
                        disc.mesh().n_elements()
                    )));
                }
                if let Some(v) = g.iter().find(|v| !(**v >= 0.0)) {
                    return Err(Error::NegativePenalty(*v));
                }
                None
            }
            _ => None,
        };
        Ok(Self {
            disc,
            state: initial,
            mode,
            sensor,
            tableau: ImexTableau::ars222(),
            forced: Vec::new(),
            steps: 0,
        })
    }

    /// Pins the penalty of `element` to `gamma` regardless of the mode.
    pub fn force_penalty(&mut self, element: usize, gamma: f64) -> Result<()> {
        let ne = self.disc.mesh().n_elements();
        if element >= ne {
            return Err(Error::IndexOutOfRange {
                what: "element",
                index: element,
                limit: ne,
            });
        }
        if !(gamma >= 0.0) {
            return Err(Error::NegativePenalty(gamma));
        }
        self.forced.retain(|(l, _)| *l != element);
        self.forced.push((element, gamma));
        Ok(())
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Sensor data and element penalties for the current state.
    pub fn sensor_report(&self) -> SensorReport {
        let ne = self.disc.mesh().n_elements();
        let mut report = match &self.sensor {
            Some(s) => s.evaluate(&self.state),
            None => SensorReport {
                s: vec![0.0; ne],
                s0: vec![0.0; ne],
                gamma: vec![0.0; ne],
            },
        };
        match &self.mode {
            GammaMode::Fixed(g) => report.gamma.clone_from(g),
            GammaMode::Off => report.gamma.iter_mut().for_each(|v| *v = 0.0),
            GammaMode::Sensor(_) => {}
        }
        for &(l, g) in &self.forced {
            report.gamma[l] = g;
        }
        report
    }

    /// Advances one step of size `dt` with the penalty frozen at the
    /// current state.
    pub fn step(&mut self, dt: f64) -> Result<StepEvent> {
        let report = self.sensor_report();
        let t = self.state.time;
        let max_gamma = report.gamma.iter().cloned().fold(0.0, f64::max);
        let active_elements = report.gamma.iter().filter(|g| **g > 0.0).count();
        let system = FrozenPenaltySystem::new(&self.disc, report.gamma, dt, &self.tableau);
        let next = if max_gamma > 0.0 {
            imex_step(&system, t, self.state.as_slice(), dt, &self.tableau)?
        } else {
            explicit_ars_step(&system, t, self.state.as_slice(), dt, &self.tableau)?
        };
        self.steps += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: self.steps,
                time: t + dt,
            });
        }
        let change = next
            .iter()
            .zip(self.state.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        self.state = self.state.with_coefficients(next);
        self.state.time = t + dt;
        Ok(StepEvent {
            step: self.steps,
            time: self.state.time,
            dt,
            change_rate: change / dt,
            max_gamma,
            active_elements,
        })
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.state.time,
            state: self.state.clone(),
            sensor: self.sensor_report(),
        }
    }

    /// Integrates to `t_final` with steps of at most `dt`, landing exactly on
    /// every time in `snapshot_times` and on `t_final`. A snapshot of the final
    /// state is always recorded. `observer` sees every step and may stop the
    /// run early by returning `false`.
    pub fn advance<F>(
        &mut self,
        dt: f64,
        t_final: f64,
        snapshot_times: &[f64],
        mut observer: F,
    ) -> Result<Trajectory>
    where
        F: FnMut(&StepEvent, &FieldState) -> bool,
    {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let mut targets: Vec<f64> = snapshot_times
            .iter()
            .cloned()
            .filter(|s| *s <= t_final)
            .collect();
        targets.sort_by(|a, b| a.total_cmp(b));
        targets.dedup();
        let mut traj = Trajectory::default();
        let mut next_target = 0;
        let slack = LANDING_SLACK * dt;
        while next_target < targets.len() && targets[next_target] <= self.time() + slack {
            traj.snapshots.push(self.snapshot());
            next_target += 1;
        }
        while self.time() < t_final - slack {
            let goal = targets.get(next_target).copied().unwrap_or(t_final);
            let remaining = goal - self.time();
            let h = if remaining <= dt * (1.0 + LANDING_SLACK) {
                remaining
            } else {
                dt
            };
            let event = self.step(h)?;
            if h == remaining {
                self.state.time = goal;
            }
            let keep_going = observer(&event, &self.state);
            traj.events.push(event);
            while next_target < targets.len() && targets[next_target] <= self.time() + slack {
                traj.snapshots.push(self.snapshot());
                next_target += 1;
            }
            if !keep_going {
                break;
            }
        }
        let recorded = traj
            .snapshots
            .last()
            .is_some_and(|s| s.time == self.time());
        if !recorded {
            traj.snapshots.push(self.snapshot());
        }
        Ok(traj)
    }
}
