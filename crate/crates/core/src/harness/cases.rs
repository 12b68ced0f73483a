use std::f64::consts::PI;

use crate::error::Result;
use crate::mesh::build_uniform_mesh;
use crate::sensor::FieldSensor;
use crate::physics::{BoundaryCondition, ConservationLaw, State, GAMMA_AIR, NOZZLE_THROAT};
use crate::solver::{Discretization, DiscretizationOptions, FieldState, GammaMode};

use super::config::{CaseKind, RunConfig};

/// Standard deviation of the convected Gaussian pulse.
pub const GAUSSIAN_WIDTH: f64 = 0.1;
/// Pulse center for the convergence runs.
pub const GAUSSIAN_CENTER: f64 = 0.5;
/// Pulse center for the recovery run, upstream of the marked element.
pub const RECOVERY_CENTER: f64 = 0.25;
/// Jump location of the convected step.
pub const HEAVISIDE_JUMP: f64 = 0.5;

/// Post-shock primitive state `(rho, u, p)` of the Shu-Osher problem.
pub const SHU_OSHER_INLET: [f64; 3] = [3.857143, 2.629369, 10.3333];
pub const SHU_OSHER_JUMP: f64 = -4.0;

/// Far-field data `(rho, u, M)` at the nozzle inlet and outlet.
pub const NOZZLE_INLET: [f64; 3] = [1.0, 1.0, 0.40];
pub const NOZZLE_OUTLET: [f64; 3] = [1.0, 1.0, 0.45];

/// Gaussian of width [`GAUSSIAN_WIDTH`] summed over periodic images on (0, 1).
pub fn periodic_gaussian(x: f64, center: f64) -> f64 {
    (-4..=4)
        .map(|k| {
            let d = (x - center + k as f64) / GAUSSIAN_WIDTH;
            (-0.5 * d * d).exp()
        })
        .sum()
}

/// Unit step: 1 on `[0, 0.5)`, 0 on `[0.5, 1)`.
pub fn heaviside(x: f64) -> f64 {
    if x < HEAVISIDE_JUMP { 1.0 } else { 0.0 }
}

pub fn burgers_initial(x: f64) -> f64 {
    0.5 + (2.0 * PI * x).sin()
}

/// Shock position of the Burgers run: the shock forms at `t = 1/(2 pi)` on
/// the characteristic through `x = 1/2`, which moves with speed 1/2.
pub fn burgers_shock_position(t: f64) -> f64 {
    (0.5 + 0.5 * t).rem_euclid(1.0)
}

pub fn shu_osher_primitive(x: f64) -> [f64; 3] {
    if x < SHU_OSHER_JUMP {
        SHU_OSHER_INLET
    } else {
        [1.0 + 0.2 * (5.0 * x).sin(), 0.0, 1.0]
    }
}

pub fn domain(case: CaseKind) -> (f64, f64) {
    if case.is_shock_tube() { (-5.0, 5.0) } else { (0.0, 1.0) }
}

pub fn law(case: CaseKind) -> ConservationLaw {
    match case {
        CaseKind::ConvectionGaussian | CaseKind::ConvectionHeaviside | CaseKind::ConvectionRecovery => {
            ConservationLaw::Convection { beta: 1.0 }
        }
        CaseKind::Burgers => ConservationLaw::Burgers,
        CaseKind::Nozzle => ConservationLaw::Nozzle {
            gamma: GAMMA_AIR,
            throat: NOZZLE_THROAT,
        },
        CaseKind::ShuOsher | CaseKind::FvComparison => ConservationLaw::Euler { gamma: GAMMA_AIR },
    }
}

pub fn boundaries(case: CaseKind) -> (BoundaryCondition, BoundaryCondition) {
    match case {
        CaseKind::Nozzle => (
            BoundaryCondition::TotalInflow {
                density: NOZZLE_INLET[0],
                velocity: NOZZLE_INLET[1],
                mach: NOZZLE_INLET[2],
            },
            BoundaryCondition::PressureOutflow {
                density: NOZZLE_OUTLET[0],
                velocity: NOZZLE_OUTLET[1],
                mach: NOZZLE_OUTLET[2],
            },
        ),
        CaseKind::ShuOsher | CaseKind::FvComparison => {
            let [r, u, p] = SHU_OSHER_INLET;
            let inlet = law(case).conserved_from_primitive(r, u, p, -5.0);
            (BoundaryCondition::Prescribed(inlet), BoundaryCondition::SolidWall)
        }
        _ => (BoundaryCondition::Periodic, BoundaryCondition::Periodic),
    }
}

/// Initial condition in conserved variables and its discontinuity locations.
pub fn initial_condition(case: CaseKind) -> (Box<dyn Fn(f64) -> State + Send + Sync>, Vec<f64>) {
    match case {
        CaseKind::ConvectionGaussian => (
            Box::new(|x| [periodic_gaussian(x, GAUSSIAN_CENTER), 0.0, 0.0]),
            Vec::new(),
        ),
        CaseKind::ConvectionRecovery => (
            Box::new(|x| [periodic_gaussian(x, RECOVERY_CENTER), 0.0, 0.0]),
            Vec::new(),
        ),
        CaseKind::ConvectionHeaviside => (Box::new(|x| [heaviside(x), 0.0, 0.0]), vec![HEAVISIDE_JUMP]),
        CaseKind::Burgers => (Box::new(|x| [burgers_initial(x), 0.0, 0.0]), Vec::new()),
        CaseKind::Nozzle => {
            let law = law(case);
            let [rho, u, mach] = NOZZLE_INLET;
            let p = crate::physics::farfield_pressure(rho, u, mach, GAMMA_AIR)
                .expect("valid inlet data");
            (
                Box::new(move |x| law.conserved_from_primitive(rho, u, p, x)),
                Vec::new(),
            )
        }
        CaseKind::ShuOsher | CaseKind::FvComparison => {
            let law = law(case);
            (
                Box::new(move |x| {
                    let [r, u, p] = shu_osher_primitive(x);
                    law.conserved_from_primitive(r, u, p, x)
                }),
                vec![SHU_OSHER_JUMP],
            )
        }
    }
}

/// Exact solution of the convection cases at time `t`.
pub fn convection_exact(case: CaseKind, x: f64, t: f64) -> Option<f64> {
    let y = (x - t).rem_euclid(1.0);
    match case {
        CaseKind::ConvectionGaussian => Some(periodic_gaussian(y, GAUSSIAN_CENTER)),
        CaseKind::ConvectionRecovery => Some(periodic_gaussian(y, RECOVERY_CENTER)),
        CaseKind::ConvectionHeaviside => Some(heaviside(y)),
        _ => None,
    }
}

pub struct CaseSetup {
    pub disc: Discretization,
    pub initial: FieldState,
    pub mode: GammaMode,
}

/// Discretization, projected initial state and penalty mode for `cfg`.
pub fn setup_case(cfg: &RunConfig) -> Result<CaseSetup> {
    let (a, b) = domain(cfg.case);
    let mesh = build_uniform_mesh(a, b, cfg.n_elements, cfg.n)?;
    let (left, right) = boundaries(cfg.case);
    let disc = Discretization::new(
        mesh,
        law(cfg.case),
        cfg.p,
        left,
        right,
        DiscretizationOptions {
            entropy_fix: cfg.entropy_fix,
        },
    )?;
    let (u0, breaks) = initial_condition(cfg.case);
    let projected = disc.project(&u0, &breaks);
    // elements the sensor flags on the projected data are re-projected with
    // their penalty, which keeps the state admissible at strong jumps
    let initial = if disc.p() > 0 {
        let sensor = FieldSensor::new(disc.reference().clone(), cfg.sensor_params())?;
        let gammas = sensor.evaluate(&projected).gamma;
        if gammas.iter().any(|g| *g > 0.0) {
            disc.project_penalized(&u0, &breaks, &gammas)?
        } else {
            projected
        }
    } else {
        projected
    };
    Ok(CaseSetup {
        disc,
        initial,
        mode: GammaMode::Sensor(cfg.sensor_params()),
    })
}
