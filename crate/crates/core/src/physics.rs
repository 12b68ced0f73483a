//! Conservation laws (linear convection, Burgers, 1D Euler, quasi-1D nozzle),
//! Roe numerical flux and boundary ghost states.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on the number of solution components.
pub const MAX_COMPONENTS: usize = 3;

/// Point state. Scalar laws use component 0 and leave the rest at zero.
pub type State = [f64; MAX_COMPONENTS];

/// Adiabatic exponent of air.
pub const GAMMA_AIR: f64 = 1.4;
/// Throat height of the nozzle.
pub const NOZZLE_THROAT: f64 = 0.8;

/// A state outside the admissible set (non-positive density or pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct Inadmissible(pub String);

impl fmt::Display for Inadmissible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConservationLaw {
    /// `F(u) = beta u`.
    Convection { beta: f64 },
    /// `F(u) = u^2 / 2`.
    Burgers,
    /// Conserved variables `(rho, rho u, rho E)`.
    Euler { gamma: f64 },
    /// Area-weighted conserved variables `(A rho, A rho u, A rho E)`.
    Nozzle { gamma: f64, throat: f64 },
}

impl ConservationLaw {
    /// Parse a law from its configuration name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "convection" => Ok(Self::Convection { beta: 1.0 }),
            "burgers" => Ok(Self::Burgers),
            "euler1d" => Ok(Self::Euler { gamma: GAMMA_AIR }),
            "nozzle" => Ok(Self::Nozzle {
                gamma: GAMMA_AIR,
                throat: NOZZLE_THROAT,
            }),
            other => Err(Error::Config(format!("unknown conservation law '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Convection { .. } => "convection",
            Self::Burgers => "burgers",
            Self::Euler { .. } => "euler1d",
            Self::Nozzle { .. } => "nozzle",
        }
    }

    /// Number of solution components `m`.
    pub fn components(&self) -> usize {
        match self {
            Self::Convection { .. } | Self::Burgers => 1,
            Self::Euler { .. } | Self::Nozzle { .. } => 3,
        }
    }

    fn gas_gamma(&self) -> Option<f64> {
        match *self {
            Self::Euler { gamma } | Self::Nozzle { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    /// Cross-section area factor applied to the conserved variables at `x`.
    pub fn area(&self, x: f64) -> f64 {
        match *self {
            Self::Nozzle { throat, .. } => nozzle_area_with(x, throat).0,
            _ => 1.0,
        }
    }

    /// Conserved state from density, velocity and pressure (gas dynamics only).
    pub fn conserved_from_primitive(&self, rho: f64, u: f64, p: f64, x: f64) -> State {
        let g = self.gas_gamma().expect("primitive variables need a gas law");
        let a = self.area(x);
        [a * rho, a * rho * u, a * (p / (g - 1.0) + 0.5 * rho * u * u)]
    }

    /// `(rho, u, p)` from a conserved state (gas dynamics only).
    pub fn primitive(&self, u: &State, x: f64) -> std::result::Result<[f64; 3], Inadmissible> {
        let g = self.gas_gamma().expect("primitive variables need a gas law");
        let a = self.area(x);
        let (rho, vel, p) = euler_primitive(u, g)?;
        Ok([rho / a, vel, p / a])
    }

    /// Physical flux `F(u)`.
    pub fn flux(&self, u: &State, _x: f64) -> std::result::Result<State, Inadmissible> {
        match *self {
            Self::Convection { beta } => Ok([beta * u[0], 0.0, 0.0]),
            Self::Burgers => Ok([0.5 * u[0] * u[0], 0.0, 0.0]),
            // with area-weighted variables the "pressure" of the weighted state is A p,
            // so the nozzle flux has exactly the Euler form
            Self::Euler { gamma } | Self::Nozzle { gamma, .. } => {
                let (_, vel, p) = euler_primitive(u, gamma)?;
                Ok(euler_flux(u, vel, p))
            }
        }
    }

    /// Largest characteristic speed `max |lambda|` at `u`.
    pub fn max_wave_speed(&self, u: &State, _x: f64) -> std::result::Result<f64, Inadmissible> {
        match *self {
            Self::Convection { beta } => Ok(beta.abs()),
            Self::Burgers => Ok(u[0].abs()),
            Self::Euler { gamma } | Self::Nozzle { gamma, .. } => {
                let (rho, vel, p) = euler_primitive(u, gamma)?;
                Ok(vel.abs() + (gamma * p / rho).sqrt())
            }
        }
    }

    /// Roe flux without entropy fix.
    pub fn roe_flux(&self, ul: &State, ur: &State) -> std::result::Result<State, Inadmissible> {
        self.roe_flux_with(ul, ur, false)
    }

    /// Roe flux `1/2 (F(uL) + F(uR)) - 1/2 |A~| (uR - uL)`. The optional Harten
    /// entropy fix applies to the gas-dynamics laws only.
    pub fn roe_flux_with(
        &self,
        ul: &State,
        ur: &State,
        entropy_fix: bool,
    ) -> std::result::Result<State, Inadmissible> {
        match *self {
            Self::Convection { beta } => {
                // the Roe formula with a single wave is exact upwinding
                let f = if beta >= 0.0 { beta * ul[0] } else { beta * ur[0] };
                Ok([f, 0.0, 0.0])
            }
            Self::Burgers => {
                let a = 0.5 * (ul[0] + ur[0]);
                let f = 0.25 * (ul[0] * ul[0] + ur[0] * ur[0]) - 0.5 * a.abs() * (ur[0] - ul[0]);
                Ok([f, 0.0, 0.0])
            }
            Self::Euler { gamma } | Self::Nozzle { gamma, .. } => {
                euler_roe_flux(ul, ur, gamma, entropy_fix)
            }
        }
    }

    /// Geometric source term; non-zero only for the nozzle momentum equation.
    pub fn source(&self, u: &State, x: f64) -> std::result::Result<State, Inadmissible> {
        match *self {
            Self::Nozzle { gamma, throat } => {
                let (area, darea) = nozzle_area_with(x, throat);
                if darea == 0.0 {
                    return Ok([0.0; 3]);
                }
                let (_, _, pw) = euler_primitive(u, gamma)?;
                Ok([0.0, pw / area * darea, 0.0])
            }
            _ => Ok([0.0; 3]),
        }
    }

    pub fn has_source(&self) -> bool {
        matches!(self, Self::Nozzle { .. })
    }

    /// Roe matrix `A~` of the gas-dynamics laws, for checking the Roe property.
    pub fn roe_matrix(&self, ul: &State, ur: &State) -> std::result::Result<[[f64; 3]; 3], Inadmissible> {
        let g = self.gas_gamma().expect("Roe matrix is defined for gas dynamics");
        let avg = roe_average(ul, ur, g)?;
        let (u, h) = (avg.u, avg.h);
        Ok([
            [0.0, 1.0, 0.0],
            [0.5 * (g - 3.0) * u * u, (3.0 - g) * u, g - 1.0],
            [u * (0.5 * (g - 1.0) * u * u - h), h - (g - 1.0) * u * u, g * u],
        ])
    }
}

/// `(rho, u, p)` of an Euler state with admissibility check.
fn euler_primitive(u: &State, gamma: f64) -> std::result::Result<(f64, f64, f64), Inadmissible> {
    let rho = u[0];
    if !(rho > 0.0) {
        return Err(Inadmissible(format!("non-positive density {rho}")));
    }
    let vel = u[1] / rho;
    let p = (gamma - 1.0) * (u[2] - 0.5 * rho * vel * vel);
    if !(p > 0.0) {
        return Err(Inadmissible(format!("non-positive pressure {p}")));
    }
    Ok((rho, vel, p))
}

fn euler_flux(u: &State, vel: f64, p: f64) -> State {
    [u[1], u[1] * vel + p, (u[2] + p) * vel]
}

struct RoeAverage {
    rho: f64,
    u: f64,
    h: f64,
    c: f64,
}

fn roe_average(ul: &State, ur: &State, gamma: f64) -> std::result::Result<RoeAverage, Inadmissible> {
    let (rl, vl, pl) = euler_primitive(ul, gamma)?;
    let (rr, vr, pr) = euler_primitive(ur, gamma)?;
    let hl = (ul[2] + pl) / rl;
    let hr = (ur[2] + pr) / rr;
    let (sl, sr) = (rl.sqrt(), rr.sqrt());
    let u = (sl * vl + sr * vr) / (sl + sr);
    let h = (sl * hl + sr * hr) / (sl + sr);
    let c2 = (gamma - 1.0) * (h - 0.5 * u * u);
    if !(c2 > 0.0) {
        return Err(Inadmissible(format!("negative Roe-averaged sound speed squared {c2}")));
    }
    Ok(RoeAverage {
        rho: sl * sr,
        u,
        h,
        c: c2.sqrt(),
    })
}

fn euler_roe_flux(
    ul: &State,
    ur: &State,
    gamma: f64,
    entropy_fix: bool,
) -> std::result::Result<State, Inadmissible> {
    let (rl, vl, pl) = euler_primitive(ul, gamma)?;
    let (rr, vr, pr) = euler_primitive(ur, gamma)?;
    let fl = euler_flux(ul, vl, pl);
    let fr = euler_flux(ur, vr, pr);
    let avg = roe_average(ul, ur, gamma)?;
    let (u, h, c) = (avg.u, avg.h, avg.c);

    let (dr, du, dp) = (rr - rl, vr - vl, pr - pl);
    let c2 = c * c;
    let alpha = [
        (dp - avg.rho * c * du) / (2.0 * c2),
        dr - dp / c2,
        (dp + avg.rho * c * du) / (2.0 * c2),
    ];
    let mut lambda = [(u - c).abs(), u.abs(), (u + c).abs()];
    if entropy_fix {
        let eps = 0.05 * (u.abs() + c);
        for l in &mut lambda {
            if *l < eps {
                *l = (*l * *l) / (2.0 * eps) + 0.5 * eps;
            }
        }
    }
    let vectors = [
        [1.0, u - c, h - u * c],
        [1.0, u, 0.5 * u * u],
        [1.0, u + c, h + u * c],
    ];
    let mut f = [0.0; 3];
    for i in 0..3 {
        let diss: f64 = (0..3).map(|k| lambda[k] * alpha[k] * vectors[k][i]).sum();
        f[i] = 0.5 * (fl[i] + fr[i]) - 0.5 * diss;
    }
    Ok(f)
}

fn nozzle_area_with(x: f64, throat: f64) -> (f64, f64) {
    if (0.1..=0.9).contains(&x) {
        let theta = PI * (x - 0.5) / 0.8;
        let a = 1.0 - (1.0 - throat) * theta.cos().powi(2);
        let da = (1.0 - throat) * (2.0 * theta).sin() * PI / 0.8;
        (a, da)
    } else {
        (1.0, 0.0)
    }
}

/// Nozzle cross-section `A(x)` and `dA/dx`.
pub fn nozzle_area(x: f64) -> (f64, f64) {
    nozzle_area_with(x, NOZZLE_THROAT)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    /// Ghost state fixed to the given conserved state.
    Prescribed(State),
    /// Reflective wall: velocity negated.
    SolidWall,
    /// Far-field data `(rho, u, M)`; the ghost is the full state it defines.
    WeakFarfield { density: f64, velocity: f64, mach: f64 },
    /// Subsonic inflow holding the total pressure and enthalpy of the far-field
    /// state `(rho, u, M)`; the velocity comes from the interior.
    TotalInflow { density: f64, velocity: f64, mach: f64 },
    /// Subsonic outflow holding the static pressure of the far-field state
    /// `(rho, u, M)`; density and velocity come from the interior.
    PressureOutflow { density: f64, velocity: f64, mach: f64 },
}

/// Exterior state paired with the interior trace `interior` at boundary point `x`.
/// `opposite` is the interior trace at the other end of the domain, used by
/// periodic boundaries.
pub fn boundary_ghost(
    bc: &BoundaryCondition,
    interior: &State,
    opposite: &State,
    law: &ConservationLaw,
    x: f64,
    _t: f64,
) -> Result<State> {
    match *bc {
        BoundaryCondition::Periodic => Ok(*opposite),
        BoundaryCondition::Prescribed(state) => Ok(state),
        BoundaryCondition::SolidWall => match law {
            ConservationLaw::Euler { .. } | ConservationLaw::Nozzle { .. } => {
                Ok([interior[0], -interior[1], interior[2]])
            }
            _ => Err(Error::Config(format!(
                "solid wall is not defined for {}",
                law.name()
            ))),
        },
        BoundaryCondition::WeakFarfield {
            density,
            velocity,
            mach,
        } => {
            let Some(gamma) = law.gas_gamma() else {
                return Err(Error::Config(format!(
                    "far-field data is not defined for {}",
                    law.name()
                )));
            };
            Ok(law.conserved_from_primitive(density, velocity, farfield_pressure(density, velocity, mach, gamma)?, x))
        }
        BoundaryCondition::TotalInflow {
            density,
            velocity,
            mach,
        } => {
            let gamma = gas_law(law)?;
            let p_far = farfield_pressure(density, velocity, mach, gamma)?;
            let cp_ratio = gamma / (gamma - 1.0);
            let h_total = cp_ratio * p_far / density + 0.5 * velocity * velocity;
            let p_total = p_far * (h_total / (cp_ratio * p_far / density)).powf(cp_ratio);
            let [_, u_in, _] = interior_primitive(law, interior, x)?;
            let u = u_in.clamp(0.0, (2.0 * h_total).sqrt() * 0.999);
            let h = h_total - 0.5 * u * u;
            let p = p_total * (h / h_total).powf(cp_ratio);
            let rho = cp_ratio * p / h;
            Ok(law.conserved_from_primitive(rho, u, p, x))
        }
        BoundaryCondition::PressureOutflow {
            density,
            velocity,
            mach,
        } => {
            let gamma = gas_law(law)?;
            let p = farfield_pressure(density, velocity, mach, gamma)?;
            let [rho, u, p_in] = interior_primitive(law, interior, x)?;
            let c = (gamma * p_in / rho).sqrt();
            // supersonic outflow takes every characteristic from the interior
            let p = if u >= c { p_in } else { p };
            Ok(law.conserved_from_primitive(rho, u, p, x))
        }
    }
}

/// The element index is filled in by the caller.
fn interior_primitive(law: &ConservationLaw, interior: &State, x: f64) -> Result<[f64; 3]> {
    law.primitive(interior, x).map_err(|e| Error::Inadmissible {
        element: 0,
        x,
        reason: e.0,
    })
}

fn gas_law(law: &ConservationLaw) -> Result<f64> {
    law.gas_gamma()
        .ok_or_else(|| Error::Config(format!("far-field data is not defined for {}", law.name())))
}

/// Pressure of the far-field state `(rho, u, M)`: `c = u/M`, `p = rho c^2 / gamma`.
pub fn farfield_pressure(density: f64, velocity: f64, mach: f64, gamma: f64) -> Result<f64> {
    if mach == 0.0 {
        return Err(Error::Config("far-field Mach number must be non-zero".into()));
    }
    let c = velocity / mach;
    Ok(density * c * c / gamma)
}
