//! Fine-grid first-order finite-volume reference solutions with a disk cache.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{boundary_ghost, BoundaryCondition, ConservationLaw, State};

use super::cases;
use super::config::CaseKind;

/// CFL number of the forward-Euler march.
pub const FV_CFL: f64 = 0.4;

/// Problems the reference solver knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceCase {
    Case(CaseKind),
    /// Shu-Osher inlet state against the still ambient gas `(1, 0, 1)`:
    /// a single right-moving shock.
    SingleShock,
}

impl ReferenceCase {
    pub fn from_name(name: &str) -> Result<Self> {
        if name == "single-shock" {
            return Ok(Self::SingleShock);
        }
        let case = CaseKind::from_name(name)?;
        if case == CaseKind::Nozzle {
            return Err(Error::Config("no finite-volume reference for the nozzle".into()));
        }
        Ok(Self::Case(case))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Case(c) => c.name(),
            Self::SingleShock => "single-shock",
        }
    }

    fn kind(self) -> CaseKind {
        match self {
            Self::Case(c) => c,
            Self::SingleShock => CaseKind::ShuOsher,
        }
    }

    pub fn default_final_time(self) -> f64 {
        match self.kind() {
            CaseKind::Burgers => 0.88,
            CaseKind::ShuOsher | CaseKind::FvComparison => 1.78,
            _ => 1.0,
        }
    }

    fn initial(self, x: f64) -> State {
        match self {
            Self::SingleShock => {
                let law = cases::law(CaseKind::ShuOsher);
                let [r, u, p] = if x < cases::SHU_OSHER_JUMP {
                    cases::SHU_OSHER_INLET
                } else {
                    [1.0, 0.0, 1.0]
                };
                law.conserved_from_primitive(r, u, p, x)
            }
            Self::Case(c) => (cases::initial_condition(c).0)(x),
        }
    }
}

/// Cell averages of a finite-volume solution on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvSolution {
    pub case: String,
    pub cells: usize,
    pub t_final: f64,
    pub domain: (f64, f64),
    pub components: usize,
    pub values: Vec<State>,
}

impl FvSolution {
    pub fn dx(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.cells as f64
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let i = ((x - self.domain.0) / self.dx()).floor();
        (i.max(0.0) as usize).min(self.cells - 1)
    }

    /// Piecewise-constant value at `x`.
    pub fn sample(&self, x: f64) -> State {
        self.values[self.cell_of(x)]
    }

    /// Interior cell edges, where the sampler jumps.
    pub fn breaks(&self) -> Vec<f64> {
        (1..self.cells)
            .map(|i| self.domain.0 + i as f64 * self.dx())
            .collect()
    }

    /// `int |u_c - v_c| dx` against another solution of the same problem,
    /// exact for piecewise constants.
    pub fn l1_difference(&self, other: &FvSolution, component: usize) -> f64 {
        let mut edges = self.breaks();
        edges.extend(other.breaks());
        edges.push(self.domain.0);
        edges.push(self.domain.1);
        edges.sort_by(|a, b| a.total_cmp(b));
        edges
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * (self.sample(m)[component] - other.sample(m)[component]).abs()
            })
            .sum()
    }

    fn is_consistent(&self, case: ReferenceCase, cells: usize, t_final: f64) -> bool {
        self.case == case.name()
            && self.cells == cells
            && self.values.len() == cells
            && self.t_final == t_final
            && self.values.iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// First-order Roe finite volumes with forward Euler at CFL [`FV_CFL`].
pub fn solve_fv(case: ReferenceCase, cells: usize, t_final: f64) -> Result<FvSolution> {
    if cells < 2 {
        return Err(Error::Config("reference needs at least two cells".into()));
    }
    let kind = case.kind();
    let law: ConservationLaw = cases::law(kind);
    let (left, right) = cases::boundaries(kind);
    let (a, b) = cases::domain(kind);
    let m = law.components();
    let dx = (b - a) / cells as f64;
    let (nodes, weights) = crate::basis::gauss_rule(4);
    let split = [cases::SHU_OSHER_JUMP, cases::HEAVISIDE_JUMP];
    let mut u: Vec<State> = (0..cells)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * dx, a + (i + 1) as f64 * dx);
            let mut pieces = vec![x0];
            pieces.extend(split.iter().filter(|s| **s > x0 && **s < x1));
            pieces.push(x1);
            let mut avg = [0.0; 3];
            for w in pieces.windows(2) {
                let half = 0.5 * (w[1] - w[0]);
                for (t, wt) in nodes.iter().zip(&weights) {
                    let s = case.initial(0.5 * (w[0] + w[1]) + half * t);
                    for c in 0..m {
                        avg[c] += wt * half * s[c] / dx;
                    }
                }
            }
            avg
        })
        .collect();
    let fail = |i: usize, e: crate::physics::Inadmissible| Error::Inadmissible {
        element: i,
        x: a + i as f64 * dx,
        reason: e.0,
    };
    let mut flux = vec![[0.0; 3]; cells + 1];
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_final {
        let mut lam = 0.0f64;
        for (i, s) in u.iter().enumerate() {
            lam = lam.max(law.max_wave_speed(s, a + (i as f64 + 0.5) * dx).map_err(|e| fail(i, e))?);
        }
        let mut dt = FV_CFL * dx / lam.max(1e-300);
        if t + dt > t_final {
            dt = t_final - t;
        }
        let gl = boundary_ghost(&left, &u[0], &u[cells - 1], &law, a, t)?;
        let gr = boundary_ghost(&right, &u[cells - 1], &u[0], &law, b, t)?;
        flux[0] = law.roe_flux_with(&gl, &u[0], true).map_err(|e| fail(0, e))?;
        for i in 1..cells {
            flux[i] = law.roe_flux_with(&u[i - 1], &u[i], true).map_err(|e| fail(i, e))?;
        }
        flux[cells] = if left == BoundaryCondition::Periodic {
            flux[0]
        } else {
            law.roe_flux_with(&u[cells - 1], &gr, true).map_err(|e| fail(cells - 1, e))?
        };
        let r = dt / dx;
        for (i, s) in u.iter_mut().enumerate() {
            for c in 0..m {
                s[c] -= r * (flux[i + 1][c] - flux[i][c]);
            }
        }
        t += dt;
        step += 1;
        if u.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite { step, time: t });
        }
    }
    Ok(FvSolution {
        case: case.name().to_string(),
        cells,
        t_final,
        domain: (a, b),
        components: m,
        values: u,
    })
}

pub fn cache_path(dir: &Path, case: ReferenceCase, cells: usize) -> PathBuf {
    dir.join(format!("fv_{}_{}.json", case.name(), cells))
}

/// Reference solution at the case's default final time, read from
/// `cache_dir` when a valid cached copy exists and written back otherwise.
/// Unreadable or inconsistent cache files are recomputed.
pub fn fv_reference(case: ReferenceCase, cells: usize, cache_dir: Option<&Path>) -> Result<FvSolution> {
    let t_final = case.default_final_time();
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, case, cells);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(sol) = serde_json::from_str::<FvSolution>(&text) {
                if sol.is_consistent(case, cells, t_final) {
                    return Ok(sol);
                }
            }
        }
        let sol = solve_fv(case, cells, t_final)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string(&sol)?)?;
        std::fs::rename(&tmp, &path)?;
        return Ok(sol);
    }
    solve_fv(case, cells, t_final)
}

/// Default cache location: `$SUBCELL_DG_CACHE` or `.fv-cache` under the
/// current directory.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os("SUBCELL_DG_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".fv-cache"))
}
