use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    ConvectionGaussian,
    ConvectionHeaviside,
    ConvectionRecovery,
    Burgers,
    Nozzle,
    ShuOsher,
    FvComparison,
}

impl CaseKind {
    pub const ALL: [CaseKind; 7] = [
        CaseKind::ConvectionGaussian,
        CaseKind::ConvectionHeaviside,
        CaseKind::ConvectionRecovery,
        CaseKind::Burgers,
        CaseKind::Nozzle,
        CaseKind::ShuOsher,
        CaseKind::FvComparison,
    ];

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown case '{name}'")))
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::ConvectionGaussian => "convection-gaussian",
            CaseKind::ConvectionHeaviside => "convection-heaviside",
            CaseKind::ConvectionRecovery => "convection-recovery",
            CaseKind::Burgers => "burgers",
            CaseKind::Nozzle => "nozzle",
            CaseKind::ShuOsher => "shu-osher",
            CaseKind::FvComparison => "fv-comparison",
        }
    }

    pub fn is_convection(self) -> bool {
        matches!(
            self,
            CaseKind::ConvectionGaussian | CaseKind::ConvectionHeaviside | CaseKind::ConvectionRecovery
        )
    }

    /// Shu-Osher setup, run either with the DG space or as plain finite volumes.
    pub fn is_shock_tube(self) -> bool {
        matches!(self, CaseKind::ShuOsher | CaseKind::FvComparison)
    }
}

/// Config file contents before case defaults are applied. Every key is optional
/// and command-line flags override keys one for one.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub case: Option<String>,
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub n_elements: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub c_pen: Option<f64>,
    pub tau: Option<f64>,
    /// `"<element>:<gamma>"`.
    pub force_gamma: Option<String>,
    pub snapshot_times: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cfl: Option<f64>,
    pub entropy_fix: Option<bool>,
    pub reference_cells: Option<usize>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RawConfig) -> RawConfig {
        RawConfig {
            case: other.case.or(self.case),
            p: other.p.or(self.p),
            n: other.n.or(self.n),
            n_elements: other.n_elements.or(self.n_elements),
            dt: other.dt.or(self.dt),
            t_final: other.t_final.or(self.t_final),
            c_pen: other.c_pen.or(self.c_pen),
            tau: other.tau.or(self.tau),
            force_gamma: other.force_gamma.or(self.force_gamma),
            snapshot_times: other.snapshot_times.or(self.snapshot_times),
            output_dir: other.output_dir.or(self.output_dir),
            seed: other.seed.or(self.seed),
            cfl: other.cfl.or(self.cfl),
            entropy_fix: other.entropy_fix.or(self.entropy_fix),
            reference_cells: other.reference_cells.or(self.reference_cells),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub case: CaseKind,
    pub p: usize,
    pub n: usize,
    pub n_elements: usize,
    /// Fixed step; `None` selects `cfl * h_sub / lambda_max` from the initial state.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub c_pen: f64,
    /// Sensor threshold; `None` means `0.01 / p`.
    pub tau: Option<f64>,
    pub force_gamma: Option<(usize, f64)>,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub cfl: f64,
    pub entropy_fix: bool,
    /// Cell count of the finite-volume reference used for error norms, if any.
    pub reference_cells: Option<usize>,
}

pub const DEFAULT_CFL: f64 = 0.15;

impl RunConfig {
    /// Parameters of `case` as used in the experiments.
    pub fn for_case(case: CaseKind) -> Self {
        let base = RunConfig {
            case,
            p: 4,
            n: 8,
            n_elements: 16,
            dt: None,
            t_final: 1.0,
            c_pen: crate::sensor::DEFAULT_C_PEN,
            tau: None,
            force_gamma: None,
            snapshot_times: Vec::new(),
            output_dir: PathBuf::from("output"),
            seed: 0,
            cfl: DEFAULT_CFL,
            entropy_fix: false,
            reference_cells: None,
        };
        match case {
            CaseKind::ConvectionGaussian | CaseKind::ConvectionHeaviside => base,
            CaseKind::ConvectionRecovery => RunConfig {
                force_gamma: Some((8, crate::sensor::DEFAULT_C_PEN)),
                snapshot_times: vec![0.0, 0.25, 0.3, 0.5, 1.0],
                ..base
            },
            CaseKind::Burgers => RunConfig {
                n_elements: 9,
                dt: Some(1e-3),
                t_final: 0.88,
                snapshot_times: (1..=8).map(|k| 0.11 * k as f64).collect(),
                ..base
            },
            CaseKind::Nozzle => RunConfig {
                n_elements: 9,
                dt: Some(2e-4),
                t_final: 0.4,
                snapshot_times: (1..=8).map(|k| 0.05 * k as f64).collect(),
                ..base
            },
            CaseKind::ShuOsher => RunConfig {
                p: 3,
                n: 5,
                n_elements: 64,
                t_final: 1.78,
                ..base
            },
            CaseKind::FvComparison => RunConfig {
                p: 0,
                n: 5,
                n_elements: 64,
                t_final: 1.78,
                ..base
            },
        }
    }

    /// Applies `raw` on top of the defaults of its case and validates the result.
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let case = CaseKind::from_name(
            raw.case
                .as_deref()
                .ok_or_else(|| Error::Config("missing key 'case'".into()))?,
        )?;
        let d = Self::for_case(case);
        let force_gamma = match raw.force_gamma {
            Some(s) => Some(parse_force_gamma(&s)?),
            None => d.force_gamma,
        };
        let cfg = RunConfig {
            case,
            p: raw.p.unwrap_or(d.p),
            n: raw.n.unwrap_or(d.n),
            n_elements: raw.n_elements.unwrap_or(d.n_elements),
            dt: raw.dt.or(d.dt),
            t_final: raw.t_final.unwrap_or(d.t_final),
            c_pen: raw.c_pen.unwrap_or(d.c_pen),
            tau: raw.tau.or(d.tau),
            force_gamma,
            snapshot_times: raw.snapshot_times.unwrap_or(d.snapshot_times),
            output_dir: raw.output_dir.unwrap_or(d.output_dir),
            seed: raw.seed.unwrap_or(d.seed),
            cfl: raw.cfl.unwrap_or(d.cfl),
            entropy_fix: raw.entropy_fix.unwrap_or(d.entropy_fix),
            reference_cells: raw.reference_cells.or(d.reference_cells),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 || self.n_elements == 0 {
            return bad("n and n_elements must be positive".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if !(self.cfl > 0.0) {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if !(self.c_pen >= 0.0) {
            return bad(format!("c_pen must be non-negative, got {}", self.c_pen));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 0.0) {
                return bad(format!("tau must be non-negative, got {tau}"));
            }
        }
        if let Some((l, g)) = self.force_gamma {
            if l >= self.n_elements {
                return bad(format!("force_gamma element {l} out of range"));
            }
            if !(g >= 0.0) {
                return Err(Error::NegativePenalty(g));
            }
        }
        if self.case == CaseKind::FvComparison && self.p != 0 {
            return bad("fv-comparison runs with p = 0".into());
        }
        if self.entropy_fix && !(self.case.is_shock_tube() || self.case == CaseKind::Nozzle) {
            return bad("entropy_fix applies to gas dynamics cases only".into());
        }
        Ok(())
    }

    pub fn sensor_params(&self) -> crate::sensor::SensorParams {
        crate::sensor::SensorParams {
            c_pen: self.c_pen,
            tau: self.tau,
            s_eps: crate::sensor::DEFAULT_S_EPS,
        }
    }
}

/// Parses `"<element>:<gamma>"`.
pub fn parse_force_gamma(s: &str) -> Result<(usize, f64)> {
    let err = || Error::Config(format!("force_gamma expects '<element>:<gamma>', got '{s}'"));
    let (l, g) = s.split_once(':').ok_or_else(err)?;
    let l = l.trim().parse().map_err(|_| err())?;
    let g: f64 = g.trim().parse().map_err(|_| err())?;
    Ok((l, g))
}
