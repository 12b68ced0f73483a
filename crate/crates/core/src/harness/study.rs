use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::build_uniform_mesh;
use crate::physics::{BoundaryCondition, ConservationLaw};
use crate::solver::{Discretization, DiscretizationOptions};

use super::cases::{domain, setup_case};
use super::config::RunConfig;
use super::norms::{error_norm, observed_order, NormKind};
use super::run::{resolve_time_step, run_case_with};

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub p: usize,
    pub n: usize,
    pub n_elements: usize,
    pub h: f64,
    pub norm: NormKind,
    pub error: Option<f64>,
    /// Against the next coarser level; absent on the first level.
    pub observed_order: Option<f64>,
    pub steps: usize,
    pub status: String,
}

/// Step size for one level of a study. An explicit `dt` is used unchanged.
/// Otherwise the CFL rule is scaled by `(h / h_0)^((p+1)/2 - 1)` so the
/// second-order time error shrinks like the spatial error `h^(p+1)`.
pub fn level_time_step(base: &RunConfig, level: usize, first_level: usize) -> Result<f64> {
    if let Some(dt) = base.dt {
        return Ok(dt);
    }
    let cfg = RunConfig {
        n_elements: level,
        ..base.clone()
    };
    let setup = setup_case(&cfg)?;
    let dt = resolve_time_step(&cfg, &setup.disc, &setup.initial)?;
    let exponent = (0.5 * (base.p as f64 + 1.0) - 1.0).max(0.0);
    Ok(dt * (first_level as f64 / level as f64).powf(exponent))
}

fn attach_orders(records: &mut [ErrorRecord]) {
    for norm in [NormKind::L1, NormKind::L2] {
        let idx: Vec<usize> = (0..records.len()).filter(|i| records[*i].norm == norm).collect();
        for w in idx.windows(2) {
            let (a, b) = (&records[w[0]], &records[w[1]]);
            if let (Some(ea), Some(eb)) = (a.error, b.error) {
                let order = observed_order(ea, eb, a.h, b.h);
                records[w[1]].observed_order = Some(order);
            }
        }
    }
}

/// Runs `base` at every element count in `levels` (independent runs, in
/// parallel) and reports L1 and L2 errors against the exact solution with
/// observed orders. A failing level is reported in its status without stopping the study.
pub fn convergence_study(base: &RunConfig, levels: &[usize]) -> Result<Vec<ErrorRecord>> {
    if levels.len() < 3 {
        return Err(Error::Config("a convergence study needs at least 3 levels".into()));
    }
    if !levels.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Config("levels must be strictly increasing".into()));
    }
    if !base.case.is_convection() {
        return Err(Error::Config(format!(
            "convergence studies need an exact reference; '{}' has none",
            base.case.name()
        )));
    }
    let (a, b) = domain(base.case);
    let per_level: Vec<Vec<ErrorRecord>> = levels
        .par_iter()
        .map(|&level| {
            let cfg = RunConfig {
                n_elements: level,
                snapshot_times: Vec::new(),
                ..base.clone()
            };
            let h = (b - a) / level as f64;
            let record = |norm, error, steps, status: &str| ErrorRecord {
                p: cfg.p,
                n: cfg.n,
                n_elements: level,
                h,
                norm,
                error,
                observed_order: None,
                steps,
                status: status.to_string(),
            };
            let outcome = level_time_step(base, level, levels[0])
                .and_then(|dt| run_case_with(&cfg, Some(dt), |_, _| {}));
            match outcome {
                Ok(art) => {
                    let e = &art.summary.errors;
                    let (l1, l2) = (e.l1_reference, e.l2_reference);
                    let steps = art.summary.steps;
                    vec![record(NormKind::L1, l1, steps, "ok"), record(NormKind::L2, l2, steps, "ok")]
                }
                Err(err) => {
                    let msg = err.to_string().replace(',', ";");
                    vec![record(NormKind::L1, None, 0, &msg), record(NormKind::L2, None, 0, &msg)]
                }
            }
        })
        .collect();
    let mut records: Vec<ErrorRecord> = per_level.into_iter().flatten().collect();
    attach_orders(&mut records);
    Ok(records)
}

/// Projection error of `f` on `(a, b)` at each element count, no time stepping.
pub fn projection_study<F: Fn(f64) -> f64 + Sync>(
    f: F,
    (a, b): (f64, f64),
    p: usize,
    n: usize,
    levels: &[usize],
    norm: NormKind,
) -> Result<Vec<ErrorRecord>> {
    let mut records = Vec::with_capacity(levels.len());
    for &level in levels {
        let disc = Discretization::new(
            build_uniform_mesh(a, b, level, n)?,
            ConservationLaw::Convection { beta: 1.0 },
            p,
            BoundaryCondition::Periodic,
            BoundaryCondition::Periodic,
            DiscretizationOptions::default(),
        )?;
        let u = disc.project(|x| [f(x), 0.0, 0.0], &[]);
        records.push(ErrorRecord {
            p,
            n,
            n_elements: level,
            h: (b - a) / level as f64,
            norm,
            error: Some(error_norm(&disc, &u, 0, &f, &[], norm)),
            observed_order: None,
            steps: 0,
            status: "ok".into(),
        });
    }
    attach_orders(&mut records);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::CaseKind;

    #[test]
    fn rejects_short_or_unsorted_levels() {
        let base = RunConfig::for_case(CaseKind::ConvectionGaussian);
        assert!(convergence_study(&base, &[8, 16]).is_err());
        assert!(convergence_study(&base, &[16, 8, 32]).is_err());
        let burgers = RunConfig::for_case(CaseKind::Burgers);
        assert!(convergence_study(&burgers, &[4, 8, 16]).is_err());
    }

    #[test]
    fn projection_rate_linear_elements() {
        let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
        let recs = projection_study(f, (0.0, 1.0), 1, 2, &[8, 16, 32], NormKind::L2).unwrap();
        let order = recs[2].observed_order.unwrap();
        assert!((order - 2.0).abs() < 0.2, "{order}");
        assert!(recs[0].observed_order.is_none());
    }

    #[test]
    fn zero_time_study_measures_the_projection() {
        let base = RunConfig {
            p: 2,
            t_final: 0.0,
            ..RunConfig::for_case(CaseKind::ConvectionGaussian)
        };
        let recs = convergence_study(&base, &[4, 8, 16]).unwrap();
        assert!(recs.iter().all(|r| r.steps == 0 && r.status == "ok"));
        let l2: Vec<&ErrorRecord> = recs.iter().filter(|r| r.norm == NormKind::L2).collect();
        let order = l2[2].observed_order.unwrap();
        assert!(order > 2.5, "{order}");
    }
}
