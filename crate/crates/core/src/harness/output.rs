use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::solver::{Discretization, Snapshot};

use super::run::{RunArtifacts, Summary};
use super::study::ErrorRecord;

/// Time label used in file names: fixed six decimals with trailing zeros removed.
pub fn time_label(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

/// One row per sub-cell: center, point value of every component there, and
/// the element's sensor data.
pub fn snapshot_csv(disc: &Discretization, snap: &Snapshot) -> String {
    let m = disc.components();
    let mut out = String::from("x,element,subcell");
    for c in 0..m {
        write!(out, ",u{c}").unwrap();
    }
    out.push_str(",s,s0,gamma\n");
    let mesh = disc.mesh();
    for l in 0..mesh.n_elements() {
        for j in 0..mesh.n_sub() {
            let (a, b) = mesh.subcell_bounds(l, j).expect("sub-cell index");
            let x = 0.5 * (a + b);
            let v = disc.evaluate_reference(&snap.state, l, disc.element_space(l).to_reference(x));
            write!(out, "{x:.15e},{l},{j}").unwrap();
            for val in v.iter().take(m) {
                write!(out, ",{val:.15e}").unwrap();
            }
            writeln!(
                out,
                ",{:.15e},{:.15e},{:.15e}",
                snap.sensor.s[l], snap.sensor.s0[l], snap.sensor.gamma[l]
            )
            .unwrap();
        }
    }
    out
}

/// One row per element with its bounds and sensor data.
pub fn sensor_csv(disc: &Discretization, snap: &Snapshot) -> String {
    let mut out = String::from("element,x_left,x_right,s,s0,gamma\n");
    for l in 0..disc.mesh().n_elements() {
        let (a, b) = disc.mesh().element_bounds(l).expect("element index");
        writeln!(
            out,
            "{l},{a:.15e},{b:.15e},{:.15e},{:.15e},{:.15e}",
            snap.sensor.s[l], snap.sensor.s0[l], snap.sensor.gamma[l]
        )
        .unwrap();
    }
    out
}

pub fn convergence_csv(records: &[ErrorRecord]) -> String {
    let mut out = String::from("p,n,n_elements,h,norm,error,observed_order,steps,status\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.15e}"));
    for r in records {
        writeln!(
            out,
            "{},{},{},{:.15e},{},{},{},{},{}",
            r.p,
            r.n,
            r.n_elements,
            r.h,
            r.norm.name(),
            opt(r.error),
            opt(r.observed_order),
            r.steps,
            r.status
        )
        .unwrap();
    }
    out
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    Ok(serde_json::to_string_pretty(summary)?)
}

/// Writes every snapshot, its sensor table and `summary.json` into `dir`.
pub fn write_artifacts(art: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for snap in &art.snapshots {
        let label = time_label(snap.time);
        let p = dir.join(format!("snapshot_t{label}.csv"));
        std::fs::write(&p, snapshot_csv(&art.disc, snap))?;
        written.push(p);
        let p = dir.join(format!("sensor_t{label}.csv"));
        std::fs::write(&p, sensor_csv(&art.disc, snap))?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    std::fs::write(&p, summary_json(&art.summary)?)?;
    written.push(p);
    Ok(written)
}

pub fn write_convergence(records: &[ErrorRecord], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join("convergence.csv");
    std::fs::write(&p, convergence_csv(records))?;
    Ok(p)
}
