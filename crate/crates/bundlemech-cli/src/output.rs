//! Deterministic artifacts for `simulate` and `reduce`.
//!
//! `simulate` writes one CSV per run — time, base point, fibre matrix
//! entries, momenta, energy, and the conserved momentum map — plus a JSON
//! sidecar with the integration summary.  `reduce` prints a JSON comparison
//! between the projected flow and the reduced oracle.  Floats are printed
//! with Rust's shortest round-trip formatting and maps keep declaration
//! order, so identical scenarios and seeds give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use bundlemech::dynamics::{
    conservation_report, integrate, reduced_magnetic_check, ConservationReport, Trajectory,
};
use bundlemech::liegroup::Group;

use crate::scenario::ResolvedRun;
use crate::CliError;

#[derive(Serialize)]
struct ConservationJson {
    energy_drift: f64,
    momentum_drift: f64,
}

impl From<&ConservationReport> for ConservationJson {
    fn from(report: &ConservationReport) -> Self {
        ConservationJson {
            energy_drift: report.energy_drift,
            momentum_drift: report.momentum_drift,
        }
    }
}

#[derive(Serialize)]
struct SimulationSidecar<'a> {
    run: &'a str,
    seed: u64,
    dt: f64,
    steps_requested: usize,
    steps_taken: usize,
    left_chart: bool,
    conservation: ConservationJson,
}

/// Column header for the fibre matrix entries, row-major; unitary groups
/// with genuinely complex entries get split real/imaginary columns.
fn fibre_columns(group: Group) -> Vec<String> {
    let d = group.matrix_dim();
    let mut names = Vec::new();
    for r in 0..d {
        for c in 0..d {
            if group == Group::Su2 {
                names.push(format!("g{r}{c}_re"));
                names.push(format!("g{r}{c}_im"));
            } else {
                names.push(format!("g{r}{c}"));
            }
        }
    }
    names
}

fn trajectory_csv(run: &ResolvedRun, traj: &Trajectory) -> String {
    let group = run.connection.group;
    let n = run.connection.chart.dim();
    let ng = group.dim();
    let d = group.matrix_dim();

    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend(fibre_columns(group));
    header.extend((0..n).map(|i| format!("pi{i}")));
    header.extend((0..ng).map(|i| format!("rho{i}")));
    header.push("H".into());
    header.extend((0..ng).map(|i| format!("J{i}")));

    let mut csv = header.join(",");
    csv.push('\n');
    // a zero-step run records the header only: the file describes the run's
    // output shape without asserting any integrated state
    if run.steps == 0 {
        return csv;
    }

    for (k, z) in traj.points.iter().enumerate() {
        let mut row: Vec<String> = vec![format!("{}", traj.times[k])];
        row.extend(z.x.iter().map(|v| format!("{v}")));
        for r in 0..d {
            for c in 0..d {
                let entry = z.g.matrix[(r, c)];
                if group == Group::Su2 {
                    row.push(format!("{}", entry.re));
                    row.push(format!("{}", entry.im));
                } else {
                    row.push(format!("{}", entry.re));
                }
            }
        }
        row.extend(z.pi.iter().map(|v| format!("{v}")));
        row.extend(z.rho.coords.iter().map(|v| format!("{v}")));
        row.push(format!("{}", traj.energies[k]));
        row.extend(traj.momenta[k].coords.iter().map(|v| format!("{v}")));
        let _ = writeln!(csv, "{}", row.join(","));
    }
    csv
}

pub fn write_simulation(
    run: &ResolvedRun,
    name: &str,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let traj = integrate(
        &run.automorphism,
        &run.connection,
        &run.hamiltonian,
        &run.initial,
        run.dt,
        run.steps,
    )?;

    let csv_path = out_dir.join(format!("{name}.csv"));
    std::fs::write(&csv_path, trajectory_csv(run, &traj))?;

    let conservation = conservation_report(&traj);
    let sidecar = SimulationSidecar {
        run: name,
        seed: run.seed,
        dt: run.dt,
        steps_requested: run.steps,
        steps_taken: traj.len().saturating_sub(1),
        left_chart: traj.left_chart,
        conservation: ConservationJson::from(&conservation),
    };
    let sidecar_path = out_dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(&sidecar_path, text)?;
    Ok((csv_path, sidecar_path))
}

#[derive(Serialize)]
struct ReduceJson<'a> {
    run: &'a str,
    seed: u64,
    dt: f64,
    steps: usize,
    momentum: Vec<f64>,
    tolerance: f64,
    projection_deviation: f64,
    left_chart: bool,
    steps_taken: usize,
    conservation: ConservationJson,
    pass: bool,
}

pub fn reduce_report(run: &ResolvedRun, name: &str) -> Result<(String, bool), CliError> {
    let report = reduced_magnetic_check(
        &run.automorphism,
        &run.connection,
        &run.reduction_momentum,
        &run.hamiltonian,
        &run.initial,
        run.dt,
        run.steps,
    )?;
    // a truncated trajectory only compared a prefix, so it cannot claim a pass
    let pass = report.projection_deviation <= run.tolerance && !report.trajectory.left_chart;
    let json = ReduceJson {
        run: name,
        seed: run.seed,
        dt: run.dt,
        steps: run.steps,
        momentum: run.reduction_momentum.coords.iter().copied().collect(),
        tolerance: run.tolerance,
        projection_deviation: report.projection_deviation,
        left_chart: report.trajectory.left_chart,
        steps_taken: report.trajectory.len().saturating_sub(1),
        conservation: ConservationJson::from(&report.conservation),
        pass,
    };
    Ok((serde_json::to_string_pretty(&json)?, pass))
}
