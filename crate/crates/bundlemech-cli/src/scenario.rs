//! Declarative scenario files and their resolution into library objects.
//!
//! A scenario is a single JSON document naming the structure group, the base
//! chart, and four dictionaries of named objects: connections, bundle
//! automorphisms, Hamiltonians, and runs.  Every "random" object carries an
//! explicit seed (defaulting to the scenario seed), so resolution is a pure
//! function of the file contents plus an optional seed override — two loads
//! of the same scenario with the same seed produce identical objects.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use bundlemech::autgroup::{BaseAutomorphism, GaugeAutomorphism, VerticalShift};
use bundlemech::bundle::{BaseChart, ConnectionForm, MatrixField, TensorialField};
use bundlemech::canforms::PhasePoint;
use bundlemech::dynamics::HamiltonianSpec;
use bundlemech::liegroup::{CoalgebraElement, CoalgebraScalar, Group, GroupElement, LieAlgebraElement};
use bundlemech::sampling::Sampler;

use crate::CliError;

// ---------------------------------------------------------------------------
// On-disk schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub group: String,
    pub chart: ChartSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Optional per-property tolerance overrides, keyed by property name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub connections: BTreeMap<String, ConnectionSpec>,
    #[serde(default)]
    pub automorphisms: BTreeMap<String, AutomorphismSpec>,
    #[serde(default)]
    pub hamiltonians: BTreeMap<String, HamiltonianDecl>,
    #[serde(default)]
    pub runs: BTreeMap<String, RunSpec>,
}

fn default_samples() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    Centered { dim: usize, halfwidth: f64 },
    Corners { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConnectionSpec {
    /// The flat reference connection (zero gauge potential).
    Zero,
    /// Constant gauge potential; `matrix` is n_G×n, given as rows.
    Constant { matrix: Vec<Vec<f64>> },
    /// Potential affine in the base point: `origin + Σ_j x_j·slopes[j]`.
    Linear {
        origin: Vec<Vec<f64>>,
        slopes: Vec<Vec<Vec<f64>>>,
    },
    /// Planar uniform magnetic field in the symmetric gauge (n = 2, abelian).
    Magnetic2d { b: f64 },
    /// Seeded random affine potential.
    Random { seed: Option<u64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismSpec {
    /// Name of the connection used as the automorphism's reference.
    pub reference: String,
    #[serde(default)]
    pub base: BasePartSpec,
    #[serde(default)]
    pub shift: ShiftPartSpec,
}

#[derive(Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasePartSpec {
    #[default]
    Identity,
    Scaling {
        factor: f64,
    },
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    Random {
        seed: Option<u64>,
    },
}

#[derive(Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftPartSpec {
    #[default]
    Zero,
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    Random {
        seed: Option<u64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDecl {
    pub base: BaseEnergySpec,
    #[serde(default)]
    pub casimir: CasimirSpec,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseEnergySpec {
    /// ‖p̃‖²/2 in the trivialized momentum.
    Kinetic,
    /// ‖p̃‖²/2 + gradient·x.
    KineticPlusLinear { gradient: Vec<f64> },
}

#[derive(Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CasimirSpec {
    #[default]
    None,
    NormSquared,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub connection: String,
    /// Automorphism deforming the symplectic structure; identity if omitted.
    #[serde(default)]
    pub automorphism: Option<String>,
    pub hamiltonian: String,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub initial: InitialSpec,
    /// Momentum value for `reduce`; defaults to the initial `rho`.
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    /// Pass bound on the reduction deviation; defaults to 1e-5.
    #[serde(default = "default_run_tolerance")]
    pub tolerance: f64,
}

fn default_run_tolerance() -> f64 {
    1e-5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub x: Vec<f64>,
    pub pi: Vec<f64>,
    pub rho: Vec<f64>,
    /// Algebra coordinates; the fibre point is their exponential (identity if omitted).
    #[serde(default)]
    pub fibre: Option<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Resolved scenario
// ---------------------------------------------------------------------------

pub struct Scenario {
    pub group: Group,
    pub chart: BaseChart,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub connections: BTreeMap<String, ConnectionForm>,
    pub automorphisms: BTreeMap<String, GaugeAutomorphism>,
    pub runs: BTreeMap<String, ResolvedRun>,
    summary: InfoSummary,
}

pub struct ResolvedRun {
    pub connection: ConnectionForm,
    pub automorphism: GaugeAutomorphism,
    pub hamiltonian: HamiltonianSpec,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub initial: PhasePoint,
    pub reduction_momentum: CoalgebraElement,
    pub tolerance: f64,
}

pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        file.seed = seed;
    }
    resolve(file)
}

fn parse_group(name: &str) -> Result<Group, CliError> {
    Group::from_name(&name.to_ascii_uppercase()).ok_or_else(|| {
        CliError::Parse(format!(
            "unknown group '{name}' (expected so2, so3, or su2)"
        ))
    })
}

fn parse_chart(spec: &ChartSpec) -> Result<BaseChart, CliError> {
    match spec {
        ChartSpec::Centered { dim, halfwidth } => {
            if *dim == 0 || !halfwidth.is_finite() || *halfwidth <= 0.0 {
                return Err(CliError::Parse(
                    "chart must have positive dimension and halfwidth".into(),
                ));
            }
            Ok(BaseChart::centered(*dim, *halfwidth))
        }
        ChartSpec::Corners { lower, upper } => {
            if lower.is_empty() || lower.len() != upper.len() {
                return Err(CliError::Parse(
                    "chart corners must be nonempty and of equal length".into(),
                ));
            }
            if !lower.iter().zip(upper).all(|(l, u)| l < u) {
                return Err(CliError::Parse(
                    "chart lower corner must lie strictly below the upper corner".into(),
                ));
            }
            Ok(BaseChart::new(
                DVector::from_row_slice(lower),
                DVector::from_row_slice(upper),
            ))
        }
    }
}

/// Converts a row-major nested list into a matrix, validating the shape.
fn matrix_from_rows(
    rows: &[Vec<f64>],
    want_rows: usize,
    want_cols: usize,
    what: &str,
) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != want_rows || rows.iter().any(|r| r.len() != want_cols) {
        return Err(CliError::Parse(format!(
            "{what} must be a {want_rows}×{want_cols} matrix given as rows"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(want_rows, want_cols, &flat))
}

fn vector_from(coords: &[f64], want: usize, what: &str) -> Result<DVector<f64>, CliError> {
    if coords.len() != want {
        return Err(CliError::Parse(format!(
            "{what} must have {want} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(DVector::from_row_slice(coords))
}

fn resolve_connection(
    name: &str,
    spec: &ConnectionSpec,
    chart: &BaseChart,
    group: Group,
    scenario_seed: u64,
) -> Result<ConnectionForm, CliError> {
    let (ng, n) = (group.dim(), chart.dim());
    let what = format!("connection '{name}'");
    let potential = match spec {
        ConnectionSpec::Zero => MatrixField::zeros(ng, n),
        ConnectionSpec::Constant { matrix } => {
            MatrixField::constant(matrix_from_rows(matrix, ng, n, &what)?)
        }
        ConnectionSpec::Linear { origin, slopes } => {
            if slopes.len() != n {
                return Err(CliError::Parse(format!(
                    "{what} needs one slope matrix per base coordinate ({n})"
                )));
            }
            let m0 = matrix_from_rows(origin, ng, n, &what)?;
            let slope_mats = slopes
                .iter()
                .map(|s| matrix_from_rows(s, ng, n, &what))
                .collect::<Result<Vec<_>, _>>()?;
            MatrixField::linear(m0, slope_mats)
        }
        ConnectionSpec::Magnetic2d { b } => {
            if n != 2 || !group.is_abelian() {
                return Err(CliError::Parse(format!(
                    "{what}: the planar magnetic potential needs a 2-dimensional chart and an abelian group"
                )));
            }
            MatrixField::magnetic2d(*b)
        }
        ConnectionSpec::Random { seed } => {
            let mut sampler = Sampler::new(seed.unwrap_or(scenario_seed));
            return Ok(sampler.connection(chart, group));
        }
    };
    Ok(ConnectionForm::new(chart.clone(), group, potential))
}

fn resolve_automorphism(
    name: &str,
    spec: &AutomorphismSpec,
    connections: &BTreeMap<String, ConnectionForm>,
    chart: &BaseChart,
    group: Group,
    scenario_seed: u64,
) -> Result<GaugeAutomorphism, CliError> {
    let reference = connections.get(&spec.reference).ok_or_else(|| {
        CliError::UnresolvedReference(format!(
            "automorphism '{name}' names unknown connection '{}'",
            spec.reference
        ))
    })?;
    let n = chart.dim();
    let what = format!("automorphism '{name}'");
    let base = match &spec.base {
        BasePartSpec::Identity => BaseAutomorphism::identity(n),
        BasePartSpec::Scaling { factor } => {
            if *factor == 0.0 || !factor.is_finite() {
                return Err(CliError::Parse(format!(
                    "{what}: scaling factor must be finite and nonzero"
                )));
            }
            BaseAutomorphism::new(MatrixField::scaled_identity(n, *factor))
        }
        BasePartSpec::Constant { matrix } => {
            BaseAutomorphism::new(MatrixField::constant(matrix_from_rows(matrix, n, n, &what)?))
        }
        BasePartSpec::Random { seed } => {
            let mut sampler = Sampler::new(seed.unwrap_or(scenario_seed).wrapping_add(1));
            BaseAutomorphism::new(sampler.invertible_field(chart))
        }
    };
    let shift = match &spec.shift {
        ShiftPartSpec::Zero => VerticalShift::zero(group, n),
        ShiftPartSpec::Constant { matrix } => VerticalShift::new(TensorialField::new(
            group,
            MatrixField::constant(matrix_from_rows(matrix, group.dim(), n, &what)?),
        )),
        ShiftPartSpec::Random { seed } => {
            let mut sampler = Sampler::new(seed.unwrap_or(scenario_seed).wrapping_add(2));
            VerticalShift::new(sampler.tensorial_field(chart, group))
        }
    };
    Ok(GaugeAutomorphism::new(reference.clone(), base, shift)?)
}

fn resolve_hamiltonian(decl: &HamiltonianDecl) -> HamiltonianSpec {
    let spec = match &decl.base {
        BaseEnergySpec::Kinetic => HamiltonianSpec::kinetic(),
        BaseEnergySpec::KineticPlusLinear { gradient } => {
            let grad = DVector::from_row_slice(gradient);
            HamiltonianSpec::new(move |x: &DVector<f64>, u: &DVector<f64>| {
                u.norm_squared() / 2.0 + grad.dot(x)
            })
        }
    };
    match decl.casimir {
        CasimirSpec::None => spec,
        CasimirSpec::NormSquared => spec.with_casimir(CoalgebraScalar::norm_squared()),
    }
}

fn resolve(file: ScenarioFile) -> Result<Scenario, CliError> {
    let group = parse_group(&file.group)?;
    let chart = parse_chart(&file.chart)?;
    if file.samples == 0 {
        return Err(CliError::Parse("samples must be positive".into()));
    }
    for (name, tol) in &file.tolerances {
        if !tol.is_finite() || *tol <= 0.0 {
            return Err(CliError::Parse(format!(
                "tolerance override '{name}' must be finite and positive"
            )));
        }
    }

    let mut connections = BTreeMap::new();
    for (name, spec) in &file.connections {
        connections.insert(
            name.clone(),
            resolve_connection(name, spec, &chart, group, file.seed)?,
        );
    }

    let mut automorphisms = BTreeMap::new();
    for (name, spec) in &file.automorphisms {
        automorphisms.insert(
            name.clone(),
            resolve_automorphism(name, spec, &connections, &chart, group, file.seed)?,
        );
    }

    let mut hamiltonians = BTreeMap::new();
    for (name, decl) in &file.hamiltonians {
        hamiltonians.insert(name.clone(), resolve_hamiltonian(decl));
    }

    let mut runs = BTreeMap::new();
    let mut run_summaries = BTreeMap::new();
    for (name, spec) in &file.runs {
        let connection = connections.get(&spec.connection).ok_or_else(|| {
            CliError::UnresolvedReference(format!(
                "run '{name}' names unknown connection '{}'",
                spec.connection
            ))
        })?;
        let automorphism = match &spec.automorphism {
            Some(auto_name) => {
                let auto = automorphisms.get(auto_name).ok_or_else(|| {
                    CliError::UnresolvedReference(format!(
                        "run '{name}' names unknown automorphism '{auto_name}'"
                    ))
                })?;
                if !auto.reference.same_reference(connection) {
                    return Err(CliError::Parse(format!(
                        "run '{name}': automorphism '{auto_name}' does not use connection '{}' as its reference",
                        spec.connection
                    )));
                }
                auto.clone()
            }
            None => GaugeAutomorphism::identity(connection.clone()),
        };
        let hamiltonian = hamiltonians.get(&spec.hamiltonian).ok_or_else(|| {
            CliError::UnresolvedReference(format!(
                "run '{name}' names unknown hamiltonian '{}'",
                spec.hamiltonian
            ))
        })?;
        if !spec.dt.is_finite() || spec.dt <= 0.0 {
            return Err(CliError::Parse(format!(
                "run '{name}': dt must be finite and positive"
            )));
        }
        if !spec.tolerance.is_finite() || spec.tolerance <= 0.0 {
            return Err(CliError::Parse(format!(
                "run '{name}': tolerance must be finite and positive"
            )));
        }
        let what = format!("run '{name}' initial state");
        let x = vector_from(&spec.initial.x, chart.dim(), &what)?;
        let pi = vector_from(&spec.initial.pi, chart.dim(), &what)?;
        let rho = vector_from(&spec.initial.rho, group.dim(), &what)?;
        let g = match &spec.initial.fibre {
            Some(coords) => {
                LieAlgebraElement::new(group, vector_from(coords, group.dim(), &what)?).exp()
            }
            None => GroupElement::identity(group),
        };
        if !chart.contains(&x) {
            return Err(CliError::Parse(format!(
                "run '{name}': initial base point lies outside the chart"
            )));
        }
        let initial = PhasePoint::new(x, g, pi, CoalgebraElement::new(group, rho));
        let reduction_momentum = match &spec.rho {
            Some(coords) => CoalgebraElement::new(
                group,
                vector_from(coords, group.dim(), &format!("run '{name}' reduction momentum"))?,
            ),
            None => initial.rho.clone(),
        };
        run_summaries.insert(
            name.clone(),
            RunSummary {
                connection: spec.connection.clone(),
                automorphism: spec.automorphism.clone(),
                hamiltonian: spec.hamiltonian.clone(),
                dt: spec.dt,
                steps: spec.steps,
                seed: spec.seed.unwrap_or(file.seed),
            },
        );
        runs.insert(
            name.clone(),
            ResolvedRun {
                connection: connection.clone(),
                automorphism,
                hamiltonian: hamiltonian.clone(),
                dt: spec.dt,
                steps: spec.steps,
                seed: spec.seed.unwrap_or(file.seed),
                initial,
                reduction_momentum,
                tolerance: spec.tolerance,
            },
        );
    }

    let summary = InfoSummary {
        group: file.group.to_ascii_lowercase(),
        chart: ChartSummary {
            lower: chart.lower.iter().copied().collect(),
            upper: chart.upper.iter().copied().collect(),
        },
        seed: file.seed,
        samples: file.samples,
        connections: connections.keys().cloned().collect(),
        automorphisms: automorphisms.keys().cloned().collect(),
        hamiltonians: hamiltonians.keys().cloned().collect(),
        runs: run_summaries,
        suites: crate::suites::SUITES.iter().map(|s| s.to_string()).collect(),
    };

    Ok(Scenario {
        group,
        chart,
        seed: file.seed,
        samples: file.samples,
        tolerances: file.tolerances,
        connections,
        automorphisms,
        runs,
        summary,
    })
}

// ---------------------------------------------------------------------------
// `info` output
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct InfoSummary {
    group: String,
    chart: ChartSummary,
    seed: u64,
    samples: usize,
    connections: Vec<String>,
    automorphisms: Vec<String>,
    hamiltonians: Vec<String>,
    runs: BTreeMap<String, RunSummary>,
    suites: Vec<String>,
}

#[derive(Serialize)]
struct ChartSummary {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize)]
struct RunSummary {
    connection: String,
    automorphism: Option<String>,
    hamiltonian: String,
    dt: f64,
    steps: usize,
    seed: u64,
}

pub fn info_json(scenario: &Scenario) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(&scenario.summary)?)
}
