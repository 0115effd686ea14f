//! Named property-check suites over a resolved scenario.
//!
//! Each suite re-runs one family of structural checks — group arithmetic,
//! automorphism laws, canonical-form identities, symplectic validity, the
//! trivialization transport, the dual pair — against the scenario's group,
//! chart, and declared objects, padded with seeded random objects so the
//! checks never run on an empty dictionary.  Every property reports its
//! worst residual, the bound it was held to, and a pass flag; `requirement`
//! says which way the comparison goes (`at-most` for residuals, `exceeds`
//! for floors such as nondegeneracy or detection margins).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use bundlemech::autgroup::{
    transitive_witness, tg_commutation_report, BaseAutomorphism, GaugeAutomorphism, RawBundleMap,
    VerticalShift,
};
use bundlemech::bundle::{ConnectionForm, TangentVector};
use bundlemech::canforms::{
    closedness_residual, exterior_derivative, g_invariance_residual, lifted_g_action,
    momentum_identity_residual, momentum_map, momentum_map_dual, omega_matrix, pullback_form,
    theta_reconstruct, OneFormOnPhase, PhasePoint, PhaseTangent,
};
use bundlemech::dynamics::{dual_pair_check, momentum_bracket_check, poisson_bracket};
use bundlemech::liegroup::{
    adjoint, coadjoint, CoalgebraElement, CoalgebraScalar, LieAlgebraElement, TangentGroupElement,
    FD_STEP,
};
use bundlemech::pullback::{
    pb_curve, pb_g_action, pulled_back_theta, transported_dual_action, trivialize, untrivialize,
};
use bundlemech::sampling::Sampler;

use crate::scenario::Scenario;
use crate::CliError;

/// The suites `check` accepts, besides the "all" selector.
pub const SUITES: &[&str] = &[
    "tangent-group-laws",
    "bundle-map-commutation",
    "automorphism-decomposition",
    "connection-transitivity",
    "canonical-form-action",
    "symplectic-validity",
    "momentum-identity",
    "trivialization-transport",
    "dual-pair",
];

#[derive(Serialize)]
pub struct PropertyReport {
    pub name: String,
    /// "at-most": pass iff value ≤ bound.  "exceeds": pass iff value > bound.
    pub requirement: &'static str,
    pub value: f64,
    pub bound: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub properties: Vec<PropertyReport>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

pub fn run_check(scenario: &Scenario, selector: &str) -> Result<CheckReport, CliError> {
    let names: Vec<&str> = if selector == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&selector) {
        vec![selector]
    } else {
        return Err(CliError::UnknownSuite(selector.to_string()));
    };
    let mut suites = Vec::new();
    for name in names {
        suites.push(run_suite(scenario, name)?);
    }
    let pass = suites.iter().all(|s| s.pass);
    Ok(CheckReport {
        seed: scenario.seed,
        suites,
        pass,
    })
}

fn run_suite(sc: &Scenario, name: &str) -> Result<SuiteReport, CliError> {
    let mut rec = Recorder::new(sc);
    match name {
        "tangent-group-laws" => tangent_group_laws(sc, &mut rec),
        "bundle-map-commutation" => bundle_map_commutation(sc, &mut rec),
        "automorphism-decomposition" => automorphism_decomposition(sc, &mut rec)?,
        "connection-transitivity" => connection_transitivity(sc, &mut rec),
        "canonical-form-action" => canonical_form_action(sc, &mut rec)?,
        "symplectic-validity" => symplectic_validity(sc, &mut rec)?,
        "momentum-identity" => momentum_identity(sc, &mut rec),
        "trivialization-transport" => trivialization_transport(sc, &mut rec)?,
        "dual-pair" => dual_pair(sc, &mut rec)?,
        other => return Err(CliError::UnknownSuite(other.to_string())),
    }
    let pass = rec.properties.iter().all(|p| p.pass);
    Ok(SuiteReport {
        suite: name.to_string(),
        properties: rec.properties,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Bookkeeping
// ---------------------------------------------------------------------------

struct Recorder<'a> {
    sc: &'a Scenario,
    properties: Vec<PropertyReport>,
}

impl<'a> Recorder<'a> {
    fn new(sc: &'a Scenario) -> Self {
        Recorder {
            sc,
            properties: Vec::new(),
        }
    }

    fn bound_for(&self, name: &str, default: f64) -> f64 {
        self.sc.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Records a residual property: pass iff `value ≤ bound`.
    fn at_most(&mut self, name: &str, default_bound: f64, samples: usize, value: f64) {
        let bound = self.bound_for(name, default_bound);
        self.properties.push(PropertyReport {
            name: name.to_string(),
            requirement: "at-most",
            value,
            bound,
            samples,
            pass: value <= bound,
        });
    }

    /// Records a floor property: pass iff `value > bound`.
    fn exceeds(&mut self, name: &str, default_bound: f64, samples: usize, value: f64) {
        let bound = self.bound_for(name, default_bound);
        self.properties.push(PropertyReport {
            name: name.to_string(),
            requirement: "exceeds",
            value,
            bound,
            samples,
            pass: value > bound,
        });
    }
}

/// Distinct deterministic seeds derived from the scenario seed.
fn salt(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A connection every suite can deform: the first declared one, otherwise a
/// seeded random one.
fn suite_connection(sc: &Scenario) -> ConnectionForm {
    match sc.connections.values().next() {
        Some(alpha) => alpha.clone(),
        None => Sampler::new(salt(sc.seed, 0xC0)).connection(&sc.chart, sc.group),
    }
}

/// Declared automorphisms plus `extra` sampled ones over `alpha`.
fn automorphism_pool(
    sc: &Scenario,
    alpha: &ConnectionForm,
    extra: usize,
    tag: u64,
) -> Vec<GaugeAutomorphism> {
    let mut pool: Vec<GaugeAutomorphism> = sc.automorphisms.values().cloned().collect();
    let mut sampler = Sampler::new(salt(sc.seed, tag));
    for _ in 0..extra {
        pool.push(sampler.gauge_automorphism(alpha));
    }
    pool
}

/// Worst apply-difference of two automorphisms over sampled tangents.
fn map_distance(a: &GaugeAutomorphism, b: &GaugeAutomorphism, samples: usize, seed: u64) -> f64 {
    let chart = &a.reference.chart;
    let group = a.reference.group;
    let mut sampler = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = sampler.bundle_point(chart, group);
        let v = sampler.tangent_at(&p);
        let va = a.apply(&v);
        let vb = b.apply(&v);
        worst = worst
            .max((&va.dx - &vb.dx).amax())
            .max((&va.xi.coords - &vb.xi.coords).amax());
    }
    worst
}

fn group_distance(
    a: &bundlemech::liegroup::GroupElement,
    b: &bundlemech::liegroup::GroupElement,
) -> f64 {
    (&a.matrix - &b.matrix).map(|c| c.norm()).max()
}

fn tg_distance(a: &TangentGroupElement, b: &TangentGroupElement) -> f64 {
    group_distance(&a.g, &b.g).max((&a.x.coords - &b.x.coords).amax())
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

fn tangent_group_laws(sc: &Scenario, rec: &mut Recorder) {
    let group = sc.group;
    let mut sampler = Sampler::new(salt(sc.seed, 0x01));
    let e = TangentGroupElement::identity(group);
    let n = sc.samples;
    let mut worst_laws: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    for _ in 0..n {
        let a = sampler.tangent_group_element(group);
        let b = sampler.tangent_group_element(group);
        let c = sampler.tangent_group_element(group);

        worst_laws =
            worst_laws.max(tg_distance(&a.product(&b).product(&c), &a.product(&b.product(&c))));
        worst_laws = worst_laws.max(tg_distance(&a.product(&a.inverse()), &e));
        worst_laws = worst_laws.max(tg_distance(&a.inverse().product(&a), &e));

        // the product splits as (g₁g₂, ξ₁ + Ad_{g₁}ξ₂); oracle from the
        // representation's product rule on velocities V = ξ̂·g.
        let prod = a.product(&b);
        let split = &a.x.coords + adjoint(&a.g, &b.x).coords;
        worst_split = worst_split.max((&prod.x.coords - split).amax());
        let v1 = a.x.matrix() * &a.g.matrix;
        let v2 = b.x.matrix() * &b.g.matrix;
        let vprod = &v1 * &b.g.matrix + &a.g.matrix * &v2;
        let from_rule =
            LieAlgebraElement::from_matrix(group, &(vprod * prod.g.inverse().matrix));
        worst_split = worst_split.max((&prod.x.coords - &from_rule.coords).amax());
    }
    rec.at_most("associativity-and-inverses", 1e-12, n, worst_laws);
    rec.at_most("product-splits-semidirectly", 1e-12, n, worst_split);
}

fn bundle_map_commutation(sc: &Scenario, rec: &mut Recorder) {
    let alpha = suite_connection(sc);
    let pool = automorphism_pool(sc, &alpha, 5, 0x02);
    let inner = (sc.samples / 10).max(5);
    let mut worst: f64 = 0.0;
    for (j, a) in pool.iter().enumerate() {
        let map = RawBundleMap::from_automorphism(a);
        worst = worst.max(tg_commutation_report(
            &map,
            &a.reference.chart,
            a.reference.group,
            inner,
            salt(sc.seed, 0x0200 + j as u64),
        ));
    }
    rec.at_most("constructed-maps-commute", 1e-12, pool.len() * inner, worst);

    // a fibre-velocity doubling is not equivariant and must be flagged
    let broken = RawBundleMap::new(|v: &TangentVector| {
        TangentVector::new(v.base.clone(), v.dx.clone(), v.xi.scaled(2.0))
    });
    let broken_samples = sc.samples.max(20);
    let broken_residual = tg_commutation_report(
        &broken,
        &sc.chart,
        sc.group,
        broken_samples,
        salt(sc.seed, 0x02BD),
    );
    rec.exceeds("fibre-doubling-is-flagged", 1e-3, broken_samples, broken_residual);
}

fn automorphism_decomposition(sc: &Scenario, rec: &mut Recorder) -> Result<(), CliError> {
    let alpha = suite_connection(sc);
    let group = sc.group;
    let n = sc.chart.dim();
    let mut sampler = Sampler::new(salt(sc.seed, 0x03));
    let rounds = (sc.samples / 20).max(3);
    let points = (sc.samples / 10).max(5);

    // the two sections followed by their projections are the identity
    let mut worst_sections: f64 = 0.0;
    for _ in 0..rounds {
        let base = BaseAutomorphism::new(sampler.invertible_field(&sc.chart));
        let sigma = GaugeAutomorphism::from_base(alpha.clone(), base.clone())?;
        let shift = VerticalShift::new(sampler.tensorial_field(&sc.chart, group));
        let iota = GaugeAutomorphism::from_shift(alpha.clone(), shift.clone());
        for _ in 0..points {
            let x = sampler.point_in(&sc.chart);
            worst_sections = worst_sections
                .max((sigma.base_part().field.eval(&x) - base.field.eval(&x)).abs().max());
            worst_sections = worst_sections.max(
                (iota.shift_part().field.field.eval(&x) - shift.field.field.eval(&x))
                    .abs()
                    .max(),
            );
            worst_sections = worst_sections
                .max((iota.base_part().field.eval(&x) - DMatrix::identity(n, n)).abs().max());
        }
    }
    rec.at_most("sections-invert-projections", 1e-10, rounds * points, worst_sections);

    // the kernel of the base projection is exactly the shift subgroup
    let mut worst_kernel: f64 = 0.0;
    let b1 = VerticalShift::new(sampler.tensorial_field(&sc.chart, group));
    let b2 = VerticalShift::new(sampler.tensorial_field(&sc.chart, group));
    let sigma = GaugeAutomorphism::from_base(
        alpha.clone(),
        BaseAutomorphism::new(sampler.invertible_field(&sc.chart)),
    )?;
    let kernel_element = GaugeAutomorphism::from_shift(alpha.clone(), b1).product(
        &sigma
            .product(&GaugeAutomorphism::from_shift(alpha.clone(), b2))?
            .product(&sigma.inverse()?)?,
    )?;
    for _ in 0..points {
        let x = sampler.point_in(&sc.chart);
        worst_kernel = worst_kernel.max(
            (kernel_element.base_part().field.eval(&x) - DMatrix::identity(n, n))
                .abs()
                .max(),
        );
    }
    worst_kernel = worst_kernel.max(map_distance(
        &kernel_element,
        &GaugeAutomorphism::from_shift(alpha.clone(), kernel_element.shift_part()),
        points,
        salt(sc.seed, 0x0333),
    ));
    rec.at_most("base-kernel-is-the-shift-subgroup", 1e-10, points, worst_kernel);

    // product law against plain composition; declared automorphisms join in
    // through their inverse law
    let mut worst_product: f64 = 0.0;
    let a1 = sampler.gauge_automorphism(&alpha);
    let a2 = sampler.gauge_automorphism(&alpha);
    let prod = a1.product(&a2)?;
    {
        let mut inner = Sampler::new(salt(sc.seed, 0x0334));
        for _ in 0..points {
            let p = inner.bundle_point(&sc.chart, group);
            let v = inner.tangent_at(&p);
            let via_product = prod.apply(&v);
            let via_composition = a1.apply(&a2.apply(&v));
            worst_product = worst_product
                .max((&via_product.dx - &via_composition.dx).amax())
                .max((&via_product.xi.coords - &via_composition.xi.coords).amax());
        }
    }
    for (k, a) in sc.automorphisms.values().enumerate() {
        let identity = GaugeAutomorphism::identity(a.reference.clone());
        worst_product = worst_product.max(map_distance(
            &a.product(&a.inverse()?)?,
            &identity,
            points,
            salt(sc.seed, 0x0340 + k as u64),
        ));
    }
    rec.at_most(
        "products-and-inverses-compose-pointwise",
        1e-10,
        points * (2 + sc.automorphisms.len()),
        worst_product,
    );

    // the shift part of a product twists by conjugation with the base part
    let lhs = GaugeAutomorphism::from_shift(alpha.clone(), prod.shift_part());
    let sigma1 = GaugeAutomorphism::from_base(alpha.clone(), a1.base_part())?;
    let rhs = GaugeAutomorphism::from_shift(alpha.clone(), a1.shift_part())
        .product(&sigma1)?
        .product(&GaugeAutomorphism::from_shift(alpha.clone(), a2.shift_part()))?
        .product(&sigma1.inverse()?)?;
    let worst_twist = map_distance(&lhs, &rhs, points, salt(sc.seed, 0x0335));
    rec.at_most("shift-part-twists-by-conjugation", 1e-10, points, worst_twist);
    Ok(())
}

fn connection_transitivity(sc: &Scenario, rec: &mut Recorder) {
    let group = sc.group;
    let mut sampler = Sampler::new(salt(sc.seed, 0x04));
    let mut connections: Vec<ConnectionForm> = sc.connections.values().cloned().collect();
    while connections.len() < 3 {
        connections.push(sampler.connection(&sc.chart, group));
    }
    let points = (sc.samples / 2).max(10);

    // witnesses move any declared or sampled connection onto any other
    let mut worst_witness: f64 = 0.0;
    let mut pairs = 0;
    for alpha in &connections {
        for alpha2 in &connections {
            let witness = transitive_witness(alpha, alpha2);
            let moved = witness.act_on_connection(alpha);
            pairs += 1;
            for _ in 0..points {
                let x = sampler.point_in(&sc.chart);
                worst_witness = worst_witness
                    .max((moved.potential.eval(&x) - alpha2.potential.eval(&x)).abs().max());
            }
        }
    }
    rec.at_most("witnesses-move-connections", 1e-12, pairs * points, worst_witness);

    // base embeddings stabilize their reference connection
    let alpha = connections[0].clone();
    let mut worst_stable: f64 = 0.0;
    let sigma = GaugeAutomorphism::from_base(
        alpha.clone(),
        BaseAutomorphism::new(sampler.invertible_field(&sc.chart)),
    )
    .expect("sampled base parts are invertible");
    let stabilized = sigma.act_on_connection(&alpha);
    for _ in 0..points {
        let x = sampler.point_in(&sc.chart);
        worst_stable =
            worst_stable.max((stabilized.potential.eval(&x) - alpha.potential.eval(&x)).abs().max());
    }
    rec.at_most("base-embeddings-stabilize", 1e-12, points, worst_stable);

    // freeness of the shift action: a nonzero shift moves the connection,
    // and the witness recovers exactly the shift that produced the move
    let field = sampler.tensorial_field(&sc.chart, group);
    let shifted = GaugeAutomorphism::from_shift(alpha.clone(), VerticalShift::new(field.clone()));
    let target = shifted.act_on_connection(&alpha);
    let recovered = transitive_witness(&alpha, &target);
    let mut worst_recovery: f64 = 0.0;
    let mut moved_by: f64 = 0.0;
    for _ in 0..points {
        let x = sampler.point_in(&sc.chart);
        moved_by = moved_by.max((target.potential.eval(&x) - alpha.potential.eval(&x)).abs().max());
        worst_recovery = worst_recovery.max(
            (recovered.shift_part().field.field.eval(&x) - field.field.eval(&x))
                .abs()
                .max(),
        );
    }
    rec.at_most("witness-recovers-the-shift", 1e-12, points, worst_recovery);
    rec.exceeds("shift-action-displaces", 1e-3, points, moved_by);
}

fn canonical_form_action(sc: &Scenario, rec: &mut Recorder) -> Result<(), CliError> {
    let group = sc.group;
    let n = sc.chart.dim();
    let ng = group.dim();
    let alpha = suite_connection(sc);
    let gamma0 = OneFormOnPhase::canonical();
    let mut sampler = Sampler::new(salt(sc.seed, 0x05));
    let pool = automorphism_pool(sc, &alpha, 4, 0x0500);
    let evals = (sc.samples / 10).max(5);

    let mut worst_pullback: f64 = 0.0;
    let mut worst_invariance: f64 = 0.0;
    let mut worst_momentum: f64 = 0.0;
    for (k, a) in pool.iter().enumerate() {
        let theta = OneFormOnPhase::of_automorphism(a);

        // the deformed form is the pullback of the canonical one
        let pulled = pullback_form(a, &gamma0);
        for _ in 0..evals {
            let z = sampler.phase_point(&sc.chart, group);
            let zeta = sampler.phase_tangent(n, group);
            worst_pullback =
                worst_pullback.max((pulled.evaluate(&z, &zeta) - theta.evaluate(&z, &zeta)).abs());
        }

        // pulling one deformed form back through another composes them,
        // when the two share a reference
        if let Some(a2) = pool.iter().find(|b| b.reference.same_reference(&a.reference)) {
            let chained = pullback_form(a, &OneFormOnPhase::of_automorphism(a2));
            let composed = OneFormOnPhase::of_automorphism(&a.product(a2)?);
            for _ in 0..evals {
                let z = sampler.phase_point(&sc.chart, group);
                let zeta = sampler.phase_tangent(n, group);
                worst_pullback = worst_pullback
                    .max((chained.evaluate(&z, &zeta) - composed.evaluate(&z, &zeta)).abs());
            }
        }

        // group invariance of the form and of the momentum pairing
        worst_invariance = worst_invariance.max(g_invariance_residual(
            &theta,
            &sc.chart,
            group,
            evals,
            salt(sc.seed, 0x0550 + k as u64),
        ));
        for _ in 0..evals {
            let z = sampler.phase_point(&sc.chart, group);
            let deformed = momentum_map_dual(a, &z);
            let standard = momentum_map(&z);
            worst_momentum = worst_momentum.max((&deformed.coords - &standard.coords).amax());
        }
    }
    let count = pool.len() * evals;
    rec.at_most("forms-are-pullbacks-of-canonical", 1e-8, 2 * count, worst_pullback);
    rec.at_most("forms-are-group-invariant", 1e-10, count, worst_invariance);
    rec.at_most("momentum-pairing-is-undeformed", 1e-10, count, worst_momentum);

    // the fibre map is recoverable from its one-form alone
    let mut worst_reconstruct: f64 = 0.0;
    let frame = n + ng;
    for (k, a) in pool.iter().take(2).enumerate() {
        let gamma = OneFormOnPhase::of_automorphism(a);
        let p = sampler.bundle_point(&sc.chart, group);
        let matrix = theta_reconstruct(&gamma, &p, 30, salt(sc.seed, 0x0560 + k as u64))?;
        let mut expect = DMatrix::zeros(frame, frame);
        for col in 0..frame {
            let mut dx = DVector::zeros(n);
            let mut xi = DVector::zeros(ng);
            if col < n {
                dx[col] = 1.0;
            } else {
                xi[col - n] = 1.0;
            }
            let v = TangentVector::new(p.clone(), dx, LieAlgebraElement::new(group, xi));
            let image = a.apply(&v);
            for row in 0..n {
                expect[(row, col)] = image.dx[row];
            }
            for row in 0..ng {
                expect[(row + n, col)] = image.xi.coords[row];
            }
        }
        worst_reconstruct = worst_reconstruct.max((matrix - expect).abs().max());
    }
    rec.at_most("fibre-maps-reconstruct-from-forms", 1e-10, 2 * frame, worst_reconstruct);
    Ok(())
}

fn symplectic_validity(sc: &Scenario, rec: &mut Recorder) -> Result<(), CliError> {
    let group = sc.group;
    let n = sc.chart.dim();
    let alpha = suite_connection(sc);
    let mut sampler = Sampler::new(salt(sc.seed, 0x06));
    let pool = automorphism_pool(sc, &alpha, 3, 0x0600);
    let points = (sc.samples / 4).max(8);

    let mut worst_antisym: f64 = 0.0;
    let mut smallest_det = f64::INFINITY;
    let mut worst_closed: f64 = 0.0;
    for (k, a) in pool.iter().enumerate() {
        let theta = OneFormOnPhase::of_automorphism(a);
        for j in 0..points {
            let z = sampler.phase_point(&sc.chart, group);
            let omega = omega_matrix(a, &z)?;
            worst_antisym = worst_antisym.max(omega.antisymmetry_residual());
            smallest_det = smallest_det.min(omega.determinant().abs());
            worst_closed = worst_closed.max(closedness_residual(
                &theta,
                &z,
                2,
                salt(sc.seed, 0x0650 + (points * k + j) as u64),
            ));
            // antisymmetry probed on the evaluation path itself, with
            // non-frame arguments, not just on the assembled matrix
            let zeta1 = sampler.phase_tangent(n, group);
            let zeta2 = sampler.phase_tangent(n, group);
            worst_antisym = worst_antisym.max(
                (exterior_derivative(&theta, &z, &zeta1, &zeta2)
                    + exterior_derivative(&theta, &z, &zeta2, &zeta1))
                .abs(),
            );
        }
    }
    let count = pool.len() * points;
    rec.at_most("two-forms-are-antisymmetric", 1e-12, count, worst_antisym);
    rec.exceeds("two-forms-are-nondegenerate", 1e-10, count, smallest_det);
    rec.at_most("two-forms-are-closed", 1e-4, count, worst_closed);
    Ok(())
}

fn momentum_identity(sc: &Scenario, rec: &mut Recorder) {
    let group = sc.group;
    let n = sc.chart.dim();
    let alpha = suite_connection(sc);
    let mut sampler = Sampler::new(salt(sc.seed, 0x07));
    let pool = automorphism_pool(sc, &alpha, 4, 0x0700);
    let evals = (sc.samples / 4).max(10);
    let mut worst: f64 = 0.0;
    for a in &pool {
        for _ in 0..evals {
            let z = sampler.phase_point(&sc.chart, group);
            let x = sampler.algebra(group, 1.0);
            let zeta = sampler.phase_tangent(n, group);
            worst = worst.max(momentum_identity_residual(a, &z, &x, &zeta));
        }
    }
    rec.at_most(
        "fields-contract-to-momentum-differentials",
        1e-6,
        pool.len() * evals,
        worst,
    );
}

fn trivialization_transport(sc: &Scenario, rec: &mut Recorder) -> Result<(), CliError> {
    let group = sc.group;
    let n = sc.chart.dim();
    let alpha = suite_connection(sc);
    let mut sampler = Sampler::new(salt(sc.seed, 0x08));
    let points = (sc.samples / 4).max(10);

    // both round trips are exact
    let mut worst_round: f64 = 0.0;
    for _ in 0..points {
        let z = sampler.phase_point(&sc.chart, group);
        let back = untrivialize(&alpha, &trivialize(&alpha, &z));
        worst_round = worst_round
            .max((&back.pi - &z.pi).amax())
            .max((&back.rho.coords - &z.rho.coords).amax());
        let q = sampler.pb_point(&sc.chart, group);
        let there = trivialize(&alpha, &untrivialize(&alpha, &q));
        worst_round = worst_round
            .max((&there.pitilde - &q.pitilde).amax())
            .max((&there.chi.coords - &q.chi.coords).amax());
    }
    rec.at_most("round-trips-are-exact", 1e-12, 2 * points, worst_round);

    // the transported one-form agrees with differentiating the reassembly map
    let pool = automorphism_pool(sc, &alpha, 2, 0x0800);
    let evals = (sc.samples / 10).max(5);
    let mut worst_pullback: f64 = 0.0;
    let mut transported = 0;
    for a in pool.iter().filter(|a| a.reference.same_reference(&alpha)) {
        transported += evals;
        let form = pulled_back_theta(a);
        let theta = OneFormOnPhase::of_automorphism(a);
        for _ in 0..evals {
            let q = sampler.pb_point(&sc.chart, group);
            let zeta = sampler.pb_tangent(n, group);
            let z = untrivialize(&alpha, &q);
            let plus = untrivialize(&alpha, &pb_curve(&q, &zeta, FD_STEP));
            let minus = untrivialize(&alpha, &pb_curve(&q, &zeta, -FD_STEP));
            let moved = PhaseTangent::new(
                zeta.dx.clone(),
                zeta.xi.clone(),
                (&plus.pi - &minus.pi) / (2.0 * FD_STEP),
                CoalgebraElement::new(
                    group,
                    (&plus.rho.coords - &minus.rho.coords) / (2.0 * FD_STEP),
                ),
            );
            worst_pullback =
                worst_pullback.max((form.evaluate(&q, &zeta) - theta.evaluate(&z, &moved)).abs());
        }
    }
    rec.at_most("transported-form-matches-chain-rule", 1e-8, transported, worst_pullback);

    // transported action specializations: base parts act by their transpose,
    // shifts translate by the momentum pairing of their field
    let mut worst_special: f64 = 0.0;
    let base = BaseAutomorphism::new(sampler.invertible_field(&sc.chart));
    let sigma = GaugeAutomorphism::from_base(alpha.clone(), base.clone())?;
    let field = sampler.tensorial_field(&sc.chart, group);
    let iota = GaugeAutomorphism::from_shift(alpha.clone(), VerticalShift::new(field.clone()));
    for _ in 0..points {
        let q = sampler.pb_point(&sc.chart, group);
        let via_base = transported_dual_action(&sigma, &alpha, &q)?;
        let expect = base.field.eval(&q.x).transpose() * &q.pitilde;
        worst_special = worst_special.max((&via_base.pitilde - expect).amax());
        worst_special = worst_special.max((&via_base.chi.coords - &q.chi.coords).amax());

        let via_shift = transported_dual_action(&iota, &alpha, &q)?;
        let rho = coadjoint(&q.g.inverse(), &q.chi);
        let expect = &q.pitilde + field.field.eval(&q.x).transpose() * &rho.coords;
        worst_special = worst_special.max((&via_shift.pitilde - expect).amax());
    }
    rec.at_most("base-and-shift-specializations", 1e-10, points, worst_special);

    // the transported action commutes with the group action
    let mut worst_commute: f64 = 0.0;
    let mut commuted = 0;
    for a in pool.iter().filter(|a| a.reference.same_reference(&alpha)) {
        commuted += evals;
        for _ in 0..evals {
            let q = sampler.pb_point(&sc.chart, group);
            let h = sampler.group_element(group);
            let lhs = pb_g_action(&h, &transported_dual_action(a, &alpha, &q)?);
            let rhs = transported_dual_action(a, &alpha, &pb_g_action(&h, &q))?;
            worst_commute = worst_commute
                .max((&lhs.pitilde - &rhs.pitilde).amax())
                .max((&lhs.chi.coords - &rhs.chi.coords).amax())
                .max(group_distance(&lhs.g, &rhs.g));
        }
    }
    rec.at_most("action-commutes-with-the-group", 1e-10, commuted, worst_commute);
    Ok(())
}

fn dual_pair(sc: &Scenario, rec: &mut Recorder) -> Result<(), CliError> {
    let group = sc.group;
    let ng = group.dim();
    let alpha = suite_connection(sc);
    let mut sampler = Sampler::new(salt(sc.seed, 0x09));
    let evals = (sc.samples / 10).max(4);

    // polarity: trivialized base observables commute with momentum ones
    let base_scalar = |x: &DVector<f64>, u: &DVector<f64>| {
        x[0] * u[u.len() - 1] + 0.4 * u[0] * u[0] + x[x.len() - 1]
    };
    let casimir =
        CoalgebraScalar::quadratic(group, sampler.matrix(ng, ng, 0.4), sampler.vector(ng, 0.6));
    let id = GaugeAutomorphism::identity(alpha.clone());
    let deformed = sampler.gauge_automorphism(&alpha);
    let mut worst_polarity =
        dual_pair_check(&id, &alpha, &base_scalar, &casimir, evals, salt(sc.seed, 0x0990))?;
    worst_polarity = worst_polarity.max(dual_pair_check(
        &deformed,
        &alpha,
        &base_scalar,
        &casimir,
        evals,
        salt(sc.seed, 0x0991),
    )?);
    rec.at_most("base-and-casimir-observables-commute", 1e-5, 2 * evals, worst_polarity);

    // momentum brackets close onto the coalgebra bracket under one sign
    let pairs: Vec<(usize, usize)> = if ng == 1 {
        vec![(0, 0)]
    } else {
        (0..ng)
            .flat_map(|i| (0..ng).filter(move |j| *j != i).map(move |j| (i, j)))
            .collect()
    };
    let mut worst_bracket: f64 = 0.0;
    let mut signs = Vec::new();
    let per_pair = (sc.samples / 20).max(3);
    for (i, j) in &pairs {
        let report = momentum_bracket_check(
            &id,
            &CoalgebraScalar::coordinate(group, *i),
            &CoalgebraScalar::coordinate(group, *j),
            per_pair,
            salt(sc.seed, 0x09A0 + (ng * i + j) as u64),
        )?;
        worst_bracket = worst_bracket.max(report.residual);
        signs.push(report.sign);
    }
    let sign_spread = signs
        .iter()
        .map(|s| (s - signs[0]).abs())
        .fold(0.0f64, f64::max);
    rec.at_most(
        "momentum-brackets-close-onto-the-coalgebra",
        1e-5,
        pairs.len() * per_pair,
        worst_bracket,
    );
    rec.at_most("momentum-bracket-sign-is-uniform", 0.5, pairs.len(), sign_spread);

    // brackets of invariant observables are again invariant
    let mut worst_invariance: f64 = 0.0;
    {
        let f = |z: &PhasePoint| {
            let q = trivialize(&alpha, z);
            q.x[0] * q.pitilde[q.pitilde.len() - 1] + q.pitilde[0]
        };
        let g = |z: &PhasePoint| {
            let q = trivialize(&alpha, z);
            q.pitilde.norm_squared() / 2.0 + q.x[q.x.len() - 1]
        };
        for a in [&id, &deformed] {
            for _ in 0..evals {
                let z = sampler.phase_point(&sc.chart, group);
                let h = sampler.group_element(group);
                let here = poisson_bracket(a, &f, &g, &z)?;
                let there = poisson_bracket(a, &f, &g, &lifted_g_action(&h, &z))?;
                worst_invariance = worst_invariance.max((here - there).abs());
            }
        }
    }
    rec.at_most("reduced-brackets-are-invariant", 1e-5, 2 * evals, worst_invariance);
    Ok(())
}
