//! The connection-dependent trivialization of phase space: covectors on the
//! total space are carried to triples (base covector, fibre point, algebra
//! covector), where the group acts only on the last two slots and admissible
//! automorphisms act affinely on the first.
//!
//! A covector `z = (x, g, pi, rho)` splits against a connection `α` with
//! gauge potential `a` into
//!
//! ```text
//! pitilde = pi − a(x)ᵀ·rho        (the horizontal part, a base covector)
//! chi     = ⟨rho, Ad_g ·⟩          (the momentum map value)
//! ```
//!
//! and is reassembled by `pi = pitilde + a(x)ᵀ·rho`, `rho = ⟨chi, Ad_{g⁻¹}·⟩`.
//! Both directions are exact closed forms, so the round trips hold to machine
//! precision.  One-forms on phase space transport through the trivialization
//! to two-term expressions: a base canonical form plus a momentum pairing
//! with a connection, and their exterior derivatives use the same
//! frame-constant scheme (and right-invariant bracket correction) as the
//! untrivialized side.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::autgroup::GaugeAutomorphism;
use crate::bundle::{BundlePoint, ConnectionForm, TangentVector};
use crate::canforms::{dual_action, momentum_map, PhasePoint, PhaseTangent, TwoFormMatrix};
use crate::error::{Error, Result};
use crate::liegroup::{
    coadjoint, pairing, CoalgebraElement, Group, GroupElement, LieAlgebraElement, FD_STEP,
};

/// A trivialized covector: base point with base covector, fibre point, and
/// an algebra covector (the conserved momentum slot).
#[derive(Clone, Debug)]
pub struct PBPoint {
    pub x: DVector<f64>,
    pub pitilde: DVector<f64>,
    pub g: GroupElement,
    pub chi: CoalgebraElement,
}

impl PBPoint {
    pub fn new(
        x: DVector<f64>,
        pitilde: DVector<f64>,
        g: GroupElement,
        chi: CoalgebraElement,
    ) -> Self {
        assert_eq!(x.len(), pitilde.len(), "pitilde must be a base covector");
        assert_eq!(g.group, chi.group, "chi must pair with the fibre group");
        PBPoint { x, pitilde, g, chi }
    }

    pub fn group(&self) -> Group {
        self.g.group
    }

    pub fn base_dim(&self) -> usize {
        self.x.len()
    }

    pub fn base_point(&self) -> BundlePoint {
        BundlePoint::new(self.x.clone(), self.g.clone())
    }
}

/// A tangent vector of the trivialized space.  The base velocity `dx` is a
/// single shared field: the base curves of the covector factor and the
/// bundle factor agree structurally, which is exactly the tangency
/// constraint of the fibre product.
#[derive(Clone, Debug)]
pub struct PBTangent {
    pub dx: DVector<f64>,
    pub xi: LieAlgebraElement,
    pub dpitilde: DVector<f64>,
    pub dchi: CoalgebraElement,
}

impl PBTangent {
    pub fn new(
        dx: DVector<f64>,
        xi: LieAlgebraElement,
        dpitilde: DVector<f64>,
        dchi: CoalgebraElement,
    ) -> Self {
        assert_eq!(dx.len(), dpitilde.len(), "dpitilde must be a base covector");
        assert_eq!(xi.group, dchi.group, "dchi must pair with the fibre group");
        PBTangent {
            dx,
            xi,
            dpitilde,
            dchi,
        }
    }

    pub fn zero(base_dim: usize, group: Group) -> Self {
        PBTangent::new(
            DVector::zeros(base_dim),
            LieAlgebraElement::zero(group),
            DVector::zeros(base_dim),
            CoalgebraElement::zero(group),
        )
    }

    pub fn frame_dim(base_dim: usize, group: Group) -> usize {
        2 * base_dim + 2 * group.dim()
    }

    /// The `index`-th frame vector in the order `(dx.., ξ.., dpitilde.., dchi..)`.
    pub fn frame(base_dim: usize, group: Group, index: usize) -> Self {
        let mut coords = DVector::zeros(Self::frame_dim(base_dim, group));
        coords[index] = 1.0;
        Self::from_coords(base_dim, group, &coords)
    }

    pub fn to_coords(&self) -> DVector<f64> {
        let n = self.dx.len();
        let ng = self.xi.group.dim();
        let mut coords = DVector::zeros(2 * n + 2 * ng);
        coords.rows_mut(0, n).copy_from(&self.dx);
        coords.rows_mut(n, ng).copy_from(&self.xi.coords);
        coords.rows_mut(n + ng, n).copy_from(&self.dpitilde);
        coords.rows_mut(2 * n + ng, ng).copy_from(&self.dchi.coords);
        coords
    }

    pub fn from_coords(base_dim: usize, group: Group, coords: &DVector<f64>) -> Self {
        let n = base_dim;
        let ng = group.dim();
        assert_eq!(coords.len(), 2 * n + 2 * ng, "frame coordinate length");
        PBTangent::new(
            coords.rows(0, n).into_owned(),
            LieAlgebraElement::new(group, coords.rows(n, ng).into_owned()),
            coords.rows(n + ng, n).into_owned(),
            CoalgebraElement::new(group, coords.rows(2 * n + ng, ng).into_owned()),
        )
    }

    pub fn footpoint_velocity(&self, p: &BundlePoint) -> TangentVector {
        TangentVector::new(p.clone(), self.dx.clone(), self.xi.clone())
    }
}

/// Frame-constant curve through a trivialized point:
/// `t ↦ (x + t·dx, pitilde + t·dpitilde, exp(t·ξ)·g, chi + t·dchi)`.
pub fn pb_curve(q: &PBPoint, zeta: &PBTangent, t: f64) -> PBPoint {
    PBPoint::new(
        &q.x + t * &zeta.dx,
        &q.pitilde + t * &zeta.dpitilde,
        zeta.xi.scaled(t).exp().product(&q.g),
        CoalgebraElement::new(q.chi.group, &q.chi.coords + t * &zeta.dchi.coords),
    )
}

/// The horizontal part of `rho` paired through the gauge potential:
/// the base covector `ṽ ↦ ⟨rho, a(x)·ṽ⟩`.
fn potential_pairing(alpha: &ConnectionForm, x: &DVector<f64>, rho: &CoalgebraElement) -> DVector<f64> {
    alpha.potential.eval(x).transpose() * &rho.coords
}

/// Trivializes a covector against a connection:
/// `(x, g, pi, rho) ↦ (x, pi − a(x)ᵀ·rho, g, momentum_map(z))`.
pub fn trivialize(alpha: &ConnectionForm, z: &PhasePoint) -> PBPoint {
    assert_eq!(alpha.group, z.group(), "connection group");
    PBPoint::new(
        z.x.clone(),
        &z.pi - potential_pairing(alpha, &z.x, &z.rho),
        z.g.clone(),
        momentum_map(z),
    )
}

/// Reassembles the covector: the unique `z` with
/// `⟨z, v⟩ = ⟨pitilde, dx⟩ + ⟨chi, α(v)⟩` for every footpoint velocity `v`.
pub fn untrivialize(alpha: &ConnectionForm, q: &PBPoint) -> PhasePoint {
    assert_eq!(alpha.group, q.group(), "connection group");
    let rho = coadjoint(&q.g.inverse(), &q.chi);
    let pi = &q.pitilde + potential_pairing(alpha, &q.x, &rho);
    PhasePoint::new(q.x.clone(), q.g.clone(), pi, rho)
}

/// The group action on the trivialized space: fixes the base covector,
/// translates the fibre point, and moves the momentum slot by the coadjoint
/// transport, `(x, pitilde, g, chi) ↦ (x, pitilde, g·h, ⟨chi, Ad_h ·⟩)`.
pub fn pb_g_action(h: &GroupElement, q: &PBPoint) -> PBPoint {
    PBPoint::new(
        q.x.clone(),
        q.pitilde.clone(),
        q.g.product(h),
        coadjoint(h, &q.chi),
    )
}

/// The dual automorphism action transported through the trivialization of
/// its reference connection: `trivialize ∘ dual_action ∘ untrivialize`.
/// Leaves `(g, chi)` unchanged and acts affinely on `pitilde`.
pub fn transported_dual_action(
    a: &GaugeAutomorphism,
    alpha: &ConnectionForm,
    q: &PBPoint,
) -> Result<PBPoint> {
    if !a.reference.same_reference(alpha) {
        return Err(Error::ReferenceMismatch);
    }
    Ok(trivialize(alpha, &dual_action(a, &untrivialize(alpha, q))))
}

/// A one-form on the trivialized space.
#[derive(Clone)]
pub struct OneFormOnPB {
    eval: Arc<dyn Fn(&PBPoint, &PBTangent) -> f64 + Send + Sync>,
}

impl OneFormOnPB {
    pub fn new(eval: impl Fn(&PBPoint, &PBTangent) -> f64 + Send + Sync + 'static) -> Self {
        OneFormOnPB { eval: Arc::new(eval) }
    }

    pub fn evaluate(&self, q: &PBPoint, zeta: &PBTangent) -> f64 {
        (self.eval)(q, zeta)
    }
}

/// The generalized canonical form of an automorphism, transported through
/// the trivialization of its reference connection.  It is the two-term
/// expression
///
/// ```text
/// ζ ↦ ⟨pitilde, Ã(x)·dx⟩ + ⟨chi, α″(dx, ξ)⟩
/// ```
///
/// where `α″` is the reference connection pushed by the inverse
/// automorphism (potential `a + b·Ã`): a base canonical form plus the
/// momentum pairing with a connection.
pub fn pulled_back_theta(a: &GaugeAutomorphism) -> OneFormOnPB {
    let base = a.base_part().field;
    let pushed = a
        .inverse()
        .expect("base parts stay invertible on the chart")
        .act_on_connection(&a.reference);
    OneFormOnPB::new(move |q: &PBPoint, zeta: &PBTangent| {
        let first = q.pitilde.dot(&(base.eval(&q.x) * &zeta.dx));
        let v = zeta.footpoint_velocity(&q.base_point());
        let second = pairing(&q.chi, &pushed.evaluate(&v));
        first + second
    })
}

fn pb_frame_bracket(zeta1: &PBTangent, zeta2: &PBTangent) -> PBTangent {
    let group = zeta1.xi.group;
    let n = zeta1.dx.len();
    let bracket = zeta1.xi.bracket(&zeta2.xi);
    PBTangent::new(
        DVector::zeros(n),
        bracket.scaled(-1.0),
        DVector::zeros(n),
        CoalgebraElement::zero(group),
    )
}

/// Exterior derivative on the trivialized space, with the same
/// frame-constant extension scheme and right-invariant bracket correction
/// as on the untrivialized side.
pub fn pb_exterior_derivative(
    form: &OneFormOnPB,
    q: &PBPoint,
    zeta1: &PBTangent,
    zeta2: &PBTangent,
) -> f64 {
    let h = FD_STEP;
    let d1 = (form.evaluate(&pb_curve(q, zeta1, h), zeta2)
        - form.evaluate(&pb_curve(q, zeta1, -h), zeta2))
        / (2.0 * h);
    let d2 = (form.evaluate(&pb_curve(q, zeta2, h), zeta1)
        - form.evaluate(&pb_curve(q, zeta2, -h), zeta1))
        / (2.0 * h);
    d1 - d2 - form.evaluate(q, &pb_frame_bracket(zeta1, zeta2))
}

/// Assembles the exterior derivative of a one-form on the full trivialized
/// frame at `q`, antisymmetric by construction; degeneracy is an error.
pub fn pb_two_form_matrix(form: &OneFormOnPB, q: &PBPoint) -> Result<TwoFormMatrix> {
    let n = q.base_dim();
    let group = q.group();
    let dim = PBTangent::frame_dim(n, group);
    let frames: Vec<PBTangent> = (0..dim).map(|i| PBTangent::frame(n, group, i)).collect();
    let mut matrix = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let value = pb_exterior_derivative(form, q, &frames[i], &frames[j]);
            matrix[(i, j)] = value;
            matrix[(j, i)] = -value;
        }
    }
    let two_form = TwoFormMatrix {
        matrix,
        base_dim: n,
        group,
    };
    let det = two_form.determinant();
    if det.abs() <= 1e-10 {
        return Err(Error::DegenerateForm { det });
    }
    Ok(two_form)
}

/// The symplectic form of an automorphism in the trivialized frame:
/// exterior derivative of [`pulled_back_theta`].
pub fn pulled_back_omega(a: &GaugeAutomorphism, q: &PBPoint) -> Result<TwoFormMatrix> {
    pb_two_form_matrix(&pulled_back_theta(a), q)
}

/// The tangent map of `untrivialize` at `q`, as the matrix taking
/// trivialized frame coordinates to phase frame coordinates: footpoint
/// components map identically, momentum components by central differences.
pub fn untrivialize_tangent_matrix(alpha: &ConnectionForm, q: &PBPoint) -> DMatrix<f64> {
    let n = q.base_dim();
    let group = q.group();
    let dim = PBTangent::frame_dim(n, group);
    let h = FD_STEP;
    let mut t = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let frame = PBTangent::frame(n, group, k);
        let plus = untrivialize(alpha, &pb_curve(q, &frame, h));
        let minus = untrivialize(alpha, &pb_curve(q, &frame, -h));
        let moved = PhaseTangent::new(
            frame.dx.clone(),
            frame.xi.clone(),
            (&plus.pi - &minus.pi) / (2.0 * h),
            CoalgebraElement::new(group, (&plus.rho.coords - &minus.rho.coords) / (2.0 * h)),
        );
        t.set_column(k, &moved.to_coords());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{BaseChart, MatrixField};
    use crate::canforms::{lifted_g_action, omega_matrix, OneFormOnPhase};
    use crate::sampling::Sampler;
    use approx::assert_relative_eq;

    fn chart3() -> BaseChart {
        BaseChart::centered(3, 1.5)
    }

    fn so3_connection() -> ConnectionForm {
        Sampler::new(401).connection(&chart3(), Group::So3)
    }

    #[test]
    fn trivialization_is_transparent_for_flat_connections_at_the_identity() {
        let chart = BaseChart::centered(2, 2.0);
        let alpha = ConnectionForm::flat(chart.clone(), Group::So2);
        let mut sampler = Sampler::new(1);
        let z = PhasePoint::new(
            sampler.point_in(&chart),
            GroupElement::identity(Group::So2),
            sampler.vector(2, 1.0),
            sampler.coalgebra(Group::So2, 1.0),
        );
        let q = trivialize(&alpha, &z);
        assert!((&q.pitilde - &z.pi).norm() < 1e-15);
        assert!((&q.chi.coords - &z.rho.coords).norm() < 1e-15);

        // chi = 0 with a flat connection reassembles to rho = 0.
        let q0 = PBPoint::new(
            z.x.clone(),
            z.pi.clone(),
            z.g.clone(),
            CoalgebraElement::zero(Group::So2),
        );
        let back = untrivialize(&alpha, &q0);
        assert!(back.rho.coords.norm() < 1e-15);
        assert!((&back.pi - &z.pi).norm() < 1e-15);
    }

    #[test]
    fn round_trips_are_exact() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(2);
        for _ in 0..40 {
            let z = sampler.phase_point(&alpha.chart, alpha.group);
            let back = untrivialize(&alpha, &trivialize(&alpha, &z));
            assert!((&back.pi - &z.pi).norm() < 1e-12);
            assert!((&back.rho.coords - &z.rho.coords).norm() < 1e-12);
            assert!((&back.x - &z.x).norm() < 1e-15);

            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let again = trivialize(&alpha, &untrivialize(&alpha, &q));
            assert!((&again.pitilde - &q.pitilde).norm() < 1e-12);
            assert!((&again.chi.coords - &q.chi.coords).norm() < 1e-12);
        }
    }

    #[test]
    fn reassembled_covectors_pair_through_the_connection() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(3);
        for _ in 0..40 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let z = untrivialize(&alpha, &q);
            let v = sampler.tangent_at(&z.base_point());
            let lhs = z.pair_vector(&v);
            let rhs = q.pitilde.dot(&v.dx) + pairing(&q.chi, &alpha.evaluate(&v));
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn trivialization_intertwines_the_group_actions() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(4);
        for _ in 0..40 {
            let z = sampler.phase_point(&alpha.chart, alpha.group);
            let h = sampler.group_element(alpha.group);
            let lhs = trivialize(&alpha, &lifted_g_action(&h, &z));
            let rhs = pb_g_action(&h, &trivialize(&alpha, &z));
            assert!((&lhs.pitilde - &rhs.pitilde).norm() < 1e-13);
            assert!((&lhs.chi.coords - &rhs.chi.coords).norm() < 1e-12);
            assert!((&lhs.g.matrix - &rhs.g.matrix).norm() < 1e-13);
        }
    }

    #[test]
    fn group_action_fixes_the_base_covector_and_composes() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(5);
        let q = sampler.pb_point(&alpha.chart, alpha.group);

        let e = GroupElement::identity(alpha.group);
        let same = pb_g_action(&e, &q);
        assert!((&same.pitilde - &q.pitilde).norm() < 1e-15);
        assert!((&same.chi.coords - &q.chi.coords).norm() < 1e-15);

        let h1 = sampler.group_element(alpha.group);
        let h2 = sampler.group_element(alpha.group);
        let seq = pb_g_action(&h2, &pb_g_action(&h1, &q));
        let joint = pb_g_action(&h1.product(&h2), &q);
        assert!((&seq.pitilde - &joint.pitilde).norm() < 1e-15);
        assert!((&seq.chi.coords - &joint.chi.coords).norm() < 1e-12);
        assert!((&seq.g.matrix - &joint.g.matrix).norm() < 1e-12);
    }

    #[test]
    fn transported_action_leaves_fibre_and_momentum_slots_alone() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(6);
        let a = sampler.gauge_automorphism(&alpha);
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let moved = transported_dual_action(&a, &alpha, &q).unwrap();
            assert!((&moved.g.matrix - &q.g.matrix).norm() < 1e-13);
            assert!((&moved.chi.coords - &q.chi.coords).norm() < 1e-11);
            assert!((&moved.x - &q.x).norm() < 1e-15);
        }

        let id = GaugeAutomorphism::identity(alpha.clone());
        let q = sampler.pb_point(&alpha.chart, alpha.group);
        let same = transported_dual_action(&id, &alpha, &q).unwrap();
        assert!((&same.pitilde - &q.pitilde).norm() < 1e-12);
    }

    #[test]
    fn transported_action_requires_the_matching_reference() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(7);
        let beta = sampler.connection(&alpha.chart, alpha.group);
        let a = sampler.gauge_automorphism(&alpha);
        let q = sampler.pb_point(&alpha.chart, alpha.group);
        assert!(matches!(
            transported_dual_action(&a, &beta, &q),
            Err(Error::ReferenceMismatch)
        ));
    }

    #[test]
    fn transported_base_automorphisms_compose_the_base_covector() {
        // Pure base automorphisms act on pitilde by the transpose of their
        // field; fibre point and momentum slot are untouched.
        let alpha = so3_connection();
        let mut sampler = Sampler::new(8);
        let atilde = crate::autgroup::BaseAutomorphism::new(sampler.invertible_field(&alpha.chart));
        let a = GaugeAutomorphism::from_base(alpha.clone(), atilde.clone()).unwrap();
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let moved = transported_dual_action(&a, &alpha, &q).unwrap();
            let expect = atilde.field.eval(&q.x).transpose() * &q.pitilde;
            assert!((&moved.pitilde - &expect).norm() < 1e-11);
        }
    }

    #[test]
    fn transported_shifts_add_the_momentum_pairing_of_their_field() {
        // Pure shifts translate pitilde by bᵀ·rho with rho recovered from
        // the momentum slot.
        let alpha = so3_connection();
        let mut sampler = Sampler::new(9);
        let b = sampler.tensorial_field(&alpha.chart, alpha.group);
        let a = GaugeAutomorphism::from_shift(
            alpha.clone(),
            crate::autgroup::VerticalShift::new(b.clone()),
        );
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let moved = transported_dual_action(&a, &alpha, &q).unwrap();
            let rho = coadjoint(&q.g.inverse(), &q.chi);
            let expect = &q.pitilde + b.field.eval(&q.x).transpose() * &rho.coords;
            assert!((&moved.pitilde - &expect).norm() < 1e-11);
        }
    }

    #[test]
    fn transported_action_matches_its_closed_form() {
        // General automorphisms: pitilde ↦ Ãᵀ(pitilde + bᵀ·rho).
        let alpha = so3_connection();
        let mut sampler = Sampler::new(10);
        let a = sampler.gauge_automorphism(&alpha);
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let moved = transported_dual_action(&a, &alpha, &q).unwrap();
            let rho = coadjoint(&q.g.inverse(), &q.chi);
            let shifted =
                &q.pitilde + a.shift_part().field.field.eval(&q.x).transpose() * &rho.coords;
            let expect = a.base_part().field.eval(&q.x).transpose() * shifted;
            assert!((&moved.pitilde - &expect).norm() < 1e-11);
        }
    }

    #[test]
    fn transported_action_is_affine_in_the_base_covector() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(11);
        let a = sampler.gauge_automorphism(&alpha);
        let q1 = sampler.pb_point(&alpha.chart, alpha.group);
        let mut q2 = q1.clone();
        q2.pitilde = sampler.vector(3, 1.0);
        let m1 = transported_dual_action(&a, &alpha, &q1).unwrap();
        let m2 = transported_dual_action(&a, &alpha, &q2).unwrap();
        let lhs = &m1.pitilde - &m2.pitilde;
        let rhs = a.base_part().field.eval(&q1.x).transpose() * (&q1.pitilde - &q2.pitilde);
        assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn transported_action_commutes_with_the_group_action() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(12);
        let a = sampler.gauge_automorphism(&alpha);
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let h = sampler.group_element(alpha.group);
            let lhs = pb_g_action(&h, &transported_dual_action(&a, &alpha, &q).unwrap());
            let rhs = transported_dual_action(&a, &alpha, &pb_g_action(&h, &q)).unwrap();
            assert!((&lhs.pitilde - &rhs.pitilde).norm() < 1e-10);
            assert!((&lhs.chi.coords - &rhs.chi.coords).norm() < 1e-11);
            assert!((&lhs.g.matrix - &rhs.g.matrix).norm() < 1e-13);
        }
    }

    #[test]
    fn transported_form_of_the_identity_over_a_flat_connection_is_explicit() {
        let chart = BaseChart::centered(3, 1.5);
        let alpha = ConnectionForm::flat(chart.clone(), Group::So3);
        let id = GaugeAutomorphism::identity(alpha.clone());
        let form = pulled_back_theta(&id);
        let mut sampler = Sampler::new(13);
        for _ in 0..20 {
            let q = sampler.pb_point(&chart, Group::So3);
            let zeta = sampler.pb_tangent(3, Group::So3);
            let expect = q.pitilde.dot(&zeta.dx)
                + pairing(
                    &q.chi,
                    &crate::liegroup::adjoint(&q.g.inverse(), &zeta.xi),
                );
            assert_relative_eq!(form.evaluate(&q, &zeta), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn transported_form_base_term_is_the_base_canonical_form_of_the_base_part() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(14);
        let a = sampler.gauge_automorphism(&alpha);
        let form = pulled_back_theta(&a);
        let base = a.base_part().field;
        for _ in 0..20 {
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            // Horizontal probes (ξ = 0) with the momentum slot zeroed leave
            // exactly the base term ⟨pitilde, Ã·dx⟩.
            let mut probe = sampler.pb_tangent(3, alpha.group);
            probe.xi = LieAlgebraElement::zero(alpha.group);
            let mut stripped = q.clone();
            stripped.chi = CoalgebraElement::zero(alpha.group);
            let expect = stripped.pitilde.dot(&(base.eval(&q.x) * &probe.dx));
            assert_relative_eq!(form.evaluate(&stripped, &probe), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn transported_form_agrees_with_the_chain_rule_transport() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(15);
        for _ in 0..4 {
            let a = sampler.gauge_automorphism(&alpha);
            let form = pulled_back_theta(&a);
            let theta = OneFormOnPhase::of_automorphism(&a);
            for _ in 0..8 {
                let q = sampler.pb_point(&alpha.chart, alpha.group);
                let zeta = sampler.pb_tangent(3, alpha.group);
                let direct = form.evaluate(&q, &zeta);

                // Transport through the trivialization by differentiating
                // the reassembly map along the tangent's curve.
                let z = untrivialize(&alpha, &q);
                let h = FD_STEP;
                let plus = untrivialize(&alpha, &pb_curve(&q, &zeta, h));
                let minus = untrivialize(&alpha, &pb_curve(&q, &zeta, -h));
                let moved = PhaseTangent::new(
                    zeta.dx.clone(),
                    zeta.xi.clone(),
                    (&plus.pi - &minus.pi) / (2.0 * h),
                    CoalgebraElement::new(
                        alpha.group,
                        (&plus.rho.coords - &minus.rho.coords) / (2.0 * h),
                    ),
                );
                let transported = theta.evaluate(&z, &moved);
                assert_relative_eq!(direct, transported, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn abelian_flat_two_form_is_the_block_pairing_matrix() {
        let chart = BaseChart::centered(2, 2.0);
        let alpha = ConnectionForm::flat(chart.clone(), Group::So2);
        let id = GaugeAutomorphism::identity(alpha.clone());
        let mut sampler = Sampler::new(16);
        let q = sampler.pb_point(&chart, Group::So2);
        let omega = pulled_back_omega(&id, &q).unwrap();
        // Frame order (dx₀, dx₁, ξ, dpitilde₀, dpitilde₁, dchi):
        // ω(dx_i, dpitilde_j) = −δ_ij and ω(ξ, dchi) = −1.
        let mut expect = DMatrix::zeros(6, 6);
        for i in 0..3 {
            expect[(i, i + 3)] = -1.0;
            expect[(i + 3, i)] = 1.0;
        }
        assert!((omega.matrix.clone() - expect).abs().max() < 1e-9);
        assert!(omega.antisymmetry_residual() < 1e-12);
    }

    #[test]
    fn transported_two_form_matches_the_congruence_transport() {
        let alpha = so3_connection();
        let mut sampler = Sampler::new(17);
        for _ in 0..2 {
            let a = sampler.gauge_automorphism(&alpha);
            let q = sampler.pb_point(&alpha.chart, alpha.group);
            let direct = pulled_back_omega(&a, &q).unwrap();

            let z = untrivialize(&alpha, &q);
            let omega_phase = omega_matrix(&a, &z).unwrap();
            let t = untrivialize_tangent_matrix(&alpha, &q);
            let transported = t.transpose() * &omega_phase.matrix * &t;
            let gap = (&direct.matrix - transported).abs().max();
            assert!(gap < 1e-4, "congruence gap {gap}");
        }
    }

    #[test]
    fn transported_two_form_splits_into_base_momentum_and_curvature_terms() {
        // d(pulled-back form) = (base two-form) + ⟨dchi ∧ connection⟩
        // + ⟨chi, d connection⟩, with each term evaluated independently.
        let alpha = so3_connection();
        let mut sampler = Sampler::new(18);
        let a = sampler.gauge_automorphism(&alpha);
        let base = a.base_part().field;
        let pushed = a.inverse().unwrap().act_on_connection(&alpha);

        let beta = |q: &PBPoint, zeta: &PBTangent| {
            pushed.evaluate(&zeta.footpoint_velocity(&q.base_point()))
        };

        let q = sampler.pb_point(&alpha.chart, alpha.group);
        let h = FD_STEP;
        for _ in 0..12 {
            let z1 = sampler.pb_tangent(3, alpha.group);
            let z2 = sampler.pb_tangent(3, alpha.group);

            // Base term: the two-form of ⟨pitilde, Ã dx⟩ on (x, pitilde)
            // alone, computed with plain coordinate differences.
            let theta_base = |x: &DVector<f64>, pt: &DVector<f64>, dx: &DVector<f64>| {
                pt.dot(&(base.eval(x) * dx))
            };
            let curve = |zt: &PBTangent, t: f64| (&q.x + t * &zt.dx, &q.pitilde + t * &zt.dpitilde);
            let d1 = {
                let (xp, pp) = curve(&z1, h);
                let (xm, pm) = curve(&z1, -h);
                (theta_base(&xp, &pp, &z2.dx) - theta_base(&xm, &pm, &z2.dx)) / (2.0 * h)
            };
            let d2 = {
                let (xp, pp) = curve(&z2, h);
                let (xm, pm) = curve(&z2, -h);
                (theta_base(&xp, &pp, &z1.dx) - theta_base(&xm, &pm, &z1.dx)) / (2.0 * h)
            };
            let base_term = d1 - d2;

            // Momentum term: ⟨dchi ∧ β⟩.
            let momentum_term = z1.dchi.coords.dot(&beta(&q, &z2).coords)
                - z2.dchi.coords.dot(&beta(&q, &z1).coords);

            // Curvature term: ⟨chi, dβ⟩ with the connection differentiated
            // along footpoint curves (right-invariant bracket correction).
            let foot_curve = |zt: &PBTangent, t: f64| {
                PBPoint::new(
                    &q.x + t * &zt.dx,
                    q.pitilde.clone(),
                    zt.xi.scaled(t).exp().product(&q.g),
                    q.chi.clone(),
                )
            };
            let db = {
                let b1 = (beta(&foot_curve(&z1, h), &z2).coords
                    - beta(&foot_curve(&z1, -h), &z2).coords)
                    / (2.0 * h);
                let b2 = (beta(&foot_curve(&z2, h), &z1).coords
                    - beta(&foot_curve(&z2, -h), &z1).coords)
                    / (2.0 * h);
                let correction = PBTangent::new(
                    DVector::zeros(3),
                    z1.xi.bracket(&z2.xi).scaled(-1.0),
                    DVector::zeros(3),
                    CoalgebraElement::zero(alpha.group),
                );
                LieAlgebraElement::new(alpha.group, b1 - b2 - beta(&q, &correction).coords)
            };
            let curvature_term = pairing(&q.chi, &db);

            let assembled = base_term + momentum_term + curvature_term;
            let direct = pb_exterior_derivative(&pulled_back_theta(&a), &q, &z1, &z2);
            assert!(
                (assembled - direct).abs() < 1e-6,
                "decomposition gap {}",
                assembled - direct
            );
        }
    }

    #[test]
    fn magnetic_connections_shear_the_base_covector_block() {
        // For an abelian magnetic connection the transported two-form picks
        // up the field strength in the (dx, dx) block scaled by chi.
        let chart = BaseChart::centered(2, 2.0);
        let b_field = 1.0;
        let alpha = ConnectionForm::new(chart.clone(), Group::So2, MatrixField::magnetic2d(b_field));
        let id = GaugeAutomorphism::identity(alpha.clone());
        let mut sampler = Sampler::new(19);
        let mut q = sampler.pb_point(&chart, Group::So2);
        q.chi = CoalgebraElement::from_slice(Group::So2, &[0.7]);
        let omega = pulled_back_omega(&id, &q).unwrap();
        // dβ(∂x, ∂y) = ∂x a_y − ∂y a_x = B, so the (dx₀, dx₁) entry is
        // chi·B on top of the canonical pairing blocks.
        assert_relative_eq!(omega.matrix[(0, 1)], 0.7 * b_field, epsilon = 1e-8);
        assert_relative_eq!(omega.matrix[(0, 3)], -1.0, epsilon = 1e-9);
        assert_relative_eq!(omega.matrix[(1, 4)], -1.0, epsilon = 1e-9);
        assert_relative_eq!(omega.matrix[(2, 5)], -1.0, epsilon = 1e-9);
    }
}
