//! Fibre-preserving automorphisms of the tangent bundle TP that commute with
//! the tangent-group action, relative to a reference connection.
//!
//! Every such automorphism decomposes against a reference connection α into
//! a base part Ã (an invertible matrix field on the chart, acting on
//! horizontal directions through the horizontal lift) and a vertical shift b
//! (a tensorial field feeding base velocities into the fibre).  In the
//! right-trivialized components used throughout the crate the action is the
//! closed form
//!
//! ```text
//! (dx, ξ) ↦ (Ã(x)·dx, ξ + a(x)·dx − a(x)Ã(x)·dx + b(x)Ã(x)·dx)
//! ```
//!
//! with `a` the reference gauge potential.  Products, inverses, the split
//! into (base, shift) pairs, the action on connections, and the transitivity
//! witness between two connections are all exact formulas in `(Ã, b)`; the
//! sampled reports exist to exercise the defining identities numerically.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bundle::{
    right_action, tg_action, vertical_generator, BaseChart, ConnectionForm, MatrixField,
    TangentVector, TensorialField,
};
use crate::error::{Error, Result};
use crate::liegroup::{Group, LieAlgebraElement};
use crate::sampling::Sampler;

/// An invertible matrix field on the chart: an automorphism of the tangent
/// bundle of the base.
#[derive(Clone, Debug)]
pub struct BaseAutomorphism {
    pub field: MatrixField,
}

impl BaseAutomorphism {
    pub fn new(field: MatrixField) -> Self {
        assert_eq!(field.rows(), field.cols(), "base automorphism must be square");
        BaseAutomorphism { field }
    }

    pub fn identity(n: usize) -> Self {
        BaseAutomorphism::new(MatrixField::identity(n))
    }

    pub fn scaling(n: usize, c: f64) -> Self {
        BaseAutomorphism::new(MatrixField::scaled_identity(n, c))
    }

    /// Pointwise matrix product `x ↦ self(x)·other(x)`.
    pub fn product(&self, other: &BaseAutomorphism) -> BaseAutomorphism {
        let lhs = self.field.clone();
        let rhs = other.field.clone();
        BaseAutomorphism::new(MatrixField::from_fn(
            lhs.rows(),
            lhs.cols(),
            move |x| lhs.eval(x) * rhs.eval(x),
        ))
    }

    /// Pointwise matrix inverse.
    pub fn inverse(&self) -> BaseAutomorphism {
        let field = self.field.clone();
        BaseAutomorphism::new(MatrixField::from_fn(
            field.rows(),
            field.cols(),
            move |x| invert(&field, x),
        ))
    }
}

/// A vertical shift: the kernel part of the split, acting on tangent vectors
/// as `v ↦ v + (0, b(x)·dx)`.
#[derive(Clone, Debug)]
pub struct VerticalShift {
    pub field: TensorialField,
}

impl VerticalShift {
    pub fn new(field: TensorialField) -> Self {
        VerticalShift { field }
    }

    pub fn zero(group: Group, base_dim: usize) -> Self {
        VerticalShift::new(TensorialField::zero(group, base_dim))
    }
}

fn invert(field: &MatrixField, x: &DVector<f64>) -> DMatrix<f64> {
    field
        .eval(x)
        .try_inverse()
        .expect("base part singular inside the chart; the sampled invertibility check admitted a field that violates its smooth-invertibility contract")
}

/// Seeded grid on which constructor-time invertibility is checked: the box
/// corners, the centre, and 32 random interior points.
fn invertibility_grid(chart: &BaseChart) -> Vec<DVector<f64>> {
    let n = chart.dim();
    let mut points = Vec::new();
    for mask in 0..(1usize << n) {
        points.push(DVector::from_fn(n, |i, _| {
            if mask >> i & 1 == 1 {
                chart.upper[i]
            } else {
                chart.lower[i]
            }
        }));
    }
    points.push((&chart.lower + &chart.upper) / 2.0);
    let mut sampler = Sampler::new(0xBA5E_621D);
    for _ in 0..32 {
        points.push(sampler.point_in(chart));
    }
    points
}

fn check_invertible(field: &MatrixField, chart: &BaseChart) -> Result<()> {
    for x in invertibility_grid(chart) {
        let det = field.eval(&x).determinant();
        if det.abs() <= 1e-10 {
            return Err(Error::SingularBasePart {
                at: x.iter().copied().collect(),
                det,
            });
        }
    }
    Ok(())
}

/// An automorphism of TP covering the identity of P, commuting with the
/// tangent-group action, stored against its reference connection as the pair
/// (base part, vertical shift).
#[derive(Clone, Debug)]
pub struct GaugeAutomorphism {
    pub reference: ConnectionForm,
    base: MatrixField,
    shift: MatrixField,
}

impl GaugeAutomorphism {
    /// Builds the automorphism with the given parts, checking invertibility
    /// of the base part on a seeded sample grid.
    pub fn new(reference: ConnectionForm, base: BaseAutomorphism, shift: VerticalShift) -> Result<Self> {
        let n = reference.chart.dim();
        let ng = reference.group.dim();
        assert_eq!(base.field.rows(), n, "base part must be n×n");
        assert_eq!(
            (shift.field.field.rows(), shift.field.field.cols()),
            (ng, n),
            "shift part must be n_G×n"
        );
        assert_eq!(shift.field.group, reference.group, "shift group");
        check_invertible(&base.field, &reference.chart)?;
        Ok(GaugeAutomorphism {
            reference,
            base: base.field,
            shift: shift.field.field,
        })
    }

    pub fn identity(reference: ConnectionForm) -> Self {
        let n = reference.chart.dim();
        let ng = reference.group.dim();
        GaugeAutomorphism {
            base: MatrixField::identity(n),
            shift: MatrixField::zeros(ng, n),
            reference,
        }
    }

    /// Embeds a base automorphism (zero shift): the right-inverse of
    /// [`base_part`](Self::base_part) in the split.
    pub fn from_base(reference: ConnectionForm, base: BaseAutomorphism) -> Result<Self> {
        let shift = VerticalShift::zero(reference.group, reference.chart.dim());
        GaugeAutomorphism::new(reference, base, shift)
    }

    /// Embeds a vertical shift (identity base part).
    pub fn from_shift(reference: ConnectionForm, shift: VerticalShift) -> Self {
        let n = reference.chart.dim();
        GaugeAutomorphism::new(reference, BaseAutomorphism::identity(n), shift)
            .expect("identity base part is invertible")
    }

    /// The scaling family: identity on vertical vectors, multiplication by
    /// `c` on horizontal ones.  Undefined at `c = 0`, which would collapse
    /// the horizontal distribution.
    pub fn scaling(reference: ConnectionForm, c: f64) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::ZeroScale);
        }
        let n = reference.chart.dim();
        GaugeAutomorphism::from_base(reference, BaseAutomorphism::scaling(n, c))
    }

    /// The base part Ã: the image of the automorphism in the automorphisms
    /// of TM.  This projection is a group morphism.
    pub fn base_part(&self) -> BaseAutomorphism {
        BaseAutomorphism::new(self.base.clone())
    }

    /// The vertical shift b: the kernel coordinate of the split, i.e. the
    /// automorphism times the embedded inverse of its own base part.
    pub fn shift_part(&self) -> VerticalShift {
        VerticalShift::new(TensorialField::new(self.reference.group, self.shift.clone()))
    }

    /// Applies the automorphism to a tangent vector (base point unchanged).
    pub fn apply(&self, v: &TangentVector) -> TangentVector {
        let x = &v.base.x;
        let a = self.reference.potential.eval(x);
        let atilde = self.base.eval(x);
        let b = self.shift.eval(x);
        let new_dx = &atilde * &v.dx;
        let xi = &v.xi.coords + &a * &v.dx - &a * &new_dx + &b * &new_dx;
        TangentVector {
            base: v.base.clone(),
            dx: new_dx,
            xi: LieAlgebraElement::new(self.reference.group, xi),
        }
    }

    /// Group product (composition: `self` after `other`), computed in the
    /// (base, shift) coordinates: `(Ã₁Ã₂, b₁ + b₂·Ã₁^{-1})`.
    pub fn product(&self, other: &GaugeAutomorphism) -> Result<GaugeAutomorphism> {
        if !self.reference.same_reference(&other.reference) {
            return Err(Error::ReferenceMismatch);
        }
        let base = BaseAutomorphism::new(self.base.clone())
            .product(&BaseAutomorphism::new(other.base.clone()));
        let b1 = self.shift.clone();
        let b2 = other.shift.clone();
        let a1 = self.base.clone();
        let shift_field = MatrixField::from_fn(b1.rows(), b1.cols(), move |x| {
            b1.eval(x) + b2.eval(x) * invert(&a1, x)
        });
        Ok(GaugeAutomorphism {
            reference: self.reference.clone(),
            base: base.field,
            shift: shift_field,
        })
    }

    /// Group inverse `(Ã^{-1}, −b·Ã)`, with the inverse base part re-checked
    /// on the sample grid.
    pub fn inverse(&self) -> Result<GaugeAutomorphism> {
        let base_inv = BaseAutomorphism::new(self.base.clone()).inverse();
        check_invertible(&base_inv.field, &self.reference.chart)?;
        let b = self.shift.clone();
        let a = self.base.clone();
        let shift_field =
            MatrixField::from_fn(b.rows(), b.cols(), move |x| -(b.eval(x) * a.eval(x)));
        Ok(GaugeAutomorphism {
            reference: self.reference.clone(),
            base: base_inv.field,
            shift: shift_field,
        })
    }

    /// Re-expresses the same map of TP against a new reference connection:
    /// the base part is unchanged and the shift becomes
    /// `b + (a_old − a_new)(Ã^{-1} − id)`.
    pub fn with_reference(&self, new_reference: ConnectionForm) -> GaugeAutomorphism {
        assert!(
            self.reference.same_chart(&new_reference),
            "re-expression requires the same chart and group"
        );
        let a_old = self.reference.potential.clone();
        let a_new = new_reference.potential.clone();
        let atilde = self.base.clone();
        let b = self.shift.clone();
        let shift_field = MatrixField::from_fn(b.rows(), b.cols(), move |x| {
            let diff = a_old.eval(x) - a_new.eval(x);
            let inv = invert(&atilde, x);
            b.eval(x) + &diff * inv - diff
        });
        GaugeAutomorphism {
            reference: new_reference,
            base: self.base.clone(),
            shift: shift_field,
        }
    }

    /// Pushes a connection forward: the result evaluates on `v` as `α′`
    /// evaluates on `apply(self⁻¹, v)`.  Realized as a new gauge potential
    /// `(a′ − a_ref)·Ã^{-1} + a_ref − b` in closed form.
    pub fn act_on_connection(&self, alpha_prime: &ConnectionForm) -> ConnectionForm {
        assert!(
            self.reference.same_chart(alpha_prime),
            "connection must live on the reference chart"
        );
        let aref = self.reference.potential.clone();
        let aprime = alpha_prime.potential.clone();
        let atilde = self.base.clone();
        let b = self.shift.clone();
        let field = MatrixField::from_fn(aprime.rows(), aprime.cols(), move |x| {
            let inv = invert(&atilde, x);
            (aprime.eval(x) - aref.eval(x)) * inv + aref.eval(x) - b.eval(x)
        });
        ConnectionForm::new(
            alpha_prime.chart.clone(),
            alpha_prime.group,
            field,
        )
    }
}

/// The vertical shift mapping `alpha` onto `alpha_prime` under the
/// connection action: the unique automorphism with identity base part doing
/// so, with shift field `a − a′`.
pub fn transitive_witness(alpha: &ConnectionForm, alpha_prime: &ConnectionForm) -> GaugeAutomorphism {
    assert!(alpha.same_chart(alpha_prime), "connections on different charts");
    let diff = crate::bundle::connection_difference(alpha, alpha_prime);
    GaugeAutomorphism::from_shift(alpha.clone(), VerticalShift::new(diff))
}

/// Max residual, over seeded samples, of the intertwining identity between
/// an automorphism and horizontal lifts: applying `A` to an `α`-horizontal
/// lift must equal the lift, by the pushed-forward connection, of the base
/// part of the velocity.
pub fn lift_equivariance_report(a: &GaugeAutomorphism, samples: usize, seed: u64) -> f64 {
    let mut sampler = Sampler::new(seed);
    let alpha = &a.reference;
    let pushed = a.act_on_connection(alpha);
    let mut residual: f64 = 0.0;
    for _ in 0..samples {
        let p = sampler.bundle_point(&alpha.chart, alpha.group);
        let vtilde = sampler.vector(alpha.chart.dim(), 1.0);
        let lhs = a.apply(&alpha.horizontal_lift(&p, &vtilde));
        let mapped = a.base.eval(&p.x) * &vtilde;
        let rhs = pushed.horizontal_lift(&p, &mapped);
        residual = residual
            .max((&lhs.dx - &rhs.dx).norm())
            .max((&lhs.xi.coords - &rhs.xi.coords).norm());
    }
    residual
}

/// An arbitrary fibre map of TP covering the identity, for diagnosing
/// whether a candidate map commutes with the tangent-group action.  Gauge
/// automorphisms commute by construction; hand-rolled maps may not.
#[derive(Clone)]
pub struct RawBundleMap {
    eval: Arc<dyn Fn(&TangentVector) -> TangentVector + Send + Sync>,
}

impl RawBundleMap {
    pub fn new(eval: impl Fn(&TangentVector) -> TangentVector + Send + Sync + 'static) -> Self {
        RawBundleMap { eval: Arc::new(eval) }
    }

    pub fn from_automorphism(a: &GaugeAutomorphism) -> Self {
        let a = a.clone();
        RawBundleMap::new(move |v| a.apply(v))
    }

    pub fn apply(&self, v: &TangentVector) -> TangentVector {
        (self.eval)(v)
    }
}

/// Max residual, over seeded samples, of commutation with the tangent-group
/// action: `map(Φ_t v)` versus `Φ_t(map v)` for random `t` and `v`.  A map
/// is an admissible automorphism exactly when this vanishes (together with
/// fibrewise linearity, which gauge automorphisms have by construction).
pub fn tg_commutation_report(
    map: &RawBundleMap,
    chart: &BaseChart,
    group: Group,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut sampler = Sampler::new(seed);
    let mut residual: f64 = 0.0;
    for _ in 0..samples {
        let p = sampler.bundle_point(chart, group);
        let v = sampler.tangent_at(&p);
        let t = sampler.tangent_group_element(group);
        let lhs = map.apply(&tg_action(&t, &v));
        let rhs = tg_action(&t, &map.apply(&v));
        residual = residual
            .max((&lhs.dx - &rhs.dx).norm())
            .max((&lhs.xi.coords - &rhs.xi.coords).norm())
            .max((&lhs.base.g.matrix - &rhs.base.g.matrix).norm());
    }
    residual
}

/// Max residual of the two structural conditions characterizing admissible
/// fibre maps: fixing the generators of the right action, and constancy of
/// components along each fibre.
pub fn invariance_conditions_report(
    map: &RawBundleMap,
    chart: &BaseChart,
    group: Group,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut sampler = Sampler::new(seed);
    let mut residual: f64 = 0.0;
    for _ in 0..samples {
        let p = sampler.bundle_point(chart, group);
        let x = sampler.algebra(group, 1.0);
        let gen = vertical_generator(&p, &x);
        let through = map.apply(&gen);
        residual = residual
            .max((&through.dx - &gen.dx).norm())
            .max((&through.xi.coords - &gen.xi.coords).norm());

        // Components of the map must not depend on the fibre point.
        let v = sampler.tangent_at(&p);
        let h = sampler.group_element(group);
        let moved = TangentVector {
            base: right_action(&p, &h),
            dx: v.dx.clone(),
            xi: v.xi.clone(),
        };
        let at_p = map.apply(&v);
        let at_ph = map.apply(&moved);
        residual = residual
            .max((&at_p.dx - &at_ph.dx).norm())
            .max((&at_p.xi.coords - &at_ph.xi.coords).norm());
    }
    residual
}
