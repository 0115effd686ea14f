//! Seeded random sampling for property reports and scenario checks.
//!
//! Every randomized routine in the crate draws through [`Sampler`], which
//! wraps a counter-based stream cipher generator seeded from a single 64-bit
//! value, so reports are reproducible bit-for-bit from the seed recorded in
//! them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autgroup::{BaseAutomorphism, GaugeAutomorphism, VerticalShift};
use crate::bundle::{BaseChart, BundlePoint, ConnectionForm, MatrixField, TangentVector, TensorialField};
use crate::canforms::{PhasePoint, PhaseTangent};
use crate::liegroup::{CoalgebraElement, Group, GroupElement, LieAlgebraElement, TangentGroupElement};
use crate::pullback::{PBPoint, PBTangent};

/// Deterministic source of every random object used by sampled checks.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A derived sampler whose stream is independent of this one's.
    pub fn fork(&mut self, label: u64) -> Sampler {
        let seed = self.rng.gen::<u64>() ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        Sampler::new(seed)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn vector(&mut self, n: usize, scale: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.uniform(-scale, scale))
    }

    /// A point in the chart box, kept 5% away from the boundary so that
    /// finite-difference probes around it stay meaningful.
    pub fn point_in(&mut self, chart: &BaseChart) -> DVector<f64> {
        DVector::from_fn(chart.dim(), |i, _| {
            let margin = 0.05 * (chart.upper[i] - chart.lower[i]);
            self.uniform(chart.lower[i] + margin, chart.upper[i] - margin)
        })
    }

    pub fn algebra(&mut self, group: Group, scale: f64) -> LieAlgebraElement {
        LieAlgebraElement::new(group, self.vector(group.dim(), scale))
    }

    pub fn coalgebra(&mut self, group: Group, scale: f64) -> CoalgebraElement {
        CoalgebraElement::new(group, self.vector(group.dim(), scale))
    }

    /// A group element within the exponential chart (coordinate norm ≤ 1.4),
    /// covering a healthy share of each group without touching the cut locus.
    pub fn group_element(&mut self, group: Group) -> GroupElement {
        self.algebra(group, 1.4 / (group.dim() as f64).sqrt()).exp()
    }

    pub fn tangent_group_element(&mut self, group: Group) -> TangentGroupElement {
        TangentGroupElement::new(self.group_element(group), self.algebra(group, 1.0))
    }

    pub fn bundle_point(&mut self, chart: &BaseChart, group: Group) -> BundlePoint {
        BundlePoint::new(self.point_in(chart), self.group_element(group))
    }

    pub fn tangent_at(&mut self, base: &BundlePoint) -> TangentVector {
        TangentVector::new(
            base.clone(),
            self.vector(base.x.len(), 1.0),
            self.algebra(base.g.group, 1.0),
        )
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _, | self.uniform(-scale, scale))
    }

    /// An affine matrix field with O(scale) constant part and gentler slopes.
    pub fn linear_field(&mut self, rows: usize, cols: usize, base_dim: usize, scale: f64) -> MatrixField {
        let m0 = self.matrix(rows, cols, scale);
        let slopes = (0..base_dim)
            .map(|_| self.matrix(rows, cols, scale * 0.3))
            .collect();
        MatrixField::linear(m0, slopes)
    }

    /// A random connection with an affine gauge potential.
    pub fn connection(&mut self, chart: &BaseChart, group: Group) -> ConnectionForm {
        let field = self.linear_field(group.dim(), chart.dim(), chart.dim(), 0.6);
        ConnectionForm::new(chart.clone(), group, field)
    }

    /// A random tensorial (vertical-valued) field with affine coefficients.
    pub fn tensorial_field(&mut self, chart: &BaseChart, group: Group) -> TensorialField {
        TensorialField::new(group, self.linear_field(group.dim(), chart.dim(), chart.dim(), 0.5))
    }

    /// An affine GL(n) field that stays uniformly invertible on the chart:
    /// a well-conditioned constant part plus slopes small enough to keep the
    /// determinant away from zero on the whole box.
    pub fn invertible_field(&mut self, chart: &BaseChart) -> MatrixField {
        let n = chart.dim();
        let radius: f64 = chart
            .lower
            .iter()
            .chain(chart.upper.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        // Constant part: identity plus a contraction, so ‖M0 − I‖ < 0.45.
        let m0 = DMatrix::identity(n, n) + self.matrix(n, n, 0.45 / n as f64);
        let slope_scale = 0.25 / (n as f64 * radius.max(1.0));
        let slopes = (0..n).map(|_| self.matrix(n, n, slope_scale)).collect();
        MatrixField::linear(m0, slopes)
    }

    /// A random admissible automorphism referenced to the given connection:
    /// invertible base part, affine shift part.
    pub fn gauge_automorphism(&mut self, reference: &ConnectionForm) -> GaugeAutomorphism {
        let base = BaseAutomorphism::new(self.invertible_field(&reference.chart));
        let shift = VerticalShift::new(self.tensorial_field(&reference.chart, reference.group));
        GaugeAutomorphism::new(reference.clone(), base, shift)
            .expect("sampled base parts are invertible on the chart by construction")
    }

    pub fn phase_point(&mut self, chart: &BaseChart, group: Group) -> PhasePoint {
        PhasePoint::new(
            self.point_in(chart),
            self.group_element(group),
            self.vector(chart.dim(), 1.0),
            self.coalgebra(group, 1.0),
        )
    }

    pub fn phase_tangent(&mut self, base_dim: usize, group: Group) -> PhaseTangent {
        PhaseTangent::new(
            self.vector(base_dim, 1.0),
            self.algebra(group, 1.0),
            self.vector(base_dim, 1.0),
            self.coalgebra(group, 1.0),
        )
    }

    pub fn pb_point(&mut self, chart: &BaseChart, group: Group) -> PBPoint {
        PBPoint::new(
            self.point_in(chart),
            self.vector(chart.dim(), 1.0),
            self.group_element(group),
            self.coalgebra(group, 1.0),
        )
    }

    pub fn pb_tangent(&mut self, base_dim: usize, group: Group) -> PBTangent {
        PBTangent::new(
            self.vector(base_dim, 1.0),
            self.algebra(group, 1.0),
            self.vector(base_dim, 1.0),
            self.coalgebra(group, 1.0),
        )
    }
}
