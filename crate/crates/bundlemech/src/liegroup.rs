//! Matrix Lie group kernel.
//!
//! Supports SO(2), SO(3) and SU(2) through a fixed algebra basis per group,
//! with closed-form exponential and principal logarithm, adjoint/coadjoint
//! actions, the Lie bracket, the tangent group G ⋉ T_eG (group elements
//! paired with right-trivialized velocities), and the Lie–Poisson bracket on
//! the dual algebra.
//!
//! Algebra and dual-algebra elements are stored as real coordinate vectors
//! against the fixed basis; the matrix realization is built on demand.  The
//! pairing between an algebra element and a dual element is the coordinate
//! dot product.  All three groups share one complex matrix representation so
//! that callers never branch on the group tag.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Matrices are complex throughout; SO(2)/SO(3) simply carry zero imaginary
/// parts.
pub type CMatrix = DMatrix<Complex64>;

/// Step used by every central finite difference in the crate.
pub const FD_STEP: f64 = 1e-5;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The supported matrix groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    So2,
    So3,
    Su2,
}

impl Group {
    /// Size of the defining matrix representation.
    pub fn matrix_dim(self) -> usize {
        match self {
            Group::So2 => 2,
            Group::So3 => 3,
            Group::Su2 => 2,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn dim(self) -> usize {
        match self {
            Group::So2 => 1,
            Group::So3 | Group::Su2 => 3,
        }
    }

    pub fn is_abelian(self) -> bool {
        matches!(self, Group::So2)
    }

    /// Fixed algebra basis.
    ///
    /// * SO(2): the 90° generator `[[0,-1],[1,0]]`.
    /// * SO(3): the rotation generators `L_i` with `(L_i)_{jk} = -ε_{ijk}`.
    /// * SU(2): `-(i/2)σ_i` for the Pauli matrices `σ_i`.
    ///
    /// All three satisfy `[E_i, E_j] = Σ_k ε_{ijk} E_k` (zero for SO(2)), so
    /// the structure constants are shared across the non-abelian groups.
    pub fn basis(self) -> Vec<CMatrix> {
        let z = re(0.0);
        let o = re(1.0);
        let i2 = Complex64::new(0.0, 0.5);
        match self {
            Group::So2 => vec![CMatrix::from_row_slice(2, 2, &[z, -o, o, z])],
            Group::So3 => vec![
                CMatrix::from_row_slice(3, 3, &[z, z, z, z, z, -o, z, o, z]),
                CMatrix::from_row_slice(3, 3, &[z, z, o, z, z, z, -o, z, z]),
                CMatrix::from_row_slice(3, 3, &[z, -o, z, o, z, z, z, z, z]),
            ],
            Group::Su2 => vec![
                CMatrix::from_row_slice(2, 2, &[z, -i2, -i2, z]),
                CMatrix::from_row_slice(2, 2, &[z, -re(0.5), re(0.5), z]),
                CMatrix::from_row_slice(2, 2, &[-i2, z, z, i2]),
            ],
        }
    }

    /// Structure constant `c^k_{ij}` with `[E_i, E_j] = Σ_k c^k_{ij} E_k`.
    pub fn structure_constant(self, k: usize, i: usize, j: usize) -> f64 {
        match self {
            Group::So2 => 0.0,
            Group::So3 | Group::Su2 => levi_civita(i, j, k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::So2 => "SO2",
            Group::So3 => "SO3",
            Group::Su2 => "SU2",
        }
    }

    /// Group selection by the names accepted in scenario files.
    pub fn from_name(name: &str) -> Option<Group> {
        match name {
            "SO2" => Some(Group::So2),
            "SO3" => Some(Group::So3),
            "SU2" => Some(Group::Su2),
            _ => None,
        }
    }

    /// Squared Frobenius norms of the basis matrices, used to project a
    /// matrix back onto basis coordinates.  The bases are mutually orthogonal
    /// under the (real part of the) Frobenius inner product, so projection is
    /// exact.
    fn basis_norms(self) -> Vec<f64> {
        match self {
            Group::So2 => vec![2.0],
            Group::So3 => vec![2.0, 2.0, 2.0],
            Group::Su2 => vec![0.5, 0.5, 0.5],
        }
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// An element of the group, stored as its defining matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub group: Group,
    pub matrix: CMatrix,
}

impl GroupElement {
    pub fn identity(group: Group) -> Self {
        let d = group.matrix_dim();
        GroupElement {
            group,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn product(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.group, other.group, "group product across different groups");
        GroupElement {
            group: self.group,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Group inverse.  The defining representations are orthogonal/unitary,
    /// so the inverse is the conjugate transpose (exact, no linear solve).
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            group: self.group,
            matrix: self.matrix.adjoint(),
        }
    }

    /// How far the matrix is from the group: `‖g†g − I‖ + |det g − 1|`.
    pub fn membership_residual(&self) -> f64 {
        let d = self.group.matrix_dim();
        let gram = self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d);
        let det = self.matrix.determinant();
        gram.norm() + (det - re(1.0)).norm()
    }
}

/// An element of the Lie algebra in basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraElement {
    pub group: Group,
    pub coords: DVector<f64>,
}

impl LieAlgebraElement {
    pub fn new(group: Group, coords: DVector<f64>) -> Self {
        assert_eq!(coords.len(), group.dim(), "algebra coordinate length");
        LieAlgebraElement { group, coords }
    }

    pub fn from_slice(group: Group, coords: &[f64]) -> Self {
        Self::new(group, DVector::from_row_slice(coords))
    }

    pub fn zero(group: Group) -> Self {
        LieAlgebraElement {
            group,
            coords: DVector::zeros(group.dim()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        LieAlgebraElement {
            group: self.group,
            coords: &self.coords * factor,
        }
    }

    /// The represented matrix `Σ x_i E_i`.
    pub fn matrix(&self) -> CMatrix {
        let d = self.group.matrix_dim();
        let mut m = CMatrix::zeros(d, d);
        for (i, e) in self.group.basis().iter().enumerate() {
            m += e * re(self.coords[i]);
        }
        m
    }

    /// Projects a matrix onto basis coordinates (exact for matrices in the
    /// algebra, orthogonal projection otherwise).
    pub fn from_matrix(group: Group, m: &CMatrix) -> Self {
        let norms = group.basis_norms();
        let coords = DVector::from_iterator(
            group.dim(),
            group
                .basis()
                .iter()
                .zip(norms)
                .map(|(e, n)| (e.adjoint() * m).trace().re / n),
        );
        LieAlgebraElement { group, coords }
    }

    /// Closed-form exponential:
    /// a plane rotation for SO(2), the Rodrigues formula for SO(3), and the
    /// half-angle Pauli form for SU(2).
    pub fn exp(&self) -> GroupElement {
        let theta = self.coords.norm();
        let d = self.group.matrix_dim();
        let id = CMatrix::identity(d, d);
        let xhat = self.matrix();
        let matrix = match self.group {
            Group::So2 => {
                let t = self.coords[0];
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[re(t.cos()), re(-t.sin()), re(t.sin()), re(t.cos())],
                )
            }
            Group::So3 => {
                // exp(X) = I + sinc(θ)·X + ((1−cos θ)/θ²)·X².
                let a = sinc(theta);
                let b = one_minus_cos_over_sq(theta);
                id + &xhat * re(a) + (&xhat * &xhat) * re(b)
            }
            Group::Su2 => {
                // X² = −(θ/2)² I, so exp(X) = cos(θ/2)·I + sinc(θ/2)·X.
                let half = theta / 2.0;
                id * re(half.cos()) + &xhat * re(sinc(half))
            }
        };
        GroupElement {
            group: self.group,
            matrix,
        }
    }

    /// Principal logarithm.  Fails with [`Error::AngleOutOfRange`] at and
    /// near the cut locus of the exponential (rotation angle π for SO(2) and
    /// SO(3); the antipode −I, i.e. coordinate norm 2π, for SU(2)), where the
    /// axis of rotation is no longer determined by the matrix.
    pub fn log(g: &GroupElement) -> Result<LieAlgebraElement> {
        let group = g.group;
        match group {
            Group::So2 => {
                let t = g.matrix[(1, 0)].re.atan2(g.matrix[(0, 0)].re);
                if std::f64::consts::PI - t.abs() < 1e-12 {
                    return Err(Error::AngleOutOfRange { angle: t.abs() });
                }
                Ok(LieAlgebraElement::from_slice(group, &[t]))
            }
            Group::So3 => {
                let c = ((g.matrix.trace().re - 1.0) / 2.0).clamp(-1.0, 1.0);
                let theta = c.acos();
                if theta > std::f64::consts::PI - 1e-5 {
                    return Err(Error::AngleOutOfRange { angle: theta });
                }
                // (g − gᵀ)/2 = sin θ · Σ n_i E_i for the unit axis n.
                let skew = (&g.matrix - g.matrix.transpose()) * re(0.5);
                let sin_part = LieAlgebraElement::from_matrix(group, &skew);
                let factor = inv_sinc(theta);
                Ok(LieAlgebraElement::new(group, sin_part.coords * factor))
            }
            Group::Su2 => {
                let c = (g.matrix.trace().re / 2.0).clamp(-1.0, 1.0);
                let half = c.acos();
                if half > std::f64::consts::PI - 5e-6 {
                    return Err(Error::AngleOutOfRange { angle: 2.0 * half });
                }
                // (g − g†)/2 = 2 sin(θ/2) · Σ n_i E_i, and ‖X‖ = 2·(θ/2),
                // so the scale factor is (θ/2)/sin(θ/2).
                let skew = (&g.matrix - g.matrix.adjoint()) * re(0.5);
                let sin_part = LieAlgebraElement::from_matrix(group, &skew);
                let factor = inv_sinc(half);
                Ok(LieAlgebraElement::new(group, sin_part.coords * factor))
            }
        }
    }

    /// Lie bracket through the structure constants.
    pub fn bracket(&self, other: &LieAlgebraElement) -> LieAlgebraElement {
        assert_eq!(self.group, other.group, "bracket across different groups");
        let n = self.group.dim();
        let mut coords = DVector::zeros(n);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let c = self.group.structure_constant(k, i, j);
                    if c != 0.0 {
                        s += c * self.coords[i] * other.coords[j];
                    }
                }
            }
            coords[k] = s;
        }
        LieAlgebraElement::new(self.group, coords)
    }
}

/// `Ad_g Y`: conjugation of the represented matrix, projected back onto
/// basis coordinates.
pub fn adjoint(g: &GroupElement, y: &LieAlgebraElement) -> LieAlgebraElement {
    assert_eq!(g.group, y.group, "adjoint across different groups");
    let m = &g.matrix * y.matrix() * g.inverse().matrix;
    LieAlgebraElement::from_matrix(g.group, &m)
}

/// Matrix of `Ad_g` in basis coordinates (column `i` is `Ad_g E_i`).
pub fn adjoint_matrix(g: &GroupElement) -> DMatrix<f64> {
    let n = g.group.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let col = adjoint(g, &LieAlgebraElement::new(g.group, e));
        m.set_column(i, &col.coords);
    }
    m
}

/// An element of the dual algebra in coordinates dual to the fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalgebraElement {
    pub group: Group,
    pub coords: DVector<f64>,
}

impl CoalgebraElement {
    pub fn new(group: Group, coords: DVector<f64>) -> Self {
        assert_eq!(coords.len(), group.dim(), "dual coordinate length");
        CoalgebraElement { group, coords }
    }

    pub fn from_slice(group: Group, coords: &[f64]) -> Self {
        Self::new(group, DVector::from_row_slice(coords))
    }

    pub fn zero(group: Group) -> Self {
        CoalgebraElement {
            group,
            coords: DVector::zeros(group.dim()),
        }
    }
}

/// The dual pairing `⟨ρ, X⟩`: a coordinate dot product by construction.
pub fn pairing(rho: &CoalgebraElement, x: &LieAlgebraElement) -> f64 {
    assert_eq!(rho.group, x.group, "pairing across different groups");
    rho.coords.dot(&x.coords)
}

/// The dual of `adjoint(g, ·)`: the unique map with
/// `⟨coadjoint(g, ρ), X⟩ = ⟨ρ, adjoint(g, X)⟩` for all `X`.
pub fn coadjoint(g: &GroupElement, rho: &CoalgebraElement) -> CoalgebraElement {
    assert_eq!(g.group, rho.group, "coadjoint across different groups");
    let m = adjoint_matrix(g);
    CoalgebraElement::new(rho.group, m.transpose() * &rho.coords)
}

/// An element of the tangent group: a group element together with a
/// right-trivialized velocity, multiplied as a semidirect product.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentGroupElement {
    pub g: GroupElement,
    pub x: LieAlgebraElement,
}

impl TangentGroupElement {
    pub fn new(g: GroupElement, x: LieAlgebraElement) -> Self {
        assert_eq!(g.group, x.group, "tangent group element across different groups");
        TangentGroupElement { g, x }
    }

    pub fn identity(group: Group) -> Self {
        TangentGroupElement {
            g: GroupElement::identity(group),
            x: LieAlgebraElement::zero(group),
        }
    }

    /// Semidirect product `(g, X)·(h, Y) = (gh, X + Ad_g Y)`.
    pub fn product(&self, other: &TangentGroupElement) -> TangentGroupElement {
        let g = self.g.product(&other.g);
        let x = LieAlgebraElement::new(
            self.x.group,
            &self.x.coords + adjoint(&self.g, &other.x).coords,
        );
        TangentGroupElement { g, x }
    }

    /// Inverse `(g, X)^{-1} = (g^{-1}, −Ad_{g^{-1}} X)`.
    pub fn inverse(&self) -> TangentGroupElement {
        let ginv = self.g.inverse();
        let x = adjoint(&ginv, &self.x);
        TangentGroupElement {
            g: ginv,
            x: LieAlgebraElement::new(x.group, -x.coords),
        }
    }
}

/// A scalar field on the dual algebra, optionally carrying an analytic
/// gradient.  Without one, gradients fall back to central differences with
/// step [`FD_STEP`].
#[derive(Clone)]
pub struct CoalgebraScalar {
    eval: Arc<dyn Fn(&CoalgebraElement) -> f64 + Send + Sync>,
    gradient: Option<Arc<dyn Fn(&CoalgebraElement) -> LieAlgebraElement + Send + Sync>>,
}

impl CoalgebraScalar {
    pub fn new(eval: impl Fn(&CoalgebraElement) -> f64 + Send + Sync + 'static) -> Self {
        CoalgebraScalar {
            eval: Arc::new(eval),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&CoalgebraElement) -> LieAlgebraElement + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Quadratic-plus-linear field `ρ ↦ ρᵀ Q ρ + c·ρ` with its analytic
    /// gradient `2Qρ + c` (Q is symmetrized internally).
    pub fn quadratic(group: Group, q: DMatrix<f64>, c: DVector<f64>) -> Self {
        let n = group.dim();
        assert_eq!((q.nrows(), q.ncols(), c.len()), (n, n, n));
        let qs = (&q + q.transpose()) * 0.5;
        let qe = qs.clone();
        let ce = c.clone();
        CoalgebraScalar::new(move |rho: &CoalgebraElement| {
            (rho.coords.transpose() * &qe * &rho.coords)[(0, 0)] + ce.dot(&rho.coords)
        })
        .with_gradient(move |rho: &CoalgebraElement| {
            LieAlgebraElement::new(rho.group, &qs * &rho.coords * 2.0 + &c)
        })
    }

    /// Coordinate projection `ρ ↦ ρ_i`.
    pub fn coordinate(group: Group, i: usize) -> Self {
        let n = group.dim();
        assert!(i < n);
        CoalgebraScalar::new(move |rho: &CoalgebraElement| rho.coords[i]).with_gradient(
            move |rho: &CoalgebraElement| {
                let mut e = DVector::zeros(rho.group.dim());
                e[i] = 1.0;
                LieAlgebraElement::new(rho.group, e)
            },
        )
    }

    /// The squared norm `ρ ↦ ‖ρ‖²`, a Casimir for SO(3)/SU(2).
    pub fn norm_squared() -> Self {
        CoalgebraScalar::new(|rho: &CoalgebraElement| rho.coords.norm_squared()).with_gradient(
            |rho: &CoalgebraElement| LieAlgebraElement::new(rho.group, &rho.coords * 2.0),
        )
    }

    pub fn value(&self, rho: &CoalgebraElement) -> f64 {
        (self.eval)(rho)
    }

    /// Gradient identified with an algebra element via the basis pairing.
    pub fn gradient(&self, rho: &CoalgebraElement) -> LieAlgebraElement {
        if let Some(g) = &self.gradient {
            return g(rho);
        }
        let n = rho.group.dim();
        let mut coords = DVector::zeros(n);
        for i in 0..n {
            let mut plus = rho.clone();
            let mut minus = rho.clone();
            plus.coords[i] += FD_STEP;
            minus.coords[i] -= FD_STEP;
            coords[i] = ((self.eval)(&plus) - (self.eval)(&minus)) / (2.0 * FD_STEP);
        }
        LieAlgebraElement::new(rho.group, coords)
    }
}

/// Lie–Poisson bracket `{f, h}(ρ) = ⟨ρ, [∇f(ρ), ∇h(ρ)]⟩` (plus convention).
pub fn lie_poisson_bracket(f: &CoalgebraScalar, h: &CoalgebraScalar, rho: &CoalgebraElement) -> f64 {
    let gf = f.gradient(rho);
    let gh = h.gradient(rho);
    pairing(rho, &gf.bracket(&gh))
}

/// sin(x)/x with a series guard near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// (1 − cos x)/x² with a series guard near zero.
fn one_minus_cos_over_sq(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 - x * x / 24.0 + x.powi(4) / 720.0
    } else {
        (1.0 - x.cos()) / (x * x)
    }
}

/// x/sin(x) with a series guard near zero.
fn inv_sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0 + 7.0 * x.powi(4) / 360.0
    } else {
        x / x.sin()
    }
}
