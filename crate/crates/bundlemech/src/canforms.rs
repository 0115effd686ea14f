//! The cotangent bundle of the trivialized bundle in chart coordinates:
//! canonical and generalized canonical one-forms, the correspondence between
//! automorphisms and such forms, the lifted group action with its momentum
//! map, dual actions and pullbacks, and numerically assembled symplectic
//! two-forms.
//!
//! A phase point carries `(x, g, pi, rho)`: a chart point, a fibre point, a
//! base covector, and a right-trivialized fibre covector.  A phase tangent
//! carries `(dx, xi, dpi, drho)` in the mixed frame that is the coordinate
//! frame on `x`, `pi`, `rho` and the right-invariant frame on the group
//! factor.  The only nonvanishing bracket among these frame fields pairs two
//! group directions:
//!
//! ```text
//! [(0, ξ₁, 0, 0), (0, ξ₂, 0, 0)] = (0, −[ξ₁, ξ₂], 0, 0)
//! ```
//!
//! Exterior derivatives are evaluated with frame-constant extensions plus
//! exactly this correction term, so only the directional derivatives are
//! approximate (central differences of step [`FD_STEP`]).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::autgroup::GaugeAutomorphism;
use crate::bundle::{BundlePoint, ConnectionForm, TangentVector};
use crate::error::{Error, Result};
use crate::liegroup::{
    coadjoint, pairing, CoalgebraElement, Group, GroupElement, LieAlgebraElement, FD_STEP,
};

/// A covector on the total space: base point, fibre point, and the two
/// momentum components in the right-trivialized pairing
/// `⟨z, (dx, ξ)⟩ = pi·dx + ⟨rho, ξ⟩`.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub g: GroupElement,
    pub pi: DVector<f64>,
    pub rho: CoalgebraElement,
}

impl PhasePoint {
    pub fn new(x: DVector<f64>, g: GroupElement, pi: DVector<f64>, rho: CoalgebraElement) -> Self {
        assert_eq!(x.len(), pi.len(), "pi must be a base covector");
        assert_eq!(g.group, rho.group, "rho must pair with the fibre group");
        PhasePoint { x, g, pi, rho }
    }

    pub fn group(&self) -> Group {
        self.g.group
    }

    pub fn base_dim(&self) -> usize {
        self.x.len()
    }

    /// The underlying bundle point (the footpoint of the covector).
    pub fn base_point(&self) -> BundlePoint {
        BundlePoint::new(self.x.clone(), self.g.clone())
    }

    /// The defining pairing with a velocity of the footpoint.
    pub fn pair(&self, dx: &DVector<f64>, xi: &LieAlgebraElement) -> f64 {
        self.pi.dot(dx) + pairing(&self.rho, xi)
    }

    /// Pairing with a tangent vector of the bundle at the same footpoint.
    pub fn pair_vector(&self, v: &TangentVector) -> f64 {
        self.pair(&v.dx, &v.xi)
    }
}

/// A tangent vector of phase space in the mixed coordinate/right-invariant
/// frame.
#[derive(Clone, Debug)]
pub struct PhaseTangent {
    pub dx: DVector<f64>,
    pub xi: LieAlgebraElement,
    pub dpi: DVector<f64>,
    pub drho: CoalgebraElement,
}

impl PhaseTangent {
    pub fn new(
        dx: DVector<f64>,
        xi: LieAlgebraElement,
        dpi: DVector<f64>,
        drho: CoalgebraElement,
    ) -> Self {
        assert_eq!(dx.len(), dpi.len(), "dpi must be a base covector");
        assert_eq!(xi.group, drho.group, "drho must pair with the fibre group");
        PhaseTangent { dx, xi, dpi, drho }
    }

    pub fn zero(base_dim: usize, group: Group) -> Self {
        PhaseTangent::new(
            DVector::zeros(base_dim),
            LieAlgebraElement::zero(group),
            DVector::zeros(base_dim),
            CoalgebraElement::new(group, DVector::zeros(group.dim())),
        )
    }

    /// Frame dimension `2n + 2·dim G` of phase space.
    pub fn frame_dim(base_dim: usize, group: Group) -> usize {
        2 * base_dim + 2 * group.dim()
    }

    /// The `index`-th frame vector, in the order
    /// `(dx₀.., ξ₀.., dpi₀.., drho₀..)`.
    pub fn frame(base_dim: usize, group: Group, index: usize) -> Self {
        let mut coords = DVector::zeros(Self::frame_dim(base_dim, group));
        coords[index] = 1.0;
        Self::from_coords(base_dim, group, &coords)
    }

    /// Flattens to frame coordinates `[dx; ξ; dpi; drho]`.
    pub fn to_coords(&self) -> DVector<f64> {
        let n = self.dx.len();
        let ng = self.xi.group.dim();
        let mut coords = DVector::zeros(2 * n + 2 * ng);
        coords.rows_mut(0, n).copy_from(&self.dx);
        coords.rows_mut(n, ng).copy_from(&self.xi.coords);
        coords.rows_mut(n + ng, n).copy_from(&self.dpi);
        coords.rows_mut(2 * n + ng, ng).copy_from(&self.drho.coords);
        coords
    }

    pub fn from_coords(base_dim: usize, group: Group, coords: &DVector<f64>) -> Self {
        let n = base_dim;
        let ng = group.dim();
        assert_eq!(coords.len(), 2 * n + 2 * ng, "frame coordinate length");
        PhaseTangent::new(
            coords.rows(0, n).into_owned(),
            LieAlgebraElement::new(group, coords.rows(n, ng).into_owned()),
            coords.rows(n + ng, n).into_owned(),
            CoalgebraElement::new(group, coords.rows(2 * n + ng, ng).into_owned()),
        )
    }

    /// The footpoint velocity `(dx, ξ)` as a tangent vector at `p`.
    pub fn footpoint_velocity(&self, p: &BundlePoint) -> TangentVector {
        TangentVector::new(p.clone(), self.dx.clone(), self.xi.clone())
    }
}

/// Moves a phase point along the frame-constant curve of a tangent:
/// `t ↦ (x + t·dx, exp(t·ξ)·g, pi + t·dpi, rho + t·drho)`.
pub fn phase_curve(z: &PhasePoint, zeta: &PhaseTangent, t: f64) -> PhasePoint {
    let step = LieAlgebraElement::new(zeta.xi.group, &zeta.xi.coords * t);
    PhasePoint::new(
        &z.x + t * &zeta.dx,
        step.exp().product(&z.g),
        &z.pi + t * &zeta.dpi,
        CoalgebraElement::new(z.rho.group, &z.rho.coords + t * &zeta.drho.coords),
    )
}

/// A one-form on phase space: a reentrant evaluator
/// `(point, tangent) ↦ value`, linear in the tangent.
#[derive(Clone)]
pub struct OneFormOnPhase {
    eval: Arc<dyn Fn(&PhasePoint, &PhaseTangent) -> f64 + Send + Sync>,
}

impl OneFormOnPhase {
    pub fn new(eval: impl Fn(&PhasePoint, &PhaseTangent) -> f64 + Send + Sync + 'static) -> Self {
        OneFormOnPhase { eval: Arc::new(eval) }
    }

    pub fn evaluate(&self, z: &PhasePoint, zeta: &PhaseTangent) -> f64 {
        (self.eval)(z, zeta)
    }

    /// The canonical one-form: pairs the covector with the footpoint
    /// velocity, `ζ ↦ pi·dx + ⟨rho, ξ⟩`.
    pub fn canonical() -> Self {
        OneFormOnPhase::new(|z: &PhasePoint, zeta: &PhaseTangent| z.pair(&zeta.dx, &zeta.xi))
    }

    /// The generalized canonical form of an admissible automorphism:
    /// `ζ ↦ ⟨z, A(footpoint)(dx, ξ)⟩`.
    pub fn of_automorphism(a: &GaugeAutomorphism) -> Self {
        let a = a.clone();
        OneFormOnPhase::new(move |z: &PhasePoint, zeta: &PhaseTangent| {
            let moved = a.apply(&zeta.footpoint_velocity(&z.base_point()));
            z.pair_vector(&moved)
        })
    }

    /// The differential of a scalar function, by central differences along
    /// frame-constant curves.  The step is one decade coarser than the
    /// crate-wide first-derivative step because differentials built here are
    /// routinely differentiated again (d∘d diagnostics); nesting two
    /// same-sized steps would amplify roundoff past the second-derivative
    /// tolerance.
    pub fn exact(f: impl Fn(&PhasePoint) -> f64 + Send + Sync + 'static) -> Self {
        OneFormOnPhase::new(move |z: &PhasePoint, zeta: &PhaseTangent| {
            let h = 1e-4;
            (f(&phase_curve(z, zeta, h)) - f(&phase_curve(z, zeta, -h))) / (2.0 * h)
        })
    }
}

/// Represents a connection as a generalized canonical form relative to a
/// reference connection on the same chart: the form of the unique vertical
/// shift whose connection term reproduces `alpha_prime` in the
/// trivialization.  Distinct connections give distinct forms.
pub fn embed_connection(alpha: &ConnectionForm, alpha_prime: &ConnectionForm) -> OneFormOnPhase {
    assert!(alpha.same_chart(alpha_prime), "connections on different charts");
    let witness = crate::autgroup::transitive_witness(alpha_prime, alpha);
    OneFormOnPhase::of_automorphism(&witness.with_reference(alpha.clone()))
}

/// The lift of the structure-group action to phase space.  In the
/// right-trivialized components only the fibre point moves:
/// `(x, g, pi, rho) ↦ (x, g·h, pi, rho)`.
pub fn lifted_g_action(h: &GroupElement, z: &PhasePoint) -> PhasePoint {
    PhasePoint::new(z.x.clone(), z.g.product(h), z.pi.clone(), z.rho.clone())
}

/// The dual of an admissible automorphism on covectors: fixes the footpoint
/// and transforms momenta so that `⟨dual_action(A, z), v⟩ = ⟨z, A v⟩`.
pub fn dual_action(a: &GaugeAutomorphism, z: &PhasePoint) -> PhasePoint {
    let at = a.base_part().field.eval(&z.x).transpose();
    let aref_t = a.reference.potential.eval(&z.x).transpose();
    let bt = a.shift_part().field.field.eval(&z.x).transpose();
    let a_rho = &aref_t * &z.rho.coords;
    let new_pi = &at * (&z.pi - &a_rho + &bt * &z.rho.coords) + a_rho;
    PhasePoint::new(z.x.clone(), z.g.clone(), new_pi, z.rho.clone())
}

/// The momentum map of the lifted action: pairs the covector with the
/// fundamental fields of the structure group, `X ↦ ⟨rho, Ad_g X⟩`.
pub fn momentum_map(z: &PhasePoint) -> CoalgebraElement {
    coadjoint(&z.g, &z.rho)
}

/// The momentum map pre-composed with a dual automorphism action.  For every
/// admissible automorphism this equals [`momentum_map`] identically, because
/// dual actions fix `rho` and the footpoint.
pub fn momentum_map_dual(a: &GaugeAutomorphism, z: &PhasePoint) -> CoalgebraElement {
    momentum_map(&dual_action(a, z))
}

/// The velocity of the lifted flow `t ↦ lifted_g_action(exp(tX), z)`:
/// `(0, Ad_g X, 0, 0)` in the mixed frame.
pub fn fundamental_vector_field(x: &LieAlgebraElement, z: &PhasePoint) -> PhaseTangent {
    let n = z.base_dim();
    PhaseTangent::new(
        DVector::zeros(n),
        crate::liegroup::adjoint(&z.g, x),
        DVector::zeros(n),
        CoalgebraElement::new(z.rho.group, DVector::zeros(z.rho.group.dim())),
    )
}

/// Pullback of a one-form by the dual action:
/// `⟨(L*_A γ)_z, ζ⟩ = ⟨γ_{A*(z)}, T A*(z) ζ⟩`, with the tangent map of the
/// dual action computed by central differences along the frame-constant
/// curve of `ζ`.
pub fn pullback_form(a: &GaugeAutomorphism, gamma: &OneFormOnPhase) -> OneFormOnPhase {
    let a = a.clone();
    let gamma = gamma.clone();
    OneFormOnPhase::new(move |z: &PhasePoint, zeta: &PhaseTangent| {
        let h = FD_STEP;
        let plus = dual_action(&a, &phase_curve(z, zeta, h));
        let minus = dual_action(&a, &phase_curve(z, zeta, -h));
        let at = dual_action(&a, z);
        // The footpoint curve is untouched by the dual action, so the (dx, ξ)
        // components of the pushed tangent are exact; the momentum components
        // come from the differences.
        let moved = PhaseTangent::new(
            zeta.dx.clone(),
            zeta.xi.clone(),
            (&plus.pi - &minus.pi) / (2.0 * h),
            CoalgebraElement::new(
                z.rho.group,
                (&plus.rho.coords - &minus.rho.coords) / (2.0 * h),
            ),
        );
        gamma.evaluate(&at, &moved)
    })
}

fn frame_bracket(zeta1: &PhaseTangent, zeta2: &PhaseTangent) -> PhaseTangent {
    let group = zeta1.xi.group;
    let n = zeta1.dx.len();
    let minus_bracket = zeta1.xi.bracket(&zeta2.xi);
    PhaseTangent::new(
        DVector::zeros(n),
        LieAlgebraElement::new(group, -minus_bracket.coords),
        DVector::zeros(n),
        CoalgebraElement::new(group, DVector::zeros(group.dim())),
    )
}

/// Exterior derivative of a one-form on a pair of tangents at a point, via
/// frame-constant extensions:
/// `dγ(ζ₁, ζ₂) = D_{ζ₁}[γ(Z₂)] − D_{ζ₂}[γ(Z₁)] − γ([Z₁, Z₂])`,
/// with the right-invariant frame-bracket correction and central differences
/// of step `h`.
pub fn exterior_derivative_with_step(
    gamma: &OneFormOnPhase,
    z: &PhasePoint,
    zeta1: &PhaseTangent,
    zeta2: &PhaseTangent,
    h: f64,
) -> f64 {
    let d1 = (gamma.evaluate(&phase_curve(z, zeta1, h), zeta2)
        - gamma.evaluate(&phase_curve(z, zeta1, -h), zeta2))
        / (2.0 * h);
    let d2 = (gamma.evaluate(&phase_curve(z, zeta2, h), zeta1)
        - gamma.evaluate(&phase_curve(z, zeta2, -h), zeta1))
        / (2.0 * h);
    d1 - d2 - gamma.evaluate(z, &frame_bracket(zeta1, zeta2))
}

/// [`exterior_derivative_with_step`] at the crate-wide first-derivative step.
pub fn exterior_derivative(
    gamma: &OneFormOnPhase,
    z: &PhasePoint,
    zeta1: &PhaseTangent,
    zeta2: &PhaseTangent,
) -> f64 {
    exterior_derivative_with_step(gamma, z, zeta1, zeta2, FD_STEP)
}

/// A two-form assembled on the phase frame at a point: `matrix[i][j]` is the
/// value on the `i`-th and `j`-th frame vectors.
#[derive(Clone, Debug)]
pub struct TwoFormMatrix {
    pub matrix: DMatrix<f64>,
    pub base_dim: usize,
    pub group: Group,
}

impl TwoFormMatrix {
    pub fn apply(&self, zeta1: &PhaseTangent, zeta2: &PhaseTangent) -> f64 {
        (self.matrix.transpose() * zeta1.to_coords()).dot(&zeta2.to_coords())
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.matrix + self.matrix.transpose()).abs().max()
    }

    /// Solves `ω(·, ζ) = c` for the tangent `ζ` whose pairing into the
    /// form's second slot reproduces the covector `c` on the frame, i.e.
    /// `matrix·ζ = c`.  This is the orientation under which the canonical
    /// abelian case yields the classical equations
    /// `ẋ = ∂H/∂π, π̇ = −∂H/∂x` for `ζ = solve(∇H)`.
    pub fn solve(&self, frame_covector: &DVector<f64>) -> Result<PhaseTangent> {
        let lu = self.matrix.clone().lu();
        match lu.solve(frame_covector) {
            Some(coords) => {
                let residual = (&self.matrix * &coords - frame_covector).norm();
                if residual > 1e-10 * frame_covector.norm().max(1.0) {
                    return Err(Error::DegenerateForm {
                        det: self.determinant(),
                    });
                }
                Ok(PhaseTangent::from_coords(self.base_dim, self.group, &coords))
            }
            None => Err(Error::DegenerateForm {
                det: self.determinant(),
            }),
        }
    }
}

/// Assembles the two-form `dΘ(A)` on the full phase frame at `z`.  The upper
/// triangle is computed by [`exterior_derivative`] and mirrored, so the
/// result is antisymmetric by construction; degeneracy is an error.
pub fn omega_matrix(a: &GaugeAutomorphism, z: &PhasePoint) -> Result<TwoFormMatrix> {
    let gamma = OneFormOnPhase::of_automorphism(a);
    two_form_matrix(&gamma, z)
}

/// Assembles `dγ` on the phase frame for any one-form, with the same
/// antisymmetric mirroring and degeneracy check as [`omega_matrix`].
pub fn two_form_matrix(gamma: &OneFormOnPhase, z: &PhasePoint) -> Result<TwoFormMatrix> {
    let n = z.base_dim();
    let group = z.group();
    let dim = PhaseTangent::frame_dim(n, group);
    let frames: Vec<PhaseTangent> = (0..dim)
        .map(|i| PhaseTangent::frame(n, group, i))
        .collect();
    let mut matrix = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let value = exterior_derivative(gamma, z, &frames[i], &frames[j]);
            matrix[(i, j)] = value;
            matrix[(j, i)] = -value;
        }
    }
    let form = TwoFormMatrix {
        matrix,
        base_dim: n,
        group,
    };
    let det = form.determinant();
    if det.abs() <= 1e-10 {
        return Err(Error::DegenerateForm { det });
    }
    Ok(form)
}

/// Max residual of `dω = 0` over random frame triples, with `ω = dγ`
/// evaluated by the nested finite-difference scheme.  `dω` on frame-constant
/// extensions is
/// `Σ cyclic D_i[ω(E_j, E_k)] − Σ ω([E_i, E_j], E_k)` with the alternating
/// signs of the standard three-argument formula; the outer differentiation
/// uses a coarser step to stay clear of the inner scheme's noise floor.
pub fn closedness_residual(
    gamma: &OneFormOnPhase,
    z: &PhasePoint,
    triples: usize,
    seed: u64,
) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = z.base_dim();
    let group = z.group();
    let dim = PhaseTangent::frame_dim(n, group);
    let outer = 1e-3;
    let inner = FD_STEP;
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let mut idx = [0usize; 3];
        loop {
            for slot in idx.iter_mut() {
                *slot = rng.gen_range(0..dim);
            }
            if idx[0] != idx[1] && idx[0] != idx[2] && idx[1] != idx[2] {
                break;
            }
        }
        let e: Vec<PhaseTangent> = idx
            .iter()
            .map(|&i| PhaseTangent::frame(n, group, i))
            .collect();
        let omega = |zp: &PhasePoint, a: &PhaseTangent, b: &PhaseTangent| {
            exterior_derivative_with_step(gamma, zp, a, b, inner)
        };
        let deriv = |along: &PhaseTangent, a: &PhaseTangent, b: &PhaseTangent| {
            (omega(&phase_curve(z, along, outer), a, b)
                - omega(&phase_curve(z, along, -outer), a, b))
                / (2.0 * outer)
        };
        let mut total = deriv(&e[0], &e[1], &e[2]) - deriv(&e[1], &e[0], &e[2])
            + deriv(&e[2], &e[0], &e[1]);
        total -= omega(z, &frame_bracket(&e[0], &e[1]), &e[2]);
        total += omega(z, &frame_bracket(&e[0], &e[2]), &e[1]);
        total -= omega(z, &frame_bracket(&e[1], &e[2]), &e[0]);
        worst = worst.max(total.abs());
    }
    worst
}

/// Recovers the fibre map of the automorphism behind a generalized canonical
/// form, as its matrix on the footpoint tangent basis at `p`: the form is
/// probed at unit momentum covectors against unit tangent directions.  The
/// fibre-wise linearity this relies on is itself verified by sampling first.
pub fn theta_reconstruct(
    gamma: &OneFormOnPhase,
    p: &BundlePoint,
    samples: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let n = p.x.len();
    let group = p.g.group;
    let ng = group.dim();

    let residual = fibre_linearity_residual(gamma, p, samples, seed);
    if residual > 1e-8 {
        return Err(Error::NotFibrewiseLinear { residual });
    }

    let zero_pi = DVector::zeros(n);
    let zero_rho = CoalgebraElement::new(group, DVector::zeros(ng));
    let mut matrix = DMatrix::zeros(n + ng, n + ng);
    for col in 0..(n + ng) {
        let mut tangent = PhaseTangent::zero(n, group);
        if col < n {
            tangent.dx[col] = 1.0;
        } else {
            tangent.xi.coords[col - n] = 1.0;
        }
        for row in 0..(n + ng) {
            let z = if row < n {
                let mut pi = zero_pi.clone();
                pi[row] = 1.0;
                PhasePoint::new(p.x.clone(), p.g.clone(), pi, zero_rho.clone())
            } else {
                let mut rho = zero_rho.clone();
                rho.coords[row - n] = 1.0;
                PhasePoint::new(p.x.clone(), p.g.clone(), zero_pi.clone(), rho)
            };
            matrix[(row, col)] = gamma.evaluate(&z, &tangent);
        }
    }
    Ok(matrix)
}

/// Max violation of linearity of `γ_z(ζ)` in the momentum components
/// `(pi, rho)` at fixed footpoint, over seeded samples.
pub fn fibre_linearity_residual(
    gamma: &OneFormOnPhase,
    p: &BundlePoint,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut sampler = crate::sampling::Sampler::new(seed);
    let group = p.g.group;
    let n = p.x.len();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let pi1 = sampler.vector(n, 1.0);
        let pi2 = sampler.vector(n, 1.0);
        let rho1 = sampler.coalgebra(group, 1.0);
        let rho2 = sampler.coalgebra(group, 1.0);
        let c1 = sampler.uniform(-2.0, 2.0);
        let c2 = sampler.uniform(-2.0, 2.0);
        let zeta = sampler.phase_tangent(n, group);
        let z1 = PhasePoint::new(p.x.clone(), p.g.clone(), pi1.clone(), rho1.clone());
        let z2 = PhasePoint::new(p.x.clone(), p.g.clone(), pi2.clone(), rho2.clone());
        let mix = PhasePoint::new(
            p.x.clone(),
            p.g.clone(),
            c1 * &pi1 + c2 * &pi2,
            CoalgebraElement::new(group, c1 * &rho1.coords + c2 * &rho2.coords),
        );
        let lhs = gamma.evaluate(&mix, &zeta);
        let rhs = c1 * gamma.evaluate(&z1, &zeta) + c2 * gamma.evaluate(&z2, &zeta);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Sampled report on the defining properties of a generalized canonical
/// form: nonvanishing away from the zero covector, annihilation of momentum
/// directions, and fibre-wise linearity.
#[derive(Clone, Debug)]
pub struct CanonicalFormReport {
    /// Smallest over sampled points (with nonzero momenta) of the largest
    /// absolute value over frame directions: positive iff the form is
    /// nonvanishing on the sample.
    pub nonvanishing_gap: f64,
    /// Max absolute value on pure momentum directions `(0, 0, dpi, drho)`.
    pub fibre_direction_residual: f64,
    /// Max violation of linearity in the momentum components.
    pub linearity_residual: f64,
}

/// Samples the three defining properties of generalized canonical forms on
/// a chart.
pub fn canonical_form_report(
    gamma: &OneFormOnPhase,
    chart: &crate::bundle::BaseChart,
    group: Group,
    samples: usize,
    seed: u64,
) -> CanonicalFormReport {
    let mut sampler = crate::sampling::Sampler::new(seed);
    let n = chart.dim();
    let dim = PhaseTangent::frame_dim(n, group);
    let mut gap = f64::INFINITY;
    let mut fibre: f64 = 0.0;
    let mut linearity: f64 = 0.0;
    for k in 0..samples {
        let z = sampler.phase_point(chart, group);

        let mut peak: f64 = 0.0;
        for i in 0..dim {
            peak = peak.max(gamma.evaluate(&z, &PhaseTangent::frame(n, group, i)).abs());
        }
        gap = gap.min(peak);

        let mut momentum_dir = PhaseTangent::zero(n, group);
        momentum_dir.dpi = sampler.vector(n, 1.0);
        momentum_dir.drho = sampler.coalgebra(group, 1.0);
        fibre = fibre.max(gamma.evaluate(&z, &momentum_dir).abs());

        let p = z.base_point();
        linearity = linearity.max(fibre_linearity_residual(
            gamma,
            &p,
            2,
            seed ^ (k as u64 + 1),
        ));
    }
    CanonicalFormReport {
        nonvanishing_gap: gap,
        fibre_direction_residual: fibre,
        linearity_residual: linearity,
    }
}

/// Max residual, over seeded samples, of invariance of a one-form under the
/// lifted group action.  The lifted action has identity tangent map in the
/// mixed frame, so the pullback is evaluation at the translated point with
/// the same frame components.
pub fn g_invariance_residual(
    gamma: &OneFormOnPhase,
    chart: &crate::bundle::BaseChart,
    group: Group,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut sampler = crate::sampling::Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = sampler.phase_point(chart, group);
        let zeta = sampler.phase_tangent(chart.dim(), group);
        let h = sampler.group_element(group);
        let moved = lifted_g_action(&h, &z);
        worst = worst.max((gamma.evaluate(&moved, &zeta) - gamma.evaluate(&z, &zeta)).abs());
    }
    worst
}

/// Residual of the defining identity of the momentum map at one sample:
/// `ω_A(ξ^X(z), ζ) + D_ζ ⟨J(·), X⟩` should vanish for every algebra element
/// `X` and tangent `ζ`.
pub fn momentum_identity_residual(
    a: &GaugeAutomorphism,
    z: &PhasePoint,
    x: &LieAlgebraElement,
    zeta: &PhaseTangent,
) -> f64 {
    let gamma = OneFormOnPhase::of_automorphism(a);
    let omega = exterior_derivative(&gamma, z, &fundamental_vector_field(x, z), zeta);
    let h = FD_STEP;
    let j = |zp: &PhasePoint| pairing(&momentum_map(zp), x);
    let dj = (j(&phase_curve(z, zeta, h)) - j(&phase_curve(z, zeta, -h))) / (2.0 * h);
    (omega + dj).abs()
}
