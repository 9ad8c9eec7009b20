//! `ψ(A)`, the subordinated semigroups `g_t(A)`, `ψ′(A)` and the
//! divided-difference operator `φ(A₁, A₂)`.

use num_complex::Complex64;

use crate::bernstein::{BernsteinFunction, Embedding};
use crate::error::{Error, Result};
use crate::operators::{expm, identity, operator_norm, zeros, GeneratorTuple, MatrixOp};
use crate::quadrature::{self, Integral, LevyIntegrand, QuadratureSpec, Tail};

/// Quadrature accounting attached to a [`CalculusResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureDiag {
    /// Certified tail truncation bound plus the origin-model remainder.
    pub truncation_error: f64,
    /// `‖I_n − I_{2n}‖` when the node-doubling check was run.
    pub panel_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusResult {
    pub value: MatrixOp,
    pub quadrature_diag: QuadratureDiag,
    /// `‖ψ(A) − oracle‖ / (1 + ‖oracle‖)` when joint diagonal data exist.
    pub oracle_residual: Option<f64>,
    /// Set for uncertified input or a quadrature error above the target tolerance.
    pub flagged: bool,
}

/// `u ↦ T_A(u) − I`.
struct SemigroupMinusIdentity<'a> {
    tuple: &'a GeneratorTuple,
}

impl LevyIntegrand for SemigroupMinusIdentity<'_> {
    type Value = MatrixOp;

    fn zero(&self) -> MatrixOp {
        MatrixOp::zeros(self.tuple.dim(), self.tuple.dim())
    }

    fn eval(&self, u: &[f64]) -> Result<MatrixOp> {
        self.tuple.semigroup_minus_identity_at(u)
    }

    fn origin_slope(&self, dir: &[f64]) -> Option<MatrixOp> {
        Some(self.tuple.generator_along(dir))
    }

    fn tail(&self, dir: &[f64]) -> Tail<MatrixOp> {
        let (scale, rate) = self.tuple.decay_envelope(dir);
        if rate > 0.0 {
            Tail { limit: Some(-identity(self.tuple.dim())), scale, power: 0, rate }
        } else {
            Tail { limit: None, scale: scale + 1.0, power: 0, rate: 0.0 }
        }
    }
}

/// `v ↦ T_A(v·dir)`, the integrand of `g_t(A)`.
struct SemigroupAlong<'a> {
    tuple: &'a GeneratorTuple,
    dir: Vec<f64>,
}

impl LevyIntegrand for SemigroupAlong<'_> {
    type Value = MatrixOp;

    fn zero(&self) -> MatrixOp {
        MatrixOp::zeros(self.tuple.dim(), self.tuple.dim())
    }

    fn eval(&self, v: &[f64]) -> Result<MatrixOp> {
        let u: Vec<f64> = self.dir.iter().map(|d| d * v[0]).collect();
        self.tuple.semigroup_at(&u)
    }

    fn origin_value(&self) -> Option<MatrixOp> {
        Some(identity(self.tuple.dim()))
    }

    fn origin_slope(&self, _dir: &[f64]) -> Option<MatrixOp> {
        Some(self.tuple.generator_along(&self.dir))
    }

    fn tail(&self, _dir: &[f64]) -> Tail<MatrixOp> {
        let (scale, rate) = self.tuple.decay_envelope(&self.dir);
        Tail { limit: None, scale, power: 0, rate }
    }
}

/// `v ↦ v·T_A(v)`.
struct WeightedSemigroup<'a> {
    tuple: &'a GeneratorTuple,
}

impl LevyIntegrand for WeightedSemigroup<'_> {
    type Value = MatrixOp;

    fn zero(&self) -> MatrixOp {
        MatrixOp::zeros(self.tuple.dim(), self.tuple.dim())
    }

    fn eval(&self, u: &[f64]) -> Result<MatrixOp> {
        Ok(self.tuple.semigroup_at(u)? * Complex64::new(u[0], 0.0))
    }

    fn origin_slope(&self, _dir: &[f64]) -> Option<MatrixOp> {
        Some(identity(self.tuple.dim()))
    }

    fn tail(&self, dir: &[f64]) -> Tail<MatrixOp> {
        let (scale, rate) = self.tuple.decay_envelope(dir);
        Tail { limit: None, scale, power: 1, rate }
    }
}

/// `v ↦ v∫₀¹ T₁(vτ)·X·T₂(v(1−τ)) dτ`, read off the upper-right block of
/// `exp(v·[[A₁, X], [0, A₂]])`.
struct ProductKernel {
    block: MatrixOp,
    middle: MatrixOp,
    d: usize,
    envelope: (f64, f64),
}

impl ProductKernel {
    fn new(a1: &MatrixOp, a2: &MatrixOp, middle: &MatrixOp, envelope: (f64, f64)) -> Self {
        let d = a1.nrows();
        let mut block = MatrixOp::zeros(2 * d, 2 * d);
        block.view_mut((0, 0), (d, d)).copy_from(a1);
        block.view_mut((d, d), (d, d)).copy_from(a2);
        block.view_mut((0, d), (d, d)).copy_from(middle);
        Self { block, middle: middle.clone(), d, envelope }
    }
}

impl LevyIntegrand for ProductKernel {
    type Value = MatrixOp;

    fn zero(&self) -> MatrixOp {
        MatrixOp::zeros(self.d, self.d)
    }

    fn eval(&self, u: &[f64]) -> Result<MatrixOp> {
        let e = expm(&self.block, u[0])?;
        Ok(e.view((0, self.d), (self.d, self.d)).into_owned())
    }

    fn origin_slope(&self, _dir: &[f64]) -> Option<MatrixOp> {
        Some(self.middle.clone())
    }

    fn tail(&self, _dir: &[f64]) -> Tail<MatrixOp> {
        Tail { limit: None, scale: self.envelope.0, power: 1, rate: self.envelope.1 }
    }
}

fn check_arity(psi: &BernsteinFunction, a: &GeneratorTuple) -> Result<()> {
    if psi.arity() != a.n() {
        return Err(Error::Dimension(format!("{} has {} variables, tuple has {}", psi.name(), psi.arity(), a.n())));
    }
    Ok(())
}

fn relative_gap(value: &MatrixOp, reference: &MatrixOp) -> f64 {
    operator_norm(&(value - reference)) / (1.0 + operator_norm(reference))
}

fn diag_of<V>(integral: &Integral<V>, panel_delta: Option<f64>) -> QuadratureDiag {
    QuadratureDiag { truncation_error: integral.error_estimate(), panel_delta }
}

fn is_flagged(a: &GeneratorTuple, diag: &QuadratureDiag, spec: &QuadratureSpec) -> bool {
    !a.certified()
        || diag.truncation_error > spec.target_tol
        || diag.panel_delta.is_some_and(|d| d > spec.target_tol)
}

fn levy_part(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<Integral<MatrixOp>> {
    if a.mats().iter().all(|x| x.iter().all(|z| *z == Complex64::new(0.0, 0.0))) {
        let value = zeros(a.dim());
        return Ok(Integral { value, truncation_error: 0.0, origin_remainder: 0.0, truncation_point: 0.0, evaluations: 0 });
    }
    let triple = psi.triple();
    let m = a.bound_m();
    let l = m.powi(a.n() as i32) * a.mats().iter().map(operator_norm).sum::<f64>();
    quadrature::integrate_levy(&SemigroupMinusIdentity { tuple: a }, &triple.mu, spec, l)
}

fn affine_part(psi: &BernsteinFunction, a: &GeneratorTuple) -> MatrixOp {
    let triple = psi.triple();
    let mut out = identity(a.dim()) * Complex64::new(triple.c0, 0.0);
    for (c1, aj) in triple.c1.iter().zip(a.mats()) {
        if *c1 != 0.0 {
            out += aj * Complex64::new(*c1, 0.0);
        }
    }
    out
}

/// `ψ(A) = c₀I + Σ c₁ʲA_j + ∫(T_A(u) − I)dμ(u)`.
pub fn apply(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<CalculusResult> {
    apply_inner(psi, a, spec, false)
}

/// [`apply`] plus the node-doubling convergence check.
pub fn apply_checked(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<CalculusResult> {
    apply_inner(psi, a, spec, true)
}

fn apply_inner(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec, check: bool) -> Result<CalculusResult> {
    check_arity(psi, a)?;
    let integral = levy_part(psi, a, spec)?;
    let mut value = affine_part(psi, a);
    value += &integral.value;
    let panel_delta = if check {
        let fine = levy_part(psi, a, &spec.clone().with_nodes(2 * spec.nodes_per_panel))?;
        Some(crate::operators::entrywise_sup(&(&fine.value - &integral.value)))
    } else {
        None
    };
    let quadrature_diag = diag_of(&integral, panel_delta);
    let oracle_residual = match a.construction() {
        Some(_) => Some(relative_gap(&value, &spectral_oracle(psi, a)?)),
        None => None,
    };
    Ok(CalculusResult { flagged: is_flagged(a, &quadrature_diag, spec), value, quadrature_diag, oracle_residual })
}

/// `S·diag(ψ(λ_k))·S⁻¹` from the tuple's joint diagonal data.
pub fn spectral_oracle(psi: &BernsteinFunction, a: &GeneratorTuple) -> Result<MatrixOp> {
    check_arity(psi, a)?;
    a.spectral_apply(|z| psi.evaluate_complex(z))
}

/// `g_t(A) = ∫ T_A(u) dν_t(u)`.
pub fn subordinated(psi: &BernsteinFunction, a: &GeneratorTuple, t: f64, spec: &QuadratureSpec) -> Result<MatrixOp> {
    check_arity(psi, a)?;
    let sub = psi
        .subordinator()
        .ok_or_else(|| Error::Hypothesis(format!("{} has no closed-form subordination law", psi.name())))?;
    if t == 0.0 {
        return Ok(identity(a.dim()));
    }
    let dir = match sub.embedding {
        Embedding::Axis(j) => {
            let mut d = vec![0.0; a.n()];
            d[j] = 1.0;
            d
        }
        Embedding::Diagonal => vec![1.0; a.n()],
    };
    let f = SemigroupAlong { tuple: a, dir };
    Ok(quadrature::integrate_subordination(&f, sub.law, t * sub.time_scale, spec)?.value)
}

/// `ψ′(A) = c₁I + ∫ T_A(v)·v dμ(v)` for one generator.
pub fn frechet_derivative(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<CalculusResult> {
    psi.require_univariate()?;
    check_arity(psi, a)?;
    psi.derivative_at_zero_finite()?;
    let triple = psi.triple();
    let integral = quadrature::integrate_levy(&WeightedSemigroup { tuple: a }, &triple.mu, spec, a.bound_m())?;
    let mut value = identity(a.dim()) * Complex64::new(triple.c1[0], 0.0);
    value += &integral.value;
    let quadrature_diag = diag_of(&integral, None);
    let oracle_residual = match a.construction() {
        Some(_) => Some(relative_gap(&value, &a.spectral_apply(|z| psi.partial_complex(0, z))?)),
        None => None,
    };
    Ok(CalculusResult { flagged: is_flagged(a, &quadrature_diag, spec), value, quadrature_diag, oracle_residual })
}

/// `φ(A₁, A₂) = ∫∫(T₁(u₁)T₂(u₂) − I)dμ₁(u₁, u₂)`; commutation is not required.
pub fn divided_difference_operator(
    psi: &BernsteinFunction,
    a1: &GeneratorTuple,
    a2: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<MatrixOp> {
    divided_difference_sandwich(psi, a1, a2, &identity(a1.dim()), spec)
}

/// The transformator `X ↦ ∫∫(T₁(u₁)·X·T₂(u₂) − X)dμ₁(u₁, u₂)`.
///
/// Equals `φ(A₁, A₂)·X` when `A₂` commutes with `X`; with `X = A₁ − A₂`
/// it reproduces `ψ(A₁) − ψ(A₂) − ψ′(−0)(A₁ − A₂)` for any pair.
pub fn divided_difference_sandwich(
    psi: &BernsteinFunction,
    a1: &GeneratorTuple,
    a2: &GeneratorTuple,
    x: &MatrixOp,
    spec: &QuadratureSpec,
) -> Result<MatrixOp> {
    psi.require_univariate()?;
    check_arity(psi, a1)?;
    check_arity(psi, a2)?;
    if a1.dim() != a2.dim() || x.nrows() != a1.dim() || x.ncols() != a1.dim() {
        return Err(Error::Dimension("generators and middle factor of different size".into()));
    }
    let d0 = psi.derivative_at_zero_finite()?;
    let triple = psi.triple();
    let (s1, r1) = a1.decay_envelope(&[1.0]);
    let (s2, r2) = a2.decay_envelope(&[1.0]);
    let x_norm = operator_norm(x);
    let norm_sum = operator_norm(&a1.mats()[0]) + operator_norm(&a2.mats()[0]);
    let kernel = ProductKernel::new(&a1.mats()[0], &a2.mats()[0], x, (s1 * s2 * x_norm, r1.min(r2)));
    let l = s1 * s2 * x_norm * norm_sum.max(1.0);
    let integral = quadrature::integrate_levy(&kernel, &triple.mu, spec, l)?;
    let first_moment = Complex64::new(d0 - triple.c1[0], 0.0);
    Ok(integral.value - x * first_moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{diag_real, entrywise_sup, from_real_rows};

    fn psi(name: &str) -> BernsteinFunction {
        BernsteinFunction::from_name(name).unwrap()
    }

    fn m() -> QuadratureSpec {
        QuadratureSpec::matrix()
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = GeneratorTuple::diagonal_real(&[&[-1.0, -4.0]]).unwrap();
        let r = apply(&psi("sqrt"), &a, &m()).unwrap();
        assert!(entrywise_sup(&(r.value - diag_real(&[-1.0, -2.0]))) < 1e-8);
        assert!(r.oracle_residual.unwrap() < 1e-8);
        assert!(!r.flagged);
    }

    #[test]
    fn rat_of_jordan_block() {
        let a = GeneratorTuple::uncertified(vec![from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]])], 2.0).unwrap();
        let r = apply(&psi("rat"), &a, &m()).unwrap();
        let expect = from_real_rows(&[&[-0.5, 0.25], &[0.0, -0.5]]);
        assert!(entrywise_sup(&(r.value - expect)) < 1e-8);
        assert!(r.flagged);
        assert!(r.oracle_residual.is_none());
    }

    #[test]
    fn diagonal_composite_of_pair() {
        let a = GeneratorTuple::diagonal_real(&[&[-1.0, -2.0], &[-3.0, -1.0]]).unwrap();
        let r = apply(&psi("diag:2:sqrt"), &a, &m()).unwrap();
        assert!(entrywise_sup(&(r.value - diag_real(&[-2.0, -(3f64).sqrt()]))) < 1e-8);
    }

    #[test]
    fn subordination_examples() {
        let a = GeneratorTuple::diagonal_real(&[&[-1.0]]).unwrap();
        let g = subordinated(&psi("sqrt"), &a, 2.0, &m()).unwrap();
        assert!((g[(0, 0)].re - (-2f64).exp()).abs() < 1e-9);
        assert_eq!(subordinated(&psi("sqrt"), &a, 0.0, &m()).unwrap(), identity(1));
        assert!(subordinated(&psi("log"), &a, 1.0, &m()).is_err());
    }

    #[test]
    fn frechet_examples() {
        let a = GeneratorTuple::diagonal_real(&[&[-1.0]]).unwrap();
        let r = frechet_derivative(&psi("rat"), &a, &m()).unwrap();
        assert!((r.value[(0, 0)].re - 0.25).abs() < 1e-9);
        let a = GeneratorTuple::diagonal_real(&[&[-1.0, -3.0]]).unwrap();
        let r = frechet_derivative(&psi("log"), &a, &m()).unwrap();
        assert!(entrywise_sup(&(r.value - diag_real(&[0.5, 0.25]))) < 1e-9);
        assert!(matches!(frechet_derivative(&psi("sqrt"), &a, &m()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn divided_difference_scalar_case() {
        let a1 = GeneratorTuple::diagonal_real(&[&[-1.0]]).unwrap();
        let a2 = GeneratorTuple::diagonal_real(&[&[-2.0]]).unwrap();
        let v = divided_difference_operator(&psi("rat"), &a1, &a2, &m()).unwrap();
        assert!((v[(0, 0)].re + 5.0 / 6.0).abs() < 1e-9, "{}", v[(0, 0)]);
    }

    #[test]
    fn sandwich_identity_for_non_commuting_pair() {
        use crate::operators::{FactorySpec, TupleFactory};
        let mut f = TupleFactory::new(5);
        let a1 = f.tuple(&FactorySpec::new(1, 3).kappa_max(3.0));
        let v = f.unitary(3);
        let a2 = a1.conjugated(&v, &v.adjoint(), true);
        assert!(a1.cross_commutation_residual(&a2) > 1e-3);
        let psi = psi("rat");
        let x = &a1.mats()[0] - &a2.mats()[0];
        let lhs = divided_difference_sandwich(&psi, &a1, &a2, &x, &m()).unwrap();
        let rhs = apply(&psi, &a1, &m()).unwrap().value - apply(&psi, &a2, &m()).unwrap().value - &x;
        assert!(operator_norm(&(lhs - rhs)) < 1e-8);
    }
}
