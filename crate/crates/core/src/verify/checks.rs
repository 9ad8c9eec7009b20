//! Perturbation, commutator, differentiability and subordination checkers.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{instance_digest, BoundReport, MIN_SLOPE, RESIDUAL_TOL};
use crate::bernstein::{Base, BernsteinFunction, Coord, SubordinationLaw};
use crate::calculus::{
    apply, divided_difference_operator, divided_difference_sandwich, frechet_derivative, spectral_oracle,
    subordinated,
};
use crate::error::{Error, Result};
use crate::operators::{
    commutator, expm, identity, operator_norm, unitary_at, GeneratorTuple, HermitianPerturbation,
    IdealNorm, MatrixOp,
};
use crate::quadrature::{gauss_legendre, integrate_levy, integrate_subordination, QuadratureSpec, ScalarFn, Tail};

/// `2e/(e − 1)`.
pub const THM1_CONSTANT: f64 = 3.163_953_413_738_653;

const COMMUTE_TOL: f64 = 1e-10;
const OP: IdealNorm = IdealNorm::Operator;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_pair(psi: &BernsteinFunction, a: &GeneratorTuple, b: &GeneratorTuple) -> Result<()> {
    if a.n() != psi.arity() || b.n() != psi.arity() {
        return Err(Error::Dimension(format!("{} needs {} generators", psi.name(), psi.arity())));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension("tuples of different size".into()));
    }
    Ok(())
}

fn pair_m(a: &GeneratorTuple, b: &GeneratorTuple) -> f64 {
    a.bound_m().max(b.bound_m())
}

fn commuting(t: &GeneratorTuple) -> bool {
    t.commutation_residual() <= COMMUTE_TOL
}

fn pair_hypotheses(a: &GeneratorTuple, b: &GeneratorTuple) -> [(&'static str, bool); 2] {
    [("certified", a.certified() && b.certified()), ("families_commute", commuting(a) && commuting(b))]
}

/// `max_{i,j} ‖[A_i, B_j]‖ / (‖A_i‖‖B_j‖)`.
fn joint_residual(a: &GeneratorTuple, b: &GeneratorTuple) -> f64 {
    let mut worst: f64 = 0.0;
    for x in a.mats() {
        for y in b.mats() {
            let denom = operator_norm(x) * operator_norm(y);
            if denom > 0.0 {
                worst = worst.max(operator_norm(&commutator(x, y)) / denom);
            }
        }
    }
    worst
}

fn differences(a: &GeneratorTuple, b: &GeneratorTuple, norm: IdealNorm) -> Vec<f64> {
    a.mats().iter().zip(b.mats()).map(|(x, y)| norm.norm(&(x - y))).collect()
}

fn boundary_partials(psi: &BernsteinFunction) -> Option<Vec<f64>> {
    (0..psi.arity()).map(|i| psi.partial_at_zero(i).finite()).collect()
}

/// `−(2e/(e−1))·n·Mⁿ·ψ(−(M/2n)·v)`.
fn thm1_rhs(psi: &BernsteinFunction, m: f64, v: &[f64]) -> Result<f64> {
    let n = v.len();
    let coords = v.iter().map(|x| Coord::nonpositive(-(m / (2.0 * n as f64)) * x)).collect::<Result<Vec<_>>>()?;
    Ok(-THM1_CONSTANT * n as f64 * m.powi(n as i32) * psi.evaluate_at(&coords)?)
}

fn moment_rhs(m: f64, partials: &[f64], v: &[f64]) -> f64 {
    m.powi(partials.len() as i32 + 1) * partials.iter().zip(v).map(|(p, x)| p * x).sum::<f64>()
}

/// Least-squares slope of `log y` against `log x`, over points with `x, y > 0`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `‖ψ(A) − ψ(B)‖ ≤ −(2e/(e−1))·n·Mⁿ·ψ(−(M/2n)·(‖A_i − B_i‖)_i)`.
pub fn check_thm1(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    check_pair(psi, a, b)?;
    let lhs = operator_norm(&(apply(psi, a, spec)?.value - apply(psi, b, spec)?.value));
    let rhs = thm1_rhs(psi, pair_m(a, b), &differences(a, b, OP))?;
    Ok(BoundReport::new("thm1", lhs, rhs, OP).hypotheses(&pair_hypotheses(a, b)).digest(instance_digest(psi, a.dim())))
}

/// The fractional-power and logarithmic specializations of the first bound.
///
/// Reports `ex1_alpha` for `−(−s)^α` and `ex1_log` for `−log(1 − s)`; any
/// other function yields a gated `ex1` row.
pub fn check_ex1(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    check_pair(psi, a, b)?;
    let digest = instance_digest(psi, a.dim());
    let triple = psi.triple();
    let plain = psi.arity() == 1 && psi.terms().len() == 1 && psi.terms()[0].weight == 1.0 && triple.c0 == 0.0 && triple.c1[0] == 0.0;
    let base = psi.terms().first().map(|t| t.base);
    let m = pair_m(a, b);
    let (name, bound): (&str, Box<dyn Fn(f64) -> f64>) = match base {
        Some(Base::Power { alpha }) if plain => (
            "ex1_alpha",
            Box::new(move |v: f64| 2f64.powf(1.0 - alpha) * (THM1_CONSTANT / 2.0) * m.powf(1.0 + alpha) * v.powf(alpha)),
        ),
        Some(Base::Log) if plain => ("ex1_log", Box::new(move |v: f64| THM1_CONSTANT * m * (0.5 * m * v).ln_1p())),
        _ => return Ok(BoundReport::failed("ex1", OP).hypothesis("power_or_log", false).digest(digest)),
    };
    let lhs = operator_norm(&(apply(psi, a, spec)?.value - apply(psi, b, spec)?.value));
    let rhs = bound(operator_norm(&(&a.mats()[0] - &b.mats()[0])));
    Ok(BoundReport::new(name, lhs, rhs, OP).hypotheses(&pair_hypotheses(a, b)).digest(digest))
}

/// Stability along `A⁽ᵏ⁾ = B + 2⁻ᵏ(A − B)`, `k = 0..=steps`: each distance
/// `‖ψ(A⁽ᵏ⁾) − ψ(B)‖` is dominated by the first bound at `‖A⁽ᵏ⁾ − B‖`.
///
/// `A` and `B` must share their similarity so that every `A⁽ᵏ⁾` keeps `M`.
pub fn check_cor1(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    steps: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    check_pair(psi, a, b)?;
    let digest = instance_digest(psi, a.dim());
    if b.toward(a, 1.0).is_err() {
        return Ok(vec![BoundReport::failed("cor1", OP).hypothesis("shared_similarity", false).digest(digest)]);
    }
    let m = pair_m(a, b);
    let psi_b = apply(psi, b, spec)?.value;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let ak = b.toward(a, 0.5f64.powi(k as i32))?;
        let lhs = operator_norm(&(apply(psi, &ak, spec)?.value - &psi_b));
        let rhs = thm1_rhs(psi, m, &differences(&ak, b, OP))?;
        out.push(
            BoundReport::new("cor1", lhs, rhs, OP)
                .hypotheses(&pair_hypotheses(&ak, b))
                .hypothesis("bounded_m", ak.bound_m() <= m)
                .digest(format!("{digest};k={k}")),
        );
    }
    Ok(out)
}

/// Lipschitz bound `‖ψ(A) − ψ(B)‖_J ≤ M^{n+1}Σ∂ψ/∂s_i(−0)‖A_i − B_i‖_J`,
/// one row per norm: `cor2` for the operator norm, `thm4` otherwise.
pub fn check_cor2_lipschitz(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    norms: &[IdealNorm],
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    check_pair(psi, a, b)?;
    let digest = instance_digest(psi, a.dim());
    let name = |j: IdealNorm| if j == OP { "cor2" } else { "thm4" };
    let Some(partials) = boundary_partials(psi) else {
        return Ok(norms
            .iter()
            .map(|&j| BoundReport::failed(name(j), j).hypothesis("finite_boundary_partials", false).digest(&*digest))
            .collect());
    };
    let diff = apply(psi, a, spec)?.value - apply(psi, b, spec)?.value;
    let m = pair_m(a, b);
    Ok(norms
        .iter()
        .map(|&j| {
            let rhs = moment_rhs(m, &partials, &differences(a, b, j));
            BoundReport::new(name(j), j.norm(&diff), rhs, j)
                .hypotheses(&pair_hypotheses(a, b))
                .hypothesis("finite_boundary_partials", true)
                .digest(&*digest)
        })
        .collect())
}

/// `∂ψ/∂s_i` at `ω·e_i`, i.e. `c₁ⁱ + ∫u_i e^{ωu_i}dμ(u)`, by quadrature.
pub fn stable_partial(psi: &BernsteinFunction, i: usize, omega: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(omega < 0.0) {
        return Err(Error::Domain(format!("stability margin ω = {omega} must be negative")));
    }
    let triple = psi.triple();
    let mut gradient = vec![0.0; psi.arity()];
    gradient[i] = 1.0;
    let f = ScalarFn {
        f: move |u: &[f64]| u[i] * (omega * u[i]).exp(),
        origin_value: None,
        gradient: Some(gradient),
        tail: Tail { limit: None, scale: 1.0, power: 1, rate: -omega },
    };
    Ok(triple.c1[i] + integrate_levy(&f, &triple.mu, spec, 1.0)?.value)
}

/// Exponentially stable variant with `ω_i = max(ω_i^A, ω_i^B)`: `cor3` for
/// the operator norm, `cor8` otherwise.
pub fn check_cor3_stable(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    norms: &[IdealNorm],
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    check_pair(psi, a, b)?;
    let digest = instance_digest(psi, a.dim());
    let name = |j: IdealNorm| if j == OP { "cor3" } else { "cor8" };
    let omega: Option<Vec<f64>> = match (a.omega(), b.omega()) {
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| p.max(*q)).collect()),
        _ => None,
    };
    let Some(omega) = omega.filter(|w| w.iter().all(|&x| x < 0.0)) else {
        return Ok(norms
            .iter()
            .map(|&j| BoundReport::failed(name(j), j).hypothesis("exponentially_stable", false).digest(&*digest))
            .collect());
    };
    let partials = omega.iter().enumerate().map(|(i, &w)| stable_partial(psi, i, w, spec)).collect::<Result<Vec<_>>>()?;
    let diff = apply(psi, a, spec)?.value - apply(psi, b, spec)?.value;
    let m = pair_m(a, b);
    Ok(norms
        .iter()
        .map(|&j| {
            let rhs = moment_rhs(m, &partials, &differences(a, b, j));
            BoundReport::new(name(j), j.norm(&diff), rhs, j)
                .hypotheses(&pair_hypotheses(a, b))
                .hypothesis("exponentially_stable", true)
                .digest(&*digest)
        })
        .collect())
}

fn pointwise_hypotheses(a: &GeneratorTuple, b: &GeneratorTuple) -> Vec<(&'static str, bool)> {
    let mut h = pair_hypotheses(a, b).to_vec();
    h.push(("cross_commuting", a.cross_commutation_residual(b) <= COMMUTE_TOL));
    if a.n() > 1 {
        h.push(("jointly_commuting", joint_residual(a, b) <= COMMUTE_TOL));
    }
    h
}

fn pointwise_parts(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    x: &DVector<Complex64>,
    spec: &QuadratureSpec,
) -> Result<(f64, Vec<f64>)> {
    check_pair(psi, a, b)?;
    if x.len() != a.dim() {
        return Err(Error::Dimension("vector of wrong length".into()));
    }
    let lhs = ((apply(psi, a, spec)?.value - apply(psi, b, spec)?.value) * x).norm();
    let v = a.mats().iter().zip(b.mats()).map(|(p, q)| ((p - q) * x).norm()).collect();
    Ok((lhs, v))
}

fn thm2_named(
    name: &str,
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    x: &DVector<Complex64>,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    let (lhs, v) = pointwise_parts(psi, a, b, x, spec)?;
    let rhs = thm1_rhs(psi, pair_m(a, b), &v)?;
    Ok(BoundReport::new(name, lhs, rhs, OP).hypotheses(&pointwise_hypotheses(a, b)).digest(instance_digest(psi, a.dim())))
}

/// Pointwise bound `‖(ψ(A) − ψ(B))x‖ ≤ −(2e/(e−1))nMⁿψ(−(M/2n)(‖(A_i − B_i)x‖)_i)`;
/// requires `A_i` to commute with `B_i`.
pub fn check_thm2_pointwise(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    x: &DVector<Complex64>,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    thm2_named("thm2", psi, a, b, x, spec)
}

/// The pointwise bound with `B = 0`: `‖ψ(A)x‖ ≤ −(2e/(e−1))nMⁿψ(−(M/2n)‖Ax‖)`.
pub fn check_cor4(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    x: &DVector<Complex64>,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    thm2_named("cor4", psi, a, &GeneratorTuple::zero(a.n(), a.dim()), x, spec)
}

/// Pointwise Lipschitz bound `‖(ψ(A) − ψ(B))x‖ ≤ M^{n+1}Σ∂ψ/∂s_i(−0)‖(A_i − B_i)x‖`.
pub fn check_cor5_pointwise(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    x: &DVector<Complex64>,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    check_pair(psi, a, b)?;
    let digest = instance_digest(psi, a.dim());
    let Some(partials) = boundary_partials(psi) else {
        return Ok(BoundReport::failed("cor5", OP).hypothesis("finite_boundary_partials", false).digest(digest));
    };
    let (lhs, v) = pointwise_parts(psi, a, b, x, spec)?;
    let rhs = moment_rhs(pair_m(a, b), &partials, &v);
    Ok(BoundReport::new("cor5", lhs, rhs, OP)
        .hypotheses(&pointwise_hypotheses(a, b))
        .hypothesis("finite_boundary_partials", true)
        .digest(digest))
}

/// `is∫₀¹V_H(sr)·K·V_H(s(1−r))dr` by composite Gauss–Legendre.
fn commutator_integral(k: &MatrixOp, h: &HermitianPerturbation, s: f64) -> Result<MatrixOp> {
    let rule = gauss_legendre(32);
    let panels = ((s.abs() * operator_norm(h.matrix())).ceil() as usize).clamp(1, 64);
    let mut acc = MatrixOp::zeros(k.nrows(), k.ncols());
    for p in 0..panels {
        let (lo, hi) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (r, w) in rule.on(lo, hi) {
            let left = unitary_at(h, s * r)?;
            let right = unitary_at(h, s * (1.0 - r))?;
            acc += left * k * right * c(w);
        }
    }
    Ok(acc * Complex64::new(0.0, s))
}

/// The commutator representation `[A, V_H(s)] = is∫₀¹V_H(sr)[A, H]V_H(s(1−r))dr`
/// as a residual (`lemma1`), and `‖[A, V_H(s)]‖_J ≤ |s|‖[A, H]‖_J` per norm (`cor9`).
pub fn check_lemma1(
    a: &MatrixOp,
    h: &HermitianPerturbation,
    s: f64,
    norms: &[IdealNorm],
) -> Result<Vec<BoundReport>> {
    if a.nrows() != h.dim() {
        return Err(Error::Dimension("A and H of different size".into()));
    }
    let digest = format!("psi=none;n=1;d={};s={s}", a.nrows());
    let v = unitary_at(h, s)?;
    let left = commutator(a, &v);
    let ah = commutator(a, h.matrix());
    let residual = operator_norm(&(&left - commutator_integral(&ah, h, s)?));
    let mut out = vec![BoundReport::residual("lemma1", residual, RESIDUAL_TOL).digest(&*digest)];
    for &j in norms {
        out.push(BoundReport::new("cor9", j.norm(&left), s.abs() * j.norm(&ah), j).digest(&*digest));
    }
    Ok(out)
}

/// `‖[ψ(A), H]‖_J ≤ M^{n+1}Σ∂ψ/∂s_j(−0)‖[A_j, H]‖_J`, one row per norm.
pub fn check_thm5_commutator(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    h: &HermitianPerturbation,
    norms: &[IdealNorm],
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    if h.dim() != a.dim() {
        return Err(Error::Dimension("A and H of different size".into()));
    }
    let digest = instance_digest(psi, a.dim());
    let Some(partials) = boundary_partials(psi) else {
        return Ok(norms
            .iter()
            .map(|&j| BoundReport::failed("thm5", j).hypothesis("finite_boundary_partials", false).digest(&*digest))
            .collect());
    };
    let lhs_op = commutator(&apply(psi, a, spec)?.value, h.matrix());
    Ok(norms
        .iter()
        .map(|&j| {
            let v: Vec<f64> = a.mats().iter().map(|x| j.norm(&commutator(x, h.matrix()))).collect();
            BoundReport::new("thm5", j.norm(&lhs_op), moment_rhs(a.bound_m(), &partials, &v), j)
                .hypotheses(&[("certified", a.certified()), ("families_commute", commuting(a))])
                .hypothesis("finite_boundary_partials", true)
                .digest(&*digest)
        })
        .collect())
}

/// Residual of `ψ(V A V⁻¹) = V ψ(A) V⁻¹` for `V = V_H(s)`.
pub fn check_conjugation(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    h: &HermitianPerturbation,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    let v = unitary_at(h, s)?;
    let v_inv = v.adjoint();
    let moved = a.conjugated(&v, &v_inv, true);
    let lhs = apply(psi, &moved, spec)?.value;
    let rhs = &v * apply(psi, a, spec)?.value * &v_inv;
    Ok(BoundReport::residual("conjugation", operator_norm(&(lhs - rhs)), RESIDUAL_TOL)
        .hypothesis("certified", a.certified())
        .digest(format!("{};s={s}", instance_digest(psi, a.dim()))))
}

/// Fréchet differentiability along `ΔA = target − A`, scaled by `2⁻ᵏ`, `k = 0..=10`.
///
/// Rows `thm7` check `‖R‖_J ≤ M²·½ψ″(−0)·‖ΔA‖_J²` for the remainder
/// `R = ψ(A + ΔA) − ψ(A) − ψ′(A)ΔA` at every scale. One `thm6` row per norm
/// reports the log-log slope of `‖R‖_J/‖ΔA‖_J` against `‖ΔA‖_J` as
/// `rhs`, with `lhs = 0.9`. `target` must share the similarity of `A`.
pub fn check_thm6_frechet(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    target: &GeneratorTuple,
    norms: &[IdealNorm],
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    check_pair(psi, a, target)?;
    let digest = instance_digest(psi, a.dim());
    let first = psi.partial_at_zero(0).is_finite();
    let second = psi.second_moment_at_zero().ok().and_then(|m| m.finite());
    let shared = a.toward(target, 1.0).is_ok();
    let hyps = [
        ("univariate", psi.arity() == 1),
        ("finite_first_moment", first),
        ("finite_second_moment", second.is_some()),
        ("codiagonal_perturbation", shared),
        ("certified", a.certified() && target.certified()),
    ];
    if hyps.iter().any(|(_, ok)| !ok) {
        let mut out = Vec::new();
        for &j in norms {
            out.push(BoundReport::failed("thm7", j).hypotheses(&hyps).digest(&*digest));
            out.push(BoundReport::failed("thm6", j).hypotheses(&hyps).digest(&*digest));
        }
        return Ok(out);
    }
    let half_second = 0.5 * second.expect("checked");
    let m = pair_m(a, target);
    let psi_a = apply(psi, a, spec)?.value;
    let deriv = frechet_derivative(psi, a, spec)?.value;
    let mut rows = Vec::new();
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); norms.len()];
    for k in 0..=10 {
        let ak = a.toward(target, 0.5f64.powi(k))?;
        let delta = &ak.mats()[0] - &a.mats()[0];
        let r = apply(psi, &ak, spec)?.value - &psi_a - &deriv * &delta;
        for (idx, &j) in norms.iter().enumerate() {
            let (rn, dn) = (j.norm(&r), j.norm(&delta));
            rows.push(
                BoundReport::new("thm7", rn, m * m * half_second * dn * dn, j)
                    .hypotheses(&hyps)
                    .digest(format!("{digest};k={k}")),
            );
            if dn > 0.0 {
                points[idx].push((dn, rn / dn));
            }
        }
    }
    for (idx, &j) in norms.iter().enumerate() {
        let slope = loglog_slope(&points[idx]);
        rows.push(BoundReport::new("thm6", MIN_SLOPE, slope, j).hypotheses(&hyps).digest(&*digest));
    }
    Ok(rows)
}

/// Residual of `φ(A₁, A₂)(A₁ − A₂) = ψ(A₁) − ψ(A₂) − ψ′(−0)(A₁ − A₂)`.
///
/// Commuting pairs use the operator `φ(A₁, A₂)` times `A₁ − A₂`; other pairs
/// use the transformator form with `A₁ − A₂` in the middle.
pub fn check_eq9_identity(
    psi: &BernsteinFunction,
    a1: &GeneratorTuple,
    a2: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    check_pair(psi, a1, a2)?;
    let digest = instance_digest(psi, a1.dim());
    let hyps = [
        ("univariate", psi.arity() == 1),
        ("finite_first_moment", psi.partial_at_zero(0).is_finite()),
        ("certified", a1.certified() && a2.certified()),
    ];
    if !hyps[0].1 || !hyps[1].1 {
        return Ok(BoundReport::failed("eq9", OP).hypotheses(&hyps).digest(digest));
    }
    let d0 = psi.partial_at_zero(0).to_f64();
    let x = &a1.mats()[0] - &a2.mats()[0];
    let commute = a1.cross_commutation_residual(a2) <= COMMUTE_TOL;
    let phi_x = if commute {
        divided_difference_operator(psi, a1, a2, spec)? * &x
    } else {
        divided_difference_sandwich(psi, a1, a2, &x, spec)?
    };
    let rhs = apply(psi, a1, spec)?.value - apply(psi, a2, spec)?.value - &x * c(d0);
    let form = if commute { "operator" } else { "sandwich" };
    Ok(BoundReport::residual("eq9", operator_norm(&(phi_x - rhs)), RESIDUAL_TOL)
        .hypotheses(&hyps)
        .digest(format!("{digest};form={form}")))
}

/// Residual of `φ(A, A) = ψ′(A) − ψ′(−0)I`.
pub fn check_phi_diagonal(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<BoundReport> {
    let digest = instance_digest(psi, a.dim());
    let hyps = [("univariate", psi.arity() == 1), ("finite_first_moment", psi.partial_at_zero(0).is_finite())];
    if hyps.iter().any(|(_, ok)| !ok) {
        return Ok(BoundReport::failed("phi_diag", OP).hypotheses(&hyps).digest(digest));
    }
    let d0 = psi.partial_at_zero(0).to_f64();
    let phi = divided_difference_operator(psi, a, a, spec)?;
    let expect = frechet_derivative(psi, a, spec)?.value - identity(a.dim()) * c(d0);
    Ok(BoundReport::residual("phi_diag", operator_norm(&(phi - expect)), RESIDUAL_TOL).hypotheses(&hyps).digest(digest))
}

/// `max |∫e^{su}dν_t(u) − e^{−t√(−s)}|` over `s ∈ {−4, −1, −¼}`, `t ∈ {½, 1, 2}`
/// for the one-sided stable law of index ½.
pub fn laplace_identity_residual(spec: &QuadratureSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in [-4.0, -1.0, -0.25] {
        let f = ScalarFn {
            f: move |u: &[f64]| (s * u[0]).exp(),
            origin_value: Some(1.0),
            gradient: Some(vec![s]),
            tail: Tail { limit: None, scale: 1.0, power: 0, rate: -s },
        };
        for t in [0.5, 1.0, 2.0] {
            let got = integrate_subordination(&f, SubordinationLaw::StableHalfDensity, t, spec)?.value;
            worst = worst.max((got - (-t * (-s).sqrt()).exp()).abs());
        }
    }
    Ok(worst)
}

/// Subordination checks for `g_t(A) = ∫T_A(u)dν_t(u)`.
///
/// * `subordination_law`: `g_t(A) = exp(tψ(A))` in closed form for
///   `t ∈ {½, 1, 2}` (Poisson: `exp(t(e^{ΣA} − I))`); gated without a known law.
/// * `subordination_laplace`: the scalar Laplace identity, stable law only.
/// * `semigroup_law`: `g_t g_s = g_{t+s}` for `t, s ∈ {0.1, 0.5, 1}`.
/// * `generator_order`: slope of `‖(g_h − I)/h − ψ(A)‖` in `h = 2⁻ᵏ`,
///   `k = 0..=13`, reported as `rhs` against `lhs = 0.9`.
///
/// Without a known law `g_t` is `exp(tψ(A))`.
pub fn check_subordination(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<Vec<BoundReport>> {
    if psi.arity() != a.n() {
        return Err(Error::Dimension(format!("{} needs {} generators", psi.name(), psi.arity())));
    }
    let digest = instance_digest(psi, a.dim());
    let sub = psi.subordinator();
    let psi_a = apply(psi, a, spec)?.value;
    let mut cache: BTreeMap<u64, MatrixOp> = BTreeMap::new();
    let mut g = |t: f64| -> Result<MatrixOp> {
        if let Some(v) = cache.get(&t.to_bits()) {
            return Ok(v.clone());
        }
        let v = match sub {
            Some(_) => subordinated(psi, a, t, spec)?,
            None => expm(&psi_a, t)?,
        };
        cache.insert(t.to_bits(), v.clone());
        Ok(v)
    };
    let mut rows = Vec::new();
    match sub {
        Some(s) => {
            let exponent = match s.law {
                SubordinationLaw::PoissonAtoms => {
                    let gen = a.generator_along(&s.embedding.direction(a.n()));
                    (expm(&gen, 1.0)? - identity(a.dim())) * c(s.time_scale)
                }
                _ => match a.construction() {
                    Some(_) => spectral_oracle(psi, a)?,
                    None => psi_a.clone(),
                },
            };
            let mut worst: f64 = 0.0;
            for t in [0.5, 1.0, 2.0] {
                worst = worst.max(operator_norm(&(g(t)? - expm(&exponent, t)?)));
            }
            rows.push(BoundReport::residual("subordination_law", worst, RESIDUAL_TOL).hypothesis("closed_form_law", true));
            if s.law == SubordinationLaw::StableHalfDensity {
                rows.push(BoundReport::residual("subordination_laplace", laplace_identity_residual(spec)?, RESIDUAL_TOL));
            }
        }
        None => rows.push(BoundReport::failed("subordination_law", OP).hypothesis("closed_form_law", false)),
    }
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        for s in [0.1, 0.5, 1.0] {
            worst = worst.max(operator_norm(&(g(t)? * g(s)? - g(t + s)?)));
        }
    }
    rows.push(BoundReport::residual("semigroup_law", worst, RESIDUAL_TOL));
    let mut points = Vec::new();
    for k in 0..=13 {
        let h = 0.5f64.powi(k);
        let quotient = (g(h)? - identity(a.dim())) * c(1.0 / h);
        points.push((h, operator_norm(&(quotient - &psi_a))));
    }
    rows.push(BoundReport::new("generator_order", MIN_SLOPE, loglog_slope(&points), OP));
    Ok(rows.into_iter().map(|r| r.hypothesis("certified", a.certified()).digest(&*digest)).collect())
}

/// Relative gap between the Lévy-integral `ψ(A)` and the spectral oracle, against `1e−6`.
pub fn check_oracle(psi: &BernsteinFunction, a: &GeneratorTuple, spec: &QuadratureSpec) -> Result<BoundReport> {
    let digest = instance_digest(psi, a.dim());
    let r = apply(psi, a, spec)?;
    Ok(match r.oracle_residual {
        Some(gap) => BoundReport::residual("oracle", gap, 1e-6).hypothesis("joint_diagonal_data", true),
        None => BoundReport::failed("oracle", OP).hypothesis("joint_diagonal_data", false),
    }
    .digest(digest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{from_real_rows, FactorySpec, TupleFactory};

    fn psi(name: &str) -> BernsteinFunction {
        BernsteinFunction::from_name(name).unwrap()
    }

    fn diag(e: &[f64]) -> GeneratorTuple {
        GeneratorTuple::diagonal_real(&[e]).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::matrix()
    }

    fn rat(s: f64) -> f64 {
        s / (1.0 - s)
    }

    fn pauli_x() -> HermitianPerturbation {
        HermitianPerturbation::new(from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap()
    }

    #[test]
    fn perturbation_bound_worked_instance() {
        let r = check_thm1(&psi("sqrt"), &diag(&[-1.0, -3.0]), &diag(&[-2.0, -1.0]), &q()).unwrap();
        assert!((r.lhs - (3f64.sqrt() - 1.0)).abs() < 1e-8);
        let c = 2.0 * std::f64::consts::E / (std::f64::consts::E - 1.0);
        assert!((r.rhs - c).abs() < 1e-12);
        assert!(r.pass && r.hypotheses_ok());
        let same = check_thm1(&psi("sqrt"), &diag(&[-1.0, -3.0]), &diag(&[-1.0, -3.0]), &q()).unwrap();
        assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
        assert!(same.pass);
    }

    #[test]
    fn fractional_power_bound() {
        let r = check_ex1(&psi("sqrt"), &diag(&[-1.0, -3.0]), &diag(&[-2.0, -1.0]), &q()).unwrap();
        assert_eq!(r.name, "ex1_alpha");
        let expect = 2f64.sqrt() * std::f64::consts::E / (std::f64::consts::E - 1.0) * 2f64.sqrt();
        assert!((r.rhs - expect).abs() < 1e-12);
        assert!(r.pass);
        let gated = check_ex1(&psi("rat"), &diag(&[-1.0]), &diag(&[-2.0]), &q()).unwrap();
        assert!(!gated.hypotheses_ok());
    }

    #[test]
    fn lipschitz_bound_and_gating() {
        let rows = check_cor2_lipschitz(&psi("rat"), &diag(&[-1.0]), &diag(&[-2.0]), &[IdealNorm::Operator], &q())
            .unwrap();
        assert_eq!(rows[0].name, "cor2");
        assert!((rows[0].lhs - 1.0 / 6.0).abs() < 1e-8);
        assert!((rows[0].rhs - 1.0).abs() < 1e-12);
        let sqrt = check_cor2_lipschitz(&psi("sqrt"), &diag(&[-1.0]), &diag(&[-2.0]), &[IdealNorm::Trace], &q())
            .unwrap();
        assert_eq!(sqrt[0].name, "thm4");
        assert_eq!(sqrt[0].outcome(), super::super::Outcome::Gated);
    }

    #[test]
    fn stable_bound_examples() {
        let rows =
            check_cor3_stable(&psi("sqrt"), &diag(&[-1.0]), &diag(&[-2.0]), &[IdealNorm::Operator], &q()).unwrap();
        assert!((rows[0].rhs - 0.5).abs() < 1e-8, "{}", rows[0].rhs);
        assert!((rows[0].lhs - (2f64.sqrt() - 1.0)).abs() < 1e-8);
        assert!(rows[0].pass && rows[0].hypotheses_ok());
        let rows =
            check_cor3_stable(&psi("log"), &diag(&[-1.0]), &diag(&[-3.0]), &[IdealNorm::Operator], &q()).unwrap();
        assert!((rows[0].lhs - 2f64.ln()).abs() < 1e-8);
        assert!((rows[0].rhs - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stable_partial_matches_derivative() {
        for (name, w) in [("sqrt", -1.0), ("alpha:0.25", -0.3), ("log", -2.0), ("rat", -0.5)] {
            let p = psi(name);
            let expect = p.partial(0, &[Coord::interior(w).unwrap()]).unwrap().to_f64();
            let got = stable_partial(&p, 0, w, &QuadratureSpec::scalar()).unwrap();
            assert!((got - expect).abs() < 1e-9, "{name}: {got} vs {expect}");
        }
    }

    #[test]
    fn pointwise_sqrt_bound() {
        let x = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let r = check_cor4(&psi("sqrt"), &diag(&[-4.0]), &x, &q()).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-8);
        let c = 2.0 * std::f64::consts::E / (std::f64::consts::E - 1.0);
        assert!((r.rhs - c * 2f64.sqrt()).abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn pointwise_refuses_non_cross_commuting_pairs() {
        let mut f = TupleFactory::new(3);
        let spec = FactorySpec::new(1, 3).kappa_max(3.0);
        let (a, b) = (f.tuple(&spec), f.tuple(&spec));
        let x = f.unit_vector(3);
        let r = check_thm2_pointwise(&psi("rat"), &a, &b, &x, &q()).unwrap();
        assert!(!r.hypotheses_ok());
    }

    #[test]
    fn commutator_with_unitary_group() {
        let a = from_real_rows(&[&[-1.0, 0.0], &[0.0, -2.0]]);
        let rows = check_lemma1(&a, &pauli_x(), 1.0, &[IdealNorm::Trace]).unwrap();
        let lemma = rows.iter().find(|r| r.name == "lemma1").unwrap();
        assert!(lemma.lhs <= 1e-8 && lemma.pass);
        let cor9 = rows.iter().find(|r| r.name == "cor9").unwrap();
        assert!((cor9.rhs - 2.0).abs() < 1e-12);
        assert!(cor9.pass);
    }

    #[test]
    fn commutator_bound_rat_closed_form() {
        let rows = check_thm5_commutator(&psi("rat"), &diag(&[-1.0, -2.0]), &pauli_x(), &[IdealNorm::Operator], &q())
            .unwrap();
        let expect = (rat(-1.0) - rat(-2.0)).abs();
        assert!((rows[0].lhs - expect).abs() < 1e-8);
        assert!((rows[0].rhs - 1.0).abs() < 1e-12);
        let conj = check_conjugation(&psi("rat"), &diag(&[-1.0, -2.0]), &pauli_x(), 0.7, &q()).unwrap();
        assert!(conj.pass);
    }

    #[test]
    fn frechet_scalar_remainder() {
        let rows =
            check_thm6_frechet(&psi("rat"), &diag(&[-1.0]), &diag(&[-1.1]), &[IdealNorm::Operator], &q()).unwrap();
        let first = rows.iter().find(|r| r.name == "thm7").unwrap();
        let expect = rat(-1.1) - rat(-1.0) - 0.25 * -0.1;
        assert!((first.lhs - expect.abs()).abs() < 1e-9, "{} vs {expect}", first.lhs);
        assert!((expect - 1.190476190476e-3).abs() < 1e-12);
        assert!((first.rhs - 0.01).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.pass));
        let slope = rows.iter().find(|r| r.name == "thm6").unwrap();
        assert!(slope.rhs >= 0.9 && slope.rhs <= 1.1, "{}", slope.rhs);
    }

    #[test]
    fn divided_difference_for_commuting_and_non_commuting_pairs() {
        let r = check_eq9_identity(&psi("rat"), &diag(&[-1.0, -3.0]), &diag(&[-2.0, -0.5]), &q()).unwrap();
        assert!(r.pass && r.instance_digest.ends_with("form=operator"));
        let a1 = TupleFactory::new(11).tuple(&FactorySpec::new(1, 3).kappa_max(4.0));
        let a2 = diag(&[-0.5, -1.0, -2.0]);
        let r = check_eq9_identity(&psi("log"), &a1, &a2, &q()).unwrap();
        assert!(r.pass && r.instance_digest.ends_with("form=sandwich"), "{}", r.lhs);
        let phi = check_phi_diagonal(&psi("poisson"), &a1, &q()).unwrap();
        assert!(phi.pass);
    }

    #[test]
    fn laplace_identity() {
        assert!(laplace_identity_residual(&QuadratureSpec::scalar()).unwrap() <= 1e-8);
    }

    #[test]
    fn subordination_rows() {
        let a = TupleFactory::new(2).tuple(&FactorySpec::new(1, 2).kappa_max(2.0));
        for name in ["poisson", "sqrt"] {
            let rows = check_subordination(&psi(name), &a, &q()).unwrap();
            assert!(rows.iter().all(|r| r.pass && r.hypotheses_ok()), "{name}: {rows:?}");
        }
        let rows = check_subordination(&psi("log"), &a, &q()).unwrap();
        let law = rows.iter().find(|r| r.name == "subordination_law").unwrap();
        assert!(!law.hypotheses_ok());
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (2f64.powi(-k), 3.0 * 4f64.powi(-k))).collect();
        assert!((loglog_slope(&pts) - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_nan());
    }
}
