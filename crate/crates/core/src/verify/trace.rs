//! The trace kernel `f(z) = tr(T_A(z) − T_B(z))/z`, the trace formula for
//! `tr(ψ(A) − ψ(B))` and the spectral shift of diagonal pairs.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{instance_digest, BoundReport, RESIDUAL_TOL};
use crate::bernstein::{BernsteinFunction, Coord};
use crate::calculus::{apply, spectral_oracle};
use crate::error::{Error, Result};
use crate::operators::{expm, expm_complex, operator_norm, trace, GeneratorTuple, IdealNorm, MatrixOp};
use crate::quadrature::{gauss_legendre, integrate_levy, LevyIntegrand, QuadratureSpec, Tail};

/// Agreement required between the two evaluations of `f(z)`.
const KERNEL_TOL: f64 = 1e-9;
/// Relative tolerance of the trace formula.
const TRACE_TOL: f64 = 1e-6;
const CONTOUR_NODES: usize = 64;

/// `f(z)` evaluated directly and through the segment integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceKernel {
    /// `tr(e^{zA} − e^{zB})/z`.
    pub direct: Complex64,
    /// `∫₀¹ tr(T_B(z(1−τ))(A − B)T_A(zτ))dτ`.
    pub segment: Complex64,
    /// `max_τ ‖T_B(z(1−τ))‖·‖T_A(zτ)‖` over the quadrature nodes.
    pub node_bound: f64,
}

impl TraceKernel {
    pub fn gap(&self) -> f64 {
        (self.direct - self.segment).norm()
    }
}

fn direct_kernel(a: &MatrixOp, b: &MatrixOp, z: Complex64) -> Result<Complex64> {
    Ok(trace(&(expm_complex(a, z)? - expm_complex(b, z)?)) / z)
}

/// `f(z)` for `Re z > 0`, computed two ways.
pub fn trace_kernel(a: &MatrixOp, b: &MatrixOp, z: Complex64) -> Result<TraceKernel> {
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("trace kernel needs Re z > 0, got {z}")));
    }
    if a.shape() != b.shape() {
        return Err(Error::Dimension("A and B of different size".into()));
    }
    let direct = direct_kernel(a, b, z)?;
    let diff = a - b;
    let rule = gauss_legendre(32);
    let panels = ((z.norm() * (operator_norm(a) + operator_norm(b)) / 2.0).ceil() as usize).clamp(1, 64);
    let mut segment = Complex64::new(0.0, 0.0);
    let mut node_bound: f64 = 0.0;
    for p in 0..panels {
        let (lo, hi) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (tau, w) in rule.on(lo, hi) {
            let tb = expm_complex(b, z * (1.0 - tau))?;
            let ta = expm_complex(a, z * tau)?;
            node_bound = node_bound.max(operator_norm(&tb) * operator_norm(&ta));
            segment += trace(&(&tb * &diff * &ta)) * w;
        }
    }
    Ok(TraceKernel { direct, segment, node_bound })
}

/// Trapezoid approximation of `∮ f(z)dz` over `|z − center| = radius`,
/// together with `max |f|` on the nodes and the grid bound
/// `max ‖T_X(τz)‖`, `X ∈ {A, B}`, over the segments `[0, z]`.
pub fn contour_integral(
    a: &MatrixOp,
    b: &MatrixOp,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<(Complex64, f64, f64)> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sup: f64 = 0.0;
    let mut grid: f64 = 1.0;
    for k in 0..nodes {
        let e = Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64);
        let z = center + e * radius;
        if !(z.re > 0.0) {
            return Err(Error::Domain("contour leaves the right half-plane".into()));
        }
        let f = direct_kernel(a, b, z)?;
        sup = sup.max(f.norm());
        sum += f * Complex64::new(0.0, radius) * e;
        for j in 1..=16 {
            let w = z * (j as f64 / 16.0);
            grid = grid.max(operator_norm(&expm_complex(a, w)?)).max(operator_norm(&expm_complex(b, w)?));
        }
    }
    Ok((sum * (TAU / nodes as f64), sup, grid))
}

fn single(a: &GeneratorTuple, b: &GeneratorTuple) -> Result<()> {
    if a.n() != 1 || b.n() != 1 {
        return Err(Error::Dimension("trace checks take single generators".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension("A and B of different size".into()));
    }
    Ok(())
}

/// Trace-kernel diagnostics for one pair:
///
/// * `trace_kernel`: the two evaluations of `f(z)` agree within `1e−9`;
/// * `trace_kernel_bound`: `|f(u)| ≤ M²‖A − B‖₁` at real `u > 0`;
/// * `contour`: `|∮ f(z)dz| ≤ 1e−8` on `|z − 2| = 1`;
/// * `contour_bound`: `max |f| ≤ G²‖A − B‖₁` on that contour, `G` the grid bound.
pub fn check_trace_kernel(a: &GeneratorTuple, b: &GeneratorTuple, z: Complex64, u: f64) -> Result<Vec<BoundReport>> {
    single(a, b)?;
    let (ma, mb) = (&a.mats()[0], &b.mats()[0]);
    let digest = format!("psi=none;n=1;d={}", a.dim());
    let trace_norm = IdealNorm::Trace.norm(&(ma - mb));
    let m = a.bound_m().max(b.bound_m());
    let certified = [("certified", a.certified() && b.certified())];
    let k = trace_kernel(ma, mb, z)?;
    let real = trace_kernel(ma, mb, Complex64::new(u, 0.0))?;
    let (integral, sup, grid) = contour_integral(ma, mb, Complex64::new(2.0, 0.0), 1.0, CONTOUR_NODES)?;
    Ok(vec![
        BoundReport::residual("trace_kernel", k.gap(), KERNEL_TOL).digest(format!("{digest};z={z}")),
        BoundReport::new("trace_kernel_bound", real.direct.norm(), m * m * trace_norm, IdealNorm::Trace)
            .hypotheses(&certified)
            .digest(format!("{digest};u={u}")),
        BoundReport::residual("contour", integral.norm(), RESIDUAL_TOL).digest(&*digest),
        BoundReport::new("contour_bound", sup, grid * grid * trace_norm, IdealNorm::Trace).digest(&*digest),
    ])
}

/// `u ↦ tr(T_A(u) − T_B(u)) = u·f(u)`.
struct TraceDifference<'a> {
    a: &'a MatrixOp,
    b: &'a MatrixOp,
    slope: Complex64,
    tail: Tail<Complex64>,
}

impl LevyIntegrand for TraceDifference<'_> {
    type Value = Complex64;

    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn eval(&self, u: &[f64]) -> Result<Complex64> {
        Ok(trace(&(expm(self.a, u[0])? - expm(self.b, u[0])?)))
    }

    fn origin_slope(&self, _dir: &[f64]) -> Option<Complex64> {
        Some(self.slope)
    }

    fn tail(&self, _dir: &[f64]) -> Tail<Complex64> {
        self.tail.clone()
    }
}

/// `|tr(ψ(A) − ψ(B)) − ∫ u·f(u) dμ(u)| ≤ 1e−6·(1 + |tr(ψ(A) − ψ(B))|)`,
/// reported as `lhs` = the gap and `rhs` = the tolerance.
pub fn check_thm8_trace(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    let digest = instance_digest(psi, a.dim());
    let first = psi.partial_at_zero(0).is_finite();
    let hyps = [
        ("univariate", psi.arity() == 1),
        ("finite_first_moment", first),
        ("certified", a.certified() && b.certified()),
    ];
    if !hyps[0].1 || !hyps[1].1 {
        return Ok(BoundReport::failed("thm8", IdealNorm::Trace).hypotheses(&hyps).digest(digest));
    }
    single(a, b)?;
    let (ma, mb) = (&a.mats()[0], &b.mats()[0]);
    let lhs = trace(&(apply(psi, a, spec)?.value - apply(psi, b, spec)?.value));
    let (sa, ra) = a.decay_envelope(&[1.0]);
    let (sb, rb) = b.decay_envelope(&[1.0]);
    let d = a.dim() as f64;
    let diff = ma - mb;
    let f = TraceDifference {
        a: ma,
        b: mb,
        slope: trace(&diff),
        tail: Tail { limit: None, scale: d * (sa + sb), power: 0, rate: ra.min(rb) },
    };
    let l = sa * sb * IdealNorm::Trace.norm(&diff);
    let triple = psi.triple();
    let rhs = integrate_levy(&f, &triple.mu, spec, l)?.value + trace(&diff) * triple.c1[0];
    let gap = (lhs - rhs).norm();
    Ok(BoundReport::new("thm8", gap, TRACE_TOL * (1.0 + lhs.norm()), IdealNorm::Trace).hypotheses(&hyps).digest(digest))
}

/// A compactly supported integer step function on `ℝ₊`: `heights[j]` on
/// `[breakpoints[j], breakpoints[j+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralShiftStep {
    breakpoints: Vec<f64>,
    heights: Vec<i64>,
}

impl SpectralShiftStep {
    pub fn new(breakpoints: Vec<f64>, heights: Vec<i64>) -> Result<Self> {
        let empty = breakpoints.is_empty() && heights.is_empty();
        if !empty && breakpoints.len() != heights.len() + 1 {
            return Err(Error::Domain("need one more breakpoint than heights".into()));
        }
        if breakpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be finite, ≥ 0 and increasing".into()));
        }
        Ok(Self { breakpoints, heights })
    }

    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), heights: Vec::new() }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn is_zero(&self) -> bool {
        self.heights.iter().all(|&h| h == 0)
    }

    pub fn value_at(&self, t: f64) -> i64 {
        self.breakpoints
            .windows(2)
            .zip(&self.heights)
            .find(|(w, _)| w[0] <= t && t < w[1])
            .map_or(0, |(_, &h)| h)
    }

    /// `∫ g(t)ξ(t)dt` with Gauss–Legendre on geometric subpanels of each step.
    pub fn pair(&self, g: impl Fn(f64) -> f64) -> f64 {
        let rule = gauss_legendre(32);
        let mut total = 0.0;
        for (w, &h) in self.breakpoints.windows(2).zip(&self.heights) {
            if h == 0 {
                continue;
            }
            let mut edges = vec![w[0]];
            let mut e = if w[0] > 0.0 { 2.0 * w[0] } else { w[1] };
            while e < w[1] {
                edges.push(e);
                e *= 2.0;
            }
            edges.push(w[1]);
            let part: f64 = edges.windows(2).flat_map(|p| rule.on(p[0], p[1])).map(|(t, wt)| wt * g(t)).sum();
            total += h as f64 * part;
        }
        total
    }

    /// `∫ G′(t)ξ(t)dt = Σ_j h_j (G(t_{j+1}) − G(t_j))`, exact for a given antiderivative.
    pub fn pair_antiderivative(&self, big_g: impl Fn(f64) -> f64) -> f64 {
        self.breakpoints.windows(2).zip(&self.heights).map(|(w, &h)| h as f64 * (big_g(w[1]) - big_g(w[0]))).sum()
    }
}

fn real_diagonal(m: &MatrixOp) -> Result<Vec<f64>> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        for j in 0..d {
            if i != j && m[(i, j)].norm() != 0.0 {
                return Err(Error::Domain("matrix is not diagonal".into()));
            }
        }
        let x = m[(i, i)];
        if x.im != 0.0 || !(x.re < 0.0) {
            return Err(Error::Domain(format!("diagonal entry {x} is not real and negative")));
        }
        out.push(x.re);
    }
    Ok(out)
}

/// `ξ = Σ_i sign(a_i − b_i)·𝟙_{[min(−a_i, −b_i), max(−a_i, −b_i)]}` for
/// `A = diag(a_i)`, `B = diag(b_i)` with real negative entries, so that
/// `∫ψ′(−t)ξ(t)dt = Σ_i(ψ(a_i) − ψ(b_i))`.
pub fn spectral_shift_diagonal(a: &MatrixOp, b: &MatrixOp) -> Result<SpectralShiftStep> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension("A and B of different size".into()));
    }
    let (xa, xb) = (real_diagonal(a)?, real_diagonal(b)?);
    let steps: Vec<(f64, f64, i64)> = xa
        .iter()
        .zip(&xb)
        .filter(|(p, q)| p != q)
        .map(|(&p, &q)| ((-p).min(-q), (-p).max(-q), if p > q { 1 } else { -1 }))
        .collect();
    let mut points: Vec<f64> = steps.iter().flat_map(|&(lo, hi, _)| [lo, hi]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut breakpoints: Vec<f64> = Vec::new();
    let mut heights: Vec<i64> = Vec::new();
    for w in points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let h: i64 = steps.iter().filter(|&&(lo, hi, _)| lo <= mid && mid < hi).map(|s| s.2).sum();
        match heights.last() {
            Some(&last) if last == h => *breakpoints.last_mut().expect("paired") = w[1],
            _ => {
                if breakpoints.last() != Some(&w[0]) {
                    breakpoints.push(w[0]);
                }
                breakpoints.push(w[1]);
                heights.push(h);
            }
        }
    }
    while heights.first() == Some(&0) {
        heights.remove(0);
        breakpoints.remove(0);
    }
    while heights.last() == Some(&0) {
        heights.pop();
        breakpoints.pop();
    }
    if heights.is_empty() {
        return Ok(SpectralShiftStep::zero());
    }
    SpectralShiftStep::new(breakpoints, heights)
}

/// `∫ψ′(−t)dξ(t) = tr(ψ(A) − ψ(B))` for diagonal pairs, as a residual against
/// the spectral values `Σ ψ(a_i) − ψ(b_i)`.
pub fn check_ssf(
    psi: &BernsteinFunction,
    a: &GeneratorTuple,
    b: &GeneratorTuple,
) -> Result<BoundReport> {
    single(a, b)?;
    if psi.arity() != 1 {
        return Err(Error::Dimension(format!("{} is not a function of one variable", psi.name())));
    }
    let digest = instance_digest(psi, a.dim());
    let xi = match spectral_shift_diagonal(&a.mats()[0], &b.mats()[0]) {
        Ok(xi) => xi,
        Err(Error::Domain(_)) => {
            return Ok(BoundReport::failed("ssf", IdealNorm::Trace)
                .hypothesis("diagonal_real_negative", false)
                .digest(digest))
        }
        Err(e) => return Err(e),
    };
    let derivative = |t: f64| {
        Coord::interior(-t).and_then(|s| psi.partial(0, &[s])).map_or(f64::NAN, |m| m.to_f64())
    };
    let pairing = xi.pair(derivative);
    let tr = trace(&(spectral_oracle(psi, a)? - spectral_oracle(psi, b)?));
    let residual = (Complex64::new(pairing, 0.0) - tr).norm();
    Ok(BoundReport::residual("ssf", residual, RESIDUAL_TOL)
        .hypotheses(&[("diagonal_real_negative", true), ("measure_case", true)])
        .digest(digest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::diag_real;

    #[test]
    fn scalar_kernel_value() {
        let k = trace_kernel(&diag_real(&[-1.0]), &diag_real(&[-2.0]), Complex64::new(1.0, 0.0)).unwrap();
        let expect = (-1f64).exp() - (-2f64).exp();
        assert!((k.direct.re - expect).abs() < 1e-15);
        assert!((k.direct.re - 0.232544).abs() < 1e-6);
        assert!(k.gap() < 1e-13);
        assert!(trace_kernel(&diag_real(&[-1.0]), &diag_real(&[-2.0]), Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn shift_examples() {
        let xi = spectral_shift_diagonal(&diag_real(&[-1.0]), &diag_real(&[-2.0])).unwrap();
        assert_eq!(xi.breakpoints(), &[1.0, 2.0]);
        assert_eq!(xi.heights(), &[1]);
        let xi = spectral_shift_diagonal(&diag_real(&[-1.0, -3.0]), &diag_real(&[-2.0, -2.0])).unwrap();
        assert_eq!(xi.breakpoints(), &[1.0, 2.0, 3.0]);
        assert_eq!(xi.heights(), &[1, -1]);
        assert_eq!(xi.value_at(2.5), -1);
        assert!(spectral_shift_diagonal(&diag_real(&[-1.0]), &diag_real(&[-1.0])).unwrap().is_zero());
        assert!(spectral_shift_diagonal(&diag_real(&[1.0]), &diag_real(&[-1.0])).is_err());
    }

    #[test]
    fn overlapping_steps_merge() {
        let xi = spectral_shift_diagonal(&diag_real(&[-1.0, -2.0]), &diag_real(&[-3.0, -4.0])).unwrap();
        assert_eq!(xi.breakpoints(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(xi.heights(), &[1, 2, 1]);
        let half_sqrt = |t: f64| 0.5 / t.sqrt();
        let exact = xi.pair_antiderivative(f64::sqrt);
        assert!((xi.pair(half_sqrt) - exact).abs() < 1e-13);
    }

    fn diag(e: &[f64]) -> GeneratorTuple {
        GeneratorTuple::diagonal_real(&[e]).unwrap()
    }

    #[test]
    fn trace_formula_rat_scalar() {
        let psi = BernsteinFunction::from_name("rat").unwrap();
        let r = check_thm8_trace(&psi, &diag(&[-1.0]), &diag(&[-2.0]), &QuadratureSpec::matrix()).unwrap();
        assert!(r.pass && r.hypotheses_ok(), "{r:?}");
        let same = check_thm8_trace(&psi, &diag(&[-1.0]), &diag(&[-1.0]), &QuadratureSpec::matrix()).unwrap();
        assert!(same.lhs <= 1e-12);
        let sqrt = BernsteinFunction::from_name("sqrt").unwrap();
        let gated = check_thm8_trace(&sqrt, &diag(&[-1.0]), &diag(&[-2.0]), &QuadratureSpec::matrix()).unwrap();
        assert!(!gated.hypotheses_ok());
    }

    #[test]
    fn ssf_examples() {
        let sqrt = BernsteinFunction::from_name("sqrt").unwrap();
        let xi = spectral_shift_diagonal(&diag_real(&[-1.0]), &diag_real(&[-2.0])).unwrap();
        let pairing = xi.pair(|t| 0.5 / t.sqrt());
        assert!((pairing - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((pairing - 0.414214).abs() < 1e-6);
        let r = check_ssf(&sqrt, &diag(&[-1.0]), &diag(&[-2.0])).unwrap();
        assert!(r.pass, "{r:?}");
        let rat = BernsteinFunction::from_name("rat").unwrap();
        let r = check_ssf(&rat, &diag(&[-1.0, -3.0]), &diag(&[-2.0, -2.0])).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn kernel_rows_on_a_random_pair() {
        use crate::operators::{FactorySpec, TupleFactory};
        let mut f = TupleFactory::new(4);
        let spec = FactorySpec::new(1, 3).kappa_max(3.0);
        let (a, b) = (f.tuple(&spec), f.tuple(&spec));
        let rows = check_trace_kernel(&a, &b, Complex64::new(0.7, -1.2), 1.3).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["trace_kernel", "trace_kernel_bound", "contour", "contour_bound"]);
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }
}
