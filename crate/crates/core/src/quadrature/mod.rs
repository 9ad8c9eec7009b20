//! Fixed-layout Gauss–Legendre integration against Lévy measures and
//! subordination laws.
//!
//! Every density part lives on a ray `u = v·dir`. The ray is cut at
//! `origin_cutoff < delta_split < U` into geometric panels; the piece below
//! `origin_cutoff` is replaced by the integrand's linear model and the piece
//! beyond the certified truncation point `U` by its limit at infinity, so the
//! reported error is a bound rather than an estimate wherever the integrand
//! supplies a decay envelope.

mod gauss;

use num_complex::Complex64;
use rayon::prelude::*;

pub use gauss::{gauss_legendre, GaussLegendre};

use crate::bernstein::{Density, LevyMeasure, LevyPart, SubordinationLaw};
use crate::error::{Error, Result};

/// Values that can be summed by the engine.
pub trait Accumulate: Clone + Send + Sync {
    /// `self += w · other`.
    fn add_scaled(&mut self, other: &Self, w: f64);
    /// Norm used for tolerances (entrywise sup for matrices).
    fn norm(&self) -> f64;
}

impl Accumulate for f64 {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }

    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Accumulate for Complex64 {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }

    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Decay envelope along a ray: `‖f(v·dir) − limit‖ ≤ scale · v^power · e^{−rate·v}` for all `v > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail<V> {
    pub limit: Option<V>,
    pub scale: f64,
    pub power: u32,
    pub rate: f64,
}

impl<V: Accumulate> Tail<V> {
    /// `sup_{v ≥ v₀} ‖f(v·dir)‖`.
    pub fn bound_beyond(&self, v0: f64) -> f64 {
        let base = self.limit.as_ref().map_or(0.0, Accumulate::norm);
        let p = self.power as f64;
        let envelope = if self.rate <= 0.0 {
            if self.power == 0 { 1.0 } else { f64::INFINITY }
        } else if v0 >= p / self.rate {
            v0.powf(p) * (-self.rate * v0).exp()
        } else {
            (p / self.rate).powf(p) * (-p).exp()
        };
        base + self.scale * envelope
    }
}

/// An integrand on `ℝ₊ⁿ ∖ {0}`.
pub trait LevyIntegrand: Sync {
    type Value: Accumulate;

    fn zero(&self) -> Self::Value;

    fn eval(&self, u: &[f64]) -> Result<Self::Value>;

    /// `f(0⁺)` when it is nonzero.
    fn origin_value(&self) -> Option<Self::Value> {
        None
    }

    /// `d/dv f(v·dir)` at `v = 0`, used for the piece below `origin_cutoff`.
    fn origin_slope(&self, _dir: &[f64]) -> Option<Self::Value> {
        None
    }

    fn tail(&self, dir: &[f64]) -> Tail<Self::Value>;
}

/// Panel layout and tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub delta_split: f64,
    pub panels_per_decade: usize,
    pub nodes_per_panel: usize,
    pub origin_cutoff: f64,
    pub tail_truncation_tol: f64,
    pub target_tol: f64,
    /// Largest truncation point tried before giving up.
    pub max_truncation: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::scalar()
    }
}

impl QuadratureSpec {
    /// Defaults for scalar integrals.
    pub fn scalar() -> Self {
        Self {
            delta_split: 1.0,
            panels_per_decade: 2,
            nodes_per_panel: 32,
            origin_cutoff: 1e-12,
            tail_truncation_tol: 1e-12,
            target_tol: 1e-10,
            max_truncation: 1e30,
        }
    }

    /// Defaults for matrix-valued integrals.
    pub fn matrix() -> Self {
        Self { target_tol: 1e-9, tail_truncation_tol: 1e-11, ..Self::scalar() }
    }

    pub fn with_nodes(mut self, nodes_per_panel: usize) -> Self {
        self.nodes_per_panel = nodes_per_panel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !(self.origin_cutoff > 0.0 && self.origin_cutoff < self.delta_split) {
            return bad("need 0 < origin_cutoff < delta_split");
        }
        if !self.delta_split.is_finite() || self.max_truncation <= self.delta_split {
            return bad("need delta_split < max_truncation");
        }
        if self.panels_per_decade < 1 {
            return bad("panels_per_decade must be ≥ 1");
        }
        if self.nodes_per_panel < 4 {
            return bad("nodes_per_panel must be ≥ 4");
        }
        if !(self.tail_truncation_tol > 0.0 && self.target_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    fn ratio(&self) -> f64 {
        10f64.powf(1.0 / self.panels_per_decade as f64)
    }
}

/// Result of an integration with its error accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral<V> {
    pub value: V,
    /// Certified bound on the discarded tail beyond the truncation points.
    pub truncation_error: f64,
    /// Estimated error of the linear model below `origin_cutoff`.
    pub origin_remainder: f64,
    /// Largest truncation point used.
    pub truncation_point: f64,
    pub evaluations: usize,
}

impl<V> Integral<V> {
    pub fn error_estimate(&self) -> f64 {
        self.truncation_error + self.origin_remainder
    }
}

/// `∫ f dμ`; `origin_linearity_bound` is the caller-certified `L` with `‖f(u)‖ ≤ L|u|₁` near 0.
pub fn integrate_levy<F: LevyIntegrand>(
    f: &F,
    mu: &LevyMeasure,
    spec: &QuadratureSpec,
    origin_linearity_bound: f64,
) -> Result<Integral<F::Value>> {
    spec.validate()?;
    if mu.singularity_order() >= 1.0 {
        return Err(Error::InvalidMeasure("singularity order ≥ 1".into()));
    }
    let rule = gauss_legendre(spec.nodes_per_panel);
    let n = mu.dimension();
    let mut out = Integral {
        value: f.zero(),
        truncation_error: 0.0,
        origin_remainder: 0.0,
        truncation_point: 0.0,
        evaluations: 0,
    };
    for part in mu.parts() {
        match part {
            LevyPart::Atoms(atoms) => {
                for atom in atoms {
                    out.value.add_scaled(&f.eval(&atom.point)?, atom.weight);
                    out.evaluations += 1;
                }
            }
            LevyPart::Axis { weight, density, .. } | LevyPart::Diagonal { weight, density } => {
                let dir = part.direction(n).expect("density parts have a direction");
                let ray = integrate_ray(f, &dir, *weight, density, spec, origin_linearity_bound, &rule)?;
                merge(&mut out, ray);
            }
        }
    }
    Ok(out)
}

/// `∫ f dν_t` for a subordination law; `f` is evaluated at one-element slices `[u]`.
pub fn integrate_subordination<F: LevyIntegrand>(
    f: &F,
    law: SubordinationLaw,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Integral<F::Value>> {
    spec.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("subordination time {t} must be ≥ 0")));
    }
    let mut out = Integral {
        value: f.zero(),
        truncation_error: 0.0,
        origin_remainder: 0.0,
        truncation_point: 0.0,
        evaluations: 0,
    };
    if law == SubordinationLaw::None {
        return Err(Error::Hypothesis("no closed-form subordination law".into()));
    }
    if t == 0.0 {
        out.value = f.eval(&[0.0])?;
        out.evaluations = 1;
        return Ok(out);
    }
    match law {
        SubordinationLaw::PoissonAtoms => {
            let tail = f.tail(&[1.0]);
            let mut log_mass = -t;
            let mut k: u64 = 0;
            loop {
                let mass = log_mass.exp();
                if mass > 0.0 {
                    out.value.add_scaled(&f.eval(&[k as f64])?, mass);
                    out.evaluations += 1;
                }
                let next = log_mass + t.ln() - ((k + 1) as f64).ln();
                if (k + 2) as f64 > t {
                    let rest = next.exp() / (1.0 - t / (k + 2) as f64);
                    let bound = rest * tail.bound_beyond((k + 1) as f64);
                    if bound < spec.target_tol {
                        out.truncation_error = bound;
                        out.truncation_point = k as f64;
                        return Ok(out);
                    }
                }
                log_mass = next;
                k += 1;
                if k > 1_000_000 {
                    return Err(Error::TruncationNotCertified { tol: spec.target_tol, reached: k as f64 });
                }
            }
        }
        SubordinationLaw::StableHalfDensity => {
            let rule = gauss_legendre(spec.nodes_per_panel);
            let ray = integrate_ray(f, &[1.0], 1.0, &Density::LevyHalf { t }, spec, 0.0, &rule)?;
            merge(&mut out, ray);
            Ok(out)
        }
        SubordinationLaw::None => unreachable!(),
    }
}

/// `‖I_n − I_{2n}‖` for the node-doubling convergence check.
pub fn node_doubling_gap<F>(f: &F, mu: &LevyMeasure, spec: &QuadratureSpec, origin_linearity_bound: f64) -> Result<f64>
where
    F: LevyIntegrand,
    F::Value: std::ops::Sub<Output = F::Value>,
{
    let coarse = integrate_levy(f, mu, spec, origin_linearity_bound)?;
    let fine = integrate_levy(f, mu, &spec.clone().with_nodes(2 * spec.nodes_per_panel), origin_linearity_bound)?;
    Ok((coarse.value - fine.value).norm())
}

fn merge<V: Accumulate>(out: &mut Integral<V>, part: Integral<V>) {
    out.value.add_scaled(&part.value, 1.0);
    out.truncation_error += part.truncation_error;
    out.origin_remainder += part.origin_remainder;
    out.truncation_point = out.truncation_point.max(part.truncation_point);
    out.evaluations += part.evaluations;
}

/// Smallest geometric edge `δ·ratio^k` at which the tail bound certifies truncation.
fn truncation_point<V: Accumulate>(
    tail: &Tail<V>,
    weight: f64,
    density: &Density,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let ratio = spec.ratio();
    let mut u = spec.delta_split;
    let mut last = f64::INFINITY;
    loop {
        u *= ratio;
        if u > spec.max_truncation {
            return Err(Error::TruncationNotCertified { tol: spec.tail_truncation_tol, reached: u / ratio });
        }
        if tail.scale == 0.0 {
            return Ok((u, 0.0));
        }
        if let Some(m) = density.damped_tail_moment(tail.power, tail.rate, u) {
            last = weight * tail.scale * m;
            if last <= spec.tail_truncation_tol {
                return Ok((u, last));
            }
        }
        if !last.is_finite() && tail.rate <= 0.0 && density.tail_moment(tail.power, u).is_none() {
            return Err(Error::TruncationNotCertified { tol: spec.tail_truncation_tol, reached: u });
        }
    }
}

fn integrate_ray<F: LevyIntegrand>(
    f: &F,
    dir: &[f64],
    weight: f64,
    density: &Density,
    spec: &QuadratureSpec,
    origin_linearity_bound: f64,
    rule: &GaussLegendre,
) -> Result<Integral<F::Value>> {
    let tail = f.tail(dir);
    let (big_u, truncation_error) = truncation_point(&tail, weight, density, spec)?;
    let c = spec.origin_cutoff;
    let delta = spec.delta_split;

    let near = ((delta / c).log10() * spec.panels_per_decade as f64).ceil().max(1.0) as usize;
    let near_ratio = (delta / c).powf(1.0 / near as f64);
    let mut edges: Vec<f64> = (0..near).map(|k| c * near_ratio.powi(k as i32)).collect();
    let ratio = spec.ratio();
    let mut e = delta;
    while e < big_u * (1.0 - 1e-12) {
        edges.push(e);
        e *= ratio;
    }
    edges.push(big_u);

    let panels: Vec<Result<F::Value>> = edges
        .par_windows(2)
        .map(|w| {
            let mut acc = f.zero();
            let mut u = vec![0.0; dir.len()];
            for (v, wt) in rule.on(w[0], w[1]) {
                for (ui, di) in u.iter_mut().zip(dir) {
                    *ui = v * di;
                }
                acc.add_scaled(&f.eval(&u)?, wt * density.value(v));
            }
            Ok(acc)
        })
        .collect();

    let mut value = f.zero();
    for p in panels {
        value.add_scaled(&p?, weight);
    }

    let mut origin_remainder = 0.0;
    if let Some(f0) = f.origin_value() {
        let m0 = density.lower_moment(0, c).ok_or_else(|| {
            Error::InvalidMeasure("integrand does not vanish at the origin of an infinite measure".into())
        })?;
        value.add_scaled(&f0, weight * m0);
    }
    let m1 = density.lower_moment(1, c).unwrap_or(0.0);
    match f.origin_slope(dir) {
        Some(slope) => {
            value.add_scaled(&slope, weight * m1);
            let m2 = density.lower_moment(2, c).unwrap_or(0.0);
            origin_remainder = weight * origin_linearity_bound.powi(2) * m2;
        }
        None => origin_remainder += weight * origin_linearity_bound * m1,
    }

    if let Some(limit) = &tail.limit {
        let m = density.tail_moment(0, big_u).ok_or_else(|| {
            Error::InvalidMeasure("infinite tail mass against a nonzero limit".into())
        })?;
        value.add_scaled(limit, weight * m);
    }

    Ok(Integral {
        value,
        truncation_error,
        origin_remainder,
        truncation_point: big_u,
        evaluations: (edges.len() - 1) * rule.len(),
    })
}

/// Scalar integrand built from a closure with a direction-independent envelope.
pub struct ScalarFn<G> {
    pub f: G,
    pub origin_value: Option<f64>,
    /// Gradient at the origin.
    pub gradient: Option<Vec<f64>>,
    pub tail: Tail<f64>,
}

impl<G: Fn(&[f64]) -> f64 + Sync> LevyIntegrand for ScalarFn<G> {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn eval(&self, u: &[f64]) -> Result<f64> {
        Ok((self.f)(u))
    }

    fn origin_value(&self) -> Option<f64> {
        self.origin_value
    }

    fn origin_slope(&self, dir: &[f64]) -> Option<f64> {
        self.gradient.as_ref().map(|g| g.iter().zip(dir).map(|(a, b)| a * b).sum())
    }

    fn tail(&self, _dir: &[f64]) -> Tail<f64> {
        self.tail.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::Atom;

    fn one_minus_exp() -> ScalarFn<impl Fn(&[f64]) -> f64 + Sync> {
        ScalarFn {
            f: |u: &[f64]| -(-u[0]).exp_m1(),
            origin_value: None,
            gradient: Some(vec![1.0]),
            tail: Tail { limit: Some(1.0), scale: 1.0, power: 0, rate: 1.0 },
        }
    }

    #[test]
    fn atom_is_exact() {
        let mu = LevyMeasure::new(1, vec![LevyPart::Atoms(vec![Atom { point: vec![1.0], weight: 1.0 }])]).unwrap();
        let f = ScalarFn { f: |u: &[f64]| u[0], origin_value: None, gradient: Some(vec![1.0]), tail: Tail { limit: None, scale: 1.0, power: 1, rate: 0.0 } };
        assert_eq!(integrate_levy(&f, &mu, &QuadratureSpec::scalar(), 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn frullani_integral() {
        let mu = LevyMeasure::new(1, vec![LevyPart::Axis { axis: 0, weight: 1.0, density: Density::ExpOverV }]).unwrap();
        let r = integrate_levy(&one_minus_exp(), &mu, &QuadratureSpec::scalar(), 1.0).unwrap();
        assert!((r.value - std::f64::consts::LN_2).abs() < 1e-10, "{}", r.value);
        assert!(r.error_estimate() < 1e-10);
    }

    #[test]
    fn half_stable_levy_density() {
        let mu = LevyMeasure::new(1, vec![LevyPart::Axis { axis: 0, weight: 1.0, density: Density::StablePower { alpha: 0.5 } }]).unwrap();
        let r = integrate_levy(&one_minus_exp(), &mu, &QuadratureSpec::scalar(), 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn subordination_examples() {
        let spec = QuadratureSpec::scalar();
        let decay = ScalarFn {
            f: |u: &[f64]| (-u[0]).exp(),
            origin_value: Some(1.0),
            gradient: Some(vec![-1.0]),
            tail: Tail { limit: None, scale: 1.0, power: 0, rate: 1.0 },
        };
        let r = integrate_subordination(&decay, SubordinationLaw::StableHalfDensity, 2.0, &spec).unwrap();
        assert!((r.value - (-2f64).exp()).abs() < 1e-10, "{}", r.value);
        let r = integrate_subordination(&decay, SubordinationLaw::PoissonAtoms, 1.0, &spec).unwrap();
        assert!((r.value - ((-1f64).exp() - 1.0).exp()).abs() < 1e-10);
        let one = ScalarFn {
            f: |_: &[f64]| 1.0,
            origin_value: Some(1.0),
            gradient: Some(vec![0.0]),
            tail: Tail { limit: Some(1.0), scale: 0.0, power: 0, rate: 0.0 },
        };
        for law in [SubordinationLaw::PoissonAtoms, SubordinationLaw::StableHalfDensity] {
            for t in [0.0, 0.3, 4.0] {
                let r = integrate_subordination(&one, law, t, &spec).unwrap();
                assert!((r.value - 1.0).abs() < 1e-10, "{law:?} t={t}: {}", r.value);
            }
        }
        assert!(integrate_subordination(&one, SubordinationLaw::None, 1.0, &spec).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = QuadratureSpec::scalar();
        spec.origin_cutoff = 2.0;
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        assert!(QuadratureSpec::scalar().with_nodes(2).validate().is_err());
    }

    #[test]
    fn uncertifiable_tail_is_an_error() {
        // A bounded integrand that does not decay against a heavy tail with a tiny tolerance.
        let mu = LevyMeasure::new(1, vec![LevyPart::Axis { axis: 0, weight: 1.0, density: Density::StablePower { alpha: 0.1 } }]).unwrap();
        let f = ScalarFn { f: |u: &[f64]| u[0].sin().abs().min(u[0]), origin_value: None, gradient: None, tail: Tail { limit: None, scale: 1.0, power: 0, rate: 0.0 } };
        assert!(matches!(
            integrate_levy(&f, &mu, &QuadratureSpec::scalar(), 1.0),
            Err(Error::TruncationNotCertified { .. })
        ));
    }
}
