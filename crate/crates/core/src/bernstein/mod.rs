//! Nonpositive Bernstein functions of `n` variables.
//!
//! Every catalog entry is a finite nonnegative combination of one-variable
//! bases placed either on a coordinate axis (`ψ(s) = φ(s_j)`) or on the
//! diagonal (`ψ(s) = φ(s₁+⋯+s_n)`). That covers the sums `Σ ψ_j(s_j)` and the
//! diagonal composites, and keeps the Lévy measure a finite sum of
//! one-dimensional pieces.

mod levy;
pub(crate) mod special;

use std::fmt;
use std::ops::Add;

use num_complex::Complex64;

pub use levy::{Atom, Density, LevyMeasure, LevyPart};

use crate::error::{Error, Result};
use crate::quadrature::{self, LevyIntegrand, QuadratureSpec, Tail};

/// A coordinate in `(−∞, 0)` or the boundary limit `s → −0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Interior(f64),
    MinusZero,
}

impl Coord {
    /// Interior coordinate; errors unless `x < 0`.
    pub fn interior(x: f64) -> Result<Self> {
        if x < 0.0 && x.is_finite() {
            Ok(Coord::Interior(x))
        } else {
            Err(Error::Domain(format!("coordinate {x} is not in (−∞, 0)")))
        }
    }

    /// `x < 0` maps to an interior point, `x == 0` to the boundary token.
    pub fn nonpositive(x: f64) -> Result<Self> {
        if x == 0.0 {
            Ok(Coord::MinusZero)
        } else {
            Self::interior(x)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Coord::Interior(x) => x,
            Coord::MinusZero => 0.0,
        }
    }
}

/// A moment or boundary derivative that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(x) => Some(x),
            Moment::Infinite => None,
        }
    }

    pub fn scale(self, a: f64) -> Moment {
        match self {
            Moment::Finite(x) => Moment::Finite(a * x),
            Moment::Infinite if a == 0.0 => Moment::Finite(0.0),
            Moment::Infinite => Moment::Infinite,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Moment::Finite(x) => x,
            Moment::Infinite => f64::INFINITY,
        }
    }
}

impl Add for Moment {
    type Output = Moment;
    fn add(self, rhs: Moment) -> Moment {
        match (self, rhs) {
            (Moment::Finite(a), Moment::Finite(b)) => Moment::Finite(a + b),
            _ => Moment::Infinite,
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Moment::Finite(x) => write!(f, "{x}"),
            Moment::Infinite => write!(f, "inf"),
        }
    }
}

/// One-variable members of `𝒯₁` with known Lévy data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    /// `−(−s)^α`, `0 < α < 1`.
    Power { alpha: f64 },
    /// `−log(1−s)`.
    Log,
    /// `s/(1−s)`.
    Rational,
    /// `e^s − 1`.
    Poisson,
}

/// Lévy measure of a one-variable base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Levy1d {
    Density(Density),
    Atom { at: f64, weight: f64 },
}

impl Base {
    pub fn name(&self) -> String {
        match *self {
            Base::Power { alpha: 0.5 } => "sqrt".into(),
            Base::Power { alpha } => format!("alpha:{alpha}"),
            Base::Log => "log".into(),
            Base::Rational => "rat".into(),
            Base::Poisson => "poisson".into(),
        }
    }

    fn parse(token: &str) -> Option<Base> {
        match token {
            "sqrt" => Some(Base::Power { alpha: 0.5 }),
            "log" => Some(Base::Log),
            "rat" => Some(Base::Rational),
            "poisson" => Some(Base::Poisson),
            _ => {
                let alpha: f64 = token.strip_prefix("alpha:")?.parse().ok()?;
                (alpha > 0.0 && alpha < 1.0).then_some(Base::Power { alpha })
            }
        }
    }

    /// Closed form on `(−∞, 0]`; the value at `0` is the limit `ψ(−0) = 0`.
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Base::Power { alpha } => -(-s).powf(alpha),
            Base::Log => -(-s).ln_1p(),
            Base::Rational => s / (1.0 - s),
            Base::Poisson => s.exp_m1(),
        }
    }

    /// Analytic continuation to `Re z ≤ 0` (principal branches).
    pub fn value_complex(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Base::Power { alpha } => {
                if z == Complex64::new(0.0, 0.0) {
                    z
                } else {
                    -(-z).powf(alpha)
                }
            }
            Base::Log => -(one - z).ln(),
            Base::Rational => z / (one - z),
            Base::Poisson => z.exp() - one,
        }
    }

    /// `φ′` at an interior point or at `−0`.
    pub fn derivative(&self, s: Coord) -> Moment {
        match s {
            Coord::MinusZero => self.moment(1),
            Coord::Interior(s) => Moment::Finite(match *self {
                Base::Power { alpha } => alpha * (-s).powf(alpha - 1.0),
                Base::Log => 1.0 / (1.0 - s),
                Base::Rational => 1.0 / ((1.0 - s) * (1.0 - s)),
                Base::Poisson => s.exp(),
            }),
        }
    }

    pub fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Base::Power { alpha } => (-z).powf(alpha - 1.0) * alpha,
            Base::Log => one / (one - z),
            Base::Rational => one / ((one - z) * (one - z)),
            Base::Poisson => z.exp(),
        }
    }

    pub fn second_derivative(&self, s: Coord) -> Moment {
        match s {
            Coord::MinusZero => self.moment(2),
            Coord::Interior(s) => Moment::Finite(match *self {
                Base::Power { alpha } => alpha * (1.0 - alpha) * (-s).powf(alpha - 2.0),
                Base::Log => 1.0 / ((1.0 - s) * (1.0 - s)),
                Base::Rational => 2.0 / (1.0 - s).powi(3),
                Base::Poisson => s.exp(),
            }),
        }
    }

    pub fn levy(&self) -> Levy1d {
        match *self {
            Base::Power { alpha } => Levy1d::Density(Density::StablePower { alpha }),
            Base::Log => Levy1d::Density(Density::ExpOverV),
            Base::Rational => Levy1d::Density(Density::Exponential),
            Base::Poisson => Levy1d::Atom { at: 1.0, weight: 1.0 },
        }
    }

    /// `∫ v^k dμ(v)` for `k ≥ 1`.
    pub fn moment(&self, k: u32) -> Moment {
        match self.levy() {
            Levy1d::Density(d) => d.total_moment(k),
            Levy1d::Atom { at, weight } => Moment::Finite(weight * at.powi(k as i32)),
        }
    }

    pub fn subordination_law(&self) -> SubordinationLaw {
        match *self {
            Base::Power { alpha: 0.5 } => SubordinationLaw::StableHalfDensity,
            Base::Poisson => SubordinationLaw::PoissonAtoms,
            _ => SubordinationLaw::None,
        }
    }

    /// Whether `t ↦ φ′(−t)` is a rapidly decreasing test function on `ℝ₊`.
    pub fn derivative_is_test_function(&self) -> bool {
        matches!(self, Base::Rational | Base::Poisson)
    }
}

/// How a base is placed in `n` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    Axis(usize),
    Diagonal,
}

impl Embedding {
    fn argument(&self, s: &[Coord]) -> Coord {
        match *self {
            Embedding::Axis(j) => s[j],
            Embedding::Diagonal => {
                if s.iter().all(|c| *c == Coord::MinusZero) {
                    Coord::MinusZero
                } else {
                    Coord::Interior(s.iter().map(|c| c.value()).sum())
                }
            }
        }
    }

    fn argument_complex(&self, z: &[Complex64]) -> Complex64 {
        match *self {
            Embedding::Axis(j) => z[j],
            Embedding::Diagonal => z.iter().sum(),
        }
    }

    /// `∂(ℓ·s)/∂s_i`.
    fn weight_of(&self, i: usize) -> f64 {
        match *self {
            Embedding::Axis(j) if j == i => 1.0,
            Embedding::Axis(_) => 0.0,
            Embedding::Diagonal => 1.0,
        }
    }

    pub fn direction(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.weight_of(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub base: Base,
    pub embedding: Embedding,
}

/// Kind of the Bernstein–Widder measure `ν_t` of `e^{tψ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubordinationLaw {
    /// `ν_t = Σ_k e^{−t} t^k/k! · δ_k`.
    PoissonAtoms,
    /// `dν_t = t(2√π)^{−1} u^{−3/2} exp(−t²/(4u)) du`.
    StableHalfDensity,
    None,
}

impl SubordinationLaw {
    /// Poisson mass `e^{−t} t^k / k!` (log-space for large `k`).
    pub fn poisson_mass(k: u64, t: f64) -> f64 {
        if t == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let lnk: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
        (-t + k as f64 * t.ln() - lnk).exp()
    }
}

/// Subordination data of a function: `g_t(A) = ∫ T_A(v·ℓ) dν_{scale·t}(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subordinator {
    pub law: SubordinationLaw,
    pub time_scale: f64,
    pub embedding: Embedding,
}

/// The data `(c₀, c₁, μ)` of the integral representation.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriple {
    pub c0: f64,
    pub c1: Vec<f64>,
    pub mu: LevyMeasure,
}

/// A nonpositive Bernstein function of `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinFunction {
    name: String,
    n: usize,
    c0: f64,
    c1: Vec<f64>,
    terms: Vec<Term>,
}

/// Closed form next to the Lévy-quadrature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub closed_form: f64,
    pub quadrature: f64,
    pub gap: f64,
}

const NAME_FORMS: &str = "sqrt, alpha:<a in (0,1)>, log, rat, poisson, sum:<b1>,<b2>,..., diag:<n>:<b>";

impl BernsteinFunction {
    /// Parse a catalog name (`sqrt`, `alpha:0.25`, `log`, `rat`, `poisson`,
    /// `sum:sqrt,log`, `diag:2:sqrt`).
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let unknown = || Error::UnknownFunction { name: name.to_string(), valid: NAME_FORMS.to_string() };
        if let Some(list) = name.strip_prefix("sum:") {
            let bases = list
                .split(',')
                .map(|tok| Base::parse(tok.trim()).ok_or_else(unknown))
                .collect::<Result<Vec<_>>>()?;
            if bases.is_empty() {
                return Err(unknown());
            }
            return Ok(Self::axis_sum(&bases));
        }
        if let Some(rest) = name.strip_prefix("diag:") {
            let (n, base) = rest.split_once(':').ok_or_else(unknown)?;
            let n: usize = n.parse().map_err(|_| unknown())?;
            let base = Base::parse(base).ok_or_else(unknown)?;
            if n == 0 {
                return Err(unknown());
            }
            return Ok(Self::diagonal(base, n));
        }
        Base::parse(name).map(Self::single).ok_or_else(unknown)
    }

    /// Valid name forms, for diagnostics.
    pub fn name_forms() -> &'static str {
        NAME_FORMS
    }

    pub fn single(base: Base) -> Self {
        Self {
            name: base.name(),
            n: 1,
            c0: 0.0,
            c1: vec![0.0],
            terms: vec![Term { weight: 1.0, base, embedding: Embedding::Axis(0) }],
        }
    }

    /// `ψ(s) = Σ_j φ_j(s_j)`.
    pub fn axis_sum(bases: &[Base]) -> Self {
        let n = bases.len();
        let name = format!("sum:{}", bases.iter().map(Base::name).collect::<Vec<_>>().join(","));
        let terms = bases
            .iter()
            .enumerate()
            .map(|(j, &base)| Term { weight: 1.0, base, embedding: Embedding::Axis(j) })
            .collect();
        Self { name, n, c0: 0.0, c1: vec![0.0; n], terms }
    }

    /// `ψ(s) = φ(s₁ + ⋯ + s_n)`.
    pub fn diagonal(base: Base, n: usize) -> Self {
        Self {
            name: format!("diag:{n}:{}", base.name()),
            n,
            c0: 0.0,
            c1: vec![0.0; n],
            terms: vec![Term { weight: 1.0, base, embedding: Embedding::Diagonal }],
        }
    }

    /// The cone operation `a·ψ + b·χ`, `a, b ≥ 0`.
    pub fn combine(a: f64, psi: &Self, b: f64, chi: &Self) -> Result<Self> {
        if psi.n != chi.n {
            return Err(Error::Dimension(format!("cannot add arities {} and {}", psi.n, chi.n)));
        }
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::Domain("cone coefficients must be nonnegative".into()));
        }
        let mut terms: Vec<Term> = Vec::new();
        for (coef, f) in [(a, psi), (b, chi)] {
            if coef == 0.0 {
                continue;
            }
            terms.extend(f.terms.iter().map(|t| Term { weight: coef * t.weight, ..*t }));
        }
        Ok(Self {
            name: format!("{a}*({})+{b}*({})", psi.name, chi.name),
            n: psi.n,
            c0: a * psi.c0 + b * chi.c0,
            c1: psi.c1.iter().zip(&chi.c1).map(|(x, y)| a * x + b * y).collect(),
            terms,
        })
    }

    /// Adds the affine part `c₀ + c₁·s` (`c₀ ≤ 0`, `c₁ ≥ 0`).
    pub fn with_linear_part(mut self, c0: f64, c1: Vec<f64>) -> Result<Self> {
        if c0 > 0.0 || c1.len() != self.n || c1.iter().any(|&c| c < 0.0) {
            return Err(Error::Domain("need c0 ≤ 0 and c1 ∈ ℝ₊ⁿ".into()));
        }
        self.c0 = c0;
        self.c1 = c1;
        self.name = format!("{}+affine", self.name);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn triple(&self) -> LevyTriple {
        let parts = self
            .terms
            .iter()
            .map(|t| match (t.base.levy(), t.embedding) {
                (Levy1d::Density(density), Embedding::Axis(axis)) => {
                    LevyPart::Axis { axis, weight: t.weight, density }
                }
                (Levy1d::Density(density), Embedding::Diagonal) => {
                    LevyPart::Diagonal { weight: t.weight, density }
                }
                (Levy1d::Atom { at, weight }, emb) => LevyPart::Atoms(vec![Atom {
                    point: emb.direction(self.n).iter().map(|x| x * at).collect(),
                    weight: weight * t.weight,
                }]),
            })
            .collect();
        LevyTriple {
            c0: self.c0,
            c1: self.c1.clone(),
            mu: LevyMeasure::new(self.n, parts).expect("catalog measures are valid"),
        }
    }

    fn check_arity(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension(format!("{} expects {} variables, got {len}", self.name, self.n)));
        }
        Ok(())
    }

    /// `ψ(s)` for `s ∈ (−∞, 0)ⁿ`.
    pub fn evaluate(&self, s: &[f64]) -> Result<f64> {
        self.check_arity(s.len())?;
        let coords = s.iter().map(|&x| Coord::interior(x)).collect::<Result<Vec<_>>>()?;
        self.evaluate_at(&coords)
    }

    /// `ψ` at a point of `(−∞, 0]ⁿ`, boundary coordinates as `Coord::MinusZero`.
    pub fn evaluate_at(&self, s: &[Coord]) -> Result<f64> {
        self.check_arity(s.len())?;
        let linear: f64 = self.c1.iter().zip(s).map(|(c, x)| c * x.value()).sum();
        let nonlinear: f64 = self
            .terms
            .iter()
            .map(|t| t.weight * t.base.value(t.embedding.argument(s).value()))
            .sum();
        Ok(self.c0 + linear + nonlinear)
    }

    /// Analytic continuation to `(Re z ≤ 0)ⁿ`, used by the spectral oracle.
    pub fn evaluate_complex(&self, z: &[Complex64]) -> Complex64 {
        let linear: Complex64 = self.c1.iter().zip(z).map(|(c, x)| x * *c).sum();
        let nonlinear: Complex64 = self
            .terms
            .iter()
            .map(|t| t.base.value_complex(t.embedding.argument_complex(z)) * t.weight)
            .sum();
        linear + nonlinear + self.c0
    }

    /// `∂ψ/∂s_i` at a point of `(−∞, 0]ⁿ`; may be `+∞` on the boundary.
    pub fn partial(&self, i: usize, s: &[Coord]) -> Result<Moment> {
        self.check_arity(s.len())?;
        if i >= self.n {
            return Err(Error::Dimension(format!("axis {i} out of range")));
        }
        let mut total = Moment::Finite(self.c1[i]);
        for t in &self.terms {
            let w = t.weight * t.embedding.weight_of(i);
            if w != 0.0 {
                total = total + t.base.derivative(t.embedding.argument(s)).scale(w);
            }
        }
        Ok(total)
    }

    /// `∂ψ/∂s_i` continued to complex arguments.
    pub fn partial_complex(&self, i: usize, z: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(self.c1[i], 0.0);
        for t in &self.terms {
            let w = t.weight * t.embedding.weight_of(i);
            if w != 0.0 {
                total += t.base.derivative_complex(t.embedding.argument_complex(z)) * w;
            }
        }
        total
    }

    /// `∂ψ/∂s_i |_{s=−0}`, i.e. `c₁ⁱ + ∫ u_i dμ(u)`.
    pub fn partial_at_zero(&self, i: usize) -> Moment {
        self.partial(i, &vec![Coord::MinusZero; self.n]).unwrap_or(Moment::Infinite)
    }

    /// All boundary partials are finite.
    pub fn has_finite_partials_at_zero(&self) -> bool {
        (0..self.n).all(|i| self.partial_at_zero(i).is_finite())
    }

    /// `ψ″(s)` for a one-variable function.
    pub fn second_derivative(&self, s: Coord) -> Result<Moment> {
        self.require_univariate()?;
        let mut total = Moment::Finite(0.0);
        for t in &self.terms {
            total = total + t.base.second_derivative(s).scale(t.weight);
        }
        Ok(total)
    }

    /// `ψ″(−0) = ∫ u² dμ(u)` for a one-variable function.
    pub fn second_moment_at_zero(&self) -> Result<Moment> {
        self.second_derivative(Coord::MinusZero)
    }

    pub(crate) fn require_univariate(&self) -> Result<()> {
        if self.n != 1 {
            return Err(Error::Dimension(format!("{} is not a function of one variable", self.name)));
        }
        Ok(())
    }

    /// Subordination data when `ν_t` is known in closed form.
    pub fn subordinator(&self) -> Option<Subordinator> {
        if self.c0 != 0.0 || self.c1.iter().any(|&c| c != 0.0) || self.terms.len() != 1 {
            return None;
        }
        let t = self.terms[0];
        if self.n > 1 && t.embedding != Embedding::Diagonal {
            return None;
        }
        match t.base.subordination_law() {
            SubordinationLaw::None => None,
            law => Some(Subordinator { law, time_scale: t.weight, embedding: t.embedding }),
        }
    }

    pub fn subordination_law(&self) -> SubordinationLaw {
        self.subordinator().map_or(SubordinationLaw::None, |s| s.law)
    }

    /// Whether `ψ′(−t)` lies in the rapidly-decreasing test space on `ℝ₊`.
    pub fn derivative_is_test_function(&self) -> bool {
        self.n == 1 && self.terms.iter().all(|t| t.base.derivative_is_test_function())
    }

    /// `ψ(s)` by quadrature of `c₀ + c₁·s + ∫(e^{s·u} − 1)dμ(u)`, next to the closed form.
    pub fn evaluate_with_quadrature(&self, s: &[f64], spec: &QuadratureSpec) -> Result<Evaluation> {
        let closed_form = self.evaluate(s)?;
        let triple = self.triple();
        let kernel = LaplaceKernel { s: s.to_vec() };
        let l1: f64 = s.iter().map(|x| x.abs()).sum();
        let integral = quadrature::integrate_levy(&kernel, &triple.mu, spec, l1)?;
        let linear: f64 = triple.c1.iter().zip(s).map(|(c, x)| c * x).sum();
        let quadrature = triple.c0 + linear + integral.value;
        Ok(Evaluation { closed_form, quadrature, gap: (closed_form - quadrature).abs() })
    }

    /// The divided difference `(ψ(s₁) − ψ(s₂))/(s₁ − s₂) − ψ′(−0)`, with
    /// `ψ′(s₁) − ψ′(−0)` on the diagonal.
    pub fn divided_difference(&self, s1: Coord, s2: Coord) -> Result<f64> {
        self.require_univariate()?;
        let d0 = self.derivative_at_zero_finite()?;
        if s1 == s2 {
            return Ok(self.partial(0, &[s1])?.to_f64() - d0);
        }
        let (x1, x2) = (s1.value(), s2.value());
        Ok((self.evaluate_at(&[s1])? - self.evaluate_at(&[s2])?) / (x1 - x2) - d0)
    }

    /// The divided difference through the two-variable measure `μ₁`:
    /// `∫dμ(v) ½∫_{−v}^{v} e^{s₁(v+w)/2 + s₂(v−w)/2} dw − ψ′(−0)`.
    pub fn divided_difference_quadrature(&self, s1: Coord, s2: Coord, spec: &QuadratureSpec) -> Result<Evaluation> {
        let closed_form = self.divided_difference(s1, s2)?;
        let d0 = self.derivative_at_zero_finite()?;
        let kernel = Mu1Kernel { s1: s1.value(), s2: s2.value(), nodes: spec.nodes_per_panel };
        let mu = self.triple().mu;
        let bound = 1.0 + s1.value().abs() + s2.value().abs();
        let integral = quadrature::integrate_levy(&kernel, &mu, spec, bound)?;
        let c1 = self.c1[0];
        // c₁ enters ψ′(−0) but cancels out of the difference quotient.
        let quadrature = integral.value - (d0 - c1);
        Ok(Evaluation { closed_form, quadrature, gap: (closed_form - quadrature).abs() })
    }

    pub(crate) fn derivative_at_zero_finite(&self) -> Result<f64> {
        self.partial_at_zero(0).finite().ok_or_else(|| {
            Error::Hypothesis(format!("ψ′(−0) = ∞ for {}", self.name))
        })
    }
}

impl fmt::Display for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `u ↦ e^{s·u} − 1`.
struct LaplaceKernel {
    s: Vec<f64>,
}

impl LevyIntegrand for LaplaceKernel {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn eval(&self, u: &[f64]) -> Result<f64> {
        Ok(self.s.iter().zip(u).map(|(s, u)| s * u).sum::<f64>().exp_m1())
    }

    fn origin_slope(&self, dir: &[f64]) -> Option<f64> {
        Some(self.s.iter().zip(dir).map(|(s, d)| s * d).sum())
    }

    fn tail(&self, dir: &[f64]) -> Tail<f64> {
        let rate = -self.s.iter().zip(dir).map(|(s, d)| s * d).sum::<f64>();
        if rate > 0.0 {
            Tail { limit: Some(-1.0), scale: 1.0, power: 0, rate }
        } else {
            Tail { limit: None, scale: 1.0, power: 0, rate: 0.0 }
        }
    }
}

/// `v ↦ (v/2)∫_{−1}^{1} exp(v(s₁(1+τ) + s₂(1−τ))/2) dτ`, the inner `w`-integral
/// of the `μ₁` representation after `w = vτ`.
struct Mu1Kernel {
    s1: f64,
    s2: f64,
    nodes: usize,
}

impl LevyIntegrand for Mu1Kernel {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn eval(&self, u: &[f64]) -> Result<f64> {
        let v = u[0];
        let spread = 0.5 * v * (self.s1 - self.s2).abs();
        let panels = ((spread / 8.0).ceil() as usize).clamp(1, 64);
        let rule = quadrature::gauss_legendre(self.nodes);
        let mut sum = 0.0;
        for p in 0..panels {
            let a = -1.0 + 2.0 * p as f64 / panels as f64;
            let b = -1.0 + 2.0 * (p + 1) as f64 / panels as f64;
            let mut panel = 0.0;
            for (x, w) in rule.on(a, b) {
                panel += w * (0.5 * v * (self.s1 * (1.0 + x) + self.s2 * (1.0 - x))).exp();
            }
            sum += panel;
        }
        Ok(0.5 * v * sum)
    }

    fn origin_slope(&self, _dir: &[f64]) -> Option<f64> {
        Some(1.0)
    }

    fn tail(&self, _dir: &[f64]) -> Tail<f64> {
        let rate = -self.s1.max(self.s2);
        Tail { limit: None, scale: 1.0, power: 1, rate: rate.max(0.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi(name: &str) -> BernsteinFunction {
        BernsteinFunction::from_name(name).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(psi("sqrt").evaluate(&[-4.0]).unwrap(), -2.0);
        assert!((psi("log").evaluate(&[-1.0]).unwrap() + std::f64::consts::LN_2).abs() < 1e-16);
        assert!((psi("alpha:0.25").evaluate(&[-16.0]).unwrap() + 2.0).abs() < 1e-15);
        assert!((psi("rat").evaluate(&[-1.0]).unwrap() + 0.5).abs() < 1e-16);
        assert!((psi("poisson").evaluate(&[-1.0]).unwrap() - ((-1.0f64).exp() - 1.0)).abs() < 1e-16);
    }

    #[test]
    fn evaluate_rejects_boundary_and_positive_points() {
        assert!(matches!(psi("sqrt").evaluate(&[0.0]), Err(Error::Domain(_))));
        assert!(matches!(psi("sqrt").evaluate(&[1.0]), Err(Error::Domain(_))));
        assert!(matches!(psi("sum:sqrt,log").evaluate(&[-1.0]), Err(Error::Dimension(_))));
        assert_eq!(psi("sqrt").evaluate_at(&[Coord::MinusZero]).unwrap(), 0.0);
    }

    #[test]
    fn unknown_names_list_valid_forms() {
        match BernsteinFunction::from_name("cube") {
            Err(Error::UnknownFunction { valid, .. }) => assert!(valid.contains("poisson")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(BernsteinFunction::from_name("alpha:1.5").is_err());
        assert!(BernsteinFunction::from_name("diag:0:sqrt").is_err());
    }

    #[test]
    fn composite_names_round_trip() {
        let f = psi("sum:sqrt,log,rat");
        assert_eq!(f.arity(), 3);
        assert_eq!(f.name(), "sum:sqrt,log,rat");
        let g = psi("diag:2:sqrt");
        assert_eq!(g.arity(), 2);
        // −√(−s₁−s₂) at (−1, −3) is −2.
        assert!((g.evaluate(&[-1.0, -3.0]).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_moments() {
        assert_eq!(psi("rat").partial_at_zero(0), Moment::Finite(1.0));
        assert_eq!(psi("poisson").partial_at_zero(0), Moment::Finite(1.0));
        assert_eq!(psi("log").partial_at_zero(0), Moment::Finite(1.0));
        assert_eq!(psi("sqrt").partial_at_zero(0), Moment::Infinite);
        assert_eq!(psi("rat").second_moment_at_zero().unwrap(), Moment::Finite(2.0));
        assert_eq!(psi("poisson").second_moment_at_zero().unwrap(), Moment::Finite(1.0));
        assert_eq!(psi("log").second_moment_at_zero().unwrap(), Moment::Finite(1.0));
        assert!(psi("sum:rat,log").second_moment_at_zero().is_err());
        // Diagonal composites see the full moment on every axis.
        assert_eq!(psi("diag:3:rat").partial_at_zero(2), Moment::Finite(1.0));
    }

    #[test]
    fn divided_difference_examples() {
        let rat = psi("rat");
        let v = rat.divided_difference(Coord::Interior(-1.0), Coord::Interior(-2.0)).unwrap();
        assert!((v + 5.0 / 6.0).abs() < 1e-15);
        let v = rat.divided_difference(Coord::Interior(-1.0), Coord::Interior(-1.0)).unwrap();
        assert!((v + 0.75).abs() < 1e-15);
        for name in ["rat", "log", "poisson"] {
            let v = psi(name).divided_difference(Coord::MinusZero, Coord::MinusZero).unwrap();
            assert_eq!(v, 0.0);
        }
        assert!(matches!(
            psi("sqrt").divided_difference(Coord::Interior(-1.0), Coord::Interior(-2.0)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn cone_combination_is_pointwise() {
        let f = psi("sqrt");
        let g = psi("rat");
        let h = BernsteinFunction::combine(2.0, &f, 0.5, &g).unwrap();
        let s = [-3.0];
        let expect = 2.0 * f.evaluate(&s).unwrap() + 0.5 * g.evaluate(&s).unwrap();
        assert_eq!(h.evaluate(&s).unwrap(), expect);
        assert_eq!(h.triple().mu.parts().len(), 2);
        assert!(BernsteinFunction::combine(1.0, &f, 1.0, &psi("diag:2:log")).is_err());
    }

    #[test]
    fn subordinators_exist_only_for_known_laws() {
        assert_eq!(psi("sqrt").subordination_law(), SubordinationLaw::StableHalfDensity);
        assert_eq!(psi("poisson").subordination_law(), SubordinationLaw::PoissonAtoms);
        assert_eq!(psi("diag:2:poisson").subordination_law(), SubordinationLaw::PoissonAtoms);
        assert_eq!(psi("log").subordination_law(), SubordinationLaw::None);
        assert_eq!(psi("sum:sqrt,sqrt").subordination_law(), SubordinationLaw::None);
        let total: f64 = (0..60).map(|k| SubordinationLaw::poisson_mass(k, 3.0)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
