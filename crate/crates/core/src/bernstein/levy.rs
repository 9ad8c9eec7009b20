use super::special::{erf, erfc, gamma, lower_gamma, upper_gamma};
use super::Moment;
use crate::error::{Error, Result};

/// One-dimensional densities on `(0, ∞)` used by the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// `α/Γ(1−α) · v^{−1−α}`, the Lévy density of `−(−s)^α`.
    StablePower { alpha: f64 },
    /// `e^{−v}/v`, the Lévy density of `−log(1−s)`.
    ExpOverV,
    /// `e^{−v}`, the Lévy density of `s/(1−s)`.
    Exponential,
    /// `t/(2√π) · v^{−3/2} · exp(−t²/(4v))`, the one-sided ½-stable law
    /// at time `t` (subordinator of `−(−s)^{1/2}`).
    LevyHalf { t: f64 },
}

impl Density {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            Density::StablePower { alpha } => alpha / gamma(1.0 - alpha) * v.powf(-1.0 - alpha),
            Density::ExpOverV => (-v).exp() / v,
            Density::Exponential => (-v).exp(),
            Density::LevyHalf { t } => {
                t / (2.0 * std::f64::consts::PI.sqrt()) * v.powf(-1.5) * (-t * t / (4.0 * v)).exp()
            }
        }
    }

    /// `σ` with `ρ(v) = O(v^{−1−σ})` as `v → 0`.
    pub fn singularity_order(&self) -> f64 {
        match *self {
            Density::StablePower { alpha } => alpha,
            Density::ExpOverV => 0.0,
            Density::Exponential | Density::LevyHalf { .. } => -1.0,
        }
    }

    /// `∫₀ᶜ v^k ρ(v) dv`, `None` when it diverges.
    pub fn lower_moment(&self, k: u32, c: f64) -> Option<f64> {
        match *self {
            Density::StablePower { alpha } => {
                let p = k as f64 - alpha;
                (p > 0.0).then(|| alpha / gamma(1.0 - alpha) * c.powf(p) / p)
            }
            Density::ExpOverV => (k >= 1).then(|| lower_gamma(k, c)),
            Density::Exponential => Some(lower_gamma(k + 1, c)),
            Density::LevyHalf { t } => match k {
                0 => Some(erfc(t / (2.0 * c.sqrt()))),
                1 => {
                    let x = t / (2.0 * c.sqrt());
                    let v = t * c.sqrt() * (-x * x).exp() / std::f64::consts::PI.sqrt()
                        - 0.5 * t * t * erfc(x);
                    Some(v.max(0.0))
                }
                _ => None,
            },
        }
    }

    /// `∫_U^∞ v^k ρ(v) dv`, `None` when it diverges.
    pub fn tail_moment(&self, k: u32, u: f64) -> Option<f64> {
        match *self {
            Density::StablePower { alpha } => {
                (k == 0).then(|| u.powf(-alpha) / gamma(1.0 - alpha))
            }
            Density::ExpOverV => Some(upper_gamma(k, u)),
            Density::Exponential => Some(upper_gamma(k + 1, u)),
            Density::LevyHalf { t } => (k == 0).then(|| erf(t / (2.0 * u.sqrt()))),
        }
    }

    /// Smallest `v₀` with `ρ` nonincreasing on `[v₀, ∞)`.
    fn monotone_from(&self) -> f64 {
        match *self {
            Density::LevyHalf { t } => t * t / 6.0,
            _ => 0.0,
        }
    }

    /// Upper bound on `∫_U^∞ v^k e^{−rv} ρ(v) dv`, `None` when no finite bound is available.
    pub fn damped_tail_moment(&self, k: u32, rate: f64, u: f64) -> Option<f64> {
        let plain = self.tail_moment(k, u).map(|m| (-rate * u).exp() * m);
        let monotone = (rate > 0.0 && u >= self.monotone_from())
            .then(|| self.value(u) * upper_gamma(k + 1, rate * u) / rate.powi(k as i32 + 1));
        match (plain, monotone) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// `∫₀^∞ v^k ρ(v) dv`.
    pub fn total_moment(&self, k: u32) -> Moment {
        match *self {
            Density::StablePower { .. } => Moment::Infinite,
            Density::ExpOverV => {
                if k == 0 {
                    Moment::Infinite
                } else {
                    Moment::Finite(gamma(k as f64))
                }
            }
            Density::Exponential => Moment::Finite(gamma(k as f64 + 1.0)),
            Density::LevyHalf { .. } => {
                if k == 0 {
                    Moment::Finite(1.0)
                } else {
                    Moment::Infinite
                }
            }
        }
    }
}

/// A point mass of a Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// One summand of a [`LevyMeasure`].
#[derive(Debug, Clone, PartialEq)]
pub enum LevyPart {
    Atoms(Vec<Atom>),
    /// `weight · ρ(v) dv` placed on the ray `v·e_axis`.
    Axis { axis: usize, weight: f64, density: Density },
    /// `weight · ρ(v) dv` pushed forward by `v ↦ (v, …, v)`.
    Diagonal { weight: f64, density: Density },
}

impl LevyPart {
    /// Direction of the ray carrying the part, `None` for atoms.
    pub fn direction(&self, dimension: usize) -> Option<Vec<f64>> {
        match self {
            LevyPart::Atoms(_) => None,
            LevyPart::Axis { axis, .. } => {
                let mut dir = vec![0.0; dimension];
                dir[*axis] = 1.0;
                Some(dir)
            }
            LevyPart::Diagonal { .. } => Some(vec![1.0; dimension]),
        }
    }

    fn scaled(&self, a: f64) -> LevyPart {
        match self {
            LevyPart::Atoms(atoms) => LevyPart::Atoms(
                atoms
                    .iter()
                    .map(|at| Atom { point: at.point.clone(), weight: a * at.weight })
                    .collect(),
            ),
            LevyPart::Axis { axis, weight, density } => {
                LevyPart::Axis { axis: *axis, weight: a * weight, density: *density }
            }
            LevyPart::Diagonal { weight, density } => {
                LevyPart::Diagonal { weight: a * weight, density: *density }
            }
        }
    }
}

/// Positive measure on `ℝ₊ⁿ ∖ {0}` represented as a finite sum of parts.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    dimension: usize,
    parts: Vec<LevyPart>,
}

impl LevyMeasure {
    pub fn new(dimension: usize, parts: Vec<LevyPart>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for part in &parts {
            match part {
                LevyPart::Atoms(atoms) => {
                    for at in atoms {
                        if at.point.len() != dimension {
                            return Err(Error::InvalidMeasure(format!(
                                "atom point has {} coordinates, expected {dimension}",
                                at.point.len()
                            )));
                        }
                        if !(at.weight > 0.0) {
                            return Err(Error::InvalidMeasure("atom weights must be positive".into()));
                        }
                        if at.point.iter().any(|&x| x < 0.0) || at.point.iter().all(|&x| x == 0.0) {
                            return Err(Error::InvalidMeasure(
                                "atoms must lie in ℝ₊ⁿ ∖ {0}".into(),
                            ));
                        }
                    }
                }
                LevyPart::Axis { axis, weight, density } => {
                    if *axis >= dimension {
                        return Err(Error::InvalidMeasure(format!("axis {axis} out of range")));
                    }
                    check_density(*weight, density)?;
                }
                LevyPart::Diagonal { weight, density } => check_density(*weight, density)?,
            }
        }
        Ok(Self { dimension, parts })
    }

    pub fn zero(dimension: usize) -> Self {
        Self { dimension, parts: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn parts(&self) -> &[LevyPart] {
        &self.parts
    }

    /// Largest singularity order over the density parts.
    pub fn singularity_order(&self) -> f64 {
        self.parts
            .iter()
            .filter_map(|p| match p {
                LevyPart::Axis { density, .. } | LevyPart::Diagonal { density, .. } => {
                    Some(density.singularity_order())
                }
                LevyPart::Atoms(_) => None,
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Upper bound on `μ({|u|₁ > U})`.
    pub fn tail_bound(&self, u: f64) -> f64 {
        self.parts
            .iter()
            .map(|p| match p {
                LevyPart::Atoms(atoms) => atoms
                    .iter()
                    .filter(|a| a.point.iter().sum::<f64>() > u)
                    .map(|a| a.weight)
                    .sum(),
                LevyPart::Axis { weight, density, .. } => {
                    weight * density.tail_moment(0, u).unwrap_or(f64::INFINITY)
                }
                LevyPart::Diagonal { weight, density } => {
                    weight
                        * density
                            .tail_moment(0, u / self.dimension as f64)
                            .unwrap_or(f64::INFINITY)
                }
            })
            .sum()
    }

    /// Mixed moment `∫ u_i^k dμ(u)`.
    pub fn moment(&self, i: usize, k: u32) -> Moment {
        let mut total = Moment::Finite(0.0);
        for part in &self.parts {
            let m = match part {
                LevyPart::Atoms(atoms) => {
                    Moment::Finite(atoms.iter().map(|a| a.weight * a.point[i].powi(k as i32)).sum())
                }
                LevyPart::Axis { axis, weight, density } => {
                    if *axis == i || k == 0 {
                        density.total_moment(k).scale(*weight)
                    } else {
                        Moment::Finite(0.0)
                    }
                }
                LevyPart::Diagonal { weight, density } => density.total_moment(k).scale(*weight),
            };
            total = total + m;
        }
        total
    }

    /// The measure `a·μ`, `a ≥ 0`.
    pub fn scaled(&self, a: f64) -> Self {
        if a == 0.0 {
            return Self::zero(self.dimension);
        }
        Self { dimension: self.dimension, parts: self.parts.iter().map(|p| p.scaled(a)).collect() }
    }

    /// `a·μ + b·ν` for `a, b ≥ 0`.
    pub fn combine(a: f64, mu: &Self, b: f64, nu: &Self) -> Result<Self> {
        if mu.dimension != nu.dimension {
            return Err(Error::Dimension(format!(
                "cannot add measures of dimension {} and {}",
                mu.dimension, nu.dimension
            )));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::InvalidMeasure("cone coefficients must be nonnegative".into()));
        }
        let mut parts = mu.scaled(a).parts;
        parts.extend(nu.scaled(b).parts);
        Ok(Self { dimension: mu.dimension, parts })
    }
}

fn check_density(weight: f64, density: &Density) -> Result<()> {
    if !(weight > 0.0) {
        return Err(Error::InvalidMeasure("density weights must be positive".into()));
    }
    if density.singularity_order() >= 1.0 {
        return Err(Error::InvalidMeasure(
            "singularity order must be < 1 for ∫min(1,|u|)dμ < ∞".into(),
        ));
    }
    if let Density::StablePower { alpha } = density {
        if !(*alpha > 0.0 && *alpha < 1.0) {
            return Err(Error::InvalidMeasure(format!("stable index {alpha} outside (0,1)")));
        }
    }
    if let Density::LevyHalf { t } = density {
        if !(*t > 0.0) {
            return Err(Error::InvalidMeasure("½-stable time must be positive".into()));
        }
    }
    Ok(())
}
