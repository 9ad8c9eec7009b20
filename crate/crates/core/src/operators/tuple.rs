use num_complex::Complex64;

use super::{commutator, diag, expm, expm_minus_identity, identity, operator_norm, zeros, MatrixOp};
use crate::error::{Error, Result};

/// Provenance of a factory tuple: `A_j = S · diag(λ⁽ʲ⁾) · S⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub similarity: MatrixOp,
    pub similarity_inv: MatrixOp,
    /// `eigenvalues[j][k]` is the `k`-th joint eigenvalue of `A_j`.
    pub eigenvalues: Vec<Vec<Complex64>>,
    /// `‖S‖·‖S⁻¹‖`.
    pub condition: f64,
}

/// Pairwise-commuting generators `(A₁, …, A_n)` with a semigroup bound `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTuple {
    mats: Vec<MatrixOp>,
    bound_m: f64,
    omega: Option<Vec<f64>>,
    certified: bool,
    construction: Option<Construction>,
}

/// The logarithmic certification grid: `t = 0` and 200 points in `[10⁻³, 50]`.
pub fn certification_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), 50f64.ln());
    std::iter::once(0.0)
        .chain((0..200).map(|k| (lo + (hi - lo) * k as f64 / 199.0).exp()))
        .collect()
}

impl GeneratorTuple {
    /// Tuple from joint diagonal data; `M = κ(S)` is certified.
    pub fn from_construction(construction: Construction) -> Result<Self> {
        let n = construction.eigenvalues.len();
        if n == 0 {
            return Err(Error::Dimension("a tuple needs at least one generator".into()));
        }
        let d = construction.similarity.nrows();
        let mut mats = Vec::with_capacity(n);
        let mut omega = Vec::with_capacity(n);
        for eig in &construction.eigenvalues {
            if eig.len() != d {
                return Err(Error::Dimension(format!("{} eigenvalues for dimension {d}", eig.len())));
            }
            let top = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            if top > 0.0 || eig.iter().any(|l| !l.is_finite()) {
                return Err(Error::Spectrum(format!("eigenvalue with Re λ = {top} > 0")));
            }
            omega.push(top);
            mats.push(&construction.similarity * diag(eig) * &construction.similarity_inv);
        }
        let omega = omega.iter().all(|&w| w < 0.0).then_some(omega);
        Ok(Self { mats, bound_m: construction.condition.max(1.0), omega, certified: true, construction: Some(construction) })
    }

    /// Diagonal tuple, `S = I`, `M = 1`.
    pub fn diagonal(eigenvalues: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = eigenvalues.first().map_or(0, Vec::len);
        Self::from_construction(Construction {
            similarity: identity(d),
            similarity_inv: identity(d),
            eigenvalues,
            condition: 1.0,
        })
    }

    /// Diagonal tuple from real spectra, one slice per generator.
    pub fn diagonal_real(eigenvalues: &[&[f64]]) -> Result<Self> {
        Self::diagonal(
            eigenvalues.iter().map(|e| e.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect(),
        )
    }

    /// The zero tuple (`T_0(u) = I`).
    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            mats: vec![zeros(d); n],
            bound_m: 1.0,
            omega: None,
            certified: true,
            construction: Some(Construction {
                similarity: identity(d),
                similarity_inv: identity(d),
                eigenvalues: vec![vec![Complex64::new(0.0, 0.0); d]; n],
                condition: 1.0,
            }),
        }
    }

    /// Arbitrary commuting matrices with a user-supplied `M`; marked uncertified.
    pub fn uncertified(mats: Vec<MatrixOp>, bound_m: f64) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Dimension("a tuple needs at least one generator".into()));
        }
        let d = mats[0].nrows();
        if mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Dimension("generators must be square of equal size".into()));
        }
        if mats.iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        if !(bound_m >= 1.0) {
            return Err(Error::Domain(format!("semigroup bound {bound_m} must be ≥ 1")));
        }
        let t = Self { mats, bound_m, omega: None, certified: false, construction: None };
        let r = t.commutation_residual();
        if r > 1e-10 {
            return Err(Error::Hypothesis(format!("generators do not commute (relative residual {r:e})")));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mats(&self) -> &[MatrixOp] {
        &self.mats
    }

    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    pub fn omega(&self) -> Option<&[f64]> {
        self.omega.as_deref()
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn construction(&self) -> Option<&Construction> {
        self.construction.as_ref()
    }

    /// `T_A(u) = exp(u₁A₁)⋯exp(u_nA_n)`, ascending order.
    pub fn semigroup_at(&self, u: &[f64]) -> Result<MatrixOp> {
        if u.len() != self.n() {
            return Err(Error::Dimension(format!("point has {} coordinates, tuple has {}", u.len(), self.n())));
        }
        if u.iter().any(|&x| x < 0.0) {
            return Err(Error::Domain("semigroup parameters must be ≥ 0".into()));
        }
        let mut out: Option<MatrixOp> = None;
        for (a, &t) in self.mats.iter().zip(u) {
            if t == 0.0 {
                continue;
            }
            let e = expm(a, t)?;
            out = Some(match out {
                None => e,
                Some(p) => p * e,
            });
        }
        Ok(out.unwrap_or_else(|| identity(self.dim())))
    }

    /// `T_A(u) − I`, accurate for small `u`.
    pub fn semigroup_minus_identity_at(&self, u: &[f64]) -> Result<MatrixOp> {
        if u.len() != self.n() {
            return Err(Error::Dimension(format!("point has {} coordinates, tuple has {}", u.len(), self.n())));
        }
        if u.iter().any(|&x| x < 0.0) {
            return Err(Error::Domain("semigroup parameters must be ≥ 0".into()));
        }
        let mut out: Option<MatrixOp> = None;
        for (a, &t) in self.mats.iter().zip(u) {
            if t == 0.0 {
                continue;
            }
            let e = expm_minus_identity(a, t)?;
            out = Some(match out {
                None => e,
                Some(r) => {
                    let cross = &r * &e;
                    r + e + cross
                }
            });
        }
        Ok(out.unwrap_or_else(|| zeros(self.dim())))
    }

    /// `Σ_j dir_j A_j`.
    pub fn generator_along(&self, dir: &[f64]) -> MatrixOp {
        let mut g = zeros(self.dim());
        for (a, &w) in self.mats.iter().zip(dir) {
            if w != 0.0 {
                g += a * Complex64::new(w, 0.0);
            }
        }
        g
    }

    /// `max_{i<j} ‖[A_i, A_j]‖ / (‖A_i‖‖A_j‖)`.
    pub fn commutation_residual(&self) -> f64 {
        let norms: Vec<f64> = self.mats.iter().map(operator_norm).collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let denom = norms[i] * norms[j];
                if denom > 0.0 {
                    worst = worst.max(operator_norm(&commutator(&self.mats[i], &self.mats[j])) / denom);
                }
            }
        }
        worst
    }

    /// `max_i ‖[A_i, B_i]‖ / (‖A_i‖‖B_i‖)`.
    pub fn cross_commutation_residual(&self, other: &Self) -> f64 {
        self.mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let denom = operator_norm(a) * operator_norm(b);
                if denom > 0.0 { operator_norm(&commutator(a, b)) / denom } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// `(scale, rate)` with `‖T_A(v·dir)‖ ≤ scale·e^{−rate·v}` for all `v ≥ 0`.
    ///
    /// Certified for factory tuples; for uncertified input the scale comes
    /// from a grid estimate and `rate` from submultiplicativity.
    pub fn decay_envelope(&self, dir: &[f64]) -> (f64, f64) {
        if let Some(c) = &self.construction {
            let top = (0..self.dim())
                .map(|k| c.eigenvalues.iter().zip(dir).map(|(e, w)| w * e[k].re).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            return (c.condition.max(1.0), (-top).max(0.0));
        }
        let active = dir.iter().filter(|&&w| w != 0.0).count() as i32;
        if let Some(omega) = &self.omega {
            let rate = -omega.iter().zip(dir).map(|(o, w)| o * w).sum::<f64>();
            return (self.bound_m.powi(active), rate.max(0.0));
        }
        self.estimated_envelope(dir, active)
    }

    fn estimated_envelope(&self, dir: &[f64], active: i32) -> (f64, f64) {
        let g = self.generator_along(dir);
        let fallback = self.bound_m.powi(active);
        let mut sup = fallback;
        let mut prev = 0.0;
        for k in -6..=20 {
            let tau = 2f64.powi(k);
            for j in 1..=16 {
                let t = prev + (tau - prev) * j as f64 / 16.0;
                match expm(&g, t) {
                    Ok(e) => sup = sup.max(operator_norm(&e)),
                    Err(_) => return (sup, 0.0),
                }
            }
            prev = tau;
            let q = match expm(&g, tau) {
                Ok(e) => operator_norm(&e),
                Err(_) => return (sup, 0.0),
            };
            if q < 0.5 {
                return (sup / q, -q.ln() / tau);
            }
        }
        (sup, 0.0)
    }

    /// `S·diag(f(λ_k⁽¹⁾, …, λ_k⁽ⁿ⁾))·S⁻¹` from the construction data.
    pub fn spectral_apply(&self, f: impl Fn(&[Complex64]) -> Complex64) -> Result<MatrixOp> {
        let c = self
            .construction
            .as_ref()
            .ok_or_else(|| Error::MissingConstruction("tuple has no joint diagonal data".into()))?;
        let values: Vec<Complex64> = (0..self.dim())
            .map(|k| {
                let point: Vec<Complex64> = c.eigenvalues.iter().map(|e| e[k]).collect();
                f(&point)
            })
            .collect();
        Ok(&c.similarity * diag(&values) * &c.similarity_inv)
    }

    /// `(UA₁U⁻¹, …, UA_nU⁻¹)`; certification survives when `U` is unitary.
    pub fn conjugated(&self, u: &MatrixOp, u_inv: &MatrixOp, unitary: bool) -> Self {
        let mats = self.mats.iter().map(|a| u * a * u_inv).collect();
        let construction = self.construction.as_ref().map(|c| Construction {
            similarity: u * &c.similarity,
            similarity_inv: &c.similarity_inv * u_inv,
            eigenvalues: c.eigenvalues.clone(),
            condition: if unitary {
                c.condition
            } else {
                c.condition * operator_norm(u) * operator_norm(u_inv)
            },
        });
        let bound_m = if unitary { self.bound_m } else { construction.as_ref().map_or(self.bound_m, |c| c.condition) };
        Self {
            mats,
            bound_m,
            omega: self.omega.clone(),
            certified: self.certified && (unitary || self.construction.is_some()),
            construction,
        }
    }

    /// `(1 − t)·self + t·target` for tuples sharing one similarity `S`.
    ///
    /// Spectra move along segments, so the result stays dissipative for
    /// `t ∈ [0, 1]` and keeps `M = κ(S)`.
    pub fn toward(&self, target: &Self, t: f64) -> Result<Self> {
        let (c0, c1) = match (&self.construction, &target.construction) {
            (Some(a), Some(b)) if a.similarity == b.similarity && a.eigenvalues.len() == b.eigenvalues.len() => (a, b),
            _ => return Err(Error::Hypothesis("tuples do not share a similarity".into())),
        };
        let eigenvalues = c0
            .eigenvalues
            .iter()
            .zip(&c1.eigenvalues)
            .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a + (b - a) * t).collect())
            .collect();
        let mut out = Self::from_construction(Construction { eigenvalues, ..c0.clone() })?;
        out.certified = self.certified && target.certified;
        Ok(out)
    }

    /// `(cA₁, …, cA_n)` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0, "scale must be positive");
        let z = Complex64::new(c, 0.0);
        Self {
            mats: self.mats.iter().map(|a| a * z).collect(),
            bound_m: self.bound_m,
            omega: self.omega.as_ref().map(|o| o.iter().map(|w| c * w).collect()),
            certified: self.certified,
            construction: self.construction.as_ref().map(|k| Construction {
                eigenvalues: k.eigenvalues.iter().map(|e| e.iter().map(|l| l * c).collect()).collect(),
                ..k.clone()
            }),
        }
    }

    /// `sup_j sup_{t ∈ grid} ‖exp(tA_j)‖` over the certification grid.
    pub fn grid_sup(&self) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for a in &self.mats {
            for &t in &certification_grid() {
                sup = sup.max(operator_norm(&expm(a, t)?));
            }
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{diag_real, entrywise_sup};

    #[test]
    fn identity_at_origin_and_diagonal_product() {
        let t = GeneratorTuple::diagonal_real(&[&[-1.0, -2.0], &[-3.0, -1.0]]).unwrap();
        assert_eq!(t.semigroup_at(&[0.0, 0.0]).unwrap(), identity(2));
        let p = t.semigroup_at(&[1.0, 1.0]).unwrap();
        assert!(entrywise_sup(&(p - diag_real(&[(-4f64).exp(), (-3f64).exp()]))) < 1e-15);
        assert_eq!(t.omega(), Some(&[-1.0, -1.0][..]));
    }

    #[test]
    fn positive_spectrum_rejected() {
        assert!(matches!(GeneratorTuple::diagonal_real(&[&[0.5, -1.0]]), Err(Error::Spectrum(_))));
    }

    #[test]
    fn non_commuting_input_rejected() {
        let a = crate::operators::from_real_rows(&[&[-1.0, 1.0], &[0.0, -2.0]]);
        let b = diag_real(&[-1.0, -3.0]);
        assert!(matches!(GeneratorTuple::uncertified(vec![a, b], 2.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn estimated_envelope_bounds_the_semigroup() {
        let a = crate::operators::from_real_rows(&[&[-1.0, 4.0], &[0.0, -1.0]]);
        let t = GeneratorTuple::uncertified(vec![a], 1.0).unwrap();
        let (scale, rate) = t.decay_envelope(&[1.0]);
        assert!(rate > 0.0);
        for &v in &[0.0, 0.3, 1.0, 3.0, 10.0, 30.0] {
            let norm = operator_norm(&t.semigroup_at(&[v]).unwrap());
            assert!(norm <= scale * (-rate * v).exp() * (1.0 + 1e-12), "v = {v}");
        }
    }
}
