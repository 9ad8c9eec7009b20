//! Seeded instances: commuting tuples `A_j = S D_j S⁻¹` with a certified
//! bound `κ(S)`, Hermitian perturbations and random vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{tuple::Construction, GeneratorTuple, HermitianPerturbation, MatrixOp};

/// Smallest stability margin the factory produces.
pub const MIN_MARGIN: f64 = 1e-2;

/// Shape of a factory tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorySpec {
    pub n: usize,
    pub d: usize,
    /// Cap on `κ(S)`; `1` gives a unitary `S`.
    pub kappa_max: f64,
    /// Upper bound on `Re λ`, clamped to `≤ −0.01`.
    pub omega: f64,
    /// Width of the band `Re λ ∈ [ω − spread, ω]`.
    pub spread: f64,
    pub real_spectrum: bool,
}

impl FactorySpec {
    pub fn new(n: usize, d: usize) -> Self {
        Self { n, d, kappa_max: 1.0, omega: -0.1, spread: 2.0, real_spectrum: false }
    }

    pub fn kappa_max(mut self, kappa_max: f64) -> Self {
        self.kappa_max = kappa_max;
        self
    }

    pub fn omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    pub fn real_spectrum(mut self, real: bool) -> Self {
        self.real_spectrum = real;
        self
    }
}

/// Deterministic instance generator (ChaCha8 seeded from a `u64`).
#[derive(Debug, Clone)]
pub struct TupleFactory {
    rng: ChaCha8Rng,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre matrix.
pub fn haar_unitary(rng: &mut ChaCha8Rng, d: usize) -> MatrixOp {
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

impl TupleFactory {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn unitary(&mut self, d: usize) -> MatrixOp {
        haar_unitary(&mut self.rng, d)
    }

    /// `(S, S⁻¹, κ(S))` with singular values spanning `[1, κ]`, `κ ≤ κ_max` log-uniform.
    pub fn similarity(&mut self, d: usize, kappa_max: f64) -> (MatrixOp, MatrixOp, f64) {
        let u = self.unitary(d);
        if kappa_max <= 1.0 || d == 1 {
            let inv = u.adjoint();
            return (u, inv, 1.0);
        }
        let v = self.unitary(d);
        let kappa = (self.rng.random::<f64>() * kappa_max.ln()).exp();
        let mut sigma: Vec<f64> = (0..d)
            .map(|k| match k {
                0 => kappa,
                k if k == d - 1 => 1.0,
                _ => (self.rng.random::<f64>() * kappa.ln()).exp(),
            })
            .collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        let s_diag = DMatrix::from_fn(d, d, |i, j| if i == j { c(sigma[i]) } else { c(0.0) });
        let s_inv_diag = DMatrix::from_fn(d, d, |i, j| if i == j { c(1.0 / sigma[i]) } else { c(0.0) });
        let s = &u * s_diag * v.adjoint();
        let s_inv = &v * s_inv_diag * u.adjoint();
        (s, s_inv, kappa)
    }

    /// Spectrum in the band `Re λ ∈ [ω − spread, ω]` and the sector `|Im λ| ≤ |Re λ|`.
    pub fn spectrum(&mut self, d: usize, omega: f64, spread: f64, real: bool) -> Vec<Complex64> {
        let top = omega.min(-MIN_MARGIN);
        (0..d)
            .map(|_| {
                let re = top - spread * self.rng.random::<f64>();
                let im = if real { 0.0 } else { (2.0 * self.rng.random::<f64>() - 1.0) * re.abs() };
                Complex64::new(re, im)
            })
            .collect()
    }

    pub fn tuple(&mut self, spec: &FactorySpec) -> GeneratorTuple {
        self.family(spec, 1).pop().expect("one tuple")
    }

    /// `count` tuples sharing one similarity `S`, hence jointly commuting.
    pub fn family(&mut self, spec: &FactorySpec, count: usize) -> Vec<GeneratorTuple> {
        let (s, s_inv, kappa) = self.similarity(spec.d, spec.kappa_max);
        (0..count)
            .map(|_| {
                let eigenvalues =
                    (0..spec.n).map(|_| self.spectrum(spec.d, spec.omega, spec.spread, spec.real_spectrum)).collect();
                GeneratorTuple::from_construction(Construction {
                    similarity: s.clone(),
                    similarity_inv: s_inv.clone(),
                    eigenvalues,
                    condition: kappa,
                })
                .expect("factory spectra are dissipative")
            })
            .collect()
    }

    /// A tuple sharing `S` with `base` whose eigenvalues move by a random
    /// amount of modulus at most `size`, kept inside `Re λ ≤ −0.01`.
    pub fn codiagonal_perturbation(&mut self, base: &GeneratorTuple, size: f64) -> GeneratorTuple {
        let c0 = base.construction().expect("factory tuple");
        let eigenvalues = c0
            .eigenvalues
            .iter()
            .map(|e| {
                e.iter()
                    .map(|l| {
                        let shift = Complex64::from_polar(size * self.rng.random::<f64>(), std::f64::consts::TAU * self.rng.random::<f64>());
                        let mut m = l + shift;
                        m.re = m.re.min(-MIN_MARGIN);
                        m
                    })
                    .collect()
            })
            .collect();
        GeneratorTuple::from_construction(Construction { eigenvalues, ..c0.clone() }).expect("dissipative")
    }

    /// Complex Ginibre matrix scaled to operator norm `size`.
    pub fn matrix(&mut self, d: usize, size: f64) -> MatrixOp {
        let m = DMatrix::from_fn(d, d, |_, _| {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let norm = super::operator_norm(&m);
        if norm == 0.0 { m } else { m * c(size / norm) }
    }

    /// Random Hermitian matrix of operator norm `size`.
    pub fn hermitian(&mut self, d: usize, size: f64) -> HermitianPerturbation {
        let g = self.matrix(d, 1.0);
        let mut h = (&g + g.adjoint()) * c(0.5);
        let norm = super::operator_norm(&h);
        if norm > 0.0 {
            h *= c(size / norm);
        }
        let h = (&h + h.adjoint()) * c(0.5);
        HermitianPerturbation::new(h).expect("symmetrized")
    }

    /// Uniform random unit vector in `ℂ^d`.
    pub fn unit_vector(&mut self, d: usize) -> DVector<Complex64> {
        let v = DVector::from_fn(d, |_, _| {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let norm = v.norm();
        v / c(norm)
    }
}

/// Tuple with `n` generators of size `d`, `κ(S) ≤ κ_max`, `Re λ ≤ ω`.
pub fn make_commuting_tuple(n: usize, d: usize, seed: u64, kappa_max: f64, omega: f64) -> GeneratorTuple {
    TupleFactory::new(seed).tuple(&FactorySpec::new(n, d).kappa_max(kappa_max).omega(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{entrywise_sup, identity, operator_norm};

    #[test]
    fn unitary_is_unitary() {
        let mut f = TupleFactory::new(3);
        let u = f.unitary(5);
        assert!(entrywise_sup(&(&u * u.adjoint() - identity(5))) < 1e-13);
    }

    #[test]
    fn similarity_has_requested_condition() {
        let mut f = TupleFactory::new(11);
        let (s, s_inv, kappa) = f.similarity(4, 5.0);
        assert!((1.0..=5.0).contains(&kappa));
        assert!(entrywise_sup(&(&s * &s_inv - identity(4))) < 1e-13);
        let cond = operator_norm(&s) * operator_norm(&s_inv);
        assert!((cond - kappa).abs() < 1e-12 * kappa);
    }

    #[test]
    fn unitary_similarity_gives_m_one() {
        let t = make_commuting_tuple(1, 3, 9, 1.0, -0.5);
        assert_eq!(t.bound_m(), 1.0);
        assert!(t.construction().unwrap().eigenvalues[0].iter().all(|l| l.re <= -0.5));
        assert!(t.omega().unwrap()[0] <= -0.5);
    }

    #[test]
    fn deterministic_and_commuting() {
        let a = make_commuting_tuple(2, 4, 42, 3.0, -0.1);
        let b = make_commuting_tuple(2, 4, 42, 3.0, -0.1);
        assert_eq!(a, b);
        assert!(a.commutation_residual() <= 1e-10);
        assert!(a.grid_sup().unwrap() <= a.bound_m() * (1.0 + 1e-10));
    }
}
