//! Dense complex matrices: exponentials, symmetric norms, Hermitian groups and
//! commuting generator tuples.

mod expm;
mod factory;
mod tuple;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use expm::{expm, expm_complex, expm_minus_identity, EXPM_NORM_LIMIT};
pub use factory::{haar_unitary, make_commuting_tuple, FactorySpec, TupleFactory};
pub use tuple::{Construction, GeneratorTuple};

use crate::error::{Error, Result};
use crate::quadrature::Accumulate;

/// A `d × d` complex matrix.
pub type MatrixOp = DMatrix<Complex64>;

impl Accumulate for MatrixOp {
    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.zip_apply(other, |a, b| *a += b * w);
    }

    fn norm(&self) -> f64 {
        entrywise_sup(self)
    }
}

pub fn identity(d: usize) -> MatrixOp {
    DMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> MatrixOp {
    DMatrix::zeros(d, d)
}

/// Diagonal matrix from complex entries.
pub fn diag(entries: &[Complex64]) -> MatrixOp {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Diagonal matrix from real entries.
pub fn diag_real(entries: &[f64]) -> MatrixOp {
    let e: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    diag(&e)
}

/// Matrix from real rows.
pub fn from_real_rows(rows: &[&[f64]]) -> MatrixOp {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn entrywise_sup(m: &MatrixOp) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn norm_one(m: &MatrixOp) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn frobenius(m: &MatrixOp) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in decreasing order.
pub fn singular_values(m: &MatrixOp) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn operator_norm(m: &MatrixOp) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn trace(m: &MatrixOp) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `AB − BA`.
pub fn commutator(a: &MatrixOp, b: &MatrixOp) -> MatrixOp {
    a * b - b * a
}

/// `U A U⁻¹`.
pub fn conjugate(u: &MatrixOp, a: &MatrixOp, u_inv: &MatrixOp) -> MatrixOp {
    u * a * u_inv
}

/// Symmetric norms of the Schatten family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealNorm {
    Operator,
    Trace,
    Frobenius,
    Schatten(f64),
}

impl IdealNorm {
    pub fn norm(&self, m: &MatrixOp) -> f64 {
        match *self {
            IdealNorm::Operator => operator_norm(m),
            IdealNorm::Frobenius => frobenius(m),
            IdealNorm::Trace => singular_values(m).iter().sum(),
            IdealNorm::Schatten(p) => {
                let s = singular_values(m);
                let top = s.first().copied().unwrap_or(0.0);
                if top == 0.0 {
                    return 0.0;
                }
                top * s.iter().map(|x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    /// Valid `--norm` spellings, for diagnostics.
    pub fn names() -> &'static str {
        "operator, trace, frobenius, schatten:<p ≥ 1>"
    }
}

impl fmt::Display for IdealNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealNorm::Operator => f.write_str("operator"),
            IdealNorm::Trace => f.write_str("trace"),
            IdealNorm::Frobenius => f.write_str("frobenius"),
            IdealNorm::Schatten(p) => write!(f, "schatten:{p}"),
        }
    }
}

impl FromStr for IdealNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown norm `{s}`; valid: {}", IdealNorm::names()));
        match s.trim() {
            "operator" | "op" | "spectral" => Ok(IdealNorm::Operator),
            "trace" | "schatten:1" => Ok(IdealNorm::Trace),
            "frobenius" | "frob" | "schatten:2" => Ok(IdealNorm::Frobenius),
            other => {
                let p: f64 = other.strip_prefix("schatten:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if p >= 1.0 && p.is_finite() {
                    Ok(IdealNorm::Schatten(p))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// A self-adjoint matrix `H`, generator of the unitary group `V_H(s) = e^{isH}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPerturbation {
    h: MatrixOp,
}

impl HermitianPerturbation {
    pub fn new(h: MatrixOp) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Dimension("H must be square".into()));
        }
        let gap = entrywise_sup(&(&h - h.adjoint()));
        if gap > 1e-12 * entrywise_sup(&h).max(1.0) {
            return Err(Error::Domain(format!("H is not self-adjoint (‖H − H*‖ = {gap:e})")));
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> &MatrixOp {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

/// `V_H(s) = exp(isH)`.
pub fn unitary_at(h: &HermitianPerturbation, s: f64) -> Result<MatrixOp> {
    expm_complex(&h.h, Complex64::new(0.0, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        let m = diag_real(&[3.0, -4.0]);
        assert!((IdealNorm::Trace.norm(&m) - 7.0).abs() < 1e-13);
        assert!((IdealNorm::Operator.norm(&m) - 4.0).abs() < 1e-13);
        assert!((IdealNorm::Frobenius.norm(&m) - 5.0).abs() < 1e-13);
        assert!((IdealNorm::Schatten(3.0).norm(&m) - 91f64.powf(1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&identity(3)), Complex64::new(3.0, 0.0));
        assert_eq!(trace(&from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn norm_names_parse() {
        for (s, n) in [
            ("operator", IdealNorm::Operator),
            ("trace", IdealNorm::Trace),
            ("frobenius", IdealNorm::Frobenius),
            ("schatten:3", IdealNorm::Schatten(3.0)),
        ] {
            assert_eq!(s.parse::<IdealNorm>().unwrap(), n);
            assert_eq!(n.to_string().parse::<IdealNorm>().unwrap(), n);
        }
        assert!("schatten:0.5".parse::<IdealNorm>().is_err());
        assert!("max".parse::<IdealNorm>().is_err());
    }

    #[test]
    fn pauli_x_group() {
        let h = HermitianPerturbation::new(from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let v = unitary_at(&h, std::f64::consts::PI).unwrap();
        assert!(entrywise_sup(&(v + identity(2))) < 1e-14);
        let s = 0.7f64;
        let v = unitary_at(&h, s).unwrap();
        let expect = identity(2) * Complex64::new(s.cos(), 0.0) + h.matrix() * Complex64::new(0.0, s.sin());
        assert!(entrywise_sup(&(v - expect)) < 1e-15);
        assert_eq!(unitary_at(&HermitianPerturbation::new(zeros(3)).unwrap(), 2.0).unwrap(), identity(3));
    }

    #[test]
    fn non_hermitian_rejected() {
        assert!(HermitianPerturbation::new(from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])).is_err());
    }
}
