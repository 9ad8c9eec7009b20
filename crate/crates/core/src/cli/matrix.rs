//! Matrix files: a first line with `d`, then `d` rows of `a+bi` tokens.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{identity, operator_norm, Construction, GeneratorTuple, MatrixOp};

/// Parse `a`, `bi`, `a+bi`, `a-bi`, `i` and `-i` with optional exponents.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad complex entry `{token}`"));
    let t = token.trim();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Read one square matrix; blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> Result<MatrixOp> {
    let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let d: usize = first.parse().map_err(|_| Error::Parse(format!("first line must be the dimension, got `{first}`")))?;
    if d == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let row = lines.next().ok_or_else(|| Error::Parse(format!("expected {d} rows, found {i}")))?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != d {
            return Err(Error::Parse(format!("row {} has {} entries, expected {d}", i + 1, entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            m[(i, j)] = parse_complex(e)?;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("more than {d} rows")));
    }
    Ok(m)
}

const EIGEN_RESIDUAL: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e8;

/// A single generator with its eigendecomposition.
///
/// Diagonal input is certified with `S = I`, `M = 1`. Otherwise a
/// diagonalizing `S` is computed; when its eigenvector residual and condition
/// are acceptable the tuple carries `M = κ(S)`, else it is returned
/// uncertified with `M = max ‖exp(tA)‖` on the certification grid.
/// Any eigenvalue with `Re λ > 0` is a spectrum error.
pub fn generator_from_matrix(a: &MatrixOp) -> Result<GeneratorTuple> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse("non-finite matrix entry".into()));
    }
    let d = a.nrows();
    let off_diagonal = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).any(|(i, j)| i != j && a[(i, j)].norm() != 0.0);
    if !off_diagonal {
        return GeneratorTuple::diagonal(vec![(0..d).map(|k| a[(k, k)]).collect()]);
    }
    let eigenvalues: Vec<Complex64> = a
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Domain("Schur decomposition did not converge".into()))?
        .iter()
        .copied()
        .collect();
    if let Some(l) = eigenvalues.iter().find(|l| l.re > 0.0) {
        return Err(Error::Spectrum(format!("eigenvalue {l} has positive real part")));
    }
    let scale = operator_norm(a).max(1.0);
    let mut s = DMatrix::zeros(d, d);
    for (k, &l) in eigenvalues.iter().enumerate() {
        let shifted = a - identity(d) * l;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (kmin, _) =
            svd.singular_values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("nonempty");
        let v = v_t.row(kmin).adjoint();
        s.set_column(k, &v);
    }
    let inverse = s.clone().try_inverse();
    if let Some(s_inv) = inverse {
        let rebuilt = &s * crate::operators::diag(&eigenvalues) * &s_inv;
        let kappa = operator_norm(&s) * operator_norm(&s_inv);
        if kappa.is_finite() && kappa < MAX_CONDITION && operator_norm(&(&rebuilt - a)) <= EIGEN_RESIDUAL * scale {
            return GeneratorTuple::from_construction(Construction {
                similarity: s,
                similarity_inv: s_inv,
                eigenvalues: vec![eigenvalues],
                condition: kappa,
            });
        }
    }
    let probe = GeneratorTuple::uncertified(vec![a.clone()], 1.0)?;
    let m = probe.grid_sup()?.max(1.0);
    GeneratorTuple::uncertified(vec![a.clone()], m)
}
