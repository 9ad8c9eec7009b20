//! Scaling-and-squaring Padé approximation of the matrix exponential.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{norm_one, MatrixOp};
use crate::error::{Error, Result};

/// Largest `‖zA‖₁` accepted.
pub const EXPM_NORM_LIMIT: f64 = 1e8;

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0,
    90.0, 1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `exp(tA)`.
pub fn expm(a: &MatrixOp, t: f64) -> Result<MatrixOp> {
    expm_complex(a, c(t))
}

/// `exp(zA)` for complex `z`.
pub fn expm_complex(a: &MatrixOp, z: Complex64) -> Result<MatrixOp> {
    let m = a * z;
    let norm = if m.iter().all(|x| x.is_finite()) { norm_one(&m) } else { f64::NAN };
    if !norm.is_finite() || norm > EXPM_NORM_LIMIT {
        return Err(Error::ExpmOverflow(norm));
    }
    Ok(expm_pade(&m, norm))
}

/// `exp(tA) − I` without cancellation for small `‖tA‖`.
pub fn expm_minus_identity(a: &MatrixOp, t: f64) -> Result<MatrixOp> {
    let x = a * c(t);
    let norm = if x.iter().all(|z| z.is_finite()) { norm_one(&x) } else { f64::NAN };
    if !norm.is_finite() || norm > EXPM_NORM_LIMIT {
        return Err(Error::ExpmOverflow(norm));
    }
    if norm > 0.5 {
        let mut e = expm_pade(&x, norm);
        for k in 0..e.nrows() {
            e[(k, k)] -= c(1.0);
        }
        return Ok(e);
    }
    let mut term = x.clone();
    let mut sum = x.clone();
    for j in 2..40 {
        term = &term * &x * c(1.0 / j as f64);
        sum += &term;
        if norm_one(&term) <= 1e-18 * norm {
            break;
        }
    }
    Ok(sum)
}

fn odd_even(m: &MatrixOp, powers: &[MatrixOp], b: &[f64]) -> (MatrixOp, MatrixOp) {
    let d = m.nrows();
    let ident = DMatrix::<Complex64>::identity(d, d);
    let mut u_inner = &ident * c(b[1]);
    let mut v = &ident * c(b[0]);
    for (k, p) in powers.iter().enumerate() {
        let deg = 2 * (k + 1);
        if deg + 1 < b.len() {
            u_inner += p * c(b[deg + 1]);
        }
        if deg < b.len() {
            v += p * c(b[deg]);
        }
    }
    (m * u_inner, v)
}

fn solve(u: &MatrixOp, v: &MatrixOp) -> MatrixOp {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular inside the θ range")
}

fn expm_pade(m: &MatrixOp, norm: f64) -> MatrixOp {
    let d = m.nrows();
    if norm == 0.0 {
        return DMatrix::identity(d, d);
    }
    let m2 = m * m;
    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            let mut powers = vec![m2.clone()];
            while powers.len() < deg / 2 {
                let next = powers.last().unwrap() * &m2;
                powers.push(next);
            }
            let b: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = odd_even(m, &powers, b);
            return solve(&u, &v);
        }
    }
    let theta13 = THETA[4].1;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let scale = c(0.5f64.powi(s));
    let a = m * scale;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let ident = DMatrix::<Complex64>::identity(d, d);
    let b = &B13;
    let u_hi = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u_inner = &a6 * u_hi + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &ident * c(b[1]);
    let u = &a * u_inner;
    let v_hi = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = &a6 * v_hi + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &ident * c(b[0]);
    let mut r = solve(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
