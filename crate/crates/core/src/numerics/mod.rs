//! Dense complex linear algebra used by every construction in the crate.
//!
//! Operators are plain `DMatrix<Complex64>` values. Qubit registers are laid
//! out big-endian: qubit 0 is the most significant bit of a basis index.

mod gates;
pub mod random;
mod spectral;

pub use gates::{apply_gate_left, qubit_support, Control, Gate, HADAMARD, PAULI_X};
pub use spectral::{
    hermitian_sqrt, matrix_function_oracle, principal_log_unitary, BranchCutPolicy,
    SpectralDecomposition,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unitarity threshold shared by constructors that accept a "unitary" argument.
pub const UNITARY_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest singular value, from a full SVD.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    if !is_finite(m) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.singular_values().iter().copied().fold(0.0, f64::max))
}

/// Operator norm for matrices known to be finite.
pub(crate) fn norm(m: &CMatrix) -> f64 {
    operator_norm(m).unwrap_or(f64::NAN)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖M†M − I‖_op`. The Frobenius norm bounds the operator norm from above, so
/// the SVD is skipped whenever that bound is already tiny.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mut gram = m.adjoint() * m;
    for k in 0..gram.nrows() {
        gram[(k, k)] -= ONE;
    }
    let frob = frobenius_norm(&gram);
    if frob < 1e-13 {
        frob
    } else {
        norm(&gram)
    }
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    unitarity_defect(m) <= tol
}

/// Largest entry of `|M − M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `‖M†M − MM†‖_op`.
pub fn normality_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mh = m.adjoint();
    norm(&(&mh * m - m * &mh))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diagonal(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        })
    }
}

pub fn ensure_unitary(m: &CMatrix, what: &str) -> Result<()> {
    ensure_square(m)?;
    if !is_finite(m) {
        return Err(invalid(format!("{what} has non-finite entries")));
    }
    let defect = unitarity_defect(m);
    if defect > UNITARY_TOL {
        return Err(invalid(format!(
            "{what} is not unitary (‖M†M − I‖ = {defect:.3e})"
        )));
    }
    Ok(())
}

/// Number of qubits of a register of dimension `dim`, if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// `U^k` for a unitary `U`; negative exponents use the adjoint.
pub fn unitary_power(u: &CMatrix, k: i64) -> CMatrix {
    let base = if k < 0 { u.adjoint() } else { u.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = identity(u.nrows());
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Sub-block `rows × cols` starting at `(r0, c0)`.
pub fn sub_block(m: &CMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
    m.view((r0, c0), (rows, cols)).into_owned()
}

/// Pads `m` with zeros to `rows × cols`.
pub fn zero_pad(m: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}
