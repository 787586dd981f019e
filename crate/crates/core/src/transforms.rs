//! Functions of block-encoded Hermitian matrices and singular value
//! transformation, both driven by the QSP circuit.
//!
//! For a self-inverse block encoding `U_H` of `H`, the product
//! `W = (2Π − 1) U_H` is a unitary whose eigenphases are `±arccos λ` over
//! the eigenvalues `λ` of `H`, so `W = e^{iG}` and `g(H) = ⟨0^a| g(cos G) |0^a⟩`.
//! Lifting `g` to `f(e^{iθ}) = g(cos θ)` turns this into `f(W)`, which the
//! QSP circuit block-encodes.

use std::sync::Arc;

use num_complex::Complex64;

use crate::analysis::fourier_truncation_upper_bound_default;
use crate::encoding::{build_diagonal_encoding, AncillaLayout, BlockEncoding};
use crate::error::{invalid, Error, Result};
use crate::functions::{lift_interval_function, IntervalFunction, Parity};
use crate::interpolation::ensure_power_of_two;
use crate::numerics::{
    ensure_square, hermitian_sqrt, hermiticity_defect, identity, matrix_function_oracle, operator_norm,
    principal_log_unitary, qubit_count, sub_block, unitarity_defect, zero_pad, BranchCutPolicy, CMatrix, ONE,
};
use crate::qsp::{QspCircuit, QueryLedger};

const HERMITIAN_TOL: f64 = 1e-10;
/// `‖H‖` must stay this far below 1.
const NORM_MARGIN: f64 = 1e-9;
const PARITY_TOL: f64 = 1e-12;
const PARITY_POINTS: usize = 1 << 12;

/// `H` together with a self-inverse unitary `U_H` whose `⟨0^a|·|0^a⟩` block is `H`.
/// The ancillas are the most significant qubits of `U_H`.
#[derive(Debug, Clone)]
pub struct HermitianBlockEncoding {
    h: CMatrix,
    u_h: CMatrix,
    ancillas: usize,
}

impl HermitianBlockEncoding {
    /// Validates a caller-supplied self-inverse encoding.
    pub fn new(h: CMatrix, u_h: CMatrix, ancillas: usize) -> Result<Self> {
        let n = ensure_square(&h)?;
        let dim = ensure_square(&u_h)?;
        if dim != n << ancillas {
            return Err(Error::DimensionMismatch { expected: n << ancillas, found: dim });
        }
        if unitarity_defect(&u_h) > 1e-10 {
            return Err(invalid("U_H is not unitary"));
        }
        if (&u_h * &u_h - identity(dim)).norm() > 1e-10 {
            return Err(invalid("U_H is not self-inverse"));
        }
        if (sub_block(&u_h, 0, 0, n, n) - &h).norm() > 1e-10 {
            return Err(invalid("top-left block of U_H differs from H"));
        }
        Ok(Self { h, u_h, ancillas })
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u_h
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn system_dim(&self) -> usize {
        self.h.nrows()
    }

    /// `2Π − 1` with `Π = |0^a⟩⟨0^a| ⊗ 1`.
    pub fn reflection(&self) -> CMatrix {
        reflection(self.ancillas, self.system_dim())
    }

    /// `W = (2Π − 1) U_H`.
    pub fn walk_operator(&self) -> CMatrix {
        // Left-multiplying by the reflection flips the sign of every row outside the block.
        let mut w = self.u_h.clone();
        let n = self.system_dim();
        for r in n..w.nrows() {
            for z in w.row_mut(r).iter_mut() {
                *z = -*z;
            }
        }
        w
    }
}

pub fn reflection(ancillas: usize, system_dim: usize) -> CMatrix {
    let dim = system_dim << ancillas;
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| if i < system_dim { ONE } else { -ONE }))
}

/// `U_H = [[H, S], [S, −H]]` with `S = √(1 − H²)`: one ancilla, Hermitian
/// and unitary at once.
pub fn self_inverse_block_encoding(h: &CMatrix) -> Result<HermitianBlockEncoding> {
    let n = ensure_square(h)?;
    let scale = h.norm().max(1.0);
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL * scale {
        return Err(invalid(format!("H is not Hermitian (defect {defect:.3e})")));
    }
    let observed = operator_norm(h)?;
    if observed > 1.0 - NORM_MARGIN {
        return Err(Error::NormViolation { observed });
    }
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let s = hermitian_sqrt(&(identity(n) - &h * &h))?;
    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&h);
    u.view_mut((0, n), (n, n)).copy_from(&s);
    u.view_mut((n, 0), (n, n)).copy_from(&s);
    u.view_mut((n, n), (n, n)).copy_from(&(-&h));
    Ok(HermitianBlockEncoding { h, u_h: u, ancillas: 1 })
}

/// `‖g(H) − ⟨0^a| g(cos G) |0^a⟩‖` with `e^{iG} = (2Π − 1) U_H`.
pub fn verify_arccos_lemma(hbe: &HermitianBlockEncoding, g: &IntervalFunction) -> Result<f64> {
    let big_g = principal_log_unitary(&hbe.walk_operator(), BranchCutPolicy::Reject)?;
    let lifted = matrix_function_oracle(&big_g, |lambda| g.eval(lambda.re.cos()))?;
    let n = hbe.system_dim();
    let block = sub_block(&lifted, 0, 0, n, n);
    let direct = matrix_function_oracle(hbe.h(), |lambda| g.eval(lambda.re))?;
    operator_norm(&(direct - block))
}

/// A block encoding of `g(H)` together with its query counts.
#[derive(Debug, Clone)]
pub struct FunctionEncoding {
    pub encoding: BlockEncoding,
    pub ledger: QueryLedger,
    /// `UB_d` of the lifted function.
    pub truncation_bound: f64,
}

/// `(√2, a + m + 3, (1 + √2) UB_d)` block encoding of `g(H)`, built by running
/// the QSP circuit on `W = (2Π − 1) U_H` with the lift of `g`.
pub fn fhm_block_encode(hbe: &HermitianBlockEncoding, g: &IntervalFunction, d: usize) -> Result<FunctionEncoding> {
    ensure_power_of_two(d)?;
    let f = lift_interval_function(g);
    let m = d.trailing_zeros() as usize;
    let enc = build_diagonal_encoding(&f, m)?;
    let circuit = Arc::new(QspCircuit::new(&hbe.walk_operator(), &enc)?);
    let ub = fourier_truncation_upper_bound_default(&f, d)?.upper;
    let n = hbe.system_dim();
    let block = sub_block(&circuit.block(), 0, 0, n, n);
    let layout = AncillaLayout { high: hbe.ancillas(), low: circuit.ancilla_qubits() };
    let builder = Arc::clone(&circuit);
    let encoding = BlockEncoding::deferred(block, std::f64::consts::SQRT_2, layout, 0.0, move || builder.unitary())?
        .with_epsilon((1.0 + std::f64::consts::SQRT_2) * ub);
    Ok(FunctionEncoding { encoding, ledger: circuit.ledger(), truncation_bound: ub })
}

/// `A` with `‖A‖ ≤ 1` and a definite-parity `g` to apply to its singular values.
#[derive(Debug, Clone)]
pub struct SingularValueProblem {
    a: CMatrix,
    g: IntervalFunction,
    parity: Parity,
}

impl SingularValueProblem {
    pub fn new(a: CMatrix, g: IntervalFunction, parity: Parity) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("empty matrix"));
        }
        let observed = operator_norm(&a)?;
        if observed > 1.0 {
            return Err(Error::NormViolation { observed });
        }
        let defect = g.parity_defect(parity, PARITY_POINTS);
        if defect > PARITY_TOL {
            return Err(invalid(format!("{} is not {parity:?} (defect {defect:.3e})", g.name())));
        }
        Ok(Self { a, g, parity })
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn g(&self) -> &IntervalFunction {
        &self.g
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Shape of `g^{SV}(A)`: that of `A` for odd `g`, `cols × cols` for even `g`.
    pub fn output_shape(&self) -> (usize, usize) {
        match self.parity {
            Parity::Odd => self.a.shape(),
            Parity::Even => (self.a.ncols(), self.a.ncols()),
        }
    }

    /// Side of the square power-of-two padding of `A`.
    pub fn padded_dim(&self) -> usize {
        self.a.nrows().max(self.a.ncols()).next_power_of_two()
    }

    /// `H_A = [[0, A†], [A, 0]]` on the padded `A`, dilation qubit most significant.
    pub fn dilation(&self) -> CMatrix {
        let n = self.padded_dim();
        let a = zero_pad(&self.a, n, n);
        let mut h = CMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, n), (n, n)).copy_from(&a.adjoint());
        h.view_mut((n, 0), (n, n)).copy_from(&a);
        h
    }
}

/// `g^{SV}(A)` from a singular value decomposition: `W g(Σ) V†` for odd `g`,
/// and `h(A†A)` with `h(λ) = g(√λ)` for even `g`, which also assigns `g(0)`
/// to the kernel of `A`.
pub fn svd_oracle(problem: &SingularValueProblem) -> Result<CMatrix> {
    let g = problem.g();
    match problem.parity() {
        Parity::Odd => {
            let svd = problem.a().clone().svd(true, true);
            let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
            let mut scaled = u;
            for (c, &sigma) in svd.singular_values.iter().enumerate() {
                let w = g.eval(sigma);
                for z in scaled.column_mut(c).iter_mut() {
                    *z *= w;
                }
            }
            Ok(scaled * v_t)
        }
        Parity::Even => {
            let gram = problem.a().adjoint() * problem.a();
            let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
            matrix_function_oracle(&gram, |lambda| g.eval(lambda.re.max(0.0).sqrt()))
        }
    }
}

/// Result of [`qsvt`].
#[derive(Debug, Clone)]
pub struct QsvtOutput {
    /// Encodes the padded `g^{SV}(A)`; for odd `g` the unitary carries an
    /// extra NOT on the dilation qubit so the block sits at all-zero ancillas.
    pub encoding: BlockEncoding,
    /// `α ⟨·|block|·⟩` restricted to the original rows and columns of `A`.
    pub transformed: CMatrix,
    pub ledger: QueryLedger,
    pub truncation_bound: f64,
}

/// Singular value transformation of `A` by the QSP circuit on the self-inverse
/// encoding of `H_A`.
pub fn qsvt(problem: &SingularValueProblem, d: usize) -> Result<QsvtOutput> {
    let hbe = self_inverse_block_encoding(&problem.dilation())?;
    let fhm = fhm_block_encode(&hbe, problem.g(), d)?;
    let n = problem.padded_dim();
    let full = fhm.encoding.block();
    let row0 = match problem.parity() {
        Parity::Even => 0,
        Parity::Odd => n,
    };
    let block = sub_block(full, row0, 0, n, n);
    let (rows, cols) = problem.output_shape();
    let transformed = sub_block(&block, 0, 0, rows, cols) * Complex64::new(fhm.encoding.alpha(), 0.0);

    let inner = fhm.encoding.clone();
    let parity = problem.parity();
    let layout = AncillaLayout { high: 2, low: inner.layout().low };
    let total = inner.block().nrows() << inner.layout().total();
    let system_qubits = qubit_count(n).expect("padded to a power of two") + 1;
    let encoding = BlockEncoding::deferred(block, fhm.encoding.alpha(), layout, fhm.encoding.epsilon(), move || {
        let mut u = inner.unitary().clone();
        if parity == Parity::Odd {
            flip_dilation_qubit(&mut u, total, system_qubits, layout.low);
        }
        u
    })?;
    Ok(QsvtOutput { encoding, transformed, ledger: fhm.ledger, truncation_bound: fhm.truncation_bound })
}

/// Left-multiplies by `X` on qubit 1, the dilation qubit of `H_A`, which sits
/// just below the ancilla of the self-inverse encoding.
fn flip_dilation_qubit(u: &mut CMatrix, dim: usize, system_qubits: usize, low: usize) {
    // Register: [U_H ancilla][H_A qubit][padded system][low ancillas].
    let bit = 1usize << (system_qubits - 1 + low);
    for r in (0..dim).filter(|r| r & bit == 0) {
        u.swap_rows(r, r | bit);
    }
}
