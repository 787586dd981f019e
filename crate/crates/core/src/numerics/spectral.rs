use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ensure_square, frobenius_norm, hermiticity_defect, is_finite, norm, normality_defect, CMatrix, ONE};
use crate::error::{invalid, Error, Result};

const NORMALITY_TOL: f64 = 1e-9;
const BRANCH_CUT_TOL: f64 = 1e-8;

/// Eigen-decomposition `M = V Λ V†` of a normal matrix, with orthonormal `V`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of_hermitian(m: &CMatrix) -> Result<Self> {
        let n = ensure_square(m)?;
        if !is_finite(m) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let scale = frobenius_norm(m).max(1.0);
        if hermiticity_defect(m) > 1e-10 * scale {
            return Err(Error::Precondition("matrix is not Hermitian".into()));
        }
        let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        if n == 0 {
            return Ok(Self { eigenvalues: vec![], eigenvectors: sym });
        }
        let eig = sym.symmetric_eigen();
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// Diagonalises a normal matrix through its commuting Hermitian parts
    /// `A = (M + M†)/2`, `B = (M − M†)/2i`. A generic combination `A + γB`
    /// has the same eigenvectors as `M`; the eigenvalues of `M` are then read
    /// off as Rayleigh quotients. A few values of `γ` are tried in case one
    /// happens to merge distinct eigenvalues.
    pub fn of_normal(m: &CMatrix) -> Result<Self> {
        ensure_square(m)?;
        if !is_finite(m) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let scale = norm(m).max(1.0);
        let defect = normality_defect(m);
        if defect > NORMALITY_TOL * scale {
            return Err(Error::Precondition(format!(
                "matrix is not normal (‖M†M − MM†‖ = {defect:.3e})"
            )));
        }
        let mh = m.adjoint();
        let herm = (m + &mh) * Complex64::new(0.5, 0.0);
        let anti = (m - &mh) * Complex64::new(0.0, -0.5);
        let mut best: Option<(f64, Self)> = None;
        for gamma in [0.618_033_988_749_894_9, 1.324_717_957_244_746, 0.414_213_562_373_095, 2.718_281_828] {
            let k = &herm + &anti * Complex64::new(gamma, 0.0);
            let eig = k.symmetric_eigen();
            let v = eig.eigenvectors;
            let mv = m * &v;
            let eigenvalues: Vec<Complex64> = (0..v.ncols())
                .map(|c| v.column(c).dotc(&mv.column(c)))
                .collect();
            let candidate = Self { eigenvalues, eigenvectors: v };
            let err = norm(&(candidate.reconstruct() - m));
            if err <= 1e-10 * scale {
                return Ok(candidate);
            }
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, candidate));
            }
        }
        let (err, candidate) = best.expect("at least one attempt");
        if err <= 1e-9 * scale {
            Ok(candidate)
        } else {
            Err(Error::Precondition(format!(
                "spectral decomposition did not converge (residual {err:.3e})"
            )))
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V φ(Λ) V†`.
    pub fn apply(&self, phi: impl Fn(Complex64) -> Complex64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = phi(lambda);
            for z in scaled.column_mut(c).iter_mut() {
                *z *= w;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|z| z)
    }
}

/// Ground-truth `φ(M)` for a normal matrix via its eigendecomposition.
pub fn matrix_function_oracle(m: &CMatrix, phi: impl Fn(Complex64) -> Complex64) -> Result<CMatrix> {
    let scale = frobenius_norm(m).max(1.0);
    let decomposition = if hermiticity_defect(m) <= 1e-12 * scale {
        SpectralDecomposition::of_hermitian(m)?
    } else {
        SpectralDecomposition::of_normal(m)?
    };
    Ok(decomposition.apply(phi))
}

/// What to do with an eigenvalue sitting on the branch cut at `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchCutPolicy {
    #[default]
    Reject,
    /// Map such eigenvalues to phase `−π`.
    Allow,
}

/// Hermitian `G` with spectrum in `[−π, π)` and `e^{iG} = W`.
pub fn principal_log_unitary(w: &CMatrix, policy: BranchCutPolicy) -> Result<CMatrix> {
    super::ensure_unitary(w, "argument of the principal logarithm")?;
    let decomposition = SpectralDecomposition::of_normal(w)?;
    for &lambda in &decomposition.eigenvalues {
        let distance = (lambda + ONE).norm();
        if distance < BRANCH_CUT_TOL && policy == BranchCutPolicy::Reject {
            return Err(Error::BranchCut { distance });
        }
    }
    let g = decomposition.apply(|lambda| {
        let mut phase = lambda.arg();
        if phase >= PI - 1e-15 || (lambda + ONE).norm() < BRANCH_CUT_TOL {
            phase = -PI;
        }
        Complex64::new(phase, 0.0)
    });
    Ok((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let decomposition = SpectralDecomposition::of_hermitian(m)?;
    Ok(decomposition.apply(|lambda| Complex64::new(lambda.re.max(0.0).sqrt(), 0.0)))
}

/// `e^{iH}` for Hermitian `H`.
#[cfg(test)]
pub(crate) fn exp_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    Ok(SpectralDecomposition::of_hermitian(h)?.apply(|lambda| (super::I * lambda).exp()))
}
