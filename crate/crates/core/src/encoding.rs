//! Diagonal function encodings and the block-encoding wrapper.
//!
//! Register convention shared by every circuit in the crate: system qubits
//! are most significant, then the index register, then the flag qubit. A
//! diagonal encoding on `N` nodes therefore acts on `log2(N) + 1` qubits
//! with basis index `2j + flag`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functions::{root_of_unity, SupNormGrid, UnitCircleFunction};
use crate::numerics::{ensure_square, operator_norm, unitarity_defect, CMatrix, Gate, ZERO};

/// Slack allowed when checking `|f| ≤ 1`.
const NORM_SLACK: f64 = 1e-12;

/// `U_{f,N}`: block diagonal in the index register with one 2×2 flag block
/// per node, `[[f_j, −s_j], [s_j, f̄_j]]` with `s_j = √(1 − |f_j|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEncoding {
    samples: Vec<Complex64>,
    blocks: Vec<Gate>,
}

impl DiagonalEncoding {
    /// Encoding whose flag blocks are built from already-validated samples.
    fn from_samples(samples: Vec<Complex64>) -> Self {
        let blocks = samples
            .iter()
            .map(|&f| {
                let s = (1.0 - f.norm_sqr()).max(0.0).sqrt();
                flag_block(f, s)
            })
            .collect();
        Self { samples, blocks }
    }

    pub fn node_count(&self) -> usize {
        self.samples.len()
    }

    pub fn index_qubits(&self) -> usize {
        self.node_count().trailing_zeros() as usize
    }

    /// Index qubits plus the flag.
    pub fn qubits(&self) -> usize {
        self.index_qubits() + 1
    }

    /// `d` when the node count is `4d`.
    pub fn d(&self) -> usize {
        self.node_count() / 4
    }

    /// `m = log2 d`.
    pub fn m(&self) -> usize {
        self.index_qubits().saturating_sub(2)
    }

    /// `f(e^{2πij/N})` for `j = 0, …, N − 1`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// The 2×2 flag block for index `j`.
    pub fn blocks(&self) -> &[Gate] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        2 * self.node_count()
    }

    pub fn matrix(&self) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim(), self.dim());
        for (j, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    u[(2 * j + r, 2 * j + c)] = b[r][c];
                }
            }
        }
        u
    }

    /// `⟨j′|⟨0| U |j⟩|0⟩` as an `N × N` matrix.
    pub fn flag_sector(&self) -> CMatrix {
        let u = self.matrix();
        CMatrix::from_fn(self.node_count(), self.node_count(), |r, c| u[(2 * r, 2 * c)])
    }

    /// `‖self − other‖_op`, computed block by block.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.node_count() != other.node_count() {
            return Err(Error::DimensionMismatch { expected: self.node_count(), found: other.node_count() });
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| gate_norm(&gate_sub(a, b)))
            .fold(0.0, f64::max))
    }

    pub fn samples_json(&self) -> String {
        let export = EncodingSamples {
            node_count: self.node_count(),
            samples: self.samples.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&export).expect("plain data serializes")
    }
}

/// JSON export of the encoded samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSamples {
    pub node_count: usize,
    pub samples: Vec<[f64; 2]>,
}

fn flag_block(f: Complex64, s: f64) -> Gate {
    let s = Complex64::new(s, 0.0);
    [[f, -s], [s, f.conj()]]
}

fn gate_sub(a: &Gate, b: &Gate) -> Gate {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// Largest singular value of a 2×2 matrix.
fn gate_norm(g: &Gate) -> f64 {
    let frob = g.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).norm();
    let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
    ((frob + disc) / 2.0).sqrt()
}

/// Samples of `f` at the `count`-th roots of unity after a grid check of `|f| ≤ 1`.
fn checked_samples(f: &UnitCircleFunction, count: usize) -> Result<Vec<Complex64>> {
    let grid = SupNormGrid::new(crate::functions::DEFAULT_GRID_POINTS, Some(count / 4).filter(|&d| d > 0))?;
    let observed = f.grid_sup(&grid);
    if observed > 1.0 + NORM_SLACK {
        return Err(Error::NormViolation { observed });
    }
    let mut samples = f.samples_at_roots(count);
    for z in samples.iter_mut() {
        let r = z.norm();
        if r > 1.0 + NORM_SLACK {
            return Err(Error::NormViolation { observed: r });
        }
        if r > 1.0 {
            *z /= r;
        }
    }
    Ok(samples)
}

/// `U_{f,4d}` with `d = 2^m`, acting on `m + 3` qubits.
pub fn build_diagonal_encoding(f: &UnitCircleFunction, m: usize) -> Result<DiagonalEncoding> {
    if m == 0 {
        return Err(invalid("diagonal encoding needs m ≥ 1"));
    }
    build_diagonal_encoding_on_nodes(f, 4 << m)
}

/// `U_{f,N}` on any power-of-two number of nodes `N ≥ 2`.
pub fn build_diagonal_encoding_on_nodes(f: &UnitCircleFunction, node_count: usize) -> Result<DiagonalEncoding> {
    if node_count < 2 || !node_count.is_power_of_two() {
        return Err(invalid(format!("node count {node_count} is not a power of two ≥ 2")));
    }
    Ok(DiagonalEncoding::from_samples(checked_samples(f, node_count)?))
}

/// How a quantized oracle rounds each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizationScheme {
    /// `f_j = cos φ · e^{iχ}` with `φ ∈ [0, π/2]` rounded to `b` fractional
    /// bits of a quarter turn and `χ` to `b` fractional bits of a full turn.
    /// Both rotation angles of the flag block move by `O(2^{−b})`, so
    /// `δ ≤ (π + π/4) 2^{−b}`.
    #[default]
    Polar,
    /// Real and imaginary parts rounded to `b` fractional bits and pulled back
    /// into the unit disk. Near `|f| = 1` the completion `√(1 − |f|²)` turns an
    /// `O(2^{−b})` rounding into an `O(2^{−b/2})` change of the block.
    Cartesian,
}

/// `U_{f,4d}` built from a `b`-bit oracle, and its realized deviation
/// `δ = ‖Ũ − U‖_op` from the exact encoding.
pub fn build_quantized_diagonal_encoding(f: &UnitCircleFunction, m: usize, bits: u32) -> Result<(DiagonalEncoding, f64)> {
    build_quantized_diagonal_encoding_with(f, m, bits, QuantizationScheme::Polar)
}

pub fn build_quantized_diagonal_encoding_with(
    f: &UnitCircleFunction,
    m: usize,
    bits: u32,
    scheme: QuantizationScheme,
) -> Result<(DiagonalEncoding, f64)> {
    if bits < 2 || bits > 52 {
        return Err(invalid(format!("{bits} bits is outside 2..=52")));
    }
    let exact = build_diagonal_encoding(f, m)?;
    let quantized = quantize(&exact, bits, scheme);
    let delta = exact.distance(&quantized)?;
    Ok((quantized, delta))
}

/// Re-rounds the samples of an exact encoding.
pub fn quantize(exact: &DiagonalEncoding, bits: u32, scheme: QuantizationScheme) -> DiagonalEncoding {
    let levels = 1u64 << bits;
    let scale = levels as f64;
    match scheme {
        QuantizationScheme::Polar => {
            let (samples, blocks) = exact
                .samples()
                .iter()
                .zip(exact.blocks())
                .map(|(&f, block)| {
                    // From the stored pair, not acos |f|: near |f| = 1 the
                    // off-diagonal carries √ε of any roundoff in |f|².
                    let phi = block[1][0].re.atan2(f.norm());
                    let phi_q = (phi / FRAC_PI_2 * scale).round() / scale * FRAC_PI_2;
                    let chi = f.arg().rem_euclid(TAU);
                    let chi_steps = ((chi / TAU * scale).round() as u64) % levels;
                    let f_q = root_of_unity(chi_steps as usize, levels as usize) * phi_q.cos();
                    (f_q, flag_block(f_q, phi_q.sin()))
                })
                .unzip();
            DiagonalEncoding { samples, blocks }
        }
        QuantizationScheme::Cartesian => {
            let samples = exact
                .samples()
                .iter()
                .map(|&f| {
                    let q = Complex64::new((f.re * scale).round() / scale, (f.im * scale).round() / scale);
                    let r = q.norm();
                    if r > 1.0 {
                        q / r
                    } else {
                        q
                    }
                })
                .collect();
            DiagonalEncoding::from_samples(samples)
        }
    }
}

/// Ancilla placement around the system register: `high` ancillas above it
/// and `low` ancillas below it. The encoded block sits where all ancillas
/// are `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaLayout {
    pub high: usize,
    pub low: usize,
}

impl AncillaLayout {
    pub fn low(low: usize) -> Self {
        Self { high: 0, low }
    }

    pub fn total(&self) -> usize {
        self.high + self.low
    }

    /// Full-register index of system basis state `i` with all ancillas in `|0⟩`.
    pub fn embed(&self, i: usize) -> usize {
        i << self.low
    }
}

/// The raw block `⟨0^a| U |0^a⟩` of a dense unitary.
pub fn extract_block(u: &CMatrix, layout: AncillaLayout) -> Result<CMatrix> {
    let dim = ensure_square(u)?;
    let ancilla_dim = 1usize << layout.total();
    if dim % ancilla_dim != 0 {
        return Err(Error::DimensionMismatch { expected: ancilla_dim, found: dim });
    }
    let sys = dim / ancilla_dim;
    Ok(CMatrix::from_fn(sys, sys, |r, c| u[(layout.embed(r), layout.embed(c))]))
}

type UnitaryBuilder = Arc<dyn Fn() -> CMatrix + Send + Sync>;

/// A unitary held densely or produced on first use.
#[derive(Clone)]
struct UnitaryHandle {
    cell: Arc<OnceLock<CMatrix>>,
    builder: Option<UnitaryBuilder>,
}

impl UnitaryHandle {
    fn dense(u: CMatrix) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(u);
        Self { cell: Arc::new(cell), builder: None }
    }

    fn deferred(builder: UnitaryBuilder) -> Self {
        Self { cell: Arc::new(OnceLock::new()), builder: Some(builder) }
    }

    fn get(&self) -> &CMatrix {
        self.cell.get_or_init(|| (self.builder.as_ref().expect("deferred unitary has a builder"))())
    }
}

/// An `(α, a, ε)` block encoding: `‖A − α ⟨0^a|U|0^a⟩‖ ≤ ε`.
///
/// The block is kept separately from the unitary, which large circuits
/// only materialize on request.
#[derive(Clone)]
pub struct BlockEncoding {
    alpha: f64,
    layout: AncillaLayout,
    epsilon: f64,
    block: CMatrix,
    unitary: UnitaryHandle,
    note: Option<String>,
}

impl fmt::Debug for BlockEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockEncoding")
            .field("alpha", &self.alpha)
            .field("layout", &self.layout)
            .field("epsilon", &self.epsilon)
            .field("target_dim", &self.target_dim())
            .field("note", &self.note)
            .finish_non_exhaustive()
    }
}

impl BlockEncoding {
    pub fn from_unitary(unitary: CMatrix, alpha: f64, layout: AncillaLayout, epsilon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let block = extract_block(&unitary, layout)?;
        Ok(Self { alpha, layout, epsilon, block, unitary: UnitaryHandle::dense(unitary), note: None })
    }

    /// Block known up front; the unitary is built by `builder` when asked for.
    pub fn deferred(
        block: CMatrix,
        alpha: f64,
        layout: AncillaLayout,
        epsilon: f64,
        builder: impl Fn() -> CMatrix + Send + Sync + 'static,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        ensure_square(&block)?;
        Ok(Self {
            alpha,
            layout,
            epsilon,
            block,
            unitary: UnitaryHandle::deferred(Arc::new(builder)),
            note: None,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ancillas(&self) -> usize {
        self.layout.total()
    }

    pub fn layout(&self) -> AncillaLayout {
        self.layout
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn target_dim(&self) -> usize {
        self.block.nrows()
    }

    /// `⟨0^a|U|0^a⟩`, without the factor `α`.
    pub fn block(&self) -> &CMatrix {
        &self.block
    }

    /// `α ⟨0^a|U|0^a⟩`.
    pub fn encoded(&self) -> CMatrix {
        &self.block * Complex64::new(self.alpha, 0.0)
    }

    pub fn unitary(&self) -> &CMatrix {
        self.unitary.get()
    }

    /// Unitarity of `U` and the block-norm bound, both checked on the dense unitary.
    pub fn check_invariants(&self) -> Result<()> {
        let defect = unitarity_defect(self.unitary());
        if defect > crate::numerics::UNITARY_TOL {
            return Err(invalid(format!("block-encoding unitary off by {defect:.3e}")));
        }
        let norm = operator_norm(&self.encoded())?;
        if norm > self.alpha + 1e-9 {
            return Err(Error::NormViolation { observed: norm });
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("scale factor {alpha} is not positive")));
    }
    Ok(())
}

/// Outcome of [`verify_block_encoding`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockVerification {
    pub error: f64,
    pub epsilon: f64,
    pub pass: bool,
}

/// `‖target − α ⟨0^a|U|0^a⟩‖_op`, passing when within `ε + 1e-9`.
pub fn verify_block_encoding(be: &BlockEncoding, target: &CMatrix) -> Result<BlockVerification> {
    if target.shape() != be.block().shape() {
        return Err(Error::DimensionMismatch { expected: be.target_dim(), found: target.nrows().max(target.ncols()) });
    }
    let error = operator_norm(&(target - be.encoded()))?;
    Ok(BlockVerification { error, epsilon: be.epsilon(), pass: error <= be.epsilon() + 1e-9 })
}

/// Zero matrix helper for targets of the trivial encodings.
pub fn zero_block(dim: usize) -> CMatrix {
    CMatrix::from_element(dim, dim, ZERO)
}
