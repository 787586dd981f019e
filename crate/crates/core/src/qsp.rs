//! The angle-free QSP circuit and its state-vector simulation.
//!
//! The full register is `system ⊗ index ⊗ flag`, most significant first,
//! with `N = 4d` index states. The circuit is
//!
//! ```text
//! P2† · 𝒲† · (QFT ⊗ 1) · U_{f,4d} · (QFT† ⊗ 1) · 𝒲 · P4
//! ```
//!
//! where `P4 = H^{⊗(m+2)}` prepares `|+_{4d}⟩` and `P2` differs from it only
//! on the top two index qubits, where a zero-controlled NOT turns the top
//! Hadamard's output into `|+_{2d}⟩`. Conjugating `U_{f,4d}` by the QFT gives
//! `f(V_{4d})` on the flag-`|0⟩` sector, so the all-zero ancilla block is
//! `f_d(U)/√2`.
//!
//! Operators are never multiplied out. Each stage acts on state columns, so
//! the block costs one simulation per system basis state and the full
//! unitary one per basis state of the whole register.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{AncillaLayout, BlockEncoding, DiagonalEncoding};
use crate::error::{invalid, Error, Result};
use crate::numerics::{
    ensure_unitary, frobenius_norm, identity, qubit_count, qubit_support, unitarity_defect, CMatrix, Control, Gate,
    HADAMARD, ONE, PAULI_X, ZERO,
};

/// Uses of each oracle, counted with exponent weight: a controlled `U^{2^t}`
/// costs `2^t` controlled-`U` queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub cu_uses: u64,
    pub cu_dagger_uses: u64,
    pub uf_uses: u64,
    /// Uncontrolled `U†` applications; only the `√d1`-scaled variant needs them.
    #[serde(default)]
    pub u_dagger_uses: u64,
}

impl QueryLedger {
    /// `(4d − 1, 4d − 1, 1)`.
    pub fn expected_for(d: usize) -> Self {
        let n = 4 * d as u64 - 1;
        Self { cu_uses: n, cu_dagger_uses: n, uf_uses: 1, u_dagger_uses: 0 }
    }

    fn add(self, other: Self) -> Self {
        Self {
            cu_uses: self.cu_uses + other.cu_uses,
            cu_dagger_uses: self.cu_dagger_uses + other.cu_dagger_uses,
            uf_uses: self.uf_uses + other.uf_uses,
            u_dagger_uses: self.u_dagger_uses + other.u_dagger_uses,
        }
    }
}

/// `𝒲_U = Σ_j U^j ⊗ |j⟩⟨j|` over `d1` index states, realized as one
/// controlled `U^{2^t}` per index qubit.
#[derive(Debug, Clone)]
pub struct IndexedPowerOperator {
    base: CMatrix,
    index_qubits: usize,
    /// `U^{2^t}` for `t = 0, …, index_qubits − 1`.
    binary_powers: Vec<CMatrix>,
    ledger: QueryLedger,
}

pub fn build_indexed_power(u: &CMatrix, d1: usize) -> Result<IndexedPowerOperator> {
    ensure_unitary(u, "base unitary")?;
    if d1 < 2 || !d1.is_power_of_two() {
        return Err(invalid(format!("index dimension {d1} is not a power of two ≥ 2")));
    }
    let index_qubits = d1.trailing_zeros() as usize;
    let mut binary_powers = Vec::with_capacity(index_qubits);
    let mut p = u.clone();
    for t in 0..index_qubits {
        if t > 0 {
            p = &p * &p;
        }
        binary_powers.push(p.clone());
    }
    Ok(IndexedPowerOperator {
        base: u.clone(),
        index_qubits,
        binary_powers,
        ledger: QueryLedger { cu_uses: d1 as u64 - 1, ..QueryLedger::default() },
    })
}

impl IndexedPowerOperator {
    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    pub fn index_qubits(&self) -> usize {
        self.index_qubits
    }

    pub fn index_dim(&self) -> usize {
        1 << self.index_qubits
    }

    pub fn system_dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    /// `U^j` as the product of the binary powers selected by the bits of `j`.
    pub fn block(&self, j: usize) -> CMatrix {
        let mut acc = identity(self.system_dim());
        for (t, p) in self.binary_powers.iter().enumerate() {
            if (j >> t) & 1 == 1 {
                acc = p * acc;
            }
        }
        acc
    }

    /// Dense `𝒲_U` on `system ⊗ index`.
    pub fn matrix(&self) -> CMatrix {
        let (n, d1) = (self.system_dim(), self.index_dim());
        let mut w = CMatrix::zeros(n * d1, n * d1);
        for j in 0..d1 {
            let b = self.block(j);
            for r in 0..n {
                for c in 0..n {
                    w[(r * d1 + j, c * d1 + j)] = b[(r, c)];
                }
            }
        }
        w
    }
}

/// `QFT|k⟩ = (1/√N) Σ_j ω^{jk} |j⟩` with `ω = e^{2πi/N}` on `qubits` qubits.
pub fn build_qft(qubits: usize) -> CMatrix {
    let n = 1usize << qubits;
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| crate::functions::root_of_unity(j * k % n, n) * scale)
}

/// `V_{d1} = Σ_k z_k |φ_k⟩⟨φ_k|` with `|φ_k⟩ = QFT|k⟩`, summed eigenpair by
/// eigenpair. It equals the cyclic shift `|j⟩ → |j − 1 mod d1⟩`.
pub fn build_shift_spectrum_operator(d1: usize) -> Result<CMatrix> {
    if d1 < 2 || !d1.is_power_of_two() {
        return Err(invalid(format!("shift dimension {d1} is not a power of two ≥ 2")));
    }
    let q = build_qft(d1.trailing_zeros() as usize);
    let mut v = CMatrix::zeros(d1, d1);
    for k in 0..d1 {
        let phi = q.column(k);
        let zk = crate::functions::root_of_unity(k, d1);
        v += phi * phi.adjoint() * zk;
    }
    Ok(v)
}

/// `QFT · diag(z_k) · QFT†`, the second construction of `V_{d1}`.
pub fn shift_via_qft(d1: usize) -> Result<CMatrix> {
    if d1 < 2 || !d1.is_power_of_two() {
        return Err(invalid(format!("shift dimension {d1} is not a power of two ≥ 2")));
    }
    let q = build_qft(d1.trailing_zeros() as usize);
    let z = CMatrix::from_diagonal(&DVector::from_fn(d1, |k, _| crate::functions::root_of_unity(k, d1)));
    Ok(&q * z * q.adjoint())
}

/// Shape of the simulated register: `system ⊗ index ⊗ flag`.
#[derive(Debug, Clone, Copy)]
struct Register {
    system: usize,
    index_qubits: usize,
}

impl Register {
    fn nodes(&self) -> usize {
        1 << self.index_qubits
    }

    fn dim(&self) -> usize {
        self.system * self.nodes() * 2
    }

    #[inline]
    fn at(&self, s: usize, j: usize, flag: usize) -> usize {
        (s * self.nodes() + j) * 2 + flag
    }

    /// Single-qubit gate on index qubit `q` (0 = most significant).
    fn index_gate(&self, state: &mut [Complex64], gate: &Gate, q: usize, control: Option<Control>) {
        let k = self.index_qubits;
        let bit = 1 << (k - 1 - q);
        let ctrl = control.map(|c| (1 << (k - 1 - c.qubit), c.on_one));
        for s in 0..self.system {
            for j in (0..self.nodes()).filter(|j| j & bit == 0) {
                if let Some((mask, on_one)) = ctrl {
                    if ((j & mask) != 0) != on_one {
                        continue;
                    }
                }
                for flag in 0..2 {
                    let (i0, i1) = (self.at(s, j, flag), self.at(s, j | bit, flag));
                    let (a, b) = (state[i0], state[i1]);
                    state[i0] = gate[0][0] * a + gate[0][1] * b;
                    state[i1] = gate[1][0] * a + gate[1][1] * b;
                }
            }
        }
    }

    fn hadamard_layer(&self, state: &mut [Complex64], qubits: std::ops::Range<usize>) {
        for q in qubits {
            self.index_gate(state, &HADAMARD, q, None);
        }
    }

    /// `|+_{2d}⟩` preparation: Hadamard on index qubit 0, a zero-controlled
    /// NOT onto qubit 1, Hadamards on the rest.
    fn prepare_half_window(&self, state: &mut [Complex64]) {
        self.index_gate(state, &HADAMARD, 0, None);
        self.index_gate(state, &PAULI_X, 1, Some(Control::zero(0)));
        self.hadamard_layer(state, 2..self.index_qubits);
    }

    fn unprepare_half_window(&self, state: &mut [Complex64]) {
        self.hadamard_layer(state, 2..self.index_qubits);
        self.index_gate(state, &PAULI_X, 1, Some(Control::zero(0)));
        self.index_gate(state, &HADAMARD, 0, None);
    }

    /// `m` on the system register for every index with bit `t` set.
    fn controlled_system(&self, state: &mut [Complex64], m: &CMatrix, t: usize) {
        let mut x = DVector::from_element(self.system, ZERO);
        for j in (0..self.nodes()).filter(|j| (j >> t) & 1 == 1) {
            for flag in 0..2 {
                self.system_apply_at(state, m, j, flag, &mut x);
            }
        }
    }

    fn system_everywhere(&self, state: &mut [Complex64], m: &CMatrix) {
        let mut x = DVector::from_element(self.system, ZERO);
        for j in 0..self.nodes() {
            for flag in 0..2 {
                self.system_apply_at(state, m, j, flag, &mut x);
            }
        }
    }

    fn system_apply_at(&self, state: &mut [Complex64], m: &CMatrix, j: usize, flag: usize, x: &mut DVector<Complex64>) {
        for s in 0..self.system {
            x[s] = state[self.at(s, j, flag)];
        }
        let y = m * &*x;
        for s in 0..self.system {
            state[self.at(s, j, flag)] = y[s];
        }
    }

    /// Dense matrix on the index register, identity on system and flag.
    fn index_matrix(&self, state: &mut [Complex64], m: &CMatrix) {
        let n = self.nodes();
        let mut x = DVector::from_element(n, ZERO);
        for s in 0..self.system {
            for flag in 0..2 {
                for j in 0..n {
                    x[j] = state[self.at(s, j, flag)];
                }
                let y = m * &x;
                for j in 0..n {
                    state[self.at(s, j, flag)] = y[j];
                }
            }
        }
    }

    fn flag_blocks(&self, state: &mut [Complex64], enc: &DiagonalEncoding) {
        for s in 0..self.system {
            for (j, b) in enc.blocks().iter().enumerate() {
                let (i0, i1) = (self.at(s, j, 0), self.at(s, j, 1));
                let (a, c) = (state[i0], state[i1]);
                state[i0] = b[0][0] * a + b[0][1] * c;
                state[i1] = b[1][0] * a + b[1][1] * c;
            }
        }
    }

    /// `|j⟩ → |j − shift mod N⟩`.
    fn cyclic_shift(&self, state: &mut [Complex64], shift: usize) {
        let n = self.nodes();
        let old = state.to_vec();
        for s in 0..self.system {
            for j in 0..n {
                for flag in 0..2 {
                    state[self.at(s, (j + n - shift % n) % n, flag)] = old[self.at(s, j, flag)];
                }
            }
        }
    }

    fn dense(&self, apply: impl Fn(&mut [Complex64])) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        let mut column = vec![ZERO; dim];
        for c in 0..dim {
            column.iter_mut().for_each(|z| *z = ZERO);
            column[c] = ONE;
            apply(&mut column);
            out.column_mut(c).copy_from_slice(&column);
        }
        out
    }

    /// `⟨s′,0,0| C |s,0,0⟩` by simulating the `system` input columns.
    fn zero_block(&self, apply: impl Fn(&mut [Complex64])) -> CMatrix {
        let mut block = CMatrix::zeros(self.system, self.system);
        let mut column = vec![ZERO; self.dim()];
        for s in 0..self.system {
            column.iter_mut().for_each(|z| *z = ZERO);
            column[self.at(s, 0, 0)] = ONE;
            apply(&mut column);
            for r in 0..self.system {
                block[(r, s)] = column[self.at(r, 0, 0)];
            }
        }
        block
    }
}

/// One of the three stages of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// `QFT† · 𝒲 · P4`: phase estimation of `U` into the index register.
    PhaseEstimation,
    /// `U_{f,4d}`: the diagonal encoding, a rotation of the flag per index.
    DiagonalEncoding,
    /// `P2† · 𝒲† · QFT`: inverse phase estimation with the top Hadamard
    /// replaced by a Hadamard plus zero-controlled NOT.
    ModifiedInversePhaseEstimation,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::PhaseEstimation, Stage::DiagonalEncoding, Stage::ModifiedInversePhaseEstimation];
}

/// The assembled circuit for `f_d(U)` with `α = √2`.
#[derive(Debug, Clone)]
pub struct QspCircuit {
    d: usize,
    register: Register,
    power: IndexedPowerOperator,
    adjoint_powers: Vec<CMatrix>,
    qft: CMatrix,
    qft_adjoint: CMatrix,
    encoding: DiagonalEncoding,
    ledger: QueryLedger,
}

impl QspCircuit {
    pub fn new(u: &CMatrix, enc: &DiagonalEncoding) -> Result<Self> {
        let n = enc.node_count();
        if n < 8 || !n.is_power_of_two() {
            return Err(invalid(format!("encoding has {n} nodes; the circuit needs 4d with d = 2^m, m ≥ 1")));
        }
        if qubit_count(u.nrows()).is_none() {
            return Err(invalid(format!("system dimension {} is not a power of two", u.nrows())));
        }
        let power = build_indexed_power(u, n)?;
        let adjoint_powers = power.binary_powers.iter().map(|p| p.adjoint()).collect();
        let qft = build_qft(power.index_qubits());
        let ledger = power
            .ledger()
            .add(QueryLedger { cu_dagger_uses: n as u64 - 1, uf_uses: 1, ..QueryLedger::default() });
        Ok(Self {
            d: n / 4,
            register: Register { system: u.nrows(), index_qubits: power.index_qubits() },
            qft_adjoint: qft.adjoint(),
            qft,
            power,
            adjoint_powers,
            encoding: enc.clone(),
            ledger,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.register.index_qubits - 2
    }

    pub fn system_dim(&self) -> usize {
        self.register.system
    }

    pub fn system_qubits(&self) -> usize {
        self.register.system.trailing_zeros() as usize
    }

    /// Index qubits plus flag, `m + 3`.
    pub fn ancilla_qubits(&self) -> usize {
        self.register.index_qubits + 1
    }

    pub fn total_qubits(&self) -> usize {
        self.system_qubits() + self.ancilla_qubits()
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    pub fn indexed_power(&self) -> &IndexedPowerOperator {
        &self.power
    }

    fn apply_w(&self, state: &mut [Complex64]) {
        for (t, p) in self.power.binary_powers.iter().enumerate() {
            self.register.controlled_system(state, p, t);
        }
    }

    fn apply_w_adjoint(&self, state: &mut [Complex64]) {
        for (t, p) in self.adjoint_powers.iter().enumerate().rev() {
            self.register.controlled_system(state, p, t);
        }
    }

    pub fn apply_stage(&self, stage: Stage, state: &mut [Complex64]) {
        let reg = &self.register;
        match stage {
            Stage::PhaseEstimation => {
                reg.hadamard_layer(state, 0..reg.index_qubits);
                self.apply_w(state);
                reg.index_matrix(state, &self.qft_adjoint);
            }
            Stage::DiagonalEncoding => reg.flag_blocks(state, &self.encoding),
            Stage::ModifiedInversePhaseEstimation => {
                reg.index_matrix(state, &self.qft);
                self.apply_w_adjoint(state);
                reg.unprepare_half_window(state);
            }
        }
    }

    pub fn apply(&self, state: &mut [Complex64]) {
        for stage in Stage::ALL {
            self.apply_stage(stage, state);
        }
    }

    /// `⟨0^{m+3}| C |0^{m+3}⟩ = f_d(U)/√2`.
    pub fn block(&self) -> CMatrix {
        self.register.zero_block(|s| self.apply(s))
    }

    pub fn unitary(&self) -> CMatrix {
        self.register.dense(|s| self.apply(s))
    }

    pub fn stage_matrix(&self, stage: Stage) -> CMatrix {
        self.register.dense(|s| self.apply_stage(stage, s))
    }

    /// `P2† P4`, the product of the outer stages; identity everywhere except
    /// on the top two index qubits.
    pub fn outer_stage_product(&self) -> CMatrix {
        self.register.dense(|s| {
            self.apply_stage(Stage::PhaseEstimation, s);
            self.apply_stage(Stage::ModifiedInversePhaseEstimation, s);
        })
    }

    /// Full-register positions of the index qubits.
    pub fn index_qubit_positions(&self) -> std::ops::Range<usize> {
        let s = self.system_qubits();
        s..s + self.register.index_qubits
    }

    fn prepare_uniform(&self, state: &mut [Complex64]) {
        self.register.hadamard_layer(state, 0..self.register.index_qubits);
    }

    fn prepare_half_window(&self, state: &mut [Complex64]) {
        self.register.prepare_half_window(state);
    }
}

/// Block encoding of `f_d(U)` with `α = √2` and `a = m + 3` ancillas below
/// the system register.
pub fn assemble_qsp_block_encoding(u: &CMatrix, enc: &DiagonalEncoding) -> Result<(BlockEncoding, QueryLedger)> {
    let circuit = QspCircuit::new(u, enc)?;
    Ok((qsp_block_encoding(circuit.clone()), circuit.ledger()))
}

/// Wraps an assembled circuit; the dense unitary is only simulated on demand.
pub fn qsp_block_encoding(circuit: QspCircuit) -> BlockEncoding {
    let circuit = Arc::new(circuit);
    let block = circuit.block();
    let layout = AncillaLayout::low(circuit.ancilla_qubits());
    let builder = Arc::clone(&circuit);
    BlockEncoding::deferred(block, std::f64::consts::SQRT_2, layout, 0.0, move || builder.unitary())
        .expect("√2 is a valid scale")
}

/// `f(U)/√d1 = (U†)^d ⟨0| [1 ⊗ f(V_{d1}) V_{d1}^d] 𝒲_U |+_{d1}⟩`, exact for
/// Laurent polynomials of degree at most `d`.
#[derive(Debug, Clone)]
pub struct ShiftedWindowCircuit {
    d: usize,
    register: Register,
    power: IndexedPowerOperator,
    u_dagger_d: CMatrix,
    qft: CMatrix,
    qft_adjoint: CMatrix,
    encoding: DiagonalEncoding,
    ledger: QueryLedger,
}

impl ShiftedWindowCircuit {
    pub fn new(u: &CMatrix, enc: &DiagonalEncoding, d: usize) -> Result<Self> {
        let d1 = enc.node_count();
        if d1 <= 2 * d {
            return Err(Error::Aliasing(format!("d1 = {d1} must exceed 2d = {}", 2 * d)));
        }
        if qubit_count(u.nrows()).is_none() {
            return Err(invalid(format!("system dimension {} is not a power of two", u.nrows())));
        }
        let power = build_indexed_power(u, d1)?;
        let qft = build_qft(power.index_qubits());
        let ledger = power
            .ledger()
            .add(QueryLedger { uf_uses: 1, u_dagger_uses: d as u64, ..QueryLedger::default() });
        Ok(Self {
            d,
            register: Register { system: u.nrows(), index_qubits: power.index_qubits() },
            u_dagger_d: crate::numerics::unitary_power(u, -(d as i64)),
            qft_adjoint: qft.adjoint(),
            qft,
            power,
            encoding: enc.clone(),
            ledger,
        })
    }

    pub fn d1(&self) -> usize {
        self.register.nodes()
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    pub fn apply(&self, state: &mut [Complex64]) {
        let reg = &self.register;
        reg.hadamard_layer(state, 0..reg.index_qubits);
        for (t, p) in self.power.binary_powers.iter().enumerate() {
            reg.controlled_system(state, p, t);
        }
        reg.cyclic_shift(state, self.d);
        reg.index_matrix(state, &self.qft_adjoint);
        reg.flag_blocks(state, &self.encoding);
        reg.index_matrix(state, &self.qft);
        reg.system_everywhere(state, &self.u_dagger_d);
    }

    pub fn block(&self) -> CMatrix {
        self.register.zero_block(|s| self.apply(s))
    }

    pub fn unitary(&self) -> CMatrix {
        self.register.dense(|s| self.apply(s))
    }
}

/// The `√d1`-scaled variant. Exact for degree-`≤ d` Laurent polynomials but
/// with a scale factor growing with `d1`.
pub fn assemble_shifted_window_encoding(u: &CMatrix, enc: &DiagonalEncoding, d: usize) -> Result<(BlockEncoding, QueryLedger)> {
    let circuit = Arc::new(ShiftedWindowCircuit::new(u, enc, d)?);
    let block = circuit.block();
    let layout = AncillaLayout::low(circuit.register.index_qubits + 1);
    let alpha = (circuit.d1() as f64).sqrt();
    let builder = Arc::clone(&circuit);
    let be = BlockEncoding::deferred(block, alpha, layout, 0.0, move || builder.unitary())?
        .with_note("pedagogical: suboptimal scale factor √d1");
    Ok((be, circuit.ledger()))
}

/// Summary of one stage for [`CircuitReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub description: String,
    pub dimension: usize,
    /// Full-register qubits the stage acts on non-trivially.
    pub support: Vec<usize>,
    pub trace: [f64; 2],
    pub frobenius_norm: f64,
    pub unitarity_defect: f64,
}

/// Three-stage decomposition of an assembled circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitReport {
    pub d: usize,
    pub m: usize,
    pub system_qubits: usize,
    pub ancilla_qubits: usize,
    pub total_qubits: usize,
    pub alpha: f64,
    pub stages: Vec<StageReport>,
    pub ledger: QueryLedger,
    /// Support of `stage3 · stage1`; the outer stages would be mutually
    /// inverse without the single-gate modification.
    pub modification_support: Vec<usize>,
    pub modification: String,
    /// `‖ |+_{2d}⟩ − |+_{4d}⟩ ‖` for the two index states the outer stages prepare.
    pub projection_difference: f64,
    /// `⌈(m + 2)(m + 3)/2⌉`: controlled rotations of one textbook QFT, reported as a formula.
    pub qft_gate_count_formula: usize,
    pub unitarity_defect: f64,
}

const SUPPORT_TOL: f64 = 1e-10;

pub fn circuit_structure_report(circ: &QspCircuit) -> CircuitReport {
    let total = circ.total_qubits();
    let stages = Stage::ALL
        .iter()
        .map(|&stage| {
            let m = circ.stage_matrix(stage);
            let trace = m.trace();
            StageReport {
                stage,
                description: match stage {
                    Stage::PhaseEstimation => "Hadamard layer, controlled U^(2^t), inverse QFT",
                    Stage::DiagonalEncoding => "U_{f,4d}: per-index flag rotation",
                    Stage::ModifiedInversePhaseEstimation => {
                        "QFT, controlled U^(-2^t), Hadamard layer with zero-controlled NOT on index qubit 1"
                    }
                }
                .to_string(),
                dimension: m.nrows(),
                support: qubit_support(&m, total, SUPPORT_TOL),
                trace: [trace.re, trace.im],
                frobenius_norm: frobenius_norm(&m),
                unitarity_defect: unitarity_defect(&m),
            }
        })
        .collect();

    let reg = &circ.register;
    let mut uniform = vec![ZERO; reg.dim()];
    uniform[0] = ONE;
    let mut half = uniform.clone();
    circ.prepare_uniform(&mut uniform);
    circ.prepare_half_window(&mut half);
    let projection_difference = uniform.iter().zip(&half).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();

    let k = reg.index_qubits;
    CircuitReport {
        d: circ.d(),
        m: circ.m(),
        system_qubits: circ.system_qubits(),
        ancilla_qubits: circ.ancilla_qubits(),
        total_qubits: total,
        alpha: std::f64::consts::SQRT_2,
        stages,
        ledger: circ.ledger(),
        modification_support: qubit_support(&circ.outer_stage_product(), total, SUPPORT_TOL),
        modification: "Hadamard on the second index qubit replaced by a zero-controlled NOT from the first".to_string(),
        projection_difference,
        qft_gate_count_formula: (k * (k + 1)).div_ceil(2),
        unitarity_defect: unitarity_defect(&circ.unitary()),
    }
}

/// `|+_{N}⟩` restricted to indices `[lo, hi)`, normalized.
pub fn window_state(n: usize, lo: usize, hi: usize) -> DVector<Complex64> {
    let amp = 1.0 / ((hi - lo) as f64).sqrt();
    DVector::from_fn(n, |j, _| if (lo..hi).contains(&j) { Complex64::new(amp, 0.0) } else { ZERO })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::encoding::{build_diagonal_encoding, build_diagonal_encoding_on_nodes};
    use crate::functions::{lookup, Params, UnitCircleFunction};
    use crate::interpolation::{averaged_interpolant, LaurentPolynomial};
    use crate::numerics::random::{random_unitary, seeded};
    use crate::numerics::{apply_gate_left, c64, kron, matrix_function_oracle, operator_norm, unitary_power};

    fn laurent_test(degree: usize, seed: u64) -> UnitCircleFunction {
        let params = Params::from([("degree".to_string(), degree as f64), ("seed".to_string(), seed as f64)]);
        lookup("laurent_test", &params).unwrap().circle()
    }

    fn f_of(u: &CMatrix, f: &UnitCircleFunction) -> CMatrix {
        matrix_function_oracle(u, |z| f.eval(z)).unwrap()
    }

    fn sqrt2() -> Complex64 {
        c64(std::f64::consts::SQRT_2, 0.0)
    }

    #[test]
    fn indexed_power_examples() {
        let w = build_indexed_power(&identity(2), 8).unwrap();
        assert!((w.matrix() - identity(16)).norm() < 1e-15);

        let z = CMatrix::from_diagonal(&DVector::from_vec(vec![ONE, -ONE]));
        let w = build_indexed_power(&z, 4).unwrap();
        for j in 0..4 {
            let expected = if j % 2 == 0 { identity(2) } else { z.clone() };
            assert!((w.block(j) - expected).norm() < 1e-15);
        }

        let u = random_unitary(4, &mut seeded(1));
        let w = build_indexed_power(&u, 8).unwrap();
        let mut direct = identity(4);
        for _ in 0..5 {
            direct = &u * direct;
        }
        assert!((w.block(5) - direct).norm() < 1e-11);
        assert!(unitarity_defect(&w.matrix()) < 1e-10);
        assert_eq!(w.ledger().cu_uses, 7);
        assert!(build_indexed_power(&(u * c64(2.0, 0.0)), 8).is_err());
    }

    #[test]
    fn qft_examples() {
        let q1 = build_qft(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q1.clone() - CMatrix::from_fn(2, 2, |r, c| HADAMARD[r][c])).norm() < 1e-15);
        assert!(q1.iter().all(|z| (z.norm() - h).abs() < 1e-15));
        let q = build_qft(4);
        assert!((&q * q.adjoint() - identity(16)).norm() < 1e-11);
        let plus = q.column(0);
        assert!(plus.iter().all(|z| (z - c64(0.25, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn qft_matches_textbook_gate_network() {
        // H, controlled phases R_k, then a bit-reversal swap network.
        let k = 4;
        let mut m = identity(1 << k);
        for q in 0..k {
            apply_gate_left(&mut m, &HADAMARD, q, None, k);
            for r in q + 1..k {
                let phase = Complex64::from_polar(1.0, TAU / (1 << (r - q + 1)) as f64);
                let rk: Gate = [[ONE, ZERO], [ZERO, phase]];
                apply_gate_left(&mut m, &rk, q, Some(Control::one(r)), k);
            }
        }
        for q in 0..k / 2 {
            let (a, b) = (q, k - 1 - q);
            apply_gate_left(&mut m, &PAULI_X, b, Some(Control::one(a)), k);
            apply_gate_left(&mut m, &PAULI_X, a, Some(Control::one(b)), k);
            apply_gate_left(&mut m, &PAULI_X, b, Some(Control::one(a)), k);
        }
        assert!((m - build_qft(k)).norm() < 1e-12);
    }

    #[test]
    fn shift_operator_examples() {
        for d1 in [4, 8, 16] {
            let v = build_shift_spectrum_operator(d1).unwrap();
            assert!((&v - shift_via_qft(d1).unwrap()).norm() < 1e-11);
            let shift = CMatrix::from_fn(d1, d1, |r, c| if r == (c + d1 - 1) % d1 { ONE } else { ZERO });
            assert!((&v - shift).iter().all(|z| z.norm() < 1e-12));
            assert!((unitary_power(&v, d1 as i64) - identity(d1)).norm() < 1e-10);
            let phi0 = build_qft(d1.trailing_zeros() as usize).column(0).into_owned();
            assert!(((phi0.adjoint() * &v * &phi0)[(0, 0)] - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_function_gives_u() {
        let u = random_unitary(2, &mut seeded(2));
        let enc = build_diagonal_encoding(&UnitCircleFunction::new("z", 1.0, |z| z), 1).unwrap();
        let (be, ledger) = assemble_qsp_block_encoding(&u, &enc).unwrap();
        assert!((be.encoded() - &u).norm() < 1e-10);
        assert_eq!(ledger, QueryLedger::expected_for(2));
        assert_eq!(be.ancillas(), 4);
        assert_eq!(be.alpha(), std::f64::consts::SQRT_2);
    }

    #[test]
    fn exact_on_degree_d_laurent_polynomials() {
        for seed in 0..4 {
            let f = laurent_test(4, seed);
            let u = random_unitary(4, &mut seeded(100 + seed));
            let enc = build_diagonal_encoding(&f, 2).unwrap();
            let (be, _) = assemble_qsp_block_encoding(&u, &enc).unwrap();
            let err = operator_norm(&(be.encoded() - f_of(&u, &f))).unwrap();
            assert!(err < 1e-9, "seed {seed}: {err}");
        }
    }

    #[test]
    fn block_equals_fd_for_non_smooth_f() {
        let f = lookup("abs_power_c", &Params::new()).unwrap().circle();
        let u = random_unitary(2, &mut seeded(5));
        for m in [1, 2, 3] {
            let d = 1 << m;
            let enc = build_diagonal_encoding(&f, m).unwrap();
            let (be, ledger) = assemble_qsp_block_encoding(&u, &enc).unwrap();
            let fd = averaged_interpolant(&f, d).unwrap();
            let target = matrix_function_oracle(&u, |z| fd.evaluate_unchecked(z)).unwrap();
            assert!(operator_norm(&(be.encoded() - target)).unwrap() < 1e-9);
            assert_eq!(ledger, QueryLedger::expected_for(d));
        }
    }

    #[test]
    fn block_matches_dense_formula() {
        // √2 ⟨+_{2d}| 𝒲† [1 ⊗ f(V)] 𝒲 |+_{4d}⟩ from dense matrices.
        let (m, d) = (1, 2);
        let n = 4 * d;
        let f = lookup("exp_it_cos", &Params::new()).unwrap().circle();
        let u = random_unitary(2, &mut seeded(6));
        let w = build_indexed_power(&u, n).unwrap().matrix();
        let fv = matrix_function_oracle(&build_shift_spectrum_operator(n).unwrap(), |z| f.eval(z)).unwrap();
        let middle = w.adjoint() * kron(&identity(2), &fv) * &w;
        let plus4 = window_state(n, 0, n);
        let plus2 = window_state(n, d, 3 * d);
        let left = kron(&identity(2), &CMatrix::from_row_slice(1, n, plus2.adjoint().as_slice()));
        let right = kron(&identity(2), &CMatrix::from_column_slice(n, 1, plus4.as_slice()));
        let oracle = left * middle * right * sqrt2();

        let enc = build_diagonal_encoding(&f, m).unwrap();
        let (be, _) = assemble_qsp_block_encoding(&u, &enc).unwrap();
        assert!((be.encoded() - oracle).norm() < 1e-10);
    }

    #[test]
    fn dense_unitary_agrees_with_block_simulation() {
        let u = random_unitary(2, &mut seeded(7));
        let f = lookup("gibbs", &Params::new()).unwrap().circle();
        let enc = build_diagonal_encoding(&f, 1).unwrap();
        let (be, _) = assemble_qsp_block_encoding(&u, &enc).unwrap();
        assert!(unitarity_defect(be.unitary()) < 1e-10);
        let from_dense = crate::encoding::extract_block(be.unitary(), be.layout()).unwrap();
        assert!((from_dense - be.block()).norm() < 1e-13);
        be.check_invariants().unwrap();
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let u = random_unitary(3, &mut seeded(8));
        let enc = build_diagonal_encoding(&UnitCircleFunction::new("z", 1.0, |z| z), 1).unwrap();
        assert!(assemble_qsp_block_encoding(&u, &enc).is_err());
        let small = build_diagonal_encoding_on_nodes(&UnitCircleFunction::new("z", 1.0, |z| z), 4).unwrap();
        assert!(assemble_qsp_block_encoding(&identity(2), &small).is_err());
    }

    #[test]
    fn shifted_window_examples() {
        let one = UnitCircleFunction::new("1", 1.0, |_| ONE);
        let u = random_unitary(2, &mut seeded(9));
        let enc = build_diagonal_encoding_on_nodes(&one, 8).unwrap();
        let (be, ledger) = assemble_shifted_window_encoding(&u, &enc, 2).unwrap();
        assert!((be.block() - identity(2) * c64(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-12);
        assert_eq!(ledger, QueryLedger { cu_uses: 7, cu_dagger_uses: 0, uf_uses: 1, u_dagger_uses: 2 });
        assert!(be.note().unwrap().contains("pedagogical"));

        let sq = UnitCircleFunction::new("z^2", 1.0, |z| z * z);
        let diag = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.4),
            Complex64::from_polar(1.0, -2.0),
        ]));
        let enc = build_diagonal_encoding_on_nodes(&sq, 8).unwrap();
        let (be, _) = assemble_shifted_window_encoding(&diag, &enc, 2).unwrap();
        assert!((be.encoded() - &diag * &diag).norm() < 1e-9);
        assert!(unitarity_defect(be.unitary()) < 1e-10);

        let p = laurent_test(2, 11);
        let u = random_unitary(4, &mut seeded(10));
        let target = f_of(&u, &p);
        for d1 in [8, 16] {
            let enc = build_diagonal_encoding_on_nodes(&p, d1).unwrap();
            let (be, _) = assemble_shifted_window_encoding(&u, &enc, 2).unwrap();
            assert!((be.encoded() - &target).norm() < 1e-9, "d1 = {d1}");
            assert_eq!(be.alpha(), (d1 as f64).sqrt());
        }
        let enc = build_diagonal_encoding_on_nodes(&p, 4).unwrap();
        assert!(matches!(assemble_shifted_window_encoding(&u, &enc, 2), Err(Error::Aliasing(_))));
    }

    #[test]
    fn shifted_window_with_laurent_polynomial_constructed_from_coefficients() {
        let p = LaurentPolynomial::from_terms(&[(-1, c64(0.25, 0.1)), (1, c64(0.0, -0.3)), (0, c64(0.2, 0.0))]);
        let f = p.to_circle_function("p");
        let u = random_unitary(2, &mut seeded(12));
        let enc = build_diagonal_encoding_on_nodes(&f, 4).unwrap();
        let (be, _) = assemble_shifted_window_encoding(&u, &enc, 1).unwrap();
        let direct = &u * p.coefficient(1) + identity(2) * p.coefficient(0) + u.adjoint() * p.coefficient(-1);
        assert!((be.encoded() - direct).norm() < 1e-12);
    }

    /// Textbook phase estimation: Hadamards, controlled `U^{2^t}` with the
    /// control on index bit `t`, then the inverse QFT; identity on the flag.
    fn textbook_qpe(u: &CMatrix, index_qubits: usize) -> CMatrix {
        let (n_s, n) = (u.nrows(), 1usize << index_qubits);
        let s_q = n_s.trailing_zeros() as usize;
        let total = s_q + index_qubits + 1;
        let mut m = identity(1 << total);
        for q in 0..index_qubits {
            apply_gate_left(&mut m, &HADAMARD, s_q + q, None, total);
        }
        let mut p = u.clone();
        for t in 0..index_qubits {
            // Controlled on bit t of the index, i.e. index qubit k − 1 − t.
            let mut cu = CMatrix::zeros(1 << total, 1 << total);
            for j in 0..n {
                let block = if (j >> t) & 1 == 1 { p.clone() } else { identity(n_s) };
                for flag in 0..2 {
                    for r in 0..n_s {
                        for c in 0..n_s {
                            cu[((r * n + j) * 2 + flag, (c * n + j) * 2 + flag)] = block[(r, c)];
                        }
                    }
                }
            }
            m = cu * m;
            p = &p * &p;
        }
        let inv_qft = kron(&kron(&identity(n_s), &build_qft(index_qubits).adjoint()), &identity(2));
        inv_qft * m
    }

    #[test]
    fn structure_report() {
        let u = random_unitary(2, &mut seeded(13));
        let f = lookup("sign_smooth", &Params::new()).unwrap().circle();
        let enc = build_diagonal_encoding(&f, 1).unwrap();
        let circ = QspCircuit::new(&u, &enc).unwrap();
        let report = circuit_structure_report(&circ);
        assert_eq!(report.stages.len(), 3);
        assert_eq!(report.total_qubits, 5);
        assert!((circ.stage_matrix(Stage::PhaseEstimation) - textbook_qpe(&u, 3)).norm() < 1e-10);
        // Index qubits sit at positions 1, 2, 3; only the top two differ.
        assert_eq!(report.modification_support, vec![1, 2]);
        assert_eq!(report.stages[1].support, vec![1, 2, 3, 4]);
        assert!((report.projection_difference - (2.0 - 2.0 / 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!(report.unitarity_defect < 1e-10);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"stage\":\"phase-estimation\""));
        assert!(json.contains("\"cu_uses\":7"));
    }

    #[test]
    fn stages_compose_to_the_circuit() {
        let u = random_unitary(2, &mut seeded(14));
        let enc = build_diagonal_encoding(&lookup("gibbs", &Params::new()).unwrap().circle(), 1).unwrap();
        let circ = QspCircuit::new(&u, &enc).unwrap();
        let product = circ.stage_matrix(Stage::ModifiedInversePhaseEstimation)
            * circ.stage_matrix(Stage::DiagonalEncoding)
            * circ.stage_matrix(Stage::PhaseEstimation);
        assert!((product - circ.unitary()).norm() < 1e-12);
        assert!((circ.stage_matrix(Stage::DiagonalEncoding) - kron(&identity(2), &enc.matrix())).norm() < 1e-15);
    }
}
