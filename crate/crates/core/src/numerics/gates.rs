use num_complex::Complex64;

use super::{CMatrix, ONE, ZERO};

pub type Gate = [[Complex64; 2]; 2];

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub const HADAMARD: Gate = [
    [Complex64::new(H, 0.0), Complex64::new(H, 0.0)],
    [Complex64::new(H, 0.0), Complex64::new(-H, 0.0)],
];

pub const PAULI_X: Gate = [[ZERO, ONE], [ONE, ZERO]];

/// A control qubit and the value it must hold for the gate to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on_one: false }
    }
}

#[inline]
fn mask(qubit: usize, nqubits: usize) -> usize {
    1 << (nqubits - 1 - qubit)
}

/// Left-multiplies `m` by a (possibly controlled) single-qubit gate acting on
/// `target` of an `nqubits`-qubit register.
pub fn apply_gate_left(m: &mut CMatrix, gate: &Gate, target: usize, control: Option<Control>, nqubits: usize) {
    assert_eq!(m.nrows(), 1 << nqubits, "row dimension must be 2^nqubits");
    let t = mask(target, nqubits);
    let ctrl = control.map(|c| (mask(c.qubit, nqubits), c.on_one));
    for col in 0..m.ncols() {
        let mut column = m.column_mut(col);
        for r0 in 0..(1usize << nqubits) {
            if r0 & t != 0 {
                continue;
            }
            if let Some((cm, on_one)) = ctrl {
                if ((r0 & cm) != 0) != on_one {
                    continue;
                }
            }
            let r1 = r0 | t;
            let a = column[r0];
            let b = column[r1];
            column[r0] = gate[0][0] * a + gate[0][1] * b;
            column[r1] = gate[1][0] * a + gate[1][1] * b;
        }
    }
}

/// Qubits on which `op` acts non-trivially, i.e. those `q` for which `op` is
/// not of the form `I_q ⊗ (rest)` to within `tol`.
pub fn qubit_support(op: &CMatrix, nqubits: usize, tol: f64) -> Vec<usize> {
    let dim = 1usize << nqubits;
    assert_eq!(op.nrows(), dim);
    assert_eq!(op.ncols(), dim);
    (0..nqubits)
        .filter(|&q| {
            let b = mask(q, nqubits);
            for i in 0..dim {
                for j in 0..dim {
                    let z = op[(i, j)];
                    if (i & b) != (j & b) {
                        if z.norm() > tol {
                            return true;
                        }
                    } else if i & b == 0 && (z - op[(i | b, j | b)]).norm() > tol {
                        return true;
                    }
                }
            }
            false
        })
        .collect()
}
