use serde::{Deserialize, Serialize};

/// Two-qubit gate budget of one LUCJ layer on a linear chain per spin with
/// one ancilla per cross-spin coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    /// System qubits, 2M.
    pub n_qubits: usize,
    pub n_ancilla: usize,
    /// Givens rotations over both meshes and both spins.
    pub givens_gates: usize,
    pub same_spin_zz: usize,
    pub cross_spin_couplings: usize,
    /// `2 M(M-1) + 2(M-1) + 2 ceil(M/4)`: one unit per Givens rotation, ZZ
    /// gate and ancilla interaction.
    pub logical_two_qubit_count: usize,
    /// Native entangling gates, two per logical unit.
    pub two_qubit_count: usize,
    /// ASAP depth of the native gate sequence.
    pub two_qubit_depth: usize,
}

impl ResourceEstimate {
    pub fn total_qubits(&self) -> usize {
        self.n_qubits + self.n_ancilla
    }
}

/// Native gates in circuit order; qubit `p` is alpha orbital `p`, `M + p` is
/// beta orbital `p`, `2M + k` is ancilla `k`.
fn native_gates(m: usize) -> Vec<(usize, usize)> {
    let mut gates = Vec::new();
    let mesh = |gates: &mut Vec<(usize, usize)>| {
        for layer in 0..m {
            for spin in 0..2 {
                let off = spin * m;
                let mut p = layer % 2;
                while p + 1 < m {
                    gates.push((off + p, off + p + 1));
                    gates.push((off + p, off + p + 1));
                    p += 2;
                }
            }
        }
    };
    mesh(&mut gates);
    for parity in 0..2 {
        for spin in 0..2 {
            let off = spin * m;
            let mut p = parity;
            while p + 1 < m {
                gates.push((off + p, off + p + 1));
                gates.push((off + p, off + p + 1));
                p += 2;
            }
        }
    }
    for (k, p) in (0..m).step_by(4).enumerate() {
        let anc = 2 * m + k;
        gates.extend([(p, anc), (m + p, anc), (m + p, anc), (p, anc)]);
    }
    mesh(&mut gates);
    gates
}

fn asap_depth(gates: &[(usize, usize)], n_qubits: usize) -> usize {
    let mut level = vec![0usize; n_qubits];
    let mut depth = 0;
    for &(a, b) in gates {
        let l = level[a].max(level[b]) + 1;
        level[a] = l;
        level[b] = l;
        depth = depth.max(l);
    }
    depth
}

pub fn estimate_resources(norb: usize) -> ResourceEstimate {
    let m = norb;
    let n_ancilla = m.div_ceil(4);
    let givens_gates = 2 * m * m.saturating_sub(1);
    let same_spin_zz = 2 * m.saturating_sub(1);
    let logical = givens_gates + same_spin_zz + 2 * n_ancilla;
    let gates = native_gates(m);
    debug_assert_eq!(gates.len(), 2 * logical);
    ResourceEstimate {
        n_qubits: 2 * m,
        n_ancilla,
        givens_gates,
        same_spin_zz,
        cross_spin_couplings: n_ancilla,
        logical_two_qubit_count: logical,
        two_qubit_count: gates.len(),
        two_qubit_depth: asap_depth(&gates, 2 * m + n_ancilla),
    }
}
