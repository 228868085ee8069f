//! Rotated surface-code layouts and the one-round memory circuit.
//!
//! Data qubits sit on a `d x d` grid. Linear labels run in a snake order
//! (left to right on even rows, right to left on odd rows), which is the
//! numbering under which the distance-3 generators read
//! `Z1Z2Z5Z6, Z4Z5Z8Z9, Z3Z4, Z6Z7 / X2X3X4X5, X5X6X7X8, X1X2, X8X9`.
//!
//! A plaquette is named by its top-left corner `(i, j)` with
//! `i, j in -1..d`. It is Z-type when `i + j` is even. Bulk plaquettes are
//! always present; weight-2 Z checks sit on the left and right edges and
//! weight-2 X checks on the top and bottom edges. Logical Z is the top row
//! and logical X the left column.
//!
//! CNOT order inside a round: Z checks visit TL, BL, TR, BR and X checks
//! visit TL, TR, BL, BR. The last two qubits touched by a Z check are a
//! vertical pair and those of an X check a horizontal pair, so hook errors
//! run perpendicular to the logical operator they could otherwise shorten.

use crate::error::{invalid, Result};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckType {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// One stabilizer check. `schedule[s]` is the data qubit touched in CNOT
/// layer `s`, if any.
#[derive(Clone, Debug)]
pub struct Plaquette {
    pub kind: CheckType,
    pub corner: (isize, isize),
    pub data: Vec<usize>,
    pub schedule: [Option<usize>; 4],
}

#[derive(Clone, Debug)]
pub struct SurfaceCodeLayout {
    pub distance: usize,
    /// `(row, col)` of each data qubit, indexed by `label - 1`.
    pub data_qubits: Vec<(usize, usize)>,
    pub z_stabilizers: Vec<PauliString>,
    pub x_stabilizers: Vec<PauliString>,
    pub logical_z: PauliString,
    pub logical_x: PauliString,
    /// Ancilla qubit index per check: Z checks first, then X checks.
    pub ancilla_qubits: Vec<usize>,
    pub z_plaquettes: Vec<Plaquette>,
    pub x_plaquettes: Vec<Plaquette>,
}

impl SurfaceCodeLayout {
    pub fn n_data(&self) -> usize {
        self.distance * self.distance
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data() + self.ancilla_qubits.len()
    }

    /// 0-based data index at grid position `(row, col)`.
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        snake_index(self.distance, row, col)
    }

    /// Text form of every stabilizer, Z checks first, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in self.z_stabilizers.iter().chain(&self.x_stabilizers) {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = &PauliString> {
        self.z_stabilizers.iter().chain(&self.x_stabilizers)
    }
}

fn snake_index(d: usize, row: usize, col: usize) -> usize {
    if row % 2 == 0 {
        row * d + col
    } else {
        row * d + (d - 1 - col)
    }
}

pub fn build_layout(d: usize) -> Result<SurfaceCodeLayout> {
    if d < 3 || d % 2 == 0 {
        return Err(invalid(format!("distance must be odd and >= 3, got {d}")));
    }
    let n = d * d;
    let mut data_qubits = vec![(0, 0); n];
    for r in 0..d {
        for c in 0..d {
            data_qubits[snake_index(d, r, c)] = (r, c);
        }
    }
    let di = d as isize;
    let qubit_at = |r: isize, c: isize| -> Option<usize> {
        (r >= 0 && c >= 0 && r < di && c < di).then(|| snake_index(d, r as usize, c as usize))
    };
    let make = |i: isize, j: isize| -> Plaquette {
        let kind = if (i + j).rem_euclid(2) == 0 { CheckType::Z } else { CheckType::X };
        let tl = qubit_at(i, j);
        let tr = qubit_at(i, j + 1);
        let bl = qubit_at(i + 1, j);
        let br = qubit_at(i + 1, j + 1);
        let schedule = match kind {
            CheckType::Z => [tl, bl, tr, br],
            CheckType::X => [tl, tr, bl, br],
        };
        let mut data: Vec<usize> = schedule.iter().flatten().copied().collect();
        data.sort_unstable();
        Plaquette { kind, corner: (i, j), data, schedule }
    };

    let mut plaquettes = Vec::new();
    for i in 0..di - 1 {
        for j in 0..di - 1 {
            plaquettes.push(make(i, j));
        }
    }
    // boundary: top, right, bottom, left, each ordered along the edge
    let edge = |i, j, want: CheckType| {
        let p = make(i, j);
        (p.kind == want).then_some(p)
    };
    plaquettes.extend((0..di - 1).filter_map(|j| edge(-1, j, CheckType::X)));
    plaquettes.extend((0..di - 1).filter_map(|i| edge(i, di - 1, CheckType::Z)));
    plaquettes.extend((0..di - 1).filter_map(|j| edge(di - 1, j, CheckType::X)));
    plaquettes.extend((0..di - 1).filter_map(|i| edge(i, -1, CheckType::Z)));

    let (z_plaquettes, x_plaquettes): (Vec<_>, Vec<_>) =
        plaquettes.into_iter().partition(|p| p.kind == CheckType::Z);
    let z_stabilizers = z_plaquettes
        .iter()
        .map(|p| PauliString::z_on(n, &p.data))
        .collect::<Result<Vec<_>>>()?;
    let x_stabilizers = x_plaquettes
        .iter()
        .map(|p| PauliString::x_on(n, &p.data))
        .collect::<Result<Vec<_>>>()?;
    let top_row: Vec<usize> = (0..d).map(|c| snake_index(d, 0, c)).collect();
    let left_col: Vec<usize> = (0..d).map(|r| snake_index(d, r, 0)).collect();
    let n_checks = z_plaquettes.len() + x_plaquettes.len();
    debug_assert_eq!(n_checks, n - 1);
    Ok(SurfaceCodeLayout {
        distance: d,
        data_qubits,
        z_stabilizers,
        x_stabilizers,
        logical_z: PauliString::z_on(n, &top_row)?,
        logical_x: PauliString::x_on(n, &left_col)?,
        ancilla_qubits: (n..n + n_checks).collect(),
        z_plaquettes,
        x_plaquettes,
    })
}

/// Physical operation in a [`CircuitSchedule`]. Resets and measurements are
/// in the Z basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Cnot { control: usize, target: usize },
    H(usize),
    Reset(usize),
    Measure(usize),
    Idle(usize),
}

impl Op {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Op::Cnot { control, target } => vec![control, target],
            Op::H(q) | Op::Reset(q) | Op::Measure(q) | Op::Idle(q) => vec![q],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Layer {
    pub ops: Vec<Op>,
}

/// Scheduled memory experiment: layers of disjoint operations, a list of
/// detectors (each a set of measurement-record indices whose parity is
/// deterministic without noise), and the record set giving the logical
/// readout.
#[derive(Clone, Debug)]
pub struct CircuitSchedule {
    pub n_qubits: usize,
    pub n_data: usize,
    pub basis: Basis,
    pub layers: Vec<Layer>,
    pub n_measurements: usize,
    pub detectors: Vec<Vec<usize>>,
    pub logical_observable: Vec<usize>,
    /// Number of layers from the initial reset up to the ancilla readout.
    pub round_depth: usize,
    pub cnot_layers: usize,
}

impl CircuitSchedule {
    pub fn n_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn cnot_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.ops)
            .filter(|op| matches!(op, Op::Cnot { .. }))
            .count()
    }

    /// Verifies that no qubit is used twice within a layer.
    pub fn check_layers(&self) -> Result<()> {
        for (k, layer) in self.layers.iter().enumerate() {
            let mut seen = vec![false; self.n_qubits];
            for op in &layer.ops {
                for q in op.qubits() {
                    if q >= self.n_qubits || seen[q] {
                        return Err(invalid(format!("qubit {q} reused in layer {k}")));
                    }
                    seen[q] = true;
                }
            }
        }
        Ok(())
    }
}

/// One round of stabilizer measurement between a transversal preparation
/// and a transversal readout in `basis`.
///
/// Detectors come in two groups, each indexed like the checks of the
/// matching type: first the bare round outcomes (deterministic because the
/// data start in an eigenstate of those checks), then the comparisons of each
/// outcome with the parity of the final data readout on its support.
pub fn build_memory_circuit(layout: &SurfaceCodeLayout, basis: Basis) -> CircuitSchedule {
    let n_data = layout.n_data();
    let n_z = layout.z_plaquettes.len();
    let n_qubits = layout.n_qubits();
    let anc_z = |k: usize| n_data + k;
    let anc_x = |k: usize| n_data + n_z + k;

    let mut layers = Vec::new();
    layers.push(Layer { ops: (0..n_qubits).map(Op::Reset).collect() });

    let mut prep = Layer::default();
    if basis == Basis::X {
        prep.ops.extend((0..n_data).map(Op::H));
    }
    prep.ops.extend((0..layout.x_plaquettes.len()).map(|k| Op::H(anc_x(k))));
    layers.push(prep);

    for step in 0..4 {
        let mut layer = Layer::default();
        for (k, p) in layout.z_plaquettes.iter().enumerate() {
            if let Some(q) = p.schedule[step] {
                layer.ops.push(Op::Cnot { control: q, target: anc_z(k) });
            }
        }
        for (k, p) in layout.x_plaquettes.iter().enumerate() {
            if let Some(q) = p.schedule[step] {
                layer.ops.push(Op::Cnot { control: anc_x(k), target: q });
            }
        }
        layers.push(layer);
    }

    layers.push(Layer {
        ops: (0..layout.x_plaquettes.len()).map(|k| Op::H(anc_x(k))).collect(),
    });
    layers.push(Layer { ops: (n_data..n_qubits).map(Op::Measure).collect() });
    let round_depth = layers.len();

    layers.push(Layer { ops: (0..n_data).map(Op::Idle).collect() });
    if basis == Basis::X {
        layers.push(Layer { ops: (0..n_data).map(Op::H).collect() });
    }
    layers.push(Layer { ops: (0..n_data).map(Op::Measure).collect() });

    // measurement records: ancillas in qubit order, then data in qubit order
    let n_anc = n_qubits - n_data;
    let anc_record = |q: usize| q - n_data;
    let data_record = |q: usize| n_anc + q;

    let (plaquettes, offset) = match basis {
        Basis::Z => (&layout.z_plaquettes, 0),
        Basis::X => (&layout.x_plaquettes, n_z),
    };
    let mut detectors: Vec<Vec<usize>> = plaquettes
        .iter()
        .enumerate()
        .map(|(k, _)| vec![anc_record(n_data + offset + k)])
        .collect();
    for (k, p) in plaquettes.iter().enumerate() {
        let mut recs = vec![anc_record(n_data + offset + k)];
        recs.extend(p.data.iter().map(|&q| data_record(q)));
        detectors.push(recs);
    }
    let logical = match basis {
        Basis::Z => layout.logical_z.support(),
        Basis::X => layout.logical_x.support(),
    };
    CircuitSchedule {
        n_qubits,
        n_data,
        basis,
        layers,
        n_measurements: n_qubits,
        detectors,
        logical_observable: logical.into_iter().map(data_record).collect(),
        round_depth,
        cnot_layers: 4,
    }
}
