#![allow(dead_code)]

use mfec_core::decoder::GraphEdge;
use mfec_core::pauli::PauliString;
use mfec_core::surface_code::{CircuitSchedule, Op};

/// Dijkstra over an undirected edge list, tracking the flag parity of the
/// chosen shortest path.
pub fn dijkstra(n: usize, edges: &[GraphEdge], src: usize) -> Vec<(f64, bool)> {
    let mut dist = vec![(f64::INFINITY, false); n];
    let mut done = vec![false; n];
    dist[src] = (0.0, false);
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v].0.is_finite())
            .min_by(|&a, &b| dist[a].0.partial_cmp(&dist[b].0).unwrap())
        else {
            break;
        };
        done[u] = true;
        for e in edges {
            let other = if e.u == u {
                e.v
            } else if e.v == u {
                e.u
            } else {
                continue;
            };
            let c = dist[u].0 + e.weight;
            if c < dist[other].0 {
                dist[other] = (c, dist[u].1 ^ e.flag);
            }
        }
    }
    dist
}

/// Exhaustive minimum over pairings in which any defect may go to the
/// boundary `b`.
pub fn best_pairing(defects: &[usize], b: usize, dist: &[Vec<(f64, bool)>]) -> f64 {
    if defects.is_empty() {
        return 0.0;
    }
    let first = defects[0];
    let rest = &defects[1..];
    let mut best = dist[first][b].0 + best_pairing(rest, b, dist);
    for i in 0..rest.len() {
        let mut others = rest.to_vec();
        let partner = others.remove(i);
        best = best.min(dist[first][partner].0 + best_pairing(&others, b, dist));
    }
    best
}

pub fn rank(rows: &[Vec<bool>]) -> usize {
    let mut m: Vec<Vec<bool>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        if let Some(p) = (rank..m.len()).find(|&r| m[r][c]) {
            m.swap(rank, p);
            for r in 0..m.len() {
                if r != rank && m[r][c] {
                    let pivot = m[rank].clone();
                    for (a, b) in m[r].iter_mut().zip(&pivot) {
                        *a ^= *b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

pub fn in_span(rows: &[Vec<bool>], v: &[bool]) -> bool {
    let mut with = rows.to_vec();
    with.push(v.to_vec());
    rank(&with) == rank(rows)
}

/// Double-double arithmetic, enough for a ~30 digit reference value.
#[derive(Clone, Copy, Debug)]
pub struct Dd(pub f64, pub f64);

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.0, o.0);
        let (s, e2) = two_sum(s, e + self.1 + o.1);
        Dd(s, e2)
    }

    pub fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        let (s, e2) = two_sum(p, e + self.0 * o.1 + self.1 * o.0);
        Dd(s, e2)
    }

    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.0 / d;
        let r = (-q1).mul_add(d, self.0) + self.1;
        let q2 = r / d;
        let (s, e) = two_sum(q1, q2);
        Dd(s, e)
    }

    pub fn to_f64(self) -> f64 {
        self.0 + self.1
    }
}

/// `exp(x) - 1` by Taylor series after halving, recombined with
/// `e(2x) - 1 = e(x) (e(x) + 2)`.
pub fn dd_expm1(x: Dd) -> Dd {
    let mut halvings = 0;
    let mut y = x;
    while y.0.abs() > 1e-3 {
        y = y.div_f64(2.0);
        halvings += 1;
    }
    let mut term = y;
    let mut sum = y;
    for k in 2..30 {
        term = term.mul(y).div_f64(k as f64);
        sum = sum.add(term);
        if term.0.abs() < 1e-40 {
            break;
        }
    }
    for _ in 0..halvings {
        sum = sum.mul(sum.add(Dd::from(2.0)));
    }
    sum
}

/// Reference decoherence probability `1 - exp(-t/T1 - t/T2)`.
pub fn p_decoh_oracle(t: f64, t1: f64, t2: f64) -> f64 {
    let x = Dd::from(t).div_f64(t1).add(Dd::from(t).div_f64(t2));
    dd_expm1(x.neg()).neg().to_f64().min(1.0)
}

/// Heisenberg walk from the end of the circuit to its start for the
/// product of the given measurement records. Returns true when the product
/// is +1 with certainty on the noiseless circuit.
pub fn records_deterministic(s: &CircuitSchedule, records: &[usize]) -> bool {
    let mut index = Vec::new();
    let mut m = 0;
    for layer in &s.layers {
        let mut row = Vec::new();
        for op in &layer.ops {
            if matches!(op, Op::Measure(_)) {
                row.push(Some(m));
                m += 1;
            } else {
                row.push(None);
            }
        }
        index.push(row);
    }
    assert_eq!(m, s.n_measurements);
    let mut o = PauliString::identity(s.n_qubits);
    for (layer, idx) in s.layers.iter().zip(&index).rev() {
        for (op, rec) in layer.ops.iter().zip(idx) {
            match *op {
                Op::Cnot { control, target } => o.apply_cnot(control, target),
                Op::H(q) => o.apply_h(q),
                Op::Measure(q) => {
                    // anything measured must not disturb the tracked product
                    if o.x_bit(q) {
                        return false;
                    }
                    if records.contains(&rec.unwrap()) {
                        o.xor_factor(q, false, true);
                    }
                }
                Op::Reset(q) => {
                    if o.x_bit(q) {
                        return false;
                    }
                    o.clear_qubit(q);
                }
                Op::Idle(_) => {}
            }
        }
    }
    o.is_identity() && o.phase() == 0
}
