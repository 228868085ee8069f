//! Measurement-free correction gadget for the three-qubit bit-flip code.
//!
//! Register: data `0..3`, syndrome ancillas `3..6`, work qubits `6..9`.
//!
//! Extraction maps `Z1Z2`, `Z2Z3` and `Z1Z3` onto the ancillas with six
//! CNOTs. A single X error on data qubit `k` produces a weight-2 syndrome
//! (`X1 -> 101`, `X2 -> 110`, `X3 -> 011`) while a single ancilla fault
//! produces weight 1, which no correction branch responds to.
//!
//! Each correction branch is a C³NOT with one negated control. It is built
//! from three Toffolis through a dedicated work qubit: compute the AND of
//! the two positive controls into the work qubit, apply
//! `Toffoli(work, not c -> data)` with the negation done by X-conjugation,
//! then uncompute.
//!
//! Reset returns ancillas and work qubits to `|0>`; for the data block this
//! is a partial trace.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;

use crate::bitflip::statevector::StateVector;
use crate::error::{invalid, Result};
use crate::pauli::Pauli;
use crate::rng::{derive_seed, shot_rng, unit_f64};
use crate::stats::{linear_fit, wilson_interval, Z95};

pub const N_QUBITS: usize = 9;
pub const DATA: [usize; 3] = [0, 1, 2];
pub const ANCILLA: [usize; 3] = [3, 4, 5];
pub const WORK: [usize; 3] = [6, 7, 8];

/// Threshold on the probability mass that counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Reversible-level operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    X(usize),
    Cnot(usize, usize),
    Toffoli(usize, usize, usize),
}

impl Block {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Block::X(q) => vec![q],
            Block::Cnot(c, t) => vec![c, t],
            Block::Toffoli(a, b, t) => vec![a, b, t],
        }
    }

    fn apply_bits(&self, s: u16) -> u16 {
        let bit = |q: usize| (s >> q) & 1 == 1;
        match *self {
            Block::X(q) => s ^ (1 << q),
            Block::Cnot(c, t) => {
                if bit(c) {
                    s ^ (1 << t)
                } else {
                    s
                }
            }
            Block::Toffoli(a, b, t) => {
                if bit(a) && bit(b) {
                    s ^ (1 << t)
                } else {
                    s
                }
            }
        }
    }
}

/// Clifford+T gate after decomposing every Toffoli into six CNOTs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    T(usize),
    Tdg(usize),
    X(usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::T(q) | Gate::Tdg(q) | Gate::X(q) => vec![q],
            Gate::Cnot(c, t) => vec![c, t],
        }
    }

    pub fn apply(&self, s: &mut StateVector<f64>) {
        match *self {
            Gate::H(q) => s.apply_h(q),
            Gate::T(q) => s.apply_t(q),
            Gate::Tdg(q) => s.apply_tdg(q),
            Gate::X(q) => s.apply_x(q),
            Gate::Cnot(c, t) => s.apply_cnot(c, t),
        }
    }
}

/// Six-CNOT Toffoli with controls `a`, `b` and target `c`.
pub fn toffoli_decomposition(a: usize, b: usize, c: usize) -> Vec<Gate> {
    use Gate::*;
    vec![
        H(c),
        Cnot(b, c),
        Tdg(c),
        Cnot(a, c),
        T(c),
        Cnot(b, c),
        Tdg(c),
        Cnot(a, c),
        T(b),
        T(c),
        H(c),
        Cnot(a, b),
        T(a),
        Tdg(b),
        Cnot(a, b),
    ]
}

#[derive(Clone, Debug)]
pub struct MfecGadget {
    pub extraction: Vec<Block>,
    pub correction: Vec<Block>,
    /// Qubits returned to `|0>` at the end.
    pub reset: Vec<usize>,
}

impl Default for MfecGadget {
    fn default() -> Self {
        Self::new()
    }
}

impl MfecGadget {
    pub fn new() -> Self {
        let [d0, d1, d2] = DATA;
        let [a0, a1, a2] = ANCILLA;
        let extraction = vec![
            Block::Cnot(d0, a0),
            Block::Cnot(d1, a0),
            Block::Cnot(d1, a1),
            Block::Cnot(d2, a1),
            Block::Cnot(d0, a2),
            Block::Cnot(d2, a2),
        ];
        // (positive controls, negated control, data target)
        let branches = [((a0, a2), a1, d0), ((a0, a1), a2, d1), ((a1, a2), a0, d2)];
        let mut correction = Vec::new();
        for (k, ((p, q), neg, target)) in branches.into_iter().enumerate() {
            let w = WORK[k];
            correction.extend([
                Block::Toffoli(p, q, w),
                Block::X(neg),
                Block::Toffoli(w, neg, target),
                Block::X(neg),
                Block::Toffoli(p, q, w),
            ]);
        }
        Self {
            extraction,
            correction,
            reset: ANCILLA.iter().chain(&WORK).copied().collect(),
        }
    }

    pub fn blocks(&self) -> Vec<Block> {
        self.extraction.iter().chain(&self.correction).copied().collect()
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.blocks()
            .into_iter()
            .flat_map(|b| match b {
                Block::X(q) => vec![Gate::X(q)],
                Block::Cnot(c, t) => vec![Gate::Cnot(c, t)],
                Block::Toffoli(a, b, c) => toffoli_decomposition(a, b, c),
            })
            .collect()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates().iter().filter(|g| matches!(g, Gate::Cnot(..))).count()
    }
}

/// ASAP moment of each operation given its qubit supports.
fn asap_moments(supports: &[Vec<usize>]) -> Vec<usize> {
    let mut free = [0usize; N_QUBITS];
    supports
        .iter()
        .map(|qs| {
            let m = qs.iter().map(|&q| free[q]).max().unwrap_or(0);
            for &q in qs {
                free[q] = m + 1;
            }
            m
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocationKind {
    /// Right after preparing (or receiving) qubit `q`.
    Prep,
    /// Right after operation `index`.
    AfterOp(usize),
    /// Idle during `moment`.
    Idle(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaultLocation {
    pub kind: LocationKind,
    pub qubits: Vec<usize>,
}

/// Fault locations for a list of operations: preparation of every qubit,
/// the output of every operation, and every idle qubit-moment.
fn locations_for(supports: &[Vec<usize>]) -> (Vec<FaultLocation>, Vec<usize>) {
    let moments = asap_moments(supports);
    let depth = moments.iter().map(|m| m + 1).max().unwrap_or(0);
    let mut locs: Vec<FaultLocation> = (0..N_QUBITS)
        .map(|q| FaultLocation { kind: LocationKind::Prep, qubits: vec![q] })
        .collect();
    for (i, qs) in supports.iter().enumerate() {
        locs.push(FaultLocation { kind: LocationKind::AfterOp(i), qubits: qs.clone() });
    }
    for m in 0..depth {
        let mut busy = [false; N_QUBITS];
        for (i, qs) in supports.iter().enumerate() {
            if moments[i] == m {
                for &q in qs {
                    busy[q] = true;
                }
            }
        }
        for q in 0..N_QUBITS {
            if !busy[q] {
                locs.push(FaultLocation { kind: LocationKind::Idle(m), qubits: vec![q] });
            }
        }
    }
    (locs, moments)
}

/// Every nontrivial Pauli on `n` qubits.
pub fn pauli_patterns(n: usize) -> Vec<Vec<Pauli>> {
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (1..4usize.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let p = P[k % 4];
                    k /= 4;
                    p
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub location: usize,
    pub paulis: Vec<Pauli>,
}

#[derive(Clone, Debug)]
pub struct GadgetOutput {
    /// Full register before reset.
    pub state: StateVector<f64>,
    /// Data density matrix after reset, `8 x 8` row-major.
    pub data_rho: Vec<Complex<f64>>,
}

impl GadgetOutput {
    pub fn data_probabilities(&self) -> Vec<f64> {
        (0..8).map(|i| self.data_rho[i * 8 + i].re).collect()
    }

    /// `<psi| rho |psi>` for a 3-qubit data state.
    pub fn data_fidelity(&self, psi: &StateVector<f64>) -> f64 {
        let a = psi.amplitudes();
        let mut f = Complex::new(0.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                f += a[i].conj() * self.data_rho[i * 8 + j] * a[j];
            }
        }
        f.re
    }
}

impl MfecGadget {
    /// Fault locations at the Clifford+T level.
    pub fn locations(&self) -> Vec<FaultLocation> {
        let supports: Vec<Vec<usize>> = self.gates().iter().map(Gate::qubits).collect();
        locations_for(&supports).0
    }

    /// Runs the gadget on a 3-qubit data state (ancillas and work qubits
    /// start in `|0>`) or on a full 9-qubit register.
    pub fn run(&self, input: &StateVector<f64>, fault: Option<&Fault>) -> Result<GadgetOutput> {
        let mut state = match input.n_qubits() {
            3 => {
                let mut amps = vec![Complex::new(0.0, 0.0); 1 << N_QUBITS];
                amps[..8].copy_from_slice(input.amplitudes());
                StateVector::from_amplitudes(amps)?
            }
            N_QUBITS => input.clone(),
            n => return Err(invalid(format!("expected 3 or {N_QUBITS} qubits, got {n}"))),
        };
        let gates = self.gates();
        let supports: Vec<Vec<usize>> = gates.iter().map(Gate::qubits).collect();
        let (locs, moments) = locations_for(&supports);
        let fault = match fault {
            Some(f) => {
                let loc = locs
                    .get(f.location)
                    .ok_or_else(|| invalid(format!("fault location {} out of range", f.location)))?;
                if loc.qubits.len() != f.paulis.len() {
                    return Err(invalid(format!(
                        "location {} acts on {} qubits, got {} Paulis",
                        f.location,
                        loc.qubits.len(),
                        f.paulis.len()
                    )));
                }
                Some((loc.clone(), f.paulis.clone()))
            }
            None => None,
        };
        let inject = |state: &mut StateVector<f64>, kind: LocationKind, q: Option<usize>| {
            if let Some((loc, paulis)) = &fault {
                if loc.kind == kind && q.map_or(true, |q| loc.qubits == [q]) {
                    for (&q, &p) in loc.qubits.iter().zip(paulis) {
                        state.apply_pauli(q, p);
                    }
                }
            }
        };
        for q in 0..N_QUBITS {
            inject(&mut state, LocationKind::Prep, Some(q));
        }
        let depth = moments.iter().map(|m| m + 1).max().unwrap_or(0);
        let mut by_moment: Vec<Vec<usize>> = vec![Vec::new(); depth];
        for (i, &m) in moments.iter().enumerate() {
            by_moment[m].push(i);
        }
        for (m, ops) in by_moment.iter().enumerate() {
            for &i in ops {
                gates[i].apply(&mut state);
                inject(&mut state, LocationKind::AfterOp(i), None);
            }
            for q in 0..N_QUBITS {
                inject(&mut state, LocationKind::Idle(m), Some(q));
            }
        }
        let data_rho = state.reduced_density(&DATA);
        Ok(GadgetOutput { state, data_rho })
    }
}

pub fn run_gadget(input: &StateVector<f64>, fault: Option<&Fault>) -> Result<GadgetOutput> {
    MfecGadget::new().run(input, fault)
}

fn hamming_to(bits: usize, codeword: usize) -> u32 {
    ((bits ^ codeword) & 0b111).count_ones()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub location: FaultLocation,
    pub paulis: Vec<Pauli>,
    pub input: usize,
    /// Data probability at Hamming distance >= 2 from the input codeword.
    pub bad_mass: f64,
}

#[derive(Clone, Debug)]
pub struct FtReport {
    pub n_locations: usize,
    pub n_cases: usize,
    pub violations: Vec<Violation>,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Locations with at least one violating Pauli.
    pub fn violating_locations(&self) -> usize {
        let mut seen: Vec<&FaultLocation> = self.violations.iter().map(|v| &v.location).collect();
        seen.dedup();
        seen.len()
    }
}

/// Injects every nontrivial Pauli at every location, on both codewords, and
/// checks that one ideal majority vote recovers the input.
pub fn ft_check() -> FtReport {
    let g = MfecGadget::new();
    let locs = g.locations();
    let cases: Vec<(usize, Vec<Pauli>, usize)> = locs
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            pauli_patterns(l.qubits.len())
                .into_iter()
                .flat_map(move |p| [(i, p.clone(), 0b000), (i, p, 0b111)])
        })
        .collect();
    let violations: Vec<Violation> = cases
        .par_iter()
        .filter_map(|(i, paulis, input)| {
            let psi = StateVector::basis(3, *input).expect("3 qubits");
            let fault = Fault { location: *i, paulis: paulis.clone() };
            let out = g.run(&psi, Some(&fault)).expect("valid fault");
            let bad: f64 = out
                .data_probabilities()
                .iter()
                .enumerate()
                .filter(|(b, _)| hamming_to(*b, *input) >= 2)
                .map(|(_, p)| p)
                .sum();
            (bad > VIOLATION_TOL).then(|| Violation {
                location: locs[*i].clone(),
                paulis: paulis.clone(),
                input: *input,
                bad_mass: bad,
            })
        })
        .collect();
    FtReport { n_locations: locs.len(), n_cases: cases.len(), violations }
}

/// Classical model of the reversible circuit with X-type faults, used for
/// the scaling study. Every location fails with probability `p`; a failed
/// location applies one of its nontrivial X patterns uniformly at random.
#[derive(Clone, Debug)]
pub struct BitFlipModel {
    blocks: Vec<Block>,
    locations: Vec<FaultLocation>,
    /// For each location and pattern, the bit mask to XOR in.
    masks: Vec<Vec<u16>>,
    /// Location index to apply after each step; step 0 is preparation.
    schedule: Vec<Step>,
}

#[derive(Clone, Debug)]
enum Step {
    Op(usize),
    Fault(usize),
}

impl Default for BitFlipModel {
    fn default() -> Self {
        Self::new(&MfecGadget::new())
    }
}

impl BitFlipModel {
    pub fn new(g: &MfecGadget) -> Self {
        let blocks = g.blocks();
        let supports: Vec<Vec<usize>> = blocks.iter().map(Block::qubits).collect();
        let (locations, moments) = locations_for(&supports);
        let masks = locations
            .iter()
            .map(|l| {
                (1u16..1 << l.qubits.len())
                    .map(|pat| {
                        l.qubits
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| pat >> j & 1 == 1)
                            .fold(0u16, |m, (_, &q)| m | 1 << q)
                    })
                    .collect()
            })
            .collect();
        let index: HashMap<FaultLocation, usize> =
            locations.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let mut schedule = Vec::new();
        for q in 0..N_QUBITS {
            schedule.push(Step::Fault(index[&FaultLocation { kind: LocationKind::Prep, qubits: vec![q] }]));
        }
        let depth = moments.iter().map(|m| m + 1).max().unwrap_or(0);
        for m in 0..depth {
            for (i, &mi) in moments.iter().enumerate() {
                if mi == m {
                    schedule.push(Step::Op(i));
                    let key = FaultLocation { kind: LocationKind::AfterOp(i), qubits: supports[i].clone() };
                    schedule.push(Step::Fault(index[&key]));
                }
            }
            for q in 0..N_QUBITS {
                let key = FaultLocation { kind: LocationKind::Idle(m), qubits: vec![q] };
                if let Some(&i) = index.get(&key) {
                    schedule.push(Step::Fault(i));
                }
            }
        }
        Self { blocks, locations, masks, schedule }
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn locations(&self) -> &[FaultLocation] {
        &self.locations
    }

    /// Final data bits for input codeword `input` and the given faults,
    /// each `(location, pattern index)`.
    pub fn run(&self, input: usize, faults: &[(usize, usize)]) -> u16 {
        let mut s = input as u16 & 0b111;
        for step in &self.schedule {
            match *step {
                Step::Op(i) => s = self.blocks[i].apply_bits(s),
                Step::Fault(l) => {
                    for &(fl, pat) in faults {
                        if fl == l {
                            s ^= self.masks[l][pat];
                        }
                    }
                }
            }
        }
        s & 0b111
    }

    /// Whether majority decoding of the output disagrees with the input.
    pub fn fails(&self, input: usize, faults: &[(usize, usize)]) -> bool {
        let out = self.run(input, faults);
        (out.count_ones() >= 2) != (input & 1 == 1)
    }

    /// Failure probability given exactly one fault.
    pub fn f1(&self) -> f64 {
        let mut total = 0.0;
        for l in 0..self.n_locations() {
            let k = self.masks[l].len();
            for pat in 0..k {
                for input in [0b000, 0b111] {
                    if self.fails(input, &[(l, pat)]) {
                        total += 0.5 / k as f64;
                    }
                }
            }
        }
        total / self.n_locations() as f64
    }

    /// Exact failure probability given exactly two faults, and the number of
    /// malignant `(location pair, pattern pair, input)` cases.
    pub fn f2(&self) -> (f64, usize) {
        let n = self.n_locations();
        let rows: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut w = 0.0;
                let mut count = 0;
                for b in a + 1..n {
                    let (ka, kb) = (self.masks[a].len(), self.masks[b].len());
                    for pa in 0..ka {
                        for pb in 0..kb {
                            for input in [0b000, 0b111] {
                                if self.fails(input, &[(a, pa), (b, pb)]) {
                                    w += 0.5 / (ka * kb) as f64;
                                    count += 1;
                                }
                            }
                        }
                    }
                }
                (w, count)
            })
            .collect();
        let pairs = (n * (n - 1) / 2) as f64;
        let w: f64 = rows.iter().map(|r| r.0).sum();
        (w / pairs, rows.iter().map(|r| r.1).sum())
    }

    /// Monte Carlo failure probability given exactly `k` faults at distinct
    /// locations.
    pub fn fk_mc(&self, k: usize, n_shots: u64, seed: u64) -> (u64, u64) {
        let n = self.n_locations();
        let fails = (0..n_shots)
            .into_par_iter()
            .filter(|&s| {
                let mut rng = shot_rng(seed, s);
                let mut chosen: Vec<usize> = Vec::with_capacity(k);
                while chosen.len() < k.min(n) {
                    let l = (unit_f64(&mut rng) * n as f64) as usize;
                    if !chosen.contains(&l) {
                        chosen.push(l);
                    }
                }
                let faults: Vec<(usize, usize)> = chosen
                    .iter()
                    .map(|&l| (l, (unit_f64(&mut rng) * self.masks[l].len() as f64) as usize))
                    .collect();
                let input = if unit_f64(&mut rng) < 0.5 { 0b000 } else { 0b111 };
                self.fails(input, &faults)
            })
            .count() as u64;
        (fails, n_shots)
    }

    /// Direct Monte Carlo: every location fails independently with
    /// probability `p`.
    pub fn direct_mc(&self, p: f64, n_shots: u64, seed: u64) -> (u64, u64) {
        let fails = (0..n_shots)
            .into_par_iter()
            .filter(|&s| {
                let mut rng = shot_rng(seed, s);
                let input = if unit_f64(&mut rng) < 0.5 { 0b000 } else { 0b111 };
                let faults: Vec<(usize, usize)> = (0..self.n_locations())
                    .filter_map(|l| {
                        let u = unit_f64(&mut rng);
                        (u < p).then(|| (l, ((u / p) * self.masks[l].len() as f64) as usize))
                    })
                    .collect();
                self.fails(input, &faults)
            })
            .count() as u64;
        (fails, n_shots)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub p: f64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln p_L` against `ln p`.
    pub slope: f64,
    /// `C(N, 2) f_2`: the leading coefficient in `p_L ~ A p^2`.
    pub quadratic_coefficient: f64,
    pub n_locations: usize,
}

fn ln_binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    let k_small = k.min(n - k);
    let ln_c: f64 = (0..k_small).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    ln_c + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

/// Logical failure rate of one gadget plus ideal decoding at each `p`.
///
/// Stratified by fault count: `f_1` and `f_2` are computed exactly; strata
/// `k >= 3` are sampled with `n_shots` shots each, as long as they carry
/// non-negligible weight at the largest `p`.
pub fn scaling_curve(p_list: &[f64], n_shots: u64, seed: u64) -> Result<ScalingCurve> {
    for &p in p_list {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
    }
    let model = BitFlipModel::default();
    let n = model.n_locations();
    let f1 = model.f1();
    let (f2, _) = model.f2();
    let p_max = p_list.iter().copied().fold(0.0, f64::max);
    let mut strata: Vec<(usize, f64, f64)> = vec![(1, f1, 0.0), (2, f2, 0.0)];
    if p_max > 0.0 {
        for k in 3..=n {
            if ln_binom_pmf(n, k, p_max) < (1e-14f64).ln() && k as f64 > n as f64 * p_max {
                break;
            }
            let (fails, shots) = model.fk_mc(k, n_shots.max(1), derive_seed(seed, &[k as u64]));
            let fk = fails as f64 / shots as f64;
            strata.push((k, fk, fk * (1.0 - fk) / shots as f64));
        }
    }
    let points = p_list
        .iter()
        .map(|&p| {
            if p == 0.0 {
                return ScalingPoint { p, p_l: 0.0, ci_low: 0.0, ci_high: 0.0 };
            }
            let mut p_l = 0.0;
            let mut var = 0.0;
            for &(k, fk, vk) in &strata {
                let w = ln_binom_pmf(n, k, p).exp();
                p_l += w * fk;
                var += w * w * vk;
            }
            let half = Z95 * var.sqrt();
            ScalingPoint { p, p_l, ci_low: (p_l - half).max(0.0), ci_high: (p_l + half).min(1.0) }
        })
        .collect::<Vec<_>>();
    let usable: Vec<&ScalingPoint> = points.iter().filter(|pt| pt.p > 0.0 && pt.p_l > 0.0).collect();
    let xs: Vec<f64> = usable.iter().map(|pt| pt.p.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|pt| pt.p_l.ln()).collect();
    let slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.0);
    Ok(ScalingCurve {
        points,
        slope,
        quadratic_coefficient: (n * (n - 1) / 2) as f64 * f2,
        n_locations: n,
    })
}

/// Same curve by direct sampling, for cross-checks.
pub fn scaling_curve_direct(p_list: &[f64], n_shots: u64, seed: u64) -> Vec<ScalingPoint> {
    let model = BitFlipModel::default();
    p_list
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let (f, n) = model.direct_mc(p, n_shots, derive_seed(seed, &[i as u64]));
            let (lo, hi) = wilson_interval(f, n, Z95);
            ScalingPoint { p, p_l: f as f64 / n as f64, ci_low: lo, ci_high: hi }
        })
        .collect()
}

/// `n` log-spaced points in `[p_min, p_max]`.
pub fn log_grid(p_min: f64, p_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(p_min > 0.0 && p_max >= p_min) || n == 0 {
        return Err(invalid("need 0 < pmin <= pmax and at least one point"));
    }
    if n == 1 {
        return Ok(vec![p_min]);
    }
    let (a, b) = (p_min.ln(), p_max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}
