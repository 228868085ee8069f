//! Pauli-frame Monte Carlo for the measurement-based memory circuit.
//!
//! Noise placement:
//! * `DEPOLARIZE2(p_2q)` after every CNOT,
//! * `IDLE1(p_idle_op)` on every data qubit once per round, between the
//!   ancilla readout and the final data readout,
//! * `FLIP(p_meas)` after every reset and before every measurement.
//!
//! With `double_meas_flip` each reset and measurement gets two independent
//! flip sites instead of one.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::noise::DerivedRates;
use crate::pauli::{Pauli, PauliString};
use crate::rng::{shot_rng, unit_f64};
use crate::surface_code::{CircuitSchedule, Op};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Channel {
    Depolarize2 { a: usize, b: usize, p: f64 },
    Idle1 { q: usize, p: f64 },
    Flip { q: usize, p: f64 },
}

impl Channel {
    /// Number of nontrivial outcomes.
    pub fn n_outcomes(&self) -> usize {
        match self {
            Channel::Depolarize2 { .. } => 15,
            Channel::Idle1 { .. } => 3,
            Channel::Flip { .. } => 1,
        }
    }

    pub fn probability(&self) -> f64 {
        match *self {
            Channel::Depolarize2 { p, .. } | Channel::Idle1 { p, .. } | Channel::Flip { p, .. } => p,
        }
    }

    /// Pauli factors of outcome `k` in `1..=n_outcomes()`.
    pub fn outcome(&self, k: usize) -> Vec<(usize, Pauli)> {
        const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        match *self {
            Channel::Depolarize2 { a, b, .. } => vec![(a, P[k / 4]), (b, P[k % 4])],
            Channel::Idle1 { q, .. } => vec![(q, P[k])],
            Channel::Flip { q, .. } => vec![(q, Pauli::X)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Instr {
    Gate(Op),
    Noise(usize),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoiseOptions {
    pub double_meas_flip: bool,
}

/// A schedule with its noise sites in execution order.
#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    pub schedule: CircuitSchedule,
    pub noise_sites: Vec<Channel>,
    program: Vec<Instr>,
    /// Position of each noise site in `program`.
    site_pos: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShotResult {
    pub detectors: Vec<bool>,
    pub logical_flip: bool,
}

impl NoisyCircuit {
    pub fn new(schedule: CircuitSchedule, rates: &DerivedRates<f64>, opts: NoiseOptions) -> Self {
        let flips = if opts.double_meas_flip { 2 } else { 1 };
        let mut sites = Vec::new();
        let mut program = Vec::new();
        let mut push_site = |ch: Channel, program: &mut Vec<Instr>| {
            program.push(Instr::Noise(sites.len()));
            sites.push(ch);
        };
        for layer in &schedule.layers {
            // measurement flips act before the layer, everything else after
            for op in &layer.ops {
                if let Op::Measure(q) = *op {
                    for _ in 0..flips {
                        push_site(Channel::Flip { q, p: rates.p_meas }, &mut program);
                    }
                }
            }
            for op in &layer.ops {
                if !matches!(op, Op::Idle(_)) {
                    program.push(Instr::Gate(*op));
                }
            }
            for op in &layer.ops {
                match *op {
                    Op::Cnot { control, target } => push_site(
                        Channel::Depolarize2 { a: control, b: target, p: rates.p_2q },
                        &mut program,
                    ),
                    Op::Reset(q) => {
                        for _ in 0..flips {
                            push_site(Channel::Flip { q, p: rates.p_meas }, &mut program);
                        }
                    }
                    Op::Idle(q) => {
                        push_site(Channel::Idle1 { q, p: rates.p_idle_op }, &mut program)
                    }
                    Op::H(_) | Op::Measure(_) => {}
                }
            }
        }
        let site_pos = program
            .iter()
            .enumerate()
            .filter_map(|(i, ins)| matches!(ins, Instr::Noise(_)).then_some(i))
            .collect();
        Self { schedule, noise_sites: sites, program, site_pos }
    }

    pub fn n_sites(&self) -> usize {
        self.noise_sites.len()
    }

    pub fn program(&self) -> &[Instr] {
        &self.program
    }

    /// Runs `program[start..]` on `frame`, returning measurement flips.
    fn propagate(
        &self,
        frame: &mut PauliString,
        start: usize,
        mut noise: impl FnMut(usize, &mut PauliString),
    ) -> Vec<bool> {
        let mut records = vec![false; self.schedule.n_measurements];
        let mut next_record = self.records_before(start);
        for ins in &self.program[start..] {
            match *ins {
                Instr::Gate(op) => match op {
                    Op::Cnot { control, target } => frame.apply_cnot(control, target),
                    Op::H(q) => frame.apply_h(q),
                    Op::Reset(q) => frame.clear_qubit(q),
                    Op::Measure(q) => {
                        records[next_record] = frame.x_bit(q);
                        next_record += 1;
                    }
                    Op::Idle(_) => {}
                },
                Instr::Noise(site) => noise(site, frame),
            }
        }
        records
    }

    fn records_before(&self, pos: usize) -> usize {
        self.program[..pos]
            .iter()
            .filter(|ins| matches!(ins, Instr::Gate(Op::Measure(_))))
            .count()
    }

    fn shot_from_records(&self, records: &[bool]) -> ShotResult {
        let parity = |recs: &[usize]| recs.iter().fold(false, |acc, &r| acc ^ records[r]);
        ShotResult {
            detectors: self.schedule.detectors.iter().map(|d| parity(d)).collect(),
            logical_flip: parity(&self.schedule.logical_observable),
        }
    }

    /// One noisy shot; a pure function of `(seed, shot)`.
    pub fn sample_shot(&self, seed: u64, shot: u64) -> ShotResult {
        let mut rng = shot_rng(seed, shot);
        let mut frame = PauliString::identity(self.schedule.n_qubits);
        let records = self.propagate(&mut frame, 0, |site, frame| {
            let ch = &self.noise_sites[site];
            let u = unit_f64(&mut rng);
            let p = ch.probability();
            if u < p {
                let k = ((u / p) * ch.n_outcomes() as f64) as usize;
                apply_outcome(frame, ch, 1 + k.min(ch.n_outcomes() - 1));
            }
        });
        self.shot_from_records(&records)
    }

    /// `n_shots` shots in shot order, sampled in parallel.
    pub fn sample(&self, n_shots: u64, seed: u64) -> Vec<ShotResult> {
        (0..n_shots)
            .into_par_iter()
            .map(|s| self.sample_shot(seed, s))
            .collect()
    }

    /// Deterministic shot with one fault applied; `outcome == 0` is the
    /// identity.
    pub fn inject_single_fault(&self, site: usize, outcome: usize) -> Result<ShotResult> {
        self.inject_faults(&[(site, outcome)])
    }

    /// Deterministic shot with several faults applied simultaneously.
    pub fn inject_faults(&self, faults: &[(usize, usize)]) -> Result<ShotResult> {
        for &(site, outcome) in faults {
            let ch = self
                .noise_sites
                .get(site)
                .ok_or_else(|| invalid(format!("noise site {site} out of range")))?;
            if outcome > ch.n_outcomes() {
                return Err(invalid(format!("outcome {outcome} out of range for site {site}")));
            }
        }
        let start = faults
            .iter()
            .filter(|f| f.1 > 0)
            .map(|f| self.site_pos[f.0])
            .min()
            .unwrap_or(self.program.len());
        let mut frame = PauliString::identity(self.schedule.n_qubits);
        let records = self.propagate(&mut frame, start, |site, frame| {
            for &(s, k) in faults {
                if s == site && k > 0 {
                    apply_outcome(frame, &self.noise_sites[s], k);
                }
            }
        });
        Ok(self.shot_from_records(&records))
    }
}

fn apply_outcome(frame: &mut PauliString, ch: &Channel, k: usize) {
    for (q, f) in ch.outcome(k) {
        let (x, z) = f.bits();
        frame.xor_factor(q, x, z);
    }
}

/// An error mechanism: the detectors it flips, whether it flips the logical
/// observable, and its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct DemFault {
    pub detectors: Vec<usize>,
    pub logical: bool,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub n_detectors: usize,
    pub faults: Vec<DemFault>,
}

/// Probability that exactly one of two independent events happens.
pub fn xor_merge(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Enumerates every elementary fault (each nontrivial outcome of each noise
/// site), propagates it, and merges faults with identical effect. Faults
/// with no effect are dropped. Order of the result follows first occurrence.
pub fn enumerate_fault_effects(circuit: &NoisyCircuit) -> DetectorErrorModel {
    let jobs: Vec<(usize, usize)> = circuit
        .noise_sites
        .iter()
        .enumerate()
        .flat_map(|(s, ch)| (1..=ch.n_outcomes()).map(move |k| (s, k)))
        .collect();
    let effects: Vec<(Vec<usize>, bool, f64)> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let shot = circuit.inject_single_fault(s, k).expect("valid site");
            let ch = &circuit.noise_sites[s];
            let dets = shot
                .detectors
                .iter()
                .enumerate()
                .filter_map(|(i, &b)| b.then_some(i))
                .collect();
            (dets, shot.logical_flip, ch.probability() / ch.n_outcomes() as f64)
        })
        .collect();

    let mut index: std::collections::HashMap<(Vec<usize>, bool), usize> = Default::default();
    let mut faults: Vec<DemFault> = Vec::new();
    for (dets, logical, p) in effects {
        if (dets.is_empty() && !logical) || p == 0.0 {
            continue;
        }
        match index.get(&(dets.clone(), logical)) {
            Some(&i) => faults[i].probability = xor_merge(faults[i].probability, p),
            None => {
                index.insert((dets.clone(), logical), faults.len());
                faults.push(DemFault { detectors: dets, logical, probability: p });
            }
        }
    }
    DetectorErrorModel {
        n_detectors: circuit.schedule.n_detectors(),
        faults,
    }
}
