//! Pauli operators on `n` qubits with bit-packed supports.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit, packed into
//! 64-qubit words. A qubit with both bits set carries the Hermitian `Y`
//! factor, so `P * P` is always the identity with phase `+1`. The overall
//! phase is kept as a power of `i`: products of anticommuting operators
//! pick up `±i`, while Clifford conjugation only ever produces `±1`.
//!
//! Qubit indices are 0-based in the API. The text form uses 1-based
//! labels, e.g. `+Z1*Z2*Z5*Z6`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Gates that a Pauli can be pushed through.
///
/// Only the Clifford variants are accepted by
/// [`PauliString::conjugate_through_gate`]; the others exist so that callers
/// get a typed [`Error::UnsupportedGate`] instead of silently wrong frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateRef {
    Cnot { control: usize, target: usize },
    H(usize),
    Swap(usize, usize),
    T(usize),
    Toffoli { controls: [usize; 2], target: usize },
    C3Not { controls: [usize; 3], target: usize },
}

/// Outcome of a commutation test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommutationResult {
    pub commutes: bool,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Phase as a power of `i`, in `0..4`.
    phase: u8,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words_for(n_qubits);
        Self {
            n_qubits,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// Builds an operator from `(qubit, factor)` pairs. Repeated qubits are
    /// multiplied in order.
    pub fn from_factors(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n_qubits);
        for &(q, f) in factors {
            if q >= n_qubits {
                return Err(invalid(format!("qubit {q} outside 0..{n_qubits}")));
            }
            let mut single = Self::identity(n_qubits);
            single.set(q, f);
            p = p.multiply(&single)?;
        }
        Ok(p)
    }

    /// `Z` on every listed qubit.
    pub fn z_on(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let f: Vec<_> = qubits.iter().map(|&q| (q, Pauli::Z)).collect();
        Self::from_factors(n_qubits, &f)
    }

    /// `X` on every listed qubit.
    pub fn x_on(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let f: Vec<_> = qubits.iter().map(|&q| (q, Pauli::X)).collect();
        Self::from_factors(n_qubits, &f)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Phase as a power of `i`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// `Some(+1)` or `Some(-1)` for real phases, `None` for `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / WORD, q % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    /// Overwrites the factor on `q` without touching the phase.
    pub fn set(&mut self, q: usize, f: Pauli) {
        let (w, b) = (q / WORD, q % WORD);
        let (fx, fz) = f.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | ((fx as u64) << b);
        self.z[w] = (self.z[w] & !mask) | ((fz as u64) << b);
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    /// Multiplies a single-qubit factor into `q`, ignoring the phase.
    /// This is the frame update used by the samplers, where the global phase
    /// carries no information.
    #[inline]
    pub fn xor_factor(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = (q / WORD, q % WORD);
        self.x[w] ^= (x as u64) << b;
        self.z[w] ^= (z as u64) << b;
    }

    pub fn clear_qubit(&mut self, q: usize) {
        self.set(q, Pauli::I);
    }

    pub fn x_support(&self) -> Vec<usize> {
        bits_of(&self.x, self.n_qubits)
    }

    pub fn z_support(&self) -> Vec<usize> {
        bits_of(&self.z, self.n_qubits)
    }

    /// Qubits with a nontrivial factor.
    pub fn support(&self) -> Vec<usize> {
        let or: Vec<u64> = self.x.iter().zip(&self.z).map(|(a, b)| a | b).collect();
        bits_of(&or, self.n_qubits)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Same operator up to phase.
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(invalid(format!(
                "size mismatch: {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// Group product `self * other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            let (px, pz, qx, qz) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (p_x, p_y, p_z) = (px & !pz, px & pz, !px & pz);
            let (q_x, q_y, q_z) = (qx & !qz, qx & qz, !qx & qz);
            // XY = iZ, YZ = iX, ZX = iY and the reverses give -i.
            plus += ((p_x & q_y) | (p_y & q_z) | (p_z & q_x)).count_ones();
            minus += ((p_y & q_x) | (p_z & q_y) | (p_x & q_z)).count_ones();
            x.push(px ^ qx);
            z.push(pz ^ qz);
        }
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        Ok(Self {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: phase as u8,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<CommutationResult> {
        self.check_size(other)?;
        let overlaps: u32 = (0..self.x.len())
            .map(|i| ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones())
            .sum();
        Ok(CommutationResult {
            commutes: overlaps % 2 == 0,
        })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(invalid(format!("gate qubit {q} outside 0..{}", self.n_qubits)));
        }
        Ok(())
    }

    /// Heisenberg propagation `U P U†` through a Clifford gate.
    pub fn conjugate_through_gate(&self, gate: GateRef) -> Result<Self> {
        let mut out = self.clone();
        match gate {
            GateRef::Cnot { control, target } => {
                out.check_qubit(control)?;
                out.check_qubit(target)?;
                if control == target {
                    return Err(invalid("CNOT control equals target"));
                }
                out.apply_cnot(control, target);
            }
            GateRef::H(q) => {
                out.check_qubit(q)?;
                out.apply_h(q);
            }
            GateRef::Swap(a, b) => {
                out.check_qubit(a)?;
                out.check_qubit(b)?;
                out.apply_swap(a, b);
            }
            other => return Err(Error::UnsupportedGate(format!("{other:?} is not Clifford"))),
        }
        debug_assert!(out.phase % 2 == self.phase % 2);
        Ok(out)
    }

    /// In-place CNOT conjugation; indices are not checked.
    #[inline]
    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
        if xc && zt && !(xt ^ zc) {
            self.negate();
        }
        if xc {
            self.xor_factor(t, true, false);
        }
        if zt {
            self.xor_factor(c, false, true);
        }
    }

    /// In-place Hadamard conjugation.
    #[inline]
    pub fn apply_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.negate();
        }
        if x != z {
            self.xor_factor(q, true, true);
        }
    }

    #[inline]
    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (fa, fb) = (self.get(a), self.get(b));
        self.set(a, fb);
        self.set(b, fa);
    }
}

fn bits_of(words: &[u64], n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let b = w.trailing_zeros() as usize;
            let q = i * WORD + b;
            if q < n {
                out.push(q);
            }
            w &= w - 1;
        }
    }
    out
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        let support = self.support();
        if support.is_empty() {
            return f.write_str("I");
        }
        for (k, q) in support.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}{}", self.get(*q).letter(), q + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({}; n={})", self, self.n_qubits)
    }
}

impl PauliString {
    /// Parses the text form (`+X1*Z3*Y7`, `-Z2`, `+I`) on `n_qubits` qubits.
    pub fn parse(s: &str, n_qubits: usize) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let mut p = Self::identity(n_qubits);
        if body != "I" && !body.is_empty() {
            for tok in body.split('*') {
                let mut chars = tok.chars();
                let f = match chars.next() {
                    Some('X') => Pauli::X,
                    Some('Y') => Pauli::Y,
                    Some('Z') => Pauli::Z,
                    _ => return Err(Error::Parse(format!("bad Pauli factor `{tok}`"))),
                };
                let label: usize = chars
                    .as_str()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad qubit label in `{tok}`")))?;
                if label == 0 || label > n_qubits {
                    return Err(Error::Parse(format!("qubit label {label} out of range")));
                }
                if p.get(label - 1) != Pauli::I {
                    return Err(Error::Parse(format!("qubit {label} repeated")));
                }
                p.set(label - 1, f);
            }
        }
        p.phase = phase;
        Ok(p)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses with `n_qubits` equal to the largest label present.
    fn from_str(s: &str) -> Result<Self> {
        let max_label = s
            .split(|c: char| !c.is_ascii_digit())
            .filter_map(|t| t.parse::<usize>().ok())
            .max()
            .unwrap_or(1);
        Self::parse(s, max_label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> PauliString {
        PauliString::parse(s, n).unwrap()
    }

    #[test]
    fn self_inverse() {
        let x1 = p("+X1", 3);
        let prod = x1.multiply(&x1).unwrap();
        assert!(prod.is_identity());
        assert_eq!(prod.sign(), Some(1));
    }

    #[test]
    fn x_times_z_is_y_type() {
        let prod = p("+X1", 2).multiply(&p("+Z1", 2)).unwrap();
        assert_eq!(prod.get(0), Pauli::Y);
        assert_eq!(prod.x_support(), vec![0]);
        assert_eq!(prod.z_support(), vec![0]);
        // XZ = -iY
        assert_eq!(prod.phase(), 3);
    }

    #[test]
    fn z_chain_product() {
        let prod = p("+Z1*Z2", 3).multiply(&p("+Z2*Z3", 3)).unwrap();
        assert_eq!(prod.to_string(), "+Z1*Z3");
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("+X1", 2).commutes(&p("+Z1*Z2", 2)).unwrap().commutes);
        assert!(p("+X1*X2", 2).commutes(&p("+Z1*Z2", 2)).unwrap().commutes);
        assert!(!p("+X5", 9).commutes(&p("+Z1*Z2*Z5*Z6", 9)).unwrap().commutes);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(matches!(
            p("+X1", 2).multiply(&p("+X1", 3)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(p("+X1", 2).commutes(&p("+X1", 3)).is_err());
    }

    #[test]
    fn cnot_propagation() {
        let cx = GateRef::Cnot { control: 0, target: 1 };
        assert_eq!(p("+X1", 2).conjugate_through_gate(cx).unwrap().to_string(), "+X1*X2");
        assert_eq!(p("+Z1", 2).conjugate_through_gate(cx).unwrap().to_string(), "+Z1");
        assert_eq!(p("+Z2", 2).conjugate_through_gate(cx).unwrap().to_string(), "+Z1*Z2");
        assert_eq!(p("+X2", 2).conjugate_through_gate(cx).unwrap().to_string(), "+X2");
        // X_c Z_t -> -Y_c Y_t
        assert_eq!(
            p("+X1*Z2", 2).conjugate_through_gate(cx).unwrap().to_string(),
            "-Y1*Y2"
        );
    }

    #[test]
    fn swap_and_h() {
        assert_eq!(
            p("+X1", 2).conjugate_through_gate(GateRef::Swap(0, 1)).unwrap().to_string(),
            "+X2"
        );
        assert_eq!(p("+X1", 1).conjugate_through_gate(GateRef::H(0)).unwrap().to_string(), "+Z1");
        assert_eq!(p("+Y1", 1).conjugate_through_gate(GateRef::H(0)).unwrap().to_string(), "-Y1");
    }

    #[test]
    fn non_clifford_rejected() {
        let t = GateRef::Toffoli { controls: [0, 1], target: 2 };
        assert!(matches!(
            p("+X1", 3).conjugate_through_gate(t),
            Err(Error::UnsupportedGate(_))
        ));
        assert!(p("+X1", 3).conjugate_through_gate(GateRef::T(0)).is_err());
        assert!(p("+X1", 2).conjugate_through_gate(GateRef::H(5)).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["+X1*Z3*Y7", "-Z2", "+I", "+iY1*X2"] {
            assert_eq!(p(s, 8).to_string(), s);
        }
        let q: PauliString = "+Z1*Z2*Z5*Z6".parse().unwrap();
        assert_eq!(q.n_qubits(), 6);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..2).prop_map(move |(fs, s)| {
            let mut p = PauliString::identity(n);
            for (q, f) in fs.into_iter().enumerate() {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][f as usize]);
            }
            if s == 1 {
                p.negate();
            }
            p
        })
    }

    fn arb_clifford(n: usize) -> impl Strategy<Value = GateRef> {
        prop_oneof![
            (0..n, 1..n).prop_map(move |(c, d)| GateRef::Cnot { control: c, target: (c + d) % n }),
            (0..n).prop_map(GateRef::H),
            (0..n, 1..n).prop_map(move |(a, d)| GateRef::Swap(a, (a + d) % n)),
        ]
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_pauli(8), b in arb_pauli(8), c in arb_pauli(8)) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn square_is_identity(a in arb_pauli(8)) {
            let sq = a.multiply(&a).unwrap();
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.sign(), Some(1));
        }

        #[test]
        fn conjugation_preserves_commutation(
            a in arb_pauli(6), b in arb_pauli(6), g in arb_clifford(6)
        ) {
            let before = a.commutes(&b).unwrap();
            let ca = a.conjugate_through_gate(g).unwrap();
            let cb = b.conjugate_through_gate(g).unwrap();
            prop_assert_eq!(before, ca.commutes(&cb).unwrap());
            // conjugation is a group homomorphism, so products map to products
            let prod = a.multiply(&b).unwrap().conjugate_through_gate(g).unwrap();
            prop_assert_eq!(prod, ca.multiply(&cb).unwrap());
            prop_assert!(ca.sign().is_some());
        }
    }
}
