use num_complex::Complex;
use num_traits::{Float, FloatConst};

use crate::error::{invalid, Result};
use crate::pauli::Pauli;

pub const MAX_QUBITS: usize = 12;

/// Dense state of up to [`MAX_QUBITS`] qubits. Bit `q` of a basis index is
/// qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<F> {
    n: usize,
    amps: Vec<Complex<F>>,
}

impl<F: Float + FloatConst> StateVector<F> {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(invalid(format!("{n} qubits exceed the limit of {MAX_QUBITS}")));
        }
        if index >= 1 << n {
            return Err(invalid("basis index out of range"));
        }
        let mut amps = vec![Complex::new(F::zero(), F::zero()); 1 << n];
        amps[index] = Complex::new(F::one(), F::zero());
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex<F>>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n > MAX_QUBITS {
            return Err(invalid("amplitude count must be a power of two up to 2^12"));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<F>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> F {
        self.amps.iter().fold(F::zero(), |a, c| a + c.norm_sqr())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> F {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(F::zero(), F::zero()), |a, (x, y)| a + x.conj() * y)
            .norm_sqr()
    }

    fn pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex<F>, &mut Complex<F>)) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (lo, hi) = self.amps.split_at_mut(i | bit);
                f(&mut lo[i], &mut hi[0]);
            }
        }
    }

    fn phase_on_one(&mut self, q: usize, ph: Complex<F>) {
        let bit = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = *a * ph;
            }
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        self.pairs(q, std::mem::swap);
    }

    pub fn apply_z(&mut self, q: usize) {
        self.phase_on_one(q, Complex::new(-F::one(), F::zero()));
    }

    pub fn apply_y(&mut self, q: usize) {
        let i = Complex::new(F::zero(), F::one());
        self.pairs(q, |a, b| {
            let (x0, x1) = (*a, *b);
            *a = -i * x1;
            *b = i * x0;
        });
    }

    pub fn apply_h(&mut self, q: usize) {
        let s = F::FRAC_1_SQRT_2();
        self.pairs(q, |a, b| {
            let (x0, x1) = (*a, *b);
            *a = (x0 + x1) * s;
            *b = (x0 - x1) * s;
        });
    }

    pub fn apply_t(&mut self, q: usize) {
        let s = F::FRAC_1_SQRT_2();
        self.phase_on_one(q, Complex::new(s, s));
    }

    pub fn apply_tdg(&mut self, q: usize) {
        let s = F::FRAC_1_SQRT_2();
        self.phase_on_one(q, Complex::new(s, -s));
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1 << c, 1 << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Exact Toffoli, used as a reference for decompositions.
    pub fn apply_toffoli(&mut self, a: usize, b: usize, t: usize) {
        let (ab, bb, tb) = (1 << a, 1 << b, 1 << t);
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_x(q),
            Pauli::Y => self.apply_y(q),
            Pauli::Z => self.apply_z(q),
        }
    }

    /// Probability of each value of the listed qubits, indexed by the bits
    /// in list order.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<F> {
        let mut out = vec![F::zero(); 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let k = qubits
                .iter()
                .enumerate()
                .fold(0, |k, (j, &q)| k | (((i >> q) & 1) << j));
            out[k] = out[k] + a.norm_sqr();
        }
        out
    }

    /// Reduced density matrix of `keep` (row-major, `2^k x 2^k`), tracing
    /// out every other qubit.
    pub fn reduced_density(&self, keep: &[usize]) -> Vec<Complex<F>> {
        let k = keep.len();
        let dim = 1 << k;
        let keep_mask: usize = keep.iter().map(|&q| 1 << q).sum();
        let sub = |i: usize| {
            keep.iter()
                .enumerate()
                .fold(0, |s, (j, &q)| s | (((i >> q) & 1) << j))
        };
        let mut rho = vec![Complex::new(F::zero(), F::zero()); dim * dim];
        for i in 0..self.amps.len() {
            if self.amps[i].norm_sqr() == F::zero() {
                continue;
            }
            let rest = i & !keep_mask;
            let si = sub(i);
            for (j, aj) in self.amps.iter().enumerate() {
                if j & !keep_mask == rest {
                    rho[si * dim + sub(j)] = rho[si * dim + sub(j)] + self.amps[i] * aj.conj();
                }
            }
        }
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type SV = StateVector<f64>;

    #[test]
    fn limits() {
        assert!(SV::zero(13).is_err());
        assert!(SV::basis(2, 4).is_err());
        assert!(SV::from_amplitudes(vec![Complex::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn gates_are_unitary_and_involutive() {
        let mut s = SV::zero(3).unwrap();
        s.apply_h(0);
        s.apply_t(0);
        s.apply_cnot(0, 2);
        s.apply_h(1);
        s.apply_y(1);
        s.apply_toffoli(0, 1, 2);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let before = s.clone();
        for q in 0..3 {
            s.apply_x(q);
            s.apply_x(q);
            s.apply_h(q);
            s.apply_h(q);
            s.apply_t(q);
            s.apply_tdg(q);
        }
        assert!((s.fidelity(&before) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_is_i_x_z() {
        let mut a = SV::zero(1).unwrap();
        a.apply_h(0);
        a.apply_t(0);
        let mut b = a.clone();
        a.apply_y(0);
        b.apply_z(0);
        b.apply_x(0);
        // Y = iXZ
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y * Complex::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn marginals_and_reduced_state() {
        let mut s = SV::zero(2).unwrap();
        s.apply_h(0);
        s.apply_cnot(0, 1);
        let m = s.marginal(&[1]);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        let rho = s.reduced_density(&[0]);
        assert!((rho[0].re - 0.5).abs() < 1e-12 && rho[1].norm() < 1e-12);
        let full = s.reduced_density(&[0, 1]);
        assert!((full[3].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_precision() {
        let mut s = StateVector::<f32>::zero(2).unwrap();
        s.apply_h(0);
        s.apply_cnot(0, 1);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
