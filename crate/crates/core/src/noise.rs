//! Decoherence-based mapping from hardware timings to per-location error
//! probabilities.
//!
//! Decoherence over an interval `t` is `1 - (1 - p_relax)(1 - p_deph)` with
//! `p_relax = 1 - exp(-t/T1)` and `p_deph = 1 - exp(-t/T2)`. Gate and
//! measurement locations add a constant implementation error on top and the
//! sum is clipped to one. All times are in seconds.

use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardwareParams<F> {
    pub t1: F,
    pub t2: F,
    pub t_1q: F,
    pub t_2q: F,
    pub t_idle_op: F,
    pub t_m: F,
    pub p_1q_impl: F,
    pub p_2q_impl: F,
    pub p_meas_impl: F,
}

/// Effective Pauli error probabilities for one set of hardware parameters.
///
/// `p_1q` is reported for completeness; none of the circuit channels use it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedRates<F> {
    pub p_1q: F,
    pub p_2q: F,
    pub p_idle_op: F,
    pub p_meas: F,
    pub r_decoh: F,
}

fn c<F: Float>(x: f64) -> F {
    F::from(x).unwrap()
}

impl<F: Float> HardwareParams<F> {
    /// Base superconducting parameters; `t_m` defaults to the idle slot so
    /// that the decoherence ratio starts at one.
    pub fn table1() -> Self {
        Self {
            t1: c(200e-6),
            t2: c(150e-6),
            t_1q: c(20e-9),
            t_2q: c(40e-9),
            t_idle_op: c(40e-9),
            t_m: c(40e-9),
            p_1q_impl: F::zero(),
            p_2q_impl: c(2e-4),
            p_meas_impl: c(5e-3),
        }
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let times = [
            ("t1", self.t1),
            ("t2", self.t2),
            ("t_1q", self.t_1q),
            ("t_2q", self.t_2q),
            ("t_idle_op", self.t_idle_op),
            ("t_m", self.t_m),
        ];
        for (name, t) in times {
            if !(t > F::zero()) || !t.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite")));
            }
        }
        let probs = [
            ("p_1q_impl", self.p_1q_impl),
            ("p_2q_impl", self.p_2q_impl),
            ("p_meas_impl", self.p_meas_impl),
        ];
        for (name, p) in probs {
            if !(p >= F::zero() && p <= F::one()) {
                return Err(invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        let mut warnings = Vec::new();
        if self.t2 > c::<F>(2.0) * self.t1 {
            warnings.push("t2 exceeds 2*t1, which is unphysical".to_string());
        }
        Ok(warnings)
    }

    /// Divides both coherence times by `s`; durations and implementation
    /// errors are unchanged.
    pub fn apply_noise_scale(&self, s: F) -> Result<Self> {
        apply_noise_scale(self, s)
    }
}

/// Probability that an idle interval of length `t` suffers a decoherence
/// event.
pub fn p_decoh<F: Float>(t: F, t1: F, t2: F) -> Result<F> {
    if t < F::zero() || t.is_nan() {
        return Err(invalid("negative decoherence interval"));
    }
    if !(t1 > F::zero() && t2 > F::zero()) {
        return Err(invalid("coherence times must be positive"));
    }
    if t.is_infinite() {
        return Ok(F::one());
    }
    // expm1 keeps full relative precision for t << T1, T2
    let p_relax = -(-t / t1).exp_m1();
    let p_deph = -(-t / t2).exp_m1();
    Ok((p_relax + p_deph - p_relax * p_deph).min(F::one()))
}

fn clip01<F: Float>(p: F) -> F {
    p.max(F::zero()).min(F::one())
}

pub fn derive_rates<F: Float>(h: &HardwareParams<F>) -> Result<DerivedRates<F>> {
    h.validate()?;
    let pd = |t| p_decoh(t, h.t1, h.t2);
    let idle = pd(h.t_idle_op)?;
    let meas = pd(h.t_m)?;
    Ok(DerivedRates {
        p_1q: clip01(pd(h.t_1q)? + h.p_1q_impl),
        p_2q: clip01(pd(h.t_2q)? + h.p_2q_impl),
        p_idle_op: clip01(idle),
        p_meas: clip01(meas + h.p_meas_impl),
        r_decoh: meas / idle,
    })
}

/// Measurement time at which the decoherence ratio equals `target_ratio`.
///
/// `p_decoh(t) = 1 - exp(-t (1/T1 + 1/T2))`, so the inverse is closed form.
pub fn t_m_for_ratio<F: Float>(h: &HardwareParams<F>, target_ratio: F) -> Result<F> {
    if !(target_ratio >= F::one()) || !target_ratio.is_finite() {
        return Err(invalid("target decoherence ratio must be a finite value >= 1"));
    }
    let idle = p_decoh(h.t_idle_op, h.t1, h.t2)?;
    let target = target_ratio * idle;
    if target >= F::one() {
        return Err(Error::OutOfRange(format!(
            "ratio {} needs p_decoh >= 1 at the current coherence times",
            target_ratio.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let rate = h.t1.recip() + h.t2.recip();
    Ok(-(-target).ln_1p() / rate)
}

pub fn apply_noise_scale<F: Float>(h: &HardwareParams<F>, s: F) -> Result<HardwareParams<F>> {
    if !(s > F::zero()) || !s.is_finite() {
        return Err(invalid("noise scale must be positive"));
    }
    Ok(HardwareParams {
        t1: h.t1 / s,
        t2: h.t2 / s,
        ..*h
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type H = HardwareParams<f64>;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_interval() {
        assert_eq!(p_decoh(0.0, 200e-6, 150e-6).unwrap(), 0.0);
    }

    #[test]
    fn two_qubit_gate_interval() {
        // 1 - exp(-40ns (1/200us + 1/150us)) at 40 digits
        let p = p_decoh(40e-9, 200e-6, 150e-6).unwrap();
        assert!(rel(p, 4.665_577_947_140_734e-4) < 1e-13);
    }

    #[test]
    fn long_interval_saturates() {
        assert_eq!(p_decoh(f64::INFINITY, 1.0, 1.0).unwrap(), 1.0);
        assert!(p_decoh(1.0, 1e-6, 1e-6).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(matches!(p_decoh(-1e-9, 1e-4, 1e-4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn base_rates() {
        let r = derive_rates(&H::table1()).unwrap();
        assert_eq!(r.r_decoh, 1.0);
        assert!(rel(r.p_2q, 6.665_577_947_140_734e-4) < 1e-12);
        assert!(rel(r.p_idle_op, 4.665_577_947_140_734e-4) < 1e-12);
    }

    #[test]
    fn tiny_measurement_window_leaves_impl_error() {
        let h = H { t_m: 1e-15, ..H::table1() };
        let r = derive_rates(&h).unwrap();
        assert!((r.p_meas - 5e-3).abs() < 1e-10);
    }

    #[test]
    fn clipping() {
        let h = H { t_m: 1.0, p_meas_impl: 0.9, ..H::table1() };
        assert_eq!(derive_rates(&h).unwrap().p_meas, 1.0);
    }

    #[test]
    fn ratio_one_is_idle_slot() {
        let h = H::table1();
        let t = t_m_for_ratio(&h, 1.0).unwrap();
        assert!(rel(t, 40e-9) < 1e-12);
    }

    #[test]
    fn ratio_200() {
        let h = H::table1();
        let t = t_m_for_ratio(&h, 200.0).unwrap();
        // 40-digit inverse of the closed form
        assert!(rel(t, 8.396_262_238_001_538e-6) < 1e-12);
        let r = derive_rates(&H { t_m: t, ..h }).unwrap();
        assert!(rel(r.r_decoh, 200.0) < 1e-9);
        assert!(rel(p_decoh(t, h.t1, h.t2).unwrap(), 9.331_155_894_281_469e-2) < 1e-12);
    }

    #[test]
    fn ratio_monotone_and_bounded() {
        let h = H::table1();
        let t400 = t_m_for_ratio(&h, 400.0).unwrap();
        let t800 = t_m_for_ratio(&h, 800.0).unwrap();
        assert!(t800 > t400);
        assert!(matches!(t_m_for_ratio(&h, 1e4), Err(Error::OutOfRange(_))));
        assert!(t_m_for_ratio(&h, 0.5).is_err());
    }

    #[test]
    fn noise_scale() {
        let h = H::table1();
        assert_eq!(apply_noise_scale(&h, 1.0).unwrap(), h);
        let h2 = apply_noise_scale(&h, 2.0).unwrap();
        assert!(rel(h2.t1, 100e-6) < 1e-15 && rel(h2.t2, 75e-6) < 1e-15);
        assert_eq!(h2.t_2q, h.t_2q);
        assert!(rel(apply_noise_scale(&h, 0.5).unwrap().t1, 400e-6) < 1e-15);
        assert!(apply_noise_scale(&h, 0.0).is_err());
        assert!(apply_noise_scale(&h, -1.0).is_err());
    }

    #[test]
    fn ratio_survives_rescaling() {
        let base = H::table1();
        for s in [0.5, 0.8, 1.3, 2.0] {
            let h = apply_noise_scale(&base, s).unwrap();
            let t_m = t_m_for_ratio(&h, 200.0).unwrap();
            let r = derive_rates(&H { t_m, ..h }).unwrap();
            assert!(rel(r.r_decoh, 200.0) < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn works_in_f32() {
        let p = p_decoh(40e-9f32, 200e-6, 150e-6).unwrap();
        assert!((p - 4.6656e-4).abs() < 1e-7);
    }

    #[test]
    fn warns_on_unphysical_t2() {
        let h = H { t2: 500e-6, ..H::table1() };
        assert_eq!(h.validate().unwrap().len(), 1);
        assert!(H { t1: 0.0, ..H::table1() }.validate().is_err());
    }
}
