//! Flat key/value configuration files (TOML syntax).
//!
//! Hardware keys use microseconds and nanoseconds as their names say. Either
//! `t_m_ns` or `r_decoh_target` may fix the measurement window, not both.
//! Unknown keys are rejected.
//!
//! ```toml
//! t1_us = 200
//! t2_us = 150
//! r_decoh_target = 200
//! noise_scale = 1.0
//! distances = [3, 5, 7]
//! n_shots = 2000
//! seed = 7
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{config_err, Error, Result};
use crate::experiments::SweepKind;
use crate::noise::{apply_noise_scale, t_m_for_ratio, HardwareParams};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    t1_us: Option<f64>,
    t2_us: Option<f64>,
    t_1q_ns: Option<f64>,
    t_2q_ns: Option<f64>,
    t_idle_op_ns: Option<f64>,
    t_m_ns: Option<f64>,
    r_decoh_target: Option<f64>,
    p_1q_impl: Option<f64>,
    p_2q_impl: Option<f64>,
    p_meas_impl: Option<f64>,
    noise_scale: Option<f64>,
    double_meas_flip: Option<bool>,

    sweep_kind: Option<String>,
    distances: Option<Vec<usize>>,
    r_values: Option<Vec<f64>>,
    s_values: Option<Vec<f64>>,
    fixed_r: Option<f64>,
    fixed_s: Option<f64>,
    n_shots: Option<u64>,
    seed: Option<u64>,
    alpha: Option<f64>,
    alphas: Option<Vec<f64>>,
    escalation: Option<u64>,
    refine_steps: Option<usize>,
    workers: Option<usize>,
}

/// Everything a run needs. `hardware` holds the base (unscaled) times;
/// `t_m` there is the explicit or default window and is overridden by
/// `r_decoh_target` when that is set.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub hardware: HardwareParams<f64>,
    pub r_decoh_target: Option<f64>,
    pub noise_scale: f64,
    pub double_meas_flip: bool,
    pub sweep: SweepConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Optional; the command line may also choose the sweep.
    pub sweep_kind: Option<SweepKind>,
    pub distances: Vec<usize>,
    pub r_values: Vec<f64>,
    pub s_values: Vec<f64>,
    pub fixed_r: f64,
    pub fixed_s: f64,
    pub n_shots: u64,
    pub seed: u64,
    pub alpha: f64,
    /// Values of alpha reported by break-even extraction.
    pub alphas: Vec<f64>,
    /// Shot multiplier for refinement near a crossing.
    pub escalation: u64,
    /// Bisection steps in break-even refinement.
    pub refine_steps: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub hardware: HardwareParams<f64>,
    pub double_meas_flip: bool,
}

/// `n` evenly spaced points in `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sweep_kind: None,
            distances: vec![3, 5, 7, 9, 11],
            r_values: vec![20.0, 50.0, 100.0, 200.0, 400.0, 800.0],
            s_values: linspace(0.5, 2.0, 8),
            fixed_r: 200.0,
            fixed_s: 1.0,
            n_shots: 2000,
            seed: 0,
            alpha: 3.5,
            alphas: vec![3.0, 3.5, 4.0],
            escalation: 10,
            refine_steps: 4,
            workers: None,
            hardware: HardwareParams::table1(),
            double_meas_flip: false,
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            hardware: HardwareParams::table1(),
            r_decoh_target: None,
            noise_scale: 1.0,
            double_meas_flip: false,
            sweep: SweepConfig::default(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(key, format!("must be positive and finite, got {v}")))
    }
}

fn probability(key: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(config_err(key, format!("must lie in [0, 1], got {v}")))
    }
}

fn nonempty<T>(key: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(config_err(key, "must not be empty"))
    } else {
        Ok(v)
    }
}

/// Pulls the offending key name out of a TOML error, if there is one.
fn toml_key(e: &toml::de::Error) -> String {
    let msg = e.message();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return rest[..end].to_string();
        }
    }
    e.span()
        .map(|_| msg.split('`').nth(1).unwrap_or("<file>").to_string())
        .unwrap_or_else(|| "<file>".into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
            key: toml_key(&e),
            message: e.message().to_string(),
        })?;
        let base = HardwareParams::<f64>::table1();
        let us = |key: &str, v: Option<f64>, default: f64| -> Result<f64> {
            v.map_or(Ok(default), |x| positive(key, x).map(|x| x * 1e-6))
        };
        let ns = |key: &str, v: Option<f64>, default: f64| -> Result<f64> {
            v.map_or(Ok(default), |x| positive(key, x).map(|x| x * 1e-9))
        };
        if raw.t_m_ns.is_some() && raw.r_decoh_target.is_some() {
            return Err(config_err("r_decoh_target", "conflicts with t_m_ns; set only one"));
        }
        let hardware = HardwareParams {
            t1: us("t1_us", raw.t1_us, base.t1)?,
            t2: us("t2_us", raw.t2_us, base.t2)?,
            t_1q: ns("t_1q_ns", raw.t_1q_ns, base.t_1q)?,
            t_2q: ns("t_2q_ns", raw.t_2q_ns, base.t_2q)?,
            t_idle_op: ns("t_idle_op_ns", raw.t_idle_op_ns, base.t_idle_op)?,
            t_m: ns("t_m_ns", raw.t_m_ns, base.t_m)?,
            p_1q_impl: raw.p_1q_impl.map_or(Ok(base.p_1q_impl), |v| probability("p_1q_impl", v))?,
            p_2q_impl: raw.p_2q_impl.map_or(Ok(base.p_2q_impl), |v| probability("p_2q_impl", v))?,
            p_meas_impl: raw
                .p_meas_impl
                .map_or(Ok(base.p_meas_impl), |v| probability("p_meas_impl", v))?,
        };
        let r_decoh_target = match raw.r_decoh_target {
            Some(r) if !(r >= 1.0 && r.is_finite()) => {
                return Err(config_err("r_decoh_target", format!("must be a finite value >= 1, got {r}")))
            }
            r => r,
        };
        let noise_scale = raw.noise_scale.map_or(Ok(1.0), |s| positive("noise_scale", s))?;
        let double_meas_flip = raw.double_meas_flip.unwrap_or(false);

        let d = SweepConfig::default();
        let distances = nonempty("distances", raw.distances.unwrap_or(d.distances))?;
        if let Some(&bad) = distances.iter().find(|&&x| x < 3 || x % 2 == 0) {
            return Err(config_err("distances", format!("distance {bad} is not odd and >= 3")));
        }
        let r_values = nonempty("r_values", raw.r_values.unwrap_or(d.r_values))?;
        if let Some(&bad) = r_values.iter().find(|&&r| !(r >= 1.0 && r.is_finite())) {
            return Err(config_err("r_values", format!("ratio {bad} must be >= 1")));
        }
        let s_values = nonempty("s_values", raw.s_values.unwrap_or(d.s_values))?;
        for &s in &s_values {
            positive("s_values", s)?;
        }
        let alphas = nonempty("alphas", raw.alphas.unwrap_or(d.alphas))?;
        for &a in &alphas {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(config_err("alphas", format!("alpha {a} must be non-negative")));
            }
        }
        let alpha = raw.alpha.unwrap_or(d.alpha);
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(config_err("alpha", format!("must be non-negative, got {alpha}")));
        }
        let fixed_r = raw.fixed_r.unwrap_or(d.fixed_r);
        if !(fixed_r >= 1.0 && fixed_r.is_finite()) {
            return Err(config_err("fixed_r", format!("must be >= 1, got {fixed_r}")));
        }
        let n_shots = raw.n_shots.unwrap_or(d.n_shots);
        if n_shots == 0 {
            return Err(config_err("n_shots", "must be at least 1"));
        }
        let escalation = raw.escalation.unwrap_or(d.escalation);
        if escalation == 0 {
            return Err(config_err("escalation", "must be at least 1"));
        }
        if raw.workers == Some(0) {
            return Err(config_err("workers", "must be at least 1"));
        }
        let sweep_kind = raw
            .sweep_kind
            .map(|k| k.parse().map_err(|_| config_err("sweep_kind", format!("unknown sweep `{k}`"))))
            .transpose()?;
        let sweep = SweepConfig {
            sweep_kind,
            distances,
            r_values,
            s_values,
            fixed_r,
            fixed_s: raw.fixed_s.map_or(Ok(d.fixed_s), |s| positive("fixed_s", s))?,
            n_shots,
            seed: raw.seed.unwrap_or(d.seed),
            alpha,
            alphas,
            escalation,
            refine_steps: raw.refine_steps.unwrap_or(d.refine_steps),
            workers: raw.workers,
            hardware,
            double_meas_flip,
        };
        Ok(Self { hardware, r_decoh_target, noise_scale, double_meas_flip, sweep })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Hardware after noise scaling, with `t_m` chosen from
    /// `r_decoh_target` when one is configured.
    pub fn effective_hardware(&self) -> Result<HardwareParams<f64>> {
        let mut h = apply_noise_scale(&self.hardware, self.noise_scale)?;
        if let Some(r) = self.r_decoh_target {
            h.t_m = t_m_for_ratio(&h, r)?;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.sweep.s_values.len(), 8);
        assert_eq!(c.sweep.s_values[0], 0.5);
        assert_eq!(c.sweep.s_values[7], 2.0);
    }

    #[test]
    fn units() {
        let c = Config::parse("t1_us = 100\nt_m_ns = 500\np_meas_impl = 0.01").unwrap();
        assert!((c.hardware.t1 - 100e-6).abs() < 1e-18);
        assert!((c.hardware.t_m - 500e-9).abs() < 1e-18);
        assert_eq!(c.hardware.p_meas_impl, 0.01);
    }

    #[test]
    fn unknown_key_is_named() {
        match Config::parse("t1_us = 100\nbogus_key = 3") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bogus_key"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_name_their_key() {
        for (text, key) in [
            ("t2_us = -1", "t2_us"),
            ("p_2q_impl = 2.0", "p_2q_impl"),
            ("distances = [4]", "distances"),
            ("distances = []", "distances"),
            ("r_values = [0.5]", "r_values"),
            ("n_shots = 0", "n_shots"),
            ("sweep_kind = \"sideways\"", "sweep_kind"),
            ("noise_scale = 0", "noise_scale"),
            ("t_m_ns = 100\nr_decoh_target = 20", "r_decoh_target"),
        ] {
            match Config::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn sweep_keys() {
        let c = Config::parse("sweep_kind = \"noise_scale\"\ns_values = [1.0, 2.0]\nworkers = 2\nescalation = 3").unwrap();
        assert_eq!(c.sweep.sweep_kind, Some(SweepKind::NoiseScale));
        assert_eq!(c.sweep.s_values, vec![1.0, 2.0]);
        assert_eq!(c.sweep.workers, Some(2));
        assert_eq!(c.sweep.escalation, 3);
    }

    #[test]
    fn ratio_target() {
        let c = Config::parse("r_decoh_target = 200\nnoise_scale = 2").unwrap();
        let h = c.effective_hardware().unwrap();
        let r = crate::noise::derive_rates(&h).unwrap();
        assert!((r.r_decoh - 200.0).abs() < 1e-6);
        assert!((h.t1 - 100e-6).abs() < 1e-15);
    }
}
