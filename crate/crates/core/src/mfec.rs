//! Resource accounting and the coarse-grained fault-location model for
//! measurement-free error correction on stacked (3D) and planar (2D)
//! surface-code patches.
//!
//! A cycle is an X round followed by a Z round. At distance 3 an X round
//! costs `9 + 12 + 3 + 45 = 69` CNOTs: a transversal layer, syndrome
//! extraction, a remap onto the feedback register, and the coherent
//! correction built from three C³NOT (7 CNOTs each) and four Toffoli gates
//! (6 CNOTs each).
//!
//! For other distances the round total follows the pipelined 3D depth:
//! `round(69 * depth_3d(d) / 59)`, with `depth_3d` anchored at 59 and 158
//! and `7 d^2` beyond. Transversal, extraction and remap stages keep their
//! closed forms (`d^2`, `2d(d-1)`, `(d^2-1)/2 - 1`) and the correction
//! takes the remainder.
//!
//! A cycle fails when the pooled number of faulty gate and idle locations
//! exceeds `t = (d-1)/2`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::noise::DerivedRates;
use crate::rng::{shot_rng, unit_f64};
use crate::stats::{wilson_interval, Z95};

/// CNOTs in an optimal Toffoli decomposition.
pub const TOFFOLI_CNOTS: usize = 6;
/// CNOTs in a C³NOT (and the locally equivalent CCCZ).
pub const C3NOT_CNOTS: usize = 7;
pub const CCCZ_CNOTS: usize = 7;

pub const DEFAULT_ALPHA: f64 = 3.5;

pub fn toffoli_cnot_count() -> usize {
    TOFFOLI_CNOTS
}

pub fn c3not_cnot_count() -> usize {
    C3NOT_CNOTS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    SmSc,
    Mfec2d,
    Mfec3d,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::SmSc, Architecture::Mfec2d, Architecture::Mfec3d];

    /// Label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Architecture::SmSc => "smsc",
            Architecture::Mfec2d => "mfec_2d",
            Architecture::Mfec3d => "mfec_3d",
        }
    }

    pub fn is_mfec(self) -> bool {
        self != Architecture::SmSc
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smsc" | "sm-sc" | "sm_sc" => Ok(Architecture::SmSc),
            "2d" | "mfec_2d" | "mfec2d" => Ok(Architecture::Mfec2d),
            "3d" | "mfec_3d" | "mfec3d" => Ok(Architecture::Mfec3d),
            _ => Err(invalid(format!("unknown architecture `{s}`"))),
        }
    }
}

fn check_distance(d: usize) -> Result<()> {
    if d < 3 || d % 2 == 0 {
        return Err(invalid(format!("distance must be odd and >= 3, got {d}")));
    }
    Ok(())
}

/// CNOT depth of one pipelined 3D cycle.
pub fn depth_3d(d: usize) -> usize {
    match d {
        3 => 59,
        5 => 158,
        _ => 7 * d * d,
    }
}

/// CNOT depth of one planar cycle.
pub fn depth_2d(d: usize) -> usize {
    match d {
        3 => 203,
        5 => 558,
        _ => 23 * d * d,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XRoundBudget {
    pub transversal: usize,
    pub extraction: usize,
    pub remap: usize,
    pub correction: usize,
}

impl XRoundBudget {
    pub fn total(&self) -> usize {
        self.transversal + self.extraction + self.remap + self.correction
    }
}

pub fn x_round_cnot_budget(d: usize) -> Result<XRoundBudget> {
    check_distance(d)?;
    let transversal = d * d;
    let extraction = 2 * d * (d - 1);
    let remap = (d * d - 1) / 2 - 1;
    let total = if d == 3 {
        69
    } else {
        (69.0 * depth_3d(d) as f64 / 59.0).round() as usize
    };
    Ok(XRoundBudget {
        transversal,
        extraction,
        remap,
        correction: total - transversal - extraction - remap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceProfile {
    pub architecture: Architecture,
    pub distance: usize,
    pub n_qubits: usize,
    pub n_cnot_per_cycle: usize,
    pub cnot_depth_per_cycle: usize,
    pub n_gate_locations: usize,
    pub n_idle_locations: usize,
    pub alpha: f64,
}

impl ResourceProfile {
    /// Aligned `key value` lines.
    pub fn to_text(&self) -> String {
        let rows = [
            ("architecture", self.architecture.to_string()),
            ("distance", self.distance.to_string()),
            ("n_qubits", self.n_qubits.to_string()),
            ("n_cnot_per_cycle", self.n_cnot_per_cycle.to_string()),
            ("cnot_depth_per_cycle", self.cnot_depth_per_cycle.to_string()),
            ("n_gate_locations", self.n_gate_locations.to_string()),
            ("n_idle_locations", self.n_idle_locations.to_string()),
            ("alpha", self.alpha.to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k:<22}{v}\n")).collect()
    }

    pub const CSV_HEADER: &'static str =
        "arch,d,n_qubits,n_cnot_per_cycle,cnot_depth_per_cycle,n_gate_locations,n_idle_locations,alpha";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.architecture,
            self.distance,
            self.n_qubits,
            self.n_cnot_per_cycle,
            self.cnot_depth_per_cycle,
            self.n_gate_locations,
            self.n_idle_locations,
            self.alpha
        )
    }
}

pub fn build_profile(arch: Architecture, d: usize, alpha: f64) -> Result<ResourceProfile> {
    check_distance(d)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be a finite non-negative number"));
    }
    if arch == Architecture::SmSc {
        let cnots = 4 * d * (d - 1);
        return Ok(ResourceProfile {
            architecture: arch,
            distance: d,
            n_qubits: 2 * d * d - 1,
            n_cnot_per_cycle: cnots,
            cnot_depth_per_cycle: 8,
            n_gate_locations: cnots,
            n_idle_locations: d * d,
            alpha,
        });
    }
    let cycle = 2 * x_round_cnot_budget(d)?.total();
    let idle = (alpha * cycle as f64).round() as usize;
    let (depth, gates, idles) = match arch {
        Architecture::Mfec3d => (depth_3d(d), cycle, idle),
        _ => {
            let ratio = depth_2d(d) as f64 / depth_3d(d) as f64;
            (
                depth_2d(d),
                (cycle as f64 * ratio).round() as usize,
                (idle as f64 * ratio).round() as usize,
            )
        }
    };
    Ok(ResourceProfile {
        architecture: arch,
        distance: d,
        n_qubits: 4 * d * d - 1,
        n_cnot_per_cycle: cycle,
        cnot_depth_per_cycle: depth,
        n_gate_locations: gates,
        n_idle_locations: idles,
        alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McLogicalEstimate {
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_shots: u64,
    pub n_failures: u64,
}

impl McLogicalEstimate {
    pub fn from_counts(n_failures: u64, n_shots: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_failures, n_shots, Z95);
        let p_l = if n_shots == 0 { 0.0 } else { n_failures as f64 / n_shots as f64 };
        Self { p_l, ci_low, ci_high, n_shots, n_failures }
    }
}

/// `P(K <= k)` for `k = 0..=kmax` with `K ~ Binomial(n, p)`.
fn binomial_cdf_table(n: usize, p: f64, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    if p <= 0.0 {
        return vec![1.0; kmax + 1];
    }
    if p >= 1.0 {
        return (0..=kmax).map(|k| if k >= n { 1.0 } else { 0.0 }).collect();
    }
    let mut log_pmf = n as f64 * (-p).ln_1p();
    let odds = (p / (1.0 - p)).ln();
    let mut acc = 0.0;
    for k in 0..=kmax {
        if k <= n {
            acc += log_pmf.exp();
            if k < n {
                log_pmf += ((n - k) as f64 / (k + 1) as f64).ln() + odds;
            }
        }
        out.push(acc.min(1.0));
    }
    out
}

/// Smallest `k` with `u < cdf[k]`, capped at `cdf.len()`.
fn capped_quantile(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len())
}

/// Monte Carlo estimate of the pooled-threshold failure probability.
///
/// Each shot draws two uniforms from the `(seed, shot)` stream and maps them
/// through the binomial inverse CDFs, so estimates are monotone in the
/// rates and location counts under a fixed seed.
pub fn mc_logical_error(
    profile: &ResourceProfile,
    rates: &DerivedRates<f64>,
    n_shots: u64,
    seed: u64,
) -> Result<McLogicalEstimate> {
    if !profile.architecture.is_mfec() {
        return Err(invalid("the location model applies to MFEC architectures only"));
    }
    let t = (profile.distance - 1) / 2;
    let cdf_g = binomial_cdf_table(profile.n_gate_locations, rates.p_2q, t);
    let cdf_i = binomial_cdf_table(profile.n_idle_locations, rates.p_idle_op, t);
    let failures = (0..n_shots)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = shot_rng(seed, s);
            let kg = capped_quantile(&cdf_g, unit_f64(&mut rng));
            let ki = capped_quantile(&cdf_i, unit_f64(&mut rng));
            kg + ki > t
        })
        .count() as u64;
    Ok(McLogicalEstimate::from_counts(failures, n_shots))
}

/// `P(K >= k)` for `K ~ Binomial(n, p)`, summed upward so that small tails
/// keep full relative precision.
pub fn binomial_sf(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let odds = (p / (1.0 - p)).ln();
    let mut log_pmf = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    let mut sum = 0.0;
    for j in k..=n {
        let term = log_pmf.exp();
        sum += term;
        if j as f64 > n as f64 * p && term < sum * 1e-18 {
            break;
        }
        if j < n {
            log_pmf += ((n - j) as f64 / (j + 1) as f64).ln() + odds;
        }
    }
    sum.min(1.0)
}

fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Exact `P(K_gate + K_idle > t)` for independent binomial counts.
pub fn analytic_logical_error(profile: &ResourceProfile, rates: &DerivedRates<f64>) -> f64 {
    let m = (profile.distance - 1) / 2 + 1;
    let (ng, pg) = (profile.n_gate_locations, rates.p_2q);
    let (ni, pi) = (profile.n_idle_locations, rates.p_idle_op);
    let mut total = binomial_sf(ng, pg, m);
    for j in 0..m {
        total += binomial_pmf(ng, pg, j) * binomial_sf(ni, pi, m - j);
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{derive_rates, HardwareParams};

    fn base() -> DerivedRates<f64> {
        derive_rates(&HardwareParams::<f64>::table1()).unwrap()
    }

    #[test]
    fn gadget_counts() {
        assert_eq!(toffoli_cnot_count(), 6);
        assert_eq!(c3not_cnot_count(), 7);
        assert_eq!(CCCZ_CNOTS, 7);
        assert_eq!(3 * C3NOT_CNOTS + 4 * TOFFOLI_CNOTS, 45);
    }

    #[test]
    fn d3_round() {
        let b = x_round_cnot_budget(3).unwrap();
        assert_eq!((b.transversal, b.extraction, b.remap, b.correction), (9, 12, 3, 45));
        assert_eq!(b.total(), 69);
        assert!(x_round_cnot_budget(4).is_err());
        for d in [5, 7, 9, 11, 15] {
            let b = x_round_cnot_budget(d).unwrap();
            assert!(b.correction > 0);
        }
    }

    #[test]
    fn table_values() {
        let p3 = build_profile(Architecture::Mfec3d, 3, 3.5).unwrap();
        assert_eq!(
            (p3.n_qubits, p3.n_gate_locations, p3.n_idle_locations, p3.cnot_depth_per_cycle),
            (35, 138, 483, 59)
        );
        let p2 = build_profile(Architecture::Mfec2d, 3, 3.5).unwrap();
        assert_eq!((p2.n_qubits, p2.cnot_depth_per_cycle), (35, 203));
        assert_eq!(p2.n_gate_locations, (138.0f64 * 203.0 / 59.0).round() as usize);
        assert_eq!(p2.n_idle_locations, (483.0f64 * 203.0 / 59.0).round() as usize);
        let p25 = build_profile(Architecture::Mfec2d, 5, 3.5).unwrap();
        assert_eq!((p25.n_qubits, p25.cnot_depth_per_cycle), (99, 558));
        assert_eq!(build_profile(Architecture::Mfec3d, 5, 3.5).unwrap().cnot_depth_per_cycle, 158);
        let s = build_profile(Architecture::SmSc, 5, 3.5).unwrap();
        assert_eq!((s.n_qubits, s.cnot_depth_per_cycle), (49, 8));
        assert_eq!(build_profile(Architecture::Mfec3d, 7, 3.5).unwrap().cnot_depth_per_cycle, 343);
        assert_eq!(build_profile(Architecture::Mfec2d, 7, 3.5).unwrap().cnot_depth_per_cycle, 1127);
    }

    #[test]
    fn arch_parsing() {
        assert_eq!("3d".parse::<Architecture>().unwrap(), Architecture::Mfec3d);
        assert_eq!("2D".parse::<Architecture>().unwrap(), Architecture::Mfec2d);
        assert_eq!("smsc".parse::<Architecture>().unwrap(), Architecture::SmSc);
        assert!("4d".parse::<Architecture>().is_err());
    }

    #[test]
    fn zero_rates_never_fail() {
        let z = DerivedRates { p_1q: 0.0, p_2q: 0.0, p_idle_op: 0.0, p_meas: 0.0, r_decoh: 1.0 };
        let p = build_profile(Architecture::Mfec2d, 5, 3.5).unwrap();
        assert_eq!(mc_logical_error(&p, &z, 1000, 1).unwrap().n_failures, 0);
        assert_eq!(analytic_logical_error(&p, &z), 0.0);
    }

    #[test]
    fn smsc_rejected() {
        let p = build_profile(Architecture::SmSc, 3, 3.5).unwrap();
        assert!(mc_logical_error(&p, &base(), 10, 1).is_err());
    }

    #[test]
    fn single_location() {
        let p = ResourceProfile {
            architecture: Architecture::Mfec3d,
            distance: 1,
            n_qubits: 1,
            n_cnot_per_cycle: 1,
            cnot_depth_per_cycle: 1,
            n_gate_locations: 1,
            n_idle_locations: 0,
            alpha: 0.0,
        };
        let r = DerivedRates { p_1q: 0.0, p_2q: 0.125, p_idle_op: 0.3, p_meas: 0.0, r_decoh: 1.0 };
        assert!((analytic_logical_error(&p, &r) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn survival_function() {
        assert!((binomial_sf(10, 0.5, 10) - 0.5f64.powi(10)).abs() < 1e-18);
        assert!((binomial_sf(3, 0.2, 2) - (3.0 * 0.04 * 0.8 + 0.008)).abs() < 1e-15);
        // tiny tail keeps relative precision
        let tiny = binomial_sf(100, 1e-6, 3);
        assert!((tiny / (161_700.0 * 1e-18) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn d3_3d_scale() {
        let p = build_profile(Architecture::Mfec3d, 3, 3.5).unwrap();
        let a = analytic_logical_error(&p, &base());
        assert!(a > 0.02 && a < 0.08, "{a}");
        let mc = mc_logical_error(&p, &base(), 200_000, 4).unwrap();
        assert!(mc.ci_low <= a && a <= mc.ci_high, "{a} not in {mc:?}");
    }

    #[test]
    fn depth_ratio_dominance() {
        for d in [3, 5, 7, 9] {
            let r = base();
            let a2 = analytic_logical_error(&build_profile(Architecture::Mfec2d, d, 3.5).unwrap(), &r);
            let a3 = analytic_logical_error(&build_profile(Architecture::Mfec3d, d, 3.5).unwrap(), &r);
            assert!(a2 >= a3);
        }
    }
}
