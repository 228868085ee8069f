//! Parameter sweeps over decoherence ratio, noise scale and distance, and
//! break-even extraction between the measured and measurement-free codes.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::decoder::{build_graph, decode, DetectorGraph};
use crate::error::{invalid, Error, Result};
use crate::frame_sim::{enumerate_fault_effects, NoiseOptions, NoisyCircuit};
use crate::mfec::{build_profile, mc_logical_error, Architecture, McLogicalEstimate};
use crate::noise::{apply_noise_scale, derive_rates, t_m_for_ratio, DerivedRates};
use crate::rng::derive_seed;
use crate::surface_code::{build_layout, build_memory_circuit, Basis};

pub const CSV_HEADER: &str = "arch,d,r_decoh,s,p_l,ci_low,ci_high,n_shots,seed";
pub const RATES_HEADER: &str = "d,r_decoh,s,p_1q,p_2q,p_idle_op,p_meas";
pub const RSTAR_HEADER: &str = "d,alpha,r_star,r_low,r_high,status";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepKind {
    RDecoh,
    NoiseScale,
    Distance,
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rdecoh" | "r-decoh" => Ok(SweepKind::RDecoh),
            "noise-scale" | "scale" => Ok(SweepKind::NoiseScale),
            "distance" => Ok(SweepKind::Distance),
            _ => Err(invalid(format!("unknown sweep kind `{s}`"))),
        }
    }
}

/// One operating point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub d: usize,
    pub r_decoh: f64,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub arch: Architecture,
    pub d: usize,
    pub r_decoh: f64,
    pub s: f64,
    pub estimate: McLogicalEstimate,
    pub seed: u64,
    /// Rates shared by all architectures at this point.
    pub rates: DerivedRates<f64>,
}

impl SweepRow {
    pub fn to_csv_row(&self) -> String {
        let e = &self.estimate;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.arch, self.d, self.r_decoh, self.s, e.p_l, e.ci_low, e.ci_high, e.n_shots, self.seed
        )
    }
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_row())
    }
}

/// Points in output order.
pub fn sweep_points(kind: SweepKind, cfg: &SweepConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &d in &cfg.distances {
        match kind {
            SweepKind::RDecoh => {
                for &r in &cfg.r_values {
                    out.push(SweepPoint { d, r_decoh: r, s: cfg.fixed_s });
                }
            }
            SweepKind::NoiseScale => {
                for &s in &cfg.s_values {
                    out.push(SweepPoint { d, r_decoh: cfg.fixed_r, s });
                }
            }
            SweepKind::Distance => out.push(SweepPoint { d, r_decoh: cfg.fixed_r, s: cfg.fixed_s }),
        }
    }
    out
}

/// Rates at one point: coherence times scaled by `s`, then `t_m` chosen so
/// the measurement-to-idle decoherence ratio equals `r`.
pub fn point_rates(cfg: &SweepConfig, r: f64, s: f64) -> Result<DerivedRates<f64>> {
    let mut h = apply_noise_scale(&cfg.hardware, s)?;
    h.t_m = t_m_for_ratio(&h, r)?;
    derive_rates(&h)
}

/// Per-row seed. It depends on architecture and distance only, so every
/// point of a curve reuses the same random stream.
pub fn row_seed(seed: u64, arch: Architecture, d: usize) -> u64 {
    derive_seed(seed, &[arch as u64, d as u64])
}

/// Logical-failure estimate of the one-round Z-basis memory experiment
/// decoded with minimum-weight matching.
pub fn smsc_logical_error(
    d: usize,
    rates: &DerivedRates<f64>,
    opts: NoiseOptions,
    n_shots: u64,
    seed: u64,
) -> Result<McLogicalEstimate> {
    let (circuit, graph) = smsc_setup(d, rates, opts)?;
    smsc_estimate(&circuit, &graph, n_shots, seed)
}

/// Noisy circuit and its matching graph.
pub fn smsc_setup(
    d: usize,
    rates: &DerivedRates<f64>,
    opts: NoiseOptions,
) -> Result<(NoisyCircuit, DetectorGraph)> {
    let layout = build_layout(d)?;
    let circuit = NoisyCircuit::new(build_memory_circuit(&layout, Basis::Z), rates, opts);
    let graph = build_graph(&enumerate_fault_effects(&circuit))?;
    Ok((circuit, graph))
}

pub fn smsc_estimate(
    circuit: &NoisyCircuit,
    graph: &DetectorGraph,
    n_shots: u64,
    seed: u64,
) -> Result<McLogicalEstimate> {
    let failures = (0..n_shots)
        .into_par_iter()
        .map(|s| {
            let shot = circuit.sample_shot(seed, s);
            decode(graph, &shot.detectors).map(|o| o.predicted_logical_flip != shot.logical_flip)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&f| f)
        .count() as u64;
    Ok(McLogicalEstimate::from_counts(failures, n_shots))
}

fn estimate(
    arch: Architecture,
    pt: SweepPoint,
    rates: &DerivedRates<f64>,
    cfg: &SweepConfig,
    alpha: f64,
    n_shots: u64,
) -> Result<McLogicalEstimate> {
    let seed = row_seed(cfg.seed, arch, pt.d);
    match arch {
        Architecture::SmSc => smsc_logical_error(
            pt.d,
            rates,
            NoiseOptions { double_meas_flip: cfg.double_meas_flip },
            n_shots,
            seed,
        ),
        _ => mc_logical_error(&build_profile(arch, pt.d, alpha)?, rates, n_shots, seed),
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every point of a sweep. Rows come out in config order, three per
/// point (SM-SC, 2D MFEC, 3D MFEC).
pub fn run_sweep(kind: SweepKind, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let points = sweep_points(kind, cfg);
    let jobs: Vec<(SweepPoint, Architecture)> = points
        .iter()
        .flat_map(|&p| Architecture::ALL.into_iter().map(move |a| (p, a)))
        .collect();
    let rates = points
        .iter()
        .map(|p| point_rates(cfg, p.r_decoh, p.s))
        .collect::<Result<Vec<_>>>()?;
    with_pool(cfg.workers, || {
        jobs.par_iter()
            .enumerate()
            .map(|(i, &(pt, arch))| {
                let r = rates[i / Architecture::ALL.len()];
                let estimate = estimate(arch, pt, &r, cfg, cfg.alpha, cfg.n_shots)?;
                Ok(SweepRow {
                    arch,
                    d: pt.d,
                    r_decoh: pt.r_decoh,
                    s: pt.s,
                    estimate,
                    seed: row_seed(cfg.seed, arch, pt.d),
                    rates: r,
                })
            })
            .collect()
    })?
}

pub fn write_csv(rows: &[SweepRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// One line per point with the rates every architecture consumed.
pub fn write_rates_log(rows: &[SweepRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{RATES_HEADER}")?;
    for chunk in rows.chunks(Architecture::ALL.len()) {
        let r = &chunk[0];
        if chunk.iter().any(|x| x.rates != r.rates) {
            return Err(invalid("rows of one point disagree on rates"));
        }
        let q = &r.rates;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.d, r.r_decoh, r.s, q.p_1q, q.p_2q, q.p_idle_op, q.p_meas
        )?;
    }
    Ok(())
}

/// A sweep CSV row as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub arch: String,
    pub d: usize,
    pub r_decoh: f64,
    pub s: f64,
    pub estimate: McLogicalEstimate,
    pub seed: u64,
}

/// Parses a sweep CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("expected header `{CSV_HEADER}`")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::Parse(format!("bad number `{}`", &rec[i])))
        };
        let int = |i: usize| -> Result<u64> {
            rec[i].parse().map_err(|_| Error::Parse(format!("bad integer `{}`", &rec[i])))
        };
        let n_shots = int(7)?;
        let p_l = num(4)?;
        out.push(CsvRow {
            arch: rec[0].to_string(),
            d: int(1)? as usize,
            r_decoh: num(2)?,
            s: num(3)?,
            estimate: McLogicalEstimate {
                p_l,
                ci_low: num(5)?,
                ci_high: num(6)?,
                n_shots,
                n_failures: (p_l * n_shots as f64).round() as u64,
            },
            seed: int(8)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakevenStatus {
    /// `[r_low, r_high]` is bounded by evaluated points where the
    /// confidence intervals separate.
    Crossing,
    /// No evaluated point on at least one side separates the intervals;
    /// the bracket falls back to the coarse grid.
    Interval,
    NoCrossing,
}

impl BreakevenStatus {
    pub fn label(self) -> &'static str {
        match self {
            BreakevenStatus::Crossing => "crossing",
            BreakevenStatus::Interval => "interval",
            BreakevenStatus::NoCrossing => "no_crossing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakeven {
    pub d: usize,
    pub alpha: f64,
    pub r_star: Option<f64>,
    pub r_low: Option<f64>,
    pub r_high: Option<f64>,
    pub status: BreakevenStatus,
}

impl Breakeven {
    pub fn to_csv_row(&self) -> String {
        let f = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v}"));
        format!(
            "{},{},{},{},{},{}",
            self.d,
            self.alpha,
            f(self.r_star),
            f(self.r_low),
            f(self.r_high),
            self.status.label()
        )
    }
}

/// Log of a failure rate, floored at half a failure so zero counts stay
/// finite.
fn log_rate(p: f64, n_shots: u64) -> f64 {
    p.max(0.5 / n_shots as f64).ln()
}

/// Lowest `r` at which the measured curve rises through the measurement-free
/// one, by linear interpolation of the log-gap in `ln r`. Curves that never
/// change sign, or that only touch, give `None`.
pub fn crossing_from_curves(rs: &[f64], p_sm: &[f64], p_mf: &[f64]) -> Option<f64> {
    let gap: Vec<f64> = p_sm
        .iter()
        .zip(p_mf)
        .map(|(&a, &b)| a.max(f64::MIN_POSITIVE).ln() - b.max(f64::MIN_POSITIVE).ln())
        .collect();
    (0..rs.len().saturating_sub(1)).find_map(|i| {
        let (g0, g1) = (gap[i], gap[i + 1]);
        if g0 < 0.0 && g1 >= 0.0 && g1 > g0 {
            Some(interp_log(rs[i], rs[i + 1], g0, g1))
        } else {
            None
        }
    })
}

/// Zero of the gap between `(r0, g0)` and `(r1, g1)`, linear in `ln r`.
fn interp_log(r0: f64, r1: f64, g0: f64, g1: f64) -> f64 {
    let t = g0 / (g0 - g1);
    (r0.ln() + t * (r1.ln() - r0.ln())).exp()
}

/// Memoized curve evaluation at one distance.
struct Curves<'a> {
    cfg: &'a SweepConfig,
    d: usize,
    smsc: Mutex<HashMap<(u64, u64), McLogicalEstimate>>,
}

impl<'a> Curves<'a> {
    fn smsc(&self, r: f64, n_shots: u64) -> Result<McLogicalEstimate> {
        let key = (r.to_bits(), n_shots);
        if let Some(e) = self.smsc.lock().unwrap().get(&key) {
            return Ok(*e);
        }
        let rates = point_rates(self.cfg, r, self.cfg.fixed_s)?;
        let pt = SweepPoint { d: self.d, r_decoh: r, s: self.cfg.fixed_s };
        let e = estimate(Architecture::SmSc, pt, &rates, self.cfg, self.cfg.alpha, n_shots)?;
        self.smsc.lock().unwrap().insert(key, e);
        Ok(e)
    }

    fn mfec(&self, r: f64, alpha: f64, n_shots: u64) -> Result<McLogicalEstimate> {
        let rates = point_rates(self.cfg, r, self.cfg.fixed_s)?;
        let pt = SweepPoint { d: self.d, r_decoh: r, s: self.cfg.fixed_s };
        estimate(Architecture::Mfec3d, pt, &rates, self.cfg, alpha, n_shots)
    }

    fn gap(&self, r: f64, alpha: f64, n: u64) -> Result<(f64, McLogicalEstimate, McLogicalEstimate)> {
        let (a, b) = (self.smsc(r, n)?, self.mfec(r, alpha, n)?);
        Ok((log_rate(a.p_l, n) - log_rate(b.p_l, n), a, b))
    }
}

/// Break-even decoherence ratio at distance `d` for one idle multiplier.
///
/// The coarse grid is `cfg.r_values`. Around the first sign change the
/// bracket is bisected geometrically with shots multiplied by
/// `cfg.escalation`, and the final estimate interpolates the log-gap
/// across the last bracket.
pub fn find_breakeven(d: usize, alpha: f64, cfg: &SweepConfig) -> Result<Breakeven> {
    let curves = Curves { cfg, d, smsc: Mutex::new(HashMap::new()) };
    breakeven_with(&curves, alpha)
}

fn breakeven_with(curves: &Curves<'_>, alpha: f64) -> Result<Breakeven> {
    let cfg = curves.cfg;
    let mut rs = cfg.r_values.clone();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let none = Breakeven {
        d: curves.d,
        alpha,
        r_star: None,
        r_low: None,
        r_high: None,
        status: BreakevenStatus::NoCrossing,
    };
    let coarse = rs
        .iter()
        .map(|&r| curves.gap(r, alpha, cfg.n_shots).map(|g| g.0))
        .collect::<Result<Vec<f64>>>()?;
    let Some(i) = (0..rs.len().saturating_sub(1)).find(|&i| coarse[i] < 0.0 && coarse[i + 1] >= 0.0 && coarse[i + 1] > coarse[i])
    else {
        return Ok(none);
    };
    let n = cfg.n_shots * cfg.escalation;
    let mut seen: Vec<(f64, (f64, McLogicalEstimate, McLogicalEstimate))> = Vec::new();
    let mut eval = |r: f64| -> Result<f64> {
        let g = curves.gap(r, alpha, n)?;
        seen.push((r, g));
        Ok(g.0)
    };
    let (mut lo, mut hi) = (rs[i], rs[i + 1]);
    let (mut g_lo, mut g_hi) = (eval(lo)?, eval(hi)?);
    if !(g_lo < 0.0 && g_hi >= 0.0) {
        // the escalated estimates disagree with the coarse grid; look for the
        // sign change on the whole grid at escalated shots
        let fine = rs.iter().map(|&r| eval(r)).collect::<Result<Vec<f64>>>()?;
        let Some(j) = (0..rs.len() - 1).find(|&j| fine[j] < 0.0 && fine[j + 1] >= 0.0) else {
            let r_star = interp_log(rs[i], rs[i + 1], coarse[i], coarse[i + 1]);
            return Ok(Breakeven {
                r_star: Some(r_star),
                r_low: Some(rs[i]),
                r_high: Some(rs[i + 1]),
                status: BreakevenStatus::Interval,
                ..none
            });
        };
        (lo, hi, g_lo, g_hi) = (rs[j], rs[j + 1], fine[j], fine[j + 1]);
    }
    for _ in 0..cfg.refine_steps {
        let mid = (lo * hi).sqrt();
        let g = eval(mid)?;
        if g < 0.0 {
            (lo, g_lo) = (mid, g);
        } else {
            (hi, g_hi) = (mid, g);
        }
    }
    let r_star = if g_hi > g_lo { interp_log(lo, hi, g_lo, g_hi) } else { (lo * hi).sqrt() };
    // CI-resolved bracket: nearest evaluated points on each side where the
    // intervals separate
    let below = seen
        .iter()
        .filter(|(r, g)| *r <= r_star && g.1.ci_high < g.2.ci_low)
        .map(|p| p.0)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let above = seen
        .iter()
        .filter(|(r, g)| *r >= r_star && g.1.ci_low > g.2.ci_high)
        .map(|p| p.0)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    Ok(match (below, above) {
        (Some(a), Some(b)) => Breakeven {
            r_star: Some(r_star),
            r_low: Some(a),
            r_high: Some(b),
            status: BreakevenStatus::Crossing,
            ..none
        },
        _ => Breakeven {
            r_star: Some(r_star),
            r_low: Some(below.unwrap_or(rs[i])),
            r_high: Some(above.unwrap_or(rs[i + 1])),
            status: BreakevenStatus::Interval,
            ..none
        },
    })
}

/// Break-even ratios for every distance and every configured alpha, in
/// `(d, alpha)` order. Measured-code estimates are shared across alphas.
pub fn run_breakeven(cfg: &SweepConfig) -> Result<Vec<Breakeven>> {
    with_pool(cfg.workers, || {
        cfg.distances
            .par_iter()
            .map(|&d| {
                let curves = Curves { cfg, d, smsc: Mutex::new(HashMap::new()) };
                cfg.alphas.iter().map(|&a| breakeven_with(&curves, a)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    })?
}

pub fn write_breakeven_csv(rows: &[Breakeven], mut w: impl Write) -> Result<()> {
    writeln!(w, "{RSTAR_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            distances: vec![3],
            r_values: vec![20.0, 200.0],
            s_values: vec![1.0],
            n_shots: 200,
            seed: 5,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("rdecoh".parse::<SweepKind>().unwrap(), SweepKind::RDecoh);
        assert_eq!("noise-scale".parse::<SweepKind>().unwrap(), SweepKind::NoiseScale);
        assert_eq!("distance".parse::<SweepKind>().unwrap(), SweepKind::Distance);
        assert!("foo".parse::<SweepKind>().is_err());
    }

    #[test]
    fn points_follow_config_order() {
        let cfg = SweepConfig { distances: vec![3, 5], ..small() };
        let pts = sweep_points(SweepKind::RDecoh, &cfg);
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[1].d, pts[1].r_decoh), (3, 200.0));
        assert_eq!(sweep_points(SweepKind::Distance, &cfg).len(), 2);
        assert_eq!(sweep_points(SweepKind::NoiseScale, &cfg)[0].r_decoh, 200.0);
    }

    #[test]
    fn point_rates_hit_target_ratio() {
        let cfg = small();
        for s in [0.5, 1.0, 2.0] {
            let r = point_rates(&cfg, 123.0, s).unwrap();
            assert!((r.r_decoh - 123.0).abs() < 1e-8);
        }
    }

    #[test]
    fn crossing_of_synthetic_power_laws() {
        let rs = [20.0, 50.0, 100.0, 200.0, 400.0, 800.0];
        let p_sm: Vec<f64> = rs.iter().map(|r: &f64| 1e-2 * (r / 100.0).powf(1.5)).collect();
        let p_mf = vec![1e-2; rs.len()];
        let r = crossing_from_curves(&rs, &p_sm, &p_mf).unwrap();
        assert!((r - 100.0).abs() < 1e-9, "{r}");
        // between grid points, log-linear interpolation is still exact
        let p_mf = vec![1e-2 * 1.5f64.powf(1.5); rs.len()];
        let r = crossing_from_curves(&rs, &p_sm, &p_mf).unwrap();
        assert!((r - 150.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn degenerate_curves_do_not_cross() {
        let rs = [1.0, 2.0, 3.0];
        assert_eq!(crossing_from_curves(&rs, &[0.1; 3], &[0.1; 3]), None);
        assert_eq!(crossing_from_curves(&rs, &[0.2; 3], &[0.1; 3]), None);
        assert_eq!(crossing_from_curves(&rs, &[0.0; 3], &[0.0; 3]), None);
        assert_eq!(crossing_from_curves(&[], &[], &[]), None);
    }

    #[test]
    fn sweep_rows_and_csv() {
        let cfg = small();
        let rows = run_sweep(SweepKind::RDecoh, &cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].arch, Architecture::SmSc);
        assert_eq!(rows[2].arch, Architecture::Mfec3d);
        // measurement-free rows do not see the measurement window
        assert_eq!(rows[2].estimate, rows[5].estimate);
        assert_eq!(rows[1].estimate, rows[4].estimate);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("arch,d,r_decoh,s,p_l,ci_low,ci_high,n_shots,seed\n"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(back[0].estimate.p_l, rows[0].estimate.p_l);
        let mut log = Vec::new();
        write_rates_log(&rows, &mut log).unwrap();
        assert_eq!(String::from_utf8(log).unwrap().lines().count(), 3);
    }

    #[test]
    fn breakeven_row_format() {
        let b = Breakeven {
            d: 3,
            alpha: 3.5,
            r_star: None,
            r_low: None,
            r_high: None,
            status: BreakevenStatus::NoCrossing,
        };
        assert_eq!(b.to_csv_row(), "3,3.5,,,,no_crossing");
    }
}
