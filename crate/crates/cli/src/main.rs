use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mfec_core::bitflip::{ft_check, scaling_curve};
use mfec_core::bitflip::gadget::log_grid;
use mfec_core::config::Config;
use mfec_core::decoder::{decode, DetectorGraph};
use mfec_core::experiments::{
    run_breakeven, run_sweep, smsc_estimate, smsc_setup, write_breakeven_csv, write_csv,
    write_rates_log, SweepKind,
};
use mfec_core::frame_sim::NoiseOptions;
use mfec_core::mfec::{
    analytic_logical_error, build_profile, c3not_cnot_count, mc_logical_error, toffoli_cnot_count,
    x_round_cnot_budget, Architecture, ResourceProfile,
};
use mfec_core::noise::derive_rates;
use mfec_core::surface_code::build_layout;

#[derive(Parser)]
#[command(name = "qec3d", version, about = "Measurement-based vs measurement-free surface-code QEC simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rotated surface-code layout.
    Layout {
        #[command(subcommand)]
        cmd: LayoutCmd,
    },
    /// Measurement-based surface code: sampling and decoding.
    Smsc {
        #[command(subcommand)]
        cmd: SmscCmd,
    },
    /// Measurement-free resource model.
    Mfec {
        #[command(subcommand)]
        cmd: MfecCmd,
    },
    /// Three-qubit bit-flip gadget.
    Bitflip {
        #[command(subcommand)]
        cmd: BitflipCmd,
    },
    /// Parameter sweep written as CSV.
    Sweep {
        kind: KindArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-point rates every architecture used.
        #[arg(long)]
        rates_out: Option<PathBuf>,
    },
    /// Break-even decoherence ratio per distance and alpha.
    Breakeven {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LayoutCmd {
    Dump {
        #[arg(long)]
        distance: usize,
    },
}

#[derive(Subcommand)]
enum SmscCmd {
    /// Sample the one-round Z memory experiment.
    Sample {
        #[arg(long)]
        distance: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the matching graph of the noisy circuit.
    Graph {
        #[arg(long)]
        distance: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode detector rows; writes one predicted logical flip per row.
    Decode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MfecCmd {
    Resources {
        #[arg(long)]
        arch: Architecture,
        #[arg(long)]
        distance: usize,
        #[arg(long, default_value_t = mfec_core::mfec::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Logical error per cycle at the configured rates.
    Estimate {
        #[arg(long)]
        arch: Architecture,
        #[arg(long)]
        config: PathBuf,
        /// Defaults to every distance in the config.
        #[arg(long)]
        distance: Option<usize>,
    },
}

#[derive(Subcommand)]
enum BitflipCmd {
    /// Exhaustive single-fault check of the gadget.
    FtCheck,
    Scaling {
        #[arg(long, default_value_t = 1e-4)]
        pmin: f64,
        #[arg(long, default_value_t = 1e-2)]
        pmax: f64,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Rdecoh,
    NoiseScale,
    Distance,
}

impl From<KindArg> for SweepKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rdecoh => SweepKind::RDecoh,
            KindArg::NoiseScale => SweepKind::NoiseScale,
            KindArg::Distance => SweepKind::Distance,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

fn parse_bits(line: &str, lineno: usize) -> Result<Vec<bool>> {
    line.split(',')
        .map(|f| match f.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => bail!("line {lineno}: expected 0 or 1, got `{other}`"),
        })
        .collect()
}

fn resources(arch: Architecture, d: usize, alpha: f64) -> Result<()> {
    let p = build_profile(arch, d, alpha)?;
    print!("{}", p.to_text());
    if arch.is_mfec() {
        let b = x_round_cnot_budget(d)?;
        println!("{:<22}{}", "toffoli_cnots", toffoli_cnot_count());
        println!("{:<22}{}", "c3not_cnots", c3not_cnot_count());
        println!(
            "{:<22}{} = {} + {} + {} + {}",
            "x_round_cnots",
            b.total(),
            b.transversal,
            b.extraction,
            b.remap,
            b.correction
        );
    }
    println!();
    println!("{}", ResourceProfile::CSV_HEADER);
    println!("{}", p.to_csv_row());
    Ok(())
}

fn estimate(arch: Architecture, cfg: &Config, distance: Option<usize>) -> Result<()> {
    let rates = derive_rates(&cfg.effective_hardware()?)?;
    let distances = distance.map_or_else(|| cfg.sweep.distances.clone(), |d| vec![d]);
    println!("arch,d,r_decoh,p_l,ci_low,ci_high,n_shots,analytic");
    for d in distances {
        let seed = mfec_core::experiments::row_seed(cfg.sweep.seed, arch, d);
        let (e, analytic) = if arch.is_mfec() {
            let profile = build_profile(arch, d, cfg.sweep.alpha)?;
            (
                mc_logical_error(&profile, &rates, cfg.sweep.n_shots, seed)?,
                analytic_logical_error(&profile, &rates).to_string(),
            )
        } else {
            let opts = NoiseOptions { double_meas_flip: cfg.double_meas_flip };
            let (circuit, graph) = smsc_setup(d, &rates, opts)?;
            (smsc_estimate(&circuit, &graph, cfg.sweep.n_shots, seed)?, String::new())
        };
        println!(
            "{arch},{d},{},{},{},{},{},{analytic}",
            rates.r_decoh, e.p_l, e.ci_low, e.ci_high, e.n_shots
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Layout { cmd: LayoutCmd::Dump { distance } } => {
            print!("{}", build_layout(distance)?.dump());
        }
        Cmd::Smsc { cmd } => match cmd {
            SmscCmd::Sample { distance, config, shots, seed, out } => {
                if shots == 0 {
                    bail!("--shots must be at least 1");
                }
                let cfg = load_config(config.as_deref())?;
                let rates = derive_rates(&cfg.effective_hardware()?)?;
                let opts = NoiseOptions { double_meas_flip: cfg.double_meas_flip };
                let (circuit, _) = smsc_setup(distance, &rates, opts)?;
                let mut w = create(&out)?;
                for shot in circuit.sample(shots, seed) {
                    let mut row: String = shot.detectors.iter().flat_map(|&b| [bit(b), ',']).collect();
                    row.push(bit(shot.logical_flip));
                    writeln!(w, "{row}")?;
                }
                w.flush()?;
            }
            SmscCmd::Graph { distance, config, out } => {
                let cfg = load_config(config.as_deref())?;
                let rates = derive_rates(&cfg.effective_hardware()?)?;
                let opts = NoiseOptions { double_meas_flip: cfg.double_meas_flip };
                let (_, graph) = smsc_setup(distance, &rates, opts)?;
                fs::write(&out, graph.to_text())?;
            }
            SmscCmd::Decode { graph, input, out } => {
                let graph = DetectorGraph::from_text(&fs::read_to_string(&graph)?)?;
                let n = graph.n_detectors;
                let text = fs::read_to_string(&input)
                    .with_context(|| format!("reading {}", input.display()))?;
                let mut w = create(&out)?;
                let (mut shots, mut failures, mut labelled) = (0u64, 0u64, true);
                for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                    let bits = parse_bits(line, i + 1)?;
                    let actual = match bits.len() {
                        l if l == n => {
                            labelled = false;
                            None
                        }
                        l if l == n + 1 => Some(bits[n]),
                        l => bail!("line {}: {l} columns, expected {n} or {}", i + 1, n + 1),
                    };
                    let o = decode(&graph, &bits[..n])?;
                    writeln!(w, "{}", bit(o.predicted_logical_flip))?;
                    shots += 1;
                    failures += u64::from(actual.is_some_and(|a| a != o.predicted_logical_flip));
                }
                w.flush()?;
                if labelled && shots > 0 {
                    eprintln!("{failures}/{shots} logical failures");
                }
            }
        },
        Cmd::Mfec { cmd } => match cmd {
            MfecCmd::Resources { arch, distance, alpha } => resources(arch, distance, alpha)?,
            MfecCmd::Estimate { arch, config, distance } => {
                estimate(arch, &load_config(Some(&config))?, distance)?
            }
        },
        Cmd::Bitflip { cmd } => match cmd {
            BitflipCmd::FtCheck => {
                let r = ft_check();
                println!(
                    "locations {} cases {} violations {} violating_locations {}",
                    r.n_locations,
                    r.n_cases,
                    r.violations.len(),
                    r.violating_locations()
                );
                for v in &r.violations {
                    println!("  {:?} {:?} input {:03b} mass {:.3e}", v.location, v.paulis, v.input, v.bad_mass);
                }
                println!("{}", if r.passed() { "PASS" } else { "FAIL" });
                if !r.passed() {
                    std::process::exit(1);
                }
            }
            BitflipCmd::Scaling { pmin, pmax, points, shots, seed, out } => {
                let curve = scaling_curve(&log_grid(pmin, pmax, points)?, shots, seed)?;
                let mut w = create(&out)?;
                writeln!(w, "p,p_l,ci_low,ci_high")?;
                for pt in &curve.points {
                    writeln!(w, "{},{},{},{}", pt.p, pt.p_l, pt.ci_low, pt.ci_high)?;
                }
                w.flush()?;
                println!("slope {:.4}", curve.slope);
                println!("locations {}", curve.n_locations);
                println!("quadratic_coefficient {:.4}", curve.quadratic_coefficient);
            }
        },
        Cmd::Sweep { kind, config, out, rates_out } => {
            let cfg = load_config(Some(&config))?;
            let kind = SweepKind::from(kind);
            if let Some(k) = cfg.sweep.sweep_kind {
                if k != kind {
                    bail!("config key `sweep_kind` is {k:?} but the command asks for {kind:?}");
                }
            }
            let rows = run_sweep(kind, &cfg.sweep)?;
            let mut w = create(&out)?;
            write_csv(&rows, &mut w)?;
            w.flush()?;
            if let Some(path) = rates_out {
                let mut w = create(&path)?;
                write_rates_log(&rows, &mut w)?;
                w.flush()?;
            }
        }
        Cmd::Breakeven { config, out } => {
            let cfg = load_config(Some(&config))?;
            let rows = run_breakeven(&cfg.sweep)?;
            let mut w = create(&out)?;
            write_breakeven_csv(&rows, &mut w)?;
            w.flush()?;
            write_breakeven_csv(&rows, io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
