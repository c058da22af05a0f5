//! Command-line front end. Every subcommand loads a config, runs one pipeline
//! and writes CSV (plus a JSON envelope when `--out` is given).
//!
//! Exit codes: 0 success, 1 runtime or statistics failure, 2 configuration or
//! usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{load_config, ConfigError, RunConfig};
use crate::dispersion::{acceptance_bandwidth, beta2_at, down_conversion_mismatch, phase_mismatch};
use crate::error::Error;
use crate::experiments::{
    fit_fringes, gvd_thermometry, rabi_scan, ramsey_scan, McSettings, RamseyConfig, ScanMode, ScanResult,
};
use crate::noise::NoiseBreakdown;
use crate::photon::g2_experiment;
use crate::units::{frequency_to_wavelength, to_ps2_per_km, C};

#[derive(Debug, Parser)]
#[command(
    name = "qfc-ramsey",
    version,
    about = "Single-photon frequency-qubit Ramsey simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conversion efficiency against pump power.
    Rabi(ScanArgs),
    /// Ramsey fringes against free-space delay, with a fringe fit.
    Ramsey(ScanArgs),
    /// Noise photons per gate against fiber temperature.
    Noise(NoiseArgs),
    /// Phase-matching report for the configured fiber and frequencies.
    Phasematch(CommonArgs),
    /// Ramsey phase against fiber temperature, inverted for dβ₂/dT.
    Thermometry(ThermometryArgs),
    /// Heralded g²(0) of the source, with or without conversion pulses.
    G2(G2Args),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file path, or a preset name (ideal, fig4, fig5, matched,
    /// paper-cryo, room-temp, s7, flat).
    #[arg(short, long)]
    pub config: String,
    /// Write CSV here and a JSON envelope next to it; default is stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Mc,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: Mode,
    /// Gates per scan point in Monte Carlo mode.
    #[arg(long)]
    pub gates: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Temperatures in K: `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub temps: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThermometryArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    /// Temperatures in K: `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub temps: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pulses {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct G2Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub gates: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Route the heralded photon through a conversion pulse first.
    #[arg(long, value_enum, default_value = "off")]
    pub pulses: Pulses,
    /// Also dump the raw time tags (tab separated) to this file.
    #[arg(long)]
    pub tags: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parse `a,b,c` or `start:stop:count`.
pub fn parse_temps(s: &str) -> Result<Vec<f64>, String> {
    let bad = |what: &str| format!("--temps `{s}`: {what}");
    let temps: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad("range form is start:stop:count"));
        };
        let a: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("bad stop"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
        if n < 2 || !(b > a) {
            return Err(bad("need stop > start and count >= 2"));
        }
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad number")))
            .collect::<Result<_, _>>()?
    };
    if temps.is_empty() || temps.iter().any(|t| !(*t >= 0.0)) {
        return Err(bad("temperatures must be >= 0 K"));
    }
    Ok(temps)
}

fn temps_flag(flag: &Option<String>) -> Result<Option<Vec<f64>>, Failure> {
    flag.as_deref().map(parse_temps).transpose().map_err(|m| {
        Failure::Config(ConfigError {
            line: 0,
            key: "--temps".into(),
            message: m,
        })
    })
}

fn scan_mode(cfg: &RunConfig, args: &ScanArgs) -> Result<ScanMode, Failure> {
    Ok(match args.mode {
        Mode::Analytic => ScanMode::Analytic,
        Mode::Mc => ScanMode::MonteCarlo(McSettings {
            source: *cfg.require(&cfg.source, "source")?,
            detector: cfg.detector,
            noise_per_gate: cfg.mc.noise_per_gate,
            n_gates: args.gates.unwrap_or(cfg.mc.gates),
            seed: args.seed.unwrap_or(cfg.seed),
        }),
    })
}

/// CSV to `--out` or `out`; returns where the human summary should go.
struct Sink<'a> {
    path: Option<&'a Path>,
}

impl Sink<'_> {
    fn csv(&self, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Outcome {
        match self.path {
            Some(p) => {
                let mut w =
                    BufWriter::new(File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?);
                f(&mut w)?;
                w.flush()?;
            }
            None => f(stdout)?,
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, command: &str, cfg: &RunConfig, payload: &T) -> Outcome {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            command: &'a str,
            config_hash: String,
            config: &'a RunConfig,
            result: &'a T,
        }
        if let Some(p) = self.path {
            let path = p.with_extension("json");
            let env = Envelope {
                command,
                config_hash: cfg.hash(),
                config: cfg,
                result: payload,
            };
            let mut w = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(&mut w, &env).map_err(|e| Failure::Runtime(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn summary<'a>(sink: &Sink, stdout: &'a mut dyn Write, stderr: &'a mut dyn Write) -> &'a mut dyn Write {
    if sink.path.is_some() {
        stdout
    } else {
        stderr
    }
}

/// First x where `y` reaches `level`, linearly interpolated.
fn first_crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    if ys.first().is_some_and(|&y| y >= level) {
        return xs.first().copied();
    }
    xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        (y[0] < level && y[1] >= level).then(|| x[0] + (x[1] - x[0]) * (level - y[0]) / (y[1] - y[0]))
    })
}

fn cmd_rabi(args: &ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.common.config)?;
    let block = cfg.require(&cfg.rabi, "rabi")?;
    let mode = scan_mode(&cfg, args)?;
    let scan = rabi_scan(
        &block.powers,
        &cfg.fwm,
        &cfg.quad,
        &cfg.fiber,
        cfg.temp,
        block.ladder.as_ref(),
        &mode,
    )?;
    let sink = Sink {
        path: args.common.out.as_deref(),
    };
    let hash = cfg.hash();
    sink.csv(stdout, |w| scan.write_csv(w, Some(&hash)))?;
    sink.json("rabi", &cfg, &scan)?;

    let (xs, ys) = (scan.xs(), scan.p_i());
    let (k, peak) = ys.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (k, &y)| if y > best.1 { (k, y) } else { best },
    );
    let out = summary(&sink, stdout, stderr);
    writeln!(out, "peak conversion {:.4} at {:.3} W per pump", peak, xs[k])?;
    match first_crossing(&xs, &ys, 0.5) {
        Some(p) => writeln!(out, "P_pi/2 {p:.4} W per pump")?,
        None => writeln!(out, "P_pi/2 not reached in the sweep")?,
    }
    Ok(())
}

fn ramsey_config(cfg: &RunConfig) -> Result<RamseyConfig, Failure> {
    let block = cfg.require(&cfg.ramsey, "ramsey")?;
    Ok(RamseyConfig {
        quad: cfg.quad,
        fwm: cfg.fwm,
        pump: cfg.pump,
        fiber: cfg.fiber,
        temp: cfg.temp,
        delay_sweep: block.delays.clone(),
        bandwidth_cap: block.bandwidth_cap,
        theta1: block.theta1,
        theta2: block.theta2,
    })
}

fn cmd_ramsey(args: &ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.common.config)?;
    let rc = ramsey_config(&cfg)?;
    let mode = scan_mode(&cfg, args)?;
    let scan = ramsey_scan(&rc, &mode)?;
    let sink = Sink {
        path: args.common.out.as_deref(),
    };
    let hash = cfg.hash();
    sink.csv(stdout, |w| scan.write_csv(w, Some(&hash)))?;
    let fit = fit_fringes(&scan);

    #[derive(Serialize)]
    struct Payload<'a> {
        scan: &'a ScanResult,
        fit: Option<crate::experiments::FringeFit>,
    }
    sink.json(
        "ramsey",
        &cfg,
        &Payload {
            scan: &scan,
            fit: fit.as_ref().ok().copied(),
        },
    )?;
    let fit = fit?;
    let out = summary(&sink, stdout, stderr);
    writeln!(out, "visibility {:.4} +/- {:.4}", fit.visibility, fit.visibility_stderr)?;
    writeln!(
        out,
        "period {:.6} mm +/- {:.2e} mm (c/dnu = {:.6} mm)",
        fit.period * 1e3,
        fit.period_stderr * 1e3,
        rc.fringe_period() * 1e3
    )?;
    Ok(())
}

fn cmd_noise(args: &NoiseArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.common.config)?;
    let block = cfg.require(&cfg.noise, "noise")?;
    let temps = temps_flag(&args.temps)?.unwrap_or_else(|| block.temps.clone());
    let rows = temps
        .iter()
        .map(|&t| block.model.evaluate(&cfg.fiber, &cfg.quad, cfg.fwm.gamma, cfg.temp, t))
        .collect::<Result<Vec<NoiseBreakdown>, Error>>()?;
    let sink = Sink {
        path: args.common.out.as_deref(),
    };
    let hash = cfg.hash();
    sink.csv(stdout, |w| {
        writeln!(w, "# config_hash={hash}")?;
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["temp_k", "raman_cold", "raman_warm", "sfwm", "total", "outside_support"])
            .map_err(io)?;
        for r in &rows {
            wr.serialize((r.temp, r.raman_cold, r.raman_warm, r.sfwm, r.total, r.outside_support))
                .map_err(io)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    sink.json("noise", &cfg, &rows)?;
    let out = summary(&sink, stdout, stderr);
    if let Some(r) = rows.iter().find(|r| r.temp == cfg.temp) {
        writeln!(
            out,
            "noise at operating temperature {} K: {:.3e} photons/gate",
            r.temp, r.total
        )?;
    }
    if let Some(r) = rows.iter().min_by(|a, b| a.total.total_cmp(&b.total)) {
        writeln!(out, "minimum {:.3e} photons/gate at {} K", r.total, r.temp)?;
    }
    if rows.iter().any(|r| r.outside_support) {
        writeln!(out, "warning: some pump-signal shifts lie outside the Raman gain table")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct PhaseMatchReport {
    delta_k_up_per_m: f64,
    delta_k_down_per_m: f64,
    down_to_up_ratio: f64,
    beta2_center_ps2_per_km: f64,
    acceptance_bandwidth_thz: Option<f64>,
    nu0_thz: f64,
    zero_gvd_thz: f64,
    zero_gvd_nm: f64,
}

fn cmd_phasematch(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.config)?;
    let (f, q, t) = (&cfg.fiber, &cfg.quad, cfg.temp);
    let up = phase_mismatch(f, q, t)?;
    let down = down_conversion_mismatch(f, q, t)?;
    let kappa = 2.0 * cfg.fwm.gamma * (cfg.pump.p1 * cfg.pump.p2).sqrt();
    let bandwidth = acceptance_bandwidth(f, q, kappa, t);
    // pump centre that zeroes β₂ at this temperature
    let zero = if f.beta2_slope != 0.0 {
        f.nu_zero_gvd() - f.dbeta2_dt * (t - f.temp_ref) / f.beta2_slope
    } else {
        f.nu_zero_gvd()
    };
    let report = PhaseMatchReport {
        delta_k_up_per_m: up,
        delta_k_down_per_m: down,
        down_to_up_ratio: if up != 0.0 { (down / up).abs() } else { f64::INFINITY },
        beta2_center_ps2_per_km: to_ps2_per_km(beta2_at(f, q.nu0, t)?),
        acceptance_bandwidth_thz: bandwidth.as_ref().ok().map(|b| b * 1e-12),
        nu0_thz: q.nu0 * 1e-12,
        zero_gvd_thz: zero * 1e-12,
        zero_gvd_nm: frequency_to_wavelength(zero) * 1e9,
    };
    let sink = Sink {
        path: args.out.as_deref(),
    };
    let hash = cfg.hash();
    sink.csv(stdout, |w| {
        writeln!(w, "# config_hash={hash}")?;
        writeln!(w, "quantity,value,unit")?;
        let r = &report;
        writeln!(w, "delta_k_up,{},1/m", r.delta_k_up_per_m)?;
        writeln!(w, "delta_k_down,{},1/m", r.delta_k_down_per_m)?;
        writeln!(w, "down_to_up_ratio,{},", r.down_to_up_ratio)?;
        writeln!(w, "beta2_center,{},ps^2/km", r.beta2_center_ps2_per_km)?;
        match r.acceptance_bandwidth_thz {
            Some(b) => writeln!(w, "acceptance_bandwidth,{b},THz")?,
            None => writeln!(w, "acceptance_bandwidth,,THz")?,
        }
        writeln!(w, "nu0,{},THz", r.nu0_thz)?;
        writeln!(w, "suggested_nu0,{},THz", r.zero_gvd_thz)?;
        writeln!(w, "suggested_lambda0,{},nm", r.zero_gvd_nm)?;
        Ok(())
    })?;
    sink.json("phasematch", &cfg, &report)?;
    let out = summary(&sink, stdout, stderr);
    writeln!(
        out,
        "dk_up {:.4e} 1/m, dk_down {:.4e} 1/m, |dk_down/dk_up| {:.1}",
        up, down, report.down_to_up_ratio
    )?;
    writeln!(out, "beta2(nu0) {:.4e} ps^2/km", report.beta2_center_ps2_per_km)?;
    match &bandwidth {
        Ok(b) => writeln!(
            out,
            "acceptance bandwidth {:.4} THz ({:.3} nm)",
            b * 1e-12,
            C * b / (q.nus * q.nus) * 1e9
        )?,
        Err(e) => writeln!(out, "acceptance bandwidth unavailable: {e}")?,
    }
    writeln!(
        out,
        "suggested pump centre {:.4} THz ({:.2} nm)",
        report.zero_gvd_thz, report.zero_gvd_nm
    )?;
    Ok(())
}

fn cmd_thermometry(args: &ThermometryArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.scan.common.config)?;
    let temps = match temps_flag(&args.temps)? {
        Some(t) => t,
        None => cfg.require(&cfg.thermometry, "thermometry")?.clone(),
    };
    let mode = scan_mode(&cfg, &args.scan)?;
    let sink = Sink {
        path: args.scan.common.out.as_deref(),
    };
    let hash = cfg.hash();
    let res = match gvd_thermometry(&cfg.fiber, &cfg.quad, &temps, &mode) {
        Ok(r) => r,
        Err(e @ Error::NoFringes { .. }) => {
            writeln!(
                summary(&sink, stdout, stderr),
                "no fringes detected: the Ramsey phase does not vary with temperature"
            )?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    sink.csv(stdout, |w| res.scan.write_csv(w, Some(&hash)))?;
    sink.json("thermometry", &cfg, &res)?;
    let out = summary(&sink, stdout, stderr);
    writeln!(
        out,
        "dbeta2/dT {:.6} +/- {:.6} ps^2/km/K",
        to_ps2_per_km(res.dbeta2_dt),
        to_ps2_per_km(res.dbeta2_dt_stderr)
    )?;
    writeln!(
        out,
        "fringe period {:.3} +/- {:.3} K",
        res.fit.period, res.fit.period_stderr
    )?;
    Ok(())
}

/// Transmission of the conversion stage: the peak of the configured Rabi
/// sweep, or the conversion at the configured pump power.
fn conversion_transmission(cfg: &RunConfig) -> Result<f64, Failure> {
    let (powers, ladder) = match &cfg.rabi {
        Some(b) => (b.powers.clone(), b.ladder.as_ref()),
        None => (vec![(cfg.pump.p1 * cfg.pump.p2).sqrt()], None),
    };
    let scan = rabi_scan(
        &powers,
        &cfg.fwm,
        &cfg.quad,
        &cfg.fiber,
        cfg.temp,
        ladder,
        &ScanMode::Analytic,
    )?;
    Ok(scan.p_i().into_iter().fold(0.0, f64::max).clamp(0.0, 1.0))
}

fn cmd_g2(args: &G2Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load_config(&args.common.config)?;
    let source = *cfg.require(&cfg.source, "source")?;
    let transmission = match args.pulses {
        Pulses::Off => 1.0,
        Pulses::On => conversion_transmission(&cfg)?,
    };
    let gates = args.gates.unwrap_or(cfg.g2.gates);
    let seed = args.seed.unwrap_or(cfg.seed);
    let (est, tags) = g2_experiment(
        &source,
        &cfg.detector,
        cfg.mc.noise_per_gate,
        transmission,
        gates,
        cfg.g2.window,
        seed,
    )?;
    if let Some(p) = &args.tags {
        let mut w = BufWriter::new(File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?);
        tags.write_tsv(&mut w)?;
        w.flush()?;
    }
    let sink = Sink {
        path: args.common.out.as_deref(),
    };
    let hash = cfg.hash();
    sink.csv(stdout, |w| {
        writeln!(w, "# config_hash={hash}")?;
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record([
            "g2",
            "stderr",
            "heralds",
            "herald_a",
            "herald_b",
            "herald_ab",
            "transmission",
        ])
        .map_err(io)?;
        wr.serialize((
            est.g2,
            est.stderr,
            est.heralds,
            est.herald_a,
            est.herald_b,
            est.herald_ab,
            transmission,
        ))
        .map_err(io)?;
        wr.flush()?;
        Ok(())
    })?;
    sink.json("g2", &cfg, &est)?;
    writeln!(
        summary(&sink, stdout, stderr),
        "g2(0) {:.4} +/- {:.4} (heralds {}, threefolds {})",
        est.g2,
        est.stderr,
        est.heralds,
        est.herald_ab
    )?;
    Ok(())
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Rabi(a) => cmd_rabi(a, stdout, stderr),
        Command::Ramsey(a) => cmd_ramsey(a, stdout, stderr),
        Command::Noise(a) => cmd_noise(a, stdout, stderr),
        Command::Phasematch(a) => cmd_phasematch(a, stdout, stderr),
        Command::Thermometry(a) => cmd_thermometry(a, stdout, stderr),
        Command::G2(a) => cmd_g2(a, stdout, stderr),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temps_list_and_range() {
        assert_eq!(parse_temps("0, 77,295").unwrap(), vec![0.0, 77.0, 295.0]);
        assert_eq!(parse_temps("0:10:3").unwrap(), vec![0.0, 5.0, 10.0]);
        assert!(parse_temps("10:0:3").is_err());
        assert!(parse_temps("-1").is_err());
        assert!(parse_temps("a,b").is_err());
    }

    #[test]
    fn crossing_interpolates() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 0.4, 0.8];
        assert!((first_crossing(&x, &y, 0.5).unwrap() - 1.25).abs() < 1e-12);
        assert!(first_crossing(&x, &y, 0.9).is_none());
    }
}
