use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relmech::config::{help_config, parse_config};
use relmech::report::{emit_report, Check, Format, RunReport};
use relmech::suite::revolutions_per_century;
use relmech_core::orbits::{measure_precession, perihelion_shift_closed_form, OrbitConfig};

const SI_C: f64 = 299_792_458.0;

#[derive(Parser)]
#[command(name = "relmech", version, about = "Special-relativistic mechanics scenarios")]
struct Cli {
    /// List every configuration key with its default and exit
    #[arg(long)]
    help_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report and CSV artifacts
    Run {
        config: PathBuf,
        /// Output directory (RELMECH_OUT takes precedence)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a configuration without running it
    Check { config: PathBuf },
    /// Closed-form perihelion advance, optionally checked against an integration
    Precession {
        #[arg(long = "GM")]
        gm: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        e: f64,
        #[arg(long, default_value_t = SI_C)]
        c: f64,
        /// Integrate this many revolutions and compare
        #[arg(long)]
        revs: Option<f64>,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn verdict(report: &RunReport) -> ExitCode {
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for c in report.failures() {
            eprintln!("check failed: {} = {:e} > {:e}", c.name, c.value, c.tolerance);
        }
        ExitCode::from(2)
    }
}

fn read_config(path: &PathBuf) -> Result<relmech::ScenarioConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn precession(gm: f64, a: f64, e: f64, c: f64, revs: Option<f64>) -> Result<RunReport, String> {
    let mut oc = OrbitConfig::new(gm, a, e, c);
    oc.validate().map_err(|e| e.to_string())?;
    let h = (gm * a * (1.0 - e * e)).sqrt();
    let shift = perihelion_shift_closed_form(gm, h, c);
    let per_century = revolutions_per_century(&oc);
    let arcsec = shift * per_century * 180.0 / std::f64::consts::PI * 3600.0;
    let mut r = RunReport::new("precession");
    r.value("GM", gm);
    r.value("a", a);
    r.value("e", e);
    r.value("c", c);
    r.value("h", h);
    r.value("shift_per_rev_rad", shift);
    r.value("kepler_period_s", oc.kepler_period());
    r.value("revolutions_per_century", per_century);
    r.value("arcsec_per_century", arcsec);
    if let Some(n) = revs {
        if !(n > 0.0) {
            return Err(format!("--revs must be positive, got {n}"));
        }
        oc.revolutions = n;
        let wl = oc.run().map_err(|e| e.to_string())?;
        let p = measure_precession(&wl, gm).map_err(|e| e.to_string())?;
        r.value("measured_shift_per_rev_rad", p.shift_per_rev);
        r.check(Check::at_most("precession_relative_deviation", p.relative_deviation, 0.05));
    }
    Ok(r)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.help_config {
        print!("{}", help_config());
        return ExitCode::SUCCESS;
    }
    match cli.command {
        None => fail("no command given; see --help"),
        Some(Command::Check { config }) => match read_config(&config) {
            Ok(cfg) => {
                println!("ok: scenario = {}", cfg.scenario.as_str());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Some(Command::Run { config, out, seed }) => {
            let mut cfg = match read_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = std::env::var_os("RELMECH_OUT").map(PathBuf::from).or(out).unwrap_or_else(|| cfg.out.clone());
            match relmech::run(&cfg, &dir) {
                Ok(report) => {
                    print!("{}", emit_report(&report, Format::Text));
                    verdict(&report)
                }
                Err(e) => fail(e),
            }
        }
        Some(Command::Precession { gm, a, e, c, revs }) => match precession(gm, a, e, c, revs) {
            Ok(report) => {
                print!("{}", emit_report(&report, Format::Text));
                verdict(&report)
            }
            Err(e) => fail(e),
        },
    }
}
