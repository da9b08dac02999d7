//! Command-line front end for the process-map laboratory.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use procmap::config::ConfigFile;
use procmap::map::{CriticalBranch, MapParams};
use procmap::orbit::{self, ClassifyTolerances, OrbitSettings};
use procmap::scan::{self, IcPolicy, ScanGrid, ScanMetadata, ScanResult, Transform};
use procmap::stability::{self, linspace};
use procmap::threshold::{self, ThresholdResult};
use procmap::window::{self, WindowPredicateSpec};
use procmap::{recipe, tables, Error, Result};

const THREADS_ENV: &str = "PROCMAP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "procmap", version, about = "Explore the map A -> A + g sin(A)")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Coupling constant (accepts forms like `2pi` or `pi/2`).
    #[arg(long, global = true, value_parser = real)]
    g: Option<f64>,
    /// Grid of g as LO:HI:STEPS (STEPS optional for `windows`).
    #[arg(long = "g-range", global = true, value_name = "LO:HI[:STEPS]")]
    g_range: Option<String>,
    /// Initial condition; repeat for several.
    #[arg(long, global = true, value_parser = real)]
    ic: Vec<f64>,
    /// Draw one uniform initial condition in [0, 2π) per g from this seed.
    #[arg(long = "ic-random", global = true, value_name = "SEED")]
    ic_random: Option<u64>,
    #[arg(long, global = true)]
    transient: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// raw | mod2pi | signed-log
    #[arg(long, global = true)]
    transform: Option<Transform>,
    /// Output file (a directory for `recipe`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to $PROCMAP_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// csv | ndjson (ndjson only for sample streams).
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Samples of a single orbit at one g.
    Iterate,
    /// Cobweb staircase of one orbit.
    Cobweb {
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Bifurcation diagram over a g grid.
    Bifurcation,
    /// Roots of f^n(A) - A with multipliers and stability.
    FixedPoints {
        #[arg(long)]
        n: Option<usize>,
        /// Phase interval LO:HI, default 0:2pi.
        #[arg(long = "a-range")]
        a_range: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Fixed points of f^n across a g grid, or one stability boundary.
    SweepStability {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "a-range")]
        a_range: Option<String>,
        /// Bisect the stable-count change inside the g bracket LO:HI.
        #[arg(long)]
        locate: Option<String>,
    },
    /// Bios onset and ballistic window onsets.
    Thresholds {
        #[arg(long)]
        bios: bool,
        /// Drift multiple k; repeat for several.
        #[arg(long)]
        ballistic: Vec<u32>,
    },
    /// Periodic windows from the critical-point condition.
    Windows {
        #[arg(long, short = 'L')]
        stride: Option<usize>,
        #[arg(long = "half-period", short = 'I')]
        half_period: Option<u32>,
        #[arg(long = "n-max")]
        n_max: Option<usize>,
        /// A1 | A2
        #[arg(long)]
        critical: Option<String>,
    },
    /// Solve the L-step small-window condition.
    Lstep {
        #[arg(long, short = 'L')]
        stride: Option<usize>,
        /// Solve for g at this phase.
        #[arg(long = "a-k", value_parser = real)]
        a_k: Option<f64>,
        /// Trace the solution curve over phases LO:HI:STEPS.
        #[arg(long = "a-grid")]
        a_grid: Option<String>,
        #[arg(long = "g-bracket")]
        g_bracket: Option<String>,
        #[arg(long = "a-bracket")]
        a_bracket: Option<String>,
        /// With --g, list every phase root instead of the smallest.
        #[arg(long)]
        all: bool,
    },
    /// Shadow curves f^n(A*) mod 2π.
    Qcurves {
        #[arg(long)]
        n: Vec<usize>,
        #[arg(long)]
        critical: Vec<String>,
    },
    /// Behaviour labels with their evidence.
    Classify,
    /// Reproduce a named figure sweep.
    Recipe { name: String },
}

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

/// Plain floats or multiples of pi such as `2pi`, `pi/2`, `-3*pi/2`.
fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || Error::Parse(format!("not a number: `{s}`"));
    let lower = t.to_ascii_lowercase();
    let (coef, rest) = lower.split_once("pi").ok_or_else(bad)?;
    let coef = coef.trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => coef.parse::<f64>().map_err(|_| bad())?,
    };
    let d = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(c * PI / d)
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    match s.split(':').collect::<Vec<_>>()[..] {
        [lo, hi] => Ok((parse_real(lo)?, parse_real(hi)?)),
        _ => Err(Error::Parse(format!("expected LO:HI, got `{s}`"))),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, Option<usize>)> {
    let parts: Vec<_> = s.split(':').collect();
    match parts[..] {
        [lo, hi] => Ok((parse_real(lo)?, parse_real(hi)?, None)),
        [lo, hi, n] => Ok((
            parse_real(lo)?,
            parse_real(hi)?,
            Some(
                n.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad step count in `{s}`")))?,
            ),
        )),
        _ => Err(Error::Parse(format!("expected LO:HI:STEPS, got `{s}`"))),
    }
}

fn parse_critical(s: &str) -> Result<CriticalBranch> {
    match s.trim().to_ascii_uppercase().as_str() {
        "A1" => Ok(CriticalBranch::A1),
        "A2" => Ok(CriticalBranch::A2),
        _ => Err(Error::Parse(format!(
            "critical point must be A1 or A2, got `{s}`"
        ))),
    }
}

/// Flag values merged over the config file, with every value that was
/// actually used recorded for the metadata echo.
struct Ctx {
    common: Common,
    cfg: ConfigFile,
    used: RefCell<Vec<(String, String)>>,
}

impl Ctx {
    fn pick<T: Display>(
        &self,
        key: &str,
        flag: Option<T>,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.cfg.get(key).map(&parse).transpose()?,
        };
        if let Some(v) = &v {
            self.used
                .borrow_mut()
                .push((key.to_string(), v.to_string()));
        }
        Ok(v)
    }

    fn pick_str(&self, key: &str, flag: Option<String>) -> Result<Option<String>> {
        self.pick(key, flag, |s| Ok(s.to_string()))
    }

    fn pick_num<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: Display + std::str::FromStr,
    {
        self.pick(key, flag, |s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("config `{key}`: bad value `{s}`")))
        })
    }

    fn pick_list<T: Display + Clone>(
        &self,
        key: &str,
        flag: Vec<T>,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<Vec<T>> {
        let v = if flag.is_empty() {
            match self.cfg.get(key) {
                Some(s) => s
                    .split(',')
                    .map(|x| parse(x.trim()))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            }
        } else {
            flag
        };
        if !v.is_empty() {
            let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            self.used
                .borrow_mut()
                .push((key.to_string(), text.join(",")));
        }
        Ok(v)
    }

    fn g(&self) -> Result<Option<f64>> {
        self.pick("g", self.common.g, parse_real)
    }

    fn require_g(&self) -> Result<f64> {
        self.g()?
            .ok_or_else(|| Error::InvalidSettings("--g is required".into()))
    }

    fn g_range(&self) -> Result<Option<(f64, f64, Option<usize>)>> {
        self.pick_str("g-range", self.common.g_range.clone())?
            .map(|s| parse_range(&s))
            .transpose()
    }

    /// g values from `--g-range` (steps required) or a single `--g`.
    fn g_values(&self) -> Result<Vec<f64>> {
        if let Some((lo, hi, steps)) = self.g_range()? {
            let steps = steps.ok_or_else(|| Error::Parse("--g-range needs LO:HI:STEPS".into()))?;
            return Ok(linspace(lo, hi, steps));
        }
        Ok(vec![self.require_g()?])
    }

    fn ics(&self) -> Result<Vec<f64>> {
        self.pick_list("ic", self.common.ic.clone(), parse_real)
    }

    fn orbit(&self, transient: usize, samples: usize) -> Result<OrbitSettings> {
        Ok(OrbitSettings {
            transient: self
                .pick_num("transient", self.common.transient)?
                .unwrap_or(transient),
            samples: self
                .pick_num("samples", self.common.samples)?
                .unwrap_or(samples),
            ..OrbitSettings::default()
        })
    }

    fn transform(&self, default: Transform) -> Result<Transform> {
        Ok(self
            .pick("transform", self.common.transform, |s| s.parse())?
            .unwrap_or(default))
    }

    fn ndjson(&self) -> Result<bool> {
        match self
            .pick_str("format", self.common.format.clone())?
            .as_deref()
        {
            None | Some("csv") => Ok(false),
            Some("ndjson") => Ok(true),
            Some(other) => Err(Error::Parse(format!(
                "format must be csv or ndjson, got `{other}`"
            ))),
        }
    }

    fn csv_only(&self) -> Result<()> {
        if self.ndjson()? {
            return Err(Error::InvalidSettings(
                "ndjson output is only available for sample streams (iterate, bifurcation)".into(),
            ));
        }
        Ok(())
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.common
            .out
            .clone()
            .or_else(|| self.cfg.get("out").map(PathBuf::from))
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match self.out_path() {
            Some(p) => {
                let f = File::create(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Box::new(BufWriter::new(f))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn emit_scan(ctx: &Ctx, command: &str, result: &ScanResult) -> Result<()> {
    let ndjson = ctx.ndjson()?;
    let out = ctx.out_path();
    let mut sink = ctx.sink()?;
    if ndjson {
        scan::write_ndjson(&result.rows, &mut sink)?;
    } else {
        scan::write_csv(&result.rows, &mut sink)?;
    }
    sink.flush()?;
    if let Some(path) = out {
        let mut config = vec![("command".to_string(), command.to_string())];
        config.extend(ctx.used.borrow().iter().cloned());
        let meta = ScanMetadata {
            config,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs()),
            ..result.metadata.clone()
        };
        let mut side = path.into_os_string();
        side.push(".meta");
        let f = File::create(&side)?;
        scan::write_metadata(&meta, BufWriter::new(f))?;
    }
    Ok(())
}

fn ic_policy(ctx: &Ctx) -> Result<IcPolicy> {
    if let Some(seed) = ctx.pick_num("ic-random", ctx.common.ic_random)? {
        return Ok(IcPolicy::RandomPerG(seed));
    }
    let ics = ctx.ics()?;
    Ok(match ics.len() {
        0 => IcPolicy::Fixed(FRAC_PI_2),
        1 => IcPolicy::Fixed(ics[0]),
        _ => IcPolicy::List(ics),
    })
}

fn first_ic(ctx: &Ctx) -> Result<f64> {
    Ok(ctx.ics()?.first().copied().unwrap_or(FRAC_PI_2))
}

fn a_range(ctx: &Ctx, flag: Option<String>) -> Result<(f64, f64)> {
    Ok(ctx
        .pick_str("a-range", flag)?
        .map(|s| parse_pair(&s))
        .transpose()?
        .unwrap_or((0.0, TAU)))
}

fn write_simple<W: Write>(out: W, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx {
        common: cli.common,
        cfg,
        used: RefCell::new(Vec::new()),
    };

    let env_threads = std::env::var(THREADS_ENV)
        .ok()
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("{THREADS_ENV}: bad value `{s}`")))
        })
        .transpose()?;
    let threads = ctx.pick_num("threads", ctx.common.threads)?.or(env_threads);
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidSettings("threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidSettings(e.to_string()))?;
    }

    match cli.cmd {
        Cmd::Iterate => {
            let g = ctx.require_g()?;
            let grid = ScanGrid {
                g_lo: g,
                g_hi: g,
                g_steps: 1,
                ic: IcPolicy::Fixed(first_ic(&ctx)?),
                orbit: ctx.orbit(0, 1000)?,
                transform: ctx.transform(Transform::Raw)?,
            };
            emit_scan(&ctx, "iterate", &scan::bifurcation_scan(&grid)?)
        }
        Cmd::Cobweb { steps } => {
            ctx.csv_only()?;
            let g = ctx.require_g()?;
            let steps = ctx.pick_num("steps", steps)?.unwrap_or(100);
            let pts = orbit::cobweb_trace(&MapParams::new(g), first_ic(&ctx)?, steps);
            tables::write_cobweb(&pts, ctx.sink()?)
        }
        Cmd::Bifurcation => {
            let (lo, hi, steps) = ctx
                .g_range()?
                .ok_or_else(|| Error::InvalidSettings("--g-range is required".into()))?;
            let grid = ScanGrid {
                g_lo: lo,
                g_hi: hi,
                g_steps: steps.ok_or_else(|| Error::Parse("--g-range needs LO:HI:STEPS".into()))?,
                ic: ic_policy(&ctx)?,
                orbit: ctx.orbit(2000, 256)?,
                transform: ctx.transform(Transform::Mod2Pi)?,
            };
            let result = if matches!(grid.ic, IcPolicy::List(_)) {
                scan::multistability_scan(&grid)?
            } else {
                scan::bifurcation_scan(&grid)?
            };
            emit_scan(&ctx, "bifurcation", &result)
        }
        Cmd::FixedPoints {
            n,
            a_range: ar,
            grid,
        } => {
            ctx.csv_only()?;
            let g = ctx.require_g()?;
            let n = ctx.pick_num("n", n)?.unwrap_or(1);
            let (lo, hi) = a_range(&ctx, ar)?;
            let grid = ctx
                .pick_num("grid", grid)?
                .unwrap_or(stability::default_grid(n));
            let recs = stability::find_fixed_points(&MapParams::new(g), n, lo..hi, grid)?;
            tables::write_fixed_points(g, &recs, ctx.sink()?)
        }
        Cmd::SweepStability {
            n,
            a_range: ar,
            locate,
        } => {
            ctx.csv_only()?;
            let n = ctx.pick_num("n", n)?.unwrap_or(2);
            let (lo, hi) = a_range(&ctx, ar)?;
            if let Some(bracket) = ctx.pick_str("locate", locate)? {
                let (g_lo, g_hi) = parse_pair(&bracket)?;
                let g = stability::locate_stability_boundary(n, (g_lo, g_hi), lo..hi)?;
                return write_simple(
                    ctx.sink()?,
                    &["n", "g_lo", "g_hi", "boundary"],
                    vec![vec![
                        n.to_string(),
                        scan::fmt_f64(g_lo),
                        scan::fmt_f64(g_hi),
                        scan::fmt_f64(g),
                    ]],
                );
            }
            let (g_lo, g_hi, steps) = ctx.g_range()?.ok_or_else(|| {
                Error::InvalidSettings("--g-range or --locate is required".into())
            })?;
            let steps = steps.ok_or_else(|| Error::Parse("--g-range needs LO:HI:STEPS".into()))?;
            let sweep = stability::sweep_stability(n, g_lo, g_hi, steps, lo..hi)?;
            tables::write_sweep(&sweep, ctx.sink()?)
        }
        Cmd::Thresholds { bios, ballistic } => {
            ctx.csv_only()?;
            let ks = ctx.pick_list("ballistic", ballistic, |s| {
                s.parse()
                    .map_err(|_| Error::Parse(format!("bad ballistic multiple `{s}`")))
            })?;
            let mut results: Vec<ThresholdResult> = Vec::new();
            if bios || ks.is_empty() {
                results.push(threshold::solve_bios_onset());
            }
            for k in ks {
                results.push(threshold::ballistic_onset(k)?);
            }
            tables::write_thresholds(&results, ctx.sink()?)
        }
        Cmd::Windows {
            stride,
            half_period,
            n_max,
            critical,
        } => {
            ctx.csv_only()?;
            let spec = WindowPredicateSpec::new(
                ctx.pick_num("stride", stride)?.unwrap_or(1),
                ctx.pick_num("half-period", half_period)?.unwrap_or(1),
                ctx.pick_num("n-max", n_max)?.unwrap_or(20),
            )
            .with_critical(
                ctx.pick_str("critical", critical)?
                    .map(|s| parse_critical(&s))
                    .transpose()?
                    .unwrap_or(CriticalBranch::A1),
            );
            let (lo, hi, steps) = ctx
                .g_range()?
                .ok_or_else(|| Error::InvalidSettings("--g-range is required".into()))?;
            let grid = steps.unwrap_or_else(|| window::default_grid(lo, hi));
            let found = window::find_windows(&spec, lo, hi, grid)?;
            tables::write_windows(&found, ctx.sink()?)
        }
        Cmd::Lstep {
            stride,
            a_k,
            a_grid,
            g_bracket,
            a_bracket,
            all,
        } => {
            ctx.csv_only()?;
            let l = ctx.pick_num("stride", stride)?.unwrap_or(2);
            let g_bracket = ctx
                .pick_str("g-bracket", g_bracket)?
                .map(|s| parse_pair(&s))
                .transpose()?
                .unwrap_or(threshold::LSTEP_G_BRACKET);
            let a_bracket = ctx
                .pick_str("a-bracket", a_bracket)?
                .map(|s| parse_pair(&s))
                .transpose()?;
            let a_k = ctx.pick("a-k", a_k, parse_real)?;
            let a_grid = ctx.pick_str("a-grid", a_grid)?;
            let results = if let Some(a) = a_k {
                vec![threshold::solve_lstep_in(l, a, g_bracket)?]
            } else if let Some(spec) = a_grid {
                let (lo, hi, steps) = parse_range(&spec)?;
                let steps =
                    steps.ok_or_else(|| Error::Parse("--a-grid needs LO:HI:STEPS".into()))?;
                threshold::scan_lstep_solutions(l, &linspace(lo, hi, steps), g_bracket)?
            } else {
                let g = ctx.g()?.ok_or_else(|| {
                    Error::InvalidSettings("lstep needs one of --a-k, --a-grid or --g".into())
                })?;
                if all {
                    threshold::lstep_phase_roots(l, g, a_bracket.unwrap_or((0.0, PI)))?
                } else {
                    vec![threshold::solve_lstep_phase_in(
                        l,
                        g,
                        a_bracket.unwrap_or(threshold::LSTEP_PHASE_BRACKET),
                    )?]
                }
            };
            tables::write_thresholds(&results, ctx.sink()?)
        }
        Cmd::Qcurves { n, critical } => {
            ctx.csv_only()?;
            let ns = ctx.pick_list("n", n, |s| {
                s.parse()
                    .map_err(|_| Error::Parse(format!("bad iterate count `{s}`")))
            })?;
            let ns = if ns.is_empty() { vec![1, 2] } else { ns };
            let which: Vec<CriticalBranch> = ctx
                .pick_list("critical", critical, |s| Ok(s.to_string()))?
                .iter()
                .map(|s| parse_critical(s))
                .collect::<Result<_>>()?;
            let which = if which.is_empty() {
                vec![CriticalBranch::A1, CriticalBranch::A2]
            } else {
                which
            };
            let gs = ctx.g_values()?;
            let mut curves = Vec::new();
            for &n in &ns {
                for &w in &which {
                    curves.push(window::q_curve(n, w, &gs)?);
                }
            }
            tables::write_qcurves(&curves, ctx.sink()?)
        }
        Cmd::Classify => {
            ctx.csv_only()?;
            let gs = ctx.g_values()?;
            let a0 = first_ic(&ctx)?;
            let settings = ctx.orbit(5000, 4096)?;
            let tol = ClassifyTolerances::default();
            let rows = gs
                .par_iter()
                .map(|&g| {
                    let o = orbit::run_orbit(&MapParams::new(g), a0, &settings)?;
                    Ok((g, a0, orbit::classify(&o, &tol)?))
                })
                .collect::<Result<Vec<_>>>()?;
            tables::write_labels(&rows, ctx.sink()?)
        }
        Cmd::Recipe { name } => {
            let dir = ctx.out_path().unwrap_or_else(|| PathBuf::from("."));
            let files = recipe::run_recipe(&name, &dir)?;
            let mut stdout = io::stdout().lock();
            for f in files {
                writeln!(stdout, "{}", f.display())?;
            }
            Ok(())
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error: kind=usage message={}", one_line(first));
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "error: kind={} message={}",
                e.kind(),
                one_line(&e.to_string())
            );
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
