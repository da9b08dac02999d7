//! Named sweeps, one per standard figure of the process-map analysis.
//!
//! Each recipe writes one or more CSV files into an output directory and
//! returns their paths. Bifurcation recipes record 256 samples after a
//! 2000-step transient unless noted; "in the interval [0, 2π]" diagrams
//! use mod-2π reduction.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{CriticalBranch, MapParams};
use crate::orbit::{self, OrbitSettings};
use crate::scan::{self, IcPolicy, ScanGrid, Transform};
use crate::stability::{self, linspace};
use crate::tables;
use crate::window::{self, WindowPredicateSpec};

pub const RECIPES: [&str; 16] = [
    "fig1a", "fig1b", "fig3a", "fig3b", "fig4", "fig6", "fig7", "fig9", "fig10", "fig13", "fig14",
    "fig16", "fig17", "fig18", "fig19", "fig20",
];

/// Seed for recipes drawing random initial conditions.
pub const RECIPE_SEED: u64 = 20_170_601;

fn settings(transient: usize, samples: usize) -> OrbitSettings {
    OrbitSettings {
        transient,
        samples,
        ..OrbitSettings::default()
    }
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    fn scan(&mut self, name: &str, grid: ScanGrid) -> Result<()> {
        let result = scan::bifurcation_scan(&grid)?;
        scan::write_csv(&result.rows, self.file(name)?)
    }

    fn cobweb(&mut self, name: &str, g: f64, a0: f64, steps: usize) -> Result<()> {
        let pts = orbit::cobweb_trace(&MapParams::new(g), a0, steps);
        tables::write_cobweb(&pts, self.file(name)?)
    }

    fn traces(
        &mut self,
        name: &str,
        spec: WindowPredicateSpec,
        g_lo: f64,
        g_hi: f64,
        steps: usize,
    ) -> Result<()> {
        let rows: Vec<(f64, usize, f64)> = linspace(g_lo, g_hi, steps)
            .par_iter()
            .map(|&g| {
                window::critical_trace(g, &spec).map(|t| {
                    t.into_iter()
                        .enumerate()
                        .map(|(i, v)| (g, i + 1, v))
                        .collect::<Vec<_>>()
                })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        tables::write_traces(&rows, self.file(name)?)
    }

    fn windows(&mut self, name: &str, searches: &[(WindowPredicateSpec, f64, f64)]) -> Result<()> {
        let mut all = Vec::new();
        for (spec, lo, hi) in searches {
            all.extend(window::find_windows(
                spec,
                *lo,
                *hi,
                window::default_grid(*lo, *hi),
            )?);
        }
        tables::write_windows(&all, self.file(name)?)
    }
}

fn grid(
    g_lo: f64,
    g_hi: f64,
    g_steps: usize,
    ic: IcPolicy,
    orbit: OrbitSettings,
    transform: Transform,
) -> ScanGrid {
    ScanGrid {
        g_lo,
        g_hi,
        g_steps,
        ic,
        orbit,
        transform,
    }
}

/// Run the recipe `name`, writing into `out_dir` (created if missing).
pub fn run_recipe(name: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if !RECIPES.contains(&name) {
        return Err(Error::UnknownRecipe {
            name: name.to_string(),
            available: RECIPES.iter().map(|s| s.to_string()).collect(),
        });
    }
    fs::create_dir_all(out_dir)?;
    let mut w = Writer {
        dir: out_dir,
        written: Vec::new(),
    };
    let std = settings(2000, 256);
    let half_pi = IcPolicy::Fixed(FRAC_PI_2);

    match name {
        "fig1a" => w.scan(
            "fig1a_bifurcation_mod2pi.csv",
            grid(0.0, 6.0, 1201, half_pi, std, Transform::Mod2Pi),
        )?,
        "fig1b" => w.scan(
            "fig1b_bifurcation_signed_log.csv",
            grid(0.0, 6.0, 1201, half_pi, std, Transform::SignedLog),
        )?,
        "fig3a" | "fig3b" => {
            let n = if name == "fig3a" { 2 } else { 4 };
            let sweep = stability::sweep_stability(n, 1.5, 3.5, 401, 0.0..TAU)?;
            tables::write_sweep(&sweep, w.file(&format!("{name}_fixed_points_f{n}.csv"))?)?;
        }
        "fig4" => w.scan(
            "fig4_multistability_mod2pi.csv",
            grid(
                0.0,
                4.6,
                921,
                IcPolicy::List(vec![FRAC_PI_2 - 0.2, FRAC_PI_2]),
                std,
                Transform::Mod2Pi,
            ),
        )?,
        "fig6" => {
            w.cobweb("fig6a_cobweb_g4.62.csv", 4.62, FRAC_PI_2, 500)?;
            w.scan(
                "fig6b_time_series_g4.62.csv",
                grid(4.62, 4.62, 1, half_pi, settings(0, 2000), Transform::Raw),
            )?;
        }
        "fig7" => {
            let ic = IcPolicy::RandomPerG(RECIPE_SEED);
            w.scan(
                "fig7a_bifurcation_signed_log.csv",
                grid(0.0, 12.0, 2401, ic.clone(), std, Transform::SignedLog),
            )?;
            w.scan(
                "fig7b_bifurcation_mod2pi.csv",
                grid(0.0, 12.0, 2401, ic, std, Transform::Mod2Pi),
            )?;
        }
        "fig9" => {
            for g in [6.7332, 6.8832] {
                w.cobweb(&format!("fig9_cobweb_g{g}.csv"), g, FRAC_PI_2, 200)?;
                w.scan(
                    &format!("fig9_mod2pi_g{g}.csv"),
                    grid(
                        g,
                        g,
                        1,
                        half_pi.clone(),
                        settings(0, 500),
                        Transform::Mod2Pi,
                    ),
                )?;
            }
        }
        "fig10" => {
            let (lo, hi) = (TAU - 0.3, TAU + 0.5);
            w.scan(
                "fig10a_random_ic_mod2pi.csv",
                grid(
                    lo,
                    hi,
                    801,
                    IcPolicy::RandomPerG(RECIPE_SEED),
                    std,
                    Transform::Mod2Pi,
                ),
            )?;
            w.scan(
                "fig10b_ic_half_pi_mod2pi.csv",
                grid(lo, hi, 801, half_pi, std, Transform::Mod2Pi),
            )?;
            w.scan(
                "fig10c_ic_three_half_pi_mod2pi.csv",
                grid(
                    lo,
                    hi,
                    801,
                    IcPolicy::Fixed(1.5 * PI),
                    std,
                    Transform::Mod2Pi,
                ),
            )?;
        }
        "fig13" => w.scan(
            "fig13_first_periodic_window_raw.csv",
            grid(
                9.205,
                9.6838,
                1000,
                half_pi,
                settings(5000, 256),
                Transform::Raw,
            ),
        )?,
        "fig14" => {
            w.traces(
                "fig14a_conditions_n3.csv",
                WindowPredicateSpec::new(1, 1, 3),
                8.0,
                17.0,
                9001,
            )?;
            w.traces(
                "fig14b_conditions_n20.csv",
                WindowPredicateSpec::new(1, 1, 20),
                9.0,
                10.0,
                2001,
            )?;
            w.traces(
                "fig14c_conditions_n20.csv",
                WindowPredicateSpec::new(1, 2, 20),
                15.5,
                16.0,
                1001,
            )?;
            w.windows(
                "fig14_windows.csv",
                &[
                    (WindowPredicateSpec::new(1, 1, 3), 8.5, 10.5),
                    (WindowPredicateSpec::new(1, 1, 20), 9.0, 10.0),
                    (WindowPredicateSpec::new(1, 2, 3), 15.0, 16.5),
                    (WindowPredicateSpec::new(1, 2, 20), 15.0, 16.5),
                ],
            )?;
        }
        "fig16" => {
            w.scan(
                "fig16a_small_windows_mod2pi.csv",
                grid(4.6, TAU, 1601, half_pi.clone(), std, Transform::Mod2Pi),
            )?;
            w.scan(
                "fig16b_small_windows_mod2pi.csv",
                grid(5.45, TAU, 1601, half_pi, std, Transform::Mod2Pi),
            )?;
        }
        "fig17" => {
            for g in [4.915, 5.39, 5.5835, 5.6845, 5.805, 5.921] {
                let pts = {
                    // cobweb after the transient
                    let p = MapParams::new(g);
                    let a = crate::map::iterate_n(&p, FRAC_PI_2, 2000).unwrap_or(FRAC_PI_2);
                    orbit::cobweb_trace(&p, a, 60)
                };
                tables::write_cobweb(&pts, w.file(&format!("fig17_cobweb_g{g}.csv"))?)?;
            }
        }
        "fig18" => {
            let ic = IcPolicy::Fixed(1.73);
            w.scan(
                "fig18a_signed_log.csv",
                grid(4.91, 4.95, 801, ic.clone(), std, Transform::SignedLog),
            )?;
            w.scan(
                "fig18b_mod2pi.csv",
                grid(4.91, 4.95, 801, ic, std, Transform::Mod2Pi),
            )?;
        }
        "fig19" => {
            for (l, i) in [(2, 1), (3, 1), (3, 2)] {
                w.traces(
                    &format!("fig19a_conditions_L{l}_I{i}_n6.csv"),
                    WindowPredicateSpec::new(l, i, 6),
                    5.3,
                    6.0,
                    7001,
                )?;
            }
            w.windows(
                "fig19_windows.csv",
                &[
                    (WindowPredicateSpec::new(2, 1, 24), 5.3, 5.5),
                    (WindowPredicateSpec::new(3, 1, 24), 5.6, 5.75),
                    (WindowPredicateSpec::new(3, 2, 24), 5.85, 6.0),
                ],
            )?;
        }
        "fig20" => {
            w.scan(
                "fig20_bifurcation_mod2pi.csv",
                grid(4.6, TAU, 1601, half_pi, std, Transform::Mod2Pi),
            )?;
            let gs = linspace(4.6, TAU, 1601);
            for n in [1, 2] {
                for which in [CriticalBranch::A1, CriticalBranch::A2] {
                    let q = window::q_curve(n, which, &gs)?;
                    let file = format!("fig20_qcurve_n{n}_{}.csv", tables::critical_name(which));
                    tables::write_qcurve(&q, w.file(&file)?)?;
                }
            }
        }
        _ => unreachable!("recipe list checked above"),
    }
    Ok(w.written)
}
