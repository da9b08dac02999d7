//! Acceptance run: one line per criterion, non-zero exit if any fails.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use procmap::map::{self, circular_distance, MapParams};
use procmap::orbit::{
    self, BehaviorKind, ClassifyTolerances, Direction, OrbitSettings, OrbitStatus,
};
use procmap::scan::{self, IcPolicy, ScanGrid, Transform};
use procmap::stability;
use procmap::threshold;
use procmap::window::{self, WindowInterval, WindowPredicateSpec};
use procmap::CriticalBranch;

const BIOS_REFERENCE: f64 = 4.603_338_848_751_700_352_556_582_029_103;
const LSTEP_GAIN: f64 = 4.911_529_662_464_309_878_494_343_949_810_3;

struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    fn check(&mut self, id: &str, title: &str, f: impl FnOnce() -> Vec<(bool, String)>) {
        self.total += 1;
        let start = Instant::now();
        let subs = f();
        let elapsed = start.elapsed();
        let ok = subs.iter().all(|(p, _)| *p);
        println!(
            "[{}] {id}. {title} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for (p, msg) in subs {
            println!("       {} {msg}", if p { "ok  " } else { "FAIL" });
        }
        if !ok {
            self.failed.push(format!("{id}. {title}"));
        }
    }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (
        elapsed < limit,
        format!(
            "runtime {:.3} s < {:.3} s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ),
    )
}

fn bios_onset() -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let t = Instant::now();
    let r = threshold::solve_bios_onset();
    let elapsed = t.elapsed();
    let err = (r.g - BIOS_REFERENCE).abs();
    out.push((
        err < 1e-10,
        format!("library g = {:.15} |err| = {err:.2e} < 1e-10", r.g),
    ));
    let residual = threshold::recheck(&r).abs();
    out.push((residual < 1e-12, format!("residual {residual:.2e} < 1e-12")));
    out.push(within(elapsed, Duration::from_millis(1)));

    let o = Command::new(env!("CARGO_BIN_EXE_procmap"))
        .args(["thresholds", "--bios"])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&o.stdout);
    let g_cli = text
        .lines()
        .nth(1)
        .and_then(|l| l.split(',').nth(1))
        .and_then(|v| v.parse::<f64>().ok());
    match g_cli {
        Some(g) => out.push((
            o.status.success() && (g - BIOS_REFERENCE).abs() < 1e-10,
            format!("`thresholds --bios` prints g = {g}"),
        )),
        None => out.push((false, format!("unparseable CLI output: {text}"))),
    }
    out
}

fn stability_thresholds() -> Vec<(bool, String)> {
    let t = Instant::now();
    let mut out = Vec::new();
    let cases = [
        ("fixed-point loss", 1, (1.9, 2.1), 2.0, 1e-5),
        ("unification", 2, (3.0, 3.3), PI, 1e-4),
        ("period-4 multistability", 4, (3.3, 3.5), 3.445, 0.005),
    ];
    for (what, n, bracket, target, tol) in cases {
        match stability::locate_stability_boundary(n, bracket, 0.0..TAU) {
            Ok(g) => out.push((
                (g - target).abs() <= tol,
                format!("{what}: n = {n}, g = {g:.7} vs {target:.7} ± {tol}"),
            )),
            Err(e) => out.push((false, format!("{what}: {e}"))),
        }
    }
    out.push(within(t.elapsed(), Duration::from_secs(10)));
    out
}

fn multistable_counts() -> Vec<(bool, String)> {
    let t = Instant::now();
    let mut out = Vec::new();
    match stability::sweep_stability(2, PI + 1e-3, 3.444, 60, 0.0..TAU) {
        Ok(s) => {
            let counts = s.stable_counts();
            let bad: Vec<_> = s
                .g_grid
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c != 4)
                .collect();
            out.push((
                bad.is_empty(),
                format!("n = 2: 4 stable roots at all 60 g in (π, 3.445); exceptions {bad:?}"),
            ));
        }
        Err(e) => out.push((false, format!("n = 2 sweep: {e}"))),
    }
    match stability::sweep_stability(4, 3.445, 3.5, 56, 0.0..TAU) {
        Ok(s) => {
            let counts = s.stable_counts();
            let hit = s.g_grid.iter().zip(&counts).find(|(_, &c)| c == 8);
            out.push((
                hit.is_some(),
                format!(
                    "n = 4: 8 stable roots in [3.445, 3.5], first at g = {:?}",
                    hit.map(|(g, _)| *g)
                ),
            ));
        }
        Err(e) => out.push((false, format!("n = 4 sweep: {e}"))),
    }
    out.push(within(t.elapsed(), Duration::from_secs(30)));
    out
}

fn ballistic() -> Vec<(bool, String)> {
    let mut out = Vec::new();
    match threshold::ballistic_onset(1) {
        Ok(r) => out.push((r.g == TAU, format!("ballistic_onset(1) = {:?} == 2π", r.g))),
        Err(e) => out.push((false, e.to_string())),
    }
    // with |A| ≤ 1e12 the 2π-per-step climb needs ~1.6e11 steps to escape
    let s = OrbitSettings {
        transient: 0,
        samples: 1_000_000,
        escape_bound: 1e5,
        ..OrbitSettings::default()
    };
    let o = orbit::run_orbit(&MapParams::new(TAU), FRAC_PI_2, &s).expect("valid settings");
    let escaped = matches!(o.status, OrbitStatus::Escaped { .. });
    out.push((
        escaped,
        format!("orbit from π/2 escapes |A| ≤ 1e5: {:?}", o.status),
    ));
    let mut prev = FRAC_PI_2;
    let mut worst = 0.0f64;
    for &x in &o.raw {
        worst = worst.max((x - prev - TAU).abs());
        prev = x;
    }
    out.push((
        worst <= 1e-9 && !o.raw.is_empty(),
        format!(
            "{} increments, max |ΔA - 2π| = {worst:.2e} ≤ 1e-9",
            o.raw.len()
        ),
    ));
    out
}

fn classification() -> Vec<(bool, String)> {
    let t = Instant::now();
    let cases = [
        (1.5, BehaviorKind::ConvergedFixedPoint),
        (
            6.7332,
            BehaviorKind::PeriodicDivergent(2, Direction::Positive),
        ),
        (6.8832, BehaviorKind::ChaoticDivergent(Direction::Positive)),
        (4.62, BehaviorKind::Biotic),
        (9.21, BehaviorKind::BoundedPeriodic(2)),
    ];
    let settings = OrbitSettings::default();
    let mut out: Vec<_> = cases
        .iter()
        .map(|&(g, want)| {
            let got = orbit::run_orbit(&MapParams::new(g), FRAC_PI_2, &settings)
                .and_then(|o| orbit::classify(&o, &ClassifyTolerances::default()));
            match got {
                Ok(l) => (
                    l.kind == want && !l.evidence.inconclusive,
                    format!("g = {g}: {} (expected {want})", l.kind),
                ),
                Err(e) => (false, format!("g = {g}: {e}")),
            }
        })
        .collect();
    out.push(within(t.elapsed(), Duration::from_secs(5)));
    out
}

fn best_overlap(found: &[WindowInterval], lo: f64, hi: f64) -> Option<WindowInterval> {
    let overlap = |w: &WindowInterval| w.g_hi.min(hi) - w.g_lo.max(lo);
    found
        .iter()
        .copied()
        .filter(|w| overlap(w) > 0.0)
        .max_by(|a, b| overlap(a).total_cmp(&overlap(b)))
}

fn search(spec: WindowPredicateSpec, lo: f64, hi: f64) -> Vec<WindowInterval> {
    window::find_windows(&spec, lo, hi, window::default_grid(lo, hi)).unwrap_or_default()
}

fn window_intervals() -> Vec<(bool, String)> {
    let t = Instant::now();
    let cases = [
        (1, 1, 3, (8.5, 10.5), (9.0065, 9.7558)),
        (1, 1, 20, (9.0, 10.0), (9.205, 9.6838)),
        (1, 2, 3, (15.0, 16.5), (15.501, 15.8837)),
        (1, 2, 20, (15.0, 16.5), (15.5796, 15.8763)),
    ];
    let mut out: Vec<_> = cases
        .iter()
        .map(|&(l, i, n, (lo, hi), (want_lo, want_hi))| {
            let found = search(WindowPredicateSpec::new(l, i, n), lo, hi);
            match best_overlap(&found, want_lo, want_hi) {
                Some(w) => {
                    let (d_lo, d_hi) = ((w.g_lo - want_lo).abs(), (w.g_hi - want_hi).abs());
                    (
                        d_lo <= 0.01 && d_hi <= 0.01,
                        format!(
                            "L={l} I={i} n_max={n}: [{:.5}, {:.5}] vs [{want_lo}, {want_hi}], \
                             endpoint errors {d_lo:.4}, {d_hi:.4} (≤ 0.01)",
                            w.g_lo, w.g_hi
                        ),
                    )
                }
                None => (
                    false,
                    format!("L={l} I={i} n_max={n}: no window near [{want_lo}, {want_hi}]"),
                ),
            }
        })
        .collect();
    out.push(within(t.elapsed(), Duration::from_secs(120)));
    out
}

fn small_windows() -> Vec<(bool, String)> {
    let t = Instant::now();
    let cases = [
        (2, 1, (5.3, 5.5), (5.3683, 5.44)),
        (3, 1, (5.6, 5.75), (5.68, 5.689)),
        (3, 2, (5.85, 6.0), (5.91, 5.935)),
    ];
    let mut out: Vec<_> = cases
        .iter()
        .map(|&(l, i, (lo, hi), (want_lo, want_hi))| {
            let found = search(WindowPredicateSpec::new(l, i, 24), lo, hi);
            let hits: Vec<String> = found
                .iter()
                .filter(|w| w.g_lo < want_hi && w.g_hi > want_lo)
                .map(|w| format!("[{:.5}, {:.5}]", w.g_lo, w.g_hi))
                .collect();
            (
                !hits.is_empty(),
                format!("L={l} I={i} n_max=24: overlapping [{want_lo}, {want_hi}]: {hits:?}"),
            )
        })
        .collect();
    out.push(within(t.elapsed(), Duration::from_secs(120)));
    out
}

fn lstep_solution() -> Vec<(bool, String)> {
    match threshold::solve_lstep_phase(2, LSTEP_GAIN) {
        Ok(r) => {
            let a = r.aux.unwrap_or(f64::NAN);
            let residual = threshold::recheck(&r).abs();
            vec![
                (
                    (a - 1.73).abs() <= 0.01,
                    format!("A_k = {a:.12} vs 1.73 ± 0.01"),
                ),
                (residual < 1e-12, format!("residual {residual:.2e} < 1e-12")),
            ]
        }
        Err(e) => vec![(false, e.to_string())],
    }
}

fn property_suites() -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let p = MapParams::new(rng.gen_range(0.0..20.0));
        let a = rng.gen_range(-100.0..100.0);
        let shift = (map::eval(&p, a + TAU) - map::eval(&p, a) - TAU).abs();
        let odd = (map::eval(&p, -a) + map::eval(&p, a)).abs();
        worst = worst.max(shift).max(odd);
    }
    out.push((
        worst < 1e-10,
        format!("equivariance / odd symmetry, 1e5 points, worst {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = MapParams::new(rng.gen_range(0.1..6.0));
        let a = rng.gen_range(-10.0..10.0);
        let n = rng.gen_range(1..=4);
        let h = 1e-7;
        let fd = (map::compose(&p, a + h, n) - map::compose(&p, a - h, n)) / (2.0 * h);
        let m = map::multiplier_at(&p, a, n);
        worst = worst.max((fd - m).abs() / m.abs().max(1.0));
    }
    out.push((
        worst <= 1e-5,
        format!("multiplier vs finite differences, 1e3 cases, worst rel {worst:.2e}"),
    ));

    let mut ok = true;
    for _ in 0..200 {
        let s = OrbitSettings {
            transient: 10,
            samples: 50,
            ..OrbitSettings::default()
        };
        let o = orbit::run_orbit(
            &MapParams::new(rng.gen_range(0.5..12.0)),
            rng.gen_range(0.0..TAU),
            &s,
        )
        .expect("valid settings");
        let base = orbit::mod_reduce(&o);
        let k = rng.gen_range(-50i64..50) as f64;
        let mut shifted = o.clone();
        shifted.raw.iter_mut().for_each(|x| *x += k * TAU);
        ok &= base.iter().all(|v| (0.0..TAU).contains(v));
        ok &= base
            .iter()
            .zip(orbit::mod_reduce(&shifted))
            .all(|(x, y)| circular_distance(*x, y) < 1e-9);
    }
    out.push((
        ok,
        "mod_reduce range [0, 2π) and 2πk shift invariance, 200 orbits".into(),
    ));

    let specs = [
        ((1, 1), (9.0, 10.0), [3, 6, 12]),
        ((1, 2), (15.3, 16.1), [3, 5, 9]),
        ((2, 1), (5.3, 5.5), [4, 8, 16]),
    ];
    for ((l, i), (lo, hi), ns) in specs {
        let sets: Vec<_> = ns
            .iter()
            .map(|&n| search(WindowPredicateSpec::new(l, i, n), lo, hi))
            .collect();
        let nested = sets.windows(2).all(|p| {
            p[1].iter()
                .all(|w| p[0].iter().any(|o| o.contains(w, 2e-6)))
        });
        out.push((
            nested && !sets[2].is_empty(),
            format!("n_max monotonicity L={l} I={i} n_max {ns:?}"),
        ));
    }

    let i2 = search(WindowPredicateSpec::new(1, 2, 8), 15.0, 16.5);
    let i1 = search(WindowPredicateSpec::new(1, 1, 8), 15.0, 16.5);
    out.push((
        !i2.is_empty() && i2.iter().all(|w| i1.iter().any(|o| o.contains(w, 2e-6))),
        format!(
            "I=2 windows inside I=1 windows on [15, 16.5] ({} vs {})",
            i2.len(),
            i1.len()
        ),
    ));

    let gs = stability::linspace(1.05, 12.0, 500);
    let mut worst = 0.0f64;
    for which in [CriticalBranch::A1, CriticalBranch::A2] {
        for k in 2..=6 {
            let prev = window::q_curve(k - 1, which, &gs).expect("g > 1");
            let cur = window::q_curve(k, which, &gs).expect("g > 1");
            for ((g, a), b) in gs.iter().zip(&prev.points).zip(&cur.points) {
                let stepped = map::mod_2pi(map::eval(&MapParams::new(*g), *a));
                worst = worst.max(circular_distance(stepped, *b));
            }
        }
    }
    out.push((
        worst < 1e-9,
        format!("Q-curve recurrence n = 2..6, worst {worst:.2e}"),
    ));

    let grid = ScanGrid {
        g_lo: 0.0,
        g_hi: 12.0,
        g_steps: 401,
        ic: IcPolicy::RandomPerG(7),
        orbit: OrbitSettings {
            transient: 500,
            samples: 64,
            ..OrbitSettings::default()
        },
        transform: Transform::SignedLog,
    };
    let bytes = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let r = pool
            .install(|| scan::bifurcation_scan(&grid))
            .expect("valid grid");
        let mut buf = Vec::new();
        scan::write_csv(&r.rows, &mut buf).expect("in-memory write");
        buf
    };
    let first = bytes(1);
    out.push((
        first == bytes(4) && first == bytes(8),
        format!(
            "seeded scan byte-identical on 1/4/8 threads ({} bytes)",
            first.len()
        ),
    ));
    out
}

/// Compressed sequence of periods met in increasing g, cut at the first
/// chaotic label after periodic behaviour began.
fn periods_before_chaos(labels: &[(f64, Option<BehaviorKind>)]) -> (Vec<usize>, Option<f64>) {
    let mut seq: Vec<usize> = Vec::new();
    for &(g, label) in labels {
        match label {
            Some(BehaviorKind::BoundedPeriodic(p)) => {
                if seq.last() != Some(&p) {
                    seq.push(p);
                }
            }
            Some(
                BehaviorKind::Biotic
                | BehaviorKind::BoundedChaotic
                | BehaviorKind::ChaoticDivergent(_),
            ) if !seq.is_empty() => {
                return (seq, Some(g));
            }
            _ => {}
        }
    }
    (seq, None)
}

fn doubles_through_eight(seq: &[usize]) -> bool {
    let mut want = [2, 4, 8].iter().peekable();
    for p in seq {
        if want.peek() == Some(&p) {
            want.next();
        }
    }
    want.peek().is_none()
}

fn in_window_cascade() -> Vec<(bool, String)> {
    let t = Instant::now();
    let (lo, hi) = (9.205, 9.6838);
    let grid = ScanGrid {
        g_lo: lo,
        g_hi: hi,
        g_steps: 2000,
        ic: IcPolicy::Fixed(FRAC_PI_2),
        orbit: OrbitSettings {
            transient: 5000,
            samples: 1024,
            ..OrbitSettings::default()
        },
        transform: Transform::Raw,
    };
    let result = match scan::bifurcation_scan(&grid) {
        Ok(r) => r,
        Err(e) => return vec![(false, e.to_string())],
    };
    let labels: Vec<(f64, Option<BehaviorKind>)> = result
        .rows
        .iter()
        .filter(|r| r.sample_index == 0)
        .map(|r| (r.g, r.label))
        .collect();
    let mid = 0.5 * (lo + hi);
    let left: Vec<_> = labels.iter().copied().filter(|(g, _)| *g <= mid).collect();
    let (seq_left, chaos_left) = periods_before_chaos(&left);
    let (seq_all, chaos_all) = periods_before_chaos(&labels);
    let onset = |p: usize| {
        labels
            .iter()
            .find(|(_, l)| *l == Some(BehaviorKind::BoundedPeriodic(p)))
            .map(|(g, _)| *g)
    };
    println!(
        "       info: whole window periods {seq_all:?} then chaos at g = {chaos_all:?}; \
         onsets 4 at {:?}, 8 at {:?}",
        onset(4),
        onset(8)
    );
    vec![
        (
            doubles_through_eight(&seq_left) && chaos_left.is_some(),
            format!(
                "left half [{lo}, {mid:.4}]: periods {seq_left:?}, chaos at {chaos_left:?}; need 2 → 4 → 8 then chaos"
            ),
        ),
        within(t.elapsed(), Duration::from_secs(60)),
    ]
}

fn main() -> ExitCode {
    let mut report = Report {
        failed: Vec::new(),
        total: 0,
    };
    report.check("1", "bios onset", bios_onset);
    report.check("2", "stability thresholds", stability_thresholds);
    report.check("3", "multistable counts", multistable_counts);
    report.check("4", "ballistic windows", ballistic);
    report.check("5", "classification fixture", classification);
    report.check("6", "window intervals", window_intervals);
    report.check("7", "small windows", small_windows);
    report.check("8", "L-step solution", lstep_solution);
    report.check("9", "property suites", property_suites);
    report.check("10", "in-window cascade", in_window_cascade);

    let passed = report.total - report.failed.len();
    println!("\n{passed}/{} criteria passed", report.total);
    if report.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failed {
            println!("failed: {f}");
        }
        ExitCode::FAILURE
    }
}
