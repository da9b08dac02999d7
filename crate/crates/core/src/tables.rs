//! CSV writers for the non-scan outputs (fixed points, windows, ...).

use std::io::Write;

use crate::error::Result;
use crate::map::CriticalBranch;
use crate::orbit::BehaviorLabel;
use crate::scan::fmt_f64;
use crate::stability::{FixedPointRecord, StabilitySweep};
use crate::threshold::ThresholdResult;
use crate::window::{QCurve, WindowInterval};

fn write_table<W, I>(out: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn critical_name(c: CriticalBranch) -> &'static str {
    match c {
        CriticalBranch::A1 => "A1",
        CriticalBranch::A2 => "A2",
    }
}

fn fixed_point_row(g: f64, r: &FixedPointRecord) -> Vec<String> {
    vec![
        fmt_f64(g),
        r.n.to_string(),
        fmt_f64(r.a),
        fmt_f64(r.multiplier),
        fmt_f64(r.residual),
        r.stability.to_string(),
    ]
}

const FIXED_POINT_HEADER: [&str; 6] = ["g", "n", "a", "multiplier", "residual", "stability"];

pub fn write_fixed_points<W: Write>(g: f64, records: &[FixedPointRecord], out: W) -> Result<()> {
    write_table(
        out,
        &FIXED_POINT_HEADER,
        records.iter().map(|r| fixed_point_row(g, r)),
    )
}

pub fn write_sweep<W: Write>(sweep: &StabilitySweep, out: W) -> Result<()> {
    write_table(
        out,
        &FIXED_POINT_HEADER,
        sweep
            .g_grid
            .iter()
            .zip(&sweep.records)
            .flat_map(|(&g, recs)| recs.iter().map(move |r| fixed_point_row(g, r))),
    )
}

pub fn write_windows<W: Write>(windows: &[WindowInterval], out: W) -> Result<()> {
    write_table(
        out,
        &[
            "L",
            "I",
            "n_max",
            "critical",
            "g_lo",
            "g_hi",
            "refinement_n",
            "coarse",
            "truncated",
        ],
        windows.iter().map(|w| {
            vec![
                w.spec.stride.to_string(),
                w.spec.half_period.to_string(),
                w.spec.n_max.to_string(),
                critical_name(w.spec.critical).to_string(),
                fmt_f64(w.g_lo),
                fmt_f64(w.g_hi),
                w.refinement_n.to_string(),
                w.coarse.to_string(),
                w.truncated.to_string(),
            ]
        }),
    )
}

pub fn write_qcurve<W: Write>(q: &QCurve, out: W) -> Result<()> {
    write_qcurves(std::slice::from_ref(q), out)
}

/// Several curves in one long-format table.
pub fn write_qcurves<W: Write>(curves: &[QCurve], out: W) -> Result<()> {
    write_table(
        out,
        &["g", "n", "critical", "value"],
        curves.iter().flat_map(|q| {
            q.g_grid.iter().zip(&q.points).map(move |(&g, &v)| {
                vec![
                    fmt_f64(g),
                    q.n.to_string(),
                    critical_name(q.which).to_string(),
                    fmt_f64(v),
                ]
            })
        }),
    )
}

/// `(g, a0, label)` triples with the label's evidence spread over columns.
pub fn write_labels<W: Write>(rows: &[(f64, f64, BehaviorLabel)], out: W) -> Result<()> {
    let opt = |x: Option<String>| x.unwrap_or_default();
    write_table(
        out,
        &[
            "g",
            "ic",
            "label",
            "inconclusive",
            "period",
            "winding",
            "periodicity_residual",
            "drift_rate",
            "step_sign_consistency",
            "range",
            "final_step",
        ],
        rows.iter().map(|(g, a0, l)| {
            let e = &l.evidence;
            vec![
                fmt_f64(*g),
                fmt_f64(*a0),
                l.kind.to_string(),
                e.inconclusive.to_string(),
                opt(e.period.map(|p| p.to_string())),
                opt(e.winding.map(|m| m.to_string())),
                opt(e.periodicity_residual.map(fmt_f64)),
                fmt_f64(e.drift_rate),
                fmt_f64(e.step_sign_consistency),
                fmt_f64(e.range),
                fmt_f64(e.final_step),
            ]
        }),
    )
}

pub fn write_cobweb<W: Write>(points: &[(f64, f64)], out: W) -> Result<()> {
    write_table(
        out,
        &["index", "x", "y"],
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| vec![i.to_string(), fmt_f64(x), fmt_f64(y)]),
    )
}

pub fn write_thresholds<W: Write>(results: &[ThresholdResult], out: W) -> Result<()> {
    write_table(
        out,
        &["kind", "g", "residual", "aux"],
        results.iter().map(|r| {
            vec![
                r.kind.to_string(),
                fmt_f64(r.g),
                fmt_f64(r.residual),
                r.aux.map(fmt_f64).unwrap_or_default(),
            ]
        }),
    )
}

/// `(g, n, f^{L·n}(A*))` triples from a window-condition trace.
pub fn write_traces<W: Write>(rows: &[(f64, usize, f64)], out: W) -> Result<()> {
    write_table(
        out,
        &["g", "n", "value"],
        rows.iter()
            .map(|&(g, n, v)| vec![fmt_f64(g), n.to_string(), fmt_f64(v)]),
    )
}
