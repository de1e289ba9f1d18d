//! CSV output for runs, sweeps and analysis grids.
//!
//! Column order is fixed, reals are printed with 6 significant digits, and
//! lines end in `\n`, so output is byte-stable for a fixed input and seed.

use std::io::Write;

use crate::analysis::AnalysisRow;
use crate::scheduler::{Decision, DecisionKind};
use crate::simulator::{FlowMetrics, Knob, Metrics, SweepPoint};

/// Formats `x` with 6 significant digits, like C's `%g`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub const RUN_HEADER: [&str; 24] = [
    "run",
    "discipline",
    "seed",
    "flow",
    "source",
    "group",
    "raw_degree",
    "centrality",
    "rate",
    "generated",
    "enqueued",
    "delivered",
    "dropped",
    "dropped_tail",
    "dropped_low_centrality",
    "dropped_feasibility",
    "evicted",
    "residual",
    "delivery_rate",
    "loss_rate",
    "mean_delay",
    "max_delay",
    "throughput_bps",
    "bytes_delivered",
];

fn counter_fields(m: &FlowMetrics, duration: f64) -> Vec<String> {
    vec![
        m.generated.to_string(),
        m.enqueued.to_string(),
        m.delivered.to_string(),
        m.dropped().to_string(),
        m.dropped_tail.to_string(),
        m.dropped_low_centrality.to_string(),
        m.dropped_feasibility.to_string(),
        m.evicted.to_string(),
        m.residual.to_string(),
        fmt_real(m.delivery_rate()),
        fmt_real(m.loss_rate()),
        fmt_real(m.mean_delay()),
        fmt_real(m.delay_max),
        fmt_real(m.bytes_delivered as f64 * 8.0 / duration),
        m.bytes_delivered.to_string(),
    ]
}

/// One labelled run inside a run CSV.
pub struct RunRecord<'a> {
    pub run: usize,
    pub discipline: &'a str,
    pub seed: u64,
    pub metrics: &'a Metrics,
}

/// Per-flow rows followed by an `all` row for each run.
pub fn write_run_csv<W: Write>(out: W, runs: &[RunRecord<'_>]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(RUN_HEADER)?;
    for r in runs {
        let prefix = [
            r.run.to_string(),
            r.discipline.to_owned(),
            r.seed.to_string(),
        ];
        let m = r.metrics;
        for (info, stats) in m.info.iter().zip(&m.flows) {
            let mut row: Vec<String> = prefix.to_vec();
            row.extend([
                info.id.to_string(),
                info.source.clone(),
                info.group.clone(),
                info.raw_degree.to_string(),
                fmt_real(info.centrality),
                fmt_real(info.rate),
            ]);
            row.extend(counter_fields(stats, m.duration));
            w.write_record(&row)?;
        }
        let total = m.aggregate();
        let offered: f64 = m.info.iter().map(|i| i.rate).sum();
        let mut row: Vec<String> = prefix.to_vec();
        row.extend([
            "all".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt_real(offered),
        ]);
        row.extend(counter_fields(&total, m.duration));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 12] = [
    "knob",
    "value",
    "replication",
    "seed",
    "generated",
    "delivered",
    "dropped",
    "residual",
    "delivery_rate",
    "loss_rate",
    "mean_delay",
    "throughput_bps",
];

fn sweep_values(m: &Metrics) -> [f64; 8] {
    let t = m.aggregate();
    [
        t.generated as f64,
        t.delivered as f64,
        t.dropped() as f64,
        t.residual as f64,
        t.delivery_rate(),
        t.loss_rate(),
        t.mean_delay(),
        m.throughput_bps(),
    ]
}

/// Sample mean and standard deviation (zero for a single sample).
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per replication, then `mean` and `stddev` rows per point. The
/// first line is a `#` comment documenting how seeds were derived.
pub fn write_sweep_csv<W: Write>(
    mut out: W,
    knob: Knob,
    base_seed: u64,
    points: &[SweepPoint],
) -> csv::Result<()> {
    writeln!(
        out,
        "# seed(point, rep) = {base_seed} + 0x9E3779B97F4A7C15 * (point * replications + rep + 1) mod 2^64"
    )?;
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in points {
        let value = fmt_real(p.value);
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); 8];
        for (rep, (seed, m)) in p.runs.iter().enumerate() {
            let vals = sweep_values(m);
            let mut row = vec![
                knob.as_str().to_owned(),
                value.clone(),
                rep.to_string(),
                seed.to_string(),
            ];
            for (i, v) in vals.iter().enumerate() {
                columns[i].push(*v);
                row.push(fmt_real(*v));
            }
            w.write_record(&row)?;
        }
        let stats: Vec<(f64, f64)> = columns.iter().map(|c| mean_stddev(c)).collect();
        for (label, pick) in [("mean", 0usize), ("stddev", 1)] {
            let mut row = vec![
                knob.as_str().to_owned(),
                value.clone(),
                label.to_owned(),
                String::new(),
            ];
            row.extend(
                stats
                    .iter()
                    .map(|s| fmt_real(if pick == 0 { s.0 } else { s.1 })),
            );
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const ANALYSIS_HEADER: [&str; 14] = [
    "m",
    "load",
    "kappa_k",
    "kappa_n",
    "alpha",
    "rate",
    "prob_not_transferred",
    "prob_already_transferred",
    "packet_transfer_prob",
    "transmission_score",
    "expected_delay_term",
    "delay_score",
    "transmission_fd_residual",
    "delay_fd_residual",
];

pub fn write_analysis_csv<W: Write>(out: W, rows: &[AnalysisRow]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(ANALYSIS_HEADER)?;
    for r in rows {
        let p = &r.params;
        let mut row = vec![p.m.to_string()];
        row.extend(
            [
                p.load,
                p.kappa_k,
                p.kappa_n,
                p.alpha,
                p.rate,
                r.prob_not_transferred,
                r.prob_already_transferred,
                r.packet_transfer_prob,
                r.transmission_score,
                r.expected_delay_term,
                r.delay_score,
                r.residuals.transmission,
                r.residuals.delay,
            ]
            .map(fmt_real),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const DECISION_HEADER: [&str; 7] = [
    "run",
    "time",
    "event",
    "detail",
    "flow",
    "seqno",
    "queue_len",
];

/// Scheduler decision logs, one block per run. Times keep nanosecond
/// resolution since events can be microseconds apart.
pub fn write_decision_csv<W: Write>(out: W, runs: &[(usize, &[Decision])]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(DECISION_HEADER)?;
    for (run, log) in runs {
        for d in log.iter() {
            let (event, detail) = match d.kind {
                DecisionKind::Enqueue => ("enqueue", ""),
                DecisionKind::Dequeue => ("dequeue", ""),
                DecisionKind::Evict => ("evict", ""),
                DecisionKind::Drop(reason) => ("drop", reason.as_str()),
                DecisionKind::ModeChange(mode) => ("mode-change", mode.as_str()),
            };
            w.write_record([
                run.to_string(),
                format!("{:.9}", d.time),
                event.to_owned(),
                detail.to_owned(),
                d.flow.to_string(),
                d.seqno.to_string(),
                d.queue_len.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.888_888_888_9, "0.888889"),
            (2.247_191_011, "2.24719"),
            (123_456.7, "123457"),
            (1_234_567.0, "1.23457e+06"),
            (0.000_123_456_78, "0.000123457"),
            (0.000_012_345_678, "1.23457e-05"),
            (-0.5, "-0.5"),
            (999_999.7, "1e+06"),
            (0.1, "0.1"),
            (64.0, "64"),
            (f64::INFINITY, "inf"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_real(x), s, "{x}");
        }
    }

    #[test]
    fn stats() {
        assert_eq!(mean_stddev(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_stddev(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.290_994_448_735_805_6).abs() < 1e-12);
    }
}
