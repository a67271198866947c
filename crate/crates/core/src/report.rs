//! CSV output: per-bet rows, per-market rows, summary rows and plot data.
//!
//! Every writer has a fixed column set, listed in the `*_HEADER` constants.
//! Floats are written with Rust's shortest round-trip formatting and amounts
//! with six decimals, so identical inputs give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::amount::Amount;
use crate::engine::Quote;
use crate::error::Result;
use crate::metrics::MetricsReport;
use crate::sim::runner::{FullReport, MarketRun, SweepPoint};

pub const BETS_HEADER: [&str; 17] = [
    "run",
    "market_id",
    "step",
    "engine",
    "outcome",
    "wager",
    "threshold",
    "implied_price",
    "slippage",
    "accepted",
    "unfillable",
    "odd",
    "fee",
    "reserves",
    "ev",
    "eip",
    "rejections",
];

pub const MARKETS_HEADER: [&str; 17] = [
    "run",
    "market_id",
    "engine",
    "outcomes",
    "fair",
    "n_bets",
    "accepted",
    "rejected",
    "volume",
    "fees",
    "winner",
    "initial_reserves",
    "terminal_reserves",
    "eip",
    "epp",
    "epp_effective",
    "tv_pnl",
];

pub const SUMMARY_HEADER: [&str; 21] = [
    "run",
    "engine",
    "markets",
    "total_bets",
    "accepted_bets",
    "rejection_rate",
    "volume",
    "fee_revenue",
    "ev_final",
    "eip_mean",
    "eip_std",
    "epp_mean",
    "epp_std",
    "tp",
    "epp_fee_mean",
    "epp_fee_std",
    "epp_effective_mean",
    "epp_effective_std",
    "tv_pnl_mean",
    "tv_pnl_std",
    "vigorish",
];

pub const TABLE_HEADER: [&str; 14] = [
    "engine",
    "trials",
    "markets_per_trial",
    "total_bets_mean",
    "total_bets_std",
    "volume_mean",
    "volume_std",
    "epp_mean",
    "epp_std",
    "epp_fee_mean",
    "epp_fee_std",
    "epp_pct_funding",
    "epp_fee_pct_funding",
    "vigorish",
];

pub const TRIALS_HEADER: [&str; 7] = ["trial", "bets", "accepted", "volume", "fees", "epp", "epp_fee"];

pub const PLOT_HEADER: [&str; 3] = ["series", "x", "y"];

pub const QUOTE_HEADER: [&str; 8] = [
    "market_id",
    "outcome",
    "wager",
    "odd",
    "implied_price",
    "slippage",
    "fee",
    "engine",
];

/// A named output file held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    fn new(name: impl Into<String>, contents: Vec<u8>) -> Self {
        OutputFile {
            name: name.into(),
            contents,
        }
    }
}

/// One line of a figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
        }
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

fn join<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Per-bet rows for every market of every labelled run.
pub fn bets_csv<'a>(runs: impl IntoIterator<Item = (&'a str, &'a MarketRun)>) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(BETS_HEADER)?;
    for (label, run) in runs {
        let id = run.setup.market_id();
        for s in &run.steps {
            w.write_record([
                label.to_string(),
                id.clone(),
                s.step.to_string(),
                run.engine.to_string(),
                s.outcome.to_string(),
                s.wager.to_string(),
                s.threshold.to_string(),
                s.implied_price.to_string(),
                s.slippage.to_string(),
                s.accepted.to_string(),
                s.unfillable.to_string(),
                s.odd.to_string(),
                s.fee.to_string(),
                join(&s.reserves),
                s.ev.to_string(),
                s.eip.to_string(),
                s.rejections.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// One row per market.
pub fn markets_csv<'a>(runs: impl IntoIterator<Item = (&'a str, &'a MarketRun)>) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(MARKETS_HEADER)?;
    for (label, run) in runs {
        let st = &run.stats;
        w.write_record([
            label.to_string(),
            run.setup.market_id(),
            run.engine.to_string(),
            run.setup.outcomes().to_string(),
            join(run.setup.fair.as_slice()),
            run.setup.n_bets.to_string(),
            st.accepted.to_string(),
            st.rejected().to_string(),
            st.volume.to_string(),
            st.fees.to_string(),
            run.winner.to_string(),
            join(&run.initial),
            join(&run.terminal),
            st.path.impermanent_pnl().to_string(),
            st.path.permanent_pnl()?.to_string(),
            st.effective.permanent_pnl()?.to_string(),
            (st.tv_terminal - st.tv_initial).to_string(),
        ])?;
    }
    finish(w)
}

fn summary_record(label: &str, r: &MetricsReport) -> Vec<String> {
    vec![
        label.to_string(),
        r.engine.to_string(),
        r.markets.to_string(),
        r.total_bets.to_string(),
        r.accepted_bets.to_string(),
        r.rejection_rate.to_string(),
        r.volume.to_string(),
        r.fee_revenue.to_string(),
        r.ev_series.last().copied().unwrap_or(0.0).to_string(),
        r.eip.mean.to_string(),
        r.eip.std.to_string(),
        r.epp.mean.to_string(),
        r.epp.std.to_string(),
        r.tp.to_string(),
        r.epp_with_fees.mean.to_string(),
        r.epp_with_fees.std.to_string(),
        r.epp_effective.mean.to_string(),
        r.epp_effective.std.to_string(),
        r.tv_pnl.mean.to_string(),
        r.tv_pnl.std.to_string(),
        r.vigorish.to_string(),
    ]
}

/// Summary rows, one per labelled report.
pub fn summary_csv<'a>(reports: impl IntoIterator<Item = (&'a str, &'a MetricsReport)>) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(SUMMARY_HEADER)?;
    for (label, r) in reports {
        w.write_record(summary_record(label, r))?;
    }
    finish(w)
}

/// The trial table of a full run, as a single row.
pub fn table_csv(full: &FullReport) -> Result<Vec<u8>> {
    let t = &full.table;
    let pct = |v: f64| 100.0 * v / t.funding_per_trial;
    let mut w = writer();
    w.write_record(TABLE_HEADER)?;
    w.write_record([
        full.experiment.report.engine.to_string(),
        t.trials.to_string(),
        t.markets_per_trial.to_string(),
        t.bets.mean.to_string(),
        t.bets.std.to_string(),
        t.volume.mean.to_string(),
        t.volume.std.to_string(),
        t.tp.mean.to_string(),
        t.tp.std.to_string(),
        t.tp_with_fees.mean.to_string(),
        t.tp_with_fees.std.to_string(),
        pct(t.tp.mean).to_string(),
        pct(t.tp_with_fees.mean).to_string(),
        full.experiment.report.vigorish.to_string(),
    ])?;
    finish(w)
}

/// Per-trial totals of a full run.
pub fn trials_csv(full: &FullReport) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(TRIALS_HEADER)?;
    for t in &full.trials {
        w.write_record([
            t.trial.to_string(),
            t.bets.to_string(),
            t.accepted.to_string(),
            t.volume.to_string(),
            t.fees.to_string(),
            t.tp.to_string(),
            t.tp_with_fees.to_string(),
        ])?;
    }
    finish(w)
}

pub fn plot_csv(series: &[Series]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(PLOT_HEADER)?;
    for s in series {
        for (x, y) in &s.points {
            w.write_record([s.name.clone(), x.to_string(), y.to_string()])?;
        }
    }
    finish(w)
}

pub fn quote_header() -> String {
    QUOTE_HEADER.join(",")
}

/// A quote as one CSV line, without trailing newline.
pub fn quote_row(market_id: &str, q: &Quote<Amount>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        market_id.to_string(),
        q.outcome.to_string(),
        q.wager.to_string(),
        q.odd.to_string(),
        q.implied_price.to_string(),
        q.slippage.to_string(),
        q.fee.to_string(),
        q.engine.to_string(),
    ])?;
    let bytes = finish(w)?;
    Ok(String::from_utf8_lossy(&bytes).trim_end().to_string())
}

fn steps_series(run: &MarketRun, name: &str, f: impl Fn(&crate::sim::Step) -> f64) -> Series {
    Series::new(name, run.steps.iter().map(|s| (s.step as f64, f(s))).collect())
}

/// Single-market panels: reserves, cumulative rejections and EIP per step.
pub fn single_plots(run: &MarketRun) -> Result<Vec<OutputFile>> {
    let mut reserves: Vec<Series> = (0..run.initial.len())
        .map(|k| {
            let name = if k == 0 {
                "collateral".to_string()
            } else {
                format!("outcome_{k}")
            };
            let mut pts = vec![(0.0, run.initial[k].to_f64())];
            pts.extend(run.steps.iter().map(|s| (s.step as f64, s.reserves[k])));
            Series::new(name, pts)
        })
        .collect();
    reserves.push(steps_series(run, "effective_min", |s| {
        s.reserves[1..]
            .iter()
            .fold(f64::INFINITY, |m, r| m.min(s.reserves[0] + r))
    }));
    Ok(vec![
        OutputFile::new("plot_balances.csv", plot_csv(&reserves)?),
        OutputFile::new(
            "plot_rejections.csv",
            plot_csv(&[steps_series(run, "rejections", |s| s.rejections as f64)])?,
        ),
        OutputFile::new(
            "plot_eip.csv",
            plot_csv(&[steps_series(run, "eip", |s| s.eip), steps_series(run, "ev", |s| s.ev)])?,
        ),
    ])
}

/// Multi-market panels: mean EV path and per-market PnL.
pub fn multi_plots(report: &MetricsReport, runs: &[MarketRun]) -> Result<Vec<OutputFile>> {
    let ev = Series::new(
        "ev",
        report
            .ev_series
            .iter()
            .enumerate()
            .map(|(t, &v)| (t as f64, v))
            .collect(),
    );
    let per_market = |name: &str, f: &dyn Fn(&MarketRun) -> Result<f64>| -> Result<Series> {
        let pts = runs
            .iter()
            .map(|r| Ok((r.setup.index as f64, f(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Series::new(name, pts))
    };
    let pnl = [
        per_market("eip", &|r| Ok(r.stats.path.impermanent_pnl()))?,
        per_market("epp", &|r| r.stats.path.permanent_pnl())?,
        per_market("epp_effective", &|r| r.stats.effective.permanent_pnl())?,
    ];
    Ok(vec![
        OutputFile::new("plot_ev.csv", plot_csv(&[ev])?),
        OutputFile::new("plot_pnl.csv", plot_csv(&pnl)?),
    ])
}

/// Per-trial panel of a full run.
pub fn full_plots(full: &FullReport) -> Result<Vec<OutputFile>> {
    let series = |name: &str, f: &dyn Fn(&crate::sim::runner::TrialSummary) -> f64| {
        Series::new(name, full.trials.iter().map(|t| (t.trial as f64, f(t))).collect())
    };
    Ok(vec![OutputFile::new(
        "plot_trials.csv",
        plot_csv(&[
            series("epp", &|t| t.tp),
            series("epp_fee", &|t| t.tp_with_fees),
            series("bets", &|t| t.bets as f64),
            series("volume", &|t| t.volume.to_f64()),
        ])?,
    )])
}

type Metric = (&'static str, fn(&MetricsReport) -> f64);

/// One panel per sweep family; series are `metric/side_mode`.
pub fn sweep_plots(points: &[SweepPoint]) -> Result<Vec<OutputFile>> {
    let mut families: Vec<_> = points.iter().map(|p| p.family).collect();
    families.dedup();
    let metrics: [Metric; 6] = [
        ("eip", |r| r.eip.mean),
        ("epp", |r| r.epp.mean),
        ("epp_effective", |r| r.epp_effective.mean),
        ("ev", |r| r.ev_series.last().copied().unwrap_or(0.0)),
        ("tp_fee", |r| r.tp + r.fee_revenue.to_f64()),
        ("acceptance_rate", |r| 1.0 - r.rejection_rate),
    ];
    let mut out = Vec::new();
    for family in families {
        let in_family: Vec<&SweepPoint> = points.iter().filter(|p| p.family == family).collect();
        let mut modes: Vec<_> = in_family.iter().map(|p| p.side_mode).collect();
        modes.dedup();
        let mut series = Vec::new();
        for (name, f) in metrics {
            for &mode in &modes {
                let pts = in_family
                    .iter()
                    .filter(|p| p.side_mode == mode)
                    .map(|p| (p.x, f(&p.experiment.report)))
                    .collect();
                series.push(Series::new(format!("{name}/{mode}"), pts));
            }
        }
        out.push(OutputFile::new(
            format!("plot_sweep_{}.csv", family.as_str()),
            plot_csv(&series)?,
        ));
    }
    Ok(out)
}

/// Writes files into `dir`, creating it if needed.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        let mut file = fs::File::create(dir.join(&f.name))?;
        file.write_all(&f.contents)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_multi_market, run_single_market, SimConfig};

    fn lines(bytes: &[u8]) -> Vec<String> {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .map(str::to_string)
            .collect()
    }

    #[test]
    fn bets_csv_has_one_row_per_attempt() {
        let run = run_single_market(&SimConfig::binary(0.5, 25, 1), 3).unwrap();
        let out = lines(&bets_csv([("single", &run)]).unwrap());
        assert_eq!(out[0], BETS_HEADER.join(","));
        assert_eq!(out.len(), 26);
        assert!(out[1].starts_with("single,m000000,1,uamm,"));
    }

    #[test]
    fn summary_and_market_rows_have_fixed_width() {
        let e = run_multi_market(&SimConfig::binary(0.4, 10, 3)).unwrap();
        let runs: Vec<_> = e.runs.iter().map(|r| ("multi", r)).collect();
        let markets = lines(&markets_csv(runs).unwrap());
        assert_eq!(markets.len(), 4);
        let summary = summary_csv([("multi", &e.report)]).unwrap();
        let mut rdr = csv::Reader::from_reader(&summary[..]);
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].len(), SUMMARY_HEADER.len());
    }

    #[test]
    fn plot_rows_are_series_x_y() {
        let out = lines(&plot_csv(&[Series::new("a", vec![(0.0, 1.5), (1.0, -2.0)])]).unwrap());
        assert_eq!(out, ["series,x,y", "a,0,1.5", "a,1,-2"]);
    }

    #[test]
    fn outputs_are_byte_identical_across_runs() {
        let cfg = SimConfig::binary(0.6, 40, 5);
        let a = run_multi_market(&cfg).unwrap();
        let b = run_multi_market(&cfg).unwrap();
        assert_eq!(
            summary_csv([("x", &a.report)]).unwrap(),
            summary_csv([("x", &b.report)]).unwrap()
        );
        assert_eq!(
            multi_plots(&a.report, &a.runs).unwrap(),
            multi_plots(&b.report, &b.runs).unwrap()
        );
    }
}
