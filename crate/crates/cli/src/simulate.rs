use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use uamm_core::metrics::MetricsReport;
use uamm_core::report::{self, OutputFile};
use uamm_core::sim::runner::{
    sweep_bet_counts, sweep_probabilities, sweep_rejection, BET_GRID, PROB_GRID, REJECTION_GRID,
};
use uamm_core::sim::{run_full_market, run_multi_market, run_single_market, MarketRun, SimConfig, SweepPoint};
use uamm_core::EngineKind;

/// Environment variable that overrides the config seed.
pub const SEED_ENV: &str = "UAMM_LAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// One market, index 0.
    Single,
    /// `n_markets` independent markets.
    Multi,
    /// `--trials` repetitions of `n_markets` markets.
    Full,
    /// Parameter sweeps over `n_markets` markets per grid point.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    All,
    Probs,
    Rejection,
    NBets,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Config file of `key = value` lines; built-in defaults when omitted.
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "multi")]
    mode: Mode,
    /// Overrides the config `engine`.
    #[arg(long)]
    engine: Option<EngineKind>,
    /// Overrides UAMM_LAB_SEED and the config `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Trials in full mode.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Sweep family in sweep mode.
    #[arg(long, value_enum, default_value = "all")]
    family: Family,
    /// Extra `key=value` config overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// Resolves the effective config: file, then `--set`, then engine and seed.
pub fn load_config(args: &SimulateArgs, env_seed: Option<&str>) -> Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?,
        None => SimConfig::default(),
    };
    for kv in &args.overrides {
        let Some((key, value)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{kv}`");
        };
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(engine) = args.engine {
        cfg.engine = engine;
    }
    if let Some(seed) = env_seed {
        cfg.seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}=`{seed}` is not an unsigned integer"))?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn labelled<'a>(label: &'a str, runs: &'a [MarketRun]) -> impl Iterator<Item = (&'a str, &'a MarketRun)> + 'a {
    runs.iter().map(move |r| (label, r))
}

fn file(name: &str, contents: Vec<u8>) -> OutputFile {
    OutputFile {
        name: name.to_string(),
        contents,
    }
}

fn sweep_points(cfg: &SimConfig, family: Family) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    if matches!(family, Family::All | Family::Probs) {
        points.extend(sweep_probabilities(cfg, &PROB_GRID)?);
    }
    if matches!(family, Family::All | Family::Rejection) {
        points.extend(sweep_rejection(cfg, &REJECTION_GRID)?);
    }
    if matches!(family, Family::All | Family::NBets) {
        points.extend(sweep_bet_counts(cfg, &BET_GRID)?);
    }
    Ok(points)
}

/// Runs the experiment and renders every output file. The file named
/// `summary.csv` is also printed by [`run`].
pub fn outputs(cfg: &SimConfig, mode: Mode, trials: usize, family: Family) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();
    match mode {
        Mode::Single => {
            let run = run_single_market(cfg, cfg.seed)?;
            let runs = std::slice::from_ref(&run);
            let summary = MetricsReport::from_markets(run.engine, std::slice::from_ref(&run.stats))?;
            files.push(file("bets.csv", report::bets_csv(labelled("single", runs))?));
            files.push(file("markets.csv", report::markets_csv(labelled("single", runs))?));
            files.push(file("summary.csv", report::summary_csv([("single", &summary)])?));
            files.extend(report::single_plots(&run)?);
        }
        Mode::Multi => {
            let e = run_multi_market(cfg)?;
            files.push(file("bets.csv", report::bets_csv(labelled("multi", &e.runs))?));
            files.push(file("markets.csv", report::markets_csv(labelled("multi", &e.runs))?));
            files.push(file("summary.csv", report::summary_csv([("multi", &e.report)])?));
            files.extend(report::multi_plots(&e.report, &e.runs)?);
        }
        Mode::Full => {
            let full = run_full_market(cfg, trials)?;
            let runs = &full.experiment.runs;
            files.push(file("bets.csv", report::bets_csv(labelled("full", runs))?));
            files.push(file("markets.csv", report::markets_csv(labelled("full", runs))?));
            files.push(file("summary.csv", report::table_csv(&full)?));
            files.push(file("trials.csv", report::trials_csv(&full)?));
            files.push(file(
                "metrics.csv",
                report::summary_csv([("full", &full.experiment.report)])?,
            ));
            files.extend(report::full_plots(&full)?);
        }
        Mode::Sweep => {
            let points = sweep_points(cfg, family)?;
            let labels: Vec<String> = points.iter().map(SweepPoint::label).collect();
            let runs = || {
                points
                    .iter()
                    .zip(&labels)
                    .flat_map(|(p, l)| p.experiment.runs.iter().map(move |r| (l.as_str(), r)))
            };
            let reports = points
                .iter()
                .zip(&labels)
                .map(|(p, l)| (l.as_str(), &p.experiment.report));
            files.push(file("bets.csv", report::bets_csv(runs())?));
            files.push(file("markets.csv", report::markets_csv(runs())?));
            files.push(file("summary.csv", report::summary_csv(reports)?));
            files.extend(report::sweep_plots(&points)?);
        }
    }
    Ok(files)
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = load_config(args, env_seed.as_deref())?;
    let files = outputs(&cfg, args.mode, args.trials, args.family)?;
    report::write_all(&args.out, &files).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(summary) = files.iter().find(|f| f.name == "summary.csv") {
        print!("{}", String::from_utf8_lossy(&summary.contents));
    }
    eprintln!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Debug, Parser)]
    struct Wrap {
        #[command(flatten)]
        args: SimulateArgs,
    }

    fn args(extra: &[&str]) -> SimulateArgs {
        let mut argv = vec!["x"];
        argv.extend_from_slice(extra);
        Wrap::parse_from(argv).args
    }

    #[test]
    fn seed_flag_beats_env_beats_config() {
        let a = args(&["--set", "seed=3"]);
        assert_eq!(load_config(&a, None).unwrap().seed, 3);
        assert_eq!(load_config(&a, Some("5")).unwrap().seed, 5);
        let a = args(&["--set", "seed=3", "--seed", "9"]);
        assert_eq!(load_config(&a, Some("5")).unwrap().seed, 9);
        assert!(load_config(&args(&[]), Some("x")).is_err());
    }

    #[test]
    fn overrides_apply_and_are_validated() {
        let cfg = load_config(&args(&["--set", "n_markets=7", "--engine", "cpmm"]), None).unwrap();
        assert_eq!(cfg.n_markets, 7);
        assert_eq!(cfg.engine, EngineKind::Cpmm);
        assert!(load_config(&args(&["--set", "bogus=1"]), None).is_err());
        assert!(load_config(&args(&["--set", "novalue"]), None).is_err());
    }
}
