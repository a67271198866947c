//! Metrics recomputed from raw bet records, independent of the step loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uamm_core::metrics::MarketPath;
use uamm_core::sim::{run_markets, MarketRun, ProbSpec, SimConfig};
use uamm_core::{Amount, EngineKind};

/// Relative error with a unit floor, so values that are zero up to float
/// noise compare equal.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Terminal outcome pools from the starting reserves and the bet list alone.
/// Each bet adds its wager to every outcome and pays `odd` out of its own;
/// the pool then merges the common minimum into collateral.
fn replay_pools(run: &MarketRun) -> Vec<Amount> {
    if run.bets.is_empty() {
        return run.initial[1..].to_vec();
    }
    let k = run.initial.len() - 1;
    let mut effective: Vec<Amount> = (1..=k).map(|j| run.initial[0] + run.initial[j]).collect();
    for b in &run.bets {
        for (j, e) in effective.iter_mut().enumerate() {
            *e += b.wager;
            if j + 1 == b.outcome {
                *e -= b.odd;
            }
        }
    }
    let floor = *effective.iter().min().unwrap();
    effective.iter().map(|&e| e - floor).collect()
}

fn ev_oracle(pools: &[f64], fair: &[f64]) -> f64 {
    let z: f64 = pools.iter().sum();
    let mut total = 0.0;
    for k in 0..pools.len() {
        total += fair[k] * pools[k];
        total -= (1.0 - fair[k]) * (z - pools[k]);
    }
    total
}

fn trajectories(engine: EngineKind) -> Vec<MarketRun> {
    let cfg = SimConfig {
        seed: 21,
        engine,
        probs: ProbSpec::Uniform { low: 0.2, high: 0.8 },
        ..SimConfig::default()
    };
    let runs = run_markets(&cfg, &(0..100).collect::<Vec<u64>>()).unwrap();
    assert_eq!(runs.len(), 100);
    runs
}

#[test]
fn streaming_metrics_match_bet_record_replay() {
    for engine in [EngineKind::Uamm, EngineKind::Cpmm] {
        for run in trajectories(engine) {
            let pools = replay_pools(&run);
            assert_eq!(pools, run.terminal[1..].to_vec(), "{}", run.setup.market_id());
            let fair = run.setup.fair.to_f64_vec();
            let start: Vec<f64> = run.initial[1..].iter().map(|a| a.to_f64()).collect();
            let end: Vec<f64> = pools.iter().map(|a| a.to_f64()).collect();
            let eip: f64 = (0..fair.len()).map(|k| fair[k] * (end[k] - start[k])).sum();
            let w = run.winner - 1;
            let epp = end[w] - start[w];
            assert!(close(run.stats.path.impermanent_pnl(), eip));
            assert!(close(run.stats.path.permanent_pnl().unwrap(), epp));
            assert!(close(*run.stats.ev_path.last().unwrap(), ev_oracle(&end, &fair)));
            let volume: Amount = run.bets.iter().map(|b| b.wager).sum();
            assert_eq!(volume, run.stats.volume);
        }
    }
}

#[test]
fn eip_is_the_expectation_of_epp_over_winners() {
    let runs = trajectories(EngineKind::Uamm);
    let paths: Vec<MarketPath<f64>> = runs.iter().map(|r| r.stats.path.clone()).collect();
    let eip = uamm_core::metrics::eip(&paths).unwrap().mean;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let resamples = 10_000;
    let mut draws = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut total = 0.0;
        for p in &paths {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut w = p.fair.len() - 1;
            for (k, f) in p.fair.iter().enumerate() {
                acc += f;
                if u < acc {
                    w = k;
                    break;
                }
            }
            total += p.terminal[w] - p.initial[w];
        }
        draws.push(total / paths.len() as f64);
    }
    let mean = draws.iter().sum::<f64>() / resamples as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    let se = (var / resamples as f64).sqrt();
    assert!((mean - eip).abs() < 3.0 * se, "mean {mean} eip {eip} se {se}");
}
