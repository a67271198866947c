//! Seeded Monte-Carlo betting simulation.

pub mod bettor;
pub mod config;
pub mod rng;
pub mod runner;

pub use bettor::{decide_rejection, draw_bettor, draw_side, draw_wager, BettorDraw, Decision};
pub use config::{BetCount, OutcomeCount, ProbSpec, SideMode, SimConfig};
pub use runner::{
    run_full_market, run_markets, run_multi_market, run_single_market, Experiment, FullReport, MarketRun, MarketSetup,
    Step, SweepFamily, SweepPoint,
};
