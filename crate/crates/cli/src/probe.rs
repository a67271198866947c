use anyhow::anyhow;
use clap::Args;
use uamm_core::probe::{
    continuity_grid, continuity_summary, property_suite, PropertyReport, CONTINUITY_INPUTS, CONTINUITY_RESERVES,
    CONTINUITY_RHOS, FIXED_POINT_QUANTUM, PROPERTY_TOLERANCE,
};
use uamm_core::Amount;

use crate::Failure;

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Run only the swap-curve continuity grid.
    #[arg(long)]
    continuity: bool,
    /// Run only the add/remove property suites.
    #[arg(long)]
    properties: bool,
    /// Randomized pool states per scalar type.
    #[arg(long, default_value_t = 1000)]
    states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn print_report(r: &PropertyReport) {
    println!(
        "properties {}: states={} collateral_only={} max_value_outside_collateral={:.6}",
        r.scalar, r.states, r.collateral_only_states, r.max_value_outside_collateral
    );
    for (name, all, only) in [
        ("add_additivity", r.all.add_additivity, r.collateral_only.add_additivity),
        (
            "remove_additivity",
            r.all.remove_additivity,
            r.collateral_only.remove_additivity,
        ),
        (
            "add_then_remove",
            r.all.add_then_remove,
            r.collateral_only.add_then_remove,
        ),
        (
            "remove_then_add",
            r.all.remove_then_add,
            r.collateral_only.remove_then_add,
        ),
    ] {
        let verdict = if all <= PROPERTY_TOLERANCE { "ok" } else { "EXCEEDED" };
        println!("  {name:<18} max_rel={all:.3e} collateral_only_max_rel={only:.3e} {verdict}");
    }
}

pub fn run(args: &ProbeArgs) -> Result<(), Failure> {
    let both = !args.continuity && !args.properties;
    let mut failed = Vec::new();
    if args.properties || both {
        let reports = [
            property_suite::<f64>("f64", args.states, args.seed, 0.0),
            property_suite::<Amount>("fixed", args.states, args.seed, FIXED_POINT_QUANTUM),
        ];
        for r in reports {
            let r = r.map_err(|e| Failure::Usage(e.into()))?;
            print_report(&r);
            if !r.passed() {
                failed.push(r.scalar);
            }
        }
        println!("tolerance {PROPERTY_TOLERANCE:e}");
    }
    if args.continuity || both {
        let grid = continuity_grid(&CONTINUITY_RHOS, &CONTINUITY_RESERVES, &CONTINUITY_INPUTS)
            .map_err(|e| Failure::Usage(e.into()))?;
        println!("continuity rho lower_edge_max_rel_gap upper_edge_max_rel_gap");
        for (rho, lower, upper) in continuity_summary(&grid) {
            println!("continuity {rho} {lower:.6e} {upper:.6e}");
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(anyhow!(
            "add/remove properties exceed {PROPERTY_TOLERANCE:e} for {}",
            failed.join(", ")
        )))
    }
}
