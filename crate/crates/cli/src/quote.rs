use anyhow::{bail, Context, Result};
use clap::Args;
use uamm_core::ledger::{CpmmMarket, MarketSpec, UammMarket};
use uamm_core::report::{quote_header, quote_row};
use uamm_core::{Amount, EngineKind, FairPrices, Quote};

const LP: &str = "lp";
const ORACLE: &str = "oracle";
const MARKET_ID: &str = "quote";

#[derive(Debug, Args)]
pub struct QuoteArgs {
    /// Number of outcomes; defaults to the length of `--probs`.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated fair probabilities summing to 1; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    /// Collateral the LP puts into the pool.
    #[arg(long, default_value = "10000")]
    funding: Amount,
    /// 1-based outcome to back.
    #[arg(long)]
    outcome: usize,
    /// Collateral staked, excluding the fee.
    #[arg(long)]
    wager: Amount,
    #[arg(long, default_value = "uamm")]
    engine: EngineKind,
    #[arg(long, default_value = "0.025")]
    fee_rate: Amount,
    /// Print a CSV header and row instead of labelled lines.
    #[arg(long)]
    csv: bool,
}

fn fair_prices(args: &QuoteArgs) -> Result<FairPrices<Amount>> {
    let probs = match (&args.probs, args.k) {
        (Some(p), Some(k)) if p.len() != k => bail!("--k {k} but {} probabilities given", p.len()),
        (Some(p), _) => p.clone(),
        (None, Some(k)) if k >= 2 => vec![1.0 / k as f64; k],
        (None, Some(k)) => bail!("--k must be at least 2, got {k}"),
        (None, None) => bail!("give --probs or --k"),
    };
    if args.probs.is_some() {
        Ok(FairPrices::from_f64(&probs)?)
    } else {
        Ok(FairPrices::normalized(&probs)?)
    }
}

pub fn price(args: &QuoteArgs) -> Result<Quote<Amount>> {
    let fair = fair_prices(args)?;
    let spec = MarketSpec::new(MARKET_ID, fair.outcomes(), ORACLE).with_fee_rate(args.fee_rate);
    let quote = match args.engine {
        EngineKind::Uamm => {
            let mut market = UammMarket::new(spec, fair)?;
            market.deposit(LP, args.funding)?;
            market.add_liquidity(LP, args.funding)?;
            market.quote(args.outcome, args.wager)
        }
        EngineKind::Cpmm => CpmmMarket::seeded(spec, fair, LP, args.funding)?.quote(args.outcome, args.wager),
    };
    quote.context("cannot price bet")
}

pub fn run(args: &QuoteArgs) -> Result<()> {
    let q = price(args)?;
    if args.csv {
        println!("{}", quote_header());
        println!("{}", quote_row(MARKET_ID, &q)?);
        return Ok(());
    }
    println!("engine         {}", q.engine);
    println!("outcome        {}", q.outcome);
    println!("wager          {}", q.wager);
    println!("odd            {}", q.odd);
    println!("decimal_odds   {:.6}", q.decimal_odds());
    println!("implied_price  {:.6}", q.implied_price);
    println!("slippage       {:.6}", q.slippage);
    println!("fee            {}", q.fee);
    Ok(())
}
