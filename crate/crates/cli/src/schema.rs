//! Output schemas shown in `simulate --help`.

pub const SIMULATE_HELP: &str = "\
CONFIG FILE
  Flat `key = value` lines; blank lines and lines starting with # are ignored.
  Keys: k, funding, probs, n_bets, n_markets, wager_mu, wager_sigma, side_mode,
        rej_mean, rej_std, fee_rate, seed, engine
  Value forms: k = 2 | 2-3; probs = 0.5,0.5 | uniform:0.2:0.8;
               n_bets = 100 | lognormal:2:1; side_mode = true-prob | uniform;
               engine = uamm | cpmm
  Seed precedence: --seed, then UAMM_LAB_SEED, then the config `seed`.

OUTPUT FILES (all CSV with a header row; lists inside a cell are `;`-joined)
  bets.csv
    run,market_id,step,engine,outcome,wager,threshold,implied_price,slippage,accepted,unfillable,odd,fee,reserves,ev,eip,rejections
  markets.csv
    run,market_id,engine,outcomes,fair,n_bets,accepted,rejected,volume,fees,winner,initial_reserves,terminal_reserves,eip,epp,epp_effective,tv_pnl
  summary.csv (single, multi and sweep modes; one row per run or sweep point)
    run,engine,markets,total_bets,accepted_bets,rejection_rate,volume,fee_revenue,ev_final,eip_mean,eip_std,epp_mean,epp_std,tp,epp_fee_mean,epp_fee_std,epp_effective_mean,epp_effective_std,tv_pnl_mean,tv_pnl_std,vigorish
  summary.csv (full mode; per-trial totals, mean and std over trials)
    engine,trials,markets_per_trial,total_bets_mean,total_bets_std,volume_mean,volume_std,epp_mean,epp_std,epp_fee_mean,epp_fee_std,epp_pct_funding,epp_fee_pct_funding,vigorish
  trials.csv (full mode)
    trial,bets,accepted,volume,fees,epp,epp_fee
  metrics.csv (full mode; summary.csv columns over all markets)
  plot_*.csv (one file per figure panel)
    series,x,y
    single: plot_balances, plot_rejections, plot_eip
    multi:  plot_ev, plot_pnl
    full:   plot_trials
    sweep:  plot_sweep_probs, plot_sweep_rejection, plot_sweep_n_bets

  reserves are [R0, R1..RK]: collateral pool first, then one pool per outcome.
  eip and epp use the outcome pools R1..RK; epp_effective uses R0 + Rk;
  tv_pnl is the change of R0 + sum_k f_k Rk.

EXIT CODES
  0 success, 1 usage or input error, 2 invariant violation";
