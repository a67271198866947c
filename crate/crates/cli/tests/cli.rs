use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uamm_core::report::{BETS_HEADER, MARKETS_HEADER, PLOT_HEADER, SUMMARY_HEADER, TABLE_HEADER, TRIALS_HEADER};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uamm-lab"))
        .args(args)
        .env_remove("UAMM_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
}

#[test]
fn quote_prints_odds_for_binary_example() {
    let o = lab(&[
        "quote",
        "--k",
        "2",
        "--probs",
        "0.5,0.5",
        "--funding",
        "10000",
        "--outcome",
        "1",
        "--wager",
        "10",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let odd: f64 = field(&out, "odd ").parse().unwrap();
    assert!((odd - 19.990010).abs() < 1e-5, "{odd}");
    let decimal: f64 = field(&out, "decimal_odds").parse().unwrap();
    assert!((decimal - 1.999001).abs() < 1e-6);
    assert!(out.contains("implied_price") && out.contains("slippage"));
}

#[test]
fn quote_zero_wager_and_csv_row() {
    let o = lab(&["quote", "--probs", "0.5,0.5", "--outcome", "2", "--wager", "0", "--csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "market_id,outcome,wager,odd,implied_price,slippage,fee,engine"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "0.000000");
    assert_eq!(row[7], "uamm");
}

#[test]
fn bad_flags_exit_with_usage_code() {
    let o = lab(&["quote", "--probs", "0.6,0.6", "--outcome", "1", "--wager", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum"));
    assert_eq!(lab(&["quote", "--outcome", "1"]).status.code(), Some(1));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        lab(&["quote", "--probs", "0.5,0.5", "--outcome", "3", "--wager", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_documents_every_output_schema() {
    let o = lab(&["simulate", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let help = stdout(&o);
    for header in [
        BETS_HEADER.join(","),
        MARKETS_HEADER.join(","),
        SUMMARY_HEADER.join(","),
        TABLE_HEADER.join(","),
        TRIALS_HEADER.join(","),
        PLOT_HEADER.join(","),
    ] {
        assert!(help.contains(&header), "missing {header}");
    }
    assert!(help.contains("UAMM_LAB_SEED"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.conf");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn invalid_config_keys_are_listed_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k = 2\nbogus = 1\nalso_bad = 2\n");
    let o = lab(&["simulate", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bogus") && err.contains("also_bad"), "{err}");
}

#[test]
fn simulate_modes_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# small controlled run\nk = 2\nprobs = 0.5,0.5\nn_bets = 20\nn_markets = 4\n",
    );
    let cases: [(&str, &[&str]); 4] = [
        ("single", &["plot_balances.csv", "plot_rejections.csv", "plot_eip.csv"]),
        ("multi", &["plot_ev.csv", "plot_pnl.csv"]),
        ("full", &["trials.csv", "metrics.csv", "plot_trials.csv"]),
        (
            "sweep",
            &[
                "plot_sweep_probs.csv",
                "plot_sweep_rejection.csv",
                "plot_sweep_n_bets.csv",
            ],
        ),
    ];
    for (mode, extra) in cases {
        let out = dir.path().join(mode);
        let o = lab(&[
            "simulate",
            &cfg,
            "--mode",
            mode,
            "--trials",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        for f in ["bets.csv", "markets.csv", "summary.csv"].iter().chain(extra) {
            assert!(out.join(f).exists(), "{mode} missing {f}");
        }
        let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
        assert_eq!(stdout(&o), summary);
    }
    let sweep = fs::read_to_string(dir.path().join("sweep/summary.csv")).unwrap();
    let probs_rows = sweep.lines().filter(|l| l.starts_with("probs=")).count();
    assert_eq!(probs_rows, 14);
    let full = fs::read_to_string(dir.path().join("full/summary.csv")).unwrap();
    assert_eq!(full.lines().count(), 2);
    assert!(full.starts_with(&TABLE_HEADER.join(",")));
}

#[test]
fn seed_sources_take_precedence_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k = 2\nprobs = 0.5,0.5\nn_bets = 30\nn_markets = 2\nseed = 1\n",
    );
    let run = |extra: &[&str], env: Option<&str>| {
        let out = dir.path().join("o");
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_uamm-lab"));
        cmd.args(["simulate", &cfg, "--out", out.to_str().unwrap()]).args(extra);
        match env {
            Some(v) => cmd.env("UAMM_LAB_SEED", v),
            None => cmd.env_remove("UAMM_LAB_SEED"),
        };
        let o = cmd.output().unwrap();
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    let config_seed = run(&[], None);
    let env_seed = run(&[], Some("2"));
    let flag_seed = run(&["--seed", "2"], Some("7"));
    assert_ne!(config_seed, env_seed);
    assert_eq!(env_seed, flag_seed);
    assert_eq!(run(&["--seed", "1"], Some("2")), config_seed);
}

#[test]
fn probe_reports_and_flags_reversibility() {
    let o = lab(&["probe", "--continuity"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let unit = out.lines().find(|l| l.starts_with("continuity 1 ")).unwrap();
    let gap: f64 = unit.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(gap, 0.0);

    let o = lab(&["probe", "--properties", "--states", "200"]);
    let out = stdout(&o);
    assert!(out.contains("add_additivity") && out.contains("remove_then_add"));
    // Outcome pools keep value outside the collateral pool, so a round trip
    // through add and remove cannot return the full deposit.
    assert_eq!(o.status.code(), Some(2));
}
