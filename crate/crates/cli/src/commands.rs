use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use elg_core::bounds::{buyhold_gap_bounds, rebalance_horizon};
use elg_core::conjecture::{counterexample_search, maximality_scan, GeneratorSpec, Verdict};
use elg_core::elg::optimize_elg;
use elg_core::ingest::{empirical_gap_curve, load_ticks, realized_returns, sliding_dominance};
use elg_core::model::{ReturnModel, WeightVector};

use crate::manifest::RunManifest;
use crate::table::{fmt, fmt_opt, Csv};
use crate::{BacktestArgs, BoundsArgs, CliError, OptimizeArgs, ScanArgs};

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::usage(format!("serialization: {e}")))?;
    std::fs::write(dir.join(name), text + "\n")
        .map_err(|e| CliError::usage(format!("cannot write {name}: {e}")))
}

fn write_csv(dir: &Path, name: &str, csv: Csv) -> Result<(), CliError> {
    std::fs::write(dir.join(name), csv.into_string())
        .map_err(|e| CliError::usage(format!("cannot write {name}: {e}")))
}

pub fn run_optimize(args: &OptimizeArgs) -> Result<i32, CliError> {
    ensure_out(&args.out)?;
    let model = ReturnModel::from_file(&args.model)?;

    let mut manifest = RunManifest::new("optimize", args.seed);
    manifest
        .param("model", args.model.display())
        .param("n", args.n)
        .param("tol", args.tol)
        .param("max_iters", args.max_iters)
        .param("budget", args.budget)
        .param("out", args.out.display());
    manifest.digest_input(&args.model)?;
    manifest.write(&args.out)?;

    let (result, converged) =
        match optimize_elg(&model, args.n, args.tol, args.max_iters, args.budget) {
            Ok(r) => (r, true),
            Err(elg_core::Error::Unconverged { best, .. }) => (*best, false),
            Err(e) => return Err(e.into()),
        };

    let doc = json!({
        "command": "optimize",
        "horizon": result.horizon,
        "converged": converged,
        "value": result.value,
        "gradient_gap": result.gradient_gap,
        "iterations": result.iterations,
        "assets": model.asset_names(),
        "weights": result.weights.as_slice(),
    });
    write_json(&args.out, "result.json", &doc)?;

    let mut csv = Csv::new("asset,weight");
    for (name, w) in model.asset_names().iter().zip(result.weights.as_slice()) {
        csv.row(&[name.clone(), fmt(*w)]);
    }
    write_csv(&args.out, "result.csv", csv)?;

    Ok(if converged { 0 } else { 2 })
}

pub fn run_bounds(args: &BoundsArgs) -> Result<i32, CliError> {
    if args.n_min < 1 || args.n_min > args.n {
        return Err(CliError::usage(format!(
            "horizon range {}..={} is empty; pass --n >= --n-min >= 1",
            args.n_min, args.n
        )));
    }
    ensure_out(&args.out)?;

    let mut manifest = RunManifest::new("bounds", args.seed);
    manifest
        .param("kj", args.kj)
        .param("n", args.n)
        .param("n_min", args.n_min)
        .param("out", args.out.display());
    if let Some(eps) = args.epsilon {
        manifest.param("epsilon", eps);
    }
    manifest.write(&args.out)?;

    let mut rows = Vec::new();
    let mut csv = Csv::new("n,lower,tightened_lower,upper");
    for n in args.n_min..=args.n {
        let b = buyhold_gap_bounds(args.kj, n)?;
        csv.row(&[
            n.to_string(),
            fmt(b.lower),
            fmt(b.tightened_lower()),
            fmt(b.upper),
        ]);
        rows.push(json!({
            "n": n,
            "lower": b.lower,
            "tightened_lower": b.tightened_lower(),
            "upper": b.upper,
        }));
    }
    let plan = args
        .epsilon
        .map(|eps| rebalance_horizon(args.kj, eps))
        .transpose()?;
    let doc = json!({
        "command": "bounds",
        "k_j": args.kj,
        "rows": rows,
        "plan": plan,
    });
    write_json(&args.out, "result.json", &doc)?;
    write_csv(&args.out, "result.csv", csv)?;
    if let Some(p) = plan {
        println!("n_star = {}", p.n_star);
    }
    Ok(0)
}

pub fn run_scan(args: &ScanArgs) -> Result<i32, CliError> {
    ensure_out(&args.out)?;
    match (&args.model, args.trials) {
        (Some(path), None) => scan_model(args, path),
        (None, Some(trials)) => scan_generator(args, trials),
        _ => Err(CliError::usage(
            "pass exactly one of --model or --trials".to_string(),
        )),
    }
}

fn scan_model(args: &ScanArgs, path: &PathBuf) -> Result<i32, CliError> {
    let model = ReturnModel::from_file(path)?;

    let mut manifest = RunManifest::new("scan", args.seed);
    manifest
        .param("model", path.display())
        .param("n_max", args.n_max)
        .param("tol", args.tol)
        .param("max_iters", args.max_iters)
        .param("budget", args.budget)
        .param("out", args.out.display());
    manifest.digest_input(path)?;
    manifest.write(&args.out)?;

    let report = maximality_scan(&model, args.n_max, args.tol, args.max_iters, args.budget)?;

    let doc = json!({
        "command": "scan",
        "mode": "model",
        "report": report,
    });
    write_json(&args.out, "result.json", &doc)?;

    let mut csv = Csv::new("n,g_star,excess_over_g1_star");
    for (n, g) in report.horizons.iter().zip(&report.g_star) {
        csv.row(&[n.to_string(), fmt(*g), fmt(g - report.g1_star)]);
    }
    write_csv(&args.out, "result.csv", csv)?;

    Ok(match report.verdict {
        Verdict::Consistent => 0,
        Verdict::ViolationCandidate => 4,
    })
}

fn scan_generator(args: &ScanArgs, trials: u64) -> Result<i32, CliError> {
    let spec = GeneratorSpec {
        m_range: (args.m_min, args.m_max),
        s_range: (args.s_min, args.s_max),
        magnitude: args.magnitude,
    };

    let mut manifest = RunManifest::new("scan", args.seed);
    manifest
        .param("trials", trials)
        .param("n_max", args.n_max)
        .param("m_min", args.m_min)
        .param("m_max", args.m_max)
        .param("s_min", args.s_min)
        .param("s_max", args.s_max)
        .param("magnitude", args.magnitude)
        .param("tol", args.tol)
        .param("max_iters", args.max_iters)
        .param("budget", args.budget)
        .param("out", args.out.display());
    manifest.write(&args.out)?;

    let outcomes = counterexample_search(
        &spec,
        trials,
        args.n_max,
        args.seed,
        args.tol,
        args.max_iters,
        args.budget,
    )?;

    let candidates: Vec<&elg_core::conjecture::TrialOutcome> = outcomes
        .iter()
        .filter(|t| t.report.verdict == Verdict::ViolationCandidate)
        .collect();
    if !candidates.is_empty() {
        let dir = args.out.join("candidates");
        ensure_out(&dir)?;
        for t in &candidates {
            write_json(
                &dir,
                &format!("trial_{}.json", t.trial_index),
                &t.candidate_file(args.seed),
            )?;
        }
    }

    let reports: Vec<serde_json::Value> = outcomes
        .iter()
        .enumerate()
        .map(|(rank, t)| {
            json!({
                "rank": rank,
                "trial_index": t.trial_index,
                "assets": t.model.asset_count(),
                "atoms": t.model.atom_count(),
                "g1_star": t.report.g1_star,
                "max_violation": t.report.max_violation,
                "verdict": t.report.verdict,
            })
        })
        .collect();
    let doc = json!({
        "command": "scan",
        "mode": "generator",
        "trials": trials,
        "n_max": args.n_max,
        "tol": args.tol,
        "violation_candidates": candidates.len(),
        "reports": reports,
    });
    write_json(&args.out, "result.json", &doc)?;

    let mut csv = Csv::new("rank,trial_index,assets,atoms,g1_star,max_violation,verdict");
    for (rank, t) in outcomes.iter().enumerate() {
        csv.row(&[
            rank.to_string(),
            t.trial_index.to_string(),
            t.model.asset_count().to_string(),
            t.model.atom_count().to_string(),
            fmt(t.report.g1_star),
            fmt(t.report.max_violation),
            match t.report.verdict {
                Verdict::Consistent => "consistent".to_string(),
                Verdict::ViolationCandidate => "violation_candidate".to_string(),
            },
        ]);
    }
    write_csv(&args.out, "result.csv", csv)?;

    Ok(if candidates.is_empty() { 0 } else { 4 })
}

pub fn run_backtest(args: &BacktestArgs) -> Result<i32, CliError> {
    let k2_list = parse_float_list(&args.k2, "--k2")?;
    let n_grid = parse_usize_list(&args.n_grid, "--n-grid")?;
    if k2_list.is_empty() || n_grid.is_empty() {
        return Err(CliError::usage(
            "--k2 and --n-grid need at least one value".to_string(),
        ));
    }
    for &k2 in &k2_list {
        if !(k2 > 0.0 && k2 <= 1.0) {
            return Err(CliError::usage(format!("--k2 value {k2} not in (0, 1]")));
        }
    }
    ensure_out(&args.out)?;

    let mut manifest = RunManifest::new("backtest", args.seed);
    manifest
        .param("ticks", args.ticks.display())
        .param("k2", &args.k2)
        .param("n_grid", &args.n_grid)
        .param("window", args.window)
        .param("riskless", args.riskless)
        .param("samples", args.samples)
        .param("out", args.out.display());
    manifest.digest_input(&args.ticks)?;
    manifest.write(&args.out)?;

    let ticks = load_ticks(&args.ticks)?;
    let x = realized_returns(&ticks)?;
    let dominance = sliding_dominance(&x, args.riskless, args.window)?;
    let fractions = dominance.dominance_fractions();

    let mut curves = Vec::new();
    let mut gap_csv = Csv::new(
        "k2,n,g1_star,g_n,gap,method,std_error,baseline_upper,improved_upper",
    );
    for &k2 in &k2_list {
        let k = WeightVector::new(vec![1.0 - k2, k2])
            .map_err(|e| CliError::usage(format!("--k2 {k2}: {e}")))?;
        let rows = empirical_gap_curve(&x, args.riskless, &k, &n_grid, args.samples, args.seed)?;
        for row in &rows {
            gap_csv.row(&[
                fmt(k2),
                row.n.to_string(),
                fmt(row.g1_star),
                fmt(row.g_n),
                fmt(row.gap),
                match row.method {
                    elg_core::elg::EvalMethod::Exact => "exact".to_string(),
                    elg_core::elg::EvalMethod::MonteCarlo => "monte_carlo".to_string(),
                },
                fmt(row.std_error),
                fmt_opt(row.baseline_upper),
                fmt_opt(row.improved_upper),
            ]);
        }
        curves.push(json!({ "k2": k2, "rows": rows }));
    }

    let mut dom_csv = Csv::new("k,asset_ratio,cash_ratio");
    let dom_rows: Vec<serde_json::Value> = (0..dominance.asset_ratio.len())
        .map(|i| {
            let k = dominance.start_index + i;
            dom_csv.row(&[
                k.to_string(),
                fmt(dominance.asset_ratio[i]),
                fmt(dominance.cash_ratio[i]),
            ]);
            json!({
                "k": k,
                "asset_ratio": dominance.asset_ratio[i],
                "cash_ratio": dominance.cash_ratio[i],
            })
        })
        .collect();

    let doc = json!({
        "command": "backtest",
        "tick_count": ticks.tick_count(),
        "return_count": x.len(),
        "window": args.window,
        "riskless": args.riskless,
        "dominance": {
            "start_index": dominance.start_index,
            "fractions": fractions,
            "rows": dom_rows,
        },
        "gap_curves": curves,
    });
    write_json(&args.out, "result.json", &doc)?;
    write_csv(&args.out, "gap_curve.csv", gap_csv)?;
    write_csv(&args.out, "dominance.csv", dom_csv)?;
    Ok(0)
}

fn parse_float_list(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("{flag}: cannot parse {s:?} as a number")))
        })
        .collect()
}

fn parse_usize_list(text: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("{flag}: cannot parse {s:?} as an integer")))
        })
        .collect()
}
