//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or exceeds its time budget.
//!
//! Run with `cargo test -p judgecal-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use judgecal_core::calibrate::{fit_drps, grid_oracle, mean_drps, CalibrationItem, FitConfig, Grid};
use judgecal_core::data::{generate_synthetic, group_by_item, GeneratorConfig, SyntheticData};
use judgecal_core::metaeval::{
    calibration_size_sweep, calibration_items, order_balance_report, paired_permutation_test,
    run_splits, EvalItem, Method, MethodBinding, SignificanceConfig, SplitConfig,
};
use judgecal_core::seed::stream_rng;
use judgecal_core::{
    bayes_action, compute_features, davidson_probs, drps, mae_risks, BtdModel, DavidsonParams,
    FeaturePair, ParamBox, Smoothing, SoftReducer, TernaryDistribution, Verdict, VoteCounts,
};
use rand::Rng;

type Check = Result<String, String>;

/// Name, time budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(actual: f64, expected: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((actual - expected).abs() <= tol, || format!("{what}: {actual} vs {expected}"))
}

fn theta(beta: f64, nu: f64, gamma: f64) -> DavidsonParams {
    DavidsonParams::new(beta, nu, gamma).unwrap()
}

fn dist(p_minus: f64, p_tie: f64, p_plus: f64) -> TernaryDistribution {
    TernaryDistribution::new(p_minus, p_tie, p_plus).unwrap()
}

fn counts(plus: u32, minus: u32, tie: u32) -> VoteCounts {
    VoteCounts::new(plus, minus, tie).unwrap()
}

fn eval_items(data: &SyntheticData) -> Vec<EvalItem> {
    group_by_item(data.records.clone())
        .iter()
        .zip(&data.labels)
        .map(|(votes, label)| EvalItem::from_votes(votes, label.truth).unwrap())
        .collect()
}

fn calibration_set(data: &SyntheticData, smoothing: &Smoothing) -> Vec<CalibrationItem> {
    let items = eval_items(data);
    let refs: Vec<&EvalItem> = items.iter().collect();
    calibration_items(&refs, smoothing)
}

// ---------------------------------------------------------------------------

fn closed_form_core() -> Check {
    let sm = Smoothing::default();
    let f = compute_features(&counts(3, 1, 0), &sm);
    close(f.s, 0.5 * (4.0f64 / 2.0).ln(), 1e-9, "s(3,1,0)")?;
    close(f.s, 0.346574, 1e-6, "s(3,1,0) literal")?;
    close(f.t, (1.0f64 / 5.0).ln(), 1e-9, "t(3,1,0)")?;
    let f = compute_features(&counts(0, 0, 7), &sm);
    close(f.s, 0.0, 1e-9, "s all-tie")?;
    close(f.t, 0.0, 1e-9, "t all-tie")?;
    let a = compute_features(&counts(5, 2, 3), &sm);
    let b = compute_features(&counts(2, 5, 3), &sm);
    close(a.s, -b.s, 1e-9, "antisymmetric s")?;
    close(a.t, b.t, 1e-9, "t under swap")?;

    let p = davidson_probs(&FeaturePair { s: 0.0, t: 0.0 }, &theta(1.0, 1.0, 1.0));
    for v in p.as_array() {
        close(v, 1.0 / 3.0, 1e-9, "uniform davidson")?;
    }
    // beta * s = ln 2, eta = 0
    let p = davidson_probs(&FeaturePair { s: 2f64.ln(), t: 0.0 }, &theta(1.0, 1.0, 0.0));
    close(p.p_plus(), 2.0 / 3.5, 1e-9, "p_plus")?;
    close(p.p_minus(), 0.5 / 3.5, 1e-9, "p_minus")?;
    close(p.p_tie(), 1.0 / 3.5, 1e-9, "p_tie")?;
    let q = davidson_probs(&FeaturePair { s: -(2f64.ln()), t: 0.0 }, &theta(1.0, 1.0, 0.0));
    close(q.p_plus(), p.p_minus(), 1e-9, "negated s")?;
    close(q.p_tie(), p.p_tie(), 1e-9, "negated s tie")?;

    let u = TernaryDistribution::uniform();
    let r = mae_risks(&u);
    ensure(r.minus == 1.0 && r.tie == 2.0 / 3.0 && r.plus == 1.0, || format!("uniform risks {r:?}"))?;
    ensure(bayes_action(&u) == Verdict::Tie, || "uniform action".into())?;
    let d = dist(0.0, 0.2, 0.8);
    let r = mae_risks(&d);
    close(r.minus, 1.8, 1e-9, "R(-1)")?;
    close(r.tie, 0.8, 1e-9, "R(0)")?;
    close(r.plus, 0.2, 1e-9, "R(+1)")?;
    ensure(bayes_action(&d) == Verdict::Plus, || "action (0,.2,.8)".into())?;
    let r = mae_risks(&dist(0.0, 1.0, 0.0));
    ensure(r.minus == 1.0 && r.tie == 0.0 && r.plus == 1.0, || format!("certain tie risks {r:?}"))?;
    ensure(bayes_action(&dist(0.2, 0.3, 0.5)) == Verdict::Tie, || "boundary tie-break".into())?;

    for y in Verdict::ALL {
        close(drps(&TernaryDistribution::point_mass(y), y), 0.0, 1e-9, "perfect drps")?;
    }
    close(drps(&u, Verdict::Minus), 5.0 / 9.0, 1e-9, "drps(u,-1)")?;
    close(drps(&u, Verdict::Tie), 2.0 / 9.0, 1e-9, "drps(u,0)")?;
    Ok("all closed-form examples hold".into())
}

fn tie_region() -> Check {
    const RES: i64 = 200;
    let mut cells = 0;
    for i in 0..=RES {
        for j in 0..=RES - i {
            let k = RES - i - j;
            let d = dist(i as f64 / RES as f64, k as f64 / RES as f64, j as f64 / RES as f64);
            // Exact integer form of |p+ - p-| <= p0.
            let expected_tie = (j - i).abs() <= k;
            let got = bayes_action(&d) == Verdict::Tie;
            ensure(got == expected_tie, || format!("cell ({i},{k},{j})/{RES}: tie={got}"))?;
            cells += 1;
        }
    }
    Ok(format!("{cells} simplex cells agree"))
}

fn proper_score() -> Check {
    let mut rng = stream_rng(2024, "proper-score", 0);
    for trial in 0..100 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let (lo, hi) = (a.min(b), a.max(b));
        let q = dist(lo, hi - lo, 1.0 - hi);
        let q_cdf = [q.p_minus(), q.p_minus() + q.p_tie()];

        let mut best = (f64::INFINITY, [0.0; 2]);
        for i in 0..=100u32 {
            for j in 0..=100 - i {
                let f = dist(i as f64 / 100.0, j as f64 / 100.0, (100 - i - j) as f64 / 100.0);
                let expected: f64 = Verdict::ALL.iter().map(|&y| q.prob(y) * drps(&f, y)).sum();
                if expected < best.0 {
                    best = (expected, [f.p_minus(), f.p_minus() + f.p_tie()]);
                }
            }
        }
        // The grid cell containing q is the one whose CDF is nearest q's.
        for (fc, qc) in best.1.iter().zip(q_cdf) {
            ensure((fc - qc).abs() <= 0.005 + 1e-12, || {
                format!("trial {trial}: argmin CDF {:?} vs q CDF {q_cdf:?}", best.1)
            })?;
        }
    }
    Ok("100 distributions minimized in their own cell".into())
}

fn optimizer_vs_oracle() -> Check {
    let mut rng = stream_rng(77, "oracle-theta", 0);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20u64 {
        let t = theta(
            rng.random_range(0.2..3.0),
            rng.random_range(-3.0f64..4.0).exp(),
            rng.random_range(-2.0..3.0),
        );
        let cfg = GeneratorConfig {
            theta_true: t,
            num_items: 500,
            seed: 1000 + k,
            ..Default::default()
        };
        let items = calibration_set(&generate_synthetic(&cfg).unwrap(), &Smoothing::default());
        let fit = fit_drps(&items, &FitConfig::default().with_seed(k)).map_err(|e| e.to_string())?;
        let grid = grid_oracle(&items, &ParamBox::default(), 25).map_err(|e| e.to_string())?;
        let gap = fit.objective - grid.objective;
        worst = worst.max(gap);
        ensure(gap <= 1e-4, || format!("set {k}: fit {} vs grid {}", fit.objective, grid.objective))?;
    }
    Ok(format!("max fit - grid = {worst:.3e}"))
}

fn fisher_consistency() -> Check {
    let truth = theta(1.0, 1.0, 1.0);
    let cfg = GeneratorConfig {
        theta_true: truth,
        num_items: 20_000,
        votes_per_item: 20,
        seed: 1,
        ..Default::default()
    };
    let items = calibration_set(&generate_synthetic(&cfg).unwrap(), &Smoothing::default());
    let fit = fit_drps(&items, &FitConfig::default()).map_err(|e| e.to_string())?;
    let true_objective = mean_drps(&items, &truth);
    ensure((fit.objective - true_objective).abs() <= 1e-3, || {
        format!("objective {} vs true {}", fit.objective, true_objective)
    })?;
    let [db, dlnu, dg] = Grid::new(&ParamBox::default(), 25).unwrap().spacing();
    let p = fit.params;
    ensure(
        (p.beta - 1.0).abs() <= db && p.nu.ln().abs() <= dlnu && (p.gamma - 1.0).abs() <= dg,
        || format!("fitted {p:?} outside one grid step ({db:.3}, {dlnu:.3}, {dg:.3})"),
    )?;
    Ok(format!(
        "theta_hat = ({:.3}, {:.3}, {:.3}), objective gap {:.2e}",
        p.beta,
        p.nu,
        p.gamma,
        true_objective - fit.objective
    ))
}

fn saturation() -> Check {
    let mut saturated = 0;
    let mut smallest = f64::INFINITY;
    for seed in 0..20u64 {
        // Truths are almost always ties while votes rarely are.
        let cfg = GeneratorConfig {
            theta_true: theta(1.0, 1e4, 1.0),
            num_items: 1000,
            votes_per_item: 12,
            dirichlet_concentration: [1.0, 0.3, 1.0],
            seed,
            ..Default::default()
        };
        let items = calibration_set(&generate_synthetic(&cfg).unwrap(), &Smoothing::default());
        let fit = fit_drps(&items, &FitConfig::default().with_seed(seed)).map_err(|e| e.to_string())?;
        smallest = smallest.min(fit.params.nu);
        if fit.params.nu >= 500.0 {
            saturated += 1;
        }
    }
    ensure(saturated >= 18, || format!("nu_hat >= 500 in {saturated}/20 seeds"))?;
    Ok(format!("nu_hat >= 500 in {saturated}/20 seeds (min {smallest:.1})"))
}

fn btd_beats_sc() -> Check {
    let cfg = GeneratorConfig {
        num_items: 1000,
        seed: 5,
        ..Default::default()
    };
    let items = eval_items(&generate_synthetic(&cfg).unwrap());
    let methods = vec![
        MethodBinding::new("btd", Method::Btd { smoothing: Smoothing::default() }),
        MethodBinding::new("sc", Method::Sc),
        MethodBinding::new("soft-sc", Method::SoftSc { reducer: SoftReducer::Mean }),
        MethodBinding::new("ci-sc", Method::CiSc),
    ];
    let split = SplitConfig {
        seed: 5,
        ..Default::default()
    };
    let outcome = run_splits(&items, &methods, &split, &FitConfig::default()).map_err(|e| e.to_string())?;
    let summary = outcome
        .summarize(&SignificanceConfig::default())
        .map_err(|e| e.to_string())?;
    let score = |id: &str| summary.methods.iter().find(|m| m.method_id == id).unwrap();
    let (btd, sc) = (score("btd"), score("sc"));
    ensure(btd.mae < sc.mae, || format!("btd {} vs sc {}", btd.mae, sc.mae))?;
    let top: Vec<&str> = summary
        .methods
        .iter()
        .filter(|m| m.in_top_cluster)
        .map(|m| m.method_id.as_str())
        .collect();
    ensure(top == ["btd"], || format!("MAE top cluster {top:?}"))?;
    Ok(format!("MAE btd {:.4} < sc {:.4}; top cluster {top:?}", btd.mae, sc.mae))
}

fn judgecal(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_judgecal"))
        .args(args)
        .env_remove("JUDGECAL_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("judgecal {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn region_map() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("regions");
    let nus = [1e-4, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];
    let nu_arg = nus.map(|v| v.to_string()).join(",");
    judgecal(&["regions", "--n", "20", "--nu", &nu_arg, "--out", out.to_str().unwrap()])?;

    let mut reader = csv::Reader::from_path(out.join("regions.csv")).map_err(|e| e.to_string())?;
    let head = reader.headers().map_err(|e| e.to_string())?.clone();
    ensure(head.len() == 4 + nus.len(), || format!("header {head:?}"))?;
    let mut cells = 0;
    let mut tie_sizes = vec![0usize; nus.len()];
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let v: Vec<i64> = row.iter().map(|x| x.parse().unwrap()).collect();
        let (cp, cm, ct) = (v[0], v[1], v[2]);
        ensure(cp + cm + ct == 20, || format!("row {v:?}"))?;
        let sc = if ct >= cp.max(cm) || cp == cm { 0 } else { (cp - cm).signum() };
        ensure(v[3] == sc, || format!("SC at ({cp},{cm},{ct}): {} vs rule {sc}", v[3]))?;
        for (k, w) in v[4..].windows(2).enumerate() {
            // A tie under smaller nu stays a tie under larger nu.
            ensure(w[0] != 0 || w[1] == 0, || format!("tie region not nested at ({cp},{cm},{ct}), nu {}", nus[k]))?;
        }
        for (size, &label) in tie_sizes.iter_mut().zip(&v[4..]) {
            *size += usize::from(label == 0);
        }
        cells += 1;
    }
    ensure(cells == 231, || format!("{cells} cells"))?;
    Ok(format!("231 cells; btd tie-region sizes by nu {tie_sizes:?}"))
}

fn permutation_calibration() -> Check {
    let pairs = 1000;
    let mut rejected = 0;
    for k in 0..pairs {
        let mut rng = stream_rng(99, "null-losses", k);
        let a: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let cfg = SignificanceConfig {
            resamples_per_split: 100,
            tau: 0.05,
            seed: k,
        };
        let p = paired_permutation_test(&a, &b, &cfg).map_err(|e| e.to_string())?;
        rejected += usize::from(p < cfg.tau);
    }
    let rate = rejected as f64 / pairs as f64;
    ensure((rate - 0.05).abs() <= 0.02, || format!("rejection rate {rate}"))?;
    Ok(format!("null rejection rate {rate:.3}"))
}

fn size_sweep() -> Check {
    let cfg = GeneratorConfig {
        theta_true: theta(1.0, 10.0, 1.0),
        num_items: 2000,
        votes_per_item: 12,
        seed: 9,
        ..Default::default()
    };
    let items = eval_items(&generate_synthetic(&cfg).unwrap());
    let split = SplitConfig {
        seed: 9,
        ..Default::default()
    };
    let points = calibration_size_sweep(&items, &[20, 100, 200], &split, &FitConfig::default(), &Smoothing::default())
        .map_err(|e| e.to_string())?;
    let [m20, m100, m200] = [points[0].mean_mae, points[1].mean_mae, points[2].mean_mae];
    ensure((m200 - m100).abs() <= 0.005, || format!("MAE@200 {m200} vs MAE@100 {m100}"))?;
    ensure(m100 < m20 && m200 < m20, || format!("MAE@20 {m20} not worst"))?;
    Ok(format!("MAE@20 {m20:.4}, @100 {m100:.4}, @200 {m200:.4}"))
}

fn order_balance() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let cfg = GeneratorConfig {
            num_items: 2000,
            votes_per_item: 24,
            order_bias: 0.2,
            seed,
            ..Default::default()
        };
        let data = generate_synthetic(&cfg).unwrap();
        let labeled: Vec<_> = group_by_item(data.records.clone())
            .into_iter()
            .zip(&data.labels)
            .map(|(votes, label)| (votes, label.truth))
            .collect();
        let model = BtdModel::new(cfg.theta_true, cfg.smoothing);
        let r = order_balance_report(&labeled, |c| model.predict(c)).map_err(|e| e.to_string())?;
        let margin = r.balanced_mae - r.first_only_mae.min(r.second_only_mae);
        worst = worst.max(margin);
        ensure(margin <= 0.005, || format!("seed {seed}: {r:?}"))?;
    }
    Ok(format!("balanced - best single order <= {worst:.4} on all 20 seeds"))
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        files.push((rel, std::fs::read(&entry).unwrap()));
    }
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

fn pipeline(root: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let p = |name: &str| root.join(name).to_string_lossy().into_owned();
    judgecal(&["simulate", "--items", "600", "--seed", "11", "--out", &p("sim")])?;
    let (votes, labels) = (p("sim/votes.jsonl"), p("sim/labels.jsonl"));
    judgecal(&["calibrate", "--votes", &votes, "--labels", &labels, "--seed", "11", "--out", &p("cal")])?;
    judgecal(&[
        "evaluate", "--votes", &votes, "--labels", &labels, "--method", "btd,sc,soft-sc,ci-sc",
        "--seed", "11", "--out", &p("eval"),
    ])?;
    Ok(files_in(root))
}

fn end_to_end_determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    ensure(names.len() >= 12, || format!("too few outputs: {names:?}"))?;
    ensure(first == second, || {
        let differing: Vec<&str> = first
            .iter()
            .zip(&second)
            .filter(|(x, y)| x != y)
            .map(|(x, _)| x.0.as_str())
            .collect();
        format!("outputs differ: {differing:?}")
    })?;
    Ok(format!("{} files byte-identical across runs", names.len()))
}

fn main() {
    // Ignore libtest flags such as --nocapture when run via `cargo test`.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 12] = [
        ("closed-form core", 1, closed_form_core),
        ("tie region", 10, tie_region),
        ("proper score", 30, proper_score),
        ("optimizer vs grid oracle", 120, optimizer_vs_oracle),
        ("fisher consistency", 120, fisher_consistency),
        ("saturation regime", 120, saturation),
        ("btd beats sc", 180, btd_beats_sc),
        ("region map", 5, region_map),
        ("permutation calibration", 60, permutation_calibration),
        ("size sweep plateau", 180, size_sweep),
        ("order balance", 60, order_balance),
        ("end-to-end determinism", 300, end_to_end_determinism),
    ];

    let mut failures = 0;
    for (name, budget, check) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > Duration::from_secs(budget) {
                Err(format!("{detail}; took {elapsed:.1?}, budget {budget}s"))
            } else {
                Ok(detail)
            }
        });
        match result {
            Ok(detail) => println!("PASS  {name:<28} {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name:<28} {detail} [{elapsed:.2?}]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
