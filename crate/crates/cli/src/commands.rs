use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use judgecal_core::calibrate::{fit_drps_report, CalibrationItem};
use judgecal_core::data::{
    consensus_labels, generate_synthetic, read_labels, read_predictions, read_votes, write_atomic,
    ItemVotes, Prediction,
};
use judgecal_core::metaeval::{
    calibration_size_sweep, confusion_report, leave_one_out, order_balance_report, run_splits,
    transfer_matrix, ConfusionReport, EvalItem, LabeledPrediction, Method, MethodBinding,
    RatingMatrix, Task,
};
use judgecal_core::{
    ci_sc, compute_features, majority_vote, rounded_median, soft_sc, BtdModel, DavidsonParams, Error,
    Smoothing, Verdict, VoteCounts,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::settings::Settings;
use crate::{
    AggregateArgs, CalibrateArgs, CliError, EvaluateArgs, LooArgs, MethodName, OrderReportArgs,
    ReducerName, RegionsArgs, SimulateArgs, SweepArgs, TransferArgs,
};

type Result<T> = std::result::Result<T, CliError>;

/// Contents of the parameter file written by `calibrate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamsFile {
    beta: f64,
    nu: f64,
    gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
}

fn read_params(path: &Path) -> Result<DavidsonParams> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let p: ParamsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid parameter file {}: {e}", path.display())))?;
    Ok(DavidsonParams::new(p.beta, p.nu, p.gamma)?)
}

/// Collects output files and writes the manifest last.
struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Outputs {
    fn new(dir: &Path, manifest: RunManifest) -> Result<Outputs> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(self.dir.join(name), bytes)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| CliError::Usage(format!("cannot format {name}: {e}"));
        w.write_record(header).map_err(to_err)?;
        for row in rows {
            w.write_record(row).map_err(to_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("cannot format {name}: {e}")))?;
        self.write(name, &bytes)
    }

    fn finish(self) -> Result<()> {
        write_atomic(self.dir.join(MANIFEST_FILE), &self.manifest.to_bytes())?;
        Ok(())
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn load_votes(path: &Path) -> Result<Vec<ItemVotes>> {
    let items = read_votes(path)?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("{} contains no votes", path.display())));
    }
    Ok(items)
}

/// Votes paired with their consensus label; a voted item without a label is an error.
fn load_labeled(votes: &Path, labels: &Path) -> Result<Vec<(ItemVotes, Verdict)>> {
    let items = load_votes(votes)?;
    let gold = consensus_labels(&read_labels(labels)?)?;
    items
        .into_iter()
        .map(|item| match gold.get(&item.item_id) {
            Some(&truth) => Ok((item, truth)),
            None => Err(CliError::Usage(format!("item {:?} has votes but no label", item.item_id))),
        })
        .collect()
}

fn eval_items(labeled: &[(ItemVotes, Verdict)]) -> Result<Vec<EvalItem>> {
    labeled
        .iter()
        .map(|(votes, truth)| Ok(EvalItem::from_votes(votes, *truth)?))
        .collect()
}

fn fmt_verdict(v: Verdict) -> String {
    v.value().to_string()
}

pub(crate) fn calibrate(args: &CalibrateArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let fit = settings.fit_config()?;
    let labeled = load_labeled(&args.input.votes, &args.input.labels)?;
    let items: Vec<CalibrationItem> = labeled
        .iter()
        .map(|(votes, truth)| {
            Ok(CalibrationItem {
                features: compute_features(&votes.counts()?, &smoothing),
                truth: *truth,
            })
        })
        .collect::<Result<_>>()?;
    let report = fit_drps_report(&items, &fit)?;

    let mut out = Outputs::new(&args.common.out, RunManifest::new("calibrate", &settings, json!({})))?;
    out.input(&args.input.votes)?;
    out.input(&args.input.labels)?;

    let best = &report.best;
    out.write_json(
        "params.json",
        &ParamsFile {
            beta: best.params.beta,
            nu: best.params.nu,
            gamma: best.params.gamma,
            objective: Some(best.objective),
            converged: Some(best.converged),
        },
    )?;

    let rows: Vec<Vec<String>> = report
        .restarts
        .iter()
        .map(|r| {
            vec![
                r.restart_index.to_string(),
                r.params.beta.to_string(),
                r.params.nu.to_string(),
                r.params.gamma.to_string(),
                r.objective.to_string(),
                r.converged.to_string(),
                r.iterations.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "restarts.csv",
        &header(&["restart", "beta", "nu", "gamma", "objective", "converged", "iterations"]),
        &rows,
    )?;
    out.finish()?;

    println!("{:>7} {:>10} {:>12} {:>10} {:>12} {:>9}", "restart", "beta", "nu", "gamma", "objective", "converged");
    for r in &report.restarts {
        let mark = if r.restart_index == best.restart_index { "*" } else { "" };
        println!(
            "{:>7} {:>10.5} {:>12.5} {:>10.5} {:>12.8} {:>9}{mark}",
            r.restart_index, r.params.beta, r.params.nu, r.params.gamma, r.objective, r.converged
        );
    }
    Ok(())
}

/// One item's verdict under a baseline rule; `btd` goes through the model.
fn aggregate_item(
    method: MethodName,
    reducer: ReducerName,
    model: Option<&BtdModel>,
    item: &ItemVotes,
) -> Result<Prediction> {
    let counts = item.counts()?;
    let (label, distribution) = match method {
        MethodName::Btd => {
            let model = model.expect("btd aggregation has a model");
            let d = model.distribution(&counts);
            (model.predict(&counts), Some(d))
        }
        MethodName::Sc => (majority_vote(&counts), None),
        MethodName::SoftSc => (soft_sc(&item.confident_votes()?, reducer.into())?, None),
        MethodName::CiSc => (ci_sc(&item.confident_votes()?)?, None),
        MethodName::Median => {
            let mut records: Vec<_> = item.records.iter().collect();
            records.sort_by_key(|r| r.sample_index);
            let labels: Vec<Verdict> = records.into_iter().map(judgecal_core::canonicalize).collect();
            match labels.as_slice() {
                [a, b] => (rounded_median(*a, *b), None),
                other => {
                    return Err(CliError::Usage(format!(
                        "median needs exactly two votes, item {:?} has {}",
                        item.item_id,
                        other.len()
                    )))
                }
            }
        }
    };
    Ok(Prediction {
        item_id: item.item_id.clone(),
        label,
        distribution,
    })
}

fn btd_model(params: Option<&Path>, smoothing: Smoothing) -> Result<BtdModel> {
    let path = params.ok_or_else(|| CliError::Usage("method btd needs --params".into()))?;
    Ok(BtdModel::new(read_params(path)?, smoothing))
}

pub(crate) fn aggregate(args: &AggregateArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let model = match args.method {
        MethodName::Btd => Some(btd_model(args.params.as_deref(), smoothing)?),
        _ => None,
    };
    let items = load_votes(&args.votes)?;
    let predictions: Vec<Prediction> = items
        .iter()
        .map(|item| aggregate_item(args.method, args.reducer, model.as_ref(), item))
        .collect::<Result<_>>()?;

    let arguments = json!({
        "method": format!("{:?}", args.method).to_lowercase(),
        "reducer": format!("{:?}", args.reducer).to_lowercase(),
    });
    let mut out = Outputs::new(&args.common.out, RunManifest::new("aggregate", &settings, arguments))?;
    out.input(&args.votes)?;
    if let Some(p) = &args.params {
        out.input(p)?;
    }
    let file = out.dir.join("predictions.jsonl");
    judgecal_core::data::write_predictions(&file, &predictions)?;
    out.manifest.outputs.push("predictions.jsonl".into());
    out.finish()
}

fn method_label(name: MethodName) -> &'static str {
    match name {
        MethodName::Btd => "btd",
        MethodName::Sc => "sc",
        MethodName::SoftSc => "soft-sc",
        MethodName::CiSc => "ci-sc",
        MethodName::Median => "median",
    }
}

/// Bindings with unique ids; a repeated method gets a `#k` suffix.
fn bindings(names: &[MethodName], reducer: ReducerName, smoothing: Smoothing) -> Vec<MethodBinding> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    names
        .iter()
        .map(|&name| {
            let label = method_label(name);
            let count = seen.entry(label).or_insert(0);
            *count += 1;
            let id = if *count == 1 {
                label.to_string()
            } else {
                format!("{label}#{count}")
            };
            let method = match name {
                MethodName::Btd => Method::Btd { smoothing },
                MethodName::Sc => Method::Sc,
                MethodName::SoftSc => Method::SoftSc {
                    reducer: reducer.into(),
                },
                MethodName::CiSc => Method::CiSc,
                MethodName::Median => Method::Median,
            };
            MethodBinding::new(id, method)
        })
        .collect()
}

fn p_value_rows(ids: &[String], p: &[Vec<f64>]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut head = vec!["method".to_string()];
    head.extend(ids.iter().cloned());
    let rows = ids
        .iter()
        .zip(p)
        .map(|(id, row)| std::iter::once(id.clone()).chain(row.iter().map(|v| v.to_string())).collect())
        .collect();
    (head, rows)
}

pub(crate) fn evaluate(args: &EvaluateArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let fit = settings.fit_config()?;
    let split = settings.split_config();
    let significance = settings.significance_config()?;
    let items = eval_items(&load_labeled(&args.input.votes, &args.input.labels)?)?;
    let methods = bindings(&args.methods, args.reducer, smoothing);
    let outcome = run_splits(&items, &methods, &split, &fit)?;
    let summary = outcome.summarize(&significance)?;

    let arguments = json!({
        "methods": methods,
    });
    let mut out = Outputs::new(&args.common.out, RunManifest::new("evaluate", &settings, arguments))?;
    out.input(&args.input.votes)?;
    out.input(&args.input.labels)?;

    let mut rows = Vec::new();
    for (m, id) in outcome.method_ids.iter().enumerate() {
        for s in outcome.scores(m) {
            rows.push(vec![
                id.clone(),
                s.split.to_string(),
                s.mae.to_string(),
                s.pairwise_accuracy.to_string(),
            ]);
        }
    }
    out.write_csv("scores.csv", &header(&["method", "split", "mae", "pairwise_accuracy"]), &rows)?;
    out.write_json("summary.json", &summary)?;

    let (head, rows) = p_value_rows(&outcome.method_ids, &summary.p_values_mae);
    out.write_csv("p_values_mae.csv", &head, &rows)?;
    let (head, rows) = p_value_rows(&outcome.method_ids, &summary.p_values_pa);
    out.write_csv("p_values_pa.csv", &head, &rows)?;

    let mut rows = Vec::new();
    for (m, id) in outcome.method_ids.iter().enumerate() {
        let reports = outcome
            .splits
            .iter()
            .map(|run| {
                let preds: Vec<LabeledPrediction> = run
                    .evaluation
                    .iter()
                    .zip(&run.predictions[m])
                    .map(|(&i, &predicted)| LabeledPrediction {
                        item_id: items[i].item_id.clone(),
                        predicted,
                        truth: items[i].truth,
                    })
                    .collect();
                Ok(confusion_report(&preds)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = ConfusionReport::mean(&reports)?;
        for truth in Verdict::ALL {
            for predicted in Verdict::ALL {
                rows.push(vec![
                    id.clone(),
                    fmt_verdict(truth),
                    fmt_verdict(predicted),
                    mean.counts[truth.index()][predicted.index()].to_string(),
                    mean.row_percent[truth.index()][predicted.index()].to_string(),
                ]);
            }
        }
    }
    out.write_csv(
        "confusion.csv",
        &header(&["method", "truth", "predicted", "mean_count", "row_percent"]),
        &rows,
    )?;

    let mut rows = Vec::new();
    for (k, run) in outcome.splits.iter().enumerate() {
        for (id, fitted) in outcome.method_ids.iter().zip(&run.fits) {
            if let Some(f) = fitted {
                rows.push(vec![
                    id.clone(),
                    k.to_string(),
                    f.params.beta.to_string(),
                    f.params.nu.to_string(),
                    f.params.gamma.to_string(),
                    f.objective.to_string(),
                    f.converged.to_string(),
                ]);
            }
        }
    }
    out.write_csv(
        "fits.csv",
        &header(&["method", "split", "beta", "nu", "gamma", "objective", "converged"]),
        &rows,
    )?;
    out.finish()?;

    println!("{:<10} {:>8} {:>8} {:>5} {:>4} {:>8} {:>8} {:>5} {:>4}", "method", "mae", "±95%", "rank", "top", "pa", "±95%", "rank", "top");
    for s in &summary.methods {
        println!(
            "{:<10} {:>8.4} {:>8.4} {:>5} {:>4} {:>8.4} {:>8.4} {:>5} {:>4}",
            s.method_id,
            s.mae,
            s.mae_ci95,
            s.rank,
            if s.in_top_cluster { "*" } else { "" },
            s.pairwise_accuracy,
            s.pa_ci95,
            s.pa_rank,
            if s.pa_in_top_cluster { "*" } else { "" },
        );
    }
    Ok(())
}

pub(crate) fn sweep(args: &SweepArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let fit = settings.fit_config()?;
    let split = settings.split_config();
    let items = eval_items(&load_labeled(&args.input.votes, &args.input.labels)?)?;
    let points = calibration_size_sweep(&items, &args.sizes, &split, &fit, &smoothing)?;

    let mut out = Outputs::new(&args.common.out, RunManifest::new("sweep", &settings, json!({ "sizes": args.sizes })))?;
    out.input(&args.input.votes)?;
    out.input(&args.input.labels)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![p.size.to_string(), p.mean_mae.to_string(), p.mae_ci95.to_string()])
        .collect();
    out.write_csv("sweep.csv", &header(&["size", "mean_mae", "mae_ci95"]), &rows)?;
    out.finish()
}

pub(crate) fn transfer(args: &TransferArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let fit = settings.fit_config()?;
    let split = settings.split_config();
    let tasks: Vec<Task> = args
        .tasks
        .iter()
        .map(|t| {
            Ok(Task {
                name: t.name.clone(),
                items: eval_items(&load_labeled(&t.votes, &t.labels)?)?,
            })
        })
        .collect::<Result<_>>()?;
    let matrix = transfer_matrix(&tasks, &split, &fit, &smoothing)?;

    let names: Vec<&String> = args.tasks.iter().map(|t| &t.name).collect();
    let mut out = Outputs::new(&args.common.out, RunManifest::new("transfer", &settings, json!({ "tasks": names })))?;
    for t in &args.tasks {
        out.input(&t.votes)?;
        out.input(&t.labels)?;
    }
    let (head, rows) = p_value_rows(&matrix.tasks, &matrix.delta);
    let mut head = head;
    head[0] = "source".into();
    out.write_csv("transfer.csv", &head, &rows)?;
    out.finish()
}

pub(crate) fn loo(args: &LooArgs, settings: Settings) -> Result<()> {
    let matrix = RatingMatrix::from_labels(&read_labels(&args.ratings)?)?;
    let predictions: BTreeMap<String, Verdict> = read_predictions(&args.predictions)?
        .into_iter()
        .map(|p| (p.item_id, p.label))
        .collect();
    let system: Vec<Verdict> = matrix
        .items
        .iter()
        .map(|id| {
            predictions
                .get(id)
                .copied()
                .ok_or_else(|| CliError::Usage(format!("no system prediction for item {id:?}")))
        })
        .collect::<Result<_>>()?;
    let report = leave_one_out(&matrix, &system)?;

    let mut out = Outputs::new(&args.common.out, RunManifest::new("loo", &settings, json!({})))?;
    out.input(&args.ratings)?;
    out.input(&args.predictions)?;
    let mut rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.rater_id.clone(),
                r.human_pa.to_string(),
                r.system_pa.to_string(),
                u8::from(r.win).to_string(),
                r.items_compared.to_string(),
            ]
        })
        .collect();
    rows.push(vec!["wins".into(), String::new(), String::new(), report.wins.to_string(), String::new()]);
    out.write_csv(
        "loo.csv",
        &header(&["rater_id", "human_pa", "system_pa", "win", "items_compared"]),
        &rows,
    )?;
    out.finish()?;

    println!("{:<12} {:>9} {:>10} {:>4}", "rater", "human_pa", "system_pa", "win");
    for r in &report.rows {
        println!(
            "{:<12} {:>9.4} {:>10.4} {:>4}",
            r.rater_id,
            r.human_pa,
            r.system_pa,
            if r.win { "✓" } else { "" }
        );
    }
    println!("wins: {}/{}", report.wins, report.rows.len());
    Ok(())
}

pub(crate) fn simulate(args: &SimulateArgs, settings: Settings) -> Result<()> {
    let cfg = settings.generator_config()?;
    let data = generate_synthetic(&cfg)?;
    let mut out = Outputs::new(&args.common.out, RunManifest::new("simulate", &settings, json!({})))?;
    judgecal_core::data::write_votes(out.dir.join("votes.jsonl"), &data.records)?;
    judgecal_core::data::write_labels(out.dir.join("labels.jsonl"), &data.labels)?;
    judgecal_core::data::write_truth(out.dir.join("truth.jsonl"), &data.truth)?;
    out.manifest
        .outputs
        .extend(["votes.jsonl", "labels.jsonl", "truth.jsonl"].map(String::from));
    out.finish()
}

pub(crate) fn regions(args: &RegionsArgs, settings: Settings) -> Result<()> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let smoothing = settings.smoothing()?;
    let mut columns: Vec<(String, BtdModel)> = Vec::new();
    for path in &args.params {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        columns.push((format!("btd:{stem}"), BtdModel::new(read_params(path)?, smoothing)));
    }
    let nus = if args.nu.is_empty() && args.params.is_empty() {
        vec![1.0, 1000.0]
    } else {
        args.nu.clone()
    };
    for nu in nus {
        let params = DavidsonParams::new(args.beta, nu, args.gamma)?;
        columns.push((format!("btd:nu={nu}"), BtdModel::new(params, smoothing)));
    }

    let mut head = header(&["c_plus", "c_minus", "c_tie", "sc"]);
    head.extend(columns.iter().map(|(name, _)| name.clone()));
    let mut rows = Vec::new();
    for c_plus in 0..=args.n {
        for c_minus in 0..=args.n - c_plus {
            let c_tie = args.n - c_plus - c_minus;
            let counts = VoteCounts::new(c_plus, c_minus, c_tie)?;
            let mut row = vec![
                c_plus.to_string(),
                c_minus.to_string(),
                c_tie.to_string(),
                fmt_verdict(majority_vote(&counts)),
            ];
            row.extend(columns.iter().map(|(_, model)| fmt_verdict(model.predict(&counts))));
            rows.push(row);
        }
    }

    let arguments = json!({ "n": args.n, "beta": args.beta, "gamma": args.gamma, "columns": head[4..] });
    let mut out = Outputs::new(&args.common.out, RunManifest::new("regions", &settings, arguments))?;
    for path in &args.params {
        out.input(path)?;
    }
    out.write_csv("regions.csv", &head, &rows)?;
    out.finish()
}

pub(crate) fn order_report(args: &OrderReportArgs, settings: Settings) -> Result<()> {
    let smoothing = settings.smoothing()?;
    let labeled = load_labeled(&args.input.votes, &args.input.labels)?;
    let report = match args.method {
        MethodName::Btd => {
            let model = btd_model(args.params.as_deref(), smoothing)?;
            order_balance_report(&labeled, |c| model.predict(c))?
        }
        MethodName::Sc => order_balance_report(&labeled, majority_vote)?,
        other => {
            return Err(CliError::Usage(format!(
                "order-report supports btd and sc, not {}",
                method_label(other)
            )))
        }
    };

    let arguments = json!({ "method": method_label(args.method) });
    let mut out = Outputs::new(&args.common.out, RunManifest::new("order-report", &settings, arguments))?;
    out.input(&args.input.votes)?;
    out.input(&args.input.labels)?;
    if let Some(p) = &args.params {
        out.input(p)?;
    }
    let rows = vec![
        vec!["first_only".into(), report.first_only_mae.to_string(), report.votes_per_arm.to_string()],
        vec!["second_only".into(), report.second_only_mae.to_string(), report.votes_per_arm.to_string()],
        vec!["balanced".into(), report.balanced_mae.to_string(), report.votes_per_arm.to_string()],
    ];
    out.write_csv("order_report.csv", &header(&["strategy", "mae", "votes"]), &rows)?;
    out.finish()
}
