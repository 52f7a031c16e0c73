use std::fs;
use std::path::Path;
use std::time::Instant;

use nskmp::linalg::linspace;
use nskmp::model_io::{ModelFile, StoredModel};
use nskmp::planner::{
    run_handover_experiment, run_letter_experiment, HandoverExperimentConfig, LetterExperimentConfig, Trajectory,
};
use nskmp::promp::{fit_promp, DEFAULT_RIDGE};
use nskmp::refdist::synth::{handover, letter_a, HandoverConfig, LetterConfig};
use nskmp::refdist::{build_reference, default_query_inputs, em_fit, read_demos_csv, write_demos_csv, EmOptions};
use nskmp::timing::{complexity_sweep, SweepConfig};
use nskmp::{
    Demonstration, KernelConfig, KmpModel, Matrix, Modulation, NullSpaceReference, PrompModel, Vector, ViaPoint,
};
use serde_json::{json, Value};

use crate::args::{AdaptArgs, BenchArgs, DataKind, ExperimentArgs, GenDataArgs, TrainArgs, TrainMethod, Which};
use crate::failure::Failure;
use crate::sink::Sink;

type Outcome = Result<Value, Failure>;

fn read_demos(path: &Path) -> Result<Vec<Demonstration>, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_demos_csv(file)?)
}

pub fn gen_data(seed: u64, args: &GenDataArgs, sink: &mut Sink) -> Outcome {
    let (demos, name) = match args.kind {
        DataKind::LetterA => (letter_a(&LetterConfig::default(), seed)?, "letter-a"),
        DataKind::Handover => (handover(&HandoverConfig::default(), seed)?, "handover"),
    };
    let mut buf = Vec::new();
    write_demos_csv(&mut buf, &demos)?;
    let file = args.file.clone().unwrap_or_else(|| format!("{name}.csv"));
    sink.put(&file, &String::from_utf8(buf).expect("CSV output is UTF-8"))?;
    Ok(json!({
        "command": "gen-data",
        "kind": name,
        "seed": seed,
        "demos": demos.len(),
        "input_dim": demos[0].input_dim(),
        "output_dim": demos[0].output_dim(),
        "file": file,
    }))
}

fn rms(errors: impl Iterator<Item = f64>) -> f64 {
    let (n, sum) = errors.fold((0usize, 0.0), |(n, s), e| (n + 1, s + e * e));
    (sum / n.max(1) as f64).sqrt()
}

pub fn train(seed: u64, args: &TrainArgs, sink: &mut Sink) -> Outcome {
    let demos = read_demos(&args.data)?;
    let m = &args.model;
    let (model, mut summary) = match args.method {
        TrainMethod::Gmm | TrainMethod::Kmp => {
            let fit = em_fit(&demos, m.components, seed, &EmOptions::default())?;
            let em = json!({
                "components": m.components,
                "iterations": fit.iterations,
                "converged": fit.converged,
                "log_likelihood": fit.log_likelihood.last(),
                "reinitialized": fit.reinitialized,
            });
            if args.method == TrainMethod::Gmm {
                (ModelFile::from_gmm(&fit.mixture), json!({ "em": em }))
            } else {
                let queries = default_query_inputs(&demos, m.ref_points)?;
                let reference = build_reference(&fit.mixture, &queries)?;
                let kernel = KernelConfig::new(m.length_scale, demos[0].output_dim())?;
                let kmp = KmpModel::fit(reference, m.lambda, kernel)?;
                let r = kmp.reference();
                let residual = rms(r
                    .inputs
                    .iter()
                    .zip(&r.means)
                    .map(|(s, mu)| (kmp.predict(s).expect("reference input has model dimension") - mu).norm()));
                let summary = json!({
                    "em": em,
                    "reference_points": kmp.len(),
                    "lambda": m.lambda,
                    "length_scale": m.length_scale,
                    "jitter": kmp.jitter(),
                    "reference_residual_rms": residual,
                });
                (ModelFile::from_kmp(&kmp), summary)
            }
        }
        TrainMethod::Promp => {
            let p = fit_promp(&demos, m.basis, DEFAULT_RIDGE)?;
            let residual = rms(demos
                .iter()
                .flat_map(|d| d.inputs.iter().zip(&d.outputs))
                .map(|(s, x)| (p.mean(s[0]) - x).norm()));
            (
                ModelFile::from_promp(&p),
                json!({ "basis": m.basis, "demo_residual_rms": residual }),
            )
        }
    };
    let file = args.file.clone().unwrap_or_else(|| format!("{}.json", model.kind()));
    sink.put(&file, &model.to_json()?)?;
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("command".into(), json!("train"));
    obj.insert("method".into(), json!(model.kind()));
    obj.insert("seed".into(), json!(seed));
    obj.insert("file".into(), json!(file));
    Ok(summary)
}

/// Parses `S:X` with comma-separated components on both sides.
pub fn parse_pair(text: &str) -> Result<(Vector, Vector), Failure> {
    let bad = || Failure::Config(format!("expected S:X with comma-separated numbers, got `{text}`"));
    let (s, x) = text.split_once(':').ok_or_else(bad)?;
    let nums = |t: &str| {
        t.split(',')
            .map(|v| v.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .map(Vector::from_vec)
            .ok_or_else(bad)
    };
    Ok((nums(s)?, nums(x)?))
}

enum Query {
    Predict,
    NullSpace(Vec<NullSpaceReference>),
    Via(Vec<(Vector, Vector)>),
}

impl Query {
    fn name(&self) -> &'static str {
        match self {
            Query::Predict => "predict",
            Query::NullSpace(_) => "ns",
            Query::Via(_) => "via",
        }
    }
}

fn scalar_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<Vector>, Failure> {
    if steps < 2 {
        return Err(Failure::Config("--steps must be >= 2".into()));
    }
    Ok(linspace(lo, hi, steps)
        .into_iter()
        .map(|t| Vector::from_element(1, t))
        .collect())
}

/// Times `f` once with a monotonic clock; returns the result and milliseconds.
fn timed<T>(f: impl FnOnce() -> Result<T, Failure>) -> Result<(T, f64), Failure> {
    let t = Instant::now();
    let out = f()?;
    Ok((out, t.elapsed().as_secs_f64() * 1e3))
}

fn adapt_kmp(model: &KmpModel, query: &Query, args: &AdaptArgs) -> Result<(Vec<Vector>, Vec<Vector>, f64), Failure> {
    let r = model.reference();
    let inputs = if model.input_dim() == 1 {
        scalar_grid(r.inputs[0][0], r.inputs[r.len() - 1][0], args.steps)?
    } else {
        r.inputs.clone()
    };
    let (points, ms) = match query {
        Query::Predict => timed(|| Ok(inputs.iter().map(|s| model.predict(s)).collect::<Result<Vec<_>, _>>()?))?,
        Query::NullSpace(refs) => timed(|| {
            let m = Modulation::new(model, refs)?;
            Ok(inputs
                .iter()
                .map(|s| m.predict(model, s))
                .collect::<Result<Vec<_>, _>>()?)
        })?,
        Query::Via(vias) => {
            let d = model.output_dim();
            let vps = vias
                .iter()
                .map(|(s, x)| ViaPoint::new(s.clone(), x.clone(), Matrix::identity(d, d) * args.via_covariance))
                .collect::<Result<Vec<_>, _>>()?;
            timed(|| {
                let adapted = model.adapt_via_points(&vps)?;
                Ok(inputs
                    .iter()
                    .map(|s| adapted.predict(s))
                    .collect::<Result<Vec<_>, _>>()?)
            })?
        }
    };
    Ok((inputs, points, ms))
}

fn adapt_promp(
    model: &PrompModel,
    query: &Query,
    args: &AdaptArgs,
) -> Result<(Vec<Vector>, Vec<Vector>, f64), Failure> {
    let inputs = scalar_grid(0.0, 1.0, args.steps)?;
    let (points, ms) = match query {
        Query::Predict => timed(|| Ok(inputs.iter().map(|s| model.mean(s[0])).collect()))?,
        Query::NullSpace(_) => return Err(Failure::Config("--ns needs a kmp model".into())),
        Query::Via(vias) => {
            let targets = vias
                .iter()
                .map(|(s, x)| {
                    if s.len() == 1 {
                        Ok((s[0], x.clone()))
                    } else {
                        Err(Failure::Config("promp via-points take a scalar input".into()))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let sigma = Matrix::identity(model.output_dim, model.output_dim) * args.via_covariance;
            timed(|| {
                let mu_w = model.conditioned_mean(&targets, &sigma)?;
                let conditioned = PrompModel { mu_w, ..model.clone() };
                Ok(inputs.iter().map(|s| conditioned.mean(s[0])).collect())
            })?
        }
    };
    Ok((inputs, points, ms))
}

pub fn adapt(args: &AdaptArgs, sink: &mut Sink) -> Outcome {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.model.display())))?;
    let file = ModelFile::from_json(&text)?;
    let query = match (args.ns.is_empty(), args.via.is_empty()) {
        (true, true) => Query::Predict,
        (false, true) => Query::NullSpace(
            args.ns
                .iter()
                .map(|p| parse_pair(p).map(|(s, x)| NullSpaceReference::new(s, x)))
                .collect::<Result<_, _>>()?,
        ),
        (true, false) => Query::Via(args.via.iter().map(|p| parse_pair(p)).collect::<Result<_, _>>()?),
        (false, false) => return Err(Failure::Config("use either --ns or --via, not both".into())),
    };
    if !(args.via_covariance > 0.0) {
        return Err(Failure::Config("--via-covariance must be positive".into()));
    }
    let (inputs, points, ms) = match &file.model {
        StoredModel::Kmp { .. } => adapt_kmp(&file.to_kmp()?, &query, args)?,
        StoredModel::Promp { .. } => adapt_promp(&file.to_promp()?, &query, args)?,
        StoredModel::Gmm { .. } => return Err(Failure::Config("adapt needs a kmp or promp model".into())),
    };
    let n = points.len();
    let traj = Trajectory::new(inputs, points)?;
    let out = args.file.clone().unwrap_or_else(|| "trajectory.csv".into());
    sink.put(&out, &traj.to_csv(0))?;
    Ok(json!({
        "command": "adapt",
        "model": file.kind(),
        "query": query.name(),
        "points": n,
        "total_ms": ms,
        "per_point_ms": ms / n as f64,
        "file": out,
    }))
}

pub fn bench(seed: u64, args: &BenchArgs, sink: &mut Sink) -> Outcome {
    let cfg = SweepConfig {
        sizes: args.sizes.clone(),
        reps: args.reps,
        output_dim: args.output_dim,
        lambda: args.lambda,
        length_scale: args.length_scale,
        seed,
        ..SweepConfig::default()
    };
    let report = complexity_sweep(&cfg)?;
    let mut value = serde_json::to_value(&report)?;
    value
        .as_object_mut()
        .expect("report is an object")
        .insert("schema".into(), json!(1));
    sink.put_volatile("bench.json", &(serde_json::to_string_pretty(&value)? + "\n"))?;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| json!({ "n": r.n, "classical_ms": r.classical_ms.median, "ns_ms": r.ns_ms.median }))
        .collect();
    Ok(json!({
        "command": "bench",
        "rows": rows,
        "classical_slope": report.classical_slope,
        "ns_slope": report.ns_slope,
        "file": "bench.json",
    }))
}

/// Runs an experiment and writes its reports. Returns the summary and the
/// number of trials that exhausted their budget.
pub fn experiment(seed: u64, args: &ExperimentArgs, sink: &mut Sink) -> Result<(Value, usize, usize), Failure> {
    let demos = match (&args.data, args.which) {
        (Some(p), _) => read_demos(p)?,
        (None, Which::Letter) => letter_a(&LetterConfig::default(), seed)?,
        (None, Which::Handover) => handover(&HandoverConfig::default(), seed)?,
    };
    let (report, dir) = match args.which {
        Which::Letter => {
            let d = LetterExperimentConfig::default();
            let cfg = LetterExperimentConfig {
                trials: args.trials.unwrap_or(d.trials),
                seed,
                lambda: args.lambda.unwrap_or(d.lambda),
                length_scale: args.length_scale.unwrap_or(d.length_scale),
                components: args.components.unwrap_or(d.components),
                basis: args.basis.unwrap_or(d.basis),
                ref_points: args.ref_points.unwrap_or(d.ref_points),
                budget: args.budget.unwrap_or(d.budget),
                xi_range: args.xi_range.unwrap_or(d.xi_range),
                two_via: !args.one_via_only,
                jobs: args.jobs,
                ..d
            };
            (run_letter_experiment(&demos, &cfg)?, "experiment1")
        }
        Which::Handover => {
            if args.basis.is_some() || args.one_via_only {
                return Err(Failure::Config(
                    "--basis and --one-via-only apply to experiment 1 only".into(),
                ));
            }
            let d = HandoverExperimentConfig::default();
            let cfg = HandoverExperimentConfig {
                trials: args.trials.unwrap_or(d.trials),
                seed,
                lambda: args.lambda.unwrap_or(d.lambda),
                length_scale: args.length_scale.unwrap_or(d.length_scale),
                components: args.components.unwrap_or(d.components),
                ref_points: args.ref_points.unwrap_or(d.ref_points),
                budget: args.budget.unwrap_or(d.budget),
                xi_range: args.xi_range.unwrap_or(d.xi_range),
                jobs: args.jobs,
                ..d
            };
            (run_handover_experiment(&demos, &cfg)?, "experiment2")
        }
    };
    for (rel, content) in report.deterministic_files()? {
        sink.put(&format!("{dir}/{rel}"), &content)?;
    }
    let (rel, timing) = report.timing_file()?;
    sink.put_volatile(&format!("{dir}/{rel}"), &timing)?;

    let mut rates = Vec::new();
    for case in report.cases() {
        for m in report.methods(case) {
            rates.push(json!({ "case": case, "method": m, "success_rate": report.success_rate(case, m) }));
        }
    }
    let summary = json!({
        "command": "experiment",
        "experiment": report.experiment,
        "seed": seed,
        "success": rates,
        "table": report.table(),
        "dir": dir,
    });
    let failed = report.records.iter().filter(|r| !r.success).count();
    Ok((summary, failed, report.records.len()))
}
