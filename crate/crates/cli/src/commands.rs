//! One function per subcommand. Each returns the finished report or a
//! [`Failure`] carrying whatever partial report applies.

use std::path::Path;
use std::time::Instant;

use cts_core::channels::random_pure_vector;
use cts_core::linkprod::{contract, plan_contraction};
use cts_core::processes::{validate_by_sampling, validate_process, validate_with_ancillas};
use cts_core::protocols::{protocol_network, run_protocol, RunOptions, DEFAULT_MAX_DIM};
use cts_core::teleport::teleport_state_demo;
use cts_core::Error;
use serde_json::{json, Map, Value};

use crate::scenario::{parse_process, parse_scenario, read, Scenario};
use crate::{Cli, Failure, Outcome, EXIT_CHECK_FAILED, EXIT_PASS};

fn max_dim(cli: &Cli) -> usize {
    cli.max_dim.unwrap_or(DEFAULT_MAX_DIM)
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn scenario_name(s: &Scenario, path: &Path) -> String {
    s.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
    })
}

fn load(cli: &Cli, path: &Path) -> Result<Scenario, Failure> {
    let mut s = parse_scenario(&read(path)?)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(tol) = cli.tol {
        s.tol = tol;
    }
    Ok(s)
}

fn finish(mut report: Map<String, Value>, passed: bool, timings: Value) -> Outcome {
    report.insert("passed".into(), json!(passed));
    report.insert("timings".into(), timings);
    Outcome {
        report: Value::Object(report),
        exit_code: if passed { EXIT_PASS } else { EXIT_CHECK_FAILED },
        write_to: None,
    }
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m
}

pub fn run(cli: &Cli, path: &Path) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let s = load(cli, path)?;
    let mut report = header("run");
    report.insert("scenario".into(), json!(scenario_name(&s, path)));
    report.insert("tol".into(), json!(s.tol));
    report.insert("seed".into(), json!(s.seed));
    report.insert("max_dim".into(), json!(max_dim(cli)));

    let (built, spec) = s.build()?;
    let opts = RunOptions {
        max_dim: max_dim(cli),
        indefinite_order: built.indefinite_order,
    };
    let result = match run_protocol(&built.w, &spec, &opts) {
        Ok(r) => r,
        Err(e @ Error::ContractTooLarge { .. }) => {
            // show the plan that was refused
            if let Ok(plan) = protocol_network(&built.w, &spec).and_then(|n| plan_contraction(&n)) {
                report.insert("plan".into(), json!(plan));
            }
            return Err(Failure {
                error: e.into(),
                extra: report,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let passed = result.passed(s.tol);
    if let Value::Object(fields) = json!(result) {
        report.extend(fields);
    }
    let mut out = finish(report, passed, json!({ "total_ms": ms(start) }));
    out.write_to = s.output.clone();
    Ok(out)
}

pub fn validate(cli: &Cli, path: &Path, samples: usize, ancilla_dim: Option<usize>) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let input = parse_process(&read(path)?)?;
    let tol = cli.tol.or(input.tol).unwrap_or(1e-9);
    let seed = cli.seed.or(input.seed).unwrap_or(0);
    let built = input.process.build()?;
    let w = &built.w;
    if w.op().dim() > max_dim(cli) {
        return Err(Error::ContractTooLarge {
            peak: w.op().dim(),
            cap: max_dim(cli),
        }
        .into());
    }
    if ancilla_dim == Some(0) {
        return Err(Error::BadDimension("ancilla dimension must be positive".into()).into());
    }

    let mut report = header("validate");
    report.insert("process".into(), json!(path.display().to_string()));
    report.insert("parties".into(), json!(w.layout()));
    report.insert("tol".into(), json!(tol));
    report.insert("seed".into(), json!(seed));
    report.insert("samples".into(), json!(samples));

    let t = Instant::now();
    let validity = validate_process(w, tol);
    let validity_ms = ms(t);
    let t = Instant::now();
    let sampling = validate_by_sampling(w, samples, seed, tol);
    let sampling_ms = ms(t);
    let mut passed = validity.valid && sampling.passed;
    report.insert("validity".into(), json!(validity));
    report.insert("sampling".into(), json!(sampling));
    if let Some(k) = ancilla_dim {
        let dims = vec![k; w.layout().len()];
        let anc = validate_with_ancillas(w, &dims, samples, seed, tol);
        passed &= anc.passed;
        report.insert("ancilla_sampling".into(), json!(anc));
    }
    Ok(finish(
        report,
        passed,
        json!({ "validity_ms": validity_ms, "sampling_ms": sampling_ms, "total_ms": ms(start) }),
    ))
}

pub fn teleport_demo(cli: &Cli, dim: usize) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let seed = cli.seed.unwrap_or(0);
    let tol = cli.tol.unwrap_or(1e-9);
    if dim == 0 {
        return Err(Error::BadDimension("teleportation needs --dim >= 1".into()).into());
    }
    let phi = random_pure_vector(dim, seed)?;
    let demo = teleport_state_demo(dim, &phi)?;
    eprintln!("{:>4} {:>4} {:>14} {:>14}", "n", "m", "probability", "fidelity");
    for o in &demo.outcomes {
        eprintln!("{:>4} {:>4} {:>14.12} {:>14.12}", o.n, o.m, o.probability, o.fidelity);
    }
    let passed = demo.max_probability_error <= tol && (1.0 - demo.min_fidelity).abs() <= tol;
    let mut report = header("teleport-demo");
    report.insert("dim".into(), json!(dim));
    report.insert("seed".into(), json!(seed));
    report.insert("tol".into(), json!(tol));
    report.insert("state".into(), json!(phi.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()));
    report.insert("expected_probability".into(), json!(1.0 / (dim * dim) as f64));
    if let Value::Object(fields) = json!(demo) {
        report.extend(fields);
    }
    Ok(finish(report, passed, json!({ "total_ms": ms(start) })))
}

pub fn bench(cli: &Cli, path: &Path) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let s = load(cli, path)?;
    let (built, spec) = s.build()?;
    let cap = max_dim(cli);
    let net = protocol_network(&built.w, &spec)?;
    let t = Instant::now();
    let plan = plan_contraction(&net)?;
    let plan_ms = ms(t);

    let mut report = header("bench");
    report.insert("scenario".into(), json!(scenario_name(&s, path)));
    report.insert("factors".into(), json!(net.len()));
    report.insert(
        "factor_dims".into(),
        json!(net.factors().iter().map(|f| f.dim()).collect::<Vec<_>>()),
    );
    report.insert("max_dim".into(), json!(cap));
    report.insert("peak_dim".into(), json!(plan.peak_dim));
    report.insert("plan".into(), json!(plan));
    let within = plan.peak_dim <= cap;
    report.insert("within_cap".into(), json!(within));
    if !within {
        return Err(Failure {
            error: Error::ContractTooLarge {
                peak: plan.peak_dim,
                cap,
            }
            .into(),
            extra: report,
        });
    }
    let t = Instant::now();
    let value = contract(&net, Some(&plan.order()))?;
    let contract_ms = ms(t);
    let v = value.as_scalar().expect("closed network");
    report.insert("value".into(), json!([v.re, v.im]));
    Ok(finish(
        report,
        true,
        json!({ "plan_ms": plan_ms, "contract_ms": contract_ms, "total_ms": ms(start) }),
    ))
}
