//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use cts_core::channels::{
    random_cptp, random_hermitian, random_instrument, random_pure_vector, random_state, random_unitary, ChoiOperator,
    Instrument,
};
use cts_core::linkprod::link;
use cts_core::processes::{
    build_channel_comb, build_quantum_switch, build_state_process, validate_by_sampling, validate_process,
    validate_with_ancillas, ProcessMatrix,
};
use cts_core::protocols::{build_v, run_protocol, PartyMode, ProtocolSpec, RunOptions, DEFAULT_MAX_DIM};
use cts_core::teleport::{bell_state, teleport_state_demo};
use cts_core::{Error, LabeledOperator, SpaceLabel, C64};
use ndarray::Array2;

use PartyMode::{Deterministic as Det, Direct, FullPostSelect as Full, FuturePostSelect as Fut, PastPostSelect as Past};

const SETS: u64 = 20;

struct Line {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn criterion(id: u32, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (ok, mut detail) = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    if !in_time {
        detail.push_str(&format!("; over the {:?} budget", budget.unwrap()));
    }
    let line = Line {
        id,
        name,
        passed: ok && in_time,
        detail,
        elapsed,
    };
    println!(
        "criterion {:>2} [{}] {}: {} ({:.2}s)",
        line.id,
        if line.passed { "PASS" } else { "FAIL" },
        line.name,
        line.detail,
        line.elapsed.as_secs_f64()
    );
    line
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn basis0(d: usize) -> Array2<C64> {
    let mut m = Array2::zeros((d, d));
    m[[0, 0]] = C64::new(1.0, 0.0);
    m
}

// ---- corpus -------------------------------------------------------------

struct Case {
    kind: &'static str,
    w: ProcessMatrix,
    /// Kraus operators per party and outcome, when known, for the oracle.
    kraus: Option<Vec<Vec<Array2<C64>>>>,
    instruments: Vec<Instrument>,
    comb_channel: Option<ChoiOperator>,
}

fn state_case(k: u64) -> Case {
    let rho = random_state(&[SpaceLabel::new("s", 2)], 100 + k).unwrap();
    let w = build_state_process("A", rho.data(), 2).unwrap();
    let p = &w.layout().parties()[0];
    let instruments = vec![random_instrument(&p.inputs, &p.outputs, 2, 200 + k).unwrap()];
    Case {
        kind: "state",
        w,
        kraus: None,
        instruments,
        comb_channel: None,
    }
}

fn comb_case(k: u64) -> Case {
    let rho = random_state(&[SpaceLabel::new("s", 2)], 300 + k).unwrap();
    let chan = random_cptp(&[SpaceLabel::new("x", 2)], &[SpaceLabel::new("y", 2)], 400 + k).unwrap();
    let w = build_channel_comb("A", "B", rho.data(), &chan, 2).unwrap();
    let instruments = w
        .layout()
        .parties()
        .iter()
        .enumerate()
        .map(|(j, p)| random_instrument(&p.inputs, &p.outputs, 2, 500 + 10 * k + j as u64).unwrap())
        .collect();
    Case {
        kind: "comb",
        w,
        kraus: None,
        instruments,
        comb_channel: Some(chan),
    }
}

/// Two-outcome instrument `{cos θ U, sin θ V}` with random unitaries.
fn unitary_pair(seed: u64) -> Vec<Array2<C64>> {
    let theta = (splitmix(seed) % 1000) as f64 / 1000.0 * std::f64::consts::FRAC_PI_2;
    let u = random_unitary(2, seed).unwrap().mapv(|z| z * theta.cos());
    let v = random_unitary(2, seed + 1).unwrap().mapv(|z| z * theta.sin());
    vec![u, v]
}

fn switch_case(k: u64) -> Case {
    let plus = Array2::from_elem((2, 2), C64::new(0.5, 0.0));
    let w = build_quantum_switch(2, &plus).unwrap();
    let ps = w.layout().parties();
    let ka = unitary_pair(600 + 2 * k);
    let kb = unitary_pair(700 + 2 * k);
    let inst = |p: &cts_core::processes::Party, ks: &[Array2<C64>]| {
        let sets: Vec<Vec<Array2<C64>>> = ks.iter().map(|m| vec![m.clone()]).collect();
        Instrument::from_kraus_sets(&sets, &p.inputs, &p.outputs).unwrap()
    };
    let f = random_instrument(&ps[2].inputs, &ps[2].outputs, 2, 800 + k).unwrap();
    let instruments = vec![inst(&ps[0], &ka), inst(&ps[1], &kb), f];
    Case {
        kind: "switch",
        w,
        kraus: Some(vec![ka, kb]),
        instruments,
        comb_channel: None,
    }
}

fn corpus(k: u64) -> Vec<Case> {
    vec![state_case(k), comb_case(k), switch_case(k)]
}

/// Outcome probabilities computed without the process matrix: sequential
/// channel application for states and combs, state vectors for the switch.
fn oracle(case: &Case, tuple: &[usize]) -> f64 {
    let el = |j: usize| &case.instruments[j].elements()[tuple[j]];
    match case.kind {
        "state" => {
            let p = &case.w.layout().parties()[0];
            let rho = case.w.op().partial_trace(&p.output_names()).unwrap().scale(C64::new(0.5, 0.0));
            el(0).apply(&rho).unwrap().trace().re
        }
        "comb" => {
            let ps = case.w.layout().parties();
            let a_out = &ps[0].outputs[0].name;
            let b_in = &ps[1].inputs[0].name;
            let w = case.w.op();
            // recover ρ from W = ρ ⊗ C ⊗ 𝟙 by tracing the rest (Tr C = 2, Tr 𝟙 = 2)
            let rho = w
                .partial_trace(&[a_out.as_str(), b_in.as_str(), ps[1].outputs[0].name.as_str()])
                .unwrap()
                .scale(C64::new(0.25, 0.0));
            let chan = case.comb_channel.as_ref().unwrap();
            let chan = chan
                .relabel_many(&[
                    (chan.in_labels()[0].as_str(), a_out.as_str()),
                    (chan.out_labels()[0].as_str(), b_in.as_str()),
                ])
                .unwrap();
            let after_a = el(0).apply(&rho).unwrap();
            let after_c = chan.apply(&after_a).unwrap();
            el(1).apply(&after_c).unwrap().trace().re
        }
        "switch" => {
            let ks = case.kraus.as_ref().unwrap();
            let (ka, kb) = (&ks[0][tuple[0]], &ks[1][tuple[1]]);
            let t0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
            let apply = |m: &Array2<C64>, v: &[C64]| -> Vec<C64> {
                (0..2).map(|r| (0..2).map(|c| m[[r, c]] * v[c]).sum()).collect()
            };
            let ab = apply(kb, &apply(ka, &t0)); // A then B
            let ba = apply(ka, &apply(kb, &t0));
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let v: Vec<C64> = ab.iter().chain(&ba).map(|z| z * s).collect();
            // F's element is the Choi operator Eᵀ of its effect
            let e = el(2).op().squeeze().transpose();
            let ed = e.data();
            let mut p = C64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    p += v[r].conj() * ed[[r, c]] * v[c];
                }
            }
            p.re
        }
        _ => unreachable!(),
    }
}

fn expected_factor(case: &Case, modes: &[PartyMode]) -> f64 {
    let mut f = 1.0;
    for (p, m) in case.w.layout().parties().iter().zip(modes) {
        let (i, o) = ((p.d_in() * p.d_in()) as f64, (p.d_out() * p.d_out()) as f64);
        f *= match m {
            Full => 1.0 / (i * o),
            Past => 1.0 / i,
            Fut => 1.0 / o,
            Direct | Det => 1.0,
        };
    }
    f
}

/// Runs the protocol and compares raw, normalised and oracle values.
fn equivalence(case: &Case, modes: &[PartyMode], tol: f64) -> Result<f64, String> {
    let spec = ProtocolSpec::new(case.w.layout().clone(), modes.to_vec(), case.instruments.clone())
        .map_err(|e| e.to_string())?;
    let r = run_protocol(&case.w, &spec, &RunOptions::default()).map_err(|e| e.to_string())?;
    let f = expected_factor(case, modes);
    if (r.factor_analytic - f).abs() > 1e-15 {
        return Err(format!("{}: factor {} instead of {f}", case.kind, r.factor_analytic));
    }
    let mut worst: f64 = 0.0;
    for (key, &raw) in &r.raw {
        let tuple: Vec<usize> = key.split(',').map(|s| s.parse().unwrap()).collect();
        let truth = oracle(case, &tuple);
        let direct = r.direct[key];
        worst = worst.max((raw - f * truth).abs()).max((direct - truth).abs());
        worst = worst.max((r.normalized[key] - truth).abs());
    }
    if worst > tol {
        return Err(format!("{} {modes:?}: error {worst:.3e}", case.kind));
    }
    Ok(worst)
}

fn equivalence_suite(assignments: impl Fn(&str) -> Vec<Vec<PartyMode>>) -> (bool, String) {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for k in 0..SETS {
        for case in corpus(k) {
            for modes in assignments(case.kind) {
                match equivalence(&case, &modes, 1e-9) {
                    Ok(e) => worst = worst.max(e),
                    Err(msg) => return (false, msg),
                }
                runs += 1;
            }
        }
    }
    (true, format!("{runs} runs over {SETS} instrument sets, worst per-outcome error {worst:.2e}"))
}

// ---- criteria -----------------------------------------------------------

fn c1() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        let basis: Vec<Vec<C64>> = (0..d * d).map(|f| bell_state(d, f / d, f % d).unwrap()).collect();
        for (a, va) in basis.iter().enumerate() {
            for (b, vb) in basis.iter().enumerate() {
                let g: C64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(want, 0.0)).norm());
            }
        }
    }
    (worst <= 1e-12, format!("d = 2..5, max |G - 1| = {worst:.2e}"))
}

fn c2() -> (bool, String) {
    let (mut perr, mut ferr): (f64, f64) = (0.0, 0.0);
    for d in [2usize, 3] {
        for seed in 0..20 {
            let phi = random_pure_vector(d, 1000 + seed).unwrap();
            let r = teleport_state_demo(d, &phi).unwrap();
            for o in &r.outcomes {
                perr = perr.max((o.probability - 1.0 / (d * d) as f64).abs());
                ferr = ferr.max((o.fidelity - 1.0).abs());
            }
        }
    }
    (
        perr <= 1e-10 && ferr <= 1e-10,
        format!("d = 2, 3 x 20 states, probability error {perr:.2e}, fidelity error {ferr:.2e}"),
    )
}

fn c3() -> (bool, String) {
    equivalence_suite(|kind| match kind {
        "state" => vec![vec![Full]],
        "comb" => vec![vec![Full, Full]],
        _ => vec![vec![Full, Full, Direct]],
    })
}

fn c4() -> (bool, String) {
    equivalence_suite(|kind| match kind {
        "state" => vec![vec![Past], vec![Fut]],
        "comb" => vec![
            vec![Past, Past],
            vec![Past, Fut],
            vec![Fut, Past],
            vec![Fut, Fut],
            vec![Full, Past],
            vec![Fut, Direct],
        ],
        _ => vec![
            vec![Past, Past, Direct],
            vec![Past, Fut, Direct],
            vec![Fut, Past, Direct],
            vec![Fut, Fut, Direct],
            vec![Full, Fut, Direct],
        ],
    })
}

fn c5() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for k in 0..SETS {
        let case = comb_case(k);
        for modes in [vec![Det, Det], vec![Det, Direct], vec![Direct, Det]] {
            let spec = ProtocolSpec::new(case.w.layout().clone(), modes.clone(), case.instruments.clone()).unwrap();
            let r = run_protocol(&case.w, &spec, &RunOptions::default()).unwrap();
            if r.factor_analytic != 1.0 || (r.factor_empirical - 1.0).abs() > 1e-9 {
                return (false, format!("{modes:?}: factor {} / {}", r.factor_analytic, r.factor_empirical));
            }
            for (key, &raw) in &r.raw {
                let tuple: Vec<usize> = key.split(',').map(|s| s.parse().unwrap()).collect();
                worst = worst.max((raw - oracle(&case, &tuple)).abs()).max(r.max_abs_error);
            }
            runs += 1;
        }
    }
    (worst <= 1e-9, format!("{runs} comb runs, branch sum vs direct error {worst:.2e}"))
}

/// Partial post-selection assignments over one or two parties whose dense
/// extended process fits under the cap, plus those that do not.
fn v_assignments(w: &ProcessMatrix) -> (Vec<Vec<PartyMode>>, Vec<Vec<PartyMode>>) {
    let n = w.layout().len();
    let mut all = Vec::new();
    for i in 0..n {
        for mi in [Past, Fut] {
            let mut m = vec![Direct; n];
            m[i] = mi;
            all.push(m.clone());
            for j in i + 1..n {
                for mj in [Past, Fut] {
                    let mut m2 = m.clone();
                    m2[j] = mj;
                    all.push(m2);
                }
            }
        }
    }
    let dim = |m: &[PartyMode]| -> usize {
        let mut d = w.op().dim();
        for (p, mode) in w.layout().parties().iter().zip(m) {
            d *= match mode {
                Past => p.d_out().pow(4),
                Fut => p.d_in().pow(4),
                _ => 1,
            };
        }
        d
    };
    all.into_iter().partition(|m| dim(m) <= DEFAULT_MAX_DIM)
}

fn trivial_instruments(w: &ProcessMatrix) -> Vec<Instrument> {
    w.layout()
        .parties()
        .iter()
        .map(|p| random_instrument(&p.inputs, &p.outputs, 1, 0).unwrap())
        .collect()
}

fn c6() -> (bool, String) {
    let mut checked = 0;
    let mut skipped = Vec::new();
    let (mut psd, mut subset, mut trace, mut sampled): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for case in corpus(0) {
        let (fit, over) = v_assignments(&case.w);
        skipped.extend(over.iter().map(|m| format!("{} {m:?}", case.kind)));
        for modes in fit {
            let spec = ProtocolSpec::new(case.w.layout().clone(), modes.clone(), trivial_instruments(&case.w)).unwrap();
            let v = build_v(&case.w, &spec, DEFAULT_MAX_DIM).unwrap();
            let rep = validate_process(&v, 1e-9);
            let s = validate_by_sampling(&v, 50, 77, 1e-9);
            psd = psd.min(rep.psd.min_eigenvalue);
            trace = trace.max(rep.trace.deviation / rep.trace.expected);
            subset = subset.max(rep.subsets.iter().map(|c| c.max_abs).fold(0.0, f64::max));
            sampled = sampled.max(s.max_deviation);
            if !rep.valid || !s.passed {
                return (false, format!("{} {modes:?}: {:?}, sampling {:.2e}", case.kind, rep.failures, s.max_deviation));
            }
            checked += 1;
        }
    }
    // the over-cap assignments must be refused, not silently truncated
    let case = switch_case(0);
    let (_, over) = v_assignments(&case.w);
    let refused = over.iter().all(|m| {
        let spec = ProtocolSpec::new(case.w.layout().clone(), m.clone(), trivial_instruments(&case.w)).unwrap();
        matches!(build_v(&case.w, &spec, DEFAULT_MAX_DIM), Err(Error::ContractTooLarge { .. }))
    });
    (
        refused,
        format!(
            "{checked} assignments valid (min eigenvalue {psd:.1e}, trace {trace:.1e}, subsets {subset:.1e}, \
             50-sample {sampled:.1e}); {} switch assignments exceed the {DEFAULT_MAX_DIM} cap and are refused",
            skipped.len()
        ),
    )
}

/// `W + ε · T` where `T` lives only in the subspace forbidden for party `j`
/// on its own: depolarised on every other party and residual on `O_j`.
fn violator(w: &ProcessMatrix, j: usize, eps: f64, seed: u64) -> ProcessMatrix {
    let labels = w.op().labels().to_vec();
    let h = random_hermitian(&labels, seed).unwrap();
    let ps = w.layout().parties();
    let others: Vec<&str> = ps
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .flat_map(|(_, p)| p.labels().map(|l| l.name.as_str()))
        .collect();
    let mut t = if others.is_empty() { h } else { h.depolarize_on(&others).unwrap() };
    t = t.residual_on(&ps[j].output_names()).unwrap();
    w.with_op(w.op().add(&t.scale(C64::new(eps, 0.0))).unwrap()).unwrap()
}

fn c7() -> (bool, String) {
    let mut valid: Vec<(String, ProcessMatrix)> = corpus(1).into_iter().map(|c| (c.kind.to_string(), c.w)).collect();
    let st = state_case(2).w;
    for m in [Past, Fut] {
        let spec = ProtocolSpec::new(st.layout().clone(), vec![m], trivial_instruments(&st)).unwrap();
        valid.push((format!("V(state, {m:?})"), build_v(&st, &spec, DEFAULT_MAX_DIM).unwrap()));
    }
    let cb = comb_case(2).w;
    let spec = ProtocolSpec::new(cb.layout().clone(), vec![Past, Direct], trivial_instruments(&cb)).unwrap();
    valid.push(("V(comb, P)".into(), build_v(&cb, &spec, DEFAULT_MAX_DIM).unwrap()));

    let mut anc_worst: f64 = 0.0;
    for (name, w) in &valid {
        if !validate_process(w, 1e-9).valid {
            continue;
        }
        let dims = vec![2; w.layout().len()];
        let r = validate_with_ancillas(w, &dims, 50, 31, 1e-9);
        anc_worst = anc_worst.max(r.max_deviation);
        if !r.passed {
            return (false, format!("{name} passes the projector check but not ancilla sampling"));
        }
    }

    let mut violators = 0;
    let mut weakest = f64::INFINITY;
    for (name, w) in valid.iter().take(3) {
        for (j, p) in w.layout().parties().iter().enumerate() {
            if p.d_out() == 1 {
                continue; // nothing to violate on a trivial output
            }
            let bad = violator(w, j, 0.1, 900 + j as u64);
            let rep = validate_process(&bad, 1e-9);
            if !rep.subsets.iter().any(|s| !s.passed && s.parties == [p.name.clone()]) {
                return (false, format!("{name}: violator for {} not flagged by the projector check", p.name));
            }
            let mut found = 0.0;
            for batch in 0..4 {
                let s = validate_by_sampling(&bad, 50, 5000 + batch, 1e-9);
                found = s.max_deviation;
                if found > 1e-3 {
                    break;
                }
            }
            if found <= 1e-3 {
                return (false, format!("{name}: violator for {} not detected in 200 samples", p.name));
            }
            weakest = weakest.min(found);
            violators += 1;
        }
    }
    (
        true,
        format!(
            "{} valid processes pass 50 ancilla samples (worst {anc_worst:.1e}); \
             {violators} violators detected, smallest deviation {weakest:.2e}",
            valid.len()
        ),
    )
}

fn random_op(labels: &[SpaceLabel], seed: u64) -> LabeledOperator {
    random_hermitian(labels, seed).unwrap()
}

fn c8() -> (bool, String) {
    let names = ["a", "b", "c", "d", "e", "f"];
    let (mut comm, mut assoc, mut tensor): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..100u64 {
        let r = splitmix(k);
        let dims: Vec<usize> = (0..6).map(|i| 1 + ((r >> (4 * i)) % 3) as usize).collect();
        let pick = |mask: u64| -> Vec<SpaceLabel> {
            (0..6)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| SpaceLabel::new(names[i], dims[i]))
                .collect()
        };
        let (ma, mb) = (splitmix(k + 1000) & 0x1f, splitmix(k + 2000) & 0x1f);
        let a = random_op(&pick(ma), 3 * k);
        let b = random_op(&pick(mb), 3 * k + 1);
        comm = comm.max(link(&a, &b).unwrap().max_abs_diff(&link(&b, &a).unwrap()).unwrap());

        // chain with every label on at most two operators
        let owner: Vec<u64> = (0..6).map(|i| splitmix(k * 7 + i) % 6).collect();
        let on = |op: u64| -> Vec<SpaceLabel> {
            const SETS: [&[u64]; 6] = [&[0], &[1], &[2], &[0, 1], &[1, 2], &[0, 2]];
            (0..6)
                .filter(|&i| SETS[owner[i] as usize].contains(&op))
                .map(|i| SpaceLabel::new(names[i], dims[i]))
                .collect()
        };
        let (x, y, z) = (random_op(&on(0), k), random_op(&on(1), k + 1), random_op(&on(2), k + 2));
        let l = link(&link(&x, &y).unwrap(), &z).unwrap();
        let rr = link(&x, &link(&y, &z).unwrap()).unwrap();
        assoc = assoc.max(l.max_abs_diff(&rr).unwrap());

        let p = random_op(&pick(0b000111), k + 5);
        let q = random_op(&pick(0b111000), k + 6);
        tensor = tensor.max(link(&p, &q).unwrap().max_abs_diff(&p.tensor_product(&q).unwrap()).unwrap());
    }
    (
        comm <= 1e-12 && assoc <= 1e-10 && tensor <= 1e-12,
        format!("100 instances each: commutativity {comm:.1e}, associativity {assoc:.1e}, disjoint {tensor:.1e}"),
    )
}

fn c9() -> (bool, String) {
    let mut outputs: Vec<(String, ProcessMatrix)> = Vec::new();
    for d in [2usize, 3] {
        for out in [1usize, 2, 3] {
            let rho = random_state(&[SpaceLabel::new("s", d)], d as u64).unwrap();
            outputs.push((format!("state d={d} out={out}"), build_state_process("A", rho.data(), out).unwrap()));
        }
        let chan = random_cptp(&[SpaceLabel::new("x", d)], &[SpaceLabel::new("y", 2)], 9).unwrap();
        let comb = build_channel_comb("A", "B", &basis0(d), &chan, 3).unwrap();
        outputs.push((format!("comb d={d}"), comb));
        let plus = Array2::from_elem((2, 2), C64::new(0.5, 0.0));
        outputs.push((format!("switch d={d}"), build_quantum_switch(d, &plus).unwrap()));
    }
    for case in corpus(3) {
        let (fit, _) = v_assignments(&case.w);
        for m in fit.into_iter().filter(|m| m.iter().filter(|x| **x != Direct).count() == 1) {
            let spec = ProtocolSpec::new(case.w.layout().clone(), m.clone(), trivial_instruments(&case.w)).unwrap();
            outputs.push((format!("V({}, {m:?})", case.kind), build_v(&case.w, &spec, DEFAULT_MAX_DIM).unwrap()));
        }
    }
    let mut worst: f64 = 0.0;
    for (name, w) in &outputs {
        let expected = w.layout().total_out_dim() as f64;
        let rel = (w.op().trace().re - expected).abs() / expected;
        worst = worst.max(rel);
        if rel > 1e-9 || w.op().trace().im.abs() > 1e-9 * expected {
            return (false, format!("{name}: trace {} instead of {expected}", w.op().trace()));
        }
    }
    (true, format!("{} builder outputs, worst relative deviation {worst:.1e}", outputs.len()))
}

fn scenarios() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn stripped_report(path: &PathBuf) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cts"))
        .arg("run")
        .arg(path)
        .env_remove("CTS_MAX_DIM")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    (out.status.code().unwrap_or(-1), cts_cli::strip_timings(&v).to_string())
}

fn c10() -> (bool, String) {
    let files = scenarios();
    for f in &files {
        let (c1, a) = stripped_report(f);
        let (c2, b) = stripped_report(f);
        if c1 != 0 || c2 != 0 || a != b {
            return (false, format!("{}: exit {c1}/{c2}, identical {}", f.display(), a == b));
        }
    }
    (files.len() >= 6, format!("{} bundled scenarios, two runs each, byte-identical", files.len()))
}

fn main() {
    let secs = Duration::from_secs;
    let lines = [
        criterion(1, "Bell basis orthonormality", Some(secs(1)), c1),
        criterion(2, "teleportation demo", Some(secs(5)), c2),
        criterion(3, "fully post-selected equivalence", Some(secs(120)), c3),
        criterion(4, "partially post-selected equivalence", Some(secs(120)), c4),
        criterion(5, "deterministic branch sum", Some(secs(120)), c5),
        criterion(6, "extended process validity (assignments within the size cap only)", Some(secs(120)), c6),
        criterion(7, "ancilla-free sufficiency", None, c7),
        criterion(8, "link product algebra", None, c8),
        criterion(9, "trace rule", None, c9),
        criterion(10, "determinism", None, c10),
    ];
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
