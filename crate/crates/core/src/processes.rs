//! Process matrices, the probability rule and validity certification.
//!
//! Probabilities follow `p = Tr[Wᵀ · (M₁ ⊗ … ⊗ M_N)]`, which is the full link
//! product of `W` with the parties' Choi operators. A valid process is
//! positive, has trace `∏_j d_{O_j}` and satisfies
//! `_{∏_{j∈R}[1−O_j] ∏_{k∉R} I_k O_k} W = 0` for every non-empty subset `R`
//! of parties.

use std::collections::HashSet;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{random_cptp, random_pure_vector, ChoiOperator};
use crate::error::{Error, Result};
use crate::linkprod::{contract, link, FactorNetwork};
use crate::tensors::{fmt_labels, hermitian_eigenvalues, total_dim, LabeledOperator, SpaceLabel, C64};

/// One party: the spaces it receives from and returns to the process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub name: String,
    pub inputs: Vec<SpaceLabel>,
    pub outputs: Vec<SpaceLabel>,
}

impl Party {
    pub fn new(name: impl Into<String>, input: SpaceLabel, output: SpaceLabel) -> Self {
        Self {
            name: name.into(),
            inputs: vec![input],
            outputs: vec![output],
        }
    }

    pub fn d_in(&self) -> usize {
        total_dim(&self.inputs)
    }

    pub fn d_out(&self) -> usize {
        total_dim(&self.outputs)
    }

    pub fn labels(&self) -> impl Iterator<Item = &SpaceLabel> {
        self.inputs.iter().chain(&self.outputs)
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.outputs.iter().map(|l| l.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Party>", into = "Vec<Party>")]
pub struct PartyLayout {
    parties: Vec<Party>,
}

impl TryFrom<Vec<Party>> for PartyLayout {
    type Error = Error;
    fn try_from(parties: Vec<Party>) -> Result<Self> {
        Self::new(parties)
    }
}

impl From<PartyLayout> for Vec<Party> {
    fn from(l: PartyLayout) -> Self {
        l.parties
    }
}

impl PartyLayout {
    pub fn new(parties: Vec<Party>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut labels = HashSet::new();
        for p in &parties {
            if p.name.is_empty() || !names.insert(p.name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate or empty party name `{}`", p.name)));
            }
            for l in p.labels() {
                if l.dim == 0 {
                    return Err(Error::BadDimension(format!("label `{}` has dimension 0", l.name)));
                }
                if !labels.insert(l.name.as_str()) {
                    return Err(Error::LabelCollision(l.name.clone()));
                }
            }
        }
        Ok(Self { parties })
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn party(&self, name: &str) -> Option<&Party> {
        self.parties.iter().find(|p| p.name == name)
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    /// `∏_j d_{O_j}`.
    pub fn total_out_dim(&self) -> usize {
        self.parties.iter().map(Party::d_out).product()
    }

    pub fn all_labels(&self) -> Vec<SpaceLabel> {
        self.parties.iter().flat_map(|p| p.labels().cloned()).collect()
    }
}

/// A process matrix over the input and output spaces of a party layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    op: LabeledOperator,
    layout: PartyLayout,
}

impl ProcessMatrix {
    pub fn new(op: LabeledOperator, layout: PartyLayout) -> Result<Self> {
        let mut want = layout.all_labels();
        let mut have = op.labels().to_vec();
        want.sort();
        have.sort();
        if want != have {
            return Err(Error::LabelMismatch(format!(
                "operator on {} but layout declares {}",
                fmt_labels(op.labels()),
                fmt_labels(&layout.all_labels())
            )));
        }
        Ok(Self { op, layout })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    /// Same layout, different operator.
    pub fn with_op(&self, op: LabeledOperator) -> Result<Self> {
        Self::new(op, self.layout.clone())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            op: self.op.scale(C64::new(factor, 0.0)),
            layout: self.layout.clone(),
        }
    }
}

fn significant(labels: impl IntoIterator<Item = SpaceLabel>) -> Vec<SpaceLabel> {
    let mut v: Vec<SpaceLabel> = labels.into_iter().filter(|l| l.dim != 1).collect();
    v.sort();
    v
}

pub(crate) fn check_element(party: &Party, element: &ChoiOperator) -> Result<()> {
    let want_in = significant(party.inputs.iter().cloned());
    let want_out = significant(party.outputs.iter().cloned());
    let have_in = significant(element.inputs());
    let have_out = significant(element.outputs());
    if want_in != have_in || want_out != have_out {
        return Err(Error::LabelMismatch(format!(
            "party `{}` acts {} -> {}, element acts {} -> {}",
            party.name,
            fmt_labels(&party.inputs),
            fmt_labels(&party.outputs),
            fmt_labels(&element.inputs()),
            fmt_labels(&element.outputs())
        )));
    }
    Ok(())
}

/// Joint probability `Tr[Wᵀ · ⊗_j M_j]` (complex, for diagnostics).
pub fn probability_amplitude(w: &ProcessMatrix, elements: &[ChoiOperator]) -> Result<C64> {
    let parties = w.layout.parties();
    if parties.len() != elements.len() {
        return Err(Error::LabelMismatch(format!(
            "{} elements for {} parties",
            elements.len(),
            parties.len()
        )));
    }
    for (p, e) in parties.iter().zip(elements) {
        check_element(p, e)?;
    }
    let mut factors = vec![w.op.squeeze()];
    factors.extend(elements.iter().map(|e| e.op().squeeze()));
    let value = contract(&FactorNetwork::new(factors)?, None)?;
    Ok(value.as_scalar().expect("all labels contracted"))
}

/// Joint outcome probability for one Choi operator per party, in layout
/// order. Labels of dimension one may be omitted from the elements.
pub fn probability(w: &ProcessMatrix, elements: &[ChoiOperator]) -> Result<f64> {
    probability_amplitude(w, elements).map(|z| z.re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCheck {
    /// Exact smallest eigenvalue, or a certified lower bound for large
    /// operators (see `method`).
    pub min_eigenvalue: f64,
    pub method: String,
    pub hermiticity_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub value: f64,
    pub expected: f64,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetCheck {
    pub parties: Vec<String>,
    pub max_abs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub tol: f64,
    pub psd: PsdCheck,
    pub trace: TraceCheck,
    pub subsets: Vec<SubsetCheck>,
    pub failures: Vec<String>,
    pub note: String,
}

/// Operators up to this side length get a full eigendecomposition.
const EXACT_EIGEN_LIMIT: usize = 256;

/// Lower bound on the smallest eigenvalue of a Hermitian matrix via
/// diagonally pivoted Cholesky: `H = L L† + S`, so `λ_min(H) ≥ λ_min(S)`,
/// and `λ_min(S)` is bounded with Gershgorin discs. Costs `O(n² r)` for
/// numerical rank `r`.
fn min_eigenvalue_lower_bound(h: &Array2<C64>) -> f64 {
    let n = h.nrows();
    let mut s = h.clone();
    let scale = (0..n).map(|i| s[[i, i]].re.abs()).fold(0.0, f64::max).max(1.0);
    let stop = 1e-13 * scale;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut col = vec![C64::new(0.0, 0.0); n];
    loop {
        let Some((k, &p)) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| s[[*a.1, *a.1]].re.total_cmp(&s[[*b.1, *b.1]].re))
        else {
            return 0.0;
        };
        let pivot = s[[p, p]].re;
        if pivot <= stop {
            break;
        }
        remaining.swap_remove(k);
        let root = pivot.sqrt();
        for &i in &remaining {
            col[i] = s[[i, p]] / root;
        }
        for &i in &remaining {
            let ci = col[i];
            if ci.norm_sqr() == 0.0 {
                continue;
            }
            for &j in &remaining {
                s[[i, j]] -= ci * col[j].conj();
            }
        }
    }
    let mut bound = 0.0f64;
    for &i in &remaining {
        let off: f64 = remaining
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| s[[i, j]].norm())
            .sum();
        bound = bound.min(s[[i, i]].re - off);
    }
    bound
}

fn psd_check(op: &LabeledOperator, tol: f64) -> PsdCheck {
    let hermiticity_deviation = op.hermiticity_deviation();
    let herm = op.hermitian_part();
    let (min_eigenvalue, method) = if op.dim() <= EXACT_EIGEN_LIMIT {
        let ev = hermitian_eigenvalues(herm.data());
        (ev.first().copied().unwrap_or(0.0), "eigendecomposition")
    } else {
        (min_eigenvalue_lower_bound(herm.data()), "pivoted-cholesky lower bound")
    };
    PsdCheck {
        min_eigenvalue,
        method: method.into(),
        hermiticity_deviation,
        passed: min_eigenvalue >= -tol && hermiticity_deviation <= tol,
    }
}

/// Subset-condition residual for the parties selected by `mask`.
fn subset_residual(w: &ProcessMatrix, mask: usize) -> Result<f64> {
    let parties = w.layout.parties();
    let mut traced: Vec<&str> = Vec::new();
    let mut refill = 1usize;
    for (j, p) in parties.iter().enumerate() {
        if mask & (1 << j) == 0 {
            traced.extend(p.labels().map(|l| l.name.as_str()));
            refill *= p.d_in() * p.d_out();
        } else if p.d_out() == 1 {
            // `_{[1−O]}` vanishes identically on a trivial output space
            return Ok(0.0);
        }
    }
    let mut b = w.op.partial_trace(&traced)?;
    for (j, p) in parties.iter().enumerate() {
        if mask & (1 << j) != 0 {
            b = b.residual_on(&p.output_names())?;
        }
    }
    Ok(b.max_abs() / refill as f64)
}

/// Certify positivity, trace normalisation and every subset condition.
/// Never fails; problems are listed in the report.
pub fn validate_process(w: &ProcessMatrix, tol: f64) -> ValidityReport {
    let mut failures = Vec::new();

    let psd = psd_check(&w.op, tol);
    if !psd.passed {
        failures.push(format!(
            "positivity: min eigenvalue {:.3e}, hermiticity deviation {:.3e}",
            psd.min_eigenvalue, psd.hermiticity_deviation
        ));
    }

    let expected = w.layout.total_out_dim() as f64;
    let tr = w.op.trace();
    let deviation = (tr - C64::new(expected, 0.0)).norm();
    let trace = TraceCheck {
        value: tr.re,
        expected,
        deviation,
        passed: deviation <= tol * expected,
    };
    if !trace.passed {
        failures.push(format!("trace: {} instead of {expected}", tr.re));
    }

    let n = w.layout.len();
    let mut subsets = Vec::new();
    for mask in 1usize..(1 << n) {
        let names: Vec<String> = (0..n)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| w.layout.parties()[j].name.clone())
            .collect();
        let max_abs = subset_residual(w, mask).expect("layout labels are operator labels");
        let passed = max_abs <= tol;
        if !passed {
            failures.push(format!("subset {{{}}}: residual {max_abs:.3e}", names.join(", ")));
        }
        subsets.push(SubsetCheck {
            parties: names,
            max_abs,
            passed,
        });
    }

    ValidityReport {
        valid: failures.is_empty(),
        tol,
        psd,
        trace,
        subsets,
        failures,
        note: "projector conditions: standard multipartite subset family; \
               sufficiency for arbitrary party counts is assumed, cross-check with sampling"
            .into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub samples: usize,
    pub ancilla_dims: Vec<usize>,
    pub max_deviation: f64,
    pub deviations: Vec<f64>,
    pub passed: bool,
}

/// Normalisation check with random CPTP maps, one per party.
pub fn validate_by_sampling(w: &ProcessMatrix, n_samples: usize, seed: u64, tol: f64) -> SamplingReport {
    let ones = vec![1; w.layout.len()];
    validate_with_ancillas(w, &ones, n_samples, seed, tol)
}

fn ancilla_label(party: &Party, dim: usize) -> SpaceLabel {
    SpaceLabel::new(format!("{}~anc", party.name), dim)
}

/// Normalisation check where party `j` also receives an ancilla of
/// dimension `ancilla_dims[j]`, all ancillas drawn in one random pure joint
/// state. Dimension-one ancillas are omitted, so all-ones reproduces
/// [`validate_by_sampling`] draw for draw.
pub fn validate_with_ancillas(
    w: &ProcessMatrix,
    ancilla_dims: &[usize],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> SamplingReport {
    let parties = w.layout.parties();
    assert_eq!(ancilla_dims.len(), parties.len(), "one ancilla dimension per party");
    assert!(ancilla_dims.iter().all(|&d| d >= 1), "ancilla dimensions are positive");
    let ancillas: Vec<SpaceLabel> = parties
        .iter()
        .zip(ancilla_dims)
        .filter(|(_, &d)| d > 1)
        .map(|(p, &d)| ancilla_label(p, d))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wop = w.op.squeeze();
    let mut deviations = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut factors = Vec::new();
        if !ancillas.is_empty() {
            let v = random_pure_vector(total_dim(&ancillas), rng.random()).expect("positive dims");
            factors.push(LabeledOperator::projector(ancillas.clone(), &v).expect("matching length"));
        }
        let mut maps = Vec::with_capacity(parties.len());
        for (p, &d) in parties.iter().zip(ancilla_dims) {
            let mut inputs = p.inputs.clone();
            if d > 1 {
                inputs.push(ancilla_label(p, d));
            }
            let m = random_cptp(&inputs, &p.outputs, rng.random()).expect("positive dims");
            maps.push(m.op().squeeze());
        }
        // link W with one strategy first so the large operator is never copied
        let value = maps
            .split_first()
            .map_or_else(|| Ok(wop.clone()), |(m, _)| link(&wop, m))
            .and_then(|first| {
                factors.push(first);
                factors.extend(maps.into_iter().skip(1));
                FactorNetwork::new(factors)
            })
            .and_then(|net| contract(&net, None))
            .map(|v| v.as_scalar().expect("closed network"))
            .map(|p| (p - C64::new(1.0, 0.0)).norm())
            .unwrap_or(f64::INFINITY);
        deviations.push(value);
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    SamplingReport {
        samples: n_samples,
        ancilla_dims: ancilla_dims.to_vec(),
        max_deviation,
        passed: max_deviation <= tol,
        deviations,
    }
}

fn check_density(rho: &Array2<C64>, d: usize, what: &str) -> Result<()> {
    if rho.dim() != (d, d) {
        return Err(Error::InvalidInput(format!("{what} must be {d}x{d}")));
    }
    let tr: C64 = rho.diag().iter().sum();
    let op = LabeledOperator::new(vec![SpaceLabel::new("x", d)], rho.clone())?;
    let min = op.hermitian_eigenvalues()[0];
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 || min < -1e-9 || op.hermiticity_deviation() > 1e-9 {
        return Err(Error::InvalidInput(format!("{what} is not a density matrix")));
    }
    Ok(())
}

fn in_label(party: &str, d: usize) -> SpaceLabel {
    SpaceLabel::new(format!("{party}.in"), d)
}

fn out_label(party: &str, d: usize) -> SpaceLabel {
    SpaceLabel::new(format!("{party}.out"), d)
}

/// One party that receives `rho` and whose output (dimension `out_dim`) is
/// discarded: `W = ρ ⊗ 𝟙`.
pub fn build_state_process(party: &str, rho: &Array2<C64>, out_dim: usize) -> Result<ProcessMatrix> {
    let d = rho.nrows();
    check_density(rho, d, "initial state")?;
    if out_dim == 0 {
        return Err(Error::InvalidInput("output dimension must be positive".into()));
    }
    let (i, o) = (in_label(party, d), out_label(party, out_dim));
    let op = LabeledOperator::new(vec![i.clone()], rho.clone())?
        .tensor_product(&LabeledOperator::identity(vec![o.clone()])?)?;
    ProcessMatrix::new(op, PartyLayout::new(vec![Party::new(party, i, o)])?)
}

/// Two parties in a fixed order: `first` receives `rho`, its output goes
/// through `channel` (a CPTP map with one input and one output label) to
/// `second`, whose output of dimension `out_dim` is discarded.
pub fn build_channel_comb(
    first: &str,
    second: &str,
    rho: &Array2<C64>,
    channel: &ChoiOperator,
    out_dim: usize,
) -> Result<ProcessMatrix> {
    let d0 = rho.nrows();
    check_density(rho, d0, "initial state")?;
    if channel.in_labels().len() != 1 || channel.out_labels().len() != 1 {
        return Err(Error::InvalidInput("comb channel needs one input and one output label".into()));
    }
    if !channel.is_cptp(1e-9).is_cptp {
        return Err(Error::InvalidInput("comb channel is not CPTP".into()));
    }
    if out_dim == 0 {
        return Err(Error::InvalidInput("output dimension must be positive".into()));
    }
    let (d1, d2) = (channel.d_in(), channel.d_out());
    let a_in = in_label(first, d0);
    let a_out = out_label(first, d1);
    let b_in = in_label(second, d2);
    let b_out = out_label(second, out_dim);
    let wire = channel.relabel_many(&[
        (&channel.in_labels()[0].clone(), &a_out.name),
        (&channel.out_labels()[0].clone(), &b_in.name),
    ])?;
    let op = LabeledOperator::new(vec![a_in.clone()], rho.clone())?
        .tensor_product(wire.op())?
        .tensor_product(&LabeledOperator::identity(vec![b_out.clone()])?)?
        .permute_labels(&[&a_in.name, &a_out.name, &b_in.name, &b_out.name])?;
    let layout = PartyLayout::new(vec![Party::new(first, a_in, a_out), Party::new(second, b_in, b_out)])?;
    ProcessMatrix::new(op, layout)
}

/// Quantum switch with target initial state `|0⟩`.
pub fn build_quantum_switch(target_dim: usize, control: &Array2<C64>) -> Result<ProcessMatrix> {
    let mut target = vec![C64::new(0.0, 0.0); target_dim.max(1)];
    target[0] = C64::new(1.0, 0.0);
    build_quantum_switch_with_target(target_dim, control, &target)
}

/// Quantum switch on parties `A`, `B` (both `target_dim → target_dim`) and a
/// final measuring party `F` whose input is control ⊗ target (control most
/// significant) and whose output is trivial. Control `|0⟩` routes the target
/// through `A` then `B`; control `|1⟩` through `B` then `A`.
pub fn build_quantum_switch_with_target(
    target_dim: usize,
    control: &Array2<C64>,
    target: &[C64],
) -> Result<ProcessMatrix> {
    let d = target_dim;
    if d == 0 {
        return Err(Error::InvalidInput("target dimension must be positive".into()));
    }
    check_density(control, 2, "control state")?;
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if target.len() != d || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("target must be a unit vector of length {d}")));
    }
    let labels = vec![
        in_label("A", d),
        out_label("A", d),
        in_label("B", d),
        out_label("B", d),
        in_label("F", 2 * d),
        out_label("F", 1),
    ];
    // flat index: ((((a_in·d + a_out)·d + b_in)·d + b_out)·2d + f_in)
    let idx = |ai: usize, ao: usize, bi: usize, bo: usize, c: usize, t: usize| {
        (((ai * d + ao) * d + bi) * d + bo) * (2 * d) + c * d + t
    };
    let side = d.pow(4) * 2 * d;
    let mut branches = vec![vec![C64::new(0.0, 0.0); side]; 2];
    for x in 0..d {
        for y in 0..d {
            for (k, amp) in target.iter().enumerate() {
                // A first: ψ → A.in, A.out = B.in (x), B.out = F target (y)
                branches[0][idx(k, x, x, y, 0, y)] += *amp;
                // B first: ψ → B.in, B.out = A.in (x), A.out = F target (y)
                branches[1][idx(x, y, k, x, 1, y)] += *amp;
            }
        }
    }
    let data = Array2::from_shape_fn((side, side), |(r, c)| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += control[[a, b]] * branches[a][r] * branches[b][c].conj();
            }
        }
        acc
    });
    let op = LabeledOperator::new(labels.clone(), data)?;
    let layout = PartyLayout::new(vec![
        Party::new("A", labels[0].clone(), labels[1].clone()),
        Party::new("B", labels[2].clone(), labels[3].clone()),
        Party::new("F", labels[4].clone(), labels[5].clone()),
    ])?;
    ProcessMatrix::new(op, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_state;
    use crate::tensors::{ONE, ZERO};

    fn ket0() -> Array2<C64> {
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = ONE;
        m
    }

    fn plus() -> Array2<C64> {
        Array2::from_elem((2, 2), C64::new(0.5, 0.0))
    }

    fn effect_then_prepare(e: &LabeledOperator, out: SpaceLabel) -> ChoiOperator {
        // measure E on the input, then prepare |0⟩ on the output
        let prep = LabeledOperator::basis_projector(out.clone(), 0).unwrap();
        let op = e.transpose().tensor_product(&prep).unwrap();
        ChoiOperator::new(op, vec![e.labels()[0].name.clone()], vec![out.name]).unwrap()
    }

    #[test]
    fn born_rule_certainty() {
        let w = build_state_process("A", &ket0(), 2).unwrap();
        let i = w.layout().parties()[0].inputs[0].clone();
        let o = w.layout().parties()[0].outputs[0].clone();
        let e0 = LabeledOperator::basis_projector(i.clone(), 0).unwrap();
        let e1 = LabeledOperator::basis_projector(i, 1).unwrap();
        let p0 = probability(&w, &[effect_then_prepare(&e0, o.clone())]).unwrap();
        let p1 = probability(&w, &[effect_then_prepare(&e1, o)]).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        assert!(p1.abs() < 1e-12);
    }

    #[test]
    fn element_labels_are_checked() {
        let w = build_state_process("A", &ket0(), 2).unwrap();
        let wrong = ChoiOperator::identity("X.in", "X.out", 2).unwrap();
        assert!(matches!(probability(&w, &[wrong]), Err(Error::LabelMismatch(_))));
        assert!(matches!(probability(&w, &[]), Err(Error::LabelMismatch(_))));
    }

    #[test]
    fn state_process_is_valid() {
        let w = build_state_process("A", &ket0(), 2).unwrap();
        assert!((w.op().trace().re - 2.0).abs() < 1e-12);
        let rep = validate_process(&w, 1e-9);
        assert!(rep.valid, "{:?}", rep.failures);
        assert_eq!(rep.subsets.len(), 1);
    }

    #[test]
    fn comb_is_valid_and_transmits() {
        let id = ChoiOperator::identity("x", "y", 2).unwrap();
        let rho = random_state(&[SpaceLabel::new("s", 2)], 3).unwrap();
        let w = build_channel_comb("A", "B", rho.data(), &id, 2).unwrap();
        let rep = validate_process(&w, 1e-9);
        assert!(rep.valid, "{:?}", rep.failures);
        assert_eq!(rep.subsets.len(), 3);
        let s = validate_by_sampling(&w, 20, 1, 1e-9);
        assert!(s.passed, "{}", s.max_deviation);
    }

    #[test]
    fn scaled_process_fails_by_linearity() {
        let w = build_state_process("A", &ket0(), 2).unwrap().scaled(1.1);
        let rep = validate_process(&w, 1e-9);
        assert!(!rep.valid);
        assert!((rep.trace.deviation - 0.2).abs() < 1e-12);
        let s = validate_by_sampling(&w, 10, 2, 1e-9);
        for d in &s.deviations {
            assert!((d - 0.1).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_injection_is_reported_by_subset() {
        let id = ChoiOperator::identity("x", "y", 2).unwrap();
        let w = build_channel_comb("A", "B", &ket0(), &id, 2).unwrap();
        let x = crate::channels::random_hermitian(w.op().labels(), 5).unwrap();
        // the component that violates the condition for R = {A}
        let h = x
            .residual_on(&["A.out"])
            .unwrap()
            .depolarize_on(&["B.in", "B.out"])
            .unwrap();
        let bad = w.with_op(w.op().add(&h.scale(C64::new(0.1, 0.0))).unwrap()).unwrap();
        let rep = validate_process(&bad, 1e-9);
        assert!(!rep.valid);
        let failed: Vec<_> = rep.subsets.iter().filter(|s| !s.passed).collect();
        assert_eq!(failed.len(), 1, "{:?}", rep.subsets);
        assert_eq!(failed[0].parties, vec!["A".to_string()]);
        assert!(rep.trace.passed);
    }

    #[test]
    fn switch_interference_signature() {
        let w = build_quantum_switch(2, &plus()).unwrap();
        let rep = validate_process(&w, 1e-9);
        assert!(rep.valid, "{:?}", rep.failures);
        let x = Array2::from_shape_vec((2, 2), vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let z = Array2::from_shape_vec((2, 2), vec![ONE, ZERO, ZERO, -ONE]).unwrap();
        let ua = ChoiOperator::unitary(&x, SpaceLabel::new("A.in", 2), SpaceLabel::new("A.out", 2)).unwrap();
        let ub = ChoiOperator::unitary(&z, SpaceLabel::new("B.in", 2), SpaceLabel::new("B.out", 2)).unwrap();
        // |−⟩⟨−| on the control, identity on the target
        let mut minus = Array2::zeros((4, 4));
        for t in 0..2 {
            minus[[t, t]] = C64::new(0.5, 0.0);
            minus[[2 + t, 2 + t]] = C64::new(0.5, 0.0);
            minus[[t, 2 + t]] = C64::new(-0.5, 0.0);
            minus[[2 + t, t]] = C64::new(-0.5, 0.0);
        }
        let e = LabeledOperator::new(vec![SpaceLabel::new("F.in", 4)], minus).unwrap();
        let f = ChoiOperator::effect(&e).unwrap();
        let p = probability(&w, &[ua, ub, f]).unwrap();
        assert!((p - 1.0).abs() < 1e-12, "{p}");
    }

    #[test]
    fn ancilla_dim_one_is_plain_sampling() {
        let w = build_state_process("A", &ket0(), 2).unwrap();
        let a = validate_by_sampling(&w, 5, 9, 1e-9);
        let b = validate_with_ancillas(&w, &[1], 5, 9, 1e-9);
        assert_eq!(a, b);
        let c = validate_with_ancillas(&w, &[2], 20, 9, 1e-9);
        assert!(c.passed, "{}", c.max_deviation);
    }

    #[test]
    fn pivoted_bound_matches_eigenvalues() {
        for seed in 0..5 {
            let labels = [SpaceLabel::new("a", 6)];
            let h = crate::channels::random_hermitian(&labels, seed).unwrap();
            let exact = h.hermitian_eigenvalues()[0];
            let bound = min_eigenvalue_lower_bound(h.data());
            assert!(bound <= exact + 1e-12);
            assert!(bound < 0.0);
            let rho = random_state(&labels, seed).unwrap();
            assert!(min_eigenvalue_lower_bound(rho.data()) > -1e-12);
        }
    }

    #[test]
    fn layout_rejects_duplicates() {
        let p = Party::new("A", SpaceLabel::new("x", 2), SpaceLabel::new("y", 2));
        assert!(PartyLayout::new(vec![p.clone(), p.clone()]).is_err());
        let q = Party::new("B", SpaceLabel::new("x", 2), SpaceLabel::new("z", 2));
        assert!(matches!(PartyLayout::new(vec![p, q]), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn builders_reject_bad_input() {
        let bad = Array2::from_elem((2, 2), ONE);
        assert!(matches!(build_state_process("A", &bad, 2), Err(Error::InvalidInput(_))));
        assert!(build_quantum_switch(0, &plus()).is_err());
        let half = ChoiOperator::identity("x", "y", 2).unwrap().scale(0.5);
        assert!(build_channel_comb("A", "B", &ket0(), &half, 2).is_err());
    }
}
