//! Choi operators, instruments and seeded random generators.
//!
//! The Choi operator of a map `ℳ` is `(ℐ ⊗ ℳ)(|𝟙⟩⟩⟨⟨𝟙|)`, with the input
//! factor first. A map is CP iff its Choi operator is positive and trace
//! preserving iff `Tr_out C = 𝟙_in`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linkprod::link;
use crate::tensors::{fmt_labels, total_dim, LabeledOperator, SpaceLabel, C64, ZERO};

/// A Choi operator together with its input/output label partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    op: LabeledOperator,
    in_labels: Vec<String>,
    out_labels: Vec<String>,
}

/// Outcome of [`ChoiOperator::is_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub is_cptp: bool,
    pub min_eigenvalue: f64,
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
}

fn same_name_set(a: &[String], b: &[String]) -> bool {
    let mut a: Vec<&String> = a.iter().collect();
    let mut b: Vec<&String> = b.iter().collect();
    a.sort();
    b.sort();
    a == b
}

impl ChoiOperator {
    pub fn new(op: LabeledOperator, in_labels: Vec<String>, out_labels: Vec<String>) -> Result<Self> {
        let mut declared: Vec<String> = in_labels.iter().chain(&out_labels).cloned().collect();
        let mut present: Vec<String> = op.labels().iter().map(|l| l.name.clone()).collect();
        declared.sort();
        present.sort();
        if declared != present || declared.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::LabelMismatch(format!(
                "partition {:?} / {:?} does not cover {}",
                in_labels,
                out_labels,
                fmt_labels(op.labels())
            )));
        }
        Ok(Self {
            op,
            in_labels,
            out_labels,
        })
    }

    /// `Σ_k |K_k⟩⟩⟨⟨K_k|` with `|K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩`. Each Kraus matrix is
    /// `d_out × d_in` over the composite input and output spaces.
    pub fn from_kraus(
        kraus: &[Array2<C64>],
        inputs: &[SpaceLabel],
        outputs: &[SpaceLabel],
    ) -> Result<Self> {
        let (din, dout) = (total_dim(inputs), total_dim(outputs));
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("empty Kraus list".into()));
        }
        let side = din * dout;
        let mut data = Array2::zeros((side, side));
        for k in kraus {
            if k.dim() != (dout, din) {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            let v: Vec<C64> = (0..side).map(|idx| k[[idx % dout, idx / dout]]).collect();
            for r in 0..side {
                if v[r] == ZERO {
                    continue;
                }
                for c in 0..side {
                    data[[r, c]] += v[r] * v[c].conj();
                }
            }
        }
        let labels: Vec<SpaceLabel> = inputs.iter().chain(outputs).cloned().collect();
        let op = LabeledOperator::new(labels, data)?;
        Self::new(
            op,
            inputs.iter().map(|l| l.name.clone()).collect(),
            outputs.iter().map(|l| l.name.clone()).collect(),
        )
    }

    /// Identity channel `|𝟙⟩⟩⟨⟨𝟙|` from `input` to `output`.
    pub fn identity(input: &str, output: &str, d: usize) -> Result<Self> {
        let op = LabeledOperator::unnormalized_max_entangled(d, input, output)?;
        Self::new(op, vec![input.into()], vec![output.into()])
    }

    pub fn unitary(u: &Array2<C64>, input: SpaceLabel, output: SpaceLabel) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u), &[input], &[output])
    }

    /// Measurement-only element: the map `ρ ↦ Tr[E ρ]`, whose Choi operator
    /// is `Eᵀ`.
    pub fn effect(e: &LabeledOperator) -> Result<Self> {
        let op = e.transpose();
        let ins = op.labels().iter().map(|l| l.name.clone()).collect();
        Self::new(op, ins, Vec::new())
    }

    /// Preparation of the (possibly subnormalised) state `ρ`.
    pub fn preparation(rho: &LabeledOperator) -> Result<Self> {
        let outs = rho.labels().iter().map(|l| l.name.clone()).collect();
        Self::new(rho.clone(), Vec::new(), outs)
    }

    /// The trace map on `inputs`, Choi operator `𝟙`.
    pub fn discard(inputs: Vec<SpaceLabel>) -> Result<Self> {
        let names = inputs.iter().map(|l| l.name.clone()).collect();
        Self::new(LabeledOperator::identity(inputs)?, names, Vec::new())
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn in_labels(&self) -> &[String] {
        &self.in_labels
    }

    pub fn out_labels(&self) -> &[String] {
        &self.out_labels
    }

    fn labels_of(&self, names: &[String]) -> Vec<SpaceLabel> {
        names
            .iter()
            .map(|n| self.op.label(n).expect("partition names are op labels").clone())
            .collect()
    }

    pub fn inputs(&self) -> Vec<SpaceLabel> {
        self.labels_of(&self.in_labels)
    }

    pub fn outputs(&self) -> Vec<SpaceLabel> {
        self.labels_of(&self.out_labels)
    }

    pub fn d_in(&self) -> usize {
        total_dim(&self.inputs())
    }

    pub fn d_out(&self) -> usize {
        total_dim(&self.outputs())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            op: self.op.scale(C64::new(factor, 0.0)),
            in_labels: self.in_labels.clone(),
            out_labels: self.out_labels.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_name_set(&self.in_labels, &other.in_labels)
            || !same_name_set(&self.out_labels, &other.out_labels)
        {
            return Err(Error::LabelMismatch("Choi partitions differ".into()));
        }
        Ok(Self {
            op: self.op.add(&other.op)?,
            in_labels: self.in_labels.clone(),
            out_labels: self.out_labels.clone(),
        })
    }

    pub fn relabel_many(&self, renames: &[(&str, &str)]) -> Result<Self> {
        let rename = |n: &String| {
            renames
                .iter()
                .find(|(from, _)| from == n)
                .map_or_else(|| n.clone(), |(_, to)| to.to_string())
        };
        Ok(Self {
            op: self.op.relabel_many(renames)?,
            in_labels: self.in_labels.iter().map(rename).collect(),
            out_labels: self.out_labels.iter().map(rename).collect(),
        })
    }

    /// CPTP check on the Hermitised operator. Hermiticity is reported
    /// separately and must also be within `tol`.
    pub fn is_cptp(&self, tol: f64) -> CptpReport {
        let herm = self.op.hermitian_part();
        let min_eigenvalue = herm.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
        let hermiticity_deviation = self.op.hermiticity_deviation();
        let outs: Vec<&str> = self.out_labels.iter().map(String::as_str).collect();
        let reduced = self.op.partial_trace(&outs).expect("output labels exist");
        let id = LabeledOperator::identity(reduced.labels().to_vec()).expect("valid labels");
        let trace_deviation = reduced.max_abs_diff(&id).expect("same labels");
        CptpReport {
            is_cptp: min_eigenvalue >= -tol && trace_deviation <= tol && hermiticity_deviation <= tol,
            min_eigenvalue,
            hermiticity_deviation,
            trace_deviation,
        }
    }

    /// CP and `Tr_out C ≼ 𝟙_in`, both within `tol`.
    pub fn is_cp_trace_non_increasing(&self, tol: f64) -> bool {
        let herm = self.op.hermitian_part();
        if herm.hermitian_eigenvalues().first().copied().unwrap_or(0.0) < -tol {
            return false;
        }
        let outs: Vec<&str> = self.out_labels.iter().map(String::as_str).collect();
        let reduced = herm.partial_trace(&outs).expect("output labels exist");
        let id = LabeledOperator::identity(reduced.labels().to_vec()).expect("valid labels");
        let gap = id.sub(&reduced).expect("same labels");
        gap.hermitian_eigenvalues().first().copied().unwrap_or(0.0) >= -tol
    }

    /// Apply the map to a state on exactly the input labels.
    pub fn apply(&self, state: &LabeledOperator) -> Result<LabeledOperator> {
        let mut want = self.inputs();
        let mut have = state.labels().to_vec();
        want.sort();
        have.sort();
        if want != have {
            return Err(Error::LabelMismatch(format!(
                "state on {} but channel input is {}",
                fmt_labels(state.labels()),
                fmt_labels(&self.inputs())
            )));
        }
        link(state, &self.op)
    }
}

/// Free-function form of [`ChoiOperator::from_kraus`].
pub fn choi_from_kraus(
    kraus: &[Array2<C64>],
    inputs: &[SpaceLabel],
    outputs: &[SpaceLabel],
) -> Result<ChoiOperator> {
    ChoiOperator::from_kraus(kraus, inputs, outputs)
}

/// Outcome-indexed family of Choi operators over common input/output labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    elements: Vec<ChoiOperator>,
}

impl Instrument {
    pub fn new(elements: Vec<ChoiOperator>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("instrument without outcomes".into()))?;
        for e in &elements[1..] {
            let mut a = e.op.labels().to_vec();
            let mut b = first.op.labels().to_vec();
            a.sort();
            b.sort();
            if a != b
                || !same_name_set(&e.in_labels, &first.in_labels)
                || !same_name_set(&e.out_labels, &first.out_labels)
            {
                return Err(Error::LabelMismatch(
                    "instrument elements act on different spaces".into(),
                ));
            }
        }
        Ok(Self { elements })
    }

    /// One Kraus list per outcome.
    pub fn from_kraus_sets(
        sets: &[Vec<Array2<C64>>],
        inputs: &[SpaceLabel],
        outputs: &[SpaceLabel],
    ) -> Result<Self> {
        let elements = sets
            .iter()
            .map(|k| ChoiOperator::from_kraus(k, inputs, outputs))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    /// Single-outcome instrument.
    pub fn deterministic(channel: ChoiOperator) -> Self {
        Self {
            elements: vec![channel],
        }
    }

    pub fn elements(&self) -> &[ChoiOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Sum of all elements: the channel obtained by ignoring the outcome.
    pub fn channel(&self) -> ChoiOperator {
        let mut acc = self.elements[0].clone();
        for e in &self.elements[1..] {
            acc = acc.add(e).expect("elements share labels");
        }
        acc
    }

    pub fn relabel_many(&self, renames: &[(&str, &str)]) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| e.relabel_many(renames))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements })
    }

    /// Outcome probabilities `Tr ℳ_a(ρ)` for a state on the input labels.
    pub fn probabilities(&self, state: &LabeledOperator) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| e.apply(state).map(|out| out.trace().re))
            .collect()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
    let mut m = Array2::zeros((rows, cols));
    for v in m.iter_mut() {
        *v = gaussian(rng);
    }
    m
}

/// Modified Gram-Schmidt on the columns of a complex Gaussian matrix.
fn orthonormalize_columns(mut m: Array2<C64>) -> Array2<C64> {
    let (n, k) = m.dim();
    for j in 0..k {
        for p in 0..j {
            let overlap: C64 = (0..n).map(|i| m[[i, p]].conj() * m[[i, j]]).sum();
            for i in 0..n {
                let v = m[[i, p]];
                m[[i, j]] -= overlap * v;
            }
        }
        let norm = (0..n).map(|i| m[[i, j]].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            m[[i, j]] /= norm;
        }
    }
    m
}

/// Seeded random unitary from the orthonormalised columns of a complex
/// Gaussian matrix.
pub fn random_unitary(d: usize, seed: u64) -> Result<Array2<C64>> {
    if d < 1 {
        return Err(Error::BadDimension("random_unitary needs d >= 1".into()));
    }
    let mut r = rng(seed);
    Ok(orthonormalize_columns(gaussian_matrix(d, d, &mut r)))
}

/// Random isometry `d_in → d_out·d_env` with `d_env = d_in·d_out`, rows
/// indexed `o·d_env + e`.
fn random_dilation(din: usize, dout: usize, seed: u64) -> (Array2<C64>, usize) {
    let denv = din * dout;
    let mut r = rng(seed);
    let v = orthonormalize_columns(gaussian_matrix(dout * denv, din, &mut r));
    (v, denv)
}

fn kraus_from_dilation(v: &Array2<C64>, dout: usize, denv: usize, e: usize) -> Array2<C64> {
    Array2::from_shape_fn((dout, v.ncols()), |(o, i)| v[[o * denv + e, i]])
}

fn check_dims(labels: &[SpaceLabel]) -> Result<()> {
    if labels.iter().any(|l| l.dim == 0) {
        return Err(Error::BadDimension("zero-dimensional label".into()));
    }
    Ok(())
}

/// Seeded random CPTP map via a Stinespring isometry with environment
/// dimension `d_in·d_out`.
pub fn random_cptp(inputs: &[SpaceLabel], outputs: &[SpaceLabel], seed: u64) -> Result<ChoiOperator> {
    check_dims(inputs)?;
    check_dims(outputs)?;
    let (din, dout) = (total_dim(inputs), total_dim(outputs));
    let (v, denv) = random_dilation(din, dout, seed);
    let kraus: Vec<_> = (0..denv)
        .map(|e| kraus_from_dilation(&v, dout, denv, e))
        .collect();
    ChoiOperator::from_kraus(&kraus, inputs, outputs)
}

/// Seeded random instrument: the environment basis of a random dilation is
/// split round-robin into `n_outcomes` groups.
pub fn random_instrument(
    inputs: &[SpaceLabel],
    outputs: &[SpaceLabel],
    n_outcomes: usize,
    seed: u64,
) -> Result<Instrument> {
    check_dims(inputs)?;
    check_dims(outputs)?;
    let (din, dout) = (total_dim(inputs), total_dim(outputs));
    let denv = din * dout;
    if n_outcomes == 0 || n_outcomes > denv {
        return Err(Error::BadDimension(format!(
            "{n_outcomes} outcomes with environment dimension {denv}"
        )));
    }
    let (v, denv) = random_dilation(din, dout, seed);
    let sets: Vec<Vec<Array2<C64>>> = (0..n_outcomes)
        .map(|k| {
            (k..denv)
                .step_by(n_outcomes)
                .map(|e| kraus_from_dilation(&v, dout, denv, e))
                .collect()
        })
        .collect();
    Instrument::from_kraus_sets(&sets, inputs, outputs)
}

/// Seeded random density matrix `G G† / Tr(G G†)` with `G` complex Gaussian.
pub fn random_state(labels: &[SpaceLabel], seed: u64) -> Result<LabeledOperator> {
    check_dims(labels)?;
    let d = total_dim(labels);
    let mut r = rng(seed);
    let g = gaussian_matrix(d, d, &mut r);
    let rho = g.dot(&crate::tensors::adjoint(&g));
    let tr: C64 = rho.diag().iter().sum();
    LabeledOperator::new(labels.to_vec(), rho / tr)
}

/// Seeded random unit vector.
pub fn random_pure_vector(d: usize, seed: u64) -> Result<Vec<C64>> {
    if d < 1 {
        return Err(Error::BadDimension("random vector needs d >= 1".into()));
    }
    let mut r = rng(seed);
    let v: Vec<C64> = (0..d).map(|_| gaussian(&mut r)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|z| z / norm).collect())
}

/// Seeded random Hermitian matrix with entries of order one.
pub fn random_hermitian(labels: &[SpaceLabel], seed: u64) -> Result<LabeledOperator> {
    check_dims(labels)?;
    let d = total_dim(labels);
    let mut r = rng(seed);
    let g = gaussian_matrix(d, d, &mut r);
    Ok(LabeledOperator::new(labels.to_vec(), g)?.hermitian_part())
}
