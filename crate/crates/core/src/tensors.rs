//! Dense operators over ordered lists of named finite-dimensional spaces.
//!
//! A [`LabeledOperator`] stores a square complex matrix whose row and column
//! indices both enumerate the tensor product of its labels as a mixed-radix
//! number, first label most significant. Every other module in the crate
//! relies on that layout.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A named Hilbert space of fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub name: String,
    pub dim: usize,
}

impl SpaceLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

impl fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.dim)
    }
}

/// Square complex matrix over a tensor product of labelled spaces.
///
/// Operators with an empty label list are scalars (1×1 matrices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct LabeledOperator {
    labels: Vec<SpaceLabel>,
    data: Array2<C64>,
}

/// Product of the label dimensions.
pub fn total_dim(labels: &[SpaceLabel]) -> usize {
    labels.iter().map(|l| l.dim).product()
}

fn check_labels(labels: &[SpaceLabel]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if l.name.is_empty() {
            return Err(Error::InvalidInput("empty label name".into()));
        }
        if l.dim == 0 {
            return Err(Error::BadDimension(format!("label `{}` has dimension 0", l.name)));
        }
        if !seen.insert(l.name.as_str()) {
            return Err(Error::LabelCollision(l.name.clone()));
        }
    }
    Ok(())
}

/// For every flat index of the layout `dims`, the contribution of the digits
/// belonging to labels with `mask[l] == true` (all others contribute zero).
fn masked_offsets(dims: &[usize], mask: &[bool]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for l in (0..dims.len().saturating_sub(1)).rev() {
        strides[l] = strides[l + 1] * dims[l + 1];
    }
    let mut out = vec![0usize];
    for (l, &d) in dims.iter().enumerate() {
        let step = if mask[l] { strides[l] } else { 0 };
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for k in 0..d {
                next.push(base + k * step);
            }
        }
        out = next;
    }
    out
}

/// Flat indices into the layout `dims` for every index of the layout made of
/// the labels `picked` (in that order). Labels not picked contribute zero.
pub(crate) fn gather_offsets(dims: &[usize], picked: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for l in (0..dims.len().saturating_sub(1)).rev() {
        strides[l] = strides[l + 1] * dims[l + 1];
    }
    let mut out = vec![0usize];
    for &l in picked {
        let d = dims[l];
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for k in 0..d {
                next.push(base + k * strides[l]);
            }
        }
        out = next;
    }
    out
}

impl LabeledOperator {
    pub fn new(labels: Vec<SpaceLabel>, data: Array2<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let side = total_dim(&labels);
        if data.nrows() != side || data.ncols() != side {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, labels require {side}x{side}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { labels, data })
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            labels: Vec::new(),
            data: Array2::from_elem((1, 1), value),
        }
    }

    pub fn zeros(labels: Vec<SpaceLabel>) -> Result<Self> {
        let side = total_dim(&labels);
        Self::new(labels, Array2::zeros((side, side)))
    }

    pub fn identity(labels: Vec<SpaceLabel>) -> Result<Self> {
        let side = total_dim(&labels);
        Self::new(labels, Array2::eye(side))
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn projector(labels: Vec<SpaceLabel>, v: &[C64]) -> Result<Self> {
        let side = total_dim(&labels);
        if v.len() != side {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} on a space of dimension {side}",
                v.len()
            )));
        }
        let data = Array2::from_shape_fn((side, side), |(i, j)| v[i] * v[j].conj());
        Self::new(labels, data)
    }

    /// Computational-basis projector `|k⟩⟨k|` on a single label.
    pub fn basis_projector(label: SpaceLabel, k: usize) -> Result<Self> {
        if k >= label.dim {
            return Err(Error::IndexOutOfRange(format!(
                "basis state {k} on `{}` of dimension {}",
                label.name, label.dim
            )));
        }
        let mut data = Array2::zeros((label.dim, label.dim));
        data[[k, k]] = ONE;
        Self::new(vec![label], data)
    }

    /// Normalised maximally entangled state `|Φ⁺⟩⟨Φ⁺|` with
    /// `|Φ⁺⟩ = d^{-1/2} Σ_j |j⟩|j⟩` on the pair `(first, second)`.
    pub fn max_entangled_state(d: usize, first: &str, second: &str) -> Result<Self> {
        let op = Self::unnormalized_max_entangled(d, first, second)?;
        Ok(op.scale(C64::new(1.0 / d as f64, 0.0)))
    }

    /// `|𝟙⟩⟩⟨⟨𝟙|` with `|𝟙⟩⟩ = Σ_j |j⟩|j⟩`: the Choi operator of the identity
    /// channel from `first` to `second`.
    pub fn unnormalized_max_entangled(d: usize, first: &str, second: &str) -> Result<Self> {
        if d < 1 {
            return Err(Error::BadDimension("maximally entangled state needs d >= 1".into()));
        }
        let labels = vec![SpaceLabel::new(first, d), SpaceLabel::new(second, d)];
        let side = d * d;
        let mut data = Array2::zeros((side, side));
        for i in 0..d {
            for j in 0..d {
                data[[i * d + i, j * d + j]] = ONE;
            }
        }
        Self::new(labels, data)
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn label_names(&self) -> Vec<&str> {
        self.labels.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_parts(self) -> (Vec<SpaceLabel>, Array2<C64>) {
        (self.labels, self.data)
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == name)
    }

    pub fn label(&self, name: &str) -> Option<&SpaceLabel> {
        self.labels.iter().find(|l| l.name == name)
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(Error::InvalidInput(format!("label `{n}` listed twice")));
                }
                self.position(n).ok_or_else(|| Error::UnknownLabel(n.to_string()))
            })
            .collect()
    }

    fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.dim).collect()
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().iter().sum()
    }

    /// Value of a scalar operator. Labels of dimension one are allowed.
    pub fn as_scalar(&self) -> Option<C64> {
        (self.dim() == 1).then(|| self.data[[0, 0]])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            labels: self.labels.clone(),
            data: &self.data * factor,
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            data: self.data.mapv(|z| z.conj()),
        }
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let h = (&self.data + &self.data.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
        Self {
            labels: self.labels.clone(),
            data: h,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A_ij − A†_ij|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        dev
    }

    /// Drop every label of dimension one. The matrix is unchanged.
    pub fn squeeze(&self) -> Self {
        Self {
            labels: self.labels.iter().filter(|l| l.dim != 1).cloned().collect(),
            data: self.data.clone(),
        }
    }

    /// Rename a label; the data is untouched.
    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        self.relabel_many(&[(from, to)])
    }

    pub fn relabel_many(&self, renames: &[(&str, &str)]) -> Result<Self> {
        let mut labels = self.labels.clone();
        for (from, to) in renames {
            let pos = self
                .position(from)
                .ok_or_else(|| Error::UnknownLabel(from.to_string()))?;
            labels[pos].name = to.to_string();
        }
        check_labels(&labels)?;
        Ok(Self {
            labels,
            data: self.data.clone(),
        })
    }

    /// Kronecker product; labels of `self` come first.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        for l in &other.labels {
            if self.position(&l.name).is_some() {
                return Err(Error::LabelCollision(l.name.clone()));
            }
        }
        let (na, nb) = (self.dim(), other.dim());
        let mut data = Array2::zeros((na * nb, na * nb));
        for i in 0..na {
            for j in 0..na {
                let a = self.data[[i, j]];
                if a == ZERO {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        data[[i * nb + k, j * nb + l]] = a * other.data[[k, l]];
                    }
                }
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(Self { labels, data })
    }

    /// Trace out the named labels.
    pub fn partial_trace(&self, over: &[&str]) -> Result<Self> {
        let traced = self.positions(over)?;
        let kept: Vec<usize> = (0..self.labels.len())
            .filter(|p| !traced.contains(p))
            .collect();
        let dims = self.dims();
        let off_k = gather_offsets(&dims, &kept);
        let off_t = gather_offsets(&dims, &traced);
        let nk = off_k.len();
        let mut data = Array2::zeros((nk, nk));
        for (r, &kr) in off_k.iter().enumerate() {
            for (c, &kc) in off_k.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &off_t {
                    acc += self.data[[kr + t, kc + t]];
                }
                data[[r, c]] = acc;
            }
        }
        let labels = kept.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self { labels, data })
    }

    /// Transpose the row and column digits of the named labels.
    pub fn partial_transpose(&self, on: &[&str]) -> Result<Self> {
        let pos = self.positions(on)?;
        if pos.is_empty() {
            return Ok(self.clone());
        }
        let mask: Vec<bool> = (0..self.labels.len()).map(|p| pos.contains(&p)).collect();
        let part = masked_offsets(&self.dims(), &mask);
        let n = self.dim();
        let data = Array2::from_shape_fn((n, n), |(r, c)| {
            let (sr, sc) = (part[r], part[c]);
            self.data[[r - sr + sc, c - sc + sr]]
        });
        Ok(Self {
            labels: self.labels.clone(),
            data,
        })
    }

    /// Transpose over every label.
    pub fn transpose(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            data: self.data.t().to_owned(),
        }
    }

    /// Reorder the tensor factors so that the labels appear in `order`.
    pub fn permute_labels(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::NotAPermutation(format!(
                "{} names given for {} labels",
                order.len(),
                self.labels.len()
            )));
        }
        let perm = self.positions(order).map_err(|e| match e {
            Error::UnknownLabel(n) | Error::InvalidInput(n) => Error::NotAPermutation(n),
            other => other,
        })?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let map = gather_offsets(&self.dims(), &perm);
        let n = self.dim();
        let data = Array2::from_shape_fn((n, n), |(r, c)| self.data[[map[r], map[c]]]);
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self { labels, data })
    }

    /// Copy with labels sorted by name.
    pub fn canonicalize(&self) -> Self {
        let mut names: Vec<&str> = self.label_names();
        names.sort_unstable();
        self.permute_labels(&names).expect("sorted names are a permutation")
    }

    /// `_X A = 𝟙_X/d_X ⊗ Tr_X A` for the composite system `X` made of the
    /// named labels; the label order of `self` is kept.
    pub fn depolarize_on(&self, x: &[&str]) -> Result<Self> {
        let pos = self.positions(x)?;
        let reduced = self.partial_trace(x)?;
        let xs: Vec<SpaceLabel> = pos.iter().map(|&p| self.labels[p].clone()).collect();
        let dx = total_dim(&xs) as f64;
        let refill = Self::identity(xs)?.scale(C64::new(1.0 / dx, 0.0));
        let full = refill.tensor_product(&reduced)?;
        full.permute_labels(&self.label_names())
    }

    /// `_{[1−X]} A = A − _X A`.
    pub fn residual_on(&self, x: &[&str]) -> Result<Self> {
        let dep = self.depolarize_on(x)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: &self.data - &dep.data,
        })
    }

    /// Sum of two operators over the same label set (any order).
    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = self.align(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let other = self.align(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: &self.data - &other.data,
        })
    }

    /// `other` permuted into the label order of `self`.
    fn align(&self, other: &Self) -> Result<Self> {
        let mut a: Vec<&SpaceLabel> = self.labels.iter().collect();
        let mut b: Vec<&SpaceLabel> = other.labels.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::LabelMismatch(format!(
                "{} vs {}",
                fmt_labels(&self.labels),
                fmt_labels(&other.labels)
            )));
        }
        other.permute_labels(&self.label_names())
    }

    /// Largest entry deviation after aligning label orders.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let other = self.align(other)?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (x, y)| m.max((x - y).norm())))
    }

    /// Equality up to label permutation, entrywise within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.hermitian_part().data)
    }
}

pub(crate) fn fmt_labels(labels: &[SpaceLabel]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mat = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Plain matrix product used by the test oracles and small builders.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b)
}

/// Conjugate transpose of a matrix.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Wire format: `{"labels":[{"name","dim"}], "data":[[[re,im],...],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub labels: Vec<SpaceLabel>,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl From<LabeledOperator> for OperatorJson {
    fn from(op: LabeledOperator) -> Self {
        let data = op
            .data
            .rows()
            .into_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Self {
            labels: op.labels,
            data,
        }
    }
}

impl TryFrom<OperatorJson> for LabeledOperator {
    type Error = Error;

    fn try_from(json: OperatorJson) -> Result<Self> {
        let data = matrix_from_rows(&json.data)?;
        Self::new(json.labels, data)
    }
}

/// Build a matrix from nested `[re, im]` rows; rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Array2<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeMismatch("ragged matrix rows".into()));
    }
    Ok(Array2::from_shape_fn((nrows, ncols), |(i, j)| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Inverse of [`matrix_from_rows`].
pub fn matrix_to_rows(m: &Array2<C64>) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Count of label names, used to detect multiply-shared wires.
pub(crate) fn label_multiplicity<'a>(
    ops: impl IntoIterator<Item = &'a LabeledOperator>,
) -> BTreeMap<&'a str, (usize, usize)> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for op in ops {
        for l in &op.labels {
            let e = counts.entry(l.name.as_str()).or_insert((0, l.dim));
            e.0 += 1;
        }
    }
    counts
}
