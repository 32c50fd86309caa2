//! Link product and factor-network contraction.
//!
//! `A * B := Tr_S[A^{T_S} · B]` where `S` is the set of labels shared by the
//! two operands. The product is commutative up to label order and
//! associative, so a network of operators in which every label occurs at
//! most twice has a well-defined value independent of contraction order.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensors::{gather_offsets, label_multiplicity, LabeledOperator, SpaceLabel, C64, ZERO};

/// Link product of two operators.
///
/// The result carries the labels of `a` that are not shared, followed by the
/// labels of `b` that are not shared.
pub fn link(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    let a_labels = a.labels();
    let b_labels = b.labels();

    let mut shared = Vec::new(); // (pos in a, pos in b)
    for (pa, la) in a_labels.iter().enumerate() {
        if let Some(pb) = b.position(&la.name) {
            let lb = &b_labels[pb];
            if lb.dim != la.dim {
                return Err(Error::DimMismatch {
                    label: la.name.clone(),
                    left: la.dim,
                    right: lb.dim,
                });
            }
            shared.push((pa, pb));
        }
    }
    let a_only: Vec<usize> = (0..a_labels.len())
        .filter(|p| !shared.iter().any(|s| s.0 == *p))
        .collect();
    let b_only: Vec<usize> = (0..b_labels.len())
        .filter(|p| !shared.iter().any(|s| s.1 == *p))
        .collect();
    let sa: Vec<usize> = shared.iter().map(|s| s.0).collect();
    let sb: Vec<usize> = shared.iter().map(|s| s.1).collect();

    let a_dims: Vec<usize> = a_labels.iter().map(|l| l.dim).collect();
    let b_dims: Vec<usize> = b_labels.iter().map(|l| l.dim).collect();
    let off_a_free = gather_offsets(&a_dims, &a_only);
    let off_a_shared = gather_offsets(&a_dims, &sa);
    let off_b_free = gather_offsets(&b_dims, &b_only);
    let off_b_shared = gather_offsets(&b_dims, &sb);
    let (na, ns, nb) = (off_a_free.len(), off_a_shared.len(), off_b_free.len());

    // R[(α,β),(α',β')] = Σ_{t,s} a[(α,t),(α',s)] · b[(t,β),(s,β')]
    if na * na <= STREAM_SMALL && na * ns >= STREAM_LARGE && nb * nb > STREAM_SMALL {
        // stream the big operand `b` instead; the product is symmetric
        let r = link(b, a)?;
        let order: Vec<&str> = a_only
            .iter()
            .map(|&p| a_labels[p].name.as_str())
            .chain(b_only.iter().map(|&p| b_labels[p].name.as_str()))
            .collect();
        return r.permute_labels(&order);
    }
    let ad = a.data();
    let bd = b.data();
    let y = Array2::from_shape_fn((ns * ns, nb * nb), |(r, c)| {
        let (t, s) = (off_b_shared[r / ns], off_b_shared[r % ns]);
        let (be, bep) = (off_b_free[c / nb], off_b_free[c % nb]);
        bd[[t + be, s + bep]]
    });
    let z = if nb * nb <= STREAM_SMALL && na * ns >= STREAM_LARGE {
        stream_rows(ad, &off_a_free, &off_a_shared, &y)
    } else {
        let x = Array2::from_shape_fn((na * na, ns * ns), |(r, c)| {
            let (al, alp) = (off_a_free[r / na], off_a_free[r % na]);
            let (t, s) = (off_a_shared[c / ns], off_a_shared[c % ns]);
            ad[[al + t, alp + s]]
        });
        x.dot(&y)
    };
    let n = na * nb;
    let data = Array2::from_shape_fn((n, n), |(r, c)| {
        let (al, be) = (r / nb, r % nb);
        let (alp, bep) = (c / nb, c % nb);
        z[[al * na + alp, be * nb + bep]]
    });

    let labels: Vec<SpaceLabel> = a_only
        .iter()
        .map(|&p| a_labels[p].clone())
        .chain(b_only.iter().map(|&p| b_labels[p].clone()))
        .collect();
    LabeledOperator::new(labels, data)
}

/// Above this side length an operand is worth streaming.
const STREAM_LARGE: usize = 256;
/// Largest `(free dim)²` of the other operand for which streaming wins.
const STREAM_SMALL: usize = 64;

/// `X · y` where `X[(α,α'),(t,s)] = a[(α,t),(α',s)]`, computed in one pass
/// over `a` in memory order, skipping zeros.
fn stream_rows(a: &Array2<C64>, off_free: &[usize], off_shared: &[usize], y: &Array2<C64>) -> Array2<C64> {
    let (nf, ns) = (off_free.len(), off_shared.len());
    let side = nf * ns;
    let mut free_of = vec![0usize; side];
    let mut shared_of = vec![0usize; side];
    for (fi, &fo) in off_free.iter().enumerate() {
        for (si, &so) in off_shared.iter().enumerate() {
            free_of[fo + so] = fi;
            shared_of[fo + so] = si;
        }
    }
    let width = y.ncols();
    let mut z = Array2::<C64>::zeros((nf * nf, width));
    for (i, row) in a.rows().into_iter().enumerate() {
        let (fi, ti) = (free_of[i], shared_of[i]);
        for (j, &v) in row.iter().enumerate() {
            if v == ZERO {
                continue;
            }
            let zr = fi * nf + free_of[j];
            let yr = ti * ns + shared_of[j];
            for c in 0..width {
                z[[zr, c]] += v * y[[yr, c]];
            }
        }
    }
    z
}

/// Side length of `link(a, b)` without computing it.
fn link_result_dim(a: &[SpaceLabel], b: &[SpaceLabel]) -> usize {
    let free_a: usize = a
        .iter()
        .filter(|l| !b.iter().any(|m| m.name == l.name))
        .map(|l| l.dim)
        .product();
    let free_b: usize = b
        .iter()
        .filter(|l| !a.iter().any(|m| m.name == l.name))
        .map(|l| l.dim)
        .product();
    free_a * free_b
}

fn symmetric_difference(a: &[SpaceLabel], b: &[SpaceLabel]) -> Vec<SpaceLabel> {
    a.iter()
        .filter(|l| !b.iter().any(|m| m.name == l.name))
        .chain(b.iter().filter(|l| !a.iter().any(|m| m.name == l.name)))
        .cloned()
        .collect()
}

/// An unordered collection of operators whose value is their joint link
/// product. Each label may appear in at most two factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorNetwork {
    factors: Vec<LabeledOperator>,
}

impl FactorNetwork {
    pub fn new(factors: Vec<LabeledOperator>) -> Result<Self> {
        let net = Self { factors };
        net.check()?;
        Ok(net)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[LabeledOperator] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn push(&mut self, op: LabeledOperator) -> Result<()> {
        self.factors.push(op);
        let res = self.check();
        if res.is_err() {
            self.factors.pop();
        }
        res
    }

    /// Union of two networks.
    pub fn join(mut self, other: FactorNetwork) -> Result<Self> {
        self.factors.extend(other.factors);
        self.check()?;
        Ok(self)
    }

    /// Every factor with its dimension-one labels removed.
    pub fn squeezed(&self) -> Self {
        Self {
            factors: self.factors.iter().map(LabeledOperator::squeeze).collect(),
        }
    }

    /// Labels that appear in exactly one factor, sorted by name.
    pub fn open_labels(&self) -> Vec<SpaceLabel> {
        let counts = label_multiplicity(&self.factors);
        let mut open: Vec<SpaceLabel> = counts
            .into_iter()
            .filter(|(_, (n, _))| *n == 1)
            .map(|(name, (_, dim))| SpaceLabel::new(name, dim))
            .collect();
        open.sort();
        open
    }

    fn check(&self) -> Result<()> {
        let mut dims: HashMap<&str, usize> = HashMap::new();
        for f in &self.factors {
            for l in f.labels() {
                if let Some(&d) = dims.get(l.name.as_str()) {
                    if d != l.dim {
                        return Err(Error::DimMismatch {
                            label: l.name.clone(),
                            left: d,
                            right: l.dim,
                        });
                    }
                }
                dims.insert(&l.name, l.dim);
            }
        }
        for (name, (count, _)) in label_multiplicity(&self.factors) {
            if count > 2 {
                return Err(Error::MalformedNetwork(format!(
                    "label `{name}` appears in {count} factors"
                )));
            }
        }
        Ok(())
    }
}

/// One pairwise merge. Factor ids follow single-static-assignment numbering:
/// the initial factors are `0..n`, and step `k` creates id `n + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionStep {
    pub left: usize,
    pub right: usize,
    pub result: usize,
    pub result_labels: Vec<String>,
    pub result_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionPlan {
    pub steps: Vec<ContractionStep>,
    pub peak_dim: usize,
}

impl ContractionPlan {
    /// The `(left, right)` pairs, in the form accepted by [`contract`].
    pub fn order(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.left, s.right)).collect()
    }
}

fn sort_key(labels: &[SpaceLabel]) -> Vec<&str> {
    let mut names: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
    names.sort_unstable();
    names
}

/// Greedy contraction order: repeatedly merge the pair whose link result has
/// the smallest dimension. Ties are broken by the sorted label names of the
/// two operands, lexicographically.
pub fn plan_contraction(network: &FactorNetwork) -> Result<ContractionPlan> {
    network.check()?;
    let n = network.len();
    let mut live: Vec<(usize, Vec<SpaceLabel>)> = network
        .factors
        .iter()
        .enumerate()
        .map(|(i, f)| (i, f.labels().to_vec()))
        .collect();
    let mut steps = Vec::new();
    let mut next_id = n;
    let mut peak = if n == 1 { network.factors[0].dim() } else { 0 };

    while live.len() > 1 {
        let mut best: Option<(usize, Vec<&str>, Vec<&str>, usize, usize)> = None;
        for i in 0..live.len() {
            for j in (i + 1)..live.len() {
                let dim = link_result_dim(&live[i].1, &live[j].1);
                let (ki, kj) = (sort_key(&live[i].1), sort_key(&live[j].1));
                let (lo, hi) = if ki <= kj { (ki, kj) } else { (kj, ki) };
                let better = match &best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => (dim, &lo, &hi) < (*bd, blo, bhi),
                };
                if better {
                    best = Some((dim, lo, hi, i, j));
                }
            }
        }
        let (dim, _, _, i, j) = best.expect("at least two live factors");
        let labels = symmetric_difference(&live[i].1, &live[j].1);
        steps.push(ContractionStep {
            left: live[i].0,
            right: live[j].0,
            result: next_id,
            result_labels: labels.iter().map(|l| l.name.clone()).collect(),
            result_dim: dim,
        });
        peak = peak.max(dim);
        live.remove(j);
        live.remove(i);
        live.push((next_id, labels));
        next_id += 1;
    }
    Ok(ContractionPlan { steps, peak_dim: peak })
}

/// Value of the network. With `order == None` the greedy plan is used;
/// otherwise `order` lists `(left, right)` id pairs in SSA numbering and must
/// merge everything into one operator.
pub fn contract(
    network: &FactorNetwork,
    order: Option<&[(usize, usize)]>,
) -> Result<LabeledOperator> {
    network.check()?;
    let owned;
    let order = match order {
        Some(o) => o,
        None => {
            owned = plan_contraction(network)?.order();
            &owned
        }
    };
    execute(network, order)
}

/// Greedy contraction that refuses to run when the planned peak
/// intermediate dimension exceeds `cap`.
pub fn contract_with_cap(network: &FactorNetwork, cap: usize) -> Result<LabeledOperator> {
    let plan = plan_contraction(network)?;
    if plan.peak_dim > cap {
        return Err(Error::ContractTooLarge {
            peak: plan.peak_dim,
            cap,
        });
    }
    execute(network, &plan.order())
}

fn take<'a>(slots: &mut [Option<Cow<'a, LabeledOperator>>], id: usize) -> Result<Cow<'a, LabeledOperator>> {
    slots
        .get_mut(id)
        .and_then(Option::take)
        .ok_or_else(|| Error::MalformedNetwork(format!("no live factor with id {id}")))
}

fn execute(network: &FactorNetwork, order: &[(usize, usize)]) -> Result<LabeledOperator> {
    let n = network.len();
    if n == 0 {
        return Ok(LabeledOperator::scalar(crate::tensors::ONE));
    }
    if order.len() != n - 1 {
        return Err(Error::MalformedNetwork(format!(
            "order has {} steps, {} factors need {}",
            order.len(),
            n,
            n - 1
        )));
    }
    let mut slots: Vec<Option<Cow<LabeledOperator>>> = network.factors.iter().map(|f| Some(Cow::Borrowed(f))).collect();
    let mut used = BTreeSet::new();
    for &(l, r) in order {
        if l == r || !used.insert(l) || !used.insert(r) {
            return Err(Error::MalformedNetwork(format!("factor reused in step ({l}, {r})")));
        }
        let a = take(&mut slots, l)?;
        let b = take(&mut slots, r)?;
        slots.push(Some(Cow::Owned(link(&a, &b)?)));
    }
    Ok(slots
        .pop()
        .flatten()
        .expect("last step leaves the final operator")
        .into_owned())
}
