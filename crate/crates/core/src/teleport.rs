//! Generalised d-dimensional teleportation primitives.
//!
//! Bell basis `|ψ_nm⟩ = d^{-1/2} Σ_j e^{2πi jn/d} |j⟩|j+m⟩` and corrections
//! `U_nm = Σ_k e^{2πi kn/d} |k⟩⟨k+m|` (indices mod d). Outcome `(n, m)` is
//! carried on message systems as the flat index `n·d + m`, and `U_00 = 𝟙`.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channels::{ChoiOperator, Instrument};
use crate::error::{Error, Result};
use crate::tensors::{SpaceLabel, C64, ZERO};

/// Outcome `(n, m)` of a generalised Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellIndex {
    pub n: usize,
    pub m: usize,
}

impl BellIndex {
    pub fn new(d: usize, n: usize, m: usize) -> Result<Self> {
        if n >= d || m >= d {
            return Err(Error::IndexOutOfRange(format!("({n}, {m}) with d = {d}")));
        }
        Ok(Self { n, m })
    }

    pub fn flat(self, d: usize) -> usize {
        self.n * d + self.m
    }

    pub fn from_flat(d: usize, flat: usize) -> Result<Self> {
        if flat >= d * d {
            return Err(Error::IndexOutOfRange(format!("flat index {flat} with d = {d}")));
        }
        Ok(Self {
            n: flat / d,
            m: flat % d,
        })
    }

    /// All `d²` outcomes in flat order.
    pub fn all(d: usize) -> impl Iterator<Item = BellIndex> {
        (0..d * d).map(move |f| BellIndex { n: f / d, m: f % d })
    }
}

fn phase(d: usize, k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64)
}

/// `|ψ_nm⟩` on two d-dimensional systems, index `a·d + b`.
pub fn bell_state(d: usize, n: usize, m: usize) -> Result<Vec<C64>> {
    BellIndex::new(d, n, m)?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut v = vec![ZERO; d * d];
    for j in 0..d {
        v[j * d + (j + m) % d] = phase(d, j * n) * amp;
    }
    Ok(v)
}

/// `U_nm = Σ_k e^{2πi kn/d} |k⟩⟨(k+m) mod d|`.
pub fn correction_unitary(d: usize, n: usize, m: usize) -> Result<Array2<C64>> {
    BellIndex::new(d, n, m)?;
    let mut u = Array2::zeros((d, d));
    for k in 0..d {
        u[[k, (k + m) % d]] = phase(d, k * n);
    }
    Ok(u)
}

fn bra(v: &[C64]) -> Array2<C64> {
    Array2::from_shape_fn((1, v.len()), |(_, i)| v[i].conj())
}

/// Bell measurement on `(a, b)` that writes its outcome into `msg`
/// (dimension `d²`): Kraus operators `|k⟩_msg ⟨ψ_k|_ab`.
pub fn bsm_instrument(d: usize, a: &str, b: &str, msg: &str) -> Result<Instrument> {
    let inputs = [SpaceLabel::new(a, d), SpaceLabel::new(b, d)];
    let outputs = [SpaceLabel::new(msg, d * d)];
    let elements = BellIndex::all(d)
        .map(|idx| {
            let psi = bell_state(d, idx.n, idx.m)?;
            let mut k = Array2::zeros((d * d, d * d));
            for (col, amp) in psi.iter().enumerate() {
                k[[idx.flat(d), col]] = amp.conj();
            }
            ChoiOperator::from_kraus(&[k], &inputs, &outputs)
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(elements)
}

/// The POVM element `|ψ_k⟩⟨ψ_k|` on `(a, b)` with nothing emitted.
pub fn bsm_outcome_effect(d: usize, a: &str, b: &str, outcome: BellIndex) -> Result<ChoiOperator> {
    let psi = bell_state(d, outcome.n, outcome.m)?;
    let inputs = [SpaceLabel::new(a, d), SpaceLabel::new(b, d)];
    ChoiOperator::from_kraus(&[bra(&psi)], &inputs, &[])
}

/// Bell measurement post-selected on the trivial-correction outcome `(0, 0)`:
/// the effect `|φ⁺⟩⟨φ⁺|`.
pub fn bsm_postselect0(d: usize, a: &str, b: &str) -> Result<ChoiOperator> {
    bsm_outcome_effect(d, a, b, BellIndex { n: 0, m: 0 })
}

/// Reads the message `msg` (dimension `d²`) and applies the matching
/// correction from `probe` to `out`: Kraus set `{U_k ⊗ ⟨k|_msg}`.
pub fn cu_instrument(d: usize, msg: &str, probe: &str, out: &str) -> Result<ChoiOperator> {
    let inputs = [SpaceLabel::new(msg, d * d), SpaceLabel::new(probe, d)];
    let outputs = [SpaceLabel::new(out, d)];
    let kraus = BellIndex::all(d)
        .map(|idx| {
            let u = correction_unitary(d, idx.n, idx.m)?;
            // input index = flat_msg · d + probe
            let mut k = Array2::zeros((d, d * d * d));
            for r in 0..d {
                for c in 0..d {
                    k[[r, idx.flat(d) * d + c]] = u[[r, c]];
                }
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    ChoiOperator::from_kraus(&kraus, &inputs, &outputs)
}

/// Unitary correction channel `U_k` from `probe` to `out`.
pub fn correction_channel(d: usize, probe: &str, out: &str, outcome: BellIndex) -> Result<ChoiOperator> {
    let u = correction_unitary(d, outcome.n, outcome.m)?;
    ChoiOperator::unitary(&u, SpaceLabel::new(probe, d), SpaceLabel::new(out, d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportOutcome {
    pub n: usize,
    pub m: usize,
    pub flat: usize,
    pub probability: f64,
    pub fidelity: f64,
    pub uncorrected_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportReport {
    pub dim: usize,
    pub outcomes: Vec<TeleportOutcome>,
    pub max_probability_error: f64,
    pub min_fidelity: f64,
}

/// Bob's unnormalised state after Alice obtains `(n, m)` when teleporting
/// `phi` through `|ψ_00⟩`: `(⟨ψ_nm| ⊗ 𝟙)(|φ⟩ ⊗ |ψ_00⟩)`.
pub fn conditional_state(d: usize, phi: &[C64], outcome: BellIndex) -> Result<Vec<C64>> {
    let psi = bell_state(d, outcome.n, outcome.m)?;
    let amp = 1.0 / (d as f64).sqrt();
    // |ψ_00⟩_{A'B} = amp Σ_k |k⟩|k⟩, so B = k pairs with A' = k
    Ok((0..d)
        .map(|k| {
            (0..d)
                .map(|a| psi[a * d + k].conj() * phi[a] * amp)
                .sum::<C64>()
        })
        .collect())
}

fn apply(u: &Array2<C64>, v: &[C64]) -> Vec<C64> {
    (0..u.nrows())
        .map(|r| (0..v.len()).map(|c| u[[r, c]] * v[c]).sum())
        .collect()
}

fn overlap_sq(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

/// Full single-state protocol: Bell measurement, outcome transmission and
/// correction, for every outcome.
pub fn teleport_state_demo(d: usize, phi: &[C64]) -> Result<TeleportReport> {
    if d < 1 {
        return Err(Error::BadDimension("teleportation needs d >= 1".into()));
    }
    let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    if phi.len() != d || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::BadState(format!(
            "expected a unit vector of length {d}, got length {} and norm² {norm}",
            phi.len()
        )));
    }
    let target = 1.0 / (d * d) as f64;
    let mut outcomes = Vec::with_capacity(d * d);
    for idx in BellIndex::all(d) {
        let v = conditional_state(d, phi, idx)?;
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let s = p.sqrt();
        let normalized: Vec<C64> = v.iter().map(|z| z / s).collect();
        let corrected = apply(&correction_unitary(d, idx.n, idx.m)?, &normalized);
        outcomes.push(TeleportOutcome {
            n: idx.n,
            m: idx.m,
            flat: idx.flat(d),
            probability: p,
            fidelity: overlap_sq(phi, &corrected),
            uncorrected_fidelity: overlap_sq(phi, &normalized),
        });
    }
    let max_probability_error = outcomes
        .iter()
        .map(|o| (o.probability - target).abs())
        .fold(0.0, f64::max);
    let min_fidelity = outcomes.iter().map(|o| o.fidelity).fold(f64::INFINITY, f64::min);
    Ok(TeleportReport {
        dim: d,
        outcomes,
        max_probability_error,
        min_fidelity,
    })
}

/// `Σ_k |ψ_k⟩⟨ψ_k|`, used to check completeness.
pub fn bell_completeness_sum(d: usize) -> Result<Array2<C64>> {
    let mut acc = Array2::zeros((d * d, d * d));
    for idx in BellIndex::all(d) {
        let v = bell_state(d, idx.n, idx.m)?;
        for r in 0..d * d {
            for c in 0..d * d {
                acc[[r, c]] += v[r] * v[c].conj();
            }
        }
    }
    Ok(acc)
}
