//! Teleporting parties in and out of a process matrix.
//!
//! Each teleporting party `j` keeps its slot `I_j → O_j` in `W` but acts
//! remotely: the input is teleported to a probe, the party's instrument acts
//! there, and the result is teleported back into `O_j`. Post-selected legs
//! keep only the Bell outcome with trivial correction; communicated legs send
//! the outcome through a message system of dimension `d²` to a corrector.
//!
//! Wire names are derived from the party name, e.g. `A:PI`, `A:POx`.

use std::collections::BTreeMap;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::channels::{ChoiOperator, Instrument};
use crate::error::{Error, Result};
use crate::linkprod::{contract, plan_contraction, FactorNetwork};
use crate::processes::{check_element, probability, Party, PartyLayout, ProcessMatrix};
use crate::teleport::{
    bsm_instrument, bsm_outcome_effect, bsm_postselect0, correction_channel, cu_instrument, BellIndex,
};
use crate::tensors::{total_dim, LabeledOperator, SpaceLabel};

/// Default cap on the dimension of any intermediate operator.
pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyMode {
    /// The instrument is plugged straight into `W`.
    #[serde(rename = "direct")]
    Direct,
    /// Both legs teleported with classical messages and corrections.
    #[serde(rename = "deterministic")]
    Deterministic,
    /// Both legs post-selected.
    #[serde(rename = "full_ps")]
    FullPostSelect,
    /// Input leg post-selected, output leg corrected (party in the past).
    #[serde(rename = "past_ps")]
    PastPostSelect,
    /// Input leg corrected, output leg post-selected (party in the future).
    #[serde(rename = "future_ps")]
    FuturePostSelect,
}

impl PartyMode {
    pub const ALL: [PartyMode; 5] = [
        PartyMode::Direct,
        PartyMode::Deterministic,
        PartyMode::FullPostSelect,
        PartyMode::PastPostSelect,
        PartyMode::FuturePostSelect,
    ];

    pub fn teleports(self) -> bool {
        self != PartyMode::Direct
    }

    /// Probability that this party's post-selections all succeed.
    pub fn success_factor(self, d_in: usize, d_out: usize) -> f64 {
        let (i, o) = ((d_in * d_in) as f64, (d_out * d_out) as f64);
        match self {
            PartyMode::Direct | PartyMode::Deterministic => 1.0,
            PartyMode::FullPostSelect => 1.0 / (i * o),
            PartyMode::PastPostSelect => 1.0 / i,
            PartyMode::FuturePostSelect => 1.0 / o,
        }
    }

    fn sends_out_message(self) -> bool {
        matches!(self, PartyMode::PastPostSelect | PartyMode::Deterministic)
    }

    fn sends_in_message(self) -> bool {
        matches!(self, PartyMode::FuturePostSelect | PartyMode::Deterministic)
    }
}

/// Names of the generated wires of one party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wires {
    /// Probe pair for the input leg, `(PI, PIx)`; `PIx` sits with the agent.
    pub pi: String,
    pub pix: String,
    /// Probe pair for the output leg, `(PO, POx)`; `PO` feeds `O_j`.
    pub po: String,
    pub pox: String,
    /// Input and output of the agent's instrument.
    pub min: String,
    pub mout: String,
    /// Output-leg message: emitted by the agent, read inside.
    pub out_msg: String,
    pub im: String,
    /// Input-leg message: emitted inside, read by the agent.
    pub om: String,
    pub in_msg: String,
}

impl Wires {
    pub fn of(party: &str) -> Self {
        let w = |role: &str| format!("{party}:{role}");
        Self {
            pi: w("PI"),
            pix: w("PIx"),
            po: w("PO"),
            pox: w("POx"),
            min: w("Min"),
            mout: w("Mout"),
            out_msg: w("OutMsg"),
            im: w("IM"),
            om: w("OM"),
            in_msg: w("InMsg"),
        }
    }

    fn all(&self) -> [&str; 10] {
        [
            &self.pi,
            &self.pix,
            &self.po,
            &self.pox,
            &self.min,
            &self.mout,
            &self.out_msg,
            &self.im,
            &self.om,
            &self.in_msg,
        ]
    }
}

/// A layout with a mode and an instrument for every party.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    layout: PartyLayout,
    modes: Vec<PartyMode>,
    instruments: Vec<Instrument>,
}

fn single_slot(party: &Party) -> Result<(&SpaceLabel, &SpaceLabel)> {
    match (party.inputs.as_slice(), party.outputs.as_slice()) {
        ([i], [o]) => Ok((i, o)),
        _ => Err(Error::SpecMismatch(format!(
            "party `{}`: teleportation needs exactly one input and one output space",
            party.name
        ))),
    }
}

impl ProtocolSpec {
    pub fn new(layout: PartyLayout, modes: Vec<PartyMode>, instruments: Vec<Instrument>) -> Result<Self> {
        let n = layout.len();
        if modes.len() != n || instruments.len() != n {
            return Err(Error::SpecMismatch(format!(
                "{n} parties but {} modes and {} instruments",
                modes.len(),
                instruments.len()
            )));
        }
        let mut generated = HashSet::new();
        for ((party, mode), inst) in layout.parties().iter().zip(&modes).zip(&instruments) {
            for e in inst.elements() {
                check_element(party, e)
                    .map_err(|err| Error::SpecMismatch(format!("party `{}`: {err}", party.name)))?;
            }
            if mode.teleports() {
                single_slot(party)?;
                generated.extend(Wires::of(&party.name).all().map(String::from));
            }
        }
        if let Some(l) = layout.all_labels().iter().find(|l| generated.contains(&l.name)) {
            return Err(Error::SpecMismatch(format!("label `{}` clashes with a generated wire", l.name)));
        }
        Ok(Self {
            layout,
            modes,
            instruments,
        })
    }

    /// Every party in the same mode.
    pub fn uniform(layout: PartyLayout, mode: PartyMode, instruments: Vec<Instrument>) -> Result<Self> {
        let modes = vec![mode; layout.len()];
        Self::new(layout, modes, instruments)
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn modes(&self) -> &[PartyMode] {
        &self.modes
    }

    pub fn instruments(&self) -> &[Instrument] {
        &self.instruments
    }

    fn check_against(&self, w: &ProcessMatrix) -> Result<()> {
        if w.layout() != &self.layout {
            return Err(Error::SpecMismatch("protocol layout differs from the process layout".into()));
        }
        Ok(())
    }
}

/// `∏_j` of the per-party success factors.
pub fn success_probability(spec: &ProtocolSpec) -> f64 {
    spec.layout
        .parties()
        .iter()
        .zip(&spec.modes)
        .map(|(p, m)| m.success_factor(p.d_in(), p.d_out()))
        .product()
}

/// Probe pairs and message channels of one party. `messages == false`
/// leaves out the message channels (used by the branch-sum route).
fn ext_factors(party: &Party, mode: PartyMode, messages: bool) -> Result<Vec<LabeledOperator>> {
    if !mode.teleports() {
        return Ok(Vec::new());
    }
    let (i, o) = single_slot(party)?;
    let w = Wires::of(&party.name);
    let mut out = vec![
        LabeledOperator::max_entangled_state(i.dim, &w.pi, &w.pix)?,
        LabeledOperator::max_entangled_state(o.dim, &w.po, &w.pox)?,
    ];
    if messages && mode.sends_out_message() {
        out.push(LabeledOperator::unnormalized_max_entangled(o.dim * o.dim, &w.out_msg, &w.im)?);
    }
    if messages && mode.sends_in_message() {
        out.push(LabeledOperator::unnormalized_max_entangled(i.dim * i.dim, &w.om, &w.in_msg)?);
    }
    Ok(out)
}

/// `W` followed by the probe pairs and message identity channels of every
/// teleporting party. `W` is always the first factor, unchanged.
pub fn build_w_ext(w: &ProcessMatrix, spec: &ProtocolSpec) -> Result<FactorNetwork> {
    spec.check_against(w)?;
    build_ext(w, spec, true)
}

fn build_ext(w: &ProcessMatrix, spec: &ProtocolSpec, messages: bool) -> Result<FactorNetwork> {
    let mut factors = vec![w.op().clone()];
    for (party, &mode) in spec.layout.parties().iter().zip(&spec.modes) {
        factors.extend(ext_factors(party, mode, messages)?);
    }
    FactorNetwork::new(factors)
}

/// The element moved onto the agent's wires.
fn relocate(party: &Party, element: &ChoiOperator, min: &str, mout: &str) -> Result<LabeledOperator> {
    check_element(party, element).map_err(|e| Error::SpecMismatch(e.to_string()))?;
    let (i, o) = single_slot(party)?;
    let op = element.op().squeeze();
    let renames: Vec<(&str, &str)> = [(i.name.as_str(), min), (o.name.as_str(), mout)]
        .into_iter()
        .filter(|(from, _)| op.position(from).is_some())
        .collect();
    op.relabel_many(&renames)
}

/// The operations one party performs for a single instrument element `M`.
/// Deterministic parties use the message-passing network.
pub fn party_gadget(party: &Party, mode: PartyMode, element: &ChoiOperator) -> Result<FactorNetwork> {
    if mode == PartyMode::Direct {
        check_element(party, element).map_err(|e| Error::SpecMismatch(e.to_string()))?;
        return FactorNetwork::new(vec![element.op().clone()]);
    }
    let (i, o) = single_slot(party)?;
    let (di, dout) = (i.dim, o.dim);
    let w = Wires::of(&party.name);
    let ident_out = || ChoiOperator::identity(&w.po, &o.name, dout).map(ChoiOperator::into_op);
    let bsm = |d, a: &str, b: &str, msg: &str| {
        bsm_instrument(d, a, b, msg).map(|inst| inst.channel().into_op())
    };
    let cu = |d, msg: &str, probe: &str, out: &str| cu_instrument(d, msg, probe, out).map(ChoiOperator::into_op);
    let post = |d, a: &str, b: &str| bsm_postselect0(d, a, b).map(ChoiOperator::into_op);

    let factors = match mode {
        PartyMode::Direct => unreachable!(),
        PartyMode::FullPostSelect => vec![
            post(di, &i.name, &w.pi)?,
            relocate(party, element, &w.pix, &w.mout)?,
            post(dout, &w.mout, &w.pox)?,
            ident_out()?,
        ],
        PartyMode::PastPostSelect => vec![
            post(di, &i.name, &w.pi)?,
            cu(dout, &w.im, &w.po, &o.name)?,
            relocate(party, element, &w.pix, &w.mout)?,
            bsm(dout, &w.mout, &w.pox, &w.out_msg)?,
        ],
        PartyMode::FuturePostSelect => vec![
            bsm(di, &i.name, &w.pi, &w.om)?,
            ident_out()?,
            cu(di, &w.in_msg, &w.pix, &w.min)?,
            relocate(party, element, &w.min, &w.mout)?,
            post(dout, &w.mout, &w.pox)?,
        ],
        PartyMode::Deterministic => vec![
            bsm(di, &i.name, &w.pi, &w.om)?,
            cu(dout, &w.im, &w.po, &o.name)?,
            cu(di, &w.in_msg, &w.pix, &w.min)?,
            relocate(party, element, &w.min, &w.mout)?,
            bsm(dout, &w.mout, &w.pox, &w.out_msg)?,
        ],
    };
    FactorNetwork::new(factors)
}

/// One outcome branch of a deterministic party: Bell outcomes `m_in` on the
/// input leg and `m_out` on the output leg, each followed by its correction.
pub fn deterministic_branch(
    party: &Party,
    element: &ChoiOperator,
    m_in: BellIndex,
    m_out: BellIndex,
) -> Result<FactorNetwork> {
    let (i, o) = single_slot(party)?;
    let w = Wires::of(&party.name);
    FactorNetwork::new(vec![
        bsm_outcome_effect(i.dim, &i.name, &w.pi, m_in)?.into_op(),
        correction_channel(i.dim, &w.pix, &w.min, m_in)?.into_op(),
        relocate(party, element, &w.min, &w.mout)?,
        bsm_outcome_effect(o.dim, &w.mout, &w.pox, m_out)?.into_op(),
        correction_channel(o.dim, &w.po, &o.name, m_out)?.into_op(),
    ])
}

fn branches(party: &Party) -> Result<Vec<(BellIndex, BellIndex)>> {
    let (i, o) = single_slot(party)?;
    Ok(BellIndex::all(i.dim)
        .flat_map(|a| BellIndex::all(o.dim).map(move |b| (a, b)))
        .collect())
}

/// What the party looks like from inside `W`: its probes, messages and
/// gadget contracted down to a Choi operator on `I_j, O_j`. Equals
/// `success_factor · M` for every mode.
pub fn effective_choi(party: &Party, mode: PartyMode, element: &ChoiOperator) -> Result<LabeledOperator> {
    let net = FactorNetwork::new(ext_factors(party, mode, true)?)?.join(party_gadget(party, mode, element)?)?;
    contract(&net.squeezed(), None)
}

/// Deterministic party as an explicit sum over all `d_in²·d_out²` branches.
pub fn effective_choi_branch_sum(party: &Party, element: &ChoiOperator) -> Result<LabeledOperator> {
    let probes = FactorNetwork::new(ext_factors(party, PartyMode::Deterministic, false)?)?;
    let mut acc: Option<LabeledOperator> = None;
    for (a, b) in branches(party)? {
        let net = probes.clone().join(deterministic_branch(party, element, a, b)?)?;
        let v = contract(&net.squeezed(), None)?;
        acc = Some(match acc {
            None => v,
            Some(s) => s.add(&v)?,
        });
    }
    Ok(acc.expect("at least one branch"))
}

/// Run options: intermediate-size cap and whether `W` is known to have
/// indefinite causal order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_dim: usize,
    pub indefinite_order: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            indefinite_order: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub modes: BTreeMap<String, PartyMode>,
    /// Contracted probability per outcome tuple, keyed `"a,b,…"` in layout order.
    pub raw: BTreeMap<String, f64>,
    /// `Tr[Wᵀ ⊗ M]` for the same tuple.
    pub direct: BTreeMap<String, f64>,
    /// `raw / factor_analytic`.
    pub normalized: BTreeMap<String, f64>,
    pub factor_analytic: f64,
    pub factor_empirical: f64,
    pub max_abs_error: f64,
    pub max_normalized_error: f64,
    pub peak_dim: usize,
    pub contractions: usize,
    pub advisories: Vec<String>,
}

impl ProtocolReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_abs_error <= tol
    }
}

/// All outcome tuples, first party most significant.
fn outcome_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut t = vec![0; sizes.len()];
            for (slot, &n) in t.iter_mut().zip(sizes).rev() {
                *slot = flat % n;
                flat /= n;
            }
            t
        })
        .collect()
}

fn key(t: &[usize]) -> String {
    t.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Contracts networks of a fixed shape with one greedy plan.
struct PlannedContractor {
    order: Option<Vec<(usize, usize)>>,
    peak_dim: usize,
    cap: usize,
    count: usize,
}

impl PlannedContractor {
    fn new(cap: usize) -> Self {
        Self {
            order: None,
            peak_dim: 0,
            cap,
            count: 0,
        }
    }

    fn value(&mut self, net: &FactorNetwork) -> Result<f64> {
        if self.order.is_none() {
            let plan = plan_contraction(net)?;
            if plan.peak_dim > self.cap {
                return Err(Error::ContractTooLarge {
                    peak: plan.peak_dim,
                    cap: self.cap,
                });
            }
            self.peak_dim = plan.peak_dim;
            self.order = Some(plan.order());
        }
        self.count += 1;
        let v = contract(net, self.order.as_deref())?;
        Ok(v.as_scalar().expect("closed network").re)
    }
}

/// `W_ext` as contracted by [`run_protocol`]: deterministic parties get
/// probes only, their messages live inside the branches.
fn run_ext(w: &ProcessMatrix, spec: &ProtocolSpec) -> Result<FactorNetwork> {
    let mut factors = vec![w.op().clone()];
    for (p, &m) in spec.layout.parties().iter().zip(&spec.modes) {
        factors.extend(ext_factors(p, m, m != PartyMode::Deterministic)?);
    }
    FactorNetwork::new(factors)
}

fn with_gadgets(ext: &FactorNetwork, spec: &ProtocolSpec, elements: &[ChoiOperator]) -> Result<FactorNetwork> {
    let mut net = ext.clone();
    for ((p, &m), e) in spec.layout.parties().iter().zip(&spec.modes).zip(elements) {
        if m != PartyMode::Deterministic {
            net = net.join(party_gadget(p, m, e)?)?;
        }
    }
    Ok(net)
}

/// The closed network [`run_protocol`] contracts for the first outcome of
/// every instrument (and the first Bell branch of deterministic parties).
/// Every other tuple has the same shape.
pub fn protocol_network(w: &ProcessMatrix, spec: &ProtocolSpec) -> Result<FactorNetwork> {
    spec.check_against(w)?;
    let elements: Vec<ChoiOperator> = spec.instruments.iter().map(|i| i.elements()[0].clone()).collect();
    let mut net = with_gadgets(&run_ext(w, spec)?, spec, &elements)?;
    for ((p, &m), e) in spec.layout.parties().iter().zip(&spec.modes).zip(&elements) {
        if m == PartyMode::Deterministic {
            let (a, b) = branches(p)?[0];
            net = net.join(deterministic_branch(p, e, a, b)?)?;
        }
    }
    Ok(net.squeezed())
}

/// Every instrument outcome tuple through the full protocol, compared with
/// plugging the same elements into `W` directly.
///
/// Deterministic parties are evaluated as a sum over their Bell-outcome
/// branches; all other modes contract a single network per tuple.
pub fn run_protocol(w: &ProcessMatrix, spec: &ProtocolSpec, opts: &RunOptions) -> Result<ProtocolReport> {
    spec.check_against(w)?;
    let parties = spec.layout.parties();
    let ext = run_ext(w, spec)?;

    let det_parties: Vec<usize> = (0..parties.len())
        .filter(|&j| spec.modes[j] == PartyMode::Deterministic)
        .collect();
    let det_branches = det_parties
        .iter()
        .map(|&j| branches(&parties[j]))
        .collect::<Result<Vec<_>>>()?;
    let branch_tuples = outcome_tuples(&det_branches.iter().map(Vec::len).collect::<Vec<_>>());

    let factor = success_probability(spec);
    let sizes: Vec<usize> = spec.instruments.iter().map(Instrument::len).collect();
    let mut contractor = PlannedContractor::new(opts.max_dim);
    let mut report = ProtocolReport {
        modes: parties.iter().map(|p| p.name.clone()).zip(spec.modes.iter().copied()).collect(),
        raw: BTreeMap::new(),
        direct: BTreeMap::new(),
        normalized: BTreeMap::new(),
        factor_analytic: factor,
        factor_empirical: 0.0,
        max_abs_error: 0.0,
        max_normalized_error: 0.0,
        peak_dim: 0,
        contractions: 0,
        advisories: advisories(spec, opts),
    };
    let (mut raw_sum, mut direct_sum) = (0.0, 0.0);
    for tuple in outcome_tuples(&sizes) {
        let elements: Vec<ChoiOperator> = tuple
            .iter()
            .zip(&spec.instruments)
            .map(|(&k, inst)| inst.elements()[k].clone())
            .collect();
        let base = with_gadgets(&ext, spec, &elements)?;
        let mut raw = 0.0;
        for bt in &branch_tuples {
            let mut net = base.clone();
            for ((&j, choice), opts) in det_parties.iter().zip(bt).zip(&det_branches) {
                let (a, b) = opts[*choice];
                net = net.join(deterministic_branch(&parties[j], &elements[j], a, b)?)?;
            }
            raw += contractor.value(&net.squeezed())?;
        }
        let direct = probability(w, &elements)?;
        let normalized = raw / factor;
        report.max_abs_error = report.max_abs_error.max((raw - factor * direct).abs());
        report.max_normalized_error = report.max_normalized_error.max((normalized - direct).abs());
        raw_sum += raw;
        direct_sum += direct;
        let k = key(&tuple);
        report.raw.insert(k.clone(), raw);
        report.direct.insert(k.clone(), direct);
        report.normalized.insert(k, normalized);
    }
    report.factor_empirical = raw_sum / direct_sum;
    report.peak_dim = contractor.peak_dim;
    report.contractions = contractor.count;
    Ok(report)
}

fn advisories(spec: &ProtocolSpec, opts: &RunOptions) -> Vec<String> {
    if !opts.indefinite_order {
        return Vec::new();
    }
    spec.layout
        .parties()
        .iter()
        .zip(&spec.modes)
        .filter(|(_, &m)| m == PartyMode::Deterministic)
        .map(|(p, _)| {
            format!(
                "party `{}` is teleported deterministically out of a process with indefinite causal order; \
                 the statistics are exact but causally ordered agents cannot run this protocol",
                p.name
            )
        })
        .collect()
}

fn inside(party: &Party, mode: PartyMode) -> Party {
    let w = Wires::of(&party.name);
    let mut p = party.clone();
    match mode {
        PartyMode::PastPostSelect => {
            let d = party.d_out();
            p.inputs.push(SpaceLabel::new(w.im, d * d));
        }
        PartyMode::FuturePostSelect => {
            let d = party.d_in();
            p.outputs.push(SpaceLabel::new(w.om, d * d));
        }
        _ => {}
    }
    p
}

fn outside(party: &Party, mode: PartyMode) -> Option<Party> {
    let w = Wires::of(&party.name);
    let name = format!("{}~", party.name);
    match mode {
        PartyMode::PastPostSelect => {
            let d = party.d_out();
            Some(Party {
                name,
                inputs: Vec::new(),
                outputs: vec![SpaceLabel::new(w.out_msg, d * d)],
            })
        }
        PartyMode::FuturePostSelect => {
            let d = party.d_in();
            Some(Party {
                name,
                inputs: vec![SpaceLabel::new(w.in_msg, d * d)],
                outputs: Vec::new(),
            })
        }
        _ => None,
    }
}

/// `W` with the message channels of the partially post-selected parties
/// attached, as a process over the enlarged set of parties. A party in the
/// past gains the message input `j:IM` and an outside partner `j~` that only
/// emits `j:OutMsg`; a party in the future gains the message output `j:OM`
/// and a partner `j~` that only receives `j:InMsg`. Probes are left out.
pub fn build_v(w: &ProcessMatrix, spec: &ProtocolSpec, max_dim: usize) -> Result<ProcessMatrix> {
    spec.check_against(w)?;
    let parties = spec.layout.parties();
    for (p, &m) in parties.iter().zip(&spec.modes) {
        if matches!(m, PartyMode::FullPostSelect | PartyMode::Deterministic) {
            return Err(Error::SpecMismatch(format!(
                "party `{}`: the extended process only covers past/future post-selection",
                p.name
            )));
        }
        if m.teleports() {
            single_slot(p)?;
        }
    }
    let mut insides = Vec::new();
    let mut outsides = Vec::new();
    let mut extra = Vec::new();
    for (p, &m) in parties.iter().zip(&spec.modes) {
        insides.push(inside(p, m));
        outsides.extend(outside(p, m));
        extra.extend(ext_factors(p, m, true)?.into_iter().skip(2));
    }
    let dim = w.op().dim() * extra.iter().map(LabeledOperator::dim).product::<usize>();
    if dim > max_dim {
        return Err(Error::ContractTooLarge { peak: dim, cap: max_dim });
    }
    let layout = PartyLayout::new(insides.into_iter().chain(outsides).collect())?;
    let mut op = w.op().clone();
    for f in &extra {
        op = op.tensor_product(f)?;
    }
    let order: Vec<SpaceLabel> = layout.all_labels();
    let names: Vec<&str> = order.iter().map(|l| l.name.as_str()).collect();
    debug_assert_eq!(total_dim(&order), dim);
    ProcessMatrix::new(op.permute_labels(&names)?, layout)
}
