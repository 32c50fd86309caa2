//! Scenario files: a process, the parties' modes and instruments, and run
//! settings.

use std::path::{Path, PathBuf};

use cts_core::channels::{random_instrument, random_state, ChoiOperator, Instrument};
use cts_core::processes::{
    build_channel_comb, build_quantum_switch_with_target, build_state_process, Party, PartyLayout, ProcessMatrix,
};
use cts_core::protocols::{PartyMode, ProtocolSpec};
use cts_core::tensors::{matrix_from_rows, OperatorJson};
use cts_core::{Error, LabeledOperator, SpaceLabel, C64};
use ndarray::Array2;
use serde::Deserialize;

use crate::CliError;

pub type Rows = Vec<Vec<[f64; 2]>>;

fn default_tol() -> f64 {
    1e-9
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub process: ProcessSpec,
    #[serde(default)]
    pub parties: Vec<PartySpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// Where to write the report, in addition to stdout.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// A pure or mixed state.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Ket(Vec<[f64; 2]>),
    Matrix(Rows),
    Basis(usize),
    /// `|+⟩` on a qubit.
    Plus,
    /// Seeded random mixed state.
    Random(u64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity,
    Unitary(Rows),
    Kraus(Vec<Rows>),
    /// Seeded random CPTP map.
    Random(u64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProcessSpec {
    Builtin(Builtin),
    Explicit(ExplicitProcess),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum Builtin {
    /// One party receiving a state; its output is discarded.
    State {
        #[serde(default = "party_a")]
        party: String,
        #[serde(default = "default_dim")]
        d: usize,
        #[serde(default = "default_dim")]
        out_dim: usize,
        #[serde(default)]
        state: Option<StateSpec>,
    },
    /// Two parties in a fixed order joined by a channel.
    Comb {
        #[serde(default = "party_a")]
        first: String,
        #[serde(default = "party_b")]
        second: String,
        #[serde(default = "default_dim")]
        d: usize,
        #[serde(default = "default_dim")]
        out_dim: usize,
        #[serde(default)]
        state: Option<StateSpec>,
        #[serde(default)]
        channel: Option<ChannelSpec>,
    },
    /// Quantum switch on parties `A`, `B` with final party `F`.
    Switch {
        #[serde(default = "default_dim")]
        d: usize,
        #[serde(default)]
        control: Option<StateSpec>,
        #[serde(default)]
        target: Option<StateSpec>,
    },
}

fn party_a() -> String {
    "A".into()
}

fn party_b() -> String {
    "B".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitProcess {
    pub matrix: OperatorJson,
    pub layout: PartyLayout,
    /// Marks the process as causally nonseparable for advisories.
    #[serde(default)]
    pub indefinite_order: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentSpec {
    /// One Kraus list per outcome.
    KrausSets(Vec<Vec<Rows>>),
    /// Measurement only, one effect per outcome (for parties with trivial output).
    Povm(Vec<Rows>),
    Unitary(Rows),
    Identity,
    /// Seeded random instrument; the seed is derived from the scenario seed.
    Random { outcomes: usize },
}

fn default_mode() -> PartyMode {
    PartyMode::Direct
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartySpec {
    pub name: String,
    pub d_in: usize,
    pub d_out: usize,
    #[serde(default = "default_mode")]
    pub mode: PartyMode,
    #[serde(default)]
    pub instrument: Option<InstrumentSpec>,
}

/// A process built from a scenario, plus whether it has indefinite order.
#[derive(Debug, Clone)]
pub struct BuiltProcess {
    pub w: ProcessMatrix,
    pub indefinite_order: bool,
}

fn parse_err(e: serde_json::Error) -> CliError {
    CliError::Parse {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parse a scenario, reporting syntax and schema errors with their position.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    serde_json::from_str(text).map_err(parse_err)
}

/// What `validate` reads: a process, optionally wrapped in a scenario that
/// also carries a tolerance and seed.
#[derive(Debug, Clone)]
pub struct ProcessInput {
    pub process: ProcessSpec,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// A process file is either a whole scenario or a bare process spec.
pub fn parse_process(text: &str) -> Result<ProcessInput, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    if value.get("process").is_some() {
        let s = parse_scenario(text)?;
        Ok(ProcessInput {
            process: s.process,
            tol: Some(s.tol),
            seed: Some(s.seed),
        })
    } else {
        Ok(ProcessInput {
            process: serde_json::from_str(text).map_err(parse_err)?,
            tol: None,
            seed: None,
        })
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn state_matrix(spec: Option<&StateSpec>, d: usize) -> Result<Array2<C64>, Error> {
    let ket = |v: &[C64]| Array2::from_shape_fn((v.len(), v.len()), |(r, c)| v[r] * v[c].conj());
    match spec {
        None => state_matrix(Some(&StateSpec::Basis(0)), d),
        Some(StateSpec::Basis(k)) => {
            if *k >= d {
                return Err(invalid(format!("basis state {k} out of range for d = {d}")));
            }
            let mut m = Array2::zeros((d, d));
            m[[*k, *k]] = C64::new(1.0, 0.0);
            Ok(m)
        }
        Some(StateSpec::Plus) => {
            if d != 2 {
                return Err(invalid("`plus` is a qubit state"));
            }
            Ok(Array2::from_elem((2, 2), C64::new(0.5, 0.0)))
        }
        Some(StateSpec::Ket(v)) => {
            let v: Vec<C64> = v.iter().map(|z| C64::new(z[0], z[1])).collect();
            Ok(ket(&v))
        }
        Some(StateSpec::Matrix(rows)) => matrix_from_rows(rows),
        Some(StateSpec::Random(seed)) => Ok(random_state(&[SpaceLabel::new("s", d)], *seed)?.data().clone()),
    }
}

fn target_vector(spec: Option<&StateSpec>, d: usize) -> Result<Vec<C64>, Error> {
    match spec {
        None => target_vector(Some(&StateSpec::Basis(0)), d),
        Some(StateSpec::Basis(k)) => {
            if *k >= d {
                return Err(invalid(format!("basis state {k} out of range for d = {d}")));
            }
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[*k] = C64::new(1.0, 0.0);
            Ok(v)
        }
        Some(StateSpec::Ket(v)) => Ok(v.iter().map(|z| C64::new(z[0], z[1])).collect()),
        Some(_) => Err(invalid("the switch target must be a pure state (`ket` or `basis`)")),
    }
}

fn comb_channel(spec: Option<&ChannelSpec>, d: usize) -> Result<ChoiOperator, Error> {
    let (i, o) = (SpaceLabel::new("x", d), SpaceLabel::new("y", d));
    match spec {
        None | Some(ChannelSpec::Identity) => ChoiOperator::identity("x", "y", d),
        Some(ChannelSpec::Unitary(rows)) => ChoiOperator::unitary(&matrix_from_rows(rows)?, i, o),
        Some(ChannelSpec::Kraus(list)) => {
            let kraus = list.iter().map(|r| matrix_from_rows(r)).collect::<Result<Vec<_>, _>>()?;
            ChoiOperator::from_kraus(&kraus, &[i], &[o])
        }
        Some(ChannelSpec::Random(seed)) => cts_core::channels::random_cptp(&[i], &[o], *seed),
    }
}

impl ProcessSpec {
    pub fn build(&self) -> Result<BuiltProcess, Error> {
        match self {
            ProcessSpec::Builtin(Builtin::State { party, d, out_dim, state }) => Ok(BuiltProcess {
                w: build_state_process(party, &state_matrix(state.as_ref(), *d)?, *out_dim)?,
                indefinite_order: false,
            }),
            ProcessSpec::Builtin(Builtin::Comb {
                first,
                second,
                d,
                out_dim,
                state,
                channel,
            }) => Ok(BuiltProcess {
                w: build_channel_comb(
                    first,
                    second,
                    &state_matrix(state.as_ref(), *d)?,
                    &comb_channel(channel.as_ref(), *d)?,
                    *out_dim,
                )?,
                indefinite_order: false,
            }),
            ProcessSpec::Builtin(Builtin::Switch { d, control, target }) => {
                let control = state_matrix(Some(control.as_ref().unwrap_or(&StateSpec::Plus)), 2)?;
                Ok(BuiltProcess {
                    w: build_quantum_switch_with_target(*d, &control, &target_vector(target.as_ref(), *d)?)?,
                    indefinite_order: true,
                })
            }
            ProcessSpec::Explicit(e) => {
                let op = LabeledOperator::try_from(e.matrix.clone())?;
                Ok(BuiltProcess {
                    w: ProcessMatrix::new(op, e.layout.clone())?,
                    indefinite_order: e.indefinite_order,
                })
            }
        }
    }
}

fn instrument_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64 + 1)
}

fn build_instrument(party: &Party, spec: Option<&InstrumentSpec>, seed: u64) -> Result<Instrument, Error> {
    let (ins, outs) = (&party.inputs, &party.outputs);
    match spec {
        None => random_instrument(ins, outs, 2.min(party.d_in() * party.d_out()), seed),
        Some(InstrumentSpec::Random { outcomes }) => random_instrument(ins, outs, *outcomes, seed),
        Some(InstrumentSpec::KrausSets(sets)) => {
            let sets = sets
                .iter()
                .map(|set| set.iter().map(|r| matrix_from_rows(r)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Instrument::from_kraus_sets(&sets, ins, outs)
        }
        Some(InstrumentSpec::Povm(effects)) => {
            if party.d_out() != 1 {
                return Err(invalid(format!("party `{}`: `povm` needs a trivial output", party.name)));
            }
            let elements = effects
                .iter()
                .map(|rows| {
                    let e = LabeledOperator::new(ins.clone(), matrix_from_rows(rows)?)?;
                    let op = e.transpose().tensor_product(&LabeledOperator::identity(outs.clone())?)?;
                    ChoiOperator::new(
                        op,
                        ins.iter().map(|l| l.name.clone()).collect(),
                        outs.iter().map(|l| l.name.clone()).collect(),
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            Instrument::new(elements)
        }
        Some(InstrumentSpec::Unitary(rows)) => {
            let u = matrix_from_rows(rows)?;
            Ok(Instrument::deterministic(ChoiOperator::from_kraus(&[u], ins, outs)?))
        }
        Some(InstrumentSpec::Identity) => {
            if party.d_in() != party.d_out() {
                return Err(invalid(format!("party `{}`: identity needs d_in = d_out", party.name)));
            }
            let u = Array2::from_diag_elem(party.d_in(), C64::new(1.0, 0.0));
            Ok(Instrument::deterministic(ChoiOperator::from_kraus(&[u], ins, outs)?))
        }
    }
}

fn mismatch(party: &str, what: impl std::fmt::Display) -> Error {
    Error::SpecMismatch(format!("party `{party}`: {what}"))
}

impl Scenario {
    /// The process and a protocol with one entry per process party, in
    /// layout order.
    pub fn build(&self) -> Result<(BuiltProcess, ProtocolSpec), Error> {
        let built = self.process.build()?;
        let layout = built.w.layout().clone();
        for p in &self.parties {
            if layout.party(&p.name).is_none() {
                return Err(mismatch(&p.name, "not a party of the process"));
            }
        }
        let mut modes = Vec::new();
        let mut instruments = Vec::new();
        for (j, party) in layout.parties().iter().enumerate() {
            let mut specs = self.parties.iter().filter(|p| p.name == party.name);
            let spec = specs.next().ok_or_else(|| mismatch(&party.name, "missing from the scenario"))?;
            if specs.next().is_some() {
                return Err(mismatch(&party.name, "listed twice"));
            }
            if spec.d_in != party.d_in() || spec.d_out != party.d_out() {
                return Err(mismatch(
                    &party.name,
                    format!(
                        "scenario says d_in = {}, d_out = {} but the process has d_in = {}, d_out = {}",
                        spec.d_in,
                        spec.d_out,
                        party.d_in(),
                        party.d_out()
                    ),
                ));
            }
            let inst = build_instrument(party, spec.instrument.as_ref(), instrument_seed(self.seed, j))
                .map_err(|e| match e {
                    Error::SpecMismatch(_) => e,
                    other => mismatch(&party.name, other),
                })?;
            modes.push(spec.mode);
            instruments.push(inst);
        }
        let spec = ProtocolSpec::new(layout, modes, instruments)?;
        Ok((built, spec))
    }
}
