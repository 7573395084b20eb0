//! The multi-receiver energy-teleportation pipeline.
//!
//! One shot: prepare `(k|0…0⟩ + h|W_N⟩)/√(h²+k²)`, measure qubit 0 (the
//! sender) in the X basis to get μ, apply `Z` to every receiver when μ = −1,
//! Z-measure the receivers in the configured order, then read qubit 0 out in
//! Z. All ledger rows are functions of those final Z outcomes.
//!
//! Classical bit layout of [`protocol_circuit`]: bit 0 holds μ, bit `r` holds
//! receiver `r`, bit `N` holds the sender's final Z readout.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{build_initial_state, build_truncated_initial_state, PrepStrategy};
use crate::circuit::Circuit;
use crate::error::{QetError, Result};
use crate::gate::{Basis, GateOp, Matrix2};
use crate::observables::{e0, estimate_from_counts, Counts, E0Convention, Estimate, ModelParams, ObservableSpec};
use crate::oracle::{enumerate_branches, exact_averaged_expectation, BranchDistribution};
use crate::rng::RngStream;
use crate::state::{QuantumState, Sign};

pub const SENDER: usize = 0;
pub const MU_BIT: usize = 0;
pub const DEFAULT_SHOTS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub params: ModelParams,
    pub shots: u64,
    pub seed: u64,
    pub prep: PrepStrategy,
    /// Measurement order of the receivers, a permutation of `1..N`.
    pub receiver_order: Vec<usize>,
    pub e0_convention: E0Convention,
    /// Apply `U_μ` at the receivers. Neutral for every diagonal observable.
    pub feedforward: bool,
    /// Negative control: leave the last receiver out of the W distribution.
    pub truncated_prep: bool,
}

impl ProtocolConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            receiver_order: (1..params.n).collect(),
            params,
            shots: DEFAULT_SHOTS,
            seed: 0,
            prep: PrepStrategy::default(),
            e0_convention: E0Convention::default(),
            feedforward: true,
            truncated_prep: false,
        }
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.receiver_order = order;
        self
    }

    pub fn with_prep(mut self, prep: PrepStrategy) -> Self {
        self.prep = prep;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.params.n
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.params.n, self.params.h, self.params.k)?;
        if self.shots == 0 {
            return Err(QetError::InvalidParameter("shots must be at least 1".into()));
        }
        check_receiver_order(&self.receiver_order, self.params.n)
    }
}

pub fn check_receiver_order(order: &[usize], n: usize) -> Result<()> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..n).collect::<Vec<_>>() {
        return Err(QetError::InvalidReceiverOrder(n));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub mu: Sign,
    pub receivers: BTreeMap<usize, u8>,
    pub sender_z: u8,
}

impl ShotRecord {
    /// Final computational-basis outcome of the whole register.
    pub fn basis_index(&self, num_qubits: usize) -> usize {
        let mut idx = usize::from(self.sender_z) << (num_qubits - 1);
        for (&q, &b) in &self.receivers {
            idx |= usize::from(b) << (num_qubits - 1 - q);
        }
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub e0: f64,
    pub receiver_order: Vec<usize>,
    pub h_total_post: Estimate,
    /// `h_sub[j-1]` is the subsystem of receivers at order positions `j..`.
    pub h_sub: Vec<Estimate>,
    /// Indexed by qubit.
    pub local: Vec<Estimate>,
    /// `harvested[j-1] = H_sub(j) − H_sub(j+1)`, with `H_sub(N) = 0`.
    pub harvested: Vec<Estimate>,
    pub p_mu_plus: Estimate,
}

impl EnergyLedger {
    /// Harvested energy keyed by the receiver measured at each position.
    pub fn harvested_by_receiver(&self) -> BTreeMap<usize, Estimate> {
        self.receiver_order
            .iter()
            .copied()
            .zip(self.harvested.iter().copied())
            .collect()
    }

    pub fn receiver_sum(&self) -> f64 {
        self.local[1..].iter().map(|e| e.mean).sum()
    }

    pub fn all_estimates(&self) -> impl Iterator<Item = &Estimate> {
        std::iter::once(&self.h_total_post)
            .chain(&self.h_sub)
            .chain(&self.local)
            .chain(&self.harvested)
    }
}

pub fn prep_circuit(config: &ProtocolConfig) -> Result<Circuit> {
    let ModelParams { n, h, k } = config.params;
    if config.truncated_prep {
        build_truncated_initial_state(n, h, k, config.prep)
    } else {
        build_initial_state(n, h, k, config.prep)
    }
}

/// Full program: preparation, injection, feedforward, harvest, sender readout.
pub fn protocol_circuit(config: &ProtocolConfig) -> Result<Circuit> {
    config.validate()?;
    let n = config.num_qubits();
    let mut c = prep_circuit(config)?;
    c.push(GateOp::measure(SENDER, Basis::X, MU_BIT))?;
    if config.feedforward {
        for &r in &config.receiver_order {
            c.push(GateOp::conditioned(MU_BIT, 1, GateOp::z(r)))?;
        }
    }
    for &r in &config.receiver_order {
        c.push(GateOp::measure(r, Basis::Z, r))?;
    }
    c.push(GateOp::measure(SENDER, Basis::Z, n))?;
    Ok(c)
}

/// Preparation plus the X-basis measurement on the sender, nothing after.
pub fn injection_circuit(config: &ProtocolConfig) -> Result<Circuit> {
    config.validate()?;
    let mut c = prep_circuit(config)?;
    c.push(GateOp::measure(SENDER, Basis::X, MU_BIT))?;
    Ok(c)
}

pub fn prepared_state(config: &ProtocolConfig) -> Result<QuantumState> {
    let mut state = QuantumState::new(config.num_qubits())?;
    prep_circuit(config)?.apply_unitary_to(&mut state)?;
    Ok(state)
}

/// Projective measurement of the sender with `σ(μ) = ½(1 + μX₀)`.
pub fn inject<R: Rng + ?Sized>(state: &mut QuantumState, rng: &mut R) -> Result<Sign> {
    Ok(Sign::from_bit(state.measure(SENDER, Basis::X, rng)?))
}

/// `U_μ`: identity for μ = +1, `Z` on every receiver for μ = −1.
pub fn feedforward(state: &mut QuantumState, mu: Sign, receivers: &[usize]) -> Result<()> {
    if mu == Sign::Minus {
        let z = Matrix2::z();
        for &r in receivers {
            state.apply_unitary(&GateOp::single("z", z, r))?;
        }
    }
    Ok(())
}

/// Z-measures the receivers one after another in `order`.
pub fn harvest<R: Rng + ?Sized>(state: &mut QuantumState, order: &[usize], rng: &mut R) -> Result<BTreeMap<usize, u8>> {
    order
        .iter()
        .map(|&r| Ok((r, state.measure(r, Basis::Z, rng)?)))
        .collect()
}

fn run_shot(prepared: &QuantumState, config: &ProtocolConfig, stream: RngStream) -> Result<ShotRecord> {
    let mut rng = stream.rng();
    let mut state = prepared.clone();
    let mu = inject(&mut state, &mut rng)?;
    if config.feedforward {
        feedforward(&mut state, mu, &config.receiver_order)?;
    }
    let receivers = harvest(&mut state, &config.receiver_order, &mut rng)?;
    let sender_z = state.measure(SENDER, Basis::Z, &mut rng)?;
    Ok(ShotRecord {
        mu,
        receivers,
        sender_z,
    })
}

/// Executes `config.shots` independent shots. Shot `i` uses substream `i`
/// of the master seed, and results come back in shot order.
pub fn sample_shots(config: &ProtocolConfig) -> Result<Vec<ShotRecord>> {
    config.validate()?;
    let prepared = prepared_state(config)?;
    (0..config.shots)
        .into_par_iter()
        .map(|i| run_shot(&prepared, config, RngStream::new(config.seed, i)))
        .collect()
}

struct LedgerObservables {
    total: ObservableSpec,
    sub: Vec<ObservableSpec>,
    local: Vec<ObservableSpec>,
}

fn ledger_observables(config: &ProtocolConfig) -> Result<LedgerObservables> {
    let n = config.num_qubits();
    let order = &config.receiver_order;
    Ok(LedgerObservables {
        total: ObservableSpec::total(n),
        sub: (1..n)
            .map(|m| ObservableSpec::subsystem(n, m, order[m - 1..].to_vec()))
            .collect::<Result<_>>()?,
        local: (0..n).map(|q| ObservableSpec::local(n, q)).collect::<Result<_>>()?,
    })
}

fn assemble(
    config: &ProtocolConfig,
    h_total_post: Estimate,
    h_sub: Vec<Estimate>,
    local: Vec<Estimate>,
    p_mu_plus: Estimate,
) -> Result<EnergyLedger> {
    let harvested = config
        .receiver_order
        .iter()
        .enumerate()
        .map(|(pos, &r)| {
            let next = h_sub.get(pos + 1).map_or(0.0, |e| e.mean);
            // Per shot the difference is exactly receiver r's own reading.
            Estimate {
                mean: h_sub[pos].mean - next,
                stderr: local[r].stderr,
                shots: local[r].shots,
            }
        })
        .collect();
    Ok(EnergyLedger {
        e0: e0(config.params.h, config.params.k, config.e0_convention)?,
        receiver_order: config.receiver_order.clone(),
        h_total_post,
        h_sub,
        local,
        harvested,
        p_mu_plus,
    })
}

pub fn ledger_from_shots(config: &ProtocolConfig, shots: &[ShotRecord]) -> Result<EnergyLedger> {
    let n = config.num_qubits();
    let mut counts = Counts::new(n);
    let mut mu_plus = Counts::new(1);
    for s in shots {
        counts.add(s.basis_index(n), 1);
        // Index 1 marks μ = +1 so the local number operator counts it.
        mu_plus.add(usize::from(s.mu == Sign::Plus), 1);
    }
    let obs = ledger_observables(config)?;
    let est = |o: &ObservableSpec| estimate_from_counts(&counts, o);
    assemble(
        config,
        est(&obs.total)?,
        obs.sub.iter().map(est).collect::<Result<_>>()?,
        obs.local.iter().map(est).collect::<Result<_>>()?,
        estimate_from_counts(&mu_plus, &ObservableSpec::local(1, 0)?)?,
    )
}

/// Shot-sampled ledger.
pub fn run_protocol(config: &ProtocolConfig) -> Result<EnergyLedger> {
    let shots = sample_shots(config)?;
    ledger_from_shots(config, &shots)
}

pub fn protocol_branches(config: &ProtocolConfig) -> Result<BranchDistribution> {
    enumerate_branches(&protocol_circuit(config)?)
}

/// Exact ledger from the branch oracle; all standard errors are zero.
pub fn run_protocol_exact(config: &ProtocolConfig) -> Result<EnergyLedger> {
    let dist = protocol_branches(config)?;
    let obs = ledger_observables(config)?;
    let exact = |o: &ObservableSpec| exact_averaged_expectation(&dist, o).map(Estimate::exact);
    assemble(
        config,
        exact(&obs.total)?,
        obs.sub.iter().map(exact).collect::<Result<_>>()?,
        obs.local.iter().map(exact).collect::<Result<_>>()?,
        Estimate::exact(dist.bit_probability(MU_BIT, 0)),
    )
}

/// Branch-averaged expectation right after the sender's measurement.
pub fn exact_post_injection(config: &ProtocolConfig, obs: &ObservableSpec) -> Result<f64> {
    exact_averaged_expectation(&enumerate_branches(&injection_circuit(config)?)?, obs)
}

/// Expectation in the prepared state, before any measurement.
pub fn exact_pre_injection(config: &ProtocolConfig, obs: &ObservableSpec) -> Result<f64> {
    crate::observables::exact_expectation(&prepared_state(config)?, obs)
}
