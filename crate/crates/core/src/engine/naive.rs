use crate::channel::{NodeId, Observation, SlotOutcome, observe, resolve_slot};
use crate::protocol::{AnyNode, Protocol, ProtocolParams};
use crate::rng::{SimRng, node_rng};

use super::{EngineError, SimMode, TrialResult};

/// What happened in one slot of a naive trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotReport {
    pub slot: u64,
    pub outcome: SlotOutcome,
    pub transmitters: usize,
}

/// Audit record of a completed naive trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialTrace {
    pub makespan_slots: u64,
    /// Delivery slot of every node, indexed by node id.
    pub delivery_slots: Vec<u64>,
    pub successes: u64,
    pub collisions: u64,
    pub silences: u64,
    /// Largest transmitter count observed in any slot that was resolved as a success.
    pub max_transmitters_on_success: usize,
}

/// Slot-by-slot simulation of `k` independent nodes, each with its own random stream.
pub struct NaiveTrial<P> {
    nodes: Vec<P>,
    rngs: Vec<SimRng>,
    active: Vec<usize>,
    delivered: Vec<Option<u64>>,
    slot: u64,
    transmitting: Vec<bool>,
    senders: Vec<NodeId>,
    successes: u64,
    collisions: u64,
    silences: u64,
    max_tx_on_success: usize,
}

impl<P: Protocol> NaiveTrial<P> {
    pub fn new(nodes: Vec<P>, trial_seed: u64) -> Self {
        let k = nodes.len();
        NaiveTrial {
            rngs: (0..k as u32).map(|i| node_rng(trial_seed, NodeId(i))).collect(),
            active: (0..k).collect(),
            delivered: vec![None; k],
            slot: 0,
            transmitting: vec![false; k],
            senders: Vec::new(),
            successes: 0,
            collisions: 0,
            silences: 0,
            max_tx_on_success: 0,
            nodes,
        }
    }

    pub fn is_done(&self) -> bool {
        self.active.is_empty()
    }

    /// Last slot simulated (0 before the first step).
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    /// Indices of nodes that have not delivered yet.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Simulates the next slot.
    pub fn step(&mut self) -> Result<SlotReport, EngineError> {
        self.slot += 1;
        let slot = self.slot;
        self.senders.clear();
        for &i in &self.active {
            let d = self.nodes[i].decide(slot, &mut self.rngs[i])?;
            self.transmitting[i] = d.transmit;
            if d.transmit {
                self.senders.push(NodeId(i as u32));
            }
        }
        let outcome = resolve_slot(&self.senders);
        match outcome {
            SlotOutcome::Silence => self.silences += 1,
            SlotOutcome::Collision => self.collisions += 1,
            SlotOutcome::Success(_) => {
                self.successes += 1;
                self.max_tx_on_success = self.max_tx_on_success.max(self.senders.len());
            }
        }
        let mut finished = None;
        for &i in &self.active {
            let id = NodeId(i as u32);
            let obs = observe(id, self.transmitting[i], outcome)?;
            self.nodes[i].advance(slot, obs)?;
            if obs == Observation::OwnDelivery {
                if self.delivered[i].is_some() {
                    return Err(EngineError::DuplicateDelivery(id));
                }
                self.delivered[i] = Some(slot);
                finished = Some(i);
            }
        }
        if let Some(i) = finished {
            self.active.retain(|&a| a != i);
        }
        Ok(SlotReport {
            slot,
            outcome,
            transmitters: self.senders.len(),
        })
    }

    pub fn run_to_completion(mut self) -> Result<TrialTrace, EngineError> {
        while !self.is_done() {
            self.step()?;
        }
        let delivery_slots: Vec<u64> = self
            .delivered
            .iter()
            .map(|d| d.expect("every node delivered"))
            .collect();
        Ok(TrialTrace {
            makespan_slots: delivery_slots.iter().copied().max().unwrap_or(0),
            delivery_slots,
            successes: self.successes,
            collisions: self.collisions,
            silences: self.silences,
            max_transmitters_on_success: self.max_tx_on_success,
        })
    }
}

fn spawn(params: &ProtocolParams, k: u64) -> Result<Vec<AnyNode>, EngineError> {
    if k == 0 {
        return Err(EngineError::NoContenders);
    }
    Ok((0..k).map(|_| params.spawn_node()).collect())
}

/// Runs a naive trial and returns its full audit record.
pub fn run_trial_traced(
    params: &ProtocolParams,
    k: u64,
    seed: u64,
) -> Result<TrialTrace, EngineError> {
    NaiveTrial::new(spawn(params, k)?, seed).run_to_completion()
}

pub fn run_trial_naive(
    params: &ProtocolParams,
    k: u64,
    seed: u64,
) -> Result<TrialResult, EngineError> {
    let trace = run_trial_traced(params, k, seed)?;
    Ok(TrialResult {
        protocol: params.kind(),
        k,
        seed,
        run_index: 0,
        mode: SimMode::Naive,
        makespan_slots: trace.makespan_slots,
    })
}
