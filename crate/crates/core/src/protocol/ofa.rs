//! One-fail Adaptive.
//!
//! Odd slots are AT-steps: transmit with probability `1/κ̃`, where `κ̃` is a
//! running density estimate that grows by one every AT-step and drops on every
//! reception. Even slots are BT-steps: transmit with probability
//! `1/(1 + log₂(σ+1))`, where `σ` counts messages received from others.

use rand::{Rng, RngExt};

use super::{ContractViolation, Decision, ParamError, Protocol};
use crate::channel::Observation;

/// Largest admissible delta: the sum of `(5/6)^j` for `j = 1..=5`.
pub fn ofa_delta_upper_bound() -> f64 {
    (1..=5).map(|j| (5.0f64 / 6.0).powi(j)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfaParams {
    delta: f64,
}

impl OfaParams {
    pub fn new(delta: f64) -> Result<Self, ParamError> {
        let max = ofa_delta_upper_bound();
        if delta > std::f64::consts::E && delta <= max {
            Ok(OfaParams { delta })
        } else {
            Err(ParamError::OfaDelta { delta, max })
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Whether `slot` is an AT-step (odd slots) rather than a BT-step.
pub fn is_at_step(slot: u64) -> bool {
    slot % 2 == 1
}

/// The state every active node shares: density estimator and reception counter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfaState {
    delta: f64,
    kappa_hat: f64,
    sigma: u64,
    terminal: bool,
}

impl OfaState {
    pub fn new(params: OfaParams) -> Self {
        OfaState {
            delta: params.delta,
            kappa_hat: params.delta + 1.0,
            sigma: 0,
            terminal: false,
        }
    }

    /// Builds an arbitrary (non-terminal) state. `kappa_hat` is clamped to the floor.
    pub fn with_values(params: OfaParams, kappa_hat: f64, sigma: u64) -> Self {
        OfaState {
            delta: params.delta,
            kappa_hat: kappa_hat.max(params.delta + 1.0),
            sigma,
            terminal: false,
        }
    }

    pub fn kappa_hat(&self) -> f64 {
        self.kappa_hat
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn transmit_probability(&self, slot: u64) -> f64 {
        if is_at_step(slot) {
            1.0 / self.kappa_hat
        } else {
            1.0 / (1.0 + ((self.sigma + 1) as f64).log2())
        }
    }

    /// Applies one slot's updates.
    ///
    /// On an AT-step the `+1` increment and a reception's `-(δ+1)` are combined
    /// before the floor `δ+1` is applied.
    pub fn advance(&mut self, slot: u64, obs: Observation) -> Result<(), ContractViolation> {
        if self.terminal {
            return Err(ContractViolation::Terminal);
        }
        if slot == 0 {
            return Err(ContractViolation::ZeroSlot);
        }
        let floor = self.delta + 1.0;
        match obs {
            Observation::OwnDelivery => self.terminal = true,
            Observation::ReceivedOther(_) => {
                self.sigma += 1;
                self.kappa_hat = if is_at_step(slot) {
                    (self.kappa_hat + 1.0 - self.delta - 1.0).max(floor)
                } else {
                    (self.kappa_hat - self.delta).max(floor)
                };
            }
            Observation::Nothing => {
                if is_at_step(slot) {
                    self.kappa_hat += 1.0;
                }
            }
        }
        Ok(())
    }
}

/// A node running One-fail Adaptive.
#[derive(Clone, Debug)]
pub struct OfaNode {
    state: OfaState,
    pending: Option<u64>,
}

impl OfaNode {
    pub fn new(params: OfaParams) -> Self {
        OfaNode::from_state(OfaState::new(params))
    }

    pub fn from_state(state: OfaState) -> Self {
        OfaNode { state, pending: None }
    }

    pub fn state(&self) -> &OfaState {
        &self.state
    }
}

impl Protocol for OfaNode {
    fn decide<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        rng: &mut R,
    ) -> Result<Decision, ContractViolation> {
        if self.state.terminal {
            return Err(ContractViolation::Terminal);
        }
        if slot == 0 {
            return Err(ContractViolation::ZeroSlot);
        }
        let p = self.state.transmit_probability(slot);
        let transmit = rng.random_bool(p);
        self.pending = Some(slot);
        Ok(Decision { transmit })
    }

    fn advance(&mut self, slot: u64, obs: Observation) -> Result<(), ContractViolation> {
        if self.state.terminal {
            return Err(ContractViolation::Terminal);
        }
        if self.pending != Some(slot) {
            return Err(ContractViolation::AdvanceWithoutDecide { slot });
        }
        self.pending = None;
        self.state.advance(slot, obs)
    }

    fn is_terminal(&self) -> bool {
        self.state.terminal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NodeId;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> OfaParams {
        OfaParams::new(2.72).unwrap()
    }

    const OTHER: Observation = Observation::ReceivedOther(NodeId(1));

    #[test]
    fn upper_bound_value() {
        assert!((ofa_delta_upper_bound() - 23255.0 / 7776.0).abs() < 1e-15);
    }

    #[test]
    fn transmit_probabilities() {
        let s = OfaState::new(params());
        assert_eq!(s.transmit_probability(2), 1.0);
        assert!((s.transmit_probability(1) - 1.0 / 3.72).abs() < 1e-15);
        assert!((s.transmit_probability(1) - 0.26882).abs() < 1e-5);
        let s = OfaState::with_values(params(), 10.0, 3);
        assert!((s.transmit_probability(4) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fresh_node_transmits_on_first_bt_step() {
        let mut node = OfaNode::new(params());
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let mut n = node.clone();
            assert!(n.decide(2, &mut rng).unwrap().transmit);
        }
        node.decide(1, &mut rng).unwrap();
        node.advance(1, Observation::Nothing).unwrap();
        assert!(node.decide(2, &mut rng).unwrap().transmit);
    }

    #[test]
    fn at_step_without_reception_increments() {
        let mut s = OfaState::with_values(params(), 10.0, 0);
        s.advance(1, Observation::Nothing).unwrap();
        assert_eq!(s.kappa_hat(), 11.0);
        assert_eq!(s.sigma(), 0);
        // a failed own transmission looks the same
        s.advance(3, Observation::Nothing).unwrap();
        assert_eq!(s.kappa_hat(), 12.0);
    }

    #[test]
    fn bt_step_reception_clamps() {
        let mut s = OfaState::with_values(params(), 4.0, 0);
        s.advance(2, OTHER).unwrap();
        assert!((s.kappa_hat() - 3.72).abs() < 1e-12);
        assert_eq!(s.sigma(), 1);
    }

    #[test]
    fn bt_step_silence_is_a_no_op() {
        let mut s = OfaState::with_values(params(), 9.5, 4);
        let before = s;
        s.advance(6, Observation::Nothing).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn at_step_reception_matches_two_task_trace() {
        // Literal sequencing: task 1 increments after its transmission, then
        // task 2 reacts to the reception in the same step.
        let delta = 2.72;
        let mut kappa: f64 = 10.0;
        let mut sigma = 2u64;
        kappa += 1.0;
        sigma += 1;
        kappa = f64::max(kappa - delta - 1.0, delta + 1.0);

        let mut s = OfaState::with_values(params(), 10.0, 2);
        s.advance(5, OTHER).unwrap();
        assert!((s.kappa_hat() - kappa).abs() < 1e-12);
        assert!((s.kappa_hat() - 7.28).abs() < 1e-12);
        assert_eq!(s.sigma(), sigma);
        assert_eq!(s.sigma(), 3);
    }

    #[test]
    fn sigma_increments_on_bt_reception() {
        let mut s = OfaState::with_values(params(), 20.0, 4);
        s.advance(8, OTHER).unwrap();
        assert_eq!(s.sigma(), 5);
        assert!((s.kappa_hat() - 17.28).abs() < 1e-12);
    }

    #[test]
    fn own_delivery_terminates() {
        let mut s = OfaState::new(params());
        s.advance(1, Observation::OwnDelivery).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.advance(2, Observation::Nothing), Err(ContractViolation::Terminal));
    }

    fn observation() -> impl Strategy<Value = Observation> {
        prop_oneof![Just(Observation::Nothing), Just(OTHER)]
    }

    proptest! {
        #[test]
        fn estimator_floor_and_step_sizes(
            delta in 2.7184f64..2.9906,
            obs in proptest::collection::vec(observation(), 1..300),
        ) {
            let p = OfaParams::new(delta).unwrap();
            let mut s = OfaState::new(p);
            for (i, o) in obs.iter().enumerate() {
                let slot = i as u64 + 1;
                let (k0, s0) = (s.kappa_hat(), s.sigma());
                s.advance(slot, *o).unwrap();
                prop_assert!(s.kappa_hat() >= delta + 1.0);
                let dk = s.kappa_hat() - k0;
                match (*o, is_at_step(slot)) {
                    (Observation::Nothing, true) => prop_assert!((dk - 1.0).abs() < 1e-9),
                    (Observation::Nothing, false) => prop_assert_eq!(dk, 0.0),
                    (_, _) => {
                        prop_assert_eq!(s.sigma(), s0 + 1);
                        // AT nets +1 - (δ+1), BT nets -δ
                        prop_assert!((s.kappa_hat() - (k0 - delta).max(delta + 1.0)).abs() < 1e-9);
                    }
                }
                if *o == Observation::Nothing {
                    prop_assert_eq!(s.sigma(), s0);
                }
            }
        }
    }
}
