//! Window-based protocols: Exp Back-on/Back-off and Loglog-iterated Back-off.
//!
//! Both follow a deterministic global schedule of contention windows. In every
//! window a node transmits exactly once, at a slot drawn uniformly from the
//! window, and otherwise stays silent. The two protocols differ only in the
//! sequence of window lengths, so the node logic is shared.

use rand::{Rng, RngExt};

use super::{ContractViolation, Decision, ParamError, Protocol};
use crate::channel::Observation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EboboParams {
    delta: f64,
}

impl EboboParams {
    pub fn new(delta: f64) -> Result<Self, ParamError> {
        if delta > 0.0 && delta < 1.0 / std::f64::consts::E {
            Ok(EboboParams { delta })
        } else {
            Err(ParamError::EboboDelta { delta })
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LlibParams {
    r: f64,
}

impl LlibParams {
    pub fn new(r: f64) -> Result<Self, ParamError> {
        if r > 1.0 && r.is_finite() {
            Ok(LlibParams { r })
        } else {
            Err(ParamError::LlibFactor { r })
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Window lengths of Exp Back-on/Back-off.
///
/// Phase `i` starts at `w = 2^i`; each window lasts `⌈w⌉` slots and `w` then
/// shrinks by `(1-δ)` until it drops below one.
#[derive(Clone, Debug)]
pub struct EboboSchedule {
    shrink: f64,
    phase: u32,
    window_real: f64,
}

impl EboboSchedule {
    pub fn new(params: EboboParams) -> Self {
        EboboSchedule {
            shrink: 1.0 - params.delta,
            phase: 1,
            window_real: 2.0,
        }
    }

    /// Phase of the window that the next call to `next` yields.
    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn window_real(&self) -> f64 {
        self.window_real
    }
}

impl Iterator for EboboSchedule {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.window_real < 1.0 {
            if self.phase >= 62 {
                return None;
            }
            self.phase += 1;
            self.window_real = 2f64.powi(self.phase as i32);
        }
        let len = self.window_real.ceil() as u64;
        self.window_real *= self.shrink;
        Some(len)
    }
}

/// All window lengths of the first `max_phases` phases.
pub fn ebobo_window_schedule(delta: f64, max_phases: u32) -> Result<Vec<u64>, ParamError> {
    let params = EboboParams::new(delta)?;
    if max_phases == 0 {
        return Err(ParamError::Invalid("max_phases must be positive".into()));
    }
    let mut schedule = EboboSchedule::new(params);
    let mut out = Vec::new();
    while !(schedule.window_real < 1.0 && schedule.phase >= max_phases) {
        match schedule.next() {
            Some(len) => out.push(len),
            None => break,
        }
    }
    Ok(out)
}

/// Repetitions of the phase-`phase` window: `max(1, ⌈log₂ log₂ r^phase⌉)`.
pub fn llib_repetitions(r: f64, phase: u32) -> u32 {
    // log₂(r^p) = p·log₂ r, which stays exact for r = 2
    let log_w = phase as f64 * r.log2();
    if log_w <= 1.0 {
        return 1;
    }
    (log_w.log2().ceil() as u32).max(1)
}

/// Window lengths of Loglog-iterated Back-off: phase `p` repeats a window of
/// `⌈r^p⌉` slots [`llib_repetitions`] times, then moves to `p+1`.
#[derive(Clone, Debug)]
pub struct LlibSchedule {
    r: f64,
    phase: u32,
    repetition: u32,
}

impl LlibSchedule {
    pub fn new(params: LlibParams) -> Self {
        LlibSchedule {
            r: params.r,
            phase: 1,
            repetition: 1,
        }
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn repetition(&self) -> u32 {
        self.repetition
    }
}

impl Iterator for LlibSchedule {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.repetition > llib_repetitions(self.r, self.phase) {
            self.phase += 1;
            self.repetition = 1;
        }
        let len = self.r.powi(self.phase as i32).ceil();
        if len.is_nan() || len >= u64::MAX as f64 {
            return None;
        }
        self.repetition += 1;
        Some(len as u64)
    }
}

pub fn llib_schedule(r: f64, max_phases: u32) -> Result<Vec<u64>, ParamError> {
    let params = LlibParams::new(r)?;
    if max_phases == 0 {
        return Err(ParamError::Invalid("max_phases must be positive".into()));
    }
    let mut out = Vec::new();
    for phase in 1..=max_phases {
        let len = params.r.powi(phase as i32).ceil() as u64;
        for _ in 0..llib_repetitions(params.r, phase) {
            out.push(len);
        }
    }
    Ok(out)
}

/// A node following a window schedule.
#[derive(Clone, Debug)]
pub struct WindowNode<S> {
    schedule: S,
    window_len: u64,
    offset: u64,
    chosen: Option<u64>,
    terminal: bool,
    pending: Option<u64>,
}

pub type EboboNode = WindowNode<EboboSchedule>;
pub type LlibNode = WindowNode<LlibSchedule>;

impl<S: Iterator<Item = u64>> WindowNode<S> {
    pub fn new(mut schedule: S) -> Self {
        let window_len = schedule.next().expect("schedules yield at least one window");
        WindowNode {
            schedule,
            window_len,
            offset: 0,
            chosen: None,
            terminal: false,
            pending: None,
        }
    }

    /// A node whose first-window slot is fixed instead of drawn.
    pub fn with_first_choice(schedule: S, chosen: u64) -> Self {
        let mut node = WindowNode::new(schedule);
        assert!(chosen < node.window_len, "chosen slot outside the first window");
        node.chosen = Some(chosen);
        node
    }

    pub fn window_len(&self) -> u64 {
        self.window_len
    }

    pub fn offset_in_window(&self) -> u64 {
        self.offset
    }

    pub fn chosen_slot(&self) -> Option<u64> {
        self.chosen
    }

    pub fn schedule(&self) -> &S {
        &self.schedule
    }
}

impl<S: Iterator<Item = u64>> Protocol for WindowNode<S> {
    fn decide<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        rng: &mut R,
    ) -> Result<Decision, ContractViolation> {
        if self.terminal {
            return Err(ContractViolation::Terminal);
        }
        if slot == 0 {
            return Err(ContractViolation::ZeroSlot);
        }
        let len = self.window_len;
        let chosen = *self.chosen.get_or_insert_with(|| rng.random_range(0..len));
        self.pending = Some(slot);
        Ok(Decision {
            transmit: chosen == self.offset,
        })
    }

    fn advance(&mut self, slot: u64, obs: Observation) -> Result<(), ContractViolation> {
        if self.terminal {
            return Err(ContractViolation::Terminal);
        }
        if self.pending != Some(slot) {
            return Err(ContractViolation::AdvanceWithoutDecide { slot });
        }
        self.pending = None;
        if obs == Observation::OwnDelivery {
            self.terminal = true;
            return Ok(());
        }
        self.offset += 1;
        if self.offset == self.window_len {
            // the schedule is effectively unbounded; a node still active after
            // 2^63 slots keeps reusing the last window
            if let Some(len) = self.schedule.next() {
                self.window_len = len;
            }
            self.offset = 0;
            self.chosen = None;
        }
        Ok(())
    }

    fn is_terminal(&self) -> bool {
        self.terminal
    }
}
