use crate::game::Transcript;

/// State of the phase-based feasible-interval search.
///
/// Within a phase the machine offers `a + ε, a + 2ε, …` (capped at `b`).
/// Rejecting `a + kε` starts a new phase on `[a + (k-1)ε, a + kε]` with
/// `ε ← ε²`. Once the interval width is at most `1/T` the search stops and
/// offers `a` for the rest of the game.
#[derive(Clone, Debug, PartialEq)]
pub struct FastSearchPhaseState {
    a: f64,
    b: f64,
    epsilon: f64,
    /// Offsets already accepted in this phase.
    k: u32,
    phase: u32,
    terminal: bool,
    threshold: f64,
}

impl FastSearchPhaseState {
    pub fn new(horizon: usize) -> Self {
        FastSearchPhaseState {
            a: 0.0,
            b: 1.0,
            epsilon: 0.5,
            k: 0,
            phase: 1,
            terminal: false,
            threshold: 1.0 / horizon as f64,
        }
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn accepted_offsets(&self) -> u32 {
        self.k
    }

    /// 1-based index of the current search phase. The final fixed-price
    /// stretch keeps the index of the phase that ended the search.
    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn quote(&self) -> f64 {
        if self.terminal {
            self.a
        } else {
            self.grid(self.k + 1).min(self.b)
        }
    }

    fn grid(&self, k: u32) -> f64 {
        self.a + f64::from(k) * self.epsilon
    }

    pub fn advance(&mut self, accepted: bool) {
        if self.terminal {
            return;
        }
        let offered = self.quote();
        if accepted {
            self.k += 1;
            if offered >= self.b {
                // Accepted the top of the interval: the valuation is b.
                self.a = self.b;
                self.terminal = true;
            } else if self.grid(self.k + 1) > self.b {
                self.start_phase(offered, self.b);
            }
        } else {
            let floor = self.grid(self.k);
            self.start_phase(floor, offered);
        }
    }

    fn start_phase(&mut self, a: f64, b: f64) {
        self.a = a;
        self.b = b;
        self.epsilon *= self.epsilon;
        self.k = 0;
        if b - a <= self.threshold {
            self.terminal = true;
        } else {
            self.phase += 1;
        }
    }

    pub(crate) fn key_words(&self, tag: u64, counter: u32) -> [u64; 3] {
        if self.terminal {
            return [self.a.to_bits(), 0, tag << 56 | 1 << 55];
        }
        // ε is always a power of two, so its biased exponent identifies it.
        let exponent = (self.epsilon.to_bits() >> 52) & 0x7ff;
        let misc = tag << 56 | exponent << 44 | u64::from(counter) << 32 | u64::from(self.k);
        [self.a.to_bits(), self.b.to_bits(), misc]
    }
}

/// Summary of one search phase as seen along a played transcript.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRecord {
    pub phase: u32,
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    /// Rounds in which a price of this phase was offered.
    pub offered: usize,
}

/// Replay `transcript` through a fast-search based machine and report the
/// feasible interval and round count of each phase. The fixed-price stretch
/// after the search ends is not a phase and is not reported.
pub fn trace_phases(seller: &super::SellerMachine, transcript: &Transcript) -> Vec<PhaseRecord> {
    use super::PriceMachine;

    let mut machine = seller.clone();
    let mut records: Vec<PhaseRecord> = Vec::new();
    for round in transcript.rounds() {
        let Some(state) = machine.search_state() else {
            break;
        };
        if state.is_terminal() {
            break;
        }
        match records.last_mut() {
            Some(last) if last.phase == state.phase() => last.offered += 1,
            _ => records.push(PhaseRecord {
                phase: state.phase(),
                lower: state.lower(),
                upper: state.upper(),
                epsilon: state.epsilon(),
                offered: 1,
            }),
        }
        machine.advance(round.accepted);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(v: f64, horizon: usize, rounds: usize) -> Vec<(f64, bool)> {
        let mut s = FastSearchPhaseState::new(horizon);
        (0..rounds)
            .map(|_| {
                let p = s.quote();
                let accept = p <= v;
                s.advance(accept);
                (p, accept)
            })
            .collect()
    }

    #[test]
    fn truthful_trace_v08_t100() {
        let trace = run(0.8, 100, 6);
        assert_eq!(
            trace,
            vec![
                (0.5, true),
                (1.0, false),
                (0.75, true),
                (1.0, false),
                (0.8125, false),
                (0.75 + 1.0 / 256.0, true),
            ]
        );
        let mut s = FastSearchPhaseState::new(100);
        for (_, d) in &trace[..5] {
            s.advance(*d);
        }
        assert_eq!((s.lower(), s.upper(), s.epsilon()), (0.75, 0.8125, 1.0 / 256.0));
    }

    #[test]
    fn valuation_one_reaches_top() {
        let trace = run(1.0, 100, 4);
        assert_eq!(trace.iter().map(|t| t.0).collect::<Vec<_>>(), vec![0.5, 1.0, 1.0, 1.0]);
        assert!(trace.iter().all(|t| t.1));
    }

    #[test]
    fn terminal_offers_lower_end() {
        let mut s = FastSearchPhaseState::new(3);
        s.advance(false); // [0, 0.5], width 1/2 >= 1/3
        assert!(!s.is_terminal());
        assert_eq!(s.quote(), 0.25);
        s.advance(false); // [0, 0.25], width < 1/3
        assert!(s.is_terminal());
        assert_eq!(s.quote(), 0.0);
        s.advance(true);
        assert_eq!(s.quote(), 0.0);
    }
}
