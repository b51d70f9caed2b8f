use serde::{Deserialize, Serialize};

/// Outcome of an exhaustive or sampled property check: how many instances were examined and
/// a witness description for each violation (capped, with the total kept).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub instances: usize,
    pub violation_count: usize,
    pub witnesses: Vec<String>,
}

const MAX_WITNESSES: usize = 20;

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violation_count += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.instances += other.instances;
        self.violation_count += other.violation_count;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}
