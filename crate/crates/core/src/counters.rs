use serde::{Deserialize, Serialize};

/// Operation counts accumulated by one engine instance during one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounters {
    pub multiplications: u64,
    pub additions: u64,
    pub splits: u64,
    /// Entries of the largest single table created.
    pub max_table_size: usize,
    /// Largest per-elimination size total; the engine defines the total.
    pub max_elim_size: usize,
}

impl CostCounters {
    pub fn note_table(&mut self, size: usize) {
        self.max_table_size = self.max_table_size.max(size);
    }

    pub fn note_elimination(&mut self, size: usize) {
        self.max_elim_size = self.max_elim_size.max(size);
    }
}
