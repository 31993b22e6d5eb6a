use serde::Serialize;

/// Machine-independent work measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WorkCounters {
    /// Adjacency entries examined.
    pub edge_scans: u64,
    /// Merge events replayed by degree reduction.
    pub witness_replays: u64,
    /// Ancestor steps: jump-table lookups plus layer-forest walks.
    pub ancestor_hops: u64,
}

impl WorkCounters {
    pub fn total(&self) -> u64 {
        self.edge_scans + self.witness_replays + self.ancestor_hops
    }

    pub fn add(&mut self, other: &WorkCounters) {
        self.edge_scans += other.edge_scans;
        self.witness_replays += other.witness_replays;
        self.ancestor_hops += other.ancestor_hops;
    }
}
