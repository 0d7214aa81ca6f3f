//! Oracle query accounting.
//!
//! Counts are charged according to the sparse-access block-encoding: one use of
//! `U_H` queries the row and column oracles once each and the entry oracle twice.
//! Each entry-oracle call evaluates `2d+1` coefficient values on a d-dimensional grid.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerCounts {
    pub entry_oracle_calls: u64,
    pub row_col_oracle_calls: u64,
    pub state_prep_calls: u64,
    pub matvec_count: u64,
    pub coefficient_evals: u64,
    pub block_encoding_calls: u64,
}

impl LedgerCounts {
    pub fn add(&mut self, other: &LedgerCounts) {
        self.entry_oracle_calls += other.entry_oracle_calls;
        self.row_col_oracle_calls += other.row_col_oracle_calls;
        self.state_prep_calls += other.state_prep_calls;
        self.matvec_count += other.matvec_count;
        self.coefficient_evals += other.coefficient_evals;
        self.block_encoding_calls += other.block_encoding_calls;
    }

    fn dominates(&self, other: &LedgerCounts) -> bool {
        self.entry_oracle_calls >= other.entry_oracle_calls
            && self.row_col_oracle_calls >= other.row_col_oracle_calls
            && self.state_prep_calls >= other.state_prep_calls
            && self.matvec_count >= other.matvec_count
            && self.coefficient_evals >= other.coefficient_evals
            && self.block_encoding_calls >= other.block_encoding_calls
    }
}

/// One fuzzy-bisection level as recorded by the estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub exact_probability: f64,
    pub estimate: f64,
    pub shots: u64,
    pub below: bool,
    pub counts: LedgerCounts,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub totals: LedgerCounts,
    pub levels: Vec<LevelRecord>,
    /// Coefficient evaluations charged per entry-oracle call (2d+1), when the
    /// matrix comes from an operator on a grid.
    pub coefficient_evals_per_entry: Option<u64>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn for_dimension(d: usize) -> Self {
        Self {
            coefficient_evals_per_entry: Some(2 * d as u64 + 1),
            ..Self::default()
        }
    }

    /// A direct classical entry-oracle call that evaluated `coefficient_evals` fields.
    pub fn record_entry_call(&mut self, coefficient_evals: u64) {
        self.totals.entry_oracle_calls += 1;
        self.totals.coefficient_evals += coefficient_evals;
    }

    pub fn record_row_col_call(&mut self) {
        self.totals.row_col_oracle_calls += 1;
    }

    pub fn record_matvecs(&mut self, n: u64) {
        self.totals.matvec_count += n;
    }

    /// Charges `uses` block-encoding uses of `U_H`.
    pub fn record_block_encoding_uses(&mut self, uses: u64) {
        let c = self.block_encoding_cost(uses);
        self.totals.add(&c);
    }

    /// Query cost of `uses` applications of `U_H`, without recording.
    pub fn block_encoding_cost(&self, uses: u64) -> LedgerCounts {
        let per_entry = self.coefficient_evals_per_entry.unwrap_or(0);
        LedgerCounts {
            entry_oracle_calls: 2 * uses,
            row_col_oracle_calls: 2 * uses,
            coefficient_evals: 2 * uses * per_entry,
            block_encoding_calls: uses,
            ..LedgerCounts::default()
        }
    }

    /// Charges `shots` runs of a projector circuit with `degree` `U_H` uses each,
    /// plus one state preparation per shot. Returns the counts charged.
    pub fn record_circuit_runs(&mut self, degree: u64, shots: u64) -> LedgerCounts {
        let mut c = self.block_encoding_cost(degree * shots);
        c.state_prep_calls = shots;
        self.totals.add(&c);
        c
    }

    pub fn push_level(&mut self, record: LevelRecord) {
        self.levels.push(record);
    }

    /// Sums another ledger into this one (per-worker merge).
    pub fn merge(&mut self, other: &QueryLedger) {
        self.totals.add(&other.totals);
        self.levels.extend(other.levels.iter().cloned());
    }

    /// Checks that a later snapshot never decreased any counter.
    pub fn is_monotone_from(&self, earlier: &LedgerCounts) -> bool {
        self.totals.dominates(earlier)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
