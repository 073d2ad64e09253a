//! Exact elimination over Q(i, √m).

use std::collections::BTreeMap;

use crate::field::ExactScalar;
use crate::qstate::StateVector;

/// Rank of a dense matrix by Gaussian elimination. Pivots are the first
/// nonzero entry in each column, scanning rows top to bottom.
pub fn exact_rank(mut rows: Vec<Vec<ExactScalar>>) -> usize {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        if rank == height {
            break;
        }
        let Some(pivot) = (rank..height).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().expect("pivot is nonzero");
        let pivot_row: Vec<ExactScalar> = rows[rank].iter().map(|x| x * &inv).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (cell, pivot) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !pivot.is_zero() {
                    *cell = &*cell - &(&factor * pivot);
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Incremental row echelon basis of sparse vectors, keyed by leading basis
/// string.
#[derive(Default)]
pub struct SparseSpan {
    rows: BTreeMap<u32, BTreeMap<u32, ExactScalar>>,
}

impl SparseSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Adds `state` to the span; returns whether it was independent.
    pub fn insert(&mut self, state: &StateVector) -> bool {
        let mut v: BTreeMap<u32, ExactScalar> = state.terms().map(|(k, a)| (k, a.clone())).collect();
        loop {
            let Some((&lead, lead_amp)) = v.iter().next() else {
                return false;
            };
            match self.rows.get(&lead) {
                Some(row) => {
                    let factor = lead_amp.clone();
                    for (&key, amp) in row {
                        let delta = &factor * amp;
                        let updated = match v.remove(&key) {
                            Some(existing) => existing - delta,
                            None => -delta,
                        };
                        if !updated.is_zero() {
                            v.insert(key, updated);
                        }
                    }
                }
                None => {
                    let inv = lead_amp.inv().expect("stored amplitudes are nonzero");
                    let row = v.into_iter().map(|(k, a)| (k, a * &inv)).collect();
                    self.rows.insert(lead, row);
                    return true;
                }
            }
        }
    }
}
