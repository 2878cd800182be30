//! Online search over base-stock levels by interval elimination.
//!
//! Each epoch probes three levels inside the working interval `[l, r]`, in
//! rounds of growing sample size, until one side of the interval is shown to
//! be worse than the rest and is dropped. Costs are per-stage averages in
//! `[0, 1]`.

use std::collections::HashMap;

use super::Learner;
use crate::environments::Inventory;
use crate::error::Result;
use crate::policy::{DeterministicPolicy, Policy};
use crate::rollout::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStockSearch {
    log_k: f64,
    pub l: usize,
    pub r: usize,
    pub epoch: usize,
    /// Round within the epoch, starting at 1.
    pub round: u32,
    pub probes: [usize; 3],
    sums: [f64; 3],
    counts: [u64; 3],
    cursor: usize,
}

impl BaseStockSearch {
    /// Search over `[0, upper]` with a budget of `episodes`.
    pub fn new(upper: usize, episodes: usize) -> Self {
        let mut s = Self {
            log_k: (episodes.max(2) as f64).ln(),
            l: 0,
            r: upper,
            epoch: 1,
            round: 1,
            probes: [0; 3],
            sums: [0.0; 3],
            counts: [0; 3],
            cursor: 0,
        };
        s.start_epoch();
        s
    }

    pub fn gamma(&self) -> f64 {
        0.5f64.powi(self.round as i32)
    }

    /// Episodes per probe required by the current round.
    pub fn samples_needed(&self) -> u64 {
        (2.0 * self.log_k / (self.gamma() * self.gamma())).ceil() as u64
    }

    fn start_epoch(&mut self) {
        let width = (self.r - self.l) as f64;
        let quarter = (width / 4.0).round() as usize;
        let half = (width / 2.0).round() as usize;
        self.probes = [self.l + quarter, self.l + half, self.r - quarter];
        self.sums = [0.0; 3];
        self.counts = [0; 3];
        self.cursor = 0;
        self.round = 1;
    }

    /// Level to play next.
    pub fn next_level(&self) -> usize {
        self.probes[self.cursor]
    }

    fn mean(&self, i: usize) -> f64 {
        self.sums[i] / self.counts[i] as f64
    }

    /// Records the normalised cost of an episode played at [`Self::next_level`].
    pub fn record(&mut self, cost: f64) {
        self.sums[self.cursor] += cost;
        self.counts[self.cursor] += 1;
        let need = self.samples_needed();
        while self.cursor < 3 && self.counts[self.cursor] >= need {
            self.cursor += 1;
        }
        if self.cursor == 3 {
            self.end_round();
        }
    }

    fn end_round(&mut self) {
        let g = self.gamma();
        let lb = |i: usize| self.mean(i) - g;
        let ub = |i: usize| self.mean(i) + g;
        let worst_side = lb(0).max(lb(2));
        let separated = worst_side >= ub(0).min(ub(2)) + g || worst_side >= ub(1) + g;
        if separated {
            if lb(0) >= lb(2) {
                self.l = self.probes[0];
            } else {
                self.r = self.probes[2];
            }
            self.epoch += 1;
            self.start_epoch();
        } else {
            self.round += 1;
            let need = self.samples_needed();
            self.cursor = (0..3).find(|&i| self.counts[i] < need).unwrap_or(0);
        }
    }
}

/// Base-stock search driving an inventory instance.
pub struct BaseStockLearner {
    inventory: Inventory,
    search: BaseStockSearch,
    cache: HashMap<usize, DeterministicPolicy>,
    levels: Vec<usize>,
}

impl BaseStockLearner {
    pub fn new(inventory: Inventory, episodes: usize) -> Self {
        let upper = inventory.max_base_stock();
        Self {
            inventory,
            search: BaseStockSearch::new(upper, episodes),
            cache: HashMap::new(),
            levels: Vec::new(),
        }
    }

    pub fn search(&self) -> &BaseStockSearch {
        &self.search
    }

    /// Levels played so far, one per episode.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }
}

impl Learner for BaseStockLearner {
    fn policy(&mut self) -> Result<Policy> {
        let b = self.search.next_level();
        let inv = &self.inventory;
        Ok(self.cache.entry(b).or_insert_with(|| inv.base_stock_policy(b)).clone().into())
    }

    fn observe(&mut self, traj: &Trajectory) -> Result<()> {
        let h = traj.len() as f64;
        let cost = (h - traj.total_reward()) / h;
        self.levels.push(self.search.next_level());
        self.search.record(cost);
        Ok(())
    }
}
