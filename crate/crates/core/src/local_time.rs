//! Local times of a walk and the statistics derived from them.
//!
//! The ledger counts every position `S_0, ..., S_n`, so the total mass is
//! `n + 1`. The self-intersection aggregates `sum l^2`, `sum l^3` and the
//! maximum are updated in O(1) per visit and kept as exact integers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{draw_lattice_move, draw_tree_move, Graph, VertexId, WalkTrace};
use crate::sites::SiteTable;

#[derive(Clone, Debug)]
pub struct LocalTimeLedger {
    sites: SiteTable,
    counts: Vec<u32>,
    visits: u64,
    range: u64,
    silt2: u64,
    silt3: u128,
    max_lt: u64,
}

/// JSON export of a ledger's aggregates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub n: u64,
    pub range: u64,
    pub silt2: u64,
    pub silt3: u128,
    pub max_lt: u64,
}

impl LocalTimeLedger {
    pub fn new(graph: Graph) -> Self {
        LocalTimeLedger {
            sites: SiteTable::new(graph),
            counts: Vec::new(),
            visits: 0,
            range: 0,
            silt2: 0,
            silt3: 0,
            max_lt: 0,
        }
    }

    pub fn clear(&mut self) {
        self.sites.clear();
        self.counts.clear();
        self.visits = 0;
        self.range = 0;
        self.silt2 = 0;
        self.silt3 = 0;
        self.max_lt = 0;
    }

    pub fn graph(&self) -> Graph {
        self.sites.graph()
    }

    pub fn sites(&self) -> &SiteTable {
        &self.sites
    }

    /// Record one more visit to site `site`.
    #[inline]
    pub fn record_site(&mut self, site: u32) {
        let i = site as usize;
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        let m = self.counts[i] as u64;
        self.counts[i] += 1;
        if m == 0 {
            self.range += 1;
        }
        self.visits += 1;
        self.silt2 += 2 * m + 1;
        self.silt3 += 3 * (m as u128) * (m as u128) + 3 * m as u128 + 1;
        if m + 1 > self.max_lt {
            self.max_lt = m + 1;
        }
    }

    /// Record one more visit to `v`.
    pub fn record_visit(&mut self, v: &VertexId) -> Result<()> {
        let site = self.sites.intern(v)?;
        self.record_site(site);
        Ok(())
    }

    /// Local time of `v` (zero if never visited).
    pub fn local_time(&self, v: &VertexId) -> u64 {
        self.sites
            .find(v)
            .and_then(|s| self.counts.get(s as usize))
            .map_or(0, |&c| c as u64)
    }

    /// Local time of a site index.
    #[inline]
    pub fn site_count(&self, site: u32) -> u64 {
        self.counts.get(site as usize).map_or(0, |&c| c as u64)
    }

    /// Number of recorded positions, `n + 1`.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    /// Time `n`: steps taken, i.e. recorded positions minus one.
    pub fn n(&self) -> u64 {
        self.visits.saturating_sub(1)
    }

    /// Number of distinct visited vertices.
    pub fn range(&self) -> u64 {
        self.range
    }

    /// `L_{n,2}^2 = sum_v l_n(v)^2`.
    pub fn silt2(&self) -> u64 {
        self.silt2
    }

    /// `L_{n,3}^3 = sum_v l_n(v)^3`.
    pub fn silt3(&self) -> u128 {
        self.silt3
    }

    /// `L_{n,q}^q` for `q` in {2, 3}.
    pub fn silt(&self, q: u32) -> Result<u128> {
        match q {
            2 => Ok(self.silt2 as u128),
            3 => Ok(self.silt3),
            _ => Err(Error::InvalidParameter(format!(
                "self-intersection exponent must be 2 or 3, got {q}"
            ))),
        }
    }

    /// `L_{n,inf}`, the largest local time.
    pub fn max_local_time(&self) -> u64 {
        self.max_lt
    }

    /// Visited sites with their local times, in site order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s as u32, c as u64))
    }

    /// Local times of the visited sites, in site order.
    pub fn local_times(&self) -> Vec<u64> {
        self.iter().map(|(_, c)| c).collect()
    }

    /// `L_n(t) = |{v : l_n(v) > t}|`.
    pub fn level_set_size(&self, t: u64) -> u64 {
        self.counts.iter().filter(|&&c| c as u64 > t).count() as u64
    }

    /// Total local time carried by vertices with `l_n(v) >= threshold`.
    pub fn heavy_mass(&self, threshold: f64) -> u64 {
        self.counts
            .iter()
            .filter(|&&c| c > 0 && c as f64 >= threshold)
            .map(|&c| c as u64)
            .sum()
    }

    /// Total local time carried by vertices with `l_n(v) > threshold`.
    pub fn mass_above(&self, threshold: f64) -> u64 {
        self.counts
            .iter()
            .filter(|&&c| c as f64 > threshold)
            .map(|&c| c as u64)
            .sum()
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            n: self.n(),
            range: self.range,
            silt2: self.silt2,
            silt3: self.silt3,
            max_lt: self.max_lt,
        }
    }
}

/// Local-time ledger of a finished trace, over all `n + 1` positions.
pub fn build_ledger(trace: &WalkTrace) -> LocalTimeLedger {
    let mut ledger = LocalTimeLedger::new(trace.graph());
    let mut cursor = ledger.sites.cursor();
    ledger.record_site(cursor.site());
    for &code in trace.moves() {
        let s = cursor.apply(&mut ledger.sites, code);
        ledger.record_site(s);
    }
    ledger
}

/// Run an `n`-step walk straight into `ledger`, reusing its allocations.
///
/// Draws the same random numbers as [`crate::graph::sample_trace`], so both
/// paths agree on the same generator.
pub fn sample_ledger<R: Rng + ?Sized>(
    graph: Graph,
    n: usize,
    rng: &mut R,
    ledger: &mut LocalTimeLedger,
) -> Result<()> {
    graph.validate()?;
    if n == 0 {
        return Err(Error::DegenerateRun);
    }
    if ledger.graph() != graph {
        *ledger = LocalTimeLedger::new(graph);
    } else {
        ledger.clear();
    }
    let mut cursor = ledger.sites.cursor();
    ledger.record_site(cursor.site());
    match graph {
        Graph::Lattice { d } => {
            for _ in 0..n {
                let code = draw_lattice_move(d, rng);
                let s = cursor.apply(&mut ledger.sites, code);
                ledger.record_site(s);
            }
        }
        Graph::Tree { d } => {
            let mut level = 0u32;
            for _ in 0..n {
                let code = draw_tree_move(level == 0, d, rng);
                if code == 0 {
                    level -= 1;
                } else {
                    level += 1;
                }
                let s = cursor.apply(&mut ledger.sites, code);
                ledger.record_site(s);
            }
        }
    }
    Ok(())
}
