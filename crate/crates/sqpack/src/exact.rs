//! Ground truth: exhaustive single-bin feasibility for a multiset of
//! squares, and an exact min-sum solver for tiny instances.
//!
//! Feasibility is decided by branching on separation relations: two
//! interior-disjoint axis-aligned squares must satisfy at least one of
//! "i left of j", "j left of i", "i below j", "j below i", so trying all
//! assignments of one relation per pair covers every packing. A chosen
//! assignment is checked by per-axis longest-path propagation: the minimal
//! coordinates satisfying the chosen relations are dominated by any real
//! packing's coordinates, so the assignment is feasible exactly when the
//! minimal coordinates stay inside the bin (a positive cycle among the
//! relations means no coordinates exist at all). Exhausting every
//! assignment therefore proves infeasibility.
//!
//! The min-sum solver recurses on "choose the contents of the next bin".
//! Two facts restrict the choice to *maximal* feasible subsets: moving an
//! addable item from a later bin into an earlier one strictly lowers cost,
//! and swapping two bins where the later is fuller also lowers cost.
//! Hence every cost-optimal solution packs each bin maximally with respect
//! to the items left, and has non-increasing bin counts. Results are
//! memoized per size multiset; budgets abort loudly, never silently.

use crate::model::{Error, Instance, Packing, Placement, Rational};
use num_traits::{One, Zero};
use std::collections::{HashMap, HashSet};
use std::time::Instant;

/// Caps for the exhaustive searches.
#[derive(Debug, Clone)]
pub struct SearchLimits {
    /// largest instance/multiset size the solver will attempt
    pub max_items: usize,
    /// abort after this many search nodes
    pub node_budget: u64,
    /// optional wall-clock cap in seconds (checked coarsely)
    pub time_budget: Option<u64>,
    /// memoization switch; results must not depend on it
    pub use_cache: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_items: 9,
            node_budget: 50_000_000,
            time_budget: None,
            use_cache: true,
        }
    }
}

/// Outcome of a single-bin feasibility query.
#[derive(Debug, Clone)]
pub struct FeasibilityCertificate {
    pub feasible: bool,
    /// `(size, x, y)` per item when feasible
    pub placements: Option<Vec<(Rational, Rational, Rational)>>,
}

type Cert = Vec<(Rational, Rational, Rational)>;

struct Oracle<'a> {
    limits: &'a SearchLimits,
    nodes: u64,
    started: Instant,
    cache: HashMap<Vec<Rational>, Option<Cert>>,
}

impl<'a> Oracle<'a> {
    fn new(limits: &'a SearchLimits) -> Self {
        Oracle { limits, nodes: 0, started: Instant::now(), cache: HashMap::new() }
    }

    fn bump(&mut self) -> Result<(), Error> {
        self.nodes += 1;
        if self.nodes > self.limits.node_budget {
            return Err(Error::BudgetExceeded {
                nodes: self.nodes,
                limit: self.limits.node_budget,
            });
        }
        if self.nodes % 65536 == 0 {
            if let Some(secs) = self.limits.time_budget {
                if self.started.elapsed().as_secs() >= secs {
                    return Err(Error::BudgetExceeded {
                        nodes: self.nodes,
                        limit: self.limits.node_budget,
                    });
                }
            }
        }
        Ok(())
    }

    /// Feasibility of a size multiset in one unit bin. `sizes` must be
    /// sorted non-increasing.
    fn fits(&mut self, sizes: &[Rational]) -> Result<Option<Cert>, Error> {
        debug_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
        if sizes.len() > self.limits.max_items {
            return Err(Error::TooManyItems {
                n: sizes.len(),
                max: self.limits.max_items,
            });
        }
        if self.limits.use_cache {
            if let Some(hit) = self.cache.get(sizes) {
                return Ok(hit.clone());
            }
        }
        let result = self.search(sizes)?;
        if self.limits.use_cache {
            self.cache.insert(sizes.to_vec(), result.clone());
        }
        Ok(result)
    }

    fn search(&mut self, sizes: &[Rational]) -> Result<Option<Cert>, Error> {
        let one = Rational::one();
        if sizes.is_empty() {
            return Ok(Some(Vec::new()));
        }
        if sizes.iter().any(|s| s > &one || s <= &Rational::zero()) {
            return Ok(None);
        }
        let area: Rational = sizes.iter().map(|s| s * s).fold(Rational::zero(), |a, b| a + b);
        if area > one {
            return Ok(None);
        }
        // two squares whose sides sum past 1 must overlap in both axes
        if sizes.len() >= 2 && &sizes[0] + &sizes[1] > one {
            return Ok(None);
        }
        // fast sufficient check: a one-bin shelf packing is a certificate,
        // sparing the exhaustive search for the easy feasible multisets
        if let Some(cert) = shelf_certificate(sizes) {
            return Ok(Some(cert));
        }
        let mut rel = RelSearch::new(sizes);
        if self.rel_dfs(&mut rel, 0)? {
            let cert: Cert = sizes
                .iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), rel.xlo[i].clone(), rel.ylo[i].clone()))
                .collect();
            Ok(Some(cert))
        } else {
            Ok(None)
        }
    }

    fn rel_dfs(&mut self, rel: &mut RelSearch, pair: usize) -> Result<bool, Error> {
        if pair == rel.pairs.len() {
            return Ok(true);
        }
        let (i, j) = rel.pairs[pair];
        for choice in rel.choices(pair) {
            self.bump()?;
            let snapshot = rel.snapshot();
            if rel.apply(i, j, choice) && self.rel_dfs(rel, pair + 1)? {
                return Ok(true);
            }
            rel.restore(snapshot);
        }
        Ok(false)
    }
}

/// One of the four ways two interior-disjoint squares can be separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sep {
    LeftOf,    // i left of j
    RightOf,   // j left of i
    Below,     // i below j
    Above,     // j below i
}

/// Assignment state: chosen separations as per-axis precedence edges, with
/// the minimal coordinates they force.
struct RelSearch {
    sizes: Vec<Rational>,
    pairs: Vec<(usize, usize)>,
    // xout[i] holds j whenever "i left of j" was chosen; likewise yout
    xout: Vec<Vec<usize>>,
    yout: Vec<Vec<usize>>,
    xlo: Vec<Rational>,
    ylo: Vec<Rational>,
}

type RelSnapshot = (Vec<Rational>, Vec<Rational>, Vec<usize>, Vec<usize>);

impl RelSearch {
    fn new(sizes: &[Rational]) -> Self {
        let n = sizes.len();
        // introduce items one at a time so contradictions among the first
        // few (largest) items surface before the rest are constrained
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for k in 1..n {
            for i in 0..k {
                pairs.push((i, k));
            }
        }
        RelSearch {
            sizes: sizes.to_vec(),
            pairs,
            xout: vec![Vec::new(); n],
            yout: vec![Vec::new(); n],
            xlo: vec![Rational::zero(); n],
            ylo: vec![Rational::zero(); n],
        }
    }

    /// Separations worth branching on for the pair at `idx`, after two
    /// symmetry cuts. Identical items can be relabeled into (y, x) order,
    /// which rules one vertical direction out. The very first pair can be
    /// normalized by reflecting the whole bin, but only when neither size
    /// repeats elsewhere (relabeling equal items must not disturb it).
    fn choices(&self, idx: usize) -> Vec<Sep> {
        let (i, j) = self.pairs[idx];
        if self.sizes[i] == self.sizes[j] {
            return vec![Sep::LeftOf, Sep::RightOf, Sep::Below];
        }
        if idx == 0 {
            let unique = |v: usize| self.sizes.iter().filter(|s| **s == self.sizes[v]).count() == 1;
            if unique(i) && unique(j) {
                return vec![Sep::LeftOf, Sep::Below];
            }
        }
        vec![Sep::LeftOf, Sep::RightOf, Sep::Below, Sep::Above]
    }

    fn snapshot(&self) -> RelSnapshot {
        (
            self.xlo.clone(),
            self.ylo.clone(),
            self.xout.iter().map(Vec::len).collect(),
            self.yout.iter().map(Vec::len).collect(),
        )
    }

    fn restore(&mut self, snap: RelSnapshot) {
        let (xlo, ylo, xlens, ylens) = snap;
        self.xlo = xlo;
        self.ylo = ylo;
        for (v, len) in self.xout.iter_mut().zip(xlens) {
            v.truncate(len);
        }
        for (v, len) in self.yout.iter_mut().zip(ylens) {
            v.truncate(len);
        }
    }

    /// Adds the chosen separation and repropagates minimal coordinates.
    /// False when some item is forced past the bin wall or the relations
    /// form a positive cycle (no coordinates exist).
    fn apply(&mut self, i: usize, j: usize, choice: Sep) -> bool {
        let (axis_out, axis_lo, from, to) = match choice {
            Sep::LeftOf => (&mut self.xout, &mut self.xlo, i, j),
            Sep::RightOf => (&mut self.xout, &mut self.xlo, j, i),
            Sep::Below => (&mut self.yout, &mut self.ylo, i, j),
            Sep::Above => (&mut self.yout, &mut self.ylo, j, i),
        };
        axis_out[from].push(to);
        let one = Rational::one();
        let n = self.sizes.len();
        let mut queue = std::collections::VecDeque::new();
        let mut pops = vec![0usize; n];
        let start = &self.sizes[from] + &axis_lo[from];
        if start > axis_lo[to] {
            if &start + &self.sizes[to] > one {
                return false;
            }
            axis_lo[to] = start;
            queue.push_back(to);
        }
        while let Some(v) = queue.pop_front() {
            pops[v] += 1;
            if pops[v] > n {
                return false; // cycle: coordinates would grow forever
            }
            for idx in 0..axis_out[v].len() {
                let w = axis_out[v][idx];
                let cand = &axis_lo[v] + &self.sizes[v];
                if cand > axis_lo[w] {
                    if &cand + &self.sizes[w] > one {
                        return false;
                    }
                    axis_lo[w] = cand;
                    queue.push_back(w);
                }
            }
        }
        true
    }
}

/// Shelf packing of a non-increasing multiset into one bin: items fill a
/// shelf left to right, the shelf height is its first item, a new shelf
/// opens on top when the width runs out. Success yields a valid placement.
fn shelf_certificate(sizes: &[Rational]) -> Option<Cert> {
    let one = Rational::one();
    let mut cert: Cert = Vec::with_capacity(sizes.len());
    let mut shelf_y = Rational::zero();
    let mut shelf_h = Rational::zero();
    let mut cursor = Rational::zero();
    for s in sizes {
        if &cursor + s > one {
            shelf_y += std::mem::replace(&mut shelf_h, Rational::zero());
            cursor = Rational::zero();
        }
        if shelf_h.is_zero() {
            shelf_h = s.clone();
            if &shelf_y + s > one {
                return None;
            }
        }
        cert.push((s.clone(), cursor.clone(), shelf_y.clone()));
        cursor += s;
    }
    Some(cert)
}

/// Decides whether the multiset fits one unit bin, with a placement
/// certificate when it does.
pub fn fits_in_unit_bin(
    sizes: &[Rational],
    limits: &SearchLimits,
) -> Result<FeasibilityCertificate, Error> {
    let mut sorted = sizes.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut oracle = Oracle::new(limits);
    let cert = oracle.fits(&sorted)?;
    Ok(FeasibilityCertificate { feasible: cert.is_some(), placements: cert })
}

/// Greedy-group lower bound for a size multiset, used for pruning: sort
/// non-decreasing, close a group once its area exceeds 1, then
/// `sum over groups i of i * |G_i|` is a cost lower bound.
fn lb1_of_sizes(sizes_desc: &[Rational]) -> u64 {
    let one = Rational::one();
    let mut cost = 0u64;
    let mut group = 1u64;
    let mut area = Rational::zero();
    for s in sizes_desc.iter().rev() {
        area += s * s;
        cost += group;
        if area > one {
            group += 1;
            area = Rational::zero();
        }
    }
    cost
}

struct MinSum<'a> {
    oracle: Oracle<'a>,
    // remaining size multiset (non-increasing) -> (optimal cost, first-bin multiset)
    memo: HashMap<Vec<Rational>, (u64, Vec<Rational>)>,
}

impl<'a> MinSum<'a> {
    /// Exact optimal cost for the remaining multiset (non-increasing).
    fn solve(&mut self, sizes: &[Rational]) -> Result<u64, Error> {
        if sizes.is_empty() {
            return Ok(0);
        }
        if let Some((cost, _)) = self.memo.get(sizes) {
            return Ok(*cost);
        }
        let m = sizes.len();
        debug_assert!(m <= 16);
        // feasibility of every submask, deduplicated per multiset
        let mut multiset_feasible: HashMap<Vec<Rational>, bool> = HashMap::new();
        let mut feasible_masks: HashSet<u32> = HashSet::new();
        let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        let subset_sizes = |mask: u32| -> Vec<Rational> {
            (0..m)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| sizes[j].clone())
                .collect()
        };
        for mask in 1..=full {
            self.oracle.bump()?;
            let sub = subset_sizes(mask);
            let feasible = match multiset_feasible.get(&sub) {
                Some(&f) => f,
                None => {
                    let f = self.oracle.fits(&sub)?.is_some();
                    multiset_feasible.insert(sub.clone(), f);
                    f
                }
            };
            if feasible {
                feasible_masks.insert(mask);
            }
        }
        // maximal = feasible and no single remaining item can join
        let mut candidates: Vec<(u32, Vec<Rational>)> = Vec::new();
        let mut seen: HashSet<Vec<Rational>> = HashSet::new();
        for &mask in &feasible_masks {
            let maximal = (0..m)
                .all(|j| mask & (1 << j) != 0 || !feasible_masks.contains(&(mask | (1 << j))));
            if !maximal {
                continue;
            }
            let sub = subset_sizes(mask);
            if seen.insert(sub.clone()) {
                candidates.push((mask, sub));
            }
        }
        // deterministic order: bigger bins first, then by content
        candidates.sort_by(|a, b| {
            b.0.count_ones()
                .cmp(&a.0.count_ones())
                .then_with(|| b.1.cmp(&a.1))
        });

        let mut best = u64::MAX;
        let mut best_bin: Vec<Rational> = Vec::new();
        for (mask, sub) in candidates {
            let rest: Vec<Rational> = (0..m)
                .filter(|j| mask & (1 << j) == 0)
                .map(|j| sizes[j].clone())
                .collect();
            // cost = m (every item pays one more bin) + optimum of the rest
            let bound = m as u64 + lb1_of_sizes(&rest);
            if bound >= best {
                continue;
            }
            let tail = self.solve(&rest)?;
            let cost = m as u64 + tail;
            if cost < best {
                best = cost;
                best_bin = sub;
            }
        }
        debug_assert!(best < u64::MAX, "some maximal feasible bin always exists");
        self.memo.insert(sizes.to_vec(), (best, best_bin));
        Ok(best)
    }
}

/// Provably optimal min-sum packing for a tiny instance.
pub fn exact_min_sum(inst: &Instance, limits: &SearchLimits) -> Result<(Packing, u64), Error> {
    let n = inst.n();
    if n > limits.max_items {
        return Err(Error::TooManyItems { n, max: limits.max_items });
    }
    if n == 0 {
        return Ok((Packing::empty(), 0));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| inst.size(b).cmp(inst.size(a)).then(a.cmp(&b)));
    let sizes: Vec<Rational> = ids.iter().map(|&id| inst.size(id).clone()).collect();

    let mut solver = MinSum { oracle: Oracle::new(limits), memo: HashMap::new() };
    let cost = solver.solve(&sizes)?;

    // replay the memoized choices to build the packing
    let mut placements = Vec::with_capacity(n);
    let mut remaining = ids;
    let mut bin = 0usize;
    while !remaining.is_empty() {
        bin += 1;
        let key: Vec<Rational> = remaining.iter().map(|&id| inst.size(id).clone()).collect();
        let (_, bin_sizes) = solver.memo.get(&key).expect("state was solved").clone();
        let mut chosen: Vec<usize> = Vec::with_capacity(bin_sizes.len());
        let mut rest: Vec<usize> = Vec::new();
        let mut want = bin_sizes.as_slice();
        for &id in &remaining {
            if let Some(first) = want.first() {
                if inst.size(id) == first {
                    chosen.push(id);
                    want = &want[1..];
                    continue;
                }
            }
            rest.push(id);
        }
        assert!(want.is_empty(), "bin multiset present in remaining items");
        let cert = solver
            .oracle
            .fits(&bin_sizes)?
            .expect("memoized bin is feasible");
        for (&id, (size, x, y)) in chosen.iter().zip(cert.iter()) {
            debug_assert_eq!(inst.size(id), size);
            placements.push(Placement { item: id, bin, x: x.clone(), y: y.clone() });
        }
        remaining = rest;
    }
    let packing = Packing::new(placements)?;
    debug_assert_eq!(packing.cost(), cost);
    Ok((packing, cost))
}
