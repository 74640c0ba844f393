//! Core data model: exact rationals, instances, packings and the validator.
//!
//! Geometry convention: bins are closed unit squares `[0,1] x [0,1]` indexed
//! from 1, the origin is the bottom-left corner, and an item of size `s`
//! placed at `(x, y)` covers `[x, x+s] x [y, y+s]`. Items may touch each
//! other and the bin boundary; only open-interior intersection counts as
//! overlap, and every fit test below is non-strict.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational number used everywhere in this crate.
pub type Rational = num_rational::BigRational;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid size for item {item}: {size} (sizes must satisfy 0 < s <= 1)")]
    InvalidSize { item: usize, size: String },
    #[error("cannot parse rational '{text}': {msg}")]
    BadRational { text: String, msg: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid packing: {0}")]
    InvalidPacking(String),
    #[error("search budget exhausted after {nodes} nodes (limit {limit}); raise --budget or shrink the input")]
    BudgetExceeded { nodes: u64, limit: u64 },
    #[error("{n} items exceeds the exact-search limit of {max}; raise max_items to force the attempt")]
    TooManyItems { n: usize, max: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Shorthand for a rational from an integer pair. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from a non-negative integer.
pub fn rat_u(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q", a plain integer, or a decimal like "0.125" into an exact
/// rational. Decimals convert exactly (0.125 becomes 1/8).
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = |msg: &str| Error::BadRational {
        text: text.to_string(),
        msg: msg.to_string(),
    };
    if s.is_empty() {
        return Err(bad("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (neg, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part),
        };
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(bad("bad decimal"));
        }
        let joined = format!("{}{}", int_digits, frac_part);
        let n: BigInt = if joined.is_empty() {
            BigInt::zero()
        } else {
            joined.parse().map_err(|_| bad("bad decimal digits"))?
        };
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        let v = Rational::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad("not an integer, fraction or decimal"))?;
    Ok(Rational::from_integer(n))
}

/// Formats a rational as "p/q" in lowest terms with a positive denominator.
/// Integers render with denominator 1, e.g. "0/1".
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// One square item. `id` is the zero-based index within its instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: usize,
    pub size: Rational,
}

/// A problem instance: squares with sizes in (0, 1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    items: Vec<Item>,
}

impl Instance {
    /// Builds an instance; item ids are assigned 0..n-1 in input order.
    pub fn new(sizes: Vec<Rational>) -> Result<Self, Error> {
        let items = sizes
            .into_iter()
            .enumerate()
            .map(|(id, size)| {
                if size <= Rational::zero() || size > Rational::one() {
                    Err(Error::InvalidSize {
                        item: id,
                        size: format_rational(&size),
                    })
                } else {
                    Ok(Item { id, size })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance { items })
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Size of an item. Panics on an unknown id; the validator reports
    /// unknown ids before any caller needs this.
    pub fn size(&self, id: usize) -> &Rational {
        &self.items[id].size
    }

    pub fn get(&self, id: usize) -> Option<&Item> {
        self.items.get(id)
    }

    /// Sum of `size^2` over all items.
    pub fn total_area(&self) -> Rational {
        self.items
            .iter()
            .map(|it| &it.size * &it.size)
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// An item placed in a bin: bottom-left corner at `(x, y)`, bins 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub item: usize,
    pub bin: usize,
    pub x: Rational,
    pub y: Rational,
}

/// What the validator can complain about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownItem { item: usize },
    DuplicateItem { item: usize },
    MissingItem { item: usize },
    BinIndexZero { item: usize },
    OutOfBin { item: usize, bin: usize },
    Overlap { first: usize, second: usize, bin: usize },
    BinGap { bin: usize },
    OverflowLevelCount { bin: usize, count: usize },
    OverflowMisfit { item: usize, bin: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownItem { item } => write!(f, "item {item} does not exist in the instance"),
            Violation::DuplicateItem { item } => write!(f, "item {item} is placed more than once"),
            Violation::MissingItem { item } => write!(f, "item {item} is not placed"),
            Violation::BinIndexZero { item } => write!(f, "item {item} uses bin 0; bins are 1-based"),
            Violation::OutOfBin { item, bin } => write!(f, "item {item} sticks out of bin {bin}"),
            Violation::Overlap { first, second, bin } => {
                write!(f, "items {first} and {second} overlap in bin {bin}")
            }
            Violation::BinGap { bin } => write!(f, "bin {bin} is empty but later bins are used"),
            Violation::OverflowLevelCount { bin, count } => {
                write!(f, "bin {bin} has {count} overflow levels (at most 4 allowed)")
            }
            Violation::OverflowMisfit { item, bin } => {
                write!(f, "overflow item {item} above bin {bin} breaks its level bounds")
            }
        }
    }
}

/// A feasible-candidate packing: every placed item with exact coordinates.
///
/// Placements are kept sorted by item id. Construction rejects duplicate
/// items; geometric checks live in [`Packing::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    placements: Vec<Placement>,
}

impl Packing {
    pub fn new(mut placements: Vec<Placement>) -> Result<Self, Error> {
        placements.sort_by_key(|p| p.item);
        for w in placements.windows(2) {
            if w[0].item == w[1].item {
                return Err(Error::InvalidPacking(format!(
                    "item {} is placed more than once",
                    w[0].item
                )));
            }
        }
        Ok(Packing { placements })
    }

    pub fn empty() -> Self {
        Packing { placements: Vec::new() }
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn item_count(&self) -> usize {
        self.placements.len()
    }

    /// Highest bin index in use (0 for the empty packing).
    pub fn num_bins(&self) -> usize {
        self.placements.iter().map(|p| p.bin).max().unwrap_or(0)
    }

    /// Min-sum objective: each item in bin j contributes j.
    pub fn cost(&self) -> u64 {
        self.placements.iter().map(|p| p.bin as u64).sum()
    }

    /// Placements grouped by bin index.
    pub fn bins(&self) -> BTreeMap<usize, Vec<&Placement>> {
        let mut out: BTreeMap<usize, Vec<&Placement>> = BTreeMap::new();
        for p in &self.placements {
            out.entry(p.bin).or_default().push(p);
        }
        out
    }

    pub fn bin_counts(&self) -> BTreeMap<usize, usize> {
        let mut out: BTreeMap<usize, usize> = BTreeMap::new();
        for p in &self.placements {
            *out.entry(p.bin).or_default() += 1;
        }
        out
    }

    /// Sum of `size^2` per bin.
    pub fn occupied_area(&self, inst: &Instance) -> BTreeMap<usize, Rational> {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        for p in &self.placements {
            if let Some(it) = inst.get(p.item) {
                let a = &it.size * &it.size;
                out.entry(p.bin)
                    .and_modify(|v| *v += &a)
                    .or_insert(a);
            }
        }
        out
    }

    /// Full check against an instance: coverage (every item exactly once),
    /// 1-based contiguous bins, containment and pairwise non-overlap.
    /// Returns all violations found; an empty vector means the packing is
    /// feasible.
    pub fn validate(&self, inst: &Instance) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = vec![false; inst.n()];
        for p in &self.placements {
            match inst.get(p.item) {
                None => out.push(Violation::UnknownItem { item: p.item }),
                Some(_) => {
                    if seen[p.item] {
                        out.push(Violation::DuplicateItem { item: p.item });
                    }
                    seen[p.item] = true;
                }
            }
            if p.bin == 0 {
                out.push(Violation::BinIndexZero { item: p.item });
            }
        }
        for (id, was_seen) in seen.iter().enumerate() {
            if !was_seen {
                out.push(Violation::MissingItem { item: id });
            }
        }

        let bins = self.bins();
        if let Some((&max_bin, _)) = bins.iter().next_back() {
            for b in 1..=max_bin {
                if !bins.contains_key(&b) {
                    out.push(Violation::BinGap { bin: b });
                }
            }
        }

        let one = Rational::one();
        for (&bin, ps) in &bins {
            if bin == 0 {
                continue; // already reported per item
            }
            let boxed: Vec<(&Placement, &Rational)> = ps
                .iter()
                .filter_map(|p| inst.get(p.item).map(|it| (*p, &it.size)))
                .collect();
            for (p, s) in &boxed {
                if p.x < Rational::zero()
                    || p.y < Rational::zero()
                    || &p.x + *s > one
                    || &p.y + *s > one
                {
                    out.push(Violation::OutOfBin { item: p.item, bin });
                }
            }
            for i in 0..boxed.len() {
                for j in (i + 1)..boxed.len() {
                    let (a, sa) = &boxed[i];
                    let (b, sb) = &boxed[j];
                    let x_overlap = a.x < &b.x + *sb && b.x < &a.x + *sa;
                    let y_overlap = a.y < &b.y + *sb && b.y < &a.y + *sa;
                    if x_overlap && y_overlap {
                        out.push(Violation::Overlap {
                            first: a.item.min(b.item),
                            second: a.item.max(b.item),
                            bin,
                        });
                    }
                }
            }
        }
        out
    }

    /// Same packing with every bin index increased by `d`. The result is not
    /// contiguous on its own; it exists to be fed into [`Packing::concat`].
    pub fn shift_bins(&self, d: usize) -> Packing {
        Packing {
            placements: self
                .placements
                .iter()
                .map(|p| Placement {
                    item: p.item,
                    bin: p.bin + d,
                    x: p.x.clone(),
                    y: p.y.clone(),
                })
                .collect(),
        }
    }

    /// Relabels bins so that fuller bins come first. Bin contents and
    /// coordinates are untouched; ties keep the original bin order. For a
    /// fixed assignment of items to bins this ordering minimizes the min-sum
    /// cost, so the cost never increases.
    pub fn reorder_bins_by_count(&self) -> Packing {
        let counts = self.bin_counts();
        let mut order: Vec<(usize, usize)> = counts.iter().map(|(&b, &c)| (b, c)).collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
        for (rank, (bin, _)) in order.into_iter().enumerate() {
            relabel.insert(bin, rank + 1);
        }
        Packing {
            placements: self
                .placements
                .iter()
                .map(|p| Placement {
                    item: p.item,
                    bin: relabel[&p.bin],
                    x: p.x.clone(),
                    y: p.y.clone(),
                })
                .collect(),
        }
    }

    /// Appends `other` after this packing's last bin. Item sets must be
    /// disjoint.
    pub fn concat(&self, other: &Packing) -> Result<Packing, Error> {
        let shifted = other.shift_bins(self.num_bins());
        let mut all = self.placements.clone();
        all.extend(shifted.placements);
        Packing::new(all)
    }
}

/// One overflow level floating above a bin: a row of items sharing a base
/// line, `height` equal to its tallest (last-packed) item. Entries are
/// `(item id, x offset)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverflowLevel {
    pub height: Rational,
    pub entries: Vec<(usize, Rational)>,
}

/// A packing that may store up to 4 overflow levels above each bin. Items in
/// an overflow level of bin j still cost j; the structure is a relaxation
/// used mid-pipeline and is never valid output on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedPacking {
    pub placements: Vec<Placement>,
    pub overflow: BTreeMap<usize, Vec<OverflowLevel>>,
}

impl RelaxedPacking {
    pub fn item_count(&self) -> usize {
        self.placements.len()
            + self
                .overflow
                .values()
                .flat_map(|levels| levels.iter())
                .map(|l| l.entries.len())
                .sum::<usize>()
    }

    pub fn num_bins(&self) -> usize {
        let in_bin = self.placements.iter().map(|p| p.bin).max().unwrap_or(0);
        let over = self.overflow.keys().next_back().copied().unwrap_or(0);
        in_bin.max(over)
    }

    /// Overflow items cost the index of the bin they float above.
    pub fn cost(&self) -> u64 {
        let base: u64 = self.placements.iter().map(|p| p.bin as u64).sum();
        let over: u64 = self
            .overflow
            .iter()
            .map(|(&bin, levels)| {
                (bin as u64) * levels.iter().map(|l| l.entries.len() as u64).sum::<u64>()
            })
            .sum();
        base + over
    }

    /// Checks the relaxed structure: the in-bin part must be a feasible
    /// packing of its items, every item appears exactly once counting
    /// overflow entries, each bin has at most 4 levels, and each level is a
    /// non-overlapping row within the unit width whose items fit under the
    /// level height.
    pub fn validate(&self, inst: &Instance) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = vec![false; inst.n()];
        let mut mark = |item: usize, out: &mut Vec<Violation>| match seen.get_mut(item) {
            None => out.push(Violation::UnknownItem { item }),
            Some(slot) => {
                if *slot {
                    out.push(Violation::DuplicateItem { item });
                }
                *slot = true;
            }
        };
        for p in &self.placements {
            mark(p.item, &mut out);
        }
        for levels in self.overflow.values() {
            for level in levels {
                for (item, _) in &level.entries {
                    mark(*item, &mut out);
                }
            }
        }
        for (id, was_seen) in seen.iter().enumerate() {
            if !was_seen {
                out.push(Violation::MissingItem { item: id });
            }
        }

        // Geometry of the in-bin part: reuse the strict validator on the
        // subset of items it places (coverage was handled above).
        let sub = Packing {
            placements: self.placements.clone(),
        };
        for v in sub.validate(inst) {
            match v {
                Violation::MissingItem { .. } => {}
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }

        let one = Rational::one();
        for (&bin, levels) in &self.overflow {
            if levels.len() > 4 {
                out.push(Violation::OverflowLevelCount { bin, count: levels.len() });
            }
            for level in levels {
                let mut spans: Vec<(usize, &Rational, Rational)> = Vec::new();
                for (item, x) in &level.entries {
                    let Some(it) = inst.get(*item) else { continue };
                    if x < &Rational::zero() || x + &it.size > one || it.size > level.height {
                        out.push(Violation::OverflowMisfit { item: *item, bin });
                    }
                    spans.push((*item, x, x + &it.size));
                }
                for i in 0..spans.len() {
                    for j in (i + 1)..spans.len() {
                        let (a, ax, ax2) = (spans[i].0, spans[i].1, &spans[i].2);
                        let (b, bx, bx2) = (spans[j].0, spans[j].1, &spans[j].2);
                        if ax < bx2 && bx < ax2 {
                            out.push(Violation::Overlap {
                                first: a.min(b),
                                second: a.max(b),
                                bin,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
