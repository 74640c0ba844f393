//! Level-oriented heuristics: NFDH, FFDH, NFIH and the overflow
//! feasibilization.
//!
//! A shelf (level) spans the bin's full width. NFDH/FFDH sort items by
//! non-increasing size, so a shelf's height is the size of its first item;
//! NFIH sorts non-decreasing and a level's height is the size of its last
//! item. NFIH may stack up to four overflow levels above a bin before
//! opening the next one; [`feasibilize`] turns that relaxed structure back
//! into a real packing.

use crate::model::{
    Error, Instance, Item, OverflowLevel, Packing, Placement, Rational, RelaxedPacking,
};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

fn sorted_desc(items: &[Item]) -> Vec<Item> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
    v
}

fn sorted_asc(items: &[Item]) -> Vec<Item> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| a.size.cmp(&b.size).then(a.id.cmp(&b.id)));
    v
}

/// Next Fit Decreasing Height. Items are sorted by non-increasing size
/// (ties by id); each shelf is filled left to right until an item does not
/// fit, then the shelf closes for good; a bin closes when no new shelf fits
/// under its ceiling.
pub fn nfdh(items: &[Item]) -> Packing {
    let one = Rational::one();
    let mut placements = Vec::with_capacity(items.len());
    let mut bin = 0usize;
    let mut shelf_y = Rational::zero();
    let mut shelf_h = Rational::zero();
    let mut cursor = Rational::zero();
    for it in sorted_desc(items) {
        let s = it.size.clone();
        if bin == 0 {
            bin = 1;
            shelf_y = Rational::zero();
            shelf_h = s.clone();
            cursor = Rational::zero();
        } else if &cursor + &s <= one {
            // fits on the current shelf; sizes are non-increasing so the
            // height always fits
            debug_assert!(s <= shelf_h);
        } else if &shelf_y + &shelf_h + &s <= one {
            shelf_y = &shelf_y + &shelf_h;
            shelf_h = s.clone();
            cursor = Rational::zero();
        } else {
            bin += 1;
            shelf_y = Rational::zero();
            shelf_h = s.clone();
            cursor = Rational::zero();
        }
        placements.push(Placement { item: it.id, bin, x: cursor.clone(), y: shelf_y.clone() });
        cursor = &cursor + &s;
    }
    Packing::new(placements).expect("nfdh places each item once")
}

struct FfdhShelf {
    y: Rational,
    cursor: Rational,
}

/// First Fit Decreasing Height (an AFDH-family representative). Items are
/// sorted by non-increasing size; each item goes to the first existing
/// shelf with room, else the first bin with headroom opens a new shelf,
/// else a new bin opens.
pub fn ffdh(items: &[Item]) -> Packing {
    let one = Rational::one();
    let mut placements = Vec::with_capacity(items.len());
    // per bin: shelves in creation order plus used height
    let mut bins: Vec<(Vec<FfdhShelf>, Rational)> = Vec::new();
    for it in sorted_desc(items) {
        let s = it.size.clone();
        let mut placed = false;
        'shelves: for (bi, (shelves, _)) in bins.iter_mut().enumerate() {
            for shelf in shelves.iter_mut() {
                if &shelf.cursor + &s <= one {
                    placements.push(Placement {
                        item: it.id,
                        bin: bi + 1,
                        x: shelf.cursor.clone(),
                        y: shelf.y.clone(),
                    });
                    shelf.cursor = &shelf.cursor + &s;
                    placed = true;
                    break 'shelves;
                }
            }
        }
        if placed {
            continue;
        }
        let target = bins
            .iter()
            .position(|(_, used)| used + &s <= one)
            .unwrap_or_else(|| {
                bins.push((Vec::new(), Rational::zero()));
                bins.len() - 1
            });
        let (shelves, used) = &mut bins[target];
        placements.push(Placement {
            item: it.id,
            bin: target + 1,
            x: Rational::zero(),
            y: used.clone(),
        });
        shelves.push(FfdhShelf { y: used.clone(), cursor: s.clone() });
        *used = &*used + &s;
    }
    Packing::new(placements).expect("ffdh places each item once")
}

/// Next Fit Increasing Height. Items sorted by non-decreasing size; levels
/// are filled left to right, a closed level's height is its last (tallest)
/// item. Levels that no longer fit inside the bin stack above it, at most
/// four, then the next bin opens. Requires every size ≤ `max_size`.
pub fn nfih(items: &[Item], max_size: &Rational) -> Result<RelaxedPacking, Error> {
    for it in items {
        if &it.size > max_size {
            return Err(Error::Precondition(format!(
                "nfih: item {} has size {} above the threshold {}",
                it.id,
                crate::model::format_rational(&it.size),
                crate::model::format_rational(max_size)
            )));
        }
    }
    let one = Rational::one();
    let mut placements: Vec<Placement> = Vec::new();
    let mut overflow: BTreeMap<usize, Vec<OverflowLevel>> = BTreeMap::new();

    let mut bin = 0usize;
    let mut in_bin = true; // current level lies inside the bin
    let mut above_count = 0usize; // overflow levels already CLOSED above this bin
    let mut level_y = Rational::zero(); // base of the current level (in-bin only)
    let mut cursor = Rational::zero();
    let mut last_size = Rational::zero(); // defines the level height on close
    let mut level_entries: Vec<(usize, Rational)> = Vec::new(); // above-bin only

    for it in sorted_asc(items) {
        let s = it.size.clone();
        if bin == 0 {
            bin = 1;
        } else {
            // sizes are non-decreasing, so an in-bin level can outgrow the
            // bin's remaining height as well as its width
            let width_ok = &cursor + &s <= one;
            let height_ok = !in_bin || &level_y + &s <= one;
            if !(width_ok && height_ok) {
                // close the current level and open the next one
                if in_bin {
                    let top = &level_y + &last_size;
                    if &top + &s <= one {
                        level_y = top;
                    } else {
                        in_bin = false;
                        above_count = 0;
                        level_entries = Vec::new();
                    }
                } else {
                    overflow.entry(bin).or_default().push(OverflowLevel {
                        height: last_size.clone(),
                        entries: std::mem::take(&mut level_entries),
                    });
                    above_count += 1;
                    if above_count == 4 {
                        bin += 1;
                        in_bin = true;
                        level_y = Rational::zero();
                    }
                }
                cursor = Rational::zero();
            }
        }
        if in_bin {
            placements.push(Placement {
                item: it.id,
                bin,
                x: cursor.clone(),
                y: level_y.clone(),
            });
        } else {
            level_entries.push((it.id, cursor.clone()));
        }
        cursor = &cursor + &s;
        last_size = s;
    }
    if !in_bin && !level_entries.is_empty() {
        overflow.entry(bin).or_default().push(OverflowLevel {
            height: last_size,
            entries: level_entries,
        });
    }
    Ok(RelaxedPacking { placements, overflow })
}

/// Feasibilization with the threshold expressed as `eps^(p_exp+3)`.
pub fn feasibilize(q: &RelaxedPacking, eps: &Rational, p_exp: u32) -> Result<Packing, Error> {
    let threshold = power(eps, p_exp + 3);
    feasibilize_with_threshold(q, eps, &threshold)
}

fn power(base: &Rational, exp: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Moves overflow levels into real bins. Bins are processed in blocks of
/// `ceil(1/(4*threshold))`; each block's overflow levels are restacked
/// bottom-up into a new bin. The first block's new bin lands at position
/// `1/eps` (appended after the block when it has fewer bins than that);
/// every later block's new bin opens at the start of its block. When a
/// block's levels exceed one bin's height (impossible in the regime the
/// transformation is designed for) the spill continues into further
/// adjacent new bins rather than failing.
pub fn feasibilize_with_threshold(
    q: &RelaxedPacking,
    eps: &Rational,
    threshold: &Rational,
) -> Result<Packing, Error> {
    let inv_eps = invert_integer(eps)?;
    if threshold <= &Rational::zero() {
        return Err(Error::Precondition("threshold must be positive".to_string()));
    }
    let m = q.num_bins();
    if q.overflow.values().all(|v| v.is_empty()) {
        return Packing::new(q.placements.clone());
    }

    let block_len = {
        let b = (Rational::one() / (Rational::from_integer(4.into()) * threshold))
            .ceil()
            .to_integer();
        b.to_usize().unwrap_or(m).clamp(1, m.max(1))
    };

    // per original bin: its in-bin placements, with coordinates kept
    let mut bin_contents: Vec<Vec<Placement>> = vec![Vec::new(); m + 1];
    for p in &q.placements {
        bin_contents[p.bin].push(p.clone());
    }

    // a unit is one final bin: either an original bin or a new overflow bin
    let mut units: Vec<Vec<(usize, Rational, Rational)>> = Vec::new(); // (item, x, y)
    let one = Rational::one();

    let blocks: Vec<(usize, usize)> = (0..)
        .map(|k| (k * block_len + 1, ((k + 1) * block_len).min(m)))
        .take_while(|(lo, _)| *lo <= m)
        .collect();
    for (idx, &(lo, hi)) in blocks.iter().enumerate() {
        // restack this block's overflow levels into fresh bins
        let mut fresh: Vec<Vec<(usize, Rational, Rational)>> = Vec::new();
        let mut cur: Vec<(usize, Rational, Rational)> = Vec::new();
        let mut top = Rational::zero();
        for b in lo..=hi {
            for level in q.overflow.get(&b).map(|v| v.as_slice()).unwrap_or(&[]) {
                if &top + &level.height > one && !cur.is_empty() {
                    fresh.push(std::mem::take(&mut cur));
                    top = Rational::zero();
                }
                for (item, x) in &level.entries {
                    cur.push((*item, x.clone(), top.clone()));
                }
                top = &top + &level.height;
            }
        }
        if !cur.is_empty() {
            fresh.push(cur);
        }

        let originals = (lo..=hi).map(|b| {
            bin_contents[b]
                .iter()
                .map(|p| (p.item, p.x.clone(), p.y.clone()))
                .collect::<Vec<_>>()
        });
        if idx == 0 {
            units.extend(originals);
            let at = if units.len() >= inv_eps { inv_eps - 1 } else { units.len() };
            for (j, f) in fresh.into_iter().enumerate() {
                units.insert(at + j, f);
            }
        } else {
            units.extend(fresh);
            units.extend(originals);
        }
    }

    let mut placements = Vec::with_capacity(q.item_count());
    for (i, unit) in units.iter().enumerate() {
        for (item, x, y) in unit {
            placements.push(Placement { item: *item, bin: i + 1, x: x.clone(), y: y.clone() });
        }
    }
    Packing::new(placements)
}

/// Checks that `1/eps` is a positive integer and returns it.
pub fn invert_integer(eps: &Rational) -> Result<usize, Error> {
    if eps <= &Rational::zero() {
        return Err(Error::Precondition("eps must be positive".to_string()));
    }
    let inv = Rational::one() / eps;
    if !inv.is_integer() {
        return Err(Error::Precondition(format!(
            "1/eps must be an integer, got eps = {}",
            crate::model::format_rational(eps)
        )));
    }
    inv.to_integer()
        .to_usize()
        .ok_or_else(|| Error::Precondition("1/eps is out of range".to_string()))
}

/// Per-bin fill statistics used by the waste-bound diagnostics.
#[derive(Debug, Clone)]
pub struct BinFill {
    pub bin: usize,
    pub count: usize,
    pub occupied: Rational,
    /// largest item side in the bin
    pub max_size: Rational,
    /// largest item area in the bin
    pub max_area: Rational,
}

/// Computes occupied area and extreme item measures per bin.
pub fn bin_fill_stats(p: &Packing, inst: &Instance) -> Vec<BinFill> {
    let mut map: BTreeMap<usize, BinFill> = BTreeMap::new();
    for pl in p.placements() {
        let s = inst.size(pl.item).clone();
        let a = &s * &s;
        let e = map.entry(pl.bin).or_insert_with(|| BinFill {
            bin: pl.bin,
            count: 0,
            occupied: Rational::zero(),
            max_size: Rational::zero(),
            max_area: Rational::zero(),
        });
        e.count += 1;
        e.occupied = &e.occupied + &a;
        if s > e.max_size {
            e.max_size = s;
        }
        if a > e.max_area {
            e.max_area = a;
        }
    }
    map.into_values().collect()
}
