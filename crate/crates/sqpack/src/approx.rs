//! The grouped constant-factor solver for mixed instances: small items go
//! group by group through shelf packing into fresh bins, medium and large
//! items go through the corner packing with fuller-bins-first reordering,
//! and the two parts are concatenated. Also the empirical ratio suite
//! tying solver output to the lower bounds and, where tractable, to the
//! exact optimum.

use crate::bounds::{self, classify_size, SizeClass};
use crate::exact::{exact_min_sum, SearchLimits};
use crate::ffds::ffds_minsum;
use crate::model::{Error, Instance, Item, Packing, Rational};
use crate::shelves::nfdh;

/// Diagnostics accompanying a solve: the achieved cost against both lower
/// bounds, the grouping and corner-packing statistics it decomposes into,
/// and the a-priori cost ceiling `2R + ffds(2r+2)`.
#[derive(Debug, Clone)]
pub struct ApproxReport {
    pub cost: u64,
    pub lb1: u64,
    pub lb2: u64,
    pub r: u64,
    pub k: u64,
    pub b: u64,
    pub small_bins: u64,
    pub upper_bound_2r_plus_ffds: u64,
    pub ratio_vs_max_lb: Rational,
}

/// Packs the full instance: each all-small group and the small tail shelf-
/// packed into fresh bins in group order, then the reordered corner packing
/// of everything above 1/3 appended after the last small bin.
pub fn solve_53_22(inst: &Instance) -> (Packing, ApproxReport) {
    let gp = bounds::build_groups(inst);
    let items = inst.items();

    let mut packing = Packing::empty();
    let mut group_slices: Vec<&[usize]> = gp.groups[..gp.r].iter().map(|g| g.as_slice()).collect();
    if !gp.small_tail.is_empty() {
        group_slices.push(&gp.small_tail);
    }
    for ids in group_slices {
        let members: Vec<Item> = ids.iter().map(|&id| items[id].clone()).collect();
        let part = nfdh(&members);
        packing = packing.concat(&part).expect("group item ids are disjoint");
    }
    let small_bins = packing.num_bins() as u64;

    let big_items: Vec<Item> = items
        .iter()
        .filter(|it| classify_size(&it.size) != SizeClass::Small)
        .cloned()
        .collect();
    let corner = ffds_minsum(&big_items).expect("selected sizes exceed 1/3");
    let ffds0 = corner.cost();
    packing = packing.concat(&corner).expect("small and big item ids are disjoint");

    let cost = packing.cost();
    let lb1 = bounds::lb1(&gp);
    let lb2 = bounds::lb2(&gp, inst);
    let (k, b) = bounds::kb_stats(inst);
    let r = gp.r as u64;
    let upper = 2 * gp.small_lb + ffds0 + (k + b) * (2 * r + 2);
    let max_lb = lb1.max(lb2);
    let ratio = if max_lb == 0 {
        // only the empty instance has no lower bound; its cost is 0
        Rational::from_integer(1.into())
    } else {
        Rational::new(cost.into(), max_lb.into())
    };
    let report = ApproxReport {
        cost,
        lb1,
        lb2,
        r,
        k,
        b,
        small_bins,
        upper_bound_2r_plus_ffds: upper,
        ratio_vs_max_lb: ratio,
    };
    (packing, report)
}

/// Per-instance quality rows over a corpus, as CSV. The exact optimum is
/// filled in when the oracle can afford the instance (n within `limits`)
/// and left blank otherwise. Ratios are exact rationals.
pub fn empirical_ratio_suite(
    corpus: &[(String, Instance)],
    limits: &SearchLimits,
) -> Result<String, Error> {
    let mut out =
        String::from("instance_id,n,cost,lb1,lb2,opt_or_blank,ratio_vs_lb,ratio_vs_opt_or_blank\n");
    for (id, inst) in corpus {
        let (_, rep) = solve_53_22(inst);
        let (opt_col, ratio_opt_col) = if inst.n() <= limits.max_items {
            let (_, opt) = exact_min_sum(inst, limits)?;
            let ratio = if opt == 0 {
                Rational::from_integer(1.into())
            } else {
                Rational::new(rep.cost.into(), opt.into())
            };
            (opt.to_string(), crate::model::format_rational(&ratio))
        } else {
            (String::new(), String::new())
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            id,
            inst.n(),
            rep.cost,
            rep.lb1,
            rep.lb2,
            opt_col,
            crate::model::format_rational(&rep.ratio_vs_max_lb),
            ratio_opt_col,
        ));
    }
    Ok(out)
}
