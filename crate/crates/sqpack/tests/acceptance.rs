//! Acceptance gate for the toolkit: eight independent criteria, one test
//! each, printing a single [PASS]/[FAIL] line (run with --nocapture to see
//! the lines for passing tests; failing tests always show theirs together
//! with the analysis of every violation).
//!
//! Three checks assert stated closed forms or capacity facts that the
//! implementation measurably contradicts; those tests fail and print the
//! arithmetic showing why. See the "Known failing checks" section of the
//! README before treating a red line here as a code defect.

use sqpack::approx::solve_53_22;
use sqpack::bounds::{
    build_groups, kb_stats, lb1 as group_lb1, mixed_instance, refined_lb1_rhs,
};
use sqpack::exact::{exact_min_sum, fits_in_unit_bin, SearchLimits};
use sqpack::ffds::ffds_minsum;
use sqpack::instance::{
    draw_grid, gen_adversarial, generate, parse_instance, parse_packing, serialize_instance,
    serialize_packing, GeneratorSpec, SplitMix64,
};
use sqpack::model::{format_rational, rat, rat_u, Error, Instance, Item, Rational};
use sqpack::ptas::{ptas_solve, PtasParams};
use sqpack::shelves::{feasibilize_with_threshold, ffdh, nfdh, nfih};
use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn sizes_str(inst: &Instance) -> String {
    inst.items()
        .iter()
        .map(|it| format_rational(&it.size))
        .collect::<Vec<_>>()
        .join(" ")
}

fn enforce_runtime(fails: &mut Vec<String>, start: Instant, limit: Duration, label: &str) {
    let elapsed = start.elapsed();
    if elapsed > limit {
        fails.push(format!("runtime {elapsed:.1?} exceeds the {label} budget"));
    }
}

/// Prints the verdict line; on failure prints up to eight violations plus
/// any explanatory notes and panics.
fn conclude(criterion: &str, fails: Vec<String>, notes: &[&str]) {
    if fails.is_empty() {
        println!("[PASS] {criterion}");
        return;
    }
    println!("[FAIL] {criterion}");
    for f in fails.iter().take(8) {
        println!("  - {f}");
    }
    if fails.len() > 8 {
        println!("  - ... and {} more", fails.len() - 8);
    }
    for n in notes {
        println!("  note: {n}");
    }
    panic!("{criterion}: {} violation(s), see the lines above", fails.len());
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_closed_form_shelf_costs() {
    let start = Instant::now();
    let mut fails = Vec::new();

    for t in 3u64..=8 {
        let inst = gen_adversarial(t as u32).expect("t is at least 3");
        let items = inst.items();

        let measured_ffdh = ffdh(items).cost();
        let want_ffdh = (t * t * t + t * t + 2 * t) / 2;
        if measured_ffdh != want_ffdh {
            fails.push(format!(
                "ffdh at t = {t}: cost {measured_ffdh}, closed form (t^3+t^2+2t)/2 = {want_ffdh}"
            ));
        }

        let nfdh_packing = nfdh(items);
        let measured_nfdh = nfdh_packing.cost();
        let want_nfdh = (2 * t * t * t + 3 * t * t - t - 2) / 2;
        if measured_nfdh != want_nfdh {
            fails.push(format!(
                "nfdh at t = {t}: cost {measured_nfdh}, closed form (2t^3+3t^2-t-2)/2 = {want_nfdh}"
            ));
        }

        let measured_reorder = nfdh_packing.reorder_bins_by_count().cost();
        let want_reorder = (3 * t * t + 5 * t - 2) / 2; // 3t^2/2 + 5t/2 - 1
        if measured_reorder != want_reorder {
            let alt = (3 * t * t + 5 * t + 2) / 2;
            let hint = if measured_reorder == alt {
                format!(" (the measured cost equals (3t^2+5t+2)/2 = {alt})")
            } else {
                String::new()
            };
            fails.push(format!(
                "count-reordered nfdh at t = {t}: cost {measured_reorder}, \
                 stated closed form 3t^2/2+5t/2-1 = {want_reorder}{hint}"
            ));
        }

        let measured_approx = solve_53_22(&inst).0.cost();
        let want_approx = (3 * t * t + 3 * t) / 2;
        if measured_approx != want_approx {
            fails.push(format!(
                "approx5322 at t = {t}: cost {measured_approx}, closed form (3t^2+3t)/2 = {want_approx}"
            ));
        }
    }

    enforce_runtime(&mut fails, start, Duration::from_secs(1), "1 s");
    conclude(
        "criterion 1 (closed-form shelf costs on the adversarial family)",
        fails,
        &["the reordered nfdh bins hold (t^2-t-1, t+2, 1 repeated t-1) items, summing to \
           (3t^2+5t+2)/2; the stated form 3t^2/2+5t/2-1 is short by exactly 2 for every t"],
    );
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_corner_solver_is_optimal_above_one_third() {
    let start = Instant::now();
    let limits = SearchLimits::default();
    let mut fails = Vec::new();

    for seed in 0..200u64 {
        let mut rng = SplitMix64::new(0xFFD5_0000 + seed);
        let n = 2 + rng.below(8) as usize; // 2..=9
        let sizes: Vec<Rational> = (0..n)
            .map(|_| draw_grid(&mut rng, &rat(1, 3), &rat(1, 1)).expect("nonempty range"))
            .collect();
        let inst = Instance::new(sizes).expect("sizes in (0, 1]");

        let greedy = ffds_minsum(inst.items()).expect("all sizes above 1/3").cost();
        let (_, opt) = exact_min_sum(&inst, &limits).expect("n is at most 9");
        if greedy != opt {
            fails.push(format!(
                "seed {seed}: ffds_minsum cost {greedy} differs from the optimum {opt} \
                 on sizes {}",
                sizes_str(&inst)
            ));
        }
    }

    enforce_runtime(&mut fails, start, Duration::from_secs(300), "5 min");
    conclude(
        "criterion 2 (corner solver matches the exact oracle above 1/3, 200 seeds)",
        fails,
        &[],
    );
}

// ------------------------------------------------------- criteria 3 and 4

struct TinyCase {
    inst: Instance,
    cost: u64,
    opt: u64,
    lb1: u64,
    lb2: u64,
}

/// 500 oracle-solved mixed instances with n <= 8, shared by the ratio and
/// lower-bound criteria so the exact solves are paid for once.
fn tiny_oracle_corpus() -> &'static [TinyCase] {
    static CORPUS: OnceLock<Vec<TinyCase>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let limits = SearchLimits::default();
        (0..500u64)
            .map(|seed| {
                let n = 1 + (seed % 8) as usize;
                let inst = mixed_instance(n, 1_000 + seed);
                let (_, report) = solve_53_22(&inst);
                let (_, opt) = exact_min_sum(&inst, &limits).expect("n is at most 8");
                TinyCase {
                    inst,
                    cost: report.cost,
                    opt,
                    lb1: report.lb1,
                    lb2: report.lb2,
                }
            })
            .collect()
    })
}

fn large_mixed_corpus_instance(seed: u64) -> Instance {
    let n = 20 + (seed % 481) as usize; // 20..=500
    mixed_instance(n, 50_000 + seed)
}

#[test]
fn criterion_3_ratio_guarantee_at_desk_scale() {
    let start = Instant::now();
    let mut fails = Vec::new();

    for (idx, case) in tiny_oracle_corpus().iter().enumerate() {
        // cost/opt <= 53/22 in integers
        if 22 * case.cost > 53 * case.opt {
            fails.push(format!(
                "tiny seed {idx}: cost {} vs optimum {} breaks the 53/22 ratio on sizes {}",
                case.cost,
                case.opt,
                sizes_str(&case.inst)
            ));
        }
    }

    for seed in 0..1000u64 {
        let inst = large_mixed_corpus_instance(seed);
        let (_, rep) = solve_53_22(&inst);

        // cost <= (31/22) lb1 + lb2 + 27769, scaled by 22
        if 22 * rep.cost > 31 * rep.lb1 + 22 * rep.lb2 + 22 * 27_769 {
            fails.push(format!(
                "large seed {seed}: cost {} exceeds (31/22)*{} + {} + 27769",
                rep.cost, rep.lb1, rep.lb2
            ));
        }

        // cost <= 2R + ffds(0) + (k+b) * small_bins
        let gp = build_groups(&inst);
        let non_small: Vec<Item> = inst
            .items()
            .iter()
            .filter(|it| it.size > rat(1, 3))
            .cloned()
            .collect();
        let ffds0 = if non_small.is_empty() {
            0
        } else {
            ffds_minsum(&non_small).expect("sizes above 1/3").cost()
        };
        let ceiling = 2 * gp.small_lb + ffds0 + (rep.k + rep.b) * rep.small_bins;
        if rep.cost > ceiling {
            fails.push(format!(
                "large seed {seed}: cost {} exceeds its decomposition ceiling \
                 2*{} + {} + ({} + {}) * {} = {}",
                rep.cost, gp.small_lb, ffds0, rep.k, rep.b, rep.small_bins, ceiling
            ));
        }
    }

    enforce_runtime(&mut fails, start, Duration::from_secs(600), "10 min");
    conclude(
        "criterion 3 (53/22 ratio on 500 oracle instances; cost ceilings on 1000 large ones)",
        fails,
        &[],
    );
}

#[test]
fn criterion_4_lower_bound_validity() {
    let mut fails = Vec::new();

    for (idx, case) in tiny_oracle_corpus().iter().enumerate() {
        if case.lb1 > case.opt {
            fails.push(format!(
                "tiny seed {idx}: lb1 = {} exceeds the optimum {} on sizes {}",
                case.lb1,
                case.opt,
                sizes_str(&case.inst)
            ));
        }
        if case.lb2 > case.opt {
            fails.push(format!(
                "tiny seed {idx}: lb2 = {} exceeds the optimum {} on sizes {}",
                case.lb2,
                case.opt,
                sizes_str(&case.inst)
            ));
        }
    }

    // Polynomial strengthening of lb1, checked with exact rationals on both
    // corpora: R + rk - 13r + k^2/18 - 17k/18 + rb + kb/9 - 3b/2 + 4 + b^2/8 <= lb1.
    let mut check_refined = |inst: &Instance, tag: String, fails: &mut Vec<String>| {
        let gp = build_groups(inst);
        let (k, b) = kb_stats(inst);
        let rhs = refined_lb1_rhs(&gp, k, b);
        let l1 = group_lb1(&gp);
        if rhs > rat_u(l1) {
            fails.push(format!(
                "{tag}: polynomial bound {} exceeds lb1 = {l1} \
                 (R = {}, r = {}, k = {k}, b = {b}, sizes {})",
                format_rational(&rhs),
                gp.small_lb,
                gp.r,
                sizes_str(inst)
            ));
        }
    };
    for (idx, case) in tiny_oracle_corpus().iter().enumerate() {
        check_refined(&case.inst, format!("tiny seed {idx}"), &mut fails);
    }
    for seed in 0..1000u64 {
        let inst = large_mixed_corpus_instance(seed);
        check_refined(&inst, format!("large seed {seed}"), &mut fails);
    }

    conclude(
        "criterion 4 (lower bounds never exceed the optimum; polynomial lb1 strengthening)",
        fails,
        &["the polynomial form substitutes floor(k/9) >= k/9 - 1 and floor(b/4) >= b/4 - 1 \
           into squared terms, which is invalid for k < 9 or b < 4; the smallest \
           counterexample is a single large item (r = 0, k = 0, b = 1), where the \
           polynomial gives 21/8 while lb1 = 1"],
    );
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_5_shelf_fill_bound_on_small_items() {
    let mut fails = Vec::new();
    let floor = rat(9, 16);

    for seed in 0..500u64 {
        let n = 20 + (seed % 181) as usize;
        let spec = GeneratorSpec::Uniform {
            n,
            lo: rat(1, 100),
            hi: rat(1, 3),
        };
        let inst = generate(&spec, 7_000 + seed).expect("valid generator spec");
        let p = nfdh(inst.items());
        let m = p.num_bins();
        for (bin, area) in p.occupied_area(&inst) {
            if bin < m && area < floor {
                fails.push(format!(
                    "seed {seed}: non-final bin {bin} of {m} holds area {} < 9/16",
                    format_rational(&area)
                ));
            }
        }
    }

    conclude(
        "criterion 5 (every non-final nfdh bin of small items is at least 9/16 full, 500 seeds)",
        fails,
        &[],
    );
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_pipeline_stage_factors() {
    let eps = rat(1, 4);
    let mut fails = Vec::new();

    // Shelf repair: relaxed -> feasible at threshold 1/32 costs at most 1 + eps.
    let thr = rat(1, 32);
    for seed in 0..120u64 {
        let n = 40 + (seed % 200) as usize;
        let spec = GeneratorSpec::Uniform {
            n,
            lo: rat(1, 100),
            hi: rat(1, 32),
        };
        let inst = generate(&spec, 9_000 + seed).expect("valid generator spec");
        let q = nfih(inst.items(), &thr).expect("all sizes fit the cap");
        let relaxed = q.cost();
        let p = feasibilize_with_threshold(&q, &eps, &thr).expect("repair succeeds");
        if 4 * p.cost() > 5 * relaxed {
            fails.push(format!(
                "repair seed {seed}: feasible cost {} vs relaxed cost {relaxed} \
                 exceeds the 5/4 factor",
                p.cost()
            ));
        }
    }

    // Medium insertion under its premises (|M| <= eps^3 * n by construction):
    // the stage inflation stays within 1 + 7*eps = 11/4.
    for seed in 0..110u64 {
        let mut rng = SplitMix64::new(0x4D5D_0000 + seed);
        let mut sizes = Vec::new();
        let n_small = 256 + rng.below(200) as usize;
        for _ in 0..n_small {
            sizes.push(draw_grid(&mut rng, &rat(1, 100), &rat(1, 32)).expect("range"));
        }
        let n_medium = 1 + rng.below(3) as usize;
        for _ in 0..n_medium {
            sizes.push(draw_grid(&mut rng, &rat(1, 10), &rat(45, 100)).expect("range"));
        }
        let n_large = 4 + rng.below(5) as usize;
        for _ in 0..n_large {
            sizes.push(draw_grid(&mut rng, &rat(51, 100), &rat(9, 10)).expect("range"));
        }
        let inst = Instance::new(sizes).expect("sizes in (0, 1]");
        assert!(64 * n_medium <= inst.n(), "premise |M| <= n/64 must hold by construction");

        let (_, report) = ptas_solve(&inst, &PtasParams::relaxed(eps.clone()))
            .expect("relaxed pipeline completes");
        let stage = report
            .stages
            .iter()
            .find(|s| s.name == "insert-medium")
            .expect("the pipeline always reports the medium stage");
        if stage.cost_before == 0 {
            fails.push(format!("medium seed {seed}: empty base packing before the medium stage"));
            continue;
        }
        match &stage.inflation {
            Some(f) if *f > rat(11, 4) => fails.push(format!(
                "medium seed {seed}: insertion inflated cost {} -> {} (factor {}), above 11/4",
                stage.cost_before,
                stage.cost_after,
                format_rational(f)
            )),
            Some(_) => {}
            None => fails.push(format!("medium seed {seed}: missing inflation on a nonzero stage")),
        }
    }

    // End to end on tiny all-large instances: within (1 + 90*eps) = 47/2 of
    // the optimum, and geometrically sound.
    let limits = SearchLimits::default();
    for seed in 0..100u64 {
        let mut rng = SplitMix64::new(0x0A11_0000 + seed);
        let n = 1 + rng.below(8) as usize;
        let sizes: Vec<Rational> = (0..n)
            .map(|_| draw_grid(&mut rng, &rat(1, 2), &rat(99, 100)).expect("range"))
            .collect();
        let inst = Instance::new(sizes).expect("sizes in (0, 1]");
        let (p, _) = ptas_solve(&inst, &PtasParams::relaxed(eps.clone()))
            .expect("relaxed pipeline completes");
        let violations = p.validate(&inst);
        if !violations.is_empty() {
            fails.push(format!(
                "end-to-end seed {seed}: pipeline output is invalid: {}",
                violations[0]
            ));
            continue;
        }
        let (_, opt) = exact_min_sum(&inst, &limits).expect("n is at most 8");
        if 2 * p.cost() > 47 * opt {
            fails.push(format!(
                "end-to-end seed {seed}: cost {} vs optimum {opt} breaks the 47/2 factor \
                 on sizes {}",
                p.cost(),
                sizes_str(&inst)
            ));
        }
    }

    // Threshold-free mode refuses desk-scale inputs instead of degenerating.
    let small = mixed_instance(10, 77);
    match ptas_solve(&small, &PtasParams::strict(eps.clone())) {
        Err(Error::Precondition(msg)) if msg.contains("64") => {}
        Err(e) => fails.push(format!(
            "strict mode on n = 10 refused with the wrong error: {e}"
        )),
        Ok(_) => fails.push(
            "strict mode on n = 10 was expected to refuse (it assumes n >= 64 at eps = 1/4)"
                .to_string(),
        ),
    }

    conclude(
        "criterion 6 (pipeline stage factors, end-to-end bound, strict-mode guard)",
        fails,
        &[],
    );
}

// ---------------------------------------------------------------- criterion 7

/// Minimum cost by exhaustive enumeration: every assignment of the n items
/// to bin indices 1..n is evaluated, with no search-order shortcuts; only
/// single-bin feasibility is delegated to the geometric oracle (memoized by
/// size multiset, since the verdict depends on nothing else).
fn brute_force_min_sum(inst: &Instance, limits: &SearchLimits) -> u64 {
    let n = inst.n();
    let mut feas: HashMap<Vec<Rational>, bool> = HashMap::new();
    let mut best = u64::MAX;
    for code in 0..(n as u64).pow(n as u32) {
        let mut c = code;
        let mut bins: Vec<Vec<Rational>> = vec![Vec::new(); n];
        let mut cost = 0u64;
        for item in 0..n {
            let label = (c % n as u64) as usize;
            c /= n as u64;
            bins[label].push(inst.size(item).clone());
            cost += label as u64 + 1;
        }
        let ok = bins.iter().filter(|b| !b.is_empty()).all(|b| {
            let mut key = b.clone();
            key.sort();
            *feas.entry(key.clone()).or_insert_with(|| {
                fits_in_unit_bin(&key, limits).expect("within limits").feasible
            })
        });
        if ok && cost < best {
            best = cost;
        }
    }
    best
}

#[test]
fn criterion_7_oracle_self_consistency() {
    let start = Instant::now();
    let limits = SearchLimits::default();
    let mut fails = Vec::new();

    // Capacity of one bin around a 2/3 square: four 1/3 companions fit and,
    // per the stated capacity fact, five must not.
    for companions in 1..=4usize {
        let mut sizes = vec![rat(2, 3)];
        sizes.extend(std::iter::repeat(rat(1, 3)).take(companions));
        let cert = fits_in_unit_bin(&sizes, &limits).expect("within limits");
        if !cert.feasible {
            fails.push(format!(
                "a 2/3 square plus {companions} squares of 1/3 must fit one bin"
            ));
        }
    }
    let mut five = vec![rat(2, 3)];
    five.extend(std::iter::repeat(rat(1, 3)).take(5));
    let cert = fits_in_unit_bin(&five, &limits).expect("within limits");
    if cert.feasible {
        let layout = cert
            .placements
            .as_ref()
            .map(|pls| {
                pls.iter()
                    .map(|(s, x, y)| {
                        format!(
                            "{} at ({}, {})",
                            format_rational(s),
                            format_rational(x),
                            format_rational(y)
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default();
        fails.push(format!(
            "a 2/3 square plus five 1/3 squares was stated not to fit one bin, \
             but the oracle found a witness layout: {layout}"
        ));
    }

    // The pruned oracle agrees with plain exhaustive enumeration.
    for seed in 0..100u64 {
        let n = 1 + (seed % 5) as usize;
        let inst = mixed_instance(n, 300_000 + seed);
        let (_, opt) = exact_min_sum(&inst, &limits).expect("n is at most 5");
        let brute = brute_force_min_sum(&inst, &limits);
        if opt != brute {
            fails.push(format!(
                "seed {seed}: oracle optimum {opt} differs from exhaustive minimum {brute} \
                 on sizes {}",
                sizes_str(&inst)
            ));
        }
    }

    enforce_runtime(&mut fails, start, Duration::from_secs(300), "5 min");
    conclude(
        "criterion 7 (single-bin capacity facts; oracle equals exhaustive enumeration)",
        fails,
        &["the five companions do fit: three 1/3 squares stack along the right edge and two \
           finish the top row while the 2/3 square sits at the origin; total area \
           4/9 + 5/9 = 1 and touching boundaries are legal"],
    );
}

// ---------------------------------------------------------------- criterion 8

fn run_cli(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sqpack"))
        .args(args)
        .current_dir(dir)
        .env_remove("SQPACK_BENCH_TIMING")
        .env_remove("SQPACK_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Runs one subcommand twice and reports any divergence between the two
/// runs' stdout or produced files.
fn run_twice(
    dir: &Path,
    label: &str,
    args1: &[&str],
    args2: &[&str],
    outputs: &[(&str, &str)],
    fails: &mut Vec<String>,
) -> String {
    let (c1, out1, err1) = run_cli(args1, dir);
    let (c2, out2, _) = run_cli(args2, dir);
    if c1 != 0 || c2 != 0 {
        fails.push(format!("{label}: exit codes {c1}/{c2}, stderr: {err1}"));
        return out1;
    }
    // the runs write to different paths on purpose; mask the path mentions
    let mut n1 = out1.clone();
    let mut n2 = out2;
    for (a, b) in outputs {
        n1 = n1.replace(a, "<out>");
        n2 = n2.replace(b, "<out>");
    }
    if n1 != n2 {
        fails.push(format!("{label}: stdout differs between two identical runs"));
    }
    for (a, b) in outputs {
        let fa = std::fs::read(dir.join(a)).unwrap_or_default();
        let fb = std::fs::read(dir.join(b)).unwrap_or_default();
        if fa != fb {
            fails.push(format!("{label}: files {a} and {b} differ between two runs"));
        }
    }
    out1
}

#[test]
fn criterion_8_determinism_and_formats() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    std::fs::create_dir(dir.join("corpus")).expect("mkdir");
    let mut fails = Vec::new();

    // Generators: identical bytes across runs, and the written instance
    // round-trips through parse + serialize.
    let gens: &[(&str, &[&str])] = &[
        ("adv", &["gen", "--family", "adversarial", "--t", "3"]),
        ("mix", &["gen", "--family", "corner_mix", "--n", "12", "--seed", "7"]),
        (
            "uni",
            &["gen", "--family", "uniform", "--n", "24", "--lo", "1/50", "--hi", "1/2", "--seed", "4"],
        ),
        ("big", &["gen", "--family", "all_large", "--n", "9", "--seed", "2"]),
        (
            "tiny",
            &["gen", "--family", "uniform", "--n", "7", "--lo", "1/10", "--hi", "9/10", "--seed", "11"],
        ),
    ];
    for (stem, base) in gens {
        let first = format!("corpus/{stem}.smsbpp");
        let second = format!("{stem}.rerun.smsbpp");
        let mut args1 = base.to_vec();
        args1.extend(["-o", &first]);
        let mut args2 = base.to_vec();
        args2.extend(["-o", &second]);
        run_twice(
            dir,
            &format!("gen {stem}"),
            &args1,
            &args2,
            &[(first.as_str(), second.as_str())],
            &mut fails,
        );

        let text = std::fs::read_to_string(dir.join(&first)).expect("gen wrote the file");
        match parse_instance(&text) {
            Ok(inst) => {
                if serialize_instance(&inst) != text {
                    fails.push(format!("gen {stem}: instance file does not round-trip"));
                }
            }
            Err(e) => fails.push(format!("gen {stem}: written file does not parse: {e}")),
        }
    }

    // Solvers: identical stdout, identical packing and report files, every
    // packing re-validates, every packing file round-trips.
    let solves: &[(&str, &str)] = &[
        ("adv", "nfdh"),
        ("adv", "ffdh"),
        ("adv", "approx5322"),
        ("adv", "ptas"),
        ("mix", "ffds"),
        ("mix", "approx5322"),
        ("mix", "ptas"),
        ("uni", "nfdh"),
        ("uni", "approx5322"),
        ("uni", "ptas"),
        ("big", "ffds"),
        ("big", "ptas"),
        ("tiny", "exact"),
    ];
    for (stem, algo) in solves {
        let instance_file = format!("corpus/{stem}.smsbpp");
        let pack1 = format!("{stem}.{algo}.pack");
        let pack2 = format!("{stem}.{algo}.rerun.pack");
        let rep1 = format!("{stem}.{algo}.csv");
        let rep2 = format!("{stem}.{algo}.rerun.csv");
        run_twice(
            dir,
            &format!("solve {algo} on {stem}"),
            &["solve", "--algo", algo, &instance_file, "-o", &pack1, "--report", &rep1],
            &["solve", "--algo", algo, &instance_file, "-o", &pack2, "--report", &rep2],
            &[(pack1.as_str(), pack2.as_str()), (rep1.as_str(), rep2.as_str())],
            &mut fails,
        );

        let (code, out, err) = run_cli(&["validate", &pack1, "--instance", &instance_file], dir);
        if code != 0 || !out.starts_with("ok:") {
            fails.push(format!(
                "solve {algo} on {stem}: emitted packing fails validation \
                 (exit {code}, stdout {out:?}, stderr {err:?})"
            ));
        }

        let inst_text = std::fs::read_to_string(dir.join(&instance_file)).expect("exists");
        let inst = parse_instance(&inst_text).expect("parsed above");
        let pack_text = std::fs::read_to_string(dir.join(&pack1)).expect("solve wrote the file");
        match parse_packing(&pack_text, &inst) {
            Ok(p) => {
                if serialize_packing(&p) != pack_text {
                    fails.push(format!("solve {algo} on {stem}: packing file does not round-trip"));
                }
            }
            Err(e) => fails.push(format!("solve {algo} on {stem}: written packing does not parse: {e}")),
        }
    }

    // Relaxed shelf solve prints deterministically even with no output file.
    run_twice(
        dir,
        "solve nfih (relaxed, stdout only)",
        &["solve", "--algo", "nfih", "corpus/uni.smsbpp"],
        &["solve", "--algo", "nfih", "corpus/uni.smsbpp"],
        &[],
        &mut fails,
    );

    // Bounds report.
    run_twice(
        dir,
        "bounds",
        &["bounds", "corpus/adv.smsbpp"],
        &["bounds", "corpus/adv.smsbpp"],
        &[],
        &mut fails,
    );

    // Rendering.
    run_twice(
        dir,
        "render",
        &["render", "adv.nfdh.pack", "--instance", "corpus/adv.smsbpp", "-o", "adv.svg"],
        &["render", "adv.nfdh.pack", "--instance", "corpus/adv.smsbpp", "-o", "adv.rerun.svg"],
        &[("adv.svg", "adv.rerun.svg")],
        &mut fails,
    );
    let svg = std::fs::read_to_string(dir.join("adv.svg")).unwrap_or_default();
    if !svg.contains("<svg") {
        fails.push("render: output is not an svg document".to_string());
    }

    // Benchmark over the whole corpus directory.
    run_twice(
        dir,
        "bench",
        &["bench", "--corpus", "corpus", "--algos", "nfdh,approx5322,ptas", "-o", "bench.csv"],
        &["bench", "--corpus", "corpus", "--algos", "nfdh,approx5322,ptas", "-o", "bench.rerun.csv"],
        &[("bench.csv", "bench.rerun.csv")],
        &mut fails,
    );

    conclude(
        "criterion 8 (byte-identical reruns for every subcommand; files round-trip and re-validate)",
        fails,
        &[],
    );
}
