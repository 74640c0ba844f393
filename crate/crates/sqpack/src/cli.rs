//! Command-line front end: generate instances, run solvers, validate and
//! render packings, print bounds, and benchmark corpora.
//!
//! Exit codes: 0 success, 1 domain error (infeasible input, budget, failed
//! validation), 2 usage error. All outputs are deterministic given the same
//! arguments and files; bench timing is opt-in via SQPACK_BENCH_TIMING=1
//! precisely because wall-clock columns would break that guarantee.

use crate::approx::solve_53_22;
use crate::bounds::{build_groups, kb_stats, lb1, lb2};
use crate::exact::{exact_min_sum, SearchLimits};
use crate::ffds::ffds_minsum;
use crate::instance::{
    generate, parse_instance, parse_packing, render_svg, serialize_instance, serialize_packing,
    GeneratorSpec,
};
use crate::model::{format_rational, parse_rational, rat, Error, Instance, Packing, Rational};
use crate::ptas::{ptas_solve, PtasParams, StageReport};
use crate::shelves::{feasibilize_with_threshold, ffdh, nfdh, nfih};
use clap::{Arg, ArgAction, ArgMatches, Command};
use rayon::prelude::*;
use std::path::PathBuf;

pub fn run(args: Vec<String>) -> i32 {
    let matches = match command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match matches.subcommand() {
        Some(("gen", m)) => cmd_gen(m),
        Some(("solve", m)) => cmd_solve(m),
        Some(("validate", m)) => cmd_validate(m),
        Some(("bounds", m)) => cmd_bounds(m),
        Some(("render", m)) => cmd_render(m),
        Some(("bench", m)) => cmd_bench(m),
        _ => unreachable!("a subcommand is required"),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn command() -> Command {
    Command::new("sqpack")
        .about("min-sum packing of squares into indexed unit bins")
        .no_binary_name(true)
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("gen")
                .about("generate an instance file")
                .arg(
                    Arg::new("family")
                        .long("family")
                        .required(true)
                        .value_parser(["adversarial", "uniform", "all_large", "corner_mix"]),
                )
                .arg(Arg::new("t").long("t").value_parser(clap::value_parser!(u32)))
                .arg(Arg::new("n").long("n").value_parser(clap::value_parser!(usize)))
                .arg(Arg::new("lo").long("lo"))
                .arg(Arg::new("hi").long("hi"))
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_parser(clap::value_parser!(u64))
                        .default_value("0"),
                )
                .arg(Arg::new("out").short('o').required(true)),
        )
        .subcommand(
            Command::new("solve")
                .about("run a solver on an instance file")
                .arg(Arg::new("algo").long("algo").required(true))
                .arg(Arg::new("file").required(true))
                .arg(Arg::new("out").short('o'))
                .arg(Arg::new("report").long("report"))
                .arg(Arg::new("feasibilize").long("feasibilize").action(ArgAction::SetTrue))
                .arg(Arg::new("eps").long("eps").default_value("1/4"))
                .arg(
                    Arg::new("mode")
                        .long("mode")
                        .value_parser(["strict", "relaxed"])
                        .default_value("relaxed"),
                )
                .arg(Arg::new("gamma").long("gamma"))
                .arg(Arg::new("small-threshold").long("small-threshold"))
                .arg(Arg::new("large-threshold").long("large-threshold"))
                .arg(Arg::new("max-items").long("max-items").value_parser(clap::value_parser!(usize)))
                .arg(Arg::new("budget").long("budget").value_parser(clap::value_parser!(u64))),
        )
        .subcommand(
            Command::new("validate")
                .about("check a packing file against its instance")
                .arg(Arg::new("packing").required(true))
                .arg(Arg::new("instance").long("instance").required(true)),
        )
        .subcommand(
            Command::new("bounds")
                .about("print lower bounds and grouping statistics")
                .arg(Arg::new("file").required(true)),
        )
        .subcommand(
            Command::new("render")
                .about("render a packing to SVG")
                .arg(Arg::new("packing").required(true))
                .arg(Arg::new("instance").long("instance").required(true))
                .arg(Arg::new("out").short('o').required(true)),
        )
        .subcommand(
            Command::new("bench")
                .about("run algorithms across a corpus directory, emitting CSV")
                .arg(Arg::new("corpus").long("corpus").required(true))
                .arg(Arg::new("algos").long("algos").required(true))
                .arg(Arg::new("out").short('o').required(true)),
        )
}

fn read_text(path: &str) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Unsupported(format!("cannot read {path}: {e}")))
}

fn write_text(path: &str, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::Unsupported(format!("cannot write {path}: {e}")))
}

fn opt_rational(m: &ArgMatches, name: &str) -> Result<Option<Rational>, Error> {
    match m.get_one::<String>(name) {
        Some(text) => Ok(Some(parse_rational(text)?)),
        None => Ok(None),
    }
}

fn cmd_gen(m: &ArgMatches) -> Result<i32, Error> {
    let family = m.get_one::<String>("family").expect("required").as_str();
    let seed = *m.get_one::<u64>("seed").expect("defaulted");
    let need_n = || -> Result<usize, Error> {
        m.get_one::<usize>("n")
            .copied()
            .ok_or_else(|| Error::Precondition(format!("--n is required for the {family} family")))
    };
    let spec = match family {
        "adversarial" => {
            let t = m.get_one::<u32>("t").copied().ok_or_else(|| {
                Error::Precondition("--t is required for the adversarial family".to_string())
            })?;
            GeneratorSpec::Adversarial { t }
        }
        "uniform" => GeneratorSpec::Uniform {
            n: need_n()?,
            lo: opt_rational(m, "lo")?.unwrap_or_else(|| rat(1, 100)),
            hi: opt_rational(m, "hi")?.unwrap_or_else(|| rat(1, 1)),
        },
        "all_large" => GeneratorSpec::AllLarge {
            n: need_n()?,
            lo: opt_rational(m, "lo")?.unwrap_or_else(|| rat(1, 2)),
        },
        "corner_mix" => GeneratorSpec::CornerMix { n: need_n()? },
        _ => unreachable!("family values are closed"),
    };
    let inst = generate(&spec, seed)?;
    let out = m.get_one::<String>("out").expect("required");
    write_text(out, &serialize_instance(&inst))?;
    println!("wrote {} items to {}", inst.n(), out);
    Ok(0)
}

struct SolveOutcome {
    cost: u64,
    bins: usize,
    /// absent only for the relaxed shelf packing, which has no legal file form
    packing: Option<Packing>,
    report: String,
}

fn search_limits(m: &ArgMatches) -> SearchLimits {
    let mut limits = SearchLimits::default();
    if let Some(&v) = m.get_one::<usize>("max-items") {
        limits.max_items = v;
    }
    if let Some(&v) = m.get_one::<u64>("budget") {
        limits.node_budget = v;
    }
    limits
}

fn ptas_params(m: &ArgMatches) -> Result<PtasParams, Error> {
    let eps = parse_rational(m.get_one::<String>("eps").expect("defaulted"))?;
    let mut params = match m.get_one::<String>("mode").expect("defaulted").as_str() {
        "strict" => PtasParams::strict(eps),
        _ => PtasParams::relaxed(eps),
    };
    if let Some(g) = opt_rational(m, "gamma")? {
        params.gamma = Some(g);
    }
    if let Some(s) = opt_rational(m, "small-threshold")? {
        params.small_threshold = Some(s);
    }
    if let Some(l) = opt_rational(m, "large-threshold")? {
        params.large_threshold = Some(l);
    }
    Ok(params)
}

fn plain_report(id: &str, algo: &str, cost: u64, bins: usize) -> String {
    format!("instance,algo,cost,bins\n{id},{algo},{cost},{bins}\n")
}

fn stage_report_csv(id: &str, stages: &StageReport) -> String {
    let mut out = String::from("instance,stage,cost_before,cost_after,inflation,bound_claimed\n");
    out.push_str(&stages.csv_rows(id));
    out
}

fn run_algo(algo: &str, id: &str, inst: &Instance, m: &ArgMatches) -> Result<SolveOutcome, Error> {
    let items = inst.items();
    let done = |p: Packing, report: String| SolveOutcome {
        cost: p.cost(),
        bins: p.num_bins(),
        packing: Some(p),
        report,
    };
    match algo {
        "nfdh" => {
            let p = nfdh(items);
            let report = plain_report(id, algo, p.cost(), p.num_bins());
            Ok(done(p, report))
        }
        "ffdh" => {
            let p = ffdh(items);
            let report = plain_report(id, algo, p.cost(), p.num_bins());
            Ok(done(p, report))
        }
        "ffds" => {
            let p = ffds_minsum(items)?;
            let report = plain_report(id, algo, p.cost(), p.num_bins());
            Ok(done(p, report))
        }
        "nfih" => {
            let cap = items
                .iter()
                .map(|it| it.size.clone())
                .max()
                .unwrap_or_else(|| rat(1, 1));
            let q = nfih(items, &cap)?;
            if m.get_flag("feasibilize") {
                let p = feasibilize_with_threshold(&q, &rat(1, 4), &cap)?;
                let report = plain_report(id, algo, p.cost(), p.num_bins());
                Ok(done(p, report))
            } else {
                Ok(SolveOutcome {
                    cost: q.cost(),
                    bins: q.num_bins(),
                    packing: None,
                    report: plain_report(id, algo, q.cost(), q.num_bins()),
                })
            }
        }
        "approx5322" => {
            let (p, rep) = solve_53_22(inst);
            let report = format!(
                "instance,algo,cost,bins,lb1,lb2,r,k,b,small_bins,upper_bound,ratio_vs_max_lb\n\
                 {},approx5322,{},{},{},{},{},{},{},{},{},{}\n",
                id,
                rep.cost,
                p.num_bins(),
                rep.lb1,
                rep.lb2,
                rep.r,
                rep.k,
                rep.b,
                rep.small_bins,
                rep.upper_bound_2r_plus_ffds,
                format_rational(&rep.ratio_vs_max_lb)
            );
            Ok(done(p, report))
        }
        "ptas" => {
            let params = ptas_params(m)?;
            let (p, stages) = ptas_solve(inst, &params)?;
            let report = stage_report_csv(id, &stages);
            Ok(done(p, report))
        }
        "exact" => {
            let (p, cost) = exact_min_sum(inst, &search_limits(m))?;
            debug_assert_eq!(cost, p.cost());
            let report = plain_report(id, algo, cost, p.num_bins());
            Ok(done(p, report))
        }
        other => Err(Error::Unsupported(format!(
            "unknown algorithm '{other}' (expected nfdh, ffdh, nfih, ffds, approx5322, ptas or exact)"
        ))),
    }
}

fn cmd_solve(m: &ArgMatches) -> Result<i32, Error> {
    let algo = m.get_one::<String>("algo").expect("required").as_str();
    let path = m.get_one::<String>("file").expect("required");
    let inst = parse_instance(&read_text(path)?)?;
    let outcome = run_algo(algo, path, &inst, m)?;
    println!("cost {}", outcome.cost);
    println!("bins {}", outcome.bins);
    if let Some(out) = m.get_one::<String>("out") {
        match &outcome.packing {
            Some(p) => write_text(out, &serialize_packing(p))?,
            None => {
                return Err(Error::Unsupported(
                    "a relaxed packing has no legal file form; pass --feasibilize".to_string(),
                ))
            }
        }
    }
    if let Some(report) = m.get_one::<String>("report") {
        write_text(report, &outcome.report)?;
    }
    Ok(0)
}

fn cmd_validate(m: &ArgMatches) -> Result<i32, Error> {
    let inst = parse_instance(&read_text(m.get_one::<String>("instance").expect("required"))?)?;
    let text = read_text(m.get_one::<String>("packing").expect("required"))?;
    // the parser validates as it loads; surface its findings one per line
    match parse_packing(&text, &inst) {
        Ok(p) => {
            println!("ok: {} items in {} bins, cost {}", p.item_count(), p.num_bins(), p.cost());
            Ok(0)
        }
        Err(Error::InvalidPacking(msgs)) => {
            for msg in msgs.split("; ") {
                println!("{msg}");
            }
            Ok(1)
        }
        Err(e) => Err(e),
    }
}

fn cmd_bounds(m: &ArgMatches) -> Result<i32, Error> {
    let inst = parse_instance(&read_text(m.get_one::<String>("file").expect("required"))?)?;
    let gp = build_groups(&inst);
    let (k, b) = kb_stats(&inst);
    println!("n {}", inst.n());
    println!("groups {}", gp.q());
    println!("r {}", gp.r);
    println!("k {k}");
    println!("b {b}");
    println!("lb1 {}", lb1(&gp));
    println!("lb2 {}", lb2(&gp, &inst));
    Ok(0)
}

fn cmd_render(m: &ArgMatches) -> Result<i32, Error> {
    let inst = parse_instance(&read_text(m.get_one::<String>("instance").expect("required"))?)?;
    let p = parse_packing(&read_text(m.get_one::<String>("packing").expect("required"))?, &inst)?;
    let out = m.get_one::<String>("out").expect("required");
    write_text(out, &render_svg(&p, &inst))?;
    println!("wrote {} bins to {}", p.num_bins(), out);
    Ok(0)
}

/// One bench CSV cell: the summary row for (instance, algo), plus stage
/// rows for the scheme pipeline. Timing stays out of the CSV unless
/// SQPACK_BENCH_TIMING=1 so that repeat runs are byte-identical.
fn bench_cell(
    id: &str,
    inst: &Instance,
    algo: &str,
    lbs: (u64, u64),
    timing: bool,
) -> Result<String, Error> {
    let started = std::time::Instant::now();
    let (cost, bins, extra_rows, ratio_fields) = match algo {
        "nfdh" => {
            let p = nfdh(inst.items());
            (p.cost(), p.num_bins(), String::new(), String::from(",,,"))
        }
        "ffdh" => {
            let p = ffdh(inst.items());
            (p.cost(), p.num_bins(), String::new(), String::from(",,,"))
        }
        "nfih" => {
            let cap = inst
                .items()
                .iter()
                .map(|it| it.size.clone())
                .max()
                .unwrap_or_else(|| rat(1, 1));
            let q = nfih(inst.items(), &cap)?;
            let p = feasibilize_with_threshold(&q, &rat(1, 4), &cap)?;
            (p.cost(), p.num_bins(), String::new(), String::from(",,,"))
        }
        "ffds" => {
            let p = ffds_minsum(inst.items())?;
            (p.cost(), p.num_bins(), String::new(), String::from(",,,"))
        }
        "approx5322" => {
            let (p, rep) = solve_53_22(inst);
            let fields = format!(
                "{},{},{},{}",
                rep.r,
                rep.k,
                rep.b,
                format_rational(&rep.ratio_vs_max_lb)
            );
            (rep.cost, p.num_bins(), String::new(), fields)
        }
        "ptas" => {
            let mut params = PtasParams::relaxed(rat(1, 4));
            params.gamma = Some(rat(1, 2));
            params.small_threshold = Some(rat(1, 32));
            params.large_threshold = Some(rat(1, 2));
            let (p, stages) = ptas_solve(inst, &params)?;
            let mut rows = String::new();
            for s in &stages.stages {
                let infl = s.inflation.as_ref().map(format_rational).unwrap_or_default();
                rows.push_str(&format!(
                    "{id},ptas,,,,,,,,,{},{},{},{},{}{}\n",
                    s.name,
                    s.cost_before,
                    s.cost_after,
                    infl,
                    format_rational(&s.bound_claimed),
                    if timing { "," } else { "" }
                ));
            }
            (p.cost(), p.num_bins(), rows, String::from(",,,"))
        }
        "exact" => {
            let (p, cost) = exact_min_sum(inst, &SearchLimits::default())?;
            (cost, p.num_bins(), String::new(), String::from(",,,"))
        }
        other => {
            return Err(Error::Unsupported(format!("unknown algorithm '{other}' in --algos")))
        }
    };
    let micros = if timing {
        format!(",{}", started.elapsed().as_micros())
    } else {
        String::new()
    };
    Ok(format!(
        "{id},{algo},{cost},{bins},{},{},{},,,,,{micros}\n{extra_rows}",
        lbs.0, lbs.1, ratio_fields
    ))
}

fn cmd_bench(m: &ArgMatches) -> Result<i32, Error> {
    let dir = m.get_one::<String>("corpus").expect("required");
    let algos: Vec<String> = m
        .get_one::<String>("algos")
        .expect("required")
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if algos.is_empty() {
        return Err(Error::Precondition("--algos names no algorithms".to_string()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Unsupported(format!("cannot read directory {dir}: {e}")))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |ext| ext == "smsbpp"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Precondition(format!("no .smsbpp files in {dir}")));
    }

    let timing = std::env::var("SQPACK_BENCH_TIMING").map_or(false, |v| v == "1");
    let mut cells: Vec<(String, Instance, (u64, u64), String)> = Vec::new();
    for path in &files {
        let text = read_text(&path.display().to_string())?;
        let inst = parse_instance(&text)?;
        let gp = build_groups(&inst);
        let lbs = (lb1(&gp), lb2(&gp, &inst));
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        for algo in &algos {
            cells.push((id.clone(), inst.clone(), lbs, algo.clone()));
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SQPACK_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|_| Error::Precondition(format!("SQPACK_THREADS must be a number, got '{v}'")))?;
        pool = pool.num_threads(threads);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot build thread pool: {e}")))?;
    let rows: Result<Vec<String>, Error> = pool.install(|| {
        cells
            .par_iter()
            .map(|(id, inst, lbs, algo)| bench_cell(id, inst, algo, *lbs, timing))
            .collect()
    });

    let mut csv = String::from(
        "instance,algo,cost,bins,lb1,lb2,r,k,b,ratio_vs_max_lb,stage,cost_before,cost_after,inflation,bound_claimed",
    );
    if timing {
        csv.push_str(",micros");
    }
    csv.push('\n');
    for row in rows? {
        csv.push_str(&row);
    }
    let out = m.get_one::<String>("out").expect("required");
    write_text(out, &csv)?;
    println!("wrote {} cells to {}", cells.len(), out);
    Ok(0)
}
