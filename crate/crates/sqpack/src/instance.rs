//! Instance and packing file formats, deterministic generators and SVG
//! rendering.
//!
//! File formats (newline "\n", ASCII):
//!
//! * instance (`.smsbpp`): first line `n`, then `n` lines with one size
//!   each as `p/q` (decimals are accepted on input and converted exactly;
//!   output is always `p/q`);
//! * packing (`.pack`): first line `m` (number of bins), then one line per
//!   placement `item_id bin x_num/x_den y_num/y_den`, sorted by item id.

use crate::model::{
    format_rational, parse_rational, rat, Error, Instance, Packing, Placement, Rational,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// SplitMix64 generator. Same seed, same stream, on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..n` without modulo bias (rejection sampling).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // 2^64 mod n, computed without overflowing u64
        let m = (u64::MAX % n).wrapping_add(1) % n;
        loop {
            let x = self.next_u64();
            if m == 0 || x <= u64::MAX - m {
                return x % n;
            }
        }
    }
}

/// Which instance family to generate. Every family is a pure function of
/// its parameters plus the seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `t*t` items of size `1/t` followed by `t` items of size `1 - 1/t`.
    Adversarial { t: u32 },
    /// `n` sizes drawn uniformly from the 10^-6 grid inside `(lo, hi]`.
    Uniform { n: usize, lo: Rational, hi: Rational },
    /// `n` sizes drawn from `(lo, 1]` with `lo >= 1/2`: no two share a bin.
    AllLarge { n: usize, lo: Rational },
    /// `n` sizes mixing bins-with-one-big and companion squares: with
    /// probability 1/4 a size in `(1/2, 5/8]`, otherwise in `(1/3, 1/2]`.
    CornerMix { n: usize },
}

const GRID: u64 = 1_000_000;

/// One uniform draw from the 10^-6 grid intersected with `(lo, hi]`.
pub fn draw_grid(rng: &mut SplitMix64, lo: &Rational, hi: &Rational) -> Result<Rational, Error> {
    let grid = BigInt::from(GRID);
    let lower = (lo * Rational::from_integer(grid.clone())).floor().to_integer() + 1;
    let upper = (hi * Rational::from_integer(grid.clone())).floor().to_integer();
    if upper < lower {
        return Err(Error::Precondition(format!(
            "interval ({}, {}] contains no multiple of 1/{}",
            format_rational(lo),
            format_rational(hi),
            GRID
        )));
    }
    let span = (&upper - &lower + 1u32).to_u64().ok_or_else(|| {
        Error::Precondition("size interval too wide".to_string())
    })?;
    let num = lower + rng.below(span);
    Ok(Rational::new(num, grid))
}

/// Adversarial family: `t*t` squares of side `1/t` listed first, then `t`
/// squares of side `1 - 1/t`. Requires `t >= 3`.
pub fn gen_adversarial(t: u32) -> Result<Instance, Error> {
    if t < 3 {
        return Err(Error::Precondition(format!(
            "adversarial family needs t >= 3, got {t}"
        )));
    }
    let small = rat(1, t as i64);
    let large = Rational::one() - &small;
    let mut sizes = Vec::with_capacity((t * t + t) as usize);
    for _ in 0..t * t {
        sizes.push(small.clone());
    }
    for _ in 0..t {
        sizes.push(large.clone());
    }
    Instance::new(sizes)
}

/// Generates an instance from a spec and a seed.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Instance, Error> {
    let mut rng = SplitMix64::new(seed);
    match spec {
        GeneratorSpec::Adversarial { t } => gen_adversarial(*t),
        GeneratorSpec::Uniform { n, lo, hi } => {
            if *lo < Rational::zero() || *hi > Rational::one() || lo >= hi {
                return Err(Error::Precondition(format!(
                    "uniform bounds need 0 <= lo < hi <= 1, got lo={} hi={}",
                    format_rational(lo),
                    format_rational(hi)
                )));
            }
            let sizes = (0..*n)
                .map(|_| draw_grid(&mut rng, lo, hi))
                .collect::<Result<Vec<_>, _>>()?;
            Instance::new(sizes)
        }
        GeneratorSpec::AllLarge { n, lo } => {
            if *lo < rat(1, 2) || *lo >= Rational::one() {
                return Err(Error::Precondition(format!(
                    "all_large needs 1/2 <= lo < 1, got lo={}",
                    format_rational(lo)
                )));
            }
            let one = Rational::one();
            let sizes = (0..*n)
                .map(|_| draw_grid(&mut rng, lo, &one))
                .collect::<Result<Vec<_>, _>>()?;
            Instance::new(sizes)
        }
        GeneratorSpec::CornerMix { n } => {
            let sizes = (0..*n)
                .map(|_| {
                    if rng.below(4) == 0 {
                        draw_grid(&mut rng, &rat(1, 2), &rat(5, 8))
                    } else {
                        draw_grid(&mut rng, &rat(1, 3), &rat(1, 2))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Instance::new(sizes)
        }
    }
}

fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

/// Parses the instance format described in the module docs.
pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty file".to_string() });
    }
    let (hline, htext) = lines[0];
    let n: usize = htext.parse().map_err(|_| Error::Parse {
        line: hline,
        msg: format!("expected item count, got '{htext}'"),
    })?;
    let body = &lines[1..];
    if body.len() != n {
        return Err(Error::Parse {
            line: lines.last().map(|&(l, _)| l).unwrap_or(1),
            msg: format!("expected {n} size lines, found {}", body.len()),
        });
    }
    let mut sizes = Vec::with_capacity(n);
    for &(lineno, l) in body {
        let r = parse_rational(l).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        sizes.push(r);
    }
    Instance::new(sizes)
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&inst.n().to_string());
    out.push('\n');
    for it in inst.items() {
        out.push_str(&format_rational(&it.size));
        out.push('\n');
    }
    out
}

/// Serializes a packing. The header is the number of bins; placements are
/// emitted in item-id order.
pub fn serialize_packing(p: &Packing) -> String {
    let mut out = String::new();
    out.push_str(&p.num_bins().to_string());
    out.push('\n');
    for pl in p.placements() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            pl.item,
            pl.bin,
            format_rational(&pl.x),
            format_rational(&pl.y)
        ));
    }
    out
}

/// Parses a packing file and fully validates it against the instance.
/// Any violation (overlap, missing item, gap in bin indices, ...) is an
/// error listing what went wrong.
pub fn parse_packing(text: &str, inst: &Instance) -> Result<Packing, Error> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty file".to_string() });
    }
    let (hline, htext) = lines[0];
    let m: usize = htext.parse().map_err(|_| Error::Parse {
        line: hline,
        msg: format!("expected bin count, got '{htext}'"),
    })?;
    let mut placements = Vec::with_capacity(lines.len() - 1);
    for &(lineno, l) in &lines[1..] {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 'item bin x y', got '{l}'"),
            });
        }
        let item: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad item id '{}'", fields[0]),
        })?;
        let bin: usize = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad bin index '{}'", fields[1]),
        })?;
        let x = parse_rational(fields[2]).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let y = parse_rational(fields[3]).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        placements.push(Placement { item, bin, x, y });
    }
    let packing = Packing::new(placements)?;
    let violations = packing.validate(inst);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidPacking(msgs.join("; ")));
    }
    if packing.num_bins() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header says {m} bins but placements use {}", packing.num_bins()),
        });
    }
    Ok(packing)
}

const SVG_BIN: i64 = 1000;
const SVG_GAP: i64 = 40;
const SVG_MARGIN: i64 = 20;
const SVG_LABEL: i64 = 60;

/// Formats `r` as a decimal with at most 4 places, rounding half up.
/// Used only for SVG output; all geometry stays rational.
fn dec(r: &Rational) -> String {
    let scale = BigInt::from(10_000);
    let scaled = r * Rational::from_integer(scale.clone());
    let v = (scaled + rat(1, 2)).floor().to_integer();
    let neg = v.is_negative();
    let v = v.abs();
    let int = &v / &scale;
    let frac = &v % &scale;
    let mut s = if frac.is_zero() {
        int.to_string()
    } else {
        let f = format!("{:04}", frac);
        format!("{}.{}", int, f.trim_end_matches('0'))
    };
    if neg && s != "0" {
        s.insert(0, '-');
    }
    s
}

/// Renders a packing as a standalone SVG: one 1000x1000-unit outlined
/// square per bin, bins left to right with index labels, items as filled
/// rectangles. The y axis is flipped so the packing origin is bottom-left.
pub fn render_svg(p: &Packing, inst: &Instance) -> String {
    let m = p.num_bins() as i64;
    let width = if m == 0 {
        2 * SVG_MARGIN + SVG_BIN
    } else {
        2 * SVG_MARGIN + m * SVG_BIN + (m - 1) * SVG_GAP
    };
    let height = 2 * SVG_MARGIN + SVG_BIN + SVG_LABEL;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = width,
        h = height
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let scale = Rational::from_integer(BigInt::from(SVG_BIN));
    for bin in 1..=p.num_bins() {
        let ox = SVG_MARGIN + (bin as i64 - 1) * (SVG_BIN + SVG_GAP);
        out.push_str(&format!(
            "<g><rect x=\"{ox}\" y=\"{oy}\" width=\"{side}\" height=\"{side}\" fill=\"none\" stroke=\"black\" stroke-width=\"3\"/>\n",
            ox = ox,
            oy = SVG_MARGIN,
            side = SVG_BIN
        ));
        for pl in p.placements().iter().filter(|pl| pl.bin == bin) {
            let size = inst.size(pl.item);
            let w = dec(&(size * &scale));
            let x = Rational::from_integer(BigInt::from(ox)) + &pl.x * &scale;
            // flip y: svg grows downward
            let y = Rational::from_integer(BigInt::from(SVG_MARGIN + SVG_BIN))
                - (&pl.y + size) * &scale;
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{w}\" fill=\"#9ecae1\" stroke=\"#30506e\" stroke-width=\"2\"><title>item {} ({})</title></rect>\n",
                dec(&x),
                dec(&y),
                pl.item,
                format_rational(size),
            ));
        }
        out.push_str(&format!(
            "<text x=\"{cx}\" y=\"{ty}\" font-family=\"monospace\" font-size=\"36\" text-anchor=\"middle\">bin {bin}</text></g>\n",
            cx = ox + SVG_BIN / 2,
            ty = SVG_MARGIN + SVG_BIN + 45,
        ));
    }
    out.push_str("</svg>\n");
    out
}
