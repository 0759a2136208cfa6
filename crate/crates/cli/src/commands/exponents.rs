use std::fmt::Write as _;

use anyhow::Result;
use blockfade::exponents::{
    optimal_exponent, random_coding_lower_bound, singleton_block_diversity, theorem_exponent, upper_bound,
    ExponentQuery, RateRatio, TheoremExponent,
};

use super::{num, Output, Table, SEED_ROW};
use crate::settings::Settings;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("exponents", "blocks", "8", "number of fading blocks B"),
        ("exponents", "dim", "1", "rotation dimension N (divides B)"),
        ("exponents", "m", "1", "Nakagami parameter"),
        ("exponents", "bits_per_symbol", "2", "M = log2 of the constellation size"),
        ("exponents", "rate_ratio", "", "single R/M as p/q or decimal; empty sweeps [0, 1]"),
        ("exponents", "lambda", "inf", "code length growth L / log SNR, or inf"),
        ("exponents", "steps", "0", "sweep grid R/M = i/steps; 0 picks 4B"),
    ])
}

pub fn run(s: &Settings) -> Result<Output> {
    let blocks: usize = s.get("exponents", "blocks")?;
    let dim: usize = s.get("exponents", "dim")?;
    let m: f64 = s.get("exponents", "m")?;
    let bits: usize = s.get("exponents", "bits_per_symbol")?;
    let lambda: f64 = s.get("exponents", "lambda")?;
    let ratios: Vec<RateRatio> = match s.str("exponents", "rate_ratio") {
        "" => {
            let steps: u64 = match s.get("exponents", "steps")? {
                0 => 4 * blocks as u64,
                n => n,
            };
            (0..=steps).map(|i| RateRatio::new(i, steps)).collect::<blockfade::Result<_>>()?
        }
        one => vec![one.parse()?],
    };

    let mut table = Table::new(&[
        "r_over_m",
        "r_over_m_value",
        "rate",
        "x",
        "singleton",
        "upper_bound",
        "theorem_upper",
        "theorem_lower",
        "boundary",
        "lower_bound",
        "optimal",
    ]);
    let mut summary = String::new();
    let _ = writeln!(summary, "B={blocks} N={dim} m={m} M={bits} lambda={lambda}");
    let _ = writeln!(summary, "{:>9} {:>7} {:>9} {:>9} {:>9} {:>9}", "R/M", "x", "singleton", "upper", "theorem", "lower");
    let optimal = optimal_exponent(m, blocks);
    for ratio in ratios {
        let mut q = ExponentQuery::new(blocks, dim, m, bits, ratio)?;
        if lambda.is_finite() {
            q = q.lambda(lambda)?;
        }
        let theorem = theorem_exponent(&q);
        let (upper, lower, boundary) = match theorem {
            TheoremExponent::Value(v) => (v, v, false),
            TheoremExponent::Boundary { upper, lower } => (upper, lower, true),
        };
        let lb = random_coding_lower_bound(&q);
        table.push(vec![
            ratio.to_string(),
            num(ratio.value()),
            num(q.rate()),
            num(q.x()),
            singleton_block_diversity(&q).to_string(),
            num(upper_bound(&q)),
            num(upper),
            num(lower),
            boundary.to_string(),
            num(lb),
            num(optimal),
        ]);
        let shown = if boundary { format!("{upper}|{lower}") } else { format!("{upper}") };
        let _ = writeln!(
            summary,
            "{:>9} {:>7.3} {:>9} {:>9} {:>9} {:>9.4}",
            ratio.to_string(),
            q.x(),
            singleton_block_diversity(&q),
            upper_bound(&q),
            shown,
            lb
        );
    }
    Ok(Output { table, summary, status: 0 })
}
