use infocausal_core::geometry::{classical_membership, GeometryError, DEFAULT_VERTEX_CAP};
use infocausal_core::infotheory::{ic_sum, tsirelson_threshold};
use infocausal_core::protocols::{
    ot_success_probability, run_ot, run_rac, run_rac_with_transcript, trial_rng, ProtocolError,
};
use infocausal_core::{
    ExactBox, ExactCertificate, ExactRacConfig, ExactRacResult, MembershipCertificate, Rational,
    Scalar,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{BoxArgs, Command, Format, OtArgs, RacArgs, SweepArgs, ThresholdArgs};
use crate::boxspec::{parse_rational, parse_token, parse_words, read_box_list};
use crate::output::{csv_bytes, float_cell, json_bytes, write_atomic, CliError};

/// Data produced by a command, and the exit code to report after writing it.
pub struct Outcome {
    pub data: Vec<u8>,
    pub exit: u8,
}

impl Outcome {
    fn ok(data: Vec<u8>) -> Self {
        Self { data, exit: 0 }
    }
}

pub fn run(command: &Command, format: Format, seed: u64) -> Result<Outcome, CliError> {
    match command {
        Command::Box(a) => cmd_box(a, format),
        Command::Membership(a) => cmd_membership(a, format),
        Command::Ot(a) => cmd_ot(a, format, seed),
        Command::Rac(a) => cmd_rac(a, format, seed),
        Command::Sweep(a) => cmd_sweep(a, format),
        Command::Threshold(a) => cmd_threshold(a, format),
    }
}

fn protocol_error(e: ProtocolError) -> CliError {
    CliError::Protocol(e.to_string())
}

fn table_rows(b: &ExactBox) -> Vec<Vec<String>> {
    let s = b.scenario();
    b.table()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let e = s.entry(i);
            vec![
                e.x.to_string(),
                e.y.to_string(),
                e.a.to_string(),
                e.b.to_string(),
                p.to_text(),
            ]
        })
        .collect()
}

fn cmd_box(args: &BoxArgs, format: Format) -> Result<Outcome, CliError> {
    let b = parse_words(&args.spec)?;
    let report = b.validate();
    let valid = report.all_pass();
    let data = match format {
        Format::Json => {
            let chsh = match b.classify_chsh() {
                Ok(c) if valid => json!({
                    "value": c.value.to_text(),
                    "bias": c.bias().to_text(),
                    "tier": c.tier,
                }),
                _ => serde_json::Value::Null,
            };
            json_bytes(&json!({ "box": b, "validation": report, "chsh": chsh }))
        }
        Format::Csv => csv_bytes(&["x", "y", "a", "b", "p"], &table_rows(&b)),
    };
    Ok(Outcome {
        data,
        exit: if valid { 0 } else { 2 },
    })
}

fn cmd_membership(args: &BoxArgs, format: Format) -> Result<Outcome, CliError> {
    let b = parse_words(&args.spec)?;
    let cert: ExactCertificate = classical_membership(&b, DEFAULT_VERTEX_CAP).map_err(|e| match e {
        GeometryError::InvalidBox(reason) => CliError::InvalidBox(reason),
        other => CliError::Protocol(other.to_string()),
    })?;
    let data = match format {
        Format::Json => json_bytes(&cert),
        Format::Csv => {
            let rows = match &cert {
                MembershipCertificate::Feasible { weights } => weights
                    .iter()
                    .map(|(i, w)| vec!["feasible".into(), i.to_string(), w.to_text()])
                    .collect(),
                MembershipCertificate::Infeasible { witness } => witness
                    .iter()
                    .enumerate()
                    .map(|(i, c)| vec!["infeasible".into(), i.to_string(), c.to_text()])
                    .collect::<Vec<_>>(),
            };
            csv_bytes(&["status", "index", "value"], &rows)
        }
    };
    Ok(Outcome::ok(data))
}

fn cmd_ot(args: &OtArgs, format: Format, seed: u64) -> Result<Outcome, CliError> {
    let cases: Vec<(u8, u8, u8)> = match (args.x0, args.x1, args.k) {
        (None, None, None) => (0..8u8).map(|c| (c >> 2 & 1, c >> 1 & 1, c & 1)).collect(),
        (Some(x0), Some(x1), Some(k)) => vec![(x0, x1, k)],
        _ => return Err(CliError::usage("give all of --x0, --x1 and -k, or none of them")),
    };
    let pair = parse_token(&args.box_token)?;
    let trials = args.trials;
    let mut rows = Vec::with_capacity(cases.len());
    for &(x0, x1, k) in &cases {
        let case = usize::from(x0 << 2 | x1 << 1 | k);
        let target = if k == 0 { x0 } else { x1 };
        let exact = ot_success_probability(x0, x1, k, &pair).map_err(protocol_error)?;
        let correct = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, trials, case, t);
                run_ot(x0, x1, k, &pair, &mut rng).map(|c| u64::from(c == target))
            })
            .sum::<Result<u64, _>>()
            .map_err(protocol_error)?;
        rows.push((x0, x1, k, target, exact, correct));
    }
    let data = match format {
        Format::Json => {
            let cases: Vec<_> = rows
                .iter()
                .map(|(x0, x1, k, target, exact, correct)| {
                    json!({
                        "x0": x0, "x1": x1, "k": k, "target": target,
                        "exact": exact.to_text(), "trials": trials, "correct": correct,
                    })
                })
                .collect();
            json_bytes(&json!({ "seed": seed, "trials": trials, "cases": cases }))
        }
        Format::Csv => csv_bytes(
            &["x0", "x1", "k", "target", "exact", "trials", "correct"],
            &rows
                .iter()
                .map(|(x0, x1, k, target, exact, correct)| {
                    vec![
                        x0.to_string(),
                        x1.to_string(),
                        k.to_string(),
                        target.to_string(),
                        exact.to_text(),
                        trials.to_string(),
                        correct.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome::ok(data))
}

fn rac_config(args: &RacArgs, seed: u64) -> Result<ExactRacConfig, CliError> {
    if let Some(path) = &args.pairs {
        let pairs = read_box_list(path)?;
        return Ok(ExactRacConfig::per_pair(args.depth, pairs, args.trials, seed));
    }
    let pair = match (&args.bias, &args.box_token) {
        (Some(e), _) => ExactBox::isotropic(parse_rational(e)?)
            .map_err(|e| CliError::InvalidBox(e.to_string()))?,
        (None, Some(token)) => parse_token(token)?,
        (None, None) => return Err(CliError::usage("need -E, --box or --pairs")),
    };
    Ok(ExactRacConfig::uniform(args.depth, pair, args.trials, seed))
}

fn rac_csv(result: &ExactRacResult) -> Vec<u8> {
    let rows: Vec<Vec<String>> = result
        .per_bit
        .iter()
        .map(|b| {
            vec![
                result.n.to_string(),
                b.k.to_string(),
                b.exact.as_ref().map(Scalar::to_text).unwrap_or_default(),
                b.exact_bias.as_ref().map(Scalar::to_text).unwrap_or_default(),
                b.empirical.map(|t| t.successes.to_string()).unwrap_or_default(),
                b.empirical.map(|t| t.trials.to_string()).unwrap_or_default(),
                float_cell(b.empirical.map(|t| t.std_err())),
                float_cell(result.ic_sum),
                result.violated.map(|v| v.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "n", "k", "exact", "exactBias", "successes", "trials", "stdErr", "icSum", "violated",
        ],
        &rows,
    )
}

fn cmd_rac(args: &RacArgs, format: Format, seed: u64) -> Result<Outcome, CliError> {
    let cfg = rac_config(args, seed)?;
    let result = match &args.transcript {
        Some(path) => {
            let (result, records) = run_rac_with_transcript(&cfg).map_err(protocol_error)?;
            let mut lines = Vec::new();
            for r in &records {
                serde_json::to_writer(&mut lines, r).expect("record serializes");
                lines.push(b'\n');
            }
            write_atomic(path, &lines)?;
            result
        }
        None => run_rac(&cfg).map_err(protocol_error)?,
    };
    let data = match format {
        Format::Json => json_bytes(&result),
        Format::Csv => rac_csv(&result),
    };
    Ok(Outcome::ok(data))
}

fn split_range(text: &str) -> (&str, Option<&str>) {
    match text.split_once("..") {
        Some((lo, hi)) => (lo.trim(), Some(hi.trim_start_matches('=').trim())),
        None => (text.trim(), None),
    }
}

fn parse_depths(text: &str) -> Result<Vec<u32>, CliError> {
    let parse = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| CliError::usage(format!("bad depth {s:?}")))
    };
    let (lo, hi) = split_range(text);
    let lo = parse(lo)?;
    let hi = hi.map(parse).transpose()?.unwrap_or(lo);
    if lo == 0 {
        return Err(CliError::usage("depths start at 1"));
    }
    if lo > hi {
        return Err(CliError::usage(format!("empty depth range {text:?}")));
    }
    Ok((lo..=hi).collect())
}

fn parse_biases(text: &str, step: Option<&str>) -> Result<Vec<Rational>, CliError> {
    let (lo, hi) = split_range(text);
    let lo = parse_rational(lo)?;
    let hi = hi.map(parse_rational).transpose()?.unwrap_or_else(|| lo.clone());
    if lo > hi {
        return Err(CliError::usage(format!("empty bias range {text:?}")));
    }
    if lo.is_negative() || hi > Rational::one() {
        return Err(CliError::usage("biases must lie in [0, 1]"));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    let step = parse_rational(step.ok_or_else(|| CliError::usage("a bias range needs --step"))?)?;
    if step <= Rational::zero() {
        return Err(CliError::usage("--step must be positive"));
    }
    let mut out = Vec::new();
    let mut e = lo;
    while e <= hi {
        out.push(e.clone());
        e += &step;
    }
    Ok(out)
}

/// Exact decimal text when the denominator divides a power of ten, else `p/q`.
pub fn exact_text(r: &Rational) -> String {
    let denom = r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    let mut rest = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return r.to_text();
    }
    let places = twos.max(fives);
    let scaled = r.numer() * BigInt::from(10).pow(places) / denom;
    if places == 0 {
        return scaled.to_string();
    }
    let negative = scaled.is_negative();
    let digits = scaled.magnitude().to_string();
    let width = places as usize + 1;
    let padded = format!("{digits:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - places as usize);
    format!("{}{int}.{frac}", if negative { "-" } else { "" })
}

fn cmd_sweep(args: &SweepArgs, format: Format) -> Result<Outcome, CliError> {
    let depths = parse_depths(&args.depths)?;
    let biases = parse_biases(&args.biases, args.step.as_deref())?;
    let mut rows = Vec::with_capacity(depths.len() * biases.len());
    for &n in &depths {
        for e in &biases {
            let ev = ic_sum(n, e.to_f64()).map_err(|err| CliError::usage(err.to_string()))?;
            rows.push((n, e, ev));
        }
    }
    let data = match format {
        Format::Json => json_bytes(
            &rows
                .iter()
                .map(|(n, e, ev)| {
                    json!({
                        "n": n, "E": exact_text(e), "icSum": ev.sum,
                        "logSum2": ev.log_sum2, "violated": ev.violated,
                    })
                })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => csv_bytes(
            &["n", "E", "icSum", "logSum2", "violated"],
            &rows
                .iter()
                .map(|(n, e, ev)| {
                    vec![
                        n.to_string(),
                        exact_text(e),
                        float_cell(Some(ev.sum)),
                        float_cell(Some(ev.log_sum2)),
                        ev.violated.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome::ok(data))
}

fn cmd_threshold(args: &ThresholdArgs, format: Format) -> Result<Outcome, CliError> {
    let t = tsirelson_threshold(args.n_max);
    let data = match format {
        Format::Json => json_bytes(&t),
        Format::Csv => csv_bytes(
            &["nMax", "threshold", "lower", "gapToLimit"],
            &[vec![
                t.n_max.to_string(),
                float_cell(Some(t.threshold)),
                float_cell(Some(t.lower)),
                float_cell(Some(t.gap_to_limit)),
            ]],
        ),
    };
    Ok(Outcome::ok(data))
}

/// Name used in the run manifest.
pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Box(_) => "box",
        Command::Membership(_) => "membership",
        Command::Ot(_) => "ot",
        Command::Rac(_) => "rac",
        Command::Sweep(_) => "sweep",
        Command::Threshold(_) => "threshold",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_text_forms() {
        let r = |s: &str| parse_rational(s).unwrap();
        assert_eq!(exact_text(&r("0.70")), "0.7");
        assert_eq!(exact_text(&r("7071/10000")), "0.7071");
        assert_eq!(exact_text(&r("1/3")), "1/3");
        assert_eq!(exact_text(&r("3")), "3");
        assert_eq!(exact_text(&r("-1/40")), "-0.025");
        assert_eq!(exact_text(&r("1/1024")), "0.0009765625");
        for s in ["0.7", "0.0009765625", "-0.025", "1/3", "3"] {
            assert_eq!(r(&exact_text(&r(s))), r(s));
        }
    }

    #[test]
    fn bias_ranges() {
        let es = parse_biases("0.70..0.75", Some("0.01")).unwrap();
        assert_eq!(es.len(), 6);
        assert_eq!(exact_text(&es[5]), "0.75");
        assert_eq!(parse_biases("0.75..0.70", Some("0.01")).unwrap_err().exit_code(), 64);
        assert_eq!(parse_biases("0.7..0.8", None).unwrap_err().exit_code(), 64);
        assert_eq!(parse_biases("0.7..0.8", Some("0")).unwrap_err().exit_code(), 64);
        assert_eq!(parse_biases("0.9..1.1", Some("0.1")).unwrap_err().exit_code(), 64);
        assert_eq!(parse_biases("0.5", None).unwrap().len(), 1);
        assert_eq!(parse_depths("1..=5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_depths("3").unwrap(), vec![3]);
        assert!(parse_depths("5..1").is_err());
        assert!(parse_depths("0..2").is_err());
    }
}
