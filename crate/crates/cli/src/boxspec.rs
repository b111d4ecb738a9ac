//! Box descriptions on the command line.
//!
//! Word form (the `box` and `membership` subcommands): `pr`, `noise`,
//! `iso E`, `det F G`, `mix COMP:W ...`, `file PATH`. Token form (`--box`
//! options and mixture components): `pr`, `noise`, `iso=E`, `det=F,G`,
//! `@PATH`. `F` and `G` list the deterministic outputs per input, e.g. `01`.

use std::fs;
use std::path::Path;

use infocausal_core::{ExactBox, Rational, Scalar, Scenario};

use crate::output::CliError;

pub fn parse_rational(text: &str) -> Result<Rational, CliError> {
    Rational::parse_text(text).map_err(|e| CliError::usage(e.to_string()))
}

fn box_error(e: impl std::fmt::Display) -> CliError {
    CliError::InvalidBox(e.to_string())
}

fn parse_strategy(text: &str) -> Result<Vec<usize>, CliError> {
    let digits: Vec<usize> = text
        .chars()
        .filter(|c| *c != ',')
        .map(|c| {
            c.to_digit(10)
                .map(|d| d as usize)
                .ok_or_else(|| CliError::usage(format!("bad strategy {text:?}: expected digits like 01")))
        })
        .collect::<Result<_, _>>()?;
    if digits.is_empty() {
        return Err(CliError::usage(format!("empty strategy {text:?}")));
    }
    Ok(digits)
}

pub fn read_box_file(path: &Path) -> Result<ExactBox, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: not a box: {e}", path.display())))
}

/// Reads a JSON array of boxes.
pub fn read_box_list(path: &Path) -> Result<Vec<ExactBox>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: not a list of boxes: {e}", path.display())))
}

pub fn parse_words(words: &[String]) -> Result<ExactBox, CliError> {
    let (kind, rest) = words
        .split_first()
        .ok_or_else(|| CliError::usage("missing box description"))?;
    let arity = |n: usize| {
        if rest.len() == n {
            Ok(())
        } else {
            Err(CliError::usage(format!(
                "`{kind}` takes {n} argument(s), got {}",
                rest.len()
            )))
        }
    };
    match kind.as_str() {
        "pr" => {
            arity(0)?;
            Ok(ExactBox::pr_box())
        }
        "noise" => {
            arity(0)?;
            Ok(ExactBox::white_noise(Scenario::CHSH))
        }
        "iso" => {
            arity(1)?;
            ExactBox::isotropic(parse_rational(&rest[0])?).map_err(box_error)
        }
        "det" => {
            arity(2)?;
            let (f, g) = (parse_strategy(&rest[0])?, parse_strategy(&rest[1])?);
            ExactBox::local_deterministic(Scenario::CHSH, &f, &g).map_err(box_error)
        }
        "file" => {
            arity(1)?;
            read_box_file(Path::new(&rest[0]))
        }
        "mix" => {
            if rest.is_empty() {
                return Err(CliError::usage("`mix` needs at least one COMP:W"));
            }
            let mut points = Vec::with_capacity(rest.len());
            let mut weights = Vec::with_capacity(rest.len());
            for part in rest {
                let (comp, w) = part
                    .rsplit_once(':')
                    .ok_or_else(|| CliError::usage(format!("mixture part {part:?} lacks :WEIGHT")))?;
                points.push(parse_token(comp)?);
                weights.push(parse_rational(w)?);
            }
            ExactBox::mix(&points, &weights).map_err(box_error)
        }
        other => Err(CliError::usage(format!("unknown box kind {other:?}"))),
    }
}

pub fn parse_token(token: &str) -> Result<ExactBox, CliError> {
    if let Some(path) = token.strip_prefix('@') {
        return read_box_file(Path::new(path));
    }
    let words: Vec<String> = match token.split_once('=') {
        Some(("det", args)) => {
            let (f, g) = args
                .split_once(',')
                .ok_or_else(|| CliError::usage(format!("expected det=F,G, got {token:?}")))?;
            vec!["det".into(), f.into(), g.into()]
        }
        Some((kind, arg)) => vec![kind.into(), arg.into()],
        None => vec![token.into()],
    };
    if words[0] == "mix" || words[0] == "file" {
        return Err(CliError::usage(format!("{token:?} is not a box token")));
    }
    parse_words(&words)
}
