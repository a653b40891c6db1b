//! Weight mini-language.
//!
//! ```text
//! const:2.5                  constant
//! pwc:0=1,0.5pi=4,pi=1       step weight, value holds from its angle on
//! sine:4                     1 + (M − 1)(1 + sin θ)/2
//! bar-a:4                    two-level extremal weight
//! bar-gamma:4,1,0            extremal weight of the (p, q) power family
//! samples:path.csv           step weight from `theta,weight` columns
//! inv:<spec>                 pointwise reciprocal
//! pow:<r>:<spec>             pointwise power
//! shift:<angle>:<spec>       θ ↦ w(θ + φ)
//! ```
//!
//! Angles accept a `pi` suffix: `0.5pi`, `pi`, `-1.5pi`.

use std::f64::consts::PI;
use std::path::Path;

use wirtinger::sharpness::{extremal_weight_pq, extremal_weight_ps};
use wirtinger::PeriodicWeight;

use crate::CliError;

fn parse_err(token: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("`{token}`: {why}"))
}

pub fn parse_number(token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    let v: f64 = t.parse().map_err(|_| parse_err(t, "not a number"))?;
    if !v.is_finite() {
        return Err(parse_err(t, "not finite"));
    }
    Ok(v)
}

/// A real number, optionally written as a multiple of π.
pub fn parse_angle(token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    match t.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some("-") => Ok(-PI),
        Some(coef) => Ok(parse_number(coef).map_err(|_| parse_err(t, "not an angle"))? * PI),
        None => parse_number(t),
    }
}

pub fn parse_list(token: &str) -> Result<Vec<f64>, CliError> {
    token.split(',').map(parse_number).collect()
}

pub fn parse_weight(spec: &str) -> Result<PeriodicWeight, CliError> {
    let spec = spec.trim();
    parse_inner(spec).map_err(|e| match e {
        CliError::Solver(inner) => parse_err(spec, inner),
        other => other,
    })
}

fn parse_inner(spec: &str) -> Result<PeriodicWeight, CliError> {
    let (head, rest) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(spec, "expected `<family>:<arguments>`"))?;
    let weight = match head {
        "const" => PeriodicWeight::constant(parse_number(rest)?)?,
        "sine" => PeriodicWeight::sine_family(parse_number(rest)?)?,
        "bar-a" => extremal_weight_ps(parse_number(rest)?)?,
        "bar-gamma" => {
            let args = parse_list(rest)?;
            if args.len() != 3 {
                return Err(parse_err(rest, "bar-gamma takes M,p,q"));
            }
            extremal_weight_pq(args[0], args[1], args[2])?
        }
        "pwc" => {
            let mut breakpoints = Vec::new();
            let mut values = Vec::new();
            for pair in rest.split(',') {
                let (angle, value) = pair
                    .split_once('=')
                    .ok_or_else(|| parse_err(pair, "expected `angle=value`"))?;
                breakpoints.push(parse_angle(angle)?);
                values.push(parse_number(value)?);
            }
            PeriodicWeight::piecewise_constant(&breakpoints, &values)?
        }
        "samples" => read_samples(Path::new(rest))?,
        "inv" => parse_inner(rest)?.recip()?,
        "pow" => {
            let (r, inner) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(rest, "expected `pow:<r>:<spec>`"))?;
            parse_inner(inner)?.power(parse_number(r)?)?
        }
        "shift" => {
            let (phi, inner) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(rest, "expected `shift:<angle>:<spec>`"))?;
            parse_inner(inner)?.shift(parse_angle(phi)?)?
        }
        other => return Err(parse_err(other, "unknown weight family")),
    };
    Ok(weight.relabel(spec))
}

/// Step weight whose value at each sampled angle holds until the next one.
fn read_samples(path: &Path) -> Result<PeriodicWeight, CliError> {
    let token = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(&token, e))?;
    let headers = reader.headers().map_err(|e| parse_err(&token, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(&token, format!("missing column `{name}`")))
    };
    let (ti, wi) = (column("theta")?, column("weight")?);
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(&token, e))?;
        breakpoints.push(parse_number(&record[ti])?);
        values.push(parse_number(&record[wi])?);
    }
    Ok(PeriodicWeight::piecewise_constant(&breakpoints, &values)?)
}
