//! Text grammar for priors, shared by the CLI and the library surface.
//!
//! Forms:
//!
//! - `jeffreys`
//! - `power:beta=0.5`
//! - `gamma:alpha=1,beta=0.5`
//! - `constant`
//! - `shift-point:alpha=0.5,eta=1`
//! - `sym-point:alpha=0.5,center=2,2,2`
//! - `sym-subspace:alpha=0.5,vperp=@basis.csv`
//! - `coord-subspace:alpha=0.5,include=1,2,3` (1-based coordinates)
//! - `mix-coord-subspace:alpha=0.5` (sum of all leave-one-out subspaces)
//! - `harmonic-point:alpha=0.5,center=2,2,2` (unsymmetrized; no dominance)
//! - `sum:(shift-point:alpha=0.5,eta=1)+(coord-subspace:alpha=0.5,include=1,2,3)`
//!
//! Shrinkage forms accept optional `beta=` (scalar broadcast or
//! comma-separated list) and `eps=` smoothing keys. Scalars broadcast to all
//! `d` coordinates. Parse errors carry the byte offset into the input.

use std::path::Path;

use crate::error::{Error, Result};
use crate::prior::{FPrior, Family, PriorSpec};

/// Parse a prior expression for a problem of dimension `d`.
pub fn parse_prior(text: &str, d: usize) -> Result<PriorSpec> {
    let text_trim = text.trim();
    let base = text.len() - text.trim_start().len();
    let (head, rest, rest_off) = split_head(text_trim, base);
    match head {
        "jeffreys" => {
            expect_no_args(rest, rest_off)?;
            Ok(PriorSpec::Power { beta: vec![0.5; d] })
        }
        // (family validation for shrinkage forms happens in FPrior::new)
        "power" => {
            let kvs = parse_kv(rest, rest_off)?;
            let mut beta = None;
            for kv in &kvs {
                match kv.key {
                    "beta" => beta = Some(kv.broadcast(d)?),
                    _ => return Err(kv.unknown_key()),
                }
            }
            let beta = beta.ok_or_else(|| Error::parse(rest_off, "power prior requires beta="))?;
            check_positive(&beta, "beta")?;
            Ok(PriorSpec::Power { beta })
        }
        "gamma" => {
            let kvs = parse_kv(rest, rest_off)?;
            let (mut alpha, mut beta) = (None, None);
            for kv in &kvs {
                match kv.key {
                    "alpha" => alpha = Some(kv.broadcast(d)?),
                    "beta" => beta = Some(kv.broadcast(d)?),
                    _ => return Err(kv.unknown_key()),
                }
            }
            let alpha =
                alpha.ok_or_else(|| Error::parse(rest_off, "gamma prior requires alpha="))?;
            let beta = beta.ok_or_else(|| Error::parse(rest_off, "gamma prior requires beta="))?;
            check_positive(&beta, "beta")?;
            if let Some(a) = alpha.iter().find(|a| !(**a >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "gamma prior alpha = {a} must be nonnegative"
                )));
            }
            Ok(PriorSpec::Gamma { alpha, beta })
        }
        _ => {
            let (family, beta, eps) = parse_family_expr(text_trim, base, d)?;
            let beta = beta.unwrap_or_else(|| vec![0.5; d]);
            let eps = eps.unwrap_or_else(|| default_epsilon(&family));
            Ok(PriorSpec::Shrinkage(FPrior::new(family, beta, eps, d)?))
        }
    }
}

/// Smoothing default: subspace families evaluated by Monte Carlo need a
/// bounded integrand, the rest default to the raw power law.
fn check_positive(values: &[f64], name: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "{name} = {v} must be positive"
        )));
    }
    Ok(())
}

fn default_epsilon(family: &Family) -> f64 {
    match family {
        Family::SymSubspace { .. } => 1e-6,
        Family::Sum(parts) => parts.iter().map(default_epsilon).fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Parse a shrinkage family with optional beta/eps overrides.
fn parse_family_expr(
    text: &str,
    offset: usize,
    d: usize,
) -> Result<(Family, Option<Vec<f64>>, Option<f64>)> {
    let (head, rest, rest_off) = split_head(text, offset);
    if head == "sum" {
        return parse_sum(rest, rest_off, d);
    }
    let kvs = parse_kv(rest, rest_off)?;
    let mut beta = None;
    let mut eps = None;
    let mut alpha = None;
    let mut eta = None;
    let mut center = None;
    let mut include = None;
    let mut vperp = None;
    for kv in &kvs {
        match kv.key {
            "beta" => beta = Some(kv.broadcast(d)?),
            "eps" | "epsilon" => eps = Some(kv.scalar()?),
            "alpha" => alpha = Some(kv.scalar()?),
            "eta" => eta = Some(kv.scalar()?),
            "center" => center = Some(kv.vector(d)?),
            "include" => include = Some(kv.indices(d)?),
            "vperp" => vperp = Some(kv.basis_file(d)?),
            _ => return Err(kv.unknown_key()),
        }
    }
    let need_alpha = |alpha: Option<f64>| {
        alpha.ok_or_else(|| Error::parse(offset, format!("{head} requires alpha=")))
    };
    let family = match head {
        "constant" => Family::Constant,
        "shift-point" => Family::ShiftPoint {
            alpha: need_alpha(alpha)?,
            eta: eta.unwrap_or(0.0),
        },
        "sym-point" => Family::SymPoint {
            alpha: need_alpha(alpha)?,
            center: center.ok_or_else(|| Error::parse(offset, "sym-point requires center="))?,
        },
        "sym-subspace" => Family::SymSubspace {
            alpha: need_alpha(alpha)?,
            vperp: vperp
                .ok_or_else(|| Error::parse(offset, "sym-subspace requires vperp=@file"))?,
        },
        "coord-subspace" => Family::CoordSubspace {
            alpha: need_alpha(alpha)?,
            indices: include
                .ok_or_else(|| Error::parse(offset, "coord-subspace requires include="))?,
        },
        "mix-coord-subspace" => {
            let a = need_alpha(alpha)?;
            let parts = (0..d)
                .map(|leave| Family::CoordSubspace {
                    alpha: a,
                    indices: (0..d).filter(|&i| i != leave).collect(),
                })
                .collect();
            Family::Sum(parts)
        }
        "harmonic-point" => Family::HarmonicPoint {
            alpha: need_alpha(alpha)?,
            center: center
                .ok_or_else(|| Error::parse(offset, "harmonic-point requires center="))?,
        },
        other => {
            return Err(Error::parse(
                offset,
                format!("unknown prior family '{other}'"),
            ))
        }
    };
    Ok((family, beta, eps))
}

/// `(part)+(part)+...`, each part a family expression without beta/eps keys.
fn parse_sum(
    rest: &str,
    rest_off: usize,
    d: usize,
) -> Result<(Family, Option<Vec<f64>>, Option<f64>)> {
    let bytes = rest.as_bytes();
    let mut parts = Vec::new();
    let mut i = 0;
    loop {
        if i >= bytes.len() || bytes[i] != b'(' {
            return Err(Error::parse(rest_off + i, "expected '(' in sum"));
        }
        let start = i + 1;
        let mut depth = 1;
        let mut j = start;
        while j < bytes.len() && depth > 0 {
            match bytes[j] {
                b'(' => depth += 1,
                b')' => depth -= 1,
                _ => {}
            }
            j += 1;
        }
        if depth != 0 {
            return Err(Error::parse(rest_off + i, "unbalanced '(' in sum"));
        }
        let inner = &rest[start..j - 1];
        let (family, beta, eps) = parse_family_expr(inner, rest_off + start, d)?;
        if beta.is_some() || eps.is_some() {
            return Err(Error::parse(
                rest_off + start,
                "beta=/eps= must be set on the sum, not inside a part",
            ));
        }
        parts.push(family);
        i = j;
        if i >= bytes.len() {
            break;
        }
        if bytes[i] == b'+' {
            i += 1;
            continue;
        }
        if bytes[i] == b',' {
            // trailing beta=/eps= keys on the sum itself
            let kvs = parse_kv(&rest[i + 1..], rest_off + i + 1)?;
            let mut beta = None;
            let mut eps = None;
            for kv in &kvs {
                match kv.key {
                    "beta" => beta = Some(kv.broadcast(d)?),
                    "eps" | "epsilon" => eps = Some(kv.scalar()?),
                    _ => return Err(kv.unknown_key()),
                }
            }
            return Ok((Family::Sum(parts), beta, eps));
        }
        return Err(Error::parse(rest_off + i, "expected '+' or ',' after ')'"));
    }
    Ok((Family::Sum(parts), None, None))
}

/// Split `name` / `name:rest`; returns (name, rest, rest byte offset).
fn split_head(text: &str, base: usize) -> (&str, &str, usize) {
    match text.find(':') {
        Some(pos) => (&text[..pos], &text[pos + 1..], base + pos + 1),
        None => (text, "", base + text.len()),
    }
}

fn expect_no_args(rest: &str, rest_off: usize) -> Result<()> {
    if rest.trim().is_empty() {
        Ok(())
    } else {
        Err(Error::parse(rest_off, "this prior takes no arguments"))
    }
}

struct KeyValue<'a> {
    key: &'a str,
    key_off: usize,
    values: Vec<(&'a str, usize)>,
}

impl KeyValue<'_> {
    fn unknown_key(&self) -> Error {
        Error::parse(self.key_off, format!("unknown key '{}'", self.key))
    }

    fn scalar(&self) -> Result<f64> {
        if self.values.len() != 1 {
            return Err(Error::parse(
                self.key_off,
                format!("key '{}' expects a single number", self.key),
            ));
        }
        parse_f64(self.values[0].0, self.values[0].1)
    }

    fn vector(&self, d: usize) -> Result<Vec<f64>> {
        let v: Vec<f64> = self
            .values
            .iter()
            .map(|&(s, off)| parse_f64(s, off))
            .collect::<Result<_>>()?;
        if v.len() != d {
            return Err(Error::parse(
                self.key_off,
                format!("key '{}' expects {d} entries, got {}", self.key, v.len()),
            ));
        }
        Ok(v)
    }

    /// Scalar broadcast to `d` entries or a full-length list.
    fn broadcast(&self, d: usize) -> Result<Vec<f64>> {
        if self.values.len() == 1 {
            return Ok(vec![self.scalar()?; d]);
        }
        self.vector(d)
    }

    /// 1-based coordinate list, converted to 0-based.
    fn indices(&self, d: usize) -> Result<Vec<usize>> {
        self.values
            .iter()
            .map(|&(s, off)| {
                let n: usize = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(off, format!("invalid coordinate '{s}'")))?;
                if n == 0 || n > d {
                    return Err(Error::parse(off, format!("coordinate {n} outside 1..={d}")));
                }
                Ok(n - 1)
            })
            .collect()
    }

    /// `@file.csv`: rows of the CSV are the orthonormal vperp vectors.
    fn basis_file(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        if self.values.len() != 1 || !self.values[0].0.starts_with('@') {
            return Err(Error::parse(
                self.key_off,
                "vperp expects a single @file.csv reference",
            ));
        }
        read_basis(Path::new(&self.values[0].0[1..]), d)
    }
}

/// Read an orthonormal-basis CSV (no header, one vector per row).
pub fn read_basis(path: &Path, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "{}:{}: invalid number '{s}'",
                        path.display(),
                        line + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::InvalidArgument(format!(
                "{}:{}: expected {d} entries, got {}",
                path.display(),
                line + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Split `k=v,v2,k2=v,...` where bare tokens extend the previous key's list.
fn parse_kv(rest: &str, rest_off: usize) -> Result<Vec<KeyValue<'_>>> {
    let mut out: Vec<KeyValue> = Vec::new();
    if rest.trim().is_empty() {
        return Ok(out);
    }
    let mut pos = 0;
    for token in rest.split(',') {
        let tok_off = rest_off + pos;
        pos += token.len() + 1;
        let t = token.trim();
        if t.is_empty() {
            return Err(Error::parse(tok_off, "empty token"));
        }
        if let Some(eq) = t.find('=') {
            let key = t[..eq].trim();
            let value = t[eq + 1..].trim();
            let mut values = Vec::new();
            if !value.is_empty() {
                values.push((value, tok_off + eq + 1));
            }
            out.push(KeyValue {
                key,
                key_off: tok_off,
                values,
            });
        } else {
            match out.last_mut() {
                Some(kv) => kv.values.push((t, tok_off)),
                None => {
                    return Err(Error::parse(
                        tok_off,
                        format!("expected key=value, got '{t}'"),
                    ))
                }
            }
        }
    }
    Ok(out)
}

fn parse_f64(s: &str, off: usize) -> Result<f64> {
    // accept simple fractions like 1/2 for convenience in alpha values
    if let Some(slash) = s.find('/') {
        let num: f64 = s[..slash]
            .trim()
            .parse()
            .map_err(|_| Error::parse(off, format!("invalid number '{s}'")))?;
        let den: f64 = s[slash + 1..]
            .trim()
            .parse()
            .map_err(|_| Error::parse(off, format!("invalid number '{s}'")))?;
        return Ok(num / den);
    }
    s.trim()
        .parse()
        .map_err(|_| Error::parse(off, format!("invalid number '{s}'")))
}
