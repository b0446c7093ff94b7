//! Plain-text profile files.
//!
//! ```text
//! # mtweight-profile coord=ball R=1 alpha=0 beta=0 shape=log-linear
//! 0 0.5641895835477563
//! 0.1353352832366127 0.5641895835477563
//! 1 0
//! # mtweight-profile coord=halfline S=4 alpha=0 beta=0 shape=linear tail=plateau
//! 0 0
//! 4 2
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so parsing a written
//! file reproduces every knot and value bit for bit. A file may hold several
//! profiles; each starts with its own header line. Blank lines and lines
//! starting with `//` are ignored.

use std::fmt::Write as _;

use crate::constants::WeightParams;
use crate::error::{Error, Result};
use crate::profiles::{HalfLineProfile, HalfLineShape, RadialProfile, RadialShape, Tail};

const MAGIC: &str = "# mtweight-profile";

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Ball(RadialProfile),
    HalfLine(HalfLineProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub params: WeightParams,
    pub profile: Profile,
}

fn params_fields(p: &WeightParams) -> String {
    let mut s = format!("alpha={} beta={}", p.alpha, p.beta);
    if let Some(sigma) = p.sigma {
        let _ = write!(s, " sigma={sigma}");
    }
    s
}

pub fn write_ball(u: &RadialProfile, params: &WeightParams) -> String {
    let shape = match u.shape() {
        RadialShape::Linear => "linear",
        RadialShape::LogLinear => "log-linear",
    };
    let mut out = format!(
        "{MAGIC} coord=ball R={} {} shape={shape}\n",
        u.radius(),
        params_fields(params)
    );
    for (k, v) in u.knots().iter().zip(u.values()) {
        let _ = writeln!(out, "{k} {v}");
    }
    out
}

pub fn write_halfline(f: &HalfLineProfile, params: &WeightParams) -> String {
    let shape = match f.shape() {
        HalfLineShape::Linear => "linear".to_string(),
        HalfLineShape::ExpLinear { rate } => format!("exp-linear:{rate}"),
    };
    let tail = match f.tail() {
        Tail::Plateau => "plateau".to_string(),
        Tail::Limit(l) => format!("limit:{l}"),
    };
    let mut out = format!(
        "{MAGIC} coord=halfline S={} {} shape={shape} tail={tail}\n",
        f.support_end(),
        params_fields(params)
    );
    for (k, v) in f.knots().iter().zip(f.values()) {
        let _ = writeln!(out, "{k} {v}");
    }
    out
}

pub fn write_record(rec: &ProfileRecord) -> String {
    match &rec.profile {
        Profile::Ball(u) => write_ball(u, &rec.params),
        Profile::HalfLine(f) => write_halfline(f, &rec.params),
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Parse(format!("field {key}: cannot parse '{v}' as a number")))
}

struct Header {
    coord: String,
    extent: f64,
    params: WeightParams,
    shape: String,
    tail: Option<String>,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Parse(format!("line {lineno}: expected profile header")))?;
    let mut coord = None;
    let mut extent = None;
    let mut alpha = None;
    let mut beta = None;
    let mut sigma = None;
    let mut shape = None;
    let mut tail = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {lineno}: malformed field '{tok}'")))?;
        match k {
            "coord" => coord = Some(v.to_string()),
            "R" | "S" => extent = Some(num(k, v)?),
            "alpha" => alpha = Some(num(k, v)?),
            "beta" => beta = Some(num(k, v)?),
            "sigma" => sigma = Some(num(k, v)?),
            "shape" => shape = Some(v.to_string()),
            "tail" => tail = Some(v.to_string()),
            _ => return Err(Error::Parse(format!("line {lineno}: unknown field '{k}'"))),
        }
    }
    let missing = |f: &str| Error::Parse(format!("line {lineno}: header lacks '{f}'"));
    let mut params = WeightParams::new(alpha.ok_or_else(|| missing("alpha"))?, beta.ok_or_else(|| missing("beta"))?)
        .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
    if let Some(s) = sigma {
        params = params
            .with_sigma(s)
            .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
    }
    Ok(Header {
        coord: coord.ok_or_else(|| missing("coord"))?,
        extent: extent.ok_or_else(|| missing("R or S"))?,
        params,
        shape: shape.unwrap_or_else(|| "linear".into()),
        tail,
    })
}

fn build(h: Header, knots: Vec<f64>, values: Vec<f64>, lineno: usize) -> Result<ProfileRecord> {
    let wrap = |e: Error| Error::Parse(format!("profile at line {lineno}: {e}"));
    if knots.last() != Some(&h.extent) {
        return Err(Error::Parse(format!(
            "profile at line {lineno}: last knot does not match declared extent {}",
            h.extent
        )));
    }
    let profile = match h.coord.as_str() {
        "ball" => {
            let shape = match h.shape.as_str() {
                "linear" => RadialShape::Linear,
                "log-linear" => RadialShape::LogLinear,
                other => return Err(Error::Parse(format!("unknown ball shape '{other}'"))),
            };
            Profile::Ball(RadialProfile::new(knots, values, shape).map_err(wrap)?)
        }
        "halfline" => {
            let shape = if h.shape == "linear" {
                HalfLineShape::Linear
            } else if let Some(r) = h.shape.strip_prefix("exp-linear:") {
                HalfLineShape::ExpLinear { rate: num("shape", r)? }
            } else {
                return Err(Error::Parse(format!("unknown half-line shape '{}'", h.shape)));
            };
            let tail = match h.tail.as_deref() {
                None | Some("plateau") => Tail::Plateau,
                Some(t) => match t.strip_prefix("limit:") {
                    Some(l) => Tail::Limit(num("tail", l)?),
                    None => return Err(Error::Parse(format!("unknown tail '{t}'"))),
                },
            };
            Profile::HalfLine(HalfLineProfile::new(knots, values, shape, tail).map_err(wrap)?)
        }
        other => return Err(Error::Parse(format!("unknown coordinate system '{other}'"))),
    };
    Ok(ProfileRecord {
        params: h.params,
        profile,
    })
}

/// Parses every profile in `text`.
pub fn parse_profiles(text: &str) -> Result<Vec<ProfileRecord>> {
    let mut out = Vec::new();
    let mut current: Option<(Header, usize)> = None;
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if line.starts_with('#') {
            if let Some((h, at)) = current.take() {
                out.push(build(h, std::mem::take(&mut knots), std::mem::take(&mut values), at)?);
            }
            current = Some((parse_header(line, lineno)?, lineno));
            continue;
        }
        if current.is_none() {
            return Err(Error::Parse(format!("line {lineno}: data before any header")));
        }
        let mut it = line.split_whitespace();
        let (Some(k), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("line {lineno}: expected 'knot value'")));
        };
        knots.push(num("knot", k)?);
        values.push(num("value", v)?);
    }
    if let Some((h, at)) = current {
        out.push(build(h, knots, values, at)?);
    }
    if out.is_empty() {
        return Err(Error::Parse("no profiles found".into()));
    }
    Ok(out)
}
