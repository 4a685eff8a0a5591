//! A small language for naming subsets of Z_N.
//!
//! ```text
//! N=10,list:0,1,5
//! N=64,random:delta=0.25,seed=7
//! N=30,ap:start=3,step=5,len=6
//! N=50,bohr:K=1;7,eps=1/10
//! ```
//!
//! Random sets hold exactly `round(δN)` elements (at least one), drawn
//! without replacement by ChaCha8 seeded from the given `u64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bohr::{bohr_set, BohrSpec, Radius};
use crate::error::{Error, Result};
use crate::group::{CyclicGroup, ResidueSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetKind {
    List(Vec<i128>),
    Random { density: BigRational, seed: u64 },
    Progression { start: i128, step: i128, len: u64 },
    Bohr { frequencies: Vec<i128>, radius: BigRational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSpec {
    pub modulus: u64,
    pub kind: SetKind,
}

/// Parses `3`, `-2/5` or `0.125` as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::input(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::input(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let value = BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Ok(if neg { -value } else { value })
}

fn parse_int(key: &str, v: &str) -> Result<i128> {
    v.trim()
        .parse()
        .map_err(|_| Error::input(format!("{key} must be an integer, got {v:?}")))
}

fn key_values<'a>(body: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut out = vec![None; keys.len()];
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::input(format!("expected key=value, got {part:?}")))?;
        let i = keys
            .iter()
            .position(|&key| key == k.trim())
            .ok_or_else(|| Error::input(format!("unknown key {:?}; expected one of {keys:?}", k.trim())))?;
        if out[i].replace(v).is_some() {
            return Err(Error::input(format!("duplicate key {:?}", k.trim())));
        }
    }
    out.into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::input(format!("missing key {k:?}"))))
        .collect()
}

impl FromStr for SetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(',')
            .ok_or_else(|| Error::input(format!("expected N=<n>,<kind>:..., got {s:?}")))?;
        let modulus = head
            .trim()
            .strip_prefix("N=")
            .and_then(|n| n.trim().parse::<u64>().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::input(format!("expected N=<positive integer>, got {head:?}")))?;
        let (kind, body) = rest
            .split_once(':')
            .ok_or_else(|| Error::input(format!("expected <kind>:<params>, got {rest:?}")))?;
        let kind = match kind.trim() {
            "list" => {
                let items = body
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| parse_int("list element", x))
                    .collect::<Result<Vec<_>>>()?;
                SetKind::List(items)
            }
            "random" => {
                let v = key_values(body, &["delta", "seed"])?;
                let seed = v[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::input(format!("seed must be a u64, got {:?}", v[1])))?;
                SetKind::Random { density: parse_rational(v[0])?, seed }
            }
            "ap" => {
                let v = key_values(body, &["start", "step", "len"])?;
                let len = parse_int("len", v[2])?;
                SetKind::Progression {
                    start: parse_int("start", v[0])?,
                    step: parse_int("step", v[1])?,
                    len: u64::try_from(len).map_err(|_| Error::input("len must be nonnegative"))?,
                }
            }
            "bohr" => {
                let v = key_values(body, &["K", "eps"])?;
                let frequencies = v[0]
                    .split(';')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| parse_int("K element", x))
                    .collect::<Result<Vec<_>>>()?;
                SetKind::Bohr { frequencies, radius: parse_rational(v[1])? }
            }
            other => return Err(Error::input(format!("unknown set kind {other:?}"))),
        };
        let spec = SetSpec { modulus, kind };
        spec.validate()?;
        Ok(spec)
    }
}

impl SetSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.modulus;
        if n == 0 {
            return Err(Error::input("N must be positive"));
        }
        match &self.kind {
            SetKind::List(_) => Ok(()),
            SetKind::Random { density, .. } => {
                if density.is_positive() && *density <= BigRational::one() {
                    Ok(())
                } else {
                    Err(Error::input(format!("random density {density} must lie in (0, 1]")))
                }
            }
            SetKind::Progression { len, .. } => {
                if *len == 0 {
                    Err(Error::input("progression length must be positive"))
                } else if *len > n {
                    Err(Error::input(format!("progression length {len} exceeds N = {n}")))
                } else {
                    Ok(())
                }
            }
            SetKind::Bohr { radius, .. } => {
                if radius.is_positive() && *radius < BigRational::one() {
                    Ok(())
                } else {
                    Err(Error::input(format!("Bohr radius {radius} must lie in (0, 1)")))
                }
            }
        }
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[i128], sep: &str| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep);
        write!(f, "N={},", self.modulus)?;
        match &self.kind {
            SetKind::List(xs) => write!(f, "list:{}", join(xs, ",")),
            SetKind::Random { density, seed } => write!(f, "random:delta={density},seed={seed}"),
            SetKind::Progression { start, step, len } => write!(f, "ap:start={start},step={step},len={len}"),
            SetKind::Bohr { frequencies, radius } => write!(f, "bohr:K={},eps={radius}", join(frequencies, ";")),
        }
    }
}

pub fn make_set(spec: &SetSpec) -> Result<ResidueSet> {
    spec.validate()?;
    let g = CyclicGroup::new(spec.modulus)?;
    Ok(match &spec.kind {
        SetKind::List(xs) => ResidueSet::from_residues(g, xs.iter().copied()),
        SetKind::Random { density, seed } => {
            let n = spec.modulus;
            let target = (density * BigRational::from_integer(BigInt::from(n))).round();
            let size = target.to_integer().to_u64().unwrap_or(n).clamp(1, n);
            random_subset(g, size as usize, *seed)
        }
        SetKind::Progression { start, step, len } => {
            ResidueSet::from_residues(g, (0..*len as i128).map(|i| start + i * step))
        }
        SetKind::Bohr { frequencies, radius } => {
            let k = ResidueSet::from_residues(g, frequencies.iter().copied());
            bohr_set(&BohrSpec::new(k, Radius::Exact(radius.clone()))?)
        }
    })
}

/// A uniformly random `size`-subset of Z_N from a seeded ChaCha8 stream.
pub fn random_subset(g: CyclicGroup, size: usize, seed: u64) -> ResidueSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, g.order(), size.min(g.order()));
    ResidueSet::from_residues(g, picks.into_iter().map(|i| i as i128))
}
