//! One-coincidence sequence sets: nonrepeating sequences with no
//! autocorrelation sidelobes and pairwise crosscorrelation at most one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlation::{delay_histogram, Engine};
use crate::galois::{FieldCtx, FieldError};
use crate::numbers::{gcd, is_prime, least_prime_factor, prime_power, smallest_primitive_root};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OcError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("lengths {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("length {0} is too short, need at least 2")]
    TooShort(u64),
    #[error("alphabet {requested} is smaller than the current {current}")]
    AlphabetShrink { requested: usize, current: usize },
    #[error("corrupt OC set: {0}")]
    CorruptSet(String),
    #[error("cannot parse OC family {0:?}; expected linear:K, affine:P or product:K,P")]
    BadSpec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `(n, s; v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcParams {
    pub n: u64,
    pub s: u64,
    pub v: u64,
}

impl std::fmt::Display for OcParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{};{})", self.n, self.s, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OcProvenance {
    Linear { k: u64 },
    Affine { q: u64 },
    CrtProduct { left: Box<OcProvenance>, right: Box<OcProvenance> },
    Padded { base: Box<OcProvenance>, v: u64 },
    Imported,
}

impl OcProvenance {
    /// Rebuilds the set this provenance describes.
    pub fn rebuild(&self) -> Result<OcSet, OcError> {
        match self {
            OcProvenance::Linear { k } => oc_linear(*k),
            OcProvenance::Affine { q } => OcFamily::Affine(*q).build(),
            OcProvenance::CrtProduct { left, right } => oc_crt_product(&left.rebuild()?, &right.rebuild()?),
            OcProvenance::Padded { base, v } => base.rebuild()?.padded(*v as usize),
            OcProvenance::Imported => Err(OcError::CorruptSet("imported sets cannot be rebuilt".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcSet {
    alphabet: usize,
    sequences: Vec<Vec<u32>>,
    provenance: OcProvenance,
}

impl OcSet {
    pub fn new(sequences: Vec<Vec<u32>>, alphabet: usize, provenance: OcProvenance) -> Result<Self, OcError> {
        let n = sequences.first().map_or(0, Vec::len);
        if sequences.is_empty() || n == 0 {
            return Err(OcError::CorruptSet("empty set".into()));
        }
        for (i, row) in sequences.iter().enumerate() {
            if row.len() != n {
                return Err(OcError::CorruptSet(format!("sequence {i} has length {}, expected {n}", row.len())));
            }
            if let Some(&s) = row.iter().find(|&&s| s as usize >= alphabet) {
                return Err(OcError::CorruptSet(format!("sequence {i} holds {s} outside alphabet {alphabet}")));
            }
        }
        Ok(OcSet { alphabet, sequences, provenance })
    }

    pub fn length(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn family_size(&self) -> usize {
        self.sequences.len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn provenance(&self) -> &OcProvenance {
        &self.provenance
    }

    pub fn params(&self) -> OcParams {
        OcParams { n: self.length() as u64, s: self.family_size() as u64, v: self.alphabet as u64 }
    }

    /// Same sequences over a larger alphabet.
    pub fn padded(&self, v: usize) -> Result<OcSet, OcError> {
        if v < self.alphabet {
            return Err(OcError::AlphabetShrink { requested: v, current: self.alphabet });
        }
        Ok(OcSet {
            alphabet: v,
            sequences: self.sequences.clone(),
            provenance: OcProvenance::Padded { base: Box::new(self.provenance.clone()), v: v as u64 },
        })
    }
}

/// `x_a(i) = a·i mod k` for `a = 1..lpf(k) − 1`.
pub fn oc_linear(k: u64) -> Result<OcSet, OcError> {
    let lpf = least_prime_factor(k).ok_or(OcError::TooShort(k))?;
    let sequences = (1..lpf).map(|a| (0..k).map(|i| (a * i % k) as u32).collect()).collect();
    OcSet::new(sequences, k as usize, OcProvenance::Linear { k })
}

/// `y_b(i) = (ω^i + b) mod p` with `ω` the smallest primitive root.
pub fn oc_affine(p: u64) -> Result<OcSet, OcError> {
    if !is_prime(p) {
        return Err(OcError::NotPrime(p));
    }
    if p == 2 {
        return OcSet::new(vec![vec![1], vec![0]], 2, OcProvenance::Affine { q: 2 });
    }
    let w = smallest_primitive_root(p);
    let mut powers = Vec::with_capacity(p as usize - 1);
    let mut x = 1u64;
    for _ in 0..p - 1 {
        powers.push(x);
        x = x * w % p;
    }
    let sequences = (0..p).map(|b| powers.iter().map(|&x| ((x + b) % p) as u32).collect()).collect();
    OcSet::new(sequences, p as usize, OcProvenance::Affine { q: p })
}

/// `y_b(i) = θ^i + b` over `F_q` for a prime power `q`, with `b` running
/// through the field in encoding order. Agrees with [`oc_affine`] for primes.
pub fn oc_affine_field(q: u64) -> Result<OcSet, OcError> {
    let (p, a) = prime_power(q).ok_or(OcError::NotPrimePower(q))?;
    let ctx = FieldCtx::new(p, a, 1)?;
    let powers: Vec<u32> = (0..q - 1).map(|i| ctx.theta_pow(i)).collect();
    let sequences = (0..q as u32)
        .map(|b| powers.iter().map(|&x| ctx.add_codes(x, b)).collect())
        .collect();
    OcSet::new(sequences, q as usize, OcProvenance::Affine { q })
}

/// `z_j(i) = a_j(i mod n_A)·v_B + b_j(i mod n_B)` for `j < min(s_A, s_B)`.
pub fn oc_crt_product(a: &OcSet, b: &OcSet) -> Result<OcSet, OcError> {
    let (na, nb) = (a.length(), b.length());
    if gcd(na as u64, nb as u64) != 1 {
        return Err(OcError::NotCoprime(na as u64, nb as u64));
    }
    let vb = b.alphabet() as u32;
    let s = a.family_size().min(b.family_size());
    let sequences = (0..s)
        .map(|j| {
            let (x, y) = (&a.sequences[j], &b.sequences[j]);
            (0..na * nb).map(|i| x[i % na] * vb + y[i % nb]).collect()
        })
        .collect();
    OcSet::new(
        sequences,
        a.alphabet() * b.alphabet(),
        OcProvenance::CrtProduct { left: Box::new(a.provenance.clone()), right: Box::new(b.provenance.clone()) },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum OcViolation {
    Repeated { sequence: usize, symbol: u32, first: usize, second: usize },
    Autocorrelation { sequence: usize, delay: usize, count: u64 },
    Crosscorrelation { pair: (usize, usize), delay: usize, count: u64 },
}

impl std::fmt::Display for OcViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OcViolation::Repeated { sequence, symbol, first, second } => {
                write!(f, "sequence {sequence} repeats symbol {symbol} at positions {first} and {second}")
            }
            OcViolation::Autocorrelation { sequence, delay, count } => {
                write!(f, "sequence {sequence} has autocorrelation {count} at delay {delay}")
            }
            OcViolation::Crosscorrelation { pair, delay, count } => {
                write!(f, "sequences {} and {} have crosscorrelation {count} at delay {delay}", pair.0, pair.1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OcReport {
    pub ok: bool,
    pub violations: Vec<OcViolation>,
}

/// Exhaustive check of nonrepetition, `H_a = 0` and `H_c ≤ 1`.
pub fn validate_oc(set: &OcSet) -> OcReport {
    validate_sequences(set.sequences())
}

pub fn validate_sequences(sequences: &[Vec<u32>]) -> OcReport {
    use rayon::prelude::*;

    let mut violations = Vec::new();
    for (i, row) in sequences.iter().enumerate() {
        let mut seen = HashMap::with_capacity(row.len());
        for (k, &s) in row.iter().enumerate() {
            if let Some(first) = seen.insert(s, k) {
                violations.push(OcViolation::Repeated { sequence: i, symbol: s, first, second: k });
            }
        }
    }
    let m = sequences.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let found: Vec<Vec<OcViolation>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let hist = delay_histogram(&sequences[i], &sequences[j], Engine::Indexed)
                .expect("rows of an OC set share one length");
            hist.into_iter()
                .enumerate()
                .filter_map(|(delay, count)| match i == j {
                    true if delay > 0 && count > 0 => {
                        Some(OcViolation::Autocorrelation { sequence: i, delay, count })
                    }
                    false if count > 1 => Some(OcViolation::Crosscorrelation { pair: (i, j), delay, count }),
                    _ => None,
                })
                .collect()
        })
        .collect();
    violations.extend(found.into_iter().flatten());
    OcReport { ok: violations.is_empty(), violations }
}

/// A family named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcFamily {
    Linear(u64),
    Affine(u64),
    Product(u64, u64),
}

impl std::str::FromStr for OcFamily {
    type Err = OcError;
    fn from_str(spec: &str) -> Result<Self, OcError> {
        let bad = || OcError::BadSpec(spec.to_string());
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        match kind.trim() {
            "linear" => Ok(OcFamily::Linear(num(rest)?)),
            "affine" => Ok(OcFamily::Affine(num(rest)?)),
            "product" => {
                let (k, p) = rest.split_once(',').ok_or_else(bad)?;
                Ok(OcFamily::Product(num(k)?, num(p)?))
            }
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for OcFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OcFamily::Linear(k) => write!(f, "linear:{k}"),
            OcFamily::Affine(q) => write!(f, "affine:{q}"),
            OcFamily::Product(k, q) => write!(f, "product:{k},{q}"),
        }
    }
}

impl OcFamily {
    /// `(n, s; v)` without building any sequence.
    pub fn params(&self) -> Result<OcParams, OcError> {
        match *self {
            OcFamily::Linear(k) => {
                let lpf = least_prime_factor(k).ok_or(OcError::TooShort(k))?;
                Ok(OcParams { n: k, s: lpf - 1, v: k })
            }
            OcFamily::Affine(q) => {
                prime_power(q).ok_or(OcError::NotPrimePower(q))?;
                Ok(OcParams { n: q - 1, s: q, v: q })
            }
            OcFamily::Product(k, q) => {
                let a = OcFamily::Linear(k).params()?;
                let b = OcFamily::Affine(q).params()?;
                if gcd(a.n, b.n) != 1 {
                    return Err(OcError::NotCoprime(a.n, b.n));
                }
                Ok(OcParams { n: a.n * b.n, s: a.s.min(b.s), v: a.v * b.v })
            }
        }
    }

    pub fn build(&self) -> Result<OcSet, OcError> {
        self.params()?;
        match *self {
            OcFamily::Linear(k) => oc_linear(k),
            OcFamily::Affine(q) if is_prime(q) => oc_affine(q),
            OcFamily::Affine(q) => oc_affine_field(q),
            OcFamily::Product(k, q) => oc_crt_product(&oc_linear(k)?, &OcFamily::Affine(q).build()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_family() {
        let c = oc_linear(5).unwrap();
        assert_eq!(c.params(), OcParams { n: 5, s: 4, v: 5 });
        assert!(validate_oc(&c).ok);
        let c = oc_linear(4).unwrap();
        assert_eq!(c.sequences(), &[vec![0, 1, 2, 3]]);
        let c = oc_linear(15).unwrap();
        assert_eq!(c.family_size(), 2);
        assert!(validate_oc(&c).ok);
        assert_eq!(oc_linear(1), Err(OcError::TooShort(1)));
    }

    #[test]
    fn affine_family() {
        let c = oc_affine(5).unwrap();
        assert_eq!(c.sequences()[0], vec![1, 2, 4, 3]);
        assert_eq!(c.sequences()[1], vec![2, 3, 0, 4]);
        assert!(validate_oc(&c).ok);
        let c = oc_affine(3).unwrap();
        assert_eq!(c.params(), OcParams { n: 2, s: 3, v: 3 });
        assert!(validate_oc(&c).ok);
        assert_eq!(oc_affine(9), Err(OcError::NotPrime(9)));
    }

    #[test]
    fn field_affine_matches_prime_case_and_extends() {
        for p in [3, 5, 7, 11] {
            assert_eq!(oc_affine_field(p).unwrap(), oc_affine(p).unwrap());
        }
        for q in [4, 8, 9, 25, 81] {
            let c = oc_affine_field(q).unwrap();
            assert_eq!(c.params(), OcParams { n: q - 1, s: q, v: q });
            assert!(validate_oc(&c).ok, "q = {q}");
        }
        assert_eq!(oc_affine_field(12), Err(OcError::NotPrimePower(12)));
    }

    #[test]
    fn crt_products() {
        let c = oc_crt_product(&oc_linear(5).unwrap(), &oc_affine(3).unwrap()).unwrap();
        assert_eq!(c.params(), OcParams { n: 10, s: 3, v: 15 });
        assert!(validate_oc(&c).ok);
        let c = oc_crt_product(&oc_linear(11).unwrap(), &oc_affine(5).unwrap()).unwrap();
        assert_eq!(c.params(), OcParams { n: 44, s: 5, v: 55 });
        assert!(validate_oc(&c).ok);
        let c = oc_crt_product(&oc_linear(9).unwrap(), &oc_affine(5).unwrap()).unwrap();
        assert_eq!(c.family_size(), 2);
        let single = oc_crt_product(&oc_linear(3).unwrap(), &oc_linear(4).unwrap()).unwrap();
        assert_eq!(single.family_size(), 1);
        assert!(validate_oc(&single).ok);
        assert_eq!(
            oc_crt_product(&oc_linear(4).unwrap(), &oc_affine(5).unwrap()),
            Err(OcError::NotCoprime(4, 4))
        );
    }

    #[test]
    fn violations_are_reported() {
        let bad = OcSet::new(vec![vec![0, 1], vec![1, 0]], 2, OcProvenance::Imported).unwrap();
        let rep = validate_oc(&bad);
        assert!(!rep.ok);
        assert!(rep.violations.contains(&OcViolation::Crosscorrelation { pair: (0, 1), delay: 1, count: 2 }));

        let rep = validate_sequences(&[vec![0, 1, 0]]);
        assert!(rep.violations.iter().any(|v| matches!(v, OcViolation::Repeated { symbol: 0, .. })));
        assert!(rep.violations.iter().any(|v| matches!(v, OcViolation::Autocorrelation { .. })));
    }

    #[test]
    fn family_specs() {
        let f: OcFamily = "product:79,81".parse().unwrap();
        assert_eq!(f, OcFamily::Product(79, 81));
        assert_eq!(f.params().unwrap(), OcParams { n: 6320, s: 78, v: 6399 });
        assert_eq!(f.to_string(), "product:79,81");
        assert_eq!("linear:79".parse::<OcFamily>().unwrap().params().unwrap(), OcParams { n: 79, s: 78, v: 79 });
        assert_eq!("affine:729".parse::<OcFamily>().unwrap().params().unwrap(), OcParams { n: 728, s: 729, v: 729 });
        assert!("cubic:3".parse::<OcFamily>().is_err());
        assert!("product:79".parse::<OcFamily>().is_err());
        for spec in ["linear:15", "affine:9", "product:11,5"] {
            let f: OcFamily = spec.parse().unwrap();
            let c = f.build().unwrap();
            assert_eq!(c.params(), f.params().unwrap());
        }
    }

    #[test]
    fn provenance_rebuilds() {
        for f in [OcFamily::Linear(15), OcFamily::Affine(9), OcFamily::Product(11, 5)] {
            let c = f.build().unwrap();
            assert_eq!(c.provenance().rebuild().unwrap(), c);
        }
        let c = oc_linear(5).unwrap().padded(9).unwrap();
        assert_eq!(c.provenance().rebuild().unwrap(), c);
    }

    #[test]
    fn padding() {
        let c = oc_linear(5).unwrap().padded(7).unwrap();
        assert_eq!(c.params(), OcParams { n: 5, s: 4, v: 7 });
        assert!(validate_oc(&c).ok);
        assert!(oc_linear(5).unwrap().padded(3).is_err());
    }
}
