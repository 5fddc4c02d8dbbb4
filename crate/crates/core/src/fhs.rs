//! Frequency-hopping sequence sets and the coset-partition construction:
//! `s_i(k) = φ(θ^k + α_i)` for `k = 0..q^m − 2`, reported as slot indices.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldCtx, FieldError, FieldOptions};
use crate::labeling::{build_phi, build_slot_table, LabelError, PhiPolynomial, SlotTable};
use crate::oc::{OcParams, OcProvenance};
use crate::partition::{PartitionError, PartitionScheme};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("corrupt sequence set: {0}")]
    CorruptSet(String),
    #[error("index ({row}, {col}) out of range for a set of {rows} sequences of length {len}")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, len: usize },
}

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// `(N, M, λ; ℓ)`. `λ` is absent for sets that carry no claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetParams {
    #[serde(rename = "N")]
    pub length: u64,
    #[serde(rename = "M")]
    pub family_size: u64,
    #[serde(rename = "lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u64>,
    #[serde(rename = "ell")]
    pub alphabet: u64,
}

impl std::fmt::Display for SetParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.lambda {
            Some(l) => write!(f, "({},{},{};{})", self.length, self.family_size, l, self.alphabet),
            None => write!(f, "({},{},?;{})", self.length, self.family_size, self.alphabet),
        }
    }
}

/// Inputs of the direct construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FhsParams {
    pub p: u64,
    pub a: u32,
    pub m: u32,
    pub t: u32,
    pub r: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FhsParams {
    pub fn new(p: u64, a: u32, m: u32, t: u32, r: u32) -> Self {
        FhsParams { p, a, m, t, r, seed: None }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        FhsParams { seed: Some(seed), ..self }
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.a)
    }

    /// `e = (q^{m−t} − 1)/r`.
    pub fn e(&self) -> u64 {
        (self.q().pow(self.m - self.t) - 1) / self.r as u64
    }

    /// Parameters the construction promises:
    /// `(q^m − 1, e or e + 1, r·q^t; e + 1)`.
    pub fn expected(&self) -> SetParams {
        let q = self.q();
        let e = self.e();
        SetParams {
            length: q.pow(self.m) - 1,
            family_size: if self.r == 1 { e + 1 } else { e },
            lambda: Some(self.r as u64 * q.pow(self.t)),
            alphabet: e + 1,
        }
    }
}

/// Where a set came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Provenance {
    Direct {
        p: u64,
        a: u32,
        m: u32,
        t: u32,
        r: u32,
        q: u64,
        e: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Extended {
        base: Box<Provenance>,
        base_params: SetParams,
        oc: OcProvenance,
        oc_params: OcParams,
    },
    Imported,
}

impl Provenance {
    pub fn direct_params(&self) -> Option<FhsParams> {
        match *self {
            Provenance::Direct { p, a, m, t, r, seed, .. } => Some(FhsParams { p, a, m, t, r, seed }),
            _ => None,
        }
    }
}

/// `M` sequences of length `N` over slots `0..ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FhsSet {
    length: usize,
    alphabet: usize,
    declared_lambda: Option<u64>,
    sequences: Vec<Vec<u32>>,
    provenance: Provenance,
    slot_labels: Option<Vec<u32>>,
}

impl FhsSet {
    /// Wraps rows after checking they form a rectangular array over `0..alphabet`.
    pub fn new(
        sequences: Vec<Vec<u32>>,
        alphabet: usize,
        declared_lambda: Option<u64>,
        provenance: Provenance,
    ) -> Result<Self, SetError> {
        let length = sequences.first().map_or(0, Vec::len);
        let set = FhsSet { length, alphabet, declared_lambda, sequences, provenance, slot_labels: None };
        set.check_shape()?;
        Ok(set)
    }

    pub fn with_slot_labels(mut self, labels: Vec<u32>) -> Result<Self, SetError> {
        if labels.len() != self.alphabet {
            return Err(SetError::CorruptSet(format!(
                "{} slot labels for an alphabet of {}",
                labels.len(),
                self.alphabet
            )));
        }
        self.slot_labels = Some(labels);
        Ok(self)
    }

    fn check_shape(&self) -> Result<(), SetError> {
        if self.sequences.is_empty() {
            return Err(SetError::CorruptSet("no sequences".into()));
        }
        if self.length == 0 {
            return Err(SetError::CorruptSet("empty sequences".into()));
        }
        for (i, row) in self.sequences.iter().enumerate() {
            if row.len() != self.length {
                return Err(SetError::CorruptSet(format!(
                    "sequence {i} has length {} but sequence 0 has length {}",
                    row.len(),
                    self.length
                )));
            }
            if let Some(k) = row.iter().position(|&s| s as usize >= self.alphabet) {
                return Err(SetError::CorruptSet(format!(
                    "sequence {i} position {k} holds slot {} outside alphabet of {}",
                    row[k], self.alphabet
                )));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn family_size(&self) -> usize {
        self.sequences.len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn declared_lambda(&self) -> Option<u64> {
        self.declared_lambda
    }

    pub fn sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn slot_labels(&self) -> Option<&[u32]> {
        self.slot_labels.as_deref()
    }

    /// Stored parameters, after recounting rows, columns and symbols.
    pub fn params_of(&self) -> Result<SetParams, SetError> {
        self.check_shape()?;
        let used: HashSet<u32> = self.sequences.iter().flatten().copied().collect();
        if used.len() > self.alphabet {
            return Err(SetError::CorruptSet(format!(
                "{} distinct symbols exceed alphabet of {}",
                used.len(),
                self.alphabet
            )));
        }
        Ok(self.params())
    }

    pub(crate) fn params(&self) -> SetParams {
        SetParams {
            length: self.length as u64,
            family_size: self.sequences.len() as u64,
            lambda: self.declared_lambda,
            alphabet: self.alphabet as u64,
        }
    }

    pub fn sequence_at(&self, i: usize, k: usize) -> Result<u32, SetError> {
        self.sequences
            .get(i)
            .and_then(|row| row.get(k))
            .copied()
            .ok_or(SetError::IndexOutOfRange {
                row: i,
                col: k,
                rows: self.sequences.len(),
                len: self.length,
            })
    }

    /// Number of distinct symbols actually used.
    pub fn used_symbols(&self) -> usize {
        self.sequences.iter().flatten().copied().collect::<HashSet<_>>().len()
    }
}

/// Every intermediate object of one run of the construction.
#[derive(Debug, Clone)]
pub struct Construction {
    pub params: FhsParams,
    pub scheme: PartitionScheme,
    pub phi: PhiPolynomial,
    pub slots: SlotTable,
    pub set: FhsSet,
}

impl Construction {
    pub fn build(params: FhsParams) -> Result<Self, ConstructionError> {
        let ctx = Arc::new(FieldCtx::with_options(params.p, params.a, params.m, FieldOptions::default())?);
        let scheme = PartitionScheme::new(ctx.clone(), params.r, params.t, params.seed)?;
        let phi = build_phi(&scheme);
        let slots = build_slot_table(&scheme, &phi)?;

        // Class i carries slot i − 1; φ is constant on classes and takes
        // distinct values on distinct classes, so the slot of φ(x) is read
        // straight off the class map.
        let first = if params.r == 1 { 0 } else { 1 };
        let n = ctx.order() as usize - 1;
        let sequences: Vec<Vec<u32>> = scheme.rep_codes()[first..]
            .par_iter()
            .map(|&alpha| {
                let mut row = Vec::with_capacity(n);
                let mut x = 1u32;
                for k in 0..n {
                    if ctx.has_power_table() {
                        x = ctx.theta_pow(k as u64);
                    } else if k > 0 {
                        x = ctx.mul_codes(x, ctx.theta().code());
                    }
                    row.push(scheme.class_of_code(ctx.add_codes(x, alpha)) - 1);
                }
                row
            })
            .collect();

        let q = ctx.q() as u64;
        let provenance = Provenance::Direct {
            p: params.p,
            a: params.a,
            m: params.m,
            t: params.t,
            r: params.r,
            q,
            e: params.e(),
            seed: params.seed,
        };
        let lambda = params.r as u64 * q.pow(params.t);
        let set = FhsSet::new(sequences, scheme.ell(), Some(lambda), provenance)?
            .with_slot_labels(slots.labels().to_vec())?;
        Ok(Construction { params, scheme, phi, slots, set })
    }
}

/// Runs the construction and returns only the sequence set.
pub fn generate_fhs_set(params: FhsParams) -> Result<FhsSet, ConstructionError> {
    Construction::build(params).map(|c| c.set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_parameters() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 4, 1, 2)).unwrap();
        let params = set.params_of().unwrap();
        assert_eq!(params.to_string(), "(80,13,6;14)");
        assert_eq!(params, FhsParams::new(3, 1, 4, 1, 2).expected());
    }

    #[test]
    fn r_equals_one_includes_first_class() {
        let set = generate_fhs_set(FhsParams::new(2, 1, 3, 1, 1)).unwrap();
        assert_eq!(set.params_of().unwrap().to_string(), "(7,4,2;4)");
        assert_eq!(set.family_size(), set.alphabet());
    }

    #[test]
    fn first_column_is_phi_of_one_plus_alpha() {
        let c = Construction::build(FhsParams::new(3, 1, 2, 0, 2)).unwrap();
        let ctx = c.scheme.ctx();
        for (i, &alpha) in c.scheme.rep_codes()[1..].iter().enumerate() {
            let v = c.phi.eval_code(ctx.add_codes(1, alpha));
            assert_eq!(c.set.sequence_at(i, 0).unwrap(), c.slots.slot_of_label(v).unwrap());
        }
    }

    #[test]
    fn small_set_matches_factorwise_regeneration() {
        let c = Construction::build(FhsParams::new(3, 1, 2, 0, 2)).unwrap();
        let ctx = c.scheme.ctx();
        let factors: Vec<u32> = c
            .scheme
            .group_codes()
            .iter()
            .flat_map(|&g| c.scheme.subspace().members.iter().map(move |&b| (g, b)))
            .map(|(g, b)| ctx.add_codes(g, b))
            .collect();
        let phi = |x: u32| factors.iter().fold(1, |acc, &f| ctx.mul_codes(acc, ctx.add_codes(x, f)));
        for (i, &alpha) in c.scheme.rep_codes()[1..].iter().enumerate() {
            let mut x = 1u32;
            for k in 0..8 {
                let value = phi(ctx.add_codes(x, alpha));
                let slot = c.slots.labels().iter().position(|&l| l == value).unwrap() as u32;
                assert_eq!(c.set.sequence_at(i, k).unwrap(), slot);
                x = ctx.mul_codes(x, ctx.theta().code());
            }
        }
    }

    #[test]
    fn seeds_change_sequences_not_profiles() {
        use crate::correlation::{correlation_profile, Engine};
        for base in [FhsParams::new(3, 1, 4, 1, 2), FhsParams::new(5, 1, 3, 2, 4), FhsParams::new(2, 2, 3, 1, 3)] {
            let reference = generate_fhs_set(base).unwrap();
            let ref_profile = correlation_profile(&reference, Engine::Naive).unwrap();
            let mut differs = false;
            for seed in 0..4 {
                let set = generate_fhs_set(base.with_seed(seed)).unwrap();
                let profile = correlation_profile(&set, Engine::Naive).unwrap();
                assert_eq!(set.params_of().unwrap(), reference.params_of().unwrap());
                assert_eq!((profile.ha, profile.hc, profile.hm), (ref_profile.ha, ref_profile.hc, ref_profile.hm));
                differs |= set.sequences() != reference.sequences();
            }
            assert!(differs, "{base:?}");
        }
    }

    #[test]
    fn accessor_bounds() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 2, 0, 2)).unwrap();
        assert!(set.sequence_at(0, 7).is_ok());
        assert!(matches!(set.sequence_at(0, 8), Err(SetError::IndexOutOfRange { .. })));
        assert!(matches!(set.sequence_at(4, 0), Err(SetError::IndexOutOfRange { .. })));
    }

    #[test]
    fn precondition_errors() {
        assert!(matches!(
            generate_fhs_set(FhsParams::new(3, 1, 4, 1, 4)),
            Err(ConstructionError::Partition(PartitionError::NotADivisor { .. }))
        ));
        assert!(matches!(
            generate_fhs_set(FhsParams::new(3, 1, 4, 4, 2)),
            Err(ConstructionError::Partition(PartitionError::DimensionOutOfRange { .. }))
        ));
        assert!(matches!(
            generate_fhs_set(FhsParams::new(6, 1, 2, 0, 1)),
            Err(ConstructionError::Field(FieldError::NotPrime(6)))
        ));
    }

    #[test]
    fn corrupt_sets_rejected() {
        assert!(FhsSet::new(vec![vec![0, 1], vec![0]], 2, None, Provenance::Imported).is_err());
        assert!(FhsSet::new(vec![vec![0, 2]], 2, None, Provenance::Imported).is_err());
        assert!(FhsSet::new(vec![], 2, None, Provenance::Imported).is_err());
    }
}
