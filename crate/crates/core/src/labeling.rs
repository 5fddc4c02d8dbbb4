//! The labeling polynomial `φ(x) = ∏_{g∈G} ∏_{β∈V} (x + g + β)` and the
//! table of its values on the coset classes, which is the frequency-slot
//! alphabet.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::galois::FieldCtx;
use crate::partition::PartitionScheme;

/// Above this degree `φ` is expanded through the subspace polynomial of `V`
/// rather than factor by factor.
pub const DIRECT_EXPANSION_MAX_DEGREE: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("classes {first} and {second} share the label {value}")]
    LabelCollision { first: usize, second: usize, value: u32 },
}

/// Dense monic polynomial over `F_{q^m}`, low degree first.
#[derive(Debug, Clone)]
pub struct PhiPolynomial {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<u32>,
}

impl PartialEq for PhiPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl PhiPolynomial {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation at the code `x`.
    pub fn eval_code(&self, x: u32) -> u32 {
        let ctx = &self.ctx;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| ctx.add_codes(ctx.mul_codes(acc, x), c))
    }
}

/// Expands `φ` for the scheme's `G` and `V`.
pub fn build_phi(scheme: &PartitionScheme) -> PhiPolynomial {
    let degree = scheme.group_codes().len() * scheme.subspace().members.len();
    if degree <= DIRECT_EXPANSION_MAX_DEGREE {
        expand_linear_factors(scheme)
    } else {
        expand_via_subspace_polynomial(scheme)
    }
}

/// Multiplies out the `r·q^t` linear factors one at a time.
pub fn expand_linear_factors(scheme: &PartitionScheme) -> PhiPolynomial {
    let ctx = scheme.ctx();
    let members = &scheme.subspace().members;
    let mut coeffs = vec![1u32];
    for &g in scheme.group_codes() {
        for &beta in members {
            let c = ctx.add_codes(g, beta);
            // (Σ a_i x^i)(x + c)
            coeffs.push(0);
            for i in (0..coeffs.len()).rev() {
                let lower = if i > 0 { coeffs[i - 1] } else { 0 };
                coeffs[i] = ctx.add_codes(lower, ctx.mul_codes(c, coeffs[i]));
            }
        }
    }
    PhiPolynomial { ctx: ctx.clone(), coeffs }
}

/// Uses `∏_{β∈V}(y + β) = L(y)`, an `F_q`-linear polynomial, so that
/// `φ(x) = ∏_{g∈G}(L(x) + g·L(1)) = L(x)^r − (−L(1))^r` since `G` is the
/// group of `r`-th roots of unity.
pub fn expand_via_subspace_polynomial(scheme: &PartitionScheme) -> PhiPolynomial {
    let ctx = scheme.ctx();
    let q = ctx.q() as u64;
    // lin[i] is the coefficient of y^(q^i).
    let mut lin: Vec<u32> = vec![1];
    let eval_lin = |lin: &[u32], y: u32| {
        let mut acc = 0u32;
        let mut yp = y;
        for &c in lin {
            acc = ctx.add_codes(acc, ctx.mul_codes(c, yp));
            yp = ctx.pow_code(yp, q);
        }
        acc
    };
    for &b in &scheme.subspace().basis {
        // L'(y) = L(y)^q − L(b)^(q−1)·L(y)
        let w = ctx.pow_code(eval_lin(&lin, b), q - 1);
        let mut next = vec![0u32; lin.len() + 1];
        for (i, &c) in lin.iter().enumerate() {
            next[i + 1] = ctx.pow_code(c, q);
        }
        for (i, &c) in lin.iter().enumerate() {
            next[i] = ctx.sub_codes(next[i], ctx.mul_codes(w, c));
        }
        lin = next;
    }
    let l_one = lin.iter().fold(0, |acc, &c| ctx.add_codes(acc, c));

    let terms: Vec<(usize, u32)> = lin
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (q.pow(i as u32) as usize, c))
        .collect();
    let top = terms.last().map_or(1, |&(d, _)| d);
    let r = scheme.r() as usize;
    let mut coeffs = vec![1u32];
    for _ in 0..r {
        let mut next = vec![0u32; coeffs.len() + top];
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(d, c) in &terms {
                next[i + d] = ctx.add_codes(next[i + d], ctx.mul_codes(a, c));
            }
        }
        coeffs = next;
    }
    let constant = ctx.pow_code(ctx.neg_code(l_one), r as u64);
    coeffs[0] = ctx.sub_codes(coeffs[0], constant);
    PhiPolynomial { ctx: ctx.clone(), coeffs }
}

/// `φ`-values of the classes. Slot `i` (0-based) holds the value on class
/// `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTable {
    labels: Vec<u32>,
    index_of_label: HashMap<u32, u32>,
}

impl SlotTable {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Slot holding the field value `value`, if any class takes it.
    pub fn slot_of_label(&self, value: u32) -> Option<u32> {
        self.index_of_label.get(&value).copied()
    }
}

/// Evaluates `φ` once per class and checks the values are pairwise distinct.
pub fn build_slot_table(scheme: &PartitionScheme, phi: &PhiPolynomial) -> Result<SlotTable, LabelError> {
    let labels: Vec<u32> = scheme.rep_codes().iter().map(|&a| phi.eval_code(a)).collect();
    let mut index_of_label = HashMap::with_capacity(labels.len());
    for (i, &v) in labels.iter().enumerate() {
        if let Some(prev) = index_of_label.insert(v, i as u32) {
            return Err(LabelError::LabelCollision {
                first: prev as usize + 1,
                second: i + 1,
                value: v,
            });
        }
    }
    Ok(SlotTable { labels, index_of_label })
}
