//! The multiplicative subgroup `G ⊆ F_q^*`, the `F_q`-subspace `V`, and the
//! partition of `F_{q^m}` into classes `∪_{g∈G}(α_i g + V)`.
//!
//! Class indices are 1-based; class 1 is `V` itself and `α_1 = 0`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::galois::{Element, FieldCtx, Subfield};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("r = {r} does not divide q - 1 = {q_minus_1}")]
    NotADivisor { r: u32, q_minus_1: u32 },
    #[error("subspace dimension t = {t} must satisfy 0 <= t <= m - 1 = {max}")]
    DimensionOutOfRange { t: u32, max: u32 },
    #[error("coset classes do not partition the field: {0}")]
    InternalCoverageError(String),
}

/// `{ω^{j(q−1)/r} : 0 ≤ j < r}` with `ω = θ^{(q^m−1)/(q−1)}`, sorted by code.
pub fn build_subgroup(ctx: &FieldCtx, r: u32) -> Result<Vec<Element>, PartitionError> {
    Ok(subgroup_codes(ctx, r)?
        .into_iter()
        .map(|c| ctx.decode(c as u64).expect("subgroup code in range"))
        .collect())
}

fn subgroup_codes(ctx: &FieldCtx, r: u32) -> Result<Vec<u32>, PartitionError> {
    let q1 = ctx.q() - 1;
    if r == 0 || q1 % r != 0 {
        return Err(PartitionError::NotADivisor { r, q_minus_1: q1 });
    }
    let n1 = ctx.order() as u64 - 1;
    let omega = ctx.theta_pow(n1 / q1 as u64);
    let step = ctx.pow_code(omega, (q1 / r) as u64);
    let mut out = Vec::with_capacity(r as usize);
    let mut g = 1u32;
    for _ in 0..r {
        out.push(g);
        g = ctx.mul_codes(g, step);
    }
    out.sort_unstable();
    Ok(out)
}

/// A `t`-dimensional `F_q`-subspace of `F_{q^m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    /// Basis in reduced echelon form (for the default basis, `1, X, …, X^{t−1}`).
    pub basis: Vec<u32>,
    /// All `q^t` members, `0` first.
    pub members: Vec<u32>,
}

/// Default basis is the first `t` coordinate vectors of the outer extension.
/// With a seed, a uniformly random subspace: random bases are drawn until one
/// has full rank, then reduced to echelon form.
pub fn build_subspace(ctx: &FieldCtx, t: u32, seed: Option<u64>) -> Result<Subspace, PartitionError> {
    if t >= ctx.m() {
        return Err(PartitionError::DimensionOutOfRange { t, max: ctx.m() - 1 });
    }
    let q = ctx.q();
    let basis: Vec<u32> = match seed {
        None => (0..t).map(|j| q.pow(j)).collect(),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5b5a);
            loop {
                let mut rows: Vec<Vec<u32>> = (0..t)
                    .map(|_| to_vector(ctx, rng.random_range(0..ctx.order())))
                    .collect();
                if rref(ctx.subfield(), &mut rows) == t as usize {
                    break rows.iter().map(|v| from_vector(ctx, v)).collect();
                }
            }
        }
    };
    let members = span(ctx, &basis);
    Ok(Subspace { basis, members })
}

fn to_vector(ctx: &FieldCtx, mut code: u32) -> Vec<u32> {
    let q = ctx.q();
    (0..ctx.m())
        .map(|_| {
            let c = code % q;
            code /= q;
            c
        })
        .collect()
}

fn from_vector(ctx: &FieldCtx, v: &[u32]) -> u32 {
    v.iter().rev().fold(0, |acc, &c| acc * ctx.q() + c)
}

/// Reduces `rows` (vectors over `F_q`) to reduced row echelon form in place,
/// dropping zero rows. Returns the rank.
fn rref(f: &Subfield, rows: &mut Vec<Vec<u32>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    // Pivot on high coordinates first so echelon rows read naturally as codes.
    for col in (0..width).rev() {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = f.inv(rows[rank][col]).expect("pivot is nonzero");
        for c in rows[rank].iter_mut() {
            *c = f.mul(*c, inv);
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let factor = rows[i][col];
                for j in 0..width {
                    let t = f.mul(factor, rows[rank][j]);
                    rows[i][j] = f.sub(rows[i][j], t);
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rank
}

/// Every `F_q`-combination of `basis`.
fn span(ctx: &FieldCtx, basis: &[u32]) -> Vec<u32> {
    let mut members = vec![0u32];
    for &b in basis {
        let mut next = Vec::with_capacity(members.len() * ctx.q() as usize);
        for c in 0..ctx.q() {
            let cb = ctx.mul_codes(c, b);
            next.extend(members.iter().map(|&x| ctx.add_codes(x, cb)));
        }
        members = next;
    }
    members
}

/// Greedy choice of `α_1 = 0, α_2, …, α_ℓ`: each new representative is the
/// first element (in `order`) not yet covered. Returns the representatives
/// and the dense class map (1-based).
fn select_reps(
    ctx: &FieldCtx,
    group: &[u32],
    members: &[u32],
    order: impl Iterator<Item = u32>,
) -> Result<(Vec<u32>, Vec<u32>), PartitionError> {
    let n = ctx.order() as usize;
    let mut class_of = vec![0u32; n];
    for &v in members {
        class_of[v as usize] = 1;
    }
    let mut reps = vec![0u32];
    let mut covered = members.len();
    for x in order {
        if class_of[x as usize] != 0 {
            continue;
        }
        reps.push(x);
        let label = reps.len() as u32;
        for &g in group {
            let base = ctx.mul_codes(x, g);
            for &v in members {
                let y = ctx.add_codes(base, v) as usize;
                if class_of[y] != 0 {
                    return Err(PartitionError::InternalCoverageError(format!(
                        "element {y} reached by classes {} and {label}",
                        class_of[y]
                    )));
                }
                class_of[y] = label;
                covered += 1;
            }
        }
    }
    if covered != n {
        return Err(PartitionError::InternalCoverageError(format!(
            "{covered} of {n} elements covered"
        )));
    }
    Ok((reps, class_of))
}

/// Representatives `α_1..α_ℓ` for the given group and subspace, scanning in
/// canonical encoding order.
pub fn select_coset_reps(
    ctx: &FieldCtx,
    group: &[Element],
    subspace: &Subspace,
) -> Result<Vec<Element>, PartitionError> {
    let codes: Vec<u32> = group.iter().map(|g| g.code()).collect();
    let (reps, _) = select_reps(ctx, &codes, &subspace.members, 0..ctx.order())?;
    Ok(reps
        .into_iter()
        .map(|c| ctx.decode(c as u64).expect("rep in range"))
        .collect())
}

/// `G`, `V`, the representatives, and the total class map.
#[derive(Debug, Clone)]
pub struct PartitionScheme {
    ctx: Arc<FieldCtx>,
    r: u32,
    t: u32,
    group: Vec<u32>,
    subspace: Subspace,
    reps: Vec<u32>,
    class_of: Vec<u32>,
}

impl PartitionScheme {
    /// Builds the scheme. Without a seed everything is canonical; a seed
    /// randomizes both the subspace and the greedy scan order.
    pub fn new(ctx: Arc<FieldCtx>, r: u32, t: u32, seed: Option<u64>) -> Result<Self, PartitionError> {
        let group = subgroup_codes(&ctx, r)?;
        let subspace = build_subspace(&ctx, t, seed)?;
        let (reps, class_of) = match seed {
            None => select_reps(&ctx, &group, &subspace.members, 0..ctx.order())?,
            Some(seed) => {
                let mut order: Vec<u32> = (0..ctx.order()).collect();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                select_reps(&ctx, &group, &subspace.members, order.into_iter())?
            }
        };
        let expected = 1 + (ctx.q() as u64).pow(ctx.m() - t).saturating_sub(1) / r as u64;
        if reps.len() as u64 != expected {
            return Err(PartitionError::InternalCoverageError(format!(
                "found {} classes, expected {expected}",
                reps.len()
            )));
        }
        Ok(PartitionScheme { ctx, r, t, group, subspace, reps, class_of })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Number of classes, `1 + (q^{m−t} − 1)/r`.
    pub fn ell(&self) -> usize {
        self.reps.len()
    }

    pub fn group_codes(&self) -> &[u32] {
        &self.group
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// `α_1..α_ℓ` as codes.
    pub fn rep_codes(&self) -> &[u32] {
        &self.reps
    }

    pub fn rep(&self, class: usize) -> Element {
        self.ctx.decode(self.reps[class - 1] as u64).expect("rep in range")
    }

    /// Dense map from element code to class (1-based).
    pub fn class_map(&self) -> &[u32] {
        &self.class_of
    }

    #[inline]
    pub fn class_of_code(&self, code: u32) -> u32 {
        self.class_of[code as usize]
    }

    /// Class of `x`.
    ///
    /// # Panics
    /// If `x` belongs to a different field context.
    pub fn class_index(&self, x: Element) -> usize {
        let code = self.ctx.encode(x).expect("element from this scheme's field");
        self.class_of[code as usize] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, a: u32, m: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(p, a, m).unwrap())
    }

    #[test]
    fn subgroups() {
        let f3 = field(3, 1, 4);
        let g: Vec<u32> = build_subgroup(&f3, 2).unwrap().iter().map(|e| e.code()).collect();
        assert_eq!(g, vec![1, 2]);
        let g1: Vec<u32> = build_subgroup(&f3, 1).unwrap().iter().map(|e| e.code()).collect();
        assert_eq!(g1, vec![1]);
        // the order-3 subgroup of F_7^* is the set of cube roots of unity
        let f7 = field(7, 1, 3);
        let roots: Vec<u32> = (1..7u32).filter(|x| x * x * x % 7 == 1).collect();
        let g3: Vec<u32> = build_subgroup(&f7, 3).unwrap().iter().map(|e| e.code()).collect();
        assert_eq!(g3, roots);
        assert_eq!(g3, vec![1, 2, 4]);
        assert_eq!(
            build_subgroup(&f7, 4),
            Err(PartitionError::NotADivisor { r: 4, q_minus_1: 6 })
        );
    }

    #[test]
    fn default_subspace() {
        let f = field(3, 1, 4);
        let v0 = build_subspace(&f, 0, None).unwrap();
        assert_eq!(v0.members, vec![0]);
        let v1 = build_subspace(&f, 1, None).unwrap();
        let mut m = v1.members.clone();
        m.sort_unstable();
        assert_eq!(m, vec![0, 1, 2]);
        assert!(matches!(
            build_subspace(&f, 4, None),
            Err(PartitionError::DimensionOutOfRange { t: 4, max: 3 })
        ));
    }

    #[test]
    fn seeded_subspace_has_full_rank_and_closure() {
        let f = field(3, 1, 4);
        for seed in 0..5 {
            let v = build_subspace(&f, 2, Some(seed)).unwrap();
            assert_eq!(v.basis.len(), 2);
            let mut rows: Vec<Vec<u32>> = v.basis.iter().map(|&b| to_vector(&f, b)).collect();
            assert_eq!(rref(f.subfield(), &mut rows), 2);
            let set: std::collections::HashSet<u32> = v.members.iter().copied().collect();
            assert_eq!(set.len(), 9);
            for &x in &v.members {
                for &y in &v.members {
                    assert!(set.contains(&f.add_codes(x, y)));
                }
                for c in 0..3 {
                    assert!(set.contains(&f.mul_codes(c, x)));
                }
            }
        }
    }

    #[test]
    fn f9_partition_sizes() {
        let f = field(3, 1, 2);
        let s = PartitionScheme::new(f, 2, 0, None).unwrap();
        assert_eq!(s.ell(), 5);
        let mut sizes = vec![0; 6];
        for &c in s.class_map() {
            sizes[c as usize] += 1;
        }
        assert_eq!(sizes, vec![0, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn example_scheme_has_14_classes() {
        let s = PartitionScheme::new(field(3, 1, 4), 2, 1, None).unwrap();
        assert_eq!(s.ell(), 14);
        // 1 + 13·2 = 27 cosets of V, each of size 3
        let cosets: std::collections::HashSet<Vec<u32>> = s
            .rep_codes()
            .iter()
            .flat_map(|&a| {
                let s = &s;
                s.group_codes().iter().map(move |&g| {
                    let base = s.ctx().mul_codes(a, g);
                    let mut c: Vec<u32> = s
                        .subspace()
                        .members
                        .iter()
                        .map(|&v| s.ctx().add_codes(base, v))
                        .collect();
                    c.sort_unstable();
                    c
                })
            })
            .collect();
        assert_eq!(cosets.len(), 27);
    }

    #[test]
    fn trivial_group_gives_plain_cosets() {
        let s = PartitionScheme::new(field(2, 1, 4), 1, 2, None).unwrap();
        assert_eq!(s.ell(), 4);
        let s = PartitionScheme::new(field(5, 1, 2), 1, 1, None).unwrap();
        assert_eq!(s.ell(), 5);
    }

    #[test]
    fn class_index_of_scaled_reps() {
        let s = PartitionScheme::new(field(3, 1, 4), 2, 1, None).unwrap();
        let ctx = s.ctx().clone();
        assert_eq!(s.class_index(ctx.one()), 1);
        for &g in s.group_codes() {
            let x = ctx.decode(ctx.mul_codes(s.rep_codes()[4], g) as u64).unwrap();
            assert_eq!(s.class_index(x), 5);
        }
    }
}
