//! Periodic Hamming correlation, set profiles, the Peng-Fan floor and the
//! optimality conditions of the direct construction.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fhs::{FhsSet, Provenance, SetError, SetParams};
use crate::numbers::ceil_div;

/// Above this many `N·M²` comparisons [`Engine::Auto`] switches to the
/// indexed engine.
pub const AUTO_INDEXED_THRESHOLD: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrelationError {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("delay {tau} out of range for length {len}")]
    DelayOutOfRange { tau: usize, len: usize },
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Naive,
    Indexed,
    Auto,
}

impl Engine {
    /// Concrete engine for a set of `m` sequences of length `n`.
    pub fn resolve(self, n: usize, m: usize) -> Engine {
        match self {
            Engine::Auto => {
                let work = n as u64 * (m as u64).pow(2);
                if work > AUTO_INDEXED_THRESHOLD {
                    Engine::Indexed
                } else {
                    Engine::Naive
                }
            }
            e => e,
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Naive => "naive",
            Engine::Indexed => "indexed",
            Engine::Auto => "auto",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Engine::Naive),
            "indexed" => Ok(Engine::Indexed),
            "auto" => Ok(Engine::Auto),
            _ => Err(format!("unknown engine {s:?}; expected naive, indexed or auto")),
        }
    }
}

/// `H_xy(τ) = Σ_i [x_i = y_{(i+τ) mod N}]`.
pub fn hamming_correlation(x: &[u32], y: &[u32], tau: usize) -> Result<u64, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if tau >= n.max(1) {
        return Err(CorrelationError::DelayOutOfRange { tau, len: n });
    }
    Ok(count_at(x, y, tau))
}

fn count_at(x: &[u32], y: &[u32], tau: usize) -> u64 {
    let n = x.len();
    let (head, tail) = y.split_at(tau);
    let hits_a = x[..n - tau].iter().zip(tail).filter(|(a, b)| a == b).count();
    let hits_b = x[n - tau..].iter().zip(head).filter(|(a, b)| a == b).count();
    (hits_a + hits_b) as u64
}

/// Positions of every slot in one sequence, in compressed row form.
#[derive(Debug, Clone)]
pub struct SlotIndex {
    offsets: Vec<u32>,
    positions: Vec<u32>,
}

impl SlotIndex {
    pub fn new(seq: &[u32], alphabet: usize) -> Self {
        let mut offsets = vec![0u32; alphabet + 1];
        for &s in seq {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..alphabet {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut positions = vec![0u32; seq.len()];
        for (i, &s) in seq.iter().enumerate() {
            positions[fill[s as usize] as usize] = i as u32;
            fill[s as usize] += 1;
        }
        SlotIndex { offsets, positions }
    }

    pub fn positions(&self, slot: usize) -> &[u32] {
        &self.positions[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }

    fn alphabet(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// `H_xy(τ)` for every `τ ∈ [0, N)`.
pub fn delay_histogram(x: &[u32], y: &[u32], engine: Engine) -> Result<Vec<u64>, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    match engine.resolve(n, 2) {
        Engine::Indexed => {
            let alphabet = x.iter().chain(y).max().map_or(0, |&s| s as usize + 1);
            let ix = SlotIndex::new(x, alphabet);
            let iy = SlotIndex::new(y, alphabet);
            Ok(indexed_histogram(&ix, &iy, n).into_iter().map(u64::from).collect())
        }
        _ => Ok((0..n).map(|tau| count_at(x, y, tau)).collect()),
    }
}

fn indexed_histogram(ix: &SlotIndex, iy: &SlotIndex, n: usize) -> Vec<u32> {
    let mut hist = vec![0u32; n];
    for slot in 0..ix.alphabet() {
        let px = ix.positions(slot);
        if px.is_empty() {
            continue;
        }
        let py = iy.positions(slot);
        for &i in px {
            let i = i as usize;
            for &j in py {
                let j = j as usize;
                let d = if j >= i { j - i } else { j + n - i };
                hist[d] += 1;
            }
        }
    }
    hist
}

/// A pair of sequence indices and the delay where a maximum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pair: (usize, usize),
    pub delay: usize,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub ha: u64,
    pub hc: u64,
    pub hm: u64,
    /// First `(i, i, τ)` in lexicographic order reaching `H_a`.
    pub ha_witness: Option<Witness>,
    /// First `(i, j, τ)` with `i < j` reaching `H_c`.
    pub hc_witness: Option<Witness>,
    pub engine: Engine,
}

/// `H_a`, `H_c` and `H_m` of a rectangular array of sequences.
pub fn profile_of(sequences: &[Vec<u32>], engine: Engine) -> Result<Profile, CorrelationError> {
    let n = sequences.first().map_or(0, Vec::len);
    if let Some(bad) = sequences.iter().find(|s| s.len() != n) {
        return Err(CorrelationError::LengthMismatch { left: n, right: bad.len() });
    }
    let m = sequences.len();
    let engine = engine.resolve(n, m);
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();

    let best: Vec<Option<Witness>> = match engine {
        Engine::Indexed => {
            let alphabet = sequences.iter().flatten().max().map_or(0, |&s| s as usize + 1);
            let index: Vec<SlotIndex> = sequences.par_iter().map(|s| SlotIndex::new(s, alphabet)).collect();
            pairs
                .par_iter()
                .map(|&(i, j)| {
                    let hist = indexed_histogram(&index[i], &index[j], n);
                    best_delay((i, j), hist.iter().map(|&h| h as u64))
                })
                .collect()
        }
        _ => pairs
            .par_iter()
            .map(|&(i, j)| best_delay((i, j), (0..n).map(|tau| count_at(&sequences[i], &sequences[j], tau))))
            .collect(),
    };

    let mut ha_witness: Option<Witness> = None;
    let mut hc_witness: Option<Witness> = None;
    for w in best.into_iter().flatten() {
        let slot = if w.pair.0 == w.pair.1 { &mut ha_witness } else { &mut hc_witness };
        if slot.is_none_or(|cur| w.value > cur.value) {
            *slot = Some(w);
        }
    }
    let ha = ha_witness.map_or(0, |w| w.value);
    let hc = hc_witness.map_or(0, |w| w.value);
    Ok(Profile { ha, hc, hm: ha.max(hc), ha_witness, hc_witness, engine })
}

/// Largest value over the delays that count for the pair, earliest delay on ties.
fn best_delay(pair: (usize, usize), hist: impl Iterator<Item = u64>) -> Option<Witness> {
    let skip = usize::from(pair.0 == pair.1);
    let mut best: Option<Witness> = None;
    for (delay, value) in hist.enumerate().skip(skip) {
        if best.is_none_or(|b| value > b.value) {
            best = Some(Witness { pair, delay, value });
        }
    }
    best
}

pub fn correlation_profile(set: &FhsSet, engine: Engine) -> Result<Profile, CorrelationError> {
    set.params_of()?;
    profile_of(set.sequences(), engine)
}

/// `⌈(NM − ℓ)·N / ((NM − 1)·ℓ)⌉`, clamped at zero.
pub fn peng_fan_bound(n: u64, m: u64, ell: u64) -> u64 {
    let (n, m, ell) = (n as i128, m as i128, ell as i128);
    let nm = n * m;
    if nm <= 1 || ell == 0 {
        return 0;
    }
    ceil_div((nm - ell) * n, (nm - 1) * ell).max(0) as u64
}

/// The optimality inequalities of the direct construction, for
/// `N = q^m − 1` and `e = (q^{m−t} − 1)/r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DirectFlags {
    /// `(eN − (e+1))/(eN − 1) · N/(e+1) > r·q^t − 1`, compared over the integers.
    pub eq1: bool,
    /// `eN² − (e³ + (e²+e)(q^t−1) + 1)N + (e+1)(q^t−1+e)`.
    pub eq2_value: i128,
    /// Holds when `eq2_value < 0`; the two conditions coincide.
    pub eq2: bool,
    /// `N < e² + (e+1)q^t − 3e`.
    pub sufficient_condition: bool,
}

pub fn direct_flags(q: u64, m: u32, t: u32, r: u32) -> DirectFlags {
    let q = q as i128;
    let n = q.pow(m) - 1;
    let qt = q.pow(t);
    let e = (q.pow(m - t) - 1) / r as i128;
    let lambda = r as i128 * qt;

    let den = (e * n - 1) * (e + 1);
    let eq1 = den > 0 && (e * n - e - 1) * n > (lambda - 1) * den;
    let eq2_value = e * n * n - (e.pow(3) + (e * e + e) * (qt - 1) + 1) * n + (e + 1) * (qt - 1 + e);
    let sufficient_condition = n < e * e + (e + 1) * qt - 3 * e;
    DirectFlags { eq1, eq2_value, eq2: eq2_value < 0, sufficient_condition }
}

/// Largest number of occurrences of a single slot across the whole set.
pub fn max_appearance(set: &FhsSet) -> Result<u64, CorrelationError> {
    set.params_of()?;
    Ok(max_appearance_of(set.sequences(), set.alphabet()))
}

pub(crate) fn max_appearance_of(sequences: &[Vec<u32>], alphabet: usize) -> u64 {
    let mut counts = vec![0u64; alphabet];
    for &s in sequences.iter().flatten() {
        counts[s as usize] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub profile_secs: f64,
    pub appearance_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub params: SetParams,
    pub profile: Profile,
    pub peng_fan: u64,
    pub is_optimal: bool,
    /// Present only for sets from the direct construction.
    pub direct: Option<DirectFlags>,
    pub max_appearance: u64,
    pub timing: Timing,
}

impl CorrelationReport {
    /// Computed `H_m` does not exceed the declared `λ`, if any.
    pub fn within_declared(&self) -> bool {
        self.params.lambda.is_none_or(|l| self.profile.hm <= l)
    }
}

pub fn optimality_report(set: &FhsSet, engine: Engine) -> Result<CorrelationReport, CorrelationError> {
    let params = set.params_of()?;
    let start = Instant::now();
    let profile = profile_of(set.sequences(), engine)?;
    let profile_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let max_appearance = max_appearance_of(set.sequences(), set.alphabet());
    let appearance_secs = start.elapsed().as_secs_f64();

    let peng_fan = peng_fan_bound(params.length, params.family_size, params.alphabet);
    let direct = match *set.provenance() {
        Provenance::Direct { q, m, t, r, .. } => Some(direct_flags(q, m, t, r)),
        _ => None,
    };
    Ok(CorrelationReport {
        params,
        is_optimal: profile.hm == peng_fan,
        profile,
        peng_fan,
        direct,
        max_appearance,
        timing: Timing { profile_secs, appearance_secs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhs::{generate_fhs_set, FhsParams};

    fn naive_recount(x: &[u32], y: &[u32], tau: usize) -> u64 {
        let n = x.len();
        (0..n).filter(|&i| x[i] == y[(i + tau) % n]).count() as u64
    }

    #[test]
    fn basic_correlations() {
        let x = [0, 1, 2];
        assert_eq!(hamming_correlation(&x, &x, 0).unwrap(), 3);
        assert_eq!(hamming_correlation(&x, &[2, 0, 1], 1).unwrap(), 3);
        assert_eq!(hamming_correlation(&x, &[2, 0, 1], 0).unwrap(), 0);
        assert!(matches!(
            hamming_correlation(&x, &[0, 1], 0),
            Err(CorrelationError::LengthMismatch { left: 3, right: 2 })
        ));
        assert!(hamming_correlation(&x, &x, 3).is_err());
    }

    #[test]
    fn small_set_matches_recount() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 2, 0, 2)).unwrap();
        let seqs = set.sequences();
        for x in seqs {
            for y in seqs {
                let naive = delay_histogram(x, y, Engine::Naive).unwrap();
                let indexed = delay_histogram(x, y, Engine::Indexed).unwrap();
                assert_eq!(naive, indexed);
                for (tau, &h) in naive.iter().enumerate() {
                    assert_eq!(h, naive_recount(x, y, tau));
                }
            }
        }
        let p = correlation_profile(&set, Engine::Naive).unwrap();
        assert_eq!(p.hm, 2);
        let w = p.hc_witness.unwrap();
        assert_eq!(naive_recount(&seqs[w.pair.0], &seqs[w.pair.1], w.delay), p.hc);
    }

    #[test]
    fn example_profiles() {
        let set = generate_fhs_set(FhsParams::new(3, 1, 4, 1, 2)).unwrap();
        let rep = optimality_report(&set, Engine::Naive).unwrap();
        assert_eq!(rep.profile.hm, 6);
        assert_eq!(rep.peng_fan, 6);
        assert!(rep.is_optimal);
        assert_eq!(rep.max_appearance, 77);
        assert_eq!(correlation_profile(&set, Engine::Indexed).unwrap().hm, 6);
    }

    #[test]
    fn shift_symmetry() {
        let set = generate_fhs_set(FhsParams::new(5, 1, 2, 1, 2)).unwrap();
        let n = set.length();
        let (x, y) = (&set.sequences()[0], &set.sequences()[1]);
        for tau in 0..n {
            assert_eq!(
                hamming_correlation(x, y, tau).unwrap(),
                hamming_correlation(y, x, (n - tau) % n).unwrap()
            );
        }
    }

    #[test]
    fn peng_fan_values() {
        assert_eq!(peng_fan_bound(80, 13, 14), 6);
        assert_eq!(peng_fan_bound(342, 16, 17), 21);
        assert_eq!(peng_fan_bound(728, 40, 41), 18);
        assert_eq!(peng_fan_bound(12, 4, 5), 3);
        assert_eq!(peng_fan_bound(9, 1, 9), 0);
        assert_eq!(peng_fan_bound(1, 1, 1), 0);
        assert_eq!(peng_fan_bound(2, 1, 5), 0);
    }

    #[test]
    fn flags_on_examples() {
        let f = direct_flags(3, 4, 1, 2);
        assert!(f.eq1 && f.eq2 && f.sufficient_condition);
        assert_eq!(f.eq2_value, -121550);
        // (12,4,3;5): optimal, yet the sufficient condition fails
        let f = direct_flags(13, 1, 0, 3);
        assert!(f.eq1 && f.eq2);
        assert!(!f.sufficient_condition);
        // (342,16,21;17): same situation
        let f = direct_flags(7, 3, 1, 3);
        assert!(f.eq1 && f.eq2 && !f.sufficient_condition);
    }

    #[test]
    fn degenerate_t0_set() {
        let set = generate_fhs_set(FhsParams::new(13, 1, 1, 0, 3)).unwrap();
        assert_eq!(set.params_of().unwrap().to_string(), "(12,4,3;5)");
        let rep = optimality_report(&set, Engine::Auto).unwrap();
        assert_eq!(rep.profile.hm, 3);
        assert!(rep.is_optimal);
        assert!(!rep.direct.unwrap().sufficient_condition);
    }

    #[test]
    fn constant_sequence_appearance() {
        let set = FhsSet::new(vec![vec![0, 0, 0]], 1, None, Provenance::Imported).unwrap();
        assert_eq!(max_appearance(&set).unwrap(), 3);
        let rep = optimality_report(&set, Engine::Naive).unwrap();
        assert!(rep.direct.is_none());
        assert_eq!(rep.profile.ha, 3);
        assert_eq!(rep.profile.hc_witness, None);
    }

    #[test]
    fn distinct_symbols_have_zero_autocorrelation() {
        let set = FhsSet::new(vec![(0..7).collect()], 7, None, Provenance::Imported).unwrap();
        assert_eq!(correlation_profile(&set, Engine::Indexed).unwrap().ha, 0);
    }
}
