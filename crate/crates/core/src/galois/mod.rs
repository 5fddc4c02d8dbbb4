//! Exact arithmetic in the tower `F_p ⊂ F_q ⊂ F_{q^m}` with `q = p^a`.
//!
//! Elements are identified by a canonical integer code. An element of
//! `F_{q^m}` is a polynomial `c_0 + c_1 X + … + c_{m-1} X^{m-1}` over `F_q`,
//! and each `c_j` is a polynomial `d_0 + d_1 y + … + d_{a-1} y^{a-1}` over
//! `F_p`. The code reads those residues as a little-endian mixed-radix
//! number, `Σ_j code(c_j)·q^j` with `code(c_j) = Σ_l d_l·p^l`, so `0` is
//! zero, `1` is one, and `F_q` is embedded as the codes below `q`.
//!
//! Both moduli are the smallest irreducible monic polynomials when the
//! lower coefficients are compared as the integer `Σ c_i Q^i`, and `θ` is
//! the smallest-coded element of order `q^m − 1`. Construction is therefore
//! reproducible without any fixed tables.

mod poly;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numbers::{is_prime, prime_factors};
use poly::{CoeffField, PrimeField};

/// Default cap on `q^m`.
pub const DEFAULT_SIZE_CAP: u64 = 1 << 24;
/// Dense power/log tables are built at or below this field size.
pub const TABLE_THRESHOLD: u64 = 1 << 20;

const MAX_DIGITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degrees must be positive (a = {a}, m = {m})")]
    InvalidDegree { a: u32, m: u32 },
    #[error("field size {size} exceeds the configured cap {cap}")]
    SizeCapExceeded { size: u128, cap: u64 },
    #[error("no irreducible polynomial of degree {degree} found over a field of order {base}")]
    NoIrreducibleFound { degree: u32, base: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different field contexts")]
    MixedContexts,
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("index {index} out of range for a field of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("coordinate vector has the wrong shape or a residue out of range")]
    BadCoordinates,
    #[error("`{op}` takes {expected} operand(s), got {got}")]
    Arity { op: &'static str, expected: usize, got: usize },
}

/// Adds two base-`p` digit strings without carry.
#[inline]
fn digit_add(p: u32, x: u32, y: u32) -> u32 {
    if p == 2 {
        return x ^ y;
    }
    let (mut x, mut y) = (x, y);
    let mut out = 0u32;
    let mut place = 1u32;
    while x != 0 || y != 0 {
        let s = x % p + y % p;
        out += if s >= p { s - p } else { s } * place;
        x /= p;
        y /= p;
        if x != 0 || y != 0 {
            place *= p;
        }
    }
    out
}

#[inline]
fn digit_neg(p: u32, x: u32) -> u32 {
    if p == 2 {
        return x;
    }
    let mut x = x;
    let mut out = 0u32;
    let mut place = 1u32;
    while x != 0 {
        let d = x % p;
        if d != 0 {
            out += (p - d) * place;
        }
        x /= p;
        if x != 0 {
            place *= p;
        }
    }
    out
}

/// The middle field `F_q = F_p[y]/(f(y))`, elements coded below `q`.
#[derive(Debug, Clone)]
pub struct Subfield {
    p: u32,
    a: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

#[derive(Debug, Clone)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Tables {
    fn build(order: u32, generator: u32, mut mul: impl FnMut(u32, u32) -> u32) -> Self {
        let len = (order - 1) as usize;
        let mut exp = Vec::with_capacity(len);
        let mut log = vec![u32::MAX; order as usize];
        let mut x = 1u32;
        for k in 0..len {
            exp.push(x);
            log[x as usize] = k as u32;
            x = mul(x, generator);
        }
        Tables { exp, log }
    }

    #[inline]
    fn mul(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            return 0;
        }
        let n = self.exp.len() as u64;
        let k = (self.log[x as usize] as u64 + self.log[y as usize] as u64) % n;
        self.exp[k as usize]
    }

    #[inline]
    fn pow(&self, x: u32, e: u64) -> u32 {
        if x == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = self.exp.len() as u64;
        let k = (self.log[x as usize] as u64 * (e % n)) % n;
        self.exp[k as usize]
    }
}

impl Subfield {
    fn new(p: u32, a: u32) -> Result<Self, FieldError> {
        let q = p.pow(a);
        let base = PrimeField(p);
        let modulus = smallest_irreducible(&base, a, p as u64)?;
        let mut sub = Subfield { p, a, q, modulus, tables: None };
        if a > 1 && (q as u64) <= TABLE_THRESHOLD {
            let g = (1..q)
                .find(|&x| sub.is_primitive(x))
                .expect("a finite field has a primitive element");
            let tables = Tables::build(q, g, |x, y| sub.mul_slow(x, y));
            sub.tables = Some(tables);
        }
        Ok(sub)
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Monic modulus over `F_p`, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, x: u32, y: u32) -> u32 {
        if self.a == 1 {
            let s = x + y;
            return if s >= self.p { s - self.p } else { s };
        }
        digit_add(self.p, x, y)
    }

    #[inline]
    pub fn neg(&self, x: u32) -> u32 {
        if self.a == 1 {
            return if x == 0 { 0 } else { self.p - x };
        }
        digit_neg(self.p, x)
    }

    #[inline]
    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        if self.a == 1 {
            return (x as u64 * y as u64 % self.p as u64) as u32;
        }
        match &self.tables {
            Some(t) => t.mul(x, y),
            None => self.mul_slow(x, y),
        }
    }

    pub fn pow(&self, x: u32, mut e: u64) -> u32 {
        if let Some(t) = &self.tables {
            return t.pow(x, e);
        }
        let mut acc = 1u32;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, x: u32) -> Option<u32> {
        (x != 0).then(|| self.pow(x, self.q as u64 - 2))
    }

    fn mul_slow(&self, x: u32, y: u32) -> u32 {
        let a = self.a as usize;
        let p = self.p as u64;
        let (mut xd, mut yd) = ([0u64; MAX_DIGITS], [0u64; MAX_DIGITS]);
        let (mut xs, mut ys) = (x, y);
        for i in 0..a {
            xd[i] = (xs % self.p) as u64;
            yd[i] = (ys % self.p) as u64;
            xs /= self.p;
            ys /= self.p;
        }
        let mut prod = [0u64; 2 * MAX_DIGITS];
        for i in 0..a {
            if xd[i] == 0 {
                continue;
            }
            for j in 0..a {
                prod[i + j] = (prod[i + j] + xd[i] * yd[j]) % p;
            }
        }
        for k in (a..2 * a - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            // y^a = -(f_0 + … + f_{a-1} y^{a-1})
            for i in 0..a {
                let f = self.modulus[i] as u64;
                prod[k - a + i] = (prod[k - a + i] + (p - f) % p * c) % p;
            }
        }
        (0..a).rev().fold(0u32, |acc, i| acc * self.p + prod[i] as u32)
    }

    fn is_primitive(&self, x: u32) -> bool {
        if x == 0 {
            return false;
        }
        let n = self.q as u64 - 1;
        prime_factors(n).into_iter().all(|d| self.pow_slow(x, n / d) != 1)
    }

    fn pow_slow(&self, x: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, b);
            }
            b = self.mul_slow(b, b);
            e >>= 1;
        }
        acc
    }
}

impl CoeffField for Subfield {
    fn add(&self, x: u32, y: u32) -> u32 {
        Subfield::add(self, x, y)
    }
    fn sub(&self, x: u32, y: u32) -> u32 {
        Subfield::sub(self, x, y)
    }
    fn mul(&self, x: u32, y: u32) -> u32 {
        Subfield::mul(self, x, y)
    }
    fn inv(&self, x: u32) -> u32 {
        Subfield::inv(self, x).expect("nonzero")
    }
    fn size(&self) -> u64 {
        self.q as u64
    }
}

/// Smallest monic irreducible polynomial of the given degree, comparing the
/// lower coefficients as the integer `Σ c_i·size^i`.
fn smallest_irreducible<F: CoeffField>(
    field: &F,
    degree: u32,
    size: u64,
) -> Result<Vec<u32>, FieldError> {
    let count = (size as u128).pow(degree);
    let mut candidate = vec![0u32; degree as usize + 1];
    candidate[degree as usize] = 1;
    for code in 0..count {
        let mut c = code;
        for slot in candidate.iter_mut().take(degree as usize) {
            *slot = (c % size as u128) as u32;
            c /= size as u128;
        }
        if poly::is_irreducible(field, &candidate) {
            return Ok(candidate);
        }
    }
    Err(FieldError::NoIrreducibleFound { degree, base: size })
}

/// Construction options for [`FieldCtx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldOptions {
    /// When set, `θ` is drawn uniformly from the primitive elements using
    /// this seed instead of taking the smallest one.
    pub seed: Option<u64>,
    pub size_cap: u64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions { seed: None, size_cap: DEFAULT_SIZE_CAP }
    }
}

/// An element of `F_{q^m}` bound to the context that created it.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Element {
    code: u32,
    tag: u32,
}

impl Element {
    /// Canonical integer encoding.
    pub fn code(self) -> u32 {
        self.code
    }

    pub fn is_zero(self) -> bool {
        self.code == 0
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({})", self.code)
    }
}

/// Operators accepted by [`FieldCtx::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
    /// Raise the single operand to the given power.
    Pow(i64),
}

/// The tower `F_p ⊂ F_q ⊂ F_{q^m}` with a fixed primitive element `θ`.
///
/// Immutable once built; share it behind an `Arc`.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    sub: Subfield,
    m: u32,
    order: u32,
    outer_modulus: Vec<u32>,
    theta: u32,
    tag: u32,
    group_factors: Vec<u64>,
    tables: Option<Tables>,
}

impl FieldCtx {
    /// Builds the deterministic tower for `q = p^a`, `F_{q^m}`.
    pub fn new(p: u64, a: u32, m: u32) -> Result<Self, FieldError> {
        Self::with_options(p, a, m, FieldOptions::default())
    }

    pub fn with_options(p: u64, a: u32, m: u32, opts: FieldOptions) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if a == 0 || m == 0 {
            return Err(FieldError::InvalidDegree { a, m });
        }
        let size = (p as u128)
            .checked_pow(a.saturating_mul(m))
            .unwrap_or(u128::MAX);
        if size > opts.size_cap as u128 || size > u32::MAX as u128 {
            return Err(FieldError::SizeCapExceeded { size, cap: opts.size_cap });
        }
        let p = p as u32;
        let sub = Subfield::new(p, a)?;
        let q = sub.q;
        let outer_modulus = smallest_irreducible(&sub, m, q as u64)?;
        let order = size as u32;
        let group_factors = prime_factors(order as u64 - 1);

        let mut ctx = FieldCtx {
            sub,
            m,
            order,
            outer_modulus,
            theta: 0,
            tag: 0,
            group_factors,
            tables: None,
        };
        ctx.theta = match opts.seed {
            None => (1..order)
                .find(|&x| ctx.is_primitive_slow(x))
                .expect("a finite field has a primitive element"),
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                loop {
                    let x = rng.random_range(1..order);
                    if ctx.is_primitive_slow(x) {
                        break x;
                    }
                }
            }
        };
        if order as u64 <= TABLE_THRESHOLD {
            let theta = ctx.theta;
            let tables = Tables::build(order, theta, |x, y| ctx.mul_slow(x, y));
            ctx.tables = Some(tables);
        }
        ctx.tag = ctx.fingerprint();
        Ok(ctx)
    }

    fn fingerprint(&self) -> u32 {
        // FNV-1a over everything that determines the arithmetic.
        let mut h: u32 = 0x811c_9dc5;
        let words = [self.sub.p, self.sub.a, self.m, self.theta]
            .into_iter()
            .chain(self.sub.modulus.iter().copied())
            .chain(self.outer_modulus.iter().copied());
        for w in words {
            for b in w.to_le_bytes() {
                h ^= b as u32;
                h = h.wrapping_mul(0x0100_0193);
            }
        }
        h
    }

    pub fn p(&self) -> u32 {
        self.sub.p
    }

    pub fn a(&self) -> u32 {
        self.sub.a
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.sub.q
    }

    /// `q^m`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn subfield(&self) -> &Subfield {
        &self.sub
    }

    /// Monic modulus of `F_q` over `F_p`, low degree first.
    pub fn inner_modulus(&self) -> &[u32] {
        &self.sub.modulus
    }

    /// Monic modulus of `F_{q^m}` over `F_q` as `F_q` codes, low degree first.
    pub fn outer_modulus(&self) -> &[u32] {
        &self.outer_modulus
    }

    pub fn has_power_table(&self) -> bool {
        self.tables.is_some()
    }

    pub fn theta(&self) -> Element {
        self.wrap(self.theta)
    }

    pub fn zero(&self) -> Element {
        self.wrap(0)
    }

    pub fn one(&self) -> Element {
        self.wrap(1)
    }

    #[inline]
    fn wrap(&self, code: u32) -> Element {
        Element { code, tag: self.tag }
    }

    fn check(&self, x: Element) -> Result<u32, FieldError> {
        if x.tag == self.tag {
            Ok(x.code)
        } else {
            Err(FieldError::MixedContexts)
        }
    }

    /// Element with the given canonical code.
    pub fn decode(&self, index: u64) -> Result<Element, FieldError> {
        if index >= self.order as u64 {
            return Err(FieldError::IndexOutOfRange { index, order: self.order as u64 });
        }
        Ok(self.wrap(index as u32))
    }

    pub fn encode(&self, x: Element) -> Result<u32, FieldError> {
        self.check(x)
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order).map(|c| self.wrap(c))
    }

    /// Coordinates of `x`: `m` vectors of `a` residues modulo `p`.
    pub fn coords(&self, x: Element) -> Result<Vec<Vec<u32>>, FieldError> {
        let mut code = self.check(x)?;
        let (p, q) = (self.sub.p, self.sub.q);
        Ok((0..self.m)
            .map(|_| {
                let mut c = code % q;
                code /= q;
                (0..self.sub.a)
                    .map(|_| {
                        let d = c % p;
                        c /= p;
                        d
                    })
                    .collect()
            })
            .collect())
    }

    pub fn from_coords(&self, coords: &[Vec<u32>]) -> Result<Element, FieldError> {
        let (p, a) = (self.sub.p, self.sub.a as usize);
        if coords.len() != self.m as usize
            || coords.iter().any(|c| c.len() != a || c.iter().any(|&d| d >= p))
        {
            return Err(FieldError::BadCoordinates);
        }
        let code = coords
            .iter()
            .rev()
            .flat_map(|c| c.iter().rev())
            .fold(0u32, |acc, &d| acc * p + d);
        Ok(self.wrap(code))
    }

    /// Embeds an `F_q` code as an element of `F_{q^m}`.
    pub fn from_subfield(&self, c: u32) -> Result<Element, FieldError> {
        if c >= self.sub.q {
            return Err(FieldError::IndexOutOfRange { index: c as u64, order: self.sub.q as u64 });
        }
        Ok(self.wrap(c))
    }

    // ---- raw code arithmetic (callers guarantee codes belong to this field)

    #[inline]
    pub fn add_codes(&self, x: u32, y: u32) -> u32 {
        digit_add(self.sub.p, x, y)
    }

    #[inline]
    pub fn neg_code(&self, x: u32) -> u32 {
        digit_neg(self.sub.p, x)
    }

    #[inline]
    pub fn sub_codes(&self, x: u32, y: u32) -> u32 {
        digit_add(self.sub.p, x, digit_neg(self.sub.p, y))
    }

    #[inline]
    pub fn mul_codes(&self, x: u32, y: u32) -> u32 {
        match &self.tables {
            Some(t) => t.mul(x, y),
            None => self.mul_slow(x, y),
        }
    }

    /// `x^e` for `e >= 0`; `0^0 = 1`.
    pub fn pow_code(&self, x: u32, e: u64) -> u32 {
        if let Some(t) = &self.tables {
            return t.pow(x, e);
        }
        if x == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        self.pow_slow(x, e % (self.order as u64 - 1))
    }

    pub fn inv_code(&self, x: u32) -> Option<u32> {
        (x != 0).then(|| self.pow_code(x, self.order as u64 - 2))
    }

    /// `θ^k`.
    #[inline]
    pub fn theta_pow(&self, k: u64) -> u32 {
        match &self.tables {
            Some(t) => t.exp[(k % t.exp.len() as u64) as usize],
            None => self.pow_code(self.theta, k),
        }
    }

    /// Discrete logarithm base `θ`, available when the power table exists.
    pub fn log_code(&self, x: u32) -> Option<u32> {
        let t = self.tables.as_ref()?;
        let l = *t.log.get(x as usize)?;
        (l != u32::MAX).then_some(l)
    }

    fn mul_slow(&self, x: u32, y: u32) -> u32 {
        let m = self.m as usize;
        let q = self.sub.q;
        if m == 1 {
            return self.sub.mul(x, y);
        }
        let (mut xc, mut yc) = ([0u32; MAX_DIGITS], [0u32; MAX_DIGITS]);
        let (mut xs, mut ys) = (x, y);
        for i in 0..m {
            xc[i] = xs % q;
            yc[i] = ys % q;
            xs /= q;
            ys /= q;
        }
        let mut prod = [0u32; 2 * MAX_DIGITS];
        for i in 0..m {
            if xc[i] == 0 {
                continue;
            }
            for j in 0..m {
                if yc[j] != 0 {
                    prod[i + j] = self.sub.add(prod[i + j], self.sub.mul(xc[i], yc[j]));
                }
            }
        }
        for k in (m..2 * m - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..m {
                let f = self.outer_modulus[i];
                if f != 0 {
                    let t = self.sub.mul(c, f);
                    prod[k - m + i] = self.sub.sub(prod[k - m + i], t);
                }
            }
        }
        (0..m).rev().fold(0u32, |acc, i| acc * q + prod[i])
    }

    fn pow_slow(&self, x: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul_slow(b, b);
            }
        }
        acc
    }

    fn is_primitive_slow(&self, x: u32) -> bool {
        let n = self.order as u64 - 1;
        x != 0 && self.group_factors.iter().all(|&d| self.pow_slow(x, n / d) != 1)
    }

    // ---- checked element arithmetic

    pub fn add(&self, x: Element, y: Element) -> Result<Element, FieldError> {
        Ok(self.wrap(self.add_codes(self.check(x)?, self.check(y)?)))
    }

    pub fn sub(&self, x: Element, y: Element) -> Result<Element, FieldError> {
        Ok(self.wrap(self.sub_codes(self.check(x)?, self.check(y)?)))
    }

    pub fn neg(&self, x: Element) -> Result<Element, FieldError> {
        Ok(self.wrap(self.neg_code(self.check(x)?)))
    }

    pub fn mul(&self, x: Element, y: Element) -> Result<Element, FieldError> {
        Ok(self.wrap(self.mul_codes(self.check(x)?, self.check(y)?)))
    }

    pub fn inv(&self, x: Element) -> Result<Element, FieldError> {
        let c = self.check(x)?;
        self.inv_code(c).map(|v| self.wrap(v)).ok_or(FieldError::DivisionByZero)
    }

    /// `x^e` for any integer exponent; negative exponents need `x ≠ 0`.
    pub fn pow(&self, x: Element, e: i64) -> Result<Element, FieldError> {
        let c = self.check(x)?;
        if c == 0 {
            return match e.signum() {
                0 => Ok(self.one()),
                1 => Ok(self.zero()),
                _ => Err(FieldError::DivisionByZero),
            };
        }
        let n = self.order as i128 - 1;
        let k = (e as i128).rem_euclid(n) as u64;
        Ok(self.wrap(self.pow_code(c, k)))
    }

    /// Dispatches one of the field operators over a list of operands.
    pub fn arith(&self, op: ArithOp, operands: &[Element]) -> Result<Element, FieldError> {
        let need = |name: &'static str, expected: usize| {
            if operands.len() == expected {
                Ok(())
            } else {
                Err(FieldError::Arity { op: name, expected, got: operands.len() })
            }
        };
        match op {
            ArithOp::Add => need("add", 2).and_then(|_| self.add(operands[0], operands[1])),
            ArithOp::Sub => need("sub", 2).and_then(|_| self.sub(operands[0], operands[1])),
            ArithOp::Mul => need("mul", 2).and_then(|_| self.mul(operands[0], operands[1])),
            ArithOp::Inv => need("inv", 1).and_then(|_| self.inv(operands[0])),
            ArithOp::Neg => need("neg", 1).and_then(|_| self.neg(operands[0])),
            ArithOp::Pow(e) => need("pow", 1).and_then(|_| self.pow(operands[0], e)),
        }
    }

    /// Least `k ≥ 1` with `x^k = 1`, found by stripping prime factors from
    /// `q^m − 1`.
    pub fn element_order(&self, x: Element) -> Result<u64, FieldError> {
        let c = self.check(x)?;
        if c == 0 {
            return Err(FieldError::ZeroElement);
        }
        let mut ord = self.order as u64 - 1;
        for &d in &self.group_factors {
            while ord % d == 0 && self.pow_code(c, ord / d) == 1 {
                ord /= d;
            }
        }
        Ok(ord)
    }
}
