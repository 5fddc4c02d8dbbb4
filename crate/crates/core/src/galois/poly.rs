//! Dense univariate polynomials over a small coefficient field, used only to
//! pick and apply the tower moduli. Coefficients are stored low degree first
//! as field codes; the zero polynomial is the empty vector.

use crate::numbers::prime_factors;

/// Coefficient arithmetic needed by the polynomial routines.
pub(crate) trait CoeffField {
    fn add(&self, x: u32, y: u32) -> u32;
    fn sub(&self, x: u32, y: u32) -> u32;
    fn mul(&self, x: u32, y: u32) -> u32;
    /// `x` must be nonzero.
    fn inv(&self, x: u32) -> u32;
    fn size(&self) -> u64;
}

/// Integers modulo a prime.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PrimeField(pub u32);

impl CoeffField for PrimeField {
    fn add(&self, x: u32, y: u32) -> u32 {
        ((x as u64 + y as u64) % self.0 as u64) as u32
    }
    fn sub(&self, x: u32, y: u32) -> u32 {
        ((x as u64 + self.0 as u64 - y as u64) % self.0 as u64) as u32
    }
    fn mul(&self, x: u32, y: u32) -> u32 {
        (x as u64 * y as u64 % self.0 as u64) as u32
    }
    fn inv(&self, x: u32) -> u32 {
        crate::numbers::pow_mod(x as u64, self.0 as u64 - 2, self.0 as u64) as u32
    }
    fn size(&self) -> u64 {
        self.0 as u64
    }
}

pub(crate) fn trim(p: &mut Vec<u32>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub(crate) fn degree(p: &[u32]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub(crate) fn mul<F: CoeffField>(f: &F, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn sub<F: CoeffField>(f: &F, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = f.sub(x, y);
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub(crate) fn rem<F: CoeffField>(f: &F, a: &[u32], m: &[u32]) -> Vec<u32> {
    let dm = degree(m).expect("modulus must be nonzero");
    let lead_inv = f.inv(m[dm]);
    let mut r = a.to_vec();
    trim(&mut r);
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let c = f.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &mc) in m[..=dm].iter().enumerate() {
            if mc != 0 {
                r[i + shift] = f.sub(r[i + shift], f.mul(c, mc));
            }
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn mulmod<F: CoeffField>(f: &F, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    rem(f, &mul(f, a, b), m)
}

pub(crate) fn powmod<F: CoeffField>(f: &F, base: &[u32], mut exp: u64, m: &[u32]) -> Vec<u32> {
    let mut acc = rem(f, &[1], m);
    let mut b = rem(f, base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(f, &acc, &b, m);
        }
        exp >>= 1;
        if exp > 0 {
            b = mulmod(f, &b, &b, m);
        }
    }
    acc
}

pub(crate) fn gcd<F: CoeffField>(f: &F, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(d) = degree(&x) {
        let inv = f.inv(x[d]);
        for c in x.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    x
}

pub(crate) fn eval<F: CoeffField>(f: &F, p: &[u32], x: u32) -> u32 {
    p.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Irreducibility over the coefficient field: a root search for degree at
/// most 3, Rabin's test otherwise.
pub(crate) fn is_irreducible<F: CoeffField>(f: &F, p: &[u32]) -> bool {
    let n = match degree(p) {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    if n <= 3 {
        return (0..f.size()).all(|x| eval(f, p, x as u32) != 0);
    }
    let x = vec![0, 1];
    let size = f.size();
    // frob[k] = x^(Q^k) mod p
    let mut frob = Vec::with_capacity(n + 1);
    frob.push(rem(f, &x, p));
    for k in 1..=n {
        let next = powmod(f, &frob[k - 1], size, p);
        frob.push(next);
    }
    if frob[n] != rem(f, &x, p) {
        return false;
    }
    prime_factors(n as u64).into_iter().all(|d| {
        let k = n / d as usize;
        let g = gcd(f, &sub(f, &frob[k], &x), p);
        degree(&g) == Some(0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibles_over_f2() {
        let f = PrimeField(2);
        // x^2 + x + 1, x^3 + x + 1, x^4 + x + 1 are irreducible
        assert!(is_irreducible(&f, &[1, 1, 1]));
        assert!(is_irreducible(&f, &[1, 1, 0, 1]));
        assert!(is_irreducible(&f, &[1, 1, 0, 0, 1]));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(!is_irreducible(&f, &[1, 0, 1, 0, 1]));
        // x^2 + 1 = (x + 1)^2
        assert!(!is_irreducible(&f, &[1, 0, 1]));
    }

    #[test]
    fn rabin_matches_brute_force_count() {
        // Number of monic irreducibles of degree 4 over F_3 is (81 - 9) / 4 = 18.
        let f = PrimeField(3);
        let count = (0..81u32)
            .filter(|&c| {
                let poly = vec![c % 3, (c / 3) % 3, (c / 9) % 3, c / 27, 1];
                is_irreducible(&f, &poly)
            })
            .count();
        assert_eq!(count, 18);
        // Degree 5 over F_2: (32 - 2) / 5 = 6.
        let f = PrimeField(2);
        let count = (0..32u32)
            .filter(|&c| {
                let poly: Vec<u32> = (0..5).map(|i| (c >> i) & 1).chain([1]).collect();
                is_irreducible(&f, &poly)
            })
            .count();
        assert_eq!(count, 6);
    }

    #[test]
    fn gcd_and_rem() {
        let f = PrimeField(5);
        // (x+1)(x+2) and (x+1)(x+3) share x+1
        let a = mul(&f, &[1, 1], &[2, 1]);
        let b = mul(&f, &[1, 1], &[3, 1]);
        assert_eq!(gcd(&f, &a, &b), vec![1, 1]);
        assert_eq!(rem(&f, &a, &[1, 1]), Vec::<u32>::new());
    }
}
