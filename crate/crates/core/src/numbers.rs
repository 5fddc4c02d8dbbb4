//! Small integer helpers: primality, factoring, and exact ceilings.

/// Deterministic trial-division primality test. Inputs here never exceed a
/// few billion, so trial division up to the square root is plenty.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors of `n` in increasing order. Empty for `n <= 1`.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least prime factor of `k > 1`.
pub fn least_prime_factor(k: u64) -> Option<u64> {
    prime_factors(k).first().copied()
}

/// Splits `n` as `p^a` with `p` prime, if possible.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let factors = prime_factors(n);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut a = 0;
    let mut rest = n;
    while rest % p == 0 {
        rest /= p;
        a += 1;
    }
    Some((p, a))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact `ceil(num / den)` for `den > 0`.
pub fn ceil_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    if num.rem_euclid(den) == 0 {
        q
    } else {
        q + 1
    }
}

/// Smallest primitive root modulo the prime `p`.
pub fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&d| pow_mod(g, (p - 1) / d, p) != 1))
        .expect("every prime has a primitive root")
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_factors() {
        let primes: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(prime_factors(80), vec![2, 5]);
        assert_eq!(prime_factors(728), vec![2, 7, 13]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
        assert_eq!(least_prime_factor(15), Some(3));
        assert_eq!(least_prime_factor(79), Some(79));
        assert_eq!(prime_power(81), Some((3, 4)));
        assert_eq!(prime_power(80), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_div(82080, 14546), 6);
        assert_eq!(ceil_div(10, 5), 2);
        assert_eq!(ceil_div(0, 7), 0);
        assert_eq!(ceil_div(-3, 2), -1);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(smallest_primitive_root(5), 2);
        assert_eq!(smallest_primitive_root(7), 3);
        assert_eq!(smallest_primitive_root(79), 3);
    }
}
