//! Primality testing, integer factorization and prime enumeration.
//!
//! Everything here is deterministic: Miller-Rabin uses a fixed witness set that is
//! exact for all 64-bit inputs, and Pollard's rho starts from fixed seeds.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1..u64::MAX {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!("rho exhausted all increments for {n}")
}

fn factor_u64_into(n: u64, out: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = rho_u64(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Prime factorization of a positive 64-bit integer as `prime -> exponent`.
pub fn factor_u64(mut n: u64) -> BTreeMap<u64, u32> {
    assert!(n > 0, "cannot factor zero");
    let mut out = BTreeMap::new();
    for p in [2u64, 3, 5, 7, 11, 13] {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    factor_u64_into(n, &mut out);
    out
}

fn is_probable_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rho_big(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if n.is_even() {
        return two;
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut x, mut y) = (two.clone(), two.clone());
        let mut d = BigUint::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

fn factor_big_into(n: BigUint, out: &mut BTreeMap<u64, u32>) {
    if n.is_one() {
        return;
    }
    if let Some(small) = n.to_u64() {
        for (p, e) in factor_u64(small) {
            *out.entry(p).or_insert(0) += e;
        }
        return;
    }
    if is_probable_prime_big(&n) {
        panic!("prime factor {n} does not fit in 64 bits");
    }
    let d = rho_big(&n);
    let rest = &n / &d;
    factor_big_into(d, out);
    factor_big_into(rest, out);
}

/// Prime factorization of a positive arbitrary-precision integer.
///
/// Prime factors are reported as `u64`; a prime factor of 64 bits or more panics.
pub fn factor_biguint(n: &BigUint) -> BTreeMap<u64, u32> {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut out = BTreeMap::new();
    factor_big_into(n.clone(), &mut out);
    out
}

/// The smallest prime that is `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut candidate = n.max(2);
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// Primes `>= start`, in increasing order.
pub fn primes_from(start: u64) -> impl Iterator<Item = u64> {
    let mut next = next_prime(start);
    std::iter::from_fn(move || {
        let current = next;
        next = next_prime(current + 1);
        Some(current)
    })
}

/// 1-based position of `p` among the primes `>= start`, or `None` when `p` is not such a prime.
pub fn prime_position(p: u64, start: u64) -> Option<u64> {
    if p < start || !is_prime(p) {
        return None;
    }
    Some((start..=p).filter(|&n| is_prime(n)).count() as u64)
}

/// The `index`-th prime `>= start`, 1-based.
pub fn nth_prime_from(start: u64, index: u64) -> u64 {
    assert!(index >= 1, "prime positions are 1-based");
    primes_from(start).nth((index - 1) as usize).expect("prime iterator is infinite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_match_trial_division() {
        for n in 0..5000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "n = {n}");
        }
    }

    #[test]
    fn large_primality() {
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(18_446_744_073_709_551_559));
        // strong pseudoprime to several small bases
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn factorization_multiplies_back() {
        for n in [1u64, 2, 12, 360, 1_000_000_007 * 3, 600_851_475_143, u64::MAX] {
            let f = factor_u64(n);
            let product: u128 = f.iter().map(|(&p, &e)| (p as u128).pow(e)).product();
            assert_eq!(product, n as u128);
            assert!(f.keys().all(|&p| is_prime(p)));
        }
    }

    #[test]
    fn big_factorization() {
        let n = BigUint::from(4_294_967_291u64) * BigUint::from(4_294_967_279u64) * 1024u32;
        let f = factor_biguint(&n);
        assert_eq!(f.get(&2), Some(&10));
        assert_eq!(f.get(&4_294_967_291), Some(&1));
        assert_eq!(f.get(&4_294_967_279), Some(&1));
    }

    #[test]
    fn prime_enumeration() {
        let odd: Vec<u64> = primes_from(3).take(5).collect();
        assert_eq!(odd, vec![3, 5, 7, 11, 13]);
        assert_eq!(nth_prime_from(3, 4), 11);
        assert_eq!(prime_position(11, 3), Some(4));
        assert_eq!(prime_position(2, 3), None);
        assert_eq!(prime_position(9, 3), None);
        assert_eq!(prime_position(2, 2), Some(1));
    }
}
