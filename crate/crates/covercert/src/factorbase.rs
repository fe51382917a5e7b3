//! Primality testing, desk-scale integer factorization, primitive prime
//! divisors of a^n - b^n, and the curated factor table for the numbers
//! 2^(2^m) + 1.
//!
//! Factorization is trial division to 10^6 followed by Brent-cycle rho with
//! a fixed seed schedule, so results are reproducible. An iteration budget
//! turns intractable inputs into an explicit `BudgetExceeded` instead of a
//! hang.
//!
//! The curated table exists because the witness chains need one prime factor
//! of 2^(2^m) + 1 for each m up to 18, and those factorizations are far out
//! of rho's reach. Every entry is re-verified at load (primality, the
//! 1 mod 2^(m+2) shape, and the divisibility itself), so the table is an
//! untrusted hint rather than an oracle.

use std::sync::OnceLock;

use rug::ops::{Pow, RemRounding};
use rug::Integer;

use crate::modmath;
use crate::{Error, Result};

const FERMAT_TABLE_TEXT: &str = include_str!("../data/fermat_factors.txt");

/// Total rho iterations allowed per `factorize` call.
const RHO_BUDGET: u64 = 200_000_000;
/// Rho budget for inputs beyond u64, where each step is a big-int multiply.
const RHO_BUDGET_BIG: u64 = 2_000_000;
const TRIAL_LIMIT: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Verified with the deterministic small-witness set (n < 2^64).
    Prime,
    /// Passed 40 Miller-Rabin rounds; no deterministic guarantee.
    ProbablePrime,
}

/// Prime factorization as ascending (prime, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorList {
    factors: Vec<(Integer, u32)>,
}

impl FactorList {
    pub fn iter(&self) -> impl Iterator<Item = &(Integer, u32)> {
        self.factors.iter()
    }

    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn reconstruct(&self) -> Integer {
        let mut acc = Integer::from(1);
        for (p, e) in &self.factors {
            acc *= Integer::from(p.pow(*e));
        }
        acc
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2usize;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (2..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // this witness set decides primality for all n < 2^64
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

struct Xorshift(u64);

impl Xorshift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
}

/// Primality with the proof status made explicit: deterministic below 2^64,
/// 40 Miller-Rabin rounds with a fixed base schedule above.
pub fn primality(n: &Integer) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    if *n < 0 {
        return Primality::Composite;
    }
    for &p in &small_primes()[..200] {
        if n.is_divisible_u(p) {
            return Primality::Composite;
        }
    }
    let nm1 = Integer::from(n - 1u32);
    let mut d = nm1.clone();
    let mut s = 0u64;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    let mut rng = Xorshift(0x9e3779b97f4a7c15);
    let span = Integer::from(n - 3u32);
    'round: for _ in 0..40 {
        let raw = Integer::from(rng.next()) * Integer::from(rng.next());
        let a = raw.rem_euc(&span) + 2u32;
        let mut x = modmath::mod_pow(&a, &d, n);
        if x == 1 || x == nm1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = x.square().rem_euc(n);
            if x == nm1 {
                continue 'round;
            }
        }
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

pub fn is_prime(n: &Integer) -> bool {
    primality(n) != Primality::Composite
}

/// Brent-cycle rho on u64, batching gcds. Returns a nontrivial factor or
/// None if this (x0, c) pair fails within the budget.
fn brent_rho_u64(n: u64, x0: u64, c: u64, budget: &mut u64) -> Option<u64> {
    let f = |x: u64| (mulmod_u64(x, x, n) + c) % n;
    let mut y = x0;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        if *budget < r {
            *budget = 0;
            return None;
        }
        *budget -= r;
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mulmod_u64(q, x.abs_diff(y), n);
            }
            if *budget < steps {
                *budget = 0;
                return None;
            }
            *budget -= steps;
            g = gcd_u64(q.max(1), n);
            k += steps;
        }
        r *= 2;
    }
    if g == n {
        // backtrack one step at a time
        loop {
            ys = f(ys);
            g = gcd_u64(x.abs_diff(ys).max(1), n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn brent_rho_big(n: &Integer, x0: u64, c: u64, budget: &mut u64) -> Option<Integer> {
    let f = |x: &Integer| (x.clone().square() + c).rem_euc(n);
    let mut y = Integer::from(x0);
    let mut r = 1u64;
    let mut q = Integer::from(1);
    let mut g = Integer::from(1);
    let mut x = y.clone();
    let mut ys = y.clone();
    const BATCH: u64 = 64;
    while g == 1 {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        if *budget < r {
            *budget = 0;
            return None;
        }
        *budget -= r;
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                let diff = Integer::from(&x - &y).abs();
                q = (q * diff).rem_euc(n);
            }
            if *budget < steps {
                *budget = 0;
                return None;
            }
            *budget -= steps;
            let probe = if q == 0 { Integer::from(1) } else { q.clone() };
            g = probe.gcd(n);
            k += steps;
        }
        r *= 2;
    }
    if g == *n {
        loop {
            ys = f(&ys);
            let diff = Integer::from(&x - &ys).abs().max(Integer::from(1));
            g = diff.gcd(n);
            if g > 1 {
                break;
            }
        }
    }
    if g == *n || g == 1 {
        None
    } else {
        Some(g)
    }
}

/// Complete factorization of `n >= 2`, or `BudgetExceeded` carrying the
/// stuck cofactor.
pub fn factorize(n: &Integer) -> Result<FactorList> {
    assert!(*n >= 2, "factorize needs n >= 2");
    let mut counts: Vec<(Integer, u32)> = Vec::new();
    let mut push = |p: Integer| {
        match counts.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => counts.push((p, 1)),
        };
    };

    let mut composites: Vec<Integer> = Vec::new();
    let mut m = n.clone();
    for &p in small_primes() {
        if Integer::from(p).square() > m {
            break;
        }
        while m.is_divisible_u(p) {
            m /= p;
            push(Integer::from(p));
        }
    }
    if m > 1 {
        composites.push(m);
    }

    let mut budget = RHO_BUDGET;
    let mut budget_big = RHO_BUDGET_BIG;
    while let Some(c) = composites.pop() {
        match primality(&c) {
            Primality::Prime | Primality::ProbablePrime => {
                push(c);
                continue;
            }
            Primality::Composite => {}
        }
        if let Some(small) = c.to_u64() {
            let mut found = None;
            for attempt in 1..=64u64 {
                if budget == 0 {
                    return Err(Error::BudgetExceeded(c));
                }
                if let Some(d) = brent_rho_u64(small, 2 + attempt, attempt, &mut budget) {
                    found = Some(d);
                    break;
                }
            }
            match found {
                Some(d) => {
                    composites.push(Integer::from(d));
                    composites.push(Integer::from(small / d));
                }
                None => return Err(Error::BudgetExceeded(c)),
            }
        } else {
            let mut found = None;
            for attempt in 1..=16u64 {
                if budget_big == 0 {
                    return Err(Error::BudgetExceeded(c));
                }
                if let Some(d) = brent_rho_big(&c, 2 + attempt, attempt, &mut budget_big) {
                    found = Some(d);
                    break;
                }
            }
            match found {
                Some(d) => {
                    let rest = Integer::from(&c / &d);
                    composites.push(d);
                    composites.push(rest);
                }
                None => return Err(Error::BudgetExceeded(c)),
            }
        }
    }
    counts.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(FactorList { factors: counts })
}

/// Outcome of a primitive-prime search: either the least prime dividing
/// a^n - b^n but no earlier a^i - b^i, or the marker for the two excluded
/// cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveOutcome {
    Prime(Integer),
    Exception,
}

/// Least primitive prime divisor of a^n - b^n. The two exceptional cases
/// ((a,b) = (2,1) with n = 6, and a+b a power of two with n = 2) return the
/// marker instead.
pub fn primitive_prime(a: &Integer, b: &Integer, n: u64) -> Result<PrimitiveOutcome> {
    assert!(*b >= 1 && a > b, "need a > b >= 1");
    assert!(Integer::from(a.gcd_ref(b)) == 1, "need gcd(a, b) = 1");
    assert!(n >= 2, "primitive primes start at n = 2");
    if *a == 2 && *b == 1 && n == 6 {
        return Ok(PrimitiveOutcome::Exception);
    }
    if n == 2 && modmath::is_power_of(&Integer::from(a + b), &Integer::from(2)) {
        return Ok(PrimitiveOutcome::Exception);
    }
    let e = u32::try_from(n).expect("exponent fits u32");
    let value = Integer::from(a.pow(e)) - Integer::from(b.pow(e));
    let factors = factorize(&value)?;
    let n_int = Integer::from(n);
    let n_factors = factorize(&n_int)?;
    for q in factors.primes() {
        // q never divides a or b here, so a*b^-1 exists mod q
        let t = Integer::from(a % q) * modmath::mod_inv(b, q).expect("coprime base");
        let t = t.rem_euc(q);
        if order_is(&t, q, n, &n_factors) {
            return Ok(PrimitiveOutcome::Prime(q.clone()));
        }
    }
    unreachable!("a primitive prime exists outside the two excluded cases")
}

/// ord(t mod q) == n, given the factorization of n.
fn order_is(t: &Integer, q: &Integer, n: u64, n_factors: &FactorList) -> bool {
    if *q == 2 {
        return false;
    }
    let n_int = Integer::from(n);
    if modmath::mod_pow(t, &n_int, q) != 1 {
        return false;
    }
    for l in n_factors.primes() {
        let reduced = Integer::from(&n_int / l);
        if modmath::mod_pow(t, &reduced, q) == 1 {
            return false;
        }
    }
    true
}

/// Least primitive prime of 2^(2^level) - 1. Levels up to 6 are factored
/// directly; higher levels read the curated table, since the primitive
/// primes at level l are exactly the prime factors of 2^(2^(l-1)) + 1.
pub fn pow2_primitive_prime(level: u32) -> Result<Integer> {
    assert!(level >= 1);
    if level <= 6 {
        match primitive_prime(&Integer::from(2), &Integer::from(1), 1u64 << level)? {
            PrimitiveOutcome::Prime(p) => Ok(p),
            PrimitiveOutcome::Exception => unreachable!("2^level is never 6"),
        }
    } else {
        Ok(fermat_factors(level - 1)?[0].clone())
    }
}

/// A curated prime factor q of 2^(2^m) + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermatFactorEntry {
    pub m: u32,
    pub q: Integer,
}

fn fermat_table() -> &'static Vec<FermatFactorEntry> {
    static TABLE: OnceLock<Vec<FermatFactorEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut entries = Vec::new();
        let mut lines = FERMAT_TABLE_TEXT.lines();
        assert_eq!(
            lines.next(),
            Some("covercert-fermat v1"),
            "fermat factor table: bad header"
        );
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let m: u32 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .expect("fermat factor table: bad m");
            let q: Integer = parts
                .next()
                .and_then(|s| s.parse().ok())
                .expect("fermat factor table: bad q");
            assert!(parts.next().is_none(), "fermat factor table: extra field");
            // fail fast on any corrupted entry
            assert!(
                fermat_entry_ok(m, &q),
                "fermat factor table: {q} is not a verified factor of 2^(2^{m}) + 1"
            );
            entries.push(FermatFactorEntry { m, q });
        }
        entries.sort_by(|a, b| (a.m, &a.q).cmp(&(b.m, &b.q)));
        entries
    })
}

/// The full check one curated entry must pass: q is (probably) prime, has
/// the 1 mod 2^(m+2) shape, and divides 2^(2^m) + 1.
pub fn fermat_entry_ok(m: u32, q: &Integer) -> bool {
    if primality(q) == Primality::Composite {
        return false;
    }
    if m >= 2 {
        let shape = Integer::from(1) << (m + 2);
        if !Integer::from(q - 1u32).is_divisible(&shape) {
            return false;
        }
    }
    let mut pow = Integer::from(2);
    for _ in 0..m {
        pow = pow.square().rem_euc(q);
    }
    pow == Integer::from(q - 1u32)
}

/// Verified prime factors of 2^(2^m) + 1, ascending. For m <= 4 the number
/// itself is prime; beyond that the curated table answers.
pub fn fermat_factors(m: u32) -> Result<Vec<Integer>> {
    if m <= 4 {
        let f = Integer::from(2).pow(1u32 << m) + 1u32;
        debug_assert!(is_prime(&f));
        return Ok(vec![f]);
    }
    let list: Vec<Integer> = fermat_table()
        .iter()
        .filter(|e| e.m == m)
        .map(|e| e.q.clone())
        .collect();
    if list.is_empty() {
        Err(Error::TableMiss)
    } else {
        Ok(list)
    }
}

/// The level t with p | 2^(2^(t-1)) + 1, read off the order of 2: the order
/// must be a power of two greater than 2.
pub fn fermat_tau(p: &Integer) -> Result<u32> {
    let ord = modmath::mult_order(&Integer::from(2), p)?;
    if ord <= 2 || !modmath::is_power_of(&ord, &Integer::from(2)) {
        return Err(Error::NotFermatDivisor);
    }
    Ok(ord.significant_bits() - 1)
}

/// A second, distinct curated prime dividing the same 2^(2^(t-1)) + 1 as p.
/// Divisibility is re-checked at call time.
pub fn fermat_partner(p: &Integer) -> Result<Integer> {
    let tau = fermat_tau(p)?;
    let m = tau - 1;
    let candidates = fermat_factors(m)?;
    for q in candidates {
        if q != *p {
            let mut pow = Integer::from(2);
            for _ in 0..m {
                pow = pow.square().rem_euc(&q);
            }
            assert!(pow == Integer::from(&q - 1u32), "partner failed recheck");
            return Ok(q);
        }
    }
    Err(Error::TableMiss)
}
