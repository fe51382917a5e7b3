//! Exact and modular binomial coefficients.
//!
//! The modular evaluator walks base-p digits and multiplies per-digit
//! binomials, so it stays cheap even when k has thousands of digits. Small
//! primes get cached factorial tables; larger primes use falling-factorial
//! products per digit pair.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::RemRounding;
use rug::Integer;

use crate::modmath;

/// Primes up to this bound get cached factorial / inverse-factorial tables.
/// Larger primes are evaluated per digit with falling factorials, which for
/// a handful of calls is far cheaper than materializing O(p) tables.
const TABLE_LIMIT: u64 = 1 << 20;

struct FactTables {
    fact: Vec<u32>,
    ifact: Vec<u32>,
}

fn tables_for(p: u64) -> Arc<FactTables> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FactTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(p)
        .or_insert_with(|| {
            let n = p as usize;
            let mut fact = vec![1u32; n];
            for i in 1..n {
                fact[i] = (fact[i - 1] as u64 * i as u64 % p) as u32;
            }
            let mut ifact = vec![1u32; n];
            ifact[n - 1] = powmod(fact[n - 1] as u64, p - 2, p) as u32;
            for i in (1..n).rev() {
                ifact[i - 1] = (ifact[i] as u64 * i as u64 % p) as u32;
            }
            Arc::new(FactTables { fact, ifact })
        })
        .clone()
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// C(kd, rd) mod p for single digits kd, rd < p.
fn digit_binom(kd: u64, rd: u64, p: u64, tables: Option<&FactTables>) -> u64 {
    if rd > kd {
        return 0;
    }
    if rd == 0 || rd == kd {
        return 1;
    }
    if rd == 1 {
        return kd % p;
    }
    if let Some(t) = tables {
        let a = mulmod(t.fact[kd as usize] as u64, t.ifact[rd as usize] as u64, p);
        return mulmod(a, t.ifact[(kd - rd) as usize] as u64, p);
    }
    let s = rd.min(kd - rd);
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..s {
        num = mulmod(num, (kd - i) % p, p);
        den = mulmod(den, i + 1, p);
    }
    mulmod(num, powmod(den, p - 2, p), p)
}

/// Exact binomial coefficient; 0 when r > k. Uses the running-product form
/// with exact intermediate division, so small r stays cheap even for huge k.
pub fn binom_exact(k: &Integer, r: &Integer) -> Integer {
    if *r < 0 || *k < 0 || r > k {
        return Integer::new();
    }
    let s = Integer::from(k - r).min(r.clone());
    let s = s.to_u64().expect("binomial too large to expand exactly");
    let mut acc = Integer::from(1);
    for i in 1..=s {
        acc *= Integer::from(k - (s - i));
        acc.div_exact_u_mut(u32::try_from(i).expect("side under 2^32"));
    }
    acc
}

/// C(k, r) mod p for u64 inputs via the base-p digit product.
pub fn binom_mod_u64(k: u64, r: u64, p: u64) -> u64 {
    debug_assert!(p >= 2);
    let tables = if p <= TABLE_LIMIT {
        Some(tables_for(p))
    } else {
        None
    };
    let mut k = k;
    let mut r = r;
    let mut acc = 1u64;
    while r > 0 || k > 0 {
        let kd = k % p;
        let rd = r % p;
        let d = digit_binom(kd, rd, p, tables.as_deref());
        if d == 0 {
            return 0;
        }
        acc = mulmod(acc, d, p);
        k /= p;
        r /= p;
    }
    acc
}

/// C(k, r) mod p for arbitrary-precision inputs.
pub fn binom_mod_p(k: &Integer, r: &Integer, p: &Integer) -> Integer {
    binom_mod_p_bounded(k, r, p, u64::MAX).expect("unbounded evaluation")
}

/// Like `binom_mod_p`, but gives up (returns None) once the digit products
/// would exceed `budget` multiplications. Lets a verifier stay total on
/// hostile certificates instead of grinding forever.
pub fn binom_mod_p_bounded(
    k: &Integer,
    r: &Integer,
    p: &Integer,
    mut budget: u64,
) -> Option<Integer> {
    debug_assert!(*p >= 2);
    if *r < 0 || *k < 0 {
        return Some(Integer::new());
    }
    if let Some(p64) = p.to_u64() {
        let kd = modmath::digits_base_u64(k, p64);
        let rd = modmath::digits_base_u64(r, p64);
        if rd.len() > kd.len() {
            return Some(Integer::new());
        }
        let tables = if p64 <= TABLE_LIMIT {
            Some(tables_for(p64))
        } else {
            None
        };
        let mut acc = 1u64;
        for (i, &rdig) in rd.iter().enumerate() {
            if rdig == 0 {
                continue;
            }
            let kdig = kd[i];
            if rdig > kdig {
                return Some(Integer::new());
            }
            let cost = rdig.min(kdig - rdig);
            if cost > budget {
                return None;
            }
            budget -= cost;
            let d = digit_binom(kdig, rdig, p64, tables.as_deref());
            if d == 0 {
                return Some(Integer::new());
            }
            acc = mulmod(acc, d, p64);
        }
        return Some(Integer::from(acc));
    }
    // primes beyond u64: digits are big, but honest certificates only ever
    // put trivial digit pairs here
    let kd = modmath::digits_base(k, p);
    let rd = modmath::digits_base(r, p);
    if rd.digits.len() > kd.digits.len() {
        return Some(Integer::new());
    }
    let mut acc = Integer::from(1);
    for (i, rdig) in rd.digits.iter().enumerate() {
        if *rdig == 0 {
            continue;
        }
        let kdig = &kd.digits[i];
        if rdig > kdig {
            return Some(Integer::new());
        }
        let s = Integer::from(kdig - rdig).min(rdig.clone());
        let s = match s.to_u64() {
            Some(s) if s <= budget => s,
            _ => return None,
        };
        budget -= s;
        let mut num = Integer::from(1);
        let mut den = Integer::from(1);
        for j in 0..s {
            num = (num * Integer::from(kdig - j)).rem_euc(p);
            den = (den * (j + 1)).rem_euc(p);
        }
        // for prime p the factorial below p is invertible; a composite
        // modulus (hostile input) is reported as unevaluable instead
        let inv = match modmath::mod_inv(&den, p) {
            Ok(inv) => inv,
            Err(_) => return None,
        };
        acc = (acc * num).rem_euc(p) * inv;
        acc = acc.rem_euc(p);
    }
    Some(acc)
}

/// The smallest power p^(j+1) with r < p^(j+1): a congruence modulo this
/// power fixes every base-p digit of r, which pins C(k, r) ≡ 1 (mod p).
pub fn digit_span_modulus(r: &Integer, p: &Integer) -> Integer {
    debug_assert!(*p >= 2);
    let mut m = p.clone();
    while *r >= m {
        m *= p;
    }
    m
}
