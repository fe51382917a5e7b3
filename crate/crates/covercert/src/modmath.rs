//! Exact modular arithmetic over arbitrary-precision integers: powers,
//! inverses, base-p digit decompositions, multiplicative orders, and
//! Chinese-remainder combination with support for non-coprime moduli.
//!
//! Residues are always canonicalized to the least nonnegative representative
//! so that downstream outputs are deterministic.

use rug::ops::RemRounding;
use rug::Integer;

use crate::{factorbase, Error, Result};

/// A congruence `x ≡ residue (mod modulus)` with `0 <= residue < modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub residue: Integer,
    pub modulus: Integer,
}

impl Congruence {
    /// Canonicalizes the residue into `[0, modulus)`. Panics on a
    /// non-positive modulus.
    pub fn new(residue: impl Into<Integer>, modulus: impl Into<Integer>) -> Self {
        let modulus = modulus.into();
        assert!(modulus >= 1, "congruence modulus must be positive");
        let residue = residue.into().rem_euc(&modulus);
        Congruence { residue, modulus }
    }

    pub fn holds_for(&self, x: &Integer) -> bool {
        Integer::from(x - &self.residue).is_divisible(&self.modulus)
    }
}

impl std::fmt::Display for Congruence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x ≡ {} (mod {})", self.residue, self.modulus)
    }
}

/// An ordered, nonempty list of simultaneous congruences.
#[derive(Debug, Clone)]
pub struct CrtSystem {
    congruences: Vec<Congruence>,
}

impl CrtSystem {
    pub fn new(congruences: Vec<Congruence>) -> Self {
        assert!(!congruences.is_empty(), "CRT system must be nonempty");
        CrtSystem { congruences }
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.congruences
    }
}

/// Little-endian base-b digits of a nonnegative integer. The value 0 has no
/// digits; otherwise the top digit is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    pub base: Integer,
    pub digits: Vec<Integer>,
}

impl DigitVector {
    /// Reassembles the represented value.
    pub fn value(&self) -> Integer {
        let mut acc = Integer::new();
        for d in self.digits.iter().rev() {
            acc *= &self.base;
            acc += d;
        }
        acc
    }
}

/// `base^exp mod m` for `exp >= 0`, `m >= 2`. Negative bases are reduced
/// first.
pub fn mod_pow(base: &Integer, exp: &Integer, m: &Integer) -> Integer {
    debug_assert!(*m >= 2);
    debug_assert!(*exp >= 0);
    base.clone()
        .rem_euc(m)
        .pow_mod(exp, m)
        .expect("nonnegative exponent")
}

/// Least nonnegative inverse of `a` modulo `m`.
pub fn mod_inv(a: &Integer, m: &Integer) -> Result<Integer> {
    debug_assert!(*m >= 2);
    let (g, s, _) = a.clone().rem_euc(m).extended_gcd(m.clone(), Integer::new());
    if g != 1 {
        return Err(Error::NotInvertible);
    }
    Ok(s.rem_euc(m))
}

/// Solves a simultaneous system by pairwise merging. Moduli need not be
/// coprime; a shared factor is checked for agreement and the merged modulus
/// is the lcm. The returned residue is the least nonnegative solution.
pub fn crt(system: &CrtSystem) -> Result<Congruence> {
    let mut acc = system.congruences()[0].clone();
    for c in &system.congruences()[1..] {
        acc = merge(&acc, c)?;
    }
    Ok(acc)
}

fn merge(a: &Congruence, b: &Congruence) -> Result<Congruence> {
    // x = a.residue + a.modulus * t, and a.modulus * t ≡ diff (mod b.modulus)
    let (g, s, _) = a
        .modulus
        .clone()
        .extended_gcd(b.modulus.clone(), Integer::new());
    let diff = Integer::from(&b.residue - &a.residue);
    if !diff.is_divisible(&g) {
        return Err(Error::Inconsistent);
    }
    let reduced = Integer::from(&b.modulus / &g);
    let t = (diff / &g * s).rem_euc(&reduced);
    let lcm = Integer::from(&a.modulus / &g) * &b.modulus;
    let residue = (t * &a.modulus + &a.residue).rem_euc(&lcm);
    Ok(Congruence {
        residue,
        modulus: lcm,
    })
}

/// Little-endian base-p digits, minimal length.
pub fn digits_base(n: &Integer, base: &Integer) -> DigitVector {
    debug_assert!(*n >= 0);
    debug_assert!(*base >= 2);
    let mut digits = Vec::new();
    let mut n = n.clone();
    while n > 0 {
        let (q, r) = n.div_rem(base.clone());
        digits.push(r);
        n = q;
    }
    DigitVector {
        base: base.clone(),
        digits,
    }
}

/// Fast path for u64 bases: peels digits in chunks of `p^e` where `p^e` is
/// the largest power fitting in a u64, so the big number is divided only
/// once per `e` digits.
pub fn digits_base_u64(n: &Integer, p: u64) -> Vec<u64> {
    debug_assert!(*n >= 0);
    debug_assert!(p >= 2);
    let mut chunk = p;
    let mut e = 1u32;
    while let Some(next) = chunk.checked_mul(p) {
        chunk = next;
        e += 1;
    }
    let chunk_int = Integer::from(chunk);
    let mut digits = Vec::new();
    let mut n = n.clone();
    while n > 0 {
        let (q, rem) = n.div_rem(chunk_int.clone());
        let mut r = rem.to_u64().expect("remainder below u64 chunk");
        for _ in 0..e {
            digits.push(r % p);
            r /= p;
        }
        n = q;
    }
    while digits.last() == Some(&0) {
        digits.pop();
    }
    digits
}

/// Order of `a` in the multiplicative group mod the prime `p`: the factors
/// of p-1 are stripped one prime at a time while the power stays 1.
pub fn mult_order(a: &Integer, p: &Integer) -> Result<Integer> {
    if Integer::from(a.gcd_ref(p)) != 1 {
        return Err(Error::NotCoprime);
    }
    let pm1 = Integer::from(p - 1u32);
    let factors = factorbase::factorize(&pm1)?;
    let mut d = pm1;
    for (q, _) in factors.iter() {
        while d.is_divisible(q) {
            let cand = Integer::from(&d / q);
            if mod_pow(a, &cand, p) == 1 {
                d = cand;
            } else {
                break;
            }
        }
    }
    Ok(d)
}

/// True iff `n = a^e` for some `e >= 0` (so 1 always qualifies).
pub fn is_power_of(n: &Integer, a: &Integer) -> bool {
    debug_assert!(*a >= 2);
    if *n < 1 {
        return false;
    }
    let mut m = n.clone();
    while m > 1 {
        let (q, r) = m.div_rem(a.clone());
        if r != 0 {
            return false;
        }
        m = q;
    }
    true
}
