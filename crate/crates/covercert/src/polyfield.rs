//! Dense univariate polynomials over F_p and root finding for
//! C(x, r) - t, the engine behind the digit-table searches.
//!
//! Roots are isolated with gcd(f, x^p - x) followed by equal-degree
//! splitting with random shifts. Small primes keep a deterministic
//! exhaustive scan both as the default route and as a built-in oracle for
//! the subquadratic path. All randomness flows from an explicit seed.

use crate::{lucas, Error, Result};

/// Primes at or below this use the exhaustive scan directly.
pub const SCAN_THRESHOLD: u64 = 10_000;

/// A polynomial over F_p, little-endian coefficients, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyModP {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl PolyModP {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        assert!((2..(1 << 27)).contains(&p), "field prime out of range");
        for c in &mut coeffs {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyModP { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        PolyModP { p, coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let x = x % p;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (acc as u128 * x as u128 % p as u128) as u64;
            acc = (acc + c) % p;
        }
        acc
    }

    fn monic(&self) -> PolyModP {
        match self.coeffs.last() {
            None | Some(&1) => self.clone(),
            Some(&lead) => {
                let inv = invmod(lead, self.p);
                self.scale(inv)
            }
        }
    }

    fn scale(&self, s: u64) -> PolyModP {
        let p = self.p;
        PolyModP::new(
            p,
            self.coeffs
                .iter()
                .map(|&c| (c as u128 * s as u128 % p as u128) as u64)
                .collect(),
        )
    }

    fn sub(&self, other: &PolyModP) -> PolyModP {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = (a + p - b) % p;
        }
        PolyModP::new(p, out)
    }

    fn mul(&self, other: &PolyModP) -> PolyModP {
        let p = self.p;
        if self.is_zero() || other.is_zero() {
            return PolyModP::zero(p);
        }
        let mut out = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a as u128 * b as u128;
            }
        }
        PolyModP::new(p, out.iter().map(|&v| (v % p as u128) as u64).collect())
    }

    /// Remainder of self by a monic divisor.
    fn rem_by_monic(&self, d: &PolyModP) -> PolyModP {
        let p = self.p;
        debug_assert_eq!(d.coeffs.last(), Some(&1));
        let dd = d.coeffs.len() - 1;
        if dd == 0 {
            return PolyModP::zero(p);
        }
        let mut rem = self.coeffs.clone();
        while rem.len() > dd {
            let lead = *rem.last().unwrap();
            let top = rem.len() - 1;
            if lead != 0 {
                for (i, &dc) in d.coeffs.iter().enumerate().take(dd) {
                    let idx = top - dd + i;
                    let sub = (lead as u128 * dc as u128 % p as u128) as u64;
                    rem[idx] = (rem[idx] + p - sub) % p;
                }
            }
            rem.pop();
        }
        PolyModP::new(p, rem)
    }

    /// Exact quotient by a monic divisor (remainder must vanish).
    fn div_exact_by_monic(&self, d: &PolyModP) -> PolyModP {
        let p = self.p;
        debug_assert_eq!(d.coeffs.last(), Some(&1));
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len().saturating_sub(dd)];
        while rem.len() > dd {
            let lead = *rem.last().unwrap();
            let top = rem.len() - 1;
            quot[top - dd] = lead;
            if lead != 0 {
                for (i, &dc) in d.coeffs.iter().enumerate().take(dd) {
                    let idx = top - dd + i;
                    let sub = (lead as u128 * dc as u128 % p as u128) as u64;
                    rem[idx] = (rem[idx] + p - sub) % p;
                }
            }
            rem.pop();
        }
        debug_assert!(rem.iter().all(|&c| c == 0), "division was not exact");
        PolyModP::new(p, quot)
    }
}

fn invmod(a: u64, p: u64) -> u64 {
    // Fermat inverse; p is prime throughout this module
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

fn gcd_poly(a: &PolyModP, b: &PolyModP) -> PolyModP {
    let mut a = a.monic();
    let mut b = b.clone();
    if b.is_zero() {
        return a;
    }
    b = b.monic();
    while !b.is_zero() {
        let r = a.rem_by_monic(&b);
        a = b;
        b = if r.is_zero() { r } else { r.monic() };
    }
    a
}

/// base^exp reduced modulo the monic polynomial `m`.
fn powmod_poly(base: &PolyModP, exp: u64, m: &PolyModP) -> PolyModP {
    let mut acc = PolyModP::new(m.p, vec![1]);
    let mut base = base.rem_by_monic(m);
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base).rem_by_monic(m);
        }
        base = base.mul(&base).rem_by_monic(m);
        e >>= 1;
    }
    acc
}

struct SeededRng(u64);

impl SeededRng {
    fn new(seed: u64) -> Self {
        // splitmix64 step so that seed 0 is fine
        let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        SeededRng(z ^ (z >> 31) | 1)
    }

    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
}

/// The polynomial C(x, r) mod p, built by multiplying out x(x-1)...(x-r+1)
/// and scaling by the inverse of r!.
pub fn binom_poly(r: u64, p: u64) -> Result<PolyModP> {
    if r >= p || r == 0 {
        return Err(Error::RNotLessThanP);
    }
    let mut coeffs = vec![1u64];
    for j in 0..r {
        let neg_j = (p - j % p) % p;
        let mut next = vec![0u64; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = (next[i + 1] + c) % p;
            next[i] = (next[i] + (c as u128 * neg_j as u128 % p as u128) as u64) % p;
        }
        coeffs = next;
    }
    // r < p, so r! is invertible
    let mut rfact = 1u64;
    for i in 1..=r {
        rfact = (rfact as u128 * i as u128 % p as u128) as u64;
    }
    Ok(PolyModP::new(p, coeffs).scale(invmod(rfact, p)))
}

/// All roots in [0, p), each once, by checking every point.
pub fn find_roots_scan(f: &PolyModP) -> Result<Vec<u64>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok((0..f.p).filter(|&x| f.eval(x) == 0).collect())
}

/// All roots in [0, p) via gcd with x^p - x and randomized splitting.
/// Reproducible for a fixed seed.
pub fn find_roots_cz(f: &PolyModP, seed: u64) -> Result<Vec<u64>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = f.p;
    if p == 2 {
        return find_roots_scan(f);
    }
    let f = f.monic();
    if f.degree() == Some(0) {
        return Ok(vec![]);
    }
    let x = PolyModP::new(p, vec![0, 1]);
    let xp = powmod_poly(&x, p, &f);
    let linear_part = gcd_poly(&xp.sub(&x), &f);
    let mut rng = SeededRng::new(seed);
    let mut roots = Vec::new();
    split_linear(&linear_part, &mut rng, &mut roots);
    roots.sort_unstable();
    Ok(roots)
}

fn split_linear(g: &PolyModP, rng: &mut SeededRng, out: &mut Vec<u64>) {
    let p = g.p;
    match g.degree() {
        None | Some(0) => {}
        Some(1) => {
            // monic x + c  ->  root p - c
            out.push((p - g.coeffs[0]) % p);
        }
        Some(_) => loop {
            let delta = rng.next() % p;
            let shifted = PolyModP::new(p, vec![delta, 1]);
            let w = powmod_poly(&shifted, (p - 1) / 2, g);
            let mut w1 = w.sub(&PolyModP::new(p, vec![1]));
            if w1.is_zero() {
                continue;
            }
            w1 = w1.monic();
            let d = gcd_poly(&w1, g);
            let deg = d.degree().unwrap_or(0);
            if deg > 0 && deg < g.degree().unwrap() {
                let rest = g.div_exact_by_monic(&d);
                split_linear(&d, rng, out);
                split_linear(&rest, rng, out);
                return;
            }
        },
    }
}

/// Roots of f, dispatching between the scan and the splitting method on the
/// size of p.
pub fn find_roots(f: &PolyModP, seed: u64) -> Result<Vec<u64>> {
    if f.p <= SCAN_THRESHOLD {
        find_roots_scan(f)
    } else {
        find_roots_cz(f, seed)
    }
}

/// All k in [0, p) with C(k, r) ≡ t (mod p). Small p scans binomial values
/// directly (an oracle independent of the polynomial machinery); large p
/// goes through `binom_poly` and root splitting.
pub fn solve_binom_congruence(r: u64, t: u64, p: u64, seed: u64) -> Result<Vec<u64>> {
    if r == 0 || r >= p {
        return Err(Error::RNotLessThanP);
    }
    if p <= SCAN_THRESHOLD {
        return Ok((0..p)
            .filter(|&k| lucas::binom_mod_u64(k, r, p) == t % p)
            .collect());
    }
    let mut f = binom_poly(r, p)?;
    // subtract the constant t
    let mut coeffs = f.coeffs.clone();
    if coeffs.is_empty() {
        coeffs.push(0);
    }
    coeffs[0] = (coeffs[0] + p - t % p) % p;
    f = PolyModP::new(p, coeffs);
    find_roots_cz(&f, seed)
}
