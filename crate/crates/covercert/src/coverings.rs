//! Covering systems of exponent congruences, multiplicity verification by
//! exhaustive period scan, and decoration with distinct primitive prime
//! divisors of a^m - b^m.

use rug::ops::{Pow, RemRounding};
use rug::Integer;

use crate::{factorbase, modmath, par, Error, Result};

/// Coverage scans refuse periods beyond this.
pub const PERIOD_LIMIT: u64 = 100_000_000;

/// A finite set of congruences on the exponent variable n, stored as
/// (residue, modulus) with residue < modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSystem {
    pub congruences: Vec<(u64, u64)>,
}

impl CoveringSystem {
    pub fn new(congruences: Vec<(u64, u64)>) -> Self {
        assert!(!congruences.is_empty(), "covering must be nonempty");
        for &(r, m) in &congruences {
            assert!(m >= 1 && r < m, "bad congruence ({r}, {m})");
        }
        CoveringSystem { congruences }
    }

    /// lcm of the moduli, or None on overflow.
    pub fn period(&self) -> Option<u64> {
        let mut acc = 1u64;
        for &(_, m) in &self.congruences {
            acc = acc.checked_mul(m / gcd(acc, m))?;
        }
        Some(acc)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The system { 0 (mod 2^tau) } ∪ { 2^(l-1) (mod 2^l) : 1 <= l <= tau }.
/// It partitions the integers: every n lies in exactly one class.
pub fn standard_binary_covering(tau: u32) -> CoveringSystem {
    assert!((1..63).contains(&tau));
    let mut congruences = vec![(0u64, 1u64 << tau)];
    for l in 1..=tau {
        congruences.push((1 << (l - 1), 1 << l));
    }
    CoveringSystem::new(congruences)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageReport {
    pub covers: bool,
    pub min_multiplicity: u64,
}

/// Scans one full period and reports whether every integer satisfies at
/// least m congruences, along with the minimum multiplicity achieved.
pub fn verify_covering(c: &CoveringSystem, m: u64) -> Result<CoverageReport> {
    let period = c.period().ok_or(Error::PeriodTooLarge)?;
    if period > PERIOD_LIMIT {
        return Err(Error::PeriodTooLarge);
    }
    let classes = c.congruences.clone();
    let chunk = 1u64 << 14;
    let starts: Vec<u64> = (0..period).step_by(chunk as usize).collect();
    let mins = par::map_vec(starts, |start| {
        let end = (start + chunk).min(period);
        let mut min_mult = u64::MAX;
        for n in start..end {
            let mult = classes.iter().filter(|&&(r, md)| n % md == r).count() as u64;
            min_mult = min_mult.min(mult);
        }
        min_mult
    });
    let min_multiplicity = mins.into_iter().min().unwrap_or(u64::MAX);
    Ok(CoverageReport {
        covers: min_multiplicity >= m,
        min_multiplicity,
    })
}

/// A covering whose classes carry pairwise distinct primes, each a primitive
/// divisor of a^m - b^m for its class modulus m. An optional partition
/// splits the classes into disjoint 1-coverings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveCovering {
    pub base_a: Integer,
    pub base_b: Integer,
    pub covering: CoveringSystem,
    pub primes: Vec<Integer>,
    pub multiplicity: u64,
    pub partition: Option<Vec<Vec<usize>>>,
}

/// Ascending primitive prime divisors of a^m - b^m: factors q of the value
/// with ord(a * b^-1 mod q) exactly m.
fn primitive_candidates(a: &Integer, b: &Integer, m: u64) -> Result<Vec<Integer>> {
    let e = u32::try_from(m).map_err(|_| Error::PeriodTooLarge)?;
    let value = Integer::from(a.pow(e)) - Integer::from(b.pow(e));
    if value <= 1 {
        return Ok(vec![]);
    }
    let factors = factorbase::factorize(&value)?;
    let m_factors = factorbase::factorize(&Integer::from(m.max(2)))?;
    let mut out = Vec::new();
    for q in factors.primes() {
        if order_equals(a, b, q, m, &m_factors) {
            out.push(q.clone());
        }
    }
    Ok(out)
}

fn order_equals(
    a: &Integer,
    b: &Integer,
    q: &Integer,
    m: u64,
    m_factors: &factorbase::FactorList,
) -> bool {
    if *q == 2 {
        // ord mod 2 is always 1
        return m == 1;
    }
    let binv = match modmath::mod_inv(b, q) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let t: Integer = (Integer::from(a % q) * binv).rem_euc(q);
    let m_int = Integer::from(m);
    if m == 1 {
        return t == 1;
    }
    if modmath::mod_pow(&t, &m_int, q) != 1 {
        return false;
    }
    for l in m_factors.primes() {
        if !m_int.is_divisible(l) {
            continue;
        }
        let reduced = Integer::from(&m_int / l);
        if modmath::mod_pow(&t, &reduced, q) == 1 {
            return false;
        }
    }
    true
}

/// Assigns distinct primitive primes to every class, trying ascending
/// candidates with backtracking when equal moduli compete for the same
/// prime.
pub fn attach_primitive_primes(
    c: &CoveringSystem,
    a: &Integer,
    b: &Integer,
) -> Result<PrimitiveCovering> {
    assert!(*b >= 1 && a > b && Integer::from(a.gcd_ref(b)) == 1);
    let mut per_modulus: Vec<(u64, Vec<Integer>)> = Vec::new();
    for &(_, m) in &c.congruences {
        if !per_modulus.iter().any(|(mm, _)| *mm == m) {
            per_modulus.push((m, primitive_candidates(a, b, m)?));
        }
    }
    let candidates: Vec<&Vec<Integer>> = c
        .congruences
        .iter()
        .map(|&(_, m)| {
            &per_modulus
                .iter()
                .find(|(mm, _)| *mm == m)
                .expect("memoized")
                .1
        })
        .collect();
    let mut chosen: Vec<Integer> = Vec::new();
    if !assign(&candidates, &mut chosen) {
        return Err(Error::NoAssignment);
    }
    let report = verify_covering(c, 1)?;
    Ok(PrimitiveCovering {
        base_a: a.clone(),
        base_b: b.clone(),
        covering: c.clone(),
        primes: chosen,
        multiplicity: report.min_multiplicity,
        partition: None,
    })
}

fn assign(candidates: &[&Vec<Integer>], chosen: &mut Vec<Integer>) -> bool {
    let idx = chosen.len();
    if idx == candidates.len() {
        return true;
    }
    for q in candidates[idx] {
        if chosen.contains(q) {
            continue;
        }
        chosen.push(q.clone());
        if assign(candidates, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

impl PrimitiveCovering {
    /// Full invariant check: class count, prime distinctness, primitivity of
    /// every prime for its modulus, the claimed multiplicity, and (when
    /// present) the partition.
    pub fn verify(&self) -> Result<bool> {
        let n = self.covering.congruences.len();
        if self.primes.len() != n || self.multiplicity == 0 {
            return Ok(false);
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.primes[i] == self.primes[j] {
                    return Ok(false);
                }
            }
        }
        for (&(_, m), q) in self.covering.congruences.iter().zip(&self.primes) {
            if !factorbase::is_prime(q) {
                return Ok(false);
            }
            let m_factors = factorbase::factorize(&Integer::from(m.max(2)))?;
            if !order_equals(&self.base_a, &self.base_b, q, m, &m_factors) {
                return Ok(false);
            }
        }
        let report = verify_covering(&self.covering, self.multiplicity)?;
        if !report.covers {
            return Ok(false);
        }
        if self.partition.is_some() && !verify_partition(self)? {
            return Ok(false);
        }
        Ok(true)
    }
}

/// Checks that the parts are disjoint, exhaust the class indices, and that
/// each part is a 1-covering on its own.
pub fn verify_partition(pc: &PrimitiveCovering) -> Result<bool> {
    let parts = pc.partition.as_ref().ok_or(Error::PartitionMissing)?;
    let n = pc.covering.congruences.len();
    let mut seen = vec![false; n];
    for part in parts {
        for &i in part {
            if i >= n || seen[i] {
                return Ok(false);
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Ok(false);
    }
    for part in parts {
        if part.is_empty() {
            return Ok(false);
        }
        let sub = CoveringSystem::new(part.iter().map(|&i| pc.covering.congruences[i]).collect());
        if !verify_covering(&sub, 1)?.covers {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parsed form of a covering file; primes and partition are optional.
#[derive(Debug, Clone)]
pub struct CoveringFile {
    pub a: Integer,
    pub b: Integer,
    pub m: u64,
    pub classes: Vec<(u64, u64)>,
    pub primes: Option<Vec<Integer>>,
    pub partition: Option<Vec<Vec<usize>>>,
}

impl CoveringFile {
    pub fn into_primitive(self) -> Result<PrimitiveCovering> {
        let primes = self.primes.ok_or(Error::NoAssignment)?;
        Ok(PrimitiveCovering {
            base_a: self.a,
            base_b: self.b,
            covering: CoveringSystem::new(self.classes),
            primes,
            multiplicity: self.m,
            partition: self.partition,
        })
    }
}

/// Canonical text form: header, then one `residue modulus prime` line per
/// class, with partition parts separated by blank lines.
pub fn write_covering(pc: &PrimitiveCovering) -> String {
    let mut out = format!(
        "covercert-covering v1 a={} b={} m={}\n",
        pc.base_a, pc.base_b, pc.multiplicity
    );
    let groups: Vec<Vec<usize>> = match &pc.partition {
        Some(parts) => parts.clone(),
        None => vec![(0..pc.covering.congruences.len()).collect()],
    };
    for (gi, group) in groups.iter().enumerate() {
        if gi > 0 {
            out.push('\n');
        }
        for &i in group {
            let (r, m) = pc.covering.congruences[i];
            out.push_str(&format!("{r} {m} {}\n", pc.primes[i]));
        }
    }
    out
}

pub fn parse_covering(text: &str) -> Result<CoveringFile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(Error::Malformed(1, "empty file".into()))?;
    let mut a = None;
    let mut b = None;
    let mut m = None;
    let mut fields = header.split(' ');
    if fields.next() != Some("covercert-covering") || fields.next() != Some("v1") {
        return Err(Error::Malformed(1, "bad header".into()));
    }
    for field in fields {
        if let Some(v) = field.strip_prefix("a=") {
            a = v.parse::<Integer>().ok();
        } else if let Some(v) = field.strip_prefix("b=") {
            b = v.parse::<Integer>().ok();
        } else if let Some(v) = field.strip_prefix("m=") {
            m = v.parse::<u64>().ok();
        } else {
            return Err(Error::Malformed(1, format!("unknown field {field}")));
        }
    }
    let (a, b, m) = match (a, b, m) {
        (Some(a), Some(b), Some(m)) => (a, b, m),
        _ => return Err(Error::Malformed(1, "missing a=, b= or m=".into())),
    };
    let mut classes = Vec::new();
    let mut primes: Vec<Integer> = Vec::new();
    let mut has_primes = None;
    let mut groups: Vec<Vec<usize>> = vec![vec![]];
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            if !groups.last().unwrap().is_empty() {
                groups.push(vec![]);
            }
            continue;
        }
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(Error::Malformed(
                lineno,
                "want `residue modulus [prime]`".into(),
            ));
        }
        let r: u64 = parts[0]
            .parse()
            .map_err(|_| Error::Malformed(lineno, "bad residue".into()))?;
        let md: u64 = parts[1]
            .parse()
            .map_err(|_| Error::Malformed(lineno, "bad modulus".into()))?;
        if md < 1 || r >= md {
            return Err(Error::Malformed(lineno, "need residue < modulus".into()));
        }
        match (has_primes, parts.len()) {
            (None, 3) => has_primes = Some(true),
            (None, 2) => has_primes = Some(false),
            (Some(true), 3) | (Some(false), 2) => {}
            _ => return Err(Error::Malformed(lineno, "inconsistent prime column".into())),
        }
        if parts.len() == 3 {
            let q: Integer = parts[2]
                .parse()
                .map_err(|_| Error::Malformed(lineno, "bad prime".into()))?;
            primes.push(q);
        }
        groups.last_mut().unwrap().push(classes.len());
        classes.push((r, md));
    }
    while groups.last().is_some_and(|g| g.is_empty()) {
        groups.pop();
    }
    if classes.is_empty() {
        return Err(Error::Malformed(1, "no classes".into()));
    }
    let partition = if groups.len() > 1 { Some(groups) } else { None };
    Ok(CoveringFile {
        a,
        b,
        m,
        classes,
        primes: has_primes.filter(|&h| h).map(|_| primes),
        partition,
    })
}
