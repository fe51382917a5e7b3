//! Self-contained compositeness certificates and their adversarial
//! verifier.
//!
//! A certificate pins (a, r, k), a multiplicity, and a list of exponent
//! classes, each carrying a prime and a sign. Verification trusts nothing
//! from the construction side: it re-derives coverage by scanning one full
//! period, re-checks every class divisibility and the order condition that
//! propagates it across the class, and re-establishes the magnitude, gcd,
//! parity and power-of-a side conditions.
//!
//! Small binomials are expanded exactly. When C(k, r) is too large to
//! expand, residues come from the Lucas digit products instead and the
//! magnitude check uses the bound C(k, r) >= k - r + 1, which is rigorous
//! for 1 <= r < k.

use std::fmt;

use rug::Integer;

use crate::modmath::{self, Congruence};
use crate::witness::{Witness, WitnessKind};
use crate::{factorbase, lucas, Error, Result};

/// Coverage scans refuse certificates whose class-modulus lcm exceeds this.
pub const CERT_PERIOD_LIMIT: u64 = 1 << 19;

/// Expand the binomial exactly only when r is small and the result stays
/// under this many bits.
const EXACT_BITS_LIMIT: u64 = 1 << 25;
const EXACT_R_LIMIT: u64 = 10_000;

/// Lucas work budget per residue when verifying without expansion.
const LUCAS_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn as_str(&self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// One exponent class: for every n ≡ residue (mod modulus), the prime
/// divides C(k,r) * a^n + 1 (sign +) or - 1 (sign -).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertClass {
    pub residue: u64,
    pub modulus: u64,
    pub prime: Integer,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub kind: WitnessKind,
    pub base: Integer,
    pub multiplicity: u64,
    pub r: Integer,
    pub k: Integer,
    pub period: u64,
    pub classes: Vec<CertClass>,
    pub aux: Vec<Congruence>,
}

/// Packages a witness into a certificate. Signs follow the kind; for the
/// simultaneous kind each partition part serves one form and the unused
/// middle part (odd multiplicity) is dropped.
pub fn build_certificate(w: &Witness) -> Certificate {
    let n = w.covering.covering.congruences.len();
    let signs: Vec<Option<Sign>> = match w.kind {
        WitnessKind::Sierpinski => vec![Some(Sign::Plus); n],
        WitnessKind::Riesel => vec![Some(Sign::Minus); n],
        WitnessKind::Both => {
            let parts = w
                .covering
                .partition
                .as_ref()
                .expect("both needs a partition");
            let m = w.multiplicity;
            let mut out = vec![None; n];
            for (pi, part) in parts.iter().enumerate() {
                let sign = if (pi as u64) < m / 2 {
                    // these classes cancel C * a^n - 1
                    Some(Sign::Minus)
                } else if (pi as u64) >= m.div_ceil(2) {
                    Some(Sign::Plus)
                } else {
                    None
                };
                for &ci in part {
                    out[ci] = sign;
                }
            }
            out
        }
    };
    let mut classes: Vec<CertClass> = w
        .covering
        .covering
        .congruences
        .iter()
        .zip(&w.covering.primes)
        .zip(signs)
        .filter_map(|((&(residue, modulus), prime), sign)| {
            sign.map(|sign| CertClass {
                residue,
                modulus,
                prime: prime.clone(),
                sign,
            })
        })
        .collect();
    classes.sort_by(|a, b| {
        (a.modulus, a.residue, &a.prime, a.sign.as_str()).cmp(&(
            b.modulus,
            b.residue,
            &b.prime,
            b.sign.as_str(),
        ))
    });
    let period = classes
        .iter()
        .fold(1u64, |acc, c| acc / gcd(acc, c.modulus) * c.modulus);
    let mut aux: Vec<Congruence> = w.ledger.iter().map(|(c, _)| c.clone()).collect();
    aux.sort_by(|a, b| (&a.modulus, &a.residue).cmp(&(&b.modulus, &b.residue)));
    let multiplicity = match w.kind {
        WitnessKind::Both => w.multiplicity / 2,
        _ => w.multiplicity,
    };
    Certificate {
        kind: w.kind,
        base: w.base.clone(),
        multiplicity,
        r: w.r.clone(),
        k: w.k.clone(),
        period,
        classes,
        aux,
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyStrategy {
    /// C(k, r) expanded exactly.
    Exact,
    /// Residues via Lucas digit products; magnitude via C(k,r) >= k - r + 1.
    Modular,
}

#[derive(Debug, Clone)]
pub struct ClassCheck {
    pub index: usize,
    pub divides: bool,
    pub order_ok: bool,
}

/// Outcome of one verification run. `verdict()` is the conjunction of the
/// named checks.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub strategy: VerifyStrategy,
    pub coverage_ok: bool,
    pub primality_ok: bool,
    pub residues_ok: bool,
    pub magnitude_ok: bool,
    pub gcd_ok: bool,
    pub power_ok: bool,
    pub parity_ok: bool,
    pub class_checks: Vec<ClassCheck>,
    pub probable_primes: Vec<Integer>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn verdict(&self) -> bool {
        self.coverage_ok
            && self.primality_ok
            && self.residues_ok
            && self.magnitude_ok
            && self.gcd_ok
            && self.power_ok
            && self.parity_ok
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "strategy: {}",
            match self.strategy {
                VerifyStrategy::Exact => "exact binomial",
                VerifyStrategy::Modular => "modular residues",
            }
        )?;
        writeln!(f, "coverage: {}", word(self.coverage_ok))?;
        writeln!(f, "primality: {}", word(self.primality_ok))?;
        writeln!(f, "class residues: {}", word(self.residues_ok))?;
        for c in &self.class_checks {
            if !c.divides || !c.order_ok {
                writeln!(
                    f,
                    "  class {}: divides={} order={}",
                    c.index, c.divides, c.order_ok
                )?;
            }
        }
        writeln!(f, "magnitude: {}", word(self.magnitude_ok))?;
        writeln!(f, "gcd condition: {}", word(self.gcd_ok))?;
        writeln!(f, "power-of-a condition: {}", word(self.power_ok))?;
        writeln!(f, "parity: {}", word(self.parity_ok))?;
        for q in &self.probable_primes {
            writeln!(f, "note: {q} is a probable prime (no deterministic proof)")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(
            f,
            "verdict: {}",
            if self.verdict() {
                "VERIFIED"
            } else {
                "REFUTED"
            }
        )
    }
}

/// Verifies a certificate from scratch. Never fails with an error: every
/// defect lands in the report.
pub fn verify_certificate(c: &Certificate) -> VerificationReport {
    let mut notes = Vec::new();
    let mut probable_primes = Vec::new();

    // (1) period and coverage, per sign group
    let mut coverage_ok = true;
    let lcm = c
        .classes
        .iter()
        .try_fold(1u64, |acc, cl| {
            if cl.modulus == 0 {
                return None;
            }
            acc.checked_mul(cl.modulus / gcd(acc, cl.modulus))
        })
        .unwrap_or(0);
    if c.classes.is_empty() || lcm == 0 || lcm != c.period || lcm > CERT_PERIOD_LIMIT {
        notes.push(format!(
            "period must equal the class lcm and stay at or under {CERT_PERIOD_LIMIT}"
        ));
        coverage_ok = false;
    } else {
        let needs = |sign: Sign| -> bool {
            match c.kind {
                WitnessKind::Sierpinski => sign == Sign::Plus,
                WitnessKind::Riesel => sign == Sign::Minus,
                WitnessKind::Both => true,
            }
        };
        for sign in [Sign::Plus, Sign::Minus] {
            if !needs(sign) {
                continue;
            }
            let group: Vec<&CertClass> = c.classes.iter().filter(|cl| cl.sign == sign).collect();
            let min_mult = (0..c.period)
                .map(|n| {
                    group
                        .iter()
                        .filter(|cl| n % cl.modulus == cl.residue)
                        .count() as u64
                })
                .min()
                .unwrap_or(0);
            if min_mult < c.multiplicity.max(1) {
                notes.push(format!(
                    "sign {} classes reach multiplicity {min_mult}, need {}",
                    sign.as_str(),
                    c.multiplicity.max(1)
                ));
                coverage_ok = false;
            }
        }
    }

    // (2) primality of the class primes
    let mut primality_ok = true;
    for (i, cl) in c.classes.iter().enumerate() {
        match factorbase::primality(&cl.prime) {
            factorbase::Primality::Prime => {}
            factorbase::Primality::ProbablePrime => probable_primes.push(cl.prime.clone()),
            factorbase::Primality::Composite => {
                notes.push(format!("class {i}: {} is not prime", cl.prime));
                primality_ok = false;
            }
        }
    }

    // choose the arithmetic strategy
    let exact_feasible = match c.r.to_u64() {
        Some(r64) if r64 <= EXACT_R_LIMIT => {
            r64.saturating_mul(c.k.significant_bits() as u64) <= EXACT_BITS_LIMIT
        }
        _ => false,
    };
    let strategy = if exact_feasible {
        VerifyStrategy::Exact
    } else {
        VerifyStrategy::Modular
    };
    let exact_b = if exact_feasible {
        Some(lucas::binom_exact(&c.k, &c.r))
    } else {
        None
    };
    let residue_mod = |q: &Integer| -> Option<Integer> {
        match &exact_b {
            Some(b) => Some(Integer::from(b % q)),
            None => lucas::binom_mod_p_bounded(&c.k, &c.r, q, LUCAS_BUDGET),
        }
    };

    // (3) per-class divisibility and order: B * a^n0 ± 1 ≡ 0 (mod q) and
    // a^modulus ≡ 1 (mod q), which extends the check to the whole class
    let mut residues_ok = true;
    let mut class_checks = Vec::new();
    for (i, cl) in c.classes.iter().enumerate() {
        let mut divides = false;
        let mut order_ok = false;
        if cl.prime >= 2 {
            match residue_mod(&cl.prime) {
                Some(b_mod) => {
                    let a_pow = modmath::mod_pow(&c.base, &Integer::from(cl.residue), &cl.prime);
                    let value = b_mod * a_pow
                        + match cl.sign {
                            Sign::Plus => 1i32,
                            Sign::Minus => -1i32,
                        };
                    divides = value.is_divisible(&cl.prime);
                    order_ok =
                        modmath::mod_pow(&c.base, &Integer::from(cl.modulus), &cl.prime) == 1;
                }
                None => notes.push(format!("class {i}: residue work budget exhausted")),
            }
        }
        if !divides || !order_ok {
            residues_ok = false;
            notes.push(format!("class {i}: divisibility or order failed"));
        }
        class_checks.push(ClassCheck {
            index: i,
            divides,
            order_ok,
        });
    }

    // (4) magnitude: every certified divisor must be a proper one
    let max_prime = c.classes.iter().map(|cl| cl.prime.clone()).max();
    let magnitude_ok = match (&exact_b, &max_prime) {
        (Some(b), Some(mp)) => b > mp,
        (None, Some(mp)) => {
            // C(k, r) >= k - r + 1 when 1 <= r < k
            c.r >= 1 && c.k > c.r && Integer::from(&c.k - &c.r) + 1u32 > *mp
        }
        _ => false,
    };
    if !magnitude_ok {
        notes.push("binomial does not provably exceed every class prime".to_string());
    }

    // (5) gcd side conditions against a - 1
    let a_minus_1 = Integer::from(&c.base - 1u32);
    let check_gcd = |offset: i32| -> bool {
        if a_minus_1 <= 1 {
            return true;
        }
        match &exact_b {
            Some(b) => Integer::from(b + offset).gcd(&a_minus_1) == 1,
            None => match factorbase::factorize(&a_minus_1) {
                Ok(fl) => fl.primes().all(|q| match residue_mod(q) {
                    Some(b_mod) => !(b_mod + offset).is_divisible(q),
                    None => false,
                }),
                Err(_) => false,
            },
        }
    };
    let gcd_ok = match c.kind {
        WitnessKind::Sierpinski => check_gcd(1),
        WitnessKind::Riesel => check_gcd(-1),
        WitnessKind::Both => check_gcd(1) && check_gcd(-1),
    };
    if !gcd_ok {
        notes.push("gcd condition against a - 1 failed".to_string());
    }

    // (6) the binomial must not be a power of a
    let power_ok = if c.base < 2 {
        false
    } else {
        match &exact_b {
            Some(b) => !modmath::is_power_of(b, &c.base),
            None => {
                // some prime of a misses B entirely, and B > 1 by magnitude
                magnitude_ok
                    && match factorbase::factorize(&c.base) {
                        Ok(fl) => fl.primes().any(|q| match residue_mod(q) {
                            Some(b_mod) => b_mod != 0,
                            None => false,
                        }),
                        Err(_) => false,
                    }
            }
        }
    };
    if !power_ok {
        notes.push("binomial could be a power of a".to_string());
    }

    // (7) parity for the classic base
    let parity_ok = if c.base == 2 {
        match &exact_b {
            Some(b) => b.is_odd(),
            None => residue_mod(&Integer::from(2)) == Some(Integer::from(1)),
        }
    } else {
        true
    };
    if !parity_ok {
        notes.push("binomial is even".to_string());
    }

    // informational: the recorded ledger congruences should hold for k
    for (i, aux) in c.aux.iter().enumerate() {
        if !aux.holds_for(&c.k) {
            notes.push(format!("aux congruence {i} does not hold (informational)"));
        }
    }

    VerificationReport {
        strategy,
        coverage_ok,
        primality_ok,
        residues_ok,
        magnitude_ok,
        gcd_ok,
        power_ok,
        parity_ok,
        class_checks,
        probable_primes,
        notes,
    }
}

// ---- canonical text form ----------------------------------------------

/// Canonical serialization: fixed key order, sorted classes and aux lines,
/// decimal integers, single spaces. Byte equality coincides with semantic
/// equality.
pub fn serialize(c: &Certificate) -> String {
    let mut out = String::from("covercert-cert v1\n");
    out.push_str(&format!("kind {}\n", c.kind.as_str()));
    out.push_str(&format!("a {}\n", c.base));
    out.push_str(&format!("m {}\n", c.multiplicity));
    out.push_str(&format!("r {}\n", c.r));
    out.push_str(&format!("k {}\n", c.k));
    out.push_str(&format!("period {}\n", c.period));
    for cl in &c.classes {
        out.push_str(&format!(
            "class {} {} {} {}\n",
            cl.residue,
            cl.modulus,
            cl.prime,
            cl.sign.as_str()
        ));
    }
    for aux in &c.aux {
        out.push_str(&format!("aux {} {}\n", aux.residue, aux.modulus));
    }
    out.push_str("end covercert-cert\n");
    out
}

pub fn parse(text: &str) -> Result<Certificate> {
    let mut kind = None;
    let mut base = None;
    let mut mult = None;
    let mut r = None;
    let mut k = None;
    let mut period = None;
    let mut classes = Vec::new();
    let mut aux = Vec::new();
    let mut saw_end = false;

    let err = |line: usize, what: &str| Error::Malformed(line, what.into());
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "covercert-cert v1")) => {}
        Some((i, _)) => return Err(err(i + 1, "unknown header or version")),
        None => return Err(err(1, "empty input")),
    }
    for (i, line) in lines {
        let lineno = i + 1;
        if saw_end {
            return Err(err(lineno, "content after end marker"));
        }
        if line == "end covercert-cert" {
            saw_end = true;
            continue;
        }
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| err(lineno, "expected `key value`"))?;
        match key {
            "kind" => {
                kind = Some(WitnessKind::parse(rest).ok_or_else(|| err(lineno, "unknown kind"))?);
            }
            "a" => base = Some(parse_int(rest, lineno)?),
            "m" => {
                mult = Some(rest.parse::<u64>().map_err(|_| err(lineno, "bad m"))?);
            }
            "r" => r = Some(parse_int(rest, lineno)?),
            "k" => k = Some(parse_int(rest, lineno)?),
            "period" => {
                period = Some(rest.parse::<u64>().map_err(|_| err(lineno, "bad period"))?);
            }
            "class" => {
                let parts: Vec<&str> = rest.split(' ').collect();
                if parts.len() != 4 {
                    return Err(err(lineno, "class wants `residue modulus prime sign`"));
                }
                let residue = parts[0].parse().map_err(|_| err(lineno, "bad residue"))?;
                let modulus: u64 = parts[1].parse().map_err(|_| err(lineno, "bad modulus"))?;
                let prime = parse_int(parts[2], lineno)?;
                let sign = match parts[3] {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    _ => return Err(err(lineno, "sign must be + or -")),
                };
                if modulus == 0 || residue >= modulus {
                    return Err(err(lineno, "need residue < modulus"));
                }
                classes.push(CertClass {
                    residue,
                    modulus,
                    prime,
                    sign,
                });
            }
            "aux" => {
                let parts: Vec<&str> = rest.split(' ').collect();
                if parts.len() != 2 {
                    return Err(err(lineno, "aux wants `residue modulus`"));
                }
                let residue = parse_int(parts[0], lineno)?;
                let modulus = parse_int(parts[1], lineno)?;
                if modulus < 1 || residue < 0 || residue >= modulus {
                    return Err(err(lineno, "need 0 <= residue < modulus"));
                }
                aux.push(Congruence { residue, modulus });
            }
            _ => return Err(err(lineno, "unknown key")),
        }
    }
    if !saw_end {
        return Err(Error::Malformed(
            0,
            "missing end marker (truncated?)".into(),
        ));
    }
    // canonical order, so a certificate has exactly one byte form
    let class_key = |c: &CertClass| (c.modulus, c.residue, c.prime.clone(), c.sign.as_str());
    if classes
        .windows(2)
        .any(|w| class_key(&w[0]) >= class_key(&w[1]))
    {
        return Err(Error::Malformed(
            0,
            "class lines out of canonical order".into(),
        ));
    }
    let aux_key = |c: &Congruence| (c.modulus.clone(), c.residue.clone());
    if aux.windows(2).any(|w| aux_key(&w[0]) >= aux_key(&w[1])) {
        return Err(Error::Malformed(
            0,
            "aux lines out of canonical order".into(),
        ));
    }
    let missing = |what: &str| Error::Malformed(0, format!("missing {what}"));
    Ok(Certificate {
        kind: kind.ok_or_else(|| missing("kind"))?,
        base: base.ok_or_else(|| missing("a"))?,
        multiplicity: mult.ok_or_else(|| missing("m"))?,
        r: r.ok_or_else(|| missing("r"))?,
        k: k.ok_or_else(|| missing("k"))?,
        period: period.ok_or_else(|| missing("period"))?,
        classes,
        aux,
    })
}

fn parse_int(s: &str, lineno: usize) -> Result<Integer> {
    if s.is_empty() || (s.len() > 1 && s.starts_with('0')) || !s.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(Error::Malformed(lineno, format!("bad integer `{s}`")));
    }
    s.parse()
        .map_err(|_| Error::Malformed(lineno, format!("bad integer `{s}`")))
}

// ---- witness text form --------------------------------------------------

/// Serializes a witness: the covering classes with their primes, the
/// optional partition, and the congruence ledger.
pub fn serialize_witness(w: &Witness) -> String {
    let mut out = String::from("covercert-witness v1\n");
    out.push_str(&format!("kind {}\n", w.kind.as_str()));
    out.push_str(&format!("a {}\n", w.base));
    out.push_str(&format!("m {}\n", w.multiplicity));
    out.push_str(&format!("r {}\n", w.r));
    out.push_str(&format!("k {}\n", w.k));
    for (&(residue, modulus), prime) in w
        .covering
        .covering
        .congruences
        .iter()
        .zip(&w.covering.primes)
    {
        out.push_str(&format!("class {residue} {modulus} {prime}\n"));
    }
    if let Some(parts) = &w.covering.partition {
        for part in parts {
            let ids: Vec<String> = part.iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("part {}\n", ids.join(" ")));
        }
    }
    for (c, _) in &w.ledger {
        out.push_str(&format!("ledger {} {}\n", c.residue, c.modulus));
    }
    out.push_str("end covercert-witness\n");
    out
}

/// Parses a witness file. Ledger tags are not stored in the text form, so
/// parsed entries carry a generic tag; the expected residues are re-derived
/// by the verifier rather than trusted, so they are left empty here.
pub fn parse_witness(text: &str) -> Result<Witness> {
    use crate::coverings::{CoveringSystem, PrimitiveCovering};

    let err = |line: usize, what: &str| Error::Malformed(line, what.into());
    let mut kind = None;
    let mut base = None;
    let mut mult = None;
    let mut r = None;
    let mut k = None;
    let mut classes: Vec<(u64, u64)> = Vec::new();
    let mut primes: Vec<Integer> = Vec::new();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut ledger: Vec<(Congruence, String)> = Vec::new();
    let mut saw_end = false;

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "covercert-witness v1")) => {}
        Some((i, _)) => return Err(err(i + 1, "unknown header or version")),
        None => return Err(err(1, "empty input")),
    }
    for (i, line) in lines {
        let lineno = i + 1;
        if saw_end {
            return Err(err(lineno, "content after end marker"));
        }
        if line == "end covercert-witness" {
            saw_end = true;
            continue;
        }
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| err(lineno, "expected `key value`"))?;
        match key {
            "kind" => {
                kind = Some(WitnessKind::parse(rest).ok_or_else(|| err(lineno, "unknown kind"))?)
            }
            "a" => base = Some(parse_int(rest, lineno)?),
            "m" => mult = Some(rest.parse::<u64>().map_err(|_| err(lineno, "bad m"))?),
            "r" => r = Some(parse_int(rest, lineno)?),
            "k" => k = Some(parse_int(rest, lineno)?),
            "class" => {
                let parts: Vec<&str> = rest.split(' ').collect();
                if parts.len() != 3 {
                    return Err(err(lineno, "class wants `residue modulus prime`"));
                }
                let residue = parts[0].parse().map_err(|_| err(lineno, "bad residue"))?;
                let modulus = parts[1].parse().map_err(|_| err(lineno, "bad modulus"))?;
                classes.push((residue, modulus));
                primes.push(parse_int(parts[2], lineno)?);
            }
            "part" => {
                let ids: std::result::Result<Vec<usize>, _> =
                    rest.split(' ').map(|s| s.parse()).collect();
                parts.push(ids.map_err(|_| err(lineno, "bad part index"))?);
            }
            "ledger" => {
                let fields: Vec<&str> = rest.split(' ').collect();
                if fields.len() != 2 {
                    return Err(err(lineno, "ledger wants `residue modulus`"));
                }
                let residue = parse_int(fields[0], lineno)?;
                let modulus = parse_int(fields[1], lineno)?;
                if modulus < 1 || residue >= modulus {
                    return Err(err(lineno, "need residue < modulus"));
                }
                ledger.push((Congruence { residue, modulus }, "recorded".to_string()));
            }
            _ => return Err(err(lineno, "unknown key")),
        }
    }
    if !saw_end {
        return Err(Error::Malformed(
            0,
            "missing end marker (truncated?)".into(),
        ));
    }
    if classes.is_empty() {
        return Err(Error::Malformed(0, "no covering classes".into()));
    }
    let missing = |what: &str| Error::Malformed(0, format!("missing {what}"));
    let base = base.ok_or_else(|| missing("a"))?;
    let multiplicity = mult.ok_or_else(|| missing("m"))?;
    Ok(Witness {
        kind: kind.ok_or_else(|| missing("kind"))?,
        base: base.clone(),
        r: r.ok_or_else(|| missing("r"))?,
        k: k.ok_or_else(|| missing("k"))?,
        ledger,
        covering: PrimitiveCovering {
            base_a: base,
            base_b: Integer::from(1),
            covering: CoveringSystem::new(classes),
            primes,
            multiplicity,
            partition: if parts.is_empty() { None } else { Some(parts) },
        },
        multiplicity,
        expected_residues: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables;
    use crate::witness;
    use std::sync::OnceLock;

    fn int(x: i64) -> Integer {
        Integer::from(x)
    }

    fn sierpinski_one() -> &'static (Witness, Certificate) {
        static W: OnceLock<(Witness, Certificate)> = OnceLock::new();
        W.get_or_init(|| {
            let g = tables::compute_good_digits(641);
            let pt = tables::compute_pair_table(&g);
            let w = witness::witness_sierpinski(&int(1), &g, &pt).unwrap();
            let c = build_certificate(&w);
            (w, c)
        })
    }

    #[test]
    fn classic_class_layout() {
        let (_, c) = sierpinski_one();
        assert_eq!(c.classes.len(), 7);
        assert_eq!(c.period, 64);
        // sorted by (modulus, residue): levels first, the 0 mod 64 with 641
        // and the 32 mod 64 with 6700417 at the end
        let last = &c.classes[5..];
        assert_eq!(last[0].modulus, 64);
        assert_eq!(last[1].modulus, 64);
        assert!(c.classes.iter().all(|cl| cl.sign == Sign::Plus));
        let p641 = c
            .classes
            .iter()
            .find(|cl| cl.prime == 641)
            .expect("641 class");
        assert_eq!((p641.residue, p641.modulus), (0, 64));
    }

    #[test]
    fn classic_verifies() {
        let (_, c) = sierpinski_one();
        let report = verify_certificate(c);
        assert!(report.verdict(), "{report}");
        assert_eq!(report.strategy, VerifyStrategy::Exact);
        assert!(report.probable_primes.is_empty());
    }

    #[test]
    fn tampered_k_is_refuted() {
        let (_, c) = sierpinski_one();
        let mut bad = c.clone();
        bad.k += 1u32;
        let report = verify_certificate(&bad);
        assert!(!report.verdict());
        assert!(!report.residues_ok);
    }

    #[test]
    fn tampered_prime_is_refuted_with_class_index() {
        let (_, c) = sierpinski_one();
        let mut bad = c.clone();
        bad.classes[2].prime = int(101);
        let report = verify_certificate(&bad);
        assert!(!report.verdict());
        let failing: Vec<usize> = report
            .class_checks
            .iter()
            .filter(|cc| !cc.divides || !cc.order_ok)
            .map(|cc| cc.index)
            .collect();
        assert_eq!(failing, vec![2]);
    }

    #[test]
    fn tampered_sign_is_refuted() {
        let (_, c) = sierpinski_one();
        let mut bad = c.clone();
        bad.classes[0].sign = Sign::Minus;
        let report = verify_certificate(&bad);
        assert!(!report.verdict());
    }

    #[test]
    fn riesel_flips_signs() {
        let g = tables::compute_good_digits(641);
        let pt = tables::compute_pair_table(&g);
        let w = witness::witness_sierpinski(&int(1), &g, &pt).unwrap();
        let mut flipped = w.clone();
        flipped.kind = WitnessKind::Riesel;
        let c = build_certificate(&flipped);
        assert!(c.classes.iter().all(|cl| cl.sign == Sign::Minus));
    }

    #[test]
    fn round_trip_and_rejection() {
        let (_, c) = sierpinski_one();
        let text = serialize(c);
        let back = parse(&text).unwrap();
        assert_eq!(&back, c);
        assert_eq!(serialize(&back), text);

        // truncation loses the end marker
        let cut = &text[..text.len() - 20];
        assert!(matches!(parse(cut), Err(Error::Malformed(_, _))));

        let wrong_version = text.replace("covercert-cert v1", "covercert-cert v2");
        assert!(matches!(parse(&wrong_version), Err(Error::Malformed(_, _))));

        let garbage = text.replace("period 64", "period sixty-four");
        assert!(matches!(parse(&garbage), Err(Error::Malformed(_, _))));

        // only the canonical ordering is accepted
        let mut lines: Vec<&str> = text.lines().collect();
        let first_class = lines.iter().position(|l| l.starts_with("class ")).unwrap();
        lines.swap(first_class, first_class + 1);
        let reordered = lines.join("\n");
        assert!(matches!(parse(&reordered), Err(Error::Malformed(_, _))));
    }

    #[test]
    fn oddr_certificates_verify_both_kinds() {
        for kind in [WitnessKind::Sierpinski, WitnessKind::Riesel] {
            let w = witness::witness_oddr(&int(6), &int(5), kind, 8).unwrap();
            let c = build_certificate(&w);
            let report = verify_certificate(&c);
            assert!(report.verdict(), "kind {kind:?}: {report}");
        }
    }

    #[test]
    fn hostile_certificates_are_refuted_not_crashed() {
        // base below 2
        let junk = Certificate {
            kind: WitnessKind::Sierpinski,
            base: int(1),
            multiplicity: 1,
            r: int(3),
            k: int(10),
            period: 2,
            classes: vec![
                CertClass {
                    residue: 0,
                    modulus: 2,
                    prime: int(7),
                    sign: Sign::Plus,
                },
                CertClass {
                    residue: 1,
                    modulus: 2,
                    prime: int(11),
                    sign: Sign::Plus,
                },
            ],
            aux: vec![],
        };
        assert!(!verify_certificate(&junk).verdict());

        // a composite impostor beyond 2^64 in the prime slot, with a giant
        // k r pair that forces the digit-product route
        let impostor = (Integer::from(1) << 95) - 1u32;
        assert!(!crate::factorbase::is_prime(&impostor));
        let hostile = Certificate {
            kind: WitnessKind::Sierpinski,
            base: int(2),
            multiplicity: 1,
            r: (Integer::from(1) << 70) + 12345u32,
            k: (Integer::from(1) << 90) + 99999u32,
            period: 2,
            classes: vec![
                CertClass {
                    residue: 0,
                    modulus: 2,
                    prime: impostor.clone(),
                    sign: Sign::Plus,
                },
                CertClass {
                    residue: 1,
                    modulus: 2,
                    prime: int(3),
                    sign: Sign::Plus,
                },
            ],
            aux: vec![],
        };
        let report = verify_certificate(&hostile);
        assert!(!report.verdict());
        assert!(!report.primality_ok);
    }

    #[test]
    fn witness_text_round_trips_with_partition() {
        let classes = vec![(0u64, 2u64), (1, 2), (1, 2), (0, 4), (2, 4)];
        let cov = crate::coverings::CoveringSystem::new(classes);
        let mut pc = crate::coverings::attach_primitive_primes(&cov, &int(104), &int(1)).unwrap();
        pc.partition = Some(vec![vec![0, 1], vec![2, 3, 4]]);
        let w = witness::witness_infr(&int(104), &pc, WitnessKind::Both).unwrap();

        let text = serialize_witness(&w);
        let back = parse_witness(&text).unwrap();
        assert_eq!(back.kind, w.kind);
        assert_eq!(back.r, w.r);
        assert_eq!(back.k, w.k);
        assert_eq!(back.covering.primes, w.covering.primes);
        assert_eq!(back.covering.partition, w.covering.partition);
        assert_eq!(back.ledger.len(), w.ledger.len());

        // a certificate built from the parsed witness still verifies
        let cert = build_certificate(&back);
        assert_eq!(cert.multiplicity, 1);
        let signs: Vec<Sign> = cert.classes.iter().map(|c| c.sign).collect();
        assert!(signs.contains(&Sign::Plus) && signs.contains(&Sign::Minus));
        let report = verify_certificate(&cert);
        assert!(report.verdict(), "{report}");

        assert!(parse_witness("covercert-witness v9\n").is_err());
        assert!(parse_witness(&text[..text.len() - 10]).is_err());
    }

    #[test]
    fn infr_certificate_uses_modular_strategy() {
        let cov = crate::coverings::standard_binary_covering(6);
        let pc = crate::coverings::attach_primitive_primes(&cov, &int(2), &int(1)).unwrap();
        let w = witness::witness_infr(&int(2), &pc, WitnessKind::Sierpinski).unwrap();
        let c = build_certificate(&w);
        let report = verify_certificate(&c);
        assert_eq!(report.strategy, VerifyStrategy::Modular);
        assert!(report.verdict(), "{report}");
    }
}
