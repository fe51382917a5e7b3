//! Witness construction: assemble a congruence ledger on k (and sometimes
//! construct r as well), solve it by CRT, and lift the least solution until
//! the magnitude conditions hold.
//!
//! Each construction pins, for every covering prime q, the residue of
//! C(k, r) mod q that the certificate will later rely on. Digit surgery in
//! base q does the work: replacing one digit of r by a recorded witness
//! digit drives the binomial to -1, keeping the digits forces +1, and
//! zeroing the low digits forces 0.

use rug::ops::Pow;
use rug::Integer;

use crate::coverings::{standard_binary_covering, CoveringSystem, PrimitiveCovering};
use crate::modmath::{self, Congruence, CrtSystem};
use crate::tables::{self, GoodDigitTable, PairTable};
use crate::{factorbase, lucas, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Sierpinski,
    Riesel,
    Both,
}

impl WitnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessKind::Sierpinski => "sierpinski",
            WitnessKind::Riesel => "riesel",
            WitnessKind::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<WitnessKind> {
        match s {
            "sierpinski" => Some(WitnessKind::Sierpinski),
            "riesel" => Some(WitnessKind::Riesel),
            "both" => Some(WitnessKind::Both),
            _ => None,
        }
    }
}

/// A constructed witness: the pair (r, k), the congruence ledger that
/// produced k, the decorated covering, and the binomial residue each
/// covering prime is expected to see.
#[derive(Debug, Clone)]
pub struct Witness {
    pub kind: WitnessKind,
    pub base: Integer,
    pub r: Integer,
    pub k: Integer,
    pub ledger: Vec<(Congruence, String)>,
    pub covering: PrimitiveCovering,
    pub multiplicity: u64,
    /// (prime, expected C(k, r) mod prime) for every prime the construction
    /// touches, covering primes first.
    pub expected_residues: Vec<(Integer, Integer)>,
}

impl Witness {
    /// Re-checks every ledger congruence by direct modular reduction,
    /// independent of the CRT solver.
    pub fn check_ledger(&self) -> bool {
        self.k > self.r && self.ledger.iter().all(|(c, _)| c.holds_for(&self.k))
    }

    /// Re-derives every expected binomial residue through the Lucas
    /// evaluator.
    pub fn check_residues(&self) -> bool {
        self.expected_residues
            .iter()
            .all(|(q, want)| lucas::binom_mod_p(&self.k, &self.r, q) == *want)
    }
}

/// The congruence k ≡ r + (target - digit_i0) * p^i0 (mod p^(j+1)): k keeps
/// every base-p digit of r except position i0, which becomes `target`.
pub fn shift_congruence_single(r: &Integer, p: u64, i0: usize, target: u64) -> Congruence {
    debug_assert!(target < p);
    let p_int = Integer::from(p);
    let modulus = lucas::digit_span_modulus(r, &p_int);
    let place = Integer::from((&p_int).pow(u32::try_from(i0).expect("digit index")));
    assert!(place < modulus, "digit index {i0} beyond the digits of r");
    let digits = modmath::digits_base_u64(r, p);
    let d = digits.get(i0).copied().unwrap_or(0);
    let shifted = r + (Integer::from(target) - d) * place;
    Congruence::new(shifted, modulus)
}

/// Two-position variant of the digit shift.
pub fn shift_congruence_pair(
    r: &Integer,
    p: u64,
    i1: usize,
    i2: usize,
    targets: (u64, u64),
) -> Result<Congruence> {
    if i1 == i2 {
        return Err(Error::IndicesEqual);
    }
    debug_assert!(targets.0 < p && targets.1 < p);
    let p_int = Integer::from(p);
    let modulus = lucas::digit_span_modulus(r, &p_int);
    let place1 = Integer::from((&p_int).pow(u32::try_from(i1).expect("digit index")));
    let place2 = Integer::from((&p_int).pow(u32::try_from(i2).expect("digit index")));
    assert!(
        place1 < modulus && place2 < modulus,
        "digit index beyond the digits of r"
    );
    let digits = modmath::digits_base_u64(r, p);
    let d1 = digits.get(i1).copied().unwrap_or(0);
    let d2 = digits.get(i2).copied().unwrap_or(0);
    let shifted =
        (r + (Integer::from(targets.0) - d1) * place1) + (Integer::from(targets.1) - d2) * place2;
    Ok(Congruence::new(shifted, modulus))
}

/// k ≡ r (mod p^(j+1)), which pins C(k, r) ≡ 1 (mod p).
fn unit_congruence(r: &Integer, p: &Integer) -> Congruence {
    Congruence::new(r.clone(), lucas::digit_span_modulus(r, p))
}

/// k ≡ 0 (mod p^e) with e one past the lowest nonzero base-p digit of r,
/// which zeroes a digit below a nonzero digit of r and so pins
/// C(k, r) ≡ 0 (mod p).
fn zero_congruence(r: &Integer, p: &Integer) -> Congruence {
    debug_assert!(*r >= 1);
    let mut e = 1u32;
    let mut power = p.clone();
    while r.is_divisible(&power) {
        e += 1;
        power *= p;
    }
    let _ = e;
    Congruence::new(0, power)
}

/// k ≡ r with the least odd base-p digit replaced by p - 1, which pins
/// C(k, r) ≡ -1 (mod p) for odd p.
fn negation_congruence(r: &Integer, p: &Integer) -> Congruence {
    let p64 = p.to_u64().expect("covering primes fit u64 here");
    let digits = modmath::digits_base_u64(r, p64);
    let i0 = digits
        .iter()
        .position(|&d| d % 2 == 1)
        .expect("an odd r has an odd digit in every odd base");
    shift_congruence_single(r, p64, i0, p64 - 1)
}

/// Solve the ledger and lift by the combined modulus until k > r and the
/// binomial clears `must_exceed`. The magnitude test is exact for small r
/// and falls back to the bound C(k, r) >= k - r + 1 when expanding the
/// binomial is not tractable.
fn solve_and_lift(
    ledger: &[(Congruence, String)],
    r: &Integer,
    must_exceed: &Integer,
) -> Result<Integer> {
    let sys = CrtSystem::new(ledger.iter().map(|(c, _)| c.clone()).collect());
    let sol = modmath::crt(&sys)?;
    let mut k = sol.residue.clone();
    while k <= *r || !magnitude_ok(&k, r, must_exceed) {
        k += &sol.modulus;
    }
    Ok(k)
}

fn magnitude_ok(k: &Integer, r: &Integer, must_exceed: &Integer) -> bool {
    match r.to_u64() {
        Some(small) if small <= 10_000 => {
            lucas::binom_exact(k, &Integer::from(small)) > *must_exceed
        }
        _ => Integer::from(k - r) + 1u32 > *must_exceed,
    }
}

const BASE641_SIDE_PRIMES: [u64; 6] = [3, 5, 17, 257, 65537, 6700417];

/// Witness for base 2 from the digit tables at 641: one digit (or digit
/// pair) of r is shifted to force C(k, r) ≡ -1 (mod 641), every other
/// covering prime sees 1 by keeping the digits of r, and the parity
/// congruence keeps the binomial odd.
pub fn witness_sierpinski(r: &Integer, g: &GoodDigitTable, pt: &PairTable) -> Result<Witness> {
    let p0 = g.p;
    let digits = modmath::digits_base_u64(r, p0);
    let mut ledger: Vec<(Congruence, String)> = Vec::new();
    let mut expected = Vec::new();

    if let Some(i0) = digits.iter().position(|&d| g.contains(d)) {
        let target = g.witness[&digits[i0]];
        ledger.push((
            shift_congruence_single(r, p0, i0, target),
            format!("digit {i0} shifted to {target} in base {p0}"),
        ));
    } else {
        let mut found = None;
        'outer: for i1 in 0..digits.len() {
            for i2 in i1 + 1..digits.len() {
                if let Some(t) = pt.pair_witness(digits[i1], digits[i2]) {
                    found = Some((i1, i2, t));
                    break 'outer;
                }
            }
        }
        let (i1, i2, targets) = found.ok_or(Error::ConditionUnsatisfied)?;
        ledger.push((
            shift_congruence_pair(r, p0, i1, i2, targets)?,
            format!(
                "digits {i1},{i2} shifted to {},{} in base {p0}",
                targets.0, targets.1
            ),
        ));
    }
    expected.push((Integer::from(p0), Integer::from(p0 - 1)));

    for &q in &BASE641_SIDE_PRIMES {
        let qi = Integer::from(q);
        ledger.push((unit_congruence(r, &qi), format!("digits kept in base {q}")));
        expected.push((qi, Integer::from(1)));
    }
    ledger.push((
        unit_congruence(r, &Integer::from(2)),
        "digits kept in base 2 (odd value)".to_string(),
    ));
    expected.push((Integer::from(2), Integer::from(1)));

    let covering = standard_binary_covering(6);
    let mut primes = vec![Integer::from(p0)];
    primes.extend(BASE641_SIDE_PRIMES.iter().map(|&q| Integer::from(q)));
    let pc = PrimitiveCovering {
        base_a: Integer::from(2),
        base_b: Integer::from(1),
        covering,
        primes,
        multiplicity: 1,
        partition: None,
    };

    let max_prime = Integer::from(6700417);
    let k = solve_and_lift(&ledger, r, &max_prime)?;
    Ok(Witness {
        kind: WitnessKind::Sierpinski,
        base: Integer::from(2),
        r: r.clone(),
        k,
        ledger,
        covering: pc,
        multiplicity: 1,
        expected_residues: expected,
    })
}

/// Witness for base 2 and r in [1, 640] through the eleven-prime
/// assignment: the assigned prime handles the 0 (mod 2^tau) class directly
/// via its recorded k', and a fresh primitive-prime chain fills the
/// remaining levels.
pub fn witness_small_r(r: u64, seed: u64) -> Result<Witness> {
    assert!(
        (1..=640).contains(&r),
        "this construction wants r in [1, 640]"
    );
    let (p0, kprime) = tables::assign_ten_primes(r, seed)?;
    let p0_int = Integer::from(p0);
    let tau = factorbase::fermat_tau(&p0_int)?;
    let r_int = Integer::from(r);

    let mut chain = Vec::new();
    for level in 1..tau {
        chain.push(factorbase::pow2_primitive_prime(level)?);
    }
    chain.push(factorbase::fermat_partner(&p0_int)?);

    let mut ledger: Vec<(Congruence, String)> = vec![(
        Congruence::new(kprime, p0),
        format!("recorded digit witness {kprime} for base {p0}"),
    )];
    let mut expected = vec![(p0_int.clone(), Integer::from(p0 - 1))];
    for q in &chain {
        ledger.push((
            unit_congruence(&r_int, q),
            format!("digits kept in base {q}"),
        ));
        expected.push((q.clone(), Integer::from(1)));
    }
    ledger.push((
        unit_congruence(&r_int, &Integer::from(2)),
        "digits kept in base 2 (odd value)".to_string(),
    ));
    expected.push((Integer::from(2), Integer::from(1)));

    let mut congruences = vec![(0u64, 1u64 << tau)];
    for level in 1..=tau {
        congruences.push((1 << (level - 1), 1 << level));
    }
    let mut primes = vec![p0_int];
    primes.extend(chain.iter().cloned());
    let pc = PrimitiveCovering {
        base_a: Integer::from(2),
        base_b: Integer::from(1),
        covering: CoveringSystem::new(congruences),
        primes: primes.clone(),
        multiplicity: 1,
        partition: None,
    };

    let max_prime = primes.iter().max().cloned().expect("nonempty");
    let k = solve_and_lift(&ledger, &r_int, &max_prime)?;
    Ok(Witness {
        kind: WitnessKind::Sierpinski,
        base: Integer::from(2),
        r: r_int,
        k,
        ledger,
        covering: pc,
        multiplicity: 1,
        expected_residues: expected,
    })
}

/// Base-a witness for odd r. Searches for the first level tau where
/// a^(2^(tau-1)) + 1 carries two distinct odd primes (both automatically
/// primitive), then pins -1 at one end of the covering and +1 along the
/// chain (or the reverse for the Riesel kind). Primes of a - 1 see residue
/// 0 and a prime of a sees 1, which settles the gcd and power-of-a side
/// conditions.
pub fn witness_oddr(
    a: &Integer,
    r: &Integer,
    kind: WitnessKind,
    tau_budget: u32,
) -> Result<Witness> {
    assert!(kind != WitnessKind::Both, "one sign at a time here");
    assert!(*a >= 2);
    // the hypothesis asks for odd r and a+1 off the power-of-two line
    if !r.is_odd() || *r < 1 || modmath::is_power_of(&Integer::from(a + 1u32), &Integer::from(2)) {
        return Err(Error::HypothesisFailed);
    }

    let mut level_primes: Vec<Vec<Integer>> = Vec::new();
    let mut tau = None;
    for level in 1..=tau_budget {
        let value = Integer::from(a.pow(1u32 << (level - 1))) + 1u32;
        let odd: Vec<Integer> = factorbase::factorize(&value)?
            .primes()
            .filter(|q| **q != 2)
            .cloned()
            .collect();
        let enough = odd.len() >= 2;
        level_primes.push(odd);
        if enough {
            tau = Some(level);
            break;
        }
    }
    let tau = tau.ok_or(Error::HypothesisFailed)?;
    let p0 = level_primes[tau as usize - 1][0].clone();
    let p_tau = level_primes[tau as usize - 1][1].clone();
    let mut chain: Vec<Integer> = (1..tau)
        .map(|level| level_primes[level as usize - 1][0].clone())
        .collect();
    chain.push(p_tau);

    let mut ledger: Vec<(Congruence, String)> = Vec::new();
    let mut expected = Vec::new();
    match kind {
        WitnessKind::Sierpinski => {
            ledger.push((
                negation_congruence(r, &p0),
                format!(
                    "odd digit raised to {} in base {p0}",
                    Integer::from(&p0 - 1u32)
                ),
            ));
            expected.push((p0.clone(), Integer::from(&p0 - 1u32)));
            for q in &chain {
                ledger.push((unit_congruence(r, q), format!("digits kept in base {q}")));
                expected.push((q.clone(), Integer::from(1)));
            }
        }
        WitnessKind::Riesel => {
            ledger.push((unit_congruence(r, &p0), format!("digits kept in base {p0}")));
            expected.push((p0.clone(), Integer::from(1)));
            for q in &chain {
                ledger.push((
                    negation_congruence(r, q),
                    format!(
                        "odd digit raised to {} in base {q}",
                        Integer::from(q - 1u32)
                    ),
                ));
                expected.push((q.clone(), Integer::from(q - 1u32)));
            }
        }
        WitnessKind::Both => unreachable!(),
    }

    let a_minus_1 = Integer::from(a - 1u32);
    if a_minus_1 >= 2 {
        for q in factorbase::factorize(&a_minus_1)?.primes() {
            ledger.push((
                zero_congruence(r, q),
                format!("low digits zeroed in base {q}"),
            ));
            expected.push((q.clone(), Integer::new()));
        }
    }
    let a_least = factorbase::factorize(a)?
        .primes()
        .next()
        .expect("a >= 2 has a prime factor")
        .clone();
    ledger.push((
        unit_congruence(r, &a_least),
        format!("digits kept in base {a_least}"),
    ));
    expected.push((a_least, Integer::from(1)));

    let mut congruences = vec![(0u64, 1u64 << tau)];
    for level in 1..=tau {
        congruences.push((1 << (level - 1), 1 << level));
    }
    let mut primes = vec![p0];
    primes.extend(chain);
    let max_prime = primes.iter().max().cloned().expect("nonempty");
    let pc = PrimitiveCovering {
        base_a: a.clone(),
        base_b: Integer::from(1),
        covering: CoveringSystem::new(congruences),
        primes,
        multiplicity: 1,
        partition: None,
    };

    let k = solve_and_lift(&ledger, r, &max_prime)?;
    Ok(Witness {
        kind,
        base: a.clone(),
        r: r.clone(),
        k,
        ledger,
        covering: pc,
        multiplicity: 1,
        expected_residues: expected,
    })
}

/// Base-a witness over an arbitrary (a,1)-primitive m-covering, with r
/// constructed alongside k. A CRT residue R encodes, per covering prime,
/// the inverse power of a that cancels the class; r is the least integer
/// above R congruent to 1 at every relevant prime power, and k embeds the
/// digits of R beneath the digits of r so that C(k, r) ≡ R at every prime.
pub fn witness_infr(a: &Integer, pc: &PrimitiveCovering, kind: WitnessKind) -> Result<Witness> {
    assert_eq!(pc.base_a, *a, "covering was built for a different base");
    assert_eq!(pc.base_b, 1, "this construction wants b = 1");
    if kind == WitnessKind::Both && pc.partition.is_none() {
        return Err(Error::PartitionMissing);
    }
    if !pc.verify()? {
        return Err(Error::NoAssignment);
    }
    let m = pc.multiplicity;

    // sign per class: -1 means the class divides C*a^n + 1, +1 means it
    // divides C*a^n - 1; None drops the class from the certificate (the
    // unused middle part when m is odd)
    let n_classes = pc.covering.congruences.len();
    let class_sign: Vec<Option<i32>> = match kind {
        WitnessKind::Sierpinski => vec![Some(-1); n_classes],
        WitnessKind::Riesel => vec![Some(1); n_classes],
        WitnessKind::Both => {
            let parts = pc.partition.as_ref().expect("checked above");
            let mut signs = vec![None; n_classes];
            for (pi, part) in parts.iter().enumerate() {
                let sign = if (pi as u64) < m / 2 {
                    Some(1)
                } else if (pi as u64) >= m.div_ceil(2) {
                    Some(-1)
                } else {
                    None
                };
                for &ci in part {
                    signs[ci] = sign;
                }
            }
            signs
        }
    };

    let mut residue_primes: Vec<(Integer, Integer)> = Vec::new();
    for (i, (&(q_res, _), prime)) in pc.covering.congruences.iter().zip(&pc.primes).enumerate() {
        let sign = match class_sign[i] {
            Some(s) => s,
            None => continue,
        };
        if residue_primes.iter().any(|(q, _)| q == prime) {
            continue;
        }
        let inv_pow = modmath::mod_inv(&modmath::mod_pow(a, &Integer::from(q_res), prime), prime)?;
        // inv_pow lies in [1, prime - 1], so negation stays in range
        let residue = if sign > 0 { inv_pow } else { prime - inv_pow };
        residue_primes.push((prime.clone(), residue));
    }
    let a_minus_1 = Integer::from(a - 1u32);
    if a_minus_1 >= 2 {
        for q in factorbase::factorize(&a_minus_1)?.primes() {
            residue_primes.push((q.clone(), Integer::new()));
        }
    }
    let a_least = factorbase::factorize(a)?
        .primes()
        .next()
        .expect("a >= 2 has a prime factor")
        .clone();
    residue_primes.push((a_least, Integer::from(1)));

    let system = CrtSystem::new(
        residue_primes
            .iter()
            .map(|(q, res)| Congruence::new(res.clone(), q.clone()))
            .collect(),
    );
    let big_r = modmath::crt(&system)?.residue;

    // a single exponent bound over all primes keeps r ≡ 1 below every
    // digit of R; the smallest prime is the binding one
    let exponent_for = |value: &Integer| -> u32 {
        let mut e = 1u32;
        for (q, _) in &residue_primes {
            let mut power = q.clone();
            let mut this = 1u32;
            while power <= *value {
                power *= q;
                this += 1;
            }
            e = e.max(this);
        }
        e
    };
    let e1 = exponent_for(&big_r);
    let mut m1 = Integer::from(1);
    for (q, _) in &residue_primes {
        m1 *= Integer::from(q.pow(e1));
    }
    assert!(m1 > big_r);
    let r = Integer::from(&m1 + 1u32);

    let e2 = exponent_for(&r);
    let target = Integer::from(&r + &big_r) - 1u32;
    let mut ledger: Vec<(Congruence, String)> = Vec::new();
    for (q, _) in &residue_primes {
        let modulus = Integer::from(q.pow(e2));
        ledger.push((
            Congruence::new(target.clone(), modulus),
            format!("digits of R embedded under r in base {q}"),
        ));
    }

    let max_prime = pc.primes.iter().max().cloned().expect("nonempty");
    let k = solve_and_lift(&ledger, &r, &max_prime)?;

    let expected: Vec<(Integer, Integer)> = residue_primes
        .iter()
        .map(|(q, res)| (q.clone(), res.clone()))
        .collect();
    Ok(Witness {
        kind,
        base: a.clone(),
        r,
        k,
        ledger,
        covering: pc.clone(),
        multiplicity: m,
        expected_residues: expected,
    })
}
