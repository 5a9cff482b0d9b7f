//! Squares ending in arbitrarily many 8s followed by a 9.
//!
//! `88...89` with `e` digits equals `1 + 8 (10^e - 1) / 9`, which is
//! `9^{-1} mod 10^e`. Square roots of `9^{-1}` exist modulo 8 and modulo 5,
//! lift to every power of 2 and of 5, and combine by CRT.

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::natarith::{Int, Natural};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HenselError {
    #[error("only p = 2 and p = 5 are supported, got {0}")]
    UnsupportedPrime(u32),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("{a} is not a nonzero square modulo 5")]
    NotResidueMod5 { a: Natural },
    #[error("{a} is not a square modulo {modulus}: the base congruence mod {modulus} fails")]
    NotResidueMod2 { a: Natural, modulus: u32 },
    #[error("digit count {0} too small; need at least 2")]
    TooFewDigits(u64),
}

/// A root `z` of `z^2 = a (mod p^e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedRoot {
    pub prime: u32,
    pub exponent: u32,
    pub target: Natural,
    pub root: Natural,
}

impl LiftedRoot {
    pub fn modulus(&self) -> Natural {
        Natural::from(self.prime).pow(self.exponent)
    }

    pub fn holds(&self) -> bool {
        let m = self.modulus();
        (&self.root * &self.root) % &m == &self.target % &m
    }
}

/// All square roots of `a` modulo `p^e`, ascending.
pub fn sqrt_mod_prime_power(a: &Natural, p: u32, e: u32) -> Result<Vec<Natural>, HenselError> {
    if e == 0 {
        return Err(HenselError::ZeroExponent);
    }
    match p {
        5 => sqrt_mod_5_power(a, e),
        2 => sqrt_mod_2_power(a, e),
        other => Err(HenselError::UnsupportedPrime(other)),
    }
}

fn sqrt_mod_5_power(a: &Natural, e: u32) -> Result<Vec<Natural>, HenselError> {
    let five = Natural::from(5u32);
    let base: Vec<Natural> = (1u32..5)
        .map(Natural::from)
        .filter(|z| (z * z) % &five == a % &five)
        .collect();
    if base.is_empty() {
        return Err(HenselError::NotResidueMod5 { a: a.clone() });
    }
    let mut roots = Vec::with_capacity(2);
    for mut z in base {
        let mut modulus = five.clone();
        // Newton step: z <- z - (z^2 - a) / (2z), valid since 2z is a unit mod 5
        for _ in 1..e {
            modulus *= 5u32;
            let m = Int::from(modulus.clone());
            let zi = Int::from(z.clone());
            let f = &zi * &zi - Int::from(a.clone());
            let inv = inverse_mod(&(Int::from(2) * &zi), &m).expect("2z is a unit modulo 5^k");
            z = (zi - f * inv)
                .mod_floor(&m)
                .to_biguint()
                .expect("reduced residue is nonnegative");
        }
        roots.push(z);
    }
    roots.sort();
    Ok(roots)
}

fn sqrt_mod_2_power(a: &Natural, e: u32) -> Result<Vec<Natural>, HenselError> {
    let modulus = Natural::one() << e;
    if e <= 3 {
        let roots: Vec<Natural> = (0u32..(1 << e))
            .map(Natural::from)
            .filter(|z| (z * z) % &modulus == a % &modulus)
            .collect();
        return if roots.is_empty() {
            Err(HenselError::NotResidueMod2 { a: a.clone(), modulus: 1 << e })
        } else {
            Ok(roots)
        };
    }
    if (a % 8u32) != Natural::one() {
        return Err(HenselError::NotResidueMod2 { a: a.clone(), modulus: 8 });
    }
    // For k >= 3: if z^2 = a (mod 2^k) then z or z + 2^(k-1) is a root mod 2^(k+1).
    let mut z = Natural::one();
    for k in 3..e {
        let next = Natural::one() << (k + 1);
        if (&z * &z) % &next != a % &next {
            z += Natural::one() << (k - 1);
        }
    }
    // the four roots: +-z and +-z + 2^(e-1)
    let half = Natural::one() << (e - 1);
    let neg = &modulus - &z;
    let mut roots = vec![
        z.clone() % &modulus,
        neg.clone() % &modulus,
        (&z + &half) % &modulus,
        (&neg + &half) % &modulus,
    ];
    roots.sort();
    roots.dedup();
    Ok(roots)
}

fn inverse_mod(a: &Int, m: &Int) -> Option<Int> {
    let ext = a.mod_floor(m).extended_gcd(m);
    ext.gcd.is_one().then(|| ext.x.mod_floor(m))
}

/// `e - 1` eights followed by a nine.
pub fn eights_then_nine(e: u64) -> Natural {
    (Natural::from(10u32).pow(e as u32) - 1u32) / 9u32 * 8u32 + 1u32
}

/// The least `z > 0` whose square ends in the `e` digits `88...89`.
pub fn square_ending_eights(e: u64) -> Result<Natural, HenselError> {
    if e < 2 {
        return Err(HenselError::TooFewDigits(e));
    }
    let target = eights_then_nine(e);
    let exp = e as u32;
    let m2 = Natural::one() << exp;
    let m5 = Natural::from(5u32).pow(exp);
    let roots2 = sqrt_mod_prime_power(&target, 2, exp)?;
    let roots5 = sqrt_mod_prime_power(&target, 5, exp)?;
    // CRT: z = r2 (mod 2^e), z = r5 (mod 5^e)
    let (m2i, m5i) = (Int::from(m2.clone()), Int::from(m5.clone()));
    let inv2 = inverse_mod(&m2i, &m5i).expect("coprime moduli");
    let modulus = &m2i * &m5i;
    let mut best: Option<Natural> = None;
    for r2 in &roots2 {
        for r5 in &roots5 {
            let (r2, r5) = (Int::from(r2.clone()), Int::from(r5.clone()));
            let t = ((&r5 - &r2) * &inv2).mod_floor(&m5i);
            let z = (r2 + &m2i * t).mod_floor(&modulus).to_biguint().unwrap();
            if !z.is_zero() && best.as_ref().is_none_or(|b| z < *b) {
                best = Some(z);
            }
        }
    }
    Ok(best.expect("at least one CRT combination exists"))
}

/// A number whose square ends in `eights` copies of 8 and then a 9, with
/// the trailing digits of the square as evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EightsWitness {
    pub eights: u64,
    pub z: Natural,
    /// The last `eights + 1` digits of `z^2`, zero-padded.
    pub trailing: String,
}

impl EightsWitness {
    pub fn verified(&self) -> bool {
        let expected = format!("{}9", "8".repeat(self.eights as usize));
        let modulus = Natural::from(10u32).pow(self.eights as u32 + 1);
        let tail = (&self.z * &self.z) % modulus;
        self.trailing == expected
            && format!("{:0>width$}", tail.to_string(), width = self.eights as usize + 1) == expected
    }
}

/// Counterexample to "no square ends in more than four 8s before a final 9".
pub fn eights_counterexample(eights: u64) -> Result<EightsWitness, HenselError> {
    let digits = eights + 1;
    let z = square_ending_eights(digits)?;
    let modulus = Natural::from(10u32).pow(digits as u32);
    let tail = (&z * &z) % modulus;
    Ok(EightsWitness {
        eights,
        trailing: format!("{:0>width$}", tail.to_string(), width = digits as usize),
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn base_case_mod_five() {
        // 9^{-1} = 4 (mod 5)
        assert_eq!(sqrt_mod_prime_power(&nat(4), 5, 1).unwrap(), vec![nat(2), nat(3)]);
    }

    #[test]
    fn odd_squares_mod_eight() {
        assert_eq!(
            sqrt_mod_prime_power(&nat(1), 2, 3).unwrap(),
            vec![nat(1), nat(3), nat(5), nat(7)]
        );
    }

    #[test]
    fn inverse_of_nine_mod_625() {
        // 9 * 139 = 1251 = 2 * 625 + 1
        let a = nat(139);
        let roots = sqrt_mod_prime_power(&a, 5, 4).unwrap();
        assert_eq!(roots.len(), 2);
        for z in &roots {
            assert_eq!((z * z) % 625u32, a);
        }
        // reduce to roots mod 5^3
        for z in &roots {
            let low = z % 125u32;
            assert_eq!((&low * &low) % 125u32, &a % 125u32);
        }
    }

    #[test]
    fn non_residues_rejected() {
        assert_eq!(
            sqrt_mod_prime_power(&nat(2), 5, 3),
            Err(HenselError::NotResidueMod5 { a: nat(2) })
        );
        assert!(matches!(
            sqrt_mod_prime_power(&nat(5), 2, 6),
            Err(HenselError::NotResidueMod2 { modulus: 8, .. })
        ));
        assert!(matches!(sqrt_mod_prime_power(&nat(1), 3, 2), Err(HenselError::UnsupportedPrime(3))));
        assert!(sqrt_mod_prime_power(&nat(1), 2, 0).is_err());
    }

    #[test]
    fn eights_examples() {
        assert_eq!(square_ending_eights(2).unwrap(), nat(17));
        let z = square_ending_eights(8).unwrap();
        assert_eq!((&z * &z) % 100_000_000u32, nat(88_888_889));
        let w = nat(8_072_917);
        assert_eq!((&w * &w) % 100_000_000u32, nat(88_888_889));
        assert!(square_ending_eights(1).is_err());
    }

    #[test]
    fn counterexample_transcripts() {
        let w = eights_counterexample(7).unwrap();
        assert_eq!(w.trailing, "88888889");
        assert!(w.verified());
        let w = eights_counterexample(5).unwrap();
        assert_eq!(w.trailing, "888889");
        assert!(w.verified());
        let w = eights_counterexample(100).unwrap();
        assert!(w.verified());
    }

    #[test]
    fn brute_force_agrees_up_to_seven_digits() {
        for e in 2..=7u64 {
            let modulus = 10u64.pow(e as u32);
            let target = 8 * (modulus - 1) / 9 + 1;
            let brute = (1..modulus).find(|&z| (z as u128 * z as u128 % modulus as u128) as u64 == target);
            assert_eq!(square_ending_eights(e).unwrap(), nat(brute.unwrap()), "e = {e}");
        }
    }

    #[test]
    fn root_counts() {
        for e in 3..=20u32 {
            let target = eights_then_nine(e as u64);
            let r2 = sqrt_mod_prime_power(&target, 2, e).unwrap();
            let r5 = sqrt_mod_prime_power(&target, 5, e).unwrap();
            assert_eq!(r2.len() * r5.len(), 8);
        }
    }

    proptest! {
        #[test]
        fn roots_square_to_target(e in 1u32..40) {
            let target = eights_then_nine(e.max(2) as u64);
            for p in [2u32, 5] {
                for root in sqrt_mod_prime_power(&target, p, e).unwrap() {
                    let lifted = LiftedRoot { prime: p, exponent: e, target: target.clone(), root: root.clone() };
                    prop_assert!(lifted.holds());
                    if e > 1 {
                        // consistency: reduces to a root one exponent down
                        let lower = LiftedRoot {
                            prime: p,
                            exponent: e - 1,
                            target: target.clone(),
                            root: root % Natural::from(p).pow(e - 1),
                        };
                        prop_assert!(lower.holds());
                    }
                }
            }
        }
    }
}
