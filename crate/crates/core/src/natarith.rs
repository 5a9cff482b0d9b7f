//! Exact integer arithmetic and the repdigit / triangular constructors.
//!
//! Every quantity in the proofs outgrows machine words (`10^i` for large
//! `i`), so values are carried as [`Natural`] / [`Int`] and only reduced to
//! `u64` once they have been taken modulo something small.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Nonnegative integer of unbounded width.
pub type Natural = BigUint;
/// Signed integer of unbounded width.
pub type Int = BigInt;

/// A decimal digit in `1..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit(u8);

impl Digit {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=9).contains(&value) {
            Ok(Digit(value))
        } else {
            Err(Error::Domain(format!("digit {value} outside 1..=9")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Digit> {
        (1..=9).map(Digit)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A two-digit block in `10..=99`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block(u8);

impl Block {
    pub fn new(value: u8) -> Result<Self> {
        if (10..=99).contains(&value) {
            Ok(Block(value))
        } else {
            Err(Error::Domain(format!("block {value} outside 10..=99")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Block> {
        (10..=99).map(Block)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a proof is about: a repeated digit or a repeated two-digit block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Problem {
    Digit(Digit),
    Block(Block),
}

impl Problem {
    /// The repeated unit (`d` or `c`).
    pub fn unit(self) -> u32 {
        match self {
            Problem::Digit(d) => d.get().into(),
            Problem::Block(c) => c.get().into(),
        }
    }

    /// 10 for digits, 100 for blocks.
    pub fn radix(self) -> u32 {
        match self {
            Problem::Digit(_) => 10,
            Problem::Block(_) => 100,
        }
    }

    /// The number written with `i` copies of the unit.
    pub fn value(self, i: u64) -> Result<Natural> {
        match self {
            Problem::Digit(d) => repdigit_value(d, i),
            Problem::Block(c) => repblock_value(c, i),
        }
    }

    /// `1 + 8 * value(i)`.
    pub fn discriminant(self, i: u64) -> Result<Natural> {
        Ok(self.value(i)? * 8u32 + 1u32)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Digit(d) => write!(f, "digit {d}"),
            Problem::Block(c) => write!(f, "block {c}"),
        }
    }
}

fn ensure_positive(name: &str, value: u64) -> Result<()> {
    if value == 0 {
        Err(Error::Domain(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// `k(k+1)/2`.
pub fn triangular(k: &Natural) -> Result<Natural> {
    if k.is_zero() {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    Ok((k * (k + 1u32)) >> 1)
}

pub fn pow10(exp: u64) -> Natural {
    Natural::from(10u32).pow(exp as u32)
}

/// `d * (base^count - 1) / (base - 1)`: the number spelling `d` in base
/// `base`, `count` times.
fn repeated(d: u32, base: u32, count: u64) -> Natural {
    let numerator = Natural::from(d) * (Natural::from(base).pow(count as u32) - 1u32);
    let (q, r) = numerator.div_rem(&Natural::from(base - 1));
    assert!(r.is_zero(), "repeated-digit division must be exact");
    q
}

/// The `i`-digit number whose every digit is `d`.
pub fn repdigit_value(d: Digit, i: u64) -> Result<Natural> {
    ensure_positive("i", i)?;
    Ok(repeated(d.get().into(), 10, i))
}

/// The `2i`-digit number formed by writing the block `c` `i` times.
pub fn repblock_value(c: Block, i: u64) -> Result<Natural> {
    ensure_positive("i", i)?;
    Ok(repeated(c.get().into(), 100, i))
}

/// `1 + 8 * repdigit_value(d, i)`; a square exactly when the repdigit is triangular.
pub fn discriminant(d: Digit, i: u64) -> Result<Natural> {
    Ok(repdigit_value(d, i)? * 8u32 + 1u32)
}

/// `1 + 8 * repblock_value(c, i)`.
pub fn block_discriminant(c: Block, i: u64) -> Result<Natural> {
    Ok(repblock_value(c, i)? * 8u32 + 1u32)
}

/// `floor(sqrt(n))` by integer Newton iteration.
///
/// Starting from a power of two above the root, the iterates decrease
/// strictly until they reach the floor; the first non-decrease stops it.
pub fn isqrt(n: &Natural) -> Natural {
    if n.is_zero() {
        return Natural::zero();
    }
    let bits = n.bits();
    let mut x = Natural::one() << bits.div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Quadratic residues mod 64, 63, 65 and 11 as bitmasks; a number failing any
/// of them is not a square.
struct SquareFilter {
    m64: u64,
    m63: u64,
    m65: u128,
    m11: u16,
}

const SQUARE_FILTER: SquareFilter = {
    let mut m64 = 0u64;
    let mut m63 = 0u64;
    let mut m65 = 0u128;
    let mut m11 = 0u16;
    let mut z = 0u64;
    while z < 65 {
        m64 |= 1 << ((z * z) % 64);
        m63 |= 1 << ((z * z) % 63);
        m65 |= 1 << ((z * z) % 65);
        m11 |= 1 << ((z * z) % 11);
        z += 1;
    }
    SquareFilter { m64, m63, m65, m11 }
};

fn passes_filter(r64: u64, r63: u64, r65: u64, r11: u64) -> bool {
    SQUARE_FILTER.m64 >> r64 & 1 == 1
        && SQUARE_FILTER.m63 >> r63 & 1 == 1
        && SQUARE_FILTER.m65 >> r65 & 1 == 1
        && SQUARE_FILTER.m11 >> r11 & 1 == 1
}

/// The exact square root of `n` when `n` is a perfect square.
pub fn is_perfect_square(n: &Natural) -> Option<Natural> {
    let r = |m: u32| (n % m).to_u64().unwrap_or(0);
    if !passes_filter(r(64), r(63), r(65), r(11)) {
        return None;
    }
    let root = isqrt(n);
    (&root * &root == *n).then_some(root)
}

/// `floor(sqrt(n))` for `u128`.
pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    // the float estimate is within a few units; walk to the exact floor
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn is_perfect_square_u128(n: u128) -> Option<u128> {
    if !passes_filter(
        (n % 64) as u64,
        (n % 63) as u64,
        (n % 65) as u64,
        (n % 11) as u64,
    ) {
        return None;
    }
    let root = isqrt_u128(n);
    (root * root == n).then_some(root)
}

/// `base^exp mod m`.
pub fn mod_pow(base: &Natural, exp: &Natural, m: &Natural) -> Result<Natural> {
    if *m < Natural::from(2u32) {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    Ok(base.modpow(exp, m))
}

/// `(a * b) mod m` without overflow for any `u64` inputs.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m` on machine words; `m >= 1`.
pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
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

/// Residue of a signed big integer in `0..m`.
pub fn residue_of(value: &Int, m: u64) -> u64 {
    value
        .mod_floor(&Int::from(m))
        .to_u64()
        .expect("residue fits below modulus")
}

pub fn natural_residue(value: &Natural, m: u64) -> u64 {
    (value % m).to_u64().expect("residue fits below modulus")
}
