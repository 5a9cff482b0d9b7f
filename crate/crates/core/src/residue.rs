//! Residue orbits of solution families, periodic index sets, ten-power
//! orbits and quadratic-residue tables.
//!
//! The unit recursion has determinant `u^2 - D v^2 = 1`, so it is invertible
//! modulo every `m` and each family's orbit mod `m` is purely periodic: the
//! initial pair always recurs.

use std::collections::{BTreeSet, HashSet};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::natarith::{mul_mod, natural_residue, pow_mod_u64, residue_of, Digit, Problem};
use crate::pell::{Coordinate, SolutionFamily};

/// Orbits longer than this are refused.
pub const PERIOD_CAP: u64 = 1_000_000_000;

/// `(x_n mod m, y_n mod m)` over one full period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueOrbit {
    modulus: u64,
    pairs: Vec<(u64, u64)>,
}

impl ResidueOrbit {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn period(&self) -> u64 {
        self.pairs.len() as u64
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn coordinate(&self, coord: Coordinate) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(move |(x, y)| *coord.pick(x, y))
    }

    /// Indices `n mod P` at which the coordinate is `t`.
    pub fn index_set(&self, coord: Coordinate, t: u64) -> IndexSet {
        IndexSet::new(
            self.period(),
            self.coordinate(coord)
                .enumerate()
                .filter(|&(_, c)| c == t)
                .map(|(n, _)| n as u64),
        )
    }

    /// Coordinate values at indices `n` lying in `idx`.
    ///
    /// `n` is in `idx` iff `n mod P_idx` is a member; a residue class mod
    /// this orbit's period meets such an `n` iff it agrees with a member
    /// modulo `gcd` of the two periods.
    pub fn values_at(&self, coord: Coordinate, idx: &IndexSet) -> BTreeSet<u64> {
        let g = idx.period.gcd(&self.period());
        let classes: HashSet<u64> = idx.members.iter().map(|n| n % g).collect();
        self.coordinate(coord)
            .enumerate()
            .filter(|&(k, _)| classes.contains(&(k as u64 % g)))
            .map(|(_, c)| c)
            .collect()
    }
}

/// Orbit of the family through `(x0, y0)` under the unit `(u, v)` modulo `m`.
pub fn orbit_of(d: u64, u: u64, v: u64, x0: u64, y0: u64, m: u64) -> Result<ResidueOrbit> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    let (u, v, dv) = (u % m, v % m, mul_mod(d % m, v % m, m));
    let start = (x0 % m, y0 % m);
    let mut pairs = vec![start];
    let (mut x, mut y) = start;
    loop {
        let nx = (mul_mod(u, x, m) + mul_mod(dv, y, m)) % m;
        let ny = (mul_mod(v, x, m) + mul_mod(u, y, m)) % m;
        (x, y) = (nx, ny);
        if (x, y) == start {
            return Ok(ResidueOrbit { modulus: m, pairs });
        }
        if pairs.len() as u64 >= PERIOD_CAP {
            return Err(Error::Budget(format!("orbit modulo {m} exceeds period cap {PERIOD_CAP}")));
        }
        pairs.push((x, y));
    }
}

pub fn orbit(fam: &SolutionFamily, m: u64) -> Result<ResidueOrbit> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    let (x0, y0) = fam.base();
    let unit = fam.unit();
    orbit_of(
        fam.equation().d(),
        natural_residue(&unit.u, m),
        natural_residue(&unit.v, m),
        residue_of(x0, m),
        natural_residue(y0, m),
        m,
    )
}

/// A set of nonnegative integers determined by residues modulo `period`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    period: u64,
    members: BTreeSet<u64>,
}

impl IndexSet {
    pub fn new(period: u64, members: impl IntoIterator<Item = u64>) -> Self {
        assert!(period >= 1, "index set period must be positive");
        IndexSet {
            period,
            members: members.into_iter().map(|n| n % period).collect(),
        }
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn members(&self) -> &BTreeSet<u64> {
        &self.members
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.contains(&(n % self.period))
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The same set over its smallest period.
    pub fn reduced(&self) -> IndexSet {
        let mut divisors: Vec<u64> = (1..=self.period.isqrt())
            .filter(|q| self.period.is_multiple_of(*q))
            .flat_map(|q| [q, self.period / q])
            .collect();
        divisors.sort_unstable();
        let shift_invariant = |q: u64| {
            self.members
                .iter()
                .all(|n| self.members.contains(&((n + q) % self.period)))
        };
        let q = divisors
            .into_iter()
            .find(|&q| shift_invariant(q))
            .unwrap_or(self.period);
        IndexSet::new(q, self.members.iter().copied().filter(|&n| n < q))
    }
}

pub fn index_set(fam: &SolutionFamily, m: u64, coord: Coordinate, t: u64) -> Result<IndexSet> {
    if t >= m {
        return Err(Error::Domain(format!("target residue {t} not below modulus {m}")));
    }
    Ok(orbit(fam, m)?.index_set(coord, t))
}

/// Equality as subsets of the integers. A periodic set has a unique
/// smallest period, so comparing reduced forms is exact.
pub fn sets_equal(a: &IndexSet, b: &IndexSet) -> bool {
    a.reduced() == b.reduced()
}

pub fn values_at(
    fam: &SolutionFamily,
    m2: u64,
    coord: Coordinate,
    idx: &IndexSet,
) -> Result<BTreeSet<u64>> {
    Ok(orbit(fam, m2)?.values_at(coord, idx))
}

/// `{c * 10^r mod m : r >= r_min}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TenPowerOrbit {
    pub modulus: u64,
    pub multiplier: u64,
    pub r_min: u64,
    pub attained: BTreeSet<u64>,
    /// Steps from `r_min` before the sequence enters its cycle.
    pub preperiod: u64,
    pub period: u64,
}

pub fn ten_power_orbit(c: u64, m: u64, r_min: u64) -> Result<TenPowerOrbit> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    if c == 0 {
        return Err(Error::Domain("multiplier must be at least 1".into()));
    }
    let mut first_seen = std::collections::HashMap::new();
    let mut power = pow_mod_u64(10, r_min, m);
    let mut attained = BTreeSet::new();
    let mut step = 0u64;
    while let std::collections::hash_map::Entry::Vacant(e) = first_seen.entry(power) {
        e.insert(step);
        attained.insert(mul_mod(c % m, power, m));
        power = mul_mod(power, 10, m);
        step += 1;
    }
    let preperiod = first_seen[&power];
    Ok(TenPowerOrbit {
        modulus: m,
        multiplier: c,
        r_min,
        attained,
        preperiod,
        period: step - preperiod,
    })
}

/// `discriminant(d, i) mod m`, i.e. `(8d (10^i - 1) / 9 + 1) mod m`, exactly.
pub fn residue_of_repdigit(d: Digit, i: u64, m: u64) -> Result<u64> {
    if i == 0 {
        return Err(Error::Domain("i must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    Ok(discriminant_residue(Problem::Digit(d), i, m))
}

/// `problem.discriminant(i) mod m` without building the full number.
pub fn discriminant_residue(problem: Problem, i: u64, m: u64) -> u64 {
    let radix = problem.radix() as u64;
    let wide = m * (radix - 1);
    let power = pow_mod_u64(radix, i, wide);
    repeated_residue(problem, power, m)
}

/// Residue of `1 + 8 a (radix^i - 1) / (radix - 1)` from `radix^i mod m (radix - 1)`.
fn repeated_residue(problem: Problem, power: u64, m: u64) -> u64 {
    let radix = problem.radix() as u64;
    let wide = m * (radix - 1);
    let a = 8 * problem.unit() as u64;
    let numerator = mul_mod(a % wide, (power + wide - 1) % wide, wide);
    (numerator / (radix - 1) + 1) % m
}

/// `{discriminant(i) mod m : i = i_from, i_from + stride, ...}`, computed to closure.
pub fn discriminant_residues(problem: Problem, m: u64, i_from: u64, stride: u64) -> BTreeSet<u64> {
    let radix = problem.radix() as u64;
    let wide = m * (radix - 1);
    let jump = pow_mod_u64(radix, stride, wide);
    let mut power = pow_mod_u64(radix, i_from, wide);
    let mut seen = HashSet::new();
    let mut out = BTreeSet::new();
    while seen.insert(power) {
        out.insert(repeated_residue(problem, power, m));
        power = mul_mod(power, jump, wide);
    }
    out
}

/// `{z^2 mod m : 0 <= z < m}`.
pub fn quadratic_residues(m: u64) -> Result<BTreeSet<u64>> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    Ok((0..m).map(|z| mul_mod(z, z, m)).collect())
}
