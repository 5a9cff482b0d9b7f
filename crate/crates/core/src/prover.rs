//! Assembles complete proofs for one digit or one two-digit block.
//!
//! `T_k` equals the repeated number `R_i` iff `D_i = 1 + 8 R_i` is the
//! square `(2k+1)^2`. Each index `i >= 1` is settled by one of:
//!
//! * a direct evaluation of `D_i` (square or not),
//! * a residue screen: `D_i mod m` lands outside the squares mod `m` for all
//!   `i` in an arithmetic progression,
//! * a Pell obstruction: writing `i = stride * r + offset`, the condition
//!   becomes `x^2 - D y^2 = N` with one coordinate equal to `c * 10^r`, and a
//!   modulus pair `(m1, m2)` shows no family member has that shape for
//!   `r >= r_start`; the finitely many `r` below `r_start` are enumerated.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::certcheck::{
    FamilyRecord, ObstructionCertificate, SmallCaseHit, SmallCaseRecord, SquareFormCertificate,
    TenPowerRecord, BRUTE_FORCE_LIMIT,
};
use crate::error::{Error, Result};
use crate::natarith::{
    is_perfect_square, is_perfect_square_u128, isqrt, pow10, triangular, Block, Digit, Int,
    Natural, Problem,
};
use crate::pell::{
    families, fundamental_unit, representative_bound, Coordinate, FundamentalUnit, PellEquation,
    RepresentativeBound, SolutionFamily,
};
use crate::residue::{discriminant_residues, orbit, quadratic_residues, ten_power_orbit, ResidueOrbit};

/// One parity class of a problem, reduced to a Pell equation.
///
/// A solution at index `i = i_stride * r + i_offset` exists iff
/// `x^2 - d y^2 = n` has a solution whose `coordinate` equals
/// `multiplier * 10^r` and whose other coordinate is `scale * sqrt(D_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseSpec {
    pub d: u64,
    pub n: i64,
    pub coordinate: Coordinate,
    pub multiplier: u64,
    pub scale: u64,
    pub i_stride: u64,
    pub i_offset: u64,
    /// First `r` this case is responsible for.
    pub r_first: u64,
    /// First `r` the modular argument is expected to handle.
    pub r_min: u64,
}

impl CaseSpec {
    pub fn index(&self, r: u64) -> u64 {
        self.i_stride * r + self.i_offset
    }

    pub fn target(&self, r: u64) -> Natural {
        pow10(r) * self.multiplier
    }

    pub fn equation(&self) -> Result<PellEquation> {
        PellEquation::new(self.d, self.n)
    }

    /// Exact check that the case's substitution matches `problem` at `r`.
    pub fn reduction_holds(&self, problem: Problem, r: u64) -> bool {
        let i = self.index(r);
        let Ok(disc) = problem.discriminant(i) else {
            return false;
        };
        let other_sq = Int::from(disc) * Int::from(self.scale * self.scale);
        let t = Int::from(self.target(r));
        let d = Int::from(self.d);
        let form = match self.coordinate {
            Coordinate::Y => other_sq - d * &t * &t,
            Coordinate::X => &t * &t - d * other_sq,
        };
        form == Int::from(self.n)
    }
}

/// The parity cases for digits that survive every residue screen.
pub fn case_split(d: Digit) -> Result<Vec<CaseSpec>> {
    let base = |d, n, coordinate, multiplier, scale, i_offset, r_first, r_min| CaseSpec {
        d,
        n,
        coordinate,
        multiplier,
        scale,
        i_stride: 2,
        i_offset,
        r_first,
        r_min,
    };
    use Coordinate::{X, Y};
    match d.get() {
        1 => Ok(vec![base(2, 1, Y, 2, 3, 0, 1, 1), base(20, 1, Y, 2, 3, 1, 1, 1)]),
        // r = 1 (i = 2) is the solution 55; y = 20 is not divisible by 8
        5 => Ok(vec![base(10, -31, Y, 2, 3, 0, 1, 2)]),
        // even i: 16 t^2 - 3 p^2 = 13 with t = 10^r, so x = 4 t and y = p
        6 => Ok(vec![base(3, 13, X, 4, 1, 0, 2, 2), base(30, -39, Y, 4, 3, 1, 2, 2)]),
        other => Err(Error::Domain(format!(
            "digit {other} is settled by residue screens, not by Pell cases"
        ))),
    }
}

/// `x^2 - 22c y^2 = 1089 - 88c` with `x = 33 (2k+1)`, `y = 2 * 10^i`.
pub fn block_case(c: Block) -> CaseSpec {
    let c = c.get() as u64;
    CaseSpec {
        d: 22 * c,
        n: 1089 - 88 * c as i64,
        coordinate: Coordinate::Y,
        multiplier: 2,
        scale: 33,
        i_stride: 1,
        i_offset: 0,
        r_first: 3,
        r_min: 3,
    }
}

/// The cases a certificate for `problem` may legitimately address.
pub fn canonical_cases(problem: Problem) -> Vec<CaseSpec> {
    match problem {
        Problem::Digit(d) => case_split(d).unwrap_or_default(),
        Problem::Block(c) => vec![block_case(c)],
    }
}

/// Historical modulus pairs `(r_start, m1, m2)` for the digit cases.
pub fn classical_moduli(case: &CaseSpec) -> Option<(u64, u64, u64)> {
    match (case.d, case.n) {
        (2, 1) => Some((1, 5, 7)),
        (20, 1) => Some((1, 5, 11)),
        (10, -31) => Some((2, 8, 7)),
        (3, 13) => Some((2, 50, 241)),
        (30, -39) => Some((4, 64, 31)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub i: u64,
    pub discriminant: Natural,
    pub root: Natural,
    pub k: Natural,
    pub triangular: Natural,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonSquareStep {
    pub i: u64,
    pub discriminant: Natural,
    pub floor_root: Natural,
}

/// `D_i mod modulus` lies in `residues`, none of them a square, for all
/// `i = i_from + j * stride`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenStep {
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub i_from: u64,
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofStep {
    Witness(WitnessStep),
    NonSquare(NonSquareStep),
    Screen(ScreenStep),
    /// A screen over one parity class of `i`.
    QrScreen(ScreenStep),
    Obstruction(Box<ObstructionCertificate>),
    SquareForm(SquareFormCertificate),
}

/// The indices `i` a step settles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Single(u64),
    Progression { from: u64, stride: u64 },
}

impl Scope {
    pub fn contains(self, i: u64) -> bool {
        match self {
            Scope::Single(j) => i == j,
            Scope::Progression { from, stride } => i >= from && (i - from).is_multiple_of(stride),
        }
    }
}

impl ProofStep {
    pub fn scope(&self) -> Scope {
        match self {
            ProofStep::Witness(w) => Scope::Single(w.i),
            ProofStep::NonSquare(s) => Scope::Single(s.i),
            ProofStep::Screen(s) | ProofStep::QrScreen(s) => Scope::Progression {
                from: s.i_from,
                stride: s.stride,
            },
            ProofStep::Obstruction(c) => Scope::Progression {
                from: c.case.index(c.case.r_first),
                stride: c.case.i_stride,
            },
            ProofStep::SquareForm(c) => Scope::Progression {
                from: c.case.index(c.case.r_first),
                stride: c.case.i_stride,
            },
        }
    }
}

/// Indices `i >= 1` covered by no scope. Past the largest threshold every
/// scope is periodic with period `lcm` of the strides, so one more period
/// of checking settles all larger `i`.
pub fn uncovered_indices(scopes: &[Scope]) -> Result<Vec<u64>> {
    let mut horizon = 1u64;
    let mut period = 1u64;
    for s in scopes {
        match *s {
            Scope::Single(i) => horizon = horizon.max(i),
            Scope::Progression { from, stride } => {
                if stride == 0 {
                    return Err(Error::Domain("scope stride must be positive".into()));
                }
                horizon = horizon.max(from);
                period = period.lcm(&stride);
            }
        }
    }
    if period > 1_000_000 || horizon > 1_000_000 {
        return Err(Error::Budget("coverage audit horizon too large".into()));
    }
    Ok((1..=horizon + period)
        .filter(|&i| !scopes.iter().any(|s| s.contains(i)))
        .collect())
}

/// A settled problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub problem: Problem,
    pub steps: Vec<ProofStep>,
    /// Every triangular number of the required shape, ascending.
    pub solutions: Vec<Natural>,
}

impl Proof {
    pub fn scopes(&self) -> Vec<Scope> {
        self.steps.iter().map(ProofStep::scope).collect()
    }

    /// Solutions exhibited by witnesses and small-case hits.
    pub fn exhibited_solutions(&self) -> Vec<Natural> {
        let mut found = BTreeSet::new();
        for step in &self.steps {
            match step {
                ProofStep::Witness(w) => {
                    found.insert(w.triangular.clone());
                }
                ProofStep::Obstruction(c) => {
                    for hit in c.small_cases.iter().filter_map(|s| s.hit.as_ref()) {
                        found.insert(hit.triangular.clone());
                    }
                }
                _ => {}
            }
        }
        found.into_iter().collect()
    }

    pub fn certificates(&self) -> impl Iterator<Item = &ObstructionCertificate> {
        self.steps.iter().filter_map(|s| match s {
            ProofStep::Obstruction(c) => Some(c.as_ref()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScreenOutcome {
    Keep,
    Reject { residue: u64 },
}

/// `D_i = 1 + 8d (mod 10)` for every `i`.
pub fn screen_mod10(d: Digit) -> ScreenOutcome {
    let residue = (1 + 8 * d.get() as u64) % 10;
    let squares = quadratic_residues(10).expect("10 >= 2");
    if squares.contains(&residue) {
        ScreenOutcome::Keep
    } else {
        ScreenOutcome::Reject { residue }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LastTwoOutcome {
    Keep,
    Reject { ending: u64, i_from: u64 },
}

/// Rejects when the last two digits of `D_i` settle on a non-square ending.
pub fn screen_last_two(d: Digit) -> LastTwoOutcome {
    let problem = Problem::Digit(d);
    let squares = quadratic_residues(100).expect("100 >= 2");
    for i_from in 1..=4 {
        let endings = discriminant_residues(problem, 100, i_from, 1);
        if endings.len() == 1 {
            let ending = *endings.first().unwrap();
            return if squares.contains(&ending) {
                LastTwoOutcome::Keep
            } else {
                LastTwoOutcome::Reject { ending, i_from }
            };
        }
    }
    LastTwoOutcome::Keep
}

/// A screen over `i = i_from, i_from + stride, ...` using the smallest
/// modulus up to `max_modulus` whose attained residues are all non-squares.
pub fn find_screen(problem: Problem, i_from: u64, stride: u64, max_modulus: u64) -> Option<ScreenStep> {
    (2..=max_modulus).find_map(|m| {
        let squares = quadratic_residues(m).ok()?;
        let residues = discriminant_residues(problem, m, i_from, stride);
        residues.iter().all(|r| !squares.contains(r)).then(|| ScreenStep {
            modulus: m,
            residues: residues.into_iter().collect(),
            i_from,
            stride,
        })
    })
}

/// Evaluates `D_i` exactly.
pub fn direct_step(problem: Problem, i: u64) -> Result<ProofStep> {
    let discriminant = problem.discriminant(i)?;
    Ok(match is_perfect_square(&discriminant) {
        Some(root) => {
            let k: Natural = (&root - 1u32) >> 1;
            let t = triangular(&k)?;
            ProofStep::Witness(WitnessStep {
                i,
                discriminant,
                root,
                k,
                triangular: t,
            })
        }
        None => ProofStep::NonSquare(NonSquareStep {
            i,
            floor_root: isqrt(&discriminant),
            discriminant,
        }),
    })
}

/// Every `i <= i_max` whose discriminant is a square.
pub fn small_i_witnesses(problem: Problem, i_max: u64) -> Result<Vec<WitnessStep>> {
    let mut out = Vec::new();
    for i in 1..=i_max {
        if let ProofStep::Witness(w) = direct_step(problem, i)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Everything a certificate needs about a case's equation.
#[derive(Debug, Clone)]
pub struct CaseContext {
    pub problem: Problem,
    pub case: CaseSpec,
    pub equation: PellEquation,
    pub unit: FundamentalUnit,
    pub bound: RepresentativeBound,
    pub families: Vec<SolutionFamily>,
}

impl CaseContext {
    pub fn new(problem: Problem, case: CaseSpec) -> Result<Self> {
        let equation = case.equation()?;
        let unit = fundamental_unit(case.d)?;
        let bound = representative_bound(&equation, &unit);
        let families = families(&equation)?;
        Ok(CaseContext {
            problem,
            case,
            equation,
            unit,
            bound,
            families,
        })
    }

    fn orbits(&self, m: u64) -> Result<Vec<ResidueOrbit>> {
        self.families.iter().map(|f| orbit(f, m)).collect()
    }
}

/// Family members whose target coordinate is `multiplier * 10^r` for
/// `r` in `r_from..r_to`.
pub fn small_case_check(ctx: &CaseContext, r_from: u64, r_to: u64) -> Result<Vec<SmallCaseRecord>> {
    let case = &ctx.case;
    let mut records = Vec::new();
    for r in r_from..r_to {
        let target = Int::from(case.target(r));
        let mut hit = None;
        for (family, fam) in ctx.families.iter().enumerate() {
            for (step, (x, y)) in fam.iter().enumerate() {
                let value = case.coordinate.pick(&x, &y);
                if *value > target {
                    break;
                }
                if *value == target {
                    let other = case.coordinate.other().pick(&x, &y).to_biguint().expect("x, y >= 0");
                    hit = Some(map_back(ctx.problem, case, r, family, step, other)?);
                }
            }
        }
        records.push(SmallCaseRecord {
            r,
            target: target.to_biguint().unwrap(),
            hit,
        });
    }
    Ok(records)
}

fn map_back(
    problem: Problem,
    case: &CaseSpec,
    r: u64,
    family: usize,
    step: usize,
    other: Natural,
) -> Result<SmallCaseHit> {
    let (p, rem) = other.div_rem(&Natural::from(case.scale));
    if !rem.is_zero() || p.is_even() {
        return Err(Error::Domain(format!(
            "solution with {} = {} does not map back to an odd root",
            case.coordinate.other(),
            other
        )));
    }
    let k: Natural = (&p - 1u32) >> 1;
    let t = triangular(&k)?;
    debug_assert_eq!(t, problem.value(case.index(r))?);
    Ok(SmallCaseHit {
        family,
        step,
        other,
        k,
        triangular: t,
    })
}

fn avoids(m1_orbits: &[ResidueOrbit], m2_orbits: &[ResidueOrbit], coord: Coordinate, forbidden: &BTreeSet<u64>) -> bool {
    m1_orbits.iter().zip(m2_orbits).all(|(o1, o2)| {
        let idx = o1.index_set(coord, 0);
        o2.values_at(coord, &idx).is_disjoint(forbidden)
    })
}

/// Builds the certificate for `(r_start, m1, m2)` when the pair works.
pub fn build_certificate(ctx: &CaseContext, r_start: u64, m1: u64, m2: u64) -> Result<Option<ObstructionCertificate>> {
    let case = &ctx.case;
    if m1 < 2 || m2 < 2 || r_start < case.r_min {
        return Ok(None);
    }
    if !(case.target(r_start) % m1).is_zero() {
        return Ok(None);
    }
    let ten = ten_power_orbit(case.multiplier, m2, r_start)?;
    let mut records = Vec::with_capacity(ctx.families.len());
    for fam in &ctx.families {
        let o1 = orbit(fam, m1)?;
        let o2 = orbit(fam, m2)?;
        let idx = o1.index_set(case.coordinate, 0);
        let values = o2.values_at(case.coordinate, &idx);
        if !values.is_disjoint(&ten.attained) {
            return Ok(None);
        }
        let (x0, y0) = fam.base();
        records.push(FamilyRecord {
            x0: x0.clone(),
            y0: y0.clone(),
            period_m1: o1.period(),
            period_m2: o2.period(),
            index_set_m1: idx.members().iter().copied().collect(),
            values_m2: values.into_iter().collect(),
        });
    }
    let small_cases = small_case_check(ctx, case.r_first, r_start)?;
    Ok(Some(ObstructionCertificate {
        case: *case,
        unit_u: ctx.unit.u.clone(),
        unit_v: ctx.unit.v.clone(),
        bound: ctx.bound.clone(),
        brute_force_limit: BRUTE_FORCE_LIMIT,
        r_start,
        m1,
        m2,
        classical: classical_moduli(case) == Some((r_start, m1, m2)),
        ten_power: TenPowerRecord {
            preperiod: ten.preperiod,
            period: ten.period,
            attained: ten.attained.into_iter().collect(),
        },
        families: records,
        small_cases,
    }))
}

/// Limits for [`obstruction_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest prime power tried as `m2`.
    pub max_modulus: u64,
    /// How far past `r_min` the threshold `r_start` may move.
    pub extra_exponents: u64,
    /// Prime powers up to this bound are paired into composite `m2`.
    pub pair_pool: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_modulus: 10_000,
            extra_exponents: 4,
            pair_pool: 200,
        }
    }
}

/// Prime powers `p^k` with `2 <= p^k <= limit`, ascending.
pub fn prime_powers(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        for q in (p * p..=limit).step_by(p) {
            composite[q] = true;
        }
        let mut power = p;
        loop {
            out.push(power as u64);
            match power.checked_mul(p) {
                Some(next) if next <= limit => power = next,
                _ => break,
            }
        }
    }
    out.sort_unstable();
    out
}

/// Divisors of `n` of the form `2^a 5^b`, at least 2, ascending.
pub fn smooth_divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut two = 1u64;
    while n.is_multiple_of(two) {
        let mut five = 1u64;
        while n.is_multiple_of(two * five) {
            if two * five >= 2 {
                out.push(two * five);
            }
            five *= 5;
        }
        two *= 2;
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchFailure {
    pub attempts: Vec<String>,
}

/// Deterministic search for a modulus pair.
///
/// Thresholds `r_start` ascend from `r_min`; for each, `m2` ascends through
/// prime powers and then through products of two coprime prime powers, and
/// the smallest working `m1` is taken for the first workable `m2`. A larger
/// `m1` only shrinks the index set, so the largest admissible `m1` decides
/// whether any `m1` works with a given `m2`.
pub fn obstruction_search(ctx: &CaseContext, budget: SearchBudget) -> Result<ObstructionCertificate, SearchFailure> {
    let mut attempts = Vec::new();
    let singles = prime_powers(budget.max_modulus);
    let pool = prime_powers(budget.pair_pool);
    let mut pairs: Vec<u64> = Vec::new();
    for (a_pos, &a) in pool.iter().enumerate() {
        for &b in &pool[a_pos + 1..] {
            if a.gcd(&b) == 1 && a * b > budget.max_modulus {
                pairs.push(a * b);
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let phases: [(&str, &[u64]); 2] = [("prime powers", &singles), ("coprime products", &pairs)];
    for (label, candidates) in phases {
        for r_start in ctx.case.r_min..=ctx.case.r_min + budget.extra_exponents {
            match search_at(ctx, r_start, candidates) {
                Ok(Some(cert)) => return Ok(cert),
                Ok(None) => attempts.push(format!(
                    "r >= {r_start}: m1 | {}, m2 over {} {label}",
                    ctx.case.target(r_start),
                    candidates.len()
                )),
                Err(e) => {
                    attempts.push(format!("r >= {r_start}: {e}"));
                    break;
                }
            }
        }
    }
    Err(SearchFailure { attempts })
}

fn search_at(ctx: &CaseContext, r_start: u64, m2_candidates: &[u64]) -> Result<Option<ObstructionCertificate>> {
    let coord = ctx.case.coordinate;
    let target = ctx.case.target(r_start).to_u64().ok_or_else(|| {
        Error::Budget(format!("target {} exceeds machine width", ctx.case.target(r_start)))
    })?;
    let m1s = smooth_divisors(target);
    let Some(&m1_max) = m1s.last() else {
        return Ok(None);
    };
    let max_orbits = ctx.orbits(m1_max)?;
    let mut m1_cache: HashMap<u64, Vec<ResidueOrbit>> = HashMap::new();
    for &m2 in m2_candidates {
        let forbidden = ten_power_orbit(ctx.case.multiplier, m2, r_start)?.attained;
        let m2_orbits = ctx.orbits(m2)?;
        if !avoids(&max_orbits, &m2_orbits, coord, &forbidden) {
            continue;
        }
        for &m1 in &m1s {
            if let std::collections::hash_map::Entry::Vacant(e) = m1_cache.entry(m1) {
                e.insert(ctx.orbits(m1)?);
            }
            if avoids(&m1_cache[&m1], &m2_orbits, coord, &forbidden) {
                return build_certificate(ctx, r_start, m1, m2);
            }
        }
    }
    Ok(None)
}

/// Uses the historical pair when it validates, otherwise searches.
pub fn certify_case(ctx: &CaseContext, budget: SearchBudget) -> Result<ObstructionCertificate, SearchFailure> {
    if let Some((r_start, m1, m2)) = classical_moduli(&ctx.case) {
        if let Ok(Some(cert)) = build_certificate(ctx, r_start, m1, m2) {
            return Ok(cert);
        }
    }
    obstruction_search(ctx, budget)
}

/// All first-quadrant solutions of `x^2 - s^2 y^2 = n`, from the factorizations
/// `(x - s y)(x + s y) = n`, sorted by `(y, x)`.
pub fn square_form_solutions(s: u64, n: i64) -> Vec<(Natural, Natural)> {
    let abs_n = n.unsigned_abs() as i128;
    let s = s as i128;
    let mut out = BTreeSet::new();
    for a in 1..=abs_n {
        if abs_n % a != 0 {
            continue;
        }
        for low in [a, -a] {
            let high = n as i128 / low;
            let (sum, diff) = (low + high, high - low);
            if sum >= 0 && diff >= 0 && sum % 2 == 0 && diff % (2 * s) == 0 {
                out.insert((diff / (2 * s), sum / 2));
            }
        }
    }
    out.into_iter()
        .map(|(y, x)| (Natural::from(x as u128), Natural::from(y as u128)))
        .collect()
}

/// Why a proof could not be completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unresolved {
    pub problem: Problem,
    pub reason: String,
    pub attempts: Vec<String>,
    /// `D_i` was checked directly for every `i <= clearance`.
    pub clearance: u64,
    /// Triangular numbers found during that direct check.
    pub direct_solutions: Vec<Natural>,
}

impl fmt::Display for Unresolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} unresolved: {}", self.problem, self.reason)
    }
}

pub const CLEARANCE: u64 = 300;

fn unresolved(problem: Problem, reason: String, attempts: Vec<String>) -> Unresolved {
    let mut direct_solutions = Vec::new();
    for i in 1..=CLEARANCE {
        if let Ok(ProofStep::Witness(w)) = direct_step(problem, i) {
            direct_solutions.push(w.triangular);
        }
    }
    Unresolved {
        problem,
        reason,
        attempts,
        clearance: CLEARANCE,
        direct_solutions,
    }
}

/// Orders steps (direct evaluations by `i`, then screens, then Pell
/// arguments), fills any small uncovered `i` by direct evaluation, and
/// collects the solutions.
fn finish(problem: Problem, mut steps: Vec<ProofStep>) -> Result<Proof, Unresolved> {
    let scopes: Vec<Scope> = steps.iter().map(ProofStep::scope).collect();
    let gaps = uncovered_indices(&scopes).map_err(|e| unresolved(problem, e.to_string(), vec![]))?;
    for i in gaps {
        steps.push(direct_step(problem, i).map_err(|e| unresolved(problem, e.to_string(), vec![]))?);
    }
    steps.sort_by_key(|s| match s {
        ProofStep::Witness(w) => (0, w.i),
        ProofStep::NonSquare(n) => (0, n.i),
        ProofStep::Screen(s) => (1, s.i_from),
        ProofStep::QrScreen(s) => (2, s.i_from),
        ProofStep::Obstruction(c) => (3, c.case.i_offset),
        ProofStep::SquareForm(c) => (3, c.case.i_offset),
    });
    let mut proof = Proof {
        problem,
        steps,
        solutions: Vec::new(),
    };
    proof.solutions = proof.exhibited_solutions();
    Ok(proof)
}

/// Proves which triangular numbers are repdigits of `d`.
pub fn prove_digit(d: Digit) -> Result<Proof, Unresolved> {
    prove_digit_with(d, SearchBudget::default())
}

pub fn prove_digit_with(d: Digit, budget: SearchBudget) -> Result<Proof, Unresolved> {
    let problem = Problem::Digit(d);
    let fail = |e: Error| unresolved(problem, e.to_string(), vec![]);
    if let ScreenOutcome::Reject { residue } = screen_mod10(d) {
        let screen = ScreenStep {
            modulus: 10,
            residues: vec![residue],
            i_from: 1,
            stride: 1,
        };
        return finish(problem, vec![ProofStep::Screen(screen)]);
    }
    if let LastTwoOutcome::Reject { ending, i_from } = screen_last_two(d) {
        let screen = ScreenStep {
            modulus: 100,
            residues: vec![ending],
            i_from,
            stride: 1,
        };
        return finish(problem, vec![ProofStep::Screen(screen)]);
    }
    let mut steps: Vec<ProofStep> = small_i_witnesses(problem, 3)
        .map_err(fail)?
        .into_iter()
        .map(ProofStep::Witness)
        .collect();
    let cases = case_split(d).map_err(fail)?;
    for offset in 0..2 {
        if !cases.iter().any(|c| c.i_offset == offset) {
            match find_screen(problem, offset.max(1), 2, 64) {
                Some(screen) => steps.push(ProofStep::QrScreen(screen)),
                None => {
                    return Err(unresolved(
                        problem,
                        format!("no residue screen for i = {offset} (mod 2)"),
                        vec![],
                    ))
                }
            }
        }
    }
    for case in cases {
        let ctx = CaseContext::new(problem, case).map_err(fail)?;
        let cert = certify_case(&ctx, budget)
            .map_err(|f| unresolved(problem, format!("no modulus pair for {}", ctx.equation), f.attempts))?;
        steps.push(ProofStep::Obstruction(Box::new(cert)));
    }
    finish(problem, steps)
}

/// Proves which triangular numbers repeat the block `c`.
pub fn prove_block(c: Block, budget: SearchBudget) -> Result<Proof, Unresolved> {
    let problem = Problem::Block(c);
    let fail = |e: Error| unresolved(problem, e.to_string(), vec![]);
    let case = block_case(c);
    let mut steps = Vec::new();
    for i in 1..case.index(case.r_first) {
        steps.push(direct_step(problem, i).map_err(fail)?);
    }
    if let Some(root) = is_perfect_square_u128(case.d.into()) {
        let root = root as u64;
        let solutions = square_form_solutions(root, case.n);
        let hits: Vec<_> = solutions
            .iter()
            .filter(|(x, y)| {
                let t = case.coordinate.pick(x, y);
                (case.r_first..=40).any(|r| *t == case.target(r))
            })
            .collect();
        if !hits.is_empty() {
            return Err(unresolved(problem, "square-discriminant form has a solution of the target shape".into(), vec![]));
        }
        steps.push(ProofStep::SquareForm(SquareFormCertificate {
            case,
            root,
            solutions,
        }));
        return finish(problem, steps);
    }
    let ctx = CaseContext::new(problem, case).map_err(fail)?;
    let cert = obstruction_search(&ctx, budget)
        .map_err(|f| unresolved(problem, format!("no modulus pair for {}", ctx.equation), f.attempts))?;
    steps.push(ProofStep::Obstruction(Box::new(cert)));
    finish(problem, steps)
}
