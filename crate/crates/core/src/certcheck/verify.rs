//! Independent re-verification of a parsed proof.
//!
//! Nothing recorded in a certificate is taken on trust. Units, base
//! solutions, orbits, index sets, value sets, ten-power orbits, small cases
//! and witnesses are recomputed here with code separate from the prover's,
//! the mathematical claim is checked on the recomputed data, and only then
//! are the recorded tables compared field by field.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ObstructionCertificate, SmallCaseHit, SquareFormCertificate, BRUTE_FORCE_LIMIT};
use crate::natarith::{isqrt, isqrt_u128, pow10, Int, Natural, Problem};
use crate::pell::{class_representatives, Coordinate, FundamentalUnit, PellEquation};
use crate::prover::{
    canonical_cases, classical_moduli, uncovered_indices, CaseSpec, NonSquareStep, Proof, ProofStep,
    ScreenStep, WitnessStep,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(reason) => write!(f, "invalid: {reason}"),
        }
    }
}

type Check = Result<(), String>;

fn ensure(cond: bool, reason: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(reason())
    }
}

fn mismatch(field: &str) -> String {
    format!("recomputation mismatch: {field}")
}

/// Checks every step, the coverage of all `i >= 1`, and the solution list.
pub fn verify(doc: &Proof) -> Verdict {
    match check_proof(doc) {
        Ok(()) => Verdict::Valid,
        Err(reason) => Verdict::Invalid(reason),
    }
}

fn check_proof(doc: &Proof) -> Check {
    let problem = doc.problem;
    for (n, step) in doc.steps.iter().enumerate() {
        check_step(problem, step).map_err(|e| format!("step {}: {e}", n + 1))?;
    }
    let gaps = uncovered_indices(&doc.scopes()).map_err(|e| e.to_string())?;
    if let Some(i) = gaps.first() {
        return Err(format!("coverage gap at i = {i}"));
    }
    ensure(doc.solutions == doc.exhibited_solutions(), || "solution list mismatch".into())
}

fn check_step(problem: Problem, step: &ProofStep) -> Check {
    match step {
        ProofStep::Witness(w) => check_witness(problem, w),
        ProofStep::NonSquare(s) => check_non_square(problem, s),
        ProofStep::Screen(s) | ProofStep::QrScreen(s) => check_screen(problem, s),
        ProofStep::Obstruction(c) => check_obstruction(problem, c),
        ProofStep::SquareForm(c) => check_square_form(problem, c),
    }
}

fn check_witness(problem: Problem, w: &WitnessStep) -> Check {
    let disc = problem.discriminant(w.i).map_err(|e| e.to_string())?;
    ensure(w.discriminant == disc, || mismatch("discriminant"))?;
    ensure(&w.root * &w.root == w.discriminant, || "witness square mismatch".into())?;
    ensure(w.root.is_odd() && w.k == (&w.root - 1u32) >> 1, || "witness root does not give k".into())?;
    ensure(w.triangular == (&w.k * (&w.k + 1u32)) >> 1, || "witness triangular mismatch".into())?;
    let value = problem.value(w.i).map_err(|e| e.to_string())?;
    ensure(w.triangular == value, || "witness is not the repeated number".into())
}

fn check_non_square(problem: Problem, s: &NonSquareStep) -> Check {
    let disc = problem.discriminant(s.i).map_err(|e| e.to_string())?;
    ensure(s.discriminant == disc, || mismatch("discriminant"))?;
    let f = &s.floor_root;
    let below = f * f;
    let above = (f + 1u32) * (f + 1u32);
    ensure(below <= disc && disc < above, || "floor root does not bracket the discriminant".into())?;
    ensure(below != disc, || "discriminant is a square".into())
}

/// `D_i mod m` over `i = i_from + j * stride`, by iterating the state
/// `radix^i mod (radix - 1) m` to its first repeat.
fn screen_residues(problem: Problem, m: u64, i_from: u64, stride: u64) -> Result<BTreeSet<u64>, String> {
    let radix = problem.radix() as u128;
    let unit = problem.unit() as u128;
    let big_m = (radix - 1) * m as u128;
    let jump = pow_mod(radix, stride as u128, big_m);
    let mut state = pow_mod(radix, i_from as u128, big_m);
    let mut seen = BTreeSet::new();
    let mut values = BTreeSet::new();
    while seen.insert(state) {
        if seen.len() > 10_000_000 {
            return Err("screen period exceeds checker cap".into());
        }
        // radix^i = 1 (mod radix - 1), so the division is exact
        let repeated = (state + big_m - 1) % big_m / (radix - 1);
        values.insert(((1 + 8 * unit * repeated) % m as u128) as u64);
        state = state * jump % big_m;
    }
    Ok(values)
}

fn pow_mod(base: u128, mut exp: u128, m: u128) -> u128 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result
}

fn squares_mod(m: u64) -> BTreeSet<u64> {
    (0..m).map(|z| (z as u128 * z as u128 % m as u128) as u64).collect()
}

fn check_screen(problem: Problem, s: &ScreenStep) -> Check {
    ensure(s.modulus >= 2, || "modulus below 2".into())?;
    ensure(s.modulus <= 1_000_000, || "screen modulus exceeds checker cap".into())?;
    ensure(s.stride >= 1 && s.i_from >= 1, || "screen progression must start at i >= 1 with positive stride".into())?;
    let values = screen_residues(problem, s.modulus, s.i_from, s.stride)?;
    // spot-check the residue recursion against exact values
    for j in 0..4 {
        let i = s.i_from + j * s.stride;
        let exact = problem.discriminant(i).map_err(|e| e.to_string())? % s.modulus;
        ensure(values.contains(&exact.to_u64().unwrap()), || "screen recursion disagrees with exact value".into())?;
    }
    let squares = squares_mod(s.modulus);
    if let Some(r) = values.iter().find(|r| squares.contains(r)) {
        return Err(format!("residue {r} mod {} is a square", s.modulus));
    }
    ensure(s.residues.iter().copied().collect::<BTreeSet<_>>() == values, || mismatch("screen residues"))
}

/// Checks the case against the problem's reduction, and the algebraic
/// identity behind it at six values of `r` (it is polynomial in `10^r`).
fn check_case(problem: Problem, case: &CaseSpec) -> Check {
    ensure(canonical_cases(problem).contains(case), || {
        "case does not match the reduction for this problem".into()
    })?;
    for r in 1..=6 {
        let i = case.i_stride * r + case.i_offset;
        let disc = Int::from(problem.discriminant(i).map_err(|e| e.to_string())?);
        let t = Int::from(pow10(r) * case.multiplier);
        let s2 = Int::from(case.scale) * Int::from(case.scale);
        let d = Int::from(case.d);
        let lhs = match case.coordinate {
            Coordinate::Y => s2 * disc - d * &t * &t,
            Coordinate::X => &t * &t - d * s2 * disc,
        };
        ensure(lhs == Int::from(case.n), || format!("reduction identity fails at r = {r}"))?;
    }
    ensure(case.index(case.r_first) >= 1, || "case starts below i = 1".into())
}

/// Fundamental unit from the period of the continued fraction of `sqrt(D)`:
/// the convergent `p_{l-1}/q_{l-1}` for even period `l`, `p_{2l-1}/q_{2l-1}`
/// for odd `l`.
fn unit_from_period(d: u64) -> Result<(Natural, Natural), String> {
    let a0 = isqrt_u128(d as u128) as u64;
    if a0 * a0 == d {
        return Err(format!("D = {d} is a square"));
    }
    let mut partials = Vec::new();
    let (mut m, mut q) = (0u64, 1u64);
    loop {
        let a = (a0 + m) / q;
        m = a * q - m;
        q = (d - m * m) / q;
        let next = (a0 + m) / q;
        partials.push(next);
        if next == 2 * a0 {
            break;
        }
    }
    let period = partials.len();
    let needed = if period % 2 == 0 { period } else { 2 * period };
    let (mut p_prev, mut p) = (Natural::one(), Natural::from(a0));
    let (mut q_prev, mut qn) = (Natural::zero(), Natural::one());
    for idx in 0..needed - 1 {
        let a = partials[idx % period];
        let p_next = &p * a + &p_prev;
        let q_next = &qn * a + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut qn, q_next);
    }
    Ok((p, qn))
}

fn forward(d: u64, u: &Int, v: &Int, x: &Int, y: &Int) -> (Int, Int) {
    (u * x + v * y * d, v * x + u * y)
}

fn backward(d: u64, u: &Int, v: &Int, x: &Int, y: &Int) -> (Int, Int) {
    (u * x - v * y * d, u * y - v * x)
}

/// The least first-quadrant member of the chain of `x + y sqrt(D)` (or of its
/// negative, whichever is positive).
fn chain_start(d: u64, n: i64, u: &Int, v: &Int, x: Int, y: Int) -> (Int, Int) {
    let positive = match (x.is_negative(), y.is_negative()) {
        (false, false) => !(x.is_zero() && y.is_zero()),
        (true, true) => false,
        (false, true) => n > 0,
        (true, false) => n < 0,
    };
    let (mut x, mut y) = if positive { (x, y) } else { (-x, -y) };
    while x.is_negative() || y.is_negative() {
        (x, y) = forward(d, u, v, &x, &y);
    }
    loop {
        let (px, py) = backward(d, u, v, &x, &y);
        if px.is_negative() || py.is_negative() {
            return (x, y);
        }
        (x, y) = (px, py);
    }
}

const OWN_SCAN_LIMIT: u64 = 2_000_000;

/// First-quadrant solutions whose bounded coordinate is at most `limit`.
/// Small boxes are scanned here directly; larger ones use the sieved scan
/// from the Pell module, whose agreement with a direct scan is tested there.
fn box_solutions(eq: &PellEquation, unit: &FundamentalUnit, bounded: Coordinate, limit: u64) -> Result<Vec<(Int, Int)>, String> {
    let (d, n) = (eq.d() as i128, eq.n() as i128);
    if limit > OWN_SCAN_LIMIT {
        return class_representatives(eq, unit)
            .map(|v| v.into_iter().map(|(x, y)| (Int::from(x), Int::from(y))).collect())
            .map_err(|e| e.to_string());
    }
    let mut out = Vec::new();
    for t in 0..=limit as i128 {
        match bounded {
            Coordinate::Y => {
                let rhs = n + d * t * t;
                if rhs >= 0 {
                    let x = isqrt_u128(rhs as u128) as i128;
                    if x * x == rhs {
                        out.push((Int::from(x), Int::from(t)));
                    }
                }
            }
            Coordinate::X => {
                let rhs = t * t - n;
                if rhs >= 0 && rhs % d == 0 {
                    let y = isqrt_u128((rhs / d) as u128) as i128;
                    if y * y == rhs / d {
                        out.push((Int::from(t), Int::from(y)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Orbit of `(x_n mod m, y_n mod m)`; the step matrix has determinant 1, so
/// the orbit is purely periodic.
fn residue_orbit(d: u64, u: &Natural, v: &Natural, x0: &Int, y0: &Natural, m: u64) -> Result<Vec<(u64, u64)>, String> {
    let mm = m as u128;
    let red = |z: &Int| z.mod_floor(&Int::from(m)).to_u64().unwrap() as u128;
    let (u, v) = ((u % m).to_u64().unwrap() as u128, (v % m).to_u64().unwrap() as u128);
    let dv = (d as u128 % mm) * v % mm;
    let start = (red(x0), (y0 % m).to_u64().unwrap() as u128);
    let mut orbit = Vec::new();
    let mut cur = start;
    loop {
        orbit.push((cur.0 as u64, cur.1 as u64));
        if orbit.len() > 50_000_000 {
            return Err(format!("orbit mod {m} exceeds checker cap"));
        }
        cur = ((u * cur.0 + dv * cur.1) % mm, (v * cur.0 + u * cur.1) % mm);
        if cur == start {
            return Ok(orbit);
        }
    }
}

fn pick(c: Coordinate, pair: (u64, u64)) -> u64 {
    match c {
        Coordinate::X => pair.0,
        Coordinate::Y => pair.1,
    }
}

/// Ten-power orbit `c * 10^r mod m` for `r >= r_start`: attained set,
/// preperiod and period of `10^r mod m`.
fn ten_powers(c: u64, m: u64, r_start: u64) -> (BTreeSet<u64>, u64, u64) {
    let mm = m as u128;
    let mut power = pow_mod(10, r_start as u128, mm);
    let mut first: HashMap<u128, u64> = HashMap::new();
    let mut attained = BTreeSet::new();
    let mut r = 0u64;
    loop {
        if let Some(&at) = first.get(&power) {
            return (attained, at, r - at);
        }
        first.insert(power, r);
        attained.insert((c as u128 % mm * power % mm) as u64);
        power = power * 10 % mm;
        r += 1;
    }
}

fn check_obstruction(problem: Problem, cert: &ObstructionCertificate) -> Check {
    let case = &cert.case;
    check_case(problem, case)?;
    let eq = PellEquation::new(case.d, case.n).map_err(|e| e.to_string())?;

    let (u, v) = unit_from_period(case.d)?;
    ensure(&u * &u == &v * &v * case.d + 1u32, || "unit does not solve the norm-one equation".into())?;
    ensure(cert.unit_u == u && cert.unit_v == v, || "fundamental unit mismatch".into())?;
    let unit = FundamentalUnit { u: u.clone(), v: v.clone() };
    let (ui, vi) = (Int::from(u.clone()), Int::from(v.clone()));

    // class representatives lie in this box
    let abs_n = Natural::from(case.n.unsigned_abs());
    let (bounded, limit) = if case.n < 0 {
        (Coordinate::Y, isqrt(&(&abs_n * (&u + 1u32) / (2 * case.d))) + 2u32)
    } else {
        (Coordinate::X, isqrt(&(&abs_n * (&u + 1u32) / 2u32)) + 2u32)
    };
    ensure(cert.bound.coordinate == bounded && cert.bound.limit == limit, || mismatch("representative bound"))?;
    ensure(cert.brute_force_limit == BRUTE_FORCE_LIMIT, || format!("brute-force limit must be {BRUTE_FORCE_LIMIT}"))?;
    let limit = limit.to_u64().ok_or("representative bound exceeds machine width")?;

    let mut starts = BTreeSet::new();
    for (x, y) in box_solutions(&eq, &unit, bounded, limit)? {
        for (cx, cy) in [(x.clone(), y.clone()), (-x, y)] {
            let (sx, sy) = chain_start(case.d, case.n, &ui, &vi, cx, cy);
            starts.insert((sy, sx));
        }
    }
    let bases: Vec<(Int, Int)> = starts.into_iter().map(|(y, x)| (x, y)).collect();
    for f in &cert.families {
        ensure(eq.is_solution(&f.x0, &Int::from(f.y0.clone())), || format!("base ({}, {}) does not solve {eq}", f.x0, f.y0))?;
    }
    let recorded: Vec<(Int, Int)> = cert.families.iter().map(|f| (f.x0.clone(), Int::from(f.y0.clone()))).collect();
    ensure(recorded == bases, || "base solutions mismatch".into())?;

    // every small solution lies on one of the chains
    let cap = BRUTE_FORCE_LIMIT as i128;
    let mut on_chains = BTreeSet::new();
    for (x0, y0) in &bases {
        let (mut x, mut y) = (x0.clone(), y0.clone());
        while y <= Int::from(cap) {
            on_chains.insert((x.clone(), y.clone()));
            (x, y) = forward(case.d, &ui, &vi, &x, &y);
        }
    }
    let mut direct = BTreeSet::new();
    for y in 0..=cap {
        let rhs = case.n as i128 + case.d as i128 * y * y;
        if rhs >= 0 {
            let x = isqrt_u128(rhs as u128) as i128;
            if x * x == rhs {
                direct.insert((Int::from(x), Int::from(y)));
            }
        }
    }
    ensure(on_chains == direct, || "base set incomplete below the brute-force limit".into())?;

    ensure(case.r_first <= cert.r_start, || "threshold below the case's first exponent".into())?;
    let target = pow10(cert.r_start) * case.multiplier;
    ensure((&target % cert.m1).is_zero(), || "m1 does not divide the target".into())?;
    ensure(cert.classical == (classical_moduli(case) == Some((cert.r_start, cert.m1, cert.m2))), || {
        mismatch("classical flag")
    })?;

    let (attained, preperiod, period) = ten_powers(case.multiplier, cert.m2, cert.r_start);
    let mut derived = Vec::with_capacity(bases.len());
    for (x0, y0) in &bases {
        let y0 = y0.to_biguint().unwrap();
        let o1 = residue_orbit(case.d, &u, &v, x0, &y0, cert.m1)?;
        let o2 = residue_orbit(case.d, &u, &v, x0, &y0, cert.m2)?;
        let idx: Vec<u64> = (0..o1.len() as u64).filter(|&k| pick(case.coordinate, o1[k as usize]) == 0).collect();
        // n = k (mod P1) and n = j (mod P2) are compatible iff k = j (mod gcd)
        let g = (o1.len() as u64).gcd(&(o2.len() as u64));
        let classes: BTreeSet<u64> = idx.iter().map(|k| k % g).collect();
        let values: BTreeSet<u64> = (0..o2.len() as u64)
            .filter(|j| classes.contains(&(j % g)))
            .map(|j| pick(case.coordinate, o2[j as usize]))
            .collect();
        if !values.is_disjoint(&attained) {
            return Err("value set intersects ten-power orbit".into());
        }
        derived.push((o1.len() as u64, o2.len() as u64, idx, values));
    }

    let recorded_ten = (&cert.ten_power.attained, cert.ten_power.preperiod, cert.ten_power.period);
    ensure(recorded_ten == (&attained.iter().copied().collect(), preperiod, period), || mismatch("ten-power orbit"))?;
    for (f, (p1, p2, idx, values)) in cert.families.iter().zip(&derived) {
        ensure(f.period_m1 == *p1 && f.period_m2 == *p2, || mismatch("orbit period"))?;
        ensure(f.index_set_m1 == *idx, || mismatch("index set"))?;
        ensure(f.values_m2.iter().copied().collect::<BTreeSet<_>>() == *values, || mismatch("value set"))?;
    }

    check_small_cases(problem, cert, &bases, &ui, &vi)
}

fn check_small_cases(problem: Problem, cert: &ObstructionCertificate, bases: &[(Int, Int)], u: &Int, v: &Int) -> Check {
    let case = &cert.case;
    let rs: Vec<u64> = cert.small_cases.iter().map(|s| s.r).collect();
    ensure(rs == (case.r_first..cert.r_start).collect::<Vec<_>>(), || "small cases do not cover the exponents below the threshold".into())?;
    for record in &cert.small_cases {
        let target = pow10(record.r) * case.multiplier;
        ensure(record.target == target, || mismatch("small-case target"))?;
        let t = Int::from(target);
        let mut hit = None;
        for (family, (x0, y0)) in bases.iter().enumerate() {
            let (mut x, mut y) = (x0.clone(), y0.clone());
            let mut step = 0usize;
            loop {
                let (value, other) = match case.coordinate {
                    Coordinate::X => (&x, &y),
                    Coordinate::Y => (&y, &x),
                };
                if *value > t {
                    break;
                }
                if *value == t {
                    hit = Some((family, step, other.to_biguint().unwrap()));
                }
                (x, y) = forward(case.d, u, v, &x, &y);
                step += 1;
            }
        }
        match (&record.hit, hit) {
            (None, None) => {}
            (Some(h), Some((family, step, other))) => {
                ensure(h.family == family && h.step == step && h.other == other, || mismatch("small-case solution"))?;
                check_hit(problem, case, record.r, h)?;
            }
            _ => return Err(mismatch("small-case outcome")),
        }
    }
    Ok(())
}

fn check_hit(problem: Problem, case: &CaseSpec, r: u64, h: &SmallCaseHit) -> Check {
    let (p, rem) = h.other.div_rem(&Natural::from(case.scale));
    ensure(rem.is_zero() && p.is_odd(), || "small-case solution does not map back to an odd root".into())?;
    let k: Natural = (&p - 1u32) >> 1;
    ensure(h.k == k, || mismatch("small-case k"))?;
    ensure(h.triangular == (&k * (&k + 1u32)) >> 1, || mismatch("small-case triangular"))?;
    let value = problem.value(case.index(r)).map_err(|e| e.to_string())?;
    ensure(h.triangular == value, || "small-case solution is not the repeated number".into())
}

fn check_square_form(problem: Problem, cert: &SquareFormCertificate) -> Check {
    let case = &cert.case;
    ensure(canonical_cases(problem).contains(case), || "case does not match the reduction for this problem".into())?;
    ensure(cert.root * cert.root == case.d, || "D is not the square of the recorded root".into())?;
    ensure(case.n != 0, || "square form with N = 0 has infinitely many solutions".into())?;
    // (s y - x)(s y + x) = -N or (x - s y)(x + s y) = N force s y <= |N|
    let s = cert.root as i128;
    let n = case.n as i128;
    let mut found = Vec::new();
    for y in 0..=n.abs() / s {
        let rhs = n + s * s * y * y;
        if rhs >= 0 {
            let x = isqrt_u128(rhs as u128) as i128;
            if x * x == rhs {
                found.push((Natural::from(x as u128), Natural::from(y as u128)));
            }
        }
    }
    ensure(found == cert.solutions, || mismatch("square-form solutions"))?;
    for (x, y) in &found {
        let t = match case.coordinate {
            Coordinate::X => x,
            Coordinate::Y => y,
        };
        let (q, rem) = t.div_rem(&Natural::from(case.multiplier));
        let digits = q.to_string();
        let power_of_ten = rem.is_zero() && digits.starts_with('1') && digits[1..].bytes().all(|b| b == b'0');
        if power_of_ten && (digits.len() as u64 - 1) >= case.r_first {
            return Err("square form has a solution of the target shape".into());
        }
    }
    Ok(())
}
