//! The certificate text format.
//!
//! ```text
//! [proof]
//! problem: digit 6
//! solutions: 6,66,666
//! steps: 5
//! [witness]
//! i: 1
//! D: 49
//! ...
//! ```
//!
//! One `key: value` record per line (`key:` when the value is empty),
//! `[section]` headers, decimal integers without leading zeros, sets as
//! strictly ascending comma-separated lists, LF line endings, no blank
//! lines and no trailing whitespace. An `[obstruction]` is followed by its
//! `[family]` and `[small-case]` sections, a `[square-form]` by its
//! `[solution]` sections.

use std::fmt::Display;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use super::{
    FamilyRecord, ObstructionCertificate, SmallCaseHit, SmallCaseRecord, SquareFormCertificate,
    TenPowerRecord,
};
use crate::natarith::{Block, Digit, Int, Natural, Problem};
use crate::pell::{Coordinate, RepresentativeBound};
use crate::prover::{CaseSpec, NonSquareStep, Proof, ProofStep, ScreenStep, WitnessStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate section [{name}]")]
    DuplicateSection { line: usize, name: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: `{value}` is not a decimal integer")]
    NonDecimal { line: usize, value: String },
    #[error("line {line}: set `{key}` is not strictly ascending")]
    UnsortedSet { line: usize, key: String },
    #[error("line {line}: missing key `{key}` in [{section}]")]
    MissingKey { line: usize, section: String, key: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unexpected section [{name}]")]
    UnexpectedSection { line: usize, name: String },
    #[error("line {line}: malformed line: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: truncated input: {detail}")]
    Truncated { line: usize, detail: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::UnknownKey { line, .. }
            | ParseError::DuplicateSection { line, .. }
            | ParseError::DuplicateKey { line, .. }
            | ParseError::NonDecimal { line, .. }
            | ParseError::UnsortedSet { line, .. }
            | ParseError::MissingKey { line, .. }
            | ParseError::UnknownSection { line, .. }
            | ParseError::UnexpectedSection { line, .. }
            | ParseError::Malformed { line, .. }
            | ParseError::Truncated { line, .. }
            | ParseError::Invalid { line, .. } => *line,
        }
    }
}

struct Writer(String);

impl Writer {
    fn section(&mut self, name: &str) {
        writeln!(self.0, "[{name}]").unwrap();
    }

    fn kv(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        if value.is_empty() {
            writeln!(self.0, "{key}:").unwrap();
        } else {
            writeln!(self.0, "{key}: {value}").unwrap();
        }
    }

    fn set<T: Display>(&mut self, key: &str, items: &[T]) {
        let joined: Vec<String> = items.iter().map(ToString::to_string).collect();
        self.kv(key, joined.join(","));
    }

    fn case(&mut self, case: &CaseSpec) {
        self.kv("coordinate", case.coordinate);
        self.kv("multiplier", case.multiplier);
        self.kv("scale", case.scale);
        self.kv("i-stride", case.i_stride);
        self.kv("i-offset", case.i_offset);
        self.kv("r-first", case.r_first);
        self.kv("r-min", case.r_min);
    }
}

/// Canonical text of a proof.
pub fn serialize(proof: &Proof) -> String {
    let mut w = Writer(String::new());
    w.section("proof");
    w.kv("problem", proof.problem);
    w.set("solutions", &proof.solutions);
    w.kv("steps", proof.steps.len());
    for step in &proof.steps {
        match step {
            ProofStep::Witness(s) => {
                w.section("witness");
                w.kv("i", s.i);
                w.kv("D", &s.discriminant);
                w.kv("root", &s.root);
                w.kv("k", &s.k);
                w.kv("T", &s.triangular);
            }
            ProofStep::NonSquare(s) => {
                w.section("non-square");
                w.kv("i", s.i);
                w.kv("D", &s.discriminant);
                w.kv("floor-root", &s.floor_root);
            }
            ProofStep::Screen(s) | ProofStep::QrScreen(s) => {
                w.section(if matches!(step, ProofStep::Screen(_)) { "screen" } else { "qr-screen" });
                w.kv("modulus", s.modulus);
                w.set("residues", &s.residues);
                w.kv("i-from", s.i_from);
                w.kv("stride", s.stride);
            }
            ProofStep::Obstruction(c) => write_obstruction(&mut w, c),
            ProofStep::SquareForm(c) => {
                w.section("square-form");
                w.kv("D", c.case.d);
                w.kv("N", c.case.n);
                w.kv("root", c.root);
                w.case(&c.case);
                w.kv("solutions", c.solutions.len());
                for (x, y) in &c.solutions {
                    w.section("solution");
                    w.kv("x", x);
                    w.kv("y", y);
                }
            }
        }
    }
    w.0
}

fn write_obstruction(w: &mut Writer, c: &ObstructionCertificate) {
    w.section("obstruction");
    w.kv("D", c.case.d);
    w.kv("N", c.case.n);
    w.case(&c.case);
    w.kv("u", &c.unit_u);
    w.kv("v", &c.unit_v);
    w.kv("bound-coordinate", c.bound.coordinate);
    w.kv("bound", &c.bound.limit);
    w.kv("brute-force-limit", c.brute_force_limit);
    w.kv("r-start", c.r_start);
    w.kv("m1", c.m1);
    w.kv("m2", c.m2);
    w.kv("classical", c.classical);
    w.kv("ten-power-preperiod", c.ten_power.preperiod);
    w.kv("ten-power-period", c.ten_power.period);
    w.set("ten-power-set", &c.ten_power.attained);
    w.kv("families", c.families.len());
    w.kv("small-cases", c.small_cases.len());
    for f in &c.families {
        w.section("family");
        w.kv("x0", &f.x0);
        w.kv("y0", &f.y0);
        w.kv("period-m1", f.period_m1);
        w.kv("period-m2", f.period_m2);
        w.set("index-set-m1", &f.index_set_m1);
        w.set("values-m2", &f.values_m2);
    }
    for s in &c.small_cases {
        w.section("small-case");
        w.kv("r", s.r);
        w.kv("target", &s.target);
        match &s.hit {
            None => w.kv("outcome", "none"),
            Some(h) => {
                w.kv("outcome", "solution");
                w.kv("family", h.family);
                w.kv("step", h.step);
                w.kv("other", &h.other);
                w.kv("k", &h.k);
                w.kv("T", &h.triangular);
            }
        }
    }
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

fn lex(text: &str) -> Result<Vec<Section>, ParseError> {
    if text.is_empty() {
        return Err(ParseError::Truncated { line: 1, detail: "empty input".into() });
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    let last = lines.pop().unwrap_or_default();
    if !last.is_empty() {
        return Err(ParseError::Truncated {
            line: lines.len() + 1,
            detail: "missing final newline".into(),
        });
    }
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in lines.iter().enumerate() {
        let line = idx + 1;
        let malformed = |detail: &str| ParseError::Malformed { line, detail: detail.into() };
        if raw.is_empty() {
            return Err(malformed("blank line"));
        }
        if raw.ends_with(|c: char| c.is_whitespace()) {
            return Err(malformed("trailing whitespace"));
        }
        if let Some(name) = raw.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| malformed("unterminated section header"))?;
            if !is_ident(name) {
                return Err(malformed("bad section name"));
            }
            sections.push(Section { name: name.into(), line, entries: Vec::new() });
            continue;
        }
        let (key, value) = match raw.split_once(": ") {
            Some((k, v)) => (k, v),
            None => (raw.strip_suffix(':').ok_or_else(|| malformed("expected `key: value`"))?, ""),
        };
        if !is_ident(key) {
            return Err(malformed("bad key"));
        }
        let section = sections.last_mut().ok_or_else(|| malformed("record before any section"))?;
        if section.entries.iter().any(|(k, _, _)| k == key) {
            return Err(ParseError::DuplicateKey { line, key: key.into() });
        }
        section.entries.push((key.into(), value.into(), line));
    }
    Ok(sections)
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

/// Typed access to one section's records.
struct Fields<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    fn new(section: &'a Section, allowed: &[&str]) -> Result<Self, ParseError> {
        for (key, _, line) in &section.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(ParseError::UnknownKey {
                    line: *line,
                    section: section.name.clone(),
                    key: key.clone(),
                });
            }
        }
        Ok(Fields { section, used: vec![false; section.entries.len()] })
    }

    fn raw(&mut self, key: &str) -> Result<(&'a str, usize), ParseError> {
        let pos = self.section.entries.iter().position(|(k, _, _)| k == key).ok_or_else(|| {
            ParseError::MissingKey {
                line: self.section.line,
                section: self.section.name.clone(),
                key: key.into(),
            }
        })?;
        self.used[pos] = true;
        let (_, value, line) = &self.section.entries[pos];
        Ok((value.as_str(), *line))
    }

    fn num<T: FromStr>(&mut self, key: &str) -> Result<T, ParseError> {
        let (value, line) = self.raw(key)?;
        decimal(value, line)
    }

    fn modulus(&mut self, key: &str) -> Result<u64, ParseError> {
        let line = self.raw(key)?.1;
        let m: u64 = self.num(key)?;
        if m < 2 {
            return Err(ParseError::Invalid { line, message: "modulus below 2".into() });
        }
        Ok(m)
    }

    fn positive(&mut self, key: &str) -> Result<u64, ParseError> {
        let line = self.raw(key)?.1;
        let v: u64 = self.num(key)?;
        if v == 0 {
            return Err(ParseError::Invalid { line, message: format!("`{key}` must be positive") });
        }
        Ok(v)
    }

    fn set<T: FromStr + Ord>(&mut self, key: &str) -> Result<Vec<T>, ParseError> {
        let (value, line) = self.raw(key)?;
        if value.is_empty() {
            return Ok(Vec::new());
        }
        let items = value.split(',').map(|v| decimal(v, line)).collect::<Result<Vec<T>, _>>()?;
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ParseError::UnsortedSet { line, key: key.into() });
        }
        Ok(items)
    }

    fn coordinate(&mut self, key: &str) -> Result<Coordinate, ParseError> {
        match self.raw(key)? {
            ("x", _) => Ok(Coordinate::X),
            ("y", _) => Ok(Coordinate::Y),
            (other, line) => Err(ParseError::Invalid { line, message: format!("`{other}` is not a coordinate") }),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<bool, ParseError> {
        match self.raw(key)? {
            ("true", _) => Ok(true),
            ("false", _) => Ok(false),
            (other, line) => Err(ParseError::Invalid { line, message: format!("`{other}` is not a boolean") }),
        }
    }

    fn case(&mut self) -> Result<CaseSpec, ParseError> {
        Ok(CaseSpec {
            d: self.positive("D")?,
            n: self.num("N")?,
            coordinate: self.coordinate("coordinate")?,
            multiplier: self.positive("multiplier")?,
            scale: self.positive("scale")?,
            i_stride: self.positive("i-stride")?,
            i_offset: self.num("i-offset")?,
            r_first: self.num("r-first")?,
            r_min: self.num("r-min")?,
        })
    }
}

/// Canonical decimal: optional `-` (not on zero), no leading zeros.
fn decimal<T: FromStr>(value: &str, line: usize) -> Result<T, ParseError> {
    let digits = value.strip_prefix('-').unwrap_or(value);
    let canonical = !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'))
        && !(value.starts_with('-') && digits == "0");
    let bad = || ParseError::NonDecimal { line, value: value.into() };
    if !canonical {
        return Err(bad());
    }
    value.parse().map_err(|_| bad())
}

const CASE_KEYS: [&str; 9] = ["D", "N", "coordinate", "multiplier", "scale", "i-stride", "i-offset", "r-first", "r-min"];

fn keys(extra: &[&'static str]) -> Vec<&'static str> {
    CASE_KEYS.iter().chain(extra).copied().collect()
}

const KNOWN_SECTIONS: [&str; 10] = [
    "proof", "witness", "non-square", "screen", "qr-screen", "obstruction", "family", "small-case", "square-form", "solution",
];

struct Cursor<'a> {
    sections: &'a [Section],
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    /// The next section, which must be named one of `expected`.
    fn next(&mut self, expected: &[&str], what: &str) -> Result<&'a Section, ParseError> {
        let Some(section) = self.sections.get(self.pos) else {
            return Err(ParseError::Truncated { line: self.last_line + 1, detail: format!("expected {what}") });
        };
        self.pos += 1;
        if expected.contains(&section.name.as_str()) {
            Ok(section)
        } else {
            Err(unexpected(section))
        }
    }
}

fn unexpected(section: &Section) -> ParseError {
    let name = section.name.clone();
    let line = section.line;
    if name == "proof" {
        ParseError::DuplicateSection { line, name }
    } else if KNOWN_SECTIONS.contains(&name.as_str()) {
        ParseError::UnexpectedSection { line, name }
    } else {
        ParseError::UnknownSection { line, name }
    }
}

fn parse_problem(value: &str, line: usize) -> Result<Problem, ParseError> {
    let invalid = |message: String| ParseError::Invalid { line, message };
    let (kind, n) = value.split_once(' ').ok_or_else(|| invalid(format!("bad problem `{value}`")))?;
    let n: u8 = decimal(n, line)?;
    match kind {
        "digit" => Digit::new(n).map(Problem::Digit).map_err(|e| invalid(e.to_string())),
        "block" => Block::new(n).map(Problem::Block).map_err(|e| invalid(e.to_string())),
        other => Err(invalid(format!("unknown problem kind `{other}`"))),
    }
}

/// Parses a certificate, reporting the first problem with its line.
pub fn parse(text: &str) -> Result<Proof, ParseError> {
    let sections = lex(text)?;
    let last_line = text.lines().count();
    let final_header = sections.last().map(|s| s.line);
    parse_sections(&sections, last_line).map_err(|e| match e {
        // a record missing from the final section means the input was cut short
        ParseError::MissingKey { line, section, key } if Some(line) == final_header => ParseError::Truncated {
            line: last_line + 1,
            detail: format!("[{section}] ends before `{key}`"),
        },
        other => other,
    })
}

fn parse_sections(sections: &[Section], last_line: usize) -> Result<Proof, ParseError> {
    for s in sections {
        if !KNOWN_SECTIONS.contains(&s.name.as_str()) {
            return Err(ParseError::UnknownSection { line: s.line, name: s.name.clone() });
        }
    }
    let mut cur = Cursor { sections, pos: 0, last_line };
    let head = cur.next(&["proof"], "[proof]")?;
    let mut f = Fields::new(head, &["problem", "solutions", "steps"])?;
    let (problem, line) = f.raw("problem")?;
    let problem = parse_problem(problem, line)?;
    let solutions: Vec<Natural> = f.set("solutions")?;
    let count: usize = f.num("steps")?;
    let mut steps = Vec::new();
    for _ in 0..count {
        let s = cur.next(&["witness", "non-square", "screen", "qr-screen", "obstruction", "square-form"], "a proof step")?;
        steps.push(parse_step(s, &mut cur)?);
    }
    if let Some(extra) = sections.get(cur.pos) {
        return Err(unexpected(extra));
    }
    Ok(Proof { problem, steps, solutions })
}

fn parse_step(s: &Section, cur: &mut Cursor<'_>) -> Result<ProofStep, ParseError> {
    match s.name.as_str() {
        "witness" => {
            let mut f = Fields::new(s, &["i", "D", "root", "k", "T"])?;
            Ok(ProofStep::Witness(WitnessStep {
                i: f.positive("i")?,
                discriminant: f.num("D")?,
                root: f.num("root")?,
                k: f.num("k")?,
                triangular: f.num("T")?,
            }))
        }
        "non-square" => {
            let mut f = Fields::new(s, &["i", "D", "floor-root"])?;
            Ok(ProofStep::NonSquare(NonSquareStep {
                i: f.positive("i")?,
                discriminant: f.num("D")?,
                floor_root: f.num("floor-root")?,
            }))
        }
        "screen" | "qr-screen" => {
            let mut f = Fields::new(s, &["modulus", "residues", "i-from", "stride"])?;
            let screen = ScreenStep {
                modulus: f.modulus("modulus")?,
                residues: f.set("residues")?,
                i_from: f.positive("i-from")?,
                stride: f.positive("stride")?,
            };
            Ok(if s.name == "screen" { ProofStep::Screen(screen) } else { ProofStep::QrScreen(screen) })
        }
        "obstruction" => parse_obstruction(s, cur).map(|c| ProofStep::Obstruction(Box::new(c))),
        "square-form" => {
            let mut f = Fields::new(s, &keys(&["root", "solutions"]))?;
            let case = f.case()?;
            let root = f.positive("root")?;
            let count: usize = f.num("solutions")?;
            let mut solutions = Vec::with_capacity(count);
            for _ in 0..count {
                let sol = cur.next(&["solution"], "[solution]")?;
                let mut g = Fields::new(sol, &["x", "y"])?;
                solutions.push((g.num("x")?, g.num("y")?));
            }
            Ok(ProofStep::SquareForm(SquareFormCertificate { case, root, solutions }))
        }
        _ => Err(unexpected(s)),
    }
}

fn parse_obstruction(s: &Section, cur: &mut Cursor<'_>) -> Result<ObstructionCertificate, ParseError> {
    let mut f = Fields::new(
        s,
        &keys(&[
            "u",
            "v",
            "bound-coordinate",
            "bound",
            "brute-force-limit",
            "r-start",
            "m1",
            "m2",
            "classical",
            "ten-power-preperiod",
            "ten-power-period",
            "ten-power-set",
            "families",
            "small-cases",
        ]),
    )?;
    let case = f.case()?;
    let unit_u = f.num("u")?;
    let unit_v = f.num("v")?;
    let bound = RepresentativeBound { coordinate: f.coordinate("bound-coordinate")?, limit: f.num("bound")? };
    let brute_force_limit = f.num("brute-force-limit")?;
    let r_start = f.num("r-start")?;
    let m1 = f.modulus("m1")?;
    let m2 = f.modulus("m2")?;
    let classical = f.boolean("classical")?;
    let ten_power = TenPowerRecord {
        preperiod: f.num("ten-power-preperiod")?,
        period: f.num("ten-power-period")?,
        attained: f.set("ten-power-set")?,
    };
    let n_families: usize = f.num("families")?;
    let n_small: usize = f.num("small-cases")?;
    let mut families = Vec::with_capacity(n_families.min(1024));
    for _ in 0..n_families {
        let fs = cur.next(&["family"], "[family]")?;
        let mut g = Fields::new(fs, &["x0", "y0", "period-m1", "period-m2", "index-set-m1", "values-m2"])?;
        families.push(FamilyRecord {
            x0: g.num::<Int>("x0")?,
            y0: g.num("y0")?,
            period_m1: g.num("period-m1")?,
            period_m2: g.num("period-m2")?,
            index_set_m1: g.set("index-set-m1")?,
            values_m2: g.set("values-m2")?,
        });
    }
    let mut small_cases = Vec::with_capacity(n_small.min(1024));
    for _ in 0..n_small {
        let ss = cur.next(&["small-case"], "[small-case]")?;
        let mut g = Fields::new(ss, &["r", "target", "outcome", "family", "step", "other", "k", "T"])?;
        let r = g.num("r")?;
        let target = g.num("target")?;
        let hit = match g.raw("outcome")? {
            ("none", _) => {
                if let Some((key, _, line)) = ss.entries.iter().find(|(k, _, _)| !["r", "target", "outcome"].contains(&k.as_str())) {
                    return Err(ParseError::UnknownKey { line: *line, section: ss.name.clone(), key: key.clone() });
                }
                None
            }
            ("solution", _) => Some(SmallCaseHit {
                family: g.num("family")?,
                step: g.num("step")?,
                other: g.num("other")?,
                k: g.num("k")?,
                triangular: g.num("T")?,
            }),
            (other, line) => {
                return Err(ParseError::Invalid { line, message: format!("unknown outcome `{other}`") });
            }
        };
        small_cases.push(SmallCaseRecord { r, target, hit });
    }
    Ok(ObstructionCertificate {
        case,
        unit_u,
        unit_v,
        bound,
        brute_force_limit,
        r_start,
        m1,
        m2,
        classical,
        ten_power,
        families,
        small_cases,
    })
}
