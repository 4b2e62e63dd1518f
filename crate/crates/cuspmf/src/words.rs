//! Cyclic integer words of length 3τ, equivalence moves, normality and normalization.

use std::fmt;

use serde_json::{json, Value};

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::freegroup;
use crate::ring::{rat, LaurentLambda, Poly, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordKind {
    Band,
    Loop,
}

impl WordKind {
    pub fn name(self) -> &'static str {
        match self {
            WordKind::Band => "band",
            WordKind::Loop => "loop",
        }
    }
}

/// Word (w₁, …, w_{3τ}) read cyclically; stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    entries: Vec<i64>,
    kind: WordKind,
}

impl CyclicWord {
    pub fn new(entries: Vec<i64>, kind: WordKind) -> Result<Self> {
        if entries.is_empty() || entries.len() % 3 != 0 {
            return Err(Error::Parse(format!("word length {} is not a positive multiple of 3", entries.len())));
        }
        Ok(Self { entries, kind })
    }

    pub fn band(entries: &[i64]) -> Result<Self> {
        Self::new(entries.to_vec(), WordKind::Band)
    }

    pub fn loop_word(entries: &[i64]) -> Result<Self> {
        Self::new(entries.to_vec(), WordKind::Loop)
    }

    /// Parse "6,0,2,-1,…".
    pub fn parse(s: &str, kind: WordKind) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad word entry {:?}", t))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, kind)
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn kind(&self) -> WordKind {
        self.kind
    }

    pub fn with_kind(&self, kind: WordKind) -> Self {
        Self { entries: self.entries.clone(), kind }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tau(&self) -> usize {
        self.entries.len() / 3
    }

    /// Cyclic 0-based access.
    pub fn at(&self, j: i64) -> i64 {
        self.entries[j.rem_euclid(self.len() as i64) as usize]
    }

    /// l_i, the entries at positions ≡ 0 mod 3 (0-based).
    pub fn l_entries(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().step_by(3).copied()
    }

    /// Rotate left by 3k positions.
    pub fn shift(&self, k: i64) -> Self {
        let n = self.len() as i64;
        let s = (3 * k).rem_euclid(n) as usize;
        let mut e = self.entries.clone();
        e.rotate_left(s);
        Self { entries: e, kind: self.kind }
    }

    /// Smallest τ̃ dividing τ with shift(τ̃) = w; returns (periodic?, base word, τ/τ̃).
    pub fn period(&self) -> (bool, CyclicWord, usize) {
        let tau = self.tau();
        for t in 1..=tau {
            if tau % t == 0 && self.shift(t as i64) == *self {
                let base = Self { entries: self.entries[..3 * t].to_vec(), kind: self.kind };
                return (tau / t >= 2, base, tau / t);
            }
        }
        unreachable!("full rotation always fixes the word")
    }

    /// Lexicographically smallest triple shift.
    pub fn canonical_shift(&self) -> Self {
        (0..self.tau() as i64).map(|k| self.shift(k)).min_by(|a, b| a.entries.cmp(&b.entries)).unwrap()
    }

    /// True if `o` is a triple shift of `self`.
    pub fn is_shift_of(&self, o: &CyclicWord) -> bool {
        self.len() == o.len() && (0..self.tau() as i64).any(|k| self.shift(k).entries == o.entries)
    }

    pub fn to_json(&self) -> Value {
        json!({ "kind": self.kind.name(), "entries": self.entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = match v.get("kind").and_then(|k| k.as_str()) {
            Some("band") => WordKind::Band,
            Some("loop") => WordKind::Loop,
            _ => return Err(Error::Parse("word kind must be band or loop".into())),
        };
        let entries = v
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Parse("missing entries".into()))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| Error::Parse("entry is not an integer".into())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, kind)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

/// Unit c·λ^e of Q[λ, λ⁻¹]; eigenvalues and holonomies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Unit {
    pub coeff: Rat,
    pub exp: i64,
}

impl Unit {
    pub fn new(coeff: Rat, exp: i64) -> Result<Self> {
        if coeff.is_zero() {
            return Err(Error::Parse("eigenvalue must be nonzero".into()));
        }
        Ok(Self { coeff, exp })
    }

    /// The formal eigenvalue λ.
    pub fn lambda() -> Self {
        Self { coeff: rat(1), exp: 1 }
    }

    pub fn one() -> Self {
        Self { coeff: rat(1), exp: 0 }
    }

    pub fn minus_one() -> Self {
        Self { coeff: rat(-1), exp: 0 }
    }

    pub fn neg(&self) -> Self {
        Self { coeff: -self.coeff.clone(), exp: self.exp }
    }

    pub fn inverse(&self) -> Self {
        Self { coeff: self.coeff.recip(), exp: -self.exp }
    }

    pub fn mul(&self, o: &Unit) -> Self {
        Self { coeff: &self.coeff * &o.coeff, exp: self.exp + o.exp }
    }

    /// Multiply by (-1)^k.
    pub fn signed(&self, k: i64) -> Self {
        if k.rem_euclid(2) == 1 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.coeff.is_one()
    }

    pub fn is_minus_one(&self) -> bool {
        self.exp == 0 && self.coeff == rat(-1)
    }

    pub fn to_laurent(&self) -> LaurentLambda {
        LaurentLambda::monomial(self.coeff.clone(), self.exp)
    }

    pub fn to_poly(&self) -> Poly {
        Poly::constant(self.to_laurent())
    }

    /// Parse "c,e" meaning c·λ^e, with c an integer or p/q.
    pub fn parse(s: &str) -> Result<Self> {
        let (c, e) = s.split_once(',').ok_or_else(|| Error::Parse(format!("expected c,e got {:?}", s)))?;
        let coeff: Rat = c.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", c)))?;
        let exp = e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {:?}", e)))?;
        Self::new(coeff, exp)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "num": self.coeff.numer().to_i64(),
            "den": self.coeff.denom().to_i64(),
            "lam_exp": self.exp,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let g = |k: &str| v.get(k).and_then(|x| x.as_i64()).ok_or_else(|| Error::Parse(format!("missing {}", k)));
        let den = g("den")?;
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Self::new(crate::ring::rat_frac(g("num")?, den), g("lam_exp")?)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandDatum {
    pub word: CyclicWord,
    pub eigenvalue: Unit,
}

impl BandDatum {
    pub fn new(word: CyclicWord, eigenvalue: Unit) -> Self {
        Self { word: word.with_kind(WordKind::Band), eigenvalue }
    }

    pub fn multiplicity(&self) -> u32 {
        1
    }

    pub fn is_degenerate(&self) -> bool {
        self.word.entries() == [0, 0, 0] && self.eigenvalue.is_one()
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.word.to_json();
        v["lambda"] = self.eigenvalue.to_json();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDatum {
    pub word: CyclicWord,
    pub holonomy: Unit,
}

impl LoopDatum {
    pub fn new(word: CyclicWord, holonomy: Unit) -> Self {
        Self { word: word.with_kind(WordKind::Loop), holonomy }
    }

    pub fn multiplicity(&self) -> u32 {
        1
    }

    pub fn is_degenerate(&self) -> bool {
        self.word.entries() == [2, 2, 2] && self.holonomy.is_minus_one()
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.word.to_json();
        v["lambda"] = self.holonomy.to_json();
        v
    }
}

/// The five equivalence moves; positions are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Shift(i64),
    Insert000(usize),
    Remove000(usize),
    AddOnesAroundZero(usize),
    SubtractOnesAroundOne(usize),
}

pub fn apply_move(w: &CyclicWord, m: Move) -> Result<CyclicWord> {
    let n = w.len();
    let mut e = w.entries.clone();
    match m {
        Move::Shift(k) => return Ok(w.shift(k)),
        Move::Insert000(p) => {
            if p > n {
                return Err(Error::InvalidMove(format!("insert position {} beyond length {}", p, n)));
            }
            e.splice(p..p, [0, 0, 0]);
        }
        Move::Remove000(p) => {
            if p >= n || n < 6 || (0..3).any(|k| e[(p + k) % n] != 0) {
                return Err(Error::InvalidMove(format!("no removable (0,0,0) at {}", p)));
            }
            if p + 3 <= n {
                e.drain(p..p + 3);
            } else {
                // wraps the seam: keep the letter of entry p+3 equal to that of p
                let rest: Vec<i64> = (3..n).map(|t| e[(p + t) % n]).collect();
                let m = n - 3;
                let mut out = vec![0; m];
                for (t, v) in rest.into_iter().enumerate() {
                    out[(p % 3 + t) % m] = v;
                }
                e = out;
            }
        }
        Move::AddOnesAroundZero(j) | Move::SubtractOnesAroundOne(j) => {
            let (need, d) = if matches!(m, Move::AddOnesAroundZero(_)) { (0, 1) } else { (1, -1) };
            if j >= n || e[j] != need {
                return Err(Error::InvalidMove(format!("entry at {} is not {}", j, need)));
            }
            e[(j + n - 1) % n] += d;
            e[j] += d;
            e[(j + 1) % n] += d;
        }
    }
    CyclicWord::new(e, w.kind)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Which of the four normality conditions fails (1..=4).
    pub condition: u8,
    /// 0-based position of the centre (or start) of the offending subword.
    pub position: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.condition {
            1 => "(a,1,b) with a > 0 or b > 0",
            2 => "(a,0,b) with disallowed neighbours",
            3 => "subword (0,-1,...,-1,0)",
            _ => "word consists only of -1",
        };
        write!(f, "condition {} at position {}: {}", self.condition, self.position + 1, what)
    }
}

pub fn normality_violations(w: &CyclicWord) -> Vec<Violation> {
    let e = &w.entries;
    let n = e.len();
    let at = |j: usize| e[j % n];
    let mut out = Vec::new();
    for j in 0..n {
        let (a, c, b) = (at(j + n - 1), e[j], at(j + 1));
        if c == 1 && (a > 0 || b > 0) {
            out.push(Violation { condition: 1, position: j });
        }
        if c == 0 {
            let ok = (a <= -1 && b >= 1) || (a >= 1 && b <= -1) || (a >= 1 && b >= 1);
            if !ok {
                out.push(Violation { condition: 2, position: j });
            }
            let mut k = 0;
            while k + 2 <= n && at(j + 1 + k) == -1 {
                k += 1;
            }
            if k >= 1 && k + 2 <= n && at(j + 1 + k) == 0 {
                out.push(Violation { condition: 3, position: j });
            }
        }
    }
    if e.iter().all(|&v| v == -1) {
        out.push(Violation { condition: 4, position: 0 });
    }
    out
}

pub fn is_normal(w: &CyclicWord) -> (bool, Vec<Violation>) {
    let v = normality_violations(w);
    (v.is_empty(), v)
}

/// One rewriting step of the normalization, recorded for inspection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub rule: &'static str,
    pub before: Vec<i64>,
    pub after: Vec<i64>,
}

/// Replace the `len` entries starting at cyclic position `s` by `rep`, keeping the
/// letter of every untouched entry. Each rule below is invariant under the cyclic
/// relabelling α→β→γ, so the replaced block may start at any letter.
fn splice_cyclic(v: &[i64], s: usize, len: usize, rep: &[i64]) -> Vec<i64> {
    let mut r = v.to_vec();
    r.rotate_left(s);
    r.splice(0..len, rep.iter().copied());
    let m = r.len();
    if m > 0 {
        r.rotate_right(s % m);
    }
    r
}

fn run_len(r: &[i64], from: usize, value: i64) -> usize {
    r[from..].iter().take_while(|&&v| v == value).count()
}

/// Length-reducing (or terminal) rewrite anchored at rotation `s`.
fn try_rules(v: &[i64], s: usize) -> Option<(&'static str, Vec<i64>)> {
    let n = v.len();
    let mut r = v.to_vec();
    r.rotate_left(s);
    let rest_all = |from: usize, val: i64| r[from..].iter().all(|&x| x == val);

    if n >= 6 && r[0] == 0 && rest_all(1, -1) {
        let mut rep = vec![3];
        rep.extend(std::iter::repeat(2).take(n - 4));
        return Some(("zero-then-minus-ones", splice_cyclic(v, s, n, &rep)));
    }
    if n >= 6 && r[0] == 1 && rest_all(1, 2) {
        let mut rep = vec![-2];
        rep.extend(std::iter::repeat(-1).take(n - 4));
        return Some(("one-then-twos", splice_cyclic(v, s, n, &rep)));
    }
    if n >= 6 && r[1] == 0 && r[2] == 0 {
        return Some(("(c,0,0,d)", splice_cyclic(v, s, 4, &[r[0] + r[3]])));
    }
    if n >= 6 && r[1] == 1 && r[2] == 1 {
        return Some(("(c,1,1,d)", splice_cyclic(v, s, 4, &[r[0] + r[3] - 1])));
    }
    if n >= 6 && r[1] == 0 {
        let k = run_len(&r[..n], 2, -1).min(n - 3);
        if k >= 1 && 2 + k < n && r[2 + k] == 0 {
            let twos = std::iter::repeat(2).take(k - 1);
            if k + 4 <= n {
                let mut rep = vec![r[0] + 1];
                rep.extend(twos);
                rep.push(r[3 + k] + 1);
                return Some(("(c,0,-1..-1,0,d)", splice_cyclic(v, s, k + 4, &rep)));
            }
            if k + 3 == n {
                let mut rep = vec![r[0] + 2];
                rep.extend(twos);
                return Some(("(c,0,-1..-1,0)", splice_cyclic(v, s, k + 3, &rep)));
            }
        }
    }
    if n >= 6 && r[1] == 1 {
        let k = run_len(&r[..n], 2, 2).min(n - 3);
        if k >= 1 && 2 + k < n && r[2 + k] == 1 {
            let minus = std::iter::repeat(-1).take(k - 1);
            if k + 4 <= n {
                let mut rep = vec![r[0] - 1];
                rep.extend(minus);
                rep.push(r[3 + k] - 1);
                return Some(("(c,1,2..2,1,d)", splice_cyclic(v, s, k + 4, &rep)));
            }
            if k + 3 == n {
                let mut rep = vec![r[0] - 2];
                rep.extend(minus);
                return Some(("(c,1,2..2,1)", splice_cyclic(v, s, k + 3, &rep)));
            }
        }
    }
    None
}

fn next_rewrite(v: &[i64]) -> Option<(&'static str, Vec<i64>)> {
    let n = v.len();
    if v.iter().all(|&x| x == -1) {
        return Some(("all-minus-ones", vec![2; n]));
    }
    for s in 0..n {
        if let Some(hit) = try_rules(v, s) {
            return Some(hit);
        }
    }
    let at = |j: usize| v[j % n];
    // (a,1,b) with a ≥ 2 or b ≥ 2: subtract ones around the 1
    for j in 0..n {
        if v[j] == 1 && (at(j + n - 1) >= 2 || at(j + 1) >= 2) {
            let mut e = v.to_vec();
            e[(j + n - 1) % n] -= 1;
            e[j] -= 1;
            e[(j + 1) % n] -= 1;
            return Some(("subtract-ones-around-one", e));
        }
    }
    // (a,0,b) with a, b ≤ -1: add ones around the 0
    for j in 0..n {
        if v[j] == 0 && at(j + n - 1) <= -1 && at(j + 1) <= -1 {
            let mut e = v.to_vec();
            e[(j + n - 1) % n] += 1;
            e[j] += 1;
            e[(j + 1) % n] += 1;
            return Some(("add-ones-around-zero", e));
        }
    }
    None
}

/// Normal form together with the rewrite trace.
pub fn normalize_traced(w: &CyclicWord) -> Result<(CyclicWord, Vec<Rewrite>)> {
    let w = w.with_kind(WordKind::Loop);
    if !freegroup::is_essential(&w) {
        return Err(Error::NotEssential(w.to_string()));
    }
    let mut cur = w.entries.clone();
    let mut trace = Vec::new();
    let cap = 64 * (cur.len() + cur.iter().map(|v| v.unsigned_abs() as usize).sum::<usize>()) + 64;
    for _ in 0..cap {
        let cw = CyclicWord::new(cur.clone(), WordKind::Loop)?;
        if normality_violations(&cw).is_empty() {
            return Ok((cw.canonical_shift(), trace));
        }
        let Some((rule, next)) = next_rewrite(&cur) else {
            return Err(Error::NotNormal(format!("no rewrite applies to {}", cw)));
        };
        trace.push(Rewrite { rule, before: cur, after: next.clone() });
        cur = next;
    }
    Err(Error::NotNormal(format!("normalization of {} did not terminate", w)))
}

/// Normal word equivalent to `w`, as its lexicographically smallest shift.
pub fn normalize(w: &CyclicWord) -> Result<CyclicWord> {
    normalize_traced(w).map(|(n, _)| n)
}
