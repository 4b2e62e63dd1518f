//! Boundary-sequence oracle for polygons between a rank-one loop L(w′) and the Seidel
//! Lagrangian: enumerates sequences of sides, reads off their homotopy class and corner
//! monomial, and keeps those whose class matches the loop.

use std::collections::HashSet;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::freegroup::{FreeWord, Letter};
use crate::ring::{Poly, PolyMatrix};
use crate::words::{is_normal, CyclicWord};

/// Sides of the two triangles: `L*` bound A, `T*` (the tilde sides) bound B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Lx,
    Ly,
    Lz,
    Tx,
    Ty,
    Tz,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Lx => "l_x",
            Side::Ly => "l_y",
            Side::Lz => "l_z",
            Side::Tx => "~l_x",
            Side::Ty => "~l_y",
            Side::Tz => "~l_z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// boundary runs against the orientation of the Seidel Lagrangian
    Opposed,
    Aligned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Start {
    P,
    Q,
    R,
}

impl Start {
    pub fn parse(s: &str) -> Result<Start> {
        match s {
            "p" | "P" => Ok(Start::P),
            "q" | "Q" => Ok(Start::Q),
            "r" | "R" => Ok(Start::R),
            _ => Err(Error::Parse(format!("start point {:?}, expected p, q or r", s))),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    S,
    T,
    U,
}

impl End {
    fn index(self) -> usize {
        self as usize
    }

    fn rotate(self) -> End {
        match self {
            End::S => End::T,
            End::T => End::U,
            End::U => End::S,
        }
    }

    /// Point of the loop on a side of A; aligned paths never end back on l_x.
    fn on(o: Orientation, side: Side) -> Option<End> {
        match side {
            Side::Lx if o == Orientation::Opposed => Some(End::U),
            Side::Ly => Some(End::S),
            Side::Lz => Some(End::T),
            _ => None,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            End::S => "s",
            End::T => "t",
            End::U => "u",
        };
        write!(f, "{}", c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripSequence {
    pub letters: Vec<Side>,
    pub orientation: Orientation,
}

impl StripSequence {
    /// Checks the adjacency rules of its orientation.
    pub fn is_valid(&self) -> bool {
        let l = &self.letters;
        if l.first() != Some(&Side::Lx) {
            return false;
        }
        let ok_pairs = l.windows(2).all(|p| successors(self.orientation, p[0]).contains(&p[1]));
        let ok_triples = l.windows(3).all(|t| !forbidden(self.orientation, t[0], t[1], t[2]));
        ok_pairs && ok_triples
    }
}

impl fmt::Display for StripSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.letters.iter().map(|s| s.name()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripHit {
    pub end: End,
    pub monomial: Poly,
    pub sequence: StripSequence,
    pub class: FreeWord,
}

impl StripHit {
    pub fn to_json(&self) -> Value {
        json!({
            "end": self.end.to_string(),
            "monomial": self.monomial.to_string(),
            "orientation": format!("{:?}", self.sequence.orientation).to_lowercase(),
            "sequence": self.sequence.to_string(),
            "class": self.class.to_string(),
        })
    }
}

/// Opposed: from a side of A the path continues onto the next side of B; from a side of B it
/// continues onto A or turns at a corner of B. Aligned: only the two shapes l_x l_y and
/// (l_x l̃_y l_z)^{k+1}.
fn successors(o: Orientation, s: Side) -> &'static [Side] {
    use Side::*;
    match (o, s) {
        (Orientation::Opposed, Lx) => &[Tz],
        (Orientation::Opposed, Ly) => &[Tx],
        (Orientation::Opposed, Lz) => &[Ty],
        (Orientation::Opposed, Tx) => &[Lz, Tz],
        (Orientation::Opposed, Ty) => &[Lx, Tx],
        (Orientation::Opposed, Tz) => &[Ly, Ty],
        (Orientation::Aligned, Lx) => &[Ty, Ly],
        (Orientation::Aligned, Ty) => &[Lz],
        (Orientation::Aligned, Lz) => &[Lx],
        (Orientation::Aligned, Ly | Tx | Tz) => &[],
    }
}

/// Two corner turns in a row.
fn forbidden(o: Orientation, a: Side, b: Side, c: Side) -> bool {
    turn(o, a, b).is_some() && turn(o, b, c).is_some()
}

/// Corner variable picked up when the path turns from `a` to `b`.
fn turn(o: Orientation, a: Side, b: Side) -> Option<[u32; 3]> {
    use Side::*;
    match (o, a, b) {
        (Orientation::Opposed, Tz, Ty) => Some([1, 0, 0]),
        (Orientation::Opposed, Tx, Tz) | (Orientation::Aligned, Lz, Lx) => Some([0, 1, 0]),
        (Orientation::Opposed, Ty, Tx) | (Orientation::Aligned, Lx, Ly) => Some([0, 0, 1]),
        _ => None,
    }
}

/// Class picked up on a side of A: α⁻¹, β⁻¹, γ⁻¹ when opposed, α, β, γ when aligned.
fn visit_class(o: Orientation, s: Side) -> FreeWord {
    let sign = if o == Orientation::Opposed { -1 } else { 1 };
    match s {
        Side::Lx => FreeWord::alpha(sign),
        Side::Ly => FreeWord::beta(sign),
        Side::Lz => FreeWord::gamma(sign),
        _ => FreeWord::identity(),
    }
}

type Letters = Vec<(Letter, i8)>;

fn letters(w: &FreeWord) -> Letters {
    let mut out = Vec::new();
    for &(l, e) in w.syllables() {
        for _ in 0..e.unsigned_abs() {
            out.push((l, e.signum() as i8));
        }
    }
    out
}

/// Classes of the loop read from p along (aligned) or against (opposed) its orientation, each
/// tagged with the point reached.
fn targets(w: &CyclicWord, o: Orientation, syllables: usize) -> Vec<(End, FreeWord)> {
    let (l, m, n) = (w.at(0), w.at(1), w.at(2));
    let mut out = Vec::new();
    let mut acc = FreeWord::identity();
    let cycle: [(FreeWord, End); 3] = match o {
        Orientation::Opposed => [(FreeWord::alpha(-l), End::U), (FreeWord::gamma(-n), End::T), (FreeWord::beta(-m), End::S)],
        Orientation::Aligned => {
            out.push((End::S, FreeWord::identity()));
            [(FreeWord::beta(m), End::T), (FreeWord::gamma(n), End::U), (FreeWord::alpha(l), End::S)]
        }
    };
    for k in 0..syllables {
        let (piece, end) = &cycle[k % 3];
        // a strip winds at least once per phase, so nothing is reached through an empty syllable
        if o == Orientation::Opposed && piece.is_identity() {
            break;
        }
        acc = acc.mul(piece);
        out.push((*end, acc.clone()));
    }
    out
}

struct Search<'a> {
    o: Orientation,
    max_len: usize,
    matches: &'a HashSet<(End, FreeWord)>,
    prefixes: &'a HashSet<Letters>,
    hits: Vec<StripHit>,
    open: bool,
}

impl Search<'_> {
    /// `class` is the product over visited sides of A that can no longer be the final side.
    fn walk(&mut self, path: &mut Vec<Side>, class: &FreeWord, mono: [u32; 3]) {
        let last = *path.last().expect("non-empty");
        let with_last = class.mul(&visit_class(self.o, last));
        // an ending here
        if let Some(end) = End::on(self.o, last) {
            let final_class = match self.o {
                Orientation::Opposed => with_last.clone(),
                Orientation::Aligned => class.clone(),
            };
            let admissible = self.o == Orientation::Opposed || path.len() >= 2;
            if admissible && self.matches.contains(&(end, final_class.clone())) {
                self.hits.push(StripHit {
                    end,
                    monomial: Poly::mono(mono),
                    sequence: StripSequence { letters: path.clone(), orientation: self.o },
                    class: final_class,
                });
            }
        }
        // the first side of an aligned path is only partly traversed
        let running = if self.o == Orientation::Aligned && path.len() == 1 { class.clone() } else { with_last };
        let mut l = letters(&running);
        l.pop();
        if !self.prefixes.contains(&l) {
            return;
        }
        if path.len() == self.max_len {
            self.open = true;
            return;
        }
        for &next in successors(self.o, last) {
            if path.len() >= 2 && forbidden(self.o, path[path.len() - 2], last, next) {
                continue;
            }
            let mut m = mono;
            if let Some(t) = turn(self.o, last, next) {
                for i in 0..3 {
                    m[i] += t[i];
                }
            }
            path.push(next);
            self.walk(path, &running, m);
            path.pop();
        }
    }
}

fn enumerate_from_p(w: &CyclicWord, max_len: usize) -> Result<Vec<StripHit>> {
    let mut hits = Vec::new();
    for o in [Orientation::Opposed, Orientation::Aligned] {
        let ts = targets(w, o, 3 * max_len + 6);
        let matches: HashSet<(End, FreeWord)> = ts.iter().cloned().collect();
        let mut prefixes = HashSet::new();
        for (_, t) in &ts {
            let l = letters(t);
            for k in 0..=l.len() {
                prefixes.insert(l[..k].to_vec());
            }
        }
        let mut s = Search { o, max_len, matches: &matches, prefixes: &prefixes, hits: Vec::new(), open: false };
        s.walk(&mut vec![Side::Lx], &FreeWord::identity(), [0, 0, 0]);
        if s.open {
            return Err(Error::Incomplete(max_len));
        }
        hits.extend(s.hits);
    }
    Ok(hits)
}

/// Polygons from the start point to s, t, u for a normal length-3 loop word. Starts q and r are
/// reduced to p by the cyclic relabeling x → y → z.
pub fn enumerate_strips(w: &CyclicWord, start: Start, max_len: usize) -> Result<Vec<StripHit>> {
    if w.len() != 3 {
        return Err(Error::Unsupported(format!("strip oracle needs a length-3 word, got {}", w.len())));
    }
    let (ok, v) = is_normal(w);
    if !ok {
        let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        return Err(Error::NotNormal(msg.join("; ")));
    }
    let k = start.index();
    let e = w.entries();
    let rotated = CyclicWord::loop_word(&[e[k % 3], e[(k + 1) % 3], e[(k + 2) % 3]])?;
    let mut hits = enumerate_from_p(&rotated, max_len)?;
    for h in &mut hits {
        for _ in 0..k {
            h.end = h.end.rotate();
            h.monomial = h.monomial.permute_vars([1, 2, 0]);
        }
    }
    Ok(hits)
}

/// 3×3 matrix with rows s, t, u and columns p, q, r holding the summed monomials.
pub fn strip_matrix(w: &CyclicWord, max_len: usize) -> Result<PolyMatrix> {
    let mut m = PolyMatrix::zeros(3, 3);
    for start in [Start::P, Start::Q, Start::R] {
        for h in enumerate_strips(w, start, max_len)? {
            let cur = m.get(h.end.index(), start.index()).clone();
            m.set(h.end.index(), start.index(), &cur + &h.monomial);
        }
    }
    Ok(m)
}

/// Drops signs and holonomy: each monomial's coefficient becomes 1.
pub fn magnitude(p: &Poly) -> Poly {
    Poly::from_terms(p.terms().keys().map(|e| (*e, crate::ring::LaurentLambda::one())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lw(v: &[i64]) -> CyclicWord {
        CyclicWord::loop_word(v).unwrap()
    }

    fn ends(w: &[i64], s: Start) -> Vec<(End, Poly)> {
        let mut v: Vec<(End, Poly)> =
            enumerate_strips(&lw(w), s, 40).unwrap().into_iter().map(|h| (h.end, h.monomial)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    #[test]
    fn worked_word_from_p() {
        assert_eq!(ends(&[2, 3, 2], Start::P), vec![(End::S, Poly::z()), (End::U, Poly::x())]);
    }

    #[test]
    fn nonpositive_middle_entry_gives_y_power() {
        let v = ends(&[3, -2, 2], Start::P);
        assert_eq!(v, vec![(End::S, Poly::z()), (End::T, Poly::mono([0, 2, 0])), (End::U, Poly::mono([2, 0, 0]))]);
    }

    #[test]
    fn sequences_satisfy_grammar() {
        for h in enumerate_strips(&lw(&[3, -2, 2]), Start::P, 40).unwrap() {
            assert!(h.sequence.is_valid(), "{}", h.sequence);
        }
        let bad = StripSequence { letters: vec![Side::Lx, Side::Tz, Side::Ty, Side::Tx], orientation: Orientation::Opposed };
        assert!(!bad.is_valid());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(enumerate_strips(&lw(&[1, 1, 1, 1, 1, 1]), Start::P, 10), Err(Error::Unsupported(_))));
        assert!(matches!(enumerate_strips(&lw(&[0, 0, 3]), Start::P, 10), Err(Error::NotNormal(_))));
    }
}
