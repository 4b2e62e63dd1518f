//! Free group on α, γ with β = α⁻¹γ⁻¹; conjugacy is the equivalence oracle for loop words.

use std::fmt;

use crate::words::CyclicWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Alpha,
    Gamma,
}

/// Reduced word, stored as syllables (letter, nonzero exponent) with adjacent letters distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FreeWord {
    syllables: Vec<(Letter, i64)>,
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn letter(l: Letter, e: i64) -> Self {
        Self::from_syllables(vec![(l, e)])
    }

    pub fn alpha(e: i64) -> Self {
        Self::letter(Letter::Alpha, e)
    }

    pub fn gamma(e: i64) -> Self {
        Self::letter(Letter::Gamma, e)
    }

    /// β^e with β = α⁻¹γ⁻¹.
    pub fn beta(e: i64) -> Self {
        let base = if e >= 0 {
            Self::from_syllables(vec![(Letter::Alpha, -1), (Letter::Gamma, -1)])
        } else {
            Self::from_syllables(vec![(Letter::Gamma, 1), (Letter::Alpha, 1)])
        };
        base.pow(e.unsigned_abs())
    }

    pub fn from_syllables(s: Vec<(Letter, i64)>) -> Self {
        let mut out: Vec<(Letter, i64)> = Vec::with_capacity(s.len());
        for (l, e) in s {
            push_syllable(&mut out, l, e);
        }
        Self { syllables: out }
    }

    pub fn syllables(&self) -> &[(Letter, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Letter length.
    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn mul(&self, o: &FreeWord) -> FreeWord {
        let mut out = self.syllables.clone();
        for &(l, e) in &o.syllables {
            push_syllable(&mut out, l, e);
        }
        FreeWord { syllables: out }
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { syllables: self.syllables.iter().rev().map(|&(l, e)| (l, -e)).collect() }
    }

    pub fn pow(&self, k: u64) -> FreeWord {
        let mut acc = FreeWord::identity();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

fn push_syllable(out: &mut Vec<(Letter, i64)>, l: Letter, e: i64) {
    if e == 0 {
        return;
    }
    if let Some(last) = out.last_mut() {
        if last.0 == l {
            last.1 += e;
            if last.1 == 0 {
                out.pop();
            }
            return;
        }
    }
    out.push((l, e));
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "e");
        }
        for (l, e) in &self.syllables {
            let c = match l {
                Letter::Alpha => "α",
                Letter::Gamma => "γ",
            };
            if *e == 1 {
                write!(f, "{}", c)?;
            } else {
                write!(f, "{}^{}", c, e)?;
            }
        }
        Ok(())
    }
}

/// α^{l₁} β^{m₁} γ^{n₁} ⋯ with β eliminated.
pub fn from_loop_word(w: &CyclicWord) -> FreeWord {
    let mut acc = FreeWord::identity();
    for (j, &e) in w.entries().iter().enumerate() {
        let piece = match j % 3 {
            0 => FreeWord::alpha(e),
            1 => FreeWord::beta(e),
            _ => FreeWord::gamma(e),
        };
        acc = acc.mul(&piece);
    }
    acc
}

/// Conjugate whose first and last syllables have different letters (or a single syllable).
pub fn cyclic_reduce(f: &FreeWord) -> FreeWord {
    let mut s = f.syllables.clone();
    while s.len() >= 2 && s[0].0 == s[s.len() - 1].0 {
        let (_, e) = s.remove(0);
        let last = s.len() - 1;
        s[last].1 += e;
        if s[last].1 == 0 {
            s.pop();
        }
    }
    FreeWord { syllables: s }
}

pub fn conjugate_equal(f: &FreeWord, g: &FreeWord) -> bool {
    let a = cyclic_reduce(f).syllables;
    let b = cyclic_reduce(g).syllables;
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let n = a.len();
    (0..n).any(|r| (0..n).all(|i| a[(i + r) % n] == b[i]))
}

/// False iff the class is trivial or a power of α, β or γ.
pub fn is_essential(w: &CyclicWord) -> bool {
    let s = cyclic_reduce(&from_loop_word(w)).syllables;
    if s.len() <= 1 {
        return false;
    }
    let all_plus = s.iter().all(|&(_, e)| e == 1);
    let all_minus = s.iter().all(|&(_, e)| e == -1);
    !(all_plus || all_minus)
}
