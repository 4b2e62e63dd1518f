//! Band ↔ loop conversion: sign word δ, correction word ε, and the eigenvalue sign rule.

use crate::error::{Error, Result};
use crate::words::{is_normal, BandDatum, CyclicWord, LoopDatum, WordKind};

/// δ(w) for a band word.
pub fn sign_word(w: &CyclicWord) -> Vec<u8> {
    let e = w.entries();
    let n = e.len();
    if e.iter().all(|&v| v == 0) {
        return vec![1; n];
    }
    let first_nonzero = |j: usize, step: isize| -> i64 {
        let mut k = j as isize;
        loop {
            k = (k + step).rem_euclid(n as isize);
            if e[k as usize] != 0 {
                return e[k as usize];
            }
        }
    };
    (0..n)
        .map(|j| match e[j] {
            v if v > 0 => 1,
            v if v < 0 => 0,
            _ => {
                if first_nonzero(j, -1) < 0 || first_nonzero(j, 1) < 0 {
                    0
                } else {
                    1
                }
            }
        })
        .collect()
}

/// δ′(w′) = [w′_j > 0] for a loop word.
pub fn loop_sign_word(w: &CyclicWord) -> Vec<u8> {
    w.entries().iter().map(|&v| u8::from(v > 0)).collect()
}

/// ε_j = −1 + δ_{j−1} + δ_j + δ_{j+1}.
pub fn correction_word(delta: &[u8]) -> Vec<i64> {
    let n = delta.len();
    (0..n)
        .map(|j| -1 + i64::from(delta[(j + n - 1) % n]) + i64::from(delta[j]) + i64::from(delta[(j + 1) % n]))
        .collect()
}

/// Exponent k with λ′ = (−1)^k λ, reduced mod 2: Σ l_i + τ over the band word.
pub fn sign_exponent(band_word: &CyclicWord) -> i64 {
    (band_word.l_entries().sum::<i64>() + band_word.tau() as i64).rem_euclid(2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversion {
    pub band: BandDatum,
    pub loop_datum: LoopDatum,
    pub sign_word: Vec<u8>,
    pub correction_word: Vec<i64>,
    pub sign_exponent: i64,
}

pub fn band_to_loop(b: &BandDatum) -> Conversion {
    let delta = sign_word(&b.word);
    let eps = correction_word(&delta);
    let entries: Vec<i64> = b.word.entries().iter().zip(&eps).map(|(w, e)| w + e).collect();
    let k = sign_exponent(&b.word);
    let word = CyclicWord::new(entries, WordKind::Loop).expect("length preserved");
    Conversion {
        band: b.clone(),
        loop_datum: LoopDatum::new(word, b.eigenvalue.signed(k)),
        sign_word: delta,
        correction_word: eps,
        sign_exponent: k,
    }
}

pub fn band_from_loop(l: &LoopDatum) -> Result<Conversion> {
    let (ok, v) = is_normal(&l.word);
    if !ok {
        let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        return Err(Error::NotNormal(msg.join("; ")));
    }
    let delta = loop_sign_word(&l.word);
    let eps = correction_word(&delta);
    let entries: Vec<i64> = l.word.entries().iter().zip(&eps).map(|(w, e)| w - e).collect();
    let word = CyclicWord::new(entries, WordKind::Band).expect("length preserved");
    let k = sign_exponent(&word);
    Ok(Conversion {
        band: BandDatum::new(word, l.holonomy.signed(k)),
        loop_datum: l.clone(),
        sign_word: delta,
        correction_word: eps,
        sign_exponent: k,
    })
}

/// Correction number of a length-3 band word (l, m, n), by case table.
pub fn correction_number_rank1(l: i64, m: i64, n: i64) -> i64 {
    if l >= 0 && m >= 0 && n >= 0 {
        return 2;
    }
    let one = (l > 0 && m > 0 && n < 0) || (l > 0 && m < 0 && n > 0) || (l < 0 && m > 0 && n > 0);
    if one {
        return 1;
    }
    let zero = (l > 0 && m <= 0 && n <= 0 && (m, n) != (0, 0))
        || (l <= 0 && m > 0 && n <= 0 && (n, l) != (0, 0))
        || (l <= 0 && m <= 0 && n > 0 && (l, m) != (0, 0));
    if zero {
        return 0;
    }
    // remaining: l, m, n ≤ 0, not all zero
    -1
}
