//! Acceptance criteria, one PASS/FAIL line each. Exits 0 unless ACCEPTANCE_STRICT is set, so a
//! recorded failure does not mask the rest of `cargo test`.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cuspmf::convert::{band_from_loop, band_to_loop, correction_number_rank1};
use cuspmf::freegroup::{conjugate_equal, from_loop_word, is_essential};
use cuspmf::mfcore::{
    bigon_printed_form, bigon_reduced_form, canonical_phi, degenerate_222, degenerate_222_reduced, det_check,
    geometric_matrix, match_geometric_to_canonical, nonnormal_example, unit_pivot_reduce, with_adjugate_partner,
    MatrixFactorization, PivotKind, Side,
};
use cuspmf::modres::{trace_resolution, uniform_phi0_matches};
use cuspmf::ring::{Poly, PolyMatrix};
use cuspmf::strips::{magnitude, strip_matrix};
use cuspmf::t32::{verify_t32, Convention};
use cuspmf::words::{apply_move, is_normal, normalize, BandDatum, CyclicWord, LoopDatum, Move, Unit};

const SEED: u64 = 20261016;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, name: &str, ok: bool, detail: String, took: Duration, limit: Option<Duration>) {
        let in_time = limit.map_or(true, |l| took <= l);
        let pass = ok && in_time;
        let budget = limit.map_or(String::new(), |l| format!(" / limit {:.1}s", l.as_secs_f64()));
        println!(
            "{} [{}] {}: {} ({:.3}s{})",
            if pass { "PASS" } else { "FAIL" },
            id,
            name,
            detail,
            took.as_secs_f64(),
            budget
        );
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn lw(v: &[i64]) -> CyclicWord {
    CyclicWord::loop_word(v).unwrap()
}

fn all_words(len: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<i64>| {
                (lo..=hi).map(move |v| {
                    let mut w = w.clone();
                    w.push(v);
                    w
                })
            })
            .collect();
    }
    out
}

fn random_band(rng: &mut StdRng, max_tau: usize, lo: i64, hi: i64) -> BandDatum {
    loop {
        let tau = rng.gen_range(1..=max_tau);
        let v: Vec<i64> = (0..3 * tau).map(|_| rng.gen_range(lo..=hi)).collect();
        let b = BandDatum::new(CyclicWord::band(&v).unwrap(), Unit::lambda());
        if !b.is_degenerate() {
            return b;
        }
    }
}

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let w = CyclicWord::band(&[6, 0, 2, -1, 0, -3, 0, 0, 5, 0, -2, 1, -1, 3, 4]).unwrap();
    let b = BandDatum::new(w.clone(), Unit::lambda());
    let c = band_to_loop(&b);
    let sign_ok = c.sign_word == vec![1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1];
    let corr_ok = c.correction_word == vec![2, 2, 1, 0, -1, -1, -1, 0, 0, 0, 0, 0, 1, 1, 2];
    let loop_ok = c.loop_datum.word.entries() == [8, 2, 3, -1, -1, -4, -1, 0, 5, 0, -2, 1, 0, 4, 6];
    let lam_ok = c.loop_datum.holonomy == Unit::lambda().neg();
    let back = band_from_loop(&c.loop_datum).map(|x| x.band == b).unwrap_or(false);
    let took = t.elapsed();
    r.line(
        "1",
        "worked band word conversion",
        sign_ok && corr_ok && loop_ok && lam_ok && back,
        format!("sign {} correction {} loop {} λ'=-λ {} inverse {}", sign_ok, corr_ok, loop_ok, lam_ok, back),
        took,
        Some(Duration::from_millis(100)),
    );
}

fn criterion_2(r: &mut Report, rng: &mut StdRng) {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut max_tau = 0;
    for _ in 0..200 {
        let b = random_band(rng, 8, -5, 5);
        let w = band_to_loop(&b).loop_datum.word;
        max_tau = max_tau.max(w.tau());
        let d = det_check(&w, &Unit::lambda());
        let mf = MatrixFactorization::canonical(&w, &Unit::lambda());
        if !(d.det_ok && d.adj_ok && mf.verify().unwrap()) {
            bad.push(w.to_string());
        }
    }
    r.line(
        "2",
        "φψ̃ = ψ̃φ = u·xyz·I, det and adj, 200 random band data",
        bad.is_empty(),
        format!("{} failures, largest τ {}{}", bad.len(), max_tau, bad.first().map_or(String::new(), |w| format!(", e.g. {}", w))),
        t.elapsed(),
        Some(Duration::from_secs(30)),
    );
}

fn criterion_3(r: &mut Report, rng: &mut StdRng) {
    let t = Instant::now();
    let mut bad = Vec::new();
    let check = |b: &BandDatum, bad: &mut Vec<String>| {
        let c = band_to_loop(b);
        let normal = is_normal(&c.loop_datum.word).0;
        let back = band_from_loop(&c.loop_datum).ok();
        let round = back.as_ref().map_or(false, |x| x.band == *b);
        let again = back.map_or(false, |x| band_to_loop(&x.band).loop_datum == c.loop_datum);
        let table = if b.word.len() == 3 {
            let e = b.word.entries();
            let k = correction_number_rank1(e[0], e[1], e[2]);
            c.correction_word.iter().all(|&x| x == k)
        } else {
            true
        };
        if !(normal && round && again && table) {
            bad.push(format!("{} (normal {} round {} again {} table {})", b.word, normal, round, again, table));
        }
    };
    let mut n3 = 0;
    for v in all_words(3, -4, 4) {
        let b = BandDatum::new(CyclicWord::band(&v).unwrap(), Unit::lambda());
        if b.is_degenerate() {
            continue;
        }
        n3 += 1;
        check(&b, &mut bad);
    }
    for _ in 0..1000 {
        let b = random_band(rng, 8, -5, 5);
        check(&b, &mut bad);
    }
    r.line(
        "3",
        "conversion bijection",
        bad.is_empty(),
        format!("{} length-3 words + 1000 random, {} failures{}", n3, bad.len(), bad.first().map_or(String::new(), |w| format!(", e.g. {}", w))),
        t.elapsed(),
        None,
    );
}

fn criterion_4(r: &mut Report, rng: &mut StdRng) {
    let t = Instant::now();
    let example = normalize(&lw(&[2, 2, 2, 1, 2, 2])).map(|n| n.is_shift_of(&lw(&[-2, -1, -1]))).unwrap_or(false);
    let mut bad = Vec::new();
    let mut count = 0;
    while count < 200 {
        let tau = rng.gen_range(1..=3);
        let v: Vec<i64> = (0..3 * tau).map(|_| rng.gen_range(-3..=3)).collect();
        let w = lw(&v);
        if !is_essential(&w) {
            continue;
        }
        count += 1;
        let n = normalize(&w).unwrap();
        let mut cur = w.clone();
        for _ in 0..20 {
            let len = cur.len();
            let m = match rng.gen_range(0..5) {
                0 => Move::Shift(rng.gen_range(0..4)),
                1 if len < 15 => Move::Insert000(rng.gen_range(0..=len)),
                2 => Move::Remove000(rng.gen_range(0..len)),
                3 => Move::AddOnesAroundZero(rng.gen_range(0..len)),
                _ => Move::SubtractOnesAroundOne(rng.gen_range(0..len)),
            };
            if let Ok(next) = apply_move(&cur, m) {
                cur = next;
            }
        }
        let nm = normalize(&cur).unwrap();
        let ok = nm.is_shift_of(&n) && is_normal(&n).0 && conjugate_equal(&from_loop_word(&w), &from_loop_word(&n));
        if !ok {
            bad.push(format!("{} -> {} vs {}", w, n, nm));
        }
    }
    r.line(
        "4",
        "normalization",
        example && bad.is_empty(),
        format!("(2,2,2,1,2,2) ~ (-2,-1,-1): {}; 200 words x 20 moves, {} failures", example, bad.len()),
        t.elapsed(),
        None,
    );
}

fn criterion_5(r: &mut Report, rng: &mut StdRng) {
    let t = Instant::now();
    let lam = Unit::lambda();
    let mut words: Vec<CyclicWord> = Vec::new();
    for v in all_words(3, -4, 4) {
        words.push(lw(&v));
    }
    for v in all_words(6, -2, 3) {
        words.push(lw(&v));
    }
    let mut sampled = 0;
    while sampled < 300 {
        let tau = rng.gen_range(3..=5);
        let v: Vec<i64> = (0..3 * tau).map(|_| rng.gen_range(-4..=4)).collect();
        let w = lw(&v);
        if is_normal(&w).0 {
            words.push(w);
            sampled += 1;
        }
    }
    let mut bad = Vec::new();
    let mut matched = 0;
    for w in &words {
        if !is_normal(w).0 || w.entries().iter().all(|&e| e == 2) {
            continue;
        }
        match match_geometric_to_canonical(w, &lam) {
            Ok(m) if m.signs.apply(&m.geometric) == m.canonical => matched += 1,
            Ok(_) => bad.push(format!("{} (sign diagonal does not conjugate)", w)),
            Err(e) => bad.push(format!("{} ({})", w, e)),
        }
    }
    // rank one: λ′ = (−1)^{l+1} λ
    let mut rank_one_bad = 0;
    for v in all_words(3, -4, 4) {
        let b = BandDatum::new(CyclicWord::band(&v).unwrap(), lam.clone());
        if b.is_degenerate() {
            continue;
        }
        let c = band_to_loop(&b);
        if c.loop_datum.holonomy != lam.signed(v[0] + 1) {
            rank_one_bad += 1;
        }
    }
    r.line(
        "5",
        "geometric matrix matches canonical φ",
        bad.is_empty() && rank_one_bad == 0,
        format!(
            "{} normal words matched (τ=1 in [-4,4], τ=2 in [-2,3], 300 random τ=3..5 in [-4,4]), {} failures{}; rank-one sign rule failures {}",
            matched,
            bad.len(),
            bad.first().map_or(String::new(), |w| format!(", e.g. {}", w)),
            rank_one_bad
        ),
        t.elapsed(),
        None,
    );
}

fn criterion_6(r: &mut Report, rng: &mut StdRng) {
    let t = Instant::now();
    let lam = Unit::lambda();
    let mut uniform = 0;
    let mut traced = 0;
    let mut bad = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for len in [3usize, 6, 9] {
        for (lo, hi) in [(0, 3), (-3, 0)] {
            for v in all_words(len, lo, hi) {
                let b = BandDatum::new(CyclicWord::band(&v).unwrap(), lam.clone());
                // a cyclic shift of w relabels φ₀ and φ(w′, λ) the same way
                if b.is_degenerate() || !seen.insert(b.word.canonical_shift()) {
                    continue;
                }
                uniform += 1;
                match uniform_phi0_matches(&b.word, &lam) {
                    Ok(true) => {}
                    Ok(false) => bad.push(format!("{} (φ₀ differs)", b.word)),
                    Err(e) => bad.push(format!("{} ({})", b.word, e)),
                }
                // full uniform-path checks (ψ̃ product, # columns) on τ ≤ 2
                if len <= 6 {
                    traced += 1;
                    match trace_resolution(&b.word, &lam) {
                        Ok(tr) if tr.ok() && tr.endpoint == canonical_phi(&tr.loop_word, &lam) => {}
                        Ok(tr) => bad.push(format!("{} ({:?})", b.word, tr.failures())),
                        Err(e) => bad.push(format!("{} ({})", b.word, e)),
                    }
                }
            }
        }
    }
    let mut mixed = 0;
    while mixed < 100 {
        let b = random_band(rng, 4, -3, 3);
        let e = b.word.entries();
        if !(e.iter().any(|&x| x > 0) && e.iter().any(|&x| x < 0)) {
            continue;
        }
        mixed += 1;
        match trace_resolution(&b.word, &lam) {
            Ok(tr) if tr.ok() && tr.endpoint == canonical_phi(&tr.loop_word, &lam) => {}
            Ok(tr) => bad.push(format!("{} ({:?})", b.word, tr.failures())),
            Err(e) => bad.push(format!("{} ({})", b.word, e)),
        }
    }
    r.line(
        "6",
        "resolution pipeline reaches canonical φ",
        bad.is_empty(),
        format!(
            "{} uniform-sign words up to shift ({} with all uniform-path checks), {} mixed-sign, {} failures{}",
            uniform,
            traced,
            mixed,
            bad.len(),
            bad.first().map_or(String::new(), |w| format!(", e.g. {}", w))
        ),
        t.elapsed(),
        Some(Duration::from_secs(60)),
    );
}

fn criterion_7(r: &mut Report) {
    let t = Instant::now();
    let h = Unit::lambda();
    // (a) perturbed (2,2,2)
    let mf = degenerate_222(&h);
    let pair_ok = mf.verify().unwrap();
    let red = unit_pivot_reduce(&mf, (3, 0), Side::Psi, 12).unwrap();
    let (phi, psi_num, den) = degenerate_222_reduced(&h);
    let reduced_ok = red.kind == PivotKind::Scaled
        && red.mf.verify().unwrap()
        && red.mf.phi == phi
        && red.mf.psi.scale(&den) == psi_num.scale(&red.mf.scale)
        && phi == canonical_phi(&lw(&[2, 2, 2]), &h.neg());
    r.line(
        "7a",
        "perturbed (2,2,2) pair and its reduction to canonical φ",
        pair_ok && reduced_ok,
        format!("4x4 product = xyz·I {}, 3x3 reduction = canonical φ {}", pair_ok, reduced_ok),
        t.elapsed(),
        None,
    );

    // (b) bigon removal on normal (l′, m′, 1)
    let t = Instant::now();
    let mut valid = 0;
    let mut total = 0;
    let mut printed_match = 0;
    for l in -4..=0 {
        for m in -4..=0 {
            let w = lw(&[l, m, 1]);
            if !is_normal(&w).0 {
                continue;
            }
            total += 1;
            let g = geometric_matrix(&LoopDatum::new(w, h.clone())).unwrap();
            let mf = with_adjugate_partner(&g).unwrap().unwrap();
            let red = unit_pivot_reduce(&mf, (1, 2), Side::Phi, 12).unwrap();
            if red.mf.verify().unwrap() && red.mf.phi == bigon_reduced_form(l, m, &h) {
                valid += 1;
            }
            if red.mf.phi == bigon_printed_form(l, m, &h) {
                printed_match += 1;
            }
        }
    }
    r.line(
        "7b",
        "bigon removal: unit-pivot reduction is a 2x2 factor of xyz",
        valid == total && total > 0,
        format!("{}/{} normal (l',m',1) words", valid, total),
        t.elapsed(),
        None,
    );
    r.line(
        "7b'",
        "bigon removal: reduction equals the displayed 2x2",
        printed_match == total && total > 0,
        format!(
            "{}/{} agree; the displayed matrix is not a factor of xyz (see decisions ledger)",
            printed_match, total
        ),
        t.elapsed(),
        None,
    );

    // (c) non-normal example
    let t = Instant::now();
    let a = nonnormal_example(&h);
    let factor = a.det().unwrap() == Poly::xyz();
    let red_ok = with_adjugate_partner(&a)
        .unwrap()
        .and_then(|mf| unit_pivot_reduce(&mf, (2, 1), Side::Phi, 12).ok())
        .map_or(false, |red| red.mf.dim() == 2 && red.mf.verify().unwrap());
    r.line(
        "7c",
        "non-normal matrix is a factor of xyz and reduces to a 2x2 factor",
        factor && red_ok,
        format!("det = xyz {}, 2x2 reduction valid {}", factor, red_ok),
        t.elapsed(),
        None,
    );
}

fn criterion_8(r: &mut Report) {
    let t = Instant::now();
    let lam = Unit::lambda();
    let mut checked = 0;
    let mut bad = Vec::new();
    for v in all_words(3, -3, 4) {
        let w = lw(&v);
        if !is_normal(&w).0 {
            continue;
        }
        checked += 1;
        let s = match strip_matrix(&w, 40) {
            Ok(s) => s,
            Err(e) => {
                bad.push(format!("{} ({})", w, e));
                continue;
            }
        };
        let g = cuspmf::mfcore::geometric_matrix_unchecked(&w, &lam);
        if g.map(magnitude) != s {
            bad.push(w.to_string());
        }
    }
    // worked values for (2,3,2)
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let o = Poly::zero;
    let hol = Unit::lambda();
    let display = PolyMatrix::from_rows(vec![
        vec![z.clone(), -&y.pow(2), o()],
        vec![o(), x.clone(), -&z],
        vec![&hol.to_poly() * &x, o(), y.clone()],
    ]);
    let w = lw(&[2, 3, 2]);
    let worked = geometric_matrix(&LoopDatum::new(w.clone(), hol)).map_or(false, |g| g == display)
        && strip_matrix(&w, 40).map_or(false, |s| s == display.map(magnitude));
    r.line(
        "8",
        "strip enumeration reproduces geometric magnitudes",
        bad.is_empty() && worked && checked > 100,
        format!(
            "{} normal words in [-3,4], max_len 40, {} mismatches; (2,3,2) worked entries {}",
            checked,
            bad.len(),
            worked
        ),
        t.elapsed(),
        None,
    );
}

fn criterion_9(r: &mut Report) {
    let t = Instant::now();
    let lam = Unit::lambda();
    let mut notes = Vec::new();
    let mut ok = true;
    for m in 1..=6 {
        let c = verify_t32(m, &lam).unwrap();
        let conv = c.convention.map_or("none", Convention::name);
        notes.push(format!("m={} {}", m, conv));
        ok &= c.convention.is_some();
        if m <= 3 {
            ok &= c.presentation_ok && c.cofactor_matches;
        }
        if m == 1 {
            ok &= c.ar.as_ref().map_or(false, |a| a.ok());
        }
    }
    r.line("9", "x^3+y^2+xyz family: products, cofactors, AR swap", ok, notes.join(", "), t.elapsed(), None);
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    let mut rng = StdRng::seed_from_u64(SEED);
    criterion_1(&mut r);
    criterion_2(&mut r, &mut rng);
    criterion_3(&mut r, &mut rng);
    criterion_4(&mut r, &mut rng);
    criterion_5(&mut r, &mut rng);
    criterion_6(&mut r, &mut rng);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    if r.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {}", r.failed.join(", "));
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
