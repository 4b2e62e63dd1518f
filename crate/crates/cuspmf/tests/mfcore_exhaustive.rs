use cuspmf::mfcore::{
    canonical_phi, det_check, find_sign_conjugation, geometric_matrix, match_geometric_to_canonical,
    MatrixFactorization,
};
use cuspmf::words::{is_normal, CyclicWord, LoopDatum, Unit};

fn words(len: usize, lo: i64, hi: i64) -> Vec<CyclicWord> {
    let span = (hi - lo + 1) as usize;
    let mut out = Vec::new();
    for mut k in 0..span.pow(len as u32) {
        let mut e = Vec::with_capacity(len);
        for _ in 0..len {
            e.push(lo + (k % span) as i64);
            k /= span;
        }
        let w = CyclicWord::loop_word(&e).unwrap();
        if is_normal(&w).0 {
            out.push(w);
        }
    }
    out
}

#[test]
fn det_and_adjugate_rank_one_and_two() {
    let mut ws = words(3, -4, 4);
    ws.extend(words(6, -2, 3).into_iter().step_by(7));
    assert!(ws.len() > 100);
    for w in &ws {
        let c = det_check(w, &Unit::lambda());
        assert!(c.det_ok, "det {}", w);
        assert!(c.adj_ok, "adj {}", w);
        assert!(c.closed_form_ok, "closed form {}", w);
        assert!(MatrixFactorization::canonical(w, &Unit::lambda()).verify().unwrap());
    }
}

#[test]
fn geometric_matches_canonical_and_wrong_sign_fails() {
    let mut ws = words(3, -4, 4);
    ws.extend(words(6, -2, 3).into_iter().step_by(5));
    for w in ws.iter().filter(|w| !w.entries().iter().all(|&e| e == 2)) {
        let m = match_geometric_to_canonical(w, &Unit::lambda()).unwrap_or_else(|e| panic!("{}: {}", w, e));
        assert_eq!(m.signs.apply(&m.geometric), m.canonical);
        let wrong = geometric_matrix(&LoopDatum::new(w.clone(), m.holonomy.neg())).unwrap();
        assert!(find_sign_conjugation(&wrong, &canonical_phi(w, &Unit::lambda())).is_err(), "{}", w);
    }
}
