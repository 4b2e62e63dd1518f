use proptest::prelude::*;

use cuspmf::convert::{band_from_loop, band_to_loop, correction_number_rank1, loop_sign_word, sign_word};
use cuspmf::freegroup::{conjugate_equal, from_loop_word, is_essential};
use cuspmf::mfcore::{det_check, shift_mf, unit_pivot_reduce, MatrixFactorization, Side};
use cuspmf::modres::resolution_pipeline;
use cuspmf::ring::{rat, LaurentLambda, Poly, PolyMatrix, RatFunc};
use cuspmf::t32::{potential, Convention};
use cuspmf::words::{apply_move, is_normal, normalize, BandDatum, CyclicWord, LoopDatum, Move, Unit};

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u32..3, 0u32..3, 0u32..3, -3i64..=3, -2i64..=2), 0..4).prop_map(|ts| {
        Poly::from_terms(ts.into_iter().map(|(a, b, c, k, e)| ([a, b, c], LaurentLambda::monomial(rat(k), e))))
    })
}

fn unit_const_poly() -> impl Strategy<Value = Poly> {
    (poly(), prop_oneof![Just(1i64), Just(-1), Just(2), Just(-3)])
        .prop_map(|(p, c)| &(&p - &Poly::constant(p.constant_term())) + &Poly::int(c))
}

fn word(max_tau: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_tau).prop_flat_map(move |t| prop::collection::vec(lo..=hi, 3 * t))
}

fn nondegenerate_band(max_tau: usize, lo: i64, hi: i64) -> impl Strategy<Value = BandDatum> {
    word(max_tau, lo, hi)
        .prop_map(|v| BandDatum::new(CyclicWord::band(&v).unwrap(), Unit::lambda()))
        .prop_filter("degenerate", |b| !b.is_degenerate())
}

fn essential_loop(max_tau: usize) -> impl Strategy<Value = CyclicWord> {
    word(max_tau, -3, 3).prop_map(|v| CyclicWord::loop_word(&v).unwrap()).prop_filter("essential", is_essential)
}

fn moves(n: usize) -> impl Strategy<Value = Vec<(u8, usize)>> {
    prop::collection::vec((0u8..5, 0usize..64), n)
}

/// Apply whichever of the requested moves are legal at the chosen positions.
fn apply_some(w: &CyclicWord, ms: &[(u8, usize)]) -> CyclicWord {
    let mut cur = w.clone();
    for &(kind, pos) in ms {
        let n = cur.len();
        let m = match kind {
            0 => Move::Shift(pos as i64),
            1 if n < 15 => Move::Insert000(pos % (n + 1)),
            2 => Move::Remove000(pos % n),
            3 => Move::AddOnesAroundZero(pos % n),
            _ => Move::SubtractOnesAroundOne(pos % n),
        };
        if let Ok(next) = apply_move(&cur, m) {
            cur = next;
        }
    }
    cur
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn adjugate_identity(es in prop::collection::vec(poly(), 9)) {
        let m = PolyMatrix::from_rows(es.chunks(3).map(|r| r.to_vec()).collect());
        let det = m.det().unwrap();
        prop_assert!(m.mul(&m.adjugate().unwrap()).unwrap().is_scalar_multiple_of_identity(&det));
        prop_assert_eq!(det, m.det_cofactor());
    }

    #[test]
    fn truncated_inverse_inverts(p in unit_const_poly(), n in 1u32..6) {
        let q = p.truncated_inverse(n).unwrap();
        prop_assert!((&p * &q).truncate(n).is_one());
    }

    #[test]
    fn ratfunc_equality_is_an_equivalence(a in poly(), b in poly(), c in poly(), d in unit_const_poly(), k in unit_const_poly()) {
        let f = RatFunc::new(a.clone(), d.clone()).unwrap();
        let g = RatFunc::new(&a * &k, &d * &k).unwrap();
        let h = RatFunc::new(&(&a * &k) * &k, &(&d * &k) * &k).unwrap();
        prop_assert!(f == g && g == f);
        prop_assert!(g == h && f == h);
        let u = RatFunc::new(b.clone(), d.clone()).unwrap();
        let v = RatFunc::new(c.clone(), d.clone()).unwrap();
        prop_assert_eq!(u == v, v == u);
        prop_assert_eq!(u == v, b == c);
    }

    #[test]
    fn normalize_is_a_normal_form(w in essential_loop(3), ms in moves(20)) {
        let n = normalize(&w).unwrap();
        prop_assert!(is_normal(&n).0);
        prop_assert!(normalize(&n).unwrap().is_shift_of(&n));
        let moved = apply_some(&w, &ms);
        prop_assert_eq!(moved.len() % 3, 0);
        prop_assert!(conjugate_equal(&from_loop_word(&w), &from_loop_word(&moved)));
        prop_assert!(normalize(&moved).unwrap().is_shift_of(&n));
        prop_assert!(conjugate_equal(&from_loop_word(&w), &from_loop_word(&n)));
    }

    #[test]
    fn conjugacy_is_an_equivalence(a in word(2, -3, 3), b in word(2, -3, 3), ms in moves(6)) {
        let (wa, wb) = (CyclicWord::loop_word(&a).unwrap(), CyclicWord::loop_word(&b).unwrap());
        let wc = apply_some(&wb, &ms);
        let (fa, fb, fc) = (from_loop_word(&wa), from_loop_word(&wb), from_loop_word(&wc));
        prop_assert!(conjugate_equal(&fa, &fa));
        prop_assert_eq!(conjugate_equal(&fa, &fb), conjugate_equal(&fb, &fa));
        prop_assert!(conjugate_equal(&fb, &fc));
        prop_assert_eq!(conjugate_equal(&fa, &fb), conjugate_equal(&fa, &fc));
    }

    #[test]
    fn conversion_round_trips(b in nondegenerate_band(8, -5, 5)) {
        let c = band_to_loop(&b);
        prop_assert!(is_normal(&c.loop_datum.word).0);
        prop_assert_eq!(sign_word(&b.word), loop_sign_word(&c.loop_datum.word));
        let back = band_from_loop(&c.loop_datum).unwrap();
        prop_assert_eq!(&back.band, &b);
        let again = band_to_loop(&back.band);
        prop_assert_eq!(again.loop_datum, LoopDatum::new(c.loop_datum.word.clone(), c.loop_datum.holonomy.clone()));
        if b.word.len() == 3 {
            let e = b.word.entries();
            let k = correction_number_rank1(e[0], e[1], e[2]);
            prop_assert!(c.correction_word.iter().all(|&x| x == k));
        }
    }

    #[test]
    fn canonical_factorization(b in nondegenerate_band(4, -5, 5)) {
        let w = band_to_loop(&b).loop_datum.word;
        let d = det_check(&w, &Unit::lambda());
        prop_assert!(d.det_ok && d.adj_ok && d.closed_form_ok);
        let mf = MatrixFactorization::canonical(&w, &Unit::lambda());
        prop_assert!(mf.verify().unwrap());
        let s = shift_mf(&mf);
        prop_assert!(s.verify().unwrap());
        prop_assert_eq!(shift_mf(&s), mf.clone());
        // every constant pivot reduces to a smaller factorization
        for i in 0..mf.dim() {
            for j in 0..mf.dim() {
                let p = mf.phi.get(i, j);
                if !p.is_zero() && p.is_lambda_constant() {
                    let r = unit_pivot_reduce(&mf, (i, j), Side::Phi, 8).unwrap();
                    prop_assert!(r.mf.verify().unwrap(), "pivot ({}, {}) of {}", i, j, w);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn pipeline_reaches_canonical(b in nondegenerate_band(3, -3, 3)) {
        let t = resolution_pipeline(&b.word, &b.eigenvalue);
        prop_assert!(t.is_ok(), "{}: {:?}", b.word, t.err());
        let t = t.unwrap();
        let canon = cuspmf::mfcore::canonical_phi(&t.loop_word, &Unit::lambda());
        prop_assert_eq!(t.endpoint, canon);
    }
}

#[test]
fn z_negation_bridges_the_two_potentials() {
    let plus = potential(Convention::PlusXyz);
    let minus = potential(Convention::MinusXyz);
    assert_eq!(plus.substitute_z_negate(), minus);
    assert_eq!(minus.substitute_z_negate(), plus);
    assert_eq!(Poly::z().pow(2).substitute_z_negate(), Poly::z().pow(2));
}
