use cuspmf::mfcore::geometric_matrix_unchecked;
use cuspmf::strips::{magnitude, strip_matrix};
use cuspmf::words::{is_normal, CyclicWord, Unit};

#[test]
fn strip_oracle_matches_geometric_magnitudes() {
    let mut checked = 0;
    let mut bad = Vec::new();
    for l in -3..=4 {
        for m in -3..=4 {
            for n in -3..=4 {
                let w = CyclicWord::loop_word(&[l, m, n]).unwrap();
                if !is_normal(&w).0 {
                    continue;
                }
                let s = strip_matrix(&w, 20).unwrap_or_else(|e| panic!("{}: {}", w, e));
                let g = geometric_matrix_unchecked(&w, &Unit::lambda());
                for i in 0..3 {
                    for j in 0..3 {
                        if *s.get(i, j) != magnitude(g.get(i, j)) {
                            bad.push(format!("{} ({}, {}): strips {} expected {}", w, i, j, s.get(i, j), magnitude(g.get(i, j))));
                        }
                    }
                }
                checked += 1;
            }
        }
    }
    assert!(bad.is_empty(), "{} mismatches:\n{}", bad.len(), bad.join("\n"));
    assert!(checked > 100);
}
