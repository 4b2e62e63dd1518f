//! Canonical matrix factorizations of xyz, the geometric mirror matrix, sign matching
//! and unit-pivot reduction.

use std::collections::VecDeque;

use crate::convert::{band_from_loop, sign_exponent};
use crate::error::{Error, Result};
use crate::ring::{monomial_guarded, LaurentLambda, Poly, PolyMatrix, RatFunc, RatMatrix, Var};
use crate::words::{is_normal, CyclicWord, LoopDatum, Unit};

/// χ_j for a 1-based index: x, y, z for j ≡ 1, 2, 0 (mod 3).
pub fn chi(j: i64) -> Var {
    Var::from_index((j - 1).rem_euclid(3) as usize)
}

pub fn chi_pow(j: i64, e: i64) -> Poly {
    monomial_guarded(chi(j), e)
}

/// 0-based position of a cyclic 1-based index.
fn pos(j: i64, n: usize) -> usize {
    (j - 1).rem_euclid(n as i64) as usize
}

/// Λ⁺_j and Λ⁻_j; only j ≡ 1 carries the eigenvalue, on the side selected by δ₁ = [w′₁ > 0].
pub struct Lambdas {
    n: usize,
    delta1: bool,
    lambda: Unit,
}

impl Lambdas {
    pub fn new(n: usize, delta1: bool, lambda: &Unit) -> Self {
        Self { n, delta1, lambda: lambda.clone() }
    }

    pub fn plus(&self, j: i64) -> LaurentLambda {
        if pos(j, self.n) == 0 && self.delta1 {
            self.lambda.to_laurent()
        } else {
            LaurentLambda::one()
        }
    }

    pub fn minus(&self, j: i64) -> LaurentLambda {
        if pos(j, self.n) == 0 && !self.delta1 {
            self.lambda.inverse().to_laurent()
        } else {
            LaurentLambda::one()
        }
    }
}

fn loop_lambdas(w: &CyclicWord, lambda: &Unit) -> Lambdas {
    Lambdas::new(w.len(), w.entries()[0] > 0, lambda)
}

/// Canonical φ(w′, λ): cyclic tridiagonal with corners, indexed by the loop word.
pub fn canonical_phi(w: &CyclicWord, lambda: &Unit) -> PolyMatrix {
    let n = w.len();
    let lam = loop_lambdas(w, lambda);
    let wp = |j: i64| w.at(j - 1);
    let mut m = PolyMatrix::zeros(n, n);
    for a in 1..=n as i64 {
        m.set(pos(a, n), pos(a, n), chi_pow(a - 1, 1));
        let b = a + 1;
        let sup = chi_pow(b, wp(b) - 1).scale(&lam.plus(b));
        m.set(pos(a, n), pos(b, n), -&sup);
        let sub = chi_pow(b, -wp(b)).scale(&lam.minus(b));
        m.set(pos(b, n), pos(a, n), -&sub);
    }
    m
}

/// u = 1 − Π Λ⁺_j χ_j^{w′_j−2} − Π Λ⁻_j χ_j^{−w′_j−1}.
pub fn unit_u(w: &CyclicWord, lambda: &Unit) -> Poly {
    let n = w.len() as i64;
    let lam = loop_lambdas(w, lambda);
    let mut p_plus = Poly::one();
    let mut p_minus = Poly::one();
    for j in 1..=n {
        let e = w.at(j - 1);
        p_plus = &p_plus * &chi_pow(j, e - 2).scale(&lam.plus(j));
        p_minus = &p_minus * &chi_pow(j, -e - 1).scale(&lam.minus(j));
    }
    &(&Poly::one() - &p_plus) - &p_minus
}

/// Cyclic range a, a+1, …, b (1-based, inclusive); empty when b = a − 1.
fn cyclic_range(a: i64, b: i64, n: i64) -> impl Iterator<Item = i64> {
    let len = (b - a + 1).rem_euclid(n);
    (0..len).map(move |t| a + t)
}

/// ψ̃(w′, λ) with φψ̃ = ψ̃φ = u·xyz·I. The endpoint bumps add, so a one-index range gets +2.
pub fn psi_tilde(w: &CyclicWord, lambda: &Unit) -> PolyMatrix {
    let n = w.len();
    let nn = n as i64;
    let lam = loop_lambdas(w, lambda);
    let mut m = PolyMatrix::zeros(n, n);
    for a in 1..=nn {
        for b in 1..=nn {
            let entry = if a == b {
                &chi_pow(a, 1) * &chi_pow(a + 1, 1)
            } else {
                let bump = |j: i64, s: i64, e: i64| i64::from(pos(j, n) == pos(s, n)) + i64::from(pos(j, n) == pos(e, n));
                // a term vanishes as soon as one factor χ_j^{w′_j−1} (resp. χ_j^{−w′_j}) of adj φ does
                let mut p = Poly::one();
                if cyclic_range(a + 1, b, nn).all(|j| w.at(j - 1) >= 1) {
                    for j in cyclic_range(a + 1, b, nn) {
                        p = &p * &chi_pow(j, w.at(j - 1) - 2 + bump(j, a + 1, b)).scale(&lam.plus(j));
                    }
                } else {
                    p = Poly::zero();
                }
                let mut q = Poly::one();
                if cyclic_range(b + 1, a, nn).all(|j| w.at(j - 1) <= 0) {
                    for j in cyclic_range(b + 1, a, nn) {
                        q = &q * &chi_pow(j, -w.at(j - 1) - 1 + bump(j, b + 1, a)).scale(&lam.minus(j));
                    }
                } else {
                    q = Poly::zero();
                }
                &p + &q
            };
            m.set(pos(a, n), pos(b, n), entry);
        }
    }
    m
}

/// Closed form of adj φ as cyclic products, without dividing out (xyz)^{τ−1}.
pub fn adjugate_closed_form(w: &CyclicWord, lambda: &Unit) -> PolyMatrix {
    let n = w.len();
    let nn = n as i64;
    let lam = loop_lambdas(w, lambda);
    let chis = |a: i64, b: i64| cyclic_range(a, b, nn).fold(Poly::one(), |acc, j| &acc * &chi_pow(j, 1));
    let mut m = PolyMatrix::zeros(n, n);
    for a in 1..=nn {
        for b in 1..=nn {
            let entry = if a == b {
                chis(a, a - 2)
            } else {
                let mut p = chis(b, a - 2);
                for j in cyclic_range(a + 1, b, nn) {
                    p = &p * &chi_pow(j, w.at(j - 1) - 1).scale(&lam.plus(j));
                }
                let mut q = chis(a, b - 2);
                for j in cyclic_range(b + 1, a, nn) {
                    q = &q * &chi_pow(j, -w.at(j - 1)).scale(&lam.minus(j));
                }
                &p + &q
            };
            m.set(pos(a, n), pos(b, n), entry);
        }
    }
    m
}

/// Pair of factors with φψ = ψφ = scale·W·I.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFactorization {
    pub phi: PolyMatrix,
    pub psi: PolyMatrix,
    pub potential: Poly,
    pub scale: Poly,
}

impl MatrixFactorization {
    pub fn new(phi: PolyMatrix, psi: PolyMatrix, potential: Poly, scale: Poly) -> Self {
        Self { phi, psi, potential, scale }
    }

    pub fn canonical(w: &CyclicWord, lambda: &Unit) -> Self {
        Self::new(canonical_phi(w, lambda), psi_tilde(w, lambda), Poly::xyz(), unit_u(w, lambda))
    }

    pub fn verify(&self) -> Result<bool> {
        verify_mf(&self.phi, &self.psi, &self.potential, &self.scale)
    }

    pub fn dim(&self) -> usize {
        self.phi.rows
    }
}

pub fn verify_mf(phi: &PolyMatrix, psi: &PolyMatrix, w: &Poly, scale: &Poly) -> Result<bool> {
    if !phi.is_square() || !psi.is_square() || phi.rows != psi.rows {
        return Err(Error::DimensionMismatch(format!(
            "phi {}x{}, psi {}x{}",
            phi.rows, phi.cols, psi.rows, psi.cols
        )));
    }
    let target = scale * w;
    Ok(phi.mul(psi)?.is_scalar_multiple_of_identity(&target) && psi.mul(phi)?.is_scalar_multiple_of_identity(&target))
}

/// Cross-multiplied check of φψ = ψφ = W·I for rational entries.
pub fn verify_mf_rational(phi: &RatMatrix, psi: &RatMatrix, w: &Poly) -> Result<bool> {
    if phi.rows != phi.cols || psi.rows != psi.cols || phi.rows != psi.rows {
        return Err(Error::DimensionMismatch("rational factors".into()));
    }
    Ok(phi.mul(psi)?.is_scalar_multiple_of_identity(w) && psi.mul(phi)?.is_scalar_multiple_of_identity(w))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetCheck {
    pub det: Poly,
    pub expected_det: Poly,
    pub det_ok: bool,
    pub adj_ok: bool,
    pub closed_form_ok: bool,
}

/// det φ = (xyz)^τ u and adj φ = (xyz)^{τ−1} ψ̃.
pub fn det_check(w: &CyclicWord, lambda: &Unit) -> DetCheck {
    let phi = canonical_phi(w, lambda);
    let tau = w.tau() as u32;
    let det = phi.det().expect("square");
    let expected_det = &Poly::mono([tau, tau, tau]) * &unit_u(w, lambda);
    let adj = phi.adjugate().expect("square");
    let expected_adj = psi_tilde(w, lambda).scale(&Poly::mono([tau - 1, tau - 1, tau - 1]));
    let closed_form_ok = adj == adjugate_closed_form(w, lambda);
    DetCheck { det_ok: det == expected_det, det, expected_det, adj_ok: adj == expected_adj, closed_form_ok }
}

/// (−x)^e, zero for e < 0.
fn neg_x_pow(e: i64) -> Poly {
    let p = monomial_guarded(Var::X, e);
    if e.rem_euclid(2) == 1 {
        -&p
    } else {
        p
    }
}

/// Mirror matrix M_L of a normal loop datum; rows s_i, t_i, u_i, columns p_i, q_i, r_i.
pub fn geometric_matrix(l: &LoopDatum) -> Result<PolyMatrix> {
    let (ok, v) = is_normal(&l.word);
    if !ok {
        return Err(Error::NotNormal(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")));
    }
    if l.word.entries().iter().all(|&e| e == 2) {
        return Err(Error::Unsupported("words (2,…,2) have no geometric matrix; use degenerate_222".into()));
    }
    Ok(geometric_matrix_unchecked(&l.word, &l.holonomy))
}

/// M_L without the normality precondition (used to examine non-normal words).
pub fn geometric_matrix_unchecked(w: &CyclicWord, holonomy: &Unit) -> PolyMatrix {
    let tau = w.tau();
    let n = 3 * tau;
    let e = w.entries();
    let mut g = PolyMatrix::zeros(n, n);
    let y = |k: i64| monomial_guarded(Var::Y, k);
    let z = |k: i64| monomial_guarded(Var::Z, k);
    let hol = holonomy.to_laurent();
    let hol_inv = holonomy.inverse().to_laurent();
    for i in 0..tau {
        // rows s, t, u and columns p, q, r of block i sit at 3i, 3i+1, 3i+2
        let (s, t, u) = (3 * i, 3 * i + 1, 3 * i + 2);
        let (m, nn) = (e[3 * i + 1], e[3 * i + 2]);
        g.set(s, s, Poly::z());
        g.set(s, t, -&y(m - 1));
        g.set(t, s, y(-m));
        g.set(t, t, Poly::x());
        g.set(t, u, -&z(nn - 1));
        g.set(u, t, z(-nn));
        g.set(u, u, Poly::y());
        let next = (i + 1) % tau;
        let lp = e[3 * next];
        let (mut up, mut sr) = (-&neg_x_pow(lp - 1), -&neg_x_pow(-lp));
        if next == 0 {
            up = up.scale(&hol);
            sr = sr.scale(&hol_inv);
        }
        g.set(u, 3 * next, up);
        g.set(3 * next, u, sr);
    }
    g
}

/// Diagonal ±1 vectors with left·M·right equal to a target matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignConjugation {
    pub left: Vec<i8>,
    pub right: Vec<i8>,
}

impl SignConjugation {
    pub fn apply(&self, m: &PolyMatrix) -> PolyMatrix {
        let mut out = m.clone();
        for i in 0..m.rows {
            for j in 0..m.cols {
                if self.left[i] * self.right[j] < 0 {
                    out.set(i, j, -m.get(i, j));
                }
            }
        }
        out
    }
}

/// Propagate signs along the bipartite graph of nonzero entries; None if the patterns
/// differ or a cycle is inconsistent.
pub fn find_sign_conjugation(source: &PolyMatrix, target: &PolyMatrix) -> std::result::Result<SignConjugation, String> {
    if (source.rows, source.cols) != (target.rows, target.cols) {
        return Err("shape mismatch".into());
    }
    let (nr, nc) = (source.rows, source.cols);
    let mut sigma = vec![0i8; nr * nc];
    for i in 0..nr {
        for j in 0..nc {
            let (a, b) = (source.get(i, j), target.get(i, j));
            sigma[i * nc + j] = if a.is_zero() && b.is_zero() {
                0
            } else if a == b {
                1
            } else if *a == -b {
                -1
            } else {
                return Err(format!("entry ({}, {}): {} vs {} differ beyond sign", i + 1, j + 1, a, b));
            };
        }
    }
    let mut left = vec![0i8; nr];
    let mut right = vec![0i8; nc];
    for start in 0..nr {
        if left[start] != 0 {
            continue;
        }
        left[start] = 1;
        // nodes: rows as (true, i), columns as (false, j)
        let mut queue = VecDeque::from([(true, start)]);
        while let Some((is_row, k)) = queue.pop_front() {
            if is_row {
                for j in 0..nc {
                    let s = sigma[k * nc + j];
                    if s == 0 {
                        continue;
                    }
                    let want = left[k] * s;
                    if right[j] == 0 {
                        right[j] = want;
                        queue.push_back((false, j));
                    } else if right[j] != want {
                        return Err(format!("sign cycle inconsistent at ({}, {})", k + 1, j + 1));
                    }
                }
            } else {
                for i in 0..nr {
                    let s = sigma[i * nc + k];
                    if s == 0 {
                        continue;
                    }
                    let want = right[k] * s;
                    if left[i] == 0 {
                        left[i] = want;
                        queue.push_back((true, i));
                    } else if left[i] != want {
                        return Err(format!("sign cycle inconsistent at ({}, {})", i + 1, k + 1));
                    }
                }
            }
        }
    }
    for r in right.iter_mut() {
        if *r == 0 {
            *r = 1;
        }
    }
    let sc = SignConjugation { left, right };
    if sc.apply(source) != *target {
        return Err("post-check failed".into());
    }
    Ok(sc)
}

/// Holonomy λ′ = (−1)^{Σl_i+τ} λ, with l_i read from the band word of w′.
pub fn holonomy_for(w: &CyclicWord, lambda: &Unit) -> Result<Unit> {
    let band = band_from_loop(&LoopDatum::new(w.clone(), Unit::one()))?.band.word;
    Ok(lambda.signed(sign_exponent(&band)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricMatch {
    pub holonomy: Unit,
    pub geometric: PolyMatrix,
    pub canonical: PolyMatrix,
    pub signs: SignConjugation,
}

/// Match M_L(w′, λ′) against φ(w′, λ) by sign diagonals.
pub fn match_geometric_to_canonical(w: &CyclicWord, lambda: &Unit) -> Result<GeometricMatch> {
    let holonomy = holonomy_for(w, lambda)?;
    let geometric = geometric_matrix(&LoopDatum::new(w.clone(), holonomy.clone()))?;
    let canonical = canonical_phi(w, lambda);
    let signs = find_sign_conjugation(&geometric, &canonical).map_err(Error::Inconsistent)?;
    Ok(GeometricMatch { holonomy, geometric, canonical, signs })
}

/// The shift functor: swap the two factors.
pub fn shift_mf(m: &MatrixFactorization) -> MatrixFactorization {
    MatrixFactorization::new(m.psi.clone(), m.phi.clone(), m.potential.clone(), m.scale.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Phi,
    Psi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotKind {
    /// c·λ^e: exact inverse.
    Unit,
    /// Non-monomial element of Q[λ, λ⁻¹]: the reduced factor is scaled by the pivot.
    Scaled,
    /// Depends on x, y, z: truncated power-series inverse.
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub mf: MatrixFactorization,
    pub kind: PivotKind,
}

fn without(n: usize, k: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != k).collect()
}

/// Remove a row/column pair at an invertible pivot: C ↦ C − D·u⁻¹·Eᵀ on the pivot side,
/// the other factor loses the transposed row/column.
pub fn unit_pivot_reduce(m: &MatrixFactorization, pivot: (usize, usize), side: Side, trunc: u32) -> Result<Reduction> {
    let (a, b) = match side {
        Side::Phi => (&m.phi, &m.psi),
        Side::Psi => (&m.psi, &m.phi),
    };
    let n = a.rows;
    let (r, c) = pivot;
    if r >= n || c >= n {
        return Err(Error::InvalidIndex(r.max(c) + 1));
    }
    let p = a.get(r, c).clone();
    let rows = without(n, r);
    let cols = without(n, c);
    let cm = a.select(&rows, &cols);
    let d: Vec<Poly> = rows.iter().map(|&i| a.get(i, c).clone()).collect();
    let e: Vec<Poly> = cols.iter().map(|&j| a.get(r, j).clone()).collect();
    let outer = |coef: &Poly, base_scale: &Poly, tr: Option<u32>| {
        let mut out = PolyMatrix::zeros(n - 1, n - 1);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let mut v = &(cm.get(i, j) * base_scale) - &(&(&d[i] * coef) * &e[j]);
                if let Some(t) = tr {
                    v = v.truncate(t);
                }
                out.set(i, j, v);
            }
        }
        out
    };
    let (reduced, scale, kind) = if let Some((_, c0)) = p.as_monomial_unit().filter(|(e, _)| *e == [0, 0, 0]) {
        let inv = Poly::constant(c0.inverse().expect("monomial coefficient"));
        (outer(&inv, &Poly::one(), None), m.scale.clone(), PivotKind::Unit)
    } else if p.is_lambda_constant() && !p.is_zero() {
        (outer(&Poly::one(), &p, None), &m.scale * &p, PivotKind::Scaled)
    } else {
        let inv = p.truncated_inverse(trunc)?;
        (outer(&inv, &Poly::one(), Some(trunc)), m.scale.clone(), PivotKind::Truncated)
    };
    let other = b.select(&without(n, c), &without(n, r));
    let mf = match side {
        Side::Phi => MatrixFactorization::new(reduced, other, m.potential.clone(), scale),
        Side::Psi => MatrixFactorization::new(other, reduced, m.potential.clone(), scale),
    };
    Ok(Reduction { mf, kind })
}

/// The perturbed 4×4 pair attached to the loop word (2,2,2).
pub fn degenerate_222(holonomy: &Unit) -> MatrixFactorization {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let h = holonomy.to_poly();
    let o = Poly::zero;
    let phi = PolyMatrix::from_rows(vec![
        vec![&x * &z, o(), o(), o()],
        vec![z.clone(), -&y, o(), o()],
        vec![o(), x.clone(), -&z, o()],
        vec![&h * &x, o(), y.clone(), &x * &y],
    ]);
    let psi = PolyMatrix::from_rows(vec![
        vec![y.clone(), o(), o(), o()],
        vec![z.clone(), -&(&x * &z), o(), o()],
        vec![x.clone(), -&(&x * &x), -&(&x * &y), o()],
        vec![&Poly::int(-1) - &h, x.clone(), y.clone(), z.clone()],
    ]);
    MatrixFactorization::new(phi, psi, Poly::xyz(), Poly::one())
}

/// The 3×3 pair the perturbed (2,2,2) factorization reduces to: (φ, ψ numerator, denominator 1+λ′).
pub fn degenerate_222_reduced(holonomy: &Unit) -> (PolyMatrix, PolyMatrix, Poly) {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let h = holonomy.to_poly();
    let o = Poly::zero;
    let phi = PolyMatrix::from_rows(vec![
        vec![z.clone(), -&y, o()],
        vec![o(), x.clone(), -&z],
        vec![&h * &x, o(), y.clone()],
    ]);
    let mh = -&h;
    let psi = PolyMatrix::from_rows(vec![
        vec![&x * &y, &y * &y, &y * &z],
        vec![&mh * &(&x * &z), &y * &z, &z * &z],
        vec![&mh * &(&x * &x), &mh * &(&x * &y), &x * &z],
    ]);
    (phi, psi, &Poly::one() + &h)
}

fn parity_sign(k: i64) -> Poly {
    if k.rem_euclid(2) == 0 {
        Poly::one()
    } else {
        Poly::int(-1)
    }
}

/// 2×2 factor left after removing the bigon of a normal (l′, m′, 1): the pivot −1 at (t, r) of M_L.
pub fn bigon_reduced_form(l: i64, m: i64, holonomy: &Unit) -> PolyMatrix {
    let hi = holonomy.inverse().to_poly();
    let h = holonomy.to_poly();
    let s = parity_sign(l + 1);
    let (x, y) = (|e| monomial_guarded(Var::X, e), |e| monomial_guarded(Var::Y, e));
    // M_L entries are guarded separately before multiplying
    let corner = &(&s * &hi) * &x(-l);
    PolyMatrix::from_rows(vec![
        vec![&Poly::z() + &(&corner * &y(-m)), &(-&y(m - 1)) + &(&corner * &Poly::x())],
        vec![&(&(&parity_sign(l) * &h) * &x(l - 1)) + &(&Poly::y() * &y(-m)), &Poly::x() * &Poly::y()],
    ])
}

/// The bigon-removal 2×2 exactly as printed, for comparison with [`bigon_reduced_form`].
pub fn bigon_printed_form(l: i64, m: i64, holonomy: &Unit) -> PolyMatrix {
    let hi = holonomy.inverse().to_poly();
    let h = holonomy.to_poly();
    let (x, y) = (|e| monomial_guarded(Var::X, e), |e| monomial_guarded(Var::Y, e));
    let s1 = parity_sign(l + 1);
    let s0 = parity_sign(l);
    let a = &(&Poly::z() + &(&(&s1 * &hi) * &(&x(l - 2) * &y(m - 2)))) + &(&(&s1 * &h) * &(&x(-l) * &y(-m)));
    let b = &y(m - 1) + &(&(&hi * &s0) * &x(1 - l));
    let c = &y(1 - m) + &(&(&h * &s0) * &x(l - 1));
    PolyMatrix::from_rows(vec![vec![a, b], vec![c, &Poly::x() * &Poly::y()]])
}

/// Factor of xyz from a non-normal word, with its extra polygon term in the (p₁, s₁) entry.
pub fn nonnormal_example(lambda: &Unit) -> PolyMatrix {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let l = lambda.to_poly();
    let o = Poly::zero;
    PolyMatrix::from_rows(vec![
        vec![&z - &(&l * &(&x.pow(2) * &y)), o(), &l * &x.pow(3)],
        vec![y.pow(2), x.clone(), o()],
        vec![o(), Poly::one(), y.clone()],
    ])
}

/// The normal-form matrix printed next to [`nonnormal_example`].
pub fn nonnormal_printed_normal_form(lambda: &Unit) -> PolyMatrix {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let o = Poly::zero;
    PolyMatrix::from_rows(vec![
        vec![z, o(), &lambda.to_poly() * &x],
        vec![y, x.clone(), Poly::one()],
        vec![o(), o(), x],
    ])
}

/// Pair (φ, adj φ) with scale det φ / xyz; None if det φ is not divisible by xyz.
pub fn with_adjugate_partner(phi: &PolyMatrix) -> Result<Option<MatrixFactorization>> {
    let det = phi.det()?;
    let adj = phi.adjugate()?;
    Ok(det.exact_div(&Poly::xyz()).map(|scale| MatrixFactorization::new(phi.clone(), adj, Poly::xyz(), scale)))
}

/// Parameters of the rank-one catalogue θ₁…θ₇.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaParams {
    Two { p: u32, q: u32 },
    Three { m: u32, n: u32, l: u32 },
}

/// θ_i with (u, v, w) sent to the variables in `vars`.
pub fn theta_catalogue(i: usize, params: &ThetaParams, lambda: &Unit, vars: [Var; 3]) -> Result<PolyMatrix> {
    let [u, v, w] = vars.map(|x| Poly::var(x, 1));
    let pw = |x: Var, e: u32| Poly::var(x, e);
    let lam = lambda.to_poly();
    let o = Poly::zero;
    match (i, params) {
        (1..=3, ThetaParams::Two { p, q }) => {
            let (p, q) = (*p, *q);
            let t1 = || {
                PolyMatrix::from_rows(vec![
                    vec![u.clone(), o()],
                    vec![&pw(vars[1], p) + &(&lam * &pw(vars[2], q)), &v * &w],
                ])
            };
            Ok(match i {
                1 => t1(),
                2 => PolyMatrix::from_rows(vec![
                    vec![&(&lam * &u) + &(&pw(vars[1], p) * &pw(vars[2], q)), pw(vars[2], q + 1)],
                    vec![pw(vars[1], p + 1), &v * &w],
                ]),
                _ => t1().transpose(),
            })
        }
        (4..=7, ThetaParams::Three { m, n, l }) => {
            let (m, n, l) = (*m, *n, *l);
            let t4 = || {
                PolyMatrix::from_rows(vec![
                    vec![u.clone(), pw(vars[2], l), o()],
                    vec![o(), v.clone(), pw(vars[0], m)],
                    vec![&lam * &pw(vars[1], n), o(), w.clone()],
                ])
            };
            let t5 = || {
                PolyMatrix::from_rows(vec![
                    vec![u.clone(), pw(vars[2], l), &lam * &pw(vars[1], n)],
                    vec![o(), v.clone(), pw(vars[0], m)],
                    vec![o(), o(), w.clone()],
                ])
            };
            Ok(match i {
                4 => t4(),
                5 => t5(),
                6 => t4().transpose(),
                _ => t5().transpose(),
            })
        }
        (1..=7, _) => Err(Error::Parse(format!("theta_{} takes {} parameters", i, if i <= 3 { "(p,q)" } else { "(m,n,l)" }))),
        _ => Err(Error::InvalidIndex(i)),
    }
}

/// Rational-entry view of a scaled factorization: ψ/scale.
pub fn psi_over_scale(m: &MatrixFactorization) -> RatMatrix {
    RatMatrix::from_poly(&m.psi).map(|e| RatFunc { num: e.num.clone(), den: &e.den * &m.scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lw(v: &[i64]) -> CyclicWord {
        CyclicWord::loop_word(v).unwrap()
    }

    fn lam() -> Unit {
        Unit::lambda()
    }

    fn p(rows: Vec<Vec<Poly>>) -> PolyMatrix {
        PolyMatrix::from_rows(rows)
    }

    fn x() -> Poly {
        Poly::x()
    }
    fn y() -> Poly {
        Poly::y()
    }
    fn z() -> Poly {
        Poly::z()
    }
    fn o() -> Poly {
        Poly::zero()
    }

    #[test]
    fn canonical_examples() {
        let l = Poly::lam(1);
        let m = canonical_phi(&lw(&[3, -2, 2]), &lam());
        let expect = p(vec![
            vec![z(), o(), o()],
            vec![-&y().pow(2), x(), -&z()],
            vec![-&(&l * &x().pow(2)), o(), y()],
        ]);
        assert_eq!(m, expect);
        let m = canonical_phi(&lw(&[3, 3, 3]), &lam());
        let expect = p(vec![
            vec![z(), -&y().pow(2), o()],
            vec![o(), x(), -&z().pow(2)],
            vec![-&(&l * &x().pow(2)), o(), y()],
        ]);
        assert_eq!(m, expect);
    }

    #[test]
    fn unit_examples() {
        let one_minus = &Poly::one() - &(&Poly::lam(1) * &Poly::xyz());
        assert_eq!(unit_u(&lw(&[3, 3, 3]), &lam()), one_minus);
        assert!(unit_u(&lw(&[3, -2, 2]), &lam()).is_one());
        let pt = psi_tilde(&lw(&[3, -2, 2, 1, -1, 0]), &lam());
        let diag = [&x() * &y(), &y() * &z(), &z() * &x()];
        for a in 0..6 {
            assert_eq!(pt.get(a, a), &diag[a % 3]);
        }
    }

    #[test]
    fn determinant_examples() {
        let c = det_check(&lw(&[3, 3, 3]), &lam());
        assert_eq!(c.det, &Poly::xyz() * &(&Poly::one() - &(&Poly::lam(1) * &Poly::xyz())));
        assert!(c.det_ok && c.adj_ok && c.closed_form_ok);
        let c = det_check(&lw(&[3, -2, 2]), &lam());
        // cofactor oracle
        assert_eq!(c.det, canonical_phi(&lw(&[3, -2, 2]), &lam()).det_cofactor());
        assert_eq!(c.det, Poly::xyz());
        let c = det_check(&lw(&[2, 2, 2, 2, 2, 2]), &lam());
        assert_eq!(c.det, canonical_phi(&lw(&[2, 2, 2, 2, 2, 2]), &lam()).det_cofactor());
        assert!(c.det_ok && c.adj_ok && c.closed_form_ok);
    }

    #[test]
    fn verify_examples() {
        let w = lw(&[3, 3, 3]);
        assert!(MatrixFactorization::canonical(&w, &lam()).verify().unwrap());
        let one = p(vec![vec![Poly::xyz()]]);
        assert!(verify_mf(&one, &PolyMatrix::identity(1), &Poly::xyz(), &Poly::one()).unwrap());
        let psi = psi_tilde(&w, &lam());
        let swapped = psi.select(&[1, 0, 2], &[0, 1, 2]);
        assert!(!verify_mf(&canonical_phi(&w, &lam()), &swapped, &Poly::xyz(), &unit_u(&w, &lam())).unwrap());
    }

    #[test]
    fn geometric_example_232() {
        let hol = lam();
        let g = geometric_matrix(&LoopDatum::new(lw(&[2, 3, 2]), hol)).unwrap();
        let l = Poly::lam(1);
        let expect = p(vec![vec![z(), -&y().pow(2), o()], vec![o(), x(), -&z()], vec![&l * &x(), o(), y()]]);
        assert_eq!(g, expect);
    }

    #[test]
    fn geometric_rank_one_matches_closed_form() {
        // rank-one display: corners (−1)^{l′+1}λ′⁻¹x^{−l′} and (−1)^{l′}λ′x^{l′−1}
        for w in [[3, -2, 2], [-1, 2, -3], [0, 3, -1], [4, 0, -2], [-2, -1, 1]] {
            let word = lw(&w);
            if !is_normal(&word).0 {
                continue;
            }
            let g = geometric_matrix(&LoopDatum::new(word, lam())).unwrap();
            let (l, m, n) = (w[0], w[1], w[2]);
            let sgn = |k: i64| if k.rem_euclid(2) == 0 { Poly::one() } else { Poly::int(-1) };
            let lx = &(&sgn(l + 1) * &Poly::lam(-1)) * &monomial_guarded(Var::X, -l);
            let ux = &(&sgn(l) * &Poly::lam(1)) * &monomial_guarded(Var::X, l - 1);
            let expect = p(vec![
                vec![z(), -&monomial_guarded(Var::Y, m - 1), lx],
                vec![monomial_guarded(Var::Y, -m), x(), -&monomial_guarded(Var::Z, n - 1)],
                vec![ux, monomial_guarded(Var::Z, -n), y()],
            ]);
            assert_eq!(g, expect, "{:?}", w);
        }
    }

    #[test]
    fn sign_matching_examples() {
        let m = match_geometric_to_canonical(&lw(&[3, -2, 2]), &lam()).unwrap();
        assert_eq!(m.signs.apply(&m.geometric), m.canonical);
        let m = match_geometric_to_canonical(&lw(&[3, 3, 3, -1, 2, 4]), &lam()).unwrap();
        assert_eq!(m.signs.apply(&m.geometric), m.canonical);
    }

    #[test]
    fn shift_is_involution() {
        let mf = MatrixFactorization::canonical(&lw(&[3, -2, 2]), &lam());
        assert_eq!(shift_mf(&shift_mf(&mf)), mf);
        assert!(shift_mf(&mf).verify().unwrap());
    }

    #[test]
    fn block_diagonal_reduction() {
        let mf = MatrixFactorization::canonical(&lw(&[3, -2, 2]), &lam());
        let n = mf.dim();
        let mut phi = PolyMatrix::zeros(n + 1, n + 1);
        let mut psi = PolyMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                phi.set(i, j, mf.phi.get(i, j).clone());
                psi.set(i, j, mf.psi.get(i, j).clone());
            }
        }
        phi.set(n, n, Poly::one());
        psi.set(n, n, Poly::xyz());
        let big = MatrixFactorization::new(phi, psi, Poly::xyz(), Poly::one());
        assert!(big.verify().unwrap());
        let red = unit_pivot_reduce(&big, (n, n), Side::Phi, 12).unwrap();
        assert_eq!(red.kind, PivotKind::Unit);
        assert_eq!(red.mf.phi, mf.phi);
        assert!(red.mf.verify().unwrap());
    }

    #[test]
    fn degenerate_pair_multiplies_out() {
        let mf = degenerate_222(&lam());
        assert!(mf.verify().unwrap());
    }

    #[test]
    fn theta_transpose_rules() {
        let par = ThetaParams::Two { p: 2, q: 3 };
        let vars = [Var::X, Var::Y, Var::Z];
        let t1 = theta_catalogue(1, &par, &lam(), vars).unwrap();
        assert_eq!(theta_catalogue(3, &par, &lam(), vars).unwrap(), t1.transpose());
        let expect = p(vec![vec![x(), o()], vec![&y().pow(2) + &(&Poly::lam(1) * &z().pow(3)), &y() * &z()]]);
        assert_eq!(t1, expect);
        let par = ThetaParams::Three { m: 1, n: 2, l: 3 };
        let t4 = theta_catalogue(4, &par, &lam(), vars).unwrap();
        let expect = p(vec![
            vec![x(), z().pow(3), o()],
            vec![o(), y(), x()],
            vec![&Poly::lam(1) * &y().pow(2), o(), z()],
        ]);
        assert_eq!(t4, expect);
        assert_eq!(theta_catalogue(6, &par, &lam(), vars).unwrap(), t4.transpose());
        assert!(matches!(theta_catalogue(8, &par, &lam(), vars), Err(Error::InvalidIndex(8))));
    }

    #[test]
    fn degenerate_reduces_to_canonical_pair() {
        let h = lam();
        let red = unit_pivot_reduce(&degenerate_222(&h), (3, 0), Side::Psi, 12).unwrap();
        assert_eq!(red.kind, PivotKind::Scaled);
        assert!(red.mf.verify().unwrap());
        let (phi, psi_num, den) = degenerate_222_reduced(&h);
        assert_eq!(red.mf.phi, phi);
        // ψ′/scale = ψ_num/den, cross-multiplied
        assert_eq!(red.mf.psi.scale(&den), psi_num.scale(&red.mf.scale));
        // φ is canonical for (2,2,2) at λ = −λ′
        assert_eq!(phi, canonical_phi(&lw(&[2, 2, 2]), &h.neg()));
    }

    #[test]
    fn bigon_removal_rank_one() {
        let h = lam();
        for l in -4..=0 {
            for m in -4..=0 {
                let w = lw(&[l, m, 1]);
                if !is_normal(&w).0 {
                    continue;
                }
                let g = geometric_matrix(&LoopDatum::new(w, h.clone())).unwrap();
                let mf = with_adjugate_partner(&g).unwrap().unwrap();
                assert!(mf.verify().unwrap());
                let red = unit_pivot_reduce(&mf, (1, 2), Side::Phi, 12).unwrap();
                assert_eq!(red.kind, PivotKind::Unit);
                assert!(red.mf.verify().unwrap());
                assert_eq!(red.mf.phi, bigon_reduced_form(l, m, &h));
                assert_eq!(red.mf.phi.det().unwrap(), Poly::xyz());
                // printed form is not a factor of xyz
                let printed = bigon_printed_form(l, m, &h).det().unwrap();
                assert!(printed.exact_div(&Poly::xyz()).is_none(), "({}, {})", l, m);
            }
        }
    }

    #[test]
    fn nonnormal_example_reduces_like_its_normal_form() {
        let h = lam();
        let a = nonnormal_example(&h);
        assert_eq!(a.det().unwrap(), Poly::xyz());
        let mf = with_adjugate_partner(&a).unwrap().unwrap();
        let red = unit_pivot_reduce(&mf, (2, 1), Side::Phi, 12).unwrap();
        assert!(red.mf.verify().unwrap());
        // normal form of the word in (l′, m′, n′) order, reduced at its −1
        let g = geometric_matrix(&LoopDatum::new(lw(&[-2, -1, 1]), h.inverse())).unwrap();
        let gmf = with_adjugate_partner(&g).unwrap().unwrap();
        let gred = unit_pivot_reduce(&gmf, (1, 2), Side::Phi, 12).unwrap();
        assert!(find_sign_conjugation(&red.mf.phi, &gred.mf.phi).is_ok());
        let printed = nonnormal_printed_normal_form(&h).det().unwrap();
        assert_eq!(printed, &Poly::x().pow(2) * &Poly::z());
    }
}
