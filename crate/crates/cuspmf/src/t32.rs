//! The x³ + y² ± xyz family: mirror factors of the loops L_{m,λ}, the J-ideal presentation rows
//! and the swapped-pair (AR translation) check.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{LaurentLambda, Poly, RatFunc, RatMatrix};
use crate::words::Unit;

/// Sign of the xyz term in the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// x³ + y² + xyz, the convention of the disc count.
    PlusXyz,
    /// x³ + y² − xyz, reached by z ↦ −z.
    MinusXyz,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::PlusXyz => "x^3+y^2+xyz",
            Convention::MinusXyz => "x^3+y^2-xyz",
        }
    }
}

pub fn potential(c: Convention) -> Poly {
    let w = &(&Poly::x().pow(3) + &Poly::y().pow(2)) + &Poly::xyz();
    match c {
        Convention::PlusXyz => w,
        Convention::MinusXyz => w.substitute_z_negate(),
    }
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Σ_{i=0}^{top} (−1)^{s0−i} C(n0−i, i) x^{i+dx} z^{z0−2i}.
fn binomial_sum(top: i64, s0: i64, n0: i64, dx: i64, z0: i64) -> Poly {
    let mut out = Poly::zero();
    for i in 0..=top {
        let c = sign(s0 - i) * binom(n0 - i, i);
        if c == 0 {
            continue;
        }
        let ez = z0 - 2 * i;
        assert!(ez >= 0 && i + dx >= 0, "negative exponent in binomial sum");
        out = &out + &Poly::mono([(i + dx) as u32, 0, ez as u32]).scale(&LaurentLambda::int(c));
    }
    out
}

fn floor_half(k: i64) -> i64 {
    k.div_euclid(2)
}

fn inv(l: &Unit) -> Poly {
    l.inverse().to_poly()
}

/// r = λ⁻¹ Σ_{i=0}^{⌊(m−1)/2⌋} (−1)^{m−i} C(m−1−i, i) x^i z^{m−1−2i}.
pub fn r_series(m: i64, lambda: &Unit) -> Poly {
    &inv(lambda) * &binomial_sum(floor_half(m - 1), m, m - 1, 0, m - 1)
}

/// Mirror pair of L_{m,λ} with its potential and r.
#[derive(Clone, Debug)]
pub struct T32Factorization {
    pub m: i64,
    pub lambda: Unit,
    pub p1: RatMatrix,
    pub p2: RatMatrix,
    pub w: Poly,
    pub r: Poly,
}

impl T32Factorization {
    pub fn products(&self) -> Result<(RatMatrix, RatMatrix)> {
        Ok((self.p1.mul(&self.p2)?, self.p2.mul(&self.p1)?))
    }

    pub fn to_json(&self) -> Value {
        let m = |a: &RatMatrix| -> Value {
            (0..2)
                .map(|i| (0..2).map(|j| Value::String(a.get(i, j).to_string())).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        json!({
            "m": self.m,
            "lambda": self.lambda.to_json(),
            "P1": m(&self.p1),
            "P2": m(&self.p2),
            "W": self.w.to_string(),
            "r": self.r.to_string(),
        })
    }
}

/// P₁ = (a_ij) from the binomial entry formulas, P₂ from the symmetry relations
/// a₁₁ = a′₂₂, a₂₁ = −a′₂₁, a₁₂ = −a′₁₂, a₂₂ = a′₁₁.
pub fn build_t32(m: i64, lambda: &Unit) -> Result<T32Factorization> {
    if m < 1 {
        return Err(Error::Unsupported(format!("m must be positive, got {}", m)));
    }
    let li = inv(lambda);
    let r = r_series(m, lambda);
    let den = &Poly::one() - &r;
    if den.is_zero() || den.constant_term().is_zero() {
        return Err(Error::NotAUnit(format!("1 - r = {}", den)));
    }
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());

    // a11 = λx + S + N(1 + λ⁻¹K)/(1−r); K may carry z⁻¹ (m = 2), so N·(z + λ⁻¹zK)/z
    let s = binomial_sum(floor_half(m - 1), m - 1, m - 1, 1, m - 1);
    let n = binomial_sum(floor_half(m), m, m, 0, m + 1);
    let zk = binomial_sum(floor_half(m - 2), m - 3, m - 2, 1, m - 2);
    let tail = (&n * &(&z + &(&li * &zk)))
        .exact_div(&z)
        .ok_or_else(|| Error::Inconsistent("z does not divide the a11 tail".into()))?;
    let a11 = RatFunc::poly(&(&lambda.to_poly() * &x) + &s).add(&RatFunc::new(tail, den.clone())?);

    let a21_num = &li * &binomial_sum(floor_half(m), m - 1, m, 1, m);
    let a21 = RatFunc::poly(y.clone()).add(&RatFunc::new(a21_num, den.clone())?);

    let a12_num = &(-&(&x * &z)) + &(&li * &binomial_sum(floor_half(m - 2), m - 2, m - 2, 2, m - 2));
    let a12 = RatFunc::poly(-&y).add(&RatFunc::new(a12_num, den.clone())?);

    let a22 = RatFunc::new(&li * &x.pow(2), den)?;

    let p1 = RatMatrix::from_rows(vec![vec![a11.clone(), a12.clone()], vec![a21.clone(), a22.clone()]]);
    let p2 = RatMatrix::from_rows(vec![vec![a22, a12.neg()], vec![a21.neg(), a11]]);
    Ok(T32Factorization { m, lambda: lambda.clone(), p1, p2, w: potential(Convention::PlusXyz), r })
}

fn row_times(row: &[Poly; 2], p: &RatMatrix) -> [RatFunc; 2] {
    let col = |j: usize| RatFunc::poly(row[0].clone()).mul(p.get(0, j)).add(&RatFunc::poly(row[1].clone()).mul(p.get(1, j)));
    [col(0), col(1)]
}

/// row·P = (c·W, 0) with c a fraction whose numerator and denominator have nonzero constant term.
pub fn check_presentation(row: &[Poly; 2], p: &RatMatrix, w: &Poly) -> (bool, Option<RatFunc>) {
    let [e1, e2] = row_times(row, p);
    if !e2.is_zero() {
        return (false, None);
    }
    let Some(q) = e1.num.exact_div(w) else {
        return (false, None);
    };
    let c = RatFunc { num: q, den: e1.den };
    let ok = !c.num.constant_term().is_zero() && !c.den.constant_term().is_zero();
    (ok, Some(c))
}

/// Generator row of J_{m,−λ} used against P₁: (x², y + λ(xz + y)) for m = 1,
/// (x², y(λ − z) + λxz − x²) for m = 2 and (λ⁻¹x², c₂) for m ≥ 3.
pub fn lemma_j_row(m: i64, lambda: &Unit) -> [Poly; 2] {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let l = lambda.to_poly();
    let x2 = x.pow(2);
    let xz = &x * &z;
    match m {
        1 => [x2, &y + &(&l * &(&xz + &y))],
        2 => [x2.clone(), &(&(&y * &(&l - &z)) + &(&l * &xz)) - &x2],
        _ => {
            let li = inv(lambda);
            let r = r_series(m, lambda);
            let tail = &li * &binomial_sum(floor_half(m - 2), m - 2, m - 2, 2, m - 2);
            let c2 = &(&(&y * &(&Poly::one() - &r)) + &xz) - &tail;
            [&li * &x2, c2]
        }
    }
}

/// Displayed cofactor: 1 + λ, λ − z, 1 − r.
pub fn lemma_j_cofactor(m: i64, lambda: &Unit) -> Poly {
    match m {
        1 => &Poly::one() + &lambda.to_poly(),
        2 => &lambda.to_poly() - &Poly::z(),
        _ => &Poly::one() - &r_series(m, lambda),
    }
}

/// Pair (Q₁, Q₂) presenting J_{m,λ} ≅ ⟨x², yD + λxz⟩ in the x³ + y² − xyz convention, with
/// E = z^{m−1} − (m−2)xz^{m−3} (E = 1 for m = 1) and D = E − λ. For m = 1 both factors are the
/// display divided by D.
pub fn ar_pair(m: i64, lambda: &Unit) -> Result<(RatMatrix, RatMatrix)> {
    if m < 1 {
        return Err(Error::Unsupported(format!("m must be positive, got {}", m)));
    }
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let l = lambda.to_poly();
    let e = if m == 1 {
        Poly::one()
    } else if m == 2 {
        z.clone()
    } else {
        &z.pow((m - 1) as u32) - &(&x * &z.pow((m - 3) as u32)).scale(&LaurentLambda::int(m - 2))
    };
    let d = &e - &l;
    if d.is_zero() {
        return Err(Error::NotAUnit("E - λ vanishes".into()));
    }
    let d2 = d.pow(2);
    let xz = &x * &z;
    let q11 = &(&x * &d2) + &(&(&l * &z.pow(2)) * &e);
    let q12 = -&(&(&y * &d) + &(&l * &xz));
    let q21 = &(&y * &d) - &(&xz * &e);
    let q22 = x.pow(2);
    let (p1, p2) = if m == 1 {
        let f = |p: &Poly| RatFunc::new(p.clone(), d.clone());
        let g = |p: &Poly| RatFunc::new(p.clone(), d.clone());
        (
            RatMatrix::from_rows(vec![vec![f(&q11)?, f(&q12)?], vec![f(&q21)?, f(&q22)?]]),
            RatMatrix::from_rows(vec![vec![g(&q22)?, g(&-&q12)?], vec![g(&-&q21)?, g(&q11)?]]),
        )
    } else {
        let g = |p: &Poly| RatFunc::new(p.clone(), d2.clone());
        (
            RatMatrix::from_rows(vec![
                vec![RatFunc::poly(q11.clone()), RatFunc::poly(q12.clone())],
                vec![RatFunc::poly(q21.clone()), RatFunc::poly(q22.clone())],
            ]),
            RatMatrix::from_rows(vec![vec![g(&q22)?, g(&-&q12)?], vec![g(&-&q21)?, g(&q11)?]]),
        )
    };
    Ok((p1, p2))
}

/// Rows (x², yD + λxz) for J_{m,λ} and (yD − xzE, x²) for I_{m,1/λ}.
fn ar_rows(m: i64, lambda: &Unit) -> ([Poly; 2], [Poly; 2]) {
    let (x, y, z) = (Poly::x(), Poly::y(), Poly::z());
    let l = lambda.to_poly();
    let e = match m {
        1 => Poly::one(),
        2 => z.clone(),
        _ => &z.pow((m - 1) as u32) - &(&x * &z.pow((m - 3) as u32)).scale(&LaurentLambda::int(m - 2)),
    };
    let d = &e - &l;
    let j = [x.pow(2), &(&y * &d) + &(&l * &(&x * &z))];
    let i = [&(&y * &d) - &(&(&x * &z) * &e), x.pow(2)];
    (j, i)
}

fn swap_columns(p: &RatMatrix) -> RatMatrix {
    RatMatrix::from_rows(vec![vec![p.get(0, 1).clone(), p.get(0, 0).clone()], vec![p.get(1, 1).clone(), p.get(1, 0).clone()]])
}

#[derive(Clone, Debug)]
pub struct ArCheck {
    pub m: i64,
    /// Q₁Q₂ = Q₂Q₁ = (x³ + y² − xyz)·I.
    pub pair_ok: bool,
    /// J row against Q₁ gives (c·W, 0).
    pub j_row_ok: bool,
    /// I row against the swapped pair's first factor Q₂ gives (0, c·W) (checked with the target
    /// basis reordered).
    pub i_row_ok: bool,
    /// The I-pair is the J-pair with the factors exchanged.
    pub shift_ok: bool,
}

impl ArCheck {
    pub fn ok(&self) -> bool {
        self.pair_ok && self.j_row_ok && self.i_row_ok && self.shift_ok
    }
}

pub fn ar_check(m: i64, lambda: &Unit) -> Result<ArCheck> {
    let (q1, q2) = ar_pair(m, lambda)?;
    let w = potential(Convention::MinusXyz);
    let pair_ok = q1.mul(&q2)?.is_scalar_multiple_of_identity(&w) && q2.mul(&q1)?.is_scalar_multiple_of_identity(&w);
    let (jr, ir) = ar_rows(m, lambda);
    let j_row_ok = check_presentation(&jr, &q1, &w).0;
    // resolution of I_{m,1/λ}: ... → Q₁ → A² → Q₂ → A² → I
    let i_row_ok = check_presentation(&ir, &swap_columns(&q2), &w).0;
    // J = (Q₁, Q₂), I = (Q₂, Q₁): the I display is the shift of the J pair, and the shifted pair is
    // again a factorization
    let (s1, s2) = (q2.clone(), q1.clone());
    let shift_ok = s1.mul(&s2)?.is_scalar_multiple_of_identity(&w) && s2.mul(&s1)?.is_scalar_multiple_of_identity(&w);
    Ok(ArCheck { m, pair_ok, j_row_ok, i_row_ok, shift_ok })
}

#[derive(Clone, Debug)]
pub struct T32Check {
    pub m: i64,
    pub plus_ok: bool,
    pub minus_ok: bool,
    /// First convention under which P₁P₂ = P₂P₁ = W·I.
    pub convention: Option<Convention>,
    pub presentation_ok: bool,
    pub cofactor: Option<RatFunc>,
    pub cofactor_matches: bool,
    pub ar: Option<ArCheck>,
}

impl T32Check {
    pub fn ok(&self) -> bool {
        self.convention.is_some() && self.presentation_ok && self.cofactor_matches && self.ar.as_ref().map_or(true, |a| a.ok())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "plus_xyz": self.plus_ok,
            "minus_xyz": self.minus_ok,
            "convention": self.convention.map(|c| c.name()),
            "presentation_ok": self.presentation_ok,
            "cofactor": self.cofactor.as_ref().map(|c| c.to_string()),
            "cofactor_matches": self.cofactor_matches,
            "ar": self.ar.as_ref().map(|a| json!({
                "pair_ok": a.pair_ok, "j_row_ok": a.j_row_ok, "i_row_ok": a.i_row_ok, "shift_ok": a.shift_ok,
            })),
            "ok": self.ok(),
        })
    }
}

/// Cross-multiplied products under both conventions, the J-row identity against P₁ with its
/// cofactor, and (for m = 1) the swapped-pair check.
pub fn verify_t32(m: i64, lambda: &Unit) -> Result<T32Check> {
    let t = build_t32(m, lambda)?;
    let (p12, p21) = t.products()?;
    let holds = |c: Convention| {
        let w = potential(c);
        p12.is_scalar_multiple_of_identity(&w) && p21.is_scalar_multiple_of_identity(&w)
    };
    let plus_ok = holds(Convention::PlusXyz);
    let minus_ok = holds(Convention::MinusXyz);
    let convention = if plus_ok {
        Some(Convention::PlusXyz)
    } else if minus_ok {
        Some(Convention::MinusXyz)
    } else {
        None
    };
    let w = potential(convention.unwrap_or(Convention::PlusXyz));
    let (presentation_ok, cofactor) = check_presentation(&lemma_j_row(m, lambda), &t.p1, &w);
    let cofactor_matches = cofactor.as_ref().map_or(false, |c| *c == RatFunc::poly(lemma_j_cofactor(m, lambda)));
    let ar = if m == 1 { Some(ar_check(m, lambda)?) } else { None };
    Ok(T32Check { m, plus_ok, minus_ok, convention, presentation_ok, cofactor, cofactor_matches, ar })
}
