//! Exact arithmetic in Q[λ, λ⁻¹][x, y, z], rational-function pairs and dense matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

// integer coefficients dominate; skip the gcd normalization for them
fn mul_q(a: &Rat, b: &Rat) -> Rat {
    if a.is_integer() && b.is_integer() {
        Rat::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

fn add_assign_q(a: &mut Rat, b: Rat) {
    if a.is_integer() && b.is_integer() {
        *a = Rat::from_integer(a.numer() + b.numer());
    } else {
        *a += b;
    }
}

/// Element of Q[λ, λ⁻¹], keyed by λ-exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LaurentLambda {
    terms: BTreeMap<i64, Rat>,
}

impl LaurentLambda {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(rat(1), 0)
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(c, 0)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    /// λ^e
    pub fn lam(e: i64) -> Self {
        Self::monomial(rat(1), e)
    }

    pub fn monomial(c: Rat, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rat)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: i64, c: Rat) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&e) {
            Some(v) => {
                add_assign_q(v, c);
                v.is_zero()
            }
            None => {
                self.terms.insert(e, c);
                false
            }
        };
        if remove {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> &BTreeMap<i64, Rat> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Some((c, e)) if this is c·λ^e.
    pub fn as_monomial(&self) -> Option<(&Rat, i64)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((c, *e))
        } else {
            None
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Inverse in Q[λ, λ⁻¹]; only monomials are units.
    pub fn inverse(&self) -> Option<Self> {
        let (c, e) = self.as_monomial()?;
        Some(Self::monomial(c.recip(), -e))
    }

    pub fn pow(&self, k: i64) -> Option<Self> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        Some(acc)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    pub fn shift(&self, de: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, v)| (*e + de, v.clone())).collect() }
    }

    /// Substitute λ ↦ c·λ^k.
    pub fn substitute(&self, c: &Rat, k: i64) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            let f = pow_rat(c, *e);
            out.add_term(e * k, v * f);
        }
        out
    }

    pub fn eval(&self, value: &Rat) -> Option<Rat> {
        if value.is_zero() && self.min_exp().is_some_and(|e| e < 0) {
            return None;
        }
        Some(self.terms.iter().fold(Rat::zero(), |acc, (e, c)| acc + c * pow_rat(value, *e)))
    }

    /// Exact division in Q[λ, λ⁻¹].
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if let Some(inv) = d.inverse() {
            return Some(self * &inv);
        }
        let mut r = self.clone();
        let mut q = Self::zero();
        let (dmax, dlead) = d.terms.iter().next_back().map(|(e, c)| (*e, c.clone())).unwrap();
        let dmin = d.min_exp().unwrap();
        let floor = self.min_exp().unwrap_or(0) - dmin;
        while let Some((&e, c)) = r.terms.iter().next_back() {
            let qe = e - dmax;
            if qe < floor {
                return None;
            }
            let qc = c / &dlead;
            let t = Self::monomial(qc.clone(), qe);
            r = &r - &(&t * d);
            q.add_term(qe, qc);
        }
        Some(q)
    }

    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>, leading: bool, bare_one: bool) -> fmt::Result {
        if let Some((c, e)) = self.as_monomial() {
            let neg = c.is_negative();
            let a = c.abs();
            if neg {
                write!(f, "{}", if leading { "-" } else { " - " })?;
            } else if !leading {
                write!(f, " + ")?;
            }
            let show_c = !a.is_one() || (e == 0 && bare_one);
            if show_c {
                write!(f, "{}", a)?;
            }
            write_lambda(f, e)?;
            Ok(())
        } else {
            if !leading {
                write!(f, " + ")?;
            }
            write!(f, "({})", self)
        }
    }
}

fn write_lambda(f: &mut fmt::Formatter<'_>, e: i64) -> fmt::Result {
    match e {
        0 => Ok(()),
        1 => write!(f, "λ"),
        e if e > 0 => write!(f, "λ^{}", e),
        e => write!(f, "λ^{{{}}}", e),
    }
}

fn pow_rat(c: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(c.clone(), e as usize)
    } else {
        num_traits::pow(c.recip(), (-e) as usize)
    }
}

impl fmt::Display for LaurentLambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            LaurentLambda::monomial(c.clone(), *e).fmt_coeff(f, i == 0, true)?;
        }
        Ok(())
    }
}

impl Add for &LaurentLambda {
    type Output = LaurentLambda;
    fn add(self, o: &LaurentLambda) -> LaurentLambda {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentLambda {
    type Output = LaurentLambda;
    fn sub(self, o: &LaurentLambda) -> LaurentLambda {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentLambda {
    type Output = LaurentLambda;
    fn mul(self, o: &LaurentLambda) -> LaurentLambda {
        let mut out = LaurentLambda::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term(e1 + e2, mul_q(c1, c2));
            }
        }
        out
    }
}

impl Neg for &LaurentLambda {
    type Output = LaurentLambda;
    fn neg(self) -> LaurentLambda {
        LaurentLambda { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Var {
        match i % 3 {
            0 => Var::X,
            1 => Var::Y,
            _ => Var::Z,
        }
    }
}

pub type Exps = [u32; 3];

/// Sparse polynomial in x, y, z with coefficients in Q[λ, λ⁻¹].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Exps, LaurentLambda>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(LaurentLambda::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(LaurentLambda::int(n))
    }

    pub fn constant(c: LaurentLambda) -> Self {
        Self::term([0, 0, 0], c)
    }

    /// λ^e as a polynomial.
    pub fn lam(e: i64) -> Self {
        Self::constant(LaurentLambda::lam(e))
    }

    pub fn term(exps: Exps, c: LaurentLambda) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { terms }
    }

    pub fn mono(exps: Exps) -> Self {
        Self::term(exps, LaurentLambda::one())
    }

    pub fn var(v: Var, e: u32) -> Self {
        let mut exps = [0; 3];
        exps[v.index()] = e;
        Self::mono(exps)
    }

    pub fn x() -> Self {
        Self::var(Var::X, 1)
    }

    pub fn y() -> Self {
        Self::var(Var::Y, 1)
    }

    pub fn z() -> Self {
        Self::var(Var::Z, 1)
    }

    pub fn xyz() -> Self {
        Self::mono([1, 1, 1])
    }

    pub fn from_terms<I: IntoIterator<Item = (Exps, LaurentLambda)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (m, c) in it {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: Exps, c: LaurentLambda) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                v.is_zero()
            }
            None => {
                self.terms.insert(m, c);
                false
            }
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Exps, LaurentLambda> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&[0, 0, 0]).is_some_and(|c| c.is_one())
    }

    /// Number of (monomial, λ-power) pairs.
    pub fn size(&self) -> usize {
        self.terms.values().map(|c| c.len()).sum()
    }

    pub fn constant_term(&self) -> LaurentLambda {
        self.terms.get(&[0, 0, 0]).cloned().unwrap_or_default()
    }

    /// True if every monomial is 1, i.e. the polynomial lies in Q[λ, λ⁻¹].
    pub fn is_lambda_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == [0, 0, 0])
    }

    /// Some((exps, coefficient)) if there is exactly one monomial with a unit coefficient.
    pub fn as_monomial_unit(&self) -> Option<(Exps, LaurentLambda)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        c.as_monomial().map(|_| (*m, c.clone()))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m[0] + m[1] + m[2]).max()
    }

    pub fn scale(&self, c: &LaurentLambda) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, v)| (*m, v * c)))
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, v)| (*m, v.scale(c))))
    }

    pub fn mul_mono(&self, e: Exps) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| ([m[0] + e[0], m[1] + e[1], m[2] + e[2]], v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Drop every monomial of total degree above `deg`.
    pub fn truncate(&self, deg: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m[0] + m[1] + m[2] <= deg)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<F: Fn(&LaurentLambda) -> LaurentLambda>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Substitute λ ↦ c·λ^k.
    pub fn substitute_lambda(&self, c: &Rat, k: i64) -> Self {
        self.map_coeffs(|v| v.substitute(c, k))
    }

    /// Replace λ by a rational value.
    pub fn eval_lambda(&self, value: &Rat) -> Option<Self> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, LaurentLambda::constant(c.eval(value)?));
        }
        Some(out)
    }

    /// Replace z by -z.
    pub fn substitute_z_negate(&self) -> Self {
        self.map_terms(|m, c| if m[2] % 2 == 1 { -c } else { c.clone() })
    }

    fn map_terms<F: Fn(&Exps, &LaurentLambda) -> LaurentLambda>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, f(m, c))))
    }

    /// Remove monomials divisible by the given monomial (reduction modulo a monomial ideal).
    pub fn reduce_mod_monomial(&self, e: Exps) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !(m[0] >= e[0] && m[1] >= e[1] && m[2] >= e[2]))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Permute the variables: new variable index `perm[i]` takes the role of variable i.
    pub fn permute_vars(&self, perm: [usize; 3]) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| {
            let mut n = [0; 3];
            for i in 0..3 {
                n[perm[i]] = m[i];
            }
            (n, c.clone())
        }))
    }

    fn leading(&self) -> Option<(Exps, i64, Rat)> {
        let m = self.terms.keys().max_by_key(|m| (m[0] + m[1] + m[2], m[0], m[1], m[2]))?;
        let (e, c) = self.terms[m].terms().iter().next_back()?;
        Some((*m, *e, c.clone()))
    }

    /// Exact division; None when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.terms.len() == 1 {
            let (dm, dc) = d.terms.iter().next().unwrap();
            let mut out = Poly::zero();
            for (m, c) in &self.terms {
                if m[0] < dm[0] || m[1] < dm[1] || m[2] < dm[2] {
                    return None;
                }
                let q = c.exact_div(dc)?;
                out.terms.insert([m[0] - dm[0], m[1] - dm[1], m[2] - dm[2]], q);
            }
            return Some(out);
        }
        let (dm, de, dc) = d.leading().unwrap();
        let dmin = d.terms.values().filter_map(|c| c.min_exp()).min().unwrap();
        let floor = self.terms.values().filter_map(|c| c.min_exp()).min().unwrap() - dmin;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((m, e, c)) = r.leading() {
            if m[0] < dm[0] || m[1] < dm[1] || m[2] < dm[2] {
                return None;
            }
            let qe = e - de;
            if qe < floor {
                return None;
            }
            let qm = [m[0] - dm[0], m[1] - dm[1], m[2] - dm[2]];
            let t = Poly::term(qm, LaurentLambda::monomial(c / &dc, qe));
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    /// Inverse modulo monomials of total degree above `degree_bound`.
    pub fn truncated_inverse(&self, degree_bound: u32) -> Result<Poly> {
        let c0 = self.constant_term();
        let c0inv = c0
            .inverse()
            .ok_or_else(|| Error::NotAUnit(format!("constant term of {} is not a unit", self)))?;
        // p = c0 (1 - h), p^{-1} = c0^{-1} Σ h^k
        let h = (&Poly::one() - &self.scale(&c0inv)).truncate(degree_bound);
        let mut q = Poly::one();
        let mut hk = Poly::one();
        for _ in 0..degree_bound {
            hk = (&hk * &h).truncate(degree_bound);
            if hk.is_zero() {
                break;
            }
            q = &q + &hk;
        }
        Ok(q.scale(&c0inv))
    }

    pub fn to_json(&self) -> Value {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            for (e, r) in c.terms() {
                out.push(serde_json::json!({
                    "x": m[0], "y": m[1], "z": m[2], "lam": e,
                    "num": bigint_json(r.numer()), "den": bigint_json(r.denom()),
                }));
            }
        }
        Value::Array(out)
    }

    pub fn from_json(v: &Value) -> Result<Poly> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("poly must be a list of terms".into()))?;
        let mut out = Poly::zero();
        for t in arr {
            let get = |k: &str| -> Result<i64> {
                t.get(k)
                    .and_then(|x| x.as_i64())
                    .ok_or_else(|| Error::Parse(format!("term field {} missing or not an integer", k)))
            };
            let exp = |k: &str| -> Result<u32> {
                u32::try_from(get(k)?).map_err(|_| Error::Parse(format!("negative exponent in {}", k)))
            };
            let num = bigint_from_json(t.get("num"))?;
            let den = bigint_from_json(t.get("den"))?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            let c = LaurentLambda::monomial(Rat::new(num, den), get("lam")?);
            out.add_term([exp("x")?, exp("y")?, exp("z")?], c);
        }
        Ok(out)
    }

    fn display_order(&self) -> Vec<(&Exps, &LaurentLambda)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|(m, _)| (m[0] + m[1] + m[2], std::cmp::Reverse(**m)));
        v
    }
}

fn bigint_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

fn bigint_from_json(v: Option<&Value>) -> Result<BigInt> {
    match v {
        Some(Value::Number(n)) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse("coefficient is not an integer".into())),
        Some(Value::String(s)) => s.parse().map_err(|_| Error::Parse(format!("bad integer {}", s))),
        _ => Err(Error::Parse("missing num/den".into())),
    }
}

fn write_mono(f: &mut fmt::Formatter<'_>, m: &Exps) -> fmt::Result {
    for (i, name) in ["x", "y", "z"].iter().enumerate() {
        match m[i] {
            0 => {}
            1 => write!(f, "{}", name)?,
            e => write!(f, "{}^{}", name, e)?,
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.display_order().into_iter().enumerate() {
            let is_const = *m == [0, 0, 0];
            if is_const && c.as_monomial().is_none() {
                for (k, (e, r)) in c.terms().iter().enumerate() {
                    LaurentLambda::monomial(r.clone(), *e).fmt_coeff(f, i == 0 && k == 0, true)?;
                }
                continue;
            }
            c.fmt_coeff(f, i == 0, is_const)?;
            write_mono(f, m)?;
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term([m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]], c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(Poly);
owned_ops!(LaurentLambda);

/// var^exp, or zero when exp < 0.
pub fn monomial_guarded(var: Var, exp: i64) -> Poly {
    if exp < 0 {
        Poly::zero()
    } else {
        Poly::var(var, exp as u32)
    }
}

/// Fraction num/den; equality by cross multiplication.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::NotAUnit("zero denominator".into()));
        }
        Ok(Self { num, den })
    }

    pub fn poly(p: Poly) -> Self {
        Self { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        Self::poly(Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc { num: &self.num + &o.num, den: self.den.clone() };
        }
        RatFunc { num: &(&self.num * &o.den) + &(&o.num * &self.den), den: &self.den * &o.den }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc { num: &self.num * &o.num, den: &self.den * &o.den }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, p: &Poly) -> RatFunc {
        RatFunc { num: &self.num * p, den: self.den.clone() }
    }

    /// Some(p) if den divides num exactly.
    pub fn as_poly(&self) -> Option<Poly> {
        self.num.exact_div(&self.den)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> RatFunc {
        RatFunc { num: f(&self.num), den: f(&self.den) }
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &RatFunc) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Dense row-major matrix of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Value>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Poly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &Poly::one())
    }

    pub fn scalar(n: usize, p: &Poly) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, p.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Self { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Poly> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn scale(&self, p: &Poly) -> Self {
        self.map(|e| e * p)
    }

    pub fn mul(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.entries[idx] = &out.entries[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        self.add(&o.map(|e| -e))
    }

    /// Matrix with row `r` and column `c` removed.
    pub fn minor_matrix(&self, r: usize, c: usize) -> Self {
        self.select(
            &(0..self.rows).filter(|&i| i != r).collect::<Vec<_>>(),
            &(0..self.cols).filter(|&j| j != c).collect::<Vec<_>>(),
        )
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare(self.rows, self.cols))
        }
    }

    pub fn det(&self) -> Result<Poly> {
        self.require_square()?;
        if self.rows < 5 {
            Ok(self.det_cofactor())
        } else {
            Ok(self.det_bareiss())
        }
    }

    /// Laplace expansion along the first row.
    pub fn det_cofactor(&self) -> Poly {
        let n = self.rows;
        match n {
            0 => Poly::one(),
            1 => self.get(0, 0).clone(),
            2 => &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)),
            _ => {
                let mut acc = Poly::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let t = a * &self.minor_matrix(0, j).det_cofactor();
                    acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
                }
                acc
            }
        }
    }

    /// Fraction-free Gaussian elimination.
    pub fn det_bareiss(&self) -> Poly {
        let n = self.rows;
        if n == 0 {
            return Poly::one();
        }
        let mut a: Vec<Vec<Poly>> = (0..n).map(|i| self.row(i)).collect();
        let mut negate = false;
        let mut prev = Poly::one();
        for k in 0..n - 1 {
            let Some(p) = pick_pivot(&a, k, k..n) else {
                return Poly::zero();
            };
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = fraction_free_update(&a[k][k], &a[i][j], &a[i][k], &a[k][j], &prev);
                    a[i][j] = t;
                }
                a[i][k] = Poly::zero();
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        if negate {
            -&d
        } else {
            d
        }
    }

    pub fn adjugate(&self) -> Result<PolyMatrix> {
        self.require_square()?;
        let n = self.rows;
        if n < 5 {
            return Ok(self.adjugate_cofactor());
        }
        Ok(self.adjugate_gauss_jordan().unwrap_or_else(|| self.adjugate_cofactor()))
    }

    pub fn adjugate_cofactor(&self) -> PolyMatrix {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        if n == 1 {
            out.set(0, 0, Poly::one());
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let m = self.minor_matrix(j, i);
                let d = if m.rows < 5 { m.det_cofactor() } else { m.det_bareiss() };
                out.set(i, j, if (i + j) % 2 == 0 { d } else { -&d });
            }
        }
        out
    }

    /// Fraction-free Gauss-Jordan on [M | I]; None when M is singular.
    fn adjugate_gauss_jordan(&self) -> Option<PolyMatrix> {
        let n = self.rows;
        let mut a: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                let mut r = self.row(i);
                r.extend((0..n).map(|j| if i == j { Poly::one() } else { Poly::zero() }));
                r
            })
            .collect();
        let mut negate = false;
        let mut prev = Poly::one();
        for k in 0..n {
            let p = pick_pivot(&a, k, k..n)?;
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            let (pivot_row, akk) = (a[k].clone(), a[k][k].clone());
            for (i, row) in a.iter_mut().enumerate() {
                if i == k {
                    continue;
                }
                let aik = row[k].clone();
                for j in 0..2 * n {
                    if j == k {
                        continue;
                    }
                    row[j] = fraction_free_update(&akk, &row[j], &aik, &pivot_row[j], &prev);
                }
                row[k] = Poly::zero();
            }
            prev = akk;
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = a[i][n + j].clone();
                out.set(i, j, if negate { -&v } else { v });
            }
        }
        Some(out)
    }

    /// Entrywise equality after multiplying both sides through (used for scaled identities).
    pub fn is_scalar_multiple_of_identity(&self, p: &Poly) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e == p
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn substitute_z_negate(&self) -> Self {
        self.map(|p| p.substitute_z_negate())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|p| p.to_json()).collect(),
        })
        .expect("matrix json")
    }

    pub fn from_json(v: &Value) -> Result<PolyMatrix> {
        let m: MatrixJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if m.entries.len() != m.rows * m.cols || m.rows == 0 || m.cols == 0 {
            return Err(Error::Parse(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                m.rows * m.cols,
                m.rows,
                m.cols,
                m.entries.len()
            )));
        }
        let entries = m.entries.iter().map(Poly::from_json).collect::<Result<Vec<_>>>()?;
        Ok(PolyMatrix { rows: m.rows, cols: m.cols, entries })
    }

    /// Aligned text grid.
    pub fn pretty(&self) -> String {
        let cells: Vec<String> = self.entries.iter().map(|p| p.to_string()).collect();
        let widths: Vec<usize> = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| cells[i * self.cols + j].chars().count()).max().unwrap_or(1))
            .collect();
        let mut s = String::new();
        for i in 0..self.rows {
            s.push('[');
            for j in 0..self.cols {
                let c = &cells[i * self.cols + j];
                if j > 0 {
                    s.push_str("  ");
                }
                s.push_str(&" ".repeat(widths[j] - c.chars().count()));
                s.push_str(c);
            }
            s.push_str("]\n");
        }
        s
    }
}

fn pick_pivot(a: &[Vec<Poly>], col: usize, rows: std::ops::Range<usize>) -> Option<usize> {
    rows.filter(|&i| !a[i][col].is_zero()).min_by_key(|&i| (a[i][col].size(), i))
}

fn fraction_free_update(akk: &Poly, aij: &Poly, aik: &Poly, akj: &Poly, prev: &Poly) -> Poly {
    let left = if aij.is_zero() { Poly::zero() } else { akk * aij };
    let right = if aik.is_zero() || akj.is_zero() { Poly::zero() } else { aik * akj };
    let num = &left - &right;
    if prev.is_one() {
        return num;
    }
    num.exact_div(prev).expect("fraction-free elimination: inexact division")
}

/// Dense matrix of rational functions.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<RatFunc>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<RatFunc>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        Self { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_poly(m: &PolyMatrix) -> Self {
        Self { rows: m.rows, cols: m.cols, entries: m.entries.iter().cloned().map(RatFunc::poly).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFunc {
        &self.entries[i * self.cols + j]
    }

    pub fn mul(&self, o: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch("rational matrix product".into()));
        }
        let mut entries = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = RatFunc::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                entries.push(acc);
            }
        }
        Ok(RatMatrix { rows: self.rows, cols: o.cols, entries })
    }

    pub fn map(&self, f: impl Fn(&RatFunc) -> RatFunc) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    /// True iff the matrix equals p·I under cross-multiplied equality.
    pub fn is_scalar_multiple_of_identity(&self, p: &Poly) -> bool {
        let target = RatFunc::poly(p.clone());
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { *self.get(i, j) == target } else { self.get(i, j).is_zero() })
            })
    }

    pub fn pretty(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&format!("[{}]\n", row.join(",  ")));
        }
        s
    }
}
