//! Exact scalar arithmetic in the field Q(q, s), where t = s^2.
//!
//! Every coefficient in this crate is a [`QTScalar`]: a reduced fraction of
//! integer polynomials in the two formal variables q and s. The variable s is
//! an internal square root of t; all public formulas are stated in q and t,
//! and the printer rewrites even s-powers as t-powers so odd s-powers only
//! appear when a genuine half-integer power of t survives.
//!
//! Canonical form: numerator and denominator are coprime (integer content and
//! polynomial gcd both removed) and the denominator's leading coefficient is
//! positive under the (q-degree, then s-degree) lexicographic term order.
//! Equality of canonical forms is structural equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Error;

/// Which substitution to apply to a scalar or expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Specialization {
    /// Substitute q = 0.
    Q0,
    /// Substitute t = 0 (equivalently s = 0).
    T0,
    /// Substitute q = 0 and t = 0.
    Q0T0,
}

impl Specialization {
    /// Parse the CLI spelling of a specialization mode.
    pub fn parse_mode(s: &str) -> Result<Self, Error> {
        match s {
            "q0" => Ok(Specialization::Q0),
            "t0" => Ok(Specialization::T0),
            "q0t0" => Ok(Specialization::Q0T0),
            other => Err(Error::Parse(format!(
                "unknown specialization mode '{other}' (expected q0, t0, or q0t0)"
            ))),
        }
    }

    fn kills_q(self) -> bool {
        matches!(self, Specialization::Q0 | Specialization::Q0T0)
    }

    fn kills_s(self) -> bool {
        matches!(self, Specialization::T0 | Specialization::Q0T0)
    }
}

impl fmt::Display for Specialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Specialization::Q0 => write!(f, "q0"),
            Specialization::T0 => write!(f, "t0"),
            Specialization::Q0T0 => write!(f, "q0t0"),
        }
    }
}

/// An integer polynomial in q and s with nonnegative exponents.
///
/// Terms are stored sparsely as `(q_exp, s_exp) -> coefficient` with all
/// coefficients nonzero; the BTreeMap key order is exactly the
/// (q-degree, then s-degree) lexicographic term order used for leading terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, 0), c);
        }
        IntPoly { terms }
    }

    /// The monomial c * q^qe * s^se.
    pub fn monomial(c: BigInt, qe: u32, se: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((qe, se), c);
        }
        IntPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)).is_some_and(|c| c.is_one())
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Leading (maximal) term under the (q, s)-lexicographic order.
    pub fn leading(&self) -> Option<(&(u32, u32), &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Lowest term under the (q, s)-lexicographic order; this is the term
    /// whose sign is normalized positive in canonical fractions, so that
    /// weight denominators keep their natural 1 - q^a t^b orientation.
    pub fn lowest(&self) -> Option<(&(u32, u32), &BigInt)> {
        self.terms.iter().next()
    }

    fn insert_add(&mut self, key: (u32, u32), c: &BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert_add(*k, c);
        }
        out
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = IntPoly::zero();
        for ((qa, sa), ca) in &self.terms {
            for ((qb, sb), cb) in &other.terms {
                out.insert_add((qa + qb, sa + sb), &(ca * cb));
            }
        }
        out
    }

    /// Substitute q = 0 and/or s = 0, dropping the killed terms.
    pub fn specialize(&self, mode: Specialization) -> IntPoly {
        let terms = self
            .terms
            .iter()
            .filter(|((qe, se), _)| {
                !(mode.kills_q() && *qe > 0) && !(mode.kills_s() && *se > 0)
            })
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        IntPoly { terms }
    }

    /// Greatest common divisor in Z[q, s], sign-normalized to a positive
    /// leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.sign_normalized();
        }
        if other.is_zero() {
            return self.sign_normalized();
        }
        let a = dense::from_map(&self.terms);
        let b = dense::from_map(&other.terms);
        let g = dense::qs_gcd(&a, &b);
        IntPoly { terms: dense::to_map(&g) }
    }

    /// Exact division; panics if `other` does not divide `self`.
    ///
    /// Only called with divisors produced by [`IntPoly::gcd`], so a failure
    /// here signals an internal arithmetic bug, not bad user input.
    pub fn div_exact(&self, other: &IntPoly) -> IntPoly {
        assert!(!other.is_zero(), "exact division by the zero polynomial");
        if self.is_zero() {
            return IntPoly::zero();
        }
        let a = dense::from_map(&self.terms);
        let b = dense::from_map(&other.terms);
        let q = dense::qs_div_exact(&a, &b)
            .expect("divisor does not exactly divide dividend in Z[q,s]");
        IntPoly { terms: dense::to_map(&q) }
    }

    fn sign_normalized(&self) -> IntPoly {
        if self.leading().is_some_and(|(_, c)| c.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Render in the scalar text grammar, terms in ascending order.
    fn format_terms(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, ((qe, se), c)) in self.terms.iter().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            let te = se / 2;
            let s_odd = se % 2 == 1;
            if *qe == 1 {
                factors.push("q".to_string());
            } else if *qe > 1 {
                factors.push(format!("q^{qe}"));
            }
            if te == 1 {
                factors.push("t".to_string());
            } else if te > 1 {
                factors.push(format!("t^{te}"));
            }
            if s_odd {
                factors.push("s".to_string());
            }
            let abs = c.abs();
            let coeff_part = if abs.is_one() && !factors.is_empty() {
                None
            } else {
                Some(abs.to_string())
            };
            let body = match coeff_part {
                Some(cs) if factors.is_empty() => cs,
                Some(cs) => format!("{cs}*{}", factors.join("*")),
                None => factors.join("*"),
            };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push('-');
            } else {
                out.push('+');
            }
            out.push_str(&body);
        }
        out
    }
}

/// A scalar in Q(q, s): a canonical reduced fraction of [`IntPoly`]s.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QTScalar {
    num: IntPoly,
    den: IntPoly,
}

impl QTScalar {
    pub fn zero() -> Self {
        QTScalar { num: IntPoly::zero(), den: IntPoly::one() }
    }

    pub fn one() -> Self {
        QTScalar { num: IntPoly::one(), den: IntPoly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        QTScalar { num: IntPoly::constant(BigInt::from(n)), den: IntPoly::one() }
    }

    /// q^k for any integer k.
    pub fn q_pow(k: i64) -> Self {
        Self::monomial_pow(k, false)
    }

    /// t^k = s^(2k) for any integer k.
    pub fn t_pow(k: i64) -> Self {
        Self::s_pow(2 * k)
    }

    /// s^k for any integer k; s^2 = t.
    pub fn s_pow(k: i64) -> Self {
        Self::monomial_pow(k, true)
    }

    fn monomial_pow(k: i64, is_s: bool) -> Self {
        let e = k.unsigned_abs() as u32;
        let (qe, se) = if is_s { (0, e) } else { (e, 0) };
        let m = IntPoly::monomial(BigInt::one(), qe, se);
        if k >= 0 {
            QTScalar { num: m, den: IntPoly::one() }
        } else {
            QTScalar { num: IntPoly::one(), den: m }
        }
    }

    /// 1 - q^a t^b for nonnegative a, b (a convenience for weight factors).
    pub fn one_minus_q_t(a: i64, b: i64) -> Self {
        QTScalar::one() - QTScalar::q_pow(a) * QTScalar::t_pow(b)
    }

    /// Build a fraction from raw parts and canonicalize.
    pub fn from_parts(num: IntPoly, den: IntPoly) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: IntPoly, den: IntPoly) -> Self {
        if num.is_zero() {
            return QTScalar::zero();
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g);
        let mut den = den.div_exact(&g);
        if den.lowest().is_some_and(|(_, c)| c.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        QTScalar { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn numerator(&self) -> &IntPoly {
        &self.num
    }

    pub fn denominator(&self) -> &IntPoly {
        &self.den
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inverse(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }

    /// Substitute q = 0 and/or t = 0.
    ///
    /// Errors if the substitution kills the denominator, which means the
    /// scalar has a pole at the specialization point.
    pub fn specialize(&self, mode: Specialization) -> Result<Self, Error> {
        let den = self.den.specialize(mode);
        if den.is_zero() {
            return Err(Error::VanishingDenominator(format!(
                "denominator {} vanishes at {}",
                self.den.format_terms(),
                mode
            )));
        }
        Ok(Self::reduced(self.num.specialize(mode), den))
    }
}

impl Add for &QTScalar {
    type Output = QTScalar;
    fn add(self, other: &QTScalar) -> QTScalar {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        QTScalar::reduced(num, self.den.mul(&other.den))
    }
}

impl Sub for &QTScalar {
    type Output = QTScalar;
    fn sub(self, other: &QTScalar) -> QTScalar {
        let num = self.num.mul(&other.den).sub(&other.num.mul(&self.den));
        QTScalar::reduced(num, self.den.mul(&other.den))
    }
}

impl Mul for &QTScalar {
    type Output = QTScalar;
    fn mul(self, other: &QTScalar) -> QTScalar {
        QTScalar::reduced(self.num.mul(&other.num), self.den.mul(&other.den))
    }
}

impl Div for &QTScalar {
    type Output = QTScalar;
    fn div(self, other: &QTScalar) -> QTScalar {
        assert!(!other.is_zero(), "scalar division by zero");
        QTScalar::reduced(self.num.mul(&other.den), self.den.mul(&other.num))
    }
}

impl Neg for &QTScalar {
    type Output = QTScalar;
    fn neg(self) -> QTScalar {
        QTScalar { num: self.num.neg(), den: self.den.clone() }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for QTScalar {
            type Output = QTScalar;
            fn $method(self, other: QTScalar) -> QTScalar {
                (&self).$method(&other)
            }
        }
        impl $trait<&QTScalar> for QTScalar {
            type Output = QTScalar;
            fn $method(self, other: &QTScalar) -> QTScalar {
                (&self).$method(other)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl Neg for QTScalar {
    type Output = QTScalar;
    fn neg(self) -> QTScalar {
        -&self
    }
}

impl AddAssign<&QTScalar> for QTScalar {
    fn add_assign(&mut self, other: &QTScalar) {
        *self = &*self + other;
    }
}

impl SubAssign<&QTScalar> for QTScalar {
    fn sub_assign(&mut self, other: &QTScalar) {
        *self = &*self - other;
    }
}

impl MulAssign<&QTScalar> for QTScalar {
    fn mul_assign(&mut self, other: &QTScalar) {
        *self = &*self * other;
    }
}

impl fmt::Display for QTScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num.format_terms();
        if self.den.is_one() {
            return write!(f, "{num}");
        }
        let num = if self.num.term_count() > 1 { format!("({num})") } else { num };
        let den = self.den.format_terms();
        let den = if den.contains(['*', '+', '-']) { format!("({den})") } else { den };
        write!(f, "{num}/{den}")
    }
}

impl FromStr for QTScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut p = Parser { input: s.as_bytes(), pos: 0 };
        let value = p.parse_expr()?;
        p.skip_ws();
        if p.pos != p.input.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input at byte {} in scalar '{s}'",
                p.pos
            )));
        }
        Ok(value)
    }
}

/// Recursive-descent parser for the scalar text grammar:
/// integers, q, t, s, + - * / ^, and parentheses.
struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn parse_expr(&mut self) -> Result<QTScalar, Error> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.parse_term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.parse_term()?
            }
            _ => self.parse_term()?,
        };
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc += &self.parse_term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc -= &self.parse_term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<QTScalar, Error> {
        let mut acc = self.parse_factor()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    acc *= &self.parse_factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    let rhs = self.parse_factor()?;
                    if rhs.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    acc = acc / rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<QTScalar, Error> {
        let negate = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            _ => false,
        };
        let mut base = self.parse_atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.parse_int_literal()?;
            let exp: i64 = exp.try_into().map_err(|_| {
                Error::Parse("exponent does not fit in a machine integer".to_string())
            })?;
            base = pow_scalar(&base, exp)?;
        }
        Ok(if negate { -base } else { base })
    }

    fn parse_atom(&mut self) -> Result<QTScalar, Error> {
        match self.peek() {
            Some(b'q') => {
                self.pos += 1;
                Ok(QTScalar::q_pow(1))
            }
            Some(b't') => {
                self.pos += 1;
                Ok(QTScalar::t_pow(1))
            }
            Some(b's') => {
                self.pos += 1;
                Ok(QTScalar::s_pow(1))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("expected ')' in scalar".to_string()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.parse_int_literal()?;
                Ok(QTScalar { num: IntPoly::constant(n), den: IntPoly::one() })
            }
            other => Err(Error::Parse(format!(
                "unexpected {} in scalar",
                other.map_or("end of input".to_string(), |c| format!("byte '{}'", c as char))
            ))),
        }
    }

    fn parse_int_literal(&mut self) -> Result<BigInt, Error> {
        self.skip_ws();
        let negate = if self.input.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Parse("expected an integer literal".to_string()));
        }
        let digits = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        let n: BigInt = digits.parse().unwrap();
        Ok(if negate { -n } else { n })
    }
}

/// Integer power of a scalar; negative exponents invert (erroring on zero).
pub fn pow_scalar(base: &QTScalar, exp: i64) -> Result<QTScalar, Error> {
    let positive = if exp >= 0 { base.clone() } else { base.inverse()? };
    let mut acc = QTScalar::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= &positive;
    }
    Ok(acc)
}

/// Dense bivariate polynomial arithmetic used only for gcd and exact division.
///
/// A polynomial in Z[s][q] is a Vec over q-degrees of univariate Z[s]
/// coefficients (each a Vec over s-degrees); trailing zeros are trimmed.
mod dense {
    use super::*;

    pub type ZPoly = Vec<BigInt>;
    pub type QsPoly = Vec<ZPoly>;

    pub fn from_map(terms: &BTreeMap<(u32, u32), BigInt>) -> QsPoly {
        let qdeg = terms.keys().map(|(qe, _)| *qe).max().unwrap_or(0) as usize;
        let mut out: QsPoly = vec![Vec::new(); qdeg + 1];
        for ((qe, se), c) in terms {
            let row = &mut out[*qe as usize];
            if row.len() <= *se as usize {
                row.resize(*se as usize + 1, BigInt::zero());
            }
            row[*se as usize] = c.clone();
        }
        trim_qs(&mut out);
        out
    }

    pub fn to_map(p: &QsPoly) -> BTreeMap<(u32, u32), BigInt> {
        let mut out = BTreeMap::new();
        for (qe, row) in p.iter().enumerate() {
            for (se, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.insert((qe as u32, se as u32), c.clone());
                }
            }
        }
        out
    }

    fn trim_z(p: &mut ZPoly) {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
    }

    fn trim_qs(p: &mut QsPoly) {
        for row in p.iter_mut() {
            trim_z(row);
        }
        while p.last().is_some_and(|row| row.is_empty()) {
            p.pop();
        }
    }

    fn z_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                if !cb.is_zero() {
                    out[i + j] += ca * cb;
                }
            }
        }
        let mut out = out;
        trim_z(&mut out);
        out
    }

    fn z_sub(a: &ZPoly, b: &ZPoly) -> ZPoly {
        let mut out = a.clone();
        if out.len() < b.len() {
            out.resize(b.len(), BigInt::zero());
        }
        for (i, cb) in b.iter().enumerate() {
            out[i] -= cb;
        }
        trim_z(&mut out);
        out
    }

    fn z_scale(a: &ZPoly, c: &BigInt) -> ZPoly {
        if c.is_zero() {
            return Vec::new();
        }
        a.iter().map(|x| x * c).collect()
    }

    /// Exact division in Z[s]; None when not exact.
    pub fn z_div_exact(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
        assert!(!b.is_empty(), "z_div_exact by zero");
        if a.is_empty() {
            return Some(Vec::new());
        }
        if a.len() < b.len() {
            return None;
        }
        let mut rem = a.clone();
        let mut quot = vec![BigInt::zero(); a.len() - b.len() + 1];
        let lead_b = &b[b.len() - 1];
        while rem.len() >= b.len() {
            let lead_r = &rem[rem.len() - 1];
            let (q, r) = lead_r.div_rem(lead_b);
            if !r.is_zero() {
                return None;
            }
            let shift = rem.len() - b.len();
            quot[shift] = q.clone();
            for (i, cb) in b.iter().enumerate() {
                rem[shift + i] -= &q * cb;
            }
            trim_z(&mut rem);
            if rem.is_empty() {
                break;
            }
        }
        if rem.is_empty() {
            Some(quot)
        } else {
            None
        }
    }

    fn z_int_content(a: &ZPoly) -> BigInt {
        let mut g = BigInt::zero();
        for c in a {
            g = g.gcd(c);
        }
        g
    }

    /// Gcd in Z[s] including integer content, leading coefficient positive.
    pub fn z_gcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
        if a.is_empty() {
            return sign_norm_z(b.clone());
        }
        if b.is_empty() {
            return sign_norm_z(a.clone());
        }
        let ca = z_int_content(a);
        let cb = z_int_content(b);
        let cg = ca.gcd(&cb);
        let mut f = z_scale(a, &(BigInt::one()));
        let mut g = z_scale(b, &(BigInt::one()));
        f = f.iter().map(|c| c / &ca).collect();
        g = g.iter().map(|c| c / &cb).collect();
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        // Primitive PRS in Z[s].
        while !g.is_empty() {
            let r = z_pseudo_rem(&f, &g);
            f = g;
            g = primitive_z(r);
        }
        sign_norm_z(z_scale(&primitive_z(f), &cg))
    }

    fn primitive_z(mut a: ZPoly) -> ZPoly {
        trim_z(&mut a);
        if a.is_empty() {
            return a;
        }
        let c = z_int_content(&a);
        a.iter().map(|x| x / &c).collect()
    }

    fn sign_norm_z(mut a: ZPoly) -> ZPoly {
        trim_z(&mut a);
        if a.last().is_some_and(|c| c.is_negative()) {
            a = a.iter().map(|c| -c).collect();
        }
        a
    }

    /// Pseudo-remainder of f by g in Z[s]: lc(g)^(deg f - deg g + 1) * f mod g.
    fn z_pseudo_rem(f: &ZPoly, g: &ZPoly) -> ZPoly {
        let mut rem = f.clone();
        let lead_g = g[g.len() - 1].clone();
        while rem.len() >= g.len() {
            let lead_r = rem[rem.len() - 1].clone();
            let shift = rem.len() - g.len();
            rem = z_scale(&rem, &lead_g);
            for (i, cg) in g.iter().enumerate() {
                rem[shift + i] -= &lead_r * cg;
            }
            trim_z(&mut rem);
            if rem.is_empty() {
                break;
            }
        }
        rem
    }

    fn qs_lead(p: &QsPoly) -> &ZPoly {
        &p[p.len() - 1]
    }

    /// Content of a Z[s][q] polynomial: the Z[s]-gcd of its q-coefficients.
    fn qs_content(p: &QsPoly) -> ZPoly {
        let mut acc: ZPoly = Vec::new();
        for row in p {
            acc = z_gcd(&acc, row);
            if acc.len() == 1 && acc[0].is_one() {
                break;
            }
        }
        acc
    }

    fn qs_primitive(p: &QsPoly, content: &ZPoly) -> QsPoly {
        p.iter()
            .map(|row| {
                if row.is_empty() {
                    Vec::new()
                } else {
                    z_div_exact(row, content).expect("content must divide every coefficient")
                }
            })
            .collect()
    }

    fn qs_scale(p: &QsPoly, c: &ZPoly) -> QsPoly {
        p.iter().map(|row| z_mul(row, c)).collect()
    }

    /// Pseudo-remainder of f by g in the variable q over Z[s].
    fn qs_pseudo_rem(f: &QsPoly, g: &QsPoly) -> QsPoly {
        let mut rem = f.clone();
        let lead_g = qs_lead(g).clone();
        while rem.len() >= g.len() {
            let lead_r = qs_lead(&rem).clone();
            let shift = rem.len() - g.len();
            rem = qs_scale(&rem, &lead_g);
            for (i, cg) in g.iter().enumerate() {
                rem[shift + i] = z_sub(&rem[shift + i], &z_mul(&lead_r, cg));
            }
            trim_qs(&mut rem);
            if rem.is_empty() {
                break;
            }
        }
        rem
    }

    /// Gcd in Z[q, s] via a primitive PRS in q over Z[s].
    pub fn qs_gcd(a: &QsPoly, b: &QsPoly) -> QsPoly {
        if a.is_empty() {
            return sign_norm_qs(b.clone());
        }
        if b.is_empty() {
            return sign_norm_qs(a.clone());
        }
        let ca = qs_content(a);
        let cb = qs_content(b);
        let cg = z_gcd(&ca, &cb);
        let mut f = qs_primitive(a, &ca);
        let mut g = qs_primitive(b, &cb);
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        while !g.is_empty() {
            let r = qs_pseudo_rem(&f, &g);
            f = g;
            g = if r.is_empty() {
                Vec::new()
            } else {
                let c = qs_content(&r);
                qs_primitive(&r, &c)
            };
        }
        let cf = qs_content(&f);
        let prim = qs_primitive(&f, &cf);
        sign_norm_qs(qs_scale(&prim, &cg))
    }

    fn sign_norm_qs(mut p: QsPoly) -> QsPoly {
        trim_qs(&mut p);
        let negative = p
            .last()
            .and_then(|row| row.last())
            .is_some_and(|c| c.is_negative());
        if negative {
            for row in p.iter_mut() {
                for c in row.iter_mut() {
                    *c = -&*c;
                }
            }
        }
        p
    }

    /// Exact division in Z[s][q]; None when not exact.
    pub fn qs_div_exact(a: &QsPoly, b: &QsPoly) -> Option<QsPoly> {
        assert!(!b.is_empty(), "qs_div_exact by zero");
        if a.is_empty() {
            return Some(Vec::new());
        }
        if a.len() < b.len() {
            return None;
        }
        let mut rem = a.clone();
        let mut quot: QsPoly = vec![Vec::new(); a.len() - b.len() + 1];
        let lead_b = qs_lead(b).clone();
        while rem.len() >= b.len() {
            let lead_r = qs_lead(&rem).clone();
            let q = z_div_exact(&lead_r, &lead_b)?;
            let shift = rem.len() - b.len();
            quot[shift] = q.clone();
            for (i, cb) in b.iter().enumerate() {
                rem[shift + i] = z_sub(&rem[shift + i], &z_mul(&q, cb));
            }
            trim_qs(&mut rem);
            if rem.is_empty() {
                break;
            }
        }
        if rem.is_empty() {
            Some(quot)
        } else {
            None
        }
    }
}

/// Deterministic total order on scalars for stable output (compares the
/// canonical numerator/denominator term maps lexicographically).
impl PartialOrd for QTScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QTScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |p: &IntPoly| p.terms.iter().map(|(k, c)| (*k, c.clone())).collect::<Vec<_>>();
        key(&self.num)
            .cmp(&key(&other.num))
            .then_with(|| key(&self.den).cmp(&key(&other.den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(text: &str) -> QTScalar {
        text.parse().expect("test scalar must parse")
    }

    #[test]
    fn constants_and_equality() {
        assert!(QTScalar::zero().is_zero());
        assert!(QTScalar::one().is_one());
        assert_eq!(QTScalar::from_int(3), sc("3"));
        assert_eq!(QTScalar::from_int(-2), sc("-2"));
        assert_eq!(QTScalar::t_pow(1), sc("s^2"));
        assert_eq!(QTScalar::s_pow(2), sc("t"));
    }

    #[test]
    fn reduction_to_canonical_form() {
        // (1 - t^2)/(1 - t) reduces to 1 + t.
        let x = sc("(1-t^2)/(1-t)");
        assert_eq!(x, sc("1+t"));
        // (q^2 - q t)/(q) reduces to q - t.
        assert_eq!(sc("(q^2 - q*t)/q"), sc("q - t"));
        // Denominator sign is normalized: 1/(t-1) = -1/(1-t).
        let a = sc("1/(t-1)");
        let b = -sc("1/(1-t)");
        assert_eq!(a, b);
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn field_ops_small_examples() {
        let a = sc("(1-t)/(1-q*t)");
        let b = sc("q*t/(1-q*t)");
        assert_eq!(&a + &b, sc("(1-t+q*t)/(1-q*t)"));
        assert_eq!(&a * &b, sc("(q*t-q*t^2)/(1-2*q*t+q^2*t^2)"));
        assert_eq!((&a / &a), QTScalar::one());
        assert_eq!(&a - &a, QTScalar::zero());
        assert_eq!(a.inverse().unwrap(), sc("(1-q*t)/(1-t)"));
        assert!(QTScalar::zero().inverse().is_err());
        // Cross-multiplied sum of simple poles.
        assert_eq!(sc("1/(1-q)") + sc("1/(1+q)"), sc("2/(1-q^2)"));
        // Sum to zero across a shared denominator.
        assert_eq!(sc("(1-t)/(1-q*t)") + sc("(t-1)/(1-q*t)"), QTScalar::zero());
        // Inversion keeps the 1 - q^a t^b orientation on both sides.
        assert_eq!(sc("(1-q*t^2)/(1-t)").inverse().unwrap().to_string(), "(1-t)/(1-q*t^2)");
    }

    #[test]
    fn half_powers_of_t_use_s() {
        let r = QTScalar::s_pow(1) * QTScalar::s_pow(1);
        assert_eq!(r, QTScalar::t_pow(1));
        let h = QTScalar::s_pow(-1);
        assert_eq!(&h * &h, QTScalar::t_pow(-1));
        assert_eq!(h.to_string(), "1/s");
        assert_eq!(QTScalar::s_pow(3).to_string(), "t*s");
    }

    #[test]
    fn print_matches_expected_grammar() {
        assert_eq!(sc("(1-t)/(1-q*t^2)").to_string(), "(1-t)/(1-q*t^2)");
        assert_eq!(QTScalar::zero().to_string(), "0");
        assert_eq!(sc("1-t").to_string(), "1-t");
        assert_eq!(sc("-q").to_string(), "-q");
        assert_eq!(sc("3*q^2*t - 1").to_string(), "-1+3*q^2*t");
    }

    #[test]
    fn parse_print_round_trip() {
        let samples = [
            "0",
            "1",
            "-1",
            "q",
            "t^3",
            "s",
            "t*s",
            "(1-t)/(1-q*t^2)",
            "(1-t+q*t)/(1-q*t)",
            "-q/(1-t)",
            "(2-3*t)/(5-7*q)",
            "q^2*t^4*s/(1-q^3*t)",
        ];
        for text in samples {
            let x = sc(text);
            let reprinted: QTScalar = x.to_string().parse().unwrap();
            assert_eq!(x, reprinted, "round trip failed for {text}");
        }
    }

    #[test]
    fn specialization() {
        let a = sc("(1-t)/(1-q*t)");
        assert_eq!(a.specialize(Specialization::Q0).unwrap(), sc("1-t"));
        assert_eq!(a.specialize(Specialization::T0).unwrap(), QTScalar::one());
        assert_eq!(a.specialize(Specialization::Q0T0).unwrap(), QTScalar::one());
        // q/(q) is 1 after reduction, so specializing at q=0 is fine;
        // an actual pole errors out.
        let pole = sc("1/q");
        assert!(pole.specialize(Specialization::Q0).is_err());
        // t = s^2 so T0 kills odd s-powers too.
        assert_eq!(sc("s").specialize(Specialization::T0).unwrap(), QTScalar::zero());
    }

    #[test]
    fn pow_scalar_handles_negative_exponents() {
        let q = QTScalar::q_pow(1);
        assert_eq!(pow_scalar(&q, 3).unwrap(), QTScalar::q_pow(3));
        assert_eq!(pow_scalar(&q, -2).unwrap(), QTScalar::q_pow(-2));
        assert_eq!(pow_scalar(&q, 0).unwrap(), QTScalar::one());
        assert!(pow_scalar(&QTScalar::zero(), -1).is_err());
    }

    #[test]
    fn gcd_reduces_shared_binomial_powers() {
        // ((1-q*t)^3 * (1-t)) / ((1-q*t)^2) must reduce to (1-q*t)*(1-t).
        let num = sc("(1-q*t)^3*(1-t)");
        let den = sc("(1-q*t)^2");
        assert_eq!(num / den, sc("(1-q*t)*(1-t)"));
    }
}
