//! Laurent polynomials in x_1, ..., x_n over [`QTScalar`] coefficients.
//!
//! Provides the ring operations, the symmetric-group action on variables,
//! the q-shift substitution x_j -> q^(-1) x_j used by the Cherednik
//! operators, and the exact division needed by the Demazure-Lusztig
//! formula. Terms are stored sparsely keyed by exponent vector; the BTreeMap
//! key order gives the lexicographic term order used for iteration,
//! printing, and the oracle's determinism.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{pow_scalar, QTScalar, Specialization};
use crate::Error;

/// A sparse Laurent polynomial of fixed rank n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    n: usize,
    terms: BTreeMap<Vec<i64>, QTScalar>,
}

impl LaurentPoly {
    pub fn zero(n: usize) -> Self {
        LaurentPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, QTScalar::one())
    }

    pub fn constant(n: usize, c: QTScalar) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// The monomial c * x^exp.
    pub fn monomial(n: usize, exp: Vec<i64>, c: QTScalar) -> Self {
        assert_eq!(exp.len(), n, "exponent vector length must equal rank");
        let mut p = Self::zero(n);
        p.add_term(exp, c);
        p
    }

    /// The variable x_i (1-based).
    pub fn x(n: usize, i: usize) -> Self {
        Self::x_pow(n, i, 1)
    }

    /// The power x_i^k (1-based, k may be negative).
    pub fn x_pow(n: usize, i: usize, k: i64) -> Self {
        assert!((1..=n).contains(&i), "variable index {i} out of range 1..={n}");
        let mut exp = vec![0; n];
        exp[i - 1] = k;
        Self::monomial(n, exp, QTScalar::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Iterate terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &QTScalar)> {
        self.terms.iter()
    }

    /// Coefficient of x^exp (zero if absent).
    pub fn coeff(&self, exp: &[i64]) -> QTScalar {
        self.terms.get(exp).cloned().unwrap_or_else(QTScalar::zero)
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: QTScalar) {
        assert_eq!(exp.len(), self.n, "exponent vector length must equal rank");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.n, other.n, "rank mismatch in add");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &QTScalar) -> LaurentPoly {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        LaurentPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.n, other.n, "rank mismatch in mul");
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exp, ca * cb);
            }
        }
        out
    }

    /// Multiply by the monomial c * x^exp in place of a full product.
    pub fn mul_monomial(&self, exp: &[i64], c: &QTScalar) -> LaurentPoly {
        assert_eq!(exp.len(), self.n, "exponent vector length must equal rank");
        if c.is_zero() {
            return Self::zero(self.n);
        }
        LaurentPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| {
                    let ne: Vec<i64> = e.iter().zip(exp).map(|(a, b)| a + b).collect();
                    (ne, k * c)
                })
                .collect(),
        }
    }

    /// Apply a permutation w of {1..n} to the variables: x^mu -> x^(w mu),
    /// where w mu places entry mu_i at position w(i). `w[i-1]` is the
    /// 1-based image of i.
    pub fn apply_permutation(&self, w: &[usize]) -> LaurentPoly {
        assert_eq!(w.len(), self.n, "permutation length must equal rank");
        LaurentPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = vec![0i64; self.n];
                    for (i, &x) in e.iter().enumerate() {
                        ne[w[i] - 1] = x;
                    }
                    (ne, c.clone())
                })
                .collect(),
        }
    }

    /// The substitution x_j -> q^(-1) x_j: each monomial x^e picks up the
    /// factor q^(-e_j). `j` is 1-based.
    pub fn apply_yj(&self, j: usize) -> LaurentPoly {
        self.apply_yj_pow(j, 1)
    }

    /// The substitution x_j -> q^(-k) x_j; k = -1 undoes [`Self::apply_yj`].
    pub fn apply_yj_pow(&self, j: usize, k: i64) -> LaurentPoly {
        assert!((1..=self.n).contains(&j), "variable index {j} out of range");
        LaurentPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let shift = pow_scalar(&QTScalar::q_pow(1), -k * e[j - 1])
                        .expect("q is invertible");
                    (e.clone(), c * &shift)
                })
                .collect(),
        }
    }

    /// Exact division: returns h with h * d = self, or an error if the
    /// division leaves a remainder. A remainder here always signals a bug in
    /// the calling operator, never bad input data.
    pub fn exact_divide(&self, d: &LaurentPoly) -> Result<LaurentPoly, Error> {
        assert_eq!(self.n, d.n, "rank mismatch in exact_divide");
        if d.is_zero() {
            return Err(Error::NonExactDivision("division by zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero(self.n));
        }
        // Single-term divisor: divide every monomial directly.
        if d.terms.len() == 1 {
            let (de, dc) = d.terms.iter().next().unwrap();
            let inv = dc.inverse().expect("nonzero coefficient");
            let neg: Vec<i64> = de.iter().map(|x| -x).collect();
            return Ok(self.mul_monomial(&neg, &inv));
        }
        // Designated variable: first index where the divisor's support varies.
        let first = d.terms.keys().next().unwrap();
        let v = (0..self.n)
            .find(|&i| d.terms.keys().any(|e| e[i] != first[i]))
            .expect("multi-term divisor must vary in some variable");
        // Shift both polynomials so all v-exponents are nonnegative.
        let min_d = d.terms.keys().map(|e| e[v]).min().unwrap();
        let min_f = self.terms.keys().map(|e| e[v]).min().unwrap();
        let shifted = |p: &LaurentPoly, m: i64| {
            let mut exp = vec![0i64; p.n];
            exp[v] = -m;
            p.mul_monomial(&exp, &QTScalar::one())
        };
        let dd = shifted(d, min_d);
        let mut rem = shifted(self, min_f);
        let deg_d = dd.terms.keys().map(|e| e[v]).max().unwrap();
        // Leading coefficient of the divisor in the designated variable.
        let lead_terms: Vec<(&Vec<i64>, &QTScalar)> =
            dd.terms.iter().filter(|(e, _)| e[v] == deg_d).collect();
        if lead_terms.len() != 1 {
            return Err(Error::NonExactDivision(
                "divisor leading coefficient is not a single term".into(),
            ));
        }
        let (lead_exp, lead_c) = (lead_terms[0].0.clone(), lead_terms[0].1.clone());
        let lead_inv = lead_c.inverse().expect("nonzero coefficient");
        let mut quot = Self::zero(self.n);
        while !rem.is_zero() {
            let deg_r = rem.terms.keys().map(|e| e[v]).max().unwrap();
            if deg_r < deg_d {
                return Err(Error::NonExactDivision(format!(
                    "remainder {rem} is not divisible"
                )));
            }
            // All top-degree terms of the remainder divided by the leading term.
            let mut qpart = Self::zero(self.n);
            for (e, c) in rem.terms.iter().filter(|(e, _)| e[v] == deg_r) {
                let qe: Vec<i64> = e.iter().zip(&lead_exp).map(|(a, b)| a - b).collect();
                qpart.add_term(qe, c * &lead_inv);
            }
            quot = quot.add(&qpart);
            rem = rem.sub(&qpart.mul(&dd));
        }
        // Undo the monomial shifts: self/d = (F/D) * x_v^(min_f - min_d).
        let mut exp = vec![0i64; self.n];
        exp[v] = min_f - min_d;
        Ok(quot.mul_monomial(&exp, &QTScalar::one()))
    }

    /// Specialize every coefficient at q = 0 and/or t = 0, dropping terms
    /// that vanish. Errors if any coefficient has a pole there.
    pub fn specialize(&self, mode: Specialization) -> Result<LaurentPoly, Error> {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.specialize(mode)?);
        }
        Ok(out)
    }

    /// Total degree of each term; one entry per distinct degree, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self.terms.keys().map(|e| e.iter().sum()).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Split into homogeneous components keyed by total degree.
    pub fn homogeneous_components(&self) -> BTreeMap<i64, LaurentPoly> {
        let mut out: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d: i64 = e.iter().sum();
            out.entry(d)
                .or_insert_with(|| Self::zero(self.n))
                .add_term(e.clone(), c.clone());
        }
        out
    }

    /// JSON-ready term list in lexicographic order.
    pub fn to_json_terms(&self) -> Vec<JsonTerm> {
        self.terms
            .iter()
            .map(|(e, c)| JsonTerm { exp: e.clone(), coeff: c.to_string() })
            .collect()
    }

    /// Rebuild from a JSON term list; duplicate exponents accumulate.
    pub fn from_json_terms(n: usize, terms: &[JsonTerm]) -> Result<LaurentPoly, Error> {
        let mut out = Self::zero(n);
        for t in terms {
            if t.exp.len() != n {
                return Err(Error::Parse(format!(
                    "term exponent {:?} does not have length {n}",
                    t.exp
                )));
            }
            out.add_term(t.exp.clone(), t.coeff.parse()?);
        }
        Ok(out)
    }
}

/// One serialized term: {"exp":[2,0,-1],"coeff":"<scalar text>"}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub exp: Vec<i64>,
    pub coeff: String,
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            let mono = mono.join("*");
            let cs = c.to_string();
            let part = if mono.is_empty() {
                if cs.contains(['+', '*', '/']) || cs[1..].contains('-') {
                    format!("({cs})")
                } else {
                    cs
                }
            } else if c.is_one() {
                mono
            } else if cs == "-1" {
                format!("-{mono}")
            } else if cs.contains(['+', '-', '*', '/']) {
                format!("({cs})*{mono}")
            } else {
                format!("{cs}*{mono}")
            };
            parts.push(part);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// The identity permutation as 1-based images.
pub fn identity_perm(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// The simple transposition s_i swapping i and i+1, as 1-based images.
pub fn transposition(n: usize, i: usize) -> Vec<usize> {
    assert!((1..n).contains(&i), "transposition index {i} out of range 1..{n}");
    let mut w = identity_perm(n);
    w.swap(i - 1, i);
    w
}

/// Compose permutations: (w after v)(i) = w(v(i)).
pub fn compose_perm(w: &[usize], v: &[usize]) -> Vec<usize> {
    assert_eq!(w.len(), v.len(), "permutation length mismatch");
    v.iter().map(|&i| w[i - 1]).collect()
}
