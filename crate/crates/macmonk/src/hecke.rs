//! The basic affine Hecke algebra operators acting on Laurent polynomials.
//!
//! Provides the Demazure-Lusztig operators T_i and their inverses, the
//! rotation operators T_pi and tau_pi (with inverses), the multiplication
//! words X_j, and the commuting Cherednik operators Y_i, together with an
//! [`OperatorWord`] type that composes these atoms. Words apply right to
//! left: the rightmost atom acts first, matching how operator products are
//! written.
//!
//! Key relations satisfied (and unit-tested here):
//!
//! * quadratic: (T_i - t^(1/2))(T_i + t^(-1/2)) = 0,
//! * braid: T_i T_(i+1) T_i = T_(i+1) T_i T_(i+1), commuting for |i-j| >= 2,
//! * inverse: T_i^(-1) = T_i - (t^(1/2) - t^(-1/2)),
//! * rotation: Y_1 tau_pi = q^(-1) tau_pi Y_n and Y_i tau_pi = tau_pi
//!   Y_(i-1) for i >= 2,
//! * commutativity of the Y_i.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::laurent::{transposition, LaurentPoly};
use crate::scalar::QTScalar;
use crate::Error;

/// One generator of the operator algebra. Indices are 1-based; `T`, `Tinv`,
/// and `S` take i in 1..n, the rest take indices in 1..=n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Demazure-Lusztig operator T_i.
    T(usize),
    /// Inverse T_i^(-1).
    Tinv(usize),
    /// Rotation T_pi = s_1 ... s_(n-1) y_n.
    TPi,
    /// Inverse rotation T_pi^(-1).
    TPiInv,
    /// Degree-raising rotation tau_pi = X_1 T_1 ... T_(n-1).
    TauPi,
    /// Inverse tau_pi^(-1) = T_(n-1)^(-1) ... T_1^(-1) X_1^(-1).
    TauPiInv,
    /// Multiplication by x_j, as the word T_(j-1)...T_1 tau_pi
    /// T_(n-1)^(-1)...T_j^(-1).
    X(usize),
    /// Multiplication by x_j^(-1).
    Xinv(usize),
    /// The simple transposition s_i on variables.
    S(usize),
    /// Cherednik operator Y_i.
    Y(usize),
    /// Inverse Cherednik operator Y_i^(-1).
    Yinv(usize),
}

impl Atom {
    /// The atom undoing this one.
    pub fn inverse(self) -> Atom {
        match self {
            Atom::T(i) => Atom::Tinv(i),
            Atom::Tinv(i) => Atom::T(i),
            Atom::TPi => Atom::TPiInv,
            Atom::TPiInv => Atom::TPi,
            Atom::TauPi => Atom::TauPiInv,
            Atom::TauPiInv => Atom::TauPi,
            Atom::X(j) => Atom::Xinv(j),
            Atom::Xinv(j) => Atom::X(j),
            Atom::S(i) => Atom::S(i),
            Atom::Y(i) => Atom::Yinv(i),
            Atom::Yinv(i) => Atom::Y(i),
        }
    }

    /// Apply this atom to a polynomial.
    pub fn apply(self, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
        match self {
            Atom::T(i) => apply_ti(i, f),
            Atom::Tinv(i) => apply_ti_inv(i, f),
            Atom::TPi => Ok(apply_tpi(f)),
            Atom::TPiInv => Ok(apply_tpi_inv(f)),
            Atom::TauPi => apply_tau_pi(f),
            Atom::TauPiInv => apply_tau_pi_inv(f),
            Atom::X(j) => apply_xj(j, f),
            Atom::Xinv(j) => apply_xj_inv(j, f),
            Atom::S(i) => {
                Ok(f.apply_permutation(&transposition(f.n(), i)))
            }
            Atom::Y(i) => apply_yi(i, f),
            Atom::Yinv(i) => apply_yi_inv(i, f),
        }
    }
}

/// A product of atoms, written left to right and applied right to left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWord {
    atoms: Vec<Atom>,
}

impl OperatorWord {
    pub fn new(atoms: Vec<Atom>) -> Self {
        OperatorWord { atoms }
    }

    pub fn identity() -> Self {
        OperatorWord { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The reversed word of inverse atoms.
    pub fn inverse(&self) -> OperatorWord {
        OperatorWord {
            atoms: self.atoms.iter().rev().map(|a| a.inverse()).collect(),
        }
    }

    /// Apply the word: rightmost atom first.
    pub fn apply(&self, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
        let mut acc = f.clone();
        for atom in self.atoms.iter().rev() {
            acc = atom.apply(&acc)?;
        }
        Ok(acc)
    }
}

/// The Demazure-Lusztig operator
/// T_i = -t^(-1/2) + t^(-1/2) (1 + s_i) (1 - t x_i^(-1) x_(i+1)) / (1 - x_i^(-1) x_(i+1)),
/// computed as t^(-1/2) (h - f) where h is the exact quotient
/// (N - x_i^(-1) x_(i+1) s_i(N)) / (1 - x_i^(-1) x_(i+1)) with
/// N = (1 - t x_i^(-1) x_(i+1)) f. The division is always exact; a failure
/// propagates as an error and indicates a bug in the formula plumbing.
pub fn apply_ti(i: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    let n = f.n();
    assert!((1..n).contains(&i), "T index {i} out of range 1..{n}");
    let mut shift = vec![0i64; n];
    shift[i - 1] = -1;
    shift[i] = 1;
    // N = f - t * x_i^(-1) x_(i+1) * f.
    let big_n = f.sub(&f.mul_monomial(&shift, &QTScalar::t_pow(1)));
    let si_n = big_n.apply_permutation(&transposition(n, i));
    let numer = big_n.sub(&si_n.mul_monomial(&shift, &QTScalar::one()));
    // d = 1 - x_i^(-1) x_(i+1).
    let mut d = LaurentPoly::one(n);
    d.add_term(shift, QTScalar::from_int(-1));
    let h = numer.exact_divide(&d)?;
    Ok(h.sub(f).scale(&QTScalar::s_pow(-1)))
}

/// T_i^(-1) = T_i - (t^(1/2) - t^(-1/2)).
pub fn apply_ti_inv(i: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    let tf = apply_ti(i, f)?;
    let c = QTScalar::s_pow(1) - QTScalar::s_pow(-1);
    Ok(tf.sub(&f.scale(&c)))
}

/// T_pi = s_1 s_2 ... s_(n-1) y_n: on monomials,
/// x^e -> q^(-e_n) x^(e_n, e_1, ..., e_(n-1)).
pub fn apply_tpi(f: &LaurentPoly) -> LaurentPoly {
    let n = f.n();
    // The product s_1...s_(n-1) is the cycle sending i to i+1 and n to 1.
    let mut w: Vec<usize> = (2..=n).collect();
    w.push(1);
    f.apply_yj(n).apply_permutation(&w)
}

/// T_pi^(-1): on monomials, x^e -> q^(e_1) x^(e_2, ..., e_n, e_1).
pub fn apply_tpi_inv(f: &LaurentPoly) -> LaurentPoly {
    let n = f.n();
    let mut w: Vec<usize> = vec![n];
    w.extend(1..n);
    f.apply_permutation(&w).apply_yj_pow(n, -1)
}

/// tau_pi = X_1 T_1 ... T_(n-1): apply T_(n-1) through T_1, then multiply
/// by x_1. Raises homogeneous degree by one.
pub fn apply_tau_pi(f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    let n = f.n();
    let mut acc = f.clone();
    for i in (1..n).rev() {
        acc = apply_ti(i, &acc)?;
    }
    Ok(acc.mul(&LaurentPoly::x(n, 1)))
}

/// tau_pi^(-1) = T_(n-1)^(-1) ... T_1^(-1) X_1^(-1): divide by x_1, then
/// apply T_1^(-1) through T_(n-1)^(-1).
pub fn apply_tau_pi_inv(f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    let n = f.n();
    let mut acc = f.mul(&LaurentPoly::x_pow(n, 1, -1));
    for i in 1..n {
        acc = apply_ti_inv(i, &acc)?;
    }
    Ok(acc)
}

/// The word for multiplication by x_j:
/// X_j = T_(j-1) ... T_1 tau_pi T_(n-1)^(-1) ... T_j^(-1).
pub fn x_word(n: usize, j: usize) -> OperatorWord {
    assert!((1..=n).contains(&j), "X index {j} out of range 1..={n}");
    let mut atoms: Vec<Atom> = (1..j).rev().map(Atom::T).collect();
    atoms.push(Atom::TauPi);
    atoms.extend((j..n).rev().map(Atom::Tinv));
    OperatorWord::new(atoms)
}

/// Multiplication by x_j via its Hecke word (equal to `f * x_j`).
pub fn apply_xj(j: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    x_word(f.n(), j).apply(f)
}

/// Multiplication by x_j^(-1) via the inverse Hecke word.
pub fn apply_xj_inv(j: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    x_word(f.n(), j).inverse().apply(f)
}

/// The cached word for the Cherednik operator Y_i:
/// Y_1 = T_pi T_(n-1) ... T_1 and Y_(i+1) = T_i^(-1) Y_i T_i^(-1).
pub fn y_word(n: usize, i: usize) -> Arc<OperatorWord> {
    assert!((1..=n).contains(&i), "Y index {i} out of range 1..={n}");
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<OperatorWord>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().unwrap().get(&(n, i)) {
        return Arc::clone(w);
    }
    let mut atoms: Vec<Atom> = vec![Atom::TPi];
    atoms.extend((1..n).rev().map(Atom::T));
    for k in 1..i {
        let mut wrapped = vec![Atom::Tinv(k)];
        wrapped.extend(atoms);
        wrapped.push(Atom::Tinv(k));
        atoms = wrapped;
    }
    let word = Arc::new(OperatorWord::new(atoms));
    cache
        .lock()
        .unwrap()
        .entry((n, i))
        .or_insert_with(|| Arc::clone(&word))
        .clone()
}

/// Apply the Cherednik operator Y_i.
pub fn apply_yi(i: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    y_word(f.n(), i).apply(f)
}

/// Apply the inverse Cherednik operator Y_i^(-1).
pub fn apply_yi_inv(i: usize, f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    y_word(f.n(), i).inverse().apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(text: &str) -> QTScalar {
        text.parse().expect("test scalar must parse")
    }

    fn x(n: usize, i: usize) -> LaurentPoly {
        LaurentPoly::x(n, i)
    }

    /// A fixed asymmetric test polynomial with mixed signs and powers.
    fn sample(n: usize) -> LaurentPoly {
        let mut f = LaurentPoly::one(n);
        for i in 1..=n {
            let mut e = vec![0i64; n];
            e[i - 1] = i as i64;
            if i > 1 {
                e[0] = -1;
            }
            f.add_term(e, QTScalar::from_int(i as i64) * sc("1-t"));
        }
        f.add_term(vec![1; n], sc("q/(1-q*t)"));
        f
    }

    #[test]
    fn demazure_lusztig_values() {
        let one = LaurentPoly::one(2);
        assert_eq!(apply_ti(1, &one).unwrap(), one.scale(&sc("s")));

        // T_1 x_1 = t^(-1/2) x_2.
        assert_eq!(apply_ti(1, &x(2, 1)).unwrap(), x(2, 2).scale(&sc("1/s")));

        // T_1 x_2 = t^(1/2) x_1 + (t^(1/2) - t^(-1/2)) x_2.
        let expect = x(2, 1).scale(&sc("s")).add(&x(2, 2).scale(&sc("s - 1/s")));
        assert_eq!(apply_ti(1, &x(2, 2)).unwrap(), expect);

        // Symmetric input: multiplication by t^(1/2).
        let sym = x(2, 1).mul(&x(2, 2));
        assert_eq!(apply_ti(1, &sym).unwrap(), sym.scale(&sc("s")));
        let sym3 = x(3, 2).add(&x(3, 3));
        assert_eq!(apply_ti(2, &sym3).unwrap(), sym3.scale(&sc("s")));

        // T_1 x_1^2 = t^(-1/2) ((1-t) x_1 x_2 + x_2^2).
        let f = LaurentPoly::monomial(2, vec![2, 0], QTScalar::one());
        let expect = LaurentPoly::monomial(2, vec![1, 1], sc("(1-t)/s"))
            .add(&LaurentPoly::monomial(2, vec![0, 2], sc("1/s")));
        assert_eq!(apply_ti(1, &f).unwrap(), expect);
    }

    #[test]
    fn quadratic_relation() {
        // (T_i - t^(1/2))(T_i + t^(-1/2)) f = 0.
        for f in [x(2, 1), x(2, 2), sample(2)] {
            let tf = apply_ti(1, &f).unwrap();
            let ttf = apply_ti(1, &tf).unwrap();
            let lhs = ttf
                .add(&tf.scale(&sc("1/s - s")))
                .sub(&f.scale(&QTScalar::one()));
            assert!(lhs.is_zero(), "quadratic relation failed on {f}");
        }
    }

    #[test]
    fn inverse_and_difference_relation() {
        let f = sample(2);
        let tf = apply_ti(1, &f).unwrap();
        assert_eq!(apply_ti_inv(1, &tf).unwrap(), f);
        assert_eq!(
            apply_ti_inv(1, &LaurentPoly::one(2)).unwrap(),
            LaurentPoly::one(2).scale(&sc("1/s"))
        );
        // T_i - T_i^(-1) = t^(1/2) - t^(-1/2).
        let diff = tf.sub(&apply_ti_inv(1, &f).unwrap());
        assert_eq!(diff, f.scale(&sc("s - 1/s")));
    }

    #[test]
    fn braid_relations() {
        let f = sample(3);
        let route = |seq: &[usize], g: &LaurentPoly| {
            seq.iter()
                .rev()
                .fold(g.clone(), |acc, &i| apply_ti(i, &acc).unwrap())
        };
        assert_eq!(route(&[1, 2, 1], &f), route(&[2, 1, 2], &f));
        let f4 = sample(4);
        assert_eq!(route(&[1, 3], &f4), route(&[3, 1], &f4));
    }

    #[test]
    fn rotation_operators() {
        assert_eq!(apply_tpi(&LaurentPoly::one(2)), LaurentPoly::one(2));
        assert_eq!(apply_tpi(&x(2, 2)), x(2, 1).scale(&sc("1/q")));
        assert_eq!(apply_tpi(&x(3, 1)), x(3, 2));
        let f = sample(3);
        assert_eq!(apply_tpi_inv(&apply_tpi(&f)), f);

        // tau_pi(1) = t^(1/2) x_1 in rank 2.
        assert_eq!(
            apply_tau_pi(&LaurentPoly::one(2)).unwrap(),
            x(2, 1).scale(&sc("s"))
        );
        let g = apply_tau_pi(&f).unwrap();
        assert_eq!(apply_tau_pi_inv(&g).unwrap(), f);
        // Degree raised by exactly one on homogeneous input.
        let h = LaurentPoly::monomial(3, vec![1, 1, 0], QTScalar::one());
        assert_eq!(apply_tau_pi(&h).unwrap().degrees(), vec![3]);
    }

    #[test]
    fn x_words_multiply_by_variables() {
        for n in [2, 3] {
            let f = sample(n);
            for j in 1..=n {
                assert_eq!(
                    apply_xj(j, &f).unwrap(),
                    f.mul(&x(n, j)),
                    "X_{j} is multiplication by x_{j} at rank {n}"
                );
                assert_eq!(
                    apply_xj_inv(j, &f).unwrap(),
                    f.mul(&LaurentPoly::x_pow(n, j, -1))
                );
            }
        }
    }

    #[test]
    fn cherednik_scalars_on_one() {
        // Y_i(1) = t^(-(i-1) + (n-1)/2).
        for n in [2, 3, 4] {
            for i in 1..=n {
                let expect = LaurentPoly::one(n)
                    .scale(&QTScalar::s_pow(-2 * (i as i64 - 1) + (n as i64 - 1)));
                assert_eq!(apply_yi(i, &LaurentPoly::one(n)).unwrap(), expect);
            }
        }
    }

    #[test]
    fn cherednik_commutativity() {
        let f = sample(2);
        let a = apply_yi(1, &apply_yi(2, &f).unwrap()).unwrap();
        let b = apply_yi(2, &apply_yi(1, &f).unwrap()).unwrap();
        assert_eq!(a, b);
        let f = sample(3);
        let a = apply_yi(1, &apply_yi(3, &f).unwrap()).unwrap();
        let b = apply_yi(3, &apply_yi(1, &f).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rotation_intertwines_cherednik_operators() {
        // Y_1 tau_pi = q^(-1) tau_pi Y_n; Y_i tau_pi = tau_pi Y_(i-1).
        for n in [2, 3] {
            let f = sample(n);
            let tau_f = apply_tau_pi(&f).unwrap();
            let lhs = apply_yi(1, &tau_f).unwrap();
            let rhs = apply_tau_pi(&apply_yi(n, &f).unwrap())
                .unwrap()
                .scale(&sc("1/q"));
            assert_eq!(lhs, rhs, "Y_1 relation at rank {n}");
            for i in 2..=n {
                let lhs = apply_yi(i, &tau_f).unwrap();
                let rhs = apply_tau_pi(&apply_yi(i - 1, &f).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "Y_{i} relation at rank {n}");
            }
        }
    }

    #[test]
    fn y_inverse_round_trip() {
        let f = sample(2);
        for i in 1..=2 {
            let g = apply_yi(i, &f).unwrap();
            assert_eq!(apply_yi_inv(i, &g).unwrap(), f);
        }
    }

    #[test]
    fn word_inverse_round_trip() {
        let w = OperatorWord::new(vec![Atom::T(1), Atom::TauPi, Atom::Tinv(1)]);
        let f = sample(2);
        let g = w.apply(&f).unwrap();
        assert_eq!(w.inverse().apply(&g).unwrap(), f);
    }
}
