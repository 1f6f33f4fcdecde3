//! Specialized expansion rules and the sign-power repackaging of the x_j
//! rule's coefficients.
//!
//! For a subset C containing j, the exact coefficient F(C, j) * wt(C) of the
//! x_j expansion factors as
//!
//! ```text
//! (-1)^S q^A t^B * W_in * W_off
//! ```
//!
//! where S, A, B are integer statistics of (mu, C, j) with A, B >= 0, W_in
//! is a product of quotients (1-t)/(1 - q^.. t^..) along the rotation chain
//! skipping j's link, and W_off is the product of balanced quotients from
//! positions outside C.  Setting q = 0, t = 0, or both then selects the
//! terms with A = 0, B = 0, or both, and the surviving coefficients take
//! simple closed forms.  [`monk_specialized`] computes those restricted
//! expansions directly; they agree term by term with specializing the exact
//! expansion, which the tests and the verification suite enforce.

use crate::macdonald::v_mu;
use crate::monk::{balanced_quotient, bk_ck, MonkExpansion};
use crate::scalar::{QTScalar, Specialization};
use crate::Error;

/// The statistics of one subset term of the x_j expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct StatBundle {
    /// Sign exponent.
    pub s: i64,
    /// q exponent; nonnegative.
    pub a: i64,
    /// t exponent; nonnegative.
    pub b: i64,
    /// Product of chain quotients (1-t)/(1 - q^.. t^..) skipping j's link.
    pub w_in: QTScalar,
    /// Product of balanced quotients from positions outside C; zero when a
    /// passing entry ties mu_k, which kills the subset's weight.
    pub w_off: QTScalar,
}

impl StatBundle {
    /// The exact coefficient the bundle repackages:
    /// (-1)^s q^a t^b w_in w_off.
    pub fn coefficient(&self) -> QTScalar {
        let sign = if self.s % 2 == 0 {
            QTScalar::one()
        } else {
            QTScalar::zero() - QTScalar::one()
        };
        sign * QTScalar::q_pow(self.a) * QTScalar::t_pow(self.b) * &self.w_in * &self.w_off
    }

    /// Whether the term survives the given specialization.
    pub fn survives(&self, mode: Specialization) -> bool {
        match mode {
            Specialization::Q0 => self.a == 0,
            Specialization::T0 => self.b == 0,
            Specialization::Q0T0 => self.a == 0 && self.b == 0,
        }
    }
}

/// Compute the statistics of (mu, C, j).  Requires j in C.  Uses the
/// adopted conventions, like everything else in this module.
///
/// The chain runs gamma_0 = mu_(a_m) + 1, gamma_i = mu_(a_i), with ranks
/// w_0 = v(a_m), w_i = v(a_i).  S counts descents along the inner links plus
/// the wrap link, then corrects for the link into position p of j; A and B
/// accumulate the corresponding entry and rank drops with the same
/// correction.
pub fn stats(mu: &[i64], c: &[usize], j: usize) -> Result<StatBundle, Error> {
    let conv = crate::monk::Conventions::default();
    let m = c.len();
    let p = match c.iter().position(|&a| a == j) {
        Some(p) => p + 1,
        None => {
            return Err(Error::InvalidArgument(format!(
                "statistics need j in C; j = {j}, C = {c:?}"
            )))
        }
    };
    let v = v_mu(mu);
    let mu_at = |i: usize| mu[c[i - 1] - 1];
    let v_at = |i: usize| v[c[i - 1] - 1] as i64;
    let (mu_a1, mu_am) = (mu_at(1), mu_at(m));
    let (v_a1, v_am) = (v_at(1), v_at(m));

    let mut s = 0i64;
    let mut a = 0i64;
    let mut b = -(mu.iter().filter(|&&x| x > mu_am).count() as i64);
    for k in 1..=mu.len() {
        if c.contains(&k) {
            continue;
        }
        let (bk, _) = bk_ck(mu, c, k, &conv)?;
        if bk < mu[k - 1] {
            b += 1;
        }
    }
    for i in 2..=m {
        if mu_at(i - 1) > mu_at(i) {
            s += 1;
            a += mu_at(i - 1) - mu_at(i);
        }
        if v_at(i - 1) > v_at(i) {
            b += v_at(i - 1) - v_at(i);
        }
    }
    if v_a1 > v_am {
        s += 1;
        b += v_a1 - v_am;
    }
    if mu_a1 >= mu_am + 1 {
        a += mu_a1 - (mu_am + 1);
    }

    if p == 1 {
        if mu_am + 1 <= mu_a1 {
            s += 1;
            a -= mu_a1 - (mu_am + 1);
        }
        if v_a1 > v_am {
            b -= v_a1 - v_am;
        }
    } else {
        if mu_at(p) >= mu_at(p - 1) {
            s += 1;
            a += mu_at(p - 1) - mu_a1;
        } else {
            a += mu_at(p) - mu_a1;
        }
        if v_at(p - 1) < v_at(p) {
            b += v_at(p - 1) - v_a1;
        } else {
            b += v_at(p) - v_a1;
        }
    }

    let one_minus_t = QTScalar::one() - QTScalar::t_pow(1);
    let mut w_in = QTScalar::one();
    for i in 1..=m {
        if i == p {
            continue;
        }
        let (g_prev, w_prev) = if i == 1 {
            (mu_am + 1, v_am)
        } else {
            (mu_at(i - 1), v_at(i - 1))
        };
        let dq = (mu_at(i) - g_prev).abs();
        let dt = (v_at(i) - w_prev).abs();
        let den = QTScalar::one() - QTScalar::q_pow(dq) * QTScalar::t_pow(dt);
        w_in = w_in * (&one_minus_t / &den);
    }

    let mut w_off = QTScalar::one();
    for k in 1..=mu.len() {
        if c.contains(&k) {
            continue;
        }
        let (bk, ck) = bk_ck(mu, c, k, &conv)?;
        if bk == mu[k - 1] {
            w_off = QTScalar::zero();
            break;
        }
        if mu[k - 1] > bk {
            w_off = w_off * balanced_quotient(mu[k - 1] - bk, v[k - 1] as i64 - ck);
        }
    }

    Ok(StatBundle { s, a, b, w_in, w_off })
}

/// The repackaged exact coefficient (-1)^S q^A t^B W_in W_off of the subset
/// term of x_j E_mu.  Equal to coeff_f(mu, C, j) * wt(mu, C).
pub fn repackaged_coeff(mu: &[i64], c: &[usize], j: usize) -> Result<QTScalar, Error> {
    Ok(stats(mu, c, j)?.coefficient())
}

/// Specialize every merged coefficient of an expansion, dropping terms that
/// vanish.
pub fn specialize_expansion(
    expansion: &MonkExpansion,
    mode: Specialization,
) -> Result<Vec<(Vec<i64>, QTScalar)>, Error> {
    let mut out = Vec::new();
    for (target, coeff) in expansion.merged() {
        let c = coeff.specialize(mode)?;
        if !c.is_zero() {
            out.push((target, c));
        }
    }
    Ok(out)
}

/// The x_j expansion at a specialization, computed directly: subsets are
/// selected by the vanishing of the matching statistic (A for q = 0, B for
/// t = 0, both for q = t = 0) and each surviving coefficient is the exact
/// repackaged coefficient specialized as one reduced fraction.  Merged by
/// target, sorted, zero sums dropped.
pub fn monk_specialized(
    mu: &[i64],
    j: usize,
    mode: Specialization,
) -> Result<Vec<(Vec<i64>, QTScalar)>, Error> {
    Ok(monk_specialized_expansion(mu, j, mode)?.merged())
}

/// Same computation as [`monk_specialized`] but keeping the per-subset
/// structure: one term per surviving subset with its specialized
/// coefficient, in subset enumeration order.
pub fn monk_specialized_expansion(
    mu: &[i64],
    j: usize,
    mode: Specialization,
) -> Result<MonkExpansion, Error> {
    let n = mu.len();
    if !(1..=n).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "index {j} out of range 1..={n}"
        )));
    }
    let mut terms = Vec::new();
    for c in crate::monk::nonempty_subsets(n) {
        if !c.contains(&j) {
            continue;
        }
        let st = stats(mu, &c, j)?;
        if !st.survives(mode) {
            continue;
        }
        let coeff = st.coefficient().specialize(mode)?;
        if coeff.is_zero() {
            continue;
        }
        let target = crate::monk::rot(mu, &c);
        terms.push(crate::monk::MonkTerm { c, target, coeff });
    }
    Ok(MonkExpansion {
        rule: crate::monk::MonkRule::X,
        mu: mu.to_vec(),
        j,
        terms,
    })
}

/// The closed form the q = 0 coefficient must take: (-1)^S t^B (1-t)^(m-1)
/// divided by (1 - t^|rank drop|) for every chain link with equal entries,
/// skipping j's link.
pub fn q0_closed_form(mu: &[i64], c: &[usize], j: usize) -> Result<QTScalar, Error> {
    let st = stats(mu, c, j)?;
    if st.a != 0 || st.w_off.is_zero() {
        return Ok(QTScalar::zero());
    }
    let m = c.len();
    let p = c.iter().position(|&a| a == j).unwrap() + 1;
    let v = v_mu(mu);
    let mu_at = |i: usize| mu[c[i - 1] - 1];
    let v_at = |i: usize| v[c[i - 1] - 1] as i64;
    let sign = if st.s % 2 == 0 {
        QTScalar::one()
    } else {
        QTScalar::zero() - QTScalar::one()
    };
    let mut out = sign * QTScalar::t_pow(st.b);
    let one_minus_t = QTScalar::one() - QTScalar::t_pow(1);
    for i in 1..=m {
        if i == p {
            continue;
        }
        let (g_prev, w_prev) = if i == 1 {
            (mu_at(m) + 1, v_at(m))
        } else {
            (mu_at(i - 1), v_at(i - 1))
        };
        out = out * &one_minus_t;
        if mu_at(i) == g_prev {
            let dt = (v_at(i) - w_prev).abs();
            out = out / (QTScalar::one() - QTScalar::t_pow(dt));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macdonald::ECache;
    use crate::monk::{coeff_f, monk_expand, nonempty_subsets, wt, Conventions, MonkRule};
    use std::collections::BTreeMap;

    fn sc(s: &str) -> QTScalar {
        s.parse().unwrap()
    }

    #[test]
    fn stats_worked_cases() {
        let st = stats(&[0, 0], &[1, 2], 2).unwrap();
        assert_eq!((st.s, st.a, st.b), (1, 0, 0));
        assert_eq!(st.w_in, sc("(1-t)/(1-q*t)"));
        assert_eq!(st.w_off, QTScalar::one());

        let st = stats(&[0, 0], &[2], 2).unwrap();
        assert_eq!((st.s, st.a, st.b), (0, 0, 0));
        assert_eq!(st.coefficient(), QTScalar::one());

        let st = stats(&[2, 0], &[1, 2], 2).unwrap();
        assert_eq!((st.s, st.a, st.b), (2, 1, 0));

        let st = stats(&[2, 0], &[2], 2).unwrap();
        assert_eq!((st.s, st.a, st.b), (0, 0, 0));
        assert_eq!(
            st.w_off,
            sc("(1-q)*(1-q*t^2)/((1-q*t)*(1-q*t))")
        );

        assert!(stats(&[0, 0], &[2], 1).is_err());
    }

    #[test]
    fn repackaging_matches_exact_coefficient() {
        let conv = Conventions::default();
        let mut checked = 0usize;
        for mu in [
            vec![0, 0],
            vec![2, 0],
            vec![1, 2],
            vec![0, 1, 2],
            vec![2, 0, 1],
            vec![1, 1, 0],
            vec![-1, 1, 0],
        ] {
            let n = mu.len();
            for c in nonempty_subsets(n) {
                for &j in &c {
                    let exact = coeff_f(&mu, &c, j) * wt(&mu, &c, &conv).unwrap();
                    assert_eq!(
                        repackaged_coeff(&mu, &c, j).unwrap(),
                        exact,
                        "mu = {mu:?}, C = {c:?}, j = {j}"
                    );
                    let st = stats(&mu, &c, j).unwrap();
                    // Nonnegativity is claimed for contributing subsets; a
                    // vanishing weight can carry a negative raw statistic.
                    if !st.w_off.is_zero() {
                        assert!(st.a >= 0, "A < 0 at mu = {mu:?}, C = {c:?}, j = {j}");
                        assert!(st.b >= 0, "B < 0 at mu = {mu:?}, C = {c:?}, j = {j}");
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn stats_are_translation_invariant() {
        for mu in [vec![0, 2, 1], vec![1, 0, 0]] {
            let shifted: Vec<i64> = mu.iter().map(|x| x + 3).collect();
            for c in nonempty_subsets(3) {
                for &j in &c {
                    let st = stats(&mu, &c, j).unwrap();
                    let ts = stats(&shifted, &c, j).unwrap();
                    assert_eq!(st, ts, "mu = {mu:?}, C = {c:?}, j = {j}");
                }
            }
        }
    }

    #[test]
    fn specialized_expansions_match_exact_route() {
        let conv = Conventions::default();
        for mu in [vec![0, 0], vec![2, 0], vec![1, 2], vec![0, 1, 2], vec![2, 0, 1]] {
            let n = mu.len();
            for j in 1..=n {
                let exact = monk_expand(MonkRule::X, &mu, j, &conv).unwrap();
                for mode in [Specialization::Q0, Specialization::T0, Specialization::Q0T0] {
                    let via_exact = specialize_expansion(&exact, mode).unwrap();
                    let direct = monk_specialized(&mu, j, mode).unwrap();
                    assert_eq!(direct, via_exact, "mu = {mu:?}, j = {j}, mode = {mode}");
                }
            }
        }
    }

    #[test]
    fn q0_coefficients_take_closed_form() {
        for mu in [vec![0, 0], vec![2, 0], vec![1, 2], vec![0, 1, 2]] {
            let n = mu.len();
            for c in nonempty_subsets(n) {
                for &j in &c {
                    let st = stats(&mu, &c, j).unwrap();
                    if st.a != 0 {
                        continue;
                    }
                    let exact = st.coefficient().specialize(Specialization::Q0).unwrap();
                    let closed = q0_closed_form(&mu, &c, j).unwrap();
                    assert_eq!(exact, closed, "mu = {mu:?}, C = {c:?}, j = {j}");
                }
            }
        }
    }

    #[test]
    fn fully_specialized_coefficients_are_signs() {
        for mu in [vec![0, 0], vec![2, 0], vec![1, 2], vec![0, 1, 2], vec![2, 0, 1]] {
            let n = mu.len();
            for c in nonempty_subsets(n) {
                for &j in &c {
                    let st = stats(&mu, &c, j).unwrap();
                    if !st.survives(Specialization::Q0T0) || st.w_off.is_zero() {
                        continue;
                    }
                    let coeff = st.coefficient().specialize(Specialization::Q0T0).unwrap();
                    let minus_one = QTScalar::zero() - QTScalar::one();
                    assert!(
                        coeff == QTScalar::one() || coeff == minus_one,
                        "mu = {mu:?}, C = {c:?}, j = {j}: {coeff}"
                    );
                }
            }
        }
    }

    #[test]
    fn t0_keeps_residual_factors() {
        // With B = 0 the surviving coefficient is not always a plain power
        // of q: off-subset quotients leave (1 - q^D) residuals behind.
        let direct = monk_specialized(&[2, 0], 2, Specialization::T0).unwrap();
        let map: BTreeMap<Vec<i64>, QTScalar> = direct.into_iter().collect();
        assert_eq!(map[&vec![2, 1][..].to_vec()], sc("1-q"));
        assert_eq!(map[&vec![1, 2][..].to_vec()], sc("q"));
    }

    #[test]
    fn specialized_route_reconstitutes_products() {
        // The q = 0 coefficients of x_j E_mu match the oracle expansion of
        // the product with every E coefficient specialized.
        let cache = ECache::new();
        let conv = Conventions::default();
        let mu = [1, 0, 2];
        for j in 1..=3 {
            let exact = monk_expand(MonkRule::X, &mu, j, &conv).unwrap();
            let direct = monk_specialized(&mu, j, Specialization::Q0).unwrap();
            let exact_spec = specialize_expansion(&exact, Specialization::Q0).unwrap();
            assert_eq!(direct, exact_spec);
            // Spot-check one full polynomial identity at q = 0.
            let product = MonkRule::X
                .multiplier(3, j)
                .mul(&cache.e(&mu).unwrap())
                .specialize(Specialization::Q0)
                .unwrap();
            let mut rebuilt = crate::laurent::LaurentPoly::zero(3);
            for (target, coeff) in &direct {
                let e_spec = cache.e(target).unwrap().specialize(Specialization::Q0).unwrap();
                rebuilt = rebuilt.add(&e_spec.scale(coeff));
            }
            assert_eq!(product, rebuilt, "j = {j}");
        }
    }
}
