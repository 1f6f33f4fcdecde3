//! Nonsymmetric Macdonald polynomials E_mu of type GL(n).
//!
//! E_mu is the unique monic simultaneous eigenvector of the Cherednik
//! operators: Y_i E_mu = q^(-mu_i) t^(-v_mu(i)) t^((n+1)/2) E_mu, where
//! v_mu is the minimal-length permutation sorting mu increasingly. The
//! construction walks the boxes of mu column by column; each box applies
//! the degree-raising intertwiner tau_pi (suitably renormalized) followed
//! by a chain of renormalized intertwiners tau_i, so the running polynomial
//! is exactly E_nu for the running composition nu at every step. Every
//! intermediate is therefore cached, and every cache insertion re-verifies
//! monicity, homogeneity, and the full eigenvalue property.
//!
//! Compositions with negative entries reduce to the nonnegative case via
//! E_mu = (x_1 ... x_n)^(-m) E_(mu + m(1,...,1)) with m = -min(mu).

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::hecke::{apply_tau_pi, apply_ti, apply_yi};
use crate::laurent::{JsonTerm, LaurentPoly};
use crate::scalar::QTScalar;
use crate::Error;

/// The sorting permutation v_mu as 1-based values (v_mu(1), ..., v_mu(n)):
/// v_mu(r) = 1 + #{r' < r : mu_(r') <= mu_r} + #{r' > r : mu_(r') < mu_r}.
/// It is the minimal-length permutation w with mu_(w^(-1)) sorted weakly
/// increasing when entries are placed at their images.
pub fn v_mu(mu: &[i64]) -> Vec<usize> {
    let n = mu.len();
    (0..n)
        .map(|r| {
            let before = mu[..r].iter().filter(|&&x| x <= mu[r]).count();
            let after = mu[r + 1..].iter().filter(|&&x| x < mu[r]).count();
            1 + before + after
        })
        .collect()
}

/// The box statistic u_mu(r, c) for a box (r, c) of mu (r 1-based, c >= 1,
/// mu_r >= c): #{r' < r : mu_(r') < c} + #{r' > r : mu_(r') < c - 1}.
pub fn u_mu(mu: &[i64], r: usize, c: i64) -> usize {
    assert!((1..=mu.len()).contains(&r), "row {r} out of range");
    assert!(c >= 1 && mu[r - 1] >= c, "box ({r},{c}) not in the diagram");
    let before = mu[..r - 1].iter().filter(|&&x| x < c).count();
    let after = mu[r..].iter().filter(|&&x| x < c - 1).count();
    before + after
}

/// The eigenvalue of Y_i on E_mu: q^(-mu_i) t^(-v_mu(i)) t^((n+1)/2).
pub fn eigenvalue(mu: &[i64], i: usize) -> QTScalar {
    let n = mu.len() as i64;
    let v = v_mu(mu);
    QTScalar::q_pow(-mu[i - 1]) * QTScalar::s_pow(n + 1 - 2 * v[i - 1] as i64)
}

/// The evaluation of Y_i under the evaluate-at-mu homomorphism:
/// q^(-mu_i) t^(-(v_mu(i)-1) + (n-1)/2). Equal to [`eigenvalue`].
pub fn ev_yi(mu: &[i64], i: usize) -> QTScalar {
    eigenvalue(mu, i)
}

/// The evaluation of the ratio Y_a Y_b^(-1) at mu:
/// q^(mu_b - mu_a) t^(v_mu(b) - v_mu(a)). Always an integer power of t.
pub fn ev_y_ratio(mu: &[i64], a: usize, b: usize) -> QTScalar {
    let v = v_mu(mu);
    QTScalar::q_pow(mu[b - 1] - mu[a - 1])
        * QTScalar::t_pow(v[b - 1] as i64 - v[a - 1] as i64)
}

/// The scalar part of the intertwiner tau_i on E_nu:
/// t^(-1/2) (1 - t) / (1 - q^(nu_i - nu_(i+1)) t^(v_nu(i) - v_nu(i+1))).
pub fn tau_i_scalar(nu: &[i64], i: usize) -> QTScalar {
    let denom = QTScalar::one() - ev_y_ratio(nu, i + 1, i);
    QTScalar::s_pow(-1) * (QTScalar::one() - QTScalar::t_pow(1)) / denom
}

/// Apply the full intertwiner tau_i = T_i + (scalar part at nu) to f, where
/// f is a scalar multiple of E_nu. When nu_i > nu_(i+1) this sends E_nu to
/// t^(-1/2) E_(s_i nu); when nu_i = nu_(i+1) the result is zero.
pub fn apply_tau_i(i: usize, nu: &[i64], f: &LaurentPoly) -> Result<LaurentPoly, Error> {
    let c = tau_i_scalar(nu, i);
    Ok(apply_ti(i, f)?.add(&f.scale(&c)))
}

/// Closed form for E_(sign * eps_i) at rank n:
/// E_(eps_i) = x_i + (1-t)/(1 - q t^(n-i+1)) (x_1 + ... + x_(i-1)),
/// E_(-eps_i) = x_i^(-1) + (1-t)/(1 - q t^i) (x_(i+1)^(-1) + ... + x_n^(-1)).
pub fn e_eps_closed(n: usize, i: usize, sign: i8) -> LaurentPoly {
    assert!((1..=n).contains(&i), "index {i} out of range 1..={n}");
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    let one_minus_t = QTScalar::one() - QTScalar::t_pow(1);
    if sign == 1 {
        let coeff = &one_minus_t
            / &(QTScalar::one() - QTScalar::q_pow(1) * QTScalar::t_pow((n - i + 1) as i64));
        let mut out = LaurentPoly::x(n, i);
        for k in 1..i {
            out = out.add(&LaurentPoly::x(n, k).scale(&coeff));
        }
        out
    } else {
        let coeff =
            &one_minus_t / &(QTScalar::one() - QTScalar::q_pow(1) * QTScalar::t_pow(i as i64));
        let mut out = LaurentPoly::x_pow(n, i, -1);
        for k in i + 1..=n {
            out = out.add(&LaurentPoly::x_pow(n, k, -1).scale(&coeff));
        }
        out
    }
}

/// The composition sign * eps_j as an exponent vector of rank n.
pub fn eps_composition(n: usize, j: usize, sign: i8) -> Vec<i64> {
    assert!((1..=n).contains(&j), "index {j} out of range 1..={n}");
    let mut mu = vec![0i64; n];
    mu[j - 1] = sign as i64;
    mu
}

/// Serialized cache document.
#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    n: usize,
    entries: Vec<CacheEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    mu: Vec<i64>,
    poly: Vec<JsonTerm>,
}

const CACHE_VERSION: u32 = 1;

/// Memoizing store of Macdonald polynomials keyed by (n, mu).
///
/// Every insertion re-verifies monicity, homogeneity, and the eigenvalue
/// property, so a cache can never hold a wrong polynomial; a disk entry or
/// a recomputation that disagrees with a stored value is a fatal error.
/// Safe to share across threads.
#[derive(Debug, Default)]
pub struct ECache {
    inner: Mutex<HashMap<(usize, Vec<i64>), Arc<LaurentPoly>>>,
}

impl ECache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All cached compositions of rank n, sorted.
    pub fn compositions(&self, n: usize) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = self
            .inner
            .lock()
            .unwrap()
            .keys()
            .filter(|(kn, _)| *kn == n)
            .map(|(_, mu)| mu.clone())
            .collect();
        out.sort();
        out
    }

    fn get(&self, mu: &[i64]) -> Option<Arc<LaurentPoly>> {
        self.inner
            .lock()
            .unwrap()
            .get(&(mu.len(), mu.to_vec()))
            .map(Arc::clone)
    }

    /// Verify the defining properties of E_mu and store the polynomial.
    /// Divergence from an already-stored value is fatal.
    fn insert_checked(&self, mu: &[i64], poly: LaurentPoly) -> Result<Arc<LaurentPoly>, Error> {
        let n = mu.len();
        assert_eq!(poly.n(), n, "rank mismatch in cache insert");
        let degree: i64 = mu.iter().sum();
        if poly.degrees() != vec![degree] {
            return Err(Error::Oracle(format!(
                "candidate for E_{mu:?} is not homogeneous of degree {degree}"
            )));
        }
        if !poly.coeff(mu).is_one() {
            return Err(Error::Oracle(format!(
                "candidate for E_{mu:?} is not monic: leading coefficient {}",
                poly.coeff(mu)
            )));
        }
        for i in 1..=n {
            let lhs = apply_yi(i, &poly)?;
            let rhs = poly.scale(&eigenvalue(mu, i));
            if lhs != rhs {
                return Err(Error::Oracle(format!(
                    "candidate for E_{mu:?} fails the Y_{i} eigenvalue check"
                )));
            }
        }
        let mut guard = self.inner.lock().unwrap();
        let key = (n, mu.to_vec());
        if let Some(existing) = guard.get(&key) {
            if existing.as_ref() != &poly {
                return Err(Error::Oracle(format!(
                    "divergent recomputation of E_{mu:?}"
                )));
            }
            return Ok(Arc::clone(existing));
        }
        let arc = Arc::new(poly);
        guard.insert(key, Arc::clone(&arc));
        Ok(arc)
    }

    /// The Macdonald polynomial E_mu, memoized.
    pub fn e(&self, mu: &[i64]) -> Result<Arc<LaurentPoly>, Error> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::InvalidArgument("composition must be nonempty".into()));
        }
        if let Some(p) = self.get(mu) {
            return Ok(p);
        }
        let min = *mu.iter().min().unwrap();
        if min < 0 {
            // Shift into the nonnegative cone and divide back out.
            let m = -min;
            let shifted: Vec<i64> = mu.iter().map(|x| x + m).collect();
            let base = self.e(&shifted)?;
            let exp = vec![-m; n];
            let poly = base.mul_monomial(&exp, &QTScalar::one());
            return self.insert_checked(mu, poly);
        }
        self.build_nonnegative(mu)
    }

    /// Walk the boxes of a nonnegative mu, maintaining the running
    /// composition nu and the exact polynomial E_nu, caching every
    /// intermediate along the way. The box product is ordered column-major
    /// with the first box as the leftmost factor, so the walk applies boxes
    /// from the last back to the first.
    fn build_nonnegative(&self, mu: &[i64]) -> Result<Arc<LaurentPoly>, Error> {
        let n = mu.len();
        let mut nu = vec![0i64; n];
        let mut f = LaurentPoly::one(n);
        let mut result = self.insert_checked(&nu, f.clone())?;
        let max = *mu.iter().max().unwrap();
        for c in (1..=max).rev() {
            for r in (1..=n).rev() {
                if mu[r - 1] < c {
                    continue;
                }
                // tau_pi step: nu -> (nu_n + 1, nu_1, ..., nu_(n-1)), with
                // the renormalization t^(-((n-1)/2 - #{i <= n-1 : nu_i > nu_n})).
                let greater = nu[..n - 1].iter().filter(|&&x| x > nu[n - 1]).count();
                let factor = QTScalar::s_pow(-((n as i64 - 1) - 2 * greater as i64));
                f = apply_tau_pi(&f)?.scale(&factor);
                let mut rotated = vec![nu[n - 1] + 1];
                rotated.extend_from_slice(&nu[..n - 1]);
                nu = rotated;
                result = self.insert_checked(&nu, f.clone())?;
                // Chain of tau_i steps, each sending E_nu to E_(s_i nu)
                // after the t^(1/2) renormalization.
                for i in 1..=u_mu(mu, r, c) {
                    if nu[i - 1] <= nu[i] {
                        return Err(Error::Oracle(format!(
                            "intertwiner precondition violated at step {i} of box \
                             ({r},{c}) for mu = {mu:?}: running composition {nu:?}"
                        )));
                    }
                    f = apply_tau_i(i, &nu, &f)?.scale(&QTScalar::s_pow(1));
                    nu.swap(i - 1, i);
                    result = self.insert_checked(&nu, f.clone())?;
                }
            }
        }
        if nu != mu {
            return Err(Error::Oracle(format!(
                "box walk for mu = {mu:?} terminated at {nu:?}"
            )));
        }
        Ok(result)
    }

    /// Write all rank-n entries to a JSON cache document.
    pub fn save(&self, n: usize, path: &Path) -> Result<usize, Error> {
        let mut entries: Vec<CacheEntry> = {
            let guard = self.inner.lock().unwrap();
            guard
                .iter()
                .filter(|((kn, _), _)| *kn == n)
                .map(|((_, mu), poly)| CacheEntry {
                    mu: mu.clone(),
                    poly: poly.to_json_terms(),
                })
                .collect()
        };
        entries.sort_by(|a, b| a.mu.cmp(&b.mu));
        let file = CacheFile { version: CACHE_VERSION, n, entries };
        let count = file.entries.len();
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(count)
    }

    /// Load a JSON cache document, verifying every entry before insertion.
    /// Returns (n, number of entries loaded). Any bad entry aborts the load.
    pub fn load(&self, path: &Path) -> Result<(usize, usize), Error> {
        let text = fs::read_to_string(path)?;
        let file: CacheFile = serde_json::from_str(&text)?;
        if file.version != CACHE_VERSION {
            return Err(Error::Cache(format!(
                "unsupported cache version {} (expected {CACHE_VERSION})",
                file.version
            )));
        }
        for entry in &file.entries {
            if entry.mu.len() != file.n {
                return Err(Error::Cache(format!(
                    "entry mu = {:?} does not have rank {}",
                    entry.mu, file.n
                )));
            }
            let poly = LaurentPoly::from_json_terms(file.n, &entry.poly)?;
            self.insert_checked(&entry.mu, poly).map_err(|e| {
                Error::Cache(format!("rejected entry mu = {:?}: {e}", entry.mu))
            })?;
        }
        Ok((file.n, file.entries.len()))
    }
}

/// Read a cache document's header without verifying its entries:
/// (format version, rank, entry count).  Use [`ECache::load`] when the
/// entries themselves must be trusted.
pub fn cache_file_info(path: &Path) -> Result<(u32, usize, usize), Error> {
    let text = fs::read_to_string(path)?;
    let file: CacheFile = serde_json::from_str(&text)?;
    Ok((file.version, file.n, file.entries.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentPoly;

    fn sc(text: &str) -> QTScalar {
        text.parse().expect("test scalar must parse")
    }

    fn poly(n: usize, terms: &[(&[i64], &str)]) -> LaurentPoly {
        let mut p = LaurentPoly::zero(n);
        for (e, c) in terms {
            p.add_term(e.to_vec(), sc(c));
        }
        p
    }

    #[test]
    fn sorting_permutation_examples() {
        assert_eq!(v_mu(&[0, 0, 0]), vec![1, 2, 3]);
        assert_eq!(v_mu(&[2, 0, 1]), vec![3, 1, 2]);
        assert_eq!(v_mu(&[1, 1]), vec![1, 2]);
        assert_eq!(v_mu(&[1, 0]), vec![2, 1]);
        assert_eq!(v_mu(&[0, 1]), vec![1, 2]);
        assert_eq!(v_mu(&[2, 1]), vec![2, 1]);
    }

    #[test]
    fn sorting_permutation_is_minimal_sorter() {
        // Placing mu_r at position v(r) sorts mu weakly increasing, and v_mu
        // is the unique minimal-length permutation doing so.
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![1]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for slot in 0..n {
                    let mut q = p.clone();
                    q.insert(slot, n);
                    out.push(q);
                }
            }
            out
        }
        let inv_count = |w: &[usize]| {
            let mut c = 0;
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    if w[i] > w[j] {
                        c += 1;
                    }
                }
            }
            c
        };
        let sorts = |w: &[usize], mu: &[i64]| {
            let mut placed = vec![0i64; mu.len()];
            for (r, &x) in mu.iter().enumerate() {
                placed[w[r] - 1] = x;
            }
            placed.windows(2).all(|p| p[0] <= p[1])
        };
        for n in 1..=4usize {
            let all = perms(n);
            let grid: Vec<Vec<i64>> = (0..3i64.pow(n as u32))
                .map(|k| (0..n).map(|i| (k / 3i64.pow(i as u32)) % 3).collect())
                .collect();
            for mu in grid {
                let v = v_mu(&mu);
                assert!(sorts(&v, &mu), "v_mu does not sort {mu:?}");
                let best = all
                    .iter()
                    .filter(|w| sorts(w, &mu))
                    .min_by_key(|w| inv_count(w))
                    .unwrap();
                assert_eq!(
                    inv_count(&v),
                    inv_count(best),
                    "v_mu not minimal for {mu:?}"
                );
            }
        }
    }

    #[test]
    fn box_statistic_examples() {
        assert_eq!(u_mu(&[1], 1, 1), 0);
        assert_eq!(u_mu(&[0, 1], 2, 1), 1);
        assert_eq!(u_mu(&[2, 0, 1], 1, 1), 0);
        assert_eq!(u_mu(&[2, 0, 1], 3, 1), 1);
        assert_eq!(u_mu(&[2, 0, 1], 1, 2), 1);
        assert_eq!(u_mu(&[1, 2], 2, 2), 1);
    }

    #[test]
    fn small_macdonald_polynomials() {
        let cache = ECache::new();
        assert_eq!(*cache.e(&[0, 0]).unwrap(), LaurentPoly::one(2));
        assert_eq!(*cache.e(&[1, 0]).unwrap(), poly(2, &[(&[1, 0], "1")]));
        assert_eq!(
            *cache.e(&[0, 1]).unwrap(),
            poly(2, &[(&[0, 1], "1"), (&[1, 0], "(1-t)/(1-q*t)")])
        );
        assert_eq!(*cache.e(&[1, 1]).unwrap(), poly(2, &[(&[1, 1], "1")]));
        assert_eq!(
            *cache.e(&[2, 0]).unwrap(),
            poly(2, &[(&[2, 0], "1"), (&[1, 1], "q*(1-t)/(1-q*t)")])
        );
        assert_eq!(*cache.e(&[2, 1]).unwrap(), poly(2, &[(&[2, 1], "1")]));
        assert_eq!(
            *cache.e(&[1, 2]).unwrap(),
            poly(2, &[(&[1, 2], "1"), (&[2, 1], "(1-t)/(1-q*t)")])
        );
    }

    #[test]
    fn negative_entries_via_shift() {
        let cache = ECache::new();
        // E_(-1,0) = x_1^(-1) + (1-t)/(1-q*t) x_2^(-1), the closed form of
        // E_(-eps_1) at rank 2.
        assert_eq!(
            *cache.e(&[-1, 0]).unwrap(),
            poly(2, &[(&[-1, 0], "1"), (&[0, -1], "(1-t)/(1-q*t)")])
        );
        // E_(-eps_n) = x_n^(-1).
        assert_eq!(
            *cache.e(&[0, 0, -1]).unwrap(),
            poly(3, &[(&[0, 0, -1], "1")])
        );
    }

    #[test]
    fn closed_forms_match_construction() {
        let cache = ECache::new();
        for n in 2..=3usize {
            for i in 1..=n {
                for sign in [1i8, -1] {
                    let closed = e_eps_closed(n, i, sign);
                    let mu = eps_composition(n, i, sign);
                    assert_eq!(
                        *cache.e(&mu).unwrap(),
                        closed,
                        "closed form mismatch at n={n}, i={i}, sign={sign}"
                    );
                }
            }
        }
    }

    #[test]
    fn shift_covariance() {
        let cache = ECache::new();
        for mu in [vec![0i64, 1], vec![2, 0], vec![1, 0, 2]] {
            let shifted: Vec<i64> = mu.iter().map(|x| x + 1).collect();
            let ones = vec![1i64; mu.len()];
            let lhs = cache.e(&shifted).unwrap();
            let rhs = cache.e(&mu).unwrap().mul_monomial(&ones, &QTScalar::one());
            assert_eq!(*lhs, rhs, "shift covariance failed for {mu:?}");
        }
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(ev_y_ratio(&[0, 0], 1, 1), QTScalar::one());
        assert_eq!(ev_y_ratio(&[0, 0], 1, 2), sc("t"));
        assert_eq!(ev_y_ratio(&[1, 0], 1, 2), sc("1/(q*t)"));
        assert_eq!(ev_yi(&[0, 0, 0], 1), sc("t"));
        assert_eq!(ev_yi(&[0, 0, 0], 3), sc("1/t"));
        // Eigenvalue statement at mu = (1,0): Y_1 eigenvalue q^(-1) t^(-2) t^(3/2).
        assert_eq!(eigenvalue(&[1, 0], 1), sc("1/(q*s)"));
        assert_eq!(eigenvalue(&[1, 0], 2), sc("s"));
    }

    #[test]
    fn cache_round_trip_and_poisoning() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let cache = ECache::new();
        cache.e(&[0, 1]).unwrap();
        cache.e(&[2, 0]).unwrap();
        let saved = cache.save(2, &path).unwrap();
        assert!(saved >= 4, "intermediates should be cached too, got {saved}");

        let fresh = ECache::new();
        let (n, loaded) = fresh.load(&path).unwrap();
        assert_eq!(n, 2);
        assert_eq!(loaded, saved);
        assert_eq!(*fresh.e(&[0, 1]).unwrap(), *cache.e(&[0, 1]).unwrap());

        // A tampered polynomial must be rejected.
        let text = fs::read_to_string(&path).unwrap();
        let poisoned = text.replacen("\"1\"", "\"1+q\"", 1);
        assert_ne!(text, poisoned, "test setup: replacement must hit");
        fs::write(&path, poisoned).unwrap();
        assert!(ECache::new().load(&path).is_err());
    }
}
