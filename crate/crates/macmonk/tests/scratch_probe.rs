use macmonk::macdonald::ECache;
use macmonk::monk::{monk_expand, opform_terms, Conventions, MonkRule};
use macmonk::oracle::expand_in_e;

#[test]
fn probe() {
    let cache = ECache::new();
    let conv = Conventions::default();
    let mu = vec![2i64, 1, 0];
    for j in [2usize, 3] {
        let e_mu = cache.e(&mu).unwrap();
        let product = MonkRule::X.multiplier(3, j).mul(&e_mu);
        let truth = expand_in_e(&product, &cache).unwrap();
        println!("== j = {j} ==");
        println!("true expansion:");
        for (nu, c) in truth.terms() {
            println!("  E{nu:?}: {c}");
        }
        let direct = monk_expand(MonkRule::X, &mu, j, &conv).unwrap();
        println!("combinatorial terms:");
        for t in &direct.terms {
            println!("  C={:?} -> E{:?}: {}", t.c, t.target, t.coeff);
        }
        let op = opform_terms(MonkRule::X, &mu, j, &conv, &cache).unwrap();
        println!("operator terms:");
        for t in &op.terms {
            println!("  C={:?} -> E{:?}: {}", t.c, t.target, t.coeff);
        }
    }
}
