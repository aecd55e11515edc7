//! Classify every exponent quadruple with entries up to 4 and tally branches.

use std::collections::BTreeMap;

use fermat_pdde::classify;

fn main() {
    for q in [(2, 2, 2, 2), (2, 1, 2, 1), (2, 2, 2, 1), (3, 1, 2, 1), (1, 3, 1, 3), (4, 1, 1, 3), (3, 1, 1, 2)] {
        let v = classify(q.0, q.1, q.2, q.3);
        println!("{q:?} -> {v}  [{}]", v.clause());
    }
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for n1 in 1..=4 {
        for m1 in 1..=4 {
            for n2 in 1..=4 {
                for m2 in 1..=4 {
                    *tally.entry(classify(n1, m1, n2, m2).to_string()).or_default() += 1;
                }
            }
        }
    }
    for (verdict, count) in tally {
        println!("{verdict:24} {count}");
    }
}
