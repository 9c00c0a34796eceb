//! The defining relations of `G[Sym(3), Sym(3)]` under portrait arithmetic,
//! and the coset decomposition of a vertex-group element.

use bsl::amalgam::AmalgamParams;
use bsl::words::parse_word;

fn main() {
    let p = AmalgamParams::symmetric(3, 3).unwrap();
    for depth in 1..=3 {
        let instances = p.relation_instances(depth);
        let failed = instances
            .iter()
            .filter(|r| !p.relation_holds(r).unwrap())
            .count();
        println!(
            "paths <= {depth}: {} relation instances, {failed} failed",
            instances.len()
        );
    }

    let g = p
        .eval_on_side(&parse_word("g0[(0 1 2)] * h0[1,2;(1 2)]").unwrap(), 0)
        .unwrap();
    let (coset, h) = p.coset_decompose(&g);
    println!("g0[(0 1 2)] h0[1,2;(1 2)] lies in the coset of index {coset:?}");
    println!("  H part: {}", bsl::words::print_word(&p.expand(&h)));
}
