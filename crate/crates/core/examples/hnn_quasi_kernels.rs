//! Quasi-kernel membership in `Λ[Sym(2), Sym(2)]`, compared with the
//! conjugation oracle for growing conjugator lengths.

use bsl::hnn::HnnParams;

fn main() {
    let p = HnnParams::symmetric(2, 2).unwrap();
    let nodes = p.enumerate_nodes(1).unwrap();
    println!("{} portraits of depth <= 1", nodes.len());
    for eps in [-1i8, 1] {
        let members = nodes.iter().filter(|g| p.k_eps_member(g, eps)).count();
        println!("K_{eps:+}: {members} members");
        for len in 1..=2 {
            let disagree = nodes
                .iter()
                .filter(|g| p.k_eps_member(g, eps) != p.k_eps_oracle(g, eps, len).unwrap())
                .count();
            println!("  oracle with conjugators of <= {len} syllables: {disagree} disagreements");
        }
    }

    let g = p
        .gen_path(&[(0, -1)], &p.parse_perm("(2 3)").unwrap())
        .unwrap();
    let moved = p.conjugate_by_tau(&g, 1).unwrap();
    println!(
        "t h[(0,-1);(2 3)] t^-1 = {}",
        bsl::words::print_word(&p.expand(&moved))
    );
}
