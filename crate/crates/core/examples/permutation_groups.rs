//! Orbits, stabilizers, transversals and abelianizations of small groups.

use bsl::permgroup::{Perm, PermGroup};

fn describe(group: &PermGroup) {
    let basepoint = group.basepoint();
    let stab = group.stabilizer(basepoint);
    println!(
        "{} on {} points, order {}",
        group.name,
        group.degree(),
        group.order()
    );
    println!(
        "  orbit of {basepoint}: {:?}, stabilizer order {}",
        group.orbit(basepoint),
        stab.order()
    );
    println!(
        "  transitive {}, 2-transitive {}, generated by stabilizers {}",
        group.is_transitive(),
        group.is_2_transitive(),
        group.is_generated_by_stabilizers()
    );
    let reps: Vec<String> = group
        .transversal()
        .unwrap()
        .iter()
        .map(Perm::to_string)
        .collect();
    println!("  transversal {reps:?}");
    println!(
        "  abelianization of order {}",
        group.abelianization().order()
    );
}

fn main() {
    describe(&PermGroup::symmetric(2));
    describe(&PermGroup::symmetric(3));
    describe(&PermGroup::cyclic(3));
    describe(&PermGroup::symmetric(4));
}
