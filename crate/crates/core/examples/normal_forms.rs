//! Parsing, reduction, multiplication and classification in all three families.

use bsl::instance::{Group, InstanceConfig};
use bsl::permgroup::GroupSpec;
use bsl::tree::TreeGroup;

fn show<G: TreeGroup>(group: &G, words: &[&str]) {
    for w in words {
        let g = group.parse(w).unwrap();
        println!(
            "  {w:<32} -> {:<32} syllables {}, {:?}",
            group.render(&g),
            group.syllable_length(&g),
            group.classify(&g).unwrap()
        );
    }
    let (a, b) = (
        group.parse(words[0]).unwrap(),
        group.parse(words[1]).unwrap(),
    );
    println!(
        "  product of the first two: {}",
        group.render(&group.mul(&a, &b).unwrap())
    );
}

fn main() {
    let configs = [
        (
            InstanceConfig::amalgam(GroupSpec::symmetric(3), GroupSpec::symmetric(3)),
            vec![
                "g0[(0 1)] g1[(0 1)]",
                "g1[(0 2)] g0[(0 2)] g1[(0 1)]",
                "h0[1,2;(1 2)] g0[(0 1 2)]",
            ],
        ),
        (
            InstanceConfig::hnn(GroupSpec::symmetric(2), GroupSpec::symmetric(2)),
            vec!["t h[(0 1)] t^-1", "h[(0 1)] t", "t^-1 h[(2 3)] t"],
        ),
        (
            InstanceConfig::bs23(),
            vec!["t^-1 b^2 t", "b t b^-1 t^-1", "t b t^-1 b"],
        ),
    ];
    for (config, words) in configs {
        println!("{:?}", config.family);
        match config.build().unwrap().group {
            Group::Amalgam(g) => show(&g, &words),
            Group::Hnn(g) => show(&g, &words),
            Group::Bs23(g) => show(&g, &words),
        }
    }
}
