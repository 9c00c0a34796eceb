//! The homomorphisms onto the abelianized pieces: `θ` on the amalgam and
//! `η` onto the wreath product over `ℤ` for the HNN extension.

use bsl::amalgam::AmalgamParams;
use bsl::hnn::HnnParams;
use bsl::words::{parse_word, print_word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let p = AmalgamParams::symmetric(3, 3).unwrap();
    for w in [
        "g0[(0 1)]",
        "g0[(0 1 2)]",
        "h0[1;(1 2)]",
        "g0[(0 1)] g1[(0 1)]",
    ] {
        println!(
            "theta({w}) = {:?}",
            p.theta(&parse_word(w).unwrap()).unwrap()
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for w in p.sample_n_generators(&mut rng, 2).iter().take(3) {
        println!("N-generator {} -> {:?}", print_word(w), p.theta(w).unwrap());
    }

    let q = HnnParams::symmetric(2, 3).unwrap();
    for w in ["t", "h[(0 1)]", "t h[(0 1)] t^-1", "h[(1,1);(3 4)]"] {
        println!("eta({w}) = {:?}", q.eta(&parse_word(w).unwrap()).unwrap());
    }
    for (set, w) in q.sample_xi_generators(&mut rng, 2).iter().take(4) {
        println!(
            "Xi-generator (family {set}) {} -> {:?}",
            print_word(w),
            q.eta(w).unwrap()
        );
    }
}
