#![allow(dead_code)]

use bsl::amalgam::{Amalgam, AmalgamParams};
use bsl::bs23::Bs23;
use bsl::hnn::{Hnn, HnnParams};
use bsl::words::{Generator, Token};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn amalgam_sym3() -> Amalgam {
    Amalgam::new(AmalgamParams::symmetric(3, 3).unwrap())
}

pub fn hnn_sym(n: usize) -> Hnn {
    Hnn::new(HnnParams::symmetric(n, n).unwrap())
}

pub fn bs23() -> Bs23 {
    Bs23
}

pub fn bs23_word(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Token> {
    (0..rng.gen_range(0..=max_len))
        .map(|_| {
            if rng.gen_bool(0.4) {
                Token::new(Generator::T, if rng.gen_bool(0.5) { 1 } else { -1 })
            } else {
                Token::new(Generator::B, rng.gen_range(-4..=4))
            }
        })
        .collect()
}

/// `word` with `insert` spliced in at a random position.
pub fn splice(rng: &mut ChaCha8Rng, word: &[Token], insert: &[Token]) -> Vec<Token> {
    let at = rng.gen_range(0..=word.len());
    word[..at]
        .iter()
        .chain(insert)
        .chain(&word[at..])
        .cloned()
        .collect()
}
