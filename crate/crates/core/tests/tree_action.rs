//! Properties of the action on the Bass-Serre tree, for all three families.

mod common;

use bsl::tree::{Ball, TreeGroup};
use bsl::words::Token;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn composition_holds<G: TreeGroup>(group: &G, words: [Vec<Token>; 3]) -> Result<(), TestCaseError> {
    let [g, h, v] = words.map(|w| group.reduce_tokens(&w));
    let v = group.act(&v, &[]).unwrap();
    let gh = group.mul(&g, &h).unwrap();
    let once = group.act(&gh, &v).unwrap();
    let twice = group.act(&g, &group.act(&h, &v).unwrap()).unwrap();
    prop_assert_eq!(once, twice);
    Ok(())
}

/// Parses a token word through the generic interface.
trait ReduceTokens: TreeGroup {
    fn reduce_tokens(&self, w: &[Token]) -> Self::Elem {
        self.parse(&bsl::words::print_word(w)).unwrap()
    }
}

impl<G: TreeGroup> ReduceTokens for G {}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn amalgam_action_composes(seed in any::<u64>()) {
        let a = common::amalgam_sym3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = || a.params().random_word(&mut rng, 5, 2);
        composition_holds(&a, [w(), w(), w()])?;
    }

    #[test]
    fn hnn_action_composes(seed in any::<u64>()) {
        let h = common::hnn_sym(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = || h.params().random_word(&mut rng, 5, 2);
        composition_holds(&h, [w(), w(), w()])?;
    }

    #[test]
    fn bs23_action_composes(seed in any::<u64>()) {
        let b = common::bs23();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = || common::bs23_word(&mut rng, 6);
        composition_holds(&b, [w(), w(), w()])?;
    }
}

/// No element swaps the two ends of an edge, so fixing an edge is the same
/// as fixing both endpoints.
fn no_inversions<G: TreeGroup>(group: &G, words: &[Vec<Token>]) {
    let ball = Ball::new(group, 4, 4).unwrap();
    for w in words {
        let g = group.reduce_tokens(w);
        let images = ball.images(group, &g).unwrap();
        for (k, parent) in ball.parent.iter().enumerate() {
            if let Some(p) = *parent {
                let (v, u) = (&ball.vertices[k], &ball.vertices[p]);
                assert!(
                    !(&images[k] == u && &images[p] == v),
                    "{} inverts an edge",
                    group.render(&g)
                );
            }
        }
    }
}

#[test]
fn edges_are_never_inverted() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = common::amalgam_sym3();
    let words: Vec<_> = (0..100)
        .map(|_| a.params().random_word(&mut rng, 5, 2))
        .collect();
    no_inversions(&a, &words);
    let h = common::hnn_sym(2);
    let words: Vec<_> = (0..100)
        .map(|_| h.params().random_word(&mut rng, 5, 2))
        .collect();
    no_inversions(&h, &words);
    let b = common::bs23();
    let words: Vec<_> = (0..100).map(|_| common::bs23_word(&mut rng, 6)).collect();
    no_inversions(&b, &words);
}

fn degree(ball: &Ball, k: usize) -> usize {
    ball.children[k].len() + usize::from(ball.parent[k].is_some())
}

#[test]
fn ball_degrees_match_index_counts() {
    let a = common::amalgam_sym3();
    let ball = Ball::new(&a, 4, 4).unwrap();
    for k in 0..ball.len() {
        if ball.depth(k) < 4 {
            let side = (ball.depth(k) % 2) as u8;
            assert_eq!(degree(&ball, k), a.params().degree(side));
        }
    }
    let amalgam_32 =
        bsl::amalgam::Amalgam::new(bsl::amalgam::AmalgamParams::symmetric(3, 2).unwrap());
    let ball = Ball::new(&amalgam_32, 3, 3).unwrap();
    assert_eq!(ball.len(), 1 + 3 + 3 + 6);

    let h = bsl::hnn::Hnn::new(bsl::hnn::HnnParams::symmetric(2, 3).unwrap());
    let ball = Ball::new(&h, 3, 3).unwrap();
    for k in 0..ball.len() {
        if ball.depth(k) < 3 {
            assert_eq!(degree(&ball, k), 5);
        }
    }

    let b = common::bs23();
    let ball = Ball::new(&b, 3, 3).unwrap();
    for k in 0..ball.len() {
        if ball.depth(k) < 3 {
            assert_eq!(degree(&ball, k), 5);
        }
    }
}
