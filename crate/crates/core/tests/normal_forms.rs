//! Normal forms are canonical: printing and re-reading is the identity, and
//! two words agree on the radius-6 ball exactly when their normal forms match.

mod common;

use bsl::tree::{Ball, TreeGroup};
use bsl::words::{invert_word, Generator, Token};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reparse_is_identity<G: TreeGroup>(group: &G, g: &G::Elem) -> Result<(), TestCaseError> {
    let again = group.parse(&group.render(g)).unwrap();
    prop_assert_eq!(&again, g);
    Ok(())
}

/// Relators as words equal to the identity.
fn relator(lhs: &[Token], rhs: &[Token]) -> Vec<Token> {
    lhs.iter().cloned().chain(invert_word(rhs)).collect()
}

fn uniqueness<G: TreeGroup>(
    group: &G,
    ball: &Ball,
    pairs: &[(Vec<Token>, Vec<Token>)],
) -> Result<(usize, usize), TestCaseError> {
    let (mut equal, mut distinct) = (0, 0);
    for (u, v) in pairs {
        let (x, y) = (
            group.parse(&bsl::words::print_word(u)).unwrap(),
            group.parse(&bsl::words::print_word(v)).unwrap(),
        );
        if group.syllable_length(&x) > 3 || group.syllable_length(&y) > 3 {
            continue;
        }
        let same_action = ball.images(group, &x).unwrap() == ball.images(group, &y).unwrap();
        prop_assert_eq!(
            same_action,
            x == y,
            "{} vs {}",
            group.render(&x),
            group.render(&y)
        );
        if x == y {
            equal += 1
        } else {
            distinct += 1
        }
    }
    Ok((equal, distinct))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_forms_reparse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::amalgam_sym3();
        reparse_is_identity(&a, &a.from_tokens(&a.params().random_word(&mut rng, 6, 3)).unwrap())?;
        let h = common::hnn_sym(3);
        reparse_is_identity(&h, &h.from_tokens(&h.params().random_word(&mut rng, 6, 3)).unwrap())?;
        let b = common::bs23();
        reparse_is_identity(&b, &b.from_tokens(&common::bs23_word(&mut rng, 8)).unwrap())?;
    }
}

#[test]
fn amalgam_normal_forms_are_unique() {
    let a = common::amalgam_sym3();
    let p = a.params();
    let relations = p.relation_instances(2);
    let ball = Ball::new(&a, 6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pairs: Vec<_> = (0..300)
        .map(|_| {
            let u = p.random_word(&mut rng, 4, 2);
            let v = if rng.gen_bool(0.5) {
                let r = relations.choose(&mut rng).unwrap();
                common::splice(&mut rng, &u, &relator(&r.lhs, &r.rhs))
            } else {
                p.random_word(&mut rng, 4, 2)
            };
            (u, v)
        })
        .collect();
    let (equal, distinct) = uniqueness(&a, &ball, &pairs).unwrap();
    assert!(
        equal > 50 && distinct > 50,
        "{equal} equal, {distinct} distinct"
    );
}

#[test]
fn hnn_normal_forms_are_unique() {
    let h = common::hnn_sym(2);
    let p = h.params();
    let relations = p.relation_instances(2);
    let ball = Ball::new(&h, 6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let pairs: Vec<_> = (0..300)
        .map(|_| {
            let u = p.random_word(&mut rng, 4, 2);
            let v = if rng.gen_bool(0.5) {
                let r = relations.choose(&mut rng).unwrap();
                common::splice(&mut rng, &u, &relator(&r.lhs_word(), &r.rhs))
            } else {
                p.random_word(&mut rng, 4, 2)
            };
            (u, v)
        })
        .collect();
    let (equal, distinct) = uniqueness(&h, &ball, &pairs).unwrap();
    assert!(
        equal > 50 && distinct > 50,
        "{equal} equal, {distinct} distinct"
    );
}

#[test]
fn bs23_normal_forms_are_unique() {
    let b = common::bs23();
    let ball = Ball::new(&b, 6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let pairs: Vec<_> = (0..300)
        .map(|_| {
            let u = common::bs23_word(&mut rng, 5);
            let v = if rng.gen_bool(0.5) {
                let k = rng.gen_range(-3i64..=3);
                let lhs = [
                    Token::new(Generator::T, -1),
                    Token::new(Generator::B, 2 * k),
                    Token::new(Generator::T, 1),
                ];
                common::splice(
                    &mut rng,
                    &u,
                    &relator(&lhs, &[Token::new(Generator::B, 3 * k)]),
                )
            } else {
                common::bs23_word(&mut rng, 5)
            };
            (u, v)
        })
        .collect();
    let (equal, distinct) = uniqueness(&b, &ball, &pairs).unwrap();
    assert!(
        equal > 50 && distinct > 50,
        "{equal} equal, {distinct} distinct"
    );
}
