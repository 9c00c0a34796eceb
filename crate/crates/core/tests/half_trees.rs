//! Quasi-kernels as pointwise stabilizers of half-trees, checked against
//! the action on bounded balls.

mod common;

use bsl::amalgam::{Amalgam, GElem};
use bsl::tree::{Ball, TreeGroup};
use bsl::words::Token;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quasi_kernel(a: &Amalgam, j: u8) -> Vec<GElem> {
    let p = a.params();
    p.enumerate_h(0, 2)
        .into_iter()
        .filter(|h| p.quasi_kernel_member(h, j).unwrap())
        .collect()
}

/// Whether a vertex of the amalgam tree lies in `T_j`, the half-tree of
/// the edge `H` containing the vertex `G_j`.
fn in_half_tree(a: &Amalgam, j: u8, v: &[u32]) -> bool {
    let behind = v.first() == Some(&a.params().basepoint(0));
    behind == (j == 1)
}

#[test]
fn amalgam_quasi_kernels_commute_and_meet_trivially() {
    let a = common::amalgam_sym3();
    let p = a.params();
    let (k0, k1) = (quasi_kernel(&a, 0), quasi_kernel(&a, 1));
    assert!(k0.len() > 1 && k1.len() > 1);
    for x in &k0 {
        for y in &k1 {
            assert_eq!(p.mul(x, y).unwrap(), p.mul(y, x).unwrap());
        }
        if !x.portrait().is_identity() {
            assert!(!p.quasi_kernel_member(x, 1).unwrap());
        }
    }
}

#[test]
fn quasi_kernels_fix_their_half_trees() {
    let a = common::amalgam_sym3();
    let ball = Ball::new(&a, 4, 4).unwrap();
    for j in 0..2u8 {
        for h in quasi_kernel(&a, j) {
            let g = a.from_g(&h).unwrap();
            let images = ball.images(&a, &g).unwrap();
            let mut moved_within = None;
            for (v, w) in ball.vertices.iter().zip(&images) {
                if in_half_tree(&a, j, v) {
                    assert_eq!(v, w, "K_{j} element moves a vertex of T_{j}");
                } else if v != w {
                    moved_within = Some(moved_within.map_or(v.len(), |m: usize| m.min(v.len())));
                }
            }
            if let Some(d) = h.portrait().depth() {
                let reach = moved_within.expect("nontrivial elements move a vertex");
                assert!(
                    reach <= d + 2,
                    "depth {d} element first moves a vertex at {reach}"
                );
            }
        }
    }
}

/// Alternating products of nontrivial transversal letters, ending on side `j`.
fn transversal_sequences(a: &Amalgam, j: u8, len: usize) -> Vec<Vec<Token>> {
    let p = a.params();
    let mut out = vec![Vec::new()];
    for k in 0..len {
        let side = ((j as usize + len - 1 - k) % 2) as u8;
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Token>| {
                p.points_prime(side).into_iter().map(move |i| {
                    let mut w = prefix.clone();
                    w.push(p.g_token(side, p.transversal_rep(side, i)));
                    w
                })
            })
            .collect();
    }
    out
}

#[test]
fn conjugated_quasi_kernels_commute() {
    let a = common::amalgam_sym3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for j in 0..2u8 {
        let kernel: Vec<_> = quasi_kernel(&a, j)
            .iter()
            .filter(|h| !h.portrait().is_identity())
            .map(|h| a.from_g(h).unwrap())
            .collect();
        for len in 1..=2 {
            let seqs = transversal_sequences(&a, j, len);
            let conj: Vec<_> = seqs.iter().map(|s| a.from_tokens(s).unwrap()).collect();
            for (s, cs) in conj.iter().enumerate() {
                for ct in conj.iter().skip(s + 1) {
                    for _ in 0..10 {
                        let x = a
                            .mul(
                                &a.mul(cs, kernel.choose(&mut rng).unwrap()).unwrap(),
                                &a.inv(cs).unwrap(),
                            )
                            .unwrap();
                        let y = a
                            .mul(
                                &a.mul(ct, kernel.choose(&mut rng).unwrap()).unwrap(),
                                &a.inv(ct).unwrap(),
                            )
                            .unwrap();
                        assert_eq!(a.mul(&x, &y).unwrap(), a.mul(&y, &x).unwrap());
                        assert_ne!(x, y);
                    }
                }
            }
        }
    }
}

#[test]
fn stabilizer_labels_fix_the_far_half_tree() {
    for n in [2, 3] {
        let h = common::hnn_sym(n);
        let p = h.params();
        let ball = Ball::new(&h, 4, 4).unwrap();
        for eps in [-1i8, 1] {
            let branch = p.p(eps);
            for sigma in p.gamma_eps(eps).elements() {
                let g = p.gen_top(sigma).unwrap();
                assert!(p.lambda_bar_member(&g, -eps));
                let images = ball.images(&h, &h.from_node(g)).unwrap();
                for (v, w) in ball.vertices.iter().zip(&images) {
                    if v.first() == Some(&branch) {
                        assert_eq!(v, w);
                    }
                }
            }
        }
    }
}

#[test]
fn path_generators_fix_a_far_half_tree_unless_they_start_there() {
    let h = common::hnn_sym(2);
    let p = h.params();
    let ball = Ball::new(&h, 4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let len = rng.gen_range(1..=3);
        let steps = p.random_steps(&mut rng, len, None);
        let labels = p.gamma_eps(steps[len - 1].1).elements();
        let sigma = labels.iter().find(|s| !s.is_identity()).unwrap();
        let g = p.gen_path(&steps, sigma).unwrap();
        let images = ball.images(&h, &h.from_node(g.clone())).unwrap();
        for eps in [-1i8, 1] {
            let branch = p.p(-eps);
            let starts_there = p.step_point(steps[0].0, steps[0].1) == branch;
            let fixes = ball
                .vertices
                .iter()
                .zip(&images)
                .all(|(v, w)| v.first() != Some(&branch) || v == w);
            assert_eq!(p.lambda_bar_member(&g, eps), !starts_there);
            assert_eq!(fixes, !starts_there, "{steps:?}");
        }
    }
}
