//! Finitely supported labelled rooted trees.
//!
//! A portrait is a root label (a permutation of the child slots) together
//! with a sparse map from child slots to sub-portraits. It encodes a tree
//! automorphism acting on rooted paths by
//! `g(i·w) = label(i) · child(label(i))(w)`, so children are keyed by the
//! slot they land in. Identity sub-portraits are never stored, which makes
//! structural equality coincide with equality of the automorphisms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::Perm;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Portrait {
    label: Perm,
    children: Vec<(u32, Portrait)>,
}

impl Portrait {
    pub fn identity(degree: usize) -> Self {
        Portrait {
            label: Perm::identity(degree),
            children: Vec::new(),
        }
    }

    pub fn top(label: Perm) -> Self {
        Portrait {
            label,
            children: Vec::new(),
        }
    }

    /// Builds a portrait from raw parts, pruning identity children and
    /// sorting the rest.
    pub fn from_parts(label: Perm, children: impl IntoIterator<Item = (u32, Portrait)>) -> Self {
        let mut children: Vec<(u32, Portrait)> = children
            .into_iter()
            .filter(|(_, c)| !c.is_identity())
            .collect();
        children.sort_by_key(|(k, _)| *k);
        children.dedup_by_key(|(k, _)| *k);
        Portrait { label, children }
    }

    /// A chain of identity labels along `path` ending in `label`.
    /// `degree_at(d)` gives the label degree of a node at depth `d`.
    pub fn nested(path: &[u32], label: Perm, degree_at: impl Fn(usize) -> usize) -> Self {
        let mut node = Portrait::top(label);
        for (d, &slot) in path.iter().enumerate().rev() {
            node = Portrait::from_parts(Perm::identity(degree_at(d)), [(slot, node)]);
        }
        node
    }

    pub fn label(&self) -> &Perm {
        &self.label
    }

    pub fn children(&self) -> &[(u32, Portrait)] {
        &self.children
    }

    pub fn child(&self, slot: u32) -> Option<&Portrait> {
        self.children
            .binary_search_by_key(&slot, |(k, _)| *k)
            .ok()
            .map(|pos| &self.children[pos].1)
    }

    pub fn is_identity(&self) -> bool {
        self.children.is_empty() && self.label.is_identity()
    }

    pub fn mul(&self, rhs: &Portrait) -> Portrait {
        let label = &self.label * &rhs.label;
        let mut children: BTreeMap<u32, Portrait> = BTreeMap::new();
        for (k, c) in &self.children {
            children.insert(*k, c.clone());
        }
        for (k, c) in &rhs.children {
            let target = self.label.apply(*k);
            let merged = match children.remove(&target) {
                Some(left) => left.mul(c),
                None => c.clone(),
            };
            children.insert(target, merged);
        }
        Portrait::from_parts(label, children)
    }

    pub fn inverse(&self) -> Portrait {
        let inv = self.label.inverse();
        let children: Vec<_> = self
            .children
            .iter()
            .map(|(k, c)| (inv.apply(*k), c.inverse()))
            .collect();
        Portrait::from_parts(inv, children)
    }

    pub fn conjugate(&self, by: &Portrait) -> Portrait {
        by.mul(self).mul(&by.inverse())
    }

    /// Depth of the deepest non-identity label; `None` for the identity.
    pub fn depth(&self) -> Option<usize> {
        let below = self
            .children
            .iter()
            .filter_map(|(_, c)| c.depth())
            .max()
            .map(|d| d + 1);
        match (self.label.is_identity(), below) {
            (true, None) => None,
            (false, None) => Some(0),
            (_, Some(d)) => Some(d),
        }
    }

    /// Re-roots along an edge: the child at `down` becomes the new root and
    /// the old root, minus that child, hangs below it at slot `up`.
    pub fn reroot(&self, down: u32, up: u32, new_root_degree: usize) -> Portrait {
        let former_root = Portrait::from_parts(
            self.label.clone(),
            self.children.iter().filter(|(k, _)| *k != down).cloned(),
        );
        let (label, mut children) = match self.child(down) {
            Some(c) => (c.label.clone(), c.children.clone()),
            None => (Perm::identity(new_root_degree), Vec::new()),
        };
        children.retain(|(k, _)| *k != up);
        debug_assert!(self.child(down).and_then(|c| c.child(up)).is_none());
        children.push((up, former_root));
        Portrait::from_parts(label, children)
    }

    /// Removes the child at `slot`, returning it and the remainder.
    pub fn split_child(&self, slot: u32) -> (Option<Portrait>, Portrait) {
        let rest = Portrait::from_parts(
            self.label.clone(),
            self.children.iter().filter(|(k, _)| *k != slot).cloned(),
        );
        (self.child(slot).cloned(), rest)
    }

    /// Acts on a rooted path of slots.
    pub fn act_on_path(&self, path: &[u32]) -> Vec<u32> {
        let mut out = Vec::with_capacity(path.len());
        let mut node = Some(self);
        for &x in path {
            match node {
                Some(n) => {
                    let y = n.label.apply(x);
                    out.push(y);
                    node = n.child(y);
                }
                None => out.push(x),
            }
        }
        out
    }

    /// Every non-identity label with the path to its node, parents first.
    pub fn nodes(&self) -> Vec<(Vec<u32>, &Perm)> {
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<u32>, &Portrait)> = vec![(Vec::new(), self)];
        while let Some((path, node)) = stack.pop() {
            if !node.label.is_identity() {
                out.push((path.clone(), &node.label));
            }
            for (k, c) in node.children.iter().rev() {
                let mut p = path.clone();
                p.push(*k);
                stack.push((p, c));
            }
        }
        out
    }

    pub fn to_json(&self) -> PortraitJson {
        PortraitJson {
            top: self.label.to_string(),
            children: self
                .children
                .iter()
                .map(|(k, c)| (k.to_string(), c.to_json()))
                .collect(),
        }
    }

    /// Rebuilds a portrait from JSON; `degree_at(d)` gives label degrees.
    pub fn from_json(json: &PortraitJson, degree_at: &dyn Fn(usize) -> usize) -> Result<Self> {
        Self::from_json_at(json, 0, degree_at)
    }

    fn from_json_at(
        json: &PortraitJson,
        depth: usize,
        degree_at: &dyn Fn(usize) -> usize,
    ) -> Result<Self> {
        let label = Perm::parse(&json.top, degree_at(depth))?;
        let children = json
            .children
            .iter()
            .map(|(k, c)| {
                let slot = k
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidPath(format!("child key {k:?} is not an index")))?;
                Ok((slot, Self::from_json_at(c, depth + 1, degree_at)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Portrait::from_parts(label, children))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortraitJson {
    pub top: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<String, PortraitJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DEG: usize = 3;

    fn perm(text: &str) -> Perm {
        Perm::parse(text, DEG).unwrap()
    }

    fn arb_perm() -> impl Strategy<Value = Perm> {
        Just(vec![0u32, 1, 2])
            .prop_shuffle()
            .prop_map(|v| Perm::from_images(v).unwrap())
    }

    fn arb_portrait() -> impl Strategy<Value = Portrait> {
        let leaf = arb_perm().prop_map(Portrait::top);
        leaf.prop_recursive(3, 24, 3, |inner| {
            (
                arb_perm(),
                proptest::collection::vec((0u32..3, inner), 0..3),
            )
                .prop_map(|(l, cs)| Portrait::from_parts(l, cs))
        })
    }

    fn paths(depth: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for _ in 0..depth {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..DEG as u32).map(move |k| {
                        let mut q = p.clone();
                        q.push(k);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn nested_builds_a_chain() {
        let p = Portrait::nested(&[2, 1], perm("(0 1)"), |_| DEG);
        assert_eq!(p.depth(), Some(2));
        assert_eq!(p.act_on_path(&[2, 1, 0]), vec![2, 1, 1]);
        assert_eq!(p.act_on_path(&[1, 1, 0]), vec![1, 1, 0]);
        assert!(Portrait::nested(&[2, 1], Perm::identity(DEG), |_| DEG).is_identity());
    }

    #[test]
    fn json_round_trip() {
        let p = Portrait::from_parts(perm("(1 2)"), [(0, Portrait::top(perm("(0 1 2)")))]);
        let json = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"top":"(1 2)","children":{"0":{"top":"(0 1 2)"}}}"#
        );
        let back: PortraitJson = serde_json::from_str(&json).unwrap();
        assert_eq!(Portrait::from_json(&back, &|_| DEG).unwrap(), p);
    }

    #[test]
    fn reroot_swaps_the_roles_of_an_edge() {
        let p = Portrait::from_parts(
            perm("(1 2)"),
            [(
                0,
                Portrait::from_parts(perm("(0 2)"), [(2, Portrait::top(perm("(0 1)")))]),
            )],
        );
        let q = p.reroot(0, 1, DEG);
        assert_eq!(q.label(), &perm("(0 2)"));
        assert_eq!(q.child(1).unwrap().label(), &perm("(1 2)"));
        assert_eq!(q.reroot(1, 0, DEG), p);
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_portrait(), b in arb_portrait(), c in arb_portrait()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn inverse_cancels(a in arb_portrait()) {
            prop_assert!(a.mul(&a.inverse()).is_identity());
            prop_assert!(a.inverse().mul(&a).is_identity());
        }

        #[test]
        fn action_is_a_left_action(a in arb_portrait(), b in arb_portrait()) {
            let ab = a.mul(&b);
            for path in paths(4) {
                prop_assert_eq!(ab.act_on_path(&path), a.act_on_path(&b.act_on_path(&path)));
            }
        }

        #[test]
        fn structural_equality_is_action_equality(a in arb_portrait(), b in arb_portrait()) {
            let same = paths(5).iter().all(|p| a.act_on_path(p) == b.act_on_path(p));
            prop_assert_eq!(same, a == b);
        }
    }
}
