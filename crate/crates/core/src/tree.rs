//! Bounded pieces of a Bass-Serre tree and what a group element does to them.
//!
//! Vertices are rooted paths: the root is the base vertex and each step
//! names a child slot. Because paths are canonical, distances and lowest
//! common ancestors come straight from common prefixes.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::{Debug, Write as _};
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = Vec<u32>;

pub const DEFAULT_RADIUS_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Elliptic { witness: Vertex },
    Hyperbolic,
}

/// A group acting on a rooted Bass-Serre tree.
///
/// Elements double as cursors: `descend(w, depth, step)` multiplies `w` by
/// the letters of one tree step, so the image of a whole ball is computed
/// one edge at a time.
pub trait TreeGroup: Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn is_identity(&self, a: &Self::Elem) -> bool;
    fn syllable_length(&self, a: &Self::Elem) -> usize;
    fn classify(&self, a: &Self::Elem) -> Result<Classification>;

    fn child_steps(&self, v: &[u32]) -> Vec<u32>;
    fn descend(&self, w: &Self::Elem, depth: usize, step: u32) -> Result<Self::Elem>;
    /// The vertex `w · v₀` where `v₀` is a base vertex at the given depth parity.
    fn coset_vertex(&self, w: &Self::Elem, depth: usize) -> Vertex;

    fn render(&self, a: &Self::Elem) -> String;
    fn render_vertex(&self, v: &[u32]) -> String;
    fn parse(&self, text: &str) -> Result<Self::Elem>;

    /// The element whose coset is `v`.
    fn vertex_element(&self, v: &[u32]) -> Result<Self::Elem> {
        v.iter()
            .enumerate()
            .try_fold(self.identity(), |w, (d, &s)| self.descend(&w, d, s))
    }

    fn act(&self, g: &Self::Elem, v: &[u32]) -> Result<Vertex> {
        let w = v
            .iter()
            .enumerate()
            .try_fold(g.clone(), |w, (d, &s)| self.descend(&w, d, s))?;
        Ok(self.coset_vertex(&w, v.len()))
    }
}

pub fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub fn distance(a: &[u32], b: &[u32]) -> usize {
    a.len() + b.len() - 2 * common_prefix(a, b)
}

/// Vertices of the geodesic from `a` to `b`, both included.
pub fn geodesic(a: &[u32], b: &[u32]) -> Vec<Vertex> {
    let m = common_prefix(a, b);
    let mut out: Vec<Vertex> = (m..=a.len()).rev().map(|k| a[..k].to_vec()).collect();
    out.extend((m + 1..=b.len()).map(|k| b[..k].to_vec()));
    out
}

/// The ball of radius `radius` around the root.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: usize,
    pub vertices: Vec<Vertex>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    index: HashMap<Vertex, usize>,
}

impl Ball {
    pub fn new<G: TreeGroup + ?Sized>(group: &G, radius: usize, cap: usize) -> Result<Self> {
        if radius > cap {
            return Err(Error::CapExceeded {
                what: "ball radius".into(),
                value: radius,
                cap,
            });
        }
        let mut ball = Ball {
            radius,
            vertices: vec![Vec::new()],
            parent: vec![None],
            children: vec![Vec::new()],
            index: HashMap::from([(Vec::new(), 0)]),
        };
        let mut k = 0;
        while k < ball.vertices.len() {
            let v = ball.vertices[k].clone();
            if v.len() < radius {
                for s in group.child_steps(&v) {
                    let mut c = v.clone();
                    c.push(s);
                    let id = ball.vertices.len();
                    ball.index.insert(c.clone(), id);
                    ball.vertices.push(c);
                    ball.parent.push(Some(k));
                    ball.children.push(Vec::new());
                    ball.children[k].push(id);
                }
            }
            k += 1;
        }
        Ok(ball)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &[u32]) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn depth(&self, k: usize) -> usize {
        self.vertices[k].len()
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent[k]
            .into_iter()
            .chain(self.children[k].iter().copied())
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    /// Images of every ball vertex under `g`, in ball order.
    pub fn images<G: TreeGroup + ?Sized>(&self, group: &G, g: &G::Elem) -> Result<Vec<Vertex>> {
        let mut words: Vec<Option<G::Elem>> = vec![None; self.len()];
        words[0] = Some(g.clone());
        let mut level: Vec<usize> = vec![0];
        while !level.is_empty() {
            let next: Vec<(usize, G::Elem)> = level
                .par_iter()
                .flat_map_iter(|&k| {
                    let w = words[k].clone().expect("parent word computed first");
                    let depth = self.depth(k);
                    self.children[k]
                        .iter()
                        .map(move |&c| {
                            let step = *self.vertices[c].last().expect("child has a step");
                            group.descend(&w, depth, step).map(|x| (c, x))
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Result<Vec<_>>>()?;
            level = next.iter().map(|(c, _)| *c).collect();
            for (c, w) in next {
                words[c] = Some(w);
            }
        }
        Ok(words
            .par_iter()
            .enumerate()
            .map(|(k, w)| {
                group.coset_vertex(w.as_ref().expect("all words computed"), self.depth(k))
            })
            .collect())
    }

    pub fn fixed<G: TreeGroup + ?Sized>(&self, group: &G, g: &G::Elem) -> Result<Vec<bool>> {
        let images = self.images(group, g)?;
        Ok(images
            .iter()
            .zip(&self.vertices)
            .map(|(a, b)| a == b)
            .collect())
    }

    pub fn to_dot(&self, labels: &dyn Fn(&[u32]) -> String, marks: Option<&BallMarks>) -> String {
        let mut out = String::from("graph ball {\n  node [shape=circle, fontsize=9];\n");
        for (k, v) in self.vertices.iter().enumerate() {
            let mut attrs = format!("label=\"{}\"", labels(v).replace('"', "'"));
            if let Some(m) = marks {
                let color = if m.psi.contains(&k) {
                    "blue"
                } else if m.fixed[k] {
                    "green"
                } else {
                    "red"
                };
                let _ = write!(attrs, ", color={color}");
                if m.hull.contains(&k) {
                    attrs.push_str(", style=bold, penwidth=2");
                }
            }
            let _ = writeln!(out, "  v{k} [{attrs}];");
        }
        for (k, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                let _ = writeln!(out, "  v{p} -- v{k};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Per-vertex colouring for DOT output.
#[derive(Clone, Debug, Default)]
pub struct BallMarks {
    pub fixed: Vec<bool>,
    pub psi: HashSet<usize>,
    pub hull: HashSet<usize>,
}

/// A point of the twice-subdivided tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefinedPoint {
    Vertex {
        at: Vertex,
    },
    /// `quarter` quarters of the way from `lower` to `upper`; `lower < upper`.
    OnEdge {
        lower: Vertex,
        upper: Vertex,
        quarter: u8,
    },
}

impl RefinedPoint {
    /// Normalizes an edge position given from either endpoint.
    pub fn on_edge(from: Vertex, to: Vertex, quarter: u8) -> Self {
        if from < to {
            RefinedPoint::OnEdge {
                lower: from,
                upper: to,
                quarter,
            }
        } else {
            RefinedPoint::OnEdge {
                lower: to,
                upper: from,
                quarter: 4 - quarter,
            }
        }
    }

    pub fn act<G: TreeGroup + ?Sized>(&self, group: &G, g: &G::Elem) -> Result<RefinedPoint> {
        Ok(match self {
            RefinedPoint::Vertex { at } => RefinedPoint::Vertex {
                at: group.act(g, at)?,
            },
            RefinedPoint::OnEdge {
                lower,
                upper,
                quarter,
            } => RefinedPoint::on_edge(group.act(g, lower)?, group.act(g, upper)?, *quarter),
        })
    }
}

/// Fixed vertices with a moved neighbour, split by whether every neighbour
/// lies inside the ball.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PsiSet {
    pub determined: Vec<usize>,
    pub undetermined: Vec<usize>,
}

/// Ψ restricted to the vertices of depth at most `radius`.
pub fn psi_set(ball: &Ball, fixed: &[bool], radius: usize) -> PsiSet {
    let mut out = PsiSet::default();
    for k in 0..ball.len() {
        let d = ball.depth(k);
        if d > radius || !fixed[k] {
            continue;
        }
        if d == radius {
            out.undetermined.push(k);
        } else if ball.neighbors(k).any(|n| !fixed[n]) {
            out.determined.push(k);
        }
    }
    out
}

/// Vertices of the smallest subtree containing `points`.
pub fn hull(ball: &Ball, points: &[usize]) -> Vec<usize> {
    let Some(&first) = points.first() else {
        return Vec::new();
    };
    let mut top = ball.vertices[first].clone();
    for &p in points {
        let m = common_prefix(&top, &ball.vertices[p]);
        top.truncate(m);
    }
    let mut seen: HashSet<usize> = HashSet::new();
    for &p in points {
        let mut k = p;
        while seen.insert(k) && ball.depth(k) > top.len() {
            k = ball.parent[k].expect("non-root vertex has a parent");
        }
    }
    let mut out: Vec<usize> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Longest distance in T between two of `points`, by double sweep.
pub fn diameter(ball: &Ball, points: &[usize]) -> usize {
    let Some(&start) = points.first() else {
        return 0;
    };
    let far = |from: usize| {
        points
            .iter()
            .map(|&p| (distance(&ball.vertices[from], &ball.vertices[p]), p))
            .max()
            .expect("points is non-empty")
    };
    let (_, a) = far(start);
    far(a).0
}

/// Leaf stripping on an explicit finite tree. Returns one node, or the two
/// ends of the central edge.
pub fn tree_center(adjacency: &[Vec<usize>]) -> Option<(usize, Option<usize>)> {
    let n = adjacency.len();
    if n == 0 {
        return None;
    }
    let mut degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut remaining = n;
    let mut leaves: Vec<usize> = (0..n).filter(|&k| degree[k] <= 1).collect();
    while remaining > 2 {
        let mut next = Vec::new();
        for &leaf in &leaves {
            removed[leaf] = true;
            remaining -= 1;
            for &m in &adjacency[leaf] {
                if !removed[m] {
                    degree[m] -= 1;
                    if degree[m] == 1 {
                        next.push(m);
                    }
                }
            }
        }
        leaves = next;
    }
    let rest: Vec<usize> = (0..n).filter(|&k| !removed[k]).collect();
    Some((rest[0], rest.get(1).copied()))
}

/// Center of the hull of `points`, found by leaf stripping on the
/// subdivided hull.
pub fn hull_center(ball: &Ball, points: &[usize]) -> Option<RefinedPoint> {
    let verts = hull(ball, points);
    if verts.is_empty() {
        return None;
    }
    // Nodes of the subdivided hull: hull vertices, then one midpoint per hull edge.
    let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    let mut midpoint_of: Vec<usize> = Vec::new();
    for (i, &v) in verts.iter().enumerate() {
        if let Some(&pi) = ball.parent[v].and_then(|p| pos.get(&p)) {
            let m = adjacency.len();
            adjacency.push(vec![i, pi]);
            adjacency[i].push(m);
            adjacency[pi].push(m);
            midpoint_of.push(v);
        }
    }
    let node_point = |node: usize| -> (Vertex, Option<Vertex>) {
        if node < verts.len() {
            (ball.vertices[verts[node]].clone(), None)
        } else {
            let child = midpoint_of[node - verts.len()];
            let up = ball.parent[child].expect("edge has a parent end");
            (
                ball.vertices[up].clone(),
                Some(ball.vertices[child].clone()),
            )
        }
    };
    let (a, b) = tree_center(&adjacency)?;
    Some(match b {
        None => match node_point(a) {
            (v, None) => RefinedPoint::Vertex { at: v },
            (lower, Some(upper)) => RefinedPoint::on_edge(lower, upper, 2),
        },
        Some(b) => {
            // A central edge of the subdivided hull joins a vertex and a midpoint.
            let (vertex_node, mid_node) = if a < verts.len() { (a, b) } else { (b, a) };
            let (v, _) = node_point(vertex_node);
            let (p, c) = node_point(mid_node);
            let c = c.expect("midpoint node");
            let other = if v == p { c } else { p };
            RefinedPoint::on_edge(v, other, 1)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    BoundedWitness,
    GrowingWitness,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FledgeReport {
    pub radii: Vec<usize>,
    /// Hull diameters in half-edge units, one per radius.
    pub diameters: Vec<usize>,
    pub psi_sizes: Vec<usize>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub center: Option<RefinedPoint>,
}

pub fn verdict_for(diameters: &[usize]) -> Verdict {
    if diameters.len() >= 2 && diameters.windows(2).all(|w| w[0] < w[1]) {
        return Verdict::GrowingWitness;
    }
    let top = &diameters[diameters.len() / 2..];
    if !top.is_empty() && top.iter().all(|&d| d == top[0]) {
        Verdict::BoundedWitness
    } else {
        Verdict::Inconclusive
    }
}

pub fn fledge_report<G: TreeGroup + ?Sized>(
    group: &G,
    g: &G::Elem,
    radii: &[usize],
    cap: usize,
) -> Result<FledgeReport> {
    if group.is_identity(g) {
        return Err(Error::Domain("fledge report of the identity".into()));
    }
    if group.classify(g)? == Classification::Hyperbolic {
        return Err(Error::Classification(format!(
            "{} is hyperbolic",
            group.render(g)
        )));
    }
    let mut radii = radii.to_vec();
    radii.sort_unstable();
    radii.dedup();
    let max = *radii
        .last()
        .ok_or_else(|| Error::Config("empty radius list".into()))?;
    let ball = Ball::new(group, max, cap)?;
    let fixed = ball.fixed(group, g)?;
    let mut diameters = Vec::new();
    let mut psi_sizes = Vec::new();
    let mut center = None;
    for &r in &radii {
        let psi = psi_set(&ball, &fixed, r);
        diameters.push(2 * diameter(&ball, &psi.determined));
        psi_sizes.push(psi.determined.len());
        if r == max {
            center = hull_center(&ball, &psi.determined);
        }
    }
    let verdict = verdict_for(&diameters);
    Ok(FledgeReport {
        radii,
        diameters,
        psi_sizes,
        verdict,
        center,
    })
}

/// Exhaustive search for a fixed vertex of the ball, level by level.
pub fn has_fixed_vertex<G: TreeGroup + ?Sized>(
    group: &G,
    g: &G::Elem,
    ball: &Ball,
) -> Result<bool> {
    Ok(ball.fixed(group, g)?.into_iter().any(|f| f))
}

/// `(d(v₀, g v₀), translation length)` for the root `v₀`.
pub fn translation<G: TreeGroup + ?Sized>(group: &G, g: &G::Elem) -> Result<(usize, usize)> {
    let root: Vertex = Vec::new();
    let gv = group.act(g, &root)?;
    let ggv = group.act(g, &gv)?;
    let d1 = distance(&root, &gv);
    let d2 = distance(&root, &ggv);
    Ok((d1, d2.saturating_sub(d1)))
}

/// The first `len + 1` vertices of the ray from the axis towards the
/// attracting end of a hyperbolic `g`.
pub fn attracting_ray<G: TreeGroup + ?Sized>(
    group: &G,
    g: &G::Elem,
    len: usize,
) -> Result<Vec<Vertex>> {
    let (d1, ell) = translation(group, g)?;
    if ell == 0 {
        return Err(Error::Classification(format!(
            "{} is not hyperbolic",
            group.render(g)
        )));
    }
    let gv = group.act(g, &[])?;
    let start = geodesic(&[], &gv)[(d1 - ell) / 2].clone();
    let mut ray = vec![start.clone()];
    let mut p = start;
    while ray.len() <= len {
        let q = group.act(g, &p)?;
        ray.extend(geodesic(&p, &q).into_iter().skip(1));
        p = q;
    }
    ray.truncate(len + 1);
    Ok(ray)
}

/// Whether two ray prefixes describe the same end: after their first
/// common vertex they must run together. `None` if they never meet.
pub fn rays_agree(a: &[Vertex], b: &[Vertex]) -> Option<bool> {
    let (i, j) = a
        .iter()
        .enumerate()
        .find_map(|(i, v)| b.iter().position(|w| w == v).map(|j| (i, j)))?;
    let overlap = (a.len() - i).min(b.len() - j);
    if overlap < 2 {
        return None;
    }
    Some((0..overlap).all(|k| a[i + k] == b[j + k]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delta {
    Point(RefinedPoint),
    Ray(Vec<Vertex>),
}

/// The equivariant point of `g`: the centre of its bounded hull when `g` is
/// elliptic, a prefix of its attracting ray when hyperbolic.
pub fn delta<G: TreeGroup + ?Sized>(
    group: &G,
    g: &G::Elem,
    radii: &[usize],
    cap: usize,
) -> Result<Delta> {
    if group.is_identity(g) {
        return Err(Error::Domain("the identity has no attracting point".into()));
    }
    match group.classify(g)? {
        Classification::Hyperbolic => {
            let len = radii.iter().copied().max().unwrap_or(cap);
            Ok(Delta::Ray(attracting_ray(group, g, len)?))
        }
        Classification::Elliptic { .. } => {
            let report = fledge_report(group, g, radii, cap)?;
            match (report.verdict, report.center) {
                (Verdict::BoundedWitness, Some(c)) => Ok(Delta::Point(c)),
                _ => Err(Error::Inconclusive {
                    diameters: report.diameters,
                }),
            }
        }
    }
}

/// Vertices of the ball on the axis of a hyperbolic `g`.
pub fn axis_in_ball<G: TreeGroup + ?Sized>(
    group: &G,
    g: &G::Elem,
    ball: &Ball,
) -> Result<HashSet<Vertex>> {
    let (_, ell) = translation(group, g)?;
    let images = ball.images(group, g)?;
    Ok(ball
        .vertices
        .iter()
        .zip(&images)
        .filter(|(v, w)| distance(v, w) == ell)
        .map(|(v, _)| v.clone())
        .collect())
}

/// Two hyperbolic candidates whose axes meet the ball in disjoint,
/// non-empty sets.
pub fn transverse_witness<G: TreeGroup + ?Sized>(
    group: &G,
    candidates: &[G::Elem],
    radius: usize,
    cap: usize,
) -> Result<Option<(G::Elem, G::Elem)>> {
    let ball = Ball::new(group, radius, cap)?;
    let mut axes: Vec<(G::Elem, HashSet<Vertex>)> = Vec::new();
    for g in candidates {
        if group.classify(g)? != Classification::Hyperbolic {
            continue;
        }
        let axis = axis_in_ball(group, g, &ball)?;
        if axis.is_empty() {
            continue;
        }
        for (h, other) in &axes {
            if axis.is_disjoint(other) {
                return Ok(Some((h.clone(), g.clone())));
            }
        }
        axes.push((g.clone(), axis));
    }
    Ok(None)
}

/// Breadth-first search of an explicit adjacency list, used by tests as an
/// independent distance oracle.
pub fn bfs_distances(adjacency: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(k) = queue.pop_front() {
        for &m in &adjacency[k] {
            if dist[m] == usize::MAX {
                dist[m] = dist[k] + 1;
                queue.push_back(m);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_of_a_three_vertex_path_is_the_middle() {
        let path = vec![vec![1], vec![0, 2], vec![1]];
        assert_eq!(tree_center(&path), Some((1, None)));
    }

    #[test]
    fn center_of_a_two_vertex_path_is_the_edge() {
        let path = vec![vec![1], vec![0]];
        let (a, b) = tree_center(&path).unwrap();
        assert_eq!((a.min(b.unwrap()), a.max(b.unwrap())), (0, 1));
    }

    #[test]
    fn center_of_a_star_is_the_hub() {
        let star = vec![vec![1, 2, 3], vec![0], vec![0], vec![0]];
        assert_eq!(tree_center(&star), Some((0, None)));
    }

    #[test]
    fn geodesics_and_distances() {
        assert_eq!(distance(&[0, 1, 2], &[0, 2]), 3);
        assert_eq!(
            geodesic(&[0, 1], &[0, 2, 1]),
            vec![vec![0, 1], vec![0], vec![0, 2], vec![0, 2, 1]]
        );
        assert_eq!(geodesic(&[], &[]), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn verdicts() {
        assert_eq!(verdict_for(&[12, 20, 28]), Verdict::GrowingWitness);
        assert_eq!(verdict_for(&[0, 0, 0]), Verdict::BoundedWitness);
        assert_eq!(verdict_for(&[2, 4, 4]), Verdict::BoundedWitness);
        assert_eq!(verdict_for(&[4, 2, 6]), Verdict::Inconclusive);
    }

    #[test]
    fn rays_meeting_late_still_agree() {
        let a = vec![vec![0], vec![0, 1], vec![0, 1, 1], vec![0, 1, 1, 0]];
        let b = vec![vec![0, 1, 1], vec![0, 1, 1, 0]];
        assert_eq!(rays_agree(&a, &b), Some(true));
        let c = vec![vec![0, 1, 1], vec![0, 1, 1, 2]];
        assert_eq!(rays_agree(&a, &c), Some(false));
        assert_eq!(rays_agree(&a, &[vec![5]]), None);
    }

    #[test]
    fn refined_points_are_oriented() {
        let p = RefinedPoint::on_edge(vec![0, 1], vec![0], 1);
        assert_eq!(
            p,
            RefinedPoint::OnEdge {
                lower: vec![0],
                upper: vec![0, 1],
                quarter: 3
            }
        );
    }
}
