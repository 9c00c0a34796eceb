//! Finite permutation groups on `{0, …, n−1}` with a distinguished basepoint.
//!
//! Everything is computed by full enumeration, capped at
//! [`DEFAULT_ELEMENT_CAP`] elements.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ELEMENT_CAP: usize = 10_000;

/// A bijection of `{0, …, n−1}` stored by its images.
///
/// `&a * &b` is the composition `a ∘ b`: apply `b` first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Box<[u32]>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidPerm(format!("{images:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Perm {
            images: images.into_boxed_slice(),
        })
    }

    /// Parses cycle notation such as `"(0 1 2)(3 4)"`; `"()"` and the empty
    /// string are the identity. Commas may separate points inside a cycle.
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut touched = vec![false; degree];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::InvalidPerm(format!("expected '(' in {text:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::InvalidPerm(format!("unclosed cycle in {text:?}")))?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|_| Error::InvalidPerm(format!("bad point {s:?} in {text:?}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            for (k, &p) in points.iter().enumerate() {
                if p as usize >= degree {
                    return Err(Error::InvalidPerm(format!(
                        "point {p} outside domain of size {degree}"
                    )));
                }
                if touched[p as usize] {
                    return Err(Error::InvalidPerm(format!(
                        "point {p} repeated in {text:?}"
                    )));
                }
                touched[p as usize] = true;
                images[p as usize] = points[(k + 1) % points.len()];
            }
            rest = body[close + 1..].trim_start();
        }
        Ok(Perm {
            images: images.into_boxed_slice(),
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, point: u32) -> u32 {
        self.images[point as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &x)| k as u32 == x)
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (k, &x) in self.images.iter().enumerate() {
            inv[x as usize] = k as u32;
        }
        Perm {
            images: inv.into_boxed_slice(),
        }
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(Perm::identity(self.degree()), |acc, _| &acc * &base)
    }

    pub fn fixes(&self, point: u32) -> bool {
        self.apply(point) == point
    }

    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x as u32);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Places `self` on the points `offset..offset+degree` of a domain of
    /// size `total`, fixing everything else.
    pub fn embed(&self, offset: usize, total: usize) -> Perm {
        let mut images: Vec<u32> = (0..total as u32).collect();
        for (k, &x) in self.images.iter().enumerate() {
            images[offset + k] = x + offset as u32;
        }
        Perm {
            images: images.into_boxed_slice(),
        }
    }

    /// Restricts to the points `offset..offset+len`, which must be invariant.
    pub fn restrict(&self, offset: usize, len: usize) -> Perm {
        let images = (0..len)
            .map(|k| self.images[offset + k] - offset as u32)
            .collect();
        Perm { images }
    }
}

impl Mul for &Perm {
    type Output = Perm;

    fn mul(self, rhs: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), rhs.degree());
        let images = rhs
            .images
            .iter()
            .map(|&x| self.images[x as usize])
            .collect();
        Perm { images }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON form of a group: `{"domain": n, "basepoint": 0, "generators": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub domain: usize,
    #[serde(default)]
    pub basepoint: u32,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<PermGroup> {
        let gens = self
            .generators
            .iter()
            .map(|g| Perm::parse(g, self.domain))
            .collect::<Result<Vec<_>>>()?;
        let mut group = PermGroup::closure(&gens, self.domain)?.with_basepoint(self.basepoint)?;
        if let Some(name) = &self.name {
            group.name = name.clone();
        }
        Ok(group)
    }

    pub fn symmetric(n: usize) -> Self {
        let mut generators = Vec::new();
        if n >= 2 {
            generators.push("(0 1)".to_string());
        }
        if n >= 3 {
            let body: Vec<String> = (0..n).map(|k| k.to_string()).collect();
            generators.push(format!("({})", body.join(" ")));
        }
        GroupSpec {
            domain: n,
            basepoint: 0,
            generators,
            name: Some(format!("Sym({n})")),
        }
    }
}

/// A permutation group with its full element list in BFS order.
#[derive(Clone)]
pub struct PermGroup {
    pub name: String,
    degree: usize,
    basepoint: u32,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (degree {}, order {})",
            self.name,
            self.degree,
            self.order()
        )
    }
}

impl PermGroup {
    pub fn closure(generators: &[Perm], degree: usize) -> Result<Self> {
        Self::closure_capped(generators, degree, DEFAULT_ELEMENT_CAP)
    }

    /// Orbit of the identity under right multiplication by the generators.
    pub fn closure_capped(generators: &[Perm], degree: usize, cap: usize) -> Result<Self> {
        for g in generators {
            if g.degree() != degree {
                return Err(Error::InvalidPerm(format!(
                    "generator {g} has degree {} but the domain has {degree} points",
                    g.degree()
                )));
            }
        }
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for g in generators {
                let next = &elements[k] * g;
                if !index.contains_key(&next) {
                    if elements.len() >= cap {
                        return Err(Error::EnumerationLimit {
                            what: "permutation group closure".into(),
                            limit: cap,
                        });
                    }
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        Ok(PermGroup {
            name: format!("group of order {}", elements.len()),
            degree,
            basepoint: 0,
            generators: generators.to_vec(),
            elements,
            index,
        })
    }

    pub fn symmetric(n: usize) -> Self {
        GroupSpec::symmetric(n)
            .build()
            .expect("symmetric group spec is valid")
    }

    pub fn cyclic(n: usize) -> Self {
        let body: Vec<String> = (0..n).map(|k| k.to_string()).collect();
        let gen = Perm::parse(&format!("({})", body.join(" ")), n).expect("cycle is valid");
        let mut g = PermGroup::closure(&[gen], n).expect("cyclic group is small");
        g.name = format!("C{n}");
        g
    }

    pub fn with_basepoint(mut self, basepoint: u32) -> Result<Self> {
        if basepoint as usize >= self.degree {
            return Err(Error::Config(format!(
                "basepoint {basepoint} outside domain of size {}",
                self.degree
            )));
        }
        self.basepoint = basepoint;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basepoint(&self) -> u32 {
        self.basepoint
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.index.contains_key(p)
    }

    pub fn identity(&self) -> Perm {
        Perm::identity(self.degree)
    }

    pub fn orbit(&self, point: u32) -> Vec<u32> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in &self.elements {
            let x = e.apply(point);
            if seen.insert(x) {
                out.push(x);
            }
        }
        out.sort_unstable();
        out
    }

    /// The subgroup generated by `elems`, all of which must lie in `self`.
    pub fn subgroup(&self, elems: &[Perm]) -> Result<PermGroup> {
        let mut gens: Vec<Perm> = Vec::new();
        let mut current = PermGroup::closure(&[], self.degree)?;
        for e in elems {
            if !current.contains(e) {
                gens.push(e.clone());
                current = PermGroup::closure(&gens, self.degree)?;
            }
        }
        current.basepoint = self.basepoint;
        Ok(current)
    }

    pub fn stabilizer(&self, point: u32) -> PermGroup {
        let fixing: Vec<Perm> = self
            .elements
            .iter()
            .filter(|e| e.fixes(point))
            .cloned()
            .collect();
        let mut s = self
            .subgroup(&fixing)
            .expect("a subgroup is no larger than its parent");
        s.basepoint = point;
        s.name = format!("{}_{point}", self.name);
        s
    }

    pub fn is_transitive(&self) -> bool {
        self.orbit(self.basepoint).len() == self.degree
    }

    pub fn is_2_transitive(&self) -> bool {
        if !self.is_transitive() {
            return false;
        }
        if self.degree <= 1 {
            return true;
        }
        (0..self.degree as u32).all(|p| {
            let s = self.stabilizer(p);
            let q = if p == 0 { 1 } else { 0 };
            s.orbit(q).len() == self.degree - 1
        })
    }

    pub fn stabilizer_generation(&self) -> StabilizerGeneration {
        let all: Vec<Perm> = (0..self.degree as u32)
            .flat_map(|p| self.stabilizer(p).elements)
            .collect();
        let generated = self
            .subgroup(&all)
            .map(|g| g.order() == self.order())
            .unwrap_or(false);
        StabilizerGeneration {
            generated,
            sym2_exception: self.degree == 2 && self.order() == 2,
        }
    }

    pub fn is_generated_by_stabilizers(&self) -> bool {
        self.stabilizer_generation().generated
    }

    /// For each point `i`, the first element in BFS order sending the
    /// basepoint to `i`.
    pub fn transversal(&self) -> Result<Vec<Perm>> {
        let mut reps: Vec<Option<Perm>> = vec![None; self.degree];
        for e in &self.elements {
            let slot = &mut reps[e.apply(self.basepoint) as usize];
            if slot.is_none() {
                *slot = Some(e.clone());
            }
        }
        reps.into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or(Error::MissingCoset { point: i as u32 }))
            .collect()
    }

    pub fn commutator_subgroup(&self) -> PermGroup {
        let mut generators: Vec<Perm> = Vec::new();
        for a in &self.generators {
            for b in &self.generators {
                let c = &(&a.inverse() * &b.inverse()) * &(a * b);
                if !c.is_identity() {
                    generators.push(c);
                }
            }
        }
        // Normal closure: add conjugates by generators until nothing new appears.
        loop {
            let current = self
                .subgroup(&generators)
                .expect("subgroup of a capped group");
            let mut grew = false;
            for g in &self.generators {
                let gi = g.inverse();
                for n in current.elements() {
                    let conj = &(g * n) * &gi;
                    if !current.contains(&conj) && !generators.contains(&conj) {
                        generators.push(conj);
                        grew = true;
                    }
                }
            }
            if !grew {
                let mut c = current;
                c.name = format!("[{0}, {0}]", self.name);
                return c;
            }
        }
    }

    pub fn abelianization(&self) -> AbelQuotient {
        AbelQuotient::new(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerGeneration {
    pub generated: bool,
    pub sym2_exception: bool,
}

/// `Γ/[Γ,Γ]` as an explicit multiplication table on coset ids.
///
/// Id 0 is the class of the identity.
#[derive(Clone, Debug)]
pub struct AbelQuotient {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    projection: HashMap<Perm, usize>,
}

impl AbelQuotient {
    fn new(group: &PermGroup) -> Self {
        let commutators = group.commutator_subgroup();
        let mut projection: HashMap<Perm, usize> = HashMap::new();
        let mut reps: Vec<Perm> = Vec::new();
        for e in group.elements() {
            if projection.contains_key(e) {
                continue;
            }
            let id = reps.len();
            for n in commutators.elements() {
                projection.insert(e * n, id);
            }
            reps.push(e.clone());
        }
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|a| reps.iter().map(|b| projection[&(a * b)]).collect())
            .collect();
        let inverse = reps.iter().map(|a| projection[&a.inverse()]).collect();
        AbelQuotient {
            table,
            inverse,
            projection,
        }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn project(&self, p: &Perm) -> usize {
        self.projection[p]
    }

    pub fn try_project(&self, p: &Perm) -> Option<usize> {
        self.projection.get(p).copied()
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        (0..k.unsigned_abs()).fold(0, |acc, _| self.op(acc, base))
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(text: &str, n: usize) -> Perm {
        Perm::parse(text, n).unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        assert_eq!(p("(0 1 2)(3 4)", 5).to_string(), "(0 1 2)(3 4)");
        assert_eq!(p("()", 3).to_string(), "()");
        assert_eq!(p("", 2), Perm::identity(2));
        assert_eq!(p("(2,0)", 3).images(), &[2, 1, 0]);
        assert!(Perm::parse("(0 3)", 3).is_err());
        assert!(Perm::parse("(0 1)(1 2)", 3).is_err());
        assert!(Perm::parse("0 1", 3).is_err());
    }

    #[test]
    fn product_applies_right_factor_first() {
        let a = p("(0 1)", 3);
        let b = p("(1 2)", 3);
        assert_eq!((&a * &b).apply(1), 2);
        assert_eq!((&a * &b).apply(2), 0);
    }

    #[test]
    fn closure_orders() {
        let s3 = PermGroup::closure(&[p("(0 1 2)", 3), p("(0 1)", 3)], 3).unwrap();
        assert_eq!(s3.order(), 6);
        assert_eq!(PermGroup::closure(&[], 4).unwrap().order(), 1);
        assert_eq!(
            PermGroup::closure(&[p("(0 1)(2 3)", 4)], 4)
                .unwrap()
                .order(),
            2
        );
    }

    #[test]
    fn closure_respects_cap() {
        let err = PermGroup::closure_capped(&[p("(0 1)", 8), p("(0 1 2 3 4 5 6 7)", 8)], 8, 100);
        assert!(matches!(
            err,
            Err(Error::EnumerationLimit { limit: 100, .. })
        ));
    }

    #[test]
    fn stabilizers() {
        assert_eq!(PermGroup::symmetric(3).stabilizer(0).order(), 2);
        assert_eq!(PermGroup::closure(&[], 3).unwrap().stabilizer(1).order(), 1);
        assert_eq!(PermGroup::symmetric(2).stabilizer(0).order(), 1);
    }

    #[test]
    fn transitivity_flags() {
        let s3 = PermGroup::symmetric(3);
        assert!(s3.is_transitive() && s3.is_2_transitive());
        assert!(s3.is_generated_by_stabilizers());

        let s2 = PermGroup::symmetric(2);
        assert!(s2.is_transitive());
        // The stabilizer of either point is transitive on the single point left.
        assert!(s2.is_2_transitive());
        assert_eq!(
            s2.stabilizer_generation(),
            StabilizerGeneration {
                generated: false,
                sym2_exception: true
            }
        );

        assert!(!PermGroup::cyclic(3).is_2_transitive());
        assert!(!PermGroup::closure(&[p("(0 1)", 3)], 3)
            .unwrap()
            .is_transitive());
    }

    #[test]
    fn transversals() {
        let c3 = PermGroup::cyclic(3);
        let t = c3.transversal().unwrap();
        assert_eq!(t, vec![Perm::identity(3), p("(0 1 2)", 3), p("(0 2 1)", 3)]);

        let triv = PermGroup::closure(&[], 1).unwrap();
        assert_eq!(triv.transversal().unwrap(), vec![Perm::identity(1)]);

        let not_transitive = PermGroup::closure(&[p("(0 1)", 3)], 3).unwrap();
        assert_eq!(
            not_transitive.transversal(),
            Err(Error::MissingCoset { point: 2 })
        );
    }

    #[test]
    fn abelianizations() {
        let s3 = PermGroup::symmetric(3);
        assert_eq!(s3.commutator_subgroup().order(), 3);
        assert_eq!(s3.abelianization().order(), 2);

        let c3 = PermGroup::cyclic(3).abelianization();
        assert_eq!(c3.order(), 3);
        let ids: HashSet<usize> = PermGroup::cyclic(3)
            .elements()
            .iter()
            .map(|e| c3.project(e))
            .collect();
        assert_eq!(ids.len(), 3);

        assert_eq!(PermGroup::symmetric(2).abelianization().order(), 2);
        assert_eq!(PermGroup::symmetric(4).abelianization().order(), 2);
    }

    #[test]
    fn group_spec_json() {
        let spec: GroupSpec = serde_json::from_str(
            r#"{"domain": 3, "basepoint": 0, "generators": ["(0 1)", "(0 1 2)"]}"#,
        )
        .unwrap();
        assert_eq!(spec.build().unwrap().order(), 6);
    }

    fn small_groups() -> Vec<PermGroup> {
        let dihedral4 = PermGroup::closure(&[p("(0 1 2 3)", 4), p("(1 3)", 4)], 4).unwrap();
        vec![
            PermGroup::symmetric(2),
            PermGroup::symmetric(3),
            PermGroup::symmetric(4),
            PermGroup::cyclic(3),
            PermGroup::cyclic(5),
            dihedral4,
        ]
    }

    #[test]
    fn projection_is_a_homomorphism_exhaustively() {
        for g in small_groups() {
            let q = g.abelianization();
            assert!(q.is_abelian());
            for a in g.elements() {
                for b in g.elements() {
                    assert_eq!(q.project(&(a * b)), q.op(q.project(a), q.project(b)));
                }
            }
            for c in g.commutator_subgroup().elements() {
                assert_eq!(q.project(c), 0);
            }
        }
    }

    #[test]
    fn orbit_stabilizer_and_transversal_exhaustively() {
        for g in small_groups() {
            for point in 0..g.degree() as u32 {
                assert_eq!(
                    g.order(),
                    g.orbit(point).len() * g.stabilizer(point).order()
                );
            }
            let t = g.transversal().unwrap();
            for (i, rep) in t.iter().enumerate() {
                assert_eq!(rep.apply(g.basepoint()), i as u32);
                assert!(g.contains(rep));
            }
            assert!(t[g.basepoint() as usize].is_identity());
        }
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Perm> {
        Just((0..n as u32).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Perm::from_images(v).unwrap())
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_perm(6), b in arb_perm(6), c in arb_perm(6)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn inverse_cancels(a in arb_perm(7)) {
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert!((&a.inverse() * &a).is_identity());
        }

        #[test]
        fn display_parses_back(a in arb_perm(8)) {
            prop_assert_eq!(Perm::parse(&a.to_string(), 8).unwrap(), a);
        }

        #[test]
        fn closure_is_closed(a in arb_perm(5), b in arb_perm(5)) {
            let g = PermGroup::closure(&[a, b], 5).unwrap();
            for x in g.elements().iter().take(20) {
                prop_assert!(g.contains(&x.inverse()));
                for y in g.elements().iter().take(20) {
                    prop_assert!(g.contains(&(x * y)));
                }
            }
        }
    }
}
