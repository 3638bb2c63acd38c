//! Staged trees: validation, atoms, vertex polynomials, stages and positions.
//!
//! A [`TreeGraph`] is an unchecked description built by name. [`validate_tree`]
//! lists everything wrong with it and [`TreeGraph::build`] turns a clean one
//! into an immutable [`StagedTree`] with every per-vertex polynomial
//! precomputed.
//!
//! Stages are never declared: two vertices share a stage exactly when their
//! outgoing edges carry the same set of label names.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, SymbolId, SymbolKind, SymbolTable};

/// Vertex handle. Ids are assigned in depth-first preorder, so the
/// descendants of `v` are exactly the ids in `v..subtree_end(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeGraph {
    root: usize,
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Vec<(usize, String)>>,
    atom_names: Option<Vec<String>>,
}

impl TreeGraph {
    pub fn new(root: &str) -> Self {
        let mut g = TreeGraph {
            root: 0,
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            atom_names: None,
        };
        g.root = g.add_vertex(root);
        g
    }

    /// Adds a vertex if it does not exist yet and returns its position.
    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.edges.push(Vec::new());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn add_edge(&mut self, from: &str, to: &str, label: &str) -> &mut Self {
        let f = self.add_vertex(from);
        let t = self.add_vertex(to);
        self.edges[f].push((t, label.to_string()));
        self
    }

    pub fn set_atom_names(&mut self, names: Vec<String>) -> &mut Self {
        self.atom_names = Some(names);
        self
    }

    pub fn root(&self) -> &str {
        &self.names[self.root]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn edges_of(&self, name: &str) -> Vec<(&str, &str)> {
        match self.index.get(name) {
            Some(&i) => self.edges[i]
                .iter()
                .map(|(c, l)| (self.names[*c].as_str(), l.as_str()))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn atom_names(&self) -> Option<&[String]> {
        self.atom_names.as_deref()
    }

    pub fn build(&self) -> Result<StagedTree> {
        StagedTree::from_graph(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RootHasParent { root: String },
    MultipleParents { vertex: String },
    Unreachable { vertex: String },
    UnaryVertex { vertex: String },
    DuplicateLabel { vertex: String, label: String },
    InconsistentStageLabels { first: String, second: String },
    AtomNameCount { expected: usize, found: usize },
    DuplicateName { name: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootHasParent { root } => write!(f, "root `{root}` has an incoming edge"),
            Violation::MultipleParents { vertex } => {
                write!(f, "vertex `{vertex}` has more than one parent")
            }
            Violation::Unreachable { vertex } => {
                write!(f, "vertex `{vertex}` is not reachable from the root")
            }
            Violation::UnaryVertex { vertex } => write!(f, "unary vertex `{vertex}`"),
            Violation::DuplicateLabel { vertex, label } => {
                write!(f, "vertex `{vertex}` repeats label `{label}`")
            }
            Violation::InconsistentStageLabels { first, second } => write!(
                f,
                "inconsistent stage labels between `{first}` and `{second}`"
            ),
            Violation::AtomNameCount { expected, found } => write!(
                f,
                "expected {expected} atom names (one per leaf), found {found}"
            ),
            Violation::DuplicateName { name } => write!(f, "symbol name `{name}` is used twice"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_tree(g: &TreeGraph) -> ValidationReport {
    let n = g.names.len();
    let mut out = Vec::new();

    let mut parents = vec![0usize; n];
    for edges in &g.edges {
        for &(c, _) in edges {
            parents[c] += 1;
        }
    }
    if parents[g.root] > 0 {
        out.push(Violation::RootHasParent {
            root: g.names[g.root].clone(),
        });
    }
    for (v, &count) in parents.iter().enumerate() {
        if count > 1 {
            out.push(Violation::MultipleParents {
                vertex: g.names[v].clone(),
            });
        }
    }

    let mut seen = vec![false; n];
    let mut stack = vec![g.root];
    seen[g.root] = true;
    while let Some(v) = stack.pop() {
        for &(c, _) in &g.edges[v] {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    for (name, _) in g.names.iter().zip(&seen).filter(|(_, &s)| !s) {
        out.push(Violation::Unreachable {
            vertex: name.clone(),
        });
    }

    for (v, edges) in g.edges.iter().enumerate() {
        if edges.len() == 1 {
            out.push(Violation::UnaryVertex {
                vertex: g.names[v].clone(),
            });
        }
        let mut labels = HashSet::new();
        for (_, l) in edges {
            if !labels.insert(l.as_str()) {
                out.push(Violation::DuplicateLabel {
                    vertex: g.names[v].clone(),
                    label: l.clone(),
                });
            }
        }
    }

    // every label is owned by the first vertex that uses it; any later vertex
    // touching it must carry exactly the same label set
    let label_set = |v: usize| -> Vec<&str> {
        let mut s: Vec<&str> = g.edges[v].iter().map(|(_, l)| l.as_str()).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut owner: HashMap<&str, usize> = HashMap::new();
    let mut reported: HashSet<(usize, usize)> = HashSet::new();
    for v in 0..n {
        let mine = label_set(v);
        for l in &mine {
            match owner.get(l) {
                None => {
                    owner.insert(l, v);
                }
                Some(&o) if label_set(o) != mine => {
                    if reported.insert((o, v)) {
                        out.push(Violation::InconsistentStageLabels {
                            first: g.names[o].clone(),
                            second: g.names[v].clone(),
                        });
                    }
                }
                Some(_) => {}
            }
        }
    }

    let leaves = (0..n).filter(|&v| seen[v] && g.edges[v].is_empty()).count();
    let atom_names: Vec<String> = match &g.atom_names {
        Some(names) => {
            if names.len() != leaves {
                out.push(Violation::AtomNameCount {
                    expected: leaves,
                    found: names.len(),
                });
            }
            names.clone()
        }
        None => (1..=leaves).map(|i| format!("p{i}")).collect(),
    };
    let mut names_seen: HashSet<&str> = HashSet::new();
    let mut dup_reported: HashSet<&str> = HashSet::new();
    for name in atom_names
        .iter()
        .map(String::as_str)
        .chain(owner.keys().copied())
    {
        if !names_seen.insert(name) && dup_reported.insert(name) {
            out.push(Violation::DuplicateName {
                name: name.to_string(),
            });
        }
    }

    ValidationReport { violations: out }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub child: VertexId,
    pub label: SymbolId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// 1-based position in the atom order.
    pub index: usize,
    pub leaf: VertexId,
    pub symbol: SymbolId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageClass {
    pub vertices: Vec<VertexId>,
    /// Labels in the declaration order of the first member.
    pub labels: Vec<SymbolId>,
}

impl StageClass {
    /// Number of vertices in the stage.
    pub fn multiplicity(&self) -> usize {
        self.vertices.len()
    }

    /// Number of edges out of each member.
    pub fn out_degree(&self) -> usize {
        self.labels.len()
    }

    /// Unordered pairs of distinct members, in vertex order.
    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .flat_map(move |(i, &v)| self.vertices[i + 1..].iter().map(move |&w| (v, w)))
    }
}

/// Stage classes of the non-leaf vertices, ordered by first member.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StagePartition {
    pub classes: Vec<StageClass>,
}

impl StagePartition {
    pub fn nontrivial(&self) -> impl Iterator<Item = &StageClass> {
        self.classes.iter().filter(|c| c.multiplicity() > 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedTree {
    names: Vec<String>,
    children: Vec<Vec<Edge>>,
    parent: Vec<Option<VertexId>>,
    subtree_end: Vec<usize>,
    atom_range: Vec<Range<usize>>,
    symbols: SymbolTable,
    atoms: Vec<Atom>,
    labels: Vec<SymbolId>,
    t_poly: Vec<Polynomial>,
    p_bracket: Vec<Polynomial>,
    stages: StagePartition,
    stage_of: Vec<Option<usize>>,
}

impl StagedTree {
    pub fn from_graph(g: &TreeGraph) -> Result<StagedTree> {
        let report = validate_tree(g);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }

        // preorder renumbering, children in declaration order
        let mut order = Vec::with_capacity(g.names.len());
        let mut stack = vec![g.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(c, _) in g.edges[v].iter().rev() {
                stack.push(c);
            }
        }
        let mut new_id = vec![0usize; g.names.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let n = order.len();
        let names: Vec<String> = order.iter().map(|&v| g.names[v].clone()).collect();

        let leaves: Vec<usize> = (0..n).filter(|&i| g.edges[order[i]].is_empty()).collect();
        let atom_names: Vec<String> = match &g.atom_names {
            Some(a) => a.clone(),
            None => (1..=leaves.len()).map(|i| format!("p{i}")).collect(),
        };
        let mut symbols = SymbolTable::new();
        let mut atoms = Vec::with_capacity(leaves.len());
        for (k, (&leaf, name)) in leaves.iter().zip(&atom_names).enumerate() {
            let symbol = symbols.insert(name, SymbolKind::Atom)?;
            atoms.push(Atom {
                index: k + 1,
                leaf: VertexId(leaf),
                symbol,
            });
        }

        let mut children = vec![Vec::new(); n];
        let mut parent = vec![None; n];
        let mut labels = Vec::new();
        for (i, &v) in order.iter().enumerate() {
            for (c, l) in &g.edges[v] {
                let label = match symbols.lookup(l) {
                    Some(id) => id,
                    None => {
                        let id = symbols.insert(l, SymbolKind::Label)?;
                        labels.push(id);
                        id
                    }
                };
                let child = VertexId(new_id[*c]);
                children[i].push(Edge { child, label });
                parent[child.0] = Some(VertexId(i));
            }
        }

        let mut subtree_end = vec![0usize; n];
        let mut atom_range = vec![0..0; n];
        let mut leaf_rank = vec![0usize; n];
        for (k, &leaf) in leaves.iter().enumerate() {
            leaf_rank[leaf] = k;
        }
        for i in (0..n).rev() {
            if children[i].is_empty() {
                subtree_end[i] = i + 1;
                atom_range[i] = leaf_rank[i]..leaf_rank[i] + 1;
            } else {
                let last = children[i].last().unwrap().child.0;
                subtree_end[i] = subtree_end[last];
                let first = children[i][0].child.0;
                atom_range[i] = atom_range[first].start..atom_range[last].end;
            }
        }

        let mut t_poly = vec![Polynomial::zero(); n];
        for i in (0..n).rev() {
            t_poly[i] = if children[i].is_empty() {
                Polynomial::one()
            } else {
                children[i]
                    .iter()
                    .map(|e| Polynomial::var(e.label) * &t_poly[e.child.0])
                    .sum()
            };
        }
        let p_bracket = atom_range
            .iter()
            .map(|r| {
                atoms[r.clone()]
                    .iter()
                    .map(|a| Polynomial::var(a.symbol))
                    .sum()
            })
            .collect();

        let mut by_labels: BTreeMap<Vec<SymbolId>, usize> = BTreeMap::new();
        let mut classes: Vec<StageClass> = Vec::new();
        let mut stage_of = vec![None; n];
        for i in 0..n {
            if children[i].is_empty() {
                continue;
            }
            let mut key: Vec<SymbolId> = children[i].iter().map(|e| e.label).collect();
            key.sort_unstable();
            let idx = *by_labels.entry(key).or_insert_with(|| {
                classes.push(StageClass {
                    vertices: Vec::new(),
                    labels: children[i].iter().map(|e| e.label).collect(),
                });
                classes.len() - 1
            });
            classes[idx].vertices.push(VertexId(i));
            stage_of[i] = Some(idx);
        }

        Ok(StagedTree {
            names,
            children,
            parent,
            subtree_end,
            atom_range,
            symbols,
            atoms,
            labels,
            t_poly,
            p_bracket,
            stages: StagePartition { classes },
            stage_of,
        })
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if v.0 < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{}", v.0)))
        }
    }

    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(VertexId)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn children(&self, v: VertexId) -> &[Edge] {
        &self.children[v.0]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.0]
    }

    /// Label of the edge entering `v`.
    pub fn incoming_label(&self, v: VertexId) -> Option<SymbolId> {
        let p = self.parent[v.0]?;
        self.children[p.0]
            .iter()
            .find(|e| e.child == v)
            .map(|e| e.label)
    }

    pub fn child_by_label(&self, v: VertexId, label: SymbolId) -> Option<VertexId> {
        self.children[v.0]
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.child)
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children[v.0].is_empty()
    }

    pub fn is_ancestor_or_self(&self, a: VertexId, b: VertexId) -> bool {
        a.0 <= b.0 && b.0 < self.subtree_end[a.0]
    }

    /// `v` and all of its descendants, in preorder.
    pub fn subtree(&self, v: VertexId) -> impl Iterator<Item = VertexId> {
        (v.0..self.subtree_end[v.0]).map(VertexId)
    }

    pub fn depth(&self, v: VertexId) -> usize {
        let mut d = 0;
        let mut cur = v;
        while let Some(p) = self.parent[cur.0] {
            d += 1;
            cur = p;
        }
        d
    }

    pub fn num_edges(&self) -> usize {
        self.names.len() - 1
    }

    pub fn non_leaf_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| !self.is_leaf(v))
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// Edge-label symbols in order of first appearance.
    pub fn labels(&self) -> &[SymbolId] {
        &self.labels
    }

    /// Atoms in depth-first order, children visited in declaration order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.atoms.iter().map(|a| a.symbol)
    }

    pub fn is_atom_symbol(&self, s: SymbolId) -> bool {
        matches!(self.symbols.get(s), Some(sym) if sym.kind == SymbolKind::Atom)
    }

    /// Vertices from the root down to the atom's leaf.
    pub fn atom_path(&self, atom: &Atom) -> Vec<VertexId> {
        let mut path = vec![atom.leaf];
        let mut cur = atom.leaf;
        while let Some(p) = self.parent[cur.0] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Product of labels on the downward path from `top` to `bottom`.
    /// `top` must be an ancestor of (or equal to) `bottom`.
    pub fn path_monomial(&self, top: VertexId, bottom: VertexId) -> Monomial {
        debug_assert!(self.is_ancestor_or_self(top, bottom));
        let mut factors = Vec::new();
        let mut cur = bottom;
        while cur != top {
            factors.push((self.incoming_label(cur).expect("non-root"), 1));
            cur = self.parent[cur.0].expect("non-root");
        }
        Monomial::from_factors(factors)
    }

    /// Edges (parent, child) of the unique tree path between `a` and `b`.
    pub fn path_edges(&self, a: VertexId, b: VertexId) -> Vec<(VertexId, VertexId)> {
        let mut up_a = Vec::new();
        let mut up_b = Vec::new();
        let (mut x, mut y) = (a, b);
        while !self.is_ancestor_or_self(x, y) {
            let p = self.parent[x.0].expect("root is everyone's ancestor");
            up_a.push((p, x));
            x = p;
        }
        while y != x {
            let p = self.parent[y.0].expect("below the meeting point");
            up_b.push((p, y));
            y = p;
        }
        up_b.reverse();
        up_a.extend(up_b);
        up_a
    }

    /// 1-based indices of the root-to-leaf paths through `v`.
    pub fn paths_through(&self, v: VertexId) -> Result<Vec<usize>> {
        self.check(v)?;
        Ok(self.atom_range[v.0].clone().map(|i| i + 1).collect())
    }

    /// `p_[v]`, the sum of atom symbols below `v`.
    pub fn p_bracket(&self, v: VertexId) -> Result<&Polynomial> {
        self.check(v)?;
        Ok(&self.p_bracket[v.0])
    }

    /// `t(v) = Σ θ(v,v')·t(v')` over the children of `v`, with `t(leaf) = 1`.
    pub fn t_polynomial(&self, v: VertexId) -> Result<&Polynomial> {
        self.check(v)?;
        Ok(&self.t_poly[v.0])
    }

    pub fn stage_classes(&self) -> &StagePartition {
        &self.stages
    }

    pub fn stage_index(&self, v: VertexId) -> Option<usize> {
        self.stage_of.get(v.0).copied().flatten()
    }

    pub fn stage_of(&self, v: VertexId) -> Option<&StageClass> {
        self.stage_index(v).map(|i| &self.stages.classes[i])
    }

    /// Leaves are never in a common stage with anything but themselves.
    pub fn same_stage(&self, v: VertexId, w: VertexId) -> Result<bool> {
        self.check(v)?;
        self.check(w)?;
        if v == w {
            return Ok(true);
        }
        Ok(matches!((self.stage_of[v.0], self.stage_of[w.0]), (Some(a), Some(b)) if a == b))
    }

    /// Same stage and identical `t` polynomials.
    pub fn same_position(&self, v: VertexId, w: VertexId) -> Result<bool> {
        Ok(self.same_stage(v, w)? && self.t_poly[v.0] == self.t_poly[w.0])
    }

    /// Position classes of the non-leaf vertices, refining the stage classes.
    pub fn position_classes(&self) -> Vec<Vec<VertexId>> {
        let mut out: Vec<Vec<VertexId>> = Vec::new();
        for class in &self.stages.classes {
            let mut groups: Vec<Vec<VertexId>> = Vec::new();
            for &v in &class.vertices {
                match groups
                    .iter_mut()
                    .find(|g| self.t_poly[g[0].0] == self.t_poly[v.0])
                {
                    Some(g) => g.push(v),
                    None => groups.push(vec![v]),
                }
            }
            out.extend(groups);
        }
        out.sort_by_key(|g| g[0]);
        out
    }

    /// Rebuilds an equivalent graph description (vertices in preorder).
    pub fn to_graph(&self) -> TreeGraph {
        let mut g = TreeGraph::new(&self.names[0]);
        for v in self.vertices() {
            g.add_vertex(&self.names[v.0]);
            for e in &self.children[v.0] {
                g.add_edge(
                    &self.names[v.0],
                    &self.names[e.child.0],
                    &self.symbols.name(e.label),
                );
            }
        }
        let names: Vec<String> = self
            .atoms
            .iter()
            .map(|a| self.symbols.name(a.symbol))
            .collect();
        let default: Vec<String> = (1..=self.atoms.len()).map(|i| format!("p{i}")).collect();
        if names != default {
            g.set_atom_names(names);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    /// Two-level tree: root splits into v1,v2 (theta), each splits three ways (tau).
    fn binary_ternary() -> StagedTree {
        let mut g = TreeGraph::new("v0");
        g.add_edge("v0", "v1", "theta0")
            .add_edge("v0", "v2", "theta1");
        for (v, leaves) in [("v1", ["l1", "l2", "l3"]), ("v2", ["l4", "l5", "l6"])] {
            for (k, l) in leaves.iter().enumerate() {
                g.add_edge(v, l, &format!("tau{k}"));
            }
        }
        g.build().unwrap()
    }

    /// Three-level binary tree with stages {v1,v2}, {v3,v5}, {v4,v6}.
    fn three_level() -> StagedTree {
        let mut g = TreeGraph::new("v0");
        g.add_edge("v0", "v1", "theta0")
            .add_edge("v0", "v2", "theta1");
        g.add_edge("v1", "v3", "tau0").add_edge("v1", "v4", "tau1");
        g.add_edge("v2", "v5", "tau0").add_edge("v2", "v6", "tau1");
        let mut leaf = 1;
        for (v, sym) in [
            ("v3", "sigma"),
            ("v4", "eta"),
            ("v5", "sigma"),
            ("v6", "eta"),
        ] {
            for k in 0..2 {
                g.add_edge(v, &format!("l{leaf}"), &format!("{sym}{k}"));
                leaf += 1;
            }
        }
        g.build().unwrap()
    }

    fn poly(t: &StagedTree, s: &str) -> Polynomial {
        parse_polynomial(s, t.symbols()).unwrap()
    }

    #[test]
    fn valid_tree_passes() {
        let t = binary_ternary();
        assert_eq!(t.num_vertices(), 9);
        assert!(validate_tree(&t.to_graph()).is_valid());
    }

    #[test]
    fn unary_vertex_is_reported() {
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "x0").add_edge("r", "b", "x1");
        g.add_edge("a", "c", "y0");
        let report = validate_tree(&g);
        assert_eq!(
            report.violations,
            vec![Violation::UnaryVertex { vertex: "a".into() }]
        );
        assert!(report.to_string().contains("unary vertex"));
        assert!(matches!(g.build(), Err(Error::Validation(_))));
    }

    #[test]
    fn overlapping_label_sets_are_reported() {
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "x0").add_edge("r", "b", "x1");
        g.add_edge("a", "c", "y0").add_edge("a", "d", "y1");
        g.add_edge("b", "e", "y0").add_edge("b", "f", "z1");
        let report = validate_tree(&g);
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("inconsistent stage labels"));
    }

    #[test]
    fn structural_violations() {
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "x0").add_edge("r", "b", "x1");
        g.add_edge("a", "b", "y0").add_edge("a", "c", "y1");
        g.add_edge("z", "r", "w0").add_edge("z", "q", "w1");
        g.add_edge("r", "a", "x0");
        let v = validate_tree(&g).violations;
        assert!(v.contains(&Violation::RootHasParent { root: "r".into() }));
        assert!(v.contains(&Violation::MultipleParents { vertex: "b".into() }));
        assert!(v.contains(&Violation::Unreachable { vertex: "z".into() }));
        assert!(v.contains(&Violation::DuplicateLabel {
            vertex: "r".into(),
            label: "x0".into()
        }));
    }

    #[test]
    fn atom_name_violations() {
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "p1").add_edge("r", "b", "x1");
        assert!(validate_tree(&g)
            .violations
            .contains(&Violation::DuplicateName { name: "p1".into() }));
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "x0").add_edge("r", "b", "x1");
        g.set_atom_names(vec!["q".into()]);
        assert_eq!(
            validate_tree(&g).violations,
            vec![Violation::AtomNameCount {
                expected: 2,
                found: 1
            }]
        );
    }

    #[test]
    fn atoms_follow_declaration_order() {
        let t = binary_ternary();
        assert_eq!(t.num_atoms(), 6);
        let first = &t.atoms()[0];
        let path = t.atom_path(first);
        let labels: Vec<String> = path[1..]
            .iter()
            .map(|&v| t.symbols().name(t.incoming_label(v).unwrap()))
            .collect();
        assert_eq!(labels, ["theta0", "tau0"]);
        let last = &t.atoms()[5];
        assert_eq!(
            t.path_monomial(t.root(), last.leaf),
            Monomial::from_factors([
                (t.symbols().lookup("theta1").unwrap(), 1),
                (t.symbols().lookup("tau2").unwrap(), 1)
            ])
        );
    }

    #[test]
    fn star_tree_atoms() {
        let mut g = TreeGraph::new("r");
        for k in 0..4 {
            g.add_edge("r", &format!("l{k}"), &format!("x{k}"));
        }
        let t = g.build().unwrap();
        assert_eq!(t.num_atoms(), 4);
        assert!(t.atoms().iter().all(|a| t.atom_path(a).len() == 2));
    }

    #[test]
    fn paths_through_vertices() {
        let t = three_level();
        assert_eq!(
            t.paths_through(t.root()).unwrap(),
            (1..=8).collect::<Vec<_>>()
        );
        let v3 = t.vertex("v3").unwrap();
        assert_eq!(t.paths_through(v3).unwrap(), vec![1, 2]);
        let l5 = t.vertex("l5").unwrap();
        assert_eq!(t.paths_through(l5).unwrap(), vec![5]);
        assert!(matches!(
            t.paths_through(VertexId(99)),
            Err(Error::UnknownVertex(_))
        ));
        for v in t.non_leaf_vertices() {
            let mut union: Vec<usize> = t
                .children(v)
                .iter()
                .flat_map(|e| t.paths_through(e.child).unwrap())
                .collect();
            union.sort_unstable();
            assert_eq!(union, t.paths_through(v).unwrap());
        }
    }

    #[test]
    fn p_bracket_and_t_polynomials() {
        let t = three_level();
        let v3 = t.vertex("v3").unwrap();
        let v1 = t.vertex("v1").unwrap();
        assert_eq!(t.p_bracket(v3).unwrap(), &poly(&t, "p1 + p2"));
        assert_eq!(
            t.p_bracket(t.vertex("l7").unwrap()).unwrap(),
            &poly(&t, "p7")
        );
        assert!(t.t_polynomial(t.vertex("l1").unwrap()).unwrap().is_one());
        assert_eq!(t.t_polynomial(v3).unwrap(), &poly(&t, "sigma0 + sigma1"));
        assert_eq!(
            t.t_polynomial(v1).unwrap(),
            &poly(&t, "tau0*(sigma0+sigma1) + tau1*(eta0+eta1)")
        );
    }

    #[test]
    fn stages_and_positions() {
        let t = binary_ternary();
        let classes = &t.stage_classes().classes;
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].vertices, vec![t.root()]);
        assert_eq!(
            classes[1].vertices,
            vec![t.vertex("v1").unwrap(), t.vertex("v2").unwrap()]
        );

        let t = three_level();
        let v = |n: &str| t.vertex(n).unwrap();
        assert!(t.same_position(v("v3"), v("v5")).unwrap());
        assert!(t.same_position(v("v1"), v("v2")).unwrap());
        assert!(!t.same_position(v("v3"), v("v4")).unwrap());
        assert!(t.same_position(v("l1"), v("l1")).unwrap());
        assert_eq!(t.position_classes().len(), 4);
    }

    #[test]
    fn all_distinct_labels_give_singleton_stages() {
        let mut g = TreeGraph::new("r");
        g.add_edge("r", "a", "x0").add_edge("r", "b", "x1");
        g.add_edge("a", "c", "y0").add_edge("a", "d", "y1");
        g.add_edge("b", "e", "z0").add_edge("b", "f", "z1");
        let t = g.build().unwrap();
        assert!(t
            .stage_classes()
            .classes
            .iter()
            .all(|c| c.multiplicity() == 1));
        assert_eq!(t.stage_classes().nontrivial().count(), 0);
    }

    #[test]
    fn path_edges_cross_the_meeting_point() {
        let t = three_level();
        let v = |n: &str| t.vertex(n).unwrap();
        let edges = t.path_edges(v("v3"), v("v6"));
        assert_eq!(
            edges,
            vec![
                (v("v1"), v("v3")),
                (v("v0"), v("v1")),
                (v("v0"), v("v2")),
                (v("v2"), v("v6"))
            ]
        );
        assert_eq!(t.path_edges(v("v1"), v("l2")).len(), 2);
    }

    #[test]
    fn graph_round_trip() {
        let t = three_level();
        assert_eq!(t.to_graph().build().unwrap(), t);
    }
}
