//! Generator sets read directly off a staged tree.
//!
//! * model invariants: odds-ratio differences `p_[v]p_[w'] - p_[v']p_[w]`
//!   for every same-stage pair and shared label;
//! * path differences `p_[v_i]p_[w_j] - p_[w_i]p_[v_j]` for every stage pair
//!   and index pair `i < j` under label alignment;
//! * maximal path differences, obtained by pushing the endpoints of a path
//!   pair down the tree while the labels added to both paths multiply to the
//!   same monomial.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, SymbolId};
use crate::tree::{StageClass, StagedTree, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdealKind {
    ModelInvariants,
    Paths,
    MaximalPaths,
}

impl fmt::Display for IdealKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdealKind::ModelInvariants => "model",
            IdealKind::Paths => "paths",
            IdealKind::MaximalPaths => "mpaths",
        })
    }
}

/// The stage pair and aligned label pair a path pair grows from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed {
    pub v: VertexId,
    pub w: VertexId,
    pub i: SymbolId,
    pub j: SymbolId,
}

/// Two vertex-to-vertex paths `(first_head -> first_tail, second_head -> second_tail)`.
///
/// Its path difference is `p_[first_head]p_[first_tail] - p_[second_head]p_[second_tail]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathPair {
    pub first_head: VertexId,
    pub first_tail: VertexId,
    pub second_head: VertexId,
    pub second_tail: VertexId,
    pub seed: Seed,
}

impl PathPair {
    pub fn endpoints(&self) -> [VertexId; 4] {
        [
            self.first_head,
            self.first_tail,
            self.second_head,
            self.second_tail,
        ]
    }

    fn with_endpoint(mut self, slot: usize, v: VertexId) -> Self {
        match slot {
            0 => self.first_head = v,
            1 => self.first_tail = v,
            2 => self.second_head = v,
            _ => self.second_tail = v,
        }
        self
    }

    pub fn difference(&self, t: &StagedTree) -> Polynomial {
        let p = |v: VertexId| t.p_bracket(v).expect("endpoint belongs to the tree");
        p(self.first_head) * p(self.first_tail) - p(self.second_head) * p(self.second_tail)
    }

    /// True if every endpoint of `self` lies at or below the matching
    /// endpoint of `other`, i.e. `self` is `other` with edges added.
    pub fn extends(&self, other: &PathPair, t: &StagedTree) -> bool {
        self.endpoints()
            .iter()
            .zip(other.endpoints())
            .all(|(&mine, theirs)| t.is_ancestor_or_self(theirs, mine))
    }

    pub fn all_leaves(&self, t: &StagedTree) -> bool {
        self.endpoints().iter().all(|&v| t.is_leaf(v))
    }

    pub fn describe(&self, t: &StagedTree) -> String {
        format!(
            "({}->{}, {}->{})",
            t.name(self.first_head),
            t.name(self.first_tail),
            t.name(self.second_head),
            t.name(self.second_tail)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    OddsRatio {
        v: VertexId,
        w: VertexId,
        label: SymbolId,
    },
    PathDifference(PathPair),
}

impl Origin {
    pub fn stage_pair(&self) -> (VertexId, VertexId) {
        match self {
            Origin::OddsRatio { v, w, .. } => (*v, *w),
            Origin::PathDifference(pp) => (pp.seed.v, pp.seed.w),
        }
    }

    pub fn describe(&self, t: &StagedTree) -> String {
        match self {
            Origin::OddsRatio { v, w, label } => format!(
                "{}~{} label {}",
                t.name(*v),
                t.name(*w),
                t.symbols().name(*label)
            ),
            Origin::PathDifference(pp) => format!(
                "{}~{} ({},{}) {}",
                t.name(pp.seed.v),
                t.name(pp.seed.w),
                t.symbols().name(pp.seed.i),
                t.symbols().name(pp.seed.j),
                pp.describe(t)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub polynomial: Polynomial,
    pub origins: Vec<Origin>,
}

/// Sign-normalised, deduplicated generators with every origin kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub kind: IdealKind,
    pub generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn from_raw<I>(kind: IdealKind, raw: I) -> Self
    where
        I: IntoIterator<Item = (Polynomial, Origin)>,
    {
        let mut merged: BTreeMap<Polynomial, Vec<Origin>> = BTreeMap::new();
        for (p, origin) in raw {
            if p.is_zero() {
                continue;
            }
            merged.entry(p.normalize_sign()).or_default().push(origin);
        }
        GeneratorSet {
            kind,
            generators: merged
                .into_iter()
                .rev()
                .map(|(polynomial, origins)| Generator {
                    polynomial,
                    origins,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn polynomials(&self) -> impl Iterator<Item = &Polynomial> {
        self.generators.iter().map(|g| &g.polynomial)
    }

    pub fn polynomial_set(&self) -> BTreeSet<Polynomial> {
        self.polynomials().cloned().collect()
    }

    /// Membership of `p` up to sign.
    pub fn contains(&self, p: &Polynomial) -> bool {
        let p = p.clone().normalize_sign();
        self.polynomials().any(|g| *g == p)
    }
}

fn check_stage_pair(t: &StagedTree, v: VertexId, w: VertexId) -> Result<&StageClass> {
    t.p_bracket(v)?;
    t.p_bracket(w)?;
    match t.stage_of(v) {
        Some(class) if v != w && t.same_stage(v, w)? => Ok(class),
        _ => Err(Error::NotSameStage(
            t.name(v).to_string(),
            t.name(w).to_string(),
        )),
    }
}

/// Seed pairs `(v_i -> w_j, w_i -> v_j)` for `i < j`, labels aligned by symbol.
pub fn seed_pairs(t: &StagedTree, v: VertexId, w: VertexId) -> Result<Vec<PathPair>> {
    let class = check_stage_pair(t, v, w)?;
    let child = |x: VertexId, s: SymbolId| t.child_by_label(x, s).expect("stage shares labels");
    let mut out = Vec::new();
    for (a, &si) in class.labels.iter().enumerate() {
        for &sj in &class.labels[a + 1..] {
            out.push(PathPair {
                first_head: child(v, si),
                first_tail: child(w, sj),
                second_head: child(w, si),
                second_tail: child(v, sj),
                seed: Seed { v, w, i: si, j: sj },
            });
        }
    }
    Ok(out)
}

fn all_seeds<'a>(t: &'a StagedTree, class: &'a StageClass) -> impl Iterator<Item = PathPair> + 'a {
    class
        .pairs()
        .flat_map(move |(v, w)| seed_pairs(t, v, w).expect("pair from one stage class"))
}

/// Generators of the stage ideal of `v ~ w`, as written (not sign-normalised).
pub fn stage_path_generators(t: &StagedTree, v: VertexId, w: VertexId) -> Result<Vec<Polynomial>> {
    Ok(seed_pairs(t, v, w)?
        .iter()
        .map(|pp| pp.difference(t))
        .collect())
}

fn odds_ratios(t: &StagedTree, class: &StageClass) -> Vec<(Polynomial, Origin)> {
    let mut out = Vec::new();
    for (v, w) in class.pairs() {
        for &label in &class.labels {
            let vc = t.child_by_label(v, label).expect("stage shares labels");
            let wc = t.child_by_label(w, label).expect("stage shares labels");
            let p = |x| t.p_bracket(x).expect("tree vertex");
            out.push((
                p(v) * p(wc) - p(vc) * p(w),
                Origin::OddsRatio { v, w, label },
            ));
        }
    }
    out
}

pub fn model_invariant_generators(t: &StagedTree) -> GeneratorSet {
    GeneratorSet::from_raw(
        IdealKind::ModelInvariants,
        t.stage_classes()
            .nontrivial()
            .flat_map(|c| odds_ratios(t, c)),
    )
}

/// Odds-ratio generators contributed by one stage class.
pub fn stage_invariant_generators(t: &StagedTree, class: &StageClass) -> GeneratorSet {
    GeneratorSet::from_raw(IdealKind::ModelInvariants, odds_ratios(t, class))
}

fn path_differences(t: &StagedTree, class: &StageClass) -> Vec<(Polynomial, Origin)> {
    all_seeds(t, class)
        .map(|pp| (pp.difference(t), Origin::PathDifference(pp)))
        .collect()
}

pub fn paths_ideal_generators(t: &StagedTree) -> GeneratorSet {
    GeneratorSet::from_raw(
        IdealKind::Paths,
        t.stage_classes()
            .nontrivial()
            .flat_map(|c| path_differences(t, c)),
    )
}

/// Path differences contributed by one stage class.
pub fn stage_paths_generators(t: &StagedTree, class: &StageClass) -> GeneratorSet {
    GeneratorSet::from_raw(IdealKind::Paths, path_differences(t, class))
}

/// Children of `x` that move away from `other` (a path endpoint may not
/// walk back along its own path).
fn outward_children(t: &StagedTree, x: VertexId, other: VertexId) -> Vec<(VertexId, SymbolId)> {
    t.children(x)
        .iter()
        .filter(|e| !t.is_ancestor_or_self(e.child, other))
        .map(|e| (e.child, e.label))
        .collect()
}

const SLOTS: [(usize, usize); 4] = [(0, 1), (1, 0), (2, 3), (3, 2)];

/// Every pair obtained by adding one edge at an endpoint of each path, the
/// two new edges carrying the same label.
pub fn extend_pair(t: &StagedTree, pp: &PathPair) -> Vec<PathPair> {
    let ends = pp.endpoints();
    let mut out = BTreeSet::new();
    for &(s1, o1) in &SLOTS[..2] {
        for (c1, l1) in outward_children(t, ends[s1], ends[o1]) {
            for &(s2, o2) in &SLOTS[2..] {
                for (c2, l2) in outward_children(t, ends[s2], ends[o2]) {
                    if l1 == l2 {
                        out.insert(pp.with_endpoint(s1, c1).with_endpoint(s2, c2));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Descendants of `x` reachable without walking toward `other`, each with
/// the product of labels on the way down (including `x` itself with `1`).
fn downward_chains(t: &StagedTree, x: VertexId, other: VertexId) -> Vec<(VertexId, Monomial)> {
    let blocked = t
        .children(x)
        .iter()
        .find(|e| t.is_ancestor_or_self(e.child, other))
        .map(|e| e.child);
    t.subtree(x)
        .filter(|&d| !blocked.is_some_and(|b| t.is_ancestor_or_self(b, d)))
        .map(|d| (d, t.path_monomial(x, d)))
        .collect()
}

/// All extensions of `base` (including `base` itself): endpoint completions
/// whose added labels multiply to the same monomial on both paths.
pub fn all_extensions(t: &StagedTree, base: &PathPair) -> Vec<PathPair> {
    let [fh, ft, sh, st] = base.endpoints();
    let mut first: HashMap<Monomial, Vec<(VertexId, VertexId)>> = HashMap::new();
    let ft_chains = downward_chains(t, ft, fh);
    for (a, ma) in downward_chains(t, fh, ft) {
        for (b, mb) in &ft_chains {
            first.entry(ma.mul(mb)).or_default().push((a, *b));
        }
    }
    let st_chains = downward_chains(t, st, sh);
    let mut out = vec![*base];
    for (c, mc) in downward_chains(t, sh, st) {
        for (d, md) in &st_chains {
            let m = mc.mul(md);
            if m.is_one() {
                continue;
            }
            if let Some(matches) = first.get(&m) {
                for &(a, b) in matches {
                    out.push(PathPair {
                        first_head: a,
                        first_tail: b,
                        second_head: c,
                        second_tail: *d,
                        seed: base.seed,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

/// Maximal extensions of `seed`, found by exhaustive search over descendant
/// completions. The result is an antichain under [`PathPair::extends`].
pub fn maximal_extensions(t: &StagedTree, seed: &PathPair) -> Vec<PathPair> {
    let all = all_extensions(t, seed);
    all.iter()
        .filter(|e| !all.iter().any(|o| o != *e && o.extends(e, t)))
        .copied()
        .collect()
}

/// True iff every maximal extension of `seed` ends in four leaves.
pub fn fully_extends(t: &StagedTree, seed: &PathPair) -> bool {
    maximal_extensions(t, seed)
        .iter()
        .all(|pp| pp.all_leaves(t))
}

/// Result of running the one-edge-at-a-time search next to the exhaustive one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionDiagnostics {
    pub seed: PathPair,
    pub exhaustive: Vec<PathPair>,
    pub stepwise: Vec<PathPair>,
}

impl ExtensionDiagnostics {
    pub fn agree(&self) -> bool {
        self.exhaustive == self.stepwise
    }

    /// Maximal extensions that equal-label single steps never reach.
    pub fn missed_by_stepwise(&self) -> Vec<PathPair> {
        self.exhaustive
            .iter()
            .filter(|p| !self.stepwise.contains(p))
            .copied()
            .collect()
    }

    /// Pairs where the stepwise search stopped although a longer completion exists.
    pub fn stepwise_not_maximal(&self) -> Vec<PathPair> {
        self.stepwise
            .iter()
            .filter(|p| !self.exhaustive.contains(p))
            .copied()
            .collect()
    }
}

/// Pairs reachable from `seed` by [`extend_pair`] that admit no further step.
pub fn stepwise_maximal_extensions(t: &StagedTree, seed: &PathPair) -> Vec<PathPair> {
    let mut seen = BTreeSet::from([*seed]);
    let mut queue = VecDeque::from([*seed]);
    let mut terminal = Vec::new();
    while let Some(pp) = queue.pop_front() {
        let next = extend_pair(t, &pp);
        if next.is_empty() {
            terminal.push(pp);
        }
        for n in next {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    terminal.sort();
    terminal
}

pub fn extension_diagnostics(t: &StagedTree, seed: &PathPair) -> ExtensionDiagnostics {
    ExtensionDiagnostics {
        seed: *seed,
        exhaustive: maximal_extensions(t, seed),
        stepwise: stepwise_maximal_extensions(t, seed),
    }
}

/// Diagnostics for every seed of the tree where the two searches differ.
pub fn extension_disagreements(t: &StagedTree) -> Vec<ExtensionDiagnostics> {
    t.stage_classes()
        .nontrivial()
        .flat_map(|c| all_seeds(t, c))
        .map(|s| extension_diagnostics(t, &s))
        .filter(|d| !d.agree())
        .collect()
}

pub fn mpaths_generators(t: &StagedTree) -> GeneratorSet {
    GeneratorSet::from_raw(
        IdealKind::MaximalPaths,
        t.stage_classes()
            .nontrivial()
            .flat_map(|c| all_seeds(t, c))
            .flat_map(|seed| maximal_extensions(t, &seed))
            .map(|pp| (pp.difference(t), Origin::PathDifference(pp))),
    )
}

pub fn generators(t: &StagedTree, kind: IdealKind) -> GeneratorSet {
    match kind {
        IdealKind::ModelInvariants => model_invariant_generators(t),
        IdealKind::Paths => paths_ideal_generators(t),
        IdealKind::MaximalPaths => mpaths_generators(t),
    }
}

/// Product of `p_[v]` over all vertices sharing a stage with another vertex:
/// the denominators of the identified conditional probabilities.
pub fn denominator_product(t: &StagedTree) -> Polynomial {
    t.stage_classes()
        .nontrivial()
        .flat_map(|c| c.vertices.iter())
        .map(|&v| t.p_bracket(v).expect("tree vertex").clone())
        .product()
}

/// The two ways of counting free parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension {
    /// `Σ (k_i - 1)` over stage classes.
    pub by_stages: i64,
    /// `#E - #V' - Σ (m_i - 1)(k_i - 1)`.
    pub by_edges: i64,
}

pub fn dimension_forms(t: &StagedTree) -> Dimension {
    let classes = &t.stage_classes().classes;
    let by_stages = classes.iter().map(|c| c.out_degree() as i64 - 1).sum();
    let correction: i64 = classes
        .iter()
        .map(|c| (c.multiplicity() as i64 - 1) * (c.out_degree() as i64 - 1))
        .sum();
    let by_edges = t.num_edges() as i64 - t.non_leaf_vertices().count() as i64 - correction;
    Dimension {
        by_stages,
        by_edges,
    }
}

pub fn model_dimension(t: &StagedTree) -> usize {
    let d = dimension_forms(t);
    assert_eq!(
        d.by_stages, d.by_edges,
        "parameter counts disagree on a validated tree"
    );
    d.by_stages as usize
}
