//! The monomial map `p_i -> product of labels on the i-th root-to-leaf path`,
//! its reduction by the local sum-to-one relations, and the toricity test.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ideals::{self, IdealKind};
use crate::poly::{Monomial, Polynomial, SymbolId};
use crate::tree::{StagedTree, VertexId};

/// One eliminated label per stage class (the last one declared), replaced
/// by `1 - (sum of the other labels of the class)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumToOneReduction {
    pub rules: Vec<(SymbolId, Polynomial)>,
}

impl SumToOneReduction {
    pub fn new(t: &StagedTree) -> Self {
        let rules = t
            .stage_classes()
            .classes
            .iter()
            .map(|c| {
                let (&last, rest) = c.labels.split_last().expect("non-leaf vertex has edges");
                let others: Polynomial = rest.iter().map(|&s| Polynomial::var(s)).sum();
                (last, Polynomial::one() - others)
            })
            .collect();
        SumToOneReduction { rules }
    }

    pub fn substitution(&self) -> BTreeMap<SymbolId, Polynomial> {
        self.rules.iter().cloned().collect()
    }

    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        p.substitute(&self.substitution())
    }
}

fn toric_substitution(t: &StagedTree) -> BTreeMap<SymbolId, Polynomial> {
    t.atoms()
        .iter()
        .map(|a| {
            let m = t.path_monomial(t.root(), a.leaf);
            (a.symbol, Polynomial::term(BigRational::one(), m))
        })
        .collect()
}

fn check_atoms(t: &StagedTree, f: &Polynomial) -> Result<()> {
    match f.symbols().into_iter().find(|&s| !t.is_atom_symbol(s)) {
        Some(s) => Err(Error::ForeignSymbol(t.symbols().name(s))),
        None => Ok(()),
    }
}

/// Image of `f` under the monomial map, without sum-to-one relations.
pub fn phi_toric_image(t: &StagedTree, f: &Polynomial) -> Result<Polynomial> {
    check_atoms(t, f)?;
    Ok(f.substitute(&toric_substitution(t)))
}

/// Image of `f` in the label ring modulo the sum-to-one relations.
pub fn phi_image(t: &StagedTree, f: &Polynomial) -> Result<Polynomial> {
    let toric = phi_toric_image(t, f)?;
    Ok(SumToOneReduction::new(t).reduce(&toric))
}

/// A failing index pair of the star condition for the stage pair `(v, w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarWitness {
    pub v: VertexId,
    pub w: VertexId,
    pub i: SymbolId,
    pub j: SymbolId,
    /// `t(v_i)t(w_j) - t(w_i)t(v_j)`, nonzero.
    pub difference: Polynomial,
}

/// `None` when `t(v_i)t(w_j) = t(w_i)t(v_j)` for all aligned children,
/// otherwise the first failing pair.
pub fn star_condition(t: &StagedTree, v: VertexId, w: VertexId) -> Result<Option<StarWitness>> {
    if !t.same_stage(v, w)? {
        return Err(Error::NotSameStage(
            t.name(v).to_string(),
            t.name(w).to_string(),
        ));
    }
    let Some(class) = t.stage_of(v).filter(|_| v != w) else {
        return Ok(None);
    };
    let tp = |x: VertexId, s: SymbolId| {
        let c = t.child_by_label(x, s).expect("stage shares labels");
        t.t_polynomial(c).expect("tree vertex")
    };
    for (a, &i) in class.labels.iter().enumerate() {
        for &j in &class.labels[a + 1..] {
            let difference = tp(v, i) * tp(w, j) - tp(w, i) * tp(v, j);
            if !difference.is_zero() {
                return Ok(Some(StarWitness {
                    v,
                    w,
                    i,
                    j,
                    difference,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricVerdict {
    pub toric: bool,
    /// Every pair of same-stage vertices is also in the same position.
    pub stages_are_positions: bool,
    pub failures: Vec<StarWitness>,
}

/// Full star-condition check over every stage pair.
pub fn toric_verdict(t: &StagedTree) -> ToricVerdict {
    let mut failures = Vec::new();
    let mut stages_are_positions = true;
    for class in t.stage_classes().nontrivial() {
        for (v, w) in class.pairs() {
            stages_are_positions &= t.same_position(v, w).expect("tree vertex");
            if let Some(wit) = star_condition(t, v, w).expect("stage pair") {
                failures.push(wit);
            }
        }
    }
    ToricVerdict {
        toric: failures.is_empty(),
        stages_are_positions,
        failures,
    }
}

pub fn is_toric(t: &StagedTree) -> bool {
    let positions = t.stage_classes().nontrivial().all(|c| {
        c.pairs()
            .all(|(v, w)| t.same_position(v, w).expect("tree vertex"))
    });
    positions || toric_verdict(t).toric
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentEntry {
    pub kind: IdealKind,
    pub polynomial: Polynomial,
    pub phi_image: Polynomial,
    /// Only filled in for maximal path differences.
    pub phi_toric_image: Option<Polynomial>,
    pub binomial: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContainmentReport {
    pub entries: Vec<ContainmentEntry>,
}

impl ContainmentReport {
    /// Every generator maps to zero under the reduced map.
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.phi_image.is_zero())
    }

    pub fn violations(&self) -> impl Iterator<Item = &ContainmentEntry> {
        self.entries.iter().filter(|e| !e.phi_image.is_zero())
    }

    /// Every maximal path difference is a binomial in the toric kernel.
    pub fn mpaths_binomial_in_toric_kernel(&self) -> bool {
        self.entries
            .iter()
            .filter(|e| e.kind == IdealKind::MaximalPaths)
            .all(|e| {
                e.binomial == Some(true)
                    && e.phi_toric_image.as_ref().is_some_and(Polynomial::is_zero)
            })
    }
}

pub fn containment_report(t: &StagedTree) -> ContainmentReport {
    let reduction = SumToOneReduction::new(t);
    let toric = toric_substitution(t);
    let mut entries = Vec::new();
    for kind in [
        IdealKind::ModelInvariants,
        IdealKind::Paths,
        IdealKind::MaximalPaths,
    ] {
        for p in ideals::generators(t, kind).polynomials() {
            let toric_image = p.substitute(&toric);
            let mpaths = kind == IdealKind::MaximalPaths;
            entries.push(ContainmentEntry {
                kind,
                polynomial: p.clone(),
                phi_image: reduction.reduce(&toric_image),
                binomial: mpaths.then(|| p.is_binomial()),
                phi_toric_image: mpaths.then_some(toric_image),
            });
        }
    }
    ContainmentReport { entries }
}

/// Checks that `theta` is a point of the open simplex of every stage class.
pub fn check_theta(t: &StagedTree, theta: &BTreeMap<SymbolId, BigRational>) -> Result<()> {
    let name = |s: SymbolId| t.symbols().name(s);
    for class in &t.stage_classes().classes {
        let mut sum = BigRational::zero();
        for &s in &class.labels {
            let x = theta
                .get(&s)
                .ok_or_else(|| Error::InvalidSimplexPoint(format!("no value for `{}`", name(s))))?;
            if !x.is_positive() {
                return Err(Error::InvalidSimplexPoint(format!(
                    "`{}` = {} is not positive",
                    name(s),
                    x
                )));
            }
            sum += x;
        }
        if !sum.is_one() {
            let names: Vec<String> = class.labels.iter().map(|&s| name(s)).collect();
            return Err(Error::InvalidSimplexPoint(format!(
                "values of {} sum to {}",
                names.join(", "),
                sum
            )));
        }
    }
    Ok(())
}

fn eval_monomial(m: &Monomial, theta: &BTreeMap<SymbolId, BigRational>) -> BigRational {
    m.factors()
        .iter()
        .map(|&(s, e)| num_traits::pow(theta[&s].clone(), e as usize))
        .product()
}

/// Atomic probabilities at a parameter point, in atom order.
pub fn psi_evaluate(
    t: &StagedTree,
    theta: &BTreeMap<SymbolId, BigRational>,
) -> Result<Vec<BigRational>> {
    check_theta(t, theta)?;
    Ok(t.atoms()
        .iter()
        .map(|a| eval_monomial(&t.path_monomial(t.root(), a.leaf), theta))
        .collect())
}
