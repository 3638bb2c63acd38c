//! Membership of probability vectors in the model and recovery of edge
//! probabilities from a point.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ideals::{model_invariant_generators, paths_ideal_generators};
use crate::parametrization::psi_evaluate;
use crate::poly::{Polynomial, SymbolId};
use crate::tree::{StagedTree, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipVerdict {
    /// Entries lie in `(0, 1)` and sum to one.
    pub in_simplex: bool,
    pub invariants_vanish: bool,
    /// Model invariants that do not vanish, with their values.
    pub failures: Vec<(Polynomial, BigRational)>,
    /// Cross-check: the path differences vanish too.
    pub paths_vanish: bool,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        self.in_simplex && self.invariants_vanish
    }
}

fn check_length(t: &StagedTree, point: &[BigRational]) -> Result<()> {
    if point.len() != t.num_atoms() {
        return Err(Error::LengthMismatch {
            expected: t.num_atoms(),
            found: point.len(),
        });
    }
    Ok(())
}

fn atom_values(t: &StagedTree, point: &[BigRational]) -> BTreeMap<SymbolId, BigRational> {
    t.atom_symbols().zip(point.iter().cloned()).collect()
}

pub fn in_open_simplex(point: &[BigRational]) -> bool {
    let one = BigRational::one();
    point.iter().all(|x| x.is_positive() && *x < one) && point.iter().sum::<BigRational>() == one
}

pub fn membership(t: &StagedTree, point: &[BigRational]) -> Result<MembershipVerdict> {
    check_length(t, point)?;
    let values = atom_values(t, point);
    let eval = |p: &Polynomial| p.evaluate(&values).expect("point covers every atom");
    let failures: Vec<_> = model_invariant_generators(t)
        .polynomials()
        .filter_map(|g| {
            let x = eval(g);
            (!x.is_zero()).then(|| (g.clone(), x))
        })
        .collect();
    let paths_vanish = paths_ideal_generators(t)
        .polynomials()
        .all(|g| eval(g).is_zero());
    Ok(MembershipVerdict {
        in_simplex: in_open_simplex(point),
        invariants_vanish: failures.is_empty(),
        failures,
        paths_vanish,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeValue {
    pub parent: VertexId,
    pub child: VertexId,
    pub label: SymbolId,
    /// `p_[child] / p_[parent]`
    pub value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDisagreement {
    pub label: SymbolId,
    pub values: Vec<(VertexId, BigRational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalReport {
    pub edges: Vec<EdgeValue>,
    pub disagreements: Vec<LabelDisagreement>,
}

impl ConditionalReport {
    pub fn consistent(&self) -> bool {
        self.disagreements.is_empty()
    }

    /// One value per label, if every stage agrees.
    pub fn theta(&self) -> Option<BTreeMap<SymbolId, BigRational>> {
        self.consistent().then(|| {
            self.edges
                .iter()
                .map(|e| (e.label, e.value.clone()))
                .collect()
        })
    }
}

/// Recovers `p_[v'] / p_[v]` on every edge `v -> v'` of the tree.
pub fn conditional_probability_report(
    t: &StagedTree,
    point: &[BigRational],
) -> Result<ConditionalReport> {
    check_length(t, point)?;
    if !in_open_simplex(point) {
        return Err(Error::InvalidSimplexPoint(
            "entries must lie in (0, 1) and sum to 1".into(),
        ));
    }
    let values = atom_values(t, point);
    let bracket: Vec<BigRational> = t
        .vertices()
        .map(|v| {
            t.p_bracket(v)
                .expect("tree vertex")
                .evaluate(&values)
                .expect("point covers every atom")
        })
        .collect();
    let mut edges = Vec::new();
    let mut by_label: BTreeMap<SymbolId, Vec<(VertexId, BigRational)>> = BTreeMap::new();
    for v in t.non_leaf_vertices() {
        let denom = &bracket[v.0];
        if denom.is_zero() {
            return Err(Error::ZeroDenominator(t.name(v).to_string()));
        }
        for e in t.children(v) {
            let value = &bracket[e.child.0] / denom;
            by_label
                .entry(e.label)
                .or_default()
                .push((v, value.clone()));
            edges.push(EdgeValue {
                parent: v,
                child: e.child,
                label: e.label,
                value,
            });
        }
    }
    let disagreements = by_label
        .into_iter()
        .filter(|(_, vals)| vals.iter().any(|(_, x)| *x != vals[0].1))
        .map(|(label, values)| LabelDisagreement { label, values })
        .collect();
    Ok(ConditionalReport {
        edges,
        disagreements,
    })
}

/// A seeded point of the open simplex of every stage class: integers in
/// `[1, 1000]` normalised by their sum.
pub fn sample_theta(t: &StagedTree, seed: u64) -> BTreeMap<SymbolId, BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for class in &t.stage_classes().classes {
        let draws: Vec<u32> = class
            .labels
            .iter()
            .map(|_| rng.gen_range(1..=1000))
            .collect();
        let total: u32 = draws.iter().sum();
        for (&s, &d) in class.labels.iter().zip(&draws) {
            out.insert(s, BigRational::new(BigInt::from(d), BigInt::from(total)));
        }
    }
    out
}

/// The image of [`sample_theta`] in the probability simplex.
pub fn sample_point(t: &StagedTree, seed: u64) -> Vec<BigRational> {
    psi_evaluate(t, &sample_theta(t, seed)).expect("sampled parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeGraph;

    fn two_by_three() -> StagedTree {
        let mut g = TreeGraph::new("v0");
        g.add_edge("v0", "v1", "theta0")
            .add_edge("v0", "v2", "theta1");
        for (v, base) in [("v1", 0), ("v2", 3)] {
            for k in 0..3 {
                g.add_edge(v, &format!("l{}", base + k), &format!("tau{k}"));
            }
        }
        g.build().unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn member_point() -> Vec<BigRational> {
        vec![q(1, 12), q(1, 6), q(1, 4), q(1, 12), q(1, 6), q(1, 4)]
    }

    #[test]
    fn image_point_is_a_member() {
        let v = membership(&two_by_three(), &member_point()).unwrap();
        assert!(v.is_member() && v.paths_vanish);
        let uniform = vec![q(1, 6); 6];
        assert!(membership(&two_by_three(), &uniform).unwrap().is_member());
    }

    #[test]
    fn non_member_reports_failing_generators() {
        let t = two_by_three();
        let mut p = vec![q(1, 10); 6];
        p[0] = q(1, 2);
        let v = membership(&t, &p).unwrap();
        assert!(v.in_simplex);
        assert!(!v.invariants_vanish && !v.is_member());
        let g = crate::poly::parse_polynomial("p1*(p5+p6) - p4*(p2+p3)", t.symbols()).unwrap();
        let hit = v
            .failures
            .iter()
            .find(|(f, _)| *f == g.clone().normalize_sign())
            .unwrap();
        assert_eq!(hit.1.abs(), q(2, 25));
    }

    #[test]
    fn boundary_points_are_outside_the_open_simplex() {
        let t = two_by_three();
        let p = vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2), q(0, 1), q(0, 1)];
        let v = membership(&t, &p).unwrap();
        assert!(!v.in_simplex && !v.is_member());
        assert!(matches!(
            conditional_probability_report(&t, &p),
            Err(Error::InvalidSimplexPoint(_))
        ));
    }

    #[test]
    fn length_is_checked() {
        assert_eq!(
            membership(&two_by_three(), &[q(1, 1)]),
            Err(Error::LengthMismatch {
                expected: 6,
                found: 1
            })
        );
    }

    #[test]
    fn recovered_edge_probabilities() {
        let t = two_by_three();
        let r = conditional_probability_report(&t, &member_point()).unwrap();
        assert!(r.consistent());
        let theta = r.theta().unwrap();
        let get = |n: &str| theta[&t.symbols().lookup(n).unwrap()].clone();
        assert_eq!(get("theta0"), q(1, 2));
        assert_eq!(get("tau0"), q(1, 6));
        assert_eq!(get("tau1"), q(1, 3));
        assert_eq!(get("tau2"), q(1, 2));
    }

    #[test]
    fn non_member_labels_disagree() {
        let t = two_by_three();
        let mut p = vec![q(1, 10); 6];
        p[0] = q(1, 2);
        let r = conditional_probability_report(&t, &p).unwrap();
        assert!(!r.consistent());
        assert_eq!(r.disagreements.len(), 3);
        assert!(r.theta().is_none());
    }

    #[test]
    fn sampling_is_deterministic_and_normalised() {
        let t = two_by_three();
        assert_eq!(sample_theta(&t, 7), sample_theta(&t, 7));
        assert_ne!(sample_theta(&t, 7), sample_theta(&t, 8));
        for class in &t.stage_classes().classes {
            let th = sample_theta(&t, 3);
            let s: BigRational = class.labels.iter().map(|l| th[l].clone()).sum();
            assert!(s.is_one());
        }
        let p = sample_point(&t, 11);
        assert!(membership(&t, &p).unwrap().is_member());
    }
}
