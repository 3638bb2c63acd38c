#![allow(dead_code)]

use std::collections::BTreeSet;

use stagedtree::poly::{parse_polynomial, Polynomial};
use stagedtree::tree::{StagedTree, TreeGraph};

pub fn two_by_three() -> StagedTree {
    let mut g = TreeGraph::new("v0");
    g.add_edge("v0", "v1", "theta0")
        .add_edge("v0", "v2", "theta1");
    for (v, base) in [("v1", 1), ("v2", 4)] {
        for k in 0..3 {
            g.add_edge(v, &format!("l{}", base + k), &format!("tau{k}"));
        }
    }
    g.build().unwrap()
}

pub fn binary_three_level(leaf_labels: [&str; 4]) -> StagedTree {
    let mut g = TreeGraph::new("v0");
    g.add_edge("v0", "v1", "theta0")
        .add_edge("v0", "v2", "theta1");
    g.add_edge("v1", "v3", "tau0").add_edge("v1", "v4", "tau1");
    g.add_edge("v2", "v5", "tau0").add_edge("v2", "v6", "tau1");
    for (n, (v, s)) in ["v3", "v4", "v5", "v6"].iter().zip(leaf_labels).enumerate() {
        g.add_edge(v, &format!("l{}", 2 * n + 1), &format!("{s}0"));
        g.add_edge(v, &format!("l{}", 2 * n + 2), &format!("{s}1"));
    }
    g.build().unwrap()
}

pub fn unbalanced_repeat() -> StagedTree {
    let mut g = TreeGraph::new("v0");
    g.add_edge("v0", "v1", "theta0")
        .add_edge("v0", "v2", "theta1");
    g.add_edge("v1", "v3", "theta0")
        .add_edge("v1", "v4", "theta1");
    g.build().unwrap()
}

pub fn survival() -> StagedTree {
    let mut g = TreeGraph::new("v0");
    g.add_edge("v0", "v1", "hostile")
        .add_edge("v0", "v2", "benign");
    g.add_edge("v1", "v3", "high").add_edge("v1", "v4", "low");
    g.add_edge("v2", "v5", "high").add_edge("v2", "v6", "low");
    g.add_edge("v3", "v7", "die")
        .add_edge("v3", "v8", "survive");
    g.add_edge("v4", "v9", "die")
        .add_edge("v4", "v10", "survive");
    g.add_edge("v8", "v11", "full")
        .add_edge("v8", "v12", "partial");
    g.add_edge("v10", "v13", "full")
        .add_edge("v10", "v14", "partial");
    g.build().unwrap()
}

pub fn polys(t: &StagedTree, gens: &[&str]) -> BTreeSet<Polynomial> {
    gens.iter()
        .map(|s| parse_polynomial(s, t.symbols()).unwrap().normalize_sign())
        .collect()
}

/// A staged tree grown from a stream of choices. Vertices with equal
/// out-degree are coloured from a small palette and coloured vertices
/// share labels, so every output is valid.
pub fn random_tree(choices: &[u8]) -> StagedTree {
    let mut it = choices.iter().copied().cycle();
    let mut g = TreeGraph::new("r");
    let mut frontier = vec![("r".to_string(), 0usize)];
    let mut counter = 0usize;
    let mut internal = 0usize;
    while let Some((v, depth)) = frontier.pop() {
        let c = it.next().unwrap();
        let expand = v == "r" || (depth < 3 && internal < 8 && c % 3 != 0);
        if !expand {
            continue;
        }
        internal += 1;
        let degree = 2 + (it.next().unwrap() % 2) as usize;
        let colour = it.next().unwrap() % 3;
        for k in 0..degree {
            counter += 1;
            let child = format!("u{counter}");
            let label = if colour == 0 {
                format!("{v}_{k}")
            } else {
                format!("s{degree}{colour}_{k}")
            };
            g.add_edge(&v, &child, &label);
            frontier.push((child, depth + 1));
        }
    }
    g.build().unwrap()
}
