//! CART-style decision trees (weighted Gini) and bagged forests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedMatrix;
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Weighted positive fraction of the training rows that reached here.
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Greedy weighted-Gini tree grown to `max_depth`. Rows with zero weight are
/// ignored. Among equally good splits the lowest feature index wins, then the
/// lowest threshold.
pub fn fit_tree(data: &EncodedMatrix, weights: &[f64], max_depth: usize) -> Tree {
    let rows: Vec<usize> = (0..data.n_rows).filter(|&i| weights[i] > 0.0).collect();
    let mut tree = Tree { nodes: Vec::new() };
    grow(data, weights, rows, max_depth, &mut tree.nodes);
    tree
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

fn weighted_gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    total * 2.0 * p * (1.0 - p)
}

fn grow(
    data: &EncodedMatrix,
    weights: &[f64],
    rows: Vec<usize>,
    depth_left: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let total: f64 = rows.iter().map(|&i| weights[i]).sum();
    let pos: f64 = rows
        .iter()
        .filter(|&&i| data.labels[i] == 1)
        .map(|&i| weights[i])
        .sum();
    let value = if total > 0.0 { pos / total } else { 0.0 };
    let id = nodes.len();
    nodes.push(Node::Leaf { value });
    let parent = weighted_gini(pos, total);
    if depth_left == 0 || parent <= 0.0 {
        return id;
    }

    let mut best: Option<Candidate> = None;
    let mut column: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
    for feature in 0..data.n_cols {
        column.clear();
        column.extend(rows.iter().map(|&i| {
            let y = if data.labels[i] == 1 { weights[i] } else { 0.0 };
            (data.row(i)[feature], y, weights[i])
        }));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut lw, mut lp) = (0.0, 0.0);
        for k in 0..column.len().saturating_sub(1) {
            lw += column[k].2;
            lp += column[k].1;
            if column[k].0 == column[k + 1].0 {
                continue;
            }
            let impurity = weighted_gini(lp, lw) + weighted_gini(pos - lp, total - lw);
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(Candidate {
                    impurity,
                    feature,
                    threshold: 0.5 * (column[k].0 + column[k + 1].0),
                });
            }
        }
    }

    let Some(best) = best.filter(|b| b.impurity < parent - 1e-12) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| data.row(i)[best.feature] <= best.threshold);
    let left = grow(data, weights, left_rows, depth_left - 1, nodes);
    let right = grow(data, weights, right_rows, depth_left - 1, nodes);
    nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
    id
}

/// Bootstrap-aggregated trees. Each tree sees a bootstrap resample expressed
/// as integer multiplicities on the row weights.
pub fn fit_forest(
    data: &EncodedMatrix,
    weights: &[f64],
    tree_count: usize,
    max_depth: usize,
    seed: u64,
    mode: ExecMode,
) -> Vec<Tree> {
    let n = data.n_rows;
    par::map_range(mode, tree_count, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut counts = vec![0u32; n];
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
        let bagged: Vec<f64> = counts.iter().zip(weights).map(|(&c, &w)| f64::from(c) * w).collect();
        fit_tree(data, &bagged, max_depth)
    })
}

/// Fraction of trees voting positive (leaf value >= 0.5).
pub fn forest_score(trees: &[Tree], x: &[f64]) -> f64 {
    let votes = trees.iter().filter(|t| t.score(x) >= 0.5).count();
    votes as f64 / trees.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(points: &[(f64, f64, u8)]) -> EncodedMatrix {
        let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.0, p.1]).collect();
        let labels = points.iter().map(|p| p.2).collect();
        let groups = (0..points.len()).map(|i| (i % 2) as u8).collect();
        EncodedMatrix::from_rows(&rows, labels, groups)
    }

    #[test]
    fn stump_splits_on_the_informative_feature() {
        let m = matrix(&[(0.0, 5.0, 0), (1.0, 5.0, 0), (2.0, 5.0, 1), (3.0, 5.0, 1)]);
        let t = fit_tree(&m, &[1.0; 4], 1);
        assert_eq!(
            t.nodes[0],
            Node::Split { feature: 0, threshold: 1.5, left: 1, right: 2 }
        );
        assert_eq!(t.score(&[0.0, 5.0]), 0.0);
        assert_eq!(t.score(&[3.0, 5.0]), 1.0);
    }

    #[test]
    fn ties_prefer_lowest_feature_index() {
        // Both features separate perfectly.
        let m = matrix(&[(0.0, 0.0, 0), (1.0, 1.0, 1)]);
        let t = fit_tree(&m, &[1.0; 2], 3);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let m = matrix(&[(0.0, 0.0, 1), (1.0, 1.0, 1)]);
        let t = fit_tree(&m, &[1.0; 2], 5);
        assert_eq!(t.nodes, vec![Node::Leaf { value: 1.0 }]);
    }

    #[test]
    fn forest_vote_fraction() {
        let yes = Tree { nodes: vec![Node::Leaf { value: 0.8 }] };
        let no = Tree { nodes: vec![Node::Leaf { value: 0.2 }] };
        let f = vec![yes.clone(), yes, no];
        assert!((forest_score(&f, &[0.0]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn forest_is_schedule_independent() {
        let pts: Vec<(f64, f64, u8)> = (0..60)
            .map(|i| ((i % 7) as f64, (i % 5) as f64, u8::from(i % 3 == 0)))
            .collect();
        let m = matrix(&pts);
        let a = fit_forest(&m, &[1.0; 60], 8, 3, 11, ExecMode::Sequential);
        let b = fit_forest(&m, &[1.0; 60], 8, 3, 11, ExecMode::Parallel);
        assert_eq!(a, b);
    }
}
