//! CART trees and bagged random forests.
//!
//! Splits maximise `s_L²/n_L + s_R²/n_R` (s = label sum). For 0/1 labels this
//! is the Gini-impurity reduction; for real labels it is the reduction in
//! squared error, so one scan serves both classification and regression.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Candidate features per split; `None` means ⌈√p⌉.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 8,
            min_leaf: 5,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::validation("n_trees", "must be at least 1"));
        }
        if self.min_leaf == 0 {
            return Err(Error::validation("min_leaf", "must be at least 1"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::validation(
                "features_per_split",
                "must be at least 1",
            ));
        }
        Ok(())
    }

    fn mtry(&self, p: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    };
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

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Row-major training matrix view.
#[derive(Debug, Clone, Copy)]
pub struct Matrix<'a> {
    pub values: &'a [f64],
    pub p: usize,
}

impl<'a> Matrix<'a> {
    pub fn new(values: &'a [f64], p: usize) -> Self {
        Self { values, p }
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.p).unwrap_or(0)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }
}

struct Builder<'a, R: Rng> {
    x: Matrix<'a>,
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let value = sum / idx.len() as f64;
        self.nodes.push(Node::Leaf { value });
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return at;
        }
        if idx.iter().all(|&i| self.y[i] == self.y[idx[0]]) {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(idx, sum) else {
            return at;
        };
        let mut mid = 0;
        for k in 0..idx.len() {
            if self.x.at(idx[k], feature) <= threshold {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&mut self, idx: &[usize], total: f64) -> Option<(usize, f64)> {
        let n = idx.len();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let features = sample(self.rng, self.x.p, self.mtry);
        let mut order: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in features.iter() {
            order.clear();
            order.extend(idx.iter().map(|&i| (self.x.at(i, feature), self.y[i])));
            order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += order[k - 1].1;
                if k < self.min_leaf || n - k < self.min_leaf || order[k - 1].0 == order[k].0 {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
                let gain = score - parent;
                if gain > 1e-12 * parent.abs().max(1.0) && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, 0.5 * (order[k - 1].0 + order[k].0)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Grow a single CART tree on the rows listed in `sample` (repeats allowed).
pub fn fit_tree<R: Rng>(
    x: Matrix<'_>,
    y: &[f64],
    sample: &[usize],
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
    rng: &mut R,
) -> Tree {
    let mut idx = sample.to_vec();
    let mut b = Builder {
        x,
        y,
        max_depth,
        min_leaf: min_leaf.max(1),
        mtry: mtry.clamp(1, x.p.max(1)),
        rng,
        nodes: Vec::new(),
    };
    b.grow(&mut idx, 0);
    Tree { nodes: b.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    p: usize,
}

impl Forest {
    /// Bagged ensemble. Tree `t` draws from stream `(cfg.seed, t)`, so the
    /// result does not depend on how trees are scheduled across threads.
    pub fn fit(x: Matrix<'_>, y: &[f64], cfg: &ForestConfig) -> Result<Self> {
        cfg.validate()?;
        let n = x.rows();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n < 2 * cfg.min_leaf {
            return Err(Error::Precondition(format!(
                "forest needs at least 2·min_leaf = {} rows, got {n}",
                2 * cfg.min_leaf
            )));
        }
        let mtry = cfg.mtry(x.p);
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngStream::new(cfg.seed, t as u64).rng();
                let rows: Vec<usize> = if cfg.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_tree(x, y, &rows, cfg.max_depth, cfg.min_leaf, mtry, &mut rng)
            })
            .collect();
        Ok(Self { trees, p: x.p })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Mean of the per-tree leaf values.
    pub fn predict_mean(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Majority vote of per-tree 0/1 decisions (leaf fraction ≥ ½ votes 1);
    /// ties go to class 1.
    pub fn predict_vote(&self, row: &[f64]) -> f64 {
        let ones = self.trees.iter().filter(|t| t.predict(row) >= 0.5).count();
        if 2 * ones >= self.trees.len() {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_data(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = RngStream::new(5, 5).rng();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            x.extend([a, b]);
            y.push(if a > 0.2 { 1.0 } else { 0.0 });
        }
        (x, y)
    }

    #[test]
    fn depth_zero_tree_predicts_mean() {
        let (x, y) = threshold_data(100);
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: 0,
            bootstrap: false,
            ..Default::default()
        };
        let f = Forest::fit(Matrix::new(&x, 2), &y, &cfg).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert_eq!(f.trees()[0].n_leaves(), 1);
        assert!((f.predict_mean(&[0.9, 0.0]) - mean).abs() < 1e-12);
    }

    #[test]
    fn single_split_recovers_threshold() {
        let (x, y) = threshold_data(1000);
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: 1,
            features_per_split: Some(2),
            bootstrap: false,
            ..Default::default()
        };
        let f = Forest::fit(Matrix::new(&x, 2), &y, &cfg).unwrap();
        let acc = (0..1000)
            .filter(|&i| (f.predict_mean(&x[2 * i..2 * i + 2]) >= 0.5) == (y[i] == 1.0))
            .count();
        assert!(acc >= 990, "accuracy {acc}");
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let (x, y) = threshold_data(300);
        let cfg = ForestConfig {
            n_trees: 3,
            max_depth: 4,
            min_leaf: 20,
            ..Default::default()
        };
        let f = Forest::fit(Matrix::new(&x, 2), &y, &cfg).unwrap();
        for t in f.trees() {
            assert!(t.depth() <= 4);
            assert!(t.n_leaves() <= 300 / 20);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = threshold_data(200);
        let cfg = ForestConfig {
            n_trees: 8,
            seed: 42,
            ..Default::default()
        };
        let a = Forest::fit(Matrix::new(&x, 2), &y, &cfg).unwrap();
        let b = Forest::fit(Matrix::new(&x, 2), &y, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_rows_is_precondition_error() {
        let cfg = ForestConfig::default();
        let x = vec![0.0; 9];
        assert!(matches!(
            Forest::fit(Matrix::new(&x, 1), &[0.0; 9], &cfg),
            Err(Error::Precondition(_))
        ));
    }
}
