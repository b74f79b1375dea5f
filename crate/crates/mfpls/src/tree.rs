//! Group-structured decision tree with PLS discriminant splits.
//!
//! Each internal node carries a discriminant model fitted on one predefined
//! group of functional dimensions; observations route left on a strictly
//! positive score and right otherwise. Splits are selected by Gini impurity
//! decrease, and the final depth is estimated by repeated train/prune
//! splits of the learning data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{fit_plsda, ComponentsSpec, DiscriminantModel};
use crate::error::{Error, Result};
use crate::fdata::FunctionalSample;
use crate::metrics;
use crate::rng::{purpose, substream};

/// Tolerance within which a smaller depth is preferred during pruning.
const DEPTH_TIE_TOL: f64 = 1e-9;

/// Predefined (possibly overlapping) groups of functional dimensions,
/// 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    pub groups: Vec<Vec<usize>>,
}

impl GroupStructure {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Validation("need at least one group".into()));
        }
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::Validation("groups must be non-empty".into()));
        }
        Ok(GroupStructure { groups })
    }

    /// Singleton groups plus the all-dimensions group (when d > 1).
    pub fn default_for(d: usize) -> Self {
        let mut groups: Vec<Vec<usize>> = (0..d).map(|j| vec![j]).collect();
        if d > 1 {
            groups.push((0..d).collect());
        }
        GroupStructure { groups }
    }

    pub fn validate_against(&self, d: usize) -> Result<()> {
        for g in &self.groups {
            for &j in g {
                if j >= d {
                    return Err(Error::Validation(format!(
                        "group references dimension {} but the data has {}",
                        j + 1,
                        d
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How node models choose their component count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeComponents {
    Fixed(usize),
    Cv { k_folds: usize },
}

#[derive(Debug, Clone)]
pub struct TreeConfig {
    /// Gini impurity below which a node is terminal.
    pub purity_threshold: f64,
    pub max_depth: usize,
    pub min_node_size: usize,
    pub components: NodeComponents,
    /// Cap on the component count explored at each node.
    pub h_max: usize,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            purity_threshold: 0.01,
            max_depth: 10,
            min_node_size: 5,
            components: NodeComponents::Fixed(1),
            h_max: 20,
            seed: 0,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.purity_threshold) {
            return Err(Error::Validation(format!(
                "purity threshold {} outside [0, 0.5]",
                self.purity_threshold
            )));
        }
        if self.h_max == 0 {
            return Err(Error::Validation("h_max must be at least 1".into()));
        }
        if let NodeComponents::Fixed(0) = self.components {
            return Err(Error::Validation("component count must be at least 1".into()));
        }
        if let NodeComponents::Cv { k_folds } = self.components {
            if k_folds < 2 {
                return Err(Error::Validation("k_folds must be at least 2".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Internal {
        /// Index into the group structure.
        group: usize,
        model: DiscriminantModel,
        counts: [usize; 2],
        depth: usize,
        /// Observations with score > 0.
        left: Box<TreeNode>,
        /// Observations with score <= 0.
        right: Box<TreeNode>,
    },
    Leaf {
        class: u8,
        proportions: [f64; 2],
        count: usize,
        depth: usize,
    },
}

impl TreeNode {
    pub fn depth_below(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth_below().max(right.depth_below()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlsTree {
    pub root: TreeNode,
    pub groups: GroupStructure,
    pub depth: usize,
    /// Per-node notes about failed candidate fits (never fatal).
    pub diagnostics: Vec<String>,
}

/// Gini impurity of a two-class count vector.
pub fn impurity(counts: &[usize; 2]) -> Result<f64> {
    let total = counts[0] + counts[1];
    if total == 0 {
        return Err(Error::EmptyNode);
    }
    let p0 = counts[0] as f64 / total as f64;
    let p1 = counts[1] as f64 / total as f64;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

/// Sample-weighted decrease of impurity of a candidate split.
pub fn split_gain(parent: &[usize; 2], left: &[usize; 2], right: &[usize; 2]) -> f64 {
    let n = (parent[0] + parent[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    debug_assert_eq!(parent[0], left[0] + right[0]);
    debug_assert_eq!(parent[1], left[1] + right[1]);
    let q = impurity(parent).unwrap_or(0.0);
    let ql = if nl > 0.0 { impurity(left).unwrap() } else { 0.0 };
    let qr = if nr > 0.0 { impurity(right).unwrap() } else { 0.0 };
    q - (nl / n) * ql - (nr / n) * qr
}

fn count_labels(labels: &[u8], rows: &[usize]) -> [usize; 2] {
    let n1 = rows.iter().filter(|&&i| labels[i] == 1).count();
    [rows.len() - n1, n1]
}

fn make_leaf(labels: &[u8], rows: &[usize], depth: usize) -> TreeNode {
    let counts = count_labels(labels, rows);
    let n = rows.len();
    let p1 = counts[1] as f64 / n as f64;
    TreeNode::Leaf {
        class: (counts[1] > counts[0]) as u8,
        proportions: [1.0 - p1, p1],
        count: n,
        depth,
    }
}

struct Grower<'a> {
    sample: &'a FunctionalSample,
    labels: &'a [u8],
    groups: &'a GroupStructure,
    config: &'a TreeConfig,
}

struct Candidate {
    gain: f64,
    model: DiscriminantModel,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

impl<'a> Grower<'a> {
    fn grow_node(&self, rows: &[usize], depth: usize, node_id: u64, diagnostics: &mut Vec<String>) -> TreeNode {
        let counts = count_labels(self.labels, rows);
        let node_impurity = impurity(&counts).expect("non-empty node");
        if node_impurity < self.config.purity_threshold
            || depth >= self.config.max_depth
            || rows.len() < self.config.min_node_size
        {
            return make_leaf(self.labels, rows, depth);
        }

        // One candidate discriminant per group; independent fits may run
        // concurrently, selection is an ordered reduction.
        let results: Vec<std::result::Result<Candidate, String>> = self
            .groups
            .groups
            .par_iter()
            .enumerate()
            .map(|(gi, group)| self.candidate(rows, &counts, gi, group, node_id))
            .collect();

        let mut best: Option<(usize, Candidate)> = None;
        for (gi, res) in results.into_iter().enumerate() {
            match res {
                Ok(cand) => {
                    let better = match &best {
                        None => cand.gain > 0.0,
                        Some((_, b)) => cand.gain > b.gain,
                    };
                    if better {
                        best = Some((gi, cand));
                    }
                }
                Err(msg) => diagnostics.push(format!("node {node_id} depth {depth}: {msg}")),
            }
        }

        match best {
            None => make_leaf(self.labels, rows, depth),
            Some((
                gi,
                Candidate { gain: _, model, left_rows, right_rows },
            )) => {
                let left = self.grow_node(&left_rows, depth + 1, node_id * 2, diagnostics);
                let right = self.grow_node(&right_rows, depth + 1, node_id * 2 + 1, diagnostics);
                TreeNode::Internal {
                    group: gi,
                    model,
                    counts,
                    depth,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        }
    }

    fn candidate(
        &self,
        rows: &[usize],
        counts: &[usize; 2],
        gi: usize,
        group: &[usize],
        node_id: u64,
    ) -> std::result::Result<Candidate, String> {
        let node_sample = self
            .sample
            .subset(rows)
            .restrict_dims(group)
            .map_err(|e| format!("group {}: {e}", gi + 1))?;
        let node_labels: Vec<u8> = rows.iter().map(|&i| self.labels[i]).collect();
        let spec = match self.config.components {
            NodeComponents::Fixed(h) => ComponentsSpec::Fixed(h.min(self.config.h_max)),
            NodeComponents::Cv { k_folds } => ComponentsSpec::Cv {
                k_folds,
                h_max: self.config.h_max,
                seed: self
                    .config
                    .seed
                    .wrapping_add(node_id.wrapping_mul(131).wrapping_add(gi as u64)),
            },
        };
        let model = fit_plsda(&node_sample, &node_labels, spec).map_err(|e| format!("group {}: {e}", gi + 1))?;
        let scores = crate::classify::score(&model, &node_sample).map_err(|e| format!("group {}: {e}", gi + 1))?;
        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for (&row, &g) in rows.iter().zip(&scores) {
            if g > 0.0 {
                left_rows.push(row);
            } else {
                right_rows.push(row);
            }
        }
        if left_rows.is_empty() || right_rows.is_empty() {
            return Err(format!("group {}: split leaves an empty child", gi + 1));
        }
        let lc = count_labels(self.labels, &left_rows);
        let rc = count_labels(self.labels, &right_rows);
        let gain = split_gain(counts, &lc, &rc);
        Ok(Candidate { gain, model, left_rows, right_rows })
    }
}

/// Grow a tree on the full data. Candidate fit failures at a node convert
/// the node to a leaf (recorded in the diagnostics), never abort the tree.
pub fn grow(
    sample: &FunctionalSample,
    labels: &[u8],
    groups: &GroupStructure,
    config: &TreeConfig,
) -> Result<PlsTree> {
    if sample.n() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations vs {} labels",
            sample.n(),
            labels.len()
        )));
    }
    config.validate()?;
    groups.validate_against(sample.d())?;
    let all: Vec<usize> = (0..sample.n()).collect();
    let counts = count_labels(labels, &all);
    if counts[0] == 0 || counts[1] == 0 {
        // purity stop at the root
        let root = make_leaf(labels, &all, 0);
        return Ok(PlsTree { root, groups: groups.clone(), depth: 0, diagnostics: Vec::new() });
    }
    let grower = Grower { sample, labels, groups, config };
    let mut diagnostics = Vec::new();
    let root = grower.grow_node(&all, 0, 1, &mut diagnostics);
    let depth = root.depth_below();
    Ok(PlsTree { root, groups: groups.clone(), depth, diagnostics })
}

fn route<'t>(
    mut node: &'t TreeNode,
    sample_row: &FunctionalSample,
    groups: &GroupStructure,
    depth_cut: Option<usize>,
) -> Result<(&'t TreeNode, usize)> {
    let mut depth = 0;
    loop {
        match node {
            TreeNode::Leaf { .. } => return Ok((node, depth)),
            TreeNode::Internal { group, model, left, right, .. } => {
                if let Some(cut) = depth_cut {
                    if depth >= cut {
                        return Ok((node, depth));
                    }
                }
                let restricted = sample_row.restrict_dims(&groups.groups[*group])?;
                let s = crate::classify::score(model, &restricted)?;
                node = if s[0] > 0.0 { left } else { right };
                depth += 1;
            }
        }
    }
}

fn node_prediction(node: &TreeNode) -> (u8, f64) {
    match node {
        TreeNode::Leaf { class, proportions, .. } => (*class, proportions[1]),
        TreeNode::Internal { counts, .. } => {
            let n = (counts[0] + counts[1]) as f64;
            let p1 = counts[1] as f64 / n;
            ((counts[1] > counts[0]) as u8, p1)
        }
    }
}

/// Route observations through the tree: predicted classes and class-1
/// proportions of the reached leaves (the AUC scores).
pub fn predict_tree(tree: &PlsTree, sample: &FunctionalSample) -> Result<(Vec<u8>, Vec<f64>)> {
    predict_truncated(tree, sample, None)
}

/// Same as [`predict_tree`] but treating internal nodes at `depth_cut` as
/// leaves (used by pruning).
pub fn predict_truncated(
    tree: &PlsTree,
    sample: &FunctionalSample,
    depth_cut: Option<usize>,
) -> Result<(Vec<u8>, Vec<f64>)> {
    let n = sample.n();
    let mut classes = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let row = sample.subset(&[i]);
        let (node, _) = route(&tree.root, &row, &tree.groups, depth_cut)?;
        let (c, p1) = node_prediction(node);
        classes.push(c);
        scores.push(p1);
    }
    Ok((classes, scores))
}

/// Estimate the optimal depth by repeated 75/25 train/prune splits: each
/// repetition grows a tree on the 75% part, scores every depth truncation
/// by AUC on the 25% part and keeps the best (smallest on ties); the mode
/// across repetitions is returned (smallest on ties).
pub fn estimate_depth(
    sample: &FunctionalSample,
    labels: &[u8],
    groups: &GroupStructure,
    config: &TreeConfig,
) -> Result<usize> {
    estimate_depth_reps(sample, labels, groups, config, 10)
}

pub fn estimate_depth_reps(
    sample: &FunctionalSample,
    labels: &[u8],
    groups: &GroupStructure,
    config: &TreeConfig,
    repetitions: usize,
) -> Result<usize> {
    use rand::seq::SliceRandom;
    if sample.n() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations vs {} labels",
            sample.n(),
            labels.len()
        )));
    }
    let per_class: Vec<Vec<usize>> = [0u8, 1u8]
        .iter()
        .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    // 75/25 within each class, both sides non-empty per class
    for class_rows in &per_class {
        let n_train = (class_rows.len() * 3) / 4;
        if n_train == 0 || n_train == class_rows.len() {
            return Err(Error::InsufficientData(
                "not enough observations per class for a 75/25 split".into(),
            ));
        }
    }

    let best_depths: Vec<Result<usize>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = config.seed.wrapping_add(rep as u64);
            let mut rng = substream(rep_seed, rep as u64, purpose::SPLIT);
            let mut train_rows = Vec::new();
            let mut prune_rows = Vec::new();
            for class_rows in &per_class {
                let mut order = class_rows.clone();
                order.shuffle(&mut rng);
                let n_train = (order.len() * 3) / 4;
                train_rows.extend_from_slice(&order[..n_train]);
                prune_rows.extend_from_slice(&order[n_train..]);
            }
            train_rows.sort_unstable();
            prune_rows.sort_unstable();
            let train_labels: Vec<u8> = train_rows.iter().map(|&i| labels[i]).collect();
            let prune_labels: Vec<u8> = prune_rows.iter().map(|&i| labels[i]).collect();
            let train_sample = sample.subset(&train_rows);
            let prune_sample = sample.subset(&prune_rows);
            let rep_config = TreeConfig { seed: rep_seed, ..config.clone() };
            let tree = grow(&train_sample, &train_labels, groups, &rep_config)?;
            let mut best = (0usize, f64::NEG_INFINITY);
            for depth in 0..=tree.depth {
                let (_, scores) = predict_truncated(&tree, &prune_sample, Some(depth))?;
                let auc = metrics::auc(&scores, &prune_labels)?;
                if auc > best.1 + DEPTH_TIE_TOL {
                    best = (depth, auc);
                }
            }
            Ok(best.0)
        })
        .collect();

    let mut depths = Vec::with_capacity(repetitions);
    for d in best_depths {
        depths.push(d?);
    }
    // mode, smallest on ties
    let max_depth = depths.iter().copied().max().unwrap_or(0);
    let mut freq = vec![0usize; max_depth + 1];
    for &d in &depths {
        freq[d] += 1;
    }
    let best_count = *freq.iter().max().unwrap();
    Ok(freq.iter().position(|&c| c == best_count).unwrap())
}

/// Depth estimation followed by the final fit on the whole learning data
/// with the estimated depth as the cap. Returns the tree and the estimate.
pub fn fit_tmfpls(
    sample: &FunctionalSample,
    labels: &[u8],
    groups: &GroupStructure,
    config: &TreeConfig,
) -> Result<(PlsTree, usize)> {
    let m_hat = estimate_depth(sample, labels, groups, config)?;
    let final_config = TreeConfig { max_depth: m_hat, ..config.clone() };
    let tree = grow(sample, labels, groups, &final_config)?;
    Ok((tree, m_hat))
}

/// Plain-text rendering: one line per node with depth, group and counts.
pub fn render_text(tree: &PlsTree) -> String {
    let mut out = String::new();
    render_node(&tree.root, "", &mut out);
    out
}

fn render_node(node: &TreeNode, indent: &str, out: &mut String) {
    use std::fmt::Write;
    match node {
        TreeNode::Leaf { class, proportions, count, depth } => {
            let counts = [
                (proportions[0] * *count as f64).round() as usize,
                (proportions[1] * *count as f64).round() as usize,
            ];
            writeln!(
                out,
                "{indent}[depth {depth}] leaf class={class} counts=({}, {})",
                counts[0], counts[1]
            )
            .unwrap();
        }
        TreeNode::Internal { group, counts, depth, left, right, model } => {
            writeln!(
                out,
                "{indent}[depth {depth}] split group={} (h={}) counts=({}, {})",
                group + 1,
                model.n_components,
                counts[0],
                counts[1]
            )
            .unwrap();
            let deeper = format!("{indent}  ");
            render_node(left, &deeper, out);
            render_node(right, &deeper, out);
        }
    }
}
