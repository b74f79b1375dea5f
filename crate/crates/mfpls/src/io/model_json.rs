//! Versioned JSON documents for fitted models and trees.
//!
//! Stored floats round-trip bit-exactly (shortest-round-trip decimal).
//! Regression models persist the bases, the per-step weights/loadings, the
//! coefficient function and the centering means; weight functions are
//! reconstructed on load.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSystem;
use crate::classify::{ClassEncoding, DiscriminantModel};
use crate::error::{Error, Result};
use crate::fdata::{FuncDim, FunctionObject};
use crate::pls::{MfplsModel, PlsStep};
use crate::tree::{GroupStructure, PlsTree, TreeNode};

pub const FORMAT_VERSION: u32 = 1;

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().cloned().collect()
}

fn func_to_doc(f: &FunctionObject) -> Vec<Vec<f64>> {
    f.dims.iter().map(|d| vec_of(&d.coeffs)).collect()
}

fn func_from_doc(bases: &[BasisSystem], coeffs: &[Vec<f64>]) -> Result<FunctionObject> {
    if bases.len() != coeffs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} bases vs {} coefficient vectors",
            bases.len(),
            coeffs.len()
        )));
    }
    FunctionObject::new(
        bases
            .iter()
            .zip(coeffs)
            .map(|(b, c)| FuncDim { basis: b.clone(), coeffs: DVector::from_vec(c.clone()) })
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StepDoc {
    pub theta: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub c: f64,
    pub xi_variance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegressionModelDoc {
    pub format_version: u32,
    pub kind: String,
    pub bases: Vec<BasisSystem>,
    pub steps: Vec<StepDoc>,
    pub beta: Vec<Vec<f64>>,
    pub intercept: f64,
    pub x_means: Vec<Vec<f64>>,
    pub y_mean: f64,
    pub n_components: usize,
    pub cv_seed: Option<u64>,
}

pub fn model_to_doc(model: &MfplsModel) -> RegressionModelDoc {
    RegressionModelDoc {
        format_version: FORMAT_VERSION,
        kind: "mfpls_regression".into(),
        bases: model.bases.clone(),
        steps: model
            .steps
            .iter()
            .map(|s| StepDoc {
                theta: s.theta.iter().map(vec_of).collect(),
                u: vec_of(&s.u),
                r: s.r.iter().map(vec_of).collect(),
                c: s.c,
                xi_variance: s.xi_variance,
            })
            .collect(),
        beta: func_to_doc(&model.beta),
        intercept: model.intercept,
        x_means: func_to_doc(&model.x_means),
        y_mean: model.y_mean,
        n_components: model.n_components,
        cv_seed: model.cv_seed,
    }
}

pub fn model_from_doc(doc: RegressionModelDoc) -> Result<MfplsModel> {
    check_header(doc.format_version, &doc.kind, "mfpls_regression")?;
    let steps: Vec<PlsStep> = doc
        .steps
        .into_iter()
        .map(|s| PlsStep {
            theta: s.theta.into_iter().map(DVector::from_vec).collect(),
            u: DVector::from_vec(s.u),
            r: s.r.into_iter().map(DVector::from_vec).collect(),
            c: s.c,
            xi_variance: s.xi_variance,
        })
        .collect();
    let x_means = func_from_doc(&doc.bases, &doc.x_means)?;
    let mut model = MfplsModel::from_parts(doc.bases.clone(), steps, x_means, doc.y_mean, doc.cv_seed)?;
    // Keep the stored coefficient function and intercept authoritative so
    // predictions survive the round trip bit-exactly.
    model.beta = func_from_doc(&doc.bases, &doc.beta)?;
    model.intercept = doc.intercept;
    if model.n_components != doc.n_components {
        return Err(Error::Validation(format!(
            "stored n_components {} does not match the {} stored steps",
            doc.n_components, model.n_components
        )));
    }
    Ok(model)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiscriminantModelDoc {
    pub format_version: u32,
    pub kind: String,
    pub bases: Vec<BasisSystem>,
    pub beta: Vec<Vec<f64>>,
    pub alpha: f64,
    pub n_components: usize,
    pub encoding: ClassEncoding,
    pub cv_seed: Option<u64>,
}

pub fn discriminant_to_doc(model: &DiscriminantModel) -> DiscriminantModelDoc {
    DiscriminantModelDoc {
        format_version: FORMAT_VERSION,
        kind: "mfpls_discriminant".into(),
        bases: model.beta.dims.iter().map(|d| d.basis.clone()).collect(),
        beta: func_to_doc(&model.beta),
        alpha: model.alpha,
        n_components: model.n_components,
        encoding: model.encoding,
        cv_seed: model.cv_seed,
    }
}

pub fn discriminant_from_doc(doc: DiscriminantModelDoc) -> Result<DiscriminantModel> {
    check_header(doc.format_version, &doc.kind, "mfpls_discriminant")?;
    Ok(DiscriminantModel {
        beta: func_from_doc(&doc.bases, &doc.beta)?,
        alpha: doc.alpha,
        n_components: doc.n_components,
        encoding: doc.encoding,
        cv_seed: doc.cv_seed,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeDoc {
    Leaf {
        class: u8,
        proportions: [f64; 2],
        count: usize,
        depth: usize,
    },
    Internal {
        group: usize,
        counts: [usize; 2],
        depth: usize,
        model: DiscriminantModelDoc,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TreeDoc {
    pub format_version: u32,
    pub kind: String,
    pub groups: Vec<Vec<usize>>,
    pub depth: usize,
    pub diagnostics: Vec<String>,
    pub root: NodeDoc,
}

fn node_to_doc(node: &TreeNode) -> NodeDoc {
    match node {
        TreeNode::Leaf { class, proportions, count, depth } => NodeDoc::Leaf {
            class: *class,
            proportions: *proportions,
            count: *count,
            depth: *depth,
        },
        TreeNode::Internal { group, model, counts, depth, left, right } => NodeDoc::Internal {
            group: *group,
            counts: *counts,
            depth: *depth,
            model: discriminant_to_doc(model),
            left: Box::new(node_to_doc(left)),
            right: Box::new(node_to_doc(right)),
        },
    }
}

fn node_from_doc(doc: NodeDoc) -> Result<TreeNode> {
    Ok(match doc {
        NodeDoc::Leaf { class, proportions, count, depth } => {
            TreeNode::Leaf { class, proportions, count, depth }
        }
        NodeDoc::Internal { group, counts, depth, model, left, right } => TreeNode::Internal {
            group,
            model: discriminant_from_doc(model)?,
            counts,
            depth,
            left: Box::new(node_from_doc(*left)?),
            right: Box::new(node_from_doc(*right)?),
        },
    })
}

pub fn tree_to_doc(tree: &PlsTree) -> TreeDoc {
    TreeDoc {
        format_version: FORMAT_VERSION,
        kind: "tmfpls_tree".into(),
        groups: tree.groups.groups.clone(),
        depth: tree.depth,
        diagnostics: tree.diagnostics.clone(),
        root: node_to_doc(&tree.root),
    }
}

pub fn tree_from_doc(doc: TreeDoc) -> Result<PlsTree> {
    check_header(doc.format_version, &doc.kind, "tmfpls_tree")?;
    Ok(PlsTree {
        root: node_from_doc(doc.root)?,
        groups: GroupStructure::new(doc.groups)?,
        depth: doc.depth,
        diagnostics: doc.diagnostics,
    })
}

fn check_header(version: u32, kind: &str, expected: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported format_version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if kind != expected {
        return Err(Error::Validation(format!("document kind '{kind}', expected '{expected}'")));
    }
    Ok(())
}

/// A model document of either kind, for format-agnostic loading.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyModelDoc {
    Discriminant(DiscriminantModelDoc),
    Regression(RegressionModelDoc),
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&s)?)
}
