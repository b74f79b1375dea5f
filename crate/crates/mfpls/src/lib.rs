//! Partial least squares regression and binary classification for
//! multivariate functional data whose components live on different domains
//! (curves on intervals, images on rectangles), together with a PLS-based
//! decision tree classifier and a simulation harness.
//!
//! Functional observations are represented by basis expansion: each
//! dimension carries its own basis system and an `n x M_j` coefficient
//! matrix. All Hilbert-space geometry (inner products, whitening) is
//! mediated by the basis Gram matrices.

pub mod app;
pub mod basis;
pub mod bspline;
pub mod classify;
pub mod cv;
pub mod domain;
pub mod error;
pub mod fdata;
pub mod gram;
pub mod io;
pub mod metrics;
pub mod pls;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod tree;

pub use basis::{BasisFamily, BasisSystem, SamplingGrid};
pub use classify::{encode, fit_plsda, score, ClassEncoding, ComponentsSpec, DiscriminantModel};
pub use cv::{cross_validate, fit_with_cv, CvConfig, CvCriterion, CvReport};
pub use domain::Domain;
pub use error::{Error, Result};
pub use fdata::{center, inner_product, smooth, CenteringMeans, FunctionObject, FunctionalSample, RawObservations};
pub use gram::GramMetric;
pub use pls::{first_pls_weight, recover_v, whiten, FitTrace, MfplsModel, PlsStep, WhitenedSample};
pub use tree::{estimate_depth, fit_tmfpls, grow, predict_tree, GroupStructure, NodeComponents, PlsTree, TreeConfig, TreeNode};
