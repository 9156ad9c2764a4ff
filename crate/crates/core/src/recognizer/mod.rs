//! Entity type recognition: features, balancing, classifiers, prediction and
//! evaluation.

pub mod balance;
pub mod eval;
pub mod features;
pub mod gbt;
pub mod logreg;
pub mod model;
pub mod tree;

pub use balance::balance;
pub use eval::{evaluate, f_beta, EvalReport};
pub use features::{Dataset, FeatureVector, Featurizer, Layout, INSTANCE_FEATURES, SCHEMA_FEATURES};
pub use gbt::{train_gbt, GbtModel, GbtParams};
pub use logreg::{logistic_gradient, logistic_loss, train_logreg, LogregModel, LogregParams, Standardizer};
pub use model::{predict, train, ModelBody, ModelParams, TrainedModel};
pub use tree::{train_tree, Node, Tree, TreeParams};
