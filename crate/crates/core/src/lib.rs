//! Calibrated aggregation of noisy three-way judge votes.
//!
//! Each item receives `n` votes in `{-1, 0, +1}`. The votes are tallied into
//! two count features (a smoothed margin and a tie-evidence term), mapped
//! through a Davidson-style multinomial logit with an explicit tie outcome,
//! and turned into a single verdict by the Bayes action under absolute error.
//! The three model parameters are fitted on a small labeled calibration set by
//! minimizing the discrete ranked probability score.
//!
//! Modules:
//!
//! - [`btd`]: count features, tie-aware probabilities, risks, Bayes action, DRPS.
//! - [`calibrate`]: DRPS fitting with a box-constrained quasi-Newton solver and
//!   a brute-force grid oracle.
//! - [`baselines`]: majority vote, Soft-SC, CI-SC and the rounded median.
//! - [`metaeval`]: metrics, repeated calibration/evaluation splits, permutation
//!   tests, top-cluster ranking, leave-one-out rater comparison and friends.
//! - [`data`]: vote/label files, orientation handling, tallying and a
//!   synthetic vote generator.

pub mod baselines;
pub mod btd;
pub mod calibrate;
pub mod data;
mod error;
pub mod metaeval;
pub mod seed;

pub use baselines::{ci_sc, majority_vote, rounded_median, soft_sc, ConfidentVote, SoftReducer};
pub use btd::{
    bayes_action, compute_features, davidson_probs, drps, mae_risks, BtdModel, DavidsonParams,
    FeaturePair, ParamBox, Risks, Smoothing, TernaryDistribution, Verdict, VoteCounts,
};
pub use calibrate::{fit_drps, grid_oracle, CalibrationItem, FitConfig, FitResult};
pub use data::{canonicalize, tally, ItemLabel, Order, VoteRecord};
pub use error::{Error, Result};
