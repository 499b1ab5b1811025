use llp_core::{Label, LinearHypothesis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub hypothesis: LinearHypothesis,
    /// Mean absolute proportion error of `hypothesis` on the training bags.
    pub final_bag_error: f64,
    /// Joint objective after each outer iteration (alternating solver only).
    pub objective_trace: Vec<f64>,
    /// Latent label of every bag member, `latent_labels[k][j]` for member `j`
    /// of bag `k` (alternating solver only).
    pub latent_labels: Option<Vec<Vec<Label>>>,
    pub wall_time: f64,
    /// Non-fatal conditions, e.g. an inner solve that hit its epoch cap.
    pub warnings: Vec<String>,
}
