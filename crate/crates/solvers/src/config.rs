use serde::{Deserialize, Serialize};

/// Which training procedure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    AlterPsvm,
    MeanMap,
    InvCal,
    Baseline,
}

/// How the latent labels of an alternating run are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    MeanMap,
    InvCal,
    Random,
}

/// Step-A solver for the label-fixed hinge problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    /// Dual coordinate descent (warm-started across outer iterations).
    DualCoordinate,
    /// Projected stochastic subgradient descent with step `1 / (λ t)`.
    Subgradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub solver: SolverKind,
    /// Hinge-loss weight.
    pub c: f64,
    /// Proportion-penalty weight.
    pub c_p: f64,
    /// Initializer of the first restart.
    pub init: InitKind,
    pub max_outer_iters: usize,
    pub inner_tolerance: f64,
    pub inner_max_epochs: usize,
    pub inner_solver: InnerSolver,
    pub seed: u64,
    /// Number of alternating runs; see [`TrainConfig::restart_schedule`].
    pub restarts: usize,
    /// Width of the insensitive tube of the inverse-calibration regression.
    pub invcal_epsilon: f64,
    pub invcal_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::AlterPsvm,
            c: 1.0,
            c_p: 1.0,
            init: InitKind::MeanMap,
            max_outer_iters: 50,
            inner_tolerance: 0.1,
            inner_max_epochs: 1000,
            inner_solver: InnerSolver::DualCoordinate,
            seed: 0,
            restarts: 3,
            invcal_epsilon: 0.05,
            invcal_iters: 2000,
        }
    }
}

/// The grids used for the census case study.
pub const C_GRID: [f64; 3] = [0.1, 1.0, 10.0];
pub const C_P_GRID: [f64; 3] = [0.01, 0.1, 1.0];

impl TrainConfig {
    pub fn with_params(&self, c: f64, c_p: f64) -> Self {
        Self {
            c,
            c_p,
            ..self.clone()
        }
    }

    /// Initializers for each restart: `init` first, then the other published
    /// initializer, then random labelings.
    pub fn restart_schedule(&self) -> Vec<InitKind> {
        let n = self.restarts.max(1);
        let mut out = vec![self.init];
        let other = match self.init {
            InitKind::MeanMap => Some(InitKind::InvCal),
            InitKind::InvCal => Some(InitKind::MeanMap),
            InitKind::Random => None,
        };
        if let Some(o) = other {
            out.push(o);
        }
        while out.len() < n {
            out.push(InitKind::Random);
        }
        out.truncate(n);
        out
    }

    pub(crate) fn validate(&self) -> Result<(), crate::SolverError> {
        let bad = |m: &str| Err(crate::SolverError::InvalidConfig(m.to_string()));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be positive");
        }
        if !(self.c_p > 0.0 && self.c_p.is_finite()) {
            return bad("C_p must be positive");
        }
        if self.inner_tolerance <= 0.0 {
            return bad("inner tolerance must be positive");
        }
        if self.inner_max_epochs == 0 {
            return bad("inner epoch budget must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        let mut c = TrainConfig::default();
        c.restarts = 4;
        assert_eq!(
            c.restart_schedule(),
            vec![InitKind::MeanMap, InitKind::InvCal, InitKind::Random, InitKind::Random]
        );
        c.restarts = 1;
        c.init = InitKind::InvCal;
        assert_eq!(c.restart_schedule(), vec![InitKind::InvCal]);
        c.init = InitKind::Random;
        c.restarts = 2;
        assert_eq!(c.restart_schedule(), vec![InitKind::Random, InitKind::Random]);
    }
}
