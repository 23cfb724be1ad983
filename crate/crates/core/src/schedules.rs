//! Per-step rollout targets: the exposure distribution each step steers
//! toward and the utility floor each step guarantees.

use serde::{Deserialize, Serialize};

use crate::arrivals::Arrival;
use crate::catalog::{top_k, Recommendation, RelevancePair};
use crate::error::{Error, Result};
use crate::exposure::{Distribution, ExposureLedger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetsMode {
    /// Interpolate from the observed start distribution toward a predicted
    /// final distribution in equal straight-line steps.
    Estimated,
    /// Hold each step to the exposure observed in the previous step.
    Preserving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    Linear,
    Geometric,
}

/// Utility floor for step `i` of `eta` under the linear schedule: i / eta.
pub fn theta_linear(i: usize, eta: usize) -> Result<f64> {
    check_step(i, eta)?;
    Ok(i as f64 / eta as f64)
}

/// Utility floor for step `i` of `eta` under the geometric schedule:
/// each step closes half the remaining gap (theta_i = 1 - 2^-i), with the
/// final step pinned to exactly 1.
pub fn theta_geometric(i: usize, eta: usize) -> Result<f64> {
    check_step(i, eta)?;
    if i == eta {
        Ok(1.0)
    } else {
        Ok(1.0 - 0.5f64.powi(i as i32))
    }
}

fn check_step(i: usize, eta: usize) -> Result<()> {
    if eta == 0 {
        return Err(Error::invalid("eta must be at least 1"));
    }
    if i == 0 || i > eta {
        return Err(Error::invalid(format!("step {i} out of range 1..={eta}")));
    }
    Ok(())
}

/// Predicted final exposure distribution: replay the warm-up arrivals,
/// serving every login its top-k under the new relevance model.
pub fn predict_final_distribution(
    pair: &RelevancePair,
    warmup: &[Arrival],
    k: usize,
) -> Result<Distribution> {
    if warmup.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut ledger = ExposureLedger::new(pair.n_items(), (-1.0, 0.0));
    for event in warmup {
        let items = top_k(pair.v_new().row(event.customer), k)?;
        ledger.record(&Recommendation::new(event.customer, items)?)?;
    }
    ledger.distribution()
}

/// Straight-line interpolation from `d0` to `dpred` in `eta` equal steps.
/// The step-`eta` target is exactly `dpred`.
pub fn estimated_targets(
    d0: &Distribution,
    dpred: &Distribution,
    eta: usize,
) -> Result<Vec<Distribution>> {
    if eta == 0 {
        return Err(Error::invalid("eta must be at least 1"));
    }
    if d0.len() != dpred.len() {
        return Err(Error::invalid(format!(
            "distributions over different universes: {} vs {} items",
            d0.len(),
            dpred.len()
        )));
    }
    (1..=eta)
        .map(|i| {
            let w = i as f64 / eta as f64;
            let mass = d0
                .mass()
                .iter()
                .zip(dpred.mass())
                .map(|(&a, &b)| (1.0 - w) * a + w * b)
                .collect();
            Distribution::new(mass)
        })
        .collect()
}

/// The preserving target for a step is the distribution observed in the
/// previous one.
pub fn preserving_target(previous_observed: &Distribution) -> Distribution {
    previous_observed.clone()
}

/// Per-step target distributions and utility floors for one rollout.
///
/// Estimated plans hold all `eta` targets up front; preserving plans start
/// with only step 1 (the warm-up observation) and are extended with
/// [`RolloutPlan::record_observed`] as steps close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutPlan {
    eta: usize,
    targets_mode: TargetsMode,
    theta_mode: ThetaMode,
    theta: Vec<f64>,
    targets: Vec<Option<Distribution>>,
}

impl RolloutPlan {
    pub fn estimated(
        eta: usize,
        theta_mode: ThetaMode,
        d0: &Distribution,
        dpred: &Distribution,
    ) -> Result<Self> {
        let targets = estimated_targets(d0, dpred, eta)?.into_iter().map(Some).collect();
        Ok(RolloutPlan {
            eta,
            targets_mode: TargetsMode::Estimated,
            theta_mode,
            theta: theta_schedule(eta, theta_mode)?,
            targets,
        })
    }

    pub fn preserving(eta: usize, theta_mode: ThetaMode, d0: &Distribution) -> Result<Self> {
        if eta == 0 {
            return Err(Error::invalid("eta must be at least 1"));
        }
        let mut targets: Vec<Option<Distribution>> = vec![None; eta];
        targets[0] = Some(preserving_target(d0));
        Ok(RolloutPlan {
            eta,
            targets_mode: TargetsMode::Preserving,
            theta_mode,
            theta: theta_schedule(eta, theta_mode)?,
            targets,
        })
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn targets_mode(&self) -> TargetsMode {
        self.targets_mode
    }

    pub fn theta_mode(&self) -> ThetaMode {
        self.theta_mode
    }

    pub fn theta(&self, step: usize) -> Result<f64> {
        check_step(step, self.eta)?;
        Ok(self.theta[step - 1])
    }

    pub fn target(&self, step: usize) -> Result<&Distribution> {
        check_step(step, self.eta)?;
        self.targets[step - 1]
            .as_ref()
            .ok_or_else(|| Error::Plan(format!("no target distribution for step {step}")))
    }

    /// Feeds the observed distribution of a closed step back into the plan.
    /// Preserving plans use it as the next step's target; estimated plans
    /// ignore it.
    pub fn record_observed(&mut self, step: usize, observed: &Distribution) -> Result<()> {
        check_step(step, self.eta)?;
        if self.targets_mode == TargetsMode::Preserving && step < self.eta {
            self.targets[step] = Some(preserving_target(observed));
        }
        Ok(())
    }
}

fn theta_schedule(eta: usize, mode: ThetaMode) -> Result<Vec<f64>> {
    (1..=eta)
        .map(|i| match mode {
            ThetaMode::Linear => theta_linear(i, eta),
            ThetaMode::Geometric => theta_geometric(i, eta),
        })
        .collect()
}
