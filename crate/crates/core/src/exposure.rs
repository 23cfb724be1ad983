//! Exposure accounting: per-item attention ledgers, normalized exposure
//! distributions, the L1 exposure-change measure and the immediate-impact
//! histogram.

use serde::{Deserialize, Serialize};

use crate::catalog::Recommendation;
use crate::error::{Error, Result};

/// Tolerance for distribution normalization checks.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Per-item accumulated exposure for one time window. Each arrival
/// contributes 1/k attention to each of its k recommended items, so the
/// total count equals the number of arrivals seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureLedger {
    counts: Vec<f64>,
    arrivals_seen: usize,
    window: (f64, f64),
}

impl ExposureLedger {
    pub fn new(n_items: usize, window: (f64, f64)) -> Self {
        ExposureLedger { counts: vec![0.0; n_items], arrivals_seen: 0, window }
    }

    pub fn record(&mut self, rec: &Recommendation) -> Result<()> {
        let share = 1.0 / rec.k() as f64;
        if let Some(&s) = rec.items().iter().find(|&&s| s >= self.counts.len()) {
            return Err(Error::invalid(format!(
                "item {s} outside catalog of {} items",
                self.counts.len()
            )));
        }
        for &s in rec.items() {
            self.counts[s] += share;
        }
        self.arrivals_seen += 1;
        Ok(())
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn arrivals_seen(&self) -> usize {
        self.arrivals_seen
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals_seen == 0
    }

    /// Per-producer exposure, summing item counts within each producer.
    pub fn producer_counts(&self, of_item: &[usize], n_producers: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_producers];
        for (s, &c) in self.counts.iter().enumerate() {
            out[of_item[s]] += c;
        }
        out
    }

    pub fn distribution(&self) -> Result<Distribution> {
        if self.arrivals_seen == 0 {
            return Err(Error::EmptyWindow);
        }
        let total: f64 = self.counts.iter().sum();
        Distribution::new(self.counts.iter().map(|c| c / total).collect())
    }
}

/// A normalized exposure distribution over items: non-negative mass summing
/// to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::invalid("empty distribution"));
        }
        if let Some(m) = mass.iter().find(|&&m| !(m >= 0.0)) {
            return Err(Error::invalid(format!("negative or non-finite mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(format!("distribution mass sums to {total}, not 1")));
        }
        Ok(Distribution { mass })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty distribution"));
        }
        Ok(Distribution { mass: vec![1.0 / n as f64; n] })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Aggregates item mass into producer mass under the given partition.
    pub fn group(&self, of_item: &[usize], n_producers: usize) -> Distribution {
        let mut out = vec![0.0; n_producers];
        for (s, &m) in self.mass.iter().enumerate() {
            out[of_item[s]] += m;
        }
        Distribution { mass: out }
    }
}

/// L1 distance between two exposure distributions over the same item
/// universe; ranges over [0, 2].
pub fn exposure_change(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "distributions over different universes: {} vs {} items",
            a.len(),
            b.len()
        )));
    }
    Ok(a.mass.iter().zip(&b.mass).map(|(x, y)| (x - y).abs()).sum())
}

/// Fractions of items whose exposure changed by less than 50%, by 50-100%,
/// and by 100% or more between two distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactHistogram {
    pub under_50: f64,
    pub from_50_to_100: f64,
    pub over_100: f64,
}

/// Buckets each item by its relative exposure change |new - old| / old.
/// Items appearing from zero old mass count as an over-100% change; items at
/// zero mass in both count as under 50%.
pub fn impact_histogram(old: &Distribution, new: &Distribution) -> Result<ImpactHistogram> {
    if old.len() != new.len() {
        return Err(Error::invalid(format!(
            "distributions over different universes: {} vs {} items",
            old.len(),
            new.len()
        )));
    }
    let mut buckets = [0usize; 3];
    for (&o, &n) in old.mass.iter().zip(&new.mass) {
        let idx = if o == 0.0 {
            if n == 0.0 {
                0
            } else {
                2
            }
        } else {
            let pct = (n - o).abs() / o * 100.0;
            if pct < 50.0 {
                0
            } else if pct < 100.0 {
                1
            } else {
                2
            }
        };
        buckets[idx] += 1;
    }
    let total = old.len() as f64;
    Ok(ImpactHistogram {
        under_50: buckets[0] as f64 / total,
        from_50_to_100: buckets[1] as f64 / total,
        over_100: buckets[2] as f64 / total,
    })
}
