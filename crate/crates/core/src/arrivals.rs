//! Customer login traces: independent per-customer Poisson processes over a
//! warm-up period followed by the update steps.
//!
//! The time axis is measured in periods. The warm-up window is `[-1, 0)` and
//! step `i` covers `[i-1, i)`, so a trace with horizon `eta + 1` spans
//! `[-1, eta)`.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible mean inter-arrival time, in periods. Truncation can
/// produce means arbitrarily close to zero, which would flood a window with
/// events.
pub const MIN_MEAN_INTERARRIVAL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub customer: usize,
}

/// Time-ordered login events over `[-1, horizon - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalTrace {
    events: Vec<Arrival>,
    horizon: f64,
}

impl ArrivalTrace {
    pub fn new(mut events: Vec<Arrival>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if let Some(e) = events.iter().find(|e| !(-1.0..horizon - 1.0).contains(&e.time)) {
            return Err(Error::invalid(format!(
                "event at t={} outside window [-1, {})",
                e.time,
                horizon - 1.0
            )));
        }
        events.sort_by(|a, b| {
            a.time
                .partial_cmp(&b.time)
                .expect("event times are finite")
                .then(a.customer.cmp(&b.customer))
        });
        Ok(ArrivalTrace { events, horizon })
    }

    pub fn events(&self) -> &[Arrival] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of whole update steps the trace covers.
    pub fn eta(&self) -> usize {
        (self.horizon - 1.0).max(0.0).floor() as usize
    }

    /// Period index of an event time: -1 for the warm-up window, `i - 1` for
    /// step `i`.
    pub fn period_of(time: f64) -> i64 {
        time.floor() as i64
    }

    /// Events in the warm-up window `[-1, 0)`.
    pub fn warmup(&self) -> &[Arrival] {
        &self.events[..self.split_at(0.0)]
    }

    /// Events in step `i` (1-based), the window `[i-1, i)`.
    pub fn step(&self, i: usize) -> &[Arrival] {
        let lo = self.split_at((i - 1) as f64);
        let hi = self.split_at(i as f64);
        &self.events[lo..hi]
    }

    fn split_at(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time < t)
    }

    /// Writes the trace as `time,customer_id` rows. `ids` maps internal
    /// customer indices to external ids. Times use the shortest decimal form
    /// that round-trips exactly, so a written trace replays bit-identically.
    pub fn write_csv<W: Write>(&self, ids: &[String], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "customer_id"])?;
        for e in &self.events {
            let id = ids
                .get(e.customer)
                .ok_or_else(|| Error::invalid(format!("customer index {} has no id", e.customer)))?;
            w.write_record([&format!("{}", e.time), id])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(ids: &[String], horizon: f64, reader: R) -> Result<Self> {
        let index: std::collections::HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut r = csv::Reader::from_reader(reader);
        let mut events = Vec::new();
        for record in r.records() {
            let record = record?;
            let time: f64 = record
                .get(0)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::load(format!("bad trace time in {record:?}")))?;
            let id = record
                .get(1)
                .ok_or_else(|| Error::load(format!("missing customer id in {record:?}")))?;
            let customer = *index
                .get(id)
                .ok_or_else(|| Error::load(format!("unknown customer id {id:?} in trace")))?;
            events.push(Arrival { time, customer });
        }
        ArrivalTrace::new(events, horizon)
    }
}

/// Per-customer mean inter-arrival times, drawn from a Gaussian with mean 1
/// period and variance 0.2, truncated to [0, 2] by rejection.
pub fn sample_mean_interarrivals(n_customers: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(1.0, 0.2f64.sqrt()).expect("valid normal parameters");
    (0..n_customers)
        .map(|_| {
            let draw = loop {
                let x = normal.sample(&mut rng);
                if (0.0..=2.0).contains(&x) {
                    break x;
                }
            };
            draw.max(MIN_MEAN_INTERARRIVAL)
        })
        .collect()
}

/// Realizes each customer's Poisson login process as exponential
/// inter-arrival gaps with mean `means[u]`, started at time -1 and kept
/// while inside `[-1, horizon - 1)`. The merged trace is globally
/// time-sorted and fully determined by `(means, horizon, seed)`.
pub fn generate_trace(means: &[f64], horizon: f64, seed: u64) -> Result<ArrivalTrace> {
    if !(horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if let Some(mu) = means.iter().find(|&&mu| !(mu > 0.0)) {
        return Err(Error::invalid(format!("non-positive mean inter-arrival time {mu}")));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let end = horizon - 1.0;
    let mut events = Vec::new();
    for (customer, &mu) in means.iter().enumerate() {
        // Independent stream per customer so the trace does not depend on
        // how many events earlier customers produced.
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let exp = Exp::new(1.0 / mu).expect("positive rate");
        let mut t = -1.0;
        loop {
            t += exp.sample(&mut rng);
            if t >= end {
                break;
            }
            events.push(Arrival { time: t, customer });
        }
    }
    ArrivalTrace::new(events, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_customer_list_gives_empty_trace() {
        let trace = generate_trace(&[], 11.0, 1).unwrap();
        assert!(trace.events().is_empty());
        assert_eq!(trace.eta(), 10);
    }

    #[test]
    fn no_means_no_samples() {
        assert!(sample_mean_interarrivals(0, 1).is_empty());
    }

    #[test]
    fn truncated_means_stay_in_range() {
        let means = sample_mean_interarrivals(5000, 13);
        assert!(means.iter().all(|&m| (MIN_MEAN_INTERARRIVAL..=2.0).contains(&m)));
    }

    #[test]
    fn truncated_mean_monte_carlo() {
        // Truncation to [0, 2] is symmetric around the mean, so the sample
        // mean should stay near 1.
        let means = sample_mean_interarrivals(100_000, 99);
        let avg = means.iter().sum::<f64>() / means.len() as f64;
        assert!((0.97..=1.03).contains(&avg), "sample mean {avg} outside [0.97, 1.03]");
    }

    #[test]
    fn trace_is_sorted_and_deterministic() {
        let means = sample_mean_interarrivals(20, 5);
        let a = generate_trace(&means, 11.0, 7).unwrap();
        let b = generate_trace(&means, 11.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.events().windows(2).all(|w| w[0].time <= w[1].time));
        let c = generate_trace(&means, 11.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_means() {
        assert!(generate_trace(&[0.0], 2.0, 1).is_err());
        assert!(generate_trace(&[-1.0], 2.0, 1).is_err());
        assert!(generate_trace(&[1.0], 0.0, 1).is_err());
    }

    #[test]
    fn single_customer_event_count_matches_poisson_mean() {
        // Window [-1, 10) with unit mean gap: 11 expected events. Averaged
        // over many seeds the count must sit within 3 sigma of the mean.
        let n_seeds = 1000u64;
        let mut total = 0usize;
        for seed in 0..n_seeds {
            total += generate_trace(&[1.0], 11.0, seed).unwrap().events().len();
        }
        let mean = total as f64 / n_seeds as f64;
        let sigma = (11.0 / n_seeds as f64).sqrt();
        assert!(
            (mean - 11.0).abs() <= 3.0 * sigma,
            "mean event count {mean} deviates from 11 by more than 3 sigma ({sigma})"
        );
    }

    #[test]
    fn window_rate_converges_per_customer() {
        // Empirical rate inside a sub-window approaches its length / mu.
        let mu = 0.5;
        let n_seeds = 1000u64;
        let mut total = 0usize;
        for seed in 0..n_seeds {
            let trace = generate_trace(&[mu], 6.0, seed).unwrap();
            total += trace.step(2).len() + trace.step(3).len();
        }
        let mean = total as f64 / n_seeds as f64;
        let expect = 2.0 / mu;
        let sigma = (expect / n_seeds as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 3.0 * sigma,
            "window rate {mean} deviates from {expect}"
        );
    }

    #[test]
    fn period_slicing_partitions_events() {
        let means = sample_mean_interarrivals(10, 2);
        let trace = generate_trace(&means, 4.0, 3).unwrap();
        let total = trace.warmup().len()
            + (1..=trace.eta()).map(|i| trace.step(i).len()).sum::<usize>();
        assert_eq!(total, trace.events().len());
        assert!(trace.warmup().iter().all(|e| e.time < 0.0));
        for i in 1..=trace.eta() {
            let lo = (i - 1) as f64;
            let hi = i as f64;
            assert!(trace.step(i).iter().all(|e| (lo..hi).contains(&e.time)));
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let ids: Vec<String> = (0..6).map(|i| format!("c{i:04}")).collect();
        let means = sample_mean_interarrivals(6, 21);
        let trace = generate_trace(&means, 3.0, 22).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&ids, &mut buf).unwrap();
        let back = ArrivalTrace::read_csv(&ids, 3.0, buf.as_slice()).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn csv_rejects_unknown_customer() {
        let ids = vec!["a".to_string()];
        let csv = "time,customer_id\n0.5,zzz\n";
        assert!(matches!(
            ArrivalTrace::read_csv(&ids, 2.0, csv.as_bytes()),
            Err(Error::Load(_))
        ));
    }
}
