//! Customers, items, producers and the relevance models scored over them.
//!
//! Customers and items are addressed by dense indices into the [`Catalog`]
//! id lists; external string ids exist only at the ingestion boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grouping of items under producers. `of_item[s]` is the producer index of
/// item `s`; every item belongs to exactly one producer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProducerMap {
    names: Vec<String>,
    of_item: Vec<usize>,
}

impl ProducerMap {
    pub fn new(names: Vec<String>, of_item: Vec<usize>) -> Result<Self> {
        if let Some(&p) = of_item.iter().find(|&&p| p >= names.len()) {
            return Err(Error::invalid(format!(
                "producer index {p} out of range for {} producers",
                names.len()
            )));
        }
        Ok(ProducerMap { names, of_item })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, p: usize) -> &str {
        &self.names[p]
    }

    pub fn of_item(&self) -> &[usize] {
        &self.of_item
    }

    pub fn producer_of(&self, item: usize) -> usize {
        self.of_item[item]
    }
}

/// The universe of a run: ordered customer ids, ordered item ids and an
/// optional item-to-producer partition. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    customers: Vec<String>,
    items: Vec<String>,
    producers: Option<ProducerMap>,
}

impl Catalog {
    pub fn new(customers: Vec<String>, items: Vec<String>) -> Result<Self> {
        if customers.is_empty() || items.is_empty() {
            return Err(Error::invalid("catalog needs at least one customer and one item"));
        }
        check_unique(&customers, "customer")?;
        check_unique(&items, "item")?;
        Ok(Catalog { customers, items, producers: None })
    }

    /// Attach a producer partition; it must cover every item exactly once.
    pub fn with_producers(mut self, map: ProducerMap) -> Result<Self> {
        if map.of_item.len() != self.items.len() {
            return Err(Error::invalid(format!(
                "producer map covers {} items, catalog has {}",
                map.of_item.len(),
                self.items.len()
            )));
        }
        self.producers = Some(map);
        Ok(self)
    }

    pub fn n_customers(&self) -> usize {
        self.customers.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn customer_ids(&self) -> &[String] {
        &self.customers
    }

    pub fn item_ids(&self) -> &[String] {
        &self.items
    }

    pub fn producers(&self) -> Option<&ProducerMap> {
        self.producers.as_ref()
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::invalid(format!("duplicate {what} id {id:?}")));
        }
    }
    Ok(())
}

/// Dense row-major score matrix over customers x items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite score {v}")));
        }
        Ok(ScoreMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Self::new(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// The old and new relevance models, scored densely over the same universe.
/// Scores must be non-negative: the per-step utility floor `theta * phi_max`
/// is only a guarantee when utilities cannot go below zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevancePair {
    v_old: ScoreMatrix,
    v_new: ScoreMatrix,
}

impl RelevancePair {
    pub fn new(v_old: ScoreMatrix, v_new: ScoreMatrix) -> Result<Self> {
        if v_old.rows != v_new.rows || v_old.cols != v_new.cols {
            return Err(Error::invalid(format!(
                "relevance shapes differ: {}x{} vs {}x{}",
                v_old.rows, v_old.cols, v_new.rows, v_new.cols
            )));
        }
        for (name, m) in [("old", &v_old), ("new", &v_new)] {
            if let Some(v) = m.data.iter().find(|&&v| v < 0.0) {
                return Err(Error::invalid(format!("negative {name} relevance score {v}")));
            }
        }
        Ok(RelevancePair { v_old, v_new })
    }

    pub fn v_old(&self) -> &ScoreMatrix {
        &self.v_old
    }

    pub fn v_new(&self) -> &ScoreMatrix {
        &self.v_new
    }

    pub fn n_customers(&self) -> usize {
        self.v_old.rows
    }

    pub fn n_items(&self) -> usize {
        self.v_old.cols
    }
}

/// A slate of exactly `k` distinct items for one customer. Items are kept
/// sorted ascending so equal slates compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub customer: usize,
    items: Vec<usize>,
}

impl Recommendation {
    pub fn new(customer: usize, mut items: Vec<usize>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("recommendation must contain at least one item"));
        }
        items.sort_unstable();
        if items.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate item in recommendation"));
        }
        Ok(Recommendation { customer, items })
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }
}

/// Indices of the `k` highest-scoring items, ties broken by ascending item
/// index. The returned list is sorted ascending.
pub fn top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(Error::invalid(format!(
            "k = {k} out of range for {} items",
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores must be finite")
            .then(a.cmp(&b))
    });
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Utility of a slate under one relevance row: the plain sum of the selected
/// scores.
pub fn utility(items: &[usize], scores: &[f64]) -> f64 {
    items.iter().map(|&s| scores[s]).sum()
}

/// Maximum achievable utility for the row: the top-k sum.
pub fn max_utility(scores: &[f64], k: usize) -> Result<f64> {
    Ok(utility(&top_k(scores, k)?, scores))
}

/// Utility of the slate relative to the best slate of the same size.
///
/// Errors with [`Error::DegenerateCustomer`] when the top-k mass is not
/// positive; callers that treat such customers as vacuously satisfied map
/// that error to 1.0.
pub fn normalized_utility(items: &[usize], scores: &[f64], k: usize) -> Result<f64> {
    let best = max_utility(scores, k)?;
    if best <= 0.0 {
        return Err(Error::DegenerateCustomer);
    }
    Ok(utility(items, scores) / best)
}

/// Builds the feature-addition update pair: the old model scores an item by
/// its rating alone, the new model divides the rating by the customer-item
/// distance.
pub fn rating_distance_scores(ratings: &[f64], distances: &ScoreMatrix) -> Result<RelevancePair> {
    if distances.cols() != ratings.len() {
        return Err(Error::invalid(format!(
            "{} ratings for {} distance columns",
            ratings.len(),
            distances.cols()
        )));
    }
    if let Some(d) = distances.data.iter().find(|&&d| d <= 0.0) {
        return Err(Error::invalid(format!("non-positive distance {d}")));
    }
    let rows = distances.rows();
    let cols = distances.cols();
    let mut old = Vec::with_capacity(rows * cols);
    let mut new = Vec::with_capacity(rows * cols);
    for u in 0..rows {
        for (s, &rating) in ratings.iter().enumerate() {
            old.push(rating);
            new.push(rating / distances.get(u, s));
        }
    }
    RelevancePair::new(ScoreMatrix::new(rows, cols, old)?, ScoreMatrix::new(rows, cols, new)?)
}

/// Seeded desk-scale fixture: both models drawn independently uniform on
/// [0, 1).
pub fn synthetic_pair(
    n_customers: usize,
    n_items: usize,
    seed: u64,
) -> Result<(Catalog, RelevancePair)> {
    if n_customers == 0 || n_items == 0 {
        return Err(Error::invalid("synthetic pair needs at least one customer and one item"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>()).collect() };
    let v_old = ScoreMatrix::new(n_customers, n_items, draw(n_customers * n_items))?;
    let v_new = ScoreMatrix::new(n_customers, n_items, draw(n_customers * n_items))?;
    let customers = (0..n_customers).map(|u| format!("c{u:04}")).collect();
    let items = (0..n_items).map(|s| format!("s{s:04}")).collect();
    Ok((Catalog::new(customers, items)?, RelevancePair::new(v_old, v_new)?))
}
