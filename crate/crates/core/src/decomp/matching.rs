use rand::seq::index;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Matching;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// A comparison-group row paired with a row of group `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub index_d: usize,
    pub index_a: usize,
    /// Common rank by predicted probability (0 = lowest).
    pub rank: usize,
}

/// Pre-sorted predictions of both groups, reused across iterations.
///
/// The larger group is subsampled down to the size of the smaller one;
/// with equal sizes no draw is made.
#[derive(Debug, Clone)]
pub struct Matcher {
    order_a: Vec<usize>,
    order_d: Vec<usize>,
}

fn sorted_order(pred: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pred.len()).collect();
    idx.sort_by(|&i, &j| pred[i].total_cmp(&pred[j]).then(i.cmp(&j)));
    idx
}

impl Matcher {
    pub fn new(pred_a: &[f64], pred_d: &[f64]) -> Result<Matcher> {
        if pred_a.is_empty() || pred_d.is_empty() {
            return Err(Error::Decomposition("cannot match an empty group".into()));
        }
        Ok(Matcher { order_a: sorted_order(pred_a), order_d: sorted_order(pred_d) })
    }

    pub fn n_pairs(&self) -> usize {
        self.order_a.len().min(self.order_d.len())
    }

    /// Draws one matched sample.
    pub fn draw(&self, rng: &mut Stream, matching: Matching) -> Vec<MatchedPair> {
        let (na, nd) = (self.order_a.len(), self.order_d.len());
        let mut side_a = self.order_a.clone();
        let mut side_d = self.order_d.clone();
        if na > nd {
            side_a = subsample_sorted(&self.order_a, nd, rng);
        } else if nd > na {
            side_d = subsample_sorted(&self.order_d, na, rng);
        }
        if matching == Matching::Random {
            side_a.shuffle(rng);
        }
        side_d
            .into_iter()
            .zip(side_a)
            .enumerate()
            .map(|(rank, (index_d, index_a))| MatchedPair { index_d, index_a, rank })
            .collect()
    }
}

/// Uniform draw of `k` rows without replacement, returned in the order of
/// `sorted` (so the subsample stays sorted by prediction).
fn subsample_sorted(sorted: &[usize], k: usize, rng: &mut Stream) -> Vec<usize> {
    let n = sorted.len();
    let mut chosen = vec![false; n];
    for row in index::sample(rng, n, k) {
        chosen[row] = true;
    }
    sorted.iter().copied().filter(|&row| chosen[row]).collect()
}

/// Pairs a given subsample of group `a` with all of group `d` by rank.
/// `subset_a` must have the size of group `d`.
pub fn match_subset(pred_a: &[f64], subset_a: &[usize], pred_d: &[f64]) -> Result<Vec<MatchedPair>> {
    if subset_a.len() != pred_d.len() {
        return Err(Error::Decomposition("subsample size differs from comparison group size".into()));
    }
    let mut a = subset_a.to_vec();
    a.sort_by(|&i, &j| pred_a[i].total_cmp(&pred_a[j]).then(i.cmp(&j)));
    Ok(sorted_order(pred_d)
        .into_iter()
        .zip(a)
        .enumerate()
        .map(|(rank, (index_d, index_a))| MatchedPair { index_d, index_a, rank })
        .collect())
}

/// One matched sample under rank matching.
pub fn draw_matched_subsample(pred_a: &[f64], pred_d: &[f64], rng: &mut Stream) -> Result<Vec<MatchedPair>> {
    Ok(Matcher::new(pred_a, pred_d)?.draw(rng, Matching::Rank))
}
