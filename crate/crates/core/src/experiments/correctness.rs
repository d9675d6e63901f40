use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::DenseMatrix;

/// Magnitude separating big from small estimates.
pub const MAGNITUDE_THRESHOLD: f64 = 0.5;
/// Absolute error tolerance ε.
pub const ERROR_TOLERANCE: f64 = 0.1;

/// Per-run accuracy counts over the big index set `B` and its complement `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    /// Matrix dimension.
    pub n: usize,
    pub big: usize,
    pub small: usize,
    /// Big entries with `|c̃| ≥ 0.5`.
    pub big_above_half: usize,
    /// Small entries with `|c̃| ≤ 0.5`.
    pub small_below_half: usize,
    /// Big entries with `|c̃ − c| ≤ 0.1`.
    pub big_eps01: usize,
    /// Small entries with `|c̃ − c| ≤ 0.1`.
    pub small_eps01: usize,
}

impl CorrectnessReport {
    /// True when every entry is within ε.
    pub fn is_exact(&self) -> bool {
        self.big_eps01 + self.small_eps01 == self.big + self.small
    }
}

/// Counts the four accuracy statistics. `big_entries` may contain duplicates.
pub fn correctness_metrics(
    estimate: &DenseMatrix,
    truth: &DenseMatrix,
    big_entries: &[(usize, usize)],
) -> Result<CorrectnessReport> {
    let (rows, cols) = (truth.rows(), truth.cols());
    if estimate.rows() != rows || estimate.cols() != cols {
        return Err(Error::param(format!(
            "estimate is {}x{}, truth is {rows}x{cols}",
            estimate.rows(),
            estimate.cols()
        )));
    }
    let mut is_big = vec![false; rows * cols];
    for &(i, j) in big_entries {
        if i >= rows || j >= cols {
            return Err(Error::param(format!("big entry ({i}, {j}) outside {rows}x{cols}")));
        }
        is_big[i * cols + j] = true;
    }
    let mut r = CorrectnessReport {
        n: rows,
        big: 0,
        small: 0,
        big_above_half: 0,
        small_below_half: 0,
        big_eps01: 0,
        small_eps01: 0,
    };
    for ((&e, &c), &big) in estimate.as_slice().iter().zip(truth.as_slice()).zip(&is_big) {
        let close = (e - c).abs() <= ERROR_TOLERANCE;
        if big {
            r.big += 1;
            r.big_above_half += usize::from(e.abs() >= MAGNITUDE_THRESHOLD);
            r.big_eps01 += usize::from(close);
        } else {
            r.small += 1;
            r.small_below_half += usize::from(e.abs() <= MAGNITUDE_THRESHOLD);
            r.small_eps01 += usize::from(close);
        }
    }
    Ok(r)
}

/// Quality class of a parameter pair, ordered `Fail < … < Perfect`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterCategory {
    Fail,
    Satisfactory,
    Decent,
    Good,
    Perfect,
}

impl ParameterCategory {
    pub const ALL: [ParameterCategory; 5] = [
        ParameterCategory::Perfect,
        ParameterCategory::Good,
        ParameterCategory::Decent,
        ParameterCategory::Satisfactory,
        ParameterCategory::Fail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParameterCategory::Perfect => "perfect",
            ParameterCategory::Good => "good",
            ParameterCategory::Decent => "decent",
            ParameterCategory::Satisfactory => "satisfactory",
            ParameterCategory::Fail => "fail",
        }
    }
}

impl fmt::Display for ParameterCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParameterCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown category {s:?}")))
    }
}

/// Number of the `reps` cases that must pass a "99% of cases" rule: `⌈0.99·reps⌉`.
pub fn required_passes(reps: usize) -> usize {
    (99 * reps).div_ceil(100)
}

/// `count ≥ 0.99·total` in exact integer arithmetic.
fn at_least_99_percent(count: usize, total: usize) -> bool {
    100 * count as u128 >= 99 * total as u128
}

fn perfect(r: &CorrectnessReport) -> bool {
    r.is_exact()
}

fn good(r: &CorrectnessReport) -> bool {
    r.big_eps01 == r.big && r.small_eps01 + r.n >= r.small
}

fn decent(r: &CorrectnessReport) -> bool {
    let log_n = r.n.max(1).ilog2() as usize;
    let need = r.big.saturating_sub(log_n).max(1);
    r.big_eps01 >= need && at_least_99_percent(r.small_eps01, r.small)
}

fn big_satisfactory(r: &CorrectnessReport) -> bool {
    at_least_99_percent(r.big_above_half, r.big)
}

fn small_satisfactory(r: &CorrectnessReport) -> bool {
    at_least_99_percent(r.small_below_half, r.small)
}

/// Highest category whose condition holds across `reports`.
pub fn categorize(reports: &[CorrectnessReport]) -> Result<ParameterCategory> {
    if reports.is_empty() {
        return Err(Error::param("categorize needs at least one report"));
    }
    if reports.iter().all(perfect) {
        return Ok(ParameterCategory::Perfect);
    }
    if reports.iter().all(good) {
        return Ok(ParameterCategory::Good);
    }
    if reports.iter().all(decent) {
        return Ok(ParameterCategory::Decent);
    }
    let need = required_passes(reports.len());
    let big_ok = reports.iter().filter(|r| big_satisfactory(r)).count();
    let small_ok = reports.iter().filter(|r| small_satisfactory(r)).count();
    if big_ok >= need && small_ok >= need {
        return Ok(ParameterCategory::Satisfactory);
    }
    Ok(ParameterCategory::Fail)
}

/// True once `reports` (a prefix of `total` planned runs) already rule out
/// every category above Fail, so the remaining runs can be skipped.
pub fn fail_is_certain(reports: &[CorrectnessReport], total: usize) -> bool {
    if reports.iter().all(decent) {
        return false;
    }
    let allowed = total - required_passes(total);
    let big_misses = reports.iter().filter(|r| !big_satisfactory(r)).count();
    let small_misses = reports.iter().filter(|r| !small_satisfactory(r)).count();
    big_misses > allowed || small_misses > allowed
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(n: usize, big: usize) -> CorrectnessReport {
        let small = n * n - big;
        CorrectnessReport {
            n,
            big,
            small,
            big_above_half: big,
            small_below_half: small,
            big_eps01: big,
            small_eps01: small,
        }
    }

    #[test]
    fn identical_matrices_max_counts() {
        let truth = DenseMatrix::from_fn(4, 4, |i, j| if i == j { 0.9 } else { 0.01 });
        let r = correctness_metrics(&truth, &truth, &[(0, 0), (1, 1), (2, 2), (3, 3)]).unwrap();
        assert_eq!(r, exact(4, 4));
    }

    #[test]
    fn uniform_offset_breaks_tolerance() {
        let truth = DenseMatrix::from_fn(4, 4, |i, j| if i == j { 0.9 } else { 0.0 });
        let est = DenseMatrix::from_fn(4, 4, |i, j| truth.get(i, j) + 0.2);
        let r = correctness_metrics(&est, &truth, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!((r.big_eps01, r.small_eps01), (0, 0));
    }

    #[test]
    fn single_underestimated_big_entry() {
        let mut truth = DenseMatrix::zeros(4, 4);
        truth.set(2, 1, 0.9);
        let mut est = truth.clone();
        est.set(2, 1, 0.45);
        let r = correctness_metrics(&est, &truth, &[(2, 1)]).unwrap();
        assert_eq!((r.big_above_half, r.big_eps01), (0, 0));
        assert_eq!((r.big, r.small, r.small_below_half, r.small_eps01), (1, 15, 15, 15));
    }

    #[test]
    fn metric_errors() {
        let a = DenseMatrix::zeros(4, 4);
        assert!(correctness_metrics(&DenseMatrix::zeros(3, 4), &a, &[]).is_err());
        assert!(correctness_metrics(&a, &a, &[(4, 0)]).is_err());
        assert!(categorize(&[]).is_err());
    }

    #[test]
    fn category_examples() {
        let perfect = vec![exact(1024, 10); 5];
        assert_eq!(categorize(&perfect).unwrap(), ParameterCategory::Perfect);

        let mut one_off = perfect.clone();
        one_off[2].small_eps01 -= 1;
        assert_eq!(categorize(&one_off).unwrap(), ParameterCategory::Good);

        // 100 cases with 100 big entries; in 5 of them 2 big entries drop below 0.5
        let mut reps = vec![exact(1024, 100); 100];
        for r in reps.iter_mut().take(5) {
            r.big_above_half = 98;
            r.big_eps01 = 0;
        }
        assert_eq!(categorize(&reps).unwrap(), ParameterCategory::Fail);
        assert!(fail_is_certain(&reps[..5], 100));
        assert!(!fail_is_certain(&reps[..1], 100));

        // a single miss out of 100 is tolerated
        reps[1..5].iter_mut().for_each(|r| *r = exact(1024, 100));
        assert_eq!(categorize(&reps).unwrap(), ParameterCategory::Satisfactory);
    }

    #[test]
    fn decent_allows_log_n_big_misses() {
        let mut r = exact(1024, 1024);
        r.big_eps01 = 1024 - 10;
        r.small_eps01 = r.small - r.small / 100;
        assert_eq!(categorize(&[r]).unwrap(), ParameterCategory::Decent);
        r.big_eps01 -= 1;
        assert_eq!(categorize(&[r]).unwrap(), ParameterCategory::Satisfactory);
    }

    #[test]
    fn required_passes_rounding() {
        assert_eq!(required_passes(100), 99);
        assert_eq!(required_passes(10), 10);
        assert_eq!(required_passes(1), 1);
        assert_eq!(required_passes(200), 198);
    }

    fn report() -> impl Strategy<Value = CorrectnessReport> {
        (1usize..40, 0usize..8).prop_flat_map(|(n, big)| {
            let big = big.min(n * n);
            let small = n * n - big;
            (0..=big, 0..=small, 0..=big, 0..=small).prop_map(move |(ba, sb, be, se)| {
                CorrectnessReport {
                    n,
                    big,
                    small,
                    big_above_half: ba,
                    small_below_half: sb,
                    big_eps01: be,
                    small_eps01: se,
                }
            })
        })
    }

    proptest! {
        #[test]
        fn categorize_is_monotone(
            reports in proptest::collection::vec(report(), 1..6),
            bumps in proptest::collection::vec((0usize..4, 0usize..50), 1..6),
        ) {
            let before = categorize(&reports).unwrap();
            let mut better = reports.clone();
            for (k, (field, amount)) in bumps.into_iter().enumerate() {
                let r = &mut better[k % reports.len()];
                match field {
                    0 => r.big_above_half = (r.big_above_half + amount).min(r.big),
                    1 => r.small_below_half = (r.small_below_half + amount).min(r.small),
                    2 => r.big_eps01 = (r.big_eps01 + amount).min(r.big),
                    _ => r.small_eps01 = (r.small_eps01 + amount).min(r.small),
                }
            }
            prop_assert!(categorize(&better).unwrap() >= before);
        }

        #[test]
        fn metrics_ignore_big_entry_order(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::Rng;
            let mut rng = crate::rng::seeded(seed);
            let truth = DenseMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
            let est = DenseMatrix::from_fn(6, 6, |i, j| truth.get(i, j) + rng.random_range(-0.3..0.3));
            let mut big: Vec<(usize, usize)> = (0..6).map(|i| (i, rng.random_range(0..6))).collect();
            let r1 = correctness_metrics(&est, &truth, &big).unwrap();
            big.shuffle(&mut rng);
            prop_assert_eq!(r1, correctness_metrics(&est, &truth, &big).unwrap());
        }
    }
}
