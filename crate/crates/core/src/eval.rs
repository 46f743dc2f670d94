//! Clustering agreement metrics: Adjusted Rand Index over contingency
//! tables, permutation significance testing, and ARI differences against
//! two reference truths.
//!
//! The ARI numerator and denominator are assembled exactly in 128-bit
//! integers from the contingency table, so results are reproducible to the
//! last bit and the only rounding happens in the final division. The
//! degenerate zero-denominator case (both partitions all-singletons or both
//! one-cell) returns 1 when the partitions are identical and 0 otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{derive_seed, rng_from_seed};
use rand::seq::SliceRandom;

/// Cluster assignment over n items with labels canonicalized to 0..K-1 in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<u32>,
    k: usize,
}

impl Partition {
    /// Canonicalize an assignment vector: labels are remapped to 0..K-1 by
    /// first appearance, so any relabeling of the same partition yields an
    /// equal `Partition`.
    pub fn new(assignment: &[u32]) -> Partition {
        let mut map = std::collections::HashMap::new();
        let mut labels = Vec::with_capacity(assignment.len());
        for &raw in assignment {
            let next = map.len() as u32;
            let canon = *map.entry(raw).or_insert(next);
            labels.push(canon);
        }
        Partition {
            labels,
            k: map.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of cells.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

/// ARI value with the contingency table it was computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AriResult {
    pub ari: f64,
    /// K1 x K2 joint cell counts; row sums are p1's cell sizes, column sums
    /// are p2's.
    pub contingency: Vec<Vec<u64>>,
    /// Permutation-test p-value, when a test was run.
    pub p_value: Option<f64>,
    /// Number of permutation replicates behind `p_value`.
    pub null_samples: Option<usize>,
}

impl AriResult {
    /// Contingency table as CSV rows of counts.
    pub fn contingency_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.contingency {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn choose2(x: i128) -> i128 {
    x * (x - 1) / 2
}

fn contingency(p1: &Partition, p2: &Partition) -> Vec<Vec<u64>> {
    let mut table = vec![vec![0u64; p2.k]; p1.k];
    for (&l1, &l2) in p1.labels.iter().zip(&p2.labels) {
        table[l1 as usize][l2 as usize] += 1;
    }
    table
}

/// ARI from a contingency table, exactly, as the ratio of two i128 values:
/// num = 2(S*C(n,2) - sum_a*sum_b), den = C(n,2)(sum_a+sum_b) - 2*sum_a*sum_b
/// where S sums C(n_ij,2). A zero denominator is the degenerate case.
fn ari_from_table(table: &[Vec<u64>], n: usize, identical: bool) -> f64 {
    let s: i128 = table
        .iter()
        .flat_map(|row| row.iter())
        .map(|&c| choose2(c as i128))
        .sum();
    let sum_a: i128 = table
        .iter()
        .map(|row| choose2(row.iter().map(|&c| c as i128).sum()))
        .sum();
    let sum_b: i128 = (0..table[0].len())
        .map(|j| choose2(table.iter().map(|row| row[j] as i128).sum()))
        .sum();
    let cn2 = choose2(n as i128);
    let num = 2 * (s * cn2 - sum_a * sum_b);
    let den = cn2 * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if den == 0 {
        return if identical { 1.0 } else { 0.0 };
    }
    num as f64 / den as f64
}

fn check_pair(p1: &Partition, p2: &Partition) -> Result<()> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidInput(format!(
            "partition lengths differ: {} vs {}",
            p1.len(),
            p2.len()
        )));
    }
    if p1.len() < 2 {
        return Err(Error::InvalidInput(
            "ARI needs at least 2 items".to_string(),
        ));
    }
    Ok(())
}

/// Hubert-Arabie Adjusted Rand Index between two partitions.
///
/// # Arguments
/// * `p1`, `p2` - partitions of the same n items
///
/// # Returns
/// The ARI together with the contingency table it was derived from.
/// Identical partitions give exactly 1; independent partitions are centered
/// at 0 in expectation.
///
/// # Errors
/// `InvalidInput` on length mismatch or n < 2.
pub fn ari(p1: &Partition, p2: &Partition) -> Result<AriResult> {
    check_pair(p1, p2)?;
    let table = contingency(p1, p2);
    let value = ari_from_table(&table, p1.len(), p1 == p2);
    Ok(AriResult {
        ari: value,
        contingency: table,
        p_value: None,
        null_samples: None,
    })
}

/// One-sided permutation test of agreement beyond chance.
///
/// Permutes `p2`'s assignment across items `n_perm` times and reports
/// p = (1 + #{ARI_perm >= ARI_obs}) / (n_perm + 1). Replicates use seeds
/// derived from the replicate index, so the value is deterministic for a
/// given seed regardless of evaluation order.
///
/// # Arguments
/// * `n_perm` - number of permutations, at least 100
/// * `seed` - namespaces the whole test
///
/// # Returns
/// The observed-ARI result with `p_value` and `null_samples` filled in.
///
/// # Errors
/// `InvalidInput` if n_perm < 100 or the partitions are malformed.
pub fn permutation_test_ari(
    p1: &Partition,
    p2: &Partition,
    n_perm: usize,
    seed: u64,
) -> Result<AriResult> {
    if n_perm < 100 {
        return Err(Error::InvalidInput(format!(
            "permutation test needs at least 100 replicates, got {n_perm}"
        )));
    }
    let mut observed = ari(p1, p2)?;
    let mut hits = 0usize;
    let mut shuffled = p2.clone();
    for rep in 0..n_perm {
        let mut rng = rng_from_seed(derive_seed(seed, rep as u64));
        shuffled.labels.copy_from_slice(&p2.labels);
        shuffled.labels.shuffle(&mut rng);
        let table = contingency(p1, &shuffled);
        let perm = ari_from_table(&table, p1.len(), *p1 == shuffled);
        if perm >= observed.ari {
            hits += 1;
        }
    }
    observed.p_value = Some((1 + hits) as f64 / (n_perm + 1) as f64);
    observed.null_samples = Some(n_perm);
    Ok(observed)
}

/// Difference of agreements against two reference truths:
/// ari(cl, truth_a) - ari(cl, truth_b).
///
/// Swapping the truths negates the value exactly; identical truths give
/// exactly 0.
///
/// # Errors
/// `InvalidInput` if any pair is malformed.
pub fn delta_ari(cl: &Partition, truth_a: &Partition, truth_b: &Partition) -> Result<f64> {
    Ok(ari(cl, truth_a)?.ari - ari(cl, truth_b)?.ari)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Independent O(n^2) oracle: classify every item pair as agreeing or
    /// disagreeing in each partition, then apply the pair-count form of the
    /// adjusted index.
    fn pair_counting_ari(p1: &Partition, p2: &Partition) -> f64 {
        let n = p1.len();
        let (mut n11, mut n10, mut n01, mut n00) = (0i128, 0i128, 0i128, 0i128);
        for i in 0..n {
            for j in i + 1..n {
                let same1 = p1.labels()[i] == p1.labels()[j];
                let same2 = p2.labels()[i] == p2.labels()[j];
                match (same1, same2) {
                    (true, true) => n11 += 1,
                    (true, false) => n10 += 1,
                    (false, true) => n01 += 1,
                    (false, false) => n00 += 1,
                }
            }
        }
        let num = 2 * (n11 * n00 - n10 * n01);
        let den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
        if den == 0 {
            return if p1 == p2 { 1.0 } else { 0.0 };
        }
        num as f64 / den as f64
    }

    /// All set partitions of n items as restricted growth strings.
    fn all_partitions(n: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        fn rec(i: usize, max_used: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i == current.len() {
                out.push(current.clone());
                return;
            }
            for label in 0..=max_used + 1 {
                current[i] = label;
                rec(i + 1, max_used.max(label), current, out);
            }
        }
        rec(1, 0, &mut current, &mut out);
        out
    }

    #[test]
    fn identical_partitions_score_one() {
        let p = Partition::new(&[0, 1, 1, 2, 0, 2]);
        let r = ari(&p, &p).unwrap();
        assert_eq!(r.ari, 1.0);
        assert_eq!(r.contingency[0][0] + r.contingency[1][1] + r.contingency[2][2], 6);
    }

    #[test]
    fn relabeling_is_invisible() {
        let p1 = Partition::new(&[0, 0, 1, 1]);
        let p2 = Partition::new(&[1, 1, 0, 0]);
        assert_eq!(p1, p2);
        assert_eq!(ari(&p1, &p2).unwrap().ari, 1.0);
    }

    #[test]
    fn matches_pair_counting_on_a_known_case() {
        let p1 = Partition::new(&[0, 0, 1, 1, 2, 2]);
        let p2 = Partition::new(&[0, 0, 1, 2, 1, 2]);
        let got = ari(&p1, &p2).unwrap().ari;
        assert_eq!(got, pair_counting_ari(&p1, &p2));
    }

    #[test]
    fn exhaustive_oracle_equality_small_n() {
        for n in 2..=5 {
            let parts: Vec<Partition> =
                all_partitions(n).iter().map(|v| Partition::new(v)).collect();
            for a in &parts {
                for b in &parts {
                    assert_eq!(
                        ari(a, b).unwrap().ari,
                        pair_counting_ari(a, b),
                        "n={n} a={:?} b={:?}",
                        a.labels(),
                        b.labels()
                    );
                }
            }
        }
    }

    #[test]
    fn random_pairs_match_oracle() {
        let mut rng = rng_from_seed(17);
        for _ in 0..50 {
            let a: Vec<u32> = (0..200).map(|_| rng.random_range(0..4u32)).collect();
            let b: Vec<u32> = (0..200).map(|_| rng.random_range(0..3u32)).collect();
            let (pa, pb) = (Partition::new(&a), Partition::new(&b));
            assert_eq!(ari(&pa, &pb).unwrap().ari, pair_counting_ari(&pa, &pb));
        }
    }

    #[test]
    fn ari_is_symmetric() {
        let mut rng = rng_from_seed(23);
        for _ in 0..20 {
            let a: Vec<u32> = (0..80).map(|_| rng.random_range(0..5u32)).collect();
            let b: Vec<u32> = (0..80).map(|_| rng.random_range(0..2u32)).collect();
            let (pa, pb) = (Partition::new(&a), Partition::new(&b));
            assert_eq!(ari(&pa, &pb).unwrap().ari, ari(&pb, &pa).unwrap().ari);
        }
    }

    #[test]
    fn independent_partitions_center_at_zero() {
        let mut rng = rng_from_seed(5);
        let trials = 300;
        let mut values = Vec::with_capacity(trials);
        for _ in 0..trials {
            let a: Vec<u32> = (0..60).map(|_| rng.random_range(0..3u32)).collect();
            let b: Vec<u32> = (0..60).map(|_| rng.random_range(0..3u32)).collect();
            values.push(ari(&Partition::new(&a), &Partition::new(&b)).unwrap().ari);
        }
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            mean.abs() <= 3.0 * se,
            "chance-adjusted mean {mean} exceeds 3 SE {se}"
        );
    }

    #[test]
    fn degenerate_denominators_follow_the_identity_rule() {
        let singletons = Partition::new(&[0, 1, 2, 3]);
        let one_cell = Partition::new(&[0, 0, 0, 0]);
        assert_eq!(ari(&singletons, &singletons).unwrap().ari, 1.0);
        assert_eq!(ari(&one_cell, &one_cell).unwrap().ari, 1.0);
        assert_eq!(ari(&singletons, &one_cell).unwrap().ari, 0.0);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let p = Partition::new(&[0, 1]);
        let q = Partition::new(&[0, 1, 2]);
        assert!(ari(&p, &q).is_err());
        let single = Partition::new(&[0]);
        assert!(ari(&single, &single).is_err());
    }

    #[test]
    fn self_test_p_value_is_minimal() {
        let labels: Vec<u32> = (0..100).map(|i| (i / 25) as u32).collect();
        let p = Partition::new(&labels);
        let r = permutation_test_ari(&p, &p, 200, 9).unwrap();
        assert_eq!(r.p_value, Some(1.0 / 201.0));
        assert_eq!(r.null_samples, Some(200));
    }

    #[test]
    fn constant_partition_p_value_is_one() {
        let mut rng = rng_from_seed(3);
        let a: Vec<u32> = (0..50).map(|_| rng.random_range(0..3u32)).collect();
        let constant = vec![0u32; 50];
        let r =
            permutation_test_ari(&Partition::new(&a), &Partition::new(&constant), 150, 4).unwrap();
        assert_eq!(r.ari, 0.0);
        assert_eq!(r.p_value, Some(1.0));
    }

    #[test]
    fn permutation_test_is_deterministic_and_validates() {
        let mut rng = rng_from_seed(8);
        let a: Vec<u32> = (0..40).map(|_| rng.random_range(0..2u32)).collect();
        let b: Vec<u32> = (0..40).map(|_| rng.random_range(0..2u32)).collect();
        let (pa, pb) = (Partition::new(&a), Partition::new(&b));
        let r1 = permutation_test_ari(&pa, &pb, 300, 12).unwrap();
        let r2 = permutation_test_ari(&pa, &pb, 300, 12).unwrap();
        assert_eq!(r1.p_value, r2.p_value);
        assert!(permutation_test_ari(&pa, &pb, 99, 12).is_err());
    }

    #[test]
    fn null_p_values_look_uniform() {
        let mut rng = rng_from_seed(14);
        let mut medians = Vec::new();
        for trial in 0..40 {
            let a: Vec<u32> = (0..200).map(|_| rng.random_range(0..2u32)).collect();
            let b: Vec<u32> = (0..200).map(|_| rng.random_range(0..2u32)).collect();
            let r = permutation_test_ari(
                &Partition::new(&a),
                &Partition::new(&b),
                100,
                trial as u64,
            )
            .unwrap();
            medians.push(r.p_value.unwrap());
        }
        medians.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let median = medians[medians.len() / 2];
        assert!(
            (0.25..=0.75).contains(&median),
            "null p-value median {median} outside [0.25, 0.75]"
        );
    }

    #[test]
    fn delta_ari_identities() {
        let mut rng = rng_from_seed(21);
        let cl: Vec<u32> = (0..120).map(|_| rng.random_range(0..2u32)).collect();
        let other: Vec<u32> = (0..120).map(|_| rng.random_range(0..2u32)).collect();
        let (pc, po) = (Partition::new(&cl), Partition::new(&other));
        assert_eq!(delta_ari(&pc, &po, &po).unwrap(), 0.0);
        let d1 = delta_ari(&pc, &pc, &po).unwrap();
        let d2 = delta_ari(&pc, &po, &pc).unwrap();
        assert_eq!(d1, -d2);
        assert!(d1 > 0.8, "self-truth delta {d1} unexpectedly small");
    }

    #[test]
    fn contingency_csv_rows_are_counts() {
        let p1 = Partition::new(&[0, 0, 1, 1]);
        let p2 = Partition::new(&[0, 1, 0, 1]);
        let r = ari(&p1, &p2).unwrap();
        assert_eq!(r.contingency_csv(), "1,1\n1,1\n");
    }
}
