use rand::Rng as _;

use super::{pooled_dimensions, DimBins, QuantizerKind, QuantizerModel};
use crate::error::{Error, Result};
use crate::rng::{rng_for, stream, Rng};
use crate::sequence::MultivariateSequence;

/// Fits `bins` adaptive bins per dimension with 1-D k-means.
///
/// Centers are seeded k-means++ style from `rng_for(seed, KMEANS_1D + dim)`
/// and refined with at most `max_iter` Lloyd steps, stopping early once the
/// assignment no longer changes. Cut points are the midpoints between
/// consecutive sorted centers.
pub fn fit_kmeans_quantizer(
    dataset: &[MultivariateSequence],
    bins: u32,
    max_iter: usize,
    seed: u64,
) -> Result<QuantizerModel> {
    super::validate_bins(bins)?;
    if max_iter == 0 {
        return Err(Error::InvalidParams("max_iter must be positive".into()));
    }
    let pooled = pooled_dimensions(dataset)?;
    let k = bins as usize;
    let mut dims = Vec::with_capacity(pooled.len());
    for (j, mut values) in pooled.into_iter().enumerate() {
        values.sort_unstable_by(f64::total_cmp);
        let distinct = 1 + values.windows(2).filter(|w| w[0] != w[1]).count();
        if distinct < k {
            return Err(Error::TooFewDistinctValues {
                dim: j,
                distinct,
                bins: k,
            });
        }
        let mut rng = rng_for(seed, stream::KMEANS_1D + j as u64);
        let centers = lloyd(&values, seed_centers(&values, k, &mut rng), max_iter);
        let cuts: Vec<f64> = centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        if cuts
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidParams(format!(
                "dimension {j}: k-means produced coincident centers"
            )));
        }
        dims.push(DimBins::Cuts {
            min: values[0],
            max: values[values.len() - 1],
            cuts,
        });
    }
    QuantizerModel::new(QuantizerKind::KMeans1d, bins, dims)
}

/// k-means++ seeding over sorted values; returns sorted centers.
fn seed_centers(values: &[f64], k: usize, rng: &mut Rng) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k);
    centers.push(values[rng.random_range(0..values.len())]);
    let mut dist2: Vec<f64> = values.iter().map(|&v| (v - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            dist2
                .iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or_else(|| dist2.iter().rposition(|&d| d > 0.0).expect("positive weight"))
        } else {
            rng.random_range(0..values.len())
        };
        let c = values[pick];
        centers.push(c);
        for (d, &v) in dist2.iter_mut().zip(values) {
            *d = d.min((v - c).powi(2));
        }
    }
    centers.sort_unstable_by(f64::total_cmp);
    centers
}

/// Lloyd iterations on sorted 1-D data. A cluster is a contiguous run of the
/// sorted values; a value equal to a cut point joins the lower cluster.
fn lloyd(values: &[f64], mut centers: Vec<f64>, max_iter: usize) -> Vec<f64> {
    let mut bounds: Vec<usize> = Vec::new();
    for _ in 0..max_iter {
        let mut next = Vec::with_capacity(centers.len() + 1);
        next.push(0);
        for w in centers.windows(2) {
            let cut = 0.5 * (w[0] + w[1]);
            next.push(values.partition_point(|&v| v <= cut));
        }
        next.push(values.len());
        if next == bounds {
            break;
        }
        for (c, seg) in centers.iter_mut().zip(next.windows(2)) {
            let run = &values[seg[0]..seg[1]];
            if !run.is_empty() {
                *c = run.iter().sum::<f64>() / run.len() as f64;
            }
        }
        bounds = next;
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(rows: Vec<Vec<f64>>) -> MultivariateSequence {
        MultivariateSequence::new("s", "c", rows).unwrap()
    }

    #[test]
    fn two_separated_clusters() {
        let data = [seq(vec![vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0]])];
        for seed in 0..10 {
            let m = fit_kmeans_quantizer(&data, 2, 50, seed).unwrap();
            assert_eq!(
                m.dim(0),
                &DimBins::Cuts {
                    min: 0.0,
                    max: 10.0,
                    cuts: vec![5.0]
                }
            );
        }
    }

    #[test]
    fn single_bin() {
        let data = [seq(vec![vec![1.0, 2.0, 7.0]])];
        let m = fit_kmeans_quantizer(&data, 1, 10, 3).unwrap();
        assert_eq!(
            m.dim(0),
            &DimBins::Cuts {
                min: 1.0,
                max: 7.0,
                cuts: vec![]
            }
        );
        for f in [1.0, 2.0, 5.5, 7.0] {
            assert_eq!(m.quantize_value(0, f), 1);
        }
        assert_eq!(m.quantize_value(0, 0.5), 0);
        assert_eq!(m.quantize_value(0, 7.5), 2);
    }

    #[test]
    fn deterministic_for_seed() {
        let row: Vec<f64> = (0..500).map(|i| ((i * 7919) % 1000) as f64 / 37.0).collect();
        let data = [seq(vec![row.clone(), row.iter().map(|v| v.sin()).collect()])];
        let a = fit_kmeans_quantizer(&data, 8, 100, 42).unwrap();
        let b = fit_kmeans_quantizer(&data, 8, 100, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn training_values_stay_in_range() {
        let row: Vec<f64> = (0..300).map(|i| ((i * 31) % 97) as f64).collect();
        let data = [seq(vec![row.clone()])];
        let m = fit_kmeans_quantizer(&data, 16, 100, 1).unwrap();
        for &v in &row {
            assert!((1..=16).contains(&m.quantize_value(0, v)));
        }
    }

    #[test]
    fn too_few_distinct() {
        let data = [seq(vec![vec![1.0, 1.0, 2.0]])];
        assert!(matches!(
            fit_kmeans_quantizer(&data, 3, 10, 0),
            Err(Error::TooFewDistinctValues {
                dim: 0,
                distinct: 2,
                bins: 3
            })
        ));
        assert!(matches!(fit_kmeans_quantizer(&[], 3, 10, 0), Err(Error::EmptyDataset)));
    }
}
