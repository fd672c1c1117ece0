use super::{pooled_dimensions, DimBins, QuantizerKind, QuantizerModel};
use crate::error::{Error, Result};
use crate::sequence::MultivariateSequence;

/// Fits `bins` equal-width bins per dimension over the pooled min/max of
/// every sequence and position in `dataset`.
pub fn fit_uniform_quantizer(dataset: &[MultivariateSequence], bins: u32) -> Result<QuantizerModel> {
    super::validate_bins(bins)?;
    let pooled = pooled_dimensions(dataset)?;
    let dims = pooled
        .iter()
        .enumerate()
        .map(|(j, values)| {
            let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            if max <= min {
                return Err(Error::ConstantDimension { dim: j, value: min });
            }
            Ok(DimBins::uniform(min, max, bins))
        })
        .collect::<Result<Vec<_>>>()?;
    QuantizerModel::new(QuantizerKind::Uniform, bins, dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(rows: Vec<Vec<f64>>) -> MultivariateSequence {
        MultivariateSequence::new("s", "c", rows).unwrap()
    }

    #[test]
    fn single_sequence_range() {
        let m = fit_uniform_quantizer(&[seq(vec![(0..=10).map(f64::from).collect()])], 5).unwrap();
        assert_eq!(
            m.dim(0),
            &DimBins::Uniform {
                min: 0.0,
                max: 10.0,
                delta: 2.0
            }
        );
    }

    #[test]
    fn pooled_range() {
        let data = [seq(vec![vec![0.0, 4.0]]), seq(vec![vec![2.0, 10.0]])];
        let m = fit_uniform_quantizer(&data, 4).unwrap();
        assert_eq!(
            m.dim(0),
            &DimBins::Uniform {
                min: 0.0,
                max: 10.0,
                delta: 2.5
            }
        );
    }

    #[test]
    fn constant_dimension() {
        let data = [seq(vec![vec![3.0, 3.0, 3.0], vec![1.0, 2.0, 3.0]])];
        assert!(matches!(
            fit_uniform_quantizer(&data, 4),
            Err(Error::ConstantDimension { dim: 0, .. })
        ));
    }

    #[test]
    fn empty_dataset() {
        assert!(matches!(fit_uniform_quantizer(&[], 4), Err(Error::EmptyDataset)));
        assert!(matches!(
            fit_uniform_quantizer(&[seq(vec![vec![]])], 4),
            Err(Error::EmptyDataset)
        ));
    }
}
