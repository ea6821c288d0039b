use thiserror::Error;

/// Figure-style token-value histograms default to 200 bins.
pub const DEFAULT_BINS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HistogramError {
    #[error("cannot histogram an empty value list")]
    Empty,
    #[error("bin count must be at least 1")]
    NoBins,
}

/// Equal-width histogram over [min, max] of the input values. `edges` has
/// one more entry than `counts`; the maximum value is counted in the last
/// bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bins token values into `bins` equal-width intervals spanning
/// [min, max]. A single distinct value degenerates to a unit-width span so
/// the edges stay strictly increasing; everything then lands in bin 0.
pub fn final_histogram(values: &[u64], bins: usize) -> Result<Histogram, HistogramError> {
    if values.is_empty() {
        return Err(HistogramError::Empty);
    }
    if bins == 0 {
        return Err(HistogramError::NoBins);
    }

    let min = *values.iter().min().unwrap();
    let max = *values.iter().max().unwrap();
    let span = if max > min { (max - min) as f64 } else { 1.0 };
    let width = span / bins as f64;

    let mut counts = vec![0u64; bins];
    for &v in values {
        let index = (((v - min) as f64 / width) as usize).min(bins - 1);
        counts[index] += 1;
    }

    let edges = (0..=bins)
        .map(|k| min as f64 + width * k as f64)
        .collect();
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_occupy_one_bin() {
        for bins in [1, 2, 200] {
            let h = final_histogram(&[10, 10, 10], bins).unwrap();
            assert_eq!(h.counts[0], 3);
            assert_eq!(h.counts[1..].iter().sum::<u64>(), 0);
            assert_eq!(h.total(), 3);
        }
    }

    #[test]
    fn max_value_lands_in_last_bin() {
        let h = final_histogram(&[0, 100], 2).unwrap();
        assert_eq!(h.counts, vec![1, 1]);
        assert_eq!(h.edges, vec![0.0, 50.0, 100.0]);
    }

    #[test]
    fn one_value_per_bin_enumeration() {
        let values: Vec<u64> = (0..200).collect();
        let h = final_histogram(&values, 200).unwrap();
        assert!(h.counts.iter().all(|&c| c == 1));
        assert_eq!(h.edges.len(), 201);
        assert_eq!(h.edges[0], 0.0);
        assert_eq!(*h.edges.last().unwrap(), 199.0);
    }

    #[test]
    fn edges_are_monotone() {
        let h = final_histogram(&[3, 17, 91, 1024], 7).unwrap();
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn empty_input_errors() {
        assert_eq!(final_histogram(&[], 10), Err(HistogramError::Empty));
    }
}
