//! How many labels to emit: one-dimensional mean shift over the belief
//! values, keeping the cluster with the highest mode.

use crate::error::{Error, Result};
use crate::model::BeliefVector;

const TOLERANCE: f64 = 1e-6;
const MAX_SHIFTS: usize = 500;

/// Mode reached from `start` with a flat kernel of the given radius.
fn climb(values: &[f64], start: f64, bandwidth: f64) -> f64 {
    let mut m = start;
    for _ in 0..MAX_SHIFTS {
        let (sum, count) = values
            .iter()
            .filter(|&&v| (v - m).abs() <= bandwidth)
            .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
        if count == 0 {
            break;
        }
        let next = sum / count as f64;
        let moved = (next - m).abs();
        m = next;
        if moved < TOLERANCE {
            break;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub mode: f64,
    pub members: Vec<usize>,
}

/// Mean-shift clusters of `values`, ordered by ascending mode. Points whose
/// modes lie within `bandwidth / 2` of the previous point's mode share a cluster.
pub fn mean_shift_clusters(values: &[f64], bandwidth: f64) -> Result<Vec<Cluster>> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let mut modes: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (climb(values, v, bandwidth), i))
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut clusters: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    let mut last_mode = f64::NEG_INFINITY;
    for (mode, i) in modes {
        match clusters.last_mut() {
            Some((ms, members)) if mode - last_mode < bandwidth / 2.0 => {
                ms.push(mode);
                members.push(i);
            }
            _ => clusters.push((vec![mode], vec![i])),
        }
        last_mode = mode;
    }
    Ok(clusters
        .into_iter()
        .map(|(ms, mut members)| {
            members.sort_unstable();
            Cluster {
                mode: ms.iter().sum::<f64>() / ms.len() as f64,
                members,
            }
        })
        .collect())
}

/// Indices of the labels in the highest-mode cluster, ascending. Ties on the
/// mode go to the larger cluster, then to the one with the lowest index.
pub fn select_from_values(values: &[f64], bandwidth: f64) -> Result<Vec<usize>> {
    let clusters = mean_shift_clusters(values, bandwidth)?;
    let best = clusters.into_iter().max_by(|a, b| {
        a.mode
            .total_cmp(&b.mode)
            .then(a.members.len().cmp(&b.members.len()))
            .then(b.members[0].cmp(&a.members[0]))
    });
    Ok(best.map(|c| c.members).unwrap_or_default())
}

pub fn select_labels(beliefs: &BeliefVector, bandwidth: f64) -> Result<Vec<usize>> {
    select_from_values(beliefs.values(), bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_separated_modes() {
        assert_eq!(
            select_from_values(&[0.9, 0.9, 0.1, 0.1], 0.2).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn equal_beliefs_form_one_cluster() {
        assert_eq!(
            select_from_values(&[0.4; 5], 0.1).unwrap(),
            vec![0, 1, 2, 3, 4]
        );
    }

    #[test]
    fn top_mode_isolates_first_label() {
        assert_eq!(
            select_from_values(&[0.95, 0.5, 0.49, 0.05], 0.1).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn clusters_cover_every_point_once() {
        let v = [0.1, 0.12, 0.5, 0.52, 0.55, 0.9, 0.3];
        let clusters = mean_shift_clusters(&v, 0.1).unwrap();
        let mut all: Vec<usize> = clusters.iter().flat_map(|c| c.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..v.len()).collect::<Vec<_>>());
        assert!(clusters.windows(2).all(|w| w[0].mode < w[1].mode));
    }

    #[test]
    fn rejects_non_positive_bandwidth() {
        assert!(select_from_values(&[0.5], 0.0).is_err());
        assert!(select_from_values(&[0.5], f64::NAN).is_err());
        assert!(select_from_values(&[], 0.1).unwrap().is_empty());
    }
}
