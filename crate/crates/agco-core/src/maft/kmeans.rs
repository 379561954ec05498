//! Seeded Lloyd clustering and plain nearest-seed grouping over positions.

use crate::model::{euclidean_distance, Position};

use super::MaftError;

const MAX_ITERATIONS: usize = 100;

/// Label every point with the index of its nearest seed. Ties go to the
/// lowest seed index.
pub fn nearest_seed_labels(points: &[Position], seeds: &[Position]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (i, seed) in seeds.iter().enumerate() {
                let d = euclidean_distance(p, seed);
                if d < best_dist {
                    best_dist = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Lloyd iterations from the given seed centroids, to a fixed point or 100
/// rounds. Clusters that empty out keep their previous centroid.
pub fn group_tasks_kmeans(
    points: &[Position],
    k: usize,
    seeds: &[Position],
) -> Result<Vec<usize>, MaftError> {
    if k == 0 {
        return Err(MaftError::BadArgument("k must be >= 1".into()));
    }
    if seeds.len() != k {
        return Err(MaftError::BadArgument(format!(
            "expected {k} seeds, got {}",
            seeds.len()
        )));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }

    let mut centroids: Vec<Position> = seeds.to_vec();
    let mut labels = nearest_seed_labels(points, &centroids);
    for _ in 0..MAX_ITERATIONS {
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Position> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len() as f64;
            *centroid = Position {
                x: members.iter().map(|p| p.x).sum::<f64>() / n,
                y: members.iter().map(|p| p.y).sum::<f64>() / n,
                h: members.iter().map(|p| p.h).sum::<f64>() / n,
            };
        }
        let next = nearest_seed_labels(points, &centroids);
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(labels)
}

/// Within-cluster sum of squared distances to cluster means.
pub fn within_cluster_ss(points: &[Position], labels: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Position> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            continue;
        }
        let n = members.len() as f64;
        let mean = Position {
            x: members.iter().map(|p| p.x).sum::<f64>() / n,
            y: members.iter().map(|p| p.y).sum::<f64>() / n,
            h: members.iter().map(|p| p.h).sum::<f64>() / n,
        };
        total += members
            .iter()
            .map(|p| euclidean_distance(p, &mean).powi(2))
            .sum::<f64>();
    }
    total
}
