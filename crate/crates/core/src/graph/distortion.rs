use super::DistanceMatrix;
use crate::error::{Error, Result};
use crate::manifold::{distance, HyperPoint};

/// Mean of `((ê/ĝ)² − 1)²` over `(embedding, graph)` distance pairs, where
/// each side is first divided by its own average over the pairs.
pub fn distortion_from_pairs(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("no pairs to compare".into()));
    }
    let p = pairs.len() as f64;
    let e_avg = pairs.iter().map(|&(e, _)| e).sum::<f64>() / p;
    let g_avg = pairs.iter().map(|&(_, g)| g).sum::<f64>() / p;
    if e_avg <= 0.0 || g_avg <= 0.0 {
        return Err(Error::UndefinedMetric(
            "distances average to zero; ratios are undefined".into(),
        ));
    }
    let total: f64 = pairs
        .iter()
        .map(|&(e, g)| {
            let ratio = (e / e_avg) / (g / g_avg);
            (ratio * ratio - 1.0).powi(2)
        })
        .sum();
    Ok(total / p)
}

/// Distortion of an arbitrary embedding distance against hop counts, over
/// unordered pairs `i < j` that are connected in the graph.
pub fn average_distortion(
    embedding_distance: impl Fn(usize, usize) -> f64,
    d_graph: &DistanceMatrix,
) -> Result<f64> {
    let n = d_graph.num_nodes();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            if let Some(g) = d_graph.get(i, j) {
                pairs.push((embedding_distance(i, j), f64::from(g)));
            }
        }
    }
    distortion_from_pairs(&pairs)
}

/// [`average_distortion`] with the intrinsic hyperbolic distance.
pub fn hyperbolic_distortion(points: &[HyperPoint], d_graph: &DistanceMatrix) -> Result<f64> {
    if points.len() != d_graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: d_graph.num_nodes(),
            got: points.len(),
        });
    }
    average_distortion(|i, j| distance(&points[i], &points[j]), d_graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_distances, Graph};
    use crate::manifold::{exp_origin, Curvature, TangentVector};

    #[test]
    fn ratio_two_and_half() {
        // averages: e = 1.5, g = 1.5, so normalized ratios are 2 and 1/2
        let d = distortion_from_pairs(&[(2.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!((d - (9.0 + 0.5625) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn proportional_distances_have_zero_distortion() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5)]);
        let d = all_pairs_distances(&g);
        for c in [0.01, 1.0, 37.5] {
            let v = average_distortion(|i, j| c * f64::from(d.get(i, j).unwrap()), &d).unwrap();
            assert!(v.abs() < 1e-24, "{v}");
        }
    }

    #[test]
    fn scale_invariant_and_non_negative() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let d = all_pairs_distances(&g);
        let emb = |i: usize, j: usize| ((i * 7 + j * 3) % 5) as f64 + 0.3;
        let a = average_distortion(emb, &d).unwrap();
        let b = average_distortion(|i, j| 4.2 * emb(i, j), &d).unwrap();
        assert!(a >= 0.0);
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn disconnected_pairs_excluded() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]);
        let d = all_pairs_distances(&g);
        // only (0,1) and (2,3) count; equal embedding distances give zero
        let v = average_distortion(|i, j| if i / 2 == j / 2 { 5.0 } else { f64::NAN }, &d).unwrap();
        assert_eq!(v, 0.0);
        let empty = all_pairs_distances(&Graph::from_edges(3, []));
        assert!(matches!(
            average_distortion(|_, _| 1.0, &empty),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn hyperbolic_points_on_a_geodesic() {
        // points spaced evenly along one geodesic reproduce path distances
        let b = Curvature::new(1.3).unwrap();
        let pts: Vec<_> = (0..5)
            .map(|k| exp_origin(&TangentVector::from_spatial(&[0.4 * k as f64, 0.0]), b))
            .collect();
        let d = all_pairs_distances(&Graph::from_edges(5, (1..5).map(|v| (v - 1, v))));
        assert!(hyperbolic_distortion(&pts, &d).unwrap() < 1e-16);
    }
}
