/// Volume dominated by `points` and bounded by `reference` (minimization).
/// Points not strictly better than the reference in every objective add
/// nothing. Exact slicing over the last objective; fine for archives of a
/// few hundred points in four dimensions.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> f64 {
    let pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.as_ref().to_vec())
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .collect();
    slice_volume(pts, reference)
}

fn slice_volume(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let d = reference.len();
    if pts.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let best = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return reference[0] - best;
    }
    pts.sort_by(|a, b| a[d - 1].total_cmp(&b[d - 1]));
    let mut volume = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        active.push(pts[i][..d - 1].to_vec());
        let upper = if i + 1 < pts.len() {
            pts[i + 1][d - 1]
        } else {
            reference[d - 1]
        };
        let height = upper - pts[i][d - 1];
        if height > 0.0 {
            prune_dominated(&mut active);
            volume += height * slice_volume(active.clone(), &reference[..d - 1]);
        }
    }
    volume
}

fn prune_dominated(points: &mut Vec<Vec<f64>>) {
    let snapshot = points.clone();
    points.retain(|p| {
        !snapshot
            .iter()
            .any(|q| q != p && q.iter().zip(p.iter()).all(|(a, b)| a <= b))
    });
    points.dedup();
}
