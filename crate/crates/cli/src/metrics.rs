//! Scalar summaries of reconstructed fields against the true scene.

use hybrid_lsm::geometry::{Point, Scene};
use hybrid_lsm::regsolve::SamplingGrid;

/// Mean field value inside the scene over the mean outside. `NaN` when
/// either region has no grid points.
pub fn contrast(grid: &SamplingGrid, values: &[f64], scene: &Scene) -> f64 {
    let (mut inside, mut ni, mut outside, mut no) = (0.0, 0usize, 0.0, 0usize);
    for (z, v) in grid.points().iter().zip(values) {
        if scene.contains(*z) {
            inside += v;
            ni += 1;
        } else {
            outside += v;
            no += 1;
        }
    }
    if ni == 0 || no == 0 {
        return f64::NAN;
    }
    (inside / ni as f64) / (outside / no as f64)
}

pub fn threshold_mask(values: &[f64], threshold: f64) -> Vec<bool> {
    values.iter().map(|&v| v >= threshold).collect()
}

/// Intersection over union of the mask with the scene; 0 if both are empty.
pub fn iou(grid: &SamplingGrid, mask: &[bool], scene: &Scene) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (z, &m) in grid.points().iter().zip(mask) {
        let truth = scene.contains(*z);
        inter += (m && truth) as usize;
        union += (m || truth) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Centroid of the selected grid points.
pub fn center_of_mass(grid: &SamplingGrid, mask: &[bool]) -> Option<Point> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (z, _) in grid.points().iter().zip(mask).filter(|(_, &m)| m) {
        sx += z[0];
        sy += z[1];
        n += 1;
    }
    (n > 0).then(|| [sx / n as f64, sy / n as f64])
}

/// 4-connected components of the mask on the `resolution x resolution` grid.
pub fn connected_components(mask: &[bool], resolution: usize) -> usize {
    let n = resolution;
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(q) = stack.pop() {
            let (x, y) = (q % n, q / n);
            let mut visit = |nx: usize, ny: usize| {
                let t = ny * n + nx;
                if mask[t] && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < n {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < n {
                visit(x, y + 1);
            }
        }
    }
    count
}
