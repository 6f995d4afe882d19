//! Counting solitary peaks in a layer.

use kdv_core::MeshLayer;

/// Strict local maxima with `u ≥ threshold` on an open profile. A run of equal
/// values counts once when both of its neighbours are lower; end nodes count when
/// they exceed their single neighbour.
pub fn soliton_count(layer: &MeshLayer, threshold: f64) -> usize {
    count_peaks(&layer.values, threshold, false)
}

/// As [`soliton_count`] but with the profile wrapping around.
pub fn soliton_count_periodic(layer: &MeshLayer, threshold: f64) -> usize {
    count_peaks(&layer.values, threshold, true)
}

fn count_peaks(u: &[f64], threshold: f64, periodic: bool) -> usize {
    let n = u.len();
    if n == 0 {
        return 0;
    }
    if u.iter().all(|&v| v == u[0]) {
        return 0;
    }
    if periodic {
        // Start the scan just after a strict descent so no plateau straddles the seam.
        let start = (0..n).find(|&i| u[i] < u[(i + n - 1) % n]).unwrap_or(0);
        let rotated: Vec<f64> = (0..n).map(|k| u[(start + k) % n]).collect();
        let mut padded = rotated.clone();
        padded.push(rotated[0]);
        return scan(&padded, threshold, Some(rotated[n - 1]), true);
    }
    scan(u, threshold, None, false)
}

/// Walks plateaus left to right. `before` is the value preceding `u[0]` (if any);
/// with `closed` the last entry is only a right neighbour.
fn scan(u: &[f64], threshold: f64, before: Option<f64>, closed: bool) -> usize {
    let len = if closed { u.len() - 1 } else { u.len() };
    let mut count = 0;
    let mut i = 0;
    while i < len {
        let mut j = i;
        while j + 1 < len && u[j + 1] == u[i] {
            j += 1;
        }
        let left = if i == 0 { before } else { Some(u[i - 1]) };
        let right = if j + 1 < u.len() && (closed || j + 1 < len) { Some(u[j + 1]) } else { None };
        let rises = left.is_none_or(|l| l < u[i]);
        let falls = right.is_none_or(|r| r < u[i]);
        if rises && falls && u[i] >= threshold && (left.is_some() || right.is_some()) {
            count += 1;
        }
        i = j + 1;
    }
    count
}
