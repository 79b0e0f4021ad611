//! Accelerated farthest-point-sampling and k-nearest-neighbor kernels over
//! flat interleaved (x, y, z) float32 arrays.
//!
//! Index outputs are bit-identical to the host reference implementation:
//! squared distances are accumulated in f64 as dx*dx + dy*dy + dz*dz and
//! every tie breaks toward the smaller index.
//!
//! Foreign interface: the caller owns all buffers; return code 0 means
//! success, 1 a parameter out of range, 2 a non-finite coordinate.

use std::slice;

pub const OK: i32 = 0;
pub const ERR_PARAM: i32 = 1;
pub const ERR_NONFINITE: i32 = 2;

#[inline]
fn sq_dist(points: &[f32], i: usize, cx: f64, cy: f64, cz: f64) -> f64 {
    let dx = points[3 * i] as f64 - cx;
    let dy = points[3 * i + 1] as f64 - cy;
    let dz = points[3 * i + 2] as f64 - cz;
    dx * dx + dy * dy + dz * dz
}

fn all_finite(points: &[f32]) -> bool {
    points.iter().all(|v| v.is_finite())
}

/// Greedy max-min farthest point sampling; `out` receives `num_samples`
/// indices. Ties keep the smallest index.
pub fn fps(points: &[f32], num_samples: usize, start_index: usize, out: &mut [u32]) -> i32 {
    let n = points.len() / 3;
    if num_samples < 1 || num_samples > n || start_index >= n || out.len() < num_samples {
        return ERR_PARAM;
    }
    if !all_finite(points) {
        return ERR_NONFINITE;
    }
    let (cx, cy, cz) = (
        points[3 * start_index] as f64,
        points[3 * start_index + 1] as f64,
        points[3 * start_index + 2] as f64,
    );
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(points, i, cx, cy, cz)).collect();
    out[0] = start_index as u32;
    for k in 1..num_samples {
        let mut best = 0usize;
        let mut best_d = dist[0];
        for (i, &d) in dist.iter().enumerate().skip(1) {
            if d > best_d {
                best = i;
                best_d = d;
            }
        }
        out[k] = best as u32;
        let (cx, cy, cz) = (
            points[3 * best] as f64,
            points[3 * best + 1] as f64,
            points[3 * best + 2] as f64,
        );
        for i in 0..n {
            let d = sq_dist(points, i, cx, cy, cz);
            if d < dist[i] {
                dist[i] = d;
            }
        }
    }
    OK
}

/// Indices of the k nearest points to the center, ascending by
/// (squared distance, index).
pub fn knn(points: &[f32], center: [f32; 3], k: usize, out: &mut [u32]) -> i32 {
    let n = points.len() / 3;
    if k < 1 || k > n || out.len() < k {
        return ERR_PARAM;
    }
    if !all_finite(points) || !center.iter().all(|v| v.is_finite()) {
        return ERR_NONFINITE;
    }
    let (cx, cy, cz) = (center[0] as f64, center[1] as f64, center[2] as f64);
    let mut keyed: Vec<(f64, u32)> = (0..n)
        .map(|i| (sq_dist(points, i, cx, cy, cz), i as u32))
        .collect();
    keyed.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    for (slot, &(_, idx)) in out.iter_mut().zip(keyed.iter()).take(k) {
        *slot = idx;
    }
    OK
}

// ---------------------------------------------------------------------------
// C ABI

/// # Safety
/// `xyz` must point to `3 * n` readable f32 values and `out` to `l`
/// writable u32 slots for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn fps_kernel(
    xyz: *const f32,
    n: u32,
    l: u32,
    start_index: u32,
    out: *mut u32,
) -> i32 {
    if xyz.is_null() || out.is_null() || n == 0 {
        return ERR_PARAM;
    }
    let points = slice::from_raw_parts(xyz, 3 * n as usize);
    let out = slice::from_raw_parts_mut(out, l as usize);
    fps(points, l as usize, start_index as usize, out)
}

/// # Safety
/// `xyz` must point to `3 * n` readable f32 values and `out` to `m`
/// writable u32 slots for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn knn_kernel(
    xyz: *const f32,
    n: u32,
    cx: f32,
    cy: f32,
    cz: f32,
    m: u32,
    out: *mut u32,
) -> i32 {
    if xyz.is_null() || out.is_null() || n == 0 {
        return ERR_PARAM;
    }
    let points = slice::from_raw_parts(xyz, 3 * n as usize);
    let out = slice::from_raw_parts_mut(out, m as usize);
    knn(points, [cx, cy, cz], m as usize, out)
}

// ---------------------------------------------------------------------------
