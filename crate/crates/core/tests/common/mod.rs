//! Shared test oracles: dense linear algebra and exhaustive seam
//! enumeration, all independent of the implementation paths they check.

#![allow(dead_code)]

use osmoblend_core::canvas::Canvas;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut ChaCha8Rng, nx: usize, ny: usize, lo: f64, hi: f64) -> Canvas<f64> {
    let values: Vec<f64> = (0..nx * ny).map(|_| rng.random_range(lo..hi)).collect();
    Canvas::from_planes(nx, ny, vec![values], vec![true; nx * ny]).unwrap()
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting; `a` is row-major n x n.
pub fn gauss_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        assert!(a[pivot_row * n + col].abs() > 1e-14, "singular system");
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    x
}

/// Dense assembly of the drift-diffusion operator by looping the face-flux
/// formula naively, independent of the CSR code path. Returns the row-major
/// matrix over valid pixels (row-major unknown order) plus the
/// unknown-to-pixel map.
pub fn dense_flux_assembly(
    field: &osmoblend_core::field::StaggeredField<f64>,
    channel: usize,
    mask: &[bool],
    h: f64,
) -> (Vec<f64>, Vec<(usize, usize)>) {
    let (nx, ny) = (field.nx(), field.ny());
    let mut unknowns = Vec::new();
    let mut index = vec![usize::MAX; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            if mask[y * nx + x] {
                index[y * nx + x] = unknowns.len();
                unknowns.push((x, y));
            }
        }
    }
    let n = unknowns.len();
    let mut a = vec![0.0; n * n];
    let valid = |x: usize, y: usize| mask[y * nx + x];
    for (i, &(x, y)) in unknowns.iter().enumerate() {
        // Same face order as the production assembly (x-, x+, y-, y+) so
        // diagonal accumulation is bit-identical.
        if x > 0 && valid(x - 1, y) {
            let d = field.dx_at(channel, x, y);
            let j = index[y * nx + x - 1];
            a[i * n + j] += 1.0 / (h * h) + 0.5 / h * d;
            a[i * n + i] += -1.0 / (h * h) + 0.5 / h * d;
        }
        if x + 1 < nx && valid(x + 1, y) {
            let d = field.dx_at(channel, x + 1, y);
            let j = index[y * nx + x + 1];
            a[i * n + j] += 1.0 / (h * h) + -0.5 / h * d;
            a[i * n + i] += -1.0 / (h * h) + -0.5 / h * d;
        }
        if y > 0 && valid(x, y - 1) {
            let d = field.dy_at(channel, x, y);
            let j = index[(y - 1) * nx + x];
            a[i * n + j] += 1.0 / (h * h) + 0.5 / h * d;
            a[i * n + i] += -1.0 / (h * h) + 0.5 / h * d;
        }
        if y + 1 < ny && valid(x, y + 1) {
            let d = field.dy_at(channel, x, y + 1);
            let j = index[(y + 1) * nx + x];
            a[i * n + j] += 1.0 / (h * h) + -0.5 / h * d;
            a[i * n + i] += -1.0 / (h * h) + -0.5 / h * d;
        }
    }
    (a, unknowns)
}

/// Solves `A w = 0` subject to `mean(w) = target_mean` by replacing the
/// last row of the dense matrix with the mean constraint (the operator's
/// rows are linearly dependent, so no information is lost).
pub fn dense_null_space_solve(mut a: Vec<f64>, n: usize, target_mean: f64) -> Vec<f64> {
    let mut b = vec![0.0; n];
    for k in 0..n {
        a[(n - 1) * n + k] = 1.0 / n as f64;
    }
    b[n - 1] = target_mean;
    gauss_solve(a, b)
}

/// Solves `A w = rhs` (consistent up to constants) with the mean anchored,
/// projecting the right-hand side onto the operator's range first.
pub fn dense_anchored_solve(mut a: Vec<f64>, mut rhs: Vec<f64>, target_mean: f64) -> Vec<f64> {
    let n = rhs.len();
    let mean = rhs.iter().sum::<f64>() / n as f64;
    for v in rhs.iter_mut() {
        *v -= mean;
    }
    for k in 0..n {
        a[(n - 1) * n + k] = 1.0 / n as f64;
    }
    rhs[n - 1] = target_mean;
    gauss_solve(a, rhs)
}

/// Exhaustively enumerates every monotone face path (|step| <= 1) over a
/// `rows` x `nfaces` mismatch table and returns the minimum-cost path.
/// Ties pick the path that is lexicographically smallest when read from the
/// last row upward, matching the dynamic program's stated tie-break.
pub fn enumerate_min_path(
    rows: usize,
    nfaces: usize,
    e: &dyn Fn(usize, usize) -> f64,
) -> (f64, Vec<usize>) {
    assert!(rows >= 1 && nfaces >= 1);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut path = vec![0usize; rows];

    fn recurse(
        row: usize,
        rows: usize,
        nfaces: usize,
        cost: f64,
        path: &mut Vec<usize>,
        e: &dyn Fn(usize, usize) -> f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if row == rows {
            let replace = match best {
                None => true,
                Some((bc, bp)) => {
                    cost < *bc || (cost == *bc && path.iter().rev().lt(bp.iter().rev()))
                }
            };
            if replace {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        let candidates: Vec<usize> = if row == 0 {
            (0..nfaces).collect()
        } else {
            let prev = path[row - 1];
            let lo = prev.saturating_sub(1);
            let hi = (prev + 1).min(nfaces - 1);
            (lo..=hi).collect()
        };
        for k in candidates {
            path[row] = k;
            recurse(row + 1, rows, nfaces, cost + e(row, k), path, e, best);
        }
    }

    recurse(0, rows, nfaces, 0.0, &mut path, e, &mut best);
    best.unwrap()
}
