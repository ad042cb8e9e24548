//! The discretized drift-diffusion spatial operator in compressed sparse
//! row form.
//!
//! For an interior pixel p with neighbor q across a face carrying drift
//! sample d, the face flux is `(u_q - u_p)/h - d (u_q + u_p)/2` and the
//! operator value at p is the net flux divided by h. Faces on the outer or
//! mask boundary contribute nothing, which realizes the homogeneous no-flux
//! condition. Column sums vanish by construction, so the implicit scheme
//! preserves the channel mean.

use crate::canvas::Axis;
use crate::error::{BlendError, Result};
use crate::field::StaggeredField;
use crate::scalar::{fl, Scalar};

/// CSR operator over the valid pixels, at most five nonzeros per row,
/// unknowns ordered row-major over the mask.
#[derive(Debug, Clone)]
pub struct SparseOperator<T> {
    nx: usize,
    ny: usize,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    pixel_to_unknown: Vec<usize>, // usize::MAX marks invalid pixels
    unknown_to_pixel: Vec<usize>,
}

const INVALID: usize = usize::MAX;

impl<T: Scalar> SparseOperator<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// y = A x
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.apply(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for (row, slot) in d.iter_mut().enumerate() {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.col_idx[k] == row {
                    *slot = self.values[k];
                }
            }
        }
        d
    }

    pub fn entry(&self, row: usize, col: usize) -> T {
        for k in self.row_ptr[row]..self.row_ptr[row + 1] {
            if self.col_idx[k] == col {
                return self.values[k];
            }
        }
        T::zero()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        let mut norm = T::zero();
        for row in 0..self.n {
            let mut sum = T::zero();
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                sum += self.values[k].abs();
            }
            norm = norm.max(sum);
        }
        norm
    }

    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.n];
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                sums[self.col_idx[k]] += self.values[k];
            }
        }
        sums
    }

    /// True when entry (a, b) exists iff (b, a) exists.
    pub fn pattern_is_symmetric(&self) -> bool {
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[k];
                let back =
                    (self.row_ptr[col]..self.row_ptr[col + 1]).any(|m| self.col_idx[m] == row);
                if !back {
                    return false;
                }
            }
        }
        true
    }

    pub fn unknown_of_pixel(&self, x: usize, y: usize) -> Option<usize> {
        let u = self.pixel_to_unknown[y * self.nx + x];
        (u != INVALID).then_some(u)
    }

    pub fn pixel_of_unknown(&self, u: usize) -> (usize, usize) {
        let p = self.unknown_to_pixel[u];
        (p % self.nx, p / self.nx)
    }

    /// Gathers valid pixels from a full plane into unknown order.
    pub fn pack(&self, plane: &[T]) -> Vec<T> {
        self.unknown_to_pixel.iter().map(|&p| plane[p]).collect()
    }

    /// Scatters unknowns back into a full plane; invalid pixels get `fill`.
    pub fn unpack(&self, x: &[T], fill: T) -> Vec<T> {
        let mut plane = vec![fill; self.nx * self.ny];
        for (u, &p) in self.unknown_to_pixel.iter().enumerate() {
            plane[p] = x[u];
        }
        plane
    }
}

/// Assembles the operator for one channel of a drift field over the mask.
///
/// Requires every face adjacent to the outer boundary or an invalid pixel to
/// carry a drift sample of exactly zero.
pub fn assemble_operator<T: Scalar>(
    drift: &StaggeredField<T>,
    channel: usize,
    mask: &[bool],
    h: T,
) -> Result<SparseOperator<T>> {
    let (nx, ny) = (drift.nx(), drift.ny());
    assert_eq!(mask.len(), nx * ny, "mask size mismatch");

    let valid = |x: usize, y: usize| mask[y * nx + x];
    // Boundary-face precondition.
    for y in 0..ny {
        for x in 0..=nx {
            let interior = x > 0 && x < nx && valid(x - 1, y) && valid(x, y);
            if !interior && drift.dx_at(channel, x, y) != T::zero() {
                return Err(BlendError::DriftOnBoundary(format!("x-face ({x}, {y})")));
            }
        }
    }
    for y in 0..=ny {
        for x in 0..nx {
            let interior = y > 0 && y < ny && valid(x, y - 1) && valid(x, y);
            if !interior && drift.dy_at(channel, x, y) != T::zero() {
                return Err(BlendError::DriftOnBoundary(format!("y-face ({x}, {y})")));
            }
        }
    }

    let mut pixel_to_unknown = vec![INVALID; nx * ny];
    let mut unknown_to_pixel = Vec::new();
    for p in 0..nx * ny {
        if mask[p] {
            pixel_to_unknown[p] = unknown_to_pixel.len();
            unknown_to_pixel.push(p);
        }
    }
    let n = unknown_to_pixel.len();

    let inv_h2 = T::one() / (h * h);
    let half_inv_h = fl::<T>(0.5) / h;

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);

    for &p in &unknown_to_pixel {
        let (x, y) = (p % nx, p / nx);
        let mut diag = T::zero();
        // (column, value) pairs for the up-to-four neighbors.
        let mut entries: Vec<(usize, T)> = Vec::with_capacity(5);

        // Each face contributes flux/h: the +axis neighbor face gives
        //   q: 1/h^2 - d/(2h),  p: -1/h^2 - d/(2h)
        // and the -axis neighbor face gives
        //   r: 1/h^2 + d/(2h),  p: -1/h^2 + d/(2h).
        let couple = |nb: usize,
                      d: T,
                      toward_positive: bool,
                      entries: &mut Vec<(usize, T)>,
                      diag: &mut T| {
            let s = if toward_positive {
                -half_inv_h
            } else {
                half_inv_h
            };
            entries.push((pixel_to_unknown[nb], inv_h2 + s * d));
            *diag += -inv_h2 + s * d;
        };

        if x > 0 && valid(x - 1, y) {
            let d = drift.sample(
                channel,
                crate::canvas::Face {
                    axis: Axis::X,
                    x,
                    y,
                },
            );
            couple(p - 1, d, false, &mut entries, &mut diag);
        }
        if x + 1 < nx && valid(x + 1, y) {
            let d = drift.sample(
                channel,
                crate::canvas::Face {
                    axis: Axis::X,
                    x: x + 1,
                    y,
                },
            );
            couple(p + 1, d, true, &mut entries, &mut diag);
        }
        if y > 0 && valid(x, y - 1) {
            let d = drift.sample(
                channel,
                crate::canvas::Face {
                    axis: Axis::Y,
                    x,
                    y,
                },
            );
            couple(p - nx, d, false, &mut entries, &mut diag);
        }
        if y + 1 < ny && valid(x, y + 1) {
            let d = drift.sample(
                channel,
                crate::canvas::Face {
                    axis: Axis::Y,
                    x,
                    y: y + 1,
                },
            );
            couple(p + nx, d, true, &mut entries, &mut diag);
        }

        entries.push((pixel_to_unknown[p], diag));
        entries.sort_by_key(|&(c, _)| c);
        for (c, v) in entries {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }

    Ok(SparseOperator {
        nx,
        ny,
        n,
        row_ptr,
        col_idx,
        values,
        pixel_to_unknown,
        unknown_to_pixel,
    })
}
