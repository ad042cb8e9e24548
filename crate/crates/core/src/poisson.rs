//! Gradient-domain blending baseline: stitch per-input gradient fields with
//! the same seams as the osmosis path, then solve the Neumann Poisson
//! equation with the same solver machinery and stopping rules, anchoring
//! the mean afterwards.

pub use crate::field::gradient_field;

use crate::canvas::{Partition, Rect};
use crate::error::Result;
use crate::field::{stitch_fields, StaggeredField};
use crate::operator::{assemble_operator, SparseOperator};
use crate::scalar::Scalar;
use crate::solver::{steady_state_with_source, SolverConfig, SteadyStateReport};

/// Same composition rule as drift stitching: ownership inside regions, the
/// mean of both owners at boundary faces, fallback to whichever side has
/// data.
pub fn stitch_gradients<T: Scalar>(
    fields: &[StaggeredField<T>],
    supports: &[Rect],
    partition: &Partition,
    mask: &[bool],
) -> (StaggeredField<T>, usize) {
    stitch_fields(fields, supports, partition, mask)
}

/// Discrete divergence of a face field: per-pixel difference of adjacent
/// face samples, divided by h. Invalid pixels map to zero.
pub fn divergence_plane<T: Scalar>(
    field: &StaggeredField<T>,
    channel: usize,
    mask: &[bool],
    h: T,
) -> Vec<T> {
    let (nx, ny) = (field.nx(), field.ny());
    let mut out = vec![T::zero(); nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            if !mask[y * nx + x] {
                continue;
            }
            let div_x = field.dx_at(channel, x + 1, y) - field.dx_at(channel, x, y);
            let div_y = field.dy_at(channel, x, y + 1) - field.dy_at(channel, x, y);
            out[y * nx + x] = (div_x + div_y) / h;
        }
    }
    out
}

/// The zero-drift operator, i.e. the five-point Neumann Laplacian on the
/// mask.
pub fn laplacian<T: Scalar>(nx: usize, ny: usize, mask: &[bool], h: T) -> SparseOperator<T> {
    let zero = StaggeredField::zeros(nx, ny, 1);
    assemble_operator(&zero, 0, mask, h).expect("zero field satisfies the boundary precondition")
}

/// Solves `Laplace(w) = div g` on the mask with no-flux boundaries for the
/// solution whose mean is `mean_target`.
///
/// The Neumann Laplacian annihilates constants, so the right-hand side is
/// first projected onto the operator's range (its mean subtracted) and the
/// solution mean anchored afterwards. Returns the solution as a full plane
/// (invalid pixels zero) plus the convergence report.
pub fn poisson_solve<T: Scalar>(
    g: &StaggeredField<T>,
    channel: usize,
    mask: &[bool],
    mean_target: T,
    init: Option<&[T]>,
    h: T,
    cfg: &SolverConfig<T>,
) -> Result<(Vec<T>, SteadyStateReport<T>)> {
    let (nx, ny) = (g.nx(), g.ny());
    let lap = laplacian(nx, ny, mask, h);
    let div = divergence_plane(g, channel, mask, h);
    let mut b = lap.pack(&div);
    let n = b.len();
    let b_mean = b.iter().copied().sum::<T>() / T::from_usize(n.max(1)).unwrap();
    for v in b.iter_mut() {
        *v -= b_mean;
    }

    let start: Vec<T> = match init {
        Some(plane) => lap.pack(plane),
        None => vec![mean_target; n],
    };
    let (mut w, report) = steady_state_with_source(&lap, &start, Some(&b), cfg)?;
    let w_mean = w.iter().copied().sum::<T>() / T::from_usize(n.max(1)).unwrap();
    let shift = mean_target - w_mean;
    for v in w.iter_mut() {
        *v += shift;
    }
    Ok((lap.unpack(&w, T::zero()), report))
}
