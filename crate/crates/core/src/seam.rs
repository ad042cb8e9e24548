//! Seam selection between overlapping inputs: either a straight cut through
//! the middle of the overlap or the minimum error boundary cut computed by
//! dynamic programming over monotone face paths.

use std::io::Write;
use std::path::Path;

use crate::canvas::{AlignedInput, Canvas, Face, Partition, Rect};
use crate::error::{BlendError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamOrientation {
    Vertical,
    Horizontal,
}

/// A monotone chain of pixel faces separating two partition regions.
///
/// For vertical seams, `faces[j]` is the horizontal face index at overlap
/// row `y0 + j`: the seam passes between pixel columns `faces[j] - 1` and
/// `faces[j]`, and consecutive entries differ by at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct Seam<T> {
    pub orientation: SeamOrientation,
    pub y0: usize,
    pub faces: Vec<usize>,
    pub total_cost: T,
}

impl<T: Scalar> Seam<T> {
    pub fn rows(&self) -> usize {
        self.faces.len()
    }

    /// Face position at a canvas row, clamped to the seam's vertical span.
    pub fn face_at_row(&self, y: usize) -> usize {
        let j = y.saturating_sub(self.y0).min(self.faces.len() - 1);
        self.faces[j]
    }

    pub fn is_monotone(&self) -> bool {
        self.faces.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1)
    }

    /// Every face the seam polyline crosses: one vertical face per row plus
    /// the horizontal connector face wherever the path steps sideways.
    pub fn face_set(&self) -> Vec<Face> {
        let mut out = Vec::with_capacity(2 * self.faces.len());
        for (j, &s) in self.faces.iter().enumerate() {
            out.push(Face::x_between(s, self.y0 + j));
        }
        for j in 1..self.faces.len() {
            let (a, b) = (self.faces[j - 1], self.faces[j]);
            if a != b {
                out.push(Face::y_between(a.min(b), self.y0 + j));
            }
        }
        out
    }
}

/// The rectangle where two inputs overlap, with both inputs' intensities
/// restricted to it. Both patches are fully valid.
#[derive(Debug, Clone)]
pub struct OverlapRegion<T> {
    pub rect: Rect,
    pub left_patch: Canvas<T>,
    pub right_patch: Canvas<T>,
}

impl<T: Scalar> OverlapRegion<T> {
    pub fn between(left: &AlignedInput<T>, right: &AlignedInput<T>) -> Result<Self> {
        let rect = left
            .rect()
            .intersect(&right.rect())
            .ok_or(BlendError::NoOverlap)?;
        let crop = |input: &AlignedInput<T>| {
            input.image.crop(Rect::new(
                rect.x - input.offset.0,
                rect.y - input.offset.1,
                rect.w,
                rect.h,
            ))
        };
        Ok(OverlapRegion {
            rect,
            left_patch: crop(left),
            right_patch: crop(right),
        })
    }

    /// Squared per-channel mismatch between the two sources at the column a
    /// seam at face `s` switches over, i.e. the pixel just right of the face.
    fn face_mismatch(&self, row: usize, face: usize) -> T {
        let col = face - self.rect.x;
        let mut e = T::zero();
        for c in 0..self.left_patch.nc() {
            let d = self.left_patch.get(c, col, row) - self.right_patch.get(c, col, row);
            e += d * d;
        }
        e
    }

    fn cost_of_path(&self, faces: &[usize]) -> T {
        faces
            .iter()
            .enumerate()
            .map(|(j, &s)| self.face_mismatch(j, s))
            .sum()
    }
}

/// Straight vertical seam at the face nearest the overlap's horizontal
/// center; ties break toward the smaller face index.
pub fn middle_seam<T: Scalar>(overlap: &OverlapRegion<T>) -> Result<Seam<T>> {
    let rect = overlap.rect;
    if rect.w == 0 {
        return Err(BlendError::NoOverlap);
    }
    let x0 = rect.x;
    let x1 = rect.x1() - 1;
    let s = (x0 + x1).div_ceil(2);
    let faces = vec![s; rect.h];
    let total_cost = overlap.cost_of_path(&faces);
    Ok(Seam {
        orientation: SeamOrientation::Vertical,
        y0: rect.y,
        faces,
        total_cost,
    })
}

/// Minimum error boundary cut: dynamic program over the interior faces of
/// the overlap with the monotone step constraint |s_{j+1} - s_j| <= 1.
///
/// Ties prefer the smaller face index at every minimum and at the final
/// selection, so among all minimum-cost monotone paths the result is the
/// lexicographically smallest one read from the bottom row upward.
/// Overlaps narrower than two columns have no interior face and fall back
/// to the middle seam.
pub fn optimal_seam<T: Scalar>(overlap: &OverlapRegion<T>) -> Result<Seam<T>> {
    let rect = overlap.rect;
    if rect.w < 2 {
        return middle_seam(overlap);
    }
    let rows = rect.h;
    let nfaces = rect.w - 1; // interior faces rect.x+1 ..= rect.x+w-1
    let face0 = rect.x + 1;

    let mut energy = vec![T::zero(); rows * nfaces];
    let mut pred = vec![0usize; rows * nfaces];
    for (k, slot) in energy.iter_mut().take(nfaces).enumerate() {
        *slot = overlap.face_mismatch(0, face0 + k);
    }
    for j in 1..rows {
        for k in 0..nfaces {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(nfaces - 1);
            let mut best = lo;
            for cand in lo + 1..=hi {
                if energy[(j - 1) * nfaces + cand] < energy[(j - 1) * nfaces + best] {
                    best = cand;
                }
            }
            pred[j * nfaces + k] = best;
            energy[j * nfaces + k] =
                overlap.face_mismatch(j, face0 + k) + energy[(j - 1) * nfaces + best];
        }
    }

    let mut end = 0usize;
    for k in 1..nfaces {
        if energy[(rows - 1) * nfaces + k] < energy[(rows - 1) * nfaces + end] {
            end = k;
        }
    }
    let total_cost = energy[(rows - 1) * nfaces + end];

    let mut path = vec![0usize; rows];
    path[rows - 1] = end;
    for j in (1..rows).rev() {
        path[j - 1] = pred[j * nfaces + path[j]];
    }
    let faces = path.into_iter().map(|k| face0 + k).collect();
    Ok(Seam {
        orientation: SeamOrientation::Vertical,
        y0: rect.y,
        faces,
        total_cost,
    })
}

/// Builds the pixel partition for a left-to-right chain of inputs and the
/// seams between consecutive pairs (`seams[k]` separates input `k` from
/// `k+1`).
///
/// A pixel covered by several inputs belongs to the leftmost one whose seam
/// still lies to the pixel's right; a pixel covered by a single input
/// belongs to it; uncovered pixels get no owner.
pub fn build_partition<T: Scalar>(
    inputs: &[AlignedInput<T>],
    seams: &[Seam<T>],
    nx: usize,
    ny: usize,
) -> Result<Partition> {
    if inputs.len() != seams.len() + 1 {
        return Err(BlendError::Pipeline(format!(
            "{} inputs need {} seams, got {}",
            inputs.len(),
            inputs.len() - 1,
            seams.len()
        )));
    }
    for (k, seam) in seams.iter().enumerate() {
        let overlap = inputs[k]
            .rect()
            .intersect(&inputs[k + 1].rect())
            .ok_or(BlendError::NoOverlap)?;
        if seam.y0 != overlap.y || seam.rows() != overlap.h {
            return Err(BlendError::SeamOutsideOverlap(format!(
                "seam {k} spans rows {}..{} but the overlap spans {}..{}",
                seam.y0,
                seam.y0 + seam.rows(),
                overlap.y,
                overlap.y1()
            )));
        }
        for (j, &s) in seam.faces.iter().enumerate() {
            if s < overlap.x || s > overlap.x1() {
                return Err(BlendError::SeamOutsideOverlap(format!(
                    "seam {k} row {} at face {s}, overlap faces are {}..={}",
                    seam.y0 + j,
                    overlap.x,
                    overlap.x1()
                )));
            }
        }
    }

    let mut owner = vec![None; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let mut current: Option<u32> = None;
            for (k, input) in inputs.iter().enumerate() {
                if !input.rect().contains(x, y) {
                    continue;
                }
                match current {
                    None => current = Some(k as u32),
                    Some(_) => {
                        // Covered by the previous owner and by input k; the
                        // seam between k-1 and k decides.
                        if x >= seams[k - 1].face_at_row(y) {
                            current = Some(k as u32);
                        }
                    }
                }
            }
            owner[y * nx + x] = current;
        }
    }
    Ok(Partition::from_owner_map(nx, ny, owner))
}

/// Writes seams as text: per seam a header `vertical <rows> <cost>` followed
/// by one face index per row.
pub fn write_seam_dump<T: Scalar>(path: &Path, seams: &[Seam<T>]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    for seam in seams {
        let kind = match seam.orientation {
            SeamOrientation::Vertical => "vertical",
            SeamOrientation::Horizontal => "horizontal",
        };
        writeln!(out, "{kind} {} {}", seam.rows(), seam.total_cost)?;
        for &s in &seam.faces {
            writeln!(out, "{s}")?;
        }
    }
    Ok(())
}
