//! Multi-channel raster containers, pixel ownership partitions and the
//! image-domain operations: naive stitching, channel statistics and range
//! clipping.
//!
//! Intensities are kept in floating point internally; 8-bit values appear
//! only at the file-format boundary. Every canvas carries a per-pixel
//! validity mask so that mosaics with uncovered corners stay well-defined.

use std::collections::BTreeSet;

use crate::error::{BlendError, Result};
use crate::scalar::Scalar;

/// Axis a pixel face is orthogonal to. `X` faces separate horizontally
/// adjacent pixels (drift component along x), `Y` faces vertically adjacent
/// ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

/// A pixel face. An `X` face at `(x, y)` separates pixels `(x-1, y)` and
/// `(x, y)` with `x` in `0..=nx`; a `Y` face at `(x, y)` separates
/// `(x, y-1)` and `(x, y)` with `y` in `0..=ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face {
    pub axis: Axis,
    pub x: usize,
    pub y: usize,
}

impl Face {
    pub fn x_between(x: usize, y: usize) -> Self {
        Face {
            axis: Axis::X,
            x,
            y,
        }
    }

    pub fn y_between(x: usize, y: usize) -> Self {
        Face {
            axis: Axis::Y,
            x,
            y,
        }
    }
}

/// Integer rectangle in canvas coordinates, `w`/`h` may be zero only through
/// `intersect` returning `None` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    /// Exclusive right edge.
    pub fn x1(&self) -> usize {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn y1(&self) -> usize {
        self.y + self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x1() && y >= self.y && y < self.y1()
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.x1().min(other.x1());
        let y1 = self.y1().min(other.y1());
        if x0 < x1 && y0 < y1 {
            Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }
}

/// Multi-channel raster with a per-pixel validity mask.
///
/// Invariants: all intensities are finite and nonnegative, the channel count
/// is 1 (grey) or 3 (RGB).
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas<T> {
    nx: usize,
    ny: usize,
    planes: Vec<Vec<T>>,
    mask: Vec<bool>,
}

impl<T: Scalar> Canvas<T> {
    /// Fully valid canvas filled with a constant.
    pub fn filled(nx: usize, ny: usize, nc: usize, value: T) -> Self {
        assert!(nc == 1 || nc == 3, "channel count must be 1 or 3");
        Canvas {
            nx,
            ny,
            planes: vec![vec![value; nx * ny]; nc],
            mask: vec![true; nx * ny],
        }
    }

    /// All-invalid canvas of zeros; pixels become valid as they are written.
    pub fn empty(nx: usize, ny: usize, nc: usize) -> Self {
        assert!(nc == 1 || nc == 3, "channel count must be 1 or 3");
        Canvas {
            nx,
            ny,
            planes: vec![vec![T::zero(); nx * ny]; nc],
            mask: vec![false; nx * ny],
        }
    }

    /// Builds a canvas from channel planes, validating the type invariants.
    pub fn from_planes(nx: usize, ny: usize, planes: Vec<Vec<T>>, mask: Vec<bool>) -> Result<Self> {
        let nc = planes.len();
        if nc != 1 && nc != 3 {
            return Err(BlendError::InvalidCanvas(format!(
                "channel count must be 1 or 3, got {nc}"
            )));
        }
        if mask.len() != nx * ny {
            return Err(BlendError::InvalidCanvas("mask length mismatch".into()));
        }
        for plane in &planes {
            if plane.len() != nx * ny {
                return Err(BlendError::InvalidCanvas("plane length mismatch".into()));
            }
            for (i, &v) in plane.iter().enumerate() {
                if mask[i] && (!v.is_finite() || v < T::zero()) {
                    return Err(BlendError::InvalidCanvas(format!(
                        "intensity at pixel {i} is {v:?}; must be finite and >= 0"
                    )));
                }
            }
        }
        Ok(Canvas {
            nx,
            ny,
            planes,
            mask,
        })
    }

    /// Construction without the invariant checks, for intermediate pipeline
    /// values that are clipped into range immediately afterwards.
    pub(crate) fn from_planes_unchecked(
        nx: usize,
        ny: usize,
        planes: Vec<Vec<T>>,
        mask: Vec<bool>,
    ) -> Self {
        Canvas {
            nx,
            ny,
            planes,
            mask,
        }
    }

    /// Fully valid canvas from interleaved 8-bit samples (PNM order).
    pub fn from_u8(nx: usize, ny: usize, nc: usize, data: &[u8]) -> Result<Self> {
        if nc != 1 && nc != 3 {
            return Err(BlendError::InvalidCanvas(format!(
                "channel count must be 1 or 3, got {nc}"
            )));
        }
        if data.len() != nx * ny * nc {
            return Err(BlendError::InvalidCanvas("sample count mismatch".into()));
        }
        let mut planes = vec![vec![T::zero(); nx * ny]; nc];
        for i in 0..nx * ny {
            for c in 0..nc {
                planes[c][i] = T::from_u8(data[i * nc + c]).unwrap();
            }
        }
        Ok(Canvas {
            nx,
            ny,
            planes,
            mask: vec![true; nx * ny],
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nc(&self) -> usize {
        self.planes.len()
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny);
        y * self.nx + x
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> T {
        self.planes[c][self.idx(x, y)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: usize, y: usize, v: T) {
        let i = self.idx(x, y);
        self.planes[c][i] = v;
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.mask[self.idx(x, y)]
    }

    pub fn set_valid(&mut self, x: usize, y: usize, valid: bool) {
        let i = self.idx(x, y);
        self.mask[i] = valid;
    }

    pub fn plane(&self, c: usize) -> &[T] {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.planes[c]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn fully_valid(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Adds `delta` to every valid pixel; invalid pixels stay zero.
    pub fn shifted(&self, delta: T) -> Canvas<T> {
        let mut out = self.clone();
        for plane in &mut out.planes {
            for (i, v) in plane.iter_mut().enumerate() {
                if out.mask[i] {
                    *v += delta;
                }
            }
        }
        out
    }

    /// Copies the sub-rectangle; caller coordinates are canvas coordinates.
    pub fn crop(&self, rect: Rect) -> Canvas<T> {
        assert!(
            rect.x1() <= self.nx && rect.y1() <= self.ny,
            "crop out of bounds"
        );
        let mut out = Canvas::empty(rect.w, rect.h, self.nc());
        for y in 0..rect.h {
            for x in 0..rect.w {
                let src = self.idx(rect.x + x, rect.y + y);
                let dst = y * rect.w + x;
                out.mask[dst] = self.mask[src];
                for c in 0..self.nc() {
                    out.planes[c][dst] = self.planes[c][src];
                }
            }
        }
        out
    }

    /// Transposes the raster; vertical-seam machinery then applies to
    /// horizontal layouts.
    pub fn transposed(&self) -> Canvas<T> {
        let mut out = Canvas::empty(self.ny, self.nx, self.nc());
        for y in 0..self.ny {
            for x in 0..self.nx {
                let src = self.idx(x, y);
                let dst = x * self.ny + y;
                out.mask[dst] = self.mask[src];
                for c in 0..self.nc() {
                    out.planes[c][dst] = self.planes[c][src];
                }
            }
        }
        out
    }

    /// Interleaved 8-bit samples: clamp to `[0, 255]`, then round half away
    /// from zero. Invalid pixels emit 0.
    pub fn to_u8_interleaved(&self) -> Vec<u8> {
        let nc = self.nc();
        let mut out = vec![0u8; self.nx * self.ny * nc];
        for i in 0..self.nx * self.ny {
            if !self.mask[i] {
                continue;
            }
            for c in 0..nc {
                let v = self.planes[c][i]
                    .max(T::zero())
                    .min(crate::scalar::fl(255.0));
                out[i * nc + c] = v.round().to_u8().unwrap();
            }
        }
        out
    }
}

/// Per-channel mean/min/max over the valid pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats<T> {
    pub mean: T,
    pub min: T,
    pub max: T,
}

/// Mean, min and max of one channel over the validity mask.
pub fn channel_stats<T: Scalar>(canvas: &Canvas<T>, channel: usize) -> Result<ChannelStats<T>> {
    let mut sum = T::zero();
    let mut count = 0usize;
    let mut min = T::infinity();
    let mut max = T::neg_infinity();
    let plane = canvas.plane(channel);
    for (i, &v) in plane.iter().enumerate() {
        if canvas.mask()[i] {
            sum += v;
            count += 1;
            min = min.min(v);
            max = max.max(v);
        }
    }
    if count == 0 {
        return Err(BlendError::EmptyMask);
    }
    Ok(ChannelStats {
        mean: sum / T::from_usize(count).unwrap(),
        min,
        max,
    })
}

/// Clamps every intensity into `[lo, hi]`; values already inside are
/// untouched, so the operation is idempotent.
pub fn clip_to_range<T: Scalar>(canvas: &Canvas<T>, lo: T, hi: T) -> Canvas<T> {
    assert!(lo <= hi, "lo must not exceed hi");
    let mut out = canvas.clone();
    for plane in &mut out.planes {
        for v in plane.iter_mut() {
            *v = (*v).max(lo).min(hi);
        }
    }
    out
}

/// An input image together with its placement on the target canvas. The
/// image itself is a fully valid rectangle.
#[derive(Debug, Clone)]
pub struct AlignedInput<T> {
    pub image: Canvas<T>,
    pub offset: (usize, usize),
}

impl<T: Scalar> AlignedInput<T> {
    pub fn new(image: Canvas<T>, offset: (usize, usize)) -> Self {
        AlignedInput { image, offset }
    }

    /// Placement rectangle in canvas coordinates.
    pub fn rect(&self) -> Rect {
        Rect::new(
            self.offset.0,
            self.offset.1,
            self.image.nx(),
            self.image.ny(),
        )
    }

    /// Intensity at canvas coordinates, `None` outside the placement.
    pub fn sample(&self, c: usize, x: usize, y: usize) -> Option<T> {
        if self.rect().contains(x, y) {
            Some(self.image.get(c, x - self.offset.0, y - self.offset.1))
        } else {
            None
        }
    }
}

/// Per-pixel assignment of canvas locations to owning inputs, plus the set
/// of faces where ownership changes.
#[derive(Debug, Clone)]
pub struct Partition {
    nx: usize,
    ny: usize,
    owner: Vec<Option<u32>>,
    boundary_faces: BTreeSet<Face>,
}

impl Partition {
    /// Derives the boundary-face set from the owner map: exactly the faces
    /// between pixels with different owners.
    pub fn from_owner_map(nx: usize, ny: usize, owner: Vec<Option<u32>>) -> Self {
        assert_eq!(owner.len(), nx * ny);
        let mut boundary_faces = BTreeSet::new();
        for y in 0..ny {
            for x in 1..nx {
                let a = owner[y * nx + x - 1];
                let b = owner[y * nx + x];
                if let (Some(a), Some(b)) = (a, b) {
                    if a != b {
                        boundary_faces.insert(Face::x_between(x, y));
                    }
                }
            }
        }
        for y in 1..ny {
            for x in 0..nx {
                let a = owner[(y - 1) * nx + x];
                let b = owner[y * nx + x];
                if let (Some(a), Some(b)) = (a, b) {
                    if a != b {
                        boundary_faces.insert(Face::y_between(x, y));
                    }
                }
            }
        }
        Partition {
            nx,
            ny,
            owner,
            boundary_faces,
        }
    }

    /// Everything covered by `mask` belongs to input 0.
    pub fn single(nx: usize, ny: usize, mask: &[bool]) -> Self {
        let owner = mask
            .iter()
            .map(|&m| if m { Some(0) } else { None })
            .collect();
        Partition::from_owner_map(nx, ny, owner)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn owner_at(&self, x: usize, y: usize) -> Option<u32> {
        self.owner[y * self.nx + x]
    }

    pub fn boundary_faces(&self) -> &BTreeSet<Face> {
        &self.boundary_faces
    }

    pub fn n_owners(&self) -> usize {
        self.owner
            .iter()
            .flatten()
            .copied()
            .max()
            .map_or(0, |m| m as usize + 1)
    }

    /// Checks that each owner's region restricted to any row is one
    /// contiguous run (vertical seams cut every row exactly once).
    pub fn rows_contiguous(&self) -> bool {
        for y in 0..self.ny {
            let mut seen: Vec<u32> = Vec::new();
            let mut prev: Option<u32> = None;
            for x in 0..self.nx {
                if let Some(o) = self.owner_at(x, y) {
                    if prev != Some(o) {
                        if seen.contains(&o) {
                            return false;
                        }
                        seen.push(o);
                        prev = Some(o);
                    }
                }
            }
        }
        true
    }
}

/// Mosaics the inputs along the partition: each pixel takes its owner's
/// intensity. A pixel covered by no input is left invalid; a pixel whose
/// owner has no data there falls back to the first covering input.
pub fn naive_stitch<T: Scalar>(
    inputs: &[AlignedInput<T>],
    partition: &Partition,
) -> Result<Canvas<T>> {
    let nc = inputs
        .first()
        .map(|i| i.image.nc())
        .ok_or_else(|| BlendError::Pipeline("no inputs to stitch".into()))?;
    if inputs.iter().any(|i| i.image.nc() != nc) {
        return Err(BlendError::Pipeline(
            "inputs disagree on channel count".into(),
        ));
    }
    let (nx, ny) = (partition.nx(), partition.ny());
    for input in inputs {
        let r = input.rect();
        if r.x1() > nx || r.y1() > ny {
            return Err(BlendError::Pipeline(
                "input placement exceeds the target canvas".into(),
            ));
        }
    }
    let mut out = Canvas::empty(nx, ny, nc);
    for y in 0..ny {
        for x in 0..nx {
            let source = match partition.owner_at(x, y) {
                Some(k) if inputs[k as usize].rect().contains(x, y) => Some(&inputs[k as usize]),
                _ => inputs.iter().find(|i| i.rect().contains(x, y)),
            };
            if let Some(input) = source {
                out.set_valid(x, y, true);
                for c in 0..nc {
                    let v = input.sample(c, x, y).unwrap();
                    out.set(c, x, y, v);
                }
            }
        }
    }
    Ok(out)
}
