//! Staggered drift/gradient fields and the three composition strategies:
//! hard-seam stitching, seam removal, and alpha blending.
//!
//! Samples live on pixel faces (a grid shifted by h/2): `dx` holds one value
//! per vertical face, `dy` one per horizontal face, per channel. Faces on
//! the outer boundary or adjacent to invalid pixels are exactly zero, which
//! encodes the no-flux boundary condition.

use std::io::Write;
use std::path::Path;

use crate::canvas::{Axis, Canvas, Face, Partition, Rect};
use crate::error::{BlendError, Result};
use crate::scalar::{fl, Scalar};
use crate::seam::Seam;

/// Per-channel face samples on the staggered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField<T> {
    nx: usize,
    ny: usize,
    dx: Vec<Vec<T>>, // per channel, (nx+1) * ny, index y*(nx+1) + x
    dy: Vec<Vec<T>>, // per channel, nx * (ny+1), index y*nx + x
}

impl<T: Scalar> StaggeredField<T> {
    pub fn zeros(nx: usize, ny: usize, nc: usize) -> Self {
        StaggeredField {
            nx,
            ny,
            dx: vec![vec![T::zero(); (nx + 1) * ny]; nc],
            dy: vec![vec![T::zero(); nx * (ny + 1)]; nc],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nc(&self) -> usize {
        self.dx.len()
    }

    #[inline]
    pub fn dx_at(&self, c: usize, x: usize, y: usize) -> T {
        self.dx[c][y * (self.nx + 1) + x]
    }

    #[inline]
    pub fn dy_at(&self, c: usize, x: usize, y: usize) -> T {
        self.dy[c][y * self.nx + x]
    }

    #[inline]
    pub fn set_dx(&mut self, c: usize, x: usize, y: usize, v: T) {
        self.dx[c][y * (self.nx + 1) + x] = v;
    }

    #[inline]
    pub fn set_dy(&mut self, c: usize, x: usize, y: usize, v: T) {
        self.dy[c][y * self.nx + x] = v;
    }

    pub fn sample(&self, c: usize, face: Face) -> T {
        match face.axis {
            Axis::X => self.dx_at(c, face.x, face.y),
            Axis::Y => self.dy_at(c, face.x, face.y),
        }
    }

    pub fn set_sample(&mut self, c: usize, face: Face, v: T) {
        match face.axis {
            Axis::X => self.set_dx(c, face.x, face.y, v),
            Axis::Y => self.set_dy(c, face.x, face.y, v),
        }
    }

    /// Zero-extends the field into a larger canvas at the given placement.
    pub fn embed(&self, nx: usize, ny: usize, offset: (usize, usize)) -> StaggeredField<T> {
        let (ox, oy) = offset;
        assert!(
            ox + self.nx <= nx && oy + self.ny <= ny,
            "embed out of bounds"
        );
        let mut out = StaggeredField::zeros(nx, ny, self.nc());
        for c in 0..self.nc() {
            for y in 0..self.ny {
                for x in 0..=self.nx {
                    out.set_dx(c, ox + x, oy + y, self.dx_at(c, x, y));
                }
            }
            for y in 0..=self.ny {
                for x in 0..self.nx {
                    out.set_dy(c, ox + x, oy + y, self.dy_at(c, x, y));
                }
            }
        }
        out
    }

    /// True when all outer-boundary samples are exactly zero.
    pub fn boundary_is_zero(&self) -> bool {
        for c in 0..self.nc() {
            for y in 0..self.ny {
                if self.dx_at(c, 0, y) != T::zero() || self.dx_at(c, self.nx, y) != T::zero() {
                    return false;
                }
            }
            for x in 0..self.nx {
                if self.dy_at(c, x, 0) != T::zero() || self.dy_at(c, x, self.ny) != T::zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for c in 0..self.nc() {
            for &v in self.dx[c].iter().chain(self.dy[c].iter()) {
                m = m.max(v.abs());
            }
        }
        m
    }
}

/// Half-width of the alpha-blending window; the full window spans
/// `[s_j - w, s_j + w]` around the seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaParams {
    pub half_width: usize,
}

impl Default for AlphaParams {
    fn default() -> Self {
        // Wide enough to make the soft-seam blur visible on desk-scale
        // overlaps; override per run as needed.
        AlphaParams { half_width: 16 }
    }
}

/// The canonical drift field of a strictly positive image: the face sample
/// between values `a` and `b` is `2 (b - a) / (h (b + a))`, the consistent
/// staggered discretization of grad(v)/v. Faces touching the boundary or an
/// invalid pixel are zero.
///
/// Scaling the image by a constant leaves the field unchanged (exactly so
/// for power-of-two factors), which is what makes osmosis blending robust
/// under multiplicative brightness differences.
pub fn canonical_drift<T: Scalar>(canvas: &Canvas<T>, h: T) -> Result<StaggeredField<T>> {
    face_field(
        canvas,
        h,
        |a, b, h| fl::<T>(2.0) * (b - a) / (h * (b + a)),
        true,
    )
}

/// The plain gradient field: face sample `(b - a) / h`. Accepts any finite
/// intensities; unlike the canonical drift it is invariant under additive
/// (not multiplicative) rescalings.
pub fn gradient_field<T: Scalar>(canvas: &Canvas<T>, h: T) -> StaggeredField<T> {
    face_field(canvas, h, |a, b, h| (b - a) / h, false)
        .expect("gradient field has no positivity requirement")
}

fn face_field<T: Scalar>(
    canvas: &Canvas<T>,
    h: T,
    sample: impl Fn(T, T, T) -> T,
    require_positive: bool,
) -> Result<StaggeredField<T>> {
    let (nx, ny, nc) = (canvas.nx(), canvas.ny(), canvas.nc());
    if require_positive {
        for c in 0..nc {
            for y in 0..ny {
                for x in 0..nx {
                    if canvas.is_valid(x, y) && canvas.get(c, x, y) <= T::zero() {
                        return Err(BlendError::PositivityViolated);
                    }
                }
            }
        }
    }
    let mut field = StaggeredField::zeros(nx, ny, nc);
    for c in 0..nc {
        for y in 0..ny {
            for x in 1..nx {
                if canvas.is_valid(x - 1, y) && canvas.is_valid(x, y) {
                    let a = canvas.get(c, x - 1, y);
                    let b = canvas.get(c, x, y);
                    field.set_dx(c, x, y, sample(a, b, h));
                }
            }
        }
        for y in 1..ny {
            for x in 0..nx {
                if canvas.is_valid(x, y - 1) && canvas.is_valid(x, y) {
                    let a = canvas.get(c, x, y - 1);
                    let b = canvas.get(c, x, y);
                    field.set_dy(c, x, y, sample(a, b, h));
                }
            }
        }
    }
    Ok(field)
}

fn face_has_data(support: &Rect, face: Face) -> bool {
    match face.axis {
        Axis::X => {
            face.x > support.x
                && face.x < support.x1()
                && face.y >= support.y
                && face.y < support.y1()
        }
        Axis::Y => {
            face.y > support.y
                && face.y < support.y1()
                && face.x >= support.x
                && face.x < support.x1()
        }
    }
}

/// Composes per-input fields along a partition. Faces interior to one
/// owner's region take that owner's sample; faces between two owners take
/// the mean of both owners' samples; where an adjacent owner has no data
/// the face falls back to the one that has, and with no data on either side
/// it stays zero (counted and returned so callers can warn).
///
/// Each entry of `fields` must be defined on the full canvas (an input's
/// field computed on its own support and zero-extended); `supports[k]` is
/// input k's placement rectangle, used to tell real samples from padding.
pub fn stitch_fields<T: Scalar>(
    fields: &[StaggeredField<T>],
    supports: &[Rect],
    partition: &Partition,
    mask: &[bool],
) -> (StaggeredField<T>, usize) {
    assert_eq!(fields.len(), supports.len());
    let (nx, ny) = (partition.nx(), partition.ny());
    let nc = fields.first().map_or(0, |f| f.nc());
    let mut out = StaggeredField::zeros(nx, ny, nc);
    let mut no_data_faces = 0usize;

    let mut compose =
        |face: Face, p: (usize, usize), q: (usize, usize), out: &mut StaggeredField<T>| {
            if !mask[p.1 * nx + p.0] || !mask[q.1 * nx + q.0] {
                return; // mask boundary: no-flux, stays zero
            }
            let (op, oq) = (partition.owner_at(p.0, p.1), partition.owner_at(q.0, q.1));
            let (op, oq) = match (op, oq) {
                (Some(a), Some(b)) => (a as usize, b as usize),
                _ => return,
            };
            let p_data = face_has_data(&supports[op], face);
            let q_data = face_has_data(&supports[oq], face);
            if op == oq {
                if p_data {
                    for c in 0..nc {
                        out.set_sample(c, face, fields[op].sample(c, face));
                    }
                } else {
                    no_data_faces += 1;
                }
                return;
            }
            match (p_data, q_data) {
                (true, true) => {
                    for c in 0..nc {
                        let mean = (fields[op].sample(c, face) + fields[oq].sample(c, face))
                            / fl::<T>(2.0);
                        out.set_sample(c, face, mean);
                    }
                }
                (true, false) => {
                    for c in 0..nc {
                        out.set_sample(c, face, fields[op].sample(c, face));
                    }
                }
                (false, true) => {
                    for c in 0..nc {
                        out.set_sample(c, face, fields[oq].sample(c, face));
                    }
                }
                (false, false) => no_data_faces += 1,
            }
        };

    for y in 0..ny {
        for x in 1..nx {
            compose(Face::x_between(x, y), (x - 1, y), (x, y), &mut out);
        }
    }
    for y in 1..ny {
        for x in 0..nx {
            compose(Face::y_between(x, y), (x, y - 1), (x, y), &mut out);
        }
    }
    (out, no_data_faces)
}

/// Hard-seam composition of the per-input canonical drift fields; the face
/// rule lives in [`stitch_fields`], which the gradient baseline shares.
pub fn stitch_drift<T: Scalar>(
    fields: &[StaggeredField<T>],
    supports: &[Rect],
    partition: &Partition,
    mask: &[bool],
) -> (StaggeredField<T>, usize) {
    stitch_fields(fields, supports, partition, mask)
}

/// Canonical drift of the naive composite with every sample on a seam face
/// overwritten by zero, the shadow-removal style edit.
pub fn seam_removal_drift<T: Scalar>(
    naive: &Canvas<T>,
    seams: &[Seam<T>],
    h: T,
) -> Result<StaggeredField<T>> {
    let mut field = canonical_drift(naive, h)?;
    for seam in seams {
        for face in seam.face_set() {
            for c in 0..field.nc() {
                field.set_sample(c, face, T::zero());
            }
        }
    }
    Ok(field)
}

/// Piecewise-linear blending weight: 1 left of the window, 0 right of it,
/// and a linear ramp through 1/2 at the seam inside `[s - w, s + w]`.
fn alpha_weight<T: Scalar>(i: usize, s: usize, w: usize) -> T {
    if w == 0 {
        return match i.cmp(&s) {
            std::cmp::Ordering::Less => T::one(),
            std::cmp::Ordering::Equal => fl(0.5),
            std::cmp::Ordering::Greater => T::zero(),
        };
    }
    if i + w < s {
        T::one()
    } else if i > s + w {
        T::zero()
    } else {
        // (s + w - i) / (2w)
        let num = fl::<T>((s + w) as f64 - i as f64);
        num / fl::<T>(2.0 * w as f64)
    }
}

/// Blends two full-canvas fields with the distance-to-seam weight. The
/// mixing window must stay inside the overlap (`overlap_x` is the overlap's
/// inclusive column range) so both fields have data wherever they are mixed.
pub fn alpha_blend_drift<T: Scalar>(
    left: &StaggeredField<T>,
    right: &StaggeredField<T>,
    seam: &Seam<T>,
    params: AlphaParams,
    overlap_x: (usize, usize),
) -> Result<StaggeredField<T>> {
    assert_eq!(left.nx(), right.nx());
    assert_eq!(left.ny(), right.ny());
    assert_eq!(left.nc(), right.nc());
    let (nx, ny, nc) = (left.nx(), left.ny(), left.nc());
    let w = params.half_width;
    let (x0, x1) = overlap_x;
    for (j, &s) in seam.faces.iter().enumerate() {
        // Strictly mixed faces are s-w+1 ..= s+w-1; both fields need data
        // there, which holds exactly when the window sits inside the overlap.
        if s < x0 + w || s + w > x1 + 1 {
            return Err(BlendError::AlphaWindow { row: seam.y0 + j });
        }
    }

    let mut out = StaggeredField::zeros(nx, ny, nc);
    for c in 0..nc {
        for y in 0..ny {
            for x in 0..=nx {
                let a: T = alpha_weight(x, seam.face_at_row(y), w);
                let v = a * left.dx_at(c, x, y) + (T::one() - a) * right.dx_at(c, x, y);
                out.set_dx(c, x, y, v);
            }
        }
        for y in 0..=ny {
            // A horizontal face spans rows y-1 and y; weight it by the
            // seam position of the lower row (immaterial for straight seams).
            let row = y.min(ny.saturating_sub(1));
            for x in 0..nx {
                let a: T = alpha_weight(x, seam.face_at_row(row), w);
                let v = a * left.dy_at(c, x, y) + (T::one() - a) * right.dy_at(c, x, y);
                out.set_dy(c, x, y, v);
            }
        }
    }
    Ok(out)
}

/// Binary field dump: per channel a 16-byte header (`OSMD`, nx, ny, channel
/// as little-endian u32) followed by the dx plane then the dy plane as
/// little-endian f64.
pub fn write_field_dump<T: Scalar>(path: &Path, field: &StaggeredField<T>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for c in 0..field.nc() {
        out.write_all(b"OSMD")?;
        out.write_all(&(field.nx() as u32).to_le_bytes())?;
        out.write_all(&(field.ny() as u32).to_le_bytes())?;
        out.write_all(&(c as u32).to_le_bytes())?;
        for y in 0..field.ny() {
            for x in 0..=field.nx() {
                out.write_all(&field.dx_at(c, x, y).to_f64().unwrap().to_le_bytes())?;
            }
        }
        for y in 0..=field.ny() {
            for x in 0..field.nx() {
                out.write_all(&field.dy_at(c, x, y).to_f64().unwrap().to_le_bytes())?;
            }
        }
    }
    Ok(())
}
