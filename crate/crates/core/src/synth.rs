//! Synthetic degradation experiments: split an image into two overlapping
//! halves and brighten one side additively or multiplicatively, clipping at
//! 255. Also provides a deterministic smooth test scene so experiments are
//! reproducible without external data.

use crate::canvas::{AlignedInput, Canvas, Rect};
use crate::error::{BlendError, Result};
use crate::scalar::{fl, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradeSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradeMode {
    Additive,
    Multiplicative,
}

/// Splits `image` into two overlapping halves (`overlap` shared columns,
/// both full height) and degrades the chosen side's brightness, clipping
/// the result into `[0, 255]`.
pub fn synth_degrade<T: Scalar>(
    image: &Canvas<T>,
    side: DegradeSide,
    mode: DegradeMode,
    amount: T,
    overlap: usize,
) -> Result<(AlignedInput<T>, AlignedInput<T>)> {
    let nx = image.nx();
    if overlap == 0 {
        return Err(BlendError::Config(
            "overlap must be at least one column".into(),
        ));
    }
    if overlap > nx {
        return Err(BlendError::Config(format!(
            "overlap of {overlap} columns is wider than the {nx}-column image"
        )));
    }
    let left_end = (nx + overlap) / 2; // exclusive
    let right_start = left_end - overlap;
    if left_end > nx || left_end == 0 {
        return Err(BlendError::Config("image too narrow to split".into()));
    }

    let mut left = image.crop(Rect::new(0, 0, left_end, image.ny()));
    let mut right = image.crop(Rect::new(right_start, 0, nx - right_start, image.ny()));
    let target = match side {
        DegradeSide::Left => &mut left,
        DegradeSide::Right => &mut right,
    };
    let hi = fl::<T>(255.0);
    for c in 0..target.nc() {
        for v in target.plane_mut(c).iter_mut() {
            let modified = match mode {
                DegradeMode::Additive => *v + amount,
                DegradeMode::Multiplicative => *v * amount,
            };
            *v = modified.max(T::zero()).min(hi);
        }
    }
    Ok((
        AlignedInput::new(left, (0, 0)),
        AlignedInput::new(right, (right_start, 0)),
    ))
}

/// Deterministic smooth test scene: gentle ramps, low-frequency waves and
/// two soft blobs, quantized to integer levels. Gradients are kept small
/// away from the left-side highlight so seam metrics measure the blend, not
/// the texture; the highlight pushes a few pixels above 196, which is where
/// a 1.3x brightening starts clipping at 255.
pub fn sample_scene<T: Scalar>(nx: usize, ny: usize, nc: usize) -> Canvas<T> {
    assert!(nc == 1 || nc == 3);
    let mut planes = Vec::with_capacity(nc);
    for c in 0..nc {
        let phase = c as f64 * 0.9;
        let mut plane = Vec::with_capacity(nx * ny);
        for y in 0..ny {
            for x in 0..nx {
                let u = x as f64 / nx as f64;
                let v = y as f64 / ny as f64;
                let waves = 7.0 * (std::f64::consts::TAU * (1.0 * u + 0.2 * v) + phase).sin()
                    + 6.0 * (std::f64::consts::TAU * (0.7 * v) + 0.5 + 0.3 * phase).sin();
                let ramp = 20.0 * (u - 0.5) + 12.0 * (v - 0.5);
                let blob = |cx: f64, cy: f64, r: f64, a: f64| {
                    let dx = u - cx;
                    let dy = v - cy;
                    a * (-(dx * dx + dy * dy) / (2.0 * r * r)).exp()
                };
                let highlight = blob(0.15, 0.30, 0.11, 69.0);
                let shade = blob(0.22, 0.72, 0.16, -12.0);
                let value = (126.0 + waves + ramp + highlight + shade).clamp(25.0, 222.0);
                plane.push(fl::<T>(value.round()));
            }
        }
        planes.push(plane);
    }
    Canvas::from_planes(nx, ny, planes, vec![true; nx * ny]).unwrap()
}
