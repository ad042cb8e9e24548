//! Blend-quality metrics: cross-seam energy (how visible a seam is) and a
//! per-channel least-squares scale fit against a reference image.

use crate::canvas::Canvas;
use crate::error::{BlendError, Result};
use crate::scalar::{fl, Scalar};
use crate::seam::Seam;

/// Sum over rows and channels of the squared difference between the two
/// pixels adjacent to each seam face. Rows where either side is invalid are
/// skipped.
pub fn seam_energy<T: Scalar>(canvas: &Canvas<T>, seam: &Seam<T>) -> T {
    let mut energy = T::zero();
    for (j, &s) in seam.faces.iter().enumerate() {
        let y = seam.y0 + j;
        assert!(
            s >= 1 && s < canvas.nx() && y < canvas.ny(),
            "seam outside canvas"
        );
        if !canvas.is_valid(s - 1, y) || !canvas.is_valid(s, y) {
            continue;
        }
        for c in 0..canvas.nc() {
            let d = canvas.get(c, s - 1, y) - canvas.get(c, s, y);
            energy += d * d;
        }
    }
    energy
}

/// Per-channel result of the global scale fit.
#[derive(Debug, Clone, Copy)]
pub struct ScaleFit<T> {
    pub scale: T,
    pub mse: T,
    pub compared: usize,
}

/// Least-squares scalar `c` minimizing `||candidate - c reference||` per
/// channel, plus the residual mean squared error. With `exclude_clipped`
/// set, pixels at 0 or 255 in either image are skipped.
pub fn fit_global_scale<T: Scalar>(
    candidate: &Canvas<T>,
    reference: &Canvas<T>,
    exclude_clipped: bool,
) -> Result<Vec<ScaleFit<T>>> {
    if candidate.nx() != reference.nx()
        || candidate.ny() != reference.ny()
        || candidate.nc() != reference.nc()
    {
        return Err(BlendError::Pipeline(
            "scale fit needs images of identical shape".into(),
        ));
    }
    let lo = T::zero();
    let hi = fl::<T>(255.0);
    let clipped = |v: T| v <= lo || v >= hi;
    let mut fits = Vec::with_capacity(candidate.nc());
    for c in 0..candidate.nc() {
        let mut cross = T::zero();
        let mut ref_sq = T::zero();
        let mut count = 0usize;
        let mut pairs: Vec<(T, T)> = Vec::new();
        for y in 0..candidate.ny() {
            for x in 0..candidate.nx() {
                if !candidate.is_valid(x, y) || !reference.is_valid(x, y) {
                    continue;
                }
                let a = candidate.get(c, x, y);
                let r = reference.get(c, x, y);
                if exclude_clipped && (clipped(a) || clipped(r)) {
                    continue;
                }
                cross += a * r;
                ref_sq += r * r;
                count += 1;
                pairs.push((a, r));
            }
        }
        if count == 0 || ref_sq == T::zero() {
            return Err(BlendError::Pipeline(format!(
                "channel {c}: no pixels to compare for the scale fit"
            )));
        }
        let scale = cross / ref_sq;
        let mse = pairs
            .iter()
            .map(|&(a, r)| {
                let d = a - scale * r;
                d * d
            })
            .sum::<T>()
            / T::from_usize(count).unwrap();
        fits.push(ScaleFit {
            scale,
            mse,
            compared: count,
        });
    }
    Ok(fits)
}

/// Mean-aligned mean squared error: shifts the candidate so the channel
/// means agree, then reports the MSE. The additive counterpart of
/// `fit_global_scale`, with the same clipped-pixel exclusion.
pub fn mean_aligned_mse<T: Scalar>(
    candidate: &Canvas<T>,
    reference: &Canvas<T>,
    exclude_clipped: bool,
) -> Result<Vec<T>> {
    if candidate.nx() != reference.nx()
        || candidate.ny() != reference.ny()
        || candidate.nc() != reference.nc()
    {
        return Err(BlendError::Pipeline(
            "mean alignment needs images of identical shape".into(),
        ));
    }
    let lo = T::zero();
    let hi = fl::<T>(255.0);
    let clipped = |v: T| v <= lo || v >= hi;
    let mut out = Vec::with_capacity(candidate.nc());
    for c in 0..candidate.nc() {
        let mut pairs: Vec<(T, T)> = Vec::new();
        for y in 0..candidate.ny() {
            for x in 0..candidate.nx() {
                if !candidate.is_valid(x, y) || !reference.is_valid(x, y) {
                    continue;
                }
                let a = candidate.get(c, x, y);
                let r = reference.get(c, x, y);
                if exclude_clipped && (clipped(a) || clipped(r)) {
                    continue;
                }
                pairs.push((a, r));
            }
        }
        if pairs.is_empty() {
            return Err(BlendError::Pipeline(format!(
                "channel {c}: no pixels to compare for mean alignment"
            )));
        }
        let n = T::from_usize(pairs.len()).unwrap();
        let shift = pairs.iter().map(|&(a, r)| r - a).sum::<T>() / n;
        let mse = pairs
            .iter()
            .map(|&(a, r)| {
                let d = a + shift - r;
                d * d
            })
            .sum::<T>()
            / n;
        out.push(mse);
    }
    Ok(out)
}
