//! End-to-end blending pipeline: load, offset-shift, seam, compose a drift
//! or gradient field, solve each channel to its steady state, un-shift,
//! clip, and write outputs.

use std::path::PathBuf;
use std::time::Instant;

use crate::canvas::{clip_to_range, naive_stitch, AlignedInput, Canvas};
use crate::error::{BlendError, Result};
use crate::field::{
    alpha_blend_drift, canonical_drift, seam_removal_drift, stitch_drift, write_field_dump,
    AlphaParams, StaggeredField,
};
use crate::manifest::load_manifest;
use crate::metrics::seam_energy;
use crate::operator::assemble_operator;
use crate::pnm::write_image;
use crate::poisson::{gradient_field, poisson_solve, stitch_gradients};
use crate::scalar::{fl, Scalar};
use crate::seam::{
    build_partition, middle_seam, optimal_seam, write_seam_dump, OverlapRegion, Seam,
};
use crate::solver::{steady_state, write_convergence_csv, SolverConfig, SteadyStateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlendMode {
    Naive,
    Drift,
    SeamRemoval,
    Alpha,
    Poisson,
}

impl std::str::FromStr for BlendMode {
    type Err = BlendError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(BlendMode::Naive),
            "drift" => Ok(BlendMode::Drift),
            "seam-removal" => Ok(BlendMode::SeamRemoval),
            "alpha" => Ok(BlendMode::Alpha),
            "poisson" => Ok(BlendMode::Poisson),
            other => Err(BlendError::Config(format!(
                "unknown mode {other:?}; expected naive|drift|seam-removal|alpha|poisson"
            ))),
        }
    }
}

impl std::fmt::Display for BlendMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BlendMode::Naive => "naive",
            BlendMode::Drift => "drift",
            BlendMode::SeamRemoval => "seam-removal",
            BlendMode::Alpha => "alpha",
            BlendMode::Poisson => "poisson",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamStrategy {
    Middle,
    Optimal,
}

impl std::str::FromStr for SeamStrategy {
    type Err = BlendError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "middle" => Ok(SeamStrategy::Middle),
            "optimal" => Ok(SeamStrategy::Optimal),
            other => Err(BlendError::Config(format!(
                "unknown seam strategy {other:?}; expected middle|optimal"
            ))),
        }
    }
}

/// Everything one run needs besides the inputs themselves.
#[derive(Debug, Clone)]
pub struct PipelineConfig<T> {
    pub mode: BlendMode,
    pub seam_strategy: SeamStrategy,
    pub alpha: AlphaParams,
    pub solver: SolverConfig<T>,
    /// Positivity offset added before drift construction and removed before
    /// clipping; 8-bit inputs may contain zeros the canonical drift cannot
    /// divide by.
    pub offset: T,
    /// Channel-level concurrency; `None` reads `OSMOBLEND_THREADS`, else
    /// one thread per channel.
    pub threads: Option<usize>,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        PipelineConfig {
            mode: BlendMode::Drift,
            seam_strategy: SeamStrategy::Middle,
            alpha: AlphaParams::default(),
            solver: SolverConfig::default(),
            offset: T::one(),
            threads: None,
        }
    }
}

/// File locations for a pipeline run; everything but the manifest is
/// optional.
#[derive(Debug, Clone, Default)]
pub struct IoPaths {
    pub manifest: PathBuf,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub dump_seam: Option<PathBuf>,
    pub dump_field: Option<PathBuf>,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub load_s: f64,
    pub seams_s: f64,
    pub fields_s: f64,
    pub solve_s: f64,
    pub io_s: f64,
    pub total_s: f64,
}

/// Metrics and diagnostics of one blend run.
#[derive(Debug, Clone)]
pub struct BlendReport<T> {
    pub mode: BlendMode,
    pub seams: Vec<Seam<T>>,
    pub seam_energy_naive: T,
    pub seam_energy_output: T,
    /// Largest per-step relative mean change, per channel; empty for naive.
    pub mean_drift: Vec<T>,
    /// Minimum steady-state intensity before the offset removal, per
    /// channel; empty for naive.
    pub steady_min: Vec<T>,
    pub convergence: Vec<SteadyStateReport<T>>,
    /// The composed drift/gradient field the solve ran with.
    pub field: Option<StaggeredField<T>>,
    pub non_converged: bool,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
}

fn validate_chain<T: Scalar>(inputs: &[AlignedInput<T>]) -> Result<()> {
    if inputs.is_empty() {
        return Err(BlendError::Pipeline("no inputs".into()));
    }
    let nc = inputs[0].image.nc();
    if inputs.iter().any(|i| i.image.nc() != nc) {
        return Err(BlendError::Pipeline(
            "inputs disagree on channel count".into(),
        ));
    }
    for pair in inputs.windows(2) {
        let (a, b) = (pair[0].rect(), pair[1].rect());
        if b.x < a.x || b.x1() < a.x1() {
            return Err(BlendError::Pipeline(
                "inputs must be listed as a left-to-right chain".into(),
            ));
        }
        if a.intersect(&b).is_none() {
            return Err(BlendError::NoOverlap);
        }
    }
    Ok(())
}

fn resolve_threads(requested: Option<usize>, nc: usize) -> usize {
    requested
        .or_else(|| {
            std::env::var("OSMOBLEND_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(nc)
        .clamp(1, nc)
}

type ChannelSolve<T> = Result<(Vec<T>, SteadyStateReport<T>)>;

/// Runs per-channel solves, at most `threads` at a time, preserving channel
/// order in the result.
fn solve_channels<T, F>(
    nc: usize,
    threads: usize,
    solve: F,
) -> Result<Vec<(Vec<T>, SteadyStateReport<T>)>>
where
    T: Scalar,
    F: Fn(usize) -> ChannelSolve<T> + Sync,
{
    if threads <= 1 || nc <= 1 {
        return (0..nc).map(&solve).collect();
    }
    let mut slots: Vec<Option<ChannelSolve<T>>> = (0..nc).map(|_| None).collect();
    let mut indexed: Vec<(usize, &mut Option<ChannelSolve<T>>)> =
        slots.iter_mut().enumerate().collect();
    for batch in indexed.chunks_mut(threads) {
        std::thread::scope(|scope| {
            for (c, slot) in batch.iter_mut() {
                let c = *c;
                let solve = &solve;
                scope.spawn(move || {
                    **slot = Some(solve(c));
                });
            }
        });
    }
    slots
        .into_iter()
        .map(|s| s.expect("channel solve completed"))
        .collect()
}

/// In-memory pipeline over already-loaded inputs placed on an
/// `nx` x `ny` canvas.
pub fn blend<T: Scalar>(
    inputs: &[AlignedInput<T>],
    nx: usize,
    ny: usize,
    cfg: &PipelineConfig<T>,
) -> Result<(Canvas<T>, BlendReport<T>)> {
    let started = Instant::now();
    validate_chain(inputs)?;
    cfg.solver.validate()?;
    if cfg.mode == BlendMode::Alpha && cfg.seam_strategy == SeamStrategy::Optimal {
        return Err(BlendError::Config(
            "alpha mode blends across a soft window and requires the middle seam".into(),
        ));
    }
    for input in inputs {
        let r = input.rect();
        if r.x1() > nx || r.y1() > ny {
            return Err(BlendError::Pipeline(
                "input placement exceeds the target canvas".into(),
            ));
        }
    }
    let nc = inputs[0].image.nc();
    let mut warnings = Vec::new();

    let shifted: Vec<AlignedInput<T>> = inputs
        .iter()
        .map(|i| AlignedInput::new(i.image.shifted(cfg.offset), i.offset))
        .collect();

    // Seams and partition.
    let seam_clock = Instant::now();
    let mut seams: Vec<Seam<T>> = Vec::new();
    for pair in shifted.windows(2) {
        let overlap = OverlapRegion::between(&pair[0], &pair[1])?;
        let seam = match cfg.seam_strategy {
            _ if cfg.mode == BlendMode::Alpha => middle_seam(&overlap)?,
            SeamStrategy::Middle => middle_seam(&overlap)?,
            SeamStrategy::Optimal => {
                if overlap.rect.w < 2 {
                    warnings.push(format!(
                        "overlap at x={} is too narrow for seam optimization; using the middle seam",
                        overlap.rect.x
                    ));
                }
                optimal_seam(&overlap)?
            }
        };
        seams.push(seam);
    }
    let partition = build_partition(&shifted, &seams, nx, ny)?;
    let naive = naive_stitch(&shifted, &partition)?;
    let seams_s = seam_clock.elapsed().as_secs_f64();

    // What naive mode would output; also the reference for seam energy.
    let naive_out = clip_to_range(&naive.shifted(-cfg.offset), T::zero(), fl(255.0));

    // Composite field per mode.
    let field_clock = Instant::now();
    let supports: Vec<_> = shifted.iter().map(|i| i.rect()).collect();
    let field: Option<StaggeredField<T>> = match cfg.mode {
        BlendMode::Naive => None,
        BlendMode::Drift => {
            let per_input: Vec<StaggeredField<T>> = shifted
                .iter()
                .map(|i| canonical_drift(&i.image, T::one()).map(|f| f.embed(nx, ny, i.offset)))
                .collect::<Result<_>>()?;
            let (stitched, no_data) = stitch_drift(&per_input, &supports, &partition, naive.mask());
            if no_data > 0 {
                warnings.push(format!("{no_data} faces had drift data from neither side"));
            }
            Some(stitched)
        }
        BlendMode::SeamRemoval => Some(seam_removal_drift(&naive, &seams, T::one())?),
        BlendMode::Alpha => {
            let per_input: Vec<StaggeredField<T>> = shifted
                .iter()
                .map(|i| canonical_drift(&i.image, T::one()).map(|f| f.embed(nx, ny, i.offset)))
                .collect::<Result<_>>()?;
            let mut acc = per_input[0].clone();
            for (k, right) in per_input.iter().enumerate().skip(1) {
                let overlap = shifted[k - 1]
                    .rect()
                    .intersect(&shifted[k].rect())
                    .expect("chain validated");
                acc = alpha_blend_drift(
                    &acc,
                    right,
                    &seams[k - 1],
                    cfg.alpha,
                    (overlap.x, overlap.x1() - 1),
                )?;
            }
            Some(acc)
        }
        BlendMode::Poisson => {
            let per_input: Vec<StaggeredField<T>> = shifted
                .iter()
                .map(|i| gradient_field(&i.image, T::one()).embed(nx, ny, i.offset))
                .collect();
            let (stitched, no_data) =
                stitch_gradients(&per_input, &supports, &partition, naive.mask());
            if no_data > 0 {
                warnings.push(format!(
                    "{no_data} faces had gradient data from neither side"
                ));
            }
            Some(stitched)
        }
    };
    let fields_s = field_clock.elapsed().as_secs_f64();

    // Per-channel steady states, initialized from the naive stitch.
    let solve_clock = Instant::now();
    let mut convergence: Vec<SteadyStateReport<T>> = Vec::new();
    let mut steady_min: Vec<T> = Vec::new();
    let mut mean_drift: Vec<T> = Vec::new();
    let mut non_converged = false;

    let output = if let Some(field) = &field {
        let threads = resolve_threads(cfg.threads, nc);
        let mask = naive.mask();
        let results = solve_channels(nc, threads, |c| -> Result<(Vec<T>, SteadyStateReport<T>)> {
            match cfg.mode {
                BlendMode::Poisson => {
                    let mean_target = crate::canvas::channel_stats(&naive, c)?.mean;
                    poisson_solve(
                        field,
                        c,
                        mask,
                        mean_target,
                        Some(naive.plane(c)),
                        T::one(),
                        &cfg.solver,
                    )
                }
                _ => {
                    let op = assemble_operator(field, c, mask, T::one())?;
                    let init = op.pack(naive.plane(c));
                    let (w, report) = steady_state(&op, &init, &cfg.solver)?;
                    Ok((op.unpack(&w, T::zero()), report))
                }
            }
        })?;

        let mut planes: Vec<Vec<T>> = Vec::with_capacity(nc);
        for (plane, report) in results {
            let min = plane
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask[i])
                .map(|(_, &v)| v)
                .fold(T::infinity(), T::min);
            steady_min.push(min);
            mean_drift.push(report.max_mean_drift());
            if !report.converged {
                non_converged = true;
            }
            convergence.push(report);
            // Remove the offset; clipping happens below.
            let unshifted: Vec<T> = plane
                .iter()
                .enumerate()
                .map(|(i, &v)| if mask[i] { v - cfg.offset } else { T::zero() })
                .collect();
            planes.push(unshifted);
        }
        if non_converged {
            warnings.push("steady-state decay target not reached within the step budget".into());
        }
        let raw = Canvas::from_planes_unchecked(nx, ny, planes, mask.to_vec());
        clip_to_range(&raw, T::zero(), fl(255.0))
    } else {
        naive_out.clone()
    };
    let solve_s = solve_clock.elapsed().as_secs_f64();

    let seam_energy_naive = seams.iter().map(|s| seam_energy(&naive_out, s)).sum();
    let seam_energy_output = seams.iter().map(|s| seam_energy(&output, s)).sum();

    let report = BlendReport {
        mode: cfg.mode,
        seams,
        seam_energy_naive,
        seam_energy_output,
        mean_drift,
        steady_min,
        convergence,
        field,
        non_converged,
        warnings,
        timings: StageTimings {
            load_s: 0.0,
            seams_s,
            fields_s,
            solve_s,
            io_s: 0.0,
            total_s: started.elapsed().as_secs_f64(),
        },
    };
    Ok((output, report))
}

/// File-to-file pipeline: loads the manifest, blends, writes whatever
/// outputs are requested, and returns the result for inspection.
pub fn run_pipeline<T: Scalar>(
    cfg: &PipelineConfig<T>,
    io: &IoPaths,
) -> Result<(Canvas<T>, BlendReport<T>)> {
    let load_clock = Instant::now();
    let manifest = load_manifest::<T>(&io.manifest)?;
    let load_s = load_clock.elapsed().as_secs_f64();

    let (canvas, mut report) = blend(&manifest.inputs, manifest.width, manifest.height, cfg)?;

    let io_clock = Instant::now();
    if let Some(path) = &io.output {
        write_image(path, &canvas)?;
    }
    if let Some(path) = &io.report {
        write_convergence_csv(path, &report.convergence)?;
    }
    if let Some(path) = &io.dump_seam {
        write_seam_dump(path, &report.seams)?;
    }
    if let Some(path) = &io.dump_field {
        match &report.field {
            Some(field) => write_field_dump(path, field)?,
            None => report
                .warnings
                .push("naive mode composes no field; skipping the field dump".into()),
        }
    }
    report.timings.io_s = io_clock.elapsed().as_secs_f64();
    report.timings.load_s = load_s;
    report.timings.total_s += load_s + report.timings.io_s;
    Ok((canvas, report))
}
