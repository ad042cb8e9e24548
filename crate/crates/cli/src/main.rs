//! `osmoblend`: blend pre-aligned, overlapping images into one mosaic by
//! solving an osmosis (drift-diffusion) filter to its steady state.
//!
//! Exit codes: 0 success, 1 input error, 2 solver non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use osmoblend_core::field::AlphaParams;
use osmoblend_core::pipeline::{run_pipeline, BlendMode, IoPaths, PipelineConfig, SeamStrategy};
use osmoblend_core::solver::SolverConfig;
use osmoblend_core::BlendError;

#[derive(Parser, Debug)]
#[command(
    name = "osmoblend",
    about = "Seamless image blending by osmosis filtering",
    disable_help_subcommand = true
)]
struct Args {
    /// Manifest file: one `<path> <offset_x> <offset_y>` line per input,
    /// `#` comments allowed, optional `canvas <w> <h>` line.
    #[arg(long)]
    manifest: PathBuf,

    /// Blending mode: naive|drift|seam-removal|alpha|poisson.
    #[arg(long, default_value = "drift")]
    mode: String,

    /// Seam strategy: middle|optimal (alpha mode requires middle).
    #[arg(long, default_value = "middle")]
    seam: String,

    /// Half-width of the alpha-blending window in pixels.
    #[arg(long, value_name = "N", default_value_t = 16)]
    alpha_width: usize,

    /// Implicit time-step size.
    #[arg(long, value_name = "F", default_value_t = 1e5)]
    tau: f64,

    /// Relative BiCGSTAB residual tolerance.
    #[arg(long, value_name = "F", default_value_t = 1e-9)]
    linear_tol: f64,

    /// Required decay factor of the steady-state residual.
    #[arg(long, value_name = "F", default_value_t = 1e-6)]
    steady_decay: f64,

    /// Positivity offset added before the solve and removed afterwards.
    #[arg(long, value_name = "F", default_value_t = 1.0)]
    offset: f64,

    /// Output image (PGM for grey, PPM for RGB; `.png` with the png build).
    #[arg(long, value_name = "IMG", default_value = "blend.pnm")]
    out: PathBuf,

    /// Convergence report CSV (channel,step,residual_ratio,linear_iters,mean_value).
    #[arg(long, value_name = "CSV")]
    report: Option<PathBuf>,

    /// Seam dump: `vertical <rows> <cost>` then one face index per row.
    #[arg(long, value_name = "FILE")]
    dump_seam: Option<PathBuf>,

    /// Composed field dump: per channel `OSMD` + nx,ny,channel (u32 LE),
    /// then the dx and dy planes as f64 LE.
    #[arg(long, value_name = "FILE")]
    dump_field: Option<PathBuf>,
}

fn run(args: Args) -> Result<i32, BlendError> {
    let mode: BlendMode = args.mode.parse()?;
    let seam_strategy: SeamStrategy = args.seam.parse()?;
    let cfg = PipelineConfig {
        mode,
        seam_strategy,
        alpha: AlphaParams {
            half_width: args.alpha_width,
        },
        solver: SolverConfig {
            tau: args.tau,
            linear_tol: args.linear_tol,
            steady_decay: args.steady_decay,
            ..SolverConfig::default()
        },
        offset: args.offset,
        threads: None,
    };
    let io = IoPaths {
        manifest: args.manifest,
        output: Some(args.out.clone()),
        report: args.report,
        dump_seam: args.dump_seam,
        dump_field: args.dump_field,
    };

    let (canvas, report) = run_pipeline(&cfg, &io)?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "mode {}  canvas {}x{}x{}  wrote {}",
        report.mode,
        canvas.nx(),
        canvas.ny(),
        canvas.nc(),
        args.out.display()
    );
    println!(
        "seam energy: naive {:.3e} -> output {:.3e}",
        report.seam_energy_naive, report.seam_energy_output
    );
    for (c, conv) in report.convergence.iter().enumerate() {
        println!(
            "channel {c}: {} outer steps, residual ratio {:.3e}, mean drift {:.3e}",
            conv.outer_steps(),
            conv.final_ratio(),
            report.mean_drift[c]
        );
    }
    let t = report.timings;
    println!(
        "timings [s]: load {:.3} seams {:.3} fields {:.3} solve {:.3} io {:.3} total {:.3}",
        t.load_s, t.seams_s, t.fields_s, t.solve_s, t.io_s, t.total_s
    );

    Ok(if report.non_converged { 2 } else { 0 })
}

fn main() -> ExitCode {
    // clap's own usage failures must map to exit code 1 (input error).
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // --help/--version are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
