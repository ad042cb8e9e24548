//! Generates a synthetic overlapping image pair with a brightness mismatch
//! plus a manifest, ready for the `osmoblend` CLI.
//!
//! Usage: `cargo run -p osmoblend-core --example synth_pair -- [dir]`
//! (default directory `demo/`).

use std::path::PathBuf;

use osmoblend_core::pnm::write_image;
use osmoblend_core::synth::{sample_scene, synth_degrade, DegradeMode, DegradeSide};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("demo"), PathBuf::from);
    std::fs::create_dir_all(&dir).expect("create output directory");

    let scene = sample_scene::<f64>(256, 192, 3);
    write_image(&dir.join("original.ppm"), &scene).expect("write original");

    for (name, mode, amount) in [
        ("mul", DegradeMode::Multiplicative, 1.3),
        ("add", DegradeMode::Additive, 30.0),
    ] {
        let (left, right) =
            synth_degrade(&scene, DegradeSide::Left, mode, amount, 24).expect("split");
        write_image(&dir.join(format!("{name}_left.ppm")), &left.image).expect("write left");
        write_image(&dir.join(format!("{name}_right.ppm")), &right.image).expect("write right");
        std::fs::write(
            dir.join(format!("{name}.manifest")),
            format!(
                "# left half degraded ({name}), 24-column overlap\n{name}_left.ppm 0 0\n{name}_right.ppm {} 0\n",
                right.offset.0
            ),
        )
        .expect("write manifest");
    }

    println!("wrote demo inputs to {}", dir.display());
    println!(
        "try: osmoblend --manifest {}/mul.manifest --mode drift --out blended.ppm",
        dir.display()
    );
}
