//! Alignment manifests: a plain-text list of pre-aligned input images and
//! their integer placements on the target canvas.
//!
//! Format, one entry per line: `<path> <offset_x> <offset_y>`. Blank lines
//! and `#` comments are allowed. An optional `canvas <width> <height>` line
//! fixes the target size explicitly; otherwise it is the bounding box of all
//! placed rectangles. Paths are resolved relative to the manifest file and
//! must not contain whitespace.

use std::fs;
use std::path::Path;

use crate::canvas::AlignedInput;
use crate::error::{BlendError, Result};
use crate::pnm::read_image;
use crate::scalar::Scalar;

#[derive(Debug)]
pub struct Manifest<T> {
    pub inputs: Vec<AlignedInput<T>>,
    pub width: usize,
    pub height: usize,
}

fn line_err(path: &Path, line: usize, msg: impl Into<String>) -> BlendError {
    BlendError::Manifest {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn load_manifest<T: Scalar>(path: &Path) -> Result<Manifest<T>> {
    let text = fs::read_to_string(path).map_err(|e| BlendError::Manifest {
        path: path.display().to_string(),
        line: 0,
        msg: format!("cannot read manifest: {e}"),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut inputs: Vec<AlignedInput<T>> = Vec::new();
    let mut explicit: Option<(usize, usize)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "canvas" {
            if tokens.len() != 3 {
                return Err(line_err(path, lineno, "expected `canvas <width> <height>`"));
            }
            let w: usize = tokens[1]
                .parse()
                .map_err(|_| line_err(path, lineno, "bad canvas width"))?;
            let h: usize = tokens[2]
                .parse()
                .map_err(|_| line_err(path, lineno, "bad canvas height"))?;
            if w == 0 || h == 0 {
                return Err(line_err(path, lineno, "canvas dimensions must be positive"));
            }
            explicit = Some((w, h));
            continue;
        }
        if tokens.len() != 3 {
            return Err(line_err(
                path,
                lineno,
                format!(
                    "expected `<path> <offset_x> <offset_y>`, got {} tokens",
                    tokens.len()
                ),
            ));
        }
        let ox: i64 = tokens[1]
            .parse()
            .map_err(|_| line_err(path, lineno, format!("bad offset {:?}", tokens[1])))?;
        let oy: i64 = tokens[2]
            .parse()
            .map_err(|_| line_err(path, lineno, format!("bad offset {:?}", tokens[2])))?;
        if ox < 0 || oy < 0 {
            return Err(line_err(
                path,
                lineno,
                format!("negative bounding box: offset ({ox}, {oy})"),
            ));
        }
        let img_path = base.join(tokens[0]);
        let image = read_image(&img_path).map_err(|e| match e {
            BlendError::Io(io) => line_err(path, lineno, format!("{}: {io}", img_path.display())),
            other => line_err(path, lineno, other.to_string()),
        })?;
        inputs.push(AlignedInput::new(image, (ox as usize, oy as usize)));
    }

    if inputs.is_empty() {
        return Err(line_err(path, 0, "manifest lists no images"));
    }

    let bbox_w = inputs.iter().map(|i| i.rect().x1()).max().unwrap();
    let bbox_h = inputs.iter().map(|i| i.rect().y1()).max().unwrap();
    let (width, height) = explicit.unwrap_or((bbox_w, bbox_h));
    if bbox_w > width || bbox_h > height {
        return Err(line_err(
            path,
            0,
            format!("placed images need {bbox_w}x{bbox_h}, canvas is {width}x{height}"),
        ));
    }
    Ok(Manifest {
        inputs,
        width,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canvas::Canvas;
    use crate::pnm::write_image;

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let dir =
            std::env::temp_dir().join(format!("osmoblend-manifest-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_grey(dir: &Path, name: &str, nx: usize, ny: usize, v: f64) {
        let img = Canvas::filled(nx, ny, 1, v);
        write_image(&dir.join(name), &img).unwrap();
    }

    #[test]
    fn single_image_at_origin() {
        let dir = tmpdir("single");
        write_grey(&dir, "a.pgm", 5, 4, 100.0);
        fs::write(dir.join("m.txt"), "a.pgm 0 0\n").unwrap();
        let m: Manifest<f64> = load_manifest(&dir.join("m.txt")).unwrap();
        assert_eq!(m.inputs.len(), 1);
        assert_eq!((m.width, m.height), (5, 4));
    }

    #[test]
    fn two_images_bounding_box() {
        let dir = tmpdir("bbox");
        write_grey(&dir, "a.pgm", 8, 8, 10.0);
        write_grey(&dir, "b.pgm", 8, 8, 20.0);
        fs::write(dir.join("m.txt"), "# two inputs\na.pgm 0 0\nb.pgm 4 0\n").unwrap();
        let m: Manifest<f64> = load_manifest(&dir.join("m.txt")).unwrap();
        assert_eq!((m.width, m.height), (12, 8));
        assert_eq!(m.inputs[1].offset, (4, 0));
    }

    #[test]
    fn missing_image_names_the_line() {
        let dir = tmpdir("missing");
        fs::write(dir.join("m.txt"), "# comment\nnope.pgm 0 0\n").unwrap();
        let err = load_manifest::<f64>(&dir.join("m.txt")).unwrap_err();
        match err {
            BlendError::Manifest { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_line_is_rejected() {
        let dir = tmpdir("malformed");
        write_grey(&dir, "a.pgm", 2, 2, 1.0);
        fs::write(dir.join("m.txt"), "a.pgm 0\n").unwrap();
        assert!(load_manifest::<f64>(&dir.join("m.txt")).is_err());
    }

    #[test]
    fn negative_offset_is_rejected() {
        let dir = tmpdir("negative");
        write_grey(&dir, "a.pgm", 2, 2, 1.0);
        fs::write(dir.join("m.txt"), "a.pgm -1 0\n").unwrap();
        let err = load_manifest::<f64>(&dir.join("m.txt")).unwrap_err();
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn explicit_canvas_must_fit_inputs() {
        let dir = tmpdir("explicit");
        write_grey(&dir, "a.pgm", 6, 6, 1.0);
        fs::write(dir.join("m.txt"), "canvas 10 10\na.pgm 0 0\n").unwrap();
        let m: Manifest<f64> = load_manifest(&dir.join("m.txt")).unwrap();
        assert_eq!((m.width, m.height), (10, 10));
        fs::write(dir.join("m2.txt"), "canvas 4 4\na.pgm 0 0\n").unwrap();
        assert!(load_manifest::<f64>(&dir.join("m2.txt")).is_err());
    }
}
