//! Frame-sequence ingestion and emission, vectorization between image
//! stacks and the column-matrix representation, and image-quality metrics.
//!
//! Frames live on disk as binary 8-bit grayscale PGM (P5) files named
//! `frame_%05d.pgm`. In memory a sequence is an n x T matrix of f64
//! intensities whose columns are row-major vectorized frames; values are
//! only clamped and rounded when written back to disk.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{ReldError, Result};

/// Spatial shape shared by every frame of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGeometry {
    pub height: usize,
    pub width: usize,
    pub bit_depth: u8,
}

impl FrameGeometry {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(ReldError::InvalidArgument(format!(
                "frame geometry must be nonempty, got {height}x{width}"
            )));
        }
        Ok(Self {
            height,
            width,
            bit_depth: 8,
        })
    }

    /// Pixels per frame.
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Largest representable intensity (255 for 8-bit frames).
    pub fn pixel_range_max(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }
}

/// A frame sequence as an n x T matrix; column t is frame t vectorized
/// row-major. Intensities are stored as reals and never clamped in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoMatrix {
    geometry: FrameGeometry,
    data: DMatrix<f64>,
}

impl VideoMatrix {
    pub fn new(geometry: FrameGeometry, data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != geometry.pixels() {
            return Err(ReldError::ShapeMismatch(format!(
                "matrix has {} rows but geometry {}x{} needs {}",
                data.nrows(),
                geometry.height,
                geometry.width,
                geometry.pixels()
            )));
        }
        if data.ncols() == 0 {
            return Err(ReldError::ShapeMismatch(
                "video must contain at least one frame".into(),
            ));
        }
        Ok(Self { geometry, data })
    }

    /// Builds a sequence from per-frame row-major pixel vectors.
    pub fn from_frames(geometry: FrameGeometry, frames: &[Vec<f64>]) -> Result<Self> {
        let n = geometry.pixels();
        for (t, f) in frames.iter().enumerate() {
            if f.len() != n {
                return Err(ReldError::ShapeMismatch(format!(
                    "frame {t} has {} pixels, expected {n}",
                    f.len()
                )));
            }
        }
        let data = DMatrix::from_fn(n, frames.len(), |i, t| frames[t][i]);
        Self::new(geometry, data)
    }

    pub fn geometry(&self) -> FrameGeometry {
        self.geometry
    }

    /// Number of frames T.
    pub fn num_frames(&self) -> usize {
        self.data.ncols()
    }

    /// Pixels per frame n.
    pub fn pixels(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// Column t as a slice (row-major pixels of frame t).
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data.as_slice()[t * self.pixels()..(t + 1) * self.pixels()]
    }

    /// Replaces the data matrix, keeping the geometry. Shape must match.
    pub fn with_data(&self, data: DMatrix<f64>) -> Result<Self> {
        Self::new(self.geometry, data)
    }

    /// Pixel intensity at (row, col) of frame t.
    pub fn pixel(&self, t: usize, row: usize, col: usize) -> f64 {
        self.data[(row * self.geometry.width + col, t)]
    }
}

fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.pgm")
}

/// Loads a directory of `frame_*.pgm` files (P5, 8-bit) into a matrix,
/// columns ordered by frame index.
pub fn load_frames(path: &Path) -> Result<VideoMatrix> {
    let entries = fs::read_dir(path).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|s| s.to_str())
                .map(|s| s.starts_with("frame_") && s.ends_with(".pgm"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(ReldError::EmptyDirectory(path.to_path_buf()));
    }

    let mut geometry: Option<FrameGeometry> = None;
    let mut frames: Vec<Vec<f64>> = Vec::with_capacity(files.len());
    for file in &files {
        let (h, w, pixels) = read_pgm(file)?;
        match geometry {
            None => geometry = Some(FrameGeometry::new(h, w)?),
            Some(g) if g.height != h || g.width != w => {
                return Err(ReldError::DimensionMismatch {
                    path: file.clone(),
                    expected_height: g.height,
                    expected_width: g.width,
                    height: h,
                    width: w,
                });
            }
            Some(_) => {}
        }
        frames.push(pixels.into_iter().map(f64::from).collect());
    }
    VideoMatrix::from_frames(geometry.expect("at least one frame"), &frames)
}

/// Writes every frame as `frame_%05d.pgm`, clamping to [0, 255] and
/// rounding half away from zero. Creates the directory if needed.
pub fn store_frames(video: &VideoMatrix, path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let max = video.geometry().pixel_range_max();
    for t in 0..video.num_frames() {
        let bytes: Vec<u8> = video
            .frame(t)
            .iter()
            .map(|&v| v.round().clamp(0.0, max) as u8)
            .collect();
        let file = path.join(frame_file_name(t));
        write_pgm(&file, video.geometry().height, video.geometry().width, &bytes)?;
    }
    Ok(())
}

fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |reason: &str| ReldError::MalformedFrame {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    // Header: "P5", whitespace-separated width/height/maxval with optional
    // '#' comments, then a single whitespace byte before the raster.
    let mut pos = 0usize;
    let mut tokens: Vec<(usize, usize)> = Vec::with_capacity(4);
    for _ in 0..4 {
        let mut i = pos;
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            break;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(malformed("truncated header"));
        }
        tokens.push((start, i));
        pos = i;
    }
    let token = |i: usize| std::str::from_utf8(&bytes[tokens[i].0..tokens[i].1]).unwrap_or("");
    if token(0) != "P5" {
        return Err(malformed("not a binary PGM (missing P5 magic)"));
    }
    let width: usize = token(1).parse().map_err(|_| malformed("bad width"))?;
    let height: usize = token(2).parse().map_err(|_| malformed("bad height"))?;
    let maxval: usize = token(3).parse().map_err(|_| malformed("bad maxval"))?;
    if maxval != 255 {
        return Err(malformed("only maxval 255 supported"));
    }
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if tokens[3].1 >= bytes.len() || !bytes[tokens[3].1].is_ascii_whitespace() {
        return Err(malformed("missing raster separator"));
    }
    let raster_start = tokens[3].1 + 1;
    let n = width * height;
    if bytes.len() < raster_start + n {
        return Err(malformed("truncated raster"));
    }
    Ok((height, width, bytes[raster_start..raster_start + n].to_vec()))
}

fn write_pgm(path: &Path, height: usize, width: usize, pixels: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{width} {height}\n255\n").map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(pixels).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    w.flush().map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Per-frame PSNR in dB plus the mean over finite frames. Frames with zero
/// MSE get `f64::INFINITY` and are excluded from the mean.
#[derive(Debug, Clone)]
pub struct PsnrReport {
    pub per_frame_db: Vec<f64>,
    pub mean_db: f64,
}

/// Frame-wise 10*log10(pixel_range_max^2 / MSE) between two sequences of
/// identical shape.
pub fn psnr(reference: &VideoMatrix, test: &VideoMatrix) -> Result<PsnrReport> {
    if reference.geometry() != test.geometry() || reference.num_frames() != test.num_frames() {
        return Err(ReldError::ShapeMismatch(format!(
            "psnr inputs differ: {}x{} x{} vs {}x{} x{}",
            reference.geometry().height,
            reference.geometry().width,
            reference.num_frames(),
            test.geometry().height,
            test.geometry().width,
            test.num_frames()
        )));
    }
    let peak = reference.geometry().pixel_range_max();
    let n = reference.pixels() as f64;
    let per_frame_db: Vec<f64> = (0..reference.num_frames())
        .map(|t| {
            let mse = reference
                .frame(t)
                .iter()
                .zip(test.frame(t))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / n;
            if mse == 0.0 {
                f64::INFINITY
            } else {
                10.0 * (peak * peak / mse).log10()
            }
        })
        .collect();
    let finite: Vec<f64> = per_frame_db
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let mean_db = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(PsnrReport {
        per_frame_db,
        mean_db,
    })
}

/// Writes a `frame,psnr_db` CSV; infinite frames are written as "inf".
pub fn write_psnr_csv(report: &PsnrReport, path: &Path) -> Result<()> {
    let mut out = String::from("frame,psnr_db\n");
    for (t, v) in report.per_frame_db.iter().enumerate() {
        if v.is_finite() {
            let _ = writeln!(out, "{t},{v:.6}");
        } else {
            let _ = writeln!(out, "{t},inf");
        }
    }
    fs::write(path, out).map_err(|source| ReldError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Per-frame histogram equalization over 256 bins.
///
/// Uses the plain CDF map `v -> round(peak * cdf(v) / n)`, so a constant
/// frame maps to `peak`. Inputs must already be integer-valued in
/// [0, peak]; output intensities stay in [0, peak].
pub fn hist_equalize(video: &VideoMatrix) -> Result<VideoMatrix> {
    let peak = video.geometry().pixel_range_max();
    let levels = peak as usize + 1;
    let n = video.pixels();
    let mut out = video.data().clone();
    for t in 0..video.num_frames() {
        let mut hist = vec![0u64; levels];
        for &v in video.frame(t) {
            if v < 0.0 || v > peak || v.fract() != 0.0 {
                return Err(ReldError::InvalidArgument(format!(
                    "hist_equalize requires integer intensities in [0, {peak}], got {v}"
                )));
            }
            hist[v as usize] += 1;
        }
        let mut acc = 0u64;
        let map: Vec<f64> = hist
            .iter()
            .map(|&count| {
                acc += count;
                (peak * acc as f64 / n as f64).round()
            })
            .collect();
        let mut col = out.column_mut(t);
        for v in col.iter_mut() {
            *v = map[*v as usize];
        }
    }
    video.with_data(out)
}
