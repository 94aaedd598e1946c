//! Grayscale image denoising by low-rank approximation of groups of similar
//! patches.
//!
//! For each reference patch on a strided grid, the most similar patches in a
//! search window are stacked as columns of a matrix. That matrix is roughly
//! low-rank for natural images, so thresholding its singular values removes
//! noise. Denoised patches are put back and overlapping estimates averaged.

use std::fmt;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{invalid, ElmaError, Result};
use crate::lrma::{solve, Method};
use crate::matrix::{Matrix, RngState};
use crate::penalty::PenaltySpec;

/// References processed per parallel batch. Batches are aggregated in
/// raster order, so the output does not depend on the thread count.
const BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Row-major pixels, each finite and in `[0, 255]`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return invalid(format!("image dimensions must be positive, got {width}x{height}"));
        }
        if pixels.len() != width * height {
            return invalid(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            ));
        }
        if let Some(i) = pixels.iter().position(|p| !(p.is_finite() && (0.0..=255.0).contains(p))) {
            return invalid(format!("pixel {i} = {} outside [0, 255]", pixels[i]));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    /// Clamps arbitrary finite values into `[0, 255]`.
    pub fn from_clamped(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ElmaError::NonFinite(i));
        }
        Self::new(width, height, values.into_iter().map(|v| v.clamp(0.0, 255.0)).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Pixels rounded half away from zero to bytes.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| p.clamp(0.0, 255.0).round() as u8).collect()
    }

    /// The image as it would read back after an 8-bit write.
    pub fn quantized(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.to_u8().into_iter().map(f64::from).collect(),
        }
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<GrayImage> {
        if top + height > self.height || left + width > self.width {
            return invalid("crop window exceeds image bounds");
        }
        let mut pixels = Vec::with_capacity(width * height);
        for r in top..top + height {
            pixels.extend_from_slice(&self.pixels[r * self.width + left..r * self.width + left + width]);
        }
        GrayImage::new(width, height, pixels)
    }
}

/// Adds `N(0, sigma²)` noise and clamps to `[0, 255]`.
pub fn add_noise(img: &GrayImage, sigma: f64, rng: &mut RngState) -> Result<GrayImage> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("noise level must be finite and >= 0, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let values = img.pixels.iter().map(|&p| p + sigma * rng.standard_normal()).collect();
    GrayImage::from_clamped(img.width, img.height, values)
}

/// Peak signal-to-noise ratio in dB against a 255 peak. Identical images
/// give `f64::INFINITY`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(ElmaError::ShapeMismatch {
            expected: (a.height, a.width),
            actual: (b.height, b.width),
        });
    }
    let mse = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.pixels.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Renders a PSNR value, using `inf` for identical images.
pub fn format_psnr(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.4}")
    }
}

/// Overlap weighting when putting denoised patches back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Every estimate counts equally.
    #[default]
    Uniform,
    /// Estimates from a group are weighted by `1 / max(rank, 1)` of its
    /// denoised patch matrix.
    InverseRank,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Uniform => "uniform",
            Aggregation::InverseRank => "inverse-rank",
        })
    }
}

impl std::str::FromStr for Aggregation {
    type Err = ElmaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Aggregation::Uniform),
            "inverse-rank" => Ok(Aggregation::InverseRank),
            other => invalid(format!("unknown aggregation {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NssConfig {
    pub patch_size: usize,
    pub stride: usize,
    /// Half-width of the square search window around the reference.
    pub search_radius: usize,
    pub group_size: usize,
    /// Noise standard deviation of the input.
    pub sigma: f64,
    /// `lambda = beta * sigma` for every group.
    pub beta: f64,
    pub a_fraction: f64,
    pub p: f64,
    pub method: Method,
    pub aggregation: Aggregation,
}

/// Default `beta` for image denoising with `method`, tuned at sigma = 100
/// with the default patch settings on a natural image outside the test data.
pub fn default_image_beta(method: Method) -> f64 {
    match method {
        Method::Elma => 30.0,
        Method::Nnm => 8.0,
        Method::Ps => 30.0,
        Method::Wnnm => 1200.0,
    }
}

impl NssConfig {
    /// Defaults: 8x8 patches, stride 4, 41x41 search window, 60 patches per
    /// group, method-specific beta.
    pub fn new(sigma: f64, method: Method) -> Self {
        Self {
            patch_size: 8,
            stride: 4,
            search_radius: 20,
            group_size: 60,
            sigma,
            beta: default_image_beta(method),
            a_fraction: 0.6,
            p: -2.0,
            method,
            aggregation: Aggregation::Uniform,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.beta * self.sigma
    }

    pub fn penalty(&self) -> Result<PenaltySpec> {
        self.method.spec(self.lambda(), self.a_fraction, self.p)
    }

    fn validate(&self, img: &GrayImage) -> Result<()> {
        if self.patch_size == 0 || self.stride == 0 || self.group_size == 0 || self.search_radius == 0 {
            return invalid("patch size, stride, search radius and group size must be positive");
        }
        if self.patch_size > img.width.min(img.height) {
            return invalid(format!(
                "patch size {} exceeds image {}x{}",
                self.patch_size, img.width, img.height
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        Ok(())
    }
}

/// Similar patches stacked as columns, reference first.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchGroup {
    pub matrix: Matrix,
    /// Top-left (row, col) of each column's patch.
    pub origins: Vec<(usize, usize)>,
}

fn patch_distance(img: &GrayImage, a: (usize, usize), b: (usize, usize), p: usize) -> f64 {
    let w = img.width;
    let mut d = 0.0;
    for r in 0..p {
        let ra = &img.pixels[(a.0 + r) * w + a.1..(a.0 + r) * w + a.1 + p];
        let rb = &img.pixels[(b.0 + r) * w + b.1..(b.0 + r) * w + b.1 + p];
        for (x, y) in ra.iter().zip(rb) {
            d += (x - y) * (x - y);
        }
    }
    d
}

/// Finds up to `group_size` patches closest to the reference (squared
/// Euclidean distance) within the search window. The reference comes first;
/// remaining ties are broken by raster order.
pub fn block_match(img: &GrayImage, reference: (usize, usize), cfg: &NssConfig) -> Result<PatchGroup> {
    let p = cfg.patch_size;
    let (r0, c0) = reference;
    if p == 0 || r0 + p > img.height || c0 + p > img.width {
        return invalid(format!("reference patch at {reference:?} is not inside the image"));
    }
    let rad = cfg.search_radius;
    let rows = r0.saturating_sub(rad)..=(r0 + rad).min(img.height - p);
    let cols = c0.saturating_sub(rad)..=(c0 + rad).min(img.width - p);

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for r in rows {
        for c in cols.clone() {
            if (r, c) != reference {
                candidates.push((patch_distance(img, reference, (r, c), p), r, c));
            }
        }
    }
    let key = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    };
    let take = cfg.group_size.saturating_sub(1).min(candidates.len());
    if take < candidates.len() && take > 0 {
        candidates.select_nth_unstable_by(take - 1, key);
    }
    candidates.truncate(take);
    candidates.sort_unstable_by(key);

    let mut origins = Vec::with_capacity(take + 1);
    origins.push(reference);
    origins.extend(candidates.iter().map(|&(_, r, c)| (r, c)));

    let k = origins.len();
    let mut data = vec![0.0; p * p * k];
    for (j, &(r, c)) in origins.iter().enumerate() {
        for dr in 0..p {
            for dc in 0..p {
                data[(dr * p + dc) * k + j] = img.get(r + dr, c + dc);
            }
        }
    }
    Ok(PatchGroup {
        matrix: Matrix::new(p * p, k, data)?,
        origins,
    })
}

/// Low-rank estimate of a patch stack.
pub fn denoise_group(g: &PatchGroup, spec: &PenaltySpec) -> Result<Matrix> {
    Ok(solve(&g.matrix, spec)?.x_hat)
}

fn grid_positions(extent: usize, patch: usize, stride: usize) -> Vec<usize> {
    let last = extent - patch;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if *v.last().unwrap() != last {
        v.push(last);
    }
    v
}

struct GroupEstimate {
    origins: Vec<(usize, usize)>,
    patches: Matrix,
    weight: f64,
}

fn estimate(img: &GrayImage, reference: (usize, usize), cfg: &NssConfig, spec: &PenaltySpec) -> Result<GroupEstimate> {
    let group = block_match(img, reference, cfg)?;
    let result = solve(&group.matrix, spec)?;
    let weight = match cfg.aggregation {
        Aggregation::Uniform => 1.0,
        Aggregation::InverseRank => {
            1.0 / result.sigma_out.iter().filter(|&&s| s > 0.0).count().max(1) as f64
        }
    };
    Ok(GroupEstimate {
        origins: group.origins,
        patches: result.x_hat,
        weight,
    })
}

/// Denoises `noisy` with one low-rank solve per reference patch.
pub fn denoise_image(noisy: &GrayImage, cfg: &NssConfig) -> Result<GrayImage> {
    cfg.validate(noisy)?;
    let spec = cfg.penalty()?;
    let p = cfg.patch_size;
    let row_pos = grid_positions(noisy.height, p, cfg.stride);
    let col_pos = grid_positions(noisy.width, p, cfg.stride);
    let references: Vec<(usize, usize)> = row_pos
        .iter()
        .flat_map(|&r| col_pos.iter().map(move |&c| (r, c)))
        .collect();

    let mut sum = vec![0.0; noisy.pixels.len()];
    let mut weight = vec![0.0; noisy.pixels.len()];
    for batch in references.chunks(BATCH) {
        #[cfg(feature = "parallel")]
        let iter = batch.par_iter();
        #[cfg(not(feature = "parallel"))]
        let iter = batch.iter();
        let estimates: Vec<GroupEstimate> = iter
            .map(|&r| estimate(noisy, r, cfg, &spec))
            .collect::<Result<_>>()?;
        for est in &estimates {
            let k = est.origins.len();
            for (j, &(r, c)) in est.origins.iter().enumerate() {
                for dr in 0..p {
                    for dc in 0..p {
                        let idx = (r + dr) * noisy.width + c + dc;
                        sum[idx] += est.weight * est.patches.get(dr * p + dc, j);
                        weight[idx] += est.weight;
                    }
                }
                debug_assert_eq!(est.patches.cols(), k);
            }
        }
    }
    let values = sum.iter().zip(&weight).map(|(s, w)| s / w).collect();
    GrayImage::from_clamped(noisy.width, noisy.height, values)
}

fn skip_space_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
        } else if bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            break;
        }
    }
    pos
}

fn next_token(bytes: &[u8], pos: usize) -> Result<(&[u8], usize)> {
    let start = skip_space_and_comments(bytes, pos);
    let mut end = start;
    while end < bytes.len() && !bytes[end].is_ascii_whitespace() && bytes[end] != b'#' {
        end += 1;
    }
    if start == end {
        return Err(ElmaError::Format("truncated pgm header".into()));
    }
    Ok((&bytes[start..end], end))
}

fn parse_header_number(tok: &[u8], what: &str) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ElmaError::Format(format!("bad pgm {what}: {:?}", String::from_utf8_lossy(tok))))
}

/// Decodes a binary (P5) or ASCII (P2) graymap with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let (magic, pos) = next_token(bytes, 0)?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(ElmaError::Format(format!(
                "unsupported magic {:?} (expected P5 or P2)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let (tok, pos) = next_token(bytes, pos)?;
    let width = parse_header_number(tok, "width")?;
    let (tok, pos) = next_token(bytes, pos)?;
    let height = parse_header_number(tok, "height")?;
    let (tok, mut pos) = next_token(bytes, pos)?;
    let maxval = parse_header_number(tok, "maxval")?;
    if maxval != 255 {
        return Err(ElmaError::Format(format!("unsupported maxval {maxval} (only 255)")));
    }
    if width == 0 || height == 0 {
        return Err(ElmaError::Format("pgm dimensions must be positive".into()));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| ElmaError::Format("pgm dimensions overflow".into()))?;

    let data = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(ElmaError::Format("truncated pgm data".into()));
        }
        pos += 1;
        let raster = bytes
            .get(pos..pos + count)
            .ok_or_else(|| ElmaError::Format(format!("truncated pgm data: expected {count} bytes")))?;
        raster.to_vec()
    } else {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let (tok, next) = next_token(bytes, pos)
                .map_err(|_| ElmaError::Format(format!("truncated pgm data: expected {count} values")))?;
            let v = parse_header_number(tok, "pixel")?;
            if v > 255 {
                return Err(ElmaError::Format(format!("pixel value {v} exceeds maxval")));
            }
            out.push(v as u8);
            pos = next;
        }
        out
    };
    GrayImage::from_u8(width, height, &data)
}

/// Binary P5 encoding; pixels are clamped and rounded half away from zero.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_pgm(&std::fs::read(path)?)
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(w: usize, h: usize, v: f64) -> GrayImage {
        GrayImage::new(w, h, vec![v; w * h]).unwrap()
    }

    #[test]
    fn image_constructor_validates() {
        assert!(GrayImage::new(2, 2, vec![0.0, 1.0, 255.0, 3.5]).is_ok());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(1, 1, vec![256.0]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayImage::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn psnr_examples() {
        let a = constant(4, 4, 10.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert_eq!(format_psnr(psnr(&a, &a).unwrap()), "inf");
        let black = constant(4, 4, 0.0);
        let white = constant(4, 4, 255.0);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
        let b = constant(4, 4, 11.0);
        let expected = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.1308).abs() < 1e-4);
        assert!(psnr(&a, &constant(4, 3, 0.0)).is_err());
    }

    #[test]
    fn pgm_binary_header_contract() {
        let bytes = b"P5\n2 2\n255\n\x00\x01\x02\xff";
        let img = parse_pgm(bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 2.0, 255.0]);
    }

    #[test]
    fn pgm_ascii_and_comments() {
        let text = b"P2\n# made by hand\n3 1 # trailing\n255\n0 128\n255\n";
        let img = parse_pgm(text).unwrap();
        assert_eq!(img.pixels(), &[0.0, 128.0, 255.0]);
    }

    #[test]
    fn pgm_errors() {
        assert!(matches!(parse_pgm(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P5\n2 2\n255\n\0\0"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P5\n2"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P2\n2 1\n255\n1"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P2\n1 1\n255\n300"), Err(ElmaError::Format(_))));
        assert!(matches!(parse_pgm(b"P5\nx 1\n255\n\0"), Err(ElmaError::Format(_))));
    }

    #[test]
    fn pgm_write_rounds_half_away_from_zero() {
        let img = GrayImage::new(4, 1, vec![0.5, 1.49, 2.5, 254.5]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[1, 1, 3, 255]);
    }

    #[test]
    fn pgm_file_round_trip() {
        let mut rng = RngState::new(3);
        let pixels: Vec<f64> = (0..35).map(|_| (rng.standard_normal() * 60.0 + 128.0).clamp(0.0, 255.0).round()).collect();
        let img = GrayImage::new(7, 5, pixels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        write_pgm(&img, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
    }

    #[test]
    fn block_match_constant_image() {
        let img = constant(16, 16, 50.0);
        let mut cfg = NssConfig::new(10.0, Method::Elma);
        cfg.patch_size = 4;
        cfg.group_size = 5;
        let g = block_match(&img, (6, 6), &cfg).unwrap();
        assert_eq!(g.origins.len(), 5);
        assert_eq!(g.origins[0], (6, 6));
        // Ties in raster order from the top-left of the window.
        assert_eq!(&g.origins[1..], &[(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert_eq!(g.matrix.shape(), (16, 5));
    }

    #[test]
    fn block_match_ranks_exact_duplicate_first() {
        // Two-patch toy image: the right half duplicates the left half.
        let mut pixels = vec![0.0; 2 * 4 * 4];
        let left = [10.0, 200.0, 30.0, 90.0, 5.0, 60.0, 250.0, 0.0, 17.0, 44.0, 120.0, 33.0, 8.0, 99.0, 140.0, 70.0];
        for r in 0..4 {
            for c in 0..4 {
                pixels[r * 8 + c] = left[r * 4 + c];
                pixels[r * 8 + 4 + c] = left[r * 4 + c];
            }
        }
        let img = GrayImage::new(8, 4, pixels).unwrap();
        let mut cfg = NssConfig::new(10.0, Method::Elma);
        cfg.patch_size = 4;
        cfg.group_size = 5;
        cfg.search_radius = 8;
        let g = block_match(&img, (0, 0), &cfg).unwrap();
        assert_eq!(g.origins[0], (0, 0));
        assert_eq!(g.origins[1], (0, 4));
        // Brute-force scan: every other candidate is strictly farther.
        let d_dup = patch_distance(&img, (0, 0), (0, 4), 4);
        for c in 1..4 {
            assert!(patch_distance(&img, (0, 0), (0, c), 4) > d_dup);
        }
    }

    #[test]
    fn block_match_returns_all_when_window_small() {
        let img = constant(6, 6, 1.0);
        let mut cfg = NssConfig::new(10.0, Method::Elma);
        cfg.patch_size = 5;
        cfg.group_size = 60;
        let g = block_match(&img, (0, 0), &cfg).unwrap();
        assert_eq!(g.origins.len(), 4);
        assert!(block_match(&img, (2, 0), &cfg).is_err());
    }

    #[test]
    fn denoise_group_cases() {
        let spec = PenaltySpec::firm(5.0, 0.6).unwrap();
        let zero = PatchGroup {
            matrix: Matrix::zeros(16, 6).unwrap(),
            origins: vec![(0, 0); 6],
        };
        assert_eq!(denoise_group(&zero, &spec).unwrap(), zero.matrix);

        let col: Vec<f64> = (0..16).map(|i| 10.0 + i as f64).collect();
        let data: Vec<f64> = col.iter().flat_map(|&v| std::iter::repeat_n(v, 6)).collect();
        let g = PatchGroup {
            matrix: Matrix::new(16, 6, data).unwrap(),
            origins: vec![(0, 0); 6],
        };
        let out = denoise_group(&g, &spec).unwrap();
        for r in 0..16 {
            for c in 1..6 {
                assert!((out.get(r, c) - out.get(r, 0)).abs() < 1e-9);
            }
        }
        let direct = solve(&g.matrix, &spec).unwrap().x_hat;
        assert_eq!(out, direct);
    }

    #[test]
    fn grid_covers_borders() {
        assert_eq!(grid_positions(10, 4, 4), vec![0, 4, 6]);
        assert_eq!(grid_positions(12, 4, 4), vec![0, 4, 8]);
        assert_eq!(grid_positions(4, 4, 2), vec![0]);
    }

    #[test]
    fn image_smaller_than_patch_rejected() {
        let img = constant(5, 5, 0.0);
        let cfg = NssConfig::new(10.0, Method::Elma);
        assert!(matches!(denoise_image(&img, &cfg), Err(ElmaError::InvalidParameter(_))));
    }

    #[test]
    fn add_noise_clamps() {
        let img = constant(32, 32, 250.0);
        let noisy = add_noise(&img, 50.0, &mut RngState::new(1)).unwrap();
        assert!(noisy.pixels().iter().all(|p| (0.0..=255.0).contains(p)));
        assert_eq!(add_noise(&img, 0.0, &mut RngState::new(1)).unwrap(), img);
        assert!(add_noise(&img, -1.0, &mut RngState::new(1)).is_err());
    }
}
