//! Image preprocessing and synthetic Gaussian class data.
//!
//! Reading IDX and CSV files lives in the `rda` crate; everything here is
//! pure and deterministic given its seed.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{contract, Error, Result};
use crate::manifolds::ManifoldKind;
use crate::scatter::LabeledDataset;

/// `N` grayscale images of `H×W` bytes, stored image after image in
/// row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImageSet {
    pixels: Vec<u8>,
    count: usize,
    height: usize,
    width: usize,
    labels: Vec<u32>,
}

impl RawImageSet {
    pub fn new(pixels: Vec<u8>, count: usize, height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDataset(alloc::format!(
                "image size must be at least 1×1, got {height}×{width}"
            )));
        }
        if pixels.len() != count * height * width {
            return Err(Error::InvalidDataset(alloc::format!(
                "expected {} pixels for {count} images of {height}×{width}, got {}",
                count * height * width,
                pixels.len()
            )));
        }
        if labels.len() != count {
            return Err(Error::InvalidDataset(alloc::format!(
                "{count} images but {} labels",
                labels.len()
            )));
        }
        Ok(Self {
            pixels,
            count,
            height,
            width,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.height * self.width;
        &self.pixels[i * size..(i + 1) * size]
    }
}

/// Uniform random permutation of `0..n` (Fisher–Yates).
pub fn fisher_yates<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Bilinear resampling with pixel centers aligned (`src = (dst + ½)·scale - ½`).
fn resample(image: &[u8], height: usize, width: usize, out_h: usize, out_w: usize) -> Vec<f64> {
    let at = |r: usize, c: usize| f64::from(image[r * width + c]);
    let axis = |dst: usize, src_len: usize, dst_len: usize| {
        let s = ((dst as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5)
            .clamp(0.0, (src_len - 1) as f64);
        let lo = s as usize;
        let hi = (lo + 1).min(src_len - 1);
        (lo, hi, s - lo as f64)
    };
    let mut out = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let (r0, r1, wr) = axis(r, height, out_h);
        for c in 0..out_w {
            let (c0, c1, wc) = axis(c, width, out_w);
            let top = at(r0, c0) * (1.0 - wc) + at(r0, c1) * wc;
            let bottom = at(r1, c0) * (1.0 - wc) + at(r1, c1) * wc;
            out.push(top * (1.0 - wr) + bottom * wr);
        }
    }
    out
}

/// Optional bilinear downsampling, scaling to `[0, 1]`, row-major
/// vectorization and a seeded shuffle of the samples.
///
/// Labels are densified in ascending order of their values.
pub fn preprocess(raw: &RawImageSet, shuffle_seed: u64, target_hw: Option<(usize, usize)>) -> Result<LabeledDataset> {
    let (out_h, out_w) = target_hw.unwrap_or((raw.height, raw.width));
    if out_h == 0 || out_w == 0 || out_h > raw.height || out_w > raw.width {
        return Err(Error::Config(alloc::format!(
            "target size {out_h}×{out_w} must be within the source size {}×{}",
            raw.height,
            raw.width
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let perm = fisher_yates(raw.count, &mut rng);
    let dim = out_h * out_w;
    let mut data = DMatrix::zeros(dim, raw.count);
    for (j, &src) in perm.iter().enumerate() {
        let image = raw.image(src);
        if (out_h, out_w) == (raw.height, raw.width) {
            for (i, &p) in image.iter().enumerate() {
                data[(i, j)] = f64::from(p) / 255.0;
            }
        } else {
            for (i, v) in resample(image, raw.height, raw.width, out_h, out_w).into_iter().enumerate() {
                data[(i, j)] = v / 255.0;
            }
        }
    }
    let mut values: Vec<u32> = raw.labels.clone();
    values.sort_unstable();
    values.dedup();
    let labels = perm
        .iter()
        .map(|&src| values.binary_search(&raw.labels[src]).expect("label present"))
        .collect();
    LabeledDataset::with_label_values(data, labels, values.into_iter().map(i64::from).collect())
}

/// `C` Gaussian classes in `R^D` with means `spread·q_c` for the columns
/// `q_c` of a seeded random orthonormal `D×C` matrix and isotropic noise of
/// standard deviation `within_std`. Samples are ordered class by class.
pub fn synth_gaussian_classes(
    dim: usize,
    classes: usize,
    per_class: usize,
    spread: f64,
    within_std: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if classes < 2 {
        return Err(contract!("need at least two classes, got {classes}"));
    }
    if dim < classes {
        return Err(contract!("need D ≥ C, got D = {dim}, C = {classes}"));
    }
    if per_class == 0 {
        return Err(contract!("need at least one sample per class"));
    }
    if !(spread.is_finite() && within_std.is_finite() && spread >= 0.0 && within_std >= 0.0) {
        return Err(contract!("spread and within_std must be finite and ≥ 0"));
    }
    let basis = ManifoldKind::stiefel().random_point(dim, classes, seed)?;
    let means = basis.matrix() * spread;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5EED_C1A5_5E55_0001));
    let n = classes * per_class;
    let mut data = DMatrix::zeros(dim, n);
    let mut labels = Vec::with_capacity(n);
    for c in 0..classes {
        for s in 0..per_class {
            let j = c * per_class + s;
            for i in 0..dim {
                let noise: f64 = StandardNormal.sample(&mut rng);
                data[(i, j)] = means[(i, c)] + within_std * noise;
            }
            labels.push(c);
        }
    }
    LabeledDataset::new(data, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter::scatter_matrices;

    #[test]
    fn white_image_maps_to_ones() {
        let raw = RawImageSet::new(alloc::vec![255; 6], 1, 2, 3, alloc::vec![4]).unwrap();
        let ds = preprocess(&raw, 0, None).unwrap();
        assert_eq!(ds.data(), &DMatrix::from_element(6, 1, 1.0));
        assert_eq!(ds.label_values(), &[4]);
    }

    #[test]
    fn downsample_to_single_pixel_averages() {
        let raw = RawImageSet::new(alloc::vec![0, 50, 100, 250], 1, 2, 2, alloc::vec![0]).unwrap();
        let ds = preprocess(&raw, 0, Some((1, 1))).unwrap();
        assert!((ds.data()[(0, 0)] - 100.0 / 255.0).abs() < 1e-15);
        assert!(preprocess(&raw, 0, Some((3, 1))).is_err());
    }

    #[test]
    fn shuffle_is_seeded() {
        let pixels: Vec<u8> = (0..20).collect();
        let labels: Vec<u32> = (0..20).map(|i| i % 3).collect();
        let raw = RawImageSet::new(pixels, 20, 1, 1, labels).unwrap();
        let a = preprocess(&raw, 5, None).unwrap();
        let b = preprocess(&raw, 5, None).unwrap();
        let c = preprocess(&raw, 6, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data(), c.data());
        // pixel value i carries label i % 3
        for j in 0..20 {
            let v = (a.data()[(0, j)] * 255.0).round() as usize;
            assert_eq!(a.labels()[j], v % 3);
        }
    }

    #[test]
    fn raw_set_validation() {
        assert!(RawImageSet::new(alloc::vec![0; 3], 1, 2, 2, alloc::vec![0]).is_err());
        assert!(RawImageSet::new(alloc::vec![0; 4], 1, 2, 2, alloc::vec![]).is_err());
        assert!(RawImageSet::new(alloc::vec![], 0, 0, 2, alloc::vec![]).is_err());
    }

    #[test]
    fn synth_degenerate_cases() {
        let point_masses = synth_gaussian_classes(6, 3, 4, 2.0, 0.0, 1).unwrap();
        assert_eq!(scatter_matrices(&point_masses).s_w, DMatrix::zeros(6, 6));
        let no_spread = synth_gaussian_classes(6, 3, 4, 0.0, 1.0, 1).unwrap();
        // only sampling noise separates the class means
        let sc = scatter_matrices(&no_spread);
        assert!(sc.s_b.trace() < sc.s_w.trace());
        assert!(synth_gaussian_classes(6, 1, 4, 1.0, 1.0, 1).is_err());
        assert!(synth_gaussian_classes(2, 3, 4, 1.0, 1.0, 1).is_err());
    }
}
