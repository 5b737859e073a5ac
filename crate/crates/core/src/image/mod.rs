//! Image representation and the per-image primitives the estimator builds on.

mod io;
mod kernel;
mod metrics;
mod noise;

pub use io::{load_image, save_image};
pub use kernel::{
    gaussian_patch_kernel, patch_distance_sq, reflect_index, BorderPolicy, CenterPolicy,
    PatchKernel,
};
pub use metrics::{mse, psnr};
pub use noise::{add_gaussian_noise, NoiseSpec};

use crate::error::{Error, Result};

/// Pixel coordinate, `row` counted from the top and `col` from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }

    pub fn dist_sq(self, other: Coord) -> usize {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr * dr + dc * dc
    }
}

/// A grayscale image with real-valued, unclamped intensities stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "empty image ({width}x{height})"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite intensity at index {i}"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(Coord) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(Coord::new(row, col)));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.row < self.height && c.col < self.width
    }

    #[inline]
    pub fn get(&self, c: Coord) -> f64 {
        self.data[c.row * self.width + c.col]
    }

    /// Value at a possibly out-of-range position, mirrored back into the image
    /// without repeating the edge pixel.
    #[inline]
    pub fn get_reflected(&self, row: isize, col: isize) -> f64 {
        let r = reflect_index(row, self.height);
        let c = reflect_index(col, self.width);
        self.data[r * self.width + c]
    }

    pub fn same_shape(&self, other: &GrayImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &GrayImage) -> Result<GrayImage> {
        self.zip_map(other, |a, b| a + b)
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &GrayImage) -> Result<GrayImage> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GrayImage> {
        GrayImage::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    fn zip_map(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> Result<GrayImage> {
        self.same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GrayImage::new(self.width, self.height, data)
    }

    /// Centered `size`x`size` crop. Images smaller than `size` along an axis
    /// keep their full extent along that axis.
    pub fn center_crop(&self, size: usize) -> GrayImage {
        let w = size.min(self.width);
        let h = size.min(self.height);
        let c0 = (self.width - w) / 2;
        let r0 = (self.height - h) / 2;
        let mut data = Vec::with_capacity(w * h);
        for row in r0..r0 + h {
            data.extend_from_slice(&self.data[row * self.width + c0..row * self.width + c0 + w]);
        }
        GrayImage {
            width: w,
            height: h,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayImage::new(1, 2, vec![-5.0, 300.0]).is_ok());
    }

    #[test]
    fn reflection_skips_edge_pixel() {
        let img = GrayImage::from_fn(4, 1, |c| c.col as f64).unwrap();
        assert_eq!(img.get_reflected(0, -1), 1.0);
        assert_eq!(img.get_reflected(0, -2), 2.0);
        assert_eq!(img.get_reflected(0, 4), 2.0);
        assert_eq!(img.get_reflected(0, 5), 1.0);
    }

    #[test]
    fn center_crop_geometry() {
        let img = GrayImage::from_fn(512, 512, |c| (c.row * 512 + c.col) as f64).unwrap();
        let crop = img.center_crop(128);
        assert_eq!((crop.width(), crop.height()), (128, 128));
        assert_eq!(crop.get(Coord::new(0, 0)), img.get(Coord::new(192, 192)));
        assert_eq!(
            crop.get(Coord::new(127, 127)),
            img.get(Coord::new(319, 319))
        );

        let small = GrayImage::filled(10, 300, 1.0).unwrap();
        let c = small.center_crop(128);
        assert_eq!((c.width(), c.height()), (10, 128));
    }
}
