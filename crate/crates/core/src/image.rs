//! Core data containers: complex cine stacks and 4-class label maps.
//!
//! Both use the same flat row-major layout with index `(t*ny + y)*nx + x`,
//! i.e. x fastest, then y, then frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical pixel/slice geometry in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dx_mm: f64,
    pub dy_mm: f64,
    pub thickness_mm: f64,
}

impl Geometry {
    /// In-plane pixel area in mm².
    pub fn pixel_area_mm2(&self) -> f64 {
        self.dx_mm * self.dy_mm
    }

    /// Volume of one voxel in millilitres.
    pub fn voxel_volume_ml(&self) -> f64 {
        self.dx_mm * self.dy_mm * self.thickness_mm / 1000.0
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            dx_mm: 1.8,
            dy_mm: 1.8,
            thickness_mm: 8.0,
        }
    }
}

/// Complex-valued 2D+time image stack.
#[derive(Debug, Clone, PartialEq)]
pub struct CineImage {
    nx: usize,
    ny: usize,
    nt: usize,
    pub geometry: Geometry,
    pub tr_ms: f64,
    data: Vec<Complex64>,
}

impl CineImage {
    pub fn zeros(nx: usize, ny: usize, nt: usize, geometry: Geometry, tr_ms: f64) -> Self {
        Self {
            nx,
            ny,
            nt,
            geometry,
            tr_ms,
            data: vec![Complex64::ZERO; nx * ny * nt],
        }
    }

    pub fn from_vec(
        nx: usize,
        ny: usize,
        nt: usize,
        geometry: Geometry,
        tr_ms: f64,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if data.len() != nx * ny * nt {
            return Err(Error::DimMismatch(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                nx,
                ny,
                nt
            )));
        }
        Ok(Self {
            nx,
            ny,
            nt,
            geometry,
            tr_ms,
            data,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn frame_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize, t: usize) -> usize {
        (t * self.ny + y) * self.nx + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> Complex64 {
        self.data[self.idx(x, y, t)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, t: usize, v: Complex64) {
        let i = self.idx(x, y, t);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex64] {
        let n = self.frame_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    /// Magnitude of every sample, same layout.
    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// True if every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|c| c.im == 0.0)
    }

    pub fn same_dims(&self, other: &CineImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// Relative L2 distance `||a - b|| / ||a||` (0 if both are zero).
    pub fn rel_l2_distance(&self, other: &CineImage) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            num += (a - b).norm_sqr();
            den += a.norm_sqr();
        }
        if den == 0.0 {
            return if num == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (num / den).sqrt()
    }
}

/// Segmentation label values.
pub const LABEL_BG: u8 = 0;
pub const LABEL_LV: u8 = 1;
pub const LABEL_MYO: u8 = 2;
pub const LABEL_RV: u8 = 3;

/// Per-frame 4-class label map (background, LV blood, myocardium, RV blood).
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    nx: usize,
    ny: usize,
    nt: usize,
    pub geometry: Geometry,
    labels: Vec<u8>,
    /// Frames where segmentation found no usable bright component.
    pub empty_frames: Vec<bool>,
}

impl SegmentationMask {
    pub fn new(nx: usize, ny: usize, nt: usize, geometry: Geometry) -> Self {
        Self {
            nx,
            ny,
            nt,
            geometry,
            labels: vec![LABEL_BG; nx * ny * nt],
            empty_frames: vec![false; nt],
        }
    }

    pub fn from_labels(
        nx: usize,
        ny: usize,
        nt: usize,
        geometry: Geometry,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if labels.len() != nx * ny * nt {
            return Err(Error::DimMismatch(format!(
                "label length {} does not match {}x{}x{}",
                labels.len(),
                nx,
                ny,
                nt
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&v| v > LABEL_RV) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(Self {
            nx,
            ny,
            nt,
            geometry,
            labels,
            empty_frames: vec![false; nt],
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn frame_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize, t: usize) -> usize {
        (t * self.ny + y) * self.nx + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> u8 {
        self.labels[self.idx(x, y, t)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, t: usize, v: u8) {
        let i = self.idx(x, y, t);
        self.labels[i] = v;
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        let n = self.frame_len();
        &self.labels[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [u8] {
        let n = self.frame_len();
        &mut self.labels[t * n..(t + 1) * n]
    }

    /// Pixel count of one class in one frame.
    pub fn class_count(&self, class: u8, t: usize) -> usize {
        self.frame(t).iter().filter(|&&v| v == class).count()
    }

    /// True if any frame carries the segmentation-empty flag.
    pub fn any_empty_flag(&self) -> bool {
        self.empty_frames.iter().any(|&e| e)
    }

    pub fn same_dims(&self, other: &SegmentationMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }
}
