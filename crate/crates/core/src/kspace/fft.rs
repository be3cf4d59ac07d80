//! Centered orthonormal 2D Fourier transforms, applied frame by frame.
//!
//! "Centered" means the DC coefficient sits at grid cell `(nx/2, ny/2)`;
//! both directions carry a `1/sqrt(nx*ny)` scale so forward∘inverse is the
//! identity and Parseval holds exactly (up to roundoff).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::CineImage;
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Plan pair for one grid size, shareable across frames and threads.
pub struct FftPlan {
    nx: usize,
    ny: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl FftPlan {
    pub fn new(nx: usize, ny: usize, direction: Direction) -> Self {
        let mut planner = FftPlanner::new();
        let (row, col) = match direction {
            Direction::Forward => (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny)),
            Direction::Inverse => (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny)),
        };
        Self {
            nx,
            ny,
            row,
            col,
            scale: 1.0 / ((nx * ny) as f64).sqrt(),
        }
    }
}

/// Circularly shift a frame by (sx, sy); out-of-place into `dst`.
fn shift2(src: &[Complex64], dst: &mut [Complex64], nx: usize, ny: usize, sx: usize, sy: usize) {
    for y in 0..ny {
        let ty = (y + sy) % ny;
        for x in 0..nx {
            let tx = (x + sx) % nx;
            dst[ty * nx + tx] = src[y * nx + x];
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], nx: usize, ny: usize) {
    for y in 0..ny {
        for x in 0..nx {
            dst[x * ny + y] = src[y * nx + x];
        }
    }
}

/// Transform a single frame in place using a prepared plan.
pub fn fft2c_frame(frame: &mut [Complex64], plan: &FftPlan) {
    let (nx, ny) = (plan.nx, plan.ny);
    debug_assert_eq!(frame.len(), nx * ny);
    let mut scratch = vec![Complex64::ZERO; nx * ny];

    // ifftshift: move the grid-center origin back to index 0
    shift2(frame, &mut scratch, nx, ny, nx.div_ceil(2), ny.div_ceil(2));

    for row in scratch.chunks_exact_mut(nx) {
        plan.row.process(row);
    }
    transpose(&scratch, frame, nx, ny);
    for col in frame.chunks_exact_mut(ny) {
        plan.col.process(col);
    }
    transpose(frame, &mut scratch, ny, nx);

    // fftshift: put DC at the grid center, with orthonormal scaling
    shift2(&scratch, frame, nx, ny, nx / 2, ny / 2);
    for v in frame.iter_mut() {
        *v *= plan.scale;
    }
}

/// Centered orthonormal 2D transform of every frame in the stack.
pub fn fft2c(image: &CineImage, direction: Direction) -> Result<CineImage> {
    if !image.is_finite() {
        return Err(Error::NonFinite("fft2c input"));
    }
    let (nx, ny, _) = image.dims();
    let plan = FftPlan::new(nx, ny, direction);
    let mut out = image.clone();
    let frame_len = out.frame_len();
    parallel::for_each_chunk_mut(out.data_mut(), frame_len, |_, frame| {
        fft2c_frame(frame, &plan);
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Geometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(nx: usize, ny: usize, nt: usize, seed: u64) -> CineImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..nx * ny * nt)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        CineImage::from_vec(nx, ny, nt, Geometry::default(), 2.6, data).unwrap()
    }

    #[test]
    fn constant_image_has_single_center_coefficient() {
        let n = 16;
        let c = 0.7;
        let img = CineImage::from_vec(
            n,
            n,
            1,
            Geometry::default(),
            2.6,
            vec![Complex64::new(c, 0.0); n * n],
        )
        .unwrap();
        let k = fft2c(&img, Direction::Forward).unwrap();
        let center = k.get(n / 2, n / 2, 0);
        assert!((center.re - c * n as f64).abs() < 1e-10);
        assert!(center.im.abs() < 1e-10);
        for y in 0..n {
            for x in 0..n {
                if (x, y) != (n / 2, n / 2) {
                    assert!(k.get(x, y, 0).norm() < 1e-10, "nonzero at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let img = random_image(32, 32, 2, 3);
        let k = fft2c(&img, Direction::Forward).unwrap();
        let back = fft2c(&k, Direction::Inverse).unwrap();
        assert!(img.rel_l2_distance(&back) <= 1e-6);
        let max_err = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let max_abs = img.max_abs();
        assert!(max_err / max_abs <= 1e-6);
    }

    #[test]
    fn parseval_holds() {
        let img = random_image(24, 16, 3, 5);
        let k = fft2c(&img, Direction::Forward).unwrap();
        let e_img: f64 = img.data().iter().map(|c| c.norm_sqr()).sum();
        let e_k: f64 = k.data().iter().map(|c| c.norm_sqr()).sum();
        assert!(((e_img - e_k) / e_img).abs() <= 1e-10);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut img = random_image(8, 8, 1, 7);
        img.set(1, 1, 0, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(
            fft2c(&img, Direction::Forward),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn odd_dims_round_trip() {
        let img = random_image(9, 7, 2, 9);
        let k = fft2c(&img, Direction::Forward).unwrap();
        let back = fft2c(&k, Direction::Inverse).unwrap();
        assert!(img.rel_l2_distance(&back) <= 1e-10);
    }
}
