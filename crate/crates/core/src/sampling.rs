//! Seeded spectral-point sampling with pole avoidance.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic sampler for complex spectral points in a centered box.
pub struct SpectralSampler {
    rng: ChaCha8Rng,
    /// Half-width of the sampling box for both real and imaginary parts.
    pub box_half_width: f64,
}

impl SpectralSampler {
    pub fn new(seed: u64, box_half_width: f64) -> Self {
        SpectralSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            box_half_width,
        }
    }

    pub fn draw(&mut self) -> Complex64 {
        let w = self.box_half_width;
        Complex64::new(
            self.rng.random_range(-w..w),
            self.rng.random_range(-w..w),
        )
    }

    /// Draw until `accept` holds; used to stay away from poles of the
    /// unitarity scalars, which poison relative residuals.
    pub fn draw_where(&mut self, accept: impl Fn(Complex64) -> bool) -> Complex64 {
        for _ in 0..10_000 {
            let z = self.draw();
            if accept(z) {
                return z;
            }
        }
        panic!("sampler failed to find an admissible point after 10000 draws");
    }

    pub fn draw_pair_where(
        &mut self,
        accept: impl Fn(Complex64, Complex64) -> bool,
    ) -> (Complex64, Complex64) {
        for _ in 0..10_000 {
            let a = self.draw();
            let b = self.draw();
            if accept(a, b) {
                return (a, b);
            }
        }
        panic!("sampler failed to find an admissible pair after 10000 draws");
    }

    /// Draw `n` points, each individually admissible.
    pub fn draw_many_where(
        &mut self,
        n: usize,
        accept: impl Fn(Complex64) -> bool,
    ) -> Vec<Complex64> {
        (0..n).map(|_| self.draw_where(&accept)).collect()
    }
}
