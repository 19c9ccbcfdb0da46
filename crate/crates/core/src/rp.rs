//! Structured random projections.
//!
//! A spinner computes `H D3 H D2 H D1 pad(x)`, where `H` is the orthonormal
//! Walsh-Hadamard transform and `Di` are random ±1 diagonals. Its rows behave
//! like (scaled) Gaussian directions while projecting onto all `D` of them in
//! `O(D log D)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Orthonormal in-place Walsh-Hadamard transform. Applying it twice is the
/// identity.
pub fn fht_inplace(v: &mut [f64]) -> Result<()> {
    let len = v.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "Hadamard transform length must be a power of two, got {len}"
        )));
    }
    fht_unnormalized(v);
    let scale = 1.0 / (len as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

fn fht_unnormalized(v: &mut [f64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

const BLOCKS: usize = 3;

/// Three `HD` blocks over a power-of-two width, seeded deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredSpinner {
    dim: usize,
    signs: [Vec<f64>; BLOCKS],
    seed: u64,
}

impl StructuredSpinner {
    /// `dim` is the projection count and must be a power of two.
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "spinner width must be a power of two, got {dim}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs = std::array::from_fn(|_| {
            (0..dim)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        });
        Ok(Self { dim, signs, seed })
    }

    /// Smallest spinner able to take `input_dim`-dimensional inputs and emit
    /// at least `projections` coordinates.
    pub fn covering(input_dim: usize, projections: usize, seed: u64) -> Result<Self> {
        Self::new(input_dim.max(projections).max(1).next_power_of_two(), seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn signs(&self) -> &[Vec<f64>; BLOCKS] {
        &self.signs
    }

    /// Projects `x` (zero-padded to the spinner width) into `out`.
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() > self.dim {
            return Err(Error::Dimension(format!(
                "input dimension {} exceeds spinner width {}",
                x.len(),
                self.dim
            )));
        }
        if out.len() != self.dim {
            return Err(Error::Dimension(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                self.dim
            )));
        }
        out[..x.len()].copy_from_slice(x);
        out[x.len()..].iter_mut().for_each(|v| *v = 0.0);
        for signs in &self.signs {
            for (v, s) in out.iter_mut().zip(signs) {
                *v *= s;
            }
            fht_unnormalized(out);
        }
        // one combined orthonormal scaling for the three transforms
        let scale = (self.dim as f64).powf(-1.5);
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.project_into(x, &mut out)?;
        Ok(out)
    }
}
