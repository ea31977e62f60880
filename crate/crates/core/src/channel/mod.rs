//! Fluid-antenna channel generation.

mod fading;
mod grid;

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

pub use fading::{
    circular_gaussian, sample_geometric_channel, sample_rayleigh_channel, GeometricChannelParams,
    GeometricSampler, RayleighSampler,
};
pub use grid::{correlation_matrix, steering_vector, PathAngles, PortGrid};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Per-user channel matrices `H_u`, each `N x M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub per_user: Vec<ComplexMatrix>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    pub fn ports(&self) -> usize {
        self.per_user.first().map_or(0, |h| h.nrows())
    }

    /// Replace every `H_u` by `Gamma_rx * H_u`.
    pub fn apply_coupling(&mut self, coupling_rx: &ComplexMatrix) -> Result<()> {
        for h in &mut self.per_user {
            *h = apply_coupling(h, coupling_rx)?;
        }
        Ok(())
    }
}

/// Fading law used to draw a [`ChannelSet`].
#[derive(Debug, Clone)]
pub enum ChannelSampler {
    Rayleigh(RayleighSampler),
    Geometric(GeometricSampler),
}

impl ChannelSampler {
    /// Independent `N x M` draws for `users` users, in user order.
    pub fn draw<R: Rng + ?Sized>(&self, users: usize, m: usize, rng: &mut R) -> ChannelSet {
        let per_user = (0..users)
            .map(|_| match self {
                ChannelSampler::Rayleigh(s) => s.sample(m, rng),
                ChannelSampler::Geometric(s) => s.sample(m, rng),
            })
            .collect();
        ChannelSet { per_user }
    }
}

/// Equivalent channel `Gamma_rx * H` (transmit coupling is the identity).
pub fn apply_coupling(h: &ComplexMatrix, coupling_rx: &ComplexMatrix) -> Result<ComplexMatrix> {
    if coupling_rx.nrows() != h.nrows() || coupling_rx.ncols() != h.nrows() {
        return Err(Error::InvalidArgument(format!(
            "coupling matrix is {}x{}, channel has {} ports",
            coupling_rx.nrows(),
            coupling_rx.ncols(),
            h.nrows()
        )));
    }
    Ok(coupling_rx * h)
}

/// Parse a coupling matrix: first line `N`, then `N` rows of `N`
/// whitespace-separated `re,im` pairs.
pub fn parse_coupling(text: &str) -> Result<ComplexMatrix> {
    let bad = |msg: String| Error::InvalidArgument(format!("coupling file: {msg}"));
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .parse()
        .map_err(|e| bad(format!("bad dimension line: {e}")))?;
    if n == 0 {
        return Err(bad("dimension must be positive".into()));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let line = lines.next().ok_or_else(|| bad(format!("missing row {}", r + 1)))?;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(bad(format!("row {} has {} entries, expected {n}", r + 1, entries.len())));
        }
        for (c, tok) in entries.into_iter().enumerate() {
            let (re, im) = tok
                .split_once(',')
                .ok_or_else(|| bad(format!("entry `{tok}` is not `re,im`")))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("entry `{tok}`: {e}")));
            m[(r, c)] = Complex64::new(parse(re)?, parse(im)?);
        }
    }
    if lines.next().is_some() {
        return Err(bad(format!("more than {n} rows")));
    }
    Ok(m)
}

pub fn read_coupling_file(path: &Path) -> Result<ComplexMatrix> {
    parse_coupling(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| circular_gaussian(rng))
    }

    #[test]
    fn identity_and_scaled_coupling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random(&mut rng, 4, 3);
        assert_eq!(apply_coupling(&h, &ComplexMatrix::identity(4, 4)).unwrap(), h);
        let doubled = apply_coupling(&h, &(ComplexMatrix::identity(4, 4) * Complex64::new(2.0, 0.0))).unwrap();
        assert_eq!(doubled, &h * Complex64::new(2.0, 0.0));
    }

    #[test]
    fn coupling_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random(&mut rng, 5, 3);
        let g = random(&mut rng, 5, 5);
        let out = apply_coupling(&h, &g).unwrap();
        for i in 0..5 {
            for j in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..5 {
                    s += g[(i, k)] * h[(k, j)];
                }
                assert!((out[(i, j)] - s).norm() < 1e-12);
            }
        }
        assert!(apply_coupling(&h, &ComplexMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn coupling_file_parsing() {
        let m = parse_coupling("2\n1,0 0.5,-0.25\n0,0 1e-1,2\n").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.5, -0.25));
        assert_eq!(m[(1, 1)], Complex64::new(0.1, 2.0));
        assert!(parse_coupling("2\n1,0 0,0\n").is_err());
        assert!(parse_coupling("2\n1,0 0,0\n0,0 1\n").is_err());
        assert!(parse_coupling("1\n1,0 2,0\n").is_err());
    }
}
