//! Covariance algebra, reproducible Gaussian sampling, and the Jacobian `|det⊥|`.

use crate::error::{NodalError, Result};
use crate::geometry::{sphere_volume, DimPair};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenvalues in `[-CLAMP_TOL, 0)` are rounding noise and are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// Below `-NOT_PSD_TOL` (relative to the spectral radius) a matrix is rejected.
pub const NOT_PSD_TOL: f64 = 1e-8;

/// A reproducible random stream: the pair `(seed, stream_id)` fully determines the draws.
///
/// Backed by ChaCha8 with its native 64-bit stream selector, so distinct stream ids are
/// independent sequences and work can be split across threads without changing results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Deterministic child stream, e.g. one per batch or per table cell.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(1))),
        }
    }

    /// Child stream keyed by a static label, to keep independent uses apart.
    pub fn labeled(&self, label: &str) -> Self {
        let h = label
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        self.child(h)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[inline]
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Dense symmetric matrix; construction symmetrizes and rejects clearly asymmetric input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(NodalError::Shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(NodalError::Shape(format!("asymmetry {asym:e} exceeds 1e-12")));
        }
        let m = (&m + m.transpose()) * 0.5;
        Ok(Self { m })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.m.clone()).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// Kronecker product with `I_k` (each entry becomes `a_ij I_k`).
    pub fn kron_identity(&self, k: usize) -> SymmetricMatrix {
        let d = self.dim();
        let m = DMatrix::from_fn(d * k, d * k, |i, j| {
            if i % k == j % k {
                self.m[(i / k, j / k)]
            } else {
                0.0
            }
        });
        SymmetricMatrix { m }
    }
}

/// Block-diagonal assembly of symmetric blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(dim, dim);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Symmetric PSD square root `S` (with `S² = cov`) by spectral decomposition.
pub fn psd_sqrt(cov: &SymmetricMatrix) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov.as_matrix().clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    let min = eig.eigenvalues.min();
    if min < -NOT_PSD_TOL * scale {
        return Err(NodalError::NotPsd(min));
    }
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&root) * v.transpose())
}

/// A factor `F` with `F Fᵗ = cov`: Cholesky when every pivot exceeds `1e-10`, else the
/// spectral square root.
pub fn sampling_factor(cov: &SymmetricMatrix) -> Result<DMatrix<f64>> {
    if let Some(ch) = cov.as_matrix().clone().cholesky() {
        let l = ch.l();
        if l.diagonal().iter().all(|&p| p > 1e-10) {
            return Ok(l);
        }
    }
    psd_sqrt(cov)
}

/// Covariance of the trailing block given that the leading `split` coordinates vanish:
/// the Schur complement `C − B A⁻¹ Bᵗ`.
pub fn condition_on_zero(joint: &SymmetricMatrix, split: usize) -> Result<SymmetricMatrix> {
    let dim = joint.dim();
    if split == 0 || split > dim {
        return Err(NodalError::Shape(format!("split {split} outside 1..={dim}")));
    }
    let m = joint.as_matrix();
    let a = m.view((0, 0), (split, split)).into_owned();
    let b = m.view((split, 0), (dim - split, split)).into_owned();
    let c = m.view((split, split), (dim - split, dim - split)).into_owned();
    // scale-aware singularity test on the value block
    let diag_scale = a.diagonal().amax().max(f64::MIN_POSITIVE);
    let min_eig = SymmetricEigen::new(a.clone()).eigenvalues.min();
    if min_eig <= 1e-12 * diag_scale {
        return Err(NodalError::SingularBlock(min_eig));
    }
    let ch = a.cholesky().ok_or(NodalError::SingularBlock(min_eig))?;
    let x = ch.solve(&b.transpose());
    let s = c - &b * x;
    let s = (&s + s.transpose()) * 0.5;
    Ok(SymmetricMatrix { m: s })
}

/// A centred Gaussian law with a cached sampling factor.
#[derive(Debug, Clone)]
pub struct GaussianLaw {
    pub cov: SymmetricMatrix,
    pub factor: DMatrix<f64>,
}

impl GaussianLaw {
    pub fn new(cov: SymmetricMatrix) -> Result<Self> {
        let factor = sampling_factor(&cov)?;
        Ok(Self { cov, factor })
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }
}

pub fn sample_gaussian<R: Rng + ?Sized>(law: &GaussianLaw, rng: &mut R) -> DVector<f64> {
    let z = DVector::from_fn(law.dim(), |_, _| std_normal(rng));
    &law.factor * z
}

/// `|det⊥A| = sqrt(det(A Aᵗ))` for an `r×n` matrix with `r <= n`.
///
/// Computed as the product of the `R` diagonal of a row orthogonalization, which equals
/// the product of singular values without forming the Gram matrix.
pub fn odet(a: &DMatrix<f64>) -> Result<f64> {
    let (r, n) = a.shape();
    if r > n {
        return Err(NodalError::Shape(format!("odet needs r <= n, got {r}x{n}")));
    }
    let mut buf: Vec<f64> = (0..r).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| a[ij]).collect();
    Ok(odet_rows(&mut buf, r, n))
}

/// In-place `|det⊥|` of a row-major `r×n` buffer (contents are destroyed).
///
/// Modified Gram–Schmidt with one reorthogonalization pass per row.
#[inline]
pub fn odet_rows(buf: &mut [f64], r: usize, n: usize) -> f64 {
    debug_assert!(buf.len() >= r * n);
    let mut prod = 1.0;
    for i in 0..r {
        let (done, rest) = buf.split_at_mut(i * n);
        let row = &mut rest[..n];
        for _pass in 0..2 {
            for k in 0..i {
                let q = &done[k * n..(k + 1) * n];
                let dot: f64 = q.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(q).for_each(|(x, qv)| *x -= dot * qv);
            }
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        prod *= norm;
        if norm == 0.0 {
            return 0.0;
        }
        let inv = 1.0 / norm;
        row.iter_mut().for_each(|x| *x *= inv);
    }
    prod
}

/// `E|det⊥G|` for a standard Gaussian `r×n` matrix: `(2π)^{r/2} vol(S^{n−r})/vol(S^n)`.
pub fn expected_odet_standard(pair: DimPair) -> f64 {
    (2.0 * PI).powf(pair.r as f64 / 2.0) * sphere_volume(pair.n - pair.r) / sphere_volume(pair.n)
}
