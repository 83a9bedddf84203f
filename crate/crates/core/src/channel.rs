//! Port geometry, spatial correlation and correlated Rayleigh channel draws.

use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rates::GainQuad;
use crate::specfun::bessel_j0;

/// Linear fluid-antenna geometry: `n_ports` ports evenly spread over
/// `width` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortGrid {
    n_ports: usize,
    width: f64,
}

impl PortGrid {
    pub fn new(n_ports: usize, width: f64) -> Result<Self> {
        if n_ports == 0 {
            return Err(Error::Config("port count must be at least 1".into()));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Config(format!("FAS width must be positive, got {width}")));
        }
        Ok(Self { n_ports, width })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Normalized distance between adjacent ports; zero for a single port.
    pub fn spacing(&self) -> f64 {
        if self.n_ports < 2 {
            0.0
        } else {
            self.width / (self.n_ports - 1) as f64
        }
    }
}

/// Jakes spatial correlation between ports, `J0(2*pi*(n-n')*spacing)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub fn build_correlation(grid: &PortGrid) -> Result<CorrelationMatrix> {
    let n = grid.n_ports();
    let spacing = grid.spacing();
    // Toeplitz: one J0 evaluation per lag.
    let mut lags = Vec::with_capacity(n);
    lags.push(1.0);
    for lag in 1..n {
        lags.push(bessel_j0(2.0 * PI * lag as f64 * spacing)?);
    }
    Ok(CorrelationMatrix(DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)])))
}

/// Square-root factor `A = U * Theta^(1/2)` of the correlation matrix plus
/// the per-link scales `sigma_1`, `sigma_2`.
#[derive(Debug, Clone)]
pub struct ChannelFactor {
    sigma: [f64; 2],
    factor: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    clamped: usize,
    negative_mass: f64,
}

impl ChannelFactor {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sigma(&self) -> [f64; 2] {
        self.sigma
    }

    /// Eigenvalues after clamping at zero.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Number of eigenvalues that were negative before clamping.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    /// Sum of the magnitudes of the clamped eigenvalues.
    pub fn negative_mass(&self) -> f64 {
        self.negative_mass
    }
}

pub fn factor(corr: &CorrelationMatrix, sigma1: f64, sigma2: f64) -> Result<ChannelFactor> {
    for s in [sigma1, sigma2] {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Config(format!("channel scale must be finite and >= 0, got {s}")));
        }
    }
    let sigma = corr.matrix();
    let n = sigma.nrows();
    let eig = sigma.clone().try_symmetric_eigen(1e-15, 10_000).ok_or_else(|| {
        let diag = sigma.diagonal();
        Error::EigenNonConvergence {
            n,
            min_diag: diag.min(),
            max_diag: diag.max(),
        }
    })?;

    let recon = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose();
    let residual = (recon - sigma).norm();
    if residual > 1e-8 * n as f64 {
        return Err(Error::domain(format!(
            "eigendecomposition residual {residual:e} exceeds {:e}",
            1e-8 * n as f64
        )));
    }

    let mut clamped = 0;
    let mut negative_mass = 0.0;
    let eigenvalues = eig.eigenvalues.map(|v| {
        if v < 0.0 {
            clamped += 1;
            negative_mass -= v;
            0.0
        } else {
            v
        }
    });
    if clamped > 0 {
        log::debug!("clamped {clamped} negative eigenvalue(s), total mass {negative_mass:e}");
    }

    let mut factor = eig.eigenvectors;
    for (mut col, &v) in factor.column_iter_mut().zip(eigenvalues.iter()) {
        col *= v.sqrt();
    }
    Ok(ChannelFactor {
        sigma: [sigma1, sigma2],
        factor,
        eigenvalues,
        clamped,
        negative_mass,
    })
}

/// One fading draw: Bob-side port vectors and Eve-side scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h1: Vec<Complex64>,
    pub h2: Vec<Complex64>,
    pub g1: Complex64,
    pub g2: Complex64,
}

impl ChannelRealization {
    pub fn new(h1: Vec<Complex64>, h2: Vec<Complex64>, g1: Complex64, g2: Complex64) -> Result<Self> {
        if h1.is_empty() || h1.len() != h2.len() {
            return Err(Error::Config(format!(
                "port vectors must be non-empty and equal length, got {} and {}",
                h1.len(),
                h2.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(h1.iter().chain(&h2).all(finite) && finite(&g1) && finite(&g2)) {
            return Err(Error::domain("channel coefficients must be finite"));
        }
        Ok(Self { h1, h2, g1, g2 })
    }

    pub fn n_ports(&self) -> usize {
        self.h1.len()
    }

    /// Squared magnitudes seen through port `port` (zero-based).
    pub fn gains(&self, port: usize) -> GainQuad {
        GainQuad::from_raw(
            self.h1[port].norm_sqr(),
            self.h2[port].norm_sqr(),
            self.g1.norm_sqr(),
            self.g2.norm_sqr(),
        )
    }

    /// Same Bob-side channels with the Eve-side gains replaced.
    pub fn with_eve(&self, g1: Complex64, g2: Complex64) -> Self {
        Self {
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            g1,
            g2,
        }
    }

    /// Hash of the exact bit patterns of every coefficient.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        for z in self.h1.iter().chain(&self.h2).chain([&self.g1, &self.g2]) {
            z.re.to_bits().hash(&mut hasher);
            z.im.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }
}

/// Circularly-symmetric complex Gaussian with unit total variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `h_k = sigma_k * A * x_k` and i.i.d. unit-variance Eve gains.
///
/// Draw order is fixed: `x_1`, `x_2`, `g_1`, `g_2`.
pub fn sample_realization<R: Rng + ?Sized>(factor: &ChannelFactor, rng: &mut R) -> ChannelRealization {
    let n = factor.dim();
    let a = factor.matrix();
    let mut draw_port_vector = |scale: f64| {
        let x: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, xj) in x.iter().enumerate() {
                    acc += xj * a[(i, j)];
                }
                acc * scale
            })
            .collect::<Vec<_>>()
    };
    let h1 = draw_port_vector(factor.sigma[0]);
    let h2 = draw_port_vector(factor.sigma[1]);
    let g1 = complex_normal(rng);
    let g2 = complex_normal(rng);
    ChannelRealization { h1, h2, g1, g2 }
}

/// Independent random stream for realization `index` under `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Normalized uncertainty of the Alice-Eve channel estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiModel {
    delta: f64,
}

impl CsiModel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::domain(format!("CSI uncertainty must be >= 0, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn perfect() -> Self {
        Self { delta: 0.0 }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Returns the estimate `g_hat = g - err` where `err` is uniform on the disk
/// of radius `delta * |g|`.
pub fn apply_csi_error<R: Rng + ?Sized>(g: Complex64, model: &CsiModel, rng: &mut R) -> Complex64 {
    if model.delta == 0.0 {
        return g;
    }
    let u: f64 = rng.random();
    let phase: f64 = rng.random::<f64>() * 2.0 * PI;
    let radius = model.delta * g.norm() * u.sqrt();
    g - Complex64::from_polar(radius, phase)
}
