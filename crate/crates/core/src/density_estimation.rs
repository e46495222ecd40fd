//! Kernel density estimation with a Gaussian kernel, in one and two
//! dimensions, with matrix bandwidths and reference-rule selection. Feeds
//! the plug-in crossing estimators.

use crate::error::{Error, Result};
use crate::psp_sim::GridTrajectory;

/// Symmetric positive-definite bandwidth matrix with its Cholesky factor,
/// so that kernel arguments B^{-1/2}(x - z) reduce to a triangular solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth<const D: usize> {
    matrix: [[f64; D]; D],
    chol: [[f64; D]; D],
    sqrt_det: f64,
}

impl<const D: usize> Bandwidth<D> {
    pub fn from_matrix(matrix: [[f64; D]; D]) -> Result<Self> {
        for i in 0..D {
            for j in 0..i {
                let scale = matrix[i][i].abs().max(matrix[j][j].abs()).max(1.0);
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::SingularBandwidth);
                }
            }
        }
        let mut chol = [[0.0; D]; D];
        for j in 0..D {
            let diag = matrix[j][j] - chol[j][..j].iter().map(|c| c * c).sum::<f64>();
            // The relative floor keeps rank-deficient matrices from slipping
            // through on rounding residue.
            if !(diag > 1e-12 * matrix[j][j].abs()) || !diag.is_finite() {
                return Err(Error::SingularBandwidth);
            }
            chol[j][j] = diag.sqrt();
            for i in j + 1..D {
                let dot: f64 = chol[i][..j]
                    .iter()
                    .zip(&chol[j][..j])
                    .map(|(a, b)| a * b)
                    .sum();
                chol[i][j] = (matrix[i][j] - dot) / chol[j][j];
            }
        }
        let sqrt_det = (0..D).map(|j| chol[j][j]).product();
        Ok(Bandwidth {
            matrix,
            chol,
            sqrt_det,
        })
    }

    pub fn matrix(&self) -> &[[f64; D]; D] {
        &self.matrix
    }

    /// sqrt(det B); in one dimension this is the scalar bandwidth h.
    pub fn scale(&self) -> f64 {
        self.sqrt_det
    }

    /// Squared Mahalanobis norm u' B^{-1} u via the Cholesky factor.
    fn quad_form(&self, u: &[f64; D]) -> f64 {
        let mut w = [0.0; D];
        for i in 0..D {
            let dot: f64 = self.chol[i][..i]
                .iter()
                .zip(&w[..i])
                .map(|(c, v)| c * v)
                .sum();
            w[i] = (u[i] - dot) / self.chol[i][i];
        }
        w.iter().map(|c| c * c).sum()
    }
}

impl Bandwidth<1> {
    pub fn scalar(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::SingularBandwidth);
        }
        Bandwidth::from_matrix([[h * h]])
    }
}

/// Bandwidth selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethod {
    /// 0.9 min(sd, IQR/1.34) n^{-1/5}, one-dimensional data only.
    Silverman1d,
    /// (4/(d+2))^{2/(d+4)} n^{-2/(d+4)} times the sample covariance.
    NormalReference,
}

/// Linear-interpolation quantile of sorted values (the definition most
/// statistical software uses for boxplots).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let idx = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = idx - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn sample_covariance<const D: usize>(samples: &[[f64; D]]) -> [[f64; D]; D] {
    let n = samples.len();
    let mut mean = [0.0; D];
    for z in samples {
        for i in 0..D {
            mean[i] += z[i];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = [[0.0; D]; D];
    for z in samples {
        for i in 0..D {
            for j in 0..D {
                cov[i][j] += (z[i] - mean[i]) * (z[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for c in row.iter_mut() {
            *c /= (n - 1) as f64;
        }
    }
    cov
}

/// Selects a bandwidth for the sample set by the given rule.
///
/// Degenerate spread (all samples equal, or 2D samples on a line) is an
/// error: jitter the data or handle the atom exactly instead of smoothing.
pub fn select_bandwidth<const D: usize>(
    samples: &[[f64; D]],
    method: BandwidthMethod,
) -> Result<Bandwidth<D>> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSamples(
            "bandwidth selection needs at least 2 samples".into(),
        ));
    }
    let n = samples.len() as f64;
    match method {
        BandwidthMethod::Silverman1d => {
            if D != 1 {
                return Err(Error::InvalidParameter(
                    "silverman_1d applies to one-dimensional data".into(),
                ));
            }
            let mut xs: Vec<f64> = samples.iter().map(|z| z[0]).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
            let sd = sample_covariance(samples)[0][0].sqrt();
            let iqr = quantile(&xs, 0.75) - quantile(&xs, 0.25);
            let spread = match (sd > 0.0, iqr > 0.0) {
                (true, true) => sd.min(iqr / 1.34),
                (true, false) => sd,
                _ => {
                    return Err(Error::DegenerateSamples(
                        "zero sample spread; jitter the data or treat the atom exactly".into(),
                    ))
                }
            };
            let h = 0.9 * spread * n.powf(-0.2);
            let mut matrix = [[0.0; D]; D];
            matrix[0][0] = h * h;
            Bandwidth::from_matrix(matrix)
        }
        BandwidthMethod::NormalReference => {
            let d = D as f64;
            let factor = (4.0 / (d + 2.0)).powf(2.0 / (d + 4.0)) * n.powf(-2.0 / (d + 4.0));
            let mut matrix = sample_covariance(samples);
            for row in &mut matrix {
                for c in row.iter_mut() {
                    *c *= factor;
                }
            }
            Bandwidth::from_matrix(matrix).map_err(|_| {
                Error::DegenerateSamples(
                    "singular sample covariance; jitter the data or drop the flat coordinate"
                        .into(),
                )
            })
        }
    }
}

/// Gaussian kernel density estimate over a fixed sample set.
#[derive(Debug, Clone)]
pub struct DensityEstimate<const D: usize> {
    samples: Vec<[f64; D]>,
    bandwidth: Bandwidth<D>,
}

impl<const D: usize> DensityEstimate<D> {
    pub fn new(samples: Vec<[f64; D]>, bandwidth: Bandwidth<D>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(DensityEstimate { samples, bandwidth })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn bandwidth(&self) -> &Bandwidth<D> {
        &self.bandwidth
    }

    pub fn samples(&self) -> &[[f64; D]] {
        &self.samples
    }

    /// (1/(n sqrt(det B))) sum of K(B^{-1/2}(x - z)) over the samples, with
    /// K the standard Gaussian density in D dimensions.
    pub fn eval(&self, x: &[f64; D]) -> f64 {
        let norm = (2.0 * std::f64::consts::PI).powf(-(D as f64) / 2.0);
        let mut acc = 0.0;
        for z in &self.samples {
            let mut u = [0.0; D];
            for i in 0..D {
                u[i] = x[i] - z[i];
            }
            acc += (-0.5 * self.bandwidth.quad_form(&u)).exp();
        }
        norm * acc / (self.n() as f64 * self.bandwidth.scale())
    }
}

/// Density of X(h_j) estimated from the j-th sample of every trajectory.
pub fn time_slice_density<const D: usize>(
    dataset: &[GridTrajectory<D>],
    j: usize,
    bandwidth: Bandwidth<D>,
) -> Result<DensityEstimate<D>> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    for traj in dataset {
        if traj.n_points() != first.n_points() || traj.horizon() != first.horizon() {
            return Err(Error::GridMismatch(
                "time-slice density needs a common grid across trajectories".into(),
            ));
        }
    }
    if j >= first.n_points() {
        return Err(Error::InvalidParameter(format!(
            "slice index {j} out of range for {} grid points",
            first.n_points()
        )));
    }
    let samples: Vec<[f64; D]> = dataset.iter().map(|t| t.samples()[j]).collect();
    DensityEstimate::new(samples, bandwidth)
}

/// Collects the j-th sample of every trajectory, the raw slice behind
/// [`time_slice_density`], for estimators that select bandwidths per slice.
pub fn time_slice_samples<const D: usize>(
    dataset: &[GridTrajectory<D>],
    j: usize,
) -> Vec<[f64; D]> {
    dataset.iter().map(|t| t.samples()[j]).collect()
}
