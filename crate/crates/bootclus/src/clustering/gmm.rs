//! Gaussian mixture fitting by EM, with an optional uniform noise component
//! whose density is the reciprocal volume of the data's bounding hyperbox.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::pam::pam;
use crate::clustering::mds::euclidean_matrix;
use crate::error::{Error, Result};

const LOG_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GmmConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Covariance eigenvalues are floored at this factor times the mean
    /// marginal variance of the data.
    pub eigenvalue_floor_factor: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            restarts: 10,
            max_iter: 500,
            tol: 1e-8,
            eigenvalue_floor_factor: 1e-8,
        }
    }
}

/// A fitted Gaussian mixture, possibly with a uniform noise component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmFit {
    pub k: usize,
    pub q: usize,
    /// Mixing proportions of the k Gaussian components.
    pub weights: Vec<f64>,
    /// Mixing proportion of the noise component, if fitted.
    pub noise_weight: Option<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major q x q covariance matrices.
    pub covariances: Vec<Vec<f64>>,
    /// Constant density of the noise component (0 when absent).
    pub noise_density: f64,
    pub loglik: f64,
    /// Free parameter count r(k).
    pub n_params: usize,
    /// n x (k [+1 with noise]) posterior membership probabilities.
    pub responsibilities: Vec<Vec<f64>>,
    /// Log-likelihood after each EM iteration of the winning restart.
    pub loglik_trace: Vec<f64>,
    /// Set when any covariance needed eigenvalue flooring.
    pub regularized: bool,
}

impl GmmFit {
    /// Hard assignment: highest-responsibility component, noise mapped to
    /// `None`.
    pub fn hard_labels(&self) -> Vec<Option<usize>> {
        self.responsibilities
            .iter()
            .map(|r| {
                let (best, _) = r
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (c, &p)| {
                        if p > acc.1 {
                            (c, p)
                        } else {
                            acc
                        }
                    });
                if best < self.k {
                    Some(best)
                } else {
                    None
                }
            })
            .collect()
    }
}

struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    // Cached from the Cholesky factor of cov.
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    log_det: f64,
}

fn log_density(c: &Component, y: &DVector<f64>) -> f64 {
    let diff = y - &c.mean;
    let z = c.chol.solve(&diff);
    let maha = diff.dot(&z);
    -0.5 * (c.mean.len() as f64 * LOG_2PI + c.log_det + maha)
}

fn make_component(
    weight: f64,
    mean: DVector<f64>,
    mut cov: DMatrix<f64>,
    floor: f64,
    regularized: &mut bool,
) -> Result<Component> {
    let q = mean.len();
    let eig = cov.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        *regularized = true;
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            if *v < floor {
                *v = floor;
            }
        }
        let vmat = &eig.eigenvectors;
        cov = vmat * DMatrix::from_diagonal(&vals) * vmat.transpose();
        // Re-symmetrize against round-off.
        for i in 0..q {
            for j in 0..i {
                let m = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = m;
                cov[(j, i)] = m;
            }
        }
    }
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numeric("covariance not positive definite after flooring"))?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    Ok(Component {
        weight,
        mean,
        cov,
        chol,
        log_det,
    })
}

/// Fit a Gaussian mixture with k components (plus a uniform noise component
/// when `with_noise`) to n x q coordinates by EM with restarts.
pub fn gmm_noise_fit(
    y: &[Vec<f64>],
    k: usize,
    with_noise: bool,
    cfg: &GmmConfig,
    seed: u64,
) -> Result<GmmFit> {
    let n = y.len();
    if n == 0 {
        return Err(Error::config("gmm: empty input"));
    }
    let q = y[0].len();
    if k < 1 {
        return Err(Error::config("gmm: k >= 1 required"));
    }
    if n <= q + 1 {
        return Err(Error::config("gmm: n > q + 1 required"));
    }
    let points: Vec<DVector<f64>> = y.iter().map(|r| DVector::from_column_slice(r)).collect();

    // Mean marginal variance, for the eigenvalue floor.
    let mut mean_var = 0.0;
    for j in 0..q {
        let m: f64 = y.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        mean_var += y.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64;
    }
    mean_var /= q as f64;
    let floor = (cfg.eigenvalue_floor_factor * mean_var).max(1e-300);

    let noise_density = if with_noise {
        let mut volume = 1.0;
        for j in 0..q {
            let lo = y.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            let hi = y.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            volume *= (hi - lo).max(1e-12);
        }
        1.0 / volume
    } else {
        0.0
    };

    let mut best: Option<GmmFit> = None;
    let mut last_err = None;
    for restart in 0..cfg.restarts.max(1) {
        let resp0 = initial_responsibilities(y, k, with_noise, restart, seed);
        match em(&points, k, with_noise, noise_density, floor, cfg, resp0) {
            Ok(fit) => {
                if best.as_ref().map_or(true, |b| fit.loglik > b.loglik) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::numeric("all EM restarts failed")))
}

/// Restart 0 seeds from a k-medoids partition of the coordinates (with the 5%
/// largest nearest-neighbor-distance points pre-assigned to noise); later
/// restarts use random responsibilities.
fn initial_responsibilities(
    y: &[Vec<f64>],
    k: usize,
    with_noise: bool,
    restart: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let n = y.len();
    let cols = k + usize::from(with_noise);
    if restart == 0 && k >= 2 && k <= n {
        if let Ok(d) = euclidean_matrix(y) {
            if let Ok(res) = pam(&d, k) {
                let mut resp = vec![vec![0.0; cols]; n];
                for (i, l) in res.partition.labels().iter().enumerate() {
                    resp[i][l.unwrap()] = 1.0;
                }
                if with_noise {
                    let mut nn: Vec<(usize, f64)> = (0..n)
                        .map(|i| {
                            let m = (0..n)
                                .filter(|&j| j != i)
                                .map(|j| d.get(i, j))
                                .fold(f64::INFINITY, f64::min);
                            (i, m)
                        })
                        .collect();
                    nn.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                    let n_noise = (n as f64 * 0.05).ceil() as usize;
                    for &(i, _) in nn.iter().take(n_noise) {
                        for c in 0..cols {
                            resp[i][c] = 0.0;
                        }
                        resp[i][k] = 1.0;
                    }
                }
                // Soften so no component starts completely empty.
                for r in resp.iter_mut() {
                    let eps = 0.05 / cols as f64;
                    let norm: f64 = r.iter().map(|p| p * 0.95 + eps).sum();
                    for p in r.iter_mut() {
                        *p = (*p * 0.95 + eps) / norm;
                    }
                }
                return resp;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E3779B97F4A7C15));
    (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = r.iter().sum();
            for p in r.iter_mut() {
                *p /= s;
            }
            r
        })
        .collect()
}

fn em(
    points: &[DVector<f64>],
    k: usize,
    with_noise: bool,
    noise_density: f64,
    floor: f64,
    cfg: &GmmConfig,
    mut resp: Vec<Vec<f64>>,
) -> Result<GmmFit> {
    let n = points.len();
    let q = points[0].len();
    let cols = k + usize::from(with_noise);
    let mut regularized = false;
    let mut trace = Vec::new();
    let mut noise_weight = 0.0;
    let mut components: Vec<Component> = Vec::new();

    for _iter in 0..cfg.max_iter {
        // M-step.
        components.clear();
        for c in 0..k {
            let wsum: f64 = resp.iter().map(|r| r[c]).sum();
            if wsum < 1e-10 {
                return Err(Error::numeric(format!("component {} collapsed", c)));
            }
            let mut mean = DVector::zeros(q);
            for (r, p) in resp.iter().zip(points) {
                mean += p * r[c];
            }
            mean /= wsum;
            let mut cov = DMatrix::zeros(q, q);
            for (r, p) in resp.iter().zip(points) {
                let diff = p - &mean;
                cov += (&diff * diff.transpose()) * r[c];
            }
            cov /= wsum;
            components.push(make_component(wsum / n as f64, mean, cov, floor, &mut regularized)?);
        }
        if with_noise {
            noise_weight = resp.iter().map(|r| r[k]).sum::<f64>() / n as f64;
        }

        // E-step and log-likelihood.
        let mut loglik = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut logs: Vec<f64> = components
                .iter()
                .map(|c| c.weight.max(1e-300).ln() + log_density(c, p))
                .collect();
            if with_noise {
                logs.push(noise_weight.max(1e-300).ln() + noise_density.max(1e-300).ln());
            }
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logs.iter().map(|l| (l - m).exp()).sum();
            let log_total = m + sum_exp.ln();
            loglik += log_total;
            for c in 0..cols {
                resp[i][c] = (logs[c] - log_total).exp();
            }
            let s: f64 = resp[i].iter().sum();
            for v in resp[i].iter_mut() {
                *v /= s;
            }
        }
        if !loglik.is_finite() {
            return Err(Error::numeric("non-finite log-likelihood"));
        }
        let converged = trace
            .last()
            .map_or(false, |&prev: &f64| (loglik - prev).abs() / (1.0 + loglik.abs()) < cfg.tol);
        trace.push(loglik);
        if converged {
            break;
        }
    }

    let n_params = (k - 1) + k * q + k * q * (q + 1) / 2 + usize::from(with_noise);
    Ok(GmmFit {
        k,
        q,
        weights: components.iter().map(|c| c.weight).collect(),
        noise_weight: with_noise.then_some(noise_weight),
        means: components.iter().map(|c| c.mean.iter().cloned().collect()).collect(),
        covariances: components
            .iter()
            .map(|c| c.cov.iter().cloned().collect())
            .collect(),
        noise_density,
        loglik: *trace.last().unwrap(),
        n_params,
        responsibilities: resp,
        loglik_trace: trace,
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_sample(rng: &mut ChaCha8Rng, n: usize, center: &[f64], sd: f64) -> Vec<Vec<f64>> {
        use rand_distr::{Distribution, Normal};
        let d = Normal::new(0.0, sd).unwrap();
        (0..n)
            .map(|_| center.iter().map(|&c| c + d.sample(rng)).collect())
            .collect()
    }

    #[test]
    fn single_gaussian_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = normal_sample(&mut rng, 200, &[1.0, -2.0], 1.3);
        let fit = gmm_noise_fit(&y, 1, false, &GmmConfig::default(), 42).unwrap();
        let n = y.len() as f64;
        // ML mean and covariance.
        let mut mean = [0.0; 2];
        for r in &y {
            mean[0] += r[0] / n;
            mean[1] += r[1] / n;
        }
        assert!((fit.means[0][0] - mean[0]).abs() < 1e-8);
        assert!((fit.means[0][1] - mean[1]).abs() < 1e-8);
        let mut cov = [[0.0; 2]; 2];
        for r in &y {
            for a in 0..2 {
                for b in 0..2 {
                    cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / n;
                }
            }
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let closed_form = -0.5 * n * (2.0 * LOG_2PI + det.ln() + 2.0);
        assert!((fit.loglik - closed_form).abs() < 1e-6 * n);
        assert_eq!(fit.n_params, 0 + 2 + 3);
    }

    #[test]
    fn two_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut y = normal_sample(&mut rng, 60, &[0.0, 0.0], 0.3);
        y.extend(normal_sample(&mut rng, 60, &[8.0, 8.0], 0.3));
        let fit = gmm_noise_fit(&y, 2, false, &GmmConfig::default(), 7).unwrap();
        for r in &fit.responsibilities {
            let m = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(m > 0.99);
        }
        let mut centers: Vec<f64> = fit.means.iter().map(|m| m[0] + m[1]).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(centers[0].abs() < 0.5);
        assert!((centers[1] - 16.0).abs() < 0.5);
    }

    #[test]
    fn loglik_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = normal_sample(&mut rng, 80, &[0.0, 0.0, 0.0], 1.0);
        let fit = gmm_noise_fit(&y, 3, true, &GmmConfig::default(), 5).unwrap();
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        for r in &fit.responsibilities {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_parameter_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = normal_sample(&mut rng, 50, &[0.0, 0.0], 1.0);
        let fit = gmm_noise_fit(&y, 2, true, &GmmConfig::default(), 1).unwrap();
        // (k-1) + kq + k q(q+1)/2 + 1
        assert_eq!(fit.n_params, 1 + 4 + 6 + 1);
        assert!(fit.noise_density > 0.0);
        let total = fit.weights.iter().sum::<f64>() + fit.noise_weight.unwrap();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn row_order_permutation_invariant_loglik() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut y = normal_sample(&mut rng, 40, &[0.0, 0.0], 0.4);
        y.extend(normal_sample(&mut rng, 40, &[5.0, 5.0], 0.4));
        let fit1 = gmm_noise_fit(&y, 2, false, &GmmConfig::default(), 9).unwrap();
        let mut shuffled = y.clone();
        shuffled.reverse();
        let fit2 = gmm_noise_fit(&shuffled, 2, false, &GmmConfig::default(), 9).unwrap();
        assert!((fit1.loglik - fit2.loglik).abs() < 1e-5);
    }

    #[test]
    fn rejects_tiny_n() {
        let y = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]];
        assert!(gmm_noise_fit(&y, 1, false, &GmmConfig::default(), 0).is_err());
    }
}
