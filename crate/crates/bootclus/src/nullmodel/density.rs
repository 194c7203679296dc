//! Gaussian kernel density estimation constrained to be unimodal: the
//! bandwidth starts at Silverman's rule and grows in steps of one twentieth
//! of the initial bandwidth until the estimate has a single mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nullmodel::polychoric::{norm_cdf, phi};

const GRID_POINTS: usize = 512;

/// A fitted unimodal kernel density, evaluable and invertible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnimodalDensity {
    points: Vec<f64>,
    bandwidth: f64,
    /// Number of bandwidth enlargement steps that were needed.
    pub enlargement_steps: usize,
}

fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |p: f64| {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (idx - lo as f64)
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if spread <= 0.0 {
        return Err(Error::data("density fit: sample has zero spread"));
    }
    Ok(0.9 * spread * n.powf(-0.2))
}

fn mode_count(points: &[f64], bandwidth: f64) -> usize {
    let lo = points.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * bandwidth;
    let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bandwidth;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let dens: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            let x = lo + i as f64 * step;
            points.iter().map(|&p| phi((x - p) / bandwidth)).sum::<f64>()
        })
        .collect();
    let mut modes = 0;
    let mut rising = false;
    for w in dens.windows(2) {
        if w[1] > w[0] + 1e-12 * w[0].max(1e-300) {
            rising = true;
        } else if w[1] < w[0] - 1e-12 * w[0].max(1e-300) {
            if rising {
                modes += 1;
            }
            rising = false;
        }
    }
    if rising {
        modes += 1; // mode at the right edge (should not happen with 3h margin)
    }
    modes
}

impl UnimodalDensity {
    /// Fit to a real sample of at least 10 observations.
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 10 {
            return Err(Error::data(format!(
                "density fit: insufficient data ({} < 10 observations)",
                values.len()
            )));
        }
        let initial = silverman_bandwidth(values)?;
        let mut bandwidth = initial;
        let mut steps = 0;
        while mode_count(values, bandwidth) > 1 {
            bandwidth += initial / 20.0;
            steps += 1;
            if steps > 10_000 {
                return Err(Error::numeric("density fit: bandwidth enlargement did not terminate"));
            }
        }
        Ok(UnimodalDensity {
            points: values.to_vec(),
            bandwidth,
            enlargement_steps: steps,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let n = self.points.len() as f64;
        self.points
            .iter()
            .map(|&p| phi((x - p) / self.bandwidth))
            .sum::<f64>()
            / (n * self.bandwidth)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.points.len() as f64;
        self.points
            .iter()
            .map(|&p| norm_cdf((x - p) / self.bandwidth))
            .sum::<f64>()
            / n
    }

    /// Inverse cdf by bisection.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(1e-15, 1.0 - 1e-15);
        let mut lo = self.points.iter().cloned().fold(f64::INFINITY, f64::min) - 10.0 * self.bandwidth;
        let mut hi =
            self.points.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 10.0 * self.bandwidth;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn normal_sample_needs_no_enlargement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dist = Normal::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
        let fit = UnimodalDensity::fit(&values).unwrap();
        assert_eq!(fit.enlargement_steps, 0);
    }

    #[test]
    fn bimodal_sample_gets_enlarged_until_unimodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d1 = Normal::new(0.0, 0.5).unwrap();
        let d2 = Normal::new(10.0, 0.5).unwrap();
        let mut values: Vec<f64> = (0..200).map(|_| d1.sample(&mut rng)).collect();
        values.extend((0..200).map(|_| d2.sample(&mut rng)));
        let fit = UnimodalDensity::fit(&values).unwrap();
        assert!(fit.enlargement_steps > 0);
        assert_eq!(mode_count(&values, fit.bandwidth()), 1);
    }

    #[test]
    fn integrates_to_one_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dist = Normal::new(2.0, 1.5).unwrap();
        let values: Vec<f64> = (0..300).map(|_| dist.sample(&mut rng)).collect();
        let fit = UnimodalDensity::fit(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 10.0 * fit.bandwidth();
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 10.0 * fit.bandwidth();
        let m = 20_000;
        let step = (hi - lo) / m as f64;
        let integral: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                w * fit.pdf(lo + i as f64 * step)
            })
            .sum::<f64>()
            * step;
        assert!((integral - 1.0).abs() < 1e-6, "integral = {}", integral);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dist = Normal::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..200).map(|_| dist.sample(&mut rng)).collect();
        let fit = UnimodalDensity::fit(&values).unwrap();
        for u in [0.05, 0.3, 0.5, 0.77, 0.95] {
            let x = fit.quantile(u);
            assert!((fit.cdf(x) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let values = vec![1.0; 9];
        let err = UnimodalDensity::fit(&values).unwrap_err();
        assert!(err.to_string().contains("insufficient data"));
    }
}
