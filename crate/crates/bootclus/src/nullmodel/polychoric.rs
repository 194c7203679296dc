//! Two-step polychoric correlation estimation: thresholds are fixed from the
//! marginals, then the latent correlation maximizes the bivariate-normal
//! likelihood of the contingency table.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Integration limit beyond which the standard normal tail is negligible.
const TAIL: f64 = 8.5;
/// Search interval bound for the latent correlation.
pub const RHO_BOUND: f64 = 0.999;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    if x <= -TAIL {
        0.0
    } else if x >= TAIL {
        1.0
    } else {
        std_normal().cdf(x)
    }
}

pub fn norm_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.7554044083550030,
    -0.6178762444026438,
    -0.4580167776572274,
    -0.2816035507792589,
    -0.0950125098376374,
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_WEIGHTS: [f64; 16] = [
    0.0271524594117541,
    0.0622535239386479,
    0.0951585116824928,
    0.1246289712555339,
    0.1495959888165767,
    0.1691565193950025,
    0.1826034150449236,
    0.1894506104550685,
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// All cell probabilities of the bivariate normal over the rectangle grid
/// defined by interior thresholds `ta` x `tb` (tails implied), to absolute
/// accuracy well below 1e-10.
///
/// Each cell is `P(ta_lo < Z1 <= ta_hi, tb_lo < Z2 <= tb_hi)`, computed by
/// composite Gauss-Legendre quadrature of
/// `phi(x) * (Phi((tb_hi - rho x)/s) - Phi((tb_lo - rho x)/s))` over x.
pub fn cell_probabilities(ta: &[f64], tb: &[f64], rho: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - rho * rho).max(1e-12).sqrt();
    let ha = ta.len() + 1;
    let hb = tb.len() + 1;
    let bounds_a: Vec<f64> = std::iter::once(-TAIL)
        .chain(ta.iter().map(|&t| t.clamp(-TAIL, TAIL)))
        .chain(std::iter::once(TAIL))
        .collect();
    let bounds_b: Vec<f64> = std::iter::once(f64::NEG_INFINITY)
        .chain(tb.iter().cloned())
        .chain(std::iter::once(f64::INFINITY))
        .collect();
    let mut out = vec![vec![0.0; hb]; ha];
    for i in 0..ha {
        let (lo, hi) = (bounds_a[i], bounds_a[i + 1]);
        if hi <= lo {
            continue;
        }
        // Segments of width <= 0.25 keep the 16-point rule far below 1e-10.
        let n_seg = ((hi - lo) / 0.25).ceil() as usize;
        for seg in 0..n_seg {
            let a = lo + (hi - lo) * seg as f64 / n_seg as f64;
            let b = lo + (hi - lo) * (seg + 1) as f64 / n_seg as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (node, weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                let x = mid + half * node;
                let w = weight * half * phi(x);
                let mut prev = 0.0;
                for (j, cell) in out[i].iter_mut().enumerate() {
                    let ub = bounds_b[j + 1];
                    let cdf = if ub.is_infinite() {
                        if ub > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        norm_cdf((ub - rho * x) / s)
                    };
                    *cell += w * (cdf - prev);
                    prev = cdf;
                }
            }
        }
    }
    out
}

/// Interior thresholds reproducing the observed marginal frequencies:
/// `u_g = Phi^{-1}(cumulative frequency)`.
pub fn thresholds_from_marginals(counts: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::data("thresholds: empty marginal"));
    }
    let mut cum = 0.0;
    let mut out = Vec::with_capacity(counts.len().saturating_sub(1));
    for &c in &counts[..counts.len() - 1] {
        cum += c;
        let p = (cum / total).clamp(1e-12, 1.0 - 1e-12);
        out.push(norm_quantile(p));
    }
    Ok(out)
}

/// Maximize the contingency-table likelihood over the latent correlation,
/// thresholds held fixed. The search interval is [-0.999, 0.999].
pub fn polychoric_correlation(
    table: &[Vec<f64>],
    thresholds_a: &[f64],
    thresholds_b: &[f64],
) -> Result<f64> {
    let ha = table.len();
    let hb = table.first().map_or(0, |r| r.len());
    if ha != thresholds_a.len() + 1 || table.iter().any(|r| r.len() != thresholds_b.len() + 1) {
        return Err(Error::config("polychoric: table shape does not match thresholds"));
    }
    let total: f64 = table.iter().flatten().sum();
    if total <= 0.0 || table.iter().flatten().any(|&c| c < 0.0) {
        return Err(Error::data("polychoric: table must be nonnegative with positive total"));
    }
    let row_active = table.iter().filter(|r| r.iter().sum::<f64>() > 0.0).count();
    let col_active = (0..hb)
        .filter(|&j| table.iter().map(|r| r[j]).sum::<f64>() > 0.0)
        .count();
    if row_active < 2 || col_active < 2 {
        return Err(Error::data(
            "polychoric: correlation undefined for a table concentrated in one row or column",
        ));
    }

    let loglik = |rho: f64| -> f64 {
        let probs = cell_probabilities(thresholds_a, thresholds_b, rho);
        let mut ll = 0.0;
        for (row, prow) in table.iter().zip(&probs) {
            for (&n, &p) in row.iter().zip(prow) {
                if n > 0.0 {
                    ll += n * p.max(1e-300).ln();
                }
            }
        }
        ll
    };

    // Golden-section maximization; the profile likelihood in rho is unimodal.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-RHO_BOUND, RHO_BOUND);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = loglik(x1);
    let mut f2 = loglik(x2);
    while hi - lo > 1e-7 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = loglik(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = loglik(x1);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Contingency table of two level-index columns (values in 0..h).
pub fn contingency_table(xa: &[usize], xb: &[usize], ha: usize, hb: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; hb]; ha];
    for (&a, &b) in xa.iter().zip(xb) {
        table[a][b] += 1.0;
    }
    table
}
