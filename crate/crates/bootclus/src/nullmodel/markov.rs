//! Markov-chain null model for categorical dosage series: separate
//! transition matrices for the second and third prescription days, all later
//! prescription days, and normal days, plus an empirical bag of missingness
//! patterns drawn independently of the dosages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::CategoricalSeriesDataset;
use crate::error::{Error, Result};

/// Which transition matrix governs a step into a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SecondPrescription,
    ThirdPrescription,
    LaterPrescription,
    Normal,
}

/// Days are 1-indexed; prescription days are 1, 1+period, 1+2*period, ...
/// Day 1 has no incoming transition (it defines the initial distribution).
pub fn regime_for_day(t: usize, period: usize) -> Regime {
    debug_assert!(t >= 2);
    if (t - 1) % period != 0 {
        Regime::Normal
    } else if t == period + 1 {
        Regime::SecondPrescription
    } else if t == 2 * period + 1 {
        Regime::ThirdPrescription
    } else {
        Regime::LaterPrescription
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovDosageParams {
    pub h: usize,
    pub t_len: usize,
    pub prescription_period: usize,
    /// Empirical day-1 dosage distribution.
    pub initial: Vec<f64>,
    /// Row-stochastic h x h matrices, row-major.
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub plater: Vec<f64>,
    pub pnormal: Vec<f64>,
    /// Observed length-T missingness indicator patterns (true = missing).
    pub missingness: Vec<Vec<bool>>,
}

impl MarkovDosageParams {
    pub fn matrix(&self, regime: Regime) -> &[f64] {
        match regime {
            Regime::SecondPrescription => &self.p2,
            Regime::ThirdPrescription => &self.p3,
            Regime::LaterPrescription => &self.plater,
            Regime::Normal => &self.pnormal,
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.h;
        if self.initial.len() != h || (self.initial.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::data("markov params: initial distribution must sum to 1"));
        }
        for m in [&self.p2, &self.p3, &self.plater, &self.pnormal] {
            if m.len() != h * h {
                return Err(Error::data("markov params: matrix shape mismatch"));
            }
            for row in m.chunks(h) {
                if row.iter().any(|&x| x < 0.0) {
                    return Err(Error::data("markov params: negative transition probability"));
                }
                if (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::data("markov params: row does not sum to 1"));
                }
            }
        }
        if self.missingness.is_empty()
            || self.missingness.iter().any(|p| p.len() != self.t_len)
        {
            return Err(Error::data("markov params: missingness pattern length mismatch"));
        }
        Ok(())
    }
}

/// Estimate all parameters by empirical counts over observed (non-missing)
/// consecutive pairs. Rows with no observed transitions become identity
/// rows, each reported in the warnings.
pub fn estimate_markov(data: &CategoricalSeriesDataset) -> Result<(MarkovDosageParams, Vec<String>)> {
    let h = data.h();
    let period = data.prescription_period();
    let t_len = data.t_len();

    let mut counts = [
        vec![0.0; h * h], // P2
        vec![0.0; h * h], // P3
        vec![0.0; h * h], // Plater
        vec![0.0; h * h], // Pnormal
    ];
    let regime_index = |r: Regime| match r {
        Regime::SecondPrescription => 0,
        Regime::ThirdPrescription => 1,
        Regime::LaterPrescription => 2,
        Regime::Normal => 3,
    };

    let mut initial = vec![0.0; h];
    let mut missingness = Vec::with_capacity(data.n());
    for series in data.series() {
        if let Some(c) = series[0] {
            initial[c - 1] += 1.0;
        }
        missingness.push(series.iter().map(|v| v.is_none()).collect::<Vec<bool>>());
        for t in 2..=t_len {
            if let (Some(from), Some(to)) = (series[t - 2], series[t - 1]) {
                let r = regime_index(regime_for_day(t, period));
                counts[r][(from - 1) * h + (to - 1)] += 1.0;
            }
        }
    }

    let init_total: f64 = initial.iter().sum();
    if init_total == 0.0 {
        return Err(Error::data("markov estimation: no observed initial dosages"));
    }
    for v in initial.iter_mut() {
        *v /= init_total;
    }

    let mut warnings = Vec::new();
    let names = ["P2", "P3", "Plater", "Pnormal"];
    let mut matrices = Vec::with_capacity(4);
    for (m, name) in counts.into_iter().zip(names) {
        let mut out = vec![0.0; h * h];
        for (row_idx, row) in m.chunks(h).enumerate() {
            let total: f64 = row.iter().sum();
            if total == 0.0 {
                out[row_idx * h + row_idx] = 1.0;
                warnings.push(format!(
                    "{}: no observed transitions from dosage {}; identity row substituted",
                    name,
                    row_idx + 1
                ));
            } else {
                for (col, &c) in row.iter().enumerate() {
                    out[row_idx * h + col] = c / total;
                }
            }
        }
        matrices.push(out);
    }
    let pnormal = matrices.pop().unwrap();
    let plater = matrices.pop().unwrap();
    let p3 = matrices.pop().unwrap();
    let p2 = matrices.pop().unwrap();

    let params = MarkovDosageParams {
        h,
        t_len,
        prescription_period: period,
        initial,
        p2,
        p3,
        plater,
        pnormal,
        missingness,
    };
    params.validate()?;
    Ok((params, warnings))
}

fn draw_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Sample n series of the params' length: initial dosage, day-appropriate
/// transitions, then an independently drawn missingness pattern blanks days.
pub fn sample_markov(
    params: &MarkovDosageParams,
    n: usize,
    seed: u64,
) -> Result<CategoricalSeriesDataset> {
    params.validate()?;
    let h = params.h;
    let t_len = params.t_len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = Vec::with_capacity(t_len);
        let mut state = draw_index(&params.initial, &mut rng);
        s.push(Some(state + 1));
        for t in 2..=t_len {
            let m = params.matrix(regime_for_day(t, params.prescription_period));
            state = draw_index(&m[state * h..(state + 1) * h], &mut rng);
            s.push(Some(state + 1));
        }
        let pattern = &params.missingness[rng.gen_range(0..params.missingness.len())];
        for (day, &missing) in pattern.iter().enumerate() {
            if missing {
                s[day] = None;
            }
        }
        series.push(s);
    }
    CategoricalSeriesDataset::new(series, h, params.prescription_period)
}
