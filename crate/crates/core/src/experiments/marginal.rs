//! Reference posteriors for one score of a correlated two-score sample.
//!
//! A calibrator trained on a single column of a two-score sample must be
//! judged against the posterior given that column alone. Column one is the
//! first latent variable itself, so its marginal is the plain shape pair;
//! the same holds for column two when the scores are uncorrelated. A
//! correlated second score is a mixture over the first latent variable, and
//! its class-conditional densities have no closed form, so they are
//! tabulated by quadrature once per configuration and interpolated.

use crate::calibrators::Matrix;
use crate::dist::{MultiConfig, PairConfig, PosteriorOracle};
use crate::error::{CalibError, Result};

/// Grid points of the tabulated marginal posterior.
const TABLE_POINTS: usize = 2048;
/// Quadrature midpoints for the mixture over the first latent variable.
const QUAD_POINTS: usize = 512;
/// Tail probability cut when choosing the table range.
const RANGE_EPS: f64 = 1e-8;

/// Posterior given one channel of a two-score configuration.
#[derive(Debug, Clone)]
pub enum ChannelMarginal {
    /// The channel equals one latent variable, so the pair oracle is exact.
    Exact(PosteriorOracle),
    /// Interpolated quadrature table for a correlated second channel.
    Table(MarginalTable),
}

#[derive(Debug, Clone)]
pub struct MarginalTable {
    lo: f64,
    step: f64,
    posteriors: Vec<f64>,
}

impl ChannelMarginal {
    pub fn posterior_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            ChannelMarginal::Exact(oracle) => oracle.posterior_batch(x),
            ChannelMarginal::Table(table) => {
                if x.cols() != 1 {
                    return Err(CalibError::Domain(format!(
                        "marginal table expects one score column, got {}",
                        x.cols()
                    )));
                }
                Ok(x.data().iter().map(|&h| table.posterior(h)).collect())
            }
        }
    }
}

impl MarginalTable {
    /// Clamp-and-interpolate lookup.
    pub fn posterior(&self, h: f64) -> f64 {
        let last = self.posteriors.len() - 1;
        let pos = (h - self.lo) / self.step;
        if pos <= 0.0 {
            return self.posteriors[0];
        }
        if pos >= last as f64 {
            return self.posteriors[last];
        }
        let i = pos as usize;
        let frac = pos - i as f64;
        self.posteriors[i] * (1.0 - frac) + self.posteriors[i + 1] * frac
    }
}

/// Build the posterior oracle for column `j` (0 or 1) of a two-score
/// configuration.
pub fn channel_marginal(config: &MultiConfig, j: usize) -> Result<ChannelMarginal> {
    match j {
        0 => Ok(ChannelMarginal::Exact(PosteriorOracle::single(config.channel1))),
        1 if config.rho == 0.0 => {
            Ok(ChannelMarginal::Exact(PosteriorOracle::single(config.channel2)))
        }
        1 => Ok(ChannelMarginal::Table(build_table(config)?)),
        _ => Err(CalibError::Domain(format!(
            "channel index {j} out of range (two channels)"
        ))),
    }
}

/// Class-conditional density of the second score at `y`:
/// mean over quadrature midpoints u of f2((y - rho q1(u)) / s) / s,
/// where q1 is the first channel's class quantile and s = sqrt(1 - rho^2).
struct ClassMixture {
    /// rho * q1(u_k) at the quadrature midpoints.
    offsets: Vec<f64>,
    scale: f64,
}

impl ClassMixture {
    fn density(&self, config: &PairConfig, class1: bool, y: f64) -> Result<f64> {
        let mut sum = 0.0;
        for &off in &self.offsets {
            let v = (y - off) / self.scale;
            sum += if class1 { config.density1(v)? } else { config.density0(v)? };
        }
        Ok(sum / (self.offsets.len() as f64 * self.scale))
    }
}

fn build_table(config: &MultiConfig) -> Result<MarginalTable> {
    let rho = config.rho;
    let scale = (1.0 - rho * rho).sqrt();
    let c1 = &config.channel1;
    let c2 = &config.channel2;

    // Table range: extremes of rho * q1 + s * q2 over both classes, with the
    // quantiles cut RANGE_EPS into each tail.
    let q1 = |class1: bool, u: f64| {
        if class1 { c1.quantile1(u) } else { c1.f0.quantile(u) }
    };
    let q2 = |class1: bool, u: f64| {
        if class1 { c2.quantile1(u) } else { c2.f0.quantile(u) }
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for class1 in [false, true] {
        let t = [q1(class1, RANGE_EPS), q1(class1, 1.0 - RANGE_EPS)];
        let v = [q2(class1, RANGE_EPS), q2(class1, 1.0 - RANGE_EPS)];
        lo = lo.min((rho * t[0]).min(rho * t[1]) + scale * v[0]);
        hi = hi.max((rho * t[0]).max(rho * t[1]) + scale * v[1]);
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CalibError::Numeric(format!(
            "degenerate marginal table range [{lo}, {hi}]"
        )));
    }

    let mixtures: Vec<ClassMixture> = [false, true]
        .into_iter()
        .map(|class1| ClassMixture {
            offsets: (0..QUAD_POINTS)
                .map(|k| rho * q1(class1, (k as f64 + 0.5) / QUAD_POINTS as f64))
                .collect(),
            scale,
        })
        .collect();

    let pi = config.prior_pi;
    let step = (hi - lo) / (TABLE_POINTS - 1) as f64;
    let mut posteriors = Vec::with_capacity(TABLE_POINTS);
    for i in 0..TABLE_POINTS {
        let y = lo + step * i as f64;
        let f0 = mixtures[0].density(c2, false, y)?;
        let f1 = mixtures[1].density(c2, true, y)?;
        let den = pi * f1 + (1.0 - pi) * f0;
        if den > 0.0 && den.is_finite() {
            posteriors.push(pi * f1 / den);
        } else {
            posteriors.push(f64::NAN);
        }
    }

    // Points where both class densities vanished inherit their nearest
    // computed neighbor (forward, then backward).
    let mut last_valid: Option<f64> = None;
    for p in posteriors.iter_mut() {
        if p.is_nan() {
            if let Some(v) = last_valid {
                *p = v;
            }
        } else {
            last_valid = Some(*p);
        }
    }
    let mut last_valid: Option<f64> = None;
    for p in posteriors.iter_mut().rev() {
        if p.is_nan() {
            if let Some(v) = last_valid {
                *p = v;
            }
        } else {
            last_valid = Some(*p);
        }
    }
    if posteriors.iter().any(|p| p.is_nan()) {
        return Err(CalibError::Numeric(
            "marginal table has no valid density anywhere in range".to_string(),
        ));
    }

    Ok(MarginalTable { lo, step, posteriors })
}
