//! Diagonal-Gaussian and Bernoulli heads: reparameterized sampling,
//! closed-form KL divergence, and per-feature reconstruction log-likelihood.

use crate::data::FeatureKind;
use crate::error::{Error, Result};
use crate::nn::sigmoid;

/// Log-variance outputs are clamped to this range before use.
pub const LOG_VAR_CLAMP: f64 = 10.0;
/// Bernoulli probabilities are clamped to `[RHO_EPS, 1 - RHO_EPS]`.
pub const RHO_EPS: f64 = 1e-6;

pub const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Diagonal Gaussian: per-dimension mean and log-variance
/// (`variance = exp(log_var)`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub log_var: Vec<f64>,
}

impl GaussianParams {
    /// Splits a raw network output `[mean || log_var]`, clamping the
    /// log-variance half. Returns the clamp mask alongside (true where the
    /// raw value passed through unclamped), which the backward pass needs.
    pub fn from_raw(raw: &[f64]) -> (Self, Vec<bool>) {
        debug_assert!(raw.len() % 2 == 0, "gaussian head width must be even");
        let d = raw.len() / 2;
        let mean = raw[..d].to_vec();
        let mut mask = vec![true; d];
        let log_var = raw[d..]
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if g.abs() > LOG_VAR_CLAMP {
                    mask[i] = false;
                    g.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP)
                } else {
                    g
                }
            })
            .collect();
        (GaussianParams { mean, log_var }, mask)
    }

    pub fn standard(dim: usize) -> Self {
        GaussianParams {
            mean: vec![0.0; dim],
            log_var: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `log N(x | mean, exp(log_var))`, summed over dimensions.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.log_var)
            .zip(x)
            .map(|((&m, &g), &v)| {
                let d = v - m;
                -0.5 * (LN_2PI + g + d * d * (-g).exp())
            })
            .sum()
    }
}

/// Per-dimension Bernoulli success probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliParams {
    pub rho: Vec<f64>,
}

impl BernoulliParams {
    /// Maps raw logits through sigmoid with the probability clamp applied.
    pub fn from_logits(logits: &[f64]) -> Self {
        BernoulliParams {
            rho: logits
                .iter()
                .map(|&t| sigmoid(t).clamp(RHO_EPS, 1.0 - RHO_EPS))
                .collect(),
        }
    }
}

/// Location-scale reparameterization: `z = exp(0.5*log_var) * eps + mean`.
pub fn reparameterize(params: &GaussianParams, eps: &[f64]) -> Result<Vec<f64>> {
    if eps.len() != params.dim() {
        return Err(Error::ShapeMismatch {
            context: "reparameterize eps",
            expected: params.dim(),
            actual: eps.len(),
        });
    }
    Ok(params
        .mean
        .iter()
        .zip(&params.log_var)
        .zip(eps)
        .map(|((&m, &g), &e)| (0.5 * g).exp() * e + m)
        .collect())
}

/// Closed-form KL divergence between diagonal Gaussians:
/// `0.5 * sum_d [ (var_q + (mu_q - mu_p)^2)/var_p - 1 + log_var_p - log_var_q ]`.
pub fn kl_diag_gaussians(q: &GaussianParams, p: &GaussianParams) -> Result<f64> {
    if q.dim() != p.dim() {
        return Err(Error::ShapeMismatch {
            context: "kl_diag_gaussians",
            expected: q.dim(),
            actual: p.dim(),
        });
    }
    let mut kl = 0.0;
    for d in 0..q.dim() {
        let (mq, gq) = (q.mean[d], q.log_var[d]);
        let (mp, gp) = (p.mean[d], p.log_var[d]);
        let dm = mq - mp;
        // var_q/var_p as exp(gq - gp) keeps KL(q, q) exactly zero.
        kl += 0.5 * ((gq - gp).exp() + dm * dm * (-gp).exp() - 1.0 + gp - gq);
    }
    Ok(kl)
}

/// One reconstruction head per feature; continuous features get a Gaussian,
/// binary ones a Bernoulli driven by a sigmoid over the raw logit.
#[derive(Debug, Clone)]
pub enum FeatureHead {
    Gaussian {
        mean: f64,
        log_var: f64,
        /// False when the log-variance clamp was active.
        live: bool,
    },
    Bernoulli {
        rho: f64,
        /// False when the probability clamp was active.
        live: bool,
    },
}

#[derive(Debug, Clone)]
pub struct FeatureHeads {
    pub heads: Vec<FeatureHead>,
}

/// Raw output width needed by a decoder for these feature kinds: two slots
/// per continuous feature, one per binary.
pub fn head_width(kinds: &[FeatureKind]) -> usize {
    kinds
        .iter()
        .map(|k| match k {
            FeatureKind::Continuous => 2,
            FeatureKind::Binary => 1,
        })
        .sum()
}

impl FeatureHeads {
    /// Interprets a raw decoder output as per-feature heads: continuous
    /// features take `(mean, log_var)` slots, binary features a single logit
    /// mapped through sigmoid. Clamps apply as for latent heads.
    pub fn from_raw(raw: &[f64], kinds: &[FeatureKind]) -> Result<Self> {
        if raw.len() != head_width(kinds) {
            return Err(Error::ShapeMismatch {
                context: "FeatureHeads::from_raw",
                expected: head_width(kinds),
                actual: raw.len(),
            });
        }
        let mut heads = Vec::with_capacity(kinds.len());
        let mut off = 0;
        for kind in kinds {
            match kind {
                FeatureKind::Continuous => {
                    let mean = raw[off];
                    let g = raw[off + 1];
                    heads.push(FeatureHead::Gaussian {
                        mean,
                        log_var: g.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP),
                        live: g.abs() <= LOG_VAR_CLAMP,
                    });
                    off += 2;
                }
                FeatureKind::Binary => {
                    let p = sigmoid(raw[off]);
                    heads.push(FeatureHead::Bernoulli {
                        rho: p.clamp(RHO_EPS, 1.0 - RHO_EPS),
                        live: (RHO_EPS..=1.0 - RHO_EPS).contains(&p),
                    });
                    off += 1;
                }
            }
        }
        Ok(FeatureHeads { heads })
    }

    /// Sum of per-feature log-densities of `x` under the heads.
    pub fn log_likelihood(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.heads.len() {
            return Err(Error::ShapeMismatch {
                context: "reconstruction_log_lik",
                expected: self.heads.len(),
                actual: x.len(),
            });
        }
        let mut ll = 0.0;
        for (head, &v) in self.heads.iter().zip(x) {
            match head {
                FeatureHead::Gaussian { mean, log_var, .. } => {
                    let d = v - mean;
                    ll += -0.5 * (LN_2PI + log_var + d * d * (-log_var).exp());
                }
                FeatureHead::Bernoulli { rho, .. } => {
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::DataValidation(format!(
                            "binary feature value must be 0 or 1, got {v}"
                        )));
                    }
                    ll += v * rho.ln() + (1.0 - v) * (1.0 - rho).ln();
                }
            }
        }
        Ok(ll)
    }

    /// Gradient of the log-likelihood with respect to the raw decoder output,
    /// in the same slot layout as `from_raw`. Clamped slots get zero.
    pub fn log_likelihood_grad_raw(&self, x: &[f64], kinds: &[FeatureKind]) -> Vec<f64> {
        let mut grad = Vec::with_capacity(head_width(kinds));
        for (head, &v) in self.heads.iter().zip(x) {
            match head {
                FeatureHead::Gaussian {
                    mean,
                    log_var,
                    live,
                } => {
                    let inv_var = (-log_var).exp();
                    let d = v - mean;
                    grad.push(d * inv_var);
                    grad.push(if *live { 0.5 * (d * d * inv_var - 1.0) } else { 0.0 });
                }
                FeatureHead::Bernoulli { rho, live } => {
                    grad.push(if *live { v - rho } else { 0.0 });
                }
            }
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn reparameterize_zero_noise_returns_mean() {
        let p = GaussianParams {
            mean: vec![3.0, -1.0],
            log_var: vec![0.0, 0.0],
        };
        assert_eq!(reparameterize(&p, &[0.0, 0.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn reparameterize_unit_case() {
        let p = GaussianParams::standard(2);
        assert_eq!(reparameterize(&p, &[1.0, -1.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn reparameterize_formula_case() {
        // mean [1,2], log_var [ln 4, 0], eps [0.5, -1] -> [2, 1]
        let p = GaussianParams {
            mean: vec![1.0, 2.0],
            log_var: vec![4.0f64.ln(), 0.0],
        };
        let z = reparameterize(&p, &[0.5, -1.0]).unwrap();
        assert_relative_eq!(z[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(z[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn reparameterize_rejects_length_mismatch() {
        let p = GaussianParams::standard(2);
        assert!(reparameterize(&p, &[0.0]).is_err());
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let q = GaussianParams {
            mean: vec![0.3, -0.9],
            log_var: vec![0.1, -0.4],
        };
        assert_eq!(kl_diag_gaussians(&q, &q.clone()).unwrap(), 0.0);
    }

    #[test]
    fn kl_known_values() {
        // KL(N(1,1) || N(0,1)) = 0.5
        let q = GaussianParams {
            mean: vec![1.0],
            log_var: vec![0.0],
        };
        let p = GaussianParams::standard(1);
        assert_relative_eq!(kl_diag_gaussians(&q, &p).unwrap(), 0.5, epsilon = 1e-9);

        // KL(N(0,e) || N(0,1)) = 0.5(e - 2)
        let q = GaussianParams {
            mean: vec![0.0],
            log_var: vec![1.0],
        };
        assert_relative_eq!(
            kl_diag_gaussians(&q, &p).unwrap(),
            0.5 * (std::f64::consts::E - 2.0),
            epsilon = 1e-9
        );
    }

    /// Monte-Carlo estimate of KL(q||p) from draws of q.
    fn kl_monte_carlo(q: &GaussianParams, p: &GaussianParams, n: usize, seed: u64) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        let mut eps = vec![0.0; q.dim()];
        for _ in 0..n {
            for e in eps.iter_mut() {
                *e = StandardNormal.sample(&mut rng);
            }
            let z = reparameterize(q, &eps).unwrap();
            acc += q.log_density(&z) - p.log_density(&z);
        }
        acc / n as f64
    }

    #[test]
    fn kl_matches_monte_carlo_oracle() {
        let q = GaussianParams {
            mean: vec![1.0],
            log_var: vec![0.0],
        };
        let p = GaussianParams::standard(1);
        let mc = kl_monte_carlo(&q, &p, 1_000_000, 7);
        assert!((mc - 0.5).abs() < 1e-2, "mc estimate {mc}");
    }

    proptest! {
        #[test]
        fn kl_is_non_negative(
            mq in proptest::collection::vec(-3.0f64..3.0, 1..5),
            gq in proptest::collection::vec(-2.0f64..2.0, 1..5),
            mp in proptest::collection::vec(-3.0f64..3.0, 1..5),
            gp in proptest::collection::vec(-2.0f64..2.0, 1..5),
        ) {
            let d = mq.len().min(gq.len()).min(mp.len()).min(gp.len());
            let q = GaussianParams { mean: mq[..d].to_vec(), log_var: gq[..d].to_vec() };
            let p = GaussianParams { mean: mp[..d].to_vec(), log_var: gp[..d].to_vec() };
            let kl = kl_diag_gaussians(&q, &p).unwrap();
            prop_assert!(kl >= 0.0);
            // Zero iff q = p (within fp noise).
            if kl < 1e-12 {
                for i in 0..d {
                    prop_assert!((q.mean[i] - p.mean[i]).abs() < 1e-5);
                    prop_assert!((q.log_var[i] - p.log_var[i]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn bernoulli_log_lik_symmetric_case() {
        let heads = FeatureHeads::from_raw(&[0.0], &[FeatureKind::Binary]).unwrap();
        let ll = heads.log_likelihood(&[1.0]).unwrap();
        assert_relative_eq!(ll, 0.5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_log_lik_at_mean_unit_variance() {
        let heads = FeatureHeads::from_raw(&[0.7, 0.0], &[FeatureKind::Continuous]).unwrap();
        let ll = heads.log_likelihood(&[0.7]).unwrap();
        assert_relative_eq!(ll, -0.5 * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn log_lik_is_additive_over_features() {
        let kinds = [FeatureKind::Continuous, FeatureKind::Binary];
        let heads = FeatureHeads::from_raw(&[0.2, -0.3, 0.8], &kinds).unwrap();
        let joint = heads.log_likelihood(&[0.5, 1.0]).unwrap();

        let g = FeatureHeads::from_raw(&[0.2, -0.3], &[FeatureKind::Continuous]).unwrap();
        let b = FeatureHeads::from_raw(&[0.8], &[FeatureKind::Binary]).unwrap();
        let sum = g.log_likelihood(&[0.5]).unwrap() + b.log_likelihood(&[1.0]).unwrap();
        assert_relative_eq!(joint, sum, epsilon = 1e-12);
    }

    #[test]
    fn non_binary_value_in_binary_feature_is_rejected() {
        let heads = FeatureHeads::from_raw(&[0.0], &[FeatureKind::Binary]).unwrap();
        assert!(matches!(
            heads.log_likelihood(&[0.5]),
            Err(Error::DataValidation(_))
        ));
    }

    #[test]
    fn head_grad_matches_finite_differences() {
        let kinds = [FeatureKind::Continuous, FeatureKind::Binary];
        let raw = [0.4, -0.6, 0.9];
        let x = [1.1, 0.0];
        let heads = FeatureHeads::from_raw(&raw, &kinds).unwrap();
        let grad = heads.log_likelihood_grad_raw(&x, &kinds);
        let h = 1e-6;
        for s in 0..raw.len() {
            let mut plus = raw;
            plus[s] += h;
            let mut minus = raw;
            minus[s] -= h;
            let lp = FeatureHeads::from_raw(&plus, &kinds)
                .unwrap()
                .log_likelihood(&x)
                .unwrap();
            let lm = FeatureHeads::from_raw(&minus, &kinds)
                .unwrap()
                .log_likelihood(&x)
                .unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            assert_relative_eq!(grad[s], numeric, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn log_var_clamp_applies() {
        let (g, mask) = GaussianParams::from_raw(&[0.0, 0.0, 25.0, -3.0]);
        assert_eq!(g.log_var, vec![LOG_VAR_CLAMP, -3.0]);
        assert_eq!(mask, vec![false, true]);
    }

    #[test]
    fn bernoulli_params_stay_clamped() {
        let p = BernoulliParams::from_logits(&[-100.0, 0.0, 100.0]);
        assert_eq!(p.rho[0], RHO_EPS);
        assert_relative_eq!(p.rho[1], 0.5);
        assert_eq!(p.rho[2], 1.0 - RHO_EPS);
    }
}
