use num_complex::Complex64;

use super::linear::invert;
use super::{from_m4, log_likelihood_m4, Reconstructor, ReconstructionResult, TomographyData, M4};
use crate::error::{Result, SwapError};
use crate::linalg::{self, CMatrix};

/// Poisson maximum-likelihood estimate over the physical states.
///
/// The iterate is kept in factored form: each step replaces `T` by
/// `T (1 + eps M)`, with `M` the likelihood gradient operator, so that
/// `rho = T†T / tr(T†T)` stays positive with unit trace. The step `eps` is
/// halved until the likelihood does not decrease and doubled after every
/// accepted step, which makes the likelihood non-decreasing along the run.
/// The search starts from the clipped linear-inversion estimate mixed with
/// a little of the identity so that every observed setting has support.
#[derive(Clone, Copy, Debug)]
pub struct MaximumLikelihood {
    pub max_iterations: usize,
    /// Stop once one accepted step gains less than this.
    pub min_improvement: f64,
    /// Stop once `sqrt(tr(M rho M))` drops below this.
    pub gradient_tolerance: f64,
    /// Identity admixture of the starting point.
    pub start_mixing: f64,
}

impl Default for MaximumLikelihood {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            min_improvement: 1e-10,
            gradient_tolerance: 1e-8,
            start_mixing: 1e-4,
        }
    }
}

/// Likelihood trace of one run, for monotonicity checks.
#[derive(Clone, Debug, Default)]
pub struct MleTrace {
    pub log_likelihoods: Vec<f64>,
}

impl MaximumLikelihood {
    /// Runs the ascent and also returns the accepted likelihood values.
    pub fn reconstruct_traced(&self, data: &TomographyData) -> Result<(ReconstructionResult, MleTrace)> {
        let projectors = data.projectors();
        let counts = &data.counts;
        let total: f64 = data.total();
        let povm_sum: M4 = projectors.iter().sum();
        let ll = |m: &M4| log_likelihood_m4(m, &projectors, counts);

        let linear = {
            let x = invert(data)?;
            let c = linalg::project_to_density(&CMatrix::from_fn(4, 4, |i, j| x[(i, j)]))
                .ok_or_else(|| SwapError::Numerical("linear estimate has no positive part".into()))?;
            M4::from_fn(|i, j| c[(i, j)])
        };
        let linear_ll = ll(&linear);

        let identity = M4::identity();
        let mix = self.start_mixing;
        let mut rho = linear * Complex64::new(1.0 - mix, 0.0) + identity * Complex64::new(mix / 4.0, 0.0);
        let mut current = ll(&rho);
        let mut trace = MleTrace { log_likelihoods: vec![current] };
        let mut eps = 1.0;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < self.max_iterations {
            iterations += 1;
            let probs: Vec<f64> = projectors.iter().map(|p| (p * rho).trace().re).collect();
            let psum: f64 = probs.iter().sum();
            let mut grad_op = povm_sum * Complex64::new(-1.0 / psum, 0.0);
            for ((p, &n), &prob) in projectors.iter().zip(counts.iter()).zip(&probs) {
                if n > 0.0 {
                    grad_op += p * Complex64::new(n / (total * prob), 0.0);
                }
            }
            let grad_norm = (grad_op * rho * grad_op).trace().re.max(0.0).sqrt();
            if grad_norm < self.gradient_tolerance {
                converged = true;
                break;
            }
            let mut accepted = None;
            while eps > 1e-14 {
                let k = identity + grad_op * Complex64::new(eps, 0.0);
                let cand = k * rho * k.adjoint();
                let cand = cand / cand.trace();
                let cand = (cand + cand.adjoint()) * Complex64::new(0.5, 0.0);
                let value = ll(&cand);
                if value >= current {
                    accepted = Some((cand, value));
                    break;
                }
                eps *= 0.5;
            }
            let Some((cand, value)) = accepted else {
                // No ascent at any resolvable step length.
                converged = true;
                break;
            };
            let gain = value - current;
            rho = cand;
            current = value;
            trace.log_likelihoods.push(current);
            eps = (eps * 2.0).min(1e6);
            if gain < self.min_improvement {
                converged = true;
                break;
            }
        }

        let (best, best_ll) = if linear_ll > current { (linear, linear_ll) } else { (rho, current) };
        Ok((
            ReconstructionResult {
                rho: from_m4(data.subspace, &best)?,
                method: self.name().into(),
                log_likelihood: best_ll,
                iterations,
                converged,
            },
            trace,
        ))
    }
}

impl Reconstructor for MaximumLikelihood {
    fn name(&self) -> &'static str {
        "mle"
    }

    fn reconstruct(&self, data: &TomographyData) -> Result<ReconstructionResult> {
        self.reconstruct_traced(data).map(|(r, _)| r)
    }
}
