use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_visibility;
use super::counts::poisson;
use crate::error::{Result, SwapError};

/// Dip parameters. The Gaussian uses the `exp(-(x - x0)^2 / (2 w^2))`
/// convention for its width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomParams {
    pub center_um: f64,
    pub width_um: f64,
    pub visibility: f64,
    /// Rate (or counts per point) far from the dip.
    pub baseline: f64,
}

/// Fitted dip with one-sigma uncertainties in the same order as the fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomFit {
    pub params: HomParams,
    pub sigma: HomParams,
    pub chi_sqr: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomScan {
    pub positions_um: Vec<f64>,
    pub counts: Vec<f64>,
    pub fit: Option<HomFit>,
}

pub fn hom_dip_model(position_um: f64, center_um: f64, width_um: f64, visibility: f64, baseline: f64) -> Result<f64> {
    if !(width_um > 0.0) {
        return Err(SwapError::InvalidArgument(format!("dip width must be positive, got {width_um}")));
    }
    check_visibility(visibility)?;
    Ok(model(&[center_um, width_um, visibility, baseline], position_um))
}

fn model(p: &[f64; 4], x: f64) -> f64 {
    let [c, w, v, b] = *p;
    let z = (x - c) / w;
    b * (1.0 - v * (-0.5 * z * z).exp())
}

fn gradient(p: &[f64; 4], x: f64) -> [f64; 4] {
    let [c, w, v, b] = *p;
    let z = (x - c) / w;
    let g = (-0.5 * z * z).exp();
    [
        -b * v * g * z / w,
        -b * v * g * z * z / w,
        -b * g,
        1.0 - v * g,
    ]
}

/// Samples a scan; `seed = None` returns the expected counts themselves.
pub fn synthesize_hom_scan(params: &HomParams, positions_um: &[f64], seed: Option<u64>) -> Result<HomScan> {
    hom_dip_model(0.0, params.center_um, params.width_um, params.visibility, params.baseline)?;
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let p = [params.center_um, params.width_um, params.visibility, params.baseline];
    let counts = positions_um
        .iter()
        .map(|&x| {
            let mean = model(&p, x);
            match rng.as_mut() {
                Some(r) => poisson(mean, r) as f64,
                None => mean,
            }
        })
        .collect();
    Ok(HomScan { positions_um: positions_um.to_vec(), counts, fit: None })
}

const MAX_ITER: usize = 2000;

/// Weighted Levenberg–Marquardt fit of the dip, Poisson weights `1/max(y, 1)`.
///
/// Visibility is kept in `[0, 1]` and the width positive; uncertainties come
/// from the inverse curvature matrix. A parameter the data cannot constrain
/// (centre and width of a flat scan) reports an infinite sigma.
pub fn fit_hom_dip(positions_um: &[f64], counts: &[f64]) -> Result<HomFit> {
    if positions_um.len() != counts.len() {
        return Err(SwapError::InvalidArgument("positions and counts differ in length".into()));
    }
    if positions_um.len() < 5 {
        return Err(SwapError::InvalidArgument("need at least five scan points".into()));
    }
    if counts.iter().chain(positions_um).any(|v| !v.is_finite()) || counts.iter().any(|&c| c < 0.0) {
        return Err(SwapError::InvalidArgument("scan contains invalid values".into()));
    }
    let weights: Vec<f64> = counts.iter().map(|&y| 1.0 / y.max(1.0)).collect();
    let chi = |p: &[f64; 4]| -> f64 {
        positions_um
            .iter()
            .zip(counts)
            .zip(&weights)
            .map(|((&x, &y), &w)| w * (y - model(p, x)).powi(2))
            .sum()
    };

    let mut p = initial_guess(positions_um, counts);
    let mut current = chi(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&p, positions_um, counts, &weights);
        let floor = 1e-12 * (0..4).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-300);
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for i in 0..4 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(floor);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            trial[2] = trial[2].clamp(0.0, 1.0);
            if trial[1] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let next = chi(&trial);
            if next <= current {
                let gain = current - next;
                let moved = (0..4).map(|i| (trial[i] - p[i]).abs() / p[i].abs().max(1e-12)).fold(0.0, f64::max);
                p = trial;
                current = next;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if gain <= 1e-14 * current.max(1e-300) && moved < 1e-10 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || current < 1e-26 {
            // No downhill step at any damping: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(SwapError::Numerical(format!("HOM fit did not converge in {MAX_ITER} iterations")));
    }

    let (jtj, _) = normal_equations(&p, positions_um, counts, &weights);
    let sigma = uncertainties(&jtj);
    Ok(HomFit {
        params: HomParams { center_um: p[0], width_um: p[1], visibility: p[2], baseline: p[3] },
        sigma: HomParams { center_um: sigma[0], width_um: sigma[1], visibility: sigma[2], baseline: sigma[3] },
        chi_sqr: current,
        iterations,
    })
}

fn normal_equations(p: &[f64; 4], xs: &[f64], ys: &[f64], ws: &[f64]) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        let g = Vector4::from(gradient(p, x));
        jtj += g * g.transpose() * w;
        jtr += g * (w * (y - model(p, x)));
    }
    (jtj, jtr)
}

fn uncertainties(jtj: &Matrix4<f64>) -> [f64; 4] {
    let scale = (0..4).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
    let free: Vec<usize> = (0..4).filter(|&i| jtj[(i, i)] > 1e-20 * scale).collect();
    let mut out = [f64::INFINITY; 4];
    let n = free.len();
    let sub = nalgebra::DMatrix::from_fn(n, n, |i, j| jtj[(free[i], free[j])]);
    if let Some(cov) = sub.try_inverse() {
        for (k, &i) in free.iter().enumerate() {
            out[i] = cov[(k, k)].max(0.0).sqrt();
        }
    }
    out
}

fn initial_guess(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let n = xs.len();
    let edge = (n / 5).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let edges: Vec<f64> = order[..edge].iter().chain(&order[n - edge..]).map(|&i| ys[i]).collect();
    let baseline = (edges.iter().sum::<f64>() / edges.len() as f64).max(1e-12);
    let (imin, ymin) = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &y)| (i, y))
        .unwrap_or((0, baseline));
    let visibility = (1.0 - ymin / baseline).clamp(0.0, 1.0);
    let span = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - xs.iter().copied().fold(f64::INFINITY, f64::min);
    let half = baseline - 0.5 * (baseline - ymin);
    let below: Vec<f64> = order.iter().filter(|&&i| ys[i] <= half).map(|&i| xs[i]).collect();
    let width = match (below.first(), below.last()) {
        (Some(a), Some(b)) if b > a => (b - a) / 2.355,
        _ => span / 10.0,
    }
    .max(span / (4.0 * n as f64))
    .max(1e-9);
    [xs[imin], width, visibility, baseline]
}
