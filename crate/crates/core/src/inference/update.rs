//! Row-wise line-searched updates for the EM part.

use ndarray::Array2;
use rayon::prelude::*;

use super::FitConfig;
use crate::model::{
    authority_row_objective, floor_simplex_from_logs, hub_row_objective, tau_row_objective, theta_row_objective,
    HyperParams, ModelParams, PairIndex, SufficientStats,
};
use crate::{Error, Result};

/// Step halvings tried before a row is left unchanged.
pub const MAX_HALVINGS: usize = 20;

struct NonFinite;

/// Multiplicative update on the simplex.
///
/// With relative gradient `r = x ⊙ ∇f`, the fixed point `x ∝ r` is a KKT
/// point of `f` on the simplex. The trial point moves geometrically toward
/// it, `log x' = (1 - η) log x + η log(r / Σr)`, so positivity holds for any
/// step and the direction is an ascent direction for small `η`.
fn simplex_step<F>(x: &[f64], lr: f64, f: F) -> std::result::Result<Vec<f64>, NonFinite>
where
    F: Fn(&[f64], Option<&mut [f64]>) -> f64,
{
    let mut g = vec![0.0; x.len()];
    let f0 = f(x, Some(&mut g));
    if !f0.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(NonFinite);
    }
    let rel: Vec<f64> = x.iter().zip(&g).map(|(a, b)| (a * b).max(0.0)).collect();
    let total: f64 = rel.iter().sum();
    if !(total > 0.0) {
        return Ok(x.to_vec());
    }
    let ln_target: Vec<f64> = rel.iter().map(|r| (r / total).max(1e-300).ln()).collect();
    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();

    let mut eta = lr.min(1.0);
    let mut cand = vec![0.0; x.len()];
    for _ in 0..=MAX_HALVINGS {
        for ((c, a), b) in cand.iter_mut().zip(&ln_x).zip(&ln_target) {
            *c = (1.0 - eta) * a + eta * b;
        }
        floor_simplex_from_logs(&mut cand);
        if f(&cand, None) >= f0 {
            return Ok(cand);
        }
        eta *= 0.5;
    }
    Ok(x.to_vec())
}

/// Gradient ascent in log space; `scale` is the inverse curvature of the
/// Gaussian prior, so `lr = 1` is a Newton step on the prior alone.
fn log_step<F>(x: &[f64], lr: f64, scale: f64, f: F) -> std::result::Result<Vec<f64>, NonFinite>
where
    F: Fn(&[f64], Option<&mut [f64]>) -> f64,
{
    let mut g = vec![0.0; x.len()];
    let f0 = f(x, Some(&mut g));
    if !f0.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(NonFinite);
    }
    let mut step = lr * scale;
    let mut cand = vec![0.0; x.len()];
    for _ in 0..=MAX_HALVINGS {
        for ((c, a), d) in cand.iter_mut().zip(x).zip(&g) {
            *c = a + step * d;
        }
        if f(&cand, None) >= f0 {
            return Ok(cand);
        }
        step *= 0.5;
    }
    Ok(x.to_vec())
}

fn update_rows<F>(m: &Array2<f64>, block: &'static str, step: F) -> Result<Array2<f64>>
where
    F: Fn(usize, &[f64]) -> std::result::Result<Vec<f64>, NonFinite> + Sync,
{
    let rows = (0..m.nrows())
        .into_par_iter()
        .map(|i| {
            let row = m.row(i);
            step(i, row.as_slice().expect("standard layout")).map_err(|_| Error::NonFiniteGradient { block, row: i })
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let data = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec(m.dim(), data).expect("row lengths preserved"))
}

pub(super) fn em_rounds(
    params: &ModelParams,
    stats: &SufficientStats,
    index: &PairIndex,
    hp: &HyperParams,
    cfg: &FitConfig,
) -> Result<ModelParams> {
    let lr = cfg.learning_rate;
    let mut tau = params.tau.clone();
    let mut theta = params.theta.clone();
    let mut authority = params.authority.clone();
    let mut hub = params.hub.clone();
    let mut log_auth = authority.mapv(f64::ln);
    let mut log_hub = hub.mapv(f64::ln);

    for _ in 0..cfg.em_steps_per_iter {
        tau = update_rows(&tau, "tau", |t, x| {
            simplex_step(x, lr, |x, g| tau_row_objective(stats.topic_word.row(t), x, hp.gamma, g))
        })?;

        theta = update_rows(&theta, "theta", |u, x| {
            let h = log_hub.row(u);
            let a = log_auth.row(u);
            let (h, a) = (h.as_slice().unwrap(), a.as_slice().unwrap());
            simplex_step(x, lr, |x, g| theta_row_objective(stats.user_topic.row(u), x, h, a, hp, g))
        })?;

        log_auth = update_rows(&log_auth, "authority", |v, x| {
            log_step(x, lr, hp.sigma * hp.sigma, |x, g| {
                authority_row_objective(x, theta.row(v), &index.by_target[v], &hub, hp, g)
            })
        })?;
        authority = log_auth.mapv(f64::exp);

        log_hub = update_rows(&log_hub, "hub", |u, x| {
            log_step(x, lr, hp.delta * hp.delta, |x, g| {
                hub_row_objective(x, theta.row(u), &index.by_source[u], &authority, hp, g)
            })
        })?;
        hub = log_hub.mapv(f64::exp);
    }

    Ok(ModelParams { tau, theta, authority, hub })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_step_reaches_dirichlet_multinomial_optimum() {
        // f(x) = Σ c_i log x_i is maximized at x ∝ c; one full step lands there.
        let c = [3.0, 1.0, 6.0];
        let f = |x: &[f64], g: Option<&mut [f64]>| {
            if let Some(g) = g {
                for i in 0..3 {
                    g[i] = c[i] / x[i];
                }
            }
            (0..3).map(|i| c[i] * x[i].ln()).sum::<f64>()
        };
        let x = simplex_step(&[1.0 / 3.0; 3], 1.0, f).ok().unwrap();
        for (a, b) in x.iter().zip([0.3, 0.1, 0.6]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_step_newton_on_quadratic() {
        // f(x) = -(x - 2)^2 / 2 has unit curvature.
        let f = |x: &[f64], g: Option<&mut [f64]>| {
            if let Some(g) = g {
                g[0] = -(x[0] - 2.0);
            }
            -(x[0] - 2.0).powi(2) / 2.0
        };
        let x = log_step(&[5.0], 1.0, 1.0, f).ok().unwrap();
        assert_eq!(x, vec![2.0]);
    }

    #[test]
    fn non_finite_gradient_is_reported() {
        let f = |_: &[f64], g: Option<&mut [f64]>| {
            if let Some(g) = g {
                g[0] = f64::NAN;
            }
            0.0
        };
        assert!(log_step(&[1.0], 1.0, 1.0, f).is_err());
    }
}
