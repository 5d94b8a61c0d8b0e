use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn zeros_like(params: &[Vec<f64>]) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
///
/// A non-finite gradient leaves parameters and state untouched and is
/// reported as [`Error::NonFiniteGradient`].
pub fn adam_step(
    params: &mut [Vec<f64>],
    grads: &[Vec<f64>],
    state: &mut AdamState,
    cfg: &AdamConfig,
    t: u64,
) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter(
            "Adam step count starts at 1".into(),
        ));
    }
    let shapes_agree = params.len() == grads.len()
        && params.len() == state.m.len()
        && params.len() == state.v.len()
        && params.iter().zip(grads).all(|(p, g)| p.len() == g.len())
        && params
            .iter()
            .zip(state.m.iter().zip(&state.v))
            .all(|(p, (m, v))| p.len() == m.len() && p.len() == v.len());
    if !shapes_agree {
        return Err(Error::ShapeMismatch(
            "Adam params, grads and state differ".into(),
        ));
    }
    if grads.iter().flatten().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![vec![1.0, -2.0]];
        let mut s = AdamState::zeros_like(&p);
        adam_step(
            &mut p,
            &[vec![0.0, 0.0]],
            &mut s,
            &AdamConfig::with_lr(0.1),
            1,
        )
        .unwrap();
        assert_eq!(p, vec![vec![1.0, -2.0]]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = vec![vec![1.0]];
        let mut s = AdamState::zeros_like(&p);
        adam_step(&mut p, &[vec![1.0]], &mut s, &AdamConfig::with_lr(0.1), 1).unwrap();
        // m̂ = v̂ = 1, so the step is lr / (1 + ε): 0.9 up to the ε term
        assert!((p[0][0] - (1.0 - 0.1 / (1.0 + 1e-8))).abs() <= 1e-12);
        assert!((p[0][0] - 0.9).abs() <= 1e-9);
        let mut q = vec![vec![1.0]];
        let mut s = AdamState::zeros_like(&q);
        let no_eps = AdamConfig {
            eps: 0.0,
            ..AdamConfig::with_lr(0.1)
        };
        adam_step(&mut q, &[vec![1.0]], &mut s, &no_eps, 1).unwrap();
        assert!((q[0][0] - 0.9).abs() <= 1e-12);
    }

    #[test]
    fn quadratic_trace_matches_reference() {
        // f(w) = w², gradient 2w; reference values computed by hand-unrolled
        // recurrences in the test below
        let cfg = AdamConfig::with_lr(0.1);
        let mut p = vec![vec![1.0]];
        let mut s = AdamState::zeros_like(&p);
        let (mut w, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=3 {
            let g = 2.0 * p[0][0];
            adam_step(&mut p, &[vec![g]], &mut s, &cfg, t).unwrap();

            let gr = 2.0 * w;
            m = 0.9 * m + 0.1 * gr;
            v = 0.999 * v + 0.001 * gr * gr;
            let mh = m / (1.0 - 0.9f64.powi(t as i32));
            let vh = v / (1.0 - 0.999f64.powi(t as i32));
            w -= 0.1 * mh / (vh.sqrt() + 1e-8);
            assert!((p[0][0] - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn errors() {
        let mut p = vec![vec![1.0]];
        let mut s = AdamState::zeros_like(&p);
        let cfg = AdamConfig::with_lr(0.1);
        assert!(matches!(
            adam_step(&mut p, &[vec![f64::NAN]], &mut s, &cfg, 1),
            Err(Error::NonFiniteGradient)
        ));
        assert_eq!(p[0][0], 1.0);
        assert!(adam_step(&mut p, &[vec![1.0, 2.0]], &mut s, &cfg, 1).is_err());
        assert!(adam_step(&mut p, &[vec![1.0]], &mut s, &cfg, 0).is_err());
    }
}
