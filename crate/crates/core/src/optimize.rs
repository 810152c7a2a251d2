//! Small unconstrained minimizer: BFGS with central finite-difference
//! gradients and an Armijo backtracking line search.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Longest trial step; keeps the search inside one basin of periodic
    /// landscapes.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            grad_tol: 1e-8,
            max_iter: 500,
            fd_step: 1e-5,
            max_step: 0.5,
        }
    }
}

fn eval(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("objective is {v} at {x:?}")))
    }
}

/// Central differences, step `h * max(1, |x_k|)`.
pub(crate) fn central_gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let step = h * x[k].abs().max(1.0);
        probe[k] = x[k] + step;
        let up = eval(f, &probe)?;
        probe[k] = x[k] - step;
        let down = eval(f, &probe)?;
        probe[k] = x[k];
        g.push((up - down) / (2.0 * step));
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn minimize_bfgs(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: Vec<f64>,
    opts: &BfgsOptions,
) -> Result<(Vec<f64>, f64)> {
    let n = x0.len();
    let identity = |scale: f64| {
        let mut h = vec![0.0; n * n];
        for k in 0..n {
            h[k * n + k] = scale;
        }
        h
    };
    let mut x = x0;
    let mut fx = eval(f, &x)?;
    let mut g = central_gradient(f, &x, opts.fd_step)?;
    let mut hinv = identity(1.0);
    let mut first = true;

    for _ in 0..opts.max_iter {
        let scale = fx.abs().max(1.0);
        if dot(&g, &g).sqrt() < opts.grad_tol * scale {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|r| -dot(&hinv[r * n..(r + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hinv = identity(1.0);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut t = (opts.max_step / dot(&d, &d).sqrt()).min(1.0);
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let ft = eval(f, &trial)?;
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            break;
        };
        let g_new = central_gradient(f, &x_new, opts.fd_step)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            if first {
                hinv = identity(sy / dot(&y, &y));
                first = false;
            }
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|r| dot(&hinv[r * n..(r + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for r in 0..n {
                for c in 0..n {
                    hinv[r * n + c] += -rho * (hy[r] * s[c] + s[r] * hy[c]) + (rho * rho * yhy + rho) * s[r] * s[c];
                }
            }
        }
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement <= 1e-13 * scale && dot(&g, &g).sqrt() < 1e-5 * scale {
            break;
        }
    }
    Ok((x, fx))
}
