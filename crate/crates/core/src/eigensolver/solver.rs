//! Inverse power iteration for the smallest eigenpair of the discrete `−Δ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::{GridField, Role};
use super::operator::{apply_into, diagonal, is_symmetric};
use super::reference::reference_lambda1;
use crate::geometry::{rasterize, ConvexDomain, GridMask};
use crate::{Error, Result};

/// Stopping rules for [`smallest_eigenpair`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative change of the eigenvalue between sweeps.
    pub lambda_tol: f64,
    /// Relative eigen-residual `‖Au − λu‖ / (λ‖u‖)`.
    pub residual_tol: f64,
    /// Relative residual of each inner linear solve.
    pub inner_tol: f64,
    pub max_iterations: usize,
    pub max_inner_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            lambda_tol: 1e-10,
            residual_tol: 1e-8,
            inner_tol: 1e-12,
            max_iterations: 1000,
            max_inner_iterations: 20_000,
        }
    }
}

/// First eigenpair of the discrete Dirichlet Laplacian.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Ground state, positive with maximum exactly 1.
    pub u: GridField,
    /// Relative eigen-residual of `u`.
    pub residual: f64,
    /// Outer inverse-iteration sweeps.
    pub iterations: usize,
    /// Total inner Krylov iterations.
    pub inner_iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned Krylov solver for `A x = b`, warm-started from `x`.
struct LinearSolver<'a> {
    mask: &'a GridMask,
    inv_diag: Vec<f64>,
    symmetric: bool,
    tol: f64,
    max_iterations: usize,
}

impl LinearSolver<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        apply_into(self.mask, x, out);
    }

    fn true_residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; x.len()];
        self.apply(x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        r
    }

    /// Returns the iteration count. Restarts from the current iterate when the
    /// recursively updated residual drifts from the true one.
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let bnorm = norm(b);
        if bnorm == 0.0 {
            x.fill(0.0);
            return Ok(0);
        }
        let mut total = 0;
        for _restart in 0..4 {
            total += if self.symmetric { self.pcg(b, x, bnorm)? } else { self.bicgstab(b, x, bnorm)? };
            let r = self.true_residual(x, b);
            let rel = norm(&r) / bnorm;
            if rel <= 1e3 * self.tol {
                return Ok(total);
            }
        }
        let rel = norm(&self.true_residual(x, b)) / bnorm;
        Err(Error::LinearSolve { iterations: total, residual: rel })
    }

    fn pcg(&self, b: &[f64], x: &mut [f64], bnorm: f64) -> Result<usize> {
        let n = b.len();
        let mut r = self.true_residual(x, b);
        if norm(&r) <= self.tol * bnorm {
            return Ok(0);
        }
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=self.max_iterations {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= self.tol * bnorm {
                return Ok(it);
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::LinearSolve { iterations: self.max_iterations, residual: norm(&r) / bnorm })
    }

    fn bicgstab(&self, b: &[f64], x: &mut [f64], bnorm: f64) -> Result<usize> {
        let n = b.len();
        let mut r = self.true_residual(x, b);
        if norm(&r) <= self.tol * bnorm {
            return Ok(0);
        }
        let mut shadow = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ph = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut sh = vec![0.0; n];
        let mut t = vec![0.0; n];
        for it in 1..=self.max_iterations {
            let rho_new = dot(&shadow, &r);
            if rho_new == 0.0 || omega == 0.0 {
                // Breakdown: restart the shadow space from the current residual.
                shadow.copy_from_slice(&r);
                rho = 1.0;
                alpha = 1.0;
                omega = 1.0;
                v.fill(0.0);
                p.fill(0.0);
                continue;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
                ph[i] = p[i] * self.inv_diag[i];
            }
            self.apply(&ph, &mut v);
            alpha = rho / dot(&shadow, &v);
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if norm(&s) <= self.tol * bnorm {
                for i in 0..n {
                    x[i] += alpha * ph[i];
                }
                return Ok(it);
            }
            for i in 0..n {
                sh[i] = s[i] * self.inv_diag[i];
            }
            self.apply(&sh, &mut t);
            omega = dot(&t, &s) / dot(&t, &t);
            for i in 0..n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) <= self.tol * bnorm {
                return Ok(it);
            }
        }
        Err(Error::LinearSolve { iterations: self.max_iterations, residual: norm(&r) / bnorm })
    }
}

/// Discrete Rayleigh quotient `(u·Au)/(u·u)`.
pub fn rayleigh_quotient(mask: &GridMask, values: &[f64]) -> Result<f64> {
    let au = super::operator::apply_laplacian(mask, values)?;
    Ok(dot(values, &au) / dot(values, values))
}

/// Relative eigen-residual `‖Au − λu‖ / (λ‖u‖)`.
pub fn eigen_residual(mask: &GridMask, values: &[f64], lambda: f64) -> Result<f64> {
    let au = super::operator::apply_laplacian(mask, values)?;
    let r: f64 = au.iter().zip(values).map(|(a, u)| (a - lambda * u).powi(2)).sum();
    Ok(r.sqrt() / (lambda * norm(values)))
}

/// Smallest eigenpair of the Shortley–Weller `−Δ` on `mask` by inverse
/// iteration from the all-ones vector.
pub fn smallest_eigenpair(mask: Arc<GridMask>, options: &SolverOptions) -> Result<EigenResult> {
    mask.check_resolution()?;
    let n = mask.len();
    let solver = LinearSolver {
        mask: &mask,
        inv_diag: diagonal(&mask).into_iter().map(|d| 1.0 / d).collect(),
        symmetric: is_symmetric(&mask),
        tol: options.inner_tol,
        max_iterations: options.max_inner_iterations,
    };
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut au = vec![0.0; n];
    let mut lambda_prev: Option<f64> = None;
    let mut inner_total = 0;
    let mut last = (0.0, f64::INFINITY);
    for iteration in 1..=options.max_iterations {
        // Warm start: near convergence A⁻¹x ≈ x/λ.
        match lambda_prev {
            Some(l) => y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi = xi / l),
            None => y.fill(0.0),
        }
        inner_total += solver.solve(&x, &mut y)?;
        let ny = norm(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        solver.apply(&y, &mut au);
        let lambda = dot(&y, &au);
        let residual =
            au.iter().zip(&y).map(|(a, u)| (a - lambda * u).powi(2)).sum::<f64>().sqrt() / lambda.abs();
        last = (lambda, residual);
        std::mem::swap(&mut x, &mut y);
        if let Some(prev) = lambda_prev {
            if ((lambda - prev) / prev).abs() <= options.lambda_tol && residual <= options.residual_tol {
                return finish(mask.clone(), x, lambda, iteration, inner_total);
            }
        }
        lambda_prev = Some(lambda);
    }
    Err(Error::NonConvergence { iterations: options.max_iterations, residual: last.1 })
}

fn finish(mask: Arc<GridMask>, mut u: Vec<f64>, lambda: f64, iterations: usize, inner: usize) -> Result<EigenResult> {
    let (mut peak, mut peak_abs) = (0.0, 0.0);
    for &v in &u {
        if v.abs() > peak_abs {
            peak_abs = v.abs();
            peak = v;
        }
    }
    u.iter_mut().for_each(|v| *v /= peak);
    // Division by the peak makes that node exactly 1; clamp rounding above it.
    u.iter_mut().for_each(|v| *v = v.min(1.0));
    // A sign change or a nonpositive eigenvalue means inverse iteration locked
    // onto the wrong mode.
    if lambda <= 0.0 || u.iter().any(|&v| v <= 0.0) {
        return Err(Error::NonConvergence { iterations, residual: f64::INFINITY });
    }
    let residual = eigen_residual(&mask, &u, lambda)?;
    let u = GridField::new(mask, u, Role::U)?;
    Ok(EigenResult { lambda1: lambda, u, residual, iterations, inner_iterations: inner })
}

/// Rasterises and solves in one step.
pub fn solve_domain(domain: &ConvexDomain, h: f64, options: &SolverOptions) -> Result<EigenResult> {
    smallest_eigenpair(Arc::new(rasterize(domain, h)?), options)
}

/// Extrapolated eigenvalue from solves at spacings halving in turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    /// `(4λ_{h/2} − λ_h)/3` from the two finest spacings.
    pub lambda: f64,
    /// Observed order from three spacings, or against the closed form when
    /// only two are given and one exists.
    pub order: Option<f64>,
    /// `(h, λ_h)` per spacing, coarsest first.
    pub samples: Vec<(f64, f64)>,
}

/// Richardson extrapolation of λ₁ assuming an `h²` leading error.
pub fn richardson_lambda(domain: &ConvexDomain, h_list: &[f64], options: &SolverOptions) -> Result<RichardsonEstimate> {
    if h_list.len() < 2 {
        return Err(Error::InvalidParameter("Richardson extrapolation needs at least two spacings".into()));
    }
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    for pair in hs.windows(2) {
        if ((pair[0] / pair[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("spacings {} and {} are not in ratio 2", pair[0], pair[1])));
        }
    }
    let samples: Vec<(f64, f64)> = hs
        .iter()
        .map(|&h| solve_domain(domain, h, options).map(|r| (h, r.lambda1)))
        .collect::<Result<_>>()?;
    let m = samples.len();
    let (coarse, fine) = (samples[m - 2].1, samples[m - 1].1);
    let lambda = (4.0 * fine - coarse) / 3.0;
    let order = if m >= 3 {
        let c = samples[m - 3].1;
        Some(((c - coarse) / (coarse - fine)).abs().log2())
    } else {
        reference_lambda1(domain).map(|exact| ((coarse - exact) / (fine - exact)).abs().log2())
    };
    Ok(RichardsonEstimate { lambda, order, samples })
}
