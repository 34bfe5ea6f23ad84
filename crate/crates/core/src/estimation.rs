//! Curve fitting, population reconstruction, frequency extraction and
//! bootstrap error bars.

use std::f64::consts::PI;

use nalgebra as na;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrology::{cfi_of_curve, maximize};
use crate::special::{laguerre, laguerre_deriv};

pub const MAX_ITERATIONS: usize = 200;

/// Minimum number of grid points for the curve fits.
pub const MIN_CURVE_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub parameters: Vec<f64>,
    pub covariance: Array2<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The oscillation amplitude is indistinguishable from zero.
    pub degenerate: bool,
    /// The unconstrained optimum left the physical region and the fit was
    /// repeated on its boundary.
    pub constrained: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.parameters[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.covariance[[i, i]].max(0.0).sqrt())
    }
}

/// Value and parameter gradient of a model at one abscissa.
type Model<'a> = dyn Fn(f64, &[f64]) -> (f64, Vec<f64>) + 'a;

struct LmOutput {
    params: Vec<f64>,
    iterations: usize,
    rss: f64,
    jtj: na::DMatrix<f64>,
}

/// Levenberg-Marquardt on `y ~ model(x, p)`; `model` returns the value and
/// the gradient with respect to `p`.
fn levenberg_marquardt(x: &[f64], y: &[f64], model: &Model<'_>, p0: Vec<f64>) -> Result<LmOutput> {
    let np = p0.len();
    let eval = |p: &[f64]| -> (f64, na::DMatrix<f64>, na::DVector<f64>) {
        let mut j = na::DMatrix::zeros(x.len(), np);
        let mut r = na::DVector::zeros(x.len());
        for (k, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            let (v, g) = model(xi, p);
            r[k] = yi - v;
            for (c, gc) in g.iter().enumerate() {
                j[(k, c)] = *gc;
            }
        }
        (r.norm_squared(), j, r)
    };
    let mut p = p0;
    let (mut rss, mut j, mut r) = eval(&p);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let scale = rss.max(1e-300);
        if grad.amax() <= 1e-15 * scale.sqrt() || rss == 0.0 {
            return Ok(LmOutput {
                params: p,
                iterations: iteration,
                rss,
                jtj,
            });
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for d in 0..np {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-30);
            }
            let Some(step) = a.lu().solve(&grad) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (trss, tj, tr) = eval(&trial);
            if trss.is_finite() && trss <= rss {
                let small = step
                    .iter()
                    .zip(&p)
                    .all(|(s, v)| s.abs() <= 1e-10 * (v.abs() + 1e-10));
                let flat = rss - trss <= 1e-14 * rss;
                p = trial;
                rss = trss;
                j = tj;
                r = tr;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small || flat {
                    let jtj = j.transpose() * &j;
                    return Ok(LmOutput {
                        params: p,
                        iterations: iteration,
                        rss,
                        jtj,
                    });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: stationary to working precision
            let jtj = j.transpose() * &j;
            return Ok(LmOutput {
                params: p,
                iterations: iteration,
                rss,
                jtj,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn covariance(jtj: &na::DMatrix<f64>, rss: f64, m: usize) -> Array2<f64> {
    let p = jtj.nrows();
    let dof = m.saturating_sub(p).max(1) as f64;
    let s2 = rss / dof;
    let inv = jtj
        .clone()
        .pseudo_inverse(1e-14)
        .unwrap_or_else(|_| na::DMatrix::zeros(p, p));
    Array2::from_shape_fn((p, p), |(i, j)| {
        let v = s2 * 0.5 * (inv[(i, j)] + inv[(j, i)]);
        if i == j {
            v.max(0.0)
        } else {
            v
        }
    })
}

/// Oscillating term `g` of the Laguerre sensing curves `P = A g + B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CurveModel {
    /// `g(beta) = exp(-2 beta^2) L_N(4 beta^2)`.
    Displacement { n: u32 },
    /// `g(phi) = exp(-2 N phi^2) L_N(4 N phi^2)`.
    Phase { n: u32 },
}

impl CurveModel {
    fn scale(&self) -> (u32, f64) {
        match *self {
            CurveModel::Displacement { n } => (n, 1.0),
            CurveModel::Phase { n } => (n, n as f64),
        }
    }

    /// `g(lambda)` and `dg/dlambda`.
    pub fn shape(&self, lambda: f64) -> (f64, f64) {
        let (n, s) = self.scale();
        let x = 4.0 * s * lambda * lambda;
        let e = (-0.5 * x).exp();
        let l = laguerre(n as i64, x);
        let dl = laguerre_deriv(n as i64, x);
        let dx = 8.0 * s * lambda;
        (e * l, e * dx * (dl - 0.5 * l))
    }

    pub fn photon_number(&self) -> u32 {
        self.scale().0
    }

    /// `A g + B` for fitted `(A, B)`.
    pub fn probability(&self, a: f64, b: f64, lambda: f64) -> f64 {
        a * self.shape(lambda).0 + b
    }

    /// Binary CFI of the fitted curve.
    pub fn fisher(&self, a: f64, b: f64, lambda: f64) -> f64 {
        cfi_of_curve(
            |l| self.probability(a, b, l),
            Some(&|l| a * self.shape(l).1),
            lambda,
        )
        .value
    }
}

/// Least-squares fit of `P = A g(lambda) + B` with the physical constraint
/// `0 <= B - |A|`, `B + |A| <= 1`.
pub fn fit_curve(model: CurveModel, grid: &[f64], pg: &[f64]) -> Result<FitResult> {
    if grid.len() != pg.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: pg.len(),
        });
    }
    if grid.len() < MIN_CURVE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_CURVE_POINTS,
            got: grid.len(),
        });
    }
    if let Some(bad) = pg.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid(
            "pg",
            format!("samples must lie in [0, 1], got {bad}"),
        ));
    }
    let n = model.photon_number();
    let (max, min) = pg
        .iter()
        .fold((f64::MIN, f64::MAX), |(hi, lo), v| (hi.max(*v), lo.min(*v)));
    let mean = pg.iter().sum::<f64>() / pg.len() as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let p0 = vec![(max - min) * sign, mean];

    let full = |x: f64, p: &[f64]| {
        let g = model.shape(x).0;
        (p[0] * g + p[1], vec![g, 1.0])
    };
    let out = levenberg_marquardt(grid, pg, &full, p0)?;
    let (a, b) = (out.params[0], out.params[1]);
    let mut result = FitResult {
        names: vec!["A", "B"],
        parameters: out.params.clone(),
        covariance: covariance(&out.jtj, out.rss, grid.len()),
        residual_norm: out.rss.sqrt(),
        converged: true,
        iterations: out.iterations,
        degenerate: false,
        constrained: false,
    };

    // Boundary refit: B = 1 - s A (top) or B = s A (bottom), s = sign(A).
    let edge = if b + a.abs() > 1.0 {
        Some(1.0)
    } else if b - a.abs() < 0.0 {
        Some(-1.0)
    } else {
        None
    };
    if let Some(side) = edge {
        let s = if a >= 0.0 { 1.0 } else { -1.0 };
        let offset = if side > 0.0 { 1.0 } else { 0.0 };
        let k = -side * s;
        let reduced = move |x: f64, p: &[f64]| {
            let g = model.shape(x).0;
            (p[0] * (g + k) + offset, vec![g + k])
        };
        let out = levenberg_marquardt(grid, pg, &reduced, vec![a])?;
        let a = out.params[0];
        let b = offset + k * a;
        let var = covariance(&out.jtj, out.rss, grid.len())[[0, 0]];
        result.parameters = vec![a, b];
        result.covariance =
            Array2::from_shape_vec((2, 2), vec![var, k * var, k * var, k * k * var]).expect("2x2");
        result.residual_norm = out.rss.sqrt();
        result.iterations += out.iterations;
        result.constrained = true;
    }
    let a = result.parameters[0];
    let sa = result.covariance[[0, 0]].sqrt();
    result.degenerate = a.abs() <= (3.0 * sa).max(1e-9);
    Ok(result)
}

/// Fit of `P_g = A exp(-2 beta^2) L_N(4 beta^2) + B`.
pub fn fit_displacement_curve(beta_grid: &[f64], pg: &[f64], n: u32) -> Result<FitResult> {
    fit_curve(CurveModel::Displacement { n }, beta_grid, pg)
}

/// Fit of `P_g = A exp(-2 N phi^2) L_N(4 N phi^2) + B`.
pub fn fit_phase_curve(phi_grid: &[f64], pg: &[f64], n: u32) -> Result<FitResult> {
    fit_curve(CurveModel::Phase { n }, phi_grid, pg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiGaussianFit {
    /// Normalized populations, one per center.
    pub populations: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub background: f64,
    pub sigma_f: f64,
    pub residual_norm: f64,
}

fn gaussian_design(f_grid: &[f64], centers: &[f64], sigma: f64) -> na::DMatrix<f64> {
    let m = centers.len();
    na::DMatrix::from_fn(f_grid.len(), m + 1, |i, j| {
        if j == m {
            1.0
        } else {
            let d = f_grid[i] - centers[j];
            (-d * d / (2.0 * sigma * sigma)).exp()
        }
    })
}

fn linear_lsq(design: &na::DMatrix<f64>, y: &na::DVector<f64>) -> Option<(na::DVector<f64>, f64)> {
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return None;
    }
    let coef = svd.solve(y, 0.0).ok()?;
    let rss = (y - design * &coef).norm_squared();
    Some((coef, rss))
}

/// Reconstructs photon-number populations from a spectroscopy trace:
/// `S(f) = sum_n A_n exp(-(f - f_n)^2 / 2 sigma_f^2) + B` with shared
/// `sigma_f` and `B`. Amplitudes are solved linearly for each trial
/// `sigma_f`; negative amplitudes are clamped to zero before normalizing.
pub fn fit_multi_gaussian(
    f_grid: &[f64],
    signal: &[f64],
    centers: &[f64],
) -> Result<MultiGaussianFit> {
    if f_grid.len() != signal.len() {
        return Err(Error::DimensionMismatch {
            expected: f_grid.len(),
            got: signal.len(),
        });
    }
    if centers.is_empty() {
        return Err(invalid("centers", "need at least one component"));
    }
    let needed = centers.len() + 2;
    if f_grid.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: f_grid.len(),
        });
    }
    let lo_f = f_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_f = f_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi_f - lo_f;
    let mut sorted = f_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_step = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_step.is_finite() {
        return Err(invalid("f_grid", "needs at least two distinct frequencies"));
    }
    let y = na::DVector::from_column_slice(signal);
    let rss_at = |log_sigma: f64| -> f64 {
        let d = gaussian_design(f_grid, centers, log_sigma.exp());
        linear_lsq(&d, &y).map_or(f64::INFINITY, |(_, r)| r)
    };
    let (lo, hi) = ((0.5 * min_step).ln(), span.ln());
    let (best_log, _) = maximize(|s| -rss_at(s), lo, hi)?;
    let sigma = best_log.exp();
    let min_spacing = {
        let mut c = centers.to_vec();
        c.sort_by(f64::total_cmp);
        c.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    };
    if min_spacing < sigma / 10.0 {
        return Err(Error::SingularDesign(format!(
            "centers {min_spacing:.4e} apart with sigma_f = {sigma:.4e}"
        )));
    }
    let design = gaussian_design(f_grid, centers, sigma);
    let (coef, rss) = linear_lsq(&design, &y).ok_or_else(|| {
        Error::SingularDesign(format!(
            "design matrix is rank deficient at sigma_f = {sigma:.4e}"
        ))
    })?;
    let amplitudes: Vec<f64> = coef.iter().take(centers.len()).copied().collect();
    let clamped: Vec<f64> = amplitudes.iter().map(|a| a.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::SingularDesign(
            "all fitted amplitudes are non-positive".into(),
        ));
    }
    Ok(MultiGaussianFit {
        populations: clamped.iter().map(|a| a / total).collect(),
        amplitudes,
        background: coef[centers.len()],
        sigma_f: sigma,
        residual_norm: rss.sqrt(),
    })
}

/// RSS of the best `c + a cos(f t) + b sin(f t)` at fixed `f`.
fn sinusoid_rss(theta: &[f64], y: &na::DVector<f64>, f: f64) -> f64 {
    let d = na::DMatrix::from_fn(theta.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (f * theta[i]).cos(),
        _ => (f * theta[i]).sin(),
    });
    match linear_lsq(&d, y) {
        Some((_, r)) => r,
        None => f64::INFINITY,
    }
}

/// Dominant angular frequency of a Ramsey trace, in units of the
/// conditional-phase variable: a Fock state `|n>` referenced to `N` gives
/// `|n - N|`.
pub fn fit_ramsey_frequency(theta_grid: &[f64], pg: &[f64]) -> Result<f64> {
    if theta_grid.len() != pg.len() {
        return Err(Error::DimensionMismatch {
            expected: theta_grid.len(),
            got: pg.len(),
        });
    }
    if theta_grid.len() < MIN_CURVE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_CURVE_POINTS,
            got: theta_grid.len(),
        });
    }
    let m = pg.len() as f64;
    let mean = pg.iter().sum::<f64>() / m;
    let var = pg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    if var < 1e-12 {
        return Err(Error::NoPeak);
    }
    let t0 = theta_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t1 = theta_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t1 - t0;
    let mut sorted = theta_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let dt = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let nyquist = PI / dt;
    let df = 2.0 * PI / span / 8.0;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in theta_grid.iter().zip(pg) {
            let (s, c) = (f * (t - t0)).sin_cos();
            re += (v - mean) * c;
            im += (v - mean) * s;
        }
        re * re + im * im
    };
    let freqs: Vec<f64> = (1..)
        .map(|k| k as f64 * df)
        .take_while(|f| *f <= nyquist)
        .collect();
    let spectrum: Vec<f64> = freqs.iter().map(|f| power(*f)).collect();
    let (k, peak) = spectrum
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NoPeak)?;
    let mut sorted_power = spectrum.clone();
    sorted_power.sort_by(f64::total_cmp);
    let median = sorted_power[sorted_power.len() / 2];
    if peak < 10.0 * median {
        return Err(Error::NoPeak);
    }
    let f0 = freqs[k];
    let y = na::DVector::from_column_slice(pg);
    let (lo, hi) = ((f0 - df).max(df / 4.0), f0 + df);
    // golden section on the variable-projection residual
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (
        sinusoid_rss(theta_grid, &y, c),
        sinusoid_rss(theta_grid, &y, d),
    );
    while b - a > 1e-12 * f0.max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sinusoid_rss(theta_grid, &y, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sinusoid_rss(theta_grid, &y, d);
        }
    }
    let f = 0.5 * (a + b);
    if f * span / (2.0 * PI) < 2.0 {
        log::warn!("Ramsey window covers fewer than two periods at frequency {f:.4}");
    }
    Ok(f)
}

/// Counts observed at one grid point. `shots = None` marks an exact
/// probability, which resamples to itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub x: f64,
    pub p_hat: f64,
    pub shots: Option<u64>,
}

/// Binomial sampling of `probs` with `shots` per point (exact when `None`).
pub fn sample_records<R: Rng + ?Sized>(
    grid: &[f64],
    probs: &[f64],
    shots: Option<u64>,
    rng: &mut R,
) -> Result<Vec<ShotRecord>> {
    grid.iter()
        .zip(probs)
        .map(|(&x, &p)| {
            let p_hat = match shots {
                Some(k) if k > 0 => {
                    let dist = Binomial::new(k, p.clamp(0.0, 1.0))
                        .map_err(|e| invalid("probability", e.to_string()))?;
                    dist.sample(rng) as f64 / k as f64
                }
                _ => p,
            };
            Ok(ShotRecord { x, p_hat, shots })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// Mean of `1 / sqrt(F_m)` over resamples.
    pub precision: f64,
    pub std_error: f64,
    /// Precision from the fit to the original records.
    pub point_estimate: f64,
    pub argmax_location: f64,
    pub failures: usize,
    pub resamples: usize,
}

pub const MIN_RESAMPLES: usize = 200;

/// `(argmax, F_m)` of the fitted model's CFI over `[lo, hi]`.
pub fn fitted_fisher_max(
    model: CurveModel,
    fit: &FitResult,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let (a, b) = (fit.parameters[0], fit.parameters[1]);
    maximize(|l| model.fisher(a, b, l), lo, hi)
}

fn precision_of(records: &[ShotRecord], model: CurveModel, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let x: Vec<f64> = records.iter().map(|r| r.x).collect();
    let y: Vec<f64> = records.iter().map(|r| r.p_hat).collect();
    let fit = fit_curve(model, &x, &y)?;
    let (arg, fm) = fitted_fisher_max(model, &fit, lo, hi)?;
    if !(fm > 0.0 && fm.is_finite()) {
        return Err(invalid("fisher", format!("fitted model has F_m = {fm}")));
    }
    Ok((1.0 / fm.sqrt(), arg))
}

/// Nonparametric bootstrap of the precision `1 / sqrt(F_m)`: each resample
/// redraws every grid point's counts from `Binomial(shots, p_hat)`, refits
/// the model and maximizes its Fisher information over the grid range.
///
/// Resample `i` uses stream `i` of a ChaCha8 generator keyed by `seed`, so
/// results do not depend on thread scheduling.
pub fn bootstrap_precision(
    records: &[ShotRecord],
    model: CurveModel,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if resamples < MIN_RESAMPLES {
        return Err(invalid(
            "resamples",
            format!("need at least {MIN_RESAMPLES}, got {resamples}"),
        ));
    }
    if records.is_empty() {
        return Err(Error::TooFewPoints {
            needed: MIN_CURVE_POINTS,
            got: 0,
        });
    }
    let lo = records.iter().map(|r| r.x).fold(f64::INFINITY, f64::min);
    let hi = records
        .iter()
        .map(|r| r.x)
        .fold(f64::NEG_INFINITY, f64::max);
    let (point_estimate, argmax_location) = precision_of(records, model, lo, hi)?;
    let outcomes: Vec<Option<f64>> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let resampled: Vec<ShotRecord> = records
                .iter()
                .map(|r| match r.shots {
                    Some(k) if k > 0 => {
                        let dist = Binomial::new(k, r.p_hat.clamp(0.0, 1.0)).ok()?;
                        Some(ShotRecord {
                            p_hat: dist.sample(&mut rng) as f64 / k as f64,
                            ..*r
                        })
                    }
                    _ => Some(*r),
                })
                .collect::<Option<_>>()?;
            precision_of(&resampled, model, lo, hi).ok().map(|(p, _)| p)
        })
        .collect();
    let good: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = resamples - good.len();
    if failures as f64 > 0.05 * resamples as f64 {
        return Err(Error::BootstrapFailures {
            failed: failures,
            total: resamples,
        });
    }
    let mean = good.iter().sum::<f64>() / good.len() as f64;
    let var =
        good.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (good.len() as f64 - 1.0).max(1.0);
    Ok(BootstrapResult {
        precision: mean,
        std_error: var.sqrt(),
        point_estimate,
        argmax_location,
        failures,
        resamples,
    })
}

/// Ordinary least squares on `(log10 x, log10 y)`; returns
/// `(exponent, intercept)`.
pub fn fit_scaling_exponent(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid("data", "all values must be positive and finite"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "needs at least two distinct values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
