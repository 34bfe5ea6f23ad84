//! Sensing curves, classical and quantum Fisher information, and precision
//! reports.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fockspace::{ladder_ops, number_op, HilbertSpec, LinearOp, PureState};
use crate::special::{laguerre, laguerre_deriv};
use crate::C64;

/// Probabilities closer than this to 0 or 1 make the binary CFI degenerate.
pub const CLAMP: f64 = 1e-12;

/// Step of [`central_difference`].
pub const DIFF_STEP: f64 = 1e-6;

/// Points of the coarse grid in [`maximize`].
pub const GRID_POINTS: usize = 401;

/// Golden-section tolerance on the argmax.
pub const ARGMAX_TOL: f64 = 1e-4;

fn sign(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Ground-state probability of the parity measurement on `D(beta)|N>`,
/// `1/2 + 1/2 (-1)^N L_N(4 beta^2) exp(-2 beta^2)`.
pub fn parity_curve_ideal(n: u32, beta: f64) -> f64 {
    let x = 4.0 * beta * beta;
    0.5 + 0.5 * sign(n) * laguerre(n as i64, x) * (-0.5 * x).exp()
}

/// `d/d beta` of [`parity_curve_ideal`].
pub fn parity_curve_ideal_deriv(n: u32, beta: f64) -> f64 {
    let x = 4.0 * beta * beta;
    let ni = n as i64;
    0.5 * sign(n) * (-0.5 * x).exp() * beta * (8.0 * laguerre_deriv(ni, x) - 4.0 * laguerre(ni, x))
}

/// Phase-sensing curve for the probe `D(gamma)|N>`: the parity curve at the
/// effective displacement `|phi gamma|`. Valid for small `phi`.
pub fn phase_curve_ideal(n: u32, gamma: f64, phi: f64) -> f64 {
    parity_curve_ideal(n, (phi * gamma).abs())
}

/// `d/d phi` of [`phase_curve_ideal`].
pub fn phase_curve_ideal_deriv(n: u32, gamma: f64, phi: f64) -> f64 {
    let b = phi * gamma;
    // the parity curve is even in beta, so its derivative is odd
    gamma * parity_curve_ideal_deriv(n, b)
}

/// `(f(x + h) - f(x - h)) / 2h` with `h = 1e-6`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + DIFF_STEP) - f(x - DIFF_STEP)) / (2.0 * DIFF_STEP)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cfi {
    pub value: f64,
    /// The probability sat at the clamp and the value was set to zero.
    pub degenerate: bool,
}

/// Binary-outcome classical Fisher information `P'^2 / (P (1 - P))`.
///
/// Without an analytic derivative a central difference is used.
pub fn cfi_of_curve(p: impl Fn(f64) -> f64, dp: Option<&dyn Fn(f64) -> f64>, lambda: f64) -> Cfi {
    let pv = p(lambda);
    if !(pv > CLAMP && pv < 1.0 - CLAMP) {
        return Cfi {
            value: 0.0,
            degenerate: true,
        };
    }
    let d = match dp {
        Some(f) => f(lambda),
        None => central_difference(&p, lambda),
    };
    Cfi {
        value: d * d / (pv * (1.0 - pv)),
        degenerate: false,
    }
}

/// CFI of the ideal parity curve for `D(beta)|N>`.
pub fn parity_cfi(n: u32, beta: f64) -> f64 {
    cfi_of_curve(
        |b| parity_curve_ideal(n, b),
        Some(&|b| parity_curve_ideal_deriv(n, b)),
        beta,
    )
    .value
}

/// CFI of the ideal phase curve for `D(gamma)|N>`.
pub fn phase_cfi(n: u32, gamma: f64, phi: f64) -> f64 {
    cfi_of_curve(
        |f| phase_curve_ideal(n, gamma, f),
        Some(&|f| phase_curve_ideal_deriv(n, gamma, f)),
        phi,
    )
    .value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `h_beta = i(a^dagger - a)`, so `D(beta) = exp(-i beta h_beta)` for
    /// real `beta`.
    DisplacementAmplitude,
    /// `h_phi = a^dagger a`.
    PhaseRotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub operator: LinearOp,
}

impl Generator {
    pub fn new(kind: GeneratorKind, spec: HilbertSpec) -> Self {
        let operator = match kind {
            GeneratorKind::DisplacementAmplitude => {
                let (a, ad) = ladder_ops(spec);
                let m = (ad.matrix() - a.matrix()).mapv(|z| z * C64::i());
                LinearOp::new(m, spec).expect("same spec")
            }
            GeneratorKind::PhaseRotation => number_op(spec),
        };
        Self { kind, operator }
    }
}

/// `4 (<h^2> - <h>^2)` for a pure state.
pub fn qfi_pure(generator: &Generator, state: &PureState) -> Result<f64> {
    state.check_interior()?;
    if generator.operator.spec() != state.spec() {
        return Err(crate::Error::DimensionMismatch {
            expected: state.spec().dim(),
            got: generator.operator.spec().dim(),
        });
    }
    let psi = state.amplitudes();
    let hpsi = generator.operator.apply(psi);
    let mean: C64 = psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
    let second: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();
    Ok(4.0 * (second - mean.re * mean.re))
}

/// `(delta_beta_sql, delta_phi_sql) = (1/2, 1/(2 sqrt(n)))`.
pub fn sql_baselines(n_mean: f64) -> (f64, f64) {
    (0.5, 0.5 / n_mean.sqrt())
}

/// Ideal Fock-state displacement precision `1 / (2 sqrt(2N + 1))`.
pub fn fock_displacement_precision(n: u32) -> f64 {
    0.5 / (2.0 * n as f64 + 1.0).sqrt()
}

/// Fisher information of the photon-number-resolved scheme,
/// `sum_n p_n F(n)`.
pub fn weighted_fisher(populations: &[(usize, f64)], per_n: impl Fn(usize) -> f64) -> Result<f64> {
    let total: f64 = populations.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(invalid(
            "populations",
            format!("must sum to 1 within 1e-6, got {total}"),
        ));
    }
    Ok(populations.iter().map(|(n, p)| p * per_n(*n)).sum())
}

/// Closed form of the resolved phase scheme, `4 gamma^2 [2(n_mean - gamma^2) + 1]`,
/// with `n_mean` the post-displacement mean photon number.
pub fn resolved_phase_fisher(gamma_sq: f64, n_mean: f64) -> f64 {
    4.0 * gamma_sq * (2.0 * (n_mean - gamma_sq) + 1.0)
}

/// Displacement `|gamma|^2 = N + 1/2` that maximizes the phase QFI of a
/// displaced Fock state with (mean) photon number `N`.
pub fn optimal_phase_displacement(n_mean_fock: f64) -> f64 {
    n_mean_fock.max(0.0) + 0.5
}

/// Optimal phase QFI `2 n (n + 1) + 1/2` with `n` the total mean photon number.
pub fn optimal_phase_qfi(n_mean_total: f64) -> f64 {
    2.0 * n_mean_total * (n_mean_total + 1.0) + 0.5
}

/// `20 log10(reference / achieved)` for precisions.
pub fn gain_db_precision(reference: f64, achieved: f64) -> f64 {
    20.0 * (reference / achieved).log10()
}

/// `10 log10(achieved / reference)` for Fisher informations.
pub fn gain_db_fisher(achieved: f64, reference: f64) -> f64 {
    10.0 * (achieved / reference).log10()
}

/// Maximum of `f` on `[lo, hi]`: a 401-point grid followed by golden-section
/// refinement around the best grid point. Returns `(argmax, max)`.
pub fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(invalid("range", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let values: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            let v = f(lo + i as f64 * step);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect();
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let mut a = lo + best.saturating_sub(1) as f64 * step;
    let mut b = lo + (best + 1).min(GRID_POINTS - 1) as f64 * step;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > ARGMAX_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let grid_best = (lo + best as f64 * step, values[best]);
    Ok(if fx >= grid_best.1 {
        (x, fx)
    } else {
        grid_best
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Beta,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionReport {
    pub parameter: Parameter,
    pub fisher_max: f64,
    pub precision: f64,
    pub sql_precision: f64,
    pub gain_db: f64,
    pub argmax_location: f64,
}

impl PrecisionReport {
    pub fn from_fisher(
        parameter: Parameter,
        fisher_max: f64,
        argmax_location: f64,
        sql_precision: f64,
    ) -> Result<Self> {
        if !(fisher_max > 0.0 && fisher_max.is_finite()) {
            return Err(invalid(
                "fisher_max",
                format!("must be positive and finite, got {fisher_max}"),
            ));
        }
        let precision = 1.0 / fisher_max.sqrt();
        Ok(Self {
            parameter,
            fisher_max,
            precision,
            sql_precision,
            gain_db: gain_db_precision(sql_precision, precision),
            argmax_location,
        })
    }
}

/// Locates the Fisher maximum of `fisher` over `[lo, hi]` and reports the
/// implied precision against `sql_precision`.
pub fn precision_report(
    parameter: Parameter,
    fisher: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    sql_precision: f64,
) -> Result<PrecisionReport> {
    let (x, fmax) = maximize(fisher, lo, hi)?;
    PrecisionReport::from_fisher(parameter, fmax, x, sql_precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{coherent_state, displaced_fock};

    #[test]
    fn parity_curve_examples() {
        assert_eq!(parity_curve_ideal(0, 0.0), 1.0);
        assert!(parity_curve_ideal(1, 0.0).abs() < 1e-15);
        let want = 0.5 + 0.5 * (1.0 - 2.0 + 0.5) * (-0.5f64).exp();
        assert!((parity_curve_ideal(2, 0.5) - want).abs() < 1e-14);
        assert!((parity_curve_ideal(2, 0.5) - 0.3484).abs() < 1e-4);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for n in [0, 1, 4, 13] {
            for beta in [0.05, 0.3, 0.9] {
                let fd = central_difference(|b| parity_curve_ideal(n, b), beta);
                assert!((fd - parity_curve_ideal_deriv(n, beta)).abs() < 1e-7);
                let fd = central_difference(|p| phase_curve_ideal(n, 2.0, p), beta / 3.0);
                assert!((fd - phase_curve_ideal_deriv(n, 2.0, beta / 3.0)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn phase_curve_examples() {
        assert_eq!(phase_curve_ideal(4, 2.0, 0.0), parity_curve_ideal(4, 0.0));
        for n in 0..=20 {
            for i in 0..=10 {
                let phi = i as f64 * 0.05 / (n as f64 + 1.0).sqrt();
                let g = (n as f64).sqrt().max(1.0);
                let a = phase_curve_ideal(n, g, phi);
                let b = parity_curve_ideal(n, (phi * g).abs());
                assert!((a - b).abs() < 1e-12);
            }
        }
        let v = phase_curve_ideal(3, 3f64.sqrt(), 0.1);
        assert!((v - parity_curve_ideal(3, 0.1 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn cfi_examples() {
        let f = parity_cfi(2, 1e-3);
        assert!((f / 20.0 - 1.0).abs() < 5e-3);
        // second-order coefficient from a symbolic series expansion of the
        // closed-form curve; N = 1..5 give 24, 56, 104, 168, 248
        let resid = |beta: f64| {
            let n = 3.0;
            let series = 4.0 * (2.0 * n + 1.0) - 4.0 * (2.0 * n * n + 2.0 * n + 2.0) * beta * beta;
            (parity_cfi(3, beta) - series).abs()
        };
        // halving beta shrinks an O(beta^3) remainder at least eightfold
        assert!(resid(0.05) / resid(0.025) > 7.5);
        assert!(resid(0.05) < 2e-3);
        let f = phase_cfi(5, 5f64.sqrt(), 1e-4);
        assert!((f / 220.0 - 1.0).abs() < 5e-3);

        let d = cfi_of_curve(|_| 1.0, None, 0.3);
        assert!(d.degenerate);
        assert_eq!(d.value, 0.0);
        let numeric = cfi_of_curve(|b| parity_curve_ideal(3, b), None, 0.2).value;
        assert!((numeric - parity_cfi(3, 0.2)).abs() < 1e-6 * numeric);
    }

    #[test]
    fn qfi_examples() {
        let spec = HilbertSpec::new(60, 20).unwrap();
        let hb = Generator::new(GeneratorKind::DisplacementAmplitude, spec);
        let coh = coherent_state(C64::new(3f64.sqrt(), 0.0), spec).unwrap();
        assert!((qfi_pure(&hb, &coh).unwrap() - 4.0).abs() < 1e-9);
        let fock = PureState::fock(10, spec).unwrap();
        assert!((qfi_pure(&hb, &fock).unwrap() - 84.0).abs() < 1e-9);

        let spec = HilbertSpec::new(120, 60).unwrap();
        let hp = Generator::new(GeneratorKind::PhaseRotation, spec);
        let st = displaced_fock(5, C64::new(5f64.sqrt(), 0.0), spec).unwrap();
        assert!((qfi_pure(&hp, &st).unwrap() - 220.0).abs() < 1e-6 * 220.0);

        let g2 = optimal_phase_displacement(5.0);
        assert_eq!(g2, 5.5);
        let st = displaced_fock(5, C64::new(g2.sqrt(), 0.0), spec).unwrap();
        let q = qfi_pure(&hp, &st).unwrap();
        assert!((q - optimal_phase_qfi(10.5)).abs() < 1e-6);
        assert_eq!(optimal_phase_displacement(0.0), 0.5);
    }

    #[test]
    fn comparison_states() {
        let spec = HilbertSpec::new(60, 20).unwrap();
        let hp = Generator::new(GeneratorKind::PhaseRotation, spec);
        let n = 8;
        let mut v = ndarray::Array1::zeros(60);
        v[0] = C64::new(1.0, 0.0);
        v[n] = C64::new(1.0, 0.0);
        let noon = PureState::from_unnormalized(v, spec).unwrap().0;
        let nbar = n as f64 / 2.0;
        assert!((qfi_pure(&hp, &noon).unwrap() - 4.0 * nbar * nbar).abs() < 1e-9);
        let coh = coherent_state(C64::new(2.0, 1.0), spec).unwrap();
        assert!((qfi_pure(&hp, &coh).unwrap() - 20.0).abs() < 1e-8);
    }

    #[test]
    fn baselines_and_gain() {
        assert_eq!(sql_baselines(100.0), (0.5, 0.05));
        assert_eq!(sql_baselines(1.0), (0.5, 0.5));
        assert_eq!(gain_db_precision(0.5, 0.5), 0.0);
        assert_eq!(gain_db_fisher(4.0, 4.0), 0.0);
        assert!((gain_db_fisher(40.0, 4.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_fisher_examples() {
        let lambda: f64 = 3.0;
        let mut pops: Vec<(usize, f64)> = (0..8usize)
            .map(|n| {
                let lf: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                (n, (n as f64 * lambda.ln() - lambda - lf).exp())
            })
            .collect();
        let total: f64 = pops.iter().map(|p| p.1).sum();
        pops.iter_mut().for_each(|p| p.1 /= total);
        let nbar: f64 = pops.iter().map(|(n, p)| *n as f64 * p).sum();
        let f = weighted_fisher(&pops, |n| 4.0 * (2.0 * n as f64 + 1.0)).unwrap();
        assert!((f - 4.0 * (2.0 * nbar + 1.0)).abs() < 1e-12);
        assert_eq!(weighted_fisher(&[(7, 1.0)], |n| n as f64).unwrap(), 7.0);
        assert!(weighted_fisher(&[(1, 0.5)], |n| n as f64).is_err());
    }

    #[test]
    fn maximizer_and_report() {
        let (x, fx) = maximize(|x| -(x - 0.3137).powi(2) + 2.0, 0.0, 1.0).unwrap();
        assert!((x - 0.3137).abs() < ARGMAX_TOL);
        assert!((fx - 2.0).abs() < 1e-8);
        let r = precision_report(Parameter::Beta, |b| parity_cfi(4, b), 1e-4, 1.0, 0.5).unwrap();
        assert!((r.precision * r.fisher_max.sqrt() - 1.0).abs() < 1e-10);
        assert!((r.fisher_max - 36.0).abs() < 0.01);
        assert!((r.gain_db - gain_db_precision(0.5, r.precision)).abs() < 1e-12);
        assert!(maximize(|x| x, 1.0, 1.0).is_err());
    }
}
