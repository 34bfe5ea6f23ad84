//! Truncated Fock-basis linear algebra.
//!
//! A [`HilbertSpec`] fixes the truncation dimension and a guard band of
//! levels at the top of the basis. Results are only promised on the
//! *interior* block, indices `< dim - guard`.

use std::f64::consts::PI;

use nalgebra as na;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_factorials, scaled_laguerre_column};
use crate::C64;

/// Population allowed outside the interior block.
pub const INTERIOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpec {
    dim: usize,
    guard: usize,
}

impl HilbertSpec {
    pub fn new(dim: usize, guard: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!("dim must be >= 2, got {dim}")));
        }
        if guard >= dim {
            return Err(Error::InvalidSpace(format!(
                "guard {guard} leaves no interior in dim {dim}"
            )));
        }
        Ok(Self { dim, guard })
    }

    /// Default truncation for states occupying photon numbers up to `n_max`:
    /// `dim = n_max + ceil(6 sqrt(n_max)) + 20`, with the interior reaching
    /// exactly `n_max`.
    pub fn for_photon_number(n_max: usize) -> Self {
        let headroom = (6.0 * (n_max as f64).sqrt()).ceil() as usize + 20;
        let dim = n_max + headroom;
        Self {
            dim,
            guard: dim - n_max - 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Number of interior levels, `dim - guard`.
    pub fn interior(&self) -> usize {
        self.dim - self.guard
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }
}

/// A normalized state vector in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Array1<C64>,
    spec: HilbertSpec,
}

impl PureState {
    /// Normalizes `amplitudes`. Fails on a length mismatch or a zero vector.
    pub fn new(amplitudes: Array1<C64>, spec: HilbertSpec) -> Result<Self> {
        Self::from_unnormalized(amplitudes, spec).map(|(s, _)| s)
    }

    /// Normalizes and also returns the squared norm of the input, which is
    /// the success probability when the input is a post-selected branch.
    pub fn from_unnormalized(amplitudes: Array1<C64>, spec: HilbertSpec) -> Result<(Self, f64)> {
        spec.check_len(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: format!("cannot normalize vector with squared norm {norm_sqr}"),
            });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok((
            Self {
                amplitudes: amplitudes.mapv(|a| a * scale),
                spec,
            },
            norm_sqr,
        ))
    }

    pub fn fock(n: usize, spec: HilbertSpec) -> Result<Self> {
        if n >= spec.dim {
            return Err(Error::Truncation {
                tail: 1.0,
                dim: spec.dim,
            });
        }
        let mut amps = Array1::zeros(spec.dim);
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: amps,
            spec,
        })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    pub fn photon_number_std(&self) -> f64 {
        let mean = self.mean_photon_number();
        let var: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| (n as f64 - mean).powi(2) * a.norm_sqr())
            .sum();
        var.max(0.0).sqrt()
    }

    /// Population at indices `>= dim - guard`.
    pub fn guard_population(&self) -> f64 {
        self.amplitudes
            .iter()
            .skip(self.spec.interior())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn check_interior(&self) -> Result<()> {
        let tail = self.guard_population();
        if tail > INTERIOR_TOL {
            return Err(Error::InteriorViolation(format!(
                "population {tail:.3e} inside the guard band of dim {}",
                self.spec.dim
            )));
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<n|self>|^2`.
    pub fn fock_fidelity(&self, n: usize) -> f64 {
        self.amplitudes.get(n).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn to_mixed(&self) -> MixedState {
        let d = self.spec.dim;
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        MixedState {
            matrix: m,
            spec: self.spec,
        }
    }

    /// Applies `op` and renormalizes. The returned scalar is the squared
    /// norm before renormalization.
    pub fn transformed(&self, op: &LinearOp) -> Result<(PureState, f64)> {
        PureState::from_unnormalized(op.apply(&self.amplitudes), self.spec)
    }
}

/// A density matrix in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    matrix: Array2<C64>,
    spec: HilbertSpec,
}

impl MixedState {
    /// Accepts a matrix that is Hermitian within `1e-10`; the stored copy is
    /// exactly Hermitian.
    pub fn new(matrix: Array2<C64>, spec: HilbertSpec) -> Result<Self> {
        let (r, c) = matrix.dim();
        spec.check_len(r)?;
        spec.check_len(c)?;
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!("not Hermitian (defect {defect:.3e})"),
            });
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            spec,
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = to_nalgebra(&self.matrix);
        let eig = na::SymmetricEigen::new(m);
        eig.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Trace within `1e-8` of one and no eigenvalue below `-1e-8`.
    pub fn check_physical(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter {
                name: "trace",
                reason: format!("trace {tr} differs from 1"),
            });
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidParameter {
                name: "eigenvalues",
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    /// `op * rho * op^dagger`, without renormalization.
    pub fn conjugated(&self, op: &LinearOp) -> MixedState {
        let m = op.matrix.dot(&self.matrix).dot(&dagger(&op.matrix));
        MixedState {
            matrix: hermitian_part(&m),
            spec: self.spec,
        }
    }
}

/// A dense operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    matrix: Array2<C64>,
    spec: HilbertSpec,
}

impl LinearOp {
    pub fn new(matrix: Array2<C64>, spec: HilbertSpec) -> Result<Self> {
        let (r, c) = matrix.dim();
        spec.check_len(r)?;
        spec.check_len(c)?;
        Ok(Self { matrix, spec })
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        Self {
            matrix: Array2::eye(spec.dim),
            spec,
        }
    }

    pub fn diagonal(spec: HilbertSpec, f: impl Fn(usize) -> C64) -> Self {
        let mut m = Array2::zeros((spec.dim, spec.dim));
        for n in 0..spec.dim {
            m[[n, n]] = f(n);
        }
        Self { matrix: m, spec }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(v)
    }

    pub fn compose(&self, rhs: &LinearOp) -> LinearOp {
        LinearOp {
            matrix: self.matrix.dot(&rhs.matrix),
            spec: self.spec,
        }
    }

    pub fn dagger(&self) -> LinearOp {
        LinearOp {
            matrix: dagger(&self.matrix),
            spec: self.spec,
        }
    }

    /// `max |(U^dagger U - I)_{ij}|` over the interior block.
    pub fn unitarity_defect(&self) -> f64 {
        let p = dagger(&self.matrix).dot(&self.matrix);
        let k = self.spec.interior();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[[i, j]] - target).norm());
            }
        }
        worst
    }
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub(crate) fn hermitian_part(m: &Array2<C64>) -> Array2<C64> {
    let d = dagger(m);
    (m + &d).mapv(|z| z * 0.5)
}

pub(crate) fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let (r, _) = m.dim();
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in i..r {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub(crate) fn to_nalgebra(m: &Array2<C64>) -> na::DMatrix<C64> {
    let (r, c) = m.dim();
    na::DMatrix::from_fn(r, c, |i, j| m[[i, j]])
}

pub(crate) fn from_nalgebra(m: &na::DMatrix<C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Annihilation and creation operators `(a, a^dagger)`.
pub fn ladder_ops(spec: HilbertSpec) -> (LinearOp, LinearOp) {
    let d = spec.dim;
    let mut lower = Array2::zeros((d, d));
    for n in 1..d {
        lower[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let raise = dagger(&lower);
    (
        LinearOp {
            matrix: lower,
            spec,
        },
        LinearOp {
            matrix: raise,
            spec,
        },
    )
}

pub fn number_op(spec: HilbertSpec) -> LinearOp {
    LinearOp::diagonal(spec, |n| C64::new(n as f64, 0.0))
}

/// `(-1)^{a^dagger a}`.
pub fn parity_op(spec: HilbertSpec) -> LinearOp {
    LinearOp::diagonal(spec, |n| C64::new(parity_sign(n), 0.0))
}

fn parity_sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coherent state `|alpha>` with amplitudes built in log space,
/// `ln|c_n| = n ln|alpha| - ln(n!)/2 - |alpha|^2/2`.
pub fn coherent_state(alpha: C64, spec: HilbertSpec) -> Result<PureState> {
    let mean = alpha.norm_sqr();
    if mean > spec.interior() as f64 {
        return Err(Error::InteriorViolation(format!(
            "|alpha|^2 = {mean} exceeds the interior size {}",
            spec.interior()
        )));
    }
    let d = spec.dim;
    let mut amps = Array1::zeros(d);
    if mean == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
        return Ok(PureState {
            amplitudes: amps,
            spec,
        });
    }
    let lf = ln_factorials(d);
    let ln_r = alpha.norm().ln();
    let arg = alpha.arg();
    for n in 0..d {
        let nf = n as f64;
        let mag = (nf * ln_r - 0.5 * lf[n] - 0.5 * mean).exp();
        amps[n] = C64::from_polar(mag, nf * arg);
    }
    let kept: f64 = amps.iter().map(|a: &C64| a.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail > INTERIOR_TOL {
        return Err(Error::Truncation { tail, dim: d });
    }
    PureState::new(amps, spec)
}

/// `D(beta) = exp(beta a^dagger - beta^* a)` from closed-form matrix
/// elements
///
/// `<m|D|n> = sqrt(n!/m!) beta^{m-n} e^{-|beta|^2/2} L_n^{(m-n)}(|beta|^2)`
/// for `m >= n`, and `(-1)^{n-m}` times the conjugate form above the
/// diagonal.
///
/// Fails if any interior column leaks more than `1e-10` of its norm past
/// the truncation.
pub fn displacement(beta: C64, spec: HilbertSpec) -> Result<LinearOp> {
    let op = displacement_unchecked(beta, spec);
    let d = spec.dim;
    for n in 0..spec.interior() {
        let kept: f64 = (0..d).map(|m| op.matrix[[m, n]].norm_sqr()).sum();
        let leak = 1.0 - kept;
        if leak > INTERIOR_TOL {
            return Err(Error::InteriorViolation(format!(
                "D({beta}) leaks {leak:.3e} from column {n} of dim {d}; increase dim or guard"
            )));
        }
    }
    Ok(op)
}

/// [`displacement`] without the interior leakage check.
pub fn displacement_unchecked(beta: C64, spec: HilbertSpec) -> LinearOp {
    let d = spec.dim;
    let x = beta.norm_sqr();
    let mut m = Array2::zeros((d, d));
    if x == 0.0 {
        return LinearOp::identity(spec);
    }
    let lf = ln_factorials(d);
    let ln_r = beta.norm().ln();
    let arg = beta.arg();
    for k in 0..d {
        // c_k = beta^k e^{-x/2} / sqrt(k!)
        let kf = k as f64;
        let mag = (kf * ln_r - 0.5 * lf[k] - 0.5 * x).exp();
        if mag == 0.0 {
            continue;
        }
        let below = C64::from_polar(mag, kf * arg);
        // (-beta^*)^k = (-1)^k conj(beta)^k
        let above = below.conj() * parity_sign(k);
        let h = scaled_laguerre_column(d - k, k, x);
        for (n, hn) in h.iter().enumerate() {
            m[[n + k, n]] = below * hn;
            if k > 0 {
                m[[n, n + k]] = above * hn;
            }
        }
    }
    LinearOp { matrix: m, spec }
}

/// `D(gamma)|n>`.
pub fn displaced_fock(n: usize, gamma: C64, spec: HilbertSpec) -> Result<PureState> {
    let fock = PureState::fock(n, spec)?;
    let d = displacement_unchecked(gamma, spec);
    let (state, _) = fock.transformed(&d)?;
    let kept: f64 = (0..spec.dim).map(|m| d.matrix[[m, n]].norm_sqr()).sum();
    if 1.0 - kept > INTERIOR_TOL {
        return Err(Error::Truncation {
            tail: 1.0 - kept,
            dim: spec.dim,
        });
    }
    state.check_interior()?;
    Ok(state)
}

/// `Tr[rho (-1)^{a^dagger a}]`.
pub fn parity_expectation(state: &MixedState) -> f64 {
    state
        .matrix
        .diag()
        .iter()
        .enumerate()
        .map(|(n, z)| parity_sign(n) * z.re)
        .sum()
}

pub fn parity_expectation_pure(state: &PureState) -> f64 {
    parity_of_vector(&state.amplitudes)
}

fn parity_of_vector(v: &Array1<C64>) -> f64 {
    v.iter()
        .enumerate()
        .map(|(n, a)| parity_sign(n) * a.norm_sqr())
        .sum()
}

/// `W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) Pi]`.
///
/// Fails if the displaced state loses more than `1e-10` of its trace to the
/// truncation.
pub fn wigner_value(state: &MixedState, alpha: C64) -> Result<f64> {
    let d = displacement_unchecked(-alpha, state.spec);
    // diag(D rho D^dagger)_n = sum_k (D rho)_{nk} conj(D_{nk})
    let m = d.matrix.dot(&state.matrix);
    let dim = state.spec.dim;
    let mut parity = 0.0;
    let mut kept = 0.0;
    for n in 0..dim {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..dim {
            s += m[[n, k]] * d.matrix[[n, k]].conj();
        }
        parity += parity_sign(n) * s.re;
        kept += s.re;
    }
    check_displaced_norm(state.trace() - kept, alpha, dim)?;
    Ok(2.0 / PI * parity)
}

pub fn wigner_value_pure(state: &PureState, alpha: C64) -> Result<f64> {
    let d = displacement_unchecked(-alpha, state.spec);
    let v = d.apply(&state.amplitudes);
    let kept: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    check_displaced_norm(1.0 - kept, alpha, state.spec.dim)?;
    Ok(2.0 / PI * parity_of_vector(&v))
}

fn check_displaced_norm(leak: f64, alpha: C64, dim: usize) -> Result<()> {
    if leak > INTERIOR_TOL {
        return Err(Error::InteriorViolation(format!(
            "displacing by {alpha} leaks {leak:.3e} past dim {dim}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spec_validation() {
        assert!(HilbertSpec::new(1, 0).is_err());
        assert!(HilbertSpec::new(4, 4).is_err());
        let s = HilbertSpec::for_photon_number(100);
        assert_eq!(s.dim(), 100 + 60 + 20);
        assert_eq!(s.interior(), 101);
    }

    #[test]
    fn ladder_definitions() {
        let spec = HilbertSpec::new(6, 1).unwrap();
        let (a, ad) = ladder_ops(spec);
        let one = PureState::fock(1, spec).unwrap();
        let v = a.apply(one.amplitudes());
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-15);
        let num = ad.compose(&a);
        for n in 0..6 {
            assert!((num.matrix()[[n, n]].re - n as f64).abs() < 1e-12);
        }
        let comm = &a.compose(&ad).matrix - &ad.compose(&a).matrix;
        for n in 0..5 {
            assert!((comm[[n, n]].re - 1.0).abs() < 1e-12);
        }
        assert!((comm[[5, 5]].re - (1.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn coherent_examples() {
        let spec = HilbertSpec::new(40, 5).unwrap();
        let vac = coherent_state(c(0.0, 0.0), spec).unwrap();
        assert_eq!(vac.fock_fidelity(0), 1.0);

        let s3 = coherent_state(c(3f64.sqrt(), 0.0), spec).unwrap();
        let p3 = (-3f64).exp() * 27.0 / 6.0;
        assert!((s3.populations()[3] - p3).abs() < 1e-12);
        assert!((p3 - 0.2240).abs() < 1e-4);

        let big = HilbertSpec::new(120, 10).unwrap();
        let s50 = coherent_state(c(50f64.sqrt(), 0.0), big).unwrap();
        assert!((s50.mean_photon_number() - 50.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_truncation_error() {
        let spec = HilbertSpec::new(30, 2).unwrap();
        assert!(matches!(
            coherent_state(c(5.0, 0.0), spec),
            Err(Error::Truncation { .. })
        ));
        let tiny = HilbertSpec::new(10, 8).unwrap();
        assert!(coherent_state(c(2.0, 0.0), tiny).is_err());
    }

    #[test]
    fn displacement_identity_and_vacuum() {
        let spec = HilbertSpec::new(64, 32).unwrap();
        let id = displacement(c(0.0, 0.0), spec).unwrap();
        assert_eq!(id.matrix(), LinearOp::identity(spec).matrix());

        let beta = c(1.0, 0.5);
        let dop = displacement(beta, spec).unwrap();
        let vac = PureState::fock(0, spec).unwrap();
        let v = dop.apply(vac.amplitudes());
        let coh = coherent_state(beta, spec).unwrap();
        for n in 0..64 {
            assert!((v[n] - coh.amplitudes()[n]).norm() < 1e-10);
        }
    }

    #[test]
    fn displacement_inverse_on_interior() {
        let spec = HilbertSpec::new(128, 60).unwrap();
        let plus = displacement(c(2.0, 0.0), spec).unwrap();
        let minus = displacement(c(-2.0, 0.0), spec).unwrap();
        let p = plus.compose(&minus);
        for i in 0..spec.interior() {
            for j in 0..spec.interior() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((p.matrix()[[i, j]] - c(t, 0.0)).norm() < 1e-8, "{i},{j}");
            }
        }
        assert!(plus.unitarity_defect() < 1e-8);
    }

    #[test]
    fn displacement_guard_too_small() {
        let spec = HilbertSpec::new(20, 1).unwrap();
        assert!(matches!(
            displacement(c(2.0, 0.0), spec),
            Err(Error::InteriorViolation(_))
        ));
    }

    #[test]
    fn parity_examples() {
        let spec = HilbertSpec::new(60, 20).unwrap();
        for n in 0..5 {
            let f = PureState::fock(n, spec).unwrap().to_mixed();
            assert_eq!(parity_expectation(&f), if n % 2 == 0 { 1.0 } else { -1.0 });
        }
        let d = displacement(c(0.5, 0.0), spec).unwrap();
        let st = PureState::fock(0, spec).unwrap().transformed(&d).unwrap().0;
        assert!((parity_expectation(&st.to_mixed()) - (-0.5f64).exp()).abs() < 1e-12);

        let s3 = coherent_state(c(3f64.sqrt(), 0.0), spec).unwrap();
        let p = parity_expectation_pure(&s3);
        assert!((p - (-6f64).exp()).abs() < 1e-12);
        assert!((p - 0.00248).abs() < 1e-5);
    }

    #[test]
    fn wigner_examples() {
        let spec = HilbertSpec::new(50, 25).unwrap();
        for n in [0usize, 1, 4] {
            let rho = PureState::fock(n, spec).unwrap().to_mixed();
            let w = wigner_value(&rho, c(0.0, 0.0)).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((w - sign * 2.0 / PI).abs() < 1e-12);
        }
        let vac = PureState::fock(0, spec).unwrap();
        let a = c(0.4, -0.3);
        let w = wigner_value(&vac.to_mixed(), a).unwrap();
        let want = 2.0 / PI * (-2.0 * a.norm_sqr()).exp();
        assert!((w - want).abs() < 1e-12);
        assert!((wigner_value_pure(&vac, a).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_checks() {
        let spec = HilbertSpec::new(16, 4).unwrap();
        let rho = coherent_state(c(0.8, 0.1), spec).unwrap().to_mixed();
        rho.check_physical().unwrap();
        assert!(rho.min_eigenvalue() > -1e-12);
        let mut bad = rho.matrix().clone();
        bad[[0, 1]] += c(0.1, 0.0);
        assert!(MixedState::new(bad, spec).is_err());
    }
}
