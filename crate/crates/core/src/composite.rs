//! Qubit-cavity dispersive model and photon-number filtration (PNF).
//!
//! Composite vectors are ordered qubit-major: index `q * dim + n` with
//! `q = 0` for `|g>` and `q = 1` for `|e>`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fockspace::{coherent_state, HilbertSpec, MixedState, PureState};
use crate::C64;

/// Qubit thermal population from device characterization. Not part of the
/// dynamics; available as a background offset for fits.
pub const QUBIT_THERMAL_POPULATION: f64 = 0.02;

/// Filters whose success probability falls below this are starved.
pub const STARVATION_THRESHOLD: f64 = 1e-12;

/// Hamiltonian and decoherence constants plus protocol durations.
///
/// Frequencies are angular (rad/s), rates in 1/s, durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub chi_qc: f64,
    pub chi2_qc: f64,
    pub kerr_c: f64,
    /// Cavity decay, `1/T1` of the cavity.
    pub kappa1: f64,
    /// Cavity dephasing, `1/T_phi` of the cavity.
    pub kappa2: f64,
    /// Qubit decay.
    pub kappa3: f64,
    /// Qubit dephasing.
    pub kappa4: f64,
    pub t_i: f64,
    pub t_m: f64,
    pub t_d: f64,
    pub readout_fidelity: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let two_pi = 2.0 * PI;
        Self {
            chi_qc: two_pi * 0.626e6,
            chi2_qc: two_pi * 0.328e3,
            kerr_c: two_pi * 0.44e3,
            kappa1: 1.0 / 1.2e-3,
            kappa2: 1.0 / 4.0e-3,
            kappa3: 1.0 / 93e-6,
            kappa4: 1.0 / 445e-6,
            t_i: 3e-6,
            t_m: 1600e-9,
            t_d: 200e-9,
            readout_fidelity: 0.995,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("chi_qc", self.chi_qc),
            ("chi2_qc", self.chi2_qc),
            ("kerr_c", self.kerr_c),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa3", self.kappa3),
            ("kappa4", self.kappa4),
            ("t_i", self.t_i),
            ("t_m", self.t_m),
            ("t_d", self.t_d),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.5..=1.0).contains(&self.readout_fidelity) {
            return Err(invalid(
                "readout_fidelity",
                format!("must lie in [0.5, 1], got {}", self.readout_fidelity),
            ));
        }
        Ok(())
    }

    /// Copy with all four decoherence rates multiplied by `s`.
    pub fn with_rates_scaled(&self, s: f64) -> Self {
        Self {
            kappa1: self.kappa1 * s,
            kappa2: self.kappa2 * s,
            kappa3: self.kappa3 * s,
            kappa4: self.kappa4 * s,
            ..*self
        }
    }

    pub fn noiseless(&self) -> Self {
        self.with_rates_scaled(0.0)
    }

    /// Duration of the conditional phase that maps parity onto the qubit,
    /// `pi / chi_qc`.
    pub fn parity_window(&self) -> f64 {
        PI / self.chi_qc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    Sinusoidal,
    Generalized,
    Gaussian,
}

/// One photon-number filter step. Only the fields of the chosen kind are
/// meaningful: `theta` for sinusoidal, `theta` and `phi` for generalized,
/// `sigma` for Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub target_n: usize,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl FilterSpec {
    pub fn sinusoidal(target_n: usize, theta: f64) -> Self {
        Self {
            kind: FilterKind::Sinusoidal,
            target_n,
            theta,
            phi: 0.0,
            sigma: 0.0,
        }
    }

    pub fn generalized(target_n: usize, theta: f64, phi: f64) -> Self {
        Self {
            kind: FilterKind::Generalized,
            target_n,
            theta,
            phi,
            sigma: 0.0,
        }
    }

    pub fn gaussian(target_n: usize, sigma: f64) -> Self {
        Self {
            kind: FilterKind::Gaussian,
            target_n,
            theta: 0.0,
            phi: 0.0,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FilterKind::Sinusoidal | FilterKind::Generalized => {
                if !(self.theta > 0.0 && self.theta <= 2.0 * PI) {
                    return Err(Error::InvalidFilter(format!(
                        "theta must lie in (0, 2pi], got {}",
                        self.theta
                    )));
                }
                if !self.phi.is_finite() {
                    return Err(Error::InvalidFilter("phi must be finite".into()));
                }
            }
            FilterKind::Gaussian => {
                if !(self.sigma > 0.0) {
                    return Err(Error::InvalidFilter(format!(
                        "sigma must be positive, got {}",
                        self.sigma
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ideal ground-branch amplitude for photon number `n`, with the
    /// photon-number dependent phase dropped.
    pub fn ideal_amplitude(&self, n: usize) -> f64 {
        let dn = n as f64 - self.target_n as f64;
        match self.kind {
            FilterKind::Sinusoidal => (dn * self.theta / 2.0).cos(),
            FilterKind::Generalized => ((dn * self.theta - self.phi) / 2.0).sin(),
            FilterKind::Gaussian => (-dn * dn / (4.0 * self.sigma * self.sigma)).exp(),
        }
    }
}

/// Gaussian filter width produced by a selective pulse of total duration
/// `tau` at dispersive shift `chi` (rad/s): `sigma = 2 sqrt(2) / (chi tau)`.
pub fn gaussian_sigma_from_pulse(tau: f64, chi: f64) -> f64 {
    2.0 * 2f64.sqrt() / (chi * tau)
}

/// The two post-selected branches of a filter. A branch with zero
/// probability has no state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome<S> {
    pub branch_g: Option<S>,
    pub branch_e: Option<S>,
    pub p_g: f64,
    pub p_e: f64,
}

/// An operator on qubit ⊗ cavity, dimension `2 * cavity.dim()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOp {
    matrix: Array2<C64>,
    cavity: HilbertSpec,
}

impl CompositeOp {
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn cavity(&self) -> HilbertSpec {
        self.cavity
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(v)
    }

    pub fn compose(&self, rhs: &CompositeOp) -> CompositeOp {
        CompositeOp {
            matrix: self.matrix.dot(&rhs.matrix),
            cavity: self.cavity,
        }
    }

    /// `max |(U^dagger U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = crate::fockspace::dagger(&self.matrix).dot(&self.matrix);
        let d = p.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let t = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[[i, j]] - t).norm());
            }
        }
        worst
    }
}

pub type QubitGate = [[C64; 2]; 2];

/// `exp(-i angle/2 (cos(axis) X + sin(axis) Y))` in the `(g, e)` basis.
pub fn qubit_rotation(axis: f64, angle: f64) -> QubitGate {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    let mi = C64::new(0.0, -1.0);
    [
        [c, mi * s * C64::from_polar(1.0, -axis)],
        [mi * s * C64::from_polar(1.0, axis), c],
    ]
}

/// `gate ⊗ I`.
pub fn qubit_gate_on_composite(gate: &QubitGate, cavity: HilbertSpec) -> CompositeOp {
    let d = cavity.dim();
    let mut m = Array2::zeros((2 * d, 2 * d));
    for (q, row) in gate.iter().enumerate() {
        for (p, g) in row.iter().enumerate() {
            for n in 0..d {
                m[[q * d + n, p * d + n]] = *g;
            }
        }
    }
    CompositeOp { matrix: m, cavity }
}

/// `C_theta = |g><g| ⊗ I + |e><e| ⊗ exp(i theta (a^dagger a - N))`.
pub fn conditional_phase_op(theta: f64, target_n: usize, cavity: HilbertSpec) -> CompositeOp {
    let d = cavity.dim();
    let mut m = Array2::zeros((2 * d, 2 * d));
    for n in 0..d {
        m[[n, n]] = C64::new(1.0, 0.0);
        let dn = n as f64 - target_n as f64;
        m[[d + n, d + n]] = C64::from_polar(1.0, theta * dn);
    }
    CompositeOp { matrix: m, cavity }
}

/// Second pulse of the Ramsey sandwich: `-X/2` for the plain sinusoidal
/// filter, an `X/2` whose axis is rotated by `phi` for the generalized one.
fn closing_pulse(kind: FilterKind, phi: f64) -> QubitGate {
    match kind {
        FilterKind::Generalized => qubit_rotation(phi, PI / 2.0),
        _ => qubit_rotation(0.0, -PI / 2.0),
    }
}

/// Full `X/2 -> C_theta -> closing pulse` unitary on qubit ⊗ cavity.
pub fn ramsey_sandwich(filter: &FilterSpec, cavity: HilbertSpec) -> Result<CompositeOp> {
    filter.validate()?;
    if filter.kind == FilterKind::Gaussian {
        return Err(Error::InvalidFilter(
            "the Gaussian filter has no Ramsey-sandwich circuit".into(),
        ));
    }
    let open = qubit_gate_on_composite(&qubit_rotation(0.0, PI / 2.0), cavity);
    let cphase = conditional_phase_op(filter.theta, filter.target_n, cavity);
    let close = qubit_gate_on_composite(&closing_pulse(filter.kind, filter.phi), cavity);
    Ok(close.compose(&cphase).compose(&open))
}

/// Runs the literal circuit on `|g> ⊗ psi` and splits the output by the
/// qubit state. The returned vectors are unnormalized.
fn circuit_branches(state: &PureState, filter: &FilterSpec) -> Result<(Array1<C64>, Array1<C64>)> {
    let spec = state.spec();
    let d = spec.dim();
    filter.validate()?;
    if filter.kind == FilterKind::Gaussian {
        return Err(Error::InvalidFilter(
            "sinusoidal_pnf needs a Sinusoidal or Generalized filter".into(),
        ));
    }
    let mut v = Array1::zeros(2 * d);
    for n in 0..d {
        v[n] = state.amplitudes()[n];
    }
    // gate-by-gate, each a dense operator on the composite space
    let open = qubit_gate_on_composite(&qubit_rotation(0.0, PI / 2.0), spec);
    let cphase = conditional_phase_op(filter.theta, filter.target_n, spec);
    let close = qubit_gate_on_composite(&closing_pulse(filter.kind, filter.phi), spec);
    let out = close.apply(&cphase.apply(&open.apply(&v)));
    let g = out.slice(ndarray::s![..d]).to_owned();
    let e = out.slice(ndarray::s![d..]).to_owned();
    Ok((g, e))
}

fn outcome_from_vectors(
    g: Array1<C64>,
    e: Array1<C64>,
    spec: HilbertSpec,
) -> Result<FilterOutcome<PureState>> {
    let p_g: f64 = g.iter().map(|a| a.norm_sqr()).sum();
    let p_e: f64 = e.iter().map(|a| a.norm_sqr()).sum();
    let branch = |v: Array1<C64>, p: f64| -> Result<Option<PureState>> {
        if p > 0.0 {
            Ok(Some(PureState::from_unnormalized(v, spec)?.0))
        } else {
            Ok(None)
        }
    };
    Ok(FilterOutcome {
        branch_g: branch(g, p_g)?,
        branch_e: branch(e, p_e)?,
        p_g,
        p_e,
    })
}

/// Sinusoidal (or generalized sinusoidal) filter, simulated as the literal
/// Ramsey sandwich on qubit ⊗ cavity followed by projecting the qubit.
///
/// Branch phases are exactly those produced by the circuit.
pub fn sinusoidal_pnf(state: &PureState, filter: &FilterSpec) -> Result<FilterOutcome<PureState>> {
    let (g, e) = circuit_branches(state, filter)?;
    outcome_from_vectors(g, e, state.spec())
}

/// Any filter applied as its ideal real amplitude profile `k_n` on the
/// ground branch and `sqrt(1 - k_n^2)` on the excited branch.
pub fn apply_ideal_filter(
    state: &PureState,
    filter: &FilterSpec,
) -> Result<FilterOutcome<PureState>> {
    filter.validate()?;
    let amps = state.amplitudes();
    let mut g = Array1::zeros(amps.len());
    let mut e = Array1::zeros(amps.len());
    for (n, a) in amps.iter().enumerate() {
        let k = filter.ideal_amplitude(n);
        g[n] = a * k;
        e[n] = a * (1.0 - k * k).max(0.0).sqrt();
    }
    outcome_from_vectors(g, e, state.spec())
}

/// Density-matrix version of [`apply_ideal_filter`]: `K rho K` with the
/// diagonal Kraus operators of each branch.
pub fn apply_ideal_filter_mixed(
    rho: &MixedState,
    filter: &FilterSpec,
) -> Result<FilterOutcome<MixedState>> {
    filter.validate()?;
    let spec = rho.spec();
    let d = spec.dim();
    let kg: Vec<f64> = (0..d).map(|n| filter.ideal_amplitude(n)).collect();
    let ke: Vec<f64> = kg.iter().map(|k| (1.0 - k * k).max(0.0).sqrt()).collect();
    let branch = |k: &[f64]| -> Result<(Option<MixedState>, f64)> {
        let m = Array2::from_shape_fn((d, d), |(i, j)| rho.matrix()[[i, j]] * (k[i] * k[j]));
        let p: f64 = m.diag().iter().map(|z| z.re).sum();
        if p > 0.0 {
            Ok((Some(MixedState::new(m.mapv(|z| z / p), spec)?), p))
        } else {
            Ok((None, 0.0))
        }
    };
    let (branch_g, p_g) = branch(&kg)?;
    let (branch_e, p_e) = branch(&ke)?;
    Ok(FilterOutcome {
        branch_g,
        branch_e,
        p_g,
        p_e,
    })
}

/// Gaussian filter `exp(-dn^2 / 4 sigma^2)` applied as its ideal profile.
pub fn gaussian_pnf(state: &PureState, filter: &FilterSpec) -> Result<FilterOutcome<PureState>> {
    if filter.kind != FilterKind::Gaussian {
        return Err(Error::InvalidFilter(
            "gaussian_pnf needs a Gaussian filter".into(),
        ));
    }
    let out = apply_ideal_filter(state, filter)?;
    if out.p_g < STARVATION_THRESHOLD {
        return Err(Error::FilterStarvation {
            probability: out.p_g,
        });
    }
    Ok(out)
}

/// Ground branch of one filter step, whichever kind it is.
pub fn apply_filter(state: &PureState, filter: &FilterSpec) -> Result<FilterOutcome<PureState>> {
    match filter.kind {
        FilterKind::Gaussian => gaussian_pnf(state, filter),
        _ => sinusoidal_pnf(state, filter),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparationStage {
    pub filter: FilterSpec,
    pub p_g: f64,
    pub populations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub state: PureState,
    pub success_probability: f64,
    pub fidelity: f64,
    pub stages: Vec<PreparationStage>,
}

/// Starts from `|init_alpha>` (default `sqrt(target_n)`) and keeps the
/// ground branch of each filter in `schedule`.
pub fn prepare_fock(
    target_n: usize,
    init_alpha: Option<C64>,
    schedule: &[FilterSpec],
    spec: HilbertSpec,
) -> Result<Preparation> {
    if schedule.is_empty() {
        return Err(invalid("schedule", "must contain at least one filter"));
    }
    let alpha = init_alpha.unwrap_or_else(|| C64::new((target_n as f64).sqrt(), 0.0));
    let mut state = coherent_state(alpha, spec)?;
    let mut success = 1.0;
    let mut stages = Vec::with_capacity(schedule.len());
    for filter in schedule {
        let out = apply_filter(&state, filter)?;
        success *= out.p_g;
        if success < STARVATION_THRESHOLD {
            return Err(Error::FilterStarvation {
                probability: success,
            });
        }
        state = match out.branch_g {
            Some(s) => s,
            None => return Err(Error::FilterStarvation { probability: 0.0 }),
        };
        stages.push(PreparationStage {
            filter: *filter,
            p_g: out.p_g,
            populations: state.populations(),
        });
    }
    let fidelity = state.fock_fidelity(target_n);
    Ok(Preparation {
        state,
        success_probability: success,
        fidelity,
        stages,
    })
}

/// The binary schedule `theta_j = pi / 2^(j-1)`, `j = 1..=m`.
pub fn binary_sinusoidal_schedule(target_n: usize, m: usize) -> Vec<FilterSpec> {
    (0..m)
        .map(|j| FilterSpec::sinusoidal(target_n, PI / f64::from(1u32 << j)))
        .collect()
}

/// Ground-state probability of the Ramsey sequence for a cavity holding
/// exactly `n` photons, for each conditional phase in `thetas`.
///
/// The cavity stays in `|n>`, so the circuit reduces to the qubit with
/// conditional phase `theta (n - target_n)`.
pub fn ramsey_trace(n: usize, target_n: usize, thetas: &[f64]) -> Vec<f64> {
    let open = qubit_rotation(0.0, PI / 2.0);
    let close = qubit_rotation(0.0, -PI / 2.0);
    let dn = n as f64 - target_n as f64;
    thetas
        .iter()
        .map(|&theta| {
            let after_open = [open[0][0], open[1][0]];
            let phased = [
                after_open[0],
                after_open[1] * C64::from_polar(1.0, theta * dn),
            ];
            let g = close[0][0] * phased[0] + close[0][1] * phased[1];
            g.norm_sqr()
        })
        .collect()
}

/// Qubit detuning (Hz) with `n` photons in the cavity,
/// `-(n chi + n^2 chi2 / 2) / 2 pi`.
pub fn spectroscopy_frequency(n: usize, params: &DeviceParams) -> f64 {
    let n = n as f64;
    -(n * params.chi_qc + n * n * params.chi2_qc / 2.0) / (2.0 * PI)
}

/// `S(f) = sum_n P_n exp(-(f - f_n)^2 / 2 sigma_f^2)` with `populations[n]`
/// the weight of photon number `n`. With `shots`, each grid point is
/// replaced by a binomial sample mean.
pub fn spectroscopy_signal<R: Rng + ?Sized>(
    populations: &[f64],
    f_grid: &[f64],
    params: &DeviceParams,
    sigma_f: f64,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(sigma_f > 0.0) {
        return Err(invalid("sigma_f", "must be positive"));
    }
    let centers: Vec<f64> = (0..populations.len())
        .map(|n| spectroscopy_frequency(n, params))
        .collect();
    let mut out = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        let s: f64 = populations
            .iter()
            .zip(&centers)
            .filter(|(p, _)| **p != 0.0)
            .map(|(p, fc)| p * (-(f - fc).powi(2) / (2.0 * sigma_f * sigma_f)).exp())
            .sum();
        let s = match shots {
            Some(k) if k > 0 => {
                let dist = Binomial::new(k, s.clamp(0.0, 1.0))
                    .map_err(|e| invalid("shots", e.to_string()))?;
                dist.sample(rng) as f64 / k as f64
            }
            _ => s,
        };
        out.push(s);
    }
    Ok(out)
}

/// One outcome record of the adaptive photon-number-resolving cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct PnrTrace {
    /// `bits[j]` is the outcome of step `j + 1`; `1` means the qubit was
    /// found in `|g>`.
    pub bits: Vec<u8>,
    pub resolved_n: usize,
    pub probability: f64,
    pub post_state: Option<PureState>,
}

/// Phase of the closing pulse at step `j` (1-based) given earlier bits:
/// `theta_j` times the photon number already resolved modulo `2^(j-1)`.
pub fn cascade_phase(bits: &[u8]) -> f64 {
    let j = bits.len() as u32 + 1;
    let resolved: usize = bits
        .iter()
        .enumerate()
        .map(|(i, b)| (*b as usize) << i)
        .sum();
    PI * resolved as f64 / f64::from(1u32 << (j - 1))
}

/// Enumerates all `2^m` outcome branches of the adaptive cascade of
/// generalized filters with `theta_j = pi / 2^(j-1)` and closing-pulse
/// phases from [`cascade_phase`]. Traces are returned in order of
/// `resolved_n`.
pub fn resolve_photon_cascade(state: &PureState, m: usize) -> Result<Vec<PnrTrace>> {
    if !(1..=6).contains(&m) {
        return Err(invalid("m", format!("must lie in 1..=6, got {m}")));
    }
    state.check_interior()?;
    let mut traces = Vec::with_capacity(1 << m);
    descend(Some(state.clone()), 1.0, &mut Vec::new(), m, &mut traces)?;
    traces.sort_by_key(|t| t.resolved_n);
    Ok(traces)
}

fn descend(
    state: Option<PureState>,
    probability: f64,
    bits: &mut Vec<u8>,
    m: usize,
    out: &mut Vec<PnrTrace>,
) -> Result<()> {
    if bits.len() == m {
        let resolved_n = bits
            .iter()
            .enumerate()
            .map(|(i, b)| (*b as usize) << i)
            .sum();
        out.push(PnrTrace {
            bits: bits.clone(),
            resolved_n,
            probability,
            post_state: state,
        });
        return Ok(());
    }
    let j = bits.len();
    let (g, e) = match &state {
        Some(s) => {
            let filter = FilterSpec::generalized(0, PI / f64::from(1u32 << j), cascade_phase(bits));
            let o = sinusoidal_pnf(s, &filter)?;
            ((o.branch_g, o.p_g), (o.branch_e, o.p_e))
        }
        None => ((None, 0.0), (None, 0.0)),
    };
    for (bit, (branch, p)) in [(1u8, g), (0u8, e)] {
        bits.push(bit);
        descend(branch, probability * p, bits, m, out)?;
        bits.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn spec(dim: usize) -> HilbertSpec {
        HilbertSpec::new(dim, dim / 3).unwrap()
    }

    #[test]
    fn device_defaults() {
        let p = DeviceParams::default();
        p.validate().unwrap();
        assert!((p.chi_qc / (2.0 * PI) - 0.626e6).abs() < 1e-6);
        assert!((1.0 / p.kappa3 - 93e-6).abs() < 1e-15);
        let bad = DeviceParams { kappa1: -1.0, ..p };
        assert!(bad.validate().is_err());
        let bad = DeviceParams {
            readout_fidelity: 0.3,
            ..p
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn filter_validation() {
        assert!(FilterSpec::sinusoidal(0, 0.0).validate().is_err());
        assert!(FilterSpec::sinusoidal(0, 7.0).validate().is_err());
        assert!(FilterSpec::gaussian(0, 0.0).validate().is_err());
        assert!(FilterSpec::sinusoidal(0, 2.0 * PI).validate().is_ok());
        let s = spec(12);
        let st = PureState::fock(2, s).unwrap();
        assert!(sinusoidal_pnf(&st, &FilterSpec::gaussian(2, 1.0)).is_err());
        assert!(gaussian_pnf(&st, &FilterSpec::sinusoidal(2, PI)).is_err());
    }

    #[test]
    fn conditional_phase_examples() {
        let s = spec(12);
        let id = conditional_phase_op(0.0, 3, s);
        assert_eq!(id.matrix(), &Array2::<C64>::eye(24));
        let c = conditional_phase_op(PI, 3, s);
        assert!((c.matrix()[[12 + 4, 12 + 4]] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let c = conditional_phase_op(PI / 2.0, 3, s);
        let mut v = Array1::zeros(24);
        v[12 + 5] = C64::new(1.0, 0.0);
        let out = c.apply(&v);
        assert!((out[12 + 5] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(c.unitarity_defect() < 1e-14);
    }

    #[test]
    fn sandwich_matches_matrix_form() {
        // g-g block (1 + e^{i theta dn}) / 2, e-g block (i - i e^{i theta dn}) / 2
        let s = spec(9);
        let f = FilterSpec::sinusoidal(4, 0.7);
        let u = ramsey_sandwich(&f, s).unwrap();
        for n in 0..9 {
            let c = C64::from_polar(1.0, 0.7 * (n as f64 - 4.0));
            let gg = (C64::new(1.0, 0.0) + c) / 2.0;
            let eg = (C64::i() - C64::i() * c) / 2.0;
            assert!((u.matrix()[[n, n]] - gg).norm() < 1e-14);
            assert!((u.matrix()[[9 + n, n]] - eg).norm() < 1e-14);
        }
    }

    #[test]
    fn sinusoidal_examples() {
        let s = spec(30);
        let st = PureState::fock(10, s).unwrap();
        let o = sinusoidal_pnf(&st, &FilterSpec::sinusoidal(10, PI)).unwrap();
        assert!((o.p_g - 1.0).abs() < 1e-14);
        assert!(o.branch_e.is_none() || o.p_e < 1e-30);
        assert!((o.branch_g.unwrap().fock_fidelity(10) - 1.0).abs() < 1e-14);

        let mut v = Array1::zeros(30);
        v[10] = C64::new(1.0, 0.0);
        v[11] = C64::new(1.0, 0.0);
        let sup = PureState::new(v, s).unwrap();
        let o = sinusoidal_pnf(&sup, &FilterSpec::sinusoidal(10, PI)).unwrap();
        assert!((o.p_g - 0.5).abs() < 1e-14);
        assert!((o.p_g + o.p_e - 1.0).abs() < 1e-14);
        assert!((o.branch_g.unwrap().fock_fidelity(10) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quarter_filter_on_coherent_state() {
        let s = HilbertSpec::new(60, 20).unwrap();
        let coh = coherent_state(C64::new(10f64.sqrt(), 0.0), s).unwrap();
        let o = sinusoidal_pnf(&coh, &FilterSpec::sinusoidal(10, PI / 2.0)).unwrap();
        let pops = o.branch_g.unwrap().populations();
        // direct amplitude filter oracle; followed by P_S(pi) the support
        // collapses to n = 10 mod 4
        let input = coh.populations();
        let weights: Vec<f64> = (0..60)
            .map(|n| {
                let dn = n as f64 - 10.0;
                (dn * PI / 4.0).cos().powi(2) * input[n]
            })
            .collect();
        let total: f64 = weights.iter().sum();
        assert!((o.p_g - total).abs() < 1e-12);
        for n in 0..60 {
            let want = weights[n] / total;
            assert!((pops[n] - want).abs() < 1e-12);
            if (n as i64 - 10).rem_euclid(4) == 2 {
                assert!(pops[n] < 1e-20);
            }
        }
        let both = prepare_fock(
            10,
            None,
            &[
                FilterSpec::sinusoidal(10, PI / 2.0),
                FilterSpec::sinusoidal(10, PI),
            ],
            s,
        )
        .unwrap();
        for (n, p) in both.state.populations().iter().enumerate() {
            if (n as i64 - 10).rem_euclid(4) != 0 {
                assert!(*p < 1e-20);
            }
        }
    }

    #[test]
    fn gaussian_examples() {
        let s = HilbertSpec::new(120, 40).unwrap();
        let coh = coherent_state(C64::new(50f64.sqrt(), 0.0), s).unwrap();
        let wide = gaussian_pnf(&coh, &FilterSpec::gaussian(50, 1e6)).unwrap();
        assert!((wide.p_g - 1.0).abs() < 1e-8);
        let wg = wide.branch_g.unwrap();
        for n in 0..120 {
            assert!((wg.amplitudes()[n] - coh.amplitudes()[n]).norm() < 1e-8);
        }

        let narrow = gaussian_pnf(&coh, &FilterSpec::gaussian(50, 0.9)).unwrap();
        let std = narrow.branch_g.as_ref().unwrap().photon_number_std();
        assert!((0.8..=1.0).contains(&std), "std {std}");
        let input = coh.populations();
        let want: f64 = (0..120)
            .map(|n| (-((n as f64 - 50.0).powi(2)) / (2.0 * 0.81)).exp() * input[n])
            .sum();
        assert!((narrow.p_g - want).abs() < 1e-12);

        let sigma = gaussian_sigma_from_pulse(800e-9, 2.0 * PI * 0.626e6);
        assert!((sigma - 0.90).abs() < 0.01);
    }

    #[test]
    fn gaussian_starvation() {
        let s = HilbertSpec::new(30, 10).unwrap();
        let vac = PureState::fock(0, s).unwrap();
        let err = gaussian_pnf(&vac, &FilterSpec::gaussian(15, 0.5));
        assert!(matches!(err, Err(Error::FilterStarvation { .. })));
    }

    #[test]
    fn mixed_filter_matches_pure() {
        let s = HilbertSpec::new(40, 10).unwrap();
        let coh = coherent_state(C64::new(2.0, 0.5), s).unwrap();
        let f = FilterSpec::gaussian(4, 1.3);
        let pure = apply_ideal_filter(&coh, &f).unwrap();
        let mixed = apply_ideal_filter_mixed(&coh.to_mixed(), &f).unwrap();
        assert!((pure.p_g - mixed.p_g).abs() < 1e-13);
        let a = pure.branch_g.unwrap().to_mixed();
        let b = mixed.branch_g.unwrap();
        let diff = (a.matrix() - b.matrix()).mapv(|z| z.norm());
        assert!(diff.iter().cloned().fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn preparation_examples() {
        let s = HilbertSpec::for_photon_number(40);
        let prep = prepare_fock(10, None, &binary_sinusoidal_schedule(10, 4), s).unwrap();
        assert!(prep.fidelity > 0.999);
        for (n, p) in prep.state.populations().iter().enumerate() {
            if (n as i64 - 10).rem_euclid(16) != 0 {
                assert!(*p < 1e-20, "n={n} p={p}");
            }
        }

        let sched = [
            FilterSpec::gaussian(10, 0.9),
            FilterSpec::sinusoidal(10, PI / 2.0),
            FilterSpec::sinusoidal(10, PI),
        ];
        let prep = prepare_fock(10, None, &sched, s).unwrap();
        assert!(prep.fidelity >= 0.999);
        let product: f64 = prep.stages.iter().map(|st| st.p_g).product();
        assert!((prep.success_probability - product).abs() < 1e-6);

        let err = prepare_fock(10, Some(C64::new(0.0, 0.0)), &sched, s);
        assert!(matches!(err, Err(Error::FilterStarvation { .. })));
        assert!(prepare_fock(10, None, &[], s).is_err());
    }

    #[test]
    fn ramsey_examples() {
        let thetas: Vec<f64> = (1..50).map(|i| i as f64 * 0.2).collect();
        assert!(ramsey_trace(7, 7, &thetas)
            .iter()
            .all(|p| (p - 1.0).abs() < 1e-14));
        let p = ramsey_trace(50, 0, &[PI / 100.0])[0];
        assert!((p - 0.5).abs() < 1e-12);
        for (&t, p) in thetas.iter().zip(ramsey_trace(3, 1, &thetas)) {
            assert!((p - (2.0 * t / 2.0).cos().powi(2)).abs() < 1e-12);
        }
        // 100 periods over [0, 2pi]: count maxima crossings of p = 1/2 upward
        let grid: Vec<f64> = (0..=20000).map(|i| i as f64 * 2.0 * PI / 20000.0).collect();
        let tr = ramsey_trace(100, 0, &grid);
        let ups = tr.windows(2).filter(|w| w[0] < 0.5 && w[1] >= 0.5).count();
        assert_eq!(ups, 100);
    }

    #[test]
    fn spectroscopy_examples() {
        let p = DeviceParams::default();
        let spacing = spectroscopy_frequency(1, &p) - spectroscopy_frequency(0, &p);
        assert!((spacing + 0.626e6).abs() < 1e3);
        let linear = -100.0 * p.chi_qc / (2.0 * PI);
        let dev = spectroscopy_frequency(100, &p) - linear;
        assert!((dev + 1.64e6).abs() < 1e3);

        let mut pops = vec![0.0; 51];
        pops[50] = 1.0;
        let f50 = spectroscopy_frequency(50, &p);
        let grid = [f50 - 1e5, f50, f50 + 1e5];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = spectroscopy_signal(&pops, &grid, &p, 1e5, None, &mut rng).unwrap();
        assert!((s[1] - 1.0).abs() < 1e-15);
        assert!((s[0] - s[2]).abs() < 1e-12);
        assert!((s[0] - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cascade_examples() {
        let s = HilbertSpec::new(40, 10).unwrap();
        for n in 0..6 {
            let st = PureState::fock(n, s).unwrap();
            let tr = resolve_photon_cascade(&st, 1).unwrap();
            let sure: Vec<_> = tr.iter().filter(|t| t.probability > 0.5).collect();
            assert_eq!(sure.len(), 1);
            assert_eq!(sure[0].bits, vec![(n % 2) as u8]);
        }
        let five = PureState::fock(5, s).unwrap();
        let tr = resolve_photon_cascade(&five, 3).unwrap();
        let hit = tr.iter().find(|t| t.resolved_n == 5).unwrap();
        assert_eq!(hit.bits, vec![1, 0, 1]);
        assert!((hit.probability - 1.0).abs() < 1e-12);
        for t in tr.iter().filter(|t| t.resolved_n != 5) {
            assert!(t.probability < 1e-12);
        }
        assert!(resolve_photon_cascade(&five, 0).is_err());
        assert!(resolve_photon_cascade(&five, 7).is_err());
    }
}
