//! Open-system dynamics and the closed-form error models.
//!
//! Operators here are plain square matrices so that the same integrator
//! serves both the bare cavity and the qubit ⊗ cavity space.

use std::f64::consts::PI;

use nalgebra as na;
use ndarray::{Array1, Array2, Zip};

use crate::composite::{qubit_gate_on_composite, qubit_rotation, DeviceParams};
use crate::error::{invalid, Error, Result};
use crate::fockspace::{
    dagger, displaced_fock, from_nalgebra, hermitian_part, to_nalgebra, HilbertSpec, LinearOp,
    MixedState,
};
use crate::special::laguerre;
use crate::C64;

/// Upper bound on `dt * max(rate, ||H||)` accepted by the integrator.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

/// Above this `kappa * T` the first-order expansion is reported as suspect.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub hamiltonian: Array2<C64>,
    /// Jump operators with their rates.
    pub jumps: Vec<(Array2<C64>, f64)>,
    pub duration: f64,
    pub dt: f64,
}

/// Max absolute row sum, an upper bound on the spectral norm.
fn norm_bound(m: &Array2<C64>) -> f64 {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl LindbladSpec {
    /// Builds a spec with the default step `min(1 ns, T/2000, 0.05/||H||)`.
    pub fn new(
        hamiltonian: Array2<C64>,
        jumps: Vec<(Array2<C64>, f64)>,
        duration: f64,
    ) -> Result<Self> {
        let mut dt = 1e-9f64.min(duration / 2000.0);
        let scale = Self::stiffness(&hamiltonian, &jumps);
        if scale > 0.0 {
            dt = dt.min(0.05 / scale);
        }
        let spec = Self {
            hamiltonian,
            jumps,
            duration,
            dt,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Cavity-only spec from [`LinearOp`]s.
    pub fn from_ops(h: &LinearOp, jumps: &[(LinearOp, f64)], duration: f64) -> Result<Self> {
        Self::new(
            h.matrix().clone(),
            jumps
                .iter()
                .map(|(l, r)| (l.matrix().clone(), *r))
                .collect(),
            duration,
        )
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    /// `max(||H - c||, rate ||L^dagger L||)` with `c` centering the diagonal
    /// of `H`; a constant shift of `H` leaves the dynamics unchanged.
    fn stiffness(h: &Array2<C64>, jumps: &[(Array2<C64>, f64)]) -> f64 {
        let diag = h.diag();
        let hi = diag.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let lo = diag.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let mut centered = h.clone();
        if hi.is_finite() && lo.is_finite() {
            let c = 0.5 * (hi + lo);
            centered.diag_mut().mapv_inplace(|z| z - c);
        }
        let mut s = norm_bound(&centered);
        for (l, rate) in jumps {
            let ldl = dagger(l).dot(l);
            s = s.max(rate * norm_bound(&ldl));
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.hamiltonian.nrows();
        if self.hamiltonian.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.hamiltonian.ncols(),
            });
        }
        for (l, rate) in &self.jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: l.nrows(),
                });
            }
            if !rate.is_finite() || *rate < 0.0 {
                return Err(invalid(
                    "rate",
                    format!("must be finite and >= 0, got {rate}"),
                ));
            }
        }
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(invalid("duration", "must be finite and >= 0"));
        }
        if self.duration == 0.0 {
            return Ok(());
        }
        if !(self.dt > 0.0) || self.dt > self.duration {
            return Err(Error::StepSize(format!(
                "dt = {:e} must lie in (0, duration = {:e}]",
                self.dt, self.duration
            )));
        }
        let product = self.dt * Self::stiffness(&self.hamiltonian, &self.jumps);
        if product >= MAX_STEP_PRODUCT {
            return Err(Error::StepSize(format!(
                "dt * max(rate, ||H||) = {product:.3} exceeds {MAX_STEP_PRODUCT}"
            )));
        }
        Ok(())
    }
}

/// Operator storage for the right-hand side. Most operators in this crate
/// (ladder, number, qubit projectors and lowering) have at most one nonzero
/// per row, which turns every product into a gather.
enum Op {
    /// `row[i] = Some((j, v))` for the single entry `(i, j)`.
    RowMap(Vec<Option<(usize, C64)>>),
    /// All nonzero entries `(i, j, v)`.
    General(Vec<(usize, usize, C64)>),
}

impl Op {
    fn from_dense(m: &Array2<C64>) -> Self {
        let zero = C64::new(0.0, 0.0);
        let mut rows = Vec::with_capacity(m.nrows());
        let mut single = true;
        for r in m.rows() {
            let mut nz = r.iter().enumerate().filter(|(_, v)| **v != zero);
            let first = nz.next().map(|(j, v)| (j, *v));
            if nz.next().is_some() {
                single = false;
                break;
            }
            rows.push(first);
        }
        if single {
            return Op::RowMap(rows);
        }
        Op::General(
            m.indexed_iter()
                .filter(|(_, v)| **v != zero)
                .map(|((i, j), v)| (i, j, *v))
                .collect(),
        )
    }

    /// `out = self * rho`.
    fn left_mul(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        out.fill(C64::new(0.0, 0.0));
        match self {
            Op::RowMap(rows) => {
                for (i, e) in rows.iter().enumerate() {
                    if let Some((k, v)) = e {
                        let v = *v;
                        Zip::from(out.row_mut(i))
                            .and(rho.row(*k))
                            .for_each(|d, s| *d = v * s);
                    }
                }
            }
            Op::General(entries) => {
                for &(i, k, v) in entries {
                    Zip::from(out.row_mut(i))
                        .and(rho.row(k))
                        .for_each(|d, s| *d += v * s);
                }
            }
        }
    }
}

/// Precomputed Lindbladian with `K = H - i/2 sum kappa L^dagger L` so that
/// `d rho/dt = -i K rho + i rho K^dagger + sum kappa L rho L^dagger`.
struct Generator {
    k: Op,
    jumps: Vec<(Op, f64)>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let mut k = spec.hamiltonian.clone();
        for (l, rate) in &spec.jumps {
            let ldl = dagger(l).dot(l);
            k.scaled_add(C64::new(0.0, -0.5 * rate), &ldl);
        }
        Self {
            k: Op::from_dense(&k),
            jumps: spec
                .jumps
                .iter()
                .filter(|(_, r)| *r > 0.0)
                .map(|(l, r)| (Op::from_dense(l), *r))
                .collect(),
        }
    }

    /// Right-hand side for Hermitian `rho`, written into `out`.
    fn rhs(
        &self,
        rho: &Array2<C64>,
        out: &mut Array2<C64>,
        s1: &mut Array2<C64>,
        s2: &mut Array2<C64>,
    ) {
        let d = rho.nrows();
        self.k.left_mul(rho, s1);
        let r = rho.as_slice().expect("standard layout");
        {
            // -i K rho + (-i K rho)^dagger
            let a = s1.as_slice().expect("standard layout");
            let o = out.as_slice_mut().expect("standard layout");
            for i in 0..d {
                for j in 0..d {
                    let x = a[i * d + j];
                    let y = a[j * d + i];
                    o[i * d + j] = C64::new(x.im + y.im, y.re - x.re);
                }
            }
        }
        for (l, rate) in &self.jumps {
            match l {
                Op::RowMap(rows) => {
                    let o = out.as_slice_mut().expect("standard layout");
                    let cols: Vec<(usize, usize, C64)> = rows
                        .iter()
                        .enumerate()
                        .filter_map(|(i, e)| e.map(|(c, v)| (i, c, v)))
                        .collect();
                    for &(i, ci, vi) in &cols {
                        let vi = vi * rate;
                        let src = &r[ci * d..(ci + 1) * d];
                        let dst = &mut o[i * d..(i + 1) * d];
                        for &(j, cj, vj) in &cols {
                            dst[j] += vi * src[cj] * vj.conj();
                        }
                    }
                }
                Op::General(_) => {
                    // L rho L^dagger = L (L rho)^dagger
                    l.left_mul(rho, s1);
                    let lr_dag = dagger(s1);
                    l.left_mul(&lr_dag, s2);
                    out.scaled_add(C64::new(*rate, 0.0), s2);
                }
            }
        }
    }
}

/// Fixed-step fourth-order Runge-Kutta integration of the Lindblad equation
/// on a raw density matrix. The state is re-Hermitized after every step.
pub fn lindblad_evolve_matrix(rho: &Array2<C64>, spec: &LindbladSpec) -> Result<Array2<C64>> {
    spec.validate()?;
    let d = spec.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    let mut state = hermitian_part(rho);
    if spec.duration == 0.0 {
        return Ok(state);
    }
    let gen = Generator::new(spec);
    let steps = (spec.duration / spec.dt).ceil() as usize;
    let h = spec.duration / steps as f64;
    let zeros = || Array2::<C64>::zeros((d, d));
    let (mut k1, mut k2, mut k3, mut k4) = (zeros(), zeros(), zeros(), zeros());
    let (mut probe, mut s1, mut s2) = (zeros(), zeros(), zeros());
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let w = C64::new(h / 6.0, 0.0);
    for _ in 0..steps {
        gen.rhs(&state, &mut k1, &mut s1, &mut s2);
        Zip::from(&mut probe)
            .and(&state)
            .and(&k1)
            .for_each(|p, s, k| *p = s + half * k);
        gen.rhs(&probe, &mut k2, &mut s1, &mut s2);
        Zip::from(&mut probe)
            .and(&state)
            .and(&k2)
            .for_each(|p, s, k| *p = s + half * k);
        gen.rhs(&probe, &mut k3, &mut s1, &mut s2);
        Zip::from(&mut probe)
            .and(&state)
            .and(&k3)
            .for_each(|p, s, k| *p = s + full * k);
        gen.rhs(&probe, &mut k4, &mut s1, &mut s2);
        Zip::from(&mut state)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|s, a, b, c, e| *s += w * (a + 2.0 * b + 2.0 * c + e));
        for i in 0..d {
            for j in i + 1..d {
                let m = 0.5 * (state[[i, j]] + state[[j, i]].conj());
                state[[i, j]] = m;
                state[[j, i]] = m.conj();
            }
            state[[i, i]].im = 0.0;
        }
    }
    Ok(state)
}

/// [`lindblad_evolve_matrix`] for a cavity state.
pub fn lindblad_evolve(rho: &MixedState, spec: &LindbladSpec) -> Result<MixedState> {
    rho.check_physical()?;
    let out = lindblad_evolve_matrix(rho.matrix(), spec)?;
    MixedState::new(out, rho.spec())
}

/// Unitary propagation `exp(-i H t)` in the eigenbasis of `H`.
struct Propagator {
    /// Eigenvectors as columns, `None` when `H` is already diagonal.
    basis: Option<Array2<C64>>,
    energies: Vec<f64>,
}

impl Propagator {
    fn new(h: &Array2<C64>) -> Self {
        let d = h.nrows();
        let diagonal = h
            .indexed_iter()
            .all(|((i, j), v)| i == j || *v == C64::new(0.0, 0.0));
        if diagonal {
            return Self {
                basis: None,
                energies: (0..d).map(|i| h[[i, i]].re).collect(),
            };
        }
        let eig = na::SymmetricEigen::new(to_nalgebra(&hermitian_part(h)));
        Self {
            basis: Some(from_nalgebra(&eig.eigenvectors)),
            energies: eig.eigenvalues.iter().copied().collect(),
        }
    }

    fn to_eigen_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        match &self.basis {
            Some(b) => dagger(b).dot(v),
            None => v.clone(),
        }
    }

    fn to_eigen_op(&self, m: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Some(b) => dagger(b).dot(m).dot(b),
            None => m.clone(),
        }
    }

    fn to_fock_basis(&self, m: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Some(b) => b.dot(m).dot(&dagger(b)),
            None => m.clone(),
        }
    }
}

/// First-order correction `rho_1(T)` to the unitary evolution of the pure
/// state `psi0` under `h`:
///
/// `rho_1(T) = int_0^T U(T - tau) L[rho_0(tau)] U^dagger(T - tau) d tau`
///
/// with `L` the dissipator of `jumps`. The integral is evaluated with
/// Simpson's rule, doubling the number of intervals until two successive
/// estimates agree.
pub fn perturbation_first_order(
    h: &Array2<C64>,
    psi0: &Array1<C64>,
    jumps: &[(Array2<C64>, f64)],
    t: f64,
) -> Result<Array2<C64>> {
    let d = h.nrows();
    if h.ncols() != d || psi0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: psi0.len(),
        });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    for (l, rate) in jumps {
        if l.nrows() != d || l.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: l.nrows(),
            });
        }
        if !rate.is_finite() || *rate < 0.0 {
            return Err(invalid("rate", "must be finite and >= 0"));
        }
        if rate * t > PERTURBATIVE_LIMIT {
            log::warn!(
                "kappa T = {:.3} exceeds {PERTURBATIVE_LIMIT}; first-order result is unreliable",
                rate * t
            );
        }
    }
    let active: Vec<_> = jumps.iter().filter(|(_, r)| *r > 0.0).collect();
    if active.is_empty() || t == 0.0 {
        return Ok(Array2::zeros((d, d)));
    }

    let prop = Propagator::new(h);
    let c0 = prop.to_eigen_vec(psi0);
    let ops: Vec<(Array2<C64>, Array2<C64>, f64)> = active
        .iter()
        .map(|(l, r)| {
            let le = prop.to_eigen_op(l);
            let ldl = dagger(&le).dot(&le);
            (le, ldl, *r)
        })
        .collect();
    let e = &prop.energies;

    // integrand in the eigenbasis; rho_0(tau) is rank one
    let integrand = |tau: f64| -> Array2<C64> {
        let psi: Array1<C64> = c0
            .iter()
            .zip(e)
            .map(|(c, en)| c * C64::from_polar(1.0, -en * tau))
            .collect();
        let mut g = Array2::<C64>::zeros((d, d));
        for (l, ldl, rate) in &ops {
            let lp = l.dot(&psi);
            let dp = ldl.dot(&psi);
            for i in 0..d {
                for j in 0..d {
                    g[[i, j]] += *rate
                        * (lp[i] * lp[j].conj()
                            - 0.5 * (dp[i] * psi[j].conj() + psi[i] * dp[j].conj()));
                }
            }
        }
        let s = t - tau;
        for i in 0..d {
            for j in 0..d {
                g[[i, j]] *= C64::from_polar(1.0, -(e[i] - e[j]) * s);
            }
        }
        g
    };

    let mut intervals = 2usize;
    let ends = integrand(0.0) + integrand(t);
    let mut even = Array2::<C64>::zeros((d, d));
    let mut odd = integrand(t / 2.0);
    let simpson = |n: usize, even: &Array2<C64>, odd: &Array2<C64>| {
        let w = t / n as f64 / 3.0;
        (&ends + &odd.mapv(|z| 4.0 * z) + &even.mapv(|z| 2.0 * z)).mapv(|z| z * w)
    };
    let mut estimate = simpson(intervals, &even, &odd);
    const MAX_INTERVALS: usize = 1 << 16;
    loop {
        if intervals >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence with {MAX_INTERVALS} intervals"
            )));
        }
        even = &even + &odd;
        intervals *= 2;
        let step = t / intervals as f64;
        odd = Array2::zeros((d, d));
        for k in (1..intervals).step_by(2) {
            odd = odd + integrand(k as f64 * step);
        }
        let next = simpson(intervals, &even, &odd);
        let scale = next.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let change = (&next - &estimate)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        estimate = next;
        if intervals >= 16 && change <= 1e-11 * scale.max(1e-300) {
            break;
        }
    }
    Ok(hermitian_part(&prop.to_fock_basis(&estimate)))
}

/// Noisy parity measurement with the closed-form first-order correction:
/// `P_g = P_g0 + P_g1` with `T = T_M`.
pub fn parity_prob_noisy(n: u32, beta: f64, params: &DeviceParams) -> f64 {
    let x = 4.0 * beta * beta;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let env = (-2.0 * beta * beta).exp();
    let ni = n as i64;
    let p0 = 0.5 + 0.5 * sign * laguerre(ni, x) * env;
    let t = params.t_m;
    let k1t = params.kappa1 * t;
    let qt = (params.kappa3 + params.kappa4) * t;
    let nf = n as f64;
    let bracket = (-k1t * (nf / 4.0 + beta * beta / 2.0 - 0.25) - qt / 4.0) * laguerre(ni, x)
        - k1t * (nf + 1.0) / 4.0 * laguerre(ni + 1, x)
        - k1t / 4.0 * laguerre(ni - 1, x);
    p0 + sign * env * bracket
}

/// Qubit ⊗ cavity model of the noisy parity measurement: the qubit starts in
/// `X/2 |g>`, the cavity in `D(beta)|N>`, the conditional phase accumulates
/// to `pi` over the window `T_M` while all four jump channels act, and a
/// final `-X/2` maps parity onto the ground-state population.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityProtocol {
    pub cavity: HilbertSpec,
    pub hamiltonian: Array2<C64>,
    pub jumps: Vec<(Array2<C64>, f64)>,
    pub initial: Array1<C64>,
    pub duration: f64,
}

impl ParityProtocol {
    pub fn new(n: u32, beta: f64, params: &DeviceParams) -> Result<Self> {
        params.validate()?;
        if !(params.t_m > 0.0) {
            return Err(invalid("t_m", "must be positive for the parity protocol"));
        }
        let cavity = displaced_fock_space(n, beta)?;
        let d = cavity.dim();
        let cav = displaced_fock(n as usize, C64::new(beta, 0.0), cavity)?;
        let open = qubit_rotation(0.0, PI / 2.0);
        let mut initial = Array1::zeros(2 * d);
        for k in 0..d {
            initial[k] = open[0][0] * cav.amplitudes()[k];
            initial[d + k] = open[1][0] * cav.amplitudes()[k];
        }
        let rate = PI / params.t_m;
        let mut h = Array2::zeros((2 * d, 2 * d));
        for k in 0..d {
            h[[d + k, d + k]] = C64::new(-rate * k as f64, 0.0);
        }
        let mut a = Array2::zeros((2 * d, 2 * d));
        let mut num = Array2::zeros((2 * d, 2 * d));
        let mut sm = Array2::zeros((2 * d, 2 * d));
        let mut pe = Array2::zeros((2 * d, 2 * d));
        for q in 0..2 {
            for k in 0..d {
                if k > 0 {
                    a[[q * d + k - 1, q * d + k]] = C64::new((k as f64).sqrt(), 0.0);
                }
                num[[q * d + k, q * d + k]] = C64::new(k as f64, 0.0);
            }
        }
        for k in 0..d {
            sm[[k, d + k]] = C64::new(1.0, 0.0);
            pe[[d + k, d + k]] = C64::new(1.0, 0.0);
        }
        Ok(Self {
            cavity,
            hamiltonian: h,
            jumps: vec![
                (a, params.kappa1),
                (num, params.kappa2),
                (sm, params.kappa3),
                (pe, params.kappa4),
            ],
            initial,
            duration: params.t_m,
        })
    }

    pub fn lindblad_spec(&self) -> Result<LindbladSpec> {
        LindbladSpec::new(self.hamiltonian.clone(), self.jumps.clone(), self.duration)
    }

    pub fn initial_density(&self) -> Array2<C64> {
        let v = &self.initial;
        Array2::from_shape_fn((v.len(), v.len()), |(i, j)| v[i] * v[j].conj())
    }

    /// Ground-state probability after the closing `-X/2` pulse.
    pub fn ground_probability(&self, rho: &Array2<C64>) -> f64 {
        let close = qubit_gate_on_composite(&qubit_rotation(0.0, -PI / 2.0), self.cavity);
        let u = close.matrix();
        let out = u.dot(rho).dot(&dagger(u));
        (0..self.cavity.dim()).map(|k| out[[k, k]].re).sum()
    }

    /// Unitary evolution to the end of the window, `U(T) rho_0 U^dagger(T)`.
    pub fn ideal_final(&self) -> Array2<C64> {
        let v: Array1<C64> = self
            .initial
            .iter()
            .enumerate()
            .map(|(i, a)| a * C64::from_polar(1.0, -self.hamiltonian[[i, i]].re * self.duration))
            .collect();
        Array2::from_shape_fn((v.len(), v.len()), |(i, j)| v[i] * v[j].conj())
    }
}

/// Truncation holding `D(beta)|N>` with its tail inside the interior and a
/// guard band wide enough for the displacement itself.
pub fn displaced_fock_space(n: u32, beta: f64) -> Result<HilbertSpec> {
    let r = (n as f64).sqrt() + beta.abs();
    let interior = (r * r + 8.0 * r + 12.0).ceil() as usize;
    let guard = (6.0 * beta.abs() * (interior as f64).sqrt() + 12.0).ceil() as usize;
    HilbertSpec::new(interior + guard, guard)
}

/// Parity-measurement ground probability from the full Lindblad integrator.
pub fn parity_prob_lindblad(n: u32, beta: f64, params: &DeviceParams) -> Result<f64> {
    let proto = ParityProtocol::new(n, beta, params)?;
    let rho = lindblad_evolve_matrix(&proto.initial_density(), &proto.lindblad_spec()?)?;
    Ok(proto.ground_probability(&rho))
}

/// Bias from cavity dephasing during the displacement,
/// `kappa2 T_D beta^2 N^3 / 3`.
pub fn displacement_dephasing_bias(n: u32, beta: f64, params: &DeviceParams) -> f64 {
    let nf = n as f64;
    if nf * params.kappa2 * params.t_d > 0.1 || nf * beta * beta > 1.0 {
        log::warn!(
            "dephasing bias outside its validity domain (N = {n}, beta = {beta}); \
             the linearized formula overestimates"
        );
    }
    params.kappa2 * params.t_d * beta * beta * nf.powi(3) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModel {
    pub n: u32,
    pub lambda1: f64,
    pub lambda2: f64,
    pub fisher: f64,
    pub precision: f64,
    pub gain_db: f64,
}

/// Precision-versus-N prediction with the noise lumped into `lambda1` and
/// `lambda2`: `F = (1 - lambda2)^2 8N`.
pub fn toy_model(n: u32, params: &DeviceParams) -> Result<ToyModel> {
    if n == 0 {
        return Err(invalid("n", "the toy model needs N >= 1"));
    }
    let nf = n as f64;
    let q = params.kappa3 + params.kappa4;
    let lambda1 = nf * params.kappa1 * params.t_i
        + 0.5 * nf * params.kappa1 * params.t_m
        + q * params.t_m / 4.0;
    let lambda2 = 2.0 * nf * params.kappa1 * params.t_i
        + nf * params.kappa1 * params.t_m
        + q * params.t_m / 2.0
        + params.kappa2 * params.t_d * nf * nf / 6.0;
    if lambda2 >= 1.0 {
        return Err(Error::ModelBreakdown { n, lambda2 });
    }
    let fisher = (1.0 - lambda2).powi(2) * 8.0 * nf;
    let precision = 1.0 / fisher.sqrt();
    Ok(ToyModel {
        n,
        lambda1,
        lambda2,
        fisher,
        precision,
        gain_db: 20.0 * (0.5 / precision).log10(),
    })
}

/// Toy model over `1..=n_max`, stopping at the first breakdown, and the
/// entry with the best precision.
pub fn toy_model_scan(n_max: u32, params: &DeviceParams) -> Result<(Vec<ToyModel>, ToyModel)> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        match toy_model(n, params) {
            Ok(r) => rows.push(r),
            Err(Error::ModelBreakdown { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let best = rows
        .iter()
        .copied()
        .min_by(|a, b| a.precision.total_cmp(&b.precision))
        .ok_or_else(|| invalid("n_max", "no valid toy-model point"))?;
    Ok((rows, best))
}

/// Fock-state fidelity after the initialization window, `1 - N kappa1 T_i`,
/// floored at zero.
pub fn init_fidelity_model(n: u32, params: &DeviceParams) -> f64 {
    let loss = n as f64 * params.kappa1 * params.t_i;
    if loss >= 1.0 {
        log::warn!("N kappa1 T_i = {loss:.3} >= 1; initialization model is invalid");
    }
    (1.0 - loss).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{coherent_state, ladder_ops, number_op, PureState};

    fn max_abs(m: &Array2<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn trivial_evolution() {
        let s = HilbertSpec::new(20, 4).unwrap();
        let rho = coherent_state(C64::new(1.0, 0.3), s).unwrap().to_mixed();
        let spec = LindbladSpec::new(Array2::zeros((20, 20)), vec![], 1e-6).unwrap();
        let out = lindblad_evolve(&rho, &spec).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn fock_one_decay() {
        let s = HilbertSpec::new(6, 2).unwrap();
        let (a, _) = ladder_ops(s);
        let kappa = 1e3;
        let t = 1e-4;
        let spec = LindbladSpec::from_ops(&LinearOp::identity(s), &[(a, kappa)], t).unwrap();
        let spec = LindbladSpec {
            hamiltonian: Array2::zeros((6, 6)),
            ..spec
        };
        let rho = PureState::fock(1, s).unwrap().to_mixed();
        let out = lindblad_evolve(&rho, &spec).unwrap();
        let p = out.populations();
        assert!((p[1] - (-0.1f64).exp()).abs() < 1e-6);
        assert!((p[0] - (1.0 - (-0.1f64).exp())).abs() < 1e-6);
        assert!((out.trace() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn dephasing_keeps_populations() {
        let s = HilbertSpec::new(30, 10).unwrap();
        let n = number_op(s);
        let rho = coherent_state(C64::new(2.0, 0.0), s).unwrap().to_mixed();
        let spec =
            LindbladSpec::new(Array2::zeros((30, 30)), vec![(n.into_matrix(), 1e4)], 2e-5).unwrap();
        let out = lindblad_evolve(&rho, &spec).unwrap();
        for (a, b) in out.populations().iter().zip(rho.populations()) {
            assert!((a - b).abs() < 1e-8);
        }
        // coherences do decay
        assert!(out.matrix()[[3, 5]].norm() < rho.matrix()[[3, 5]].norm());
    }

    #[test]
    fn step_size_checks() {
        let h = Array2::from_diag(&Array1::from_shape_fn(4, |k| C64::new(1e9 * k as f64, 0.0)));
        let spec = LindbladSpec::new(h.clone(), vec![], 1e-6).unwrap();
        assert!(spec.dt * 1.5e9 < MAX_STEP_PRODUCT);
        let err = spec.clone().with_dt(1e-9);
        assert!(matches!(err, Err(Error::StepSize(_))));
        let err = spec.with_dt(1e-5);
        assert!(matches!(err, Err(Error::StepSize(_))));
        // a constant offset does not stiffen the problem
        let shifted = Array2::from_diag(&Array1::from_elem(4, C64::new(1e9, 0.0)));
        assert!(LindbladSpec::new(shifted, vec![], 1e-6)
            .unwrap()
            .with_dt(1e-9)
            .is_ok());
    }

    #[test]
    fn perturbation_examples() {
        let s = HilbertSpec::new(12, 4).unwrap();
        let (a, _) = ladder_ops(s);
        let zero = Array2::zeros((12, 12));
        let psi = PureState::fock(5, s).unwrap();
        let none =
            perturbation_first_order(&zero, psi.amplitudes(), &[(a.matrix().clone(), 0.0)], 3e-6)
                .unwrap();
        assert_eq!(max_abs(&none), 0.0);

        let p = DeviceParams::default();
        let rho1 = perturbation_first_order(
            &zero,
            psi.amplitudes(),
            &[(a.matrix().clone(), p.kappa1)],
            p.t_i,
        )
        .unwrap();
        let w = p.kappa1 * p.t_i * 5.0;
        let mut want = Array2::<C64>::zeros((12, 12));
        want[[4, 4]] = C64::new(w, 0.0);
        want[[5, 5]] = C64::new(-w, 0.0);
        assert!(max_abs(&(&rho1 - &want)) < 1e-14);

        let rho_half = perturbation_first_order(
            &zero,
            psi.amplitudes(),
            &[(a.matrix().clone(), p.kappa1 / 2.0)],
            p.t_i,
        )
        .unwrap();
        assert!(max_abs(&(&rho1.mapv(|z| z * 0.5) - &rho_half)) < 1e-10 * max_abs(&rho1));
    }

    #[test]
    fn perturbation_with_nondiagonal_hamiltonian_matches_integrator() {
        let s = HilbertSpec::new(8, 2).unwrap();
        let (a, ad) = ladder_ops(s);
        let h = (a.matrix() + ad.matrix()).mapv(|z| z * 2e6);
        let psi = PureState::fock(1, s).unwrap();
        let kappa = 2e3;
        let t = 1e-6;
        let jumps = vec![(a.matrix().clone(), kappa)];
        let rho1 = perturbation_first_order(&h, psi.amplitudes(), &jumps, t).unwrap();
        let spec0 = LindbladSpec::new(h.clone(), vec![], t).unwrap();
        let spec = LindbladSpec::new(h, jumps, t).unwrap();
        let rho0 = lindblad_evolve_matrix(&psi.to_mixed().matrix().clone(), &spec0).unwrap();
        let full = lindblad_evolve_matrix(psi.to_mixed().matrix(), &spec).unwrap();
        let resid = max_abs(&(&full - &rho0 - &rho1));
        assert!(resid < 1e-2 * max_abs(&rho1), "resid {resid:e}");
    }

    #[test]
    fn closed_form_parity_examples() {
        let p = DeviceParams::default();
        let ideal = p.noiseless();
        for n in 0..6 {
            for beta in [0.0, 0.3, 0.8] {
                let x = 4.0 * beta * beta;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let want = 0.5 + 0.5 * sign * laguerre(n as i64, x) * (-x / 2.0).exp();
                assert_eq!(parity_prob_noisy(n, beta, &ideal), want);
            }
        }
        let q = DeviceParams {
            kappa1: 0.0,
            kappa2: 0.0,
            ..p
        };
        let want = 1.0 - (q.kappa3 + q.kappa4) * q.t_m / 4.0;
        assert!((parity_prob_noisy(0, 0.0, &q) - want).abs() < 1e-15);
    }

    #[test]
    fn dephasing_bias_examples() {
        let p = DeviceParams::default();
        assert_eq!(displacement_dephasing_bias(40, 0.05, &p.noiseless()), 0.0);
        let b = displacement_dephasing_bias(40, 0.05, &p);
        assert!((b - 2.67e-3).abs() < 0.02e-3, "bias {b}");
        let r =
            displacement_dephasing_bias(10, 0.04, &p) / displacement_dephasing_bias(10, 0.02, &p);
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn toy_model_examples() {
        let p = DeviceParams::default();
        assert!((2.0 * p.kappa1 * p.t_i - 5e-3).abs() < 1e-12);
        assert!(((p.kappa3 + p.kappa4) * p.t_m / 2.0 - 1.04e-2).abs() < 1e-4);
        assert!((p.kappa2 * p.t_d / 6.0 - 8.33e-6).abs() < 1e-8);
        let ideal = toy_model(40, &p.noiseless()).unwrap();
        assert_eq!(ideal.fisher, 320.0);
        assert!((ideal.gain_db - 10.0 * 80f64.log10()).abs() < 1e-12);
        assert!(toy_model(0, &p).is_err());
        let harsh = p.with_rates_scaled(200.0);
        assert!(matches!(
            toy_model(60, &harsh),
            Err(Error::ModelBreakdown { .. })
        ));
    }

    #[test]
    fn init_fidelity_examples() {
        let p = DeviceParams::default();
        assert_eq!(init_fidelity_model(0, &p), 1.0);
        assert!((init_fidelity_model(100, &p) - 0.75).abs() < 1e-12);
        let f: Vec<f64> = (0..50).map(|n| init_fidelity_model(n, &p)).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
    }
}
