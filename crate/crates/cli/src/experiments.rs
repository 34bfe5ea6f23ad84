//! One function per experiment kind; each returns its tables in memory.

use fockmet_core::composite::{prepare_fock, ramsey_trace, resolve_photon_cascade, DeviceParams};
use fockmet_core::estimation::{
    bootstrap_precision, fit_curve, fit_ramsey_frequency, fit_scaling_exponent, CurveModel,
    ShotRecord,
};
use fockmet_core::fockspace::{coherent_state, displaced_fock, PureState};
use fockmet_core::metrology::{
    cfi_of_curve, gain_db_precision, maximize, parity_cfi, parity_curve_ideal,
    parity_curve_ideal_deriv, phase_cfi, phase_curve_ideal, sql_baselines, weighted_fisher,
};
use fockmet_core::noise::{parity_prob_noisy, toy_model_scan};
use fockmet_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::config::*;
use crate::table::{Cell, Table};
use crate::CliError;

pub struct Outcome {
    pub tables: Vec<Table>,
    /// Experiment-specific provenance lines.
    pub provenance: Vec<String>,
}

fn core(context: &str) -> impl FnOnce(fockmet_core::Error) -> CliError + '_ {
    move |source| CliError::Numerical {
        context: context.to_string(),
        source,
    }
}

/// Binomial sample mean of `p` on its own RNG stream.
fn sample(p: f64, shots: Shots, seed: u64, stream: u64) -> f64 {
    match shots {
        Shots::Exact => p,
        Shots::Count(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let dist = Binomial::new(k, p.clamp(0.0, 1.0)).expect("probability in [0, 1]");
            dist.sample(&mut rng) as f64 / k as f64
        }
    }
}

fn truncation_line(t: Truncation) -> String {
    format!("truncation: dim = {}, guard = {}", t.dim, t.guard)
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.experiment {
        Experiment::PrepareFock(e) => run_prepare_fock(e),
        Experiment::RamseyScan(e) => run_ramsey(e, cfg.shots, cfg.seed),
        Experiment::DisplacementSweep(e) => run_displacement(e, &cfg.device, cfg.shots, cfg.seed),
        Experiment::PhaseSweep(e) => run_phase(e, cfg.shots, cfg.seed),
        Experiment::ResolvedSweep(e) => run_resolved(e),
        Experiment::ScalingStudy(e) => run_scaling(e, &cfg.device),
        Experiment::ToyModelStudy(e) => run_toy(e, &cfg.device),
        Experiment::WignerMap(e) => run_wigner(e),
    }
}

fn resolved_truncation(t: Option<Truncation>) -> Truncation {
    t.expect("truncation is filled during resolution")
}

fn run_prepare_fock(e: &PrepareFock) -> Result<Outcome, CliError> {
    let trunc = resolved_truncation(e.truncation);
    let spec = trunc.spec()?;
    let alpha = e.alpha.unwrap_or((e.target as f64).sqrt());
    let filters = e.filters.clone().unwrap_or_default();
    let initial =
        coherent_state(C64::new(alpha, 0.0), spec).map_err(core("prepare_fock: initial state"))?;
    let prep = prepare_fock(e.target, Some(C64::new(alpha, 0.0)), &filters, spec)
        .map_err(core("prepare_fock"))?;

    let mut stages = Table::new(
        "prepare_fock_stages",
        &[
            "stage [1]",
            "kind",
            "target_n [photons]",
            "theta [rad]",
            "phi [rad]",
            "sigma [photons]",
            "p_g [1]",
            "fidelity [1]",
            "mean_n [photons]",
        ],
    );
    for (i, s) in prep.stages.iter().enumerate() {
        let mean: f64 = s
            .populations
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        stages.push(vec![
            (i + 1).into(),
            format!("{:?}", s.filter.kind).to_lowercase().into(),
            s.filter.target_n.into(),
            s.filter.theta.into(),
            s.filter.phi.into(),
            s.filter.sigma.into(),
            s.p_g.into(),
            s.populations.get(e.target).copied().unwrap_or(0.0).into(),
            mean.into(),
        ]);
    }
    let mut pops = Table::new(
        "prepare_fock_populations",
        &["n [photons]", "initial [1]", "final [1]"],
    );
    for (n, (a, b)) in initial
        .populations()
        .iter()
        .zip(prep.state.populations())
        .enumerate()
    {
        pops.push(vec![n.into(), (*a).into(), b.into()]);
    }
    let mut summary = Table::new(
        "prepare_fock_summary",
        &[
            "success_probability [1]",
            "fidelity [1]",
            "mean_n [photons]",
            "std_n [photons]",
        ],
    );
    summary.push(vec![
        prep.success_probability.into(),
        prep.fidelity.into(),
        prep.state.mean_photon_number().into(),
        prep.state.photon_number_std().into(),
    ]);
    Ok(Outcome {
        tables: vec![stages, pops, summary],
        provenance: vec![truncation_line(trunc)],
    })
}

fn run_ramsey(e: &RamseyScan, shots: Shots, seed: u64) -> Result<Outcome, CliError> {
    let thetas = e.theta.points();
    let traces: Vec<Vec<f64>> = e
        .n_values
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            ramsey_trace(n, e.target, &thetas)
                .into_iter()
                .enumerate()
                .map(|(j, p)| sample(p, shots, seed, (i * thetas.len() + j) as u64))
                .collect()
        })
        .collect();
    let mut trace_table = Table::new("ramsey_trace", &["n [photons]", "theta [rad]", "p_g [1]"]);
    let mut fit_table = Table::new(
        "ramsey_fit",
        &[
            "n [photons]",
            "frequency [1/rad]",
            "expected [1/rad]",
            "relative_error [1]",
        ],
    );
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for (&n, trace) in e.n_values.iter().zip(&traces) {
        for (t, p) in thetas.iter().zip(trace) {
            trace_table.push(vec![n.into(), (*t).into(), (*p).into()]);
        }
        let f = fit_ramsey_frequency(&thetas, trace).map_err(|source| CliError::Numerical {
            context: format!("ramsey_scan n = {n}"),
            source,
        })?;
        let expected = (n as f64 - e.target as f64).abs();
        fit_table.push(vec![
            n.into(),
            f.into(),
            expected.into(),
            ((f - expected) / expected).into(),
        ]);
        xs.push(expected);
        fs.push(f);
    }
    let mut tables = vec![trace_table, fit_table];
    if xs.len() >= 2 {
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, fs.iter().sum::<f64>() / m);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx > 0.0 {
            let sxy: f64 = xs.iter().zip(&fs).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            let mut s = Table::new("ramsey_summary", &["slope [1]", "intercept [1/rad]"]);
            s.push(vec![slope.into(), (my - slope * mx).into()]);
            tables.push(s);
        }
    }
    Ok(Outcome {
        tables,
        provenance: vec![format!("target_n = {}", e.target)],
    })
}

struct SweepInput<'a> {
    name: &'a str,
    axis: &'a str,
    model: CurveModel,
    grid: Grid,
    resamples: usize,
    sql: f64,
}

/// Shared body of the displacement and phase sweeps.
fn sweep(
    input: SweepInput<'_>,
    truth: &(dyn Fn(f64) -> f64 + Sync),
    exact_fisher: &(dyn Fn(f64) -> f64 + Sync),
    shots: Shots,
    seed: u64,
) -> Result<Outcome, CliError> {
    let xs = input.grid.points();
    let (lo, hi) = (input.grid.start, input.grid.stop);
    let probs: Vec<f64> = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| sample(truth(*x), shots, seed, i as u64))
        .collect();
    let axis_header = format!(
        "{} [{}]",
        input.axis,
        if input.axis == "phi" { "rad" } else { "1" }
    );
    let mut table = Table::new(input.name, &[axis_header.as_str(), "p_g [1]", "fisher [1]"]);
    let mut summary_cols = vec![
        "fisher_max [1]".to_string(),
        format!(
            "argmax_{} [{}]",
            input.axis,
            if input.axis == "phi" { "rad" } else { "1" }
        ),
        "precision [1]".to_string(),
        "sql_precision [1]".to_string(),
        "gain [dB]".to_string(),
    ];
    let mut summary_row: Vec<Cell>;
    match shots {
        Shots::Exact => {
            let fisher: Vec<f64> = xs.par_iter().map(|x| exact_fisher(*x)).collect();
            for ((x, p), f) in xs.iter().zip(&probs).zip(&fisher) {
                table.push(vec![(*x).into(), (*p).into(), (*f).into()]);
            }
            let (arg, fm) = maximize(exact_fisher, lo, hi).map_err(core(input.name))?;
            let precision = 1.0 / fm.sqrt();
            summary_row = vec![
                fm.into(),
                arg.into(),
                precision.into(),
                input.sql.into(),
                gain_db_precision(input.sql, precision).into(),
            ];
        }
        Shots::Count(k) => {
            let fit = fit_curve(input.model, &xs, &probs).map_err(core(input.name))?;
            let (a, b) = (fit.parameters[0], fit.parameters[1]);
            for (x, p) in xs.iter().zip(&probs) {
                table.push(vec![
                    (*x).into(),
                    (*p).into(),
                    input.model.fisher(a, b, *x).into(),
                ]);
            }
            let (arg, fm) =
                maximize(|x| input.model.fisher(a, b, x), lo, hi).map_err(core(input.name))?;
            let precision = 1.0 / fm.sqrt();
            summary_row = vec![
                fm.into(),
                arg.into(),
                precision.into(),
                input.sql.into(),
                gain_db_precision(input.sql, precision).into(),
            ];
            summary_cols.extend(
                ["fit_a [1]", "fit_b [1]", "fit_a_err [1]", "fit_b_err [1]"].map(String::from),
            );
            summary_row.extend([
                a.into(),
                b.into(),
                fit.std_error("A").unwrap_or(f64::NAN).into(),
                fit.std_error("B").unwrap_or(f64::NAN).into(),
            ]);
            if input.resamples > 0 {
                let records: Vec<ShotRecord> = xs
                    .iter()
                    .zip(&probs)
                    .map(|(x, p)| ShotRecord {
                        x: *x,
                        p_hat: *p,
                        shots: Some(k),
                    })
                    .collect();
                let boot = bootstrap_precision(&records, input.model, input.resamples, seed)
                    .map_err(core(input.name))?;
                summary_cols.extend(
                    [
                        "bootstrap_precision [1]",
                        "bootstrap_std [1]",
                        "bootstrap_failures [1]",
                    ]
                    .map(String::from),
                );
                summary_row.extend([
                    boot.precision.into(),
                    boot.std_error.into(),
                    boot.failures.into(),
                ]);
            }
        }
    }
    let cols: Vec<&str> = summary_cols.iter().map(String::as_str).collect();
    let mut summary = Table::new(&format!("{}_summary", input.name), &cols);
    summary.push(summary_row);
    Ok(Outcome {
        tables: vec![table, summary],
        provenance: Vec::new(),
    })
}

fn run_displacement(
    e: &DisplacementSweep,
    device: &DeviceParams,
    shots: Shots,
    seed: u64,
) -> Result<Outcome, CliError> {
    let n = e.n;
    let truth = |b: f64| {
        if e.noisy {
            parity_prob_noisy(n, b, device)
        } else {
            parity_curve_ideal(n, b)
        }
    };
    let fisher = |b: f64| {
        if e.noisy {
            cfi_of_curve(|x| parity_prob_noisy(n, x, device), None, b).value
        } else {
            parity_cfi(n, b)
        }
    };
    let mut out = sweep(
        SweepInput {
            name: "displacement_sweep",
            axis: "beta",
            model: CurveModel::Displacement { n },
            grid: e.beta,
            resamples: e.resamples,
            sql: sql_baselines(n as f64).0,
        },
        &truth,
        &fisher,
        shots,
        seed,
    )?;
    out.provenance
        .push(format!("probe: fock N = {n}, noisy = {}", e.noisy));
    Ok(out)
}

fn run_phase(e: &PhaseSweep, shots: Shots, seed: u64) -> Result<Outcome, CliError> {
    let n = e.n;
    let gamma = (n as f64).sqrt();
    let mut out = sweep(
        SweepInput {
            name: "phase_sweep",
            axis: "phi",
            model: CurveModel::Phase { n },
            grid: e.phi,
            resamples: e.resamples,
            sql: sql_baselines(2.0 * n as f64).1,
        },
        &|p| phase_curve_ideal(n, gamma, p),
        &|p| phase_cfi(n, gamma, p),
        shots,
        seed,
    )?;
    out.provenance
        .push(format!("probe: D(gamma)|N>, N = {n}, gamma^2 = N"));
    Ok(out)
}

fn run_resolved(e: &ResolvedSweep) -> Result<Outcome, CliError> {
    let trunc = resolved_truncation(e.truncation);
    let spec = trunc.spec()?;
    let coh =
        coherent_state(C64::new(e.n_mean.sqrt(), 0.0), spec).map_err(core("resolved_sweep"))?;
    let traces = resolve_photon_cascade(&coh, e.m).map_err(core("resolved_sweep: cascade"))?;
    let mut trace_table = Table::new(
        "resolved_traces",
        &[
            "resolved_n [photons]",
            "bits",
            "probability [1]",
            "mean_n [photons]",
        ],
    );
    // (probability, populations) of each populated branch
    let mut branches: Vec<(f64, Vec<f64>)> = Vec::new();
    for t in &traces {
        let bits: String = t.bits.iter().map(|b| char::from(b'0' + b)).collect();
        let mean = t
            .post_state
            .as_ref()
            .map_or(f64::NAN, PureState::mean_photon_number);
        trace_table.push(vec![
            t.resolved_n.into(),
            bits.into(),
            t.probability.into(),
            mean.into(),
        ]);
        if let Some(st) = &t.post_state {
            branches.push((t.probability, st.populations()));
        }
    }
    let pops = coh.populations();
    let pairs: Vec<(usize, f64)> = pops.iter().copied().enumerate().collect();
    let mixture = |w: &[f64], b: f64| -> (f64, f64) {
        w.iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .fold((0.0, 0.0), |(v, d), (n, p)| {
                (
                    v + p * parity_curve_ideal(n as u32, b),
                    d + p * parity_curve_ideal_deriv(n as u32, b),
                )
            })
    };
    let curve_cfi =
        |w: &[f64], b: f64| cfi_of_curve(|x| mixture(w, x).0, Some(&|x| mixture(w, x).1), b).value;
    let cascade = |b: f64| -> f64 { branches.iter().map(|(p, w)| p * curve_cfi(w, b)).sum() };
    let resolved =
        |b: f64| weighted_fisher(&pairs, |n| parity_cfi(n as u32, b)).unwrap_or(f64::NAN);
    let unresolved = |b: f64| curve_cfi(&pops, b);

    let betas = e.beta.points();
    let rows: Vec<[f64; 3]> = betas
        .par_iter()
        .map(|b| [cascade(*b), resolved(*b), unresolved(*b)])
        .collect();
    let mut sweep = Table::new(
        "resolved_sweep",
        &[
            "beta [1]",
            "fisher_cascade [1]",
            "fisher_resolved [1]",
            "fisher_unresolved [1]",
        ],
    );
    for (b, r) in betas.iter().zip(&rows) {
        sweep.push(vec![(*b).into(), r[0].into(), r[1].into(), r[2].into()]);
    }
    let mut summary = Table::new(
        "resolved_summary",
        &[
            "scheme",
            "fisher_max [1]",
            "argmax_beta [1]",
            "precision [1]",
            "gain [dB]",
        ],
    );
    let sql = sql_baselines(e.n_mean).0;
    let schemes: [(&str, &(dyn Fn(f64) -> f64 + Sync)); 3] = [
        ("cascade", &cascade),
        ("resolved", &resolved),
        ("unresolved", &unresolved),
    ];
    for (name, f) in schemes {
        let (arg, fm) = maximize(f, e.beta.start, e.beta.stop).map_err(core("resolved_sweep"))?;
        let precision = 1.0 / fm.sqrt();
        summary.push(vec![
            name.to_string().into(),
            fm.into(),
            arg.into(),
            precision.into(),
            gain_db_precision(sql, precision).into(),
        ]);
    }
    Ok(Outcome {
        tables: vec![trace_table, sweep, summary],
        provenance: vec![
            truncation_line(trunc),
            format!(
                "n_mean (truncated) = {}",
                crate::table::format_real(coh.mean_photon_number())
            ),
            format!("cascade depth m = {}", e.m),
        ],
    })
}

fn run_scaling(e: &ScalingStudy, device: &DeviceParams) -> Result<Outcome, CliError> {
    let ns: Vec<u32> = (e.n_min..=e.n_max).collect();
    let rows: Vec<Result<(f64, f64), CliError>> = ns
        .par_iter()
        .map(|&n| {
            let f = |b: f64| {
                if e.noisy {
                    cfi_of_curve(|x| parity_prob_noisy(n, x, device), None, b).value
                } else {
                    parity_cfi(n, b)
                }
            };
            maximize(f, 0.0, e.beta_max).map_err(|source| CliError::Numerical {
                context: format!("scaling_study N = {n}"),
                source,
            })
        })
        .collect();
    let mut table = Table::new(
        "scaling_study",
        &[
            "N [photons]",
            "fisher_max [1]",
            "argmax_beta [1]",
            "precision [1]",
            "sql_precision [1]",
            "gain [dB]",
        ],
    );
    let mut fit_x = Vec::new();
    let mut fit_y = Vec::new();
    for (n, row) in ns.iter().zip(rows) {
        let (arg, fm) = row?;
        let precision = 1.0 / fm.sqrt();
        let sql = sql_baselines(*n as f64).0;
        table.push(vec![
            (*n).into(),
            fm.into(),
            arg.into(),
            precision.into(),
            sql.into(),
            gain_db_precision(sql, precision).into(),
        ]);
        if (e.fit_min..=e.fit_max).contains(n) {
            fit_x.push(*n as f64);
            fit_y.push(precision);
        }
    }
    let (exponent, intercept) =
        fit_scaling_exponent(&fit_x, &fit_y).map_err(core("scaling_study fit"))?;
    let mut fit = Table::new(
        "scaling_fit",
        &[
            "fit_min [photons]",
            "fit_max [photons]",
            "exponent [1]",
            "log10_intercept [1]",
        ],
    );
    fit.push(vec![
        e.fit_min.into(),
        e.fit_max.into(),
        exponent.into(),
        intercept.into(),
    ]);
    Ok(Outcome {
        tables: vec![table, fit],
        provenance: vec![format!("noisy = {}", e.noisy)],
    })
}

fn run_toy(e: &ToyModelStudy, device: &DeviceParams) -> Result<Outcome, CliError> {
    let (rows, best) = toy_model_scan(e.n_max, device).map_err(core("toy_model_study"))?;
    let mut table = Table::new(
        "toy_model",
        &[
            "N [photons]",
            "lambda1 [1]",
            "lambda2 [1]",
            "precision [1]",
            "gain [dB]",
        ],
    );
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.lambda1.into(),
            r.lambda2.into(),
            r.precision.into(),
            r.gain_db.into(),
        ]);
    }
    let mut opt = Table::new(
        "toy_model_optimum",
        &["N [photons]", "precision [1]", "gain [dB]"],
    );
    opt.push(vec![
        best.n.into(),
        best.precision.into(),
        best.gain_db.into(),
    ]);
    let f = crate::table::format_real;
    let d = device;
    let mut provenance = vec![
        format!("2 kappa1 T_i = {}", f(2.0 * d.kappa1 * d.t_i)),
        format!("kappa1 T_M = {}", f(d.kappa1 * d.t_m)),
        format!(
            "(kappa3 + kappa4) T_M / 2 = {}",
            f((d.kappa3 + d.kappa4) * d.t_m / 2.0)
        ),
        format!("kappa2 T_D / 6 = {}", f(d.kappa2 * d.t_d / 6.0)),
    ];
    if rows.len() < e.n_max as usize {
        provenance.push(format!(
            "table ends at N = {}: lambda2 >= 1 beyond",
            rows.len()
        ));
    }
    Ok(Outcome {
        tables: vec![table, opt],
        provenance,
    })
}

fn run_wigner(e: &WignerMap) -> Result<Outcome, CliError> {
    let trunc = resolved_truncation(e.truncation);
    let spec = trunc.spec()?;
    let state = match e.state {
        WignerState::Fock { n } => PureState::fock(n as usize, spec),
        WignerState::Coherent { re, im } => coherent_state(C64::new(re, im), spec),
        WignerState::DisplacedFock { n, gamma } => {
            displaced_fock(n as usize, C64::new(gamma, 0.0), spec)
        }
    }
    .map_err(core("wigner_map: state"))?;
    let re = e.re.points();
    let im = e.im.points();
    let points: Vec<(f64, f64)> = re
        .iter()
        .flat_map(|r| im.iter().map(move |i| (*r, *i)))
        .collect();
    let values: Vec<Result<f64, fockmet_core::Error>> = points
        .par_iter()
        .map(|(r, i)| fockmet_core::fockspace::wigner_value_pure(&state, C64::new(*r, *i)))
        .collect();
    let mut table = Table::new(
        "wigner_map",
        &["re_alpha [1]", "im_alpha [1]", "wigner [1]"],
    );
    for ((r, i), w) in points.iter().zip(values) {
        let w = w.map_err(core("wigner_map"))?;
        table.push(vec![(*r).into(), (*i).into(), w.into()]);
    }
    Ok(Outcome {
        tables: vec![table],
        provenance: vec![truncation_line(trunc)],
    })
}
