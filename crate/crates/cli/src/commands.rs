use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use nspec_core::dressed::{DressedSolution, DriveConfig, BASIS_LABELS};
use nspec_core::fitting::{
    detuning_bias_bound, fit_height, fit_splitting, load_series, FitError, FitResult, FittedModel,
    DEFAULT_DETUNING,
};
use nspec_core::obe::{probe_absorption_spectrum, DecayConfig, ProbeConfig};
use nspec_core::spectrum::{
    find_peaks, trajectory_vs_delta2, uniform_grid, weights_vs_ratio, SpectrumModel,
};
use nspec_core::zeeman::{
    build_coupling_graph, decompose, effective_n_parameters, transform_basis, BasisChange,
    Decomposition, Edge, PolarizationScheme,
};

use crate::options::{
    pair, usage, Basis, EigenOptions, FitModel, FitOptions, Format, ObeOptions, Scheme,
    SpectrumOptions, TrajectoryOptions, WeightsOptions, ZeemanOptions,
};
use crate::output::{json as write_json, Csv};

fn drive([o1, o2, d1, d2]: [f64; 4]) -> Result<DriveConfig> {
    Ok(DriveConfig::new(o1, o2, d1, d2)?)
}

fn grid(
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    default: [f64; 3],
) -> Result<Vec<f64>> {
    let (a, b, s) = (
        start.unwrap_or(default[0]),
        stop.unwrap_or(default[1]),
        step.unwrap_or(default[2]),
    );
    uniform_grid(a, b, s).with_context(|| format!("invalid grid start={a} stop={b} step={s}"))
}

pub fn eigen(opts: EigenOptions) -> Result<()> {
    let cfg = drive(opts.drive()?)?;
    let sol = DressedSolution::solve(&cfg)?;
    let out = opts.output.as_deref();
    match opts.format.unwrap_or_default() {
        Format::Csv => {
            let mut header = vec!["nu", "energy_mhz", "weight"];
            header.extend(BASIS_LABELS);
            let mut csv = Csv::new(out, &header)?;
            for nu in 0..3 {
                let v = sol.vectors[nu];
                csv.row(&[
                    (nu + 1) as f64,
                    sol.energies[nu],
                    sol.weights[nu],
                    v[0],
                    v[1],
                    v[2],
                ])?;
            }
            csv.finish()
        }
        Format::Json => write_json(
            out,
            &json!({ "drive": cfg, "solution": sol, "splitting_mhz": sol.splitting(), "basis": BASIS_LABELS }),
        ),
    }
}

fn spectrum_output(
    out: Option<&std::path::Path>,
    format: Format,
    grid: &[f64],
    values: &[f64],
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut csv = Csv::new(out, &["delta_p_mhz", "absorption"])?;
            for (x, y) in grid.iter().zip(values) {
                csv.row(&[*x, *y])?;
            }
            csv.finish()
        }
        Format::Json => {
            let peaks = find_peaks(grid, values);
            write_json(
                out,
                &json!({ "delta_p_mhz": grid, "absorption": values, "peaks": peaks.0 }),
            )
        }
    }
}

pub fn spectrum(opts: SpectrumOptions) -> Result<()> {
    let mut model = SpectrumModel::new(drive(opts.drive()?)?);
    model.lineshape.fwhm = opts.fwhm.unwrap_or(model.lineshape.fwhm);
    model.lineshape.broadening_factor = opts
        .broadening_factor
        .unwrap_or(model.lineshape.broadening_factor);
    model.uncoupled_height = opts.uncoupled_height.unwrap_or(model.uncoupled_height);
    model.uncoupled_center = opts.uncoupled_center.unwrap_or(model.uncoupled_center);
    model.global_shift = opts.global_shift.unwrap_or(model.global_shift);
    model.coupled_scale = opts.coupled_scale.unwrap_or(model.coupled_scale);
    let grid = grid(opts.start, opts.stop, opts.step, [-100.0, 100.0, 0.1])?;
    let values = model.synthesize(&grid)?;
    spectrum_output(
        opts.output.as_deref(),
        opts.format.unwrap_or_default(),
        &grid,
        &values,
    )
}

pub fn trajectory(opts: TrajectoryOptions) -> Result<()> {
    let [o1, o2] = opts.rabi()?;
    let grid = grid(opts.start, opts.stop, opts.step, [-80.0, 80.0, 0.5])?;
    let points = trajectory_vs_delta2(o1, o2, opts.delta1.unwrap_or(0.0), &grid)?;
    let out = opts.output.as_deref();
    match opts.format.unwrap_or_default() {
        Format::Csv => {
            let mut csv = Csv::new(out, &["delta2_mhz", "e1_mhz", "e2_mhz", "e3_mhz"])?;
            for p in &points {
                csv.row(&[p.delta2, p.energies[0], p.energies[1], p.energies[2]])?;
            }
            csv.finish()
        }
        Format::Json => write_json(out, &points),
    }
}

pub fn weights(opts: WeightsOptions) -> Result<()> {
    let grid = grid(opts.start, opts.stop, opts.step, [0.0, 3.0, 0.01])?;
    let points = weights_vs_ratio(&grid)?;
    let out = opts.output.as_deref();
    match opts.format.unwrap_or_default() {
        Format::Csv => {
            let mut csv = Csv::new(
                out,
                &["ratio", "e1_norm", "e2_norm", "e3_norm", "a1", "a2", "a3"],
            )?;
            for p in &points {
                let (e, a) = (p.energies, p.weights);
                csv.row(&[p.ratio, e[0], e[1], e[2], a[0], a[1], a[2]])?;
            }
            csv.finish()
        }
        Format::Json => write_json(out, &points),
    }
}

fn fit_report(fit: &FitResult, opts: &FitOptions, max_power: f64) -> Result<Value> {
    let samples = opts.band_grid.unwrap_or(100);
    if samples == 0 {
        return Err(usage(FitOptions::COMMAND, "--band-grid must be at least 1"));
    }
    let (lo, hi) = (
        opts.band_start.unwrap_or(0.0),
        opts.band_stop.unwrap_or(max_power),
    );
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
        bail!("invalid band range {lo}..{hi} mW");
    }
    let powers: Vec<f64> = if samples == 1 {
        vec![lo]
    } else {
        (0..samples)
            .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
            .collect()
    };
    let band = fit.confidence_band(&powers);
    let band: Vec<Value> = (0..powers.len())
        .map(|i| json!({ "p2_mw": band.p2[i], "value": band.value[i], "lower": band.lower[i], "upper": band.upper[i] }))
        .collect();
    let names = fit.model.parameter_names();
    let (values, errors) = (fit.parameters(), fit.std_errors());
    let mut report = json!({
        "model": fit.model,
        "parameters": { names[0]: values[0], names[1]: values[1] },
        "std_errors": { names[0]: errors[0], names[1]: errors[1] },
        "covariance": fit.covariance,
        "chi_square": fit.chi_square,
        "dof": fit.dof,
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "band": band,
    });
    match fit.model {
        FittedModel::Splitting(m) => {
            let delta = opts.detuning.unwrap_or(DEFAULT_DETUNING);
            report["detuning_mhz"] = json!(delta);
            report["detuning_bias_bound_mhz"] =
                json!(detuning_bias_bound(delta, m.eval(max_power)));
        }
        FittedModel::Height(m) => {
            report["three_photon_fraction_at_max_power"] =
                json!(m.three_photon_fraction(max_power));
        }
    }
    Ok(report)
}

pub fn fit(opts: FitOptions) -> Result<()> {
    let path = opts.input_path()?;
    let series = load_series(&path).with_context(|| format!("cannot load {}", path.display()))?;
    let result = match opts.model.unwrap_or_default() {
        FitModel::Splitting => fit_splitting(&series),
        FitModel::Height => {
            let [omega1, k] = opts.height_drive()?;
            fit_height(&series, omega1, k)
        }
    };
    let fit = match result {
        Ok(fit) => fit,
        Err(FitError::NoConvergence { iterations, best }) => bail!(
            "no convergence after {iterations} iterations; best parameters {:?}",
            best.parameters()
        ),
        Err(e) => return Err(e).with_context(|| format!("fit of {} failed", path.display())),
    };
    let report = fit_report(&fit, &opts, series.power_range().1)?;
    write_json(opts.output.as_deref(), &report)
}

fn edge_json(e: &Edge) -> Value {
    json!({
        "field": e.field,
        "lower": e.lower,
        "upper": e.upper,
        "amplitude": e.amplitude,
        "amplitude_sq": e.amplitude_sq(),
        "amplitude_sq_exact": e.exact_sq.map(|r| format!("{}/{}", r.numer(), r.denom())),
    })
}

fn zeeman_report(d: &Decomposition) -> Value {
    let components: Vec<Value> = d
        .components
        .iter()
        .map(|c| {
            json!({
                "class": c.class,
                "states": c.states,
                "edges": c.edges.iter().map(|&i| edge_json(&d.graph.edges[i])).collect::<Vec<_>>(),
            })
        })
        .collect();
    let uncoupled: Vec<Value> = d.uncoupled_edges().map(edge_json).collect();
    json!({
        "n_components": d.n_components().count(),
        "components": components,
        "uncoupled": uncoupled,
        "dark_states": d.dark_states,
    })
}

pub fn zeeman(opts: ZeemanOptions) -> Result<()> {
    let scheme = opts.scheme.unwrap_or_default();
    let polarization = match scheme {
        Scheme::Orthogonal => PolarizationScheme::orthogonal(),
        Scheme::Parallel => PolarizationScheme::parallel(),
    };
    let basis = match (opts.basis.unwrap_or_default(), scheme) {
        (Basis::Auto, Scheme::Orthogonal) => Basis::NReduction,
        (Basis::Auto, Scheme::Parallel) => Basis::Angular,
        (b, _) => b,
    };
    let graph = build_coupling_graph(&polarization)?;
    let graph = match basis {
        Basis::Angular | Basis::Auto => graph,
        Basis::Parity => transform_basis(&graph, &BasisChange::parity())?,
        Basis::NReduction => transform_basis(&graph, &BasisChange::n_reduction())?,
    };
    let d = decompose(&graph);
    let mut report = zeeman_report(&d);
    report["scheme"] = json!(scheme.to_possible_value_name());
    report["basis"] = json!(basis.to_possible_value_name());
    match (opts.omega1, opts.omega2) {
        (Some(o1), Some(o2)) => {
            let base = DriveConfig::new(
                o1,
                o2,
                opts.delta1.unwrap_or(0.0),
                opts.delta2.unwrap_or(0.0),
            )?;
            report["subsystems"] = json!(effective_n_parameters(&d, &base)?);
        }
        (None, None) => {}
        _ => {
            return Err(usage(
                ZeemanOptions::COMMAND,
                "--omega1 and --omega2 must be given together",
            ))
        }
    }
    write_json(opts.output.as_deref(), &report)
}

trait ValueName {
    fn to_possible_value_name(&self) -> String;
}

impl<T: clap::ValueEnum> ValueName for T {
    fn to_possible_value_name(&self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

pub fn obe(opts: ObeOptions) -> Result<()> {
    let cfg = drive(opts.drive()?)?;
    let defaults = DecayConfig::default();
    let decay = DecayConfig {
        gamma_d: opts.gamma_d.unwrap_or(defaults.gamma_d),
        gamma_c: opts.gamma_c.unwrap_or(defaults.gamma_c),
        branching_d: pair(
            ObeOptions::COMMAND,
            "branching-d",
            opts.branching_d.clone(),
            defaults.branching_d,
        )?,
        branching_c: pair(
            ObeOptions::COMMAND,
            "branching-c",
            opts.branching_c.clone(),
            defaults.branching_c,
        )?,
        ground_dephasing: opts.ground_dephasing.unwrap_or(defaults.ground_dephasing),
    };
    decay.validate()?;
    let omega_p = opts
        .omega_p
        .unwrap_or_else(|| ProbeConfig::default_omega_p(&decay));
    let probe = ProbeConfig::new(omega_p, 0.0)?;
    if let Some(warning) = probe.weak_probe_warning(&cfg, &decay) {
        eprintln!("warning: {warning}");
    }
    let grid = grid(opts.start, opts.stop, opts.step, [-80.0, 80.0, 0.25])?;
    let values = probe_absorption_spectrum(&cfg, &decay, omega_p, &grid)?;
    spectrum_output(
        opts.output.as_deref(),
        opts.format.unwrap_or_default(),
        &grid,
        &values,
    )
}
