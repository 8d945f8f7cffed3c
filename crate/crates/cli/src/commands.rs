use std::collections::BTreeMap;

use anyhow::{bail, Context};
use serde::Serialize;
use tpqrm::analysis::{distance_window, fit_powerlaw, fit_quadratic_gap, make_grid};
use tpqrm::collapse1d::{bound_states, collapse_hamiltonian_check, inverse_square_ratio};
use tpqrm::ed::{wigner_grid, Conditioning, GridSpec};
use tpqrm::model::critical_params;
use tpqrm::quench::{kz_predict, kz_sweep, QuenchProtocol, StepPolicy};
use tpqrm::scan::{gap_opening, gap_scan, observables_scan, qfi_scan, spectrum_scan, GapOpeningOptions};
use tpqrm::{Collapse1DProblem, EdOptions, FitResult, ModelParams};

use crate::config::{CommandName, ConditioningName, FitMode, RunConfig};
use crate::output::{artifact, read_columns, write_json, Cell, Table};

/// Points that did not meet their convergence criteria; artifacts are still written.
#[derive(Default)]
pub struct Outcome {
    pub unconverged: usize,
}

type Fits = BTreeMap<&'static str, FitResult>;

fn ed_options(c: &RunConfig) -> EdOptions {
    EdOptions::default()
        .levels(c.numerics.levels)
        .start(c.numerics.n_max)
        .ceiling(c.numerics.n_ceiling)
        .tol(c.numerics.tol)
}

fn grid(c: &RunConfig) -> tpqrm::Result<tpqrm::SampleGrid> {
    make_grid(c.grid.x_min, c.grid.x_max, c.grid.points, c.params.r)
}

fn x_window(c: &RunConfig) -> anyhow::Result<Option<(f64, f64)>> {
    let (g_c, _) = critical_params(c.params.r)?;
    Ok(c.fit.window.map(|[a, b]| distance_window((a, b), g_c)))
}

fn write_fits(c: &RunConfig, fits: &Fits) -> anyhow::Result<()> {
    let path = artifact(c.output(), ".fit.json");
    write_json(&path, fits)?;
    for (name, f) in fits {
        eprintln!("fit {name}: exponent {:.6} amplitude {:.6e} r² {:.6} ({} points)", f.exponent, f.amplitude, f.r_squared, f.n_points);
    }
    Ok(())
}

pub fn run(c: &RunConfig) -> anyhow::Result<Outcome> {
    let out = match c.command() {
        CommandName::Spectrum => spectrum(c),
        CommandName::GapScan => gaps(c),
        CommandName::Observables => observables(c),
        CommandName::Qfi => qfi(c),
        CommandName::Wigner => wigner(c),
        CommandName::Quench => quench(c),
        CommandName::Collapse1d => collapse(c),
        CommandName::Fit => fit(c),
        CommandName::GapOpening => opening(c),
    }?;
    write_json(&artifact(c.output(), ".manifest.json"), c)?;
    Ok(out)
}

fn spectrum(c: &RunConfig) -> anyhow::Result<Outcome> {
    let rows = spectrum_scan(c.delta(), c.params.r, c.params.q, &grid(c)?, &ed_options(c))?;
    let mut t = Table::new(&["g_over_gc", "x", "level_index", "parity", "energy", "converged", "aa_energy"]);
    let mut bad = 0;
    for r in &rows {
        bad += usize::from(!r.converged);
        t.push(vec![r.g_over_gc.into(), r.x.into(), r.level_index.into(), r.parity.into(), r.energy.into(), r.converged.into(), r.aa_energy.into()]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    Ok(Outcome { unconverged: bad })
}

fn gaps(c: &RunConfig) -> anyhow::Result<Outcome> {
    let g = grid(c)?;
    let rows = gap_scan(c.delta(), c.params.r, &g, &ed_options(c))?;
    let mut t = Table::new(&["g_over_gc", "x", "beta", "eps_sp", "eps_dp", "converged", "n_max", "aa_eps_sp", "aa_eps_dp"]);
    for r in &rows {
        t.push(vec![
            r.g_over_gc.into(),
            r.x.into(),
            r.beta.into(),
            r.eps_sp.into(),
            r.eps_dp.into(),
            r.converged.into(),
            r.n_max.into(),
            r.aa_eps_sp.into(),
            r.aa_eps_dp.into(),
        ]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    if c.fit.enabled {
        let s = g.distances();
        let w = x_window(c)?;
        let mut fits = Fits::new();
        fits.insert("eps_sp", fit_powerlaw(&s, &rows.iter().map(|r| r.eps_sp).collect::<Vec<_>>(), w)?);
        fits.insert("eps_dp", fit_powerlaw(&s, &rows.iter().map(|r| r.eps_dp).collect::<Vec<_>>(), w)?);
        write_fits(c, &fits)?;
    }
    Ok(Outcome { unconverged: rows.iter().filter(|r| !r.converged).count() })
}

fn observables(c: &RunConfig) -> anyhow::Result<Outcome> {
    let g = grid(c)?;
    let rows = observables_scan(c.delta(), c.params.r, &g, &ed_options(c))?;
    let mut t = Table::new(&["g_over_gc", "x", "beta", "photon", "sigma_x", "dx", "dp", "aa_photon", "aa_sigma_x", "aa_dx"]);
    for r in &rows {
        t.push(vec![
            r.g_over_gc.into(),
            r.x.into(),
            r.beta.into(),
            r.photon.into(),
            r.sigma_x.into(),
            r.dx.into(),
            r.dp.into(),
            r.aa_photon.into(),
            r.aa_sigma_x.into(),
            r.aa_dx.into(),
        ]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    if c.fit.enabled {
        let s = g.distances();
        let w = x_window(c)?;
        let col = |f: fn(&tpqrm::scan::ObservableRow<f64>) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let mut fits = Fits::new();
        fits.insert("photon", fit_powerlaw(&s, &col(|r| r.photon), w)?);
        fits.insert("sigma_x", fit_powerlaw(&s, &col(|r| r.sigma_x), w)?);
        fits.insert("dx", fit_powerlaw(&s, &col(|r| r.dx), w)?);
        fits.insert("dp", fit_powerlaw(&s, &col(|r| r.dp), w)?);
        write_fits(c, &fits)?;
    }
    Ok(Outcome::default())
}

fn qfi(c: &RunConfig) -> anyhow::Result<Outcome> {
    let g = grid(c)?;
    let rows = qfi_scan(c.delta(), c.params.r, &g, &ed_options(c), c.numerics.k_states, c.numerics.fidelity_eps)?;
    let mut t = Table::new(&["g_over_gc", "x", "beta", "qfi", "qfi_fidelity", "k_used", "tail_relative", "aa_qfi"]);
    for r in &rows {
        t.push(vec![
            r.g_over_gc.into(),
            r.x.into(),
            r.beta.into(),
            r.qfi.into(),
            r.qfi_fidelity.into(),
            r.k_used.into(),
            r.tail_relative.into(),
            r.aa_qfi.into(),
        ]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    if c.fit.enabled {
        let mut fits = Fits::new();
        fits.insert("qfi", fit_powerlaw(&g.distances(), &rows.iter().map(|r| r.qfi).collect::<Vec<_>>(), x_window(c)?)?);
        write_fits(c, &fits)?;
    }
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct WignerSummary {
    g: f64,
    normalization: f64,
    boundary_max: f64,
    second_moment_x: f64,
    second_moment_p: f64,
}

fn wigner(c: &RunConfig) -> anyhow::Result<Outcome> {
    let p = c.single_point()?;
    let cond = match c.wigner.conditioning {
        ConditioningName::Reduced => Conditioning::Reduced,
        ConditioningName::QubitUp => Conditioning::QubitUp,
        ConditioningName::QubitDown => Conditioning::QubitDown,
    };
    let spec = c.wigner.half_width.map(|h| GridSpec::square(h, c.wigner.points));
    let w = wigner_grid(&p, &ed_options(c), spec, c.wigner.points, cond)?;
    let mut t = Table::new(&["x", "p", "w"]);
    for (x, pp, v) in w.triplets() {
        t.push(vec![x.into(), pp.into(), v.into()]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    let s = WignerSummary {
        g: p.g,
        normalization: w.normalization,
        boundary_max: w.boundary_max,
        second_moment_x: w.second_moment_x(),
        second_moment_p: w.second_moment_p(),
    };
    write_json(&artifact(c.output(), ".summary.json"), &s)?;
    Ok(Outcome::default())
}

fn quench(c: &RunConfig) -> anyhow::Result<Outcome> {
    let params = ModelParams::with_ratio(c.delta(), c.quench.g_f_over_gc, c.params.r)?;
    let mut proto = QuenchProtocol::new(params, c.quench.tau_min)?;
    proto.n_max = c.numerics.n_max;
    proto.n_ceiling = c.numerics.n_ceiling;
    proto.step = StepPolicy { dt: c.numerics.dt, rel_tol: c.numerics.rel_tol, max_halvings: c.numerics.max_halvings };
    let sweep = kz_sweep(&proto, &c.taus());
    let mut t = Table::new(&[
        "tau_q",
        "residual_energy",
        "e_r_kz",
        "e_r_adiabatic",
        "g_k_over_gc",
        "n_max",
        "dt",
        "norm_drift",
        "dt_change",
        "n_change",
        "converged",
        "error",
    ]);
    for pt in &sweep.points {
        let kz = kz_predict(pt.tau_q, &params).ok();
        let mut row: Vec<Cell> = vec![pt.tau_q.into()];
        match &pt.result {
            Some(r) => row.extend([r.residual_energy.into(), kz.map(|k| k.e_r_kz).into(), kz.map(|k| k.e_r_adiabatic).into()]),
            None => row.extend([Cell::None, kz.map(|k| k.e_r_kz).into(), kz.map(|k| k.e_r_adiabatic).into()]),
        }
        row.push(kz.map(|k| k.g_k_over_gc).into());
        match &pt.result {
            Some(r) => row.extend([
                r.n_max.into(),
                r.dt.into(),
                r.norm_drift.into(),
                r.dt_change.into(),
                r.n_change.into(),
                true.into(),
                Cell::None,
            ]),
            None => {
                row.extend([Cell::None, Cell::None, Cell::None, Cell::None, Cell::None, false.into()]);
                row.push(pt.error.as_deref().unwrap_or("").into());
            }
        }
        t.push(row);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    for pt in sweep.points.iter().filter(|p| p.result.is_none()) {
        eprintln!("tau_q = {}: excluded ({})", pt.tau_q, pt.error.as_deref().unwrap_or("unknown"));
    }
    if c.fit.enabled {
        let (taus, er) = sweep.converged();
        let w = c.fit.window.map(|[a, b]| (a, b));
        let mut fits = Fits::new();
        fits.insert("residual_energy", fit_powerlaw(&taus, &er, w)?);
        write_fits(c, &fits)?;
    }
    Ok(Outcome { unconverged: sweep.excluded() })
}

#[derive(Serialize)]
struct CollapseSummary {
    delta: f64,
    ratio_plateau: Option<f64>,
    plateau_variation: Option<f64>,
    even_ratios: Vec<f64>,
    odd_ratios: Vec<f64>,
    inverse_square_ratio: Option<f64>,
    partial: bool,
    supercritical_tail: bool,
    fock_check: Option<tpqrm::collapse1d::CollapseCheck<f64>>,
}

fn collapse(c: &RunConfig) -> anyhow::Result<Outcome> {
    let mut t = Table::new(&["delta", "level", "parity", "kappa4", "energy", "ratio", "converged"]);
    let mut summaries = Vec::new();
    let mut bad = 0;
    for &delta in &c.collapse.deltas {
        let problem = Collapse1DProblem { delta, l: c.collapse.l, h: c.collapse.h };
        let ladder = bound_states(&problem, c.collapse.levels)?;
        for (i, &k4) in ladder.binding_energies.iter().enumerate() {
            let parity = match ladder.parities[i] {
                tpqrm::collapse1d::SpatialParity::Even => "even",
                tpqrm::collapse1d::SpatialParity::Odd => "odd",
            };
            let ratio = if i == 0 { None } else { Some(ladder.ratios[i - 1]) };
            bad += usize::from(!ladder.converged[i]);
            t.push(vec![delta.into(), i.into(), parity.into(), k4.into(), (-0.5 - k4.sqrt()).into(), ratio.into(), ladder.converged[i].into()]);
        }
        let fock_check = match c.collapse.fock_check_n_max {
            Some(n) => Some(collapse_hamiltonian_check(delta, n)?),
            None => None,
        };
        summaries.push(CollapseSummary {
            delta,
            ratio_plateau: ladder.ratio_plateau,
            plateau_variation: ladder.plateau_variation,
            even_ratios: ladder.even.ratios.clone(),
            odd_ratios: ladder.odd.ratios.clone(),
            inverse_square_ratio: inverse_square_ratio(delta),
            partial: ladder.partial,
            supercritical_tail: ladder.supercritical_tail,
            fock_check,
        });
    }
    t.write(&artifact(c.output(), ".csv"))?;
    write_json(&artifact(c.output(), ".summary.json"), &summaries)?;
    Ok(Outcome { unconverged: bad })
}

fn fit(c: &RunConfig) -> anyhow::Result<Outcome> {
    let input = c.fit.input.as_deref().context("fit needs --input")?;
    if c.fit.x_column.is_empty() || c.fit.y_column.is_empty() {
        bail!("empty column name");
    }
    let (mut xs, ys) = read_columns(input, &c.fit.x_column, &c.fit.y_column)?;
    let w = c.fit.window.map(|[a, b]| (a, b));
    let f = match c.fit.mode {
        FitMode::Powerlaw => {
            let mut w = w;
            if c.fit.x_column == "x" {
                // the x column is -log10(1 - g/g_c); fit against |g - g_c|
                let (g_c, _) = critical_params(c.params.r)?;
                xs = xs.iter().map(|&x| g_c * 10f64.powf(-x)).collect();
                w = w.map(|win| distance_window(win, g_c));
            }
            fit_powerlaw(&xs, &ys, w)?
        }
        FitMode::Quadratic => fit_quadratic_gap(&xs, &ys, w)?,
    };
    let mut fits = Fits::new();
    fits.insert("fit", f);
    write_fits(c, &fits)?;
    Ok(Outcome::default())
}

fn opening(c: &RunConfig) -> anyhow::Result<Outcome> {
    let g = &c.gap_opening;
    let opts = GapOpeningOptions { n_start: g.n_start, n_ceiling: g.n_ceiling, tol: g.tol };
    let rows = gap_opening(c.params.r, &c.gap_deltas(), &opts)?;
    let mut t = Table::new(&["delta", "delta_detuning", "eps_dp", "eps_dp_truncated", "parity", "n_max", "converged"]);
    for r in &rows {
        t.push(vec![
            r.delta.into(),
            r.delta_detuning.into(),
            r.eps_dp.into(),
            r.eps_dp_truncated.into(),
            r.parity.into(),
            r.n_max.into(),
            r.converged.into(),
        ]);
    }
    t.write(&artifact(c.output(), ".csv"))?;
    if c.fit.enabled {
        let d: Vec<f64> = rows.iter().map(|r| r.delta_detuning).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.eps_dp).collect();
        let mut fits = Fits::new();
        fits.insert("eps_dp", fit_quadratic_gap(&d, &e, c.fit.window.map(|[a, b]| (a, b)))?);
        write_fits(c, &fits)?;
    }
    Ok(Outcome { unconverged: rows.iter().filter(|r| !r.converged).count() })
}
