use std::io::Write;

use dde_lambert::{
    compute_spectrum, integrate, truncation_error_curve, uniform_grid, ResponseSeries, Spectrum,
    Trajectory,
};
use rayon::prelude::*;

use crate::config::Model;
use crate::CliError;

/// Closed time window for error summaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn parse(text: &str) -> Result<Window, String> {
        let (a, b) = text.split_once(',').ok_or("expected two comma-separated numbers")?;
        let lo: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
        let hi: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
        if !(lo <= hi) {
            return Err(format!("empty window [{lo}, {hi}]"));
        }
        Ok(Window { lo, hi })
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn spectrum(model: &Model, depth: usize) -> Result<Spectrum<f64>, CliError> {
    let spec = compute_spectrum(&model.system, Some(&model.preshape), depth, &model.options)?;
    for w in spec.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(spec)
}

fn grid(model: &Model) -> Vec<f64> {
    uniform_grid(model.config.grid.t_end, model.config.grid.points)
}

fn oracle_on(model: &Model, times: &[f64]) -> Result<Trajectory<f64>, CliError> {
    let t_end = times.last().copied().unwrap_or(0.0);
    let dense = integrate(
        &model.system,
        &model.preshape,
        &model.input,
        t_end,
        model.config.oracle.steps_per_delay,
    )?;
    Ok(dense.sample(times)?)
}

pub fn roots(model: &Model, depth: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = spectrum(model, depth)?;
    for c in spec.branch_counts() {
        eprintln!("branch {}: {} root(s)", c.k, c.found);
    }
    writeln!(out, "n,k,seed_j,Re_S,Im_S,Re_C,Im_C,Re_CI,Im_CI,residual")?;
    for r in spec.roots() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.seed_j,
            num(r.s.re),
            num(r.s.im),
            num(r.c.re),
            num(r.c.im),
            num(r.ci.re),
            num(r.ci.im),
            num(r.residual)
        )?;
    }
    Ok(())
}

pub fn stability(model: &Model, depth: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = spectrum(model, depth)?;
    let verdict = spec.stability(model.config.solver.stability_tol)?;
    let s0 = spec.rightmost().expect("stability succeeded on a non-empty spectrum").s;
    writeln!(out, "{verdict} Re(S0)={} S0={}{:+.16e}i", num(s0.re), num(s0.re), s0.im)?;
    Ok(())
}

pub fn response(model: &Model, depth: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = spectrum(model, depth)?;
    let series = ResponseSeries::new(&spec, &model.preshape, &model.input)?;
    let times = grid(model);
    let rows: Vec<(f64, f64, f64)> = times.par_iter().map(|&t| series.components(t)).collect();
    let residue = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if residue > 1e-10 {
        eprintln!("warning: imaginary residue {residue:e} in the unpaired series");
    }
    writeln!(out, "t,x_initial,x_forced,x_total")?;
    for (&t, &(init, forced, _)) in times.iter().zip(&rows) {
        writeln!(out, "{},{},{},{}", num(t), num(init), num(forced), num(init + forced))?;
    }
    Ok(())
}

/// Writes the comparison table and returns the sup error over `window`.
pub fn compare(
    model: &Model,
    depth: usize,
    window: Window,
    out: &mut dyn Write,
) -> Result<f64, CliError> {
    let spec = spectrum(model, depth)?;
    let times = grid(model);
    let series = ResponseSeries::new(&spec, &model.preshape, &model.input)?.total_response(&times)?;
    let oracle = oracle_on(model, &times)?;
    writeln!(out, "t,x_spectral,x_oracle,abs_err")?;
    let mut sup = 0.0f64;
    for ((&t, &xs), &xo) in times.iter().zip(&series.values).zip(&oracle.values) {
        let err = (xs - xo).abs();
        if window.contains(t) {
            sup = sup.max(err);
        }
        writeln!(out, "{},{},{},{}", num(t), num(xs), num(xo), num(err))?;
    }
    writeln!(out, "# sup_error[{},{}]={}", window.lo, window.hi, num(sup))?;
    Ok(sup)
}

pub fn error_curve(
    model: &Model,
    depths: &[usize],
    window: Window,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let times: Vec<f64> = grid(model).into_iter().filter(|&t| window.contains(t)).collect();
    if times.is_empty() {
        return Err(CliError::Config("window contains no grid points".into()));
    }
    let oracle = oracle_on(model, &times)?;
    let curve = truncation_error_curve(
        &model.system,
        &model.preshape,
        &model.input,
        depths,
        &oracle,
        &model.options,
    )?;
    writeln!(out, "K,sup_error")?;
    for (k, e) in curve {
        writeln!(out, "{k},{}", num(e))?;
    }
    Ok(())
}
