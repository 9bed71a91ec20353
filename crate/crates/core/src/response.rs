//! Truncated spectral series for the time response.
//!
//! ```text
//! x(t) = Σ_n (C_n x0 + CI_n) e^{S_n t} + Σ_n C_n ∫_0^t e^{S_n (t-τ)} b u(τ) dτ
//! Ψ(t) = Σ_n C_n e^{S_n t}
//! ```
//!
//! Conjugate pairs are summed as `2 Re(·)` over the upper root plus `Re(·)` over
//! real roots, so every value is exactly real. A plain complex sum over all
//! roots is carried alongside and its imaginary part is reported as a
//! consistency check.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expfn::phi_all;
use crate::model::{InputSignal, Preshape};
use crate::quadrature;
use crate::scalar::{cexp, Scalar};
use crate::spectrum::{Root, SolverOptions, Spectrum};

/// Sampled values on an ascending time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub meta: TrajectoryMeta<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryMeta<T> {
    /// Branch depth of the series, `None` for integrator output.
    pub depth: Option<usize>,
    /// Largest `|Im|` of the unpaired complex sum over the grid.
    pub max_imag_residue: T,
    pub warnings: Vec<String>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |self - other|` over grid points with `lo <= t <= hi`.
    pub fn sup_distance(&self, other: &Trajectory<T>, lo: T, hi: T) -> Result<T> {
        if self.times != other.times {
            return Err(Error::InvalidArgument("trajectories are on different grids".into()));
        }
        Ok(self
            .times
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(&t, _)| t >= lo && t <= hi)
            .map(|(_, (&x, &y))| (x - y).abs())
            .fold(T::zero(), T::max))
    }
}

/// Paired and unpaired accumulation of `Σ_n f(root_n)`.
struct PairedSum<T> {
    paired: T,
    naive: Complex<T>,
}

fn paired_sum<T: Scalar, F>(roots: &[Root<T>], mut term: F) -> PairedSum<T>
where
    F: FnMut(&Root<T>) -> Complex<T>,
{
    let two = T::lit(2.0);
    let mut paired = T::zero();
    let mut naive = Complex::new(T::zero(), T::zero());
    for r in roots {
        let v = term(r);
        naive = naive + v;
        if r.s.im > T::zero() {
            paired = paired + two * v.re;
        } else if r.s.im == T::zero() {
            paired = paired + v.re;
        }
    }
    PairedSum { paired, naive }
}

/// `Ψ(t) = Re Σ C_n e^{S_n t}`.
pub fn psi<T: Scalar>(spec: &Spectrum<T>, t: T) -> T {
    paired_sum(spec.roots(), |r| r.c * cexp(r.s * t)).paired
}

/// `∫_0^t e^{S(t-τ)} e^{λτ} dτ = e^{λt} t φ_1((S-λ)t)`, valid at `S = λ` too.
fn conv_exp<T: Scalar>(s: Complex<T>, lambda: Complex<T>, t: T) -> Complex<T> {
    if t <= T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    cexp(lambda * t) * phi_all((s - lambda) * t, 1)[1] * t
}

/// `∫_0^t e^{S(t-τ)} u(τ) dτ`.
fn convolution<T: Scalar>(u: &InputSignal<T>, s: Complex<T>, t: T, h: T) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    if t <= T::zero() {
        return zero;
    }
    match u {
        InputSignal::Zero => zero,
        InputSignal::Constant(c) => conv_exp(s, zero, t) * *c,
        InputSignal::Step { amplitude, onset } => {
            if t <= *onset {
                zero
            } else {
                conv_exp(s, zero, t - *onset) * *amplitude
            }
        }
        InputSignal::Exponential { amplitude, rate } => {
            conv_exp(s, Complex::new(*rate, T::zero()), t) * *amplitude
        }
        InputSignal::Cosine { amplitude, omega, phase } => {
            let iw = Complex::new(T::zero(), *omega);
            let e = Complex::new(T::zero(), *phase).exp();
            (e * conv_exp(s, iw, t) + e.conj() * conv_exp(s, -iw, t)) * (*amplitude * T::lit(0.5))
        }
        InputSignal::Polynomial(coeffs) => {
            if coeffs.is_empty() {
                return zero;
            }
            // ∫_0^t e^{S(t-τ)} τ^m dτ = m! t^{m+1} φ_{m+1}(St)
            let phis = phi_all(s * t, coeffs.len());
            let mut fact_pow = t;
            let mut acc = zero;
            for (m, &c) in coeffs.iter().enumerate() {
                acc = acc + phis[m + 1] * (c * fact_pow);
                fact_pow = fact_pow * T::of(m as i64 + 1) * t;
            }
            acc
        }
        InputSignal::Sampled { times, .. } => {
            let lo = times[0].max(T::zero());
            let hi = times[times.len() - 1].min(t);
            if hi <= lo {
                return zero;
            }
            quadrature::integrate(lo, hi, h * T::lit(0.25), times, |tau| {
                cexp(s * (t - tau)) * u.eval(tau)
            })
        }
        InputSignal::Sum(parts) => parts
            .iter()
            .fold(zero, |acc, p| acc + convolution(p, s, t, h)),
    }
}

/// Spectral series for one history, initial value and input.
#[derive(Clone, Debug)]
pub struct ResponseSeries<T> {
    spectrum: Spectrum<T>,
    x0: T,
    input: InputSignal<T>,
}

impl<T: Scalar> ResponseSeries<T> {
    /// Binds a spectrum to a history and input; the history coefficients of the
    /// spectrum are recomputed for `preshape`.
    pub fn new(spectrum: &Spectrum<T>, preshape: &Preshape<T>, input: &InputSignal<T>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        input.validate()?;
        Ok(ResponseSeries {
            spectrum: spectrum.with_preshape(preshape)?,
            x0: preshape.x0(),
            input: input.clone(),
        })
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn psi(&self, t: T) -> T {
        psi(&self.spectrum, t)
    }

    fn initial_sum(&self, t: T) -> PairedSum<T> {
        paired_sum(self.spectrum.roots(), |r| (r.c * self.x0 + r.ci) * cexp(r.s * t))
    }

    fn forced_sum(&self, t: T) -> PairedSum<T> {
        if self.input.is_zero() {
            return PairedSum {
                paired: T::zero(),
                naive: Complex::new(T::zero(), T::zero()),
            };
        }
        let b = self.spectrum.system().b();
        let h = self.spectrum.system().h();
        paired_sum(self.spectrum.roots(), |r| {
            r.c * convolution(&self.input, r.s, t, h) * b
        })
    }

    /// Response to `x0` and the history with zero input.
    pub fn initial_response(&self, t: T) -> T {
        self.initial_sum(t).paired
    }

    /// Response to the input from zero initial data.
    pub fn forced_response(&self, t: T) -> T {
        self.forced_sum(t).paired
    }

    /// `(initial, forced, |Im| of the unpaired sum)` at one time.
    pub fn components(&self, t: T) -> (T, T, T) {
        let i = self.initial_sum(t);
        let f = self.forced_sum(t);
        (i.paired, f.paired, (i.naive + f.naive).im.abs())
    }

    pub fn total(&self, t: T) -> T {
        let (i, f, _) = self.components(t);
        i + f
    }

    /// Total response on a grid; grid points are evaluated in parallel.
    pub fn total_response(&self, times: &[T]) -> Result<Trajectory<T>> {
        check_grid(times)?;
        let parts: Vec<(T, T, T)> = times.par_iter().map(|&t| self.components(t)).collect();
        Ok(Trajectory {
            times: times.to_vec(),
            values: parts.iter().map(|&(i, f, _)| i + f).collect(),
            meta: TrajectoryMeta {
                depth: Some(self.spectrum.depth()),
                max_imag_residue: parts.iter().map(|p| p.2).fold(T::zero(), T::max),
                warnings: self.spectrum.warnings().to_vec(),
            },
        })
    }
}

fn check_grid<T: Scalar>(times: &[T]) -> Result<()> {
    if times.iter().any(|&t| !(t >= T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidArgument("grid times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `points` equally spaced times on `[0, t_end]`.
pub fn uniform_grid<T: Scalar>(t_end: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => {
            let step = t_end / T::of(points as i64 - 1);
            (0..points).map(|i| step * T::of(i as i64)).collect()
        }
    }
}

/// Sup-norm distance to a reference trajectory for each truncation depth.
///
/// The deepest spectrum is computed once and truncated for the others.
pub fn truncation_error_curve<T: Scalar>(
    sys: &crate::model::DelaySystem<T>,
    pre: &Preshape<T>,
    input: &InputSignal<T>,
    depths: &[usize],
    reference: &Trajectory<T>,
    opts: &SolverOptions<T>,
) -> Result<Vec<(usize, T)>> {
    let Some(&deepest) = depths.iter().max() else {
        return Ok(Vec::new());
    };
    let full = crate::spectrum::compute_spectrum(sys, Some(pre), deepest, opts)?;
    depths
        .par_iter()
        .map(|&k| {
            let series = ResponseSeries::new(&full.truncate(k), pre, input)?;
            let traj = series.total_response(&reference.times)?;
            let err = traj
                .values
                .iter()
                .zip(&reference.values)
                .map(|(&x, &y)| (x - y).abs())
                .fold(T::zero(), T::max);
            Ok((k, err))
        })
        .collect()
}
