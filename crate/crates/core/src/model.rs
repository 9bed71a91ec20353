//! Delay system, history and forcing descriptions.
//!
//! The equation is
//!
//! ```text
//! x'(t) = a x(t) + Σ_{j=1..N} a_jd x(t - j h) + b u(t),   t > 0
//! x(0)  = x0,   x(τ) = φ(τ) on [-N h, 0)
//! ```
//!
//! with characteristic function `Δ(s) = s - a - Σ a_jd e^{-j s h}`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::expfn::monomial_exp_integrals;
use crate::scalar::{cexp, Scalar};

/// Highest polynomial degree accepted in a history piece.
pub const MAX_PRESHAPE_DEGREE: usize = 10;

/// Scalar linear system with `N` commensurate delays `h, 2h, …, Nh`.
#[derive(Clone, Debug, PartialEq)]
pub struct DelaySystem<T> {
    a: T,
    delay_coeffs: Vec<T>,
    h: T,
    b: T,
}

impl<T: Scalar> DelaySystem<T> {
    /// Builds a system; trailing zero delay coefficients are dropped so that
    /// `order()` is the largest delay actually present.
    pub fn new(a: T, delay_coeffs: Vec<T>, h: T, b: T) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidSystem(format!("base delay must be positive, got {h}")));
        }
        if !a.is_finite() || !b.is_finite() || delay_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSystem("coefficients must be finite".into()));
        }
        let mut delay_coeffs = delay_coeffs;
        while delay_coeffs.last() == Some(&T::zero()) {
            delay_coeffs.pop();
        }
        if delay_coeffs.is_empty() {
            return Err(Error::InvalidSystem(
                "at least one delay coefficient must be nonzero".into(),
            ));
        }
        Ok(DelaySystem { a, delay_coeffs, h, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    /// `a_1d … a_Nd`.
    pub fn delay_coeffs(&self) -> &[T] {
        &self.delay_coeffs
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Number of delays `N`.
    pub fn order(&self) -> usize {
        self.delay_coeffs.len()
    }

    /// Length `N h` of the history interval.
    pub fn history_span(&self) -> T {
        self.h * T::of(self.order() as i64)
    }

    fn delayed_terms(&self, s: Complex<T>) -> impl Iterator<Item = (T, T, Complex<T>)> + '_ {
        self.delay_coeffs.iter().enumerate().map(move |(i, &c)| {
            let j = T::of(i as i64 + 1);
            (j, c, cexp(-s * (j * self.h)))
        })
    }

    /// `Δ(s)`.
    pub fn delta(&self, s: Complex<T>) -> Complex<T> {
        self.delayed_terms(s)
            .fold(s - self.a, |acc, (_, c, e)| acc - e * c)
    }

    /// `Δ'(s) = 1 + Σ j a_jd h e^{-j s h}`.
    pub fn delta_prime(&self, s: Complex<T>) -> Complex<T> {
        self.delayed_terms(s)
            .fold(Complex::new(T::one(), T::zero()), |acc, (j, c, e)| {
                acc + e * (j * c * self.h)
            })
    }
}

/// One polynomial piece of the history on `[from, to)`.
///
/// Coefficients are in ascending powers of the absolute time `τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece<T> {
    pub from: T,
    pub to: T,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Piece<T> {
    pub fn eval(&self, tau: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * tau + c)
    }

    /// Coefficients of the same polynomial in powers of `τ - x`.
    fn shifted(&self, x: T) -> Vec<T> {
        let mut q = self.coeffs.clone();
        let n = q.len();
        // Repeated synthetic division (Horner's Taylor shift).
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let next = q[k + 1];
                q[k] = q[k] + next * x;
            }
        }
        q
    }
}

/// History `φ` on `[-span, 0)` together with the initial value `x0`.
///
/// `x0` need not equal `φ(0⁻)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Preshape<T> {
    pieces: Vec<Piece<T>>,
    x0: T,
}

impl<T: Scalar> Preshape<T> {
    /// Pieces must be given left to right and tile `[from_0, 0)` without gaps.
    pub fn new(pieces: Vec<Piece<T>>, x0: T) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPreshape("no pieces".into()));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidPreshape("x0 must be finite".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.from < p.to) || !p.from.is_finite() || !p.to.is_finite() {
                return Err(Error::InvalidPreshape(format!(
                    "piece {i} has empty or invalid interval [{}, {})",
                    p.from, p.to
                )));
            }
            if p.coeffs.len() > MAX_PRESHAPE_DEGREE + 1 {
                return Err(Error::InvalidPreshape(format!(
                    "piece {i} has degree {} > {MAX_PRESHAPE_DEGREE}",
                    p.coeffs.len() - 1
                )));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPreshape(format!("piece {i} has non-finite coefficients")));
            }
            if i > 0 && pieces[i - 1].to != p.from {
                return Err(Error::InvalidPreshape(format!(
                    "pieces {} and {i} do not meet ({} vs {})",
                    i - 1,
                    pieces[i - 1].to,
                    p.from
                )));
            }
        }
        if pieces.last().map(|p| p.to) != Some(T::zero()) {
            return Err(Error::InvalidPreshape("last piece must end at 0".into()));
        }
        Ok(Preshape { pieces, x0 })
    }

    /// `φ ≡ value` on `[-span, 0)`.
    pub fn constant(value: T, span: T, x0: T) -> Result<Self> {
        Self::new(
            vec![Piece {
                from: -span,
                to: T::zero(),
                coeffs: vec![value],
            }],
            x0,
        )
    }

    /// Zero history with initial value `x0`; this is the setting of the
    /// fundamental solution when `x0 = 1`.
    pub fn zero(span: T, x0: T) -> Result<Self> {
        Self::constant(T::zero(), span, x0)
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    /// Length of the covered interval.
    pub fn span(&self) -> T {
        -self.pieces[0].from
    }

    /// Fails unless the history covers exactly `[-N h, 0)`.
    pub fn check_against(&self, sys: &DelaySystem<T>) -> Result<()> {
        let need = sys.history_span();
        if (self.span() - need).abs() > T::tol(1e-12) * need {
            return Err(Error::InvalidPreshape(format!(
                "history covers [{}, 0) but the system needs [{}, 0)",
                -self.span(),
                -need
            )));
        }
        Ok(())
    }

    /// Right-continuous value: `φ(τ)` for `τ < 0`, `x0` for `τ >= 0`, and 0
    /// before the start of the history.
    pub fn eval(&self, tau: T) -> T {
        if tau >= T::zero() {
            return self.x0;
        }
        self.pieces
            .iter()
            .find(|p| p.from <= tau && tau < p.to)
            .map_or(T::zero(), |p| p.eval(tau))
    }

    /// Left limit `φ(τ⁻)`; at `τ = 0` this is `φ(0⁻)`, not `x0`.
    pub fn eval_left(&self, tau: T) -> T {
        if tau > T::zero() {
            return self.x0;
        }
        self.pieces
            .iter()
            .find(|p| p.from < tau && tau <= p.to)
            .map_or(T::zero(), |p| p.eval(tau))
    }

    /// `Φ_j(s) = ∫_{-jh}^{0} φ(τ) e^{-sτ} dτ`.
    pub fn phi_laplace(&self, sys: &DelaySystem<T>, j: usize, s: Complex<T>) -> Result<Complex<T>> {
        if j == 0 || j > sys.order() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: sys.order(),
            });
        }
        let lower = -sys.h() * T::of(j as i64);
        if self.pieces[0].from > lower - lower * T::tol(1e-12) {
            return Err(Error::InvalidPreshape(format!(
                "history starts at {} but Φ_{j} needs {}",
                self.pieces[0].from, lower
            )));
        }
        let mut total = Complex::new(T::zero(), T::zero());
        for p in &self.pieces {
            if p.to <= lower || p.coeffs.is_empty() {
                continue;
            }
            let l = p.from.max(lower);
            let len = p.to - l;
            let q = p.shifted(l);
            let ints = monomial_exp_integrals(s, len, q.len() - 1);
            let sum = q
                .iter()
                .zip(&ints)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &i)| acc + i * c);
            // ∫_l^{l+L} = e^{-sl} ∫_0^L σ^m e^{-sσ} dσ
            total = total + cexp(-s * l) * sum;
        }
        Ok(total)
    }
}

/// Forcing function `u(t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSignal<T> {
    Zero,
    Constant(T),
    /// `amplitude` for `t >= onset`, else 0.
    Step { amplitude: T, onset: T },
    /// `amplitude cos(omega t + phase)`.
    Cosine { amplitude: T, omega: T, phase: T },
    /// `amplitude e^{rate t}`.
    Exponential { amplitude: T, rate: T },
    /// Ascending coefficients in `t`.
    Polynomial(Vec<T>),
    /// Piecewise-linear through the samples, zero outside `[times[0], times[last]]`.
    Sampled { times: Vec<T>, values: Vec<T> },
    /// Pointwise sum of the parts.
    Sum(Vec<InputSignal<T>>),
}

impl<T: Scalar> InputSignal<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match self {
            InputSignal::Zero => Ok(()),
            InputSignal::Constant(c) if c.is_finite() => Ok(()),
            InputSignal::Step { amplitude, onset } if finite(&[*amplitude, *onset]) => {
                if *onset < T::zero() {
                    Err(Error::InvalidInput(format!("step onset {onset} is negative")))
                } else {
                    Ok(())
                }
            }
            InputSignal::Cosine { amplitude, omega, phase } if finite(&[*amplitude, *omega, *phase]) => {
                Ok(())
            }
            InputSignal::Exponential { amplitude, rate } if finite(&[*amplitude, *rate]) => Ok(()),
            InputSignal::Polynomial(c) if finite(c) => Ok(()),
            InputSignal::Sampled { times, values } => {
                if times.len() != values.len() {
                    return Err(Error::InvalidInput("times and values differ in length".into()));
                }
                if times.len() < 2 {
                    return Err(Error::InvalidInput("need at least two samples".into()));
                }
                if !finite(times) || !finite(values) {
                    return Err(Error::InvalidInput("non-finite sample".into()));
                }
                if times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidInput("sample times must increase strictly".into()));
                }
                Ok(())
            }
            InputSignal::Sum(parts) => parts.iter().try_for_each(|p| p.validate()),
            _ => Err(Error::InvalidInput("non-finite parameter".into())),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InputSignal::Zero => true,
            InputSignal::Sum(parts) => parts.iter().all(|p| p.is_zero()),
            _ => false,
        }
    }

    /// `u(t)`.
    pub fn eval(&self, t: T) -> T {
        match self {
            InputSignal::Zero => T::zero(),
            InputSignal::Constant(c) => *c,
            InputSignal::Step { amplitude, onset } => {
                if t >= *onset {
                    *amplitude
                } else {
                    T::zero()
                }
            }
            InputSignal::Cosine { amplitude, omega, phase } => *amplitude * (*omega * t + *phase).cos(),
            InputSignal::Exponential { amplitude, rate } => *amplitude * (*rate * t).exp(),
            InputSignal::Polynomial(c) => c.iter().rev().fold(T::zero(), |acc, &ci| acc * t + ci),
            InputSignal::Sampled { times, values } => {
                let n = times.len();
                if n == 0 || t < times[0] || t > times[n - 1] {
                    return T::zero();
                }
                let i = times.partition_point(|&x| x <= t).clamp(1, n - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                values[i - 1] + (values[i] - values[i - 1]) * w
            }
            InputSignal::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
        }
    }

    /// Left limit `u(t⁻)`; differs from [`eval`](Self::eval) only at jumps.
    pub fn eval_left(&self, t: T) -> T {
        match self {
            InputSignal::Step { onset, .. } if t <= *onset => T::zero(),
            InputSignal::Sampled { times, .. } if times.first().map_or(true, |&t0| t <= t0) => T::zero(),
            InputSignal::Sum(parts) => parts.iter().map(|p| p.eval_left(t)).sum(),
            _ => self.eval(t),
        }
    }
}
