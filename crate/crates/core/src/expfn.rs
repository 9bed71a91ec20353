//! The entire functions `φ_p(x) = Σ_{i≥0} x^i / (i + p)!`.
//!
//! They give every exponential-times-monomial integral in closed form without
//! cancellation at small arguments:
//! `∫₀ᴸ σ^m e^{-sσ} dσ = e^{-sL} m! L^{m+1} φ_{m+1}(sL)`.

use num_complex::Complex;

use crate::scalar::{cexp, Scalar};

const MAX_SERIES_TERMS: usize = 400;

/// Returns `[φ_0(x), …, φ_pmax(x)]`.
pub(crate) fn phi_all<T: Scalar>(x: Complex<T>, pmax: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); pmax + 1];
    let r = x.norm();
    // Forward recursion divides by x at each step; it is safe once |x|^p outgrows p!.
    let mut growth = T::one();
    for p in 1..=pmax {
        growth = growth * T::of(p as i64) / r;
    }
    if r > T::zero() && growth <= T::one() {
        out[0] = cexp(x);
        let mut inv_fact = T::one();
        for p in 1..=pmax {
            out[p] = (out[p - 1] - inv_fact) / x;
            inv_fact = inv_fact / T::of(p as i64);
        }
        return out;
    }

    // Series for the top index, then the stable backward recursion.
    let mut term = Complex::new(T::one(), T::zero());
    for i in 1..=pmax {
        term = term / T::of(i as i64);
    }
    let mut sum = term;
    for i in 1..MAX_SERIES_TERMS {
        term = term * x / T::of((i + pmax) as i64);
        sum = sum + term;
        if term.norm() <= T::epsilon() * sum.norm() {
            break;
        }
    }
    out[pmax] = sum;
    let mut inv_facts = vec![T::one(); pmax + 1];
    for p in 1..=pmax {
        inv_facts[p] = inv_facts[p - 1] / T::of(p as i64);
    }
    for p in (1..=pmax).rev() {
        out[p - 1] = x * out[p] + inv_facts[p - 1];
    }
    out
}

/// `∫₀ᴸ σ^m e^{-sσ} dσ` for `m = 0..=mmax`.
pub(crate) fn monomial_exp_integrals<T: Scalar>(
    s: Complex<T>,
    len: T,
    mmax: usize,
) -> Vec<Complex<T>> {
    let phis = phi_all(s * len, mmax + 1);
    let decay = cexp(-s * len);
    let mut out = Vec::with_capacity(mmax + 1);
    let mut fact_pow = len; // m! L^{m+1}
    for m in 0..=mmax {
        out.push(decay * phis[m + 1] * fact_pow);
        fact_pow = fact_pow * T::of(m as i64 + 1) * len;
    }
    out
}
