//! Complex Lambert W function on every integer branch.
//!
//! `W_k(z)` is the solution `w` of `w e^w = z` lying in the `k`-th region of the
//! standard partition of the w-plane. The region boundaries are the images of the
//! negative real z-axis, i.e. the curves `-y cot y + i y` for
//! `y ∈ (2mπ, (2m+1)π)` and their mirror images, together with the real half-line
//! `(-∞, -1]`. Values on a boundary belong to the branch that contains them when
//! `z` approaches the negative real axis from above (counter-clockwise closure),
//! which puts the real segment `(-∞, -1]` in `W_{-1}` and makes `W_0(x)` have a
//! positive imaginary part for real `x < -1/e`.
//!
//! Evaluation is Halley iteration on `w e^w - z` from a region-specific seed. The
//! converged value is checked against [`branch_of`]; if a seed lands on the wrong
//! sheet the next candidate seed is tried.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{finite, Scalar};

const MAX_ITER: usize = 50;

/// Integer index of a Lambert W branch; `Branch(0)` is the principal branch.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch(pub i64);

impl Branch {
    pub const PRINCIPAL: Branch = Branch(0);
    pub const LOWER: Branch = Branch(-1);

    pub fn index(self) -> i64 {
        self.0
    }
}

impl From<i64> for Branch {
    fn from(k: i64) -> Self {
        Branch(k)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The two real-valued branches on `[-1/e, 0)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RealBranch {
    /// `W_0`, values `>= -1`.
    Principal,
    /// `W_{-1}`, values `<= -1`.
    Lower,
}

fn inv_e<T: Scalar>() -> T {
    T::one() / T::E()
}

/// Evaluates `W_k(z)`.
///
/// Fails with [`Error::Domain`] for `z = 0` off the principal branch or for
/// non-finite input.
pub fn lambert_w<T: Scalar>(k: Branch, z: Complex<T>) -> Result<Complex<T>> {
    if !finite(z) {
        return Err(Error::Domain(format!("non-finite argument {z:?}")));
    }
    // -0.0 on the negative axis would otherwise select the lower side of the cut.
    let z = if z.im == T::zero() {
        Complex::new(z.re, T::zero())
    } else {
        z
    };
    let zero = Complex::new(T::zero(), T::zero());
    if z == zero {
        return if k.0 == 0 {
            Ok(zero)
        } else {
            Err(Error::Domain(format!("W_{k}(0) is unbounded")))
        };
    }

    if z.im == T::zero() {
        let x = z.re;
        if k.0 == 0 && x >= -inv_e::<T>() {
            return lambert_w_real(RealBranch::Principal, x).map(|w| Complex::new(w, T::zero()));
        }
        if k.0 == -1 && x >= -inv_e::<T>() && x < T::zero() {
            return lambert_w_real(RealBranch::Lower, x).map(|w| Complex::new(w, T::zero()));
        }
    }

    let mut last_err = None;
    for seed in seeds(k.0, z) {
        match halley(z, seed) {
            Ok(w) if in_branch(k.0, w) => return Ok(w),
            Ok(w) => {
                last_err = Some(Error::NonConvergence(format!(
                    "W_{k}({z:?}) seed converged to branch {} at {w:?}",
                    branch_of(w)
                )))
            }
            Err(e) => last_err = Some(e),
        }
    }
    // Last resort: Newton on the logarithmic form, which selects the sheet by
    // construction away from the real axis.
    if let Some(w) = log_form_newton(k.0, z) {
        if let Ok(w) = halley(z, w) {
            if in_branch(k.0, w) {
                return Ok(w);
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NonConvergence(format!("W_{k}({z:?})"))))
}

/// Real-valued Lambert W on `[-1/e, ∞)` (principal) or `[-1/e, 0)` (lower).
pub fn lambert_w_real<T: Scalar>(branch: RealBranch, x: T) -> Result<T> {
    let ie = inv_e::<T>();
    let one = T::one();
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {x}")));
    }
    // Within a few ulps of the branch point the answer is -1 to working precision.
    let near_bp = (x + ie).abs() <= T::lit(4.0) * T::epsilon() * ie;
    match branch {
        RealBranch::Principal => {
            if x < -ie && !near_bp {
                return Err(Error::Domain(format!("W_0({x}) is not real below -1/e")));
            }
            if near_bp {
                return Ok(-one);
            }
            if x == T::zero() {
                return Ok(T::zero());
            }
        }
        RealBranch::Lower => {
            if (x < -ie && !near_bp) || x >= T::zero() {
                return Err(Error::Domain(format!("W_-1({x}) is real only on [-1/e, 0)")));
            }
            if near_bp {
                return Ok(-one);
            }
        }
    }

    let p2 = T::lit(2.0) * (T::E() * x + one);
    let mut w = if p2 < T::lit(0.6) {
        let p = p2.max(T::zero()).sqrt();
        let p = if branch == RealBranch::Principal { p } else { -p };
        branch_point_series(p)
    } else {
        match branch {
            RealBranch::Principal => {
                if x < T::lit(3.0) {
                    let l = x.ln_1p();
                    l * (one - (one + l).ln() / (T::lit(2.0) + l))
                } else {
                    let l1 = x.ln();
                    let l2 = l1.ln();
                    l1 - l2 + l2 / l1
                }
            }
            RealBranch::Lower => {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    };

    let tol = T::tol(1e-14);
    let two = T::lit(2.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == T::zero() {
            return Ok(w);
        }
        let wp1 = w + one;
        if wp1 == T::zero() {
            return Ok(w);
        }
        let dw = f / (ew * wp1 - (w + two) * f / (two * wp1));
        w = w - dw;
        if !w.is_finite() {
            break;
        }
        if dw.abs() <= tol * (one + w.abs()) {
            return Ok(w);
        }
    }
    if w.is_finite() && (w * w.exp() - x).abs() <= T::tol(1e-12) * one.max(x.abs()) {
        return Ok(w);
    }
    Err(Error::NonConvergence(format!("real W({x}) on {branch:?}")))
}

/// Derivative `W_k'(z) = W / (z (1 + W))`.
pub fn w_derivative<T: Scalar>(k: Branch, z: Complex<T>) -> Result<Complex<T>> {
    let ie = inv_e::<T>();
    if z.norm() == T::zero() {
        return Err(Error::Singular("W' at z = 0".into()));
    }
    if (z + ie).norm() <= T::lit(4.0) * T::epsilon() * ie {
        return Err(Error::Singular("W' at the branch point -1/e".into()));
    }
    let w = lambert_w(k, z)?;
    let denom = z * (w + T::one());
    if denom.norm() == T::zero() {
        return Err(Error::Singular(format!("W_{k}' at {z:?}")));
    }
    Ok(w / denom)
}

/// The branch whose range contains `w`.
///
/// Total over finite input; boundary points resolve by counter-clockwise closure.
pub fn branch_of<T: Scalar>(w: Complex<T>) -> Branch {
    let (x, y) = (w.re, w.im);
    let pi = T::PI();
    let two_pi = pi + pi;
    if y == T::zero() {
        return Branch(if x >= -T::one() { 0 } else { -1 });
    }
    let ya = y.abs();
    let m = (ya / two_pi).floor();
    let r = ya - m * two_pi;
    let m = m.to_i64().unwrap_or(i64::MAX / 2);
    // Inside a strip `[2mπ, (2m+1)π)` a boundary curve passes; above it, none does.
    let right_of_curve = if r < pi {
        if r == T::zero() {
            true
        } else {
            let b = -ya * ya.cos() / ya.sin();
            if y > T::zero() {
                x >= b
            } else {
                x > b
            }
        }
    } else {
        false
    };
    match (y > T::zero(), right_of_curve) {
        (true, true) => Branch(m),
        (true, false) => Branch(m + 1),
        (false, true) => Branch(-m),
        (false, false) => Branch(-(m + 1)),
    }
}

/// Membership test that tolerates rounding across a branch boundary.
fn in_branch<T: Scalar>(k: i64, w: Complex<T>) -> bool {
    if branch_of(w).0 == k {
        return true;
    }
    let d = T::tol(1e-9) * (T::one() + w.norm());
    let zero = T::zero();
    [
        Complex::new(d, zero),
        Complex::new(-d, zero),
        Complex::new(zero, d),
        Complex::new(zero, -d),
    ]
    .iter()
    .any(|&dw| branch_of(w + dw).0 == k)
}

// Coefficients of W around z = -1/e in p = ±sqrt(2(ez + 1)).
const BP_SERIES: [f64; 6] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
];

fn branch_point_series<T: Scalar>(p: T) -> T {
    BP_SERIES[..5]
        .iter()
        .rev()
        .fold(T::lit(BP_SERIES[5]), |acc, &c| acc * p + T::lit(c))
}

fn branch_point_series_c<T: Scalar>(p: Complex<T>) -> Complex<T> {
    BP_SERIES[..5]
        .iter()
        .rev()
        .fold(Complex::new(T::lit(BP_SERIES[5]), T::zero()), |acc, &c| {
            acc * p + T::lit(c)
        })
}

/// Candidate seeds in priority order.
fn seeds<T: Scalar>(k: i64, z: Complex<T>) -> Vec<Complex<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(4);
    let bp_dist = (z + inv_e::<T>()).norm();
    let upper = z.im >= T::zero();
    let touches_bp = k == 0 || (k == -1 && upper) || (k == 1 && !upper);
    if touches_bp && bp_dist < T::lit(0.3) {
        let p = ((z * T::E() + one) * two).sqrt();
        let p = if k == 0 { p } else { -p };
        out.push(branch_point_series_c(p));
    }
    if k == 0 {
        if z.norm() < T::lit(0.3) {
            out.push(z - z * z + z * z * z * T::lit(1.5));
        }
        let zp1 = z + one;
        if zp1.norm() > T::lit(0.5) && z.re > -T::lit(0.5) {
            // Winitzki's global approximation of the principal branch.
            let l = zp1.ln();
            out.push(l * (Complex::new(one, T::zero()) - (l + one).ln() / (l + two)));
        }
    }
    if let Some(w) = asymptotic_seed(k, z) {
        out.push(w);
    }
    if out.is_empty() {
        // Only reachable for k = 0 around z ≈ 1 when both forms above are skipped.
        out.push(Complex::new(T::lit(0.5), T::zero()));
    }
    out
}

fn asymptotic_seed<T: Scalar>(k: i64, z: Complex<T>) -> Option<Complex<T>> {
    let two_pi = T::PI() + T::PI();
    let l1 = z.ln() + Complex::new(T::zero(), two_pi * T::of(k));
    if l1.norm() < T::lit(1e-3) {
        return None;
    }
    let l2 = l1.ln();
    let w = l1 - l2 + l2 / l1;
    finite(w).then_some(w)
}

/// Newton on `w + ln w = ln z + 2πik`.
fn log_form_newton<T: Scalar>(k: i64, z: Complex<T>) -> Option<Complex<T>> {
    let two_pi = T::PI() + T::PI();
    let target = z.ln() + Complex::new(T::zero(), two_pi * T::of(k));
    let mut w = asymptotic_seed(k, z).unwrap_or(target);
    let one = T::one();
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - target;
        let dw = f / (w.inv() + one);
        w = w - dw;
        if !finite(w) {
            return None;
        }
        if dw.norm() <= T::tol(1e-14) * (one + w.norm()) {
            return Some(w);
        }
    }
    Some(w)
}

fn halley<T: Scalar>(z: Complex<T>, mut w: Complex<T>) -> Result<Complex<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    let tol = T::tol(1e-14);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        if f.norm() == T::zero() {
            return Ok(w);
        }
        let wp1 = w + one;
        if wp1.norm() == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + two) * f / (wp1 * two);
        let dw = f / denom;
        if !finite(dw) {
            break;
        }
        w = w - dw;
        if dw.norm() <= tol * (one + w.norm()) {
            return Ok(w);
        }
    }
    if finite(w) && (w * w.exp() - z).norm() <= T::tol(1e-12) * one.max(z.norm()) {
        return Ok(w);
    }
    Err(Error::NonConvergence(format!(
        "Halley iteration for W({z:?}) stalled at {w:?}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    type C = Complex<f64>;

    fn residual(w: C, z: C) -> f64 {
        (w * w.exp() - z).norm()
    }

    /// Omega constant by bisection on w e^w = 1, independent of the evaluator.
    fn omega_by_bisection() -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn principal_at_zero_and_e() {
        assert_eq!(lambert_w(Branch(0), C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
        let w = lambert_w(Branch(0), C::new(E, 0.0)).unwrap();
        assert!((w - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lower_branch_point() {
        let w = lambert_w(Branch(-1), C::new(-1.0 / E, 0.0)).unwrap();
        assert!((w + 1.0).norm() < 1e-7, "{w}");
    }

    #[test]
    fn omega_constant() {
        let w = lambert_w(Branch(0), C::new(1.0, 0.0)).unwrap();
        assert!((w.re - omega_by_bisection()).abs() < 1e-15);
        assert!((w.re - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn principal_of_minus_e_matches_single_delay_root() {
        let w = lambert_w(Branch(0), C::new(-E, 0.0)).unwrap();
        let s0 = w - 1.0;
        assert!((s0.re + 0.6050).abs() < 5e-5 && (s0.im - 1.7882).abs() < 5e-5, "{s0}");
        // Counter-clockwise closure: the cut value is the limit from above.
        let above = lambert_w(Branch(0), C::new(-E, 1e-14)).unwrap();
        assert!((above - w).norm() < 1e-12);
        let lower = lambert_w(Branch(-1), C::new(-E, 0.0)).unwrap();
        assert!((lower - w.conj()).norm() < 1e-14);
    }

    #[test]
    fn zero_off_principal_is_domain_error() {
        assert!(matches!(
            lambert_w(Branch(2), C::new(0.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn real_branches() {
        assert_eq!(lambert_w_real(RealBranch::Principal, 0.0).unwrap(), 0.0);
        assert_eq!(lambert_w_real(RealBranch::Lower, -1.0 / E).unwrap(), -1.0);
        // Independent bisection on [-1, 0] for x = -1/(2e).
        let x = -0.5 / E;
        let (mut lo, mut hi) = (-1.0_f64, 0.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = lambert_w_real(RealBranch::Principal, x).unwrap();
        assert!((w - 0.5 * (lo + hi)).abs() < 1e-14);
        assert!(w > -1.0 && w < 0.0);
        let wl = lambert_w_real(RealBranch::Lower, x).unwrap();
        assert!(wl < -1.0 && (wl * wl.exp() - x).abs() < 1e-16);
    }

    #[test]
    fn real_domain_errors() {
        assert!(lambert_w_real(RealBranch::Principal, -0.5).is_err());
        assert!(lambert_w_real(RealBranch::Lower, 0.1).is_err());
        assert!(lambert_w_real(RealBranch::Lower, 0.0).is_err());
        assert!(lambert_w_real(RealBranch::Lower, -0.4).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = w_derivative(Branch(0), C::new(E, 0.0)).unwrap();
        assert!((d - C::new(1.0 / (2.0 * E), 0.0)).norm() < 1e-15);
        let om = omega_by_bisection();
        let d = w_derivative(Branch(0), C::new(1.0, 0.0)).unwrap();
        assert!((d.re - om / (1.0 + om)).abs() < 1e-14);
        assert!((d.re - 0.3619).abs() < 1e-4);

        let z = C::new(-0.1, 0.0);
        let h = 1e-6;
        let fd = (lambert_w(Branch(-1), z + h).unwrap() - lambert_w(Branch(-1), z - h).unwrap())
            / (2.0 * h);
        let d = w_derivative(Branch(-1), z).unwrap();
        assert!((d - fd).norm() < 1e-6, "{d} vs {fd}");
    }

    #[test]
    fn derivative_singularities() {
        assert!(matches!(
            w_derivative(Branch(0), C::new(0.0, 0.0)),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            w_derivative(Branch(0), C::new(-1.0 / E, 0.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn branch_of_examples() {
        assert_eq!(branch_of(C::new(0.5, 0.0)), Branch(0));
        assert_eq!(branch_of(C::new(-2.0, 0.0)), Branch(-1));
        let w = C::new(1.0, 7.0);
        assert!(3.0 * PI > 7.0 && PI < 7.0);
        assert_eq!(branch_of(w), Branch(1));
        let back = lambert_w(Branch(1), w * w.exp()).unwrap();
        assert!((back - w).norm() < 1e-12);
    }

    #[test]
    fn branch_of_boundary_closure() {
        // Points on the upper boundary curve of W_0 belong to W_0; the mirror belongs to W_-1.
        let y = 2.0_f64;
        let x = -y / y.tan();
        assert_eq!(branch_of(C::new(x, y)), Branch(0));
        assert_eq!(branch_of(C::new(x, -y)), Branch(-1));
        assert_eq!(branch_of(C::new(x - 1e-9, y)), Branch(1));
    }

    #[test]
    fn residuals_on_a_grid() {
        for k in -6..=6 {
            for &r in &[1e-3, 0.1, 0.5, 1.0, 3.0, 20.0, 500.0] {
                for i in 0..16 {
                    let th = -PI + (i as f64 + 0.37) * (2.0 * PI / 16.0);
                    let z = C::from_polar(r, th);
                    let w = lambert_w(Branch(k), z).unwrap();
                    assert!(
                        residual(w, z) <= 1e-12 * r.max(1.0),
                        "k={k} z={z} w={w} res={}",
                        residual(w, z)
                    );
                    assert_eq!(branch_of(w), Branch(k), "k={k} z={z} w={w}");
                }
            }
        }
    }

    #[test]
    fn f32_evaluation() {
        let w = lambert_w(Branch(1), Complex::new(-2.0_f32, 0.5)).unwrap();
        let r = (w * w.exp() - Complex::new(-2.0_f32, 0.5)).norm();
        assert!(r < 1e-5, "{r}");
        let w = lambert_w_real(RealBranch::Principal, 1.0_f32).unwrap();
        assert!((w - 0.567_143_3).abs() < 1e-6);
    }
}
