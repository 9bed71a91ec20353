//! Characteristic roots, branch by branch.
//!
//! Every root of `Δ` satisfies
//!
//! ```text
//! (s - a) h = W_k(Q(s)),   Q(s) = Σ_j a_jd h e^{-j a h} e^{-(j-1)(s-a)h}
//! ```
//!
//! for exactly one branch `k`. For a single delay `Q` is constant and the roots
//! are explicit; otherwise each branch is solved by damped Newton iteration on
//! `g(s) = (s - a)h - W_k(Q(s))` from seeds built out of the single-delay
//! formula. Branches `k >= 1` only hold roots in the upper half plane, branch 0
//! holds the rightmost root and possibly real ones; lower-half roots are the
//! conjugates.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lambert_w::{lambert_w, Branch};
use crate::model::{DelaySystem, Preshape};
use crate::scalar::{cexp, finite, Scalar};

/// Tolerances and caps for the root search.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Newton stops once the full step is at most this long.
    pub newton_tol: T,
    /// Largest accepted `|Δ(S)|`.
    pub residual_tol: T,
    /// Roots closer than this are the same root.
    pub dedup_tol: T,
    pub max_iter: usize,
    /// Step halvings allowed per Newton iteration.
    pub max_halvings: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            newton_tol: T::tol(1e-10),
            residual_tol: T::tol(1e-9),
            dedup_tol: T::tol(1e-8),
            max_iter: 100,
            max_halvings: 20,
        }
    }
}

/// One characteristic root with its expansion coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Root<T> {
    /// Position in the renumbered spectrum; `0` is the rightmost root.
    pub n: i64,
    /// Lambert W branch containing `(S - a) h`.
    pub k: Branch,
    /// Seed family (`1..=N`) that found the root or its conjugate.
    pub seed_j: usize,
    pub s: Complex<T>,
    /// Residue `1 / Δ'(S)`.
    pub c: Complex<T>,
    /// History coefficient `C Σ a_jd e^{-jSh} Φ_j(S)`.
    pub ci: Complex<T>,
    /// `|Δ(S)|`.
    pub residual: T,
    /// Newton iterations spent; 0 for synthesized conjugates.
    pub iterations: usize,
    source_depth: usize,
}

impl<T: Scalar> Root<T> {
    pub fn is_real(&self) -> bool {
        self.s.im == T::zero()
    }

    /// Smallest truncation depth whose spectrum contains this root.
    pub fn source_depth(&self) -> usize {
        self.source_depth
    }
}

/// Roots found on one branch `k >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSolution<T> {
    pub k: usize,
    pub roots: Vec<Root<T>>,
}

/// Number of distinct roots found on a branch.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BranchCount {
    pub k: usize,
    pub found: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

/// `Q(s)` and `Q'(s)`.
fn q_and_derivative<T: Scalar>(sys: &DelaySystem<T>, s: Complex<T>) -> (Complex<T>, Complex<T>) {
    let (a, h) = (sys.a(), sys.h());
    let x = (s - a) * h;
    let zero = Complex::new(T::zero(), T::zero());
    sys.delay_coeffs()
        .iter()
        .enumerate()
        .fold((zero, zero), |(q, dq), (i, &c)| {
            let jm1 = T::of(i as i64);
            let term = cexp(-x * jm1 - a * h * (jm1 + T::one())) * (c * h);
            (q + term, dq - term * (jm1 * h))
        })
}

/// `(S - a) h - W_k(Q(S))`; zero exactly when `S` is a root on branch `k`.
pub fn branch_certificate<T: Scalar>(
    sys: &DelaySystem<T>,
    k: Branch,
    s: Complex<T>,
) -> Result<Complex<T>> {
    let (q, _) = q_and_derivative(sys, s);
    Ok((s - sys.a()) * sys.h() - lambert_w(k, q)?)
}

/// The Lambert W argument of the single-delay formula, falling back to the first
/// nonzero delay when `a_1d = 0`.
fn seed_argument<T: Scalar>(sys: &DelaySystem<T>) -> T {
    let (a, h) = (sys.a(), sys.h());
    sys.delay_coeffs()
        .iter()
        .enumerate()
        .find(|(_, &c)| c != T::zero())
        .map(|(i, &c)| c * h * (-T::of(i as i64 + 1) * a * h).exp())
        .unwrap_or_else(T::zero)
}

/// Imaginary offset (before division by `h`) of seed `j` on branch `k`.
fn seed_offset<T: Scalar>(n: usize, k: i64, j: usize) -> T {
    let pi = T::PI();
    let j = T::of(j as i64);
    match n {
        1 => T::zero(),
        2 => {
            let step = if k == 0 { pi } else { pi + pi };
            -(j - T::one()) * step
        }
        _ => {
            let step = if k == 0 {
                pi / T::of(n as i64 - 1)
            } else {
                pi * T::of(n as i64)
            };
            let center = T::of((n as i64 + 2) / 2);
            (j - center) * step
        }
    }
}

/// Initial guess `W_k(a_1d h e^{-ah})/h + a + i offset(j, k)/h`.
pub fn seed_guess<T: Scalar>(sys: &DelaySystem<T>, k: Branch, j: usize) -> Result<Complex<T>> {
    if j == 0 || j > sys.order() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: sys.order(),
        });
    }
    let arg = Complex::new(seed_argument(sys), T::zero());
    let w = lambert_w(k, arg)?;
    let h = sys.h();
    let offset = seed_offset::<T>(sys.order(), k.0, j);
    Ok(w / h + sys.a() + Complex::new(T::zero(), offset / h))
}

struct Converged<T> {
    s: Complex<T>,
    iterations: usize,
}

/// Damped Newton on `g(s) = (s - a)h - W_k(Q(s))`.
fn newton<T: Scalar>(
    sys: &DelaySystem<T>,
    k: Branch,
    seed: Complex<T>,
    opts: &SolverOptions<T>,
) -> Option<Converged<T>> {
    let (a, h) = (sys.a(), sys.h());
    let one = T::one();
    let eval = |s: Complex<T>| -> Option<(Complex<T>, Complex<T>)> {
        let (q, dq) = q_and_derivative(sys, s);
        let w = lambert_w(k, q).ok()?;
        let g = (s - a) * h - w;
        let dw = if q.norm() == T::zero() {
            Complex::new(one, T::zero())
        } else {
            w / (q * (w + one))
        };
        let dg = Complex::new(h, T::zero()) - dw * dq;
        (finite(g) && finite(dg)).then_some((g, dg))
    };
    let blowup = T::lit(1e8) * (one + seed.norm());

    let mut s = seed;
    let Some((mut g, mut dg)) = eval(s) else {
        // W' is infinite at the branch point, where a seed can already be an exact root.
        return (sys.delta(seed).norm() <= opts.newton_tol).then_some(Converged { s: seed, iterations: 0 });
    };
    for it in 1..=opts.max_iter {
        if dg.norm() == T::zero() {
            return None;
        }
        let step = g / dg;
        if step.norm() <= opts.newton_tol {
            let s_new = s - step;
            return Some(Converged {
                s: s_new,
                iterations: it,
            });
        }
        let mut lambda = one;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = s - step * lambda;
            if let Some((gt, dgt)) = eval(trial) {
                if gt.norm() < g.norm() {
                    accepted = Some((trial, gt, dgt));
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        let (s_new, g_new, dg_new) = accepted?;
        s = s_new;
        g = g_new;
        dg = dg_new;
        if s.norm() > blowup {
            return None;
        }
    }
    None
}

/// Solves branch `k >= 0` from the given seeds.
///
/// Seeds that fail are retried with imaginary offsets `±mπ/h`, `m = 1..=2N`.
/// When a branch `k > 0` still has fewer than `N` roots, or always on branch 0,
/// the whole offset ladder is swept around every seed. The count of distinct
/// roots is reported rather than enforced.
pub fn solve_branch<T: Scalar>(
    sys: &DelaySystem<T>,
    k: usize,
    seeds: &[Complex<T>],
    opts: &SolverOptions<T>,
) -> BranchSolution<T> {
    let branch = Branch(k as i64);
    let n = sys.order();
    let ladder: Vec<T> = (1..=2 * n as i64)
        .flat_map(|m| [T::of(m), -T::of(m)])
        .map(|m| m * T::PI() / sys.h())
        .collect();
    let mut roots: Vec<Root<T>> = Vec::new();

    let push = |roots: &mut Vec<Root<T>>, found: Converged<T>, j: usize| -> bool {
        let residual = sys.delta(found.s).norm();
        if residual > opts.residual_tol {
            return false;
        }
        if roots.iter().any(|r| (r.s - found.s).norm() <= opts.dedup_tol) {
            return false;
        }
        roots.push(Root {
            n: 0,
            k: branch,
            seed_j: j,
            s: found.s,
            c: Complex::new(T::zero(), T::zero()),
            ci: Complex::new(T::zero(), T::zero()),
            residual,
            iterations: found.iterations,
            source_depth: k,
        });
        true
    };

    for (idx, &seed) in seeds.iter().enumerate() {
        let j = idx + 1;
        match newton(sys, branch, seed, opts) {
            Some(c) => {
                push(&mut roots, c, j);
            }
            None => {
                for &off in &ladder {
                    let shifted = seed + Complex::new(T::zero(), off);
                    if let Some(c) = newton(sys, branch, shifted, opts) {
                        if push(&mut roots, c, j) {
                            break;
                        }
                    }
                }
            }
        }
    }

    if k == 0 || roots.len() < n {
        for (idx, &seed) in seeds.iter().enumerate() {
            for &off in &ladder {
                let shifted = seed + Complex::new(T::zero(), off);
                if let Some(c) = newton(sys, branch, shifted, opts) {
                    push(&mut roots, c, idx + 1);
                }
            }
        }
    }

    BranchSolution { k, roots }
}

/// Real roots on branch `-1` (two real roots occur when the single-delay
/// argument lies in `(-1/e, 0)`).
fn lower_real_roots<T: Scalar>(sys: &DelaySystem<T>, opts: &SolverOptions<T>) -> Vec<Root<T>> {
    let branch = Branch(-1);
    let arg = Complex::new(seed_argument(sys), T::zero());
    let Ok(w) = lambert_w(branch, arg) else {
        return Vec::new();
    };
    let seed = w / sys.h() + sys.a();
    let Some(found) = newton(sys, branch, seed, opts) else {
        return Vec::new();
    };
    if found.s.im.abs() > opts.dedup_tol {
        return Vec::new();
    }
    let s = Complex::new(found.s.re, T::zero());
    let residual = sys.delta(s).norm();
    if residual > opts.residual_tol {
        return Vec::new();
    }
    vec![Root {
        n: 0,
        k: branch,
        seed_j: 1,
        s,
        c: Complex::new(T::zero(), T::zero()),
        ci: Complex::new(T::zero(), T::zero()),
        residual,
        iterations: found.iterations,
        source_depth: 1,
    }]
}

/// Residue `C = 1/Δ'(S)` and history coefficient `CI`.
pub fn residues<T: Scalar>(
    sys: &DelaySystem<T>,
    pre: Option<&Preshape<T>>,
    s: Complex<T>,
) -> Result<(Complex<T>, Complex<T>)> {
    let dp = sys.delta_prime(s);
    if dp.norm() < T::tol(1e-12) {
        return Err(Error::DegenerateRoot {
            re: s.re.to_f64().unwrap_or(f64::NAN),
            im: s.im.to_f64().unwrap_or(f64::NAN),
            derivative: dp.norm().to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut c = dp.inv();
    let zero = Complex::new(T::zero(), T::zero());
    let mut ci = match pre {
        None => zero,
        Some(pre) => {
            let mut acc = zero;
            for (i, &ad) in sys.delay_coeffs().iter().enumerate() {
                let j = i + 1;
                let e = cexp(-s * (T::of(j as i64) * sys.h()));
                acc = acc + e * pre.phi_laplace(sys, j, s)? * ad;
            }
            c * acc
        }
    };
    if s.im == T::zero() {
        // Both are real on the real axis; drop signed-zero noise.
        c.im = T::zero();
        ci.im = T::zero();
    }
    Ok((c, ci))
}

/// Ordered, conjugate-closed root collection up to a branch depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    system: DelaySystem<T>,
    roots: Vec<Root<T>>,
    depth: usize,
    counts: Vec<BranchCount>,
    warnings: Vec<String>,
}

/// Finds all roots on branches `-depth..=depth`.
///
/// Branches are solved in parallel; the result does not depend on the number
/// of threads.
pub fn compute_spectrum<T: Scalar>(
    sys: &DelaySystem<T>,
    preshape: Option<&Preshape<T>>,
    depth: usize,
    opts: &SolverOptions<T>,
) -> Result<Spectrum<T>> {
    if let Some(pre) = preshape {
        pre.check_against(sys)?;
    }
    let solutions: Vec<Result<BranchSolution<T>>> = (0..=depth)
        .into_par_iter()
        .map(|k| {
            let seeds = (1..=sys.order())
                .map(|j| seed_guess(sys, Branch(k as i64), j))
                .collect::<Result<Vec<_>>>()?;
            Ok(solve_branch(sys, k, &seeds, opts))
        })
        .collect();

    let mut warnings = Vec::new();
    let mut counts = Vec::with_capacity(depth + 1);
    let mut found = Vec::new();
    for sol in solutions {
        let sol = sol?;
        let want = if sol.k == 0 { 1 } else { sys.order() };
        if sol.roots.len() < want {
            warnings.push(format!(
                "branch {} holds {} root(s), expected {want}",
                sol.k,
                sol.roots.len()
            ));
        }
        counts.push(BranchCount {
            k: sol.k,
            found: sol.roots.len(),
        });
        found.extend(sol.roots);
    }
    if depth >= 1 {
        found.extend(lower_real_roots(sys, opts));
    }

    let mut roots = close_under_conjugation(sys, found, opts, &mut warnings);
    for r in &mut roots {
        let (c, ci) = residues(sys, preshape, r.s)?;
        r.c = c;
        r.ci = ci;
    }
    number_roots(&mut roots, opts.newton_tol, opts.dedup_tol);
    Ok(Spectrum {
        system: sys.clone(),
        roots,
        depth,
        counts,
        warnings,
    })
}

fn close_under_conjugation<T: Scalar>(
    sys: &DelaySystem<T>,
    found: Vec<Root<T>>,
    opts: &SolverOptions<T>,
    warnings: &mut Vec<String>,
) -> Vec<Root<T>> {
    let mut roots: Vec<Root<T>> = Vec::with_capacity(2 * found.len());
    for mut r in found {
        if r.s.im.abs() <= opts.dedup_tol {
            r.s.im = T::zero();
            r.residual = sys.delta(r.s).norm();
        }
        if !roots.iter().any(|q| (q.s - r.s).norm() <= opts.dedup_tol) {
            roots.push(r);
        }
    }
    let originals = roots.len();
    for i in 0..originals {
        let r = &roots[i];
        if r.is_real() {
            continue;
        }
        let s = r.s.conj();
        if roots.iter().any(|q| (q.s - s).norm() <= opts.dedup_tol) {
            continue;
        }
        let k = conjugate_branch(sys, r.k, s);
        if k.is_none() {
            warnings.push(format!("no branch certificate for conjugate root {s}"));
        }
        let r = &roots[i];
        let conj = Root {
            n: 0,
            k: k.unwrap_or(Branch(-r.k.0)),
            seed_j: r.seed_j,
            s,
            c: r.c.conj(),
            ci: r.ci.conj(),
            residual: sys.delta(s).norm(),
            iterations: 0,
            source_depth: r.source_depth,
        };
        roots.push(conj);
    }
    roots
}

/// Branch of a conjugated root: `-k` except on the cut where closure shifts it by one.
fn conjugate_branch<T: Scalar>(sys: &DelaySystem<T>, k: Branch, s: Complex<T>) -> Option<Branch> {
    let base = -k.0;
    let tol = T::tol(1e-8);
    [base, base - 1, base + 1, base - 2, base + 2]
        .into_iter()
        .map(Branch)
        .find(|&b| {
            branch_certificate(sys, b, s)
                .map(|g| g.norm() <= tol)
                .unwrap_or(false)
        })
}

fn cmp_desc<T: Scalar>(x: T, y: T) -> Ordering {
    y.partial_cmp(&x).unwrap_or(Ordering::Equal)
}

/// Assigns the renumbering: `S_0` rightmost, upper-half and extra real roots
/// positive, conjugates negative in the order of their partners.
fn number_roots<T: Scalar>(roots: &mut Vec<Root<T>>, tie_tol: T, pair_tol: T) {
    if roots.is_empty() {
        return;
    }
    // Rightmost first; near-ties prefer real, then smaller |Im|, then upper.
    let max_re = roots
        .iter()
        .map(|r| r.s.re)
        .fold(T::neg_infinity(), T::max);
    let i0 = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.s.re >= max_re - tie_tol)
        .min_by(|(_, x), (_, y)| {
            x.is_real()
                .cmp(&y.is_real())
                .reverse()
                .then(x.s.im.abs().partial_cmp(&y.s.im.abs()).unwrap_or(Ordering::Equal))
                .then(cmp_desc(x.s.im, y.s.im))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut s0 = roots.swap_remove(i0);
    s0.n = 0;

    let (mut positive, mut lower): (Vec<Root<T>>, Vec<Root<T>>) =
        roots.drain(..).partition(|r| r.s.im >= T::zero());
    positive.sort_by(|x, y| cmp_desc(x.s.re, y.s.re).then(x.s.im.partial_cmp(&y.s.im).unwrap_or(Ordering::Equal)));

    let mut out = Vec::with_capacity(positive.len() + lower.len() + 1);
    let mut next_neg = -1i64;
    let mut take_conj = |target: Complex<T>, lower: &mut Vec<Root<T>>, out: &mut Vec<Root<T>>| {
        if let Some(pos) = lower
            .iter()
            .position(|q| (q.s - target.conj()).norm() <= pair_tol)
        {
            let mut q = lower.remove(pos);
            q.n = next_neg;
            next_neg -= 1;
            out.push(q);
        }
    };
    if !s0.is_real() {
        take_conj(s0.s, &mut lower, &mut out);
    }
    for (i, r) in positive.iter_mut().enumerate() {
        r.n = i as i64 + 1;
    }
    for r in &positive {
        if r.s.im > T::zero() {
            take_conj(r.s, &mut lower, &mut out);
        }
    }
    // Unpaired lower roots cannot arise from conjugate closure; keep them anyway.
    lower.sort_by(|x, y| cmp_desc(x.s.re, y.s.re).then(cmp_desc(x.s.im, y.s.im)));
    for mut q in lower {
        q.n = next_neg;
        next_neg -= 1;
        out.push(q);
    }
    out.push(s0);
    out.extend(positive);
    out.sort_by_key(|r| r.n);
    *roots = out;
}

impl<T: Scalar> Spectrum<T> {
    /// Roots ordered by index `n`, ascending.
    pub fn roots(&self) -> &[Root<T>] {
        &self.roots
    }

    pub fn system(&self) -> &DelaySystem<T> {
        &self.system
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Distinct roots found on each branch `0..=depth` (conjugates excluded).
    pub fn branch_counts(&self) -> &[BranchCount] {
        &self.counts
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Root with index `n`.
    pub fn get(&self, n: i64) -> Option<&Root<T>> {
        self.roots
            .binary_search_by_key(&n, |r| r.n)
            .ok()
            .map(|i| &self.roots[i])
    }

    /// The rightmost root `S_0`.
    pub fn rightmost(&self) -> Option<&Root<T>> {
        self.get(0)
    }

    /// Sign of `Re(S_0)` with a marginal band of half-width `tolerance`.
    pub fn stability(&self, tolerance: T) -> Result<Stability> {
        let s0 = self
            .rightmost()
            .ok_or_else(|| Error::InvalidArgument("empty spectrum".into()))?;
        Ok(if s0.s.re < -tolerance {
            Stability::Stable
        } else if s0.s.re > tolerance {
            Stability::Unstable
        } else {
            Stability::Marginal
        })
    }

    /// The sub-spectrum of branches up to `depth`, renumbered.
    pub fn truncate(&self, depth: usize) -> Spectrum<T> {
        let mut roots: Vec<Root<T>> = self
            .roots
            .iter()
            .filter(|r| r.source_depth <= depth)
            .cloned()
            .collect();
        let opts = SolverOptions::<T>::default();
        number_roots(&mut roots, opts.newton_tol, opts.dedup_tol);
        Spectrum {
            system: self.system.clone(),
            roots,
            depth: depth.min(self.depth),
            counts: self.counts.iter().copied().filter(|c| c.k <= depth).collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// Recomputes the history coefficients `CI` for another history.
    pub fn with_preshape(&self, pre: &Preshape<T>) -> Result<Spectrum<T>> {
        pre.check_against(&self.system)?;
        let mut out = self.clone();
        for r in &mut out.roots {
            let (c, ci) = residues(&self.system, Some(pre), r.s)?;
            r.c = c;
            r.ci = ci;
        }
        Ok(out)
    }
}

/// Free-function form of [`Spectrum::stability`].
pub fn stability<T: Scalar>(spec: &Spectrum<T>, tolerance: T) -> Result<Stability> {
    spec.stability(tolerance)
}
