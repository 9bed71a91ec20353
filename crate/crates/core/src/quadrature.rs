//! Composite 8-point Gauss–Legendre rule.

use std::ops::{Add, Mul};

use crate::scalar::Scalar;

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (-0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
];

/// Integrates `f` over `[a, b]` with panels no wider than `max_width`.
///
/// `breaks` are extra panel edges (kinks of the integrand); those outside
/// `(a, b)` are ignored.
pub(crate) fn integrate<T, V, F>(a: T, b: T, max_width: T, breaks: &[T], mut f: F) -> V
where
    T: Scalar,
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
    F: FnMut(T) -> V,
{
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    edges.push(b);

    let half = T::lit(0.5);
    let mut acc: Option<V> = None;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let panels = ((hi - lo) / max_width).ceil().to_usize().unwrap_or(1).max(1);
        let width = (hi - lo) / T::of(panels as i64);
        for p in 0..panels {
            let left = lo + width * T::of(p as i64);
            let mid = left + width * half;
            for &(x, w) in &GL8 {
                let v = f(mid + width * half * T::lit(x)) * (T::lit(w) * width * half);
                acc = Some(match acc {
                    Some(s) => s + v,
                    None => v,
                });
            }
        }
    }
    acc.unwrap_or_else(|| f(a) * T::zero())
}
