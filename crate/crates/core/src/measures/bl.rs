use std::collections::VecDeque;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::atom::Atom;
use super::discrete::{canonicalize, DiscreteDistribution};
use crate::{Error, Result};

/// Largest combined support accepted by [`bounded_lipschitz_distance`].
pub const MAX_LP_ATOMS: usize = 200;

/// Combined support of two measures with the signed weights `ν − μ`.
fn signed_difference<A: Atom>(
    nu: &DiscreteDistribution<A>,
    mu: &DiscreteDistribution<A>,
) -> Result<Vec<(A, f64)>> {
    if !nu.compatible_with(mu) {
        return Err(Error::Domain("d_bL between measures of different dimension".into()));
    }
    let entries = nu
        .atoms()
        .iter()
        .cloned()
        .chain(mu.atoms().iter().map(|(a, w)| (a.clone(), -w)))
        .collect();
    Ok(canonicalize(entries))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Bounded-Lipschitz distance `sup { ∫f dν − ∫f dμ : ‖f‖_∞ + Lip(f) ≤ 1 }`
/// between finite measures on `ℝ^d`, by linear programming over the values
/// of `f` on the combined support.
pub fn bounded_lipschitz_distance(
    nu: &DiscreteDistribution<Vec<f64>>,
    mu: &DiscreteDistribution<Vec<f64>>,
) -> Result<f64> {
    let diff = signed_difference(nu, mu)?;
    let n = diff.len();
    if n > MAX_LP_ATOMS {
        return Err(Error::Capacity(format!(
            "combined support of {n} atoms exceeds {MAX_LP_ATOMS}"
        )));
    }
    if diff.iter().all(|(_, w)| *w == 0.0) {
        return Ok(0.0);
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let f: Vec<_> = diff.iter().map(|(_, w)| lp.add_var(*w, (-1.0, 1.0))).collect();
    let m = lp.add_var(0.0, (0.0, 1.0));
    let l = lp.add_var(0.0, (0.0, 1.0));
    lp.add_constraint([(m, 1.0), (l, 1.0)], ComparisonOp::Le, 1.0);
    for &fi in &f {
        lp.add_constraint([(fi, 1.0), (m, -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint([(fi, -1.0), (m, -1.0)], ComparisonOp::Le, 0.0);
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&diff[i].0, &diff[j].0);
            lp.add_constraint([(f[i], 1.0), (f[j], -1.0), (l, -d)], ComparisonOp::Le, 0.0);
            lp.add_constraint([(f[j], 1.0), (f[i], -1.0), (l, -d)], ComparisonOp::Le, 0.0);
        }
    }
    let solution = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;
    Ok(solution.objective().max(0.0))
}

/// Exact bounded-Lipschitz distance on the real line, for supports of any
/// size.
///
/// On a line only neighbouring Lipschitz constraints bind, so for fixed
/// `(M, L)` the maximum over `f` is a chain dynamic program over concave
/// piecewise-linear value functions. The value is concave and homogeneous in
/// `(M, L)`, so the outer maximum over `M + L = 1` is found by golden-section
/// search.
pub fn bounded_lipschitz_distance_1d(
    nu: &DiscreteDistribution<f64>,
    mu: &DiscreteDistribution<f64>,
) -> Result<f64> {
    let diff = signed_difference(nu, mu)?;
    if diff.iter().all(|(_, w)| *w == 0.0) {
        return Ok(0.0);
    }
    let xs: Vec<f64> = diff.iter().map(|(x, _)| *x).collect();
    let ws: Vec<f64> = diff.iter().map(|(_, w)| *w).collect();
    let value = |t: f64| chain_value(&xs, &ws, t, 1.0 - t);

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut vc, mut vd) = (value(c), value(d));
    for _ in 0..90 {
        if vc >= vd {
            b = d;
            d = c;
            vd = vc;
            c = b - ratio * (b - a);
            vc = value(c);
        } else {
            a = c;
            c = d;
            vc = vd;
            d = a + ratio * (b - a);
            vd = value(d);
        }
    }
    Ok(vc.max(vd).max(0.0))
}

/// A linear piece of a concave function; the actual slope is `slope` plus the
/// running offset.
struct Segment {
    len: f64,
    slope: f64,
}

/// `max Σ w_i f_i` over `|f_i| ≤ m`, `|f_i − f_{i+1}| ≤ l·(x_{i+1} − x_i)`.
///
/// The value function `h(f)` of the suffix problem is concave piecewise
/// linear on `[-m, m]`. It is stored as its value at `-m` plus segments split
/// at the maximizer; taking the window maximum over `[f-δ, f+δ]` trims `δ`
/// off each end and inserts a flat piece at the peak.
fn chain_value(xs: &[f64], w: &[f64], m: f64, l: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let mut left: VecDeque<Segment> = VecDeque::new();
    let mut right: VecDeque<Segment> = VecDeque::new();
    right.push_back(Segment {
        len: 2.0 * m,
        slope: 0.0,
    });
    let mut offset = 0.0;
    let mut v0 = 0.0;

    for i in (0..xs.len()).rev() {
        if i + 1 < xs.len() {
            let delta = l * (xs[i + 1] - xs[i]);
            let mut removed = 0.0;
            let mut rem = delta;
            while rem > 0.0 {
                let Some(s) = left.front_mut() else { break };
                let take = rem.min(s.len);
                v0 += take * (s.slope + offset);
                s.len -= take;
                rem -= take;
                removed += take;
                if s.len <= 0.0 {
                    left.pop_front();
                }
            }
            rem = delta;
            while rem > 0.0 {
                let Some(s) = right.back_mut() else { break };
                let take = rem.min(s.len);
                s.len -= take;
                rem -= take;
                removed += take;
                if s.len <= 0.0 {
                    right.pop_back();
                }
            }
            if removed > 0.0 {
                match right.front_mut() {
                    Some(s) if s.slope == -offset => s.len += removed,
                    _ => right.push_front(Segment {
                        len: removed,
                        slope: -offset,
                    }),
                }
            }
        }

        v0 -= m * w[i];
        offset += w[i];
        while left.back().is_some_and(|s| s.slope + offset <= 0.0) {
            let s = left.pop_back().expect("non-empty");
            right.push_front(s);
        }
        while right.front().is_some_and(|s| s.slope + offset > 0.0) {
            let s = right.pop_front().expect("non-empty");
            left.push_back(s);
        }
    }
    v0 + left.iter().map(|s| s.len * (s.slope + offset)).sum::<f64>()
}
