//! Optimal multiplier of the Frobenius-ball constraint in the (Z, S) step.
//!
//! For magnitudes `a` over the observed set, define
//!
//! ```text
//! phi(theta) = || min{ xi/theta, rho/(rho+theta) * a } ||_F
//! ```
//!
//! which is continuous and strictly decreasing on `theta > 0` when `a != 0`.
//! The multiplier is zero when `||a||_F <= delta` and otherwise the unique
//! root of `phi(theta) = delta`.
//!
//! [`theta_search`] sorts the magnitudes once and walks the breakpoints
//! `theta_j = xi / (a_(j) - xi/rho)` where an entry switches from the scaled
//! branch to the clipped branch. Prefix sums of squared magnitudes make each
//! breakpoint evaluation O(1), so the cost is dominated by the sort. Between
//! two consecutive breakpoints the equation reads
//!
//! ```text
//! (rho/(rho+theta))^2 * sum_{i<=j*} a_(i)^2 + (|Omega| - j*) * (xi/theta)^2 = delta^2
//! ```
//!
//! which clears to a quartic in `theta`. Note the count multiplying the
//! clipped term is `|Omega| - j*`, the number of clipped entries.

use crate::error::{invalid, Result, SpcpError};
use crate::linalg::{DenseMatrix, ObservationMask};
use crate::quartic::quartic_real_roots;

/// Magnitudes over the observed set together with the scalars of the (Z, S) step.
#[derive(Clone, Debug)]
pub struct ThetaProblem {
    magnitudes: Vec<f64>,
    pub delta: f64,
    pub rho: f64,
    pub xi: f64,
}

impl ThetaProblem {
    pub fn new(magnitudes: Vec<f64>, delta: f64, rho: f64, xi: f64) -> Result<Self> {
        if magnitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("magnitudes must be finite and non-negative"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be >= 0, got {delta}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid(format!("rho must be > 0, got {rho}")));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(invalid(format!("xi must be > 0, got {xi}")));
        }
        Ok(Self {
            magnitudes,
            delta,
            rho,
            xi,
        })
    }

    /// Takes `|a_ij|` for `(i, j)` in the mask; entries off the mask are ignored.
    pub fn from_matrix(
        a: &DenseMatrix,
        mask: &ObservationMask,
        delta: f64,
        rho: f64,
        xi: f64,
    ) -> Result<Self> {
        let mags = mask.gather(a)?.into_iter().map(f64::abs).collect();
        Self::new(mags, delta, rho, xi)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// `||pi_Omega(A)||_F`, i.e. `phi(0)`.
    pub fn norm(&self) -> f64 {
        self.magnitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// `phi(theta)` for `theta > 0`.
pub fn phi(theta: f64, prob: &ThetaProblem) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(invalid(format!("phi is defined for theta > 0, got {theta}")));
    }
    Ok(phi_unchecked(theta, prob))
}

fn phi_unchecked(theta: f64, prob: &ThetaProblem) -> f64 {
    let clip = prob.xi / theta;
    let scale = prob.rho / (prob.rho + theta);
    prob.magnitudes
        .iter()
        .map(|&a| {
            let v = clip.min(scale * a);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Sorted magnitudes with prefix sums of squares; `prefix_sq[j]` is the sum
/// of the `j` smallest squared magnitudes.
struct Breakpoints {
    sorted: Vec<f64>,
    prefix_sq: Vec<f64>,
}

impl Breakpoints {
    fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mut prefix_sq = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix_sq.push(acc);
        for &a in &sorted {
            acc += a * a;
            prefix_sq.push(acc);
        }
        Self { sorted, prefix_sq }
    }

    fn len(&self) -> usize {
        self.sorted.len()
    }

    fn total_sq(&self) -> f64 {
        *self.prefix_sq.last().unwrap()
    }
}

/// Relative tolerance on `|phi(theta*) - delta| / max(delta, 1)`.
pub const THETA_TOLERANCE: f64 = 1e-9;

/// Optimal multiplier for the (Z, S) step; see the module docs.
///
/// Requires `delta > 0`; the `delta = 0` case has no finite multiplier and is
/// handled directly by the caller.
pub fn theta_search(prob: &ThetaProblem) -> Result<f64> {
    let delta = prob.delta;
    if !(delta > 0.0) {
        return Err(invalid("theta_search requires delta > 0"));
    }
    let norm = prob.norm();
    if norm <= delta {
        return Ok(0.0);
    }
    let (rho, xi) = (prob.rho, prob.xi);
    let bp = Breakpoints::new(&prob.magnitudes);
    let n = bp.len();
    let level = xi / rho;
    // Entries at or below xi/rho never clip; ties go to this group.
    let k_bar = bp.sorted.partition_point(|&a| a <= level);
    let unclipped = || rho * (norm / delta - 1.0);
    if k_bar == n {
        return Ok(unclipped());
    }

    // phi at the breakpoint of the j-th smallest entry (1-based), which is
    // non-decreasing in j.
    let mut j_star = k_bar;
    for j in (k_bar + 1)..=n {
        let a = bp.sorted[j - 1];
        let scale = 1.0 - level / a;
        let gap = a - level;
        let phi_j = (scale * scale * bp.prefix_sq[j] + (n - j) as f64 * gap * gap).sqrt();
        if phi_j <= delta {
            j_star = j;
        } else {
            break;
        }
    }
    let theta = if j_star == n {
        unclipped()
    } else {
        let lo = xi / (bp.sorted[j_star] - level);
        let hi = if j_star > k_bar {
            xi / (bp.sorted[j_star - 1] - level)
        } else {
            f64::INFINITY
        };
        solve_quartic_positive(bp.prefix_sq[j_star], (n - j_star) as f64, rho, xi, delta, (lo, hi))?
    };

    let resid = (phi_unchecked(theta, prob) - delta).abs();
    if !(resid <= THETA_TOLERANCE * delta.max(1.0)) {
        return Err(SpcpError::ThetaSearch(format!(
            "phi(theta*) - delta = {resid:e} at theta* = {theta:e} (n = {n}, k_bar = {k_bar}, j* = {j_star}, \
             delta = {delta:e}, rho = {rho:e}, xi = {xi:e}, |A| = {norm:e}, total = {:e})",
            bp.total_sq()
        )));
    }
    Ok(theta)
}

/// Positive root of `(rho/(rho+theta))^2 c1 + c2 (xi/theta)^2 = delta^2`
/// inside `bracket` (`hi` may be infinite).
///
/// Clears denominators (with `theta = rho t`) to
/// `t^4 + 2t^3 + (1-a-b) t^2 - 2bt - b = 0`, `a = c1/delta^2`,
/// `b = c2 xi^2 / (rho delta)^2`, seeds from Ferrari's closed form and
/// polishes with safeguarded Newton/bisection on the unscaled equation.
pub fn solve_quartic_positive(
    c1: f64,
    c2: f64,
    rho: f64,
    xi: f64,
    delta: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    if !(c1 >= 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(invalid("quartic coefficients must be finite and non-negative"));
    }
    if !(rho > 0.0 && xi > 0.0 && delta > 0.0) {
        return Err(invalid("rho, xi and delta must be positive"));
    }
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi >= lo) {
        return Err(invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    let d2 = delta * delta;
    let g = |theta: f64| {
        let s = rho / (rho + theta);
        s * s * c1 + c2 * (xi / theta).powi(2) - d2
    };

    if c2 == 0.0 {
        if c1 <= d2 {
            return Err(no_root(lo, hi, &g));
        }
        return check_in_bracket(rho * (c1.sqrt() / delta - 1.0), lo, hi, &g);
    }
    if c1 == 0.0 {
        return check_in_bracket(xi * c2.sqrt() / delta, lo, hi, &g);
    }

    let a = c1 / d2;
    let b = c2 * (xi / (rho * delta)).powi(2);
    // h(t) = a/(1+t)^2 + b/t^2 - 1 is strictly decreasing and convex on t > 0.
    let h = |t: f64| a / ((1.0 + t) * (1.0 + t)) + b / (t * t) - 1.0;
    let dh = |t: f64| -2.0 * a / (1.0 + t).powi(3) - 2.0 * b / (t * t * t);

    // h > 0 below max(sqrt(b), sqrt(a) - 1) and h < 0 above sqrt(a + b).
    let mut t_lo = (lo / rho).max(b.sqrt()).max(a.sqrt() - 1.0);
    let mut t_hi = (hi / rho).min((a + b).sqrt());
    if t_lo > t_hi {
        // The bracket endpoints disagree with the analytic bounds by rounding.
        if t_lo - t_hi > 1e-10 * t_hi.max(1e-300) {
            return Err(no_root(lo, hi, &g));
        }
        return Ok(rho * 0.5 * (t_lo + t_hi));
    }
    let (h_lo, h_hi) = (h(t_lo), h(t_hi));
    let slack = 1e-12;
    if h_lo < -slack || h_hi > slack {
        return Err(no_root(lo, hi, &g));
    }
    if h_lo <= 0.0 {
        return Ok(rho * t_lo);
    }
    if h_hi >= 0.0 {
        return Ok(rho * t_hi);
    }

    let seed = quartic_real_roots(2.0, 1.0 - a - b, -2.0 * b, -b)
        .into_iter()
        .filter(|&t| t > t_lo && t < t_hi)
        .min_by(|x, y| h(*x).abs().total_cmp(&h(*y).abs()));
    let mut t = seed.unwrap_or(0.5 * (t_lo + t_hi));

    let max_steps = if seed.is_some() { 50 } else { 200 };
    for _ in 0..max_steps {
        let v = h(t);
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            t_lo = t;
        } else {
            t_hi = t;
        }
        let newton = t - v / dh(t);
        let next = if newton > t_lo && newton < t_hi {
            newton
        } else {
            0.5 * (t_lo + t_hi)
        };
        if (next - t).abs() <= 2.0 * f64::EPSILON * t {
            t = next;
            break;
        }
        t = next;
    }

    let theta = rho * t;
    if !(h(t).abs() <= 1e-12) {
        return Err(SpcpError::ThetaSearch(format!(
            "quartic polish did not converge: residual {:e} at theta = {theta:e}",
            h(t)
        )));
    }
    Ok(theta)
}

fn no_root(lo: f64, hi: f64, g: &impl Fn(f64) -> f64) -> SpcpError {
    SpcpError::RootNotBracketed {
        lo,
        hi,
        f_lo: if lo > 0.0 { g(lo) } else { f64::INFINITY },
        f_hi: if hi.is_finite() { g(hi) } else { f64::NEG_INFINITY },
    }
}

fn check_in_bracket(theta: f64, lo: f64, hi: f64, g: &impl Fn(f64) -> f64) -> Result<f64> {
    let tol = 1e-10 * theta.abs().max(1e-300);
    if theta > 0.0 && theta >= lo - tol && theta <= hi + tol {
        Ok(theta)
    } else {
        Err(no_root(lo, hi, g))
    }
}

/// Clip level `lambda > 0` with `|| min{lambda, a} ||_F = delta`, assuming
/// `||a||_F > delta > 0`.
///
/// This is the multiplier search in the limit `rho -> infinity` with
/// `xi = 1` and `lambda = 1/theta`: the scale factor disappears and the
/// equation between breakpoints is solved exactly by
/// `lambda = sqrt((delta^2 - sum_{i<=j} a_(i)^2) / (n - j))`.
pub fn clip_level_search(magnitudes: &[f64], delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid("clip_level_search requires delta > 0"));
    }
    if magnitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("magnitudes must be finite and non-negative"));
    }
    let bp = Breakpoints::new(magnitudes);
    let n = bp.len();
    let d2 = delta * delta;
    if bp.total_sq() <= d2 {
        return Err(invalid("clip level undefined: ||a||_F <= delta"));
    }
    // Largest j with psi(a_(j))^2 = prefix_sq[j] + (n - j) a_(j)^2 <= delta^2;
    // j = 0 (with a_(0) = 0) always qualifies.
    let mut j = 0;
    for k in 1..=n {
        let a = bp.sorted[k - 1];
        if bp.prefix_sq[k] + (n - k) as f64 * a * a <= d2 {
            j = k;
        } else {
            break;
        }
    }
    if j == n {
        return Err(SpcpError::ThetaSearch("clip level scan overran the breakpoints".into()));
    }
    Ok(((d2 - bp.prefix_sq[j]).max(0.0) / (n - j) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_phi(prob: &ThetaProblem) -> f64 {
        let (mut lo, mut hi) = (1e-12_f64, 1e12_f64);
        for _ in 0..400 {
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if phi_unchecked(mid, prob) > prob.delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_of_zero_magnitudes_is_zero() {
        let p = ThetaProblem::new(vec![0.0; 4], 0.1, 1.0, 1.0).unwrap();
        assert_eq!(phi(0.3, &p).unwrap(), 0.0);
        assert_eq!(phi(30.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn phi_direct_evaluation() {
        let p = ThetaProblem::new(vec![1.0], 0.1, 1.0, 1.0).unwrap();
        // min{1/1, (1/2) * 1} = 0.5
        assert!((phi(1.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!(phi(1e9, &p).unwrap() < 1e-6);
        assert!(phi(0.0, &p).is_err());
    }

    #[test]
    fn zero_multiplier_inside_ball() {
        let p = ThetaProblem::new(vec![0.3, 0.4], 0.5, 1.0, 1.0).unwrap();
        assert_eq!(theta_search(&p).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_when_nothing_clips() {
        // A = [[3]], delta = 1, rho = 2, xi = 10: theta* = 2 (3/1 - 1) = 4.
        let p = ThetaProblem::new(vec![3.0], 1.0, 2.0, 10.0).unwrap();
        let t = theta_search(&p).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        assert!((phi(t, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_bisection_on_two_entries() {
        let p = ThetaProblem::new(vec![2.0, 0.1], 0.3, 1.0, 0.5).unwrap();
        let t = theta_search(&p).unwrap();
        let oracle = bisect_phi(&p);
        assert!((t - oracle).abs() <= 1e-10 * oracle.max(1.0), "{t} vs {oracle}");
    }

    #[test]
    fn rejects_zero_delta() {
        let p = ThetaProblem::new(vec![1.0], 0.0, 1.0, 1.0).unwrap();
        assert!(theta_search(&p).is_err());
    }

    #[test]
    fn quartic_degenerate_cases() {
        // c2 = 0: theta = rho (sqrt(c1)/delta - 1)
        let t = solve_quartic_positive(9.0, 0.0, 2.0, 1.0, 1.0, (0.0, f64::INFINITY)).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        // c1 = 0: theta = xi sqrt(c2) / delta
        let t = solve_quartic_positive(0.0, 4.0, 2.0, 0.5, 0.25, (0.0, f64::INFINITY)).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_matches_scalar_bisection() {
        let (c1, c2, rho, xi, delta) = (4.0, 1.0, 1.0, 1.0, 1.0);
        let g = |t: f64| (rho / (rho + t)).powi(2) * c1 + c2 * (xi / t).powi(2) - delta * delta;
        let (mut lo, mut hi) = (1e-9_f64, 1e9_f64);
        for _ in 0..300 {
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if g(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let t = solve_quartic_positive(c1, c2, rho, xi, delta, (0.0, f64::INFINITY)).unwrap();
        assert!((t - lo).abs() <= 1e-12 * lo, "{t} vs {lo}");
    }

    #[test]
    fn quartic_reports_missing_root() {
        // Root is near 1.78; the bracket excludes it.
        let err = solve_quartic_positive(4.0, 1.0, 1.0, 1.0, 1.0, (5.0, 10.0)).unwrap_err();
        assert!(matches!(err, SpcpError::RootNotBracketed { .. }));
        assert!(solve_quartic_positive(0.5, 0.0, 1.0, 1.0, 1.0, (0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn clip_level_small_case() {
        // |a| = [3, 1, 0.1], delta = 0.5: 0.1^2 + 2 lambda^2 = 0.25.
        let l = clip_level_search(&[3.0, 1.0, 0.1], 0.5).unwrap();
        assert!((l - (0.24f64 / 2.0).sqrt()).abs() < 1e-15);
        let psi: f64 = [3.0f64, 1.0, 0.1].iter().map(|a| a.min(l).powi(2)).sum::<f64>().sqrt();
        assert!((psi - 0.5).abs() < 1e-14);
    }
}
