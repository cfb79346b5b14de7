//! Real roots of cubic and quartic polynomials in closed form.
//!
//! The quartic uses Ferrari's reduction: depress, solve the resolvent cubic
//! for a positive root, and split into two quadratics. Roots are refined with
//! a few Newton steps on the original polynomial; callers that need more
//! than a good seed should polish against their own equation.

use std::f64::consts::PI;

fn horner(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn newton_polish(coeffs: &[f64], mut x: f64, steps: usize) -> f64 {
    for _ in 0..steps {
        let (p, dp) = horner(coeffs, x);
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() {
            break;
        }
        let (pn, _) = horner(coeffs, next);
        if pn.abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Real roots of `t^3 + a t^2 + b t + c`, ascending.
pub fn cubic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = if p == 0.0 && q == 0.0 {
        vec![0.0]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation by computing the larger-magnitude term first.
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        vec![u + v]
    } else {
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * PI * k as f64) / 3.0).cos())
            .collect()
    };
    let coeffs = [1.0, a, b, c];
    for x in roots.iter_mut() {
        *x = newton_polish(&coeffs, *x - shift, 4);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn quadratic_real_roots(b: f64, c: f64, out: &mut Vec<f64>) {
    // t^2 + b t + c
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        // Tolerate a slightly negative discriminant from rounding.
        if disc > -1e-12 * (b * b).max(c.abs()).max(1e-300) {
            out.push(-b / 2.0);
        }
        return;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        out.push(0.0);
        return;
    }
    out.push(q);
    out.push(c / q);
}

/// Real roots of the monic quartic `t^4 + a t^3 + b t^2 + c t + d`, ascending.
pub fn quartic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;

    let mut ys = Vec::with_capacity(4);
    let scale = p.abs().max(r.abs().sqrt()).max(1e-300);
    if q.abs() <= 1e-14 * scale.powf(1.5) {
        // Biquadratic: y^4 + p y^2 + r.
        let mut zs = Vec::with_capacity(2);
        quadratic_real_roots(p, r, &mut zs);
        for z in zs {
            if z >= 0.0 {
                let s = z.sqrt();
                ys.push(s);
                ys.push(-s);
            }
        }
    } else {
        // Resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0 has a
        // positive root whenever q != 0.
        let m = cubic_real_roots(p, p * p / 4.0 - r, -q * q / 8.0)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if m > 0.0 {
            let s = (2.0 * m).sqrt();
            let t = q / (2.0 * s);
            quadratic_real_roots(s, p / 2.0 + m - t, &mut ys);
            quadratic_real_roots(-s, p / 2.0 + m + t, &mut ys);
        }
    }

    let coeffs = [1.0, a, b, c, d];
    let mut roots: Vec<f64> = ys
        .into_iter()
        .map(|y| newton_polish(&coeffs, y - shift, 6))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}
