use std::f64::consts::PI;

use crate::{Error, Result};

/// Real roots of a cubic together with its discriminant.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots {
    /// Distinct real roots, ascending.
    pub roots: Vec<f64>,
    /// 18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2
    pub discriminant: f64,
}

/// Discriminant of `a x^3 + b x^2 + c x + d`.
pub fn cubic_discriminant(a: f64, b: f64, c: f64, d: f64) -> f64 {
    18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c
        - 4.0 * a * c * c * c
        - 27.0 * a * a * d * d
}

/// Real roots of `a x^3 + b x^2 + c x + d = 0`.
///
/// The root count follows the sign of the reported discriminant: three
/// distinct roots when positive, one when negative, and the distinct values
/// of the repeated roots when it is exactly zero. Each root gets a Newton
/// polish step.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Result<CubicRoots> {
    if a == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    for v in [a, b, c, d] {
        if !v.is_finite() {
            return Err(Error::Domain {
                what: "cubic coefficients must be finite",
                value: v,
            });
        }
    }
    let discriminant = cubic_discriminant(a, b, c, d);

    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let shift = bn / 3.0;
    // depressed cubic t^3 + p t + q, x = t - shift
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;

    let mut roots: Vec<f64> = if discriminant > 0.0 {
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = if m > 0.0 {
            (3.0 * q / (p * m)).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    } else if discriminant < 0.0 {
        let s = ((q * 0.5).powi(2) + (p / 3.0).powi(3)).max(0.0).sqrt();
        // pick the sign that avoids cancellation
        let big = -(q.signum()) * (q.abs() * 0.5 + s).cbrt();
        let t = if big != 0.0 {
            big - p / (3.0 * big)
        } else {
            0.0
        };
        vec![t - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        vec![3.0 * q / p - shift, -1.5 * q / p - shift]
    };

    for r in roots.iter_mut() {
        *r = polish(a, b, c, d, *r);
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    Ok(CubicRoots {
        roots,
        discriminant,
    })
}

fn polish(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    let eval = |x: f64| ((a * x + b) * x + c) * x + d;
    let mut best = x;
    let mut best_val = eval(x).abs();
    for _ in 0..2 {
        let slope = (3.0 * a * best + 2.0 * b) * best + c;
        if slope == 0.0 || best_val == 0.0 {
            break;
        }
        let cand = best - eval(best) / slope;
        let v = eval(cand).abs();
        if v < best_val {
            best = cand;
            best_val = v;
        } else {
            break;
        }
    }
    best
}

impl CubicRoots {
    /// `|p(x)| / max(1, sum of |term|)` for the cubic `(a, b, c, d)`.
    pub fn relative_residual(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
        let v = ((a * x + b) * x + c) * x + d;
        let scale = (a * x * x * x).abs() + (b * x * x).abs() + (c * x).abs() + d.abs();
        v.abs() / scale.max(1.0)
    }
}

/// Real roots of `a x^2 + b x + c = 0`, ascending. A double root is
/// returned twice.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    if a == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    if disc == 0.0 {
        let r = -b / (2.0 * a);
        return Ok(vec![r, r]);
    }
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sign * disc.sqrt());
    let r1 = q / a;
    let r2 = c / q;
    Ok(if r1 <= r2 { vec![r1, r2] } else { vec![r2, r1] })
}
