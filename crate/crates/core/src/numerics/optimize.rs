use rayon::prelude::*;

use crate::{Error, Result};

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Uniform grid scan over `[lo, hi]` followed by golden-section refinement
/// of the bracket around the best grid point.
///
/// Non-finite values of `f` count as `-inf`. Ties on the grid go to the
/// smaller abscissa, so a flat function returns `lo`. Grid points are
/// evaluated in parallel but the result does not depend on the thread count.
pub fn scalar_maximize<F>(f: F, lo: f64, hi: f64, grid: usize, refine_tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(lo < hi) {
        return Err(Error::Domain {
            what: "scalar_maximize needs lo < hi",
            value: hi - lo,
        });
    }
    if grid < 3 {
        return Err(Error::invalid("grid", "at least 3 points are required"));
    }
    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid)
        .map(|k| {
            if k + 1 == grid {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect();
    let values: Vec<f64> = xs.par_iter().map(|&x| sanitize(f(x))).collect();

    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    let grid_best = Maximum {
        argmax: xs[best],
        value: values[best],
    };
    if grid_best.value == f64::NEG_INFINITY {
        return Ok(Maximum {
            argmax: lo,
            value: f64::NEG_INFINITY,
        });
    }
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(grid - 1)];
    let refined = golden_section_max(&f, a, b, refine_tol);
    Ok(if refined.value > grid_best.value {
        refined
    } else {
        grid_best
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`.
pub fn golden_section_max<F>(f: F, a: f64, b: f64, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()).max(1.0));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
        }
    }
    if fc >= fd {
        Maximum {
            argmax: c,
            value: fc,
        }
    } else {
        Maximum {
            argmax: d,
            value: fd,
        }
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect_root<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() != fhi.signum()) || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Numeric(format!(
            "no sign change on [{a}, {b}]: f = {flo}, {fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}
