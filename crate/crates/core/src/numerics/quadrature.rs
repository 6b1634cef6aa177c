use crate::{Error, Result};

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_depth: 50,
        }
    }
}

impl QuadratureSpec {
    pub fn new(tolerance: f64, max_depth: u32) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        if max_depth < 1 {
            return Err(Error::invalid("max_depth", "must be >= 1"));
        }
        Ok(Self {
            tolerance,
            max_depth,
        })
    }
}

// Subdivision levels that are always taken before the error estimate is
// trusted; five Simpson samples can miss a narrow lobe entirely.
const FORCED_LEVELS: u32 = 4;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The target is `|result - exact| < tolerance * (1 + |result|)`. Removable
/// singularities must be handled inside `f`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain {
            what: "integration bounds must be finite with a < b",
            value: b - a,
        });
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let eps = spec.tolerance * (1.0 + whole.abs());
    let mut ctx = Ctx {
        f: &f,
        max_depth: spec.max_depth,
        a,
        b,
    };
    ctx.step(a, b, fa, fm, fb, whole, eps, 0)
}

struct Ctx<'a, F> {
    f: &'a F,
    max_depth: u32,
    a: f64,
    b: f64,
}

impl<F: Fn(f64) -> f64> Ctx<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if depth >= FORCED_LEVELS.min(self.max_depth) && delta.abs() <= 15.0 * eps {
            return Ok(left + right + delta / 15.0);
        }
        if depth + 1 >= self.max_depth || m <= a || b <= m {
            return Err(Error::Convergence {
                a: self.a,
                b: self.b,
                max_depth: self.max_depth,
            });
        }
        let l = self.step(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1)?;
        let r = self.step(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1)?;
        Ok(l + r)
    }
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}
