use crate::error::{invalid, Result};

use super::density::{student_t_pdf, student_t_sf};
use super::Dof;

/// Quantile of the central t law: the `x` with `P(T ≤ x) = prob`.
///
/// Works on the upper tail so that probabilities near 1 keep their
/// precision; the root is bracketed, then polished with bisection-guarded
/// Newton steps until the tail probability agrees to 1e-12.
pub fn student_t_quantile(prob: f64, df: Dof) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(invalid("prob", format!("{prob} is not in (0, 1)")));
    }
    if prob == 0.5 {
        return Ok(0.0);
    }
    // by symmetry solve sf(x) = q for q < 1/2, x > 0
    let (q, sign) = if prob > 0.5 { (1.0 - prob, 1.0) } else { (prob, -1.0) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while student_t_sf(hi, df) > q {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(invalid("prob", "tail too extreme to invert"));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = student_t_sf(x, df) - q;
        if g.abs() <= 1e-12 * q {
            break;
        }
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x + g / student_t_pdf(x, df);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(sign * x)
}
