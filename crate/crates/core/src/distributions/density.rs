use std::f64::consts::{PI, SQRT_2};

use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::{Dof, Noncentrality};

/// Poisson tail mass left out of the mixture series.
const SERIES_TAIL_MASS: f64 = 1e-12;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Φ(x), through the complementary error function (absolute error well
/// below 1e-12 on the whole real line).
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn student_t_pdf(x: f64, df: Dof) -> f64 {
    let nu = df.as_f64();
    (ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln() - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p())
        .exp()
}

/// Upper tail `P(T > x)` of the central t law.
pub fn student_t_sf(x: f64, df: Dof) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let nu = df.as_f64();
    let tail = |t: f64| {
        if t.is_infinite() {
            0.0
        } else {
            0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + t * t))
        }
    };
    if x >= 0.0 {
        tail(x)
    } else {
        1.0 - tail(-x)
    }
}

pub fn student_t_cdf(x: f64, df: Dof) -> f64 {
    student_t_sf(-x, df)
}

pub fn chi_square_cdf(x: f64, df: Dof) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(0.5 * df.as_f64(), 0.5 * x)
    }
}

fn ln_f_pdf(x: f64, d1: f64, d2: f64) -> f64 {
    let half1 = 0.5 * d1;
    let half2 = 0.5 * d2;
    half1 * (d1 / d2).ln() + (half1 - 1.0) * x.ln()
        - (half1 + half2) * (d1 * x / d2).ln_1p()
        - (ln_gamma(half1) + ln_gamma(half2) - ln_gamma(half1 + half2))
}

fn central_f_pdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if d1 < 2.0 {
            f64::INFINITY
        } else if d1 == 2.0 {
            1.0
        } else {
            0.0
        };
    }
    ln_f_pdf(x, d1, d2).exp()
}

pub fn f_pdf(x: f64, d1: Dof, d2: Dof) -> f64 {
    central_f_pdf(x, d1.as_f64(), d2.as_f64())
}

pub fn f_cdf(x: f64, d1: Dof, d2: Dof) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (a, b) = (d1.as_f64(), d2.as_f64());
    beta_reg(0.5 * a, 0.5 * b, a * x / (a * x + b))
}

/// Density of the noncentral F law as the Poisson(ncp/2)-weighted series
///
/// `Σ_k w_k · d1/(d1+2k) · f_{F(d1+2k, d2)}(d1·x/(d1+2k))`,
///
/// stopped once the Poisson mass still outside the sum drops below 1e-12.
pub fn noncentral_f_pdf(x: f64, d1: Dof, d2: Dof, ncp: Noncentrality) -> f64 {
    let (a, b, lam) = (d1.as_f64(), d2.as_f64(), ncp.get());
    if x < 0.0 {
        return 0.0;
    }
    if lam == 0.0 {
        return central_f_pdf(x, a, b);
    }
    let mean = 0.5 * lam;
    let ln_mean = mean.ln();
    let hard_stop = (mean + 60.0 * mean.sqrt() + 200.0) as u64;
    let mut ln_fact = 0.0;
    let mut mass = 0.0;
    let mut total = 0.0;
    let mut k = 0u64;
    loop {
        let kf = k as f64;
        if k > 0 {
            ln_fact += kf.ln();
        }
        let ln_w = -mean + kf * ln_mean - ln_fact;
        let w = ln_w.exp();
        mass += w;
        // terms below e⁻⁶⁰ cannot move the sum
        if ln_w > -60.0 {
            let d = a + 2.0 * kf;
            total += w * (a / d) * central_f_pdf(a * x / d, d, b);
        }
        if (kf > mean && 1.0 - mass < SERIES_TAIL_MASS) || k >= hard_stop {
            break;
        }
        k += 1;
    }
    total
}

/// Density of the noncentral t law with `df` degrees of freedom and
/// noncentrality `ncp`, from the series
///
/// `f(x) = e^{−δ²/2} / (√(νπ) Γ(ν/2)) · (ν/(ν+x²))^{(ν+1)/2} · Σ_j Γ((ν+j+1)/2)/j! · z^j`,
/// `z = x·δ·√2 / √(ν+x²)`.
///
/// Terms are summed in log space with their signs; for `x·δ < 0` the series
/// alternates, which costs a few digits of relative accuracy only where the
/// density itself is tiny.
pub fn noncentral_t_pdf(x: f64, df: Dof, ncp: f64) -> f64 {
    let nu = df.as_f64();
    let r = nu + x * x;
    let ln_prefix = -0.5 * ncp * ncp - 0.5 * (nu * PI).ln() - ln_gamma(0.5 * nu) + 0.5 * (nu + 1.0) * (nu / r).ln();
    let z = x * ncp * SQRT_2 / r.sqrt();
    if z == 0.0 {
        return (ln_prefix + ln_gamma(0.5 * (nu + 1.0))).exp();
    }
    let ln_z = z.abs().ln();
    let negative = z < 0.0;

    // log-magnitudes of the terms, built with the step-two recurrence
    // t_{j+2} = t_j · ((ν+j+1)/2) · z² / ((j+1)(j+2))
    let mut terms: Vec<f64> = Vec::with_capacity(64);
    terms.push(ln_gamma(0.5 * (nu + 1.0)));
    terms.push(ln_gamma(0.5 * (nu + 2.0)) + ln_z);
    let mut peak = terms[0].max(terms[1]);
    let mut j = 2usize;
    loop {
        let prev = terms[j - 2];
        let jm = (j - 2) as f64;
        let next = prev + (0.5 * (nu + jm + 1.0)).ln() + 2.0 * ln_z - ((jm + 1.0) * (jm + 2.0)).ln();
        terms.push(next);
        peak = peak.max(next);
        let shrinking = next < prev;
        if (shrinking && next < peak - 50.0 && terms[j - 1] < peak - 50.0) || j > 200_000 {
            break;
        }
        j += 1;
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (j, lt) in terms.iter().enumerate() {
        let v = (lt - peak).exp();
        if negative && j % 2 == 1 {
            neg += v;
        } else {
            pos += v;
        }
    }
    let sum = pos - neg;
    if sum <= 0.0 {
        return 0.0;
    }
    (ln_prefix + peak + sum.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

    fn dof(k: u64) -> Dof {
        Dof::new(k).unwrap()
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        // oracle: Simpson integration of the density on [−12, −1]
        let oracle = simpson(normal_pdf, -12.0, -1.0, 20_000);
        assert!((standard_normal_cdf(-1.0) - oracle).abs() < 1e-12);
        assert!((oracle - 0.158_655_253_931_457).abs() < 1e-12);
        assert!(standard_normal_cdf(10.0) > 1.0 - 1e-15);
    }

    #[test]
    fn normal_cdf_matches_quadrature_on_grid() {
        for i in -40..=40 {
            let x = i as f64 * 0.2;
            let oracle = 0.5
                + if x >= 0.0 {
                    simpson(normal_pdf, 0.0, x, 4000)
                } else {
                    -simpson(normal_pdf, x, 0.0, 4000)
                };
            assert!((standard_normal_cdf(x) - oracle).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn central_t_special_value() {
        let expected = (ln_gamma(5.5) - ln_gamma(5.0)).exp() / (10.0 * PI).sqrt();
        assert!((noncentral_t_pdf(0.0, dof(10), 0.0) - expected).abs() < 1e-14);
        assert!((student_t_pdf(0.0, dof(10)) - expected).abs() < 1e-14);
        for x in [-3.0, -0.5, 0.7, 4.0] {
            let a = noncentral_t_pdf(x, dof(7), 0.0);
            assert!((a - student_t_pdf(x, dof(7))).abs() < 1e-14);
        }
    }

    #[test]
    fn noncentral_t_reflection() {
        for &(x, d) in &[(1.3, 0.7), (-2.0, 1.5), (0.4, -3.0), (5.0, 2.0)] {
            let a = noncentral_t_pdf(x, dof(12), d);
            let b = noncentral_t_pdf(-x, dof(12), -d);
            assert!((a - b).abs() <= 1e-14 * a.max(1e-300), "{a} vs {b}");
        }
    }

    /// f(x) = ∫ φ(x√(v/ν) − δ) √(v/ν) f_{χ²_ν}(v) dv
    fn noncentral_t_mixture_oracle(x: f64, nu: f64, delta: f64) -> f64 {
        let ln_norm = -(0.5 * nu) * 2f64.ln() - ln_gamma(0.5 * nu);
        let f = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let s = (v / nu).sqrt();
            let ln_chi = ln_norm + (0.5 * nu - 1.0) * v.ln() - 0.5 * v;
            normal_pdf(x * s - delta) * s * ln_chi.exp()
        };
        simpson(f, 0.0, nu + 60.0 * (2.0 * nu).sqrt() + 200.0, 200_000)
    }

    #[test]
    fn noncentral_t_matches_mixture_oracle() {
        for &(x, nu, d) in &[(1.0, 5.0, 1.0), (-1.5, 20.0, 2.0), (3.0, 39.0, 3.5), (-3.0, 39.0, 3.5)] {
            let a = noncentral_t_pdf(x, dof(nu as u64), d);
            let b = noncentral_t_mixture_oracle(x, nu, d);
            assert!((a - b).abs() < 1e-9 * b.max(1e-3), "x={x} nu={nu} d={d}: {a} vs {b}");
        }
    }

    #[test]
    fn noncentral_t_normalizes() {
        let tol = Tolerance {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 4000,
        };
        let total = integrate(|x| noncentral_t_pdf(x, dof(30), 2.0), -50.0, 50.0, tol).unwrap();
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
        let total = integrate(|x| noncentral_t_pdf(x, dof(3), -1.2), -400.0, 400.0, tol).unwrap();
        assert!((total.value - 1.0).abs() < 1e-4, "{}", total.value);
    }

    #[test]
    fn noncentral_f_reduces_to_central() {
        let z = Noncentrality::ZERO;
        // closed form at x = 1, d1 = d2 = 10: Γ(10)/Γ(5)² · 2⁻¹⁰
        let expected = (ln_gamma(10.0) - 2.0 * ln_gamma(5.0)).exp() / 1024.0;
        assert!((noncentral_f_pdf(1.0, dof(10), dof(10), z) - expected).abs() < 1e-14);
        assert_eq!(
            noncentral_f_pdf(0.0, dof(3), dof(10), Noncentrality::new(2.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn noncentral_f_normalizes() {
        let tol = Tolerance {
            abs: 1e-11,
            rel: 1e-11,
            max_intervals: 4000,
        };
        let nc = Noncentrality::new(3.0).unwrap();
        let total = integrate_to_infinity(|x| noncentral_f_pdf(x, dof(4), dof(20), nc), 0.0, tol).unwrap();
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn noncentral_f_mean_matches_moment() {
        // E = d2(d1+λ)/(d1(d2−2))
        let nc = Noncentrality::new(7.5).unwrap();
        let tol = Tolerance {
            abs: 1e-11,
            rel: 1e-11,
            max_intervals: 4000,
        };
        let m = integrate_to_infinity(|x| x * noncentral_f_pdf(x, dof(6), dof(30), nc), 0.0, tol).unwrap();
        let expected = 30.0 * (6.0 + 7.5) / (6.0 * 28.0);
        assert!((m.value - expected).abs() < 1e-7, "{} vs {expected}", m.value);
    }

    #[test]
    fn t_cdf_symmetry_and_tails() {
        assert_eq!(student_t_cdf(0.0, dof(4)), 0.5);
        for x in [0.3, 1.0, 2.5, 10.0] {
            let s = student_t_cdf(x, dof(9)) + student_t_cdf(-x, dof(9));
            assert!((s - 1.0).abs() < 1e-14);
        }
        // t_1 is Cauchy
        assert!((student_t_cdf(1.0, dof(1)) - 0.75).abs() < 1e-14);
        assert_eq!(student_t_sf(f64::INFINITY, dof(3)), 0.0);
    }

    #[test]
    fn chi_square_and_f_cdf_spot_values() {
        // χ²_2 is exponential with mean 2
        assert!((chi_square_cdf(3.0, dof(2)) - (1.0 - (-1.5f64).exp())).abs() < 1e-14);
        // F(2, 2): cdf = x/(1+x)
        assert!((f_cdf(3.0, dof(2), dof(2)) - 0.75).abs() < 1e-14);
    }
}
