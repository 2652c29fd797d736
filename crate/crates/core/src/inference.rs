//! Exact tests on linear combinations of the discriminant coefficients and
//! the density of the test statistic away from the null.

use nalgebra::DVector;
use serde::Serialize;

use crate::distributions::{noncentral_f_pdf, noncentral_t_pdf, student_t_quantile, student_t_sf, Dof, Noncentrality};
use crate::error::{invalid, Error, Result};
use crate::model::{PooledEstimates, ProblemDims};
use crate::quadrature::{integrate_to_infinity, Tolerance};

/// Contrast `l` with `+1` at position `i`, `−1` at position `j` (1-based),
/// so that `lᵀa = a_i − a_j`.
pub fn contrast_vector(p: usize, i: usize, j: usize) -> Result<DVector<f64>> {
    if i == 0 || j == 0 || i > p || j > p {
        return Err(invalid(
            "contrast",
            format!("indices must lie in 1..={p}, got ({i}, {j})"),
        ));
    }
    if i == j {
        return Err(invalid("contrast", "indices must differ"));
    }
    let mut l = DVector::zeros(p);
    l[i - 1] = 1.0;
    l[j - 1] = -1.0;
    Ok(l)
}

/// `T = √(n₁+n₂−p−1) · lᵀS⁻¹D / (√(lᵀS⁻¹l) · √((n₁+n₂−2)λ + DᵀR̂_lD))`,
/// `D = x̄⁽¹⁾ − x̄⁽²⁾`, `R̂_l = S⁻¹ − S⁻¹llᵀS⁻¹/lᵀS⁻¹l`, `S = S_pl`.
pub fn test_statistic(est: &PooledEstimates, l: &DVector<f64>) -> Result<f64> {
    let dims = est.dims();
    if l.len() != dims.p() {
        return Err(Error::DimensionMismatch {
            expected: dims.p(),
            found: l.len(),
        });
    }
    let s_inv_l = est.solve(l);
    let l_quad = l.dot(&s_inv_l);
    if !(l_quad > 0.0) {
        return Err(invalid("l", format!("lᵀS⁻¹l must be positive, got {l_quad}")));
    }
    let d = est.mean_diff();
    let l_s_d = s_inv_l.dot(&d);
    let d_s_d = d.dot(&est.solve(&d));
    // DᵀR̂_lD = DᵀS⁻¹D − (lᵀS⁻¹D)²/lᵀS⁻¹l, nonnegative up to rounding
    let d_r_d = (d_s_d - l_s_d * l_s_d / l_quad).max(0.0);
    let denom = l_quad.sqrt() * (dims.pooled_dof() * dims.lambda() + d_r_d).sqrt();
    Ok(dims.xi_dof().as_f64().sqrt() * l_s_d / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSide {
    TwoSided,
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: Dof,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub critical_value: f64,
    pub side: TestSide,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Rejects `a_i = a_j` when `|T| > t_{n₁+n₂−p−1; 1−α/2}`.
pub fn two_sided_test(t_value: f64, dims: ProblemDims, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !t_value.is_finite() {
        return Err(Error::NonFinite("test statistic"));
    }
    let dof = dims.xi_dof();
    let critical_value = student_t_quantile(1.0 - 0.5 * alpha, dof)?;
    Ok(TestResult {
        statistic: t_value,
        dof,
        p_value: (2.0 * student_t_sf(t_value.abs(), dof)).min(1.0),
        reject: t_value.abs() > critical_value,
        alpha,
        critical_value,
        side: TestSide::TwoSided,
    })
}

/// Rejects `a_i ≤ a_j` when `T > t_{n₁+n₂−p−1; 1−α}`.
pub fn one_sided_test(t_value: f64, dims: ProblemDims, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !t_value.is_finite() {
        return Err(Error::NonFinite("test statistic"));
    }
    let dof = dims.xi_dof();
    let critical_value = student_t_quantile(1.0 - alpha, dof)?;
    Ok(TestResult {
        statistic: t_value,
        dof,
        p_value: student_t_sf(t_value, dof),
        reject: t_value > critical_value,
        alpha,
        critical_value,
        side: TestSide::OneSided,
    })
}

/// Parameters of the density of `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTDensityParams {
    /// `lᵀΣ⁻¹(μ₁−μ₂) / √(lᵀΣ⁻¹l)`, the normalized form.
    pub eta: f64,
    /// `(μ₁−μ₂)ᵀR_l(μ₁−μ₂)`.
    pub s: f64,
    pub dims: ProblemDims,
}

impl FTDensityParams {
    pub fn new(eta: f64, s: f64, dims: ProblemDims) -> Result<Self> {
        if !eta.is_finite() {
            return Err(invalid("eta", "must be finite"));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("must be finite and nonnegative, got {s}")));
        }
        Ok(Self { eta, s, dims })
    }
}

/// Quadrature tolerance for the mixing integral.
const DENSITY_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-9,
    max_intervals: 4000,
};

/// Density of `T` at `x`:
///
/// `f_T(x) = ∫₀^∞ f_{F(p−1, n₁+n₂−p, s/λ)}(u) · f_{t(n₁+n₂−p−1, δ(u))}(x) du`,
/// `δ(u) = η / √(λ + λ(p−1)u/(n₁+n₂−p))`,
///
/// which is the displayed integral over `y = λ(p−1)u/(n₁+n₂−p)` after the
/// change of variables. For `p = 1` the mixture collapses to a single
/// noncentral t with `δ = η/√λ`.
pub fn density_t(x: f64, params: &FTDensityParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("density argument"));
    }
    let dims = params.dims;
    let lambda = dims.lambda();
    let t_dof = dims.xi_dof();
    let Some(d1) = dims.residual_dof() else {
        return Ok(noncentral_t_pdf(x, t_dof, params.eta / lambda.sqrt()));
    };
    let d2 = dims.w_dof();
    let ncp = Noncentrality::new(params.s / lambda)?;
    let scale = lambda * d1.as_f64() / d2.as_f64();
    let integral = integrate_to_infinity(
        |u| {
            let delta = params.eta / (lambda + scale * u).sqrt();
            noncentral_f_pdf(u, d1, d2, ncp) * noncentral_t_pdf(x, t_dof, delta)
        },
        0.0,
        DENSITY_TOLERANCE,
    )?;
    Ok(integral.value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::student_t_pdf;
    use crate::model::PooledEstimates;
    use crate::quadrature::integrate;
    use nalgebra::DMatrix;
    use nalgebra::{dmatrix, dvector};

    fn est() -> PooledEstimates {
        PooledEstimates::from_parts(
            dvector![1.0, 0.5, -0.2],
            dvector![0.3, 0.9, 0.1],
            dmatrix![2.0, 0.3, 0.1; 0.3, 1.0, -0.2; 0.1, -0.2, 1.5],
            ProblemDims::new(3, 12, 15).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn contrast() {
        assert_eq!(contrast_vector(4, 1, 3).unwrap(), dvector![1.0, 0.0, -1.0, 0.0]);
        assert!(contrast_vector(4, 2, 2).is_err());
        assert!(contrast_vector(4, 0, 2).is_err());
        assert!(contrast_vector(4, 1, 5).is_err());
    }

    #[test]
    fn statistic_zero_and_scale_invariant() {
        let e = est();
        let l = contrast_vector(3, 1, 2).unwrap();
        let t1 = test_statistic(&e, &l).unwrap();
        let t2 = test_statistic(&e, &(&l * 2.0)).unwrap();
        assert!((t1 - t2).abs() < 1e-12);
        let same = PooledEstimates::from_parts(
            dvector![1.0, 2.0, 3.0],
            dvector![1.0, 2.0, 3.0],
            DMatrix::identity(3, 3),
            ProblemDims::new(3, 12, 15).unwrap(),
        )
        .unwrap();
        assert_eq!(test_statistic(&same, &l).unwrap(), 0.0);
        assert!(test_statistic(&e, &dvector![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn statistic_matches_explicit_inverse() {
        let e = est();
        let l = dvector![0.4, -1.0, 2.0];
        let s_inv = e.s_pl().clone().try_inverse().unwrap();
        let d = e.mean_diff();
        let q = (l.transpose() * &s_inv * &l)[0];
        let r = &s_inv - (&s_inv * &l * l.transpose() * &s_inv) / q;
        let drd = (d.transpose() * r * &d)[0];
        let dims = e.dims();
        let expected = (dims.xi_dof().as_f64()).sqrt() * (l.transpose() * &s_inv * &d)[0]
            / (q.sqrt() * (dims.pooled_dof() * dims.lambda() + drd).sqrt());
        assert!((test_statistic(&e, &l).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn test_decisions() {
        // dof = 20
        let dims = ProblemDims::new(9, 15, 15).unwrap();
        assert_eq!(dims.xi_dof().get(), 20);
        let r = two_sided_test(0.0, dims, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
        let crit = student_t_quantile(0.975, dims.xi_dof()).unwrap();
        assert!((crit - 2.085_963_447).abs() < 1e-8);
        assert!(!two_sided_test(crit, dims, 0.05).unwrap().reject);
        assert!(two_sided_test(crit + 1e-9, dims, 0.05).unwrap().reject);
        assert!(two_sided_test(-crit - 1e-9, dims, 0.05).unwrap().reject);
        let r = one_sided_test(-5.0, dims, 0.05).unwrap();
        assert!(r.p_value > 0.9999 && !r.reject);
        assert!(two_sided_test(1.0, dims, 1.0).is_err());
        assert!(one_sided_test(1.0, dims, 0.0).is_err());
    }

    #[test]
    fn p_values_monotone() {
        let dims = ProblemDims::new(5, 10, 10).unwrap();
        let mut prev2 = 2.0;
        let mut prev1 = 2.0;
        for i in 0..60 {
            let t = -3.0 + 0.1 * i as f64;
            let one = one_sided_test(t, dims, 0.05).unwrap().p_value;
            assert!(one < prev1);
            prev1 = one;
            if t > 0.0 {
                let two = two_sided_test(t, dims, 0.05).unwrap().p_value;
                assert!(two < prev2);
                prev2 = two;
            }
        }
    }

    #[test]
    fn density_null_is_central_t() {
        let dims = ProblemDims::new(10, 25, 25).unwrap();
        let p = FTDensityParams::new(0.0, 0.0, dims).unwrap();
        for x in [0.0, 1.0, 2.0] {
            let f = density_t(x, &p).unwrap();
            assert!((f - student_t_pdf(x, dims.xi_dof())).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn density_normalizes() {
        let dims = ProblemDims::new(10, 25, 25).unwrap();
        let p = FTDensityParams::new(1.0, 2.0, dims).unwrap();
        let tol = Tolerance {
            abs: 1e-8,
            rel: 1e-8,
            max_intervals: 500,
        };
        let total = integrate(|x| density_t(x, &p).unwrap(), -30.0, 40.0, tol).unwrap();
        assert!((total.value - 1.0).abs() < 1e-5, "{}", total.value);
    }

    #[test]
    fn density_p_one() {
        let dims = ProblemDims::new(1, 6, 6).unwrap();
        let p = FTDensityParams::new(0.7, 0.0, dims).unwrap();
        let f = density_t(0.5, &p).unwrap();
        let expected = noncentral_t_pdf(0.5, dims.xi_dof(), 0.7 / dims.lambda().sqrt());
        assert_eq!(f, expected);
    }
}
