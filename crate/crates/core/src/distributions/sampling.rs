use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};

use super::{Dof, Noncentrality};

pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn sample_chi_square<R: Rng + ?Sized>(rng: &mut R, df: Dof) -> f64 {
    ChiSquared::new(df.as_f64())
        .expect("positive degrees of freedom")
        .sample(rng)
}

/// Noncentral χ² as the Poisson mixture `χ²_{df+2K}`, `K ~ Poisson(ncp/2)`.
///
/// With `ncp = 0` no Poisson variate is drawn, so the output sequence is
/// exactly that of [`sample_chi_square`].
pub fn sample_noncentral_chi_square<R: Rng + ?Sized>(rng: &mut R, df: Dof, ncp: Noncentrality) -> f64 {
    if ncp.get() == 0.0 {
        return sample_chi_square(rng, df);
    }
    let k: f64 = Poisson::new(0.5 * ncp.get())
        .expect("finite positive Poisson mean")
        .sample(rng);
    ChiSquared::new(df.as_f64() + 2.0 * k)
        .expect("positive degrees of freedom")
        .sample(rng)
}

/// Noncentral F as `(χ²_{d1}(ncp)/d1) / (χ²_{d2}/d2)`; the numerator is drawn first.
pub fn sample_noncentral_f<R: Rng + ?Sized>(rng: &mut R, d1: Dof, d2: Dof, ncp: Noncentrality) -> f64 {
    let num = sample_noncentral_chi_square(rng, d1, ncp) / d1.as_f64();
    let den = sample_chi_square(rng, d2) / d2.as_f64();
    num / den
}
