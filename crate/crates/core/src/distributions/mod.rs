//! Univariate laws used by the stochastic representations: samplers,
//! densities, distribution functions and the Student-t quantile.

mod density;
mod quantile;
mod sampling;

pub use density::{
    chi_square_cdf, f_cdf, f_pdf, noncentral_f_pdf, noncentral_t_pdf, normal_pdf, standard_normal_cdf, student_t_cdf,
    student_t_pdf, student_t_sf,
};
pub use quantile::student_t_quantile;
pub use sampling::{sample_chi_square, sample_noncentral_chi_square, sample_noncentral_f, sample_standard_normal};

use crate::error::{invalid, Result};

/// Degrees of freedom, at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Dof(u64);

impl Dof {
    pub fn new(value: u64) -> Result<Self> {
        if value == 0 {
            return Err(invalid("dof", "degrees of freedom must be at least 1"));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Noncentrality parameter of a χ² or F law.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Noncentrality(f64);

impl Noncentrality {
    pub const ZERO: Noncentrality = Noncentrality(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(invalid(
                "noncentrality",
                format!("must be finite and nonnegative, got {value}"),
            ));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}
