use crate::error::{invalid, Error, Result};

/// Constant of the normal-reference bandwidth rule for the Epanechnikov kernel.
pub const EPANECHNIKOV_BANDWIDTH_CONSTANT: f64 = 2.345;

/// `∫K²` for the Epanechnikov kernel.
const KERNEL_ROUGHNESS: f64 = 0.6;

/// Number of points of the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub sample_size: usize,
}

impl KdeEstimate {
    /// Pointwise standard error `√(f̂(x)·∫K² / (n·h))` of the estimate.
    pub fn standard_errors(&self) -> Vec<f64> {
        let nh = self.sample_size as f64 * self.bandwidth;
        self.density
            .iter()
            .map(|f| (f * KERNEL_ROUGHNESS / nh).sqrt())
            .collect()
    }

    /// Trapezoid integral of the density over the grid.
    pub fn mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(g, f)| 0.5 * (g[1] - g[0]) * (f[0] + f[1]))
            .sum()
    }
}

fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Quantile of sorted data by linear interpolation between order statistics.
fn sorted_quantile(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo])
}

fn sorted_checked(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    if !samples.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("kde sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

/// `2.345 · min(sd, IQR/1.349) · n^{−1/5}`; falls back to the standard
/// deviation when the interquartile range is zero.
pub fn default_bandwidth(samples: &[f64]) -> Result<f64> {
    let xs = sorted_checked(samples)?;
    bandwidth_of_sorted(&xs)
}

fn bandwidth_of_sorted(xs: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let iqr = (sorted_quantile(xs, 0.75) - sorted_quantile(xs, 0.25)) / 1.349;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    Ok(EPANECHNIKOV_BANDWIDTH_CONSTANT * spread * n.powf(-0.2))
}

/// `count` equally spaced points over `[min − 4h, max + 4h]`.
pub fn default_grid(samples: &[f64], bandwidth: f64, count: usize) -> Vec<f64> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 4.0 * bandwidth;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 4.0 * bandwidth;
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// Epanechnikov kernel density estimate on `grid`; with `grid = None` the
/// default 512-point grid is used, with `bandwidth = None` the default rule.
pub fn epanechnikov_kde(samples: &[f64], grid: Option<&[f64]>, bandwidth: Option<f64>) -> Result<KdeEstimate> {
    let xs = sorted_checked(samples)?;
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(invalid("bandwidth", format!("must be positive, got {h}"))),
        None => bandwidth_of_sorted(&xs)?,
    };
    if bandwidth.is_some() && xs.first() == xs.last() {
        return Err(Error::ZeroVariance);
    }
    let grid = match grid {
        Some(g) => {
            if g.windows(2).any(|w| w[1] < w[0]) {
                return Err(invalid("grid", "must be ascending"));
            }
            g.to_vec()
        }
        None => default_grid(&xs, h, DEFAULT_GRID_POINTS),
    };
    let norm = 1.0 / (xs.len() as f64 * h);
    let density = grid
        .iter()
        .map(|&g| {
            let start = xs.partition_point(|&x| x < g - h);
            let end = xs.partition_point(|&x| x <= g + h);
            xs[start..end]
                .iter()
                .fold(0.0, |acc, &x| acc + epanechnikov((g - x) / h))
                * norm
        })
        .collect();
    Ok(KdeEstimate {
        grid,
        density,
        bandwidth: h,
        sample_size: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::sample_standard_normal;
    use crate::rng::RngStream;

    fn normals(n: usize) -> Vec<f64> {
        let mut rng = RngStream::new(12, 0).rng();
        (0..n).map(|_| sample_standard_normal(&mut rng)).collect()
    }

    #[test]
    fn constant_sample_is_rejected() {
        assert!(matches!(
            epanechnikov_kde(&[2.0; 10], None, None),
            Err(Error::ZeroVariance)
        ));
        assert!(epanechnikov_kde(&[1.0], None, None).is_err());
        assert!(epanechnikov_kde(&[1.0, 2.0], Some(&[1.0, 0.0]), None).is_err());
    }

    #[test]
    fn normal_sample() {
        let x = normals(100_000);
        let grid: Vec<f64> = (0..=1000).map(|i| -5.0 + i as f64 * 0.01).collect();
        let k = epanechnikov_kde(&x, Some(&grid), None).unwrap();
        assert!((k.mass() - 1.0).abs() < 0.01);
        let at_zero = k.density[500];
        assert!((at_zero - 0.398_942_280_4).abs() < 0.01, "{at_zero}");
        assert!(k.density.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn default_grid_holds_all_mass() {
        let x = normals(5_000);
        let k = epanechnikov_kde(&x, None, None).unwrap();
        assert_eq!(k.grid.len(), DEFAULT_GRID_POINTS);
        let m = k.mass();
        assert!((0.98..=1.001).contains(&m), "{m}");
        // zero beyond the sample range plus one bandwidth
        assert_eq!(k.density[0], 0.0);
        assert_eq!(*k.density.last().unwrap(), 0.0);
    }

    #[test]
    fn bandwidth_rule() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let sd = 2.5f64.sqrt();
        let iqr = (4.0 - 2.0) / 1.349;
        let expected = 2.345 * sd.min(iqr) * 5f64.powf(-0.2);
        assert!((default_bandwidth(&x).unwrap() - expected).abs() < 1e-14);
    }
}
