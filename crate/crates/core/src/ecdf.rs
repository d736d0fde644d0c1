//! Empirical CDFs mapping raw indicator measurements into `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{AhpError, Result};
use crate::hierarchy::Direction;
use crate::scalar::Scalar;

/// How sample points are mapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EcdfConvention {
    /// `F(x) = #{values <= x} / N`; right-continuous, maps the maximum to 1.
    #[default]
    Standard,
    /// Midrank plotting position: `F(x_(r)) = (r − 0.5) / N`, ties share the midrank.
    Hazen,
}

impl std::str::FromStr for EcdfConvention {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Self::Standard),
            "hazen" => Ok(Self::Hazen),
            other => Err(AhpError::Parse(format!(
                "unknown ECDF convention '{other}' (expected 'standard' or 'hazen')"
            ))),
        }
    }
}

/// Measurements of one indicator across a cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSample<T> {
    pub indicator_id: String,
    values: Vec<T>,
}

impl<T: Scalar> IndicatorSample<T> {
    pub fn new(indicator_id: impl Into<String>, values: Vec<T>) -> Result<Self> {
        let indicator_id = indicator_id.into();
        if values.is_empty() {
            return Err(AhpError::InvalidInput(format!(
                "indicator '{indicator_id}': empty sample"
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(AhpError::InvalidInput(format!(
                "indicator '{indicator_id}': value #{k} is not finite"
            )));
        }
        Ok(Self {
            indicator_id,
            values,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Step function stored as sorted distinct values with cumulative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedEcdf<T> {
    values: Vec<T>,
    /// `cumulative[k]` = number of sample values `<= values[k]`.
    cumulative: Vec<usize>,
    n: usize,
    convention: EcdfConvention,
}

/// Fits the ECDF of a sample.
pub fn fit_ecdf<T: Scalar>(
    sample: &IndicatorSample<T>,
    convention: EcdfConvention,
) -> FittedEcdf<T> {
    let mut sorted = sample.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let mut values: Vec<T> = Vec::new();
    let mut cumulative: Vec<usize> = Vec::new();
    for (k, v) in sorted.iter().enumerate() {
        if values.last() == Some(v) {
            *cumulative.last_mut().unwrap() = k + 1;
        } else {
            values.push(*v);
            cumulative.push(k + 1);
        }
    }
    FittedEcdf {
        values,
        cumulative,
        n: sorted.len(),
        convention,
    }
}

impl<T: Scalar> FittedEcdf<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> EcdfConvention {
        self.convention
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    /// All observations share one value.
    pub fn is_degenerate(&self) -> bool {
        self.values.len() == 1
    }

    /// Fewer than N/2 distinct values: the mapped variable is far from uniform.
    pub fn is_coarse(&self) -> bool {
        2 * self.values.len() < self.n
    }

    /// `(#{values < x}, #{values == x})`.
    fn counts(&self, x: T) -> (usize, usize) {
        let k = self.values.partition_point(|v| *v <= x);
        if k == 0 {
            return (0, 0);
        }
        let le = self.cumulative[k - 1];
        if self.values[k - 1] == x {
            let lt = if k >= 2 { self.cumulative[k - 2] } else { 0 };
            (lt, le - lt)
        } else {
            (le, 0)
        }
    }

    /// Twice the numerator of `F(x)` over `N`, kept integral so sample points
    /// map to exact ratios.
    fn doubled_rank(&self, x: T) -> usize {
        let (lt, eq) = self.counts(x);
        match self.convention {
            EcdfConvention::Standard => 2 * (lt + eq),
            EcdfConvention::Hazen => 2 * lt + eq,
        }
    }

    /// Evaluates `F(x)`.
    pub fn evaluate(&self, x: T) -> T {
        T::from_usize_lossy(self.doubled_rank(x)) / T::from_usize_lossy(2 * self.n)
    }
}

/// Benefit indicators map to `F(x)`, cost indicators to `1 − F(x)`.
pub fn normalize_measurement<T: Scalar>(ecdf: &FittedEcdf<T>, x: T, direction: Direction) -> T {
    let f = ecdf.evaluate(x);
    match direction {
        Direction::Benefit => f,
        Direction::Cost => T::one() - f,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityDiagnostic<T> {
    /// `F(x_k)` for each sample point, in sample order.
    pub mapped: Vec<T>,
    pub mean: T,
    /// Constant sample; every point maps to the same value.
    pub degenerate: bool,
    /// Fewer than N/2 distinct values.
    pub coarse: bool,
}

/// Maps a sample through its own ECDF (standard convention) and reports the
/// mean, which is `(N + 1) / (2N)` for N distinct values.
pub fn uniformity_diagnostic<T: Scalar>(
    sample: &IndicatorSample<T>,
) -> Result<UniformityDiagnostic<T>> {
    let n = sample.values.len();
    if n < 2 {
        return Err(AhpError::InvalidInput(format!(
            "indicator '{}': uniformity diagnostic needs N >= 2",
            sample.indicator_id
        )));
    }
    let ecdf = fit_ecdf(sample, EcdfConvention::Standard);
    let ranks: Vec<usize> = sample
        .values
        .iter()
        .map(|x| ecdf.doubled_rank(*x))
        .collect();
    let mapped = ranks
        .iter()
        .map(|r| T::from_usize_lossy(*r) / T::from_usize_lossy(2 * n))
        .collect();
    let total: usize = ranks.iter().sum();
    let mean = T::from_usize_lossy(total) / T::from_usize_lossy(2 * n * n);
    Ok(UniformityDiagnostic {
        mapped,
        mean,
        degenerate: ecdf.is_degenerate(),
        coarse: ecdf.is_coarse(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(values: &[f64]) -> IndicatorSample<f64> {
        IndicatorSample::new("x", values.to_vec()).unwrap()
    }

    #[test]
    fn standard_examples() {
        let e = fit_ecdf(&sample(&[10.0, 20.0, 30.0]), EcdfConvention::Standard);
        assert_eq!(e.evaluate(20.0), 2.0 / 3.0);
        assert_eq!(e.evaluate(5.0), 0.0);
        assert_eq!(e.evaluate(30.0), 1.0);
        assert_eq!(e.evaluate(25.0), 2.0 / 3.0);
        assert_eq!(e.evaluate(1e9), 1.0);
        let e = fit_ecdf(&sample(&[7.0, 7.0, 7.0]), EcdfConvention::Standard);
        assert_eq!(e.evaluate(7.0), 1.0);
        assert!(e.is_degenerate() && e.is_coarse());
    }

    #[test]
    fn hazen_midranks() {
        let e = fit_ecdf(&sample(&[10.0, 20.0, 30.0, 40.0]), EcdfConvention::Hazen);
        assert_eq!(e.evaluate(10.0), 0.125);
        assert_eq!(e.evaluate(40.0), 0.875);
        // ties at 20 occupy ranks 2 and 3; midrank 2.5 -> (2.5 - 0.5) / 4
        let e = fit_ecdf(&sample(&[10.0, 20.0, 20.0, 40.0]), EcdfConvention::Hazen);
        assert_eq!(e.evaluate(20.0), 0.5);
        assert_eq!(e.evaluate(15.0), 0.25);
    }

    #[test]
    fn direction_mapping() {
        let e = fit_ecdf(&sample(&[10.0, 20.0, 30.0]), EcdfConvention::Standard);
        assert_eq!(
            normalize_measurement(&e, 20.0, Direction::Benefit),
            2.0 / 3.0
        );
        assert!((normalize_measurement(&e, 20.0, Direction::Cost) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(normalize_measurement(&e, 1.0, Direction::Benefit), 0.0);
        assert_eq!(normalize_measurement(&e, 1.0, Direction::Cost), 1.0);
    }

    #[test]
    fn uniformity_examples() {
        let d = uniformity_diagnostic(&sample(&[3.0, 1.0, 4.0, 2.0])).unwrap();
        assert_eq!(d.mapped, vec![0.75, 0.25, 1.0, 0.5]);
        assert_eq!(d.mean, 0.625);
        let d = uniformity_diagnostic(&sample(&[1.0, 2.0])).unwrap();
        assert_eq!(d.mean, 0.75);
        let d = uniformity_diagnostic(&sample(&[5.0, 5.0, 5.0])).unwrap();
        assert!(d.mapped.iter().all(|m| *m == 1.0));
        assert!(d.degenerate);
        assert!(uniformity_diagnostic(&sample(&[1.0])).is_err());
    }

    #[test]
    fn sample_validation() {
        assert!(IndicatorSample::<f64>::new("x", vec![]).is_err());
        assert!(IndicatorSample::new("x", vec![1.0, f64::NAN]).is_err());
        assert!(IndicatorSample::new("x", vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn convention_parsing() {
        assert_eq!(
            "Hazen".parse::<EcdfConvention>().unwrap(),
            EcdfConvention::Hazen
        );
        assert!("weibull".parse::<EcdfConvention>().is_err());
    }
}
