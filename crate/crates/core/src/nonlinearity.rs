//! Odd saturating sigmoids `ψ` with `ψ′(0) = 1`, concave on `x > 0`, and
//! limits `±1`, plus a sampling validator for those properties.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar sigmoid together with its derivatives, inverse and primitive.
pub trait Sigmoid: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;
    /// Inverse on `(−1, 1)`.
    fn inverse(&self, y: f64) -> f64;
    /// `∫₀ˣ ψ(s) ds`. The default is composite Gauss–Legendre quadrature.
    fn integral(&self, x: f64) -> f64 {
        gauss_legendre(|s| self.value(s), 0.0, x)
    }
    fn name(&self) -> String;
}

const GL_NODES: [f64; 5] = [
    0.0,
    0.538_469_310_105_683_1,
    -0.538_469_310_105_683_1,
    0.906_179_845_938_664,
    -0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre on panels of width at most 1/4.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = ((b - a).abs() * 4.0).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tanh;

impl Sigmoid for Tanh {
    fn value(&self, x: f64) -> f64 {
        x.tanh()
    }
    fn derivative(&self, x: f64) -> f64 {
        let c = x.cosh();
        if c.is_finite() {
            1.0 / (c * c)
        } else {
            0.0
        }
    }
    fn second_derivative(&self, x: f64) -> f64 {
        -2.0 * x.tanh() * self.derivative(x)
    }
    fn inverse(&self, y: f64) -> f64 {
        y.atanh()
    }
    /// `ln cosh x`, evaluated without overflow.
    fn integral(&self, x: f64) -> f64 {
        let a = x.abs();
        a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
    }
    fn name(&self) -> String {
        "tanh".into()
    }
}

/// `x / (1 + |x|^k)^{1/k}`, for `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rational {
    k: f64,
}

impl Rational {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rational sigmoid needs k >= 1, got {k}"
            )));
        }
        Ok(Rational { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl Sigmoid for Rational {
    fn value(&self, x: f64) -> f64 {
        x / (1.0 + x.abs().powf(self.k)).powf(1.0 / self.k)
    }
    fn derivative(&self, x: f64) -> f64 {
        (1.0 + x.abs().powf(self.k)).powf(-1.0 / self.k - 1.0)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        let k = self.k;
        let a = x.abs();
        if a == 0.0 {
            // ψ″(0) = 0 for k > 1; for k = 1 it is ∓2, the one-sided limits.
            return if k == 1.0 { -2.0 * x.signum() } else { 0.0 };
        }
        // d/dx (1+|x|^k)^{-1/k-1} = −(k+1)|x|^{k−1} sign(x) (1+|x|^k)^{-1/k-2}
        -(k + 1.0) * a.powf(k - 1.0) * x.signum() * (1.0 + a.powf(k)).powf(-1.0 / k - 2.0)
    }
    fn inverse(&self, y: f64) -> f64 {
        y / (1.0 - y.abs().powf(self.k)).powf(1.0 / self.k)
    }
    fn integral(&self, x: f64) -> f64 {
        if self.k == 1.0 {
            let a = x.abs();
            a - a.ln_1p()
        } else {
            gauss_legendre(|s| self.value(s), 0.0, x)
        }
    }
    fn name(&self) -> String {
        format!("rational:{}", self.k)
    }
}

/// Serializable description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileSpec {
    Tanh,
    Rational { k: f64 },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Tanh
    }
}

impl ProfileSpec {
    /// Parses `tanh`, `rational` or `rational:<k>`; `params` (comma separated)
    /// may carry `k` instead.
    pub fn parse(kind: &str, params: Option<&str>) -> Result<Self> {
        let (head, inline) = match kind.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (kind, None),
        };
        let param = inline.or(params).map(str::trim).filter(|p| !p.is_empty());
        match head.trim().to_ascii_lowercase().as_str() {
            "tanh" => match param {
                None => Ok(ProfileSpec::Tanh),
                Some(p) => Err(Error::InvalidParameter(format!(
                    "tanh takes no parameters, got `{p}`"
                ))),
            },
            "rational" => {
                let k = match param {
                    None => 1.0,
                    Some(p) => {
                        let p = p.strip_prefix("k=").unwrap_or(p);
                        p.parse::<f64>().map_err(|_| {
                            Error::InvalidParameter(format!("bad rational parameter `{p}`"))
                        })?
                    }
                };
                Rational::new(k)?;
                Ok(ProfileSpec::Rational { k })
            }
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<Arc<dyn Sigmoid>> {
        Ok(match *self {
            ProfileSpec::Tanh => Arc::new(Tanh),
            ProfileSpec::Rational { k } => Arc::new(Rational::new(k)?),
        })
    }
}

/// Per-agent sigmoids.
#[derive(Debug, Clone)]
pub struct NonlinearityProfile {
    maps: Vec<Arc<dyn Sigmoid>>,
}

impl NonlinearityProfile {
    /// `n` copies of the same map.
    pub fn uniform(map: Arc<dyn Sigmoid>, n: usize) -> Self {
        NonlinearityProfile { maps: vec![map; n] }
    }

    pub fn tanh(n: usize) -> Self {
        Self::uniform(Arc::new(Tanh), n)
    }

    pub fn heterogeneous(maps: Vec<Arc<dyn Sigmoid>>) -> Self {
        NonlinearityProfile { maps }
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn map(&self, i: usize) -> &dyn Sigmoid {
        self.maps[i].as_ref()
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::ProfileSize {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.maps).map(|(&v, m)| m.value(v)).collect()
    }

    pub fn apply_derivative(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.maps)
            .map(|(&v, m)| m.derivative(v))
            .collect()
    }

    /// `V(x) = Σᵢ ∫₀^{xᵢ} ψᵢ(s) ds`.
    pub fn lyapunov(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.maps).map(|(&v, m)| m.integral(v)).sum()
    }
}

/// Builds an `n`-agent profile from a kind string such as `tanh` or
/// `rational:2`.
pub fn make_profile(kind: &str, params: Option<&str>, n: usize) -> Result<NonlinearityProfile> {
    let spec = ProfileSpec::parse(kind, params)?;
    Ok(NonlinearityProfile::uniform(spec.build()?, n))
}

/// Sampling grid for [`validate_sigmoid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
    /// Finite-difference checks skip points where `ψ′` is below this.
    pub saturation: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: 10.0,
            points: 2001,
            saturation: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub odd: bool,
    pub increasing_unit_slope: bool,
    pub bounded_saturating: bool,
    pub concave_positive: bool,
    pub inverse_ok: bool,
    pub derivative_fd_ok: bool,
    pub second_derivative_fd_ok: bool,
    pub max_derivative_fd_error: f64,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks oddness, `ψ′ > 0` with `ψ′(0) = 1`, `|ψ| < 1` with limits `±1`,
/// `ψ″ < 0` on `x > 0`, the inverse, and both derivatives against central
/// differences.
pub fn validate_sigmoid(map: &dyn Sigmoid, grid: GridSpec) -> ValidationReport {
    let n = grid.points.max(3);
    let xs: Vec<f64> = (0..n)
        .map(|k| -grid.half_width + 2.0 * grid.half_width * k as f64 / (n - 1) as f64)
        .collect();
    let mut failures = Vec::new();

    let odd = xs
        .iter()
        .all(|&x| (map.value(-x) + map.value(x)).abs() <= 1e-14);
    if !odd {
        failures.push("psi is not odd".to_string());
    }

    let slope0 = map.derivative(0.0);
    let increasing_unit_slope =
        (slope0 - 1.0).abs() <= 1e-12 && xs.iter().all(|&x| map.derivative(x) > 0.0);
    if !increasing_unit_slope {
        failures.push(format!(
            "derivative not positive with unit slope at 0 (psi'(0) = {slope0})"
        ));
    }

    let far = 1e3 * grid.half_width.max(1.0);
    let bounded_saturating = xs
        .iter()
        .all(|&x| map.value(x).abs() < 1.0 || x.abs() > 15.0)
        && (1.0 - map.value(far)).abs() <= 1e-2
        && (1.0 + map.value(-far)).abs() <= 1e-2;
    if !bounded_saturating {
        failures.push("psi is not bounded by 1 with limits +-1".to_string());
    }

    let concave_positive = xs
        .iter()
        .filter(|&&x| x > 0.0 && map.derivative(x) > grid.saturation * 1e-3)
        .all(|&x| map.second_derivative(x) < 0.0);
    if !concave_positive {
        failures.push("psi'' is not negative on x > 0".to_string());
    }

    let inverse_ok = xs
        .iter()
        .filter(|&&x| map.derivative(x) > grid.saturation)
        .all(|&x| (map.inverse(map.value(x)) - x).abs() <= 1e-8 * x.abs().max(1.0));
    if !inverse_ok {
        failures.push("inverse does not undo psi".to_string());
    }

    let h = 1e-5;
    let mut max_d1: f64 = 0.0;
    let mut max_d2: f64 = 0.0;
    for &x in &xs {
        let d = map.derivative(x);
        if d <= grid.saturation || x.abs() < 2.0 * h {
            continue;
        }
        let fd1 = (map.value(x + h) - map.value(x - h)) / (2.0 * h);
        max_d1 = max_d1.max((d - fd1).abs() / d);
        let fd2 = (map.derivative(x + h) - map.derivative(x - h)) / (2.0 * h);
        let d2 = map.second_derivative(x);
        max_d2 = max_d2.max((d2 - fd2).abs() / d2.abs().max(1e-2));
    }
    let derivative_fd_ok = max_d1 <= 1e-6;
    if !derivative_fd_ok {
        failures.push(format!(
            "psi' disagrees with finite differences (rel. error {max_d1:e})"
        ));
    }
    let second_derivative_fd_ok = max_d2 <= 1e-5;
    if !second_derivative_fd_ok {
        failures.push(format!(
            "psi'' disagrees with finite differences (rel. error {max_d2:e})"
        ));
    }

    ValidationReport {
        name: map.name(),
        odd,
        increasing_unit_slope,
        bounded_saturating,
        concave_positive,
        inverse_ok,
        derivative_fd_ok,
        second_derivative_fd_ok,
        max_derivative_fd_error: max_d1,
        failures,
    }
}

/// Validates every distinct map of a profile; one report per agent.
pub fn validate_profile(p: &NonlinearityProfile, grid: GridSpec) -> Vec<ValidationReport> {
    p.maps
        .iter()
        .map(|m| validate_sigmoid(m.as_ref(), grid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// `2 tanh(x)`: slope 2 at the origin.
    #[derive(Debug)]
    struct Steep;

    impl Sigmoid for Steep {
        fn value(&self, x: f64) -> f64 {
            (2.0 * x).tanh()
        }
        fn derivative(&self, x: f64) -> f64 {
            2.0 / (2.0 * x).cosh().powi(2)
        }
        fn second_derivative(&self, x: f64) -> f64 {
            -8.0 * (2.0 * x).tanh() / (2.0 * x).cosh().powi(2)
        }
        fn inverse(&self, y: f64) -> f64 {
            0.5 * y.atanh()
        }
        fn name(&self) -> String {
            "steep".into()
        }
    }

    #[test]
    fn tanh_basics() {
        let p = make_profile("tanh", None, 3).unwrap();
        let m = p.map(0);
        assert_eq!(m.value(0.0), 0.0);
        assert_eq!(m.derivative(0.0), 1.0);
        assert!((1.0 - m.value(10.0)).abs() <= 1e-8);
        assert!(m.second_derivative(1.0) < 0.0);
    }

    #[test]
    fn default_profiles_validate() {
        for kind in ["tanh", "rational", "rational:2", "rational:3.5"] {
            let p = make_profile(kind, None, 1).unwrap();
            let r = validate_sigmoid(p.map(0), GridSpec::default());
            assert!(r.passed(), "{kind}: {:?}", r.failures);
        }
    }

    #[test]
    fn steep_profile_fails_unit_slope() {
        let r = validate_sigmoid(&Steep, GridSpec::default());
        assert!(!r.increasing_unit_slope);
        assert!(r.odd && r.concave_positive && r.derivative_fd_ok);
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!(
            make_profile("relu", None, 2),
            Err(Error::UnknownKind(_))
        ));
        assert!(make_profile("rational", Some("k=0.5"), 2).is_err());
        assert_eq!(
            ProfileSpec::parse("rational", Some("k=2")).unwrap(),
            ProfileSpec::Rational { k: 2.0 }
        );
    }

    #[test]
    fn lyapunov_values() {
        let p = NonlinearityProfile::tanh(3);
        assert_eq!(p.lyapunov(&[0.0, 0.0, 0.0]), 0.0);
        let v = p.lyapunov(&[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v, 1.0f64.cosh().ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.4338, epsilon = 1e-4);
        // Quadrature oracle for the closed form.
        assert_abs_diff_eq!(gauss_legendre(f64::tanh, 0.0, 1.0), v, epsilon = 1e-13);
        assert_abs_diff_eq!(
            Tanh.integral(400.0),
            400.0 - std::f64::consts::LN_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rational_closed_form_integral() {
        let r = Rational::new(1.0).unwrap();
        for x in [-3.0, -0.2, 0.7, 5.0] {
            assert_abs_diff_eq!(
                r.integral(x),
                gauss_legendre(|s| r.value(s), 0.0, x),
                epsilon = 1e-12
            );
        }
    }

    proptest! {
        #[test]
        fn sigmoid_properties(x in -50.0f64..50.0, k in 1.0f64..4.0) {
            let maps: [&dyn Sigmoid; 2] = [&Tanh, &Rational::new(k).unwrap()];
            for m in maps {
                let d = m.derivative(x);
                prop_assert!(d > 0.0 || x.abs() > 15.0);
                prop_assert!(d <= 1.0);
                prop_assert_eq!(m.value(-x), -m.value(x));
                if x != 0.0 {
                    prop_assert!(x * m.value(x) > 0.0);
                    prop_assert!(m.value(x).abs() < x.abs());
                }
                let v = m.integral(x);
                prop_assert!(v >= 0.0);
                prop_assert!((v - m.integral(-x)).abs() <= 1e-12 * v.max(1.0));
            }
        }
    }
}
