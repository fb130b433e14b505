//! The qubit family with visibility `θ1`, population imbalance `θ2` and phase `θ3`:
//!
//! ```text
//! ρ_θ = ½ [[1 + θ2,        θ1 e^{-iθ3}],
//!          [θ1 e^{iθ3},    1 - θ2     ]]
//! ```
//!
//! with Bloch vector `s_θ = (θ1 cos θ3, θ1 sin θ3, θ2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{QestError, Result};
use crate::linalg::{dot, HermMat, Vec3};

/// Smallest admissible `|θ1|`; the phase Fisher information `θ1²` vanishes at zero.
pub const MIN_ABS_THETA1: f64 = 1e-9;

/// Number of estimated parameters: 2 when the phase is known, 3 when it is a nuisance.
pub fn check_param_count(k: usize) -> Result<()> {
    if k == 2 || k == 3 {
        Ok(())
    } else {
        Err(QestError::InvalidParamCount(k))
    }
}

/// A point of the model. Always valid once constructed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaParams {
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

impl ThetaParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite() && theta3.is_finite()) {
            return Err(QestError::InvalidTheta("parameters must be finite".into()));
        }
        if theta1.abs() <= MIN_ABS_THETA1 {
            return Err(QestError::InvalidTheta(format!(
                "theta1 must be nonzero (|theta1| > {MIN_ABS_THETA1:e}); the phase is unidentifiable at theta1 = 0"
            )));
        }
        if theta1 * theta1 + theta2 * theta2 >= 1.0 {
            return Err(QestError::InvalidTheta(format!("theta1^2 + theta2^2 must be < 1 (got {})", theta1 * theta1 + theta2 * theta2)));
        }
        Ok(ThetaParams { theta1, theta2, theta3: normalize_angle(theta3) })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// Phase in `[0, 2π)`.
    pub fn theta3(&self) -> f64 {
        self.theta3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    /// First `k` components.
    pub fn components(&self, k: usize) -> Vec<f64> {
        self.as_array()[..k].to_vec()
    }

    /// Same point with a different phase.
    pub fn with_theta3(&self, theta3: f64) -> Self {
        ThetaParams { theta3: normalize_angle(theta3), ..*self }
    }

    /// Bloch vector length `s_θ`.
    pub fn bloch_length(&self) -> f64 {
        self.theta1.hypot(self.theta2)
    }

    pub fn bloch(&self) -> BlochVector {
        let (s, c) = self.theta3.sin_cos();
        BlochVector([self.theta1 * c, self.theta1 * s, self.theta2])
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix(pauli_combination(0.5, &self.bloch().0.map(|x| 0.5 * x)))
    }

    /// `∂_i s_θ` for `i < k`.
    pub fn bloch_derivatives(&self, k: usize) -> Result<Vec<Vec3>> {
        check_param_count(k)?;
        let (s, c) = self.theta3.sin_cos();
        let all = [[c, s, 0.0], [0.0, 0.0, 1.0], [-self.theta1 * s, self.theta1 * c, 0.0]];
        Ok(all[..k].to_vec())
    }

    /// `∂_i ρ_θ = ½ ∂_i s · σ`.
    pub fn state_derivatives(&self, k: usize) -> Result<Vec<HermMat>> {
        Ok(self.bloch_derivatives(k)?.iter().map(|d| pauli_combination(0.0, &d.map(|x| 0.5 * x))).collect())
    }
}

impl fmt::Display for ThetaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.theta1, self.theta2, self.theta3)
    }
}

/// Parses `"t1,t2,t3"` (radians).
impl FromStr for ThetaParams {
    type Err = QestError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(QestError::Parse(format!("theta needs 3 comma-separated values, got {}", parts.len())));
        }
        let mut v = [0.0; 3];
        for (i, p) in parts.iter().enumerate() {
            v[i] = p.parse().map_err(|_| QestError::Parse(format!("theta field {}: '{}' is not a number", i + 1, p)))?;
        }
        ThetaParams::new(v[0], v[1], v[2])
    }
}

impl<'de> Deserialize<'de> for ThetaParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            theta1: f64,
            theta2: f64,
            theta3: f64,
        }
        let r = Raw::deserialize(d)?;
        ThetaParams::new(r.theta1, r.theta2, r.theta3).map_err(serde::de::Error::custom)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed minimal difference `a - b` on the circle, in `(-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub Vec3);

impl BlochVector {
    pub fn length_squared(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    /// `(σ0 + s·σ)/2`.
    pub fn to_state(&self) -> DensityMatrix {
        DensityMatrix(pauli_combination(0.5, &self.0.map(|x| 0.5 * x)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub HermMat);

impl DensityMatrix {
    pub fn matrix(&self) -> &HermMat {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.eigenvalues2()
    }
}

/// `c0 σ0 + c · σ` as a 2×2 Hermitian matrix.
pub fn pauli_combination(c0: f64, c: &Vec3) -> HermMat {
    let m = [[c0 + c[2], 0.0], [0.0, c0 - c[2]]];
    HermMat::from_fn(2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(c[0], -c[1]),
        _ => Complex64::new(m[i][i], 0.0),
    })
}

/// Inverse of [`pauli_combination`]: `(c0, c)` with `c_μ = Tr(σ_μ h)/2`.
pub fn pauli_coefficients(h: &HermMat) -> (f64, Vec3) {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let off = h.get(0, 1);
    (0.5 * (a + d), [off.re, -off.im, 0.5 * (a - d)])
}
