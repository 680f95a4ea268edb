//! Power-law interfacial heat transfer coefficient `h(t) = A (t / t0)^B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of the IHTC time law. `a` and `b` are the unknowns of the
/// inverse problem; `t0` is a fixed reference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IhtcParams<T> {
    /// Coefficient, W/(m^2 K).
    pub a: T,
    /// Exponent (dimensionless).
    pub b: T,
    /// Reference time, s.
    pub t0: T,
}

impl<T: Scalar> IhtcParams<T> {
    /// Parameters with the standard reference time of one second.
    pub fn new(a: T, b: T) -> Self {
        Self { a, b, t0: T::one() }
    }

    /// Builds parameters from an optimizer vector `[A, B]`.
    pub fn from_slice(theta: &[T]) -> Self {
        Self::new(theta[0], theta[1])
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.a, self.b]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.t0.is_finite()) {
            return Err(Error::NonFinite("ihtc parameters"));
        }
        if self.a < T::zero() {
            return Err(Error::invalid(
                "ihtc",
                format!("A must be >= 0, got {}", self.a),
            ));
        }
        if self.t0 <= T::zero() {
            return Err(Error::invalid(
                "ihtc",
                format!("t0 must be > 0, got {}", self.t0),
            ));
        }
        Ok(())
    }

    /// Heat transfer coefficient at time `t` (s).
    pub fn eval(&self, t: T) -> Result<T> {
        self.validate()?;
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if t <= T::zero() && self.b < T::zero() {
            return Err(Error::invalid(
                "time",
                format!("h(t) is singular at t = {t} for B < 0"),
            ));
        }
        if t < T::zero() {
            return Err(Error::invalid("time", format!("negative time {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, t: T) -> T {
        if self.b == T::zero() {
            self.a
        } else {
            self.a * (t / self.t0).powf(self.b)
        }
    }
}
