//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the simulator can run on: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self;

    /// Widening conversion used when values leave the generic core.
    fn to_f64_lossless(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

/// Largest argument accepted by [`small_sin_cos`], rad.
pub const SMALL_ANGLE_LIMIT: f64 = 0.6;

/// `(sin x, cos x)` by truncated Taylor series for `|x| <= 0.6`, accurate to
/// about one ulp in double precision. Larger arguments use `sin_cos`.
#[inline]
pub fn small_sin_cos<T: Scalar>(x: T) -> (T, T) {
    if !(x.abs() <= T::lit(SMALL_ANGLE_LIMIT)) {
        return x.sin_cos();
    }
    let x2 = x * x;
    // Coefficients 1/(2k+1)! and 1/(2k)! through x^17 and x^18.
    let s = T::lit(1.0 / 355_687_428_096_000.0);
    let s = s * x2 * T::lit(-1.0) + T::lit(1.0 / 1_307_674_368_000.0);
    let s = s * x2 - T::lit(1.0 / 6_227_020_800.0);
    let s = s * x2 + T::lit(1.0 / 39_916_800.0);
    let s = s * x2 - T::lit(1.0 / 362_880.0);
    let s = s * x2 + T::lit(1.0 / 5_040.0);
    let s = s * x2 - T::lit(1.0 / 120.0);
    let s = s * x2 + T::lit(1.0 / 6.0);
    let sin = x - x * x2 * s;
    let c = T::lit(1.0 / 6_402_373_705_728_000.0);
    let c = c * x2 * T::lit(-1.0) + T::lit(1.0 / 20_922_789_888_000.0);
    let c = c * x2 - T::lit(1.0 / 87_178_291_200.0);
    let c = c * x2 + T::lit(1.0 / 479_001_600.0);
    let c = c * x2 - T::lit(1.0 / 3_628_800.0);
    let c = c * x2 + T::lit(1.0 / 40_320.0);
    let c = c * x2 - T::lit(1.0 / 720.0);
    let c = c * x2 + T::lit(1.0 / 24.0);
    let c = c * x2 - T::lit(0.5);
    let cos = T::one() + x2 * c;
    (sin, cos)
}

/// Planar cross product `a × b` (z component).
#[inline]
pub fn cross<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm<T: Scalar>(v: [T; 2]) -> T {
    v[0].hypot(v[1])
}

/// Wraps an angle in degrees into `(0, 360]`.
pub fn wrap_deg<T: Scalar>(deg: T) -> T {
    let full = T::lit(360.0);
    let r = deg % full;
    if r <= T::zero() {
        r + full
    } else {
        r
    }
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_deg_signed<T: Scalar>(deg: T) -> T {
    let w = wrap_deg(deg);
    if w > T::lit(180.0) {
        w - T::lit(360.0)
    } else {
        w
    }
}
