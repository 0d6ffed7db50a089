//! Scalar abstraction shared by the state kernel, the distance measures and
//! the Pauli-coefficient algebra.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Besides arithmetic this carries the numerical floors used throughout the
/// kernel, since a single `1e-12` cutoff is meaningless in single precision.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Eigenvalues below this are treated as zero in entropy and support
    /// computations.
    const EIG_FLOOR: f64;
    /// Default validity tolerance for freshly built states.
    const DEFAULT_TOL: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    #[inline]
    fn eig_floor() -> Self {
        Self::lit(Self::EIG_FLOOR)
    }

    #[inline]
    fn default_tol() -> Self {
        Self::lit(Self::DEFAULT_TOL)
    }
}

impl Real for f64 {
    const EIG_FLOOR: f64 = 1e-12;
    const DEFAULT_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const EIG_FLOOR: f64 = 1e-6;
    const DEFAULT_TOL: f64 = 1e-4;
}

pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn cr<T: Real>(re: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::zero())
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `-x log2 x`, zero below the eigenvalue floor.
#[inline]
pub fn entropy_term<T: Real>(x: T) -> T {
    if x <= T::eig_floor() {
        T::zero()
    } else {
        -x * x.log2()
    }
}
