use std::fmt;

use num_complex::Complex64;

/// Value of a meromorphic function: a finite complex number or the point at
/// infinity. The Weyl function takes the value `Infinite` exactly at the
/// eigenvalues, so samples must be able to carry that tag explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinite,
}

impl ExtendedComplex {
    pub fn from_real(v: f64) -> Self {
        ExtendedComplex::Finite(Complex64::new(v, 0.0))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtendedComplex::Finite(v) => Some(v),
            ExtendedComplex::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinite)
    }

    /// Reciprocal on the Riemann sphere: 1/inf = 0 and 1/0 = inf.
    pub fn recip(self) -> Self {
        match self {
            ExtendedComplex::Infinite => ExtendedComplex::Finite(Complex64::new(0.0, 0.0)),
            ExtendedComplex::Finite(v) if v.norm() == 0.0 => ExtendedComplex::Infinite,
            ExtendedComplex::Finite(v) => ExtendedComplex::Finite(v.inv()),
        }
    }
}

/// Square root of z with nonnegative imaginary part (the branch used for
/// rho = sqrt(lambda) throughout).
pub(crate) fn sqrt_im_nonneg(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(v: Complex64) -> Self {
        ExtendedComplex::Finite(v)
    }
}

impl From<f64> for ExtendedComplex {
    fn from(v: f64) -> Self {
        ExtendedComplex::from_real(v)
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Finite(v) => write!(f, "{}", v),
            ExtendedComplex::Infinite => write!(f, "inf"),
        }
    }
}
