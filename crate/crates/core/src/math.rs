//! Float helpers on top of `libm` (no `std` float methods in this crate).

pub use libm::{atan, exp, expm1, fabs, log, log10, log1p, pow, sqrt};

pub fn db_to_linear(db: f64) -> f64 {
    pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * log10(x)
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `x^alpha` with a fast path for the integer exponents that show up in
/// practice.
#[inline]
pub fn powf(x: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        let x2 = x * x;
        x2 * x2
    } else if alpha == 2.0 {
        x * x
    } else {
        pow(x, alpha)
    }
}

/// `x^n` for a non-negative integer `n` by repeated squaring.
pub fn powi(mut x: f64, mut n: u64) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= x;
        }
        x *= x;
        n >>= 1;
    }
    acc
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
