//! Compensated summation.
//!
//! Observable assembly reduces over hundreds of sectors in a fixed order;
//! Neumaier compensation keeps those reductions deterministic *and* accurate.

use num_complex::Complex;

use crate::scalar::Real;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct Kahan<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for Kahan<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Kahan<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values (componentwise).
#[derive(Debug, Clone, Copy)]
pub struct CKahan<T> {
    re: Kahan<T>,
    im: Kahan<T>,
}

impl<T: Real> Default for CKahan<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CKahan<T> {
    pub fn new() -> Self {
        Self {
            re: Kahan::new(),
            im: Kahan::new(),
        }
    }

    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn total(&self) -> Complex<T> {
        Complex::new(self.re.total(), self.im.total())
    }
}
