//! Truncated Taylor series arithmetic.
//!
//! A [`Series`] holds the normalized coefficients `c_m = f^{(m)}(r0) / m!`
//! of a function around an expansion point. Arithmetic propagates all
//! coefficients exactly (up to rounding) through products, reciprocals and
//! square roots, which is how the profile derivatives are obtained.

use smallvec::SmallVec;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) type Coeffs = SmallVec<[f64; 12]>;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Coeffs,
}

impl Series {
    /// The constant `value`, truncated to `len` coefficients.
    pub fn constant(value: f64, len: usize) -> Self {
        let mut c = Coeffs::from_elem(0.0, len.max(1));
        c[0] = value;
        Self { c }
    }

    /// The independent variable `r` expanded around `r0`.
    pub fn variable(r0: f64, len: usize) -> Self {
        let mut s = Self::constant(r0, len);
        if s.c.len() > 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        Self {
            c: Coeffs::from_slice(coeffs),
        }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `m`-th derivative at the expansion point, `m! * c_m`.
    pub fn derivative(&self, m: usize) -> f64 {
        self.c[m] * factorial(m)
    }

    /// All derivatives `f^{(m)}(r0)` for `m = 0..len`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                if m > 0 {
                    fact *= m as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            c: self.c.iter().map(|&x| x * k).collect(),
        }
    }

    pub fn add_const(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.c[0] += k;
        out
    }

    pub fn recip(&self) -> Self {
        let a = &self.c;
        let n = a.len();
        let mut b = Coeffs::from_elem(0.0, n);
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += a[j] * b[k - j];
            }
            b[k] = -s * b[0];
        }
        Self { c: b }
    }

    /// Principal square root; the constant term must be positive.
    pub fn sqrt(&self) -> Self {
        let a = &self.c;
        let n = a.len();
        let mut b = Coeffs::from_elem(0.0, n);
        b[0] = a[0].sqrt();
        for k in 1..n {
            let mut s = a[k];
            for j in 1..k {
                s -= b[j] * b[k - j];
            }
            b[k] = s / (2.0 * b[0]);
        }
        Self { c: b }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut out = Self::constant(1.0, self.len());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Evaluates the polynomial `sum coeffs[m] * x^m` at the series `x` (Horner).
    pub fn polynomial(coeffs: &[f64], x: &Series) -> Series {
        let mut acc = Series::constant(0.0, x.len());
        for &c in coeffs.iter().rev() {
            acc = (&acc * x).add_const(c);
        }
        acc
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        debug_assert_eq!(self.len(), rhs.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        debug_assert_eq!(self.len(), rhs.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.len().min(rhs.len());
        let mut c = Coeffs::from_elem(0.0, n);
        for (i, &a) in self.c.iter().take(n).enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.c.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Series { c }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}
