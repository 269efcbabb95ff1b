//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use surfdec_core::{Profile, ProfileSpec};

pub fn torus() -> Profile {
    ProfileSpec::named("torus").build().expect("builtin profile")
}

pub fn perturbed_cone() -> Profile {
    ProfileSpec::named("perturbed-cone")
        .with_params(&[3.0])
        .build()
        .expect("builtin profile")
}

/// A `side^3` cube of lattice indices with unit coefficients.
pub fn cube(side: i64) -> (Vec<[i64; 3]>, Vec<Complex64>) {
    let mut idx = Vec::new();
    for a in 0..side {
        for b in 0..side {
            for c in 0..side {
                idx.push([a, b, c]);
            }
        }
    }
    let coeffs = vec![Complex64::new(1.0, 0.0); idx.len()];
    (idx, coeffs)
}
