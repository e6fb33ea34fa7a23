// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random matrices and states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, r, trace, CMatrix};

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_matrix(n, n, rng).qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { r(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `n×k` matrix with orthonormal columns.
pub fn random_isometry<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CMatrix {
    random_unitary(n, rng).columns(0, k).into_owned()
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    (&g + g.adjoint()) * r(0.5)
}

/// Full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    let rho = &g * g.adjoint();
    let t = trace(&rho);
    rho / t
}

/// Normalized column vector.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let v = random_matrix(n, 1, rng);
    let norm = v.norm();
    v / r(norm)
}
