#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qpq_core::{DensityOperator, ModeRegister, PureState};
use rand::Rng;

pub fn random_pure<R: Rng>(register: &ModeRegister, rng: &mut R) -> PureState {
    let amps =
        (0..register.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    PureState::normalized(register, amps).unwrap()
}

/// `G G† / tr(G G†)` for a random `dim × rank` matrix `G`.
pub fn random_density<R: Rng>(register: &ModeRegister, rng: &mut R) -> DensityOperator {
    let dim = register.dim();
    let rank = rng.gen_range(1..=dim);
    let g = DMatrix::<Complex64>::from_fn(dim, rank, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    let data = (0..dim).flat_map(|i| (0..dim).map(move |k| (i, k))).map(|(i, k)| rho[(i, k)]).collect();
    DensityOperator::from_matrix(register, data).unwrap()
}

pub fn to_matrix(rho: &DensityOperator) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(rho.dim(), rho.dim(), rho.matrix())
}

/// Ascending eigenvalues of a Hermitian density operator.
pub fn spectrum(rho: &DensityOperator) -> Vec<f64> {
    let m = to_matrix(rho);
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn max_abs_diff(a: &DensityOperator, b: &DensityOperator) -> f64 {
    a.matrix().iter().zip(b.matrix()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
