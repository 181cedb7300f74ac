//! Randomized invariant checks shared by the property tests and the
//! acceptance run.

#![allow(dead_code)]

use faer::{Mat, Side};
use hysteresis_lab::fock::{build_operators, DensityMatrix, FockOperator, SystemParams};
use hysteresis_lab::lindblad::{evolve_with, lindblad_rhs, single_mode_generator, sweep_generator, EvolveOptions, SweepProtocol};
use hysteresis_lab::ode::Tolerances;
use hysteresis_lab::steady_state::steady_state_detailed;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 200;

#[derive(Debug, Clone)]
pub struct Case {
    pub params: SystemParams,
    pub f: f64,
    pub rho: DensityMatrix,
}

/// Random small system, drive and mixed state `MM†/Tr`.
pub fn case() -> impl Strategy<Value = Case> {
    (2usize..=7, -3.0..3.0f64, -2.0..2.0f64, 0.0..0.3f64, 0.0..2.0f64).prop_flat_map(|(d, delta, u, n_th, f)| {
        prop::collection::vec(-1.0..1.0f64, 2 * d * d).prop_map(move |m| {
            let params = SystemParams::new(delta, u, d - 1).unwrap().with_thermal_occupation(n_th).unwrap();
            Case { params, f, rho: mixed_state(d, &m) }
        })
    })
}

pub fn mixed_state(d: usize, m: &[f64]) -> DensityMatrix {
    let z = |i: usize, j: usize| Complex64::new(m[2 * (i * d + j)], m[2 * (i * d + j) + 1]);
    let mut e = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            e[i * d + j] = (0..d).map(|k| z(i, k) * z(j, k).conj()).sum();
        }
    }
    let tr: f64 = (0..d).map(|i| e[i * d + i].re).sum::<f64>().max(1e-12);
    for v in &mut e {
        *v /= tr;
    }
    // Exact Hermitian symmetry is restored after the division.
    for i in 0..d {
        e[i * d + i].im = 0.0;
        for j in 0..i {
            e[i * d + j] = e[j * d + i].conj();
        }
    }
    DensityMatrix::from_entries(d, e).unwrap()
}

pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let m = Mat::<Complex64>::from_fn(d, d, |i, j| rho.get(i, j));
    m.self_adjoint_eigenvalues(Side::Lower).unwrap()[0]
}

fn max_abs(op: &FockOperator) -> f64 {
    op.entries().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `Tr L(ρ) = 0` and `L(ρ)† = L(ρ)`.
pub fn rhs_is_traceless_and_hermitian(c: &Case) -> Result<(), TestCaseError> {
    let d = lindblad_rhs(&c.rho, c.f, &c.params).unwrap();
    let scale = d.entries().iter().map(|v| v.norm()).fold(1.0, f64::max);
    prop_assert!(d.trace().norm() < 1e-12 * scale, "trace {}", d.trace());
    prop_assert!(d.hermiticity_defect() < 1e-12 * scale);
    Ok(())
}

/// Along a short sweep the state keeps unit trace, stays Hermitian and has no
/// negative eigenvalue.
pub fn evolution_stays_physical(c: &Case) -> Result<(), TestCaseError> {
    let gen = single_mode_generator(&c.params).unwrap();
    let p = SweepProtocol::new(0.0, c.f.max(0.1), 1.5).unwrap().with_samples(5).unwrap();
    let legs = sweep_generator(&gen, &c.rho, &p, &EvolveOptions::default(), |r| (min_eigenvalue(r), 0.0)).unwrap();
    prop_assert!(legs.invariants.max_trace_error < 1e-9, "{:?}", legs.invariants);
    prop_assert!(legs.invariants.max_hermiticity_defect < 1e-12);
    let worst = legs.up.iter().chain(&legs.down).cloned().fold(f64::INFINITY, f64::min);
    prop_assert!(worst > -1e-8, "min eigenvalue {worst}");
    Ok(())
}

/// Two runs are bit-identical, and tightening the tolerances moves the result
/// by no more than the looser tolerance allows.
pub fn integrator_is_deterministic_and_consistent(c: &Case) -> Result<(), TestCaseError> {
    let p = SweepProtocol::new(0.0, c.f.max(0.1), 2.0).unwrap().with_samples(7).unwrap();
    let loose = EvolveOptions {
        tolerances: Tolerances { rtol: 1e-7, atol: 1e-9 },
        ..Default::default()
    };
    let tight = EvolveOptions {
        tolerances: Tolerances { rtol: 1e-11, atol: 1e-13 },
        ..Default::default()
    };
    let a = evolve_with(&c.rho, &p, &c.params, &loose).unwrap();
    let b = evolve_with(&c.rho, &p, &c.params, &loose).unwrap();
    prop_assert_eq!(&a, &b);
    let t = evolve_with(&c.rho, &p, &c.params, &tight).unwrap();
    let dev = a
        .n_up
        .iter()
        .chain(&a.n_down)
        .zip(t.n_up.iter().chain(&t.n_down))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    prop_assert!(dev < 1e-5, "deviation {dev}");
    Ok(())
}

/// `[a, a†] = 1 − (N+1)|N⟩⟨N|`, `a†a = n`, `[n, a] = −a`, `H = H†`.
pub fn operator_algebra(c: &Case) -> Result<(), TestCaseError> {
    let ops = build_operators(&c.params).unwrap();
    let d = c.params.dim();
    let comm = ops.a.commutator(&ops.a_dag);
    let mut expected = FockOperator::identity(d);
    expected = expected.add(&{
        let mut e = vec![Complex64::new(0.0, 0.0); d * d];
        e[d * d - 1] = Complex64::new(-(d as f64), 0.0);
        FockOperator::from_entries(d, e).unwrap()
    });
    prop_assert!(max_abs(&comm.add(&expected.scale(Complex64::new(-1.0, 0.0)))) < 1e-12);
    let n = ops.a_dag.matmul(&ops.a);
    prop_assert!(max_abs(&n.add(&ops.number.scale(Complex64::new(-1.0, 0.0)))) < 1e-12);
    let na = ops.number.commutator(&ops.a);
    prop_assert!(max_abs(&na.add(&ops.a)) < 1e-12);
    prop_assert!(ops.hamiltonian_static.hermiticity_defect() == 0.0);
    prop_assert!(ops.drive_coupling.hermiticity_defect() == 0.0);
    Ok(())
}

/// The null-space state is a physical density matrix with a small residual.
pub fn steady_state_is_physical(c: &Case) -> Result<(), TestCaseError> {
    let ss = steady_state_detailed(c.f, &c.params).unwrap();
    prop_assert!((ss.rho.trace() - 1.0).norm() < 1e-12);
    prop_assert!(ss.rho.hermiticity_defect() < 1e-12);
    prop_assert!(min_eigenvalue(&ss.rho) > -1e-10);
    prop_assert!(ss.info.relative_residual < 1e-10);
    Ok(())
}

pub type Property = fn(&Case) -> Result<(), TestCaseError>;

pub const PROPERTIES: [(&str, Property); 5] = [
    ("rhs trace and Hermiticity", rhs_is_traceless_and_hermitian),
    ("evolution stays physical", evolution_stays_physical),
    ("determinism and integrator consistency", integrator_is_deterministic_and_consistent),
    ("operator algebra", operator_algebra),
    ("steady state is physical", steady_state_is_physical),
];
