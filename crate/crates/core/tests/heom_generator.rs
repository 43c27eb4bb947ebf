//! The assembled generator for one exponential at depth 1 (two ADOs on a
//! qubit) against an 8×8 matrix built column by column from 2×2 products.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qthermo::bath::matsubara_expansion;
use qthermo::heom::{Hierarchy, HeomGenerator};
use qthermo::linalg::{anticommutator, commutator, sigma_x, sigma_z};
use qthermo::{HeomParams, Op, SpectralDensity};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn unit(j: usize) -> Op {
    let mut m = Op::zeros(2, 2);
    m[(j % 2, j / 2)] = Complex64::new(1.0, 0.0);
    m
}

fn oracle(scaling: bool, terminator: bool) -> DMatrix<Complex64> {
    let sd = SpectralDensity::new(0.1, 0.1).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 0).unwrap();
    let (c, nu) = (bath.terms[0].amplitude, bath.terms[0].rate);
    let delta = if terminator { bath.terminator_strength } else { 0.0 };
    let w1 = if scaling { c.norm().sqrt() } else { 1.0 };
    let h = sigma_z() * Complex64::new(0.5, 0.0);
    let s = sigma_x();
    let free = |r: &Op| -commutator(&h, r) * I - commutator(&s, &commutator(&s, r)) * Complex64::new(delta, 0.0);

    let mut out = DMatrix::zeros(8, 8);
    for j in 0..8 {
        let (r0, r1) = if j < 4 { (unit(j), Op::zeros(2, 2)) } else { (Op::zeros(2, 2), unit(j - 4)) };
        let d0 = free(&r0) - commutator(&s, &r1) * I * Complex64::new(w1, 0.0);
        let theta = -(commutator(&s, &r0) * Complex64::new(c.re, 0.0) + anticommutator(&s, &r0) * Complex64::new(0.0, c.im)) * I;
        let d1 = free(&r1) - r1 * Complex64::new(nu, 0.0) + theta / Complex64::new(w1, 0.0);
        for i in 0..4 {
            out[(i, j)] = d0[(i % 2, i / 2)];
            out[(i + 4, j)] = d1[(i % 2, i / 2)];
        }
    }
    out
}

fn assembled(scaling: bool, terminator: bool) -> DMatrix<Complex64> {
    let sd = SpectralDensity::new(0.1, 0.1).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 0).unwrap();
    let mut params = HeomParams::default().with_depth(1);
    params.scaling = scaling;
    params.use_terminator = terminator;
    let hierarchy = Arc::new(Hierarchy::new(1, 1, 10).unwrap());
    let gen = HeomGenerator::build(
        hierarchy,
        &(sigma_z() * Complex64::new(0.5, 0.0)),
        &sigma_x(),
        &bath,
        &params,
    );
    gen.matrix.to_dense()
}

#[test]
fn matches_hand_assembly_entry_by_entry() {
    for scaling in [false, true] {
        for terminator in [false, true] {
            let (got, want) = (assembled(scaling, terminator), oracle(scaling, terminator));
            assert_eq!(got.shape(), (8, 8));
            for i in 0..8 {
                for j in 0..8 {
                    assert!(
                        (got[(i, j)] - want[(i, j)]).norm() < 1e-14,
                        "scaling={scaling} terminator={terminator} ({i},{j}): {} vs {}",
                        got[(i, j)],
                        want[(i, j)]
                    );
                }
            }
        }
    }
}

#[test]
fn terminator_is_present_at_these_parameters() {
    let sd = SpectralDensity::new(0.1, 0.1).unwrap();
    let bath = matsubara_expansion(&sd, 0.2, 0).unwrap();
    assert!(bath.terminator_strength > 1e-4);
    assert!((assembled(true, true) - assembled(true, false)).norm() > 1e-4);
}
