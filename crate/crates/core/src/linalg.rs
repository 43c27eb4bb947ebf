//! Small dense linear-algebra helpers for qubit-sized operators.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, cre, cx, lit, Cx, Op, Real};

pub fn zeros<T: Real>(dim: usize) -> Op<T> {
    DMatrix::from_element(dim, dim, cre(T::zero()))
}

pub fn identity<T: Real>(dim: usize) -> Op<T> {
    DMatrix::identity(dim, dim)
}

pub fn sigma_x<T: Real>() -> Op<T> {
    let (o, l) = (cre(T::zero()), cre(T::one()));
    DMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

pub fn sigma_y<T: Real>() -> Op<T> {
    let o = cre(T::zero());
    DMatrix::from_row_slice(2, 2, &[o, cx(T::zero(), -T::one()), cx(T::zero(), T::one()), o])
}

/// Pauli Z with `|0> = (1, 0)` the +1 eigenstate.
pub fn sigma_z<T: Real>() -> Op<T> {
    let o = cre(T::zero());
    DMatrix::from_row_slice(2, 2, &[cre(T::one()), o, o, cre(-T::one())])
}

/// `Σ_i σ_z^{(i)}` on `n` qubits (`dim = 2^n`); a diagonal `±1` pattern
/// otherwise.
pub fn total_sigma_z<T: Real>(dim: usize) -> Op<T> {
    if dim.is_power_of_two() {
        let n = dim.trailing_zeros() as usize;
        let mut total = zeros::<T>(dim);
        for q in 0..n {
            let mut term = identity::<T>(1);
            for p in 0..n {
                term = kron(&term, &if p == q { sigma_z() } else { identity(2) });
            }
            total += term;
        }
        total
    } else {
        DMatrix::from_fn(dim, dim, |r, c| {
            if r != c {
                cre(T::zero())
            } else if 2 * r < dim {
                cre(T::one())
            } else {
                cre(-T::one())
            }
        })
    }
}

pub fn kron<T: Real>(a: &Op<T>, b: &Op<T>) -> Op<T> {
    a.kronecker(b)
}

pub fn dagger<T: Real>(a: &Op<T>) -> Op<T> {
    a.adjoint()
}

pub fn commutator<T: Real>(a: &Op<T>, b: &Op<T>) -> Op<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &Op<T>, b: &Op<T>) -> Op<T> {
    a * b + b * a
}

pub fn trace<T: Real>(a: &Op<T>) -> Cx<T> {
    a.trace()
}

/// Largest entry modulus of `a - a^dagger`.
pub fn hermiticity_defect<T: Real>(a: &Op<T>) -> T {
    let d = a - a.adjoint();
    d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
}

pub fn max_abs<T: Real>(a: &Op<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh<T: Real>(a: &Op<T>) -> (Vec<T>, Op<T>) {
    let herm = (a + a.adjoint()) * cre(lit::<T>(0.5));
    let eig = herm.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `sum_i |lambda_i|` for Hermitian `a`.
pub fn trace_norm<T: Real>(a: &Op<T>) -> T {
    eigh(a).0.into_iter().fold(T::zero(), |s, v| s + v.abs())
}

/// `V diag(f(lambda)) V^dagger` for Hermitian `a`.
pub fn hermitian_function<T: Real>(a: &Op<T>, f: impl Fn(T) -> Cx<T>) -> Op<T> {
    let (vals, vecs) = eigh(a);
    let n = a.nrows();
    let diag = DMatrix::from_fn(n, n, |r, c| if r == c { f(vals[r]) } else { cre(T::zero()) });
    &vecs * diag * vecs.adjoint()
}

/// `e^{-i H t}` for Hermitian `H`.
pub fn unitary<T: Real>(h: &Op<T>, t: T) -> Op<T> {
    hermitian_function(h, |e| cis(-e * t))
}

/// Gibbs state `e^{-H/T} / Z`.
pub fn gibbs_state<T: Real>(h: &Op<T>, temperature: T) -> Op<T> {
    let (vals, _) = eigh(h);
    let e0 = vals[0];
    let unnorm = hermitian_function(h, |e| cre((-(e - e0) / temperature).exp()));
    let z = unnorm.trace();
    unnorm.map(|v| v / z)
}

/// Pure-state projector `|psi><psi|` after normalizing `psi`.
pub fn projector<T: Real>(psi: &[Cx<T>]) -> Op<T> {
    let norm2 = psi.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
    let n = psi.len();
    DMatrix::from_fn(n, n, |r, c| (psi[r] * psi[c].conj()).unscale(norm2))
}

/// Checks that `rho` is a physical density matrix within `tol`.
pub fn validate_density<T: Real>(rho: &Op<T>, tol: T) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidState(format!(
            "density matrix is {}x{}, expected square",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let herm = hermiticity_defect(rho);
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian (defect {herm})")));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let (vals, _) = eigh(rho);
    if vals[0] < -tol {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {}",
            vals[0]
        )));
    }
    Ok(())
}

/// Checks Hermiticity of an operator within `tol`.
pub fn validate_hermitian<T: Real>(name: &str, a: &Op<T>, tol: T) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{name} is not square")));
    }
    let d = hermiticity_defect(a);
    if d > tol {
        return Err(Error::NotHermitian(format!("{name} (defect {d})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (sigma_x::<f64>(), sigma_y::<f64>(), sigma_z::<f64>());
        let i2 = cx(0.0, 2.0);
        assert!(max_abs(&(commutator(&x, &y) - z.map(|v| v * i2))) < 1e-15);
        assert!(max_abs(&(&x * &x - identity::<f64>(2))) < 1e-15);
    }

    #[test]
    fn gibbs_of_sigma_z() {
        let h = sigma_z::<f64>().map(|v| v * 0.5);
        let rho = gibbs_state(&h, 0.2);
        let sz = (&rho * sigma_z::<f64>()).trace().re;
        assert!((sz + (2.5f64).tanh()).abs() < 1e-13);
    }

    #[test]
    fn trace_norm_of_difference() {
        let plus = projector(&[cre(1.0), cre(1.0)]);
        let mixed = identity::<f64>(2).map(|v| v * 0.5);
        assert!((trace_norm(&(plus - mixed)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_unphysical_states() {
        let bad = sigma_z::<f64>();
        assert!(validate_density(&bad, 1e-12).is_err());
        let rho = projector(&[cre(1.0), cx(0.0, 1.0)]);
        assert!(validate_density(&rho, 1e-12).is_ok());
    }
}
