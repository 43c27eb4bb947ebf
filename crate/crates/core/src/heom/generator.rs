//! Sparse assembly of the hierarchy generator.
//!
//! For every multi-index `n` (scaled ADOs `ρ̃_n = ρ_n / w_n`,
//! `w_n = sqrt(Π_k n_k! s_k^{n_k})`, `s_k = |c_k|`):
//!
//! ```text
//! dρ_n/dt = (−i H^× − Σ_k n_k ν_k − Δ S^× S^×) ρ_n
//!           + Σ_k Φ ρ_{n+e_k}  + Σ_k n_k Θ_k ρ_{n−e_k}
//! Φ = −i S^×,  Θ_k = −i (Re c_k S^× + i Im c_k S^∘)
//! ```
//!
//! ADOs are stored column-major, `ρ(r, c)` at `r + c·d`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bath::BathExpansion;
use crate::scalar::{cabs, cre, cx, lit, Cx, Op, Real};

use super::hierarchy::Hierarchy;
use super::HeomParams;

/// Dense `d² × d²` superoperator.
type Super<T> = DMatrix<Cx<T>>;

fn left<T: Real>(a: &Op<T>) -> Super<T> {
    let d = a.nrows();
    let mut m = Super::from_element(d * d, d * d, cre(T::zero()));
    for c in 0..d {
        for r in 0..d {
            for j in 0..d {
                m[(r + c * d, j + c * d)] = a[(r, j)];
            }
        }
    }
    m
}

fn right<T: Real>(b: &Op<T>) -> Super<T> {
    let d = b.nrows();
    let mut m = Super::from_element(d * d, d * d, cre(T::zero()));
    for c in 0..d {
        for r in 0..d {
            for j in 0..d {
                m[(r + c * d, r + j * d)] = b[(j, c)];
            }
        }
    }
    m
}

/// `X ↦ [A, X]`.
pub fn commutator_super<T: Real>(a: &Op<T>) -> Super<T> {
    left(a) - right(a)
}

/// `X ↦ {A, X}`.
pub fn anticommutator_super<T: Real>(a: &Op<T>) -> Super<T> {
    left(a) + right(a)
}

/// Compressed sparse row matrix over complex entries.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Cx<T>>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn from_dense(m: &DMatrix<Cx<T>>) -> Self {
        let mut row_ptr = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.re != T::zero() || v.im != T::zero() {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n: m.nrows(), row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[Cx<T>], y: &mut [Cx<T>]) {
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = cre(T::zero());
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            *out = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<Cx<T>> {
        let mut m = DMatrix::from_element(self.n, self.n, cre(T::zero()));
        for row in 0..self.n {
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.cols[idx])] += self.vals[idx];
            }
        }
        m
    }
}

/// Linear generator of the full ADO vector for one (constant) Hamiltonian.
#[derive(Debug, Clone)]
pub struct HeomGenerator<T: Real> {
    pub hierarchy: Arc<Hierarchy>,
    pub dim: usize,
    /// Scale factors `w_n` relating stored and physical ADOs.
    pub weights: Vec<T>,
    pub matrix: CsrMatrix<T>,
}

/// Per-mode scale `s_k`; modes with vanishing amplitude are left unscaled.
fn mode_scales<T: Real>(bath: &BathExpansion<T>, scaling: bool) -> Vec<T> {
    bath.terms
        .iter()
        .map(|t| {
            let s = cabs(t.amplitude);
            if scaling && s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect()
}

impl<T: Real> HeomGenerator<T> {
    pub fn build(
        hierarchy: Arc<Hierarchy>,
        hamiltonian: &Op<T>,
        coupling: &Op<T>,
        bath: &BathExpansion<T>,
        params: &HeomParams<T>,
    ) -> Self {
        let d = hamiltonian.nrows();
        let d2 = d * d;
        let m = bath.n_exponentials();
        assert_eq!(hierarchy.n_exponentials(), m, "hierarchy/bath mismatch");

        let minus_i = cx(T::zero(), -T::one());
        let s_comm = commutator_super(coupling);
        let s_anti = anticommutator_super(coupling);
        let mut free = commutator_super(hamiltonian) * minus_i;
        if params.use_terminator && bath.terminator_strength > T::zero() {
            free -= (&s_comm * &s_comm) * cre(bath.terminator_strength);
        }
        let phi = &s_comm * minus_i;
        let thetas: Vec<Super<T>> = bath
            .terms
            .iter()
            .map(|t| (&s_comm * cre(t.amplitude.re) + &s_anti * cx(T::zero(), t.amplitude.im)) * minus_i)
            .collect();

        let scales = mode_scales(bath, params.scaling);
        let weights: Vec<T> = hierarchy
            .indices
            .iter()
            .map(|n| {
                n.counts.iter().zip(&scales).fold(T::one(), |w, (&nk, &s)| {
                    let mut f = T::one();
                    for j in 1..=nk as usize {
                        f *= lit::<T>(j as f64) * s;
                    }
                    w * f.sqrt()
                })
            })
            .collect();

        let n_ado = hierarchy.len();
        let mut row_ptr = Vec::with_capacity(n_ado * d2 + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);

        for (a, index) in hierarchy.indices.iter().enumerate() {
            let damping = index
                .counts
                .iter()
                .zip(&bath.terms)
                .fold(T::zero(), |acc, (&nk, t)| acc + lit::<T>(nk as f64) * t.rate);

            // (column block, superoperator, coefficient)
            let mut blocks: Vec<(usize, &Super<T>, Cx<T>)> = vec![(a, &free, cre(T::one()))];
            for k in 0..m {
                if let Some(b) = hierarchy.up(a, k) {
                    blocks.push((b, &phi, cre(weights[b] / weights[a])));
                }
                if let Some(b) = hierarchy.down(a, k) {
                    let nk = lit::<T>(index.counts[k] as f64);
                    blocks.push((b, &thetas[k], cre(nk * weights[b] / weights[a])));
                }
            }

            for i in 0..d2 {
                for &(b, op, coeff) in &blocks {
                    for j in 0..d2 {
                        let mut v = op[(i, j)] * coeff;
                        if b == a && i == j {
                            v -= cre(damping);
                        }
                        if v.re != T::zero() || v.im != T::zero() {
                            cols.push(b * d2 + j);
                            vals.push(v);
                        }
                    }
                }
                row_ptr.push(cols.len());
            }
        }

        Self {
            hierarchy,
            dim: d,
            weights,
            matrix: CsrMatrix {
                n: n_ado * d2,
                row_ptr,
                cols,
                vals,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.matrix.n
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n == 0
    }

    pub fn apply(&self, x: &[Cx<T>], y: &mut [Cx<T>]) {
        self.matrix.matvec(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, sigma_x, sigma_y};

    #[test]
    fn superoperators_match_products() {
        let a = sigma_x::<f64>() + sigma_y::<f64>() * cre(0.3);
        let x = Op::<f64>::from_fn(2, 2, |r, c| cx(r as f64 + 0.5, c as f64 - 0.2));
        let vx = DMatrix::from_column_slice(4, 1, x.as_slice());
        let got = commutator_super(&a) * vx;
        let want = commutator(&a, &x);
        for (g, w) in got.iter().zip(want.as_slice()) {
            assert!((g - w).norm() < 1e-15);
        }
    }
}
