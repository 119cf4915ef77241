//! Full master-equation generator in the Hamiltonian eigenbasis.
//!
//! The coupling operator is split into jump operators
//! `A_ab = S_ab |a><b|`, one per ordered pair of eigenstates (including
//! `a = b`). The jump `b -> a` fires at rate `lambda^2 G(w_b - w_a)`, so the
//! population block of the generator is the Pauli rate equation. Couplings
//! below the default partition threshold are dropped.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::decomposition::{default_epsilon_s, thresholded_coupling};
use crate::error::Result;
use crate::model::{EigenSystem, SpectralFunction};
use crate::scalar::{re, Real, C};

#[derive(Debug, Clone)]
pub struct LindbladGenerator<T: Real> {
    frequencies: DVector<T>,
    coupling: DMatrix<C<T>>,
    /// `jump_rates[(a, b)]`: rate prefactor of the jump `b -> a`.
    jump_rates: DMatrix<T>,
}

impl<T: Real> LindbladGenerator<T> {
    pub fn new(
        eig: &EigenSystem<T>,
        reservoir: &SpectralFunction<T>,
        temperature: T,
        coupling_strength: T,
    ) -> Result<Self> {
        let n = eig.dim();
        let w = eig.frequencies();
        let coupling = thresholded_coupling(eig, default_epsilon_s(eig));
        let l2 = coupling_strength * coupling_strength;
        let mut jump_rates = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                if coupling[(a, b)].modulus() > T::zero() {
                    jump_rates[(a, b)] = l2 * reservoir.value(temperature, w[b] - w[a])?;
                }
            }
        }
        Ok(Self {
            frequencies: w.clone(),
            coupling,
            jump_rates,
        })
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    pub fn jump_rates(&self) -> &DMatrix<T> {
        &self.jump_rates
    }

    /// `r[(a, b)] = rate(b -> a) * |S_ab|^2`.
    fn weighted(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| {
            self.jump_rates[(a, b)] * self.coupling[(a, b)].modulus_squared()
        })
    }

    /// Total decay out of each level, dephasing jumps included.
    pub fn total_outflow(&self) -> DVector<T> {
        let r = self.weighted();
        DVector::from_fn(self.dim(), |b, _| r.column(b).sum())
    }

    /// Schrödinger picture: `d rho / dt`.
    pub fn apply(&self, rho: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        let n = self.dim();
        let r = self.weighted();
        let out = self.total_outflow();
        let w = &self.frequencies;
        let half = T::of(0.5);
        DMatrix::from_fn(n, n, |i, j| {
            let mut v = rho[(i, j)] * C::new(-half * (out[i] + out[j]), -(w[i] - w[j]));
            if i == j {
                for b in 0..n {
                    v += rho[(b, b)] * re(r[(i, b)]);
                }
            }
            v
        })
    }

    /// Heisenberg picture: the adjoint generator acting on an observable.
    pub fn apply_adjoint(&self, x: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        let n = self.dim();
        let r = self.weighted();
        let out = self.total_outflow();
        let w = &self.frequencies;
        let half = T::of(0.5);
        DMatrix::from_fn(n, n, |i, j| {
            let mut v = x[(i, j)] * C::new(-half * (out[i] + out[j]), w[i] - w[j]);
            if i == j {
                for a in 0..n {
                    v += x[(a, a)] * re(r[(a, i)]);
                }
            }
            v
        })
    }

    /// Dense `N^2 x N^2` superoperator acting on column-stacked density
    /// matrices, assembled from explicit jump-operator matrices via
    /// `vec(A X B) = (B^T (x) A) vec(X)`.
    pub fn superoperator(&self) -> DMatrix<C<T>> {
        let n = self.dim();
        let id = DMatrix::<C<T>>::identity(n, n);
        let h = DMatrix::from_diagonal(&self.frequencies.map(re));
        let minus_i = C::new(T::zero(), -T::one());
        let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * minus_i;
        let half = re(T::of(0.5));
        for a in 0..n {
            for b in 0..n {
                let rate = self.jump_rates[(a, b)];
                if rate == T::zero() {
                    continue;
                }
                let mut jump = DMatrix::<C<T>>::zeros(n, n);
                jump[(a, b)] = self.coupling[(a, b)];
                let jd = jump.adjoint();
                let jdj = &jd * &jump;
                let term = jd.transpose().kronecker(&jump)
                    - (id.kronecker(&jdj) + jdj.transpose().kronecker(&id)) * half;
                l += term * re(rate);
            }
        }
        l
    }
}

pub fn vectorize<T: Real>(m: &DMatrix<C<T>>) -> DVector<C<T>> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize<T: Real>(v: &DVector<C<T>>, n: usize) -> DMatrix<C<T>> {
    DMatrix::from_iterator(n, n, v.iter().copied())
}
