//! Open-system model definition and its Hamiltonian eigenbasis.
//!
//! Units: hbar = k_B = 1, so energies, frequencies, temperatures and rates
//! share a single unit.

mod document;
mod spectral;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

pub use document::{
    initial_state_from_str, load_model, load_model_file, model_from_document, model_to_document,
    unchecked_from_document, ModelDocument,
};
pub use spectral::{spectral_value, Extrapolation, SpectralFunction, SpectralTable};

/// Relative tolerances attached to a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Hermiticity tolerance relative to the largest matrix entry.
    pub hermiticity: T,
    /// Minimum level spacing relative to the spectral range.
    pub degeneracy: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            hermiticity: T::tol(1e-10),
            degeneracy: T::tol(1e-9),
        }
    }
}

/// Hamiltonian, coupling operator and thermal reservoir of an open system.
#[derive(Debug, Clone)]
pub struct SystemModel<T: Real> {
    hamiltonian: DMatrix<C<T>>,
    coupling_operator: DMatrix<C<T>>,
    coupling_strength: T,
    reservoir: SpectralFunction<T>,
    temperature: T,
    tolerances: Tolerances<T>,
}

pub fn max_modulus<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// `max |A_ij - conj(A_ji)|`.
pub fn hermiticity_residual<T: Real>(m: &DMatrix<C<T>>) -> T {
    let n = m.nrows();
    let mut r = T::zero();
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    r
}

fn check_square<T: Real>(m: &DMatrix<C<T>>, what: &'static str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            what,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_hermitian<T: Real>(m: &DMatrix<C<T>>, which: &'static str, rel: T) -> Result<()> {
    let residual = hermiticity_residual(m);
    let tolerance = rel * max_modulus(m);
    if residual > tolerance {
        return Err(Error::NotHermitian {
            which,
            residual: residual.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    Ok(())
}

impl<T: Real> SystemModel<T> {
    pub fn new(
        hamiltonian: DMatrix<C<T>>,
        coupling_operator: DMatrix<C<T>>,
        coupling_strength: T,
        reservoir: SpectralFunction<T>,
        temperature: T,
    ) -> Result<Self> {
        Self::with_tolerances(
            hamiltonian,
            coupling_operator,
            coupling_strength,
            reservoir,
            temperature,
            Tolerances::default(),
        )
    }

    pub fn with_tolerances(
        hamiltonian: DMatrix<C<T>>,
        coupling_operator: DMatrix<C<T>>,
        coupling_strength: T,
        reservoir: SpectralFunction<T>,
        temperature: T,
        tolerances: Tolerances<T>,
    ) -> Result<Self> {
        let model = Self::unchecked(
            hamiltonian,
            coupling_operator,
            coupling_strength,
            reservoir,
            temperature,
            tolerances,
        );
        model.check()?;
        Ok(model)
    }

    /// Assembles a model without checking its invariants. Intended for
    /// [`validate`](crate::validation::validate), which reports on models
    /// that may be broken.
    pub fn unchecked(
        hamiltonian: DMatrix<C<T>>,
        coupling_operator: DMatrix<C<T>>,
        coupling_strength: T,
        reservoir: SpectralFunction<T>,
        temperature: T,
        tolerances: Tolerances<T>,
    ) -> Self {
        Self {
            hamiltonian,
            coupling_operator,
            coupling_strength,
            reservoir,
            temperature,
            tolerances,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        check_square(&self.hamiltonian, "hamiltonian")?;
        check_square(&self.coupling_operator, "coupling_operator")?;
        if self.coupling_operator.nrows() != self.hamiltonian.nrows() {
            return Err(Error::DimensionMismatch {
                what: "coupling_operator",
                expected: self.hamiltonian.nrows(),
                found: self.coupling_operator.nrows(),
            });
        }
        if !(self.temperature.is_finite() && self.temperature > T::zero()) {
            return Err(Error::NonPositiveTemperature(self.temperature.as_f64()));
        }
        if !(self.coupling_strength.is_finite() && self.coupling_strength >= T::zero()) {
            return Err(Error::InvalidCouplingStrength(self.coupling_strength.as_f64()));
        }
        check_hermitian(&self.hamiltonian, "hamiltonian", self.tolerances.hermiticity)?;
        check_hermitian(
            &self.coupling_operator,
            "coupling_operator",
            self.tolerances.hermiticity,
        )?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &DMatrix<C<T>> {
        &self.hamiltonian
    }

    pub fn coupling_operator(&self) -> &DMatrix<C<T>> {
        &self.coupling_operator
    }

    pub fn coupling_strength(&self) -> T {
        self.coupling_strength
    }

    pub fn reservoir(&self) -> &SpectralFunction<T> {
        &self.reservoir
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn tolerances(&self) -> &Tolerances<T> {
        &self.tolerances
    }
}

/// Model re-expressed in the Hamiltonian eigenbasis.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Real> {
    frequencies: DVector<T>,
    basis_transform: DMatrix<C<T>>,
    coupling: DMatrix<C<T>>,
}

impl<T: Real> EigenSystem<T> {
    /// Eigensystem of a Hamiltonian that is already diagonal with strictly
    /// increasing `frequencies`; `coupling` is given in that basis.
    pub fn from_diagonal(
        frequencies: DVector<T>,
        coupling: DMatrix<C<T>>,
        tolerances: &Tolerances<T>,
    ) -> Result<Self> {
        check_square(&coupling, "coupling")?;
        if coupling.nrows() != frequencies.len() {
            return Err(Error::DimensionMismatch {
                what: "coupling",
                expected: frequencies.len(),
                found: coupling.nrows(),
            });
        }
        if frequencies.iter().zip(frequencies.iter().skip(1)).any(|(a, b)| b < a) {
            return Err(Error::InvalidParameter("frequencies must be sorted ascending".into()));
        }
        check_gaps(&frequencies, tolerances.degeneracy)?;
        check_hermitian(&coupling, "coupling", tolerances.hermiticity)?;
        let n = frequencies.len();
        Ok(Self {
            frequencies,
            basis_transform: DMatrix::identity(n, n),
            coupling: symmetrize(coupling),
        })
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// Eigenfrequencies, strictly increasing.
    pub fn frequencies(&self) -> &DVector<T> {
        &self.frequencies
    }

    /// Unitary whose k-th column is the k-th eigenvector in the input basis.
    pub fn basis_transform(&self) -> &DMatrix<C<T>> {
        &self.basis_transform
    }

    /// Coupling operator matrix `S_ij` in the eigenbasis.
    pub fn coupling(&self) -> &DMatrix<C<T>> {
        &self.coupling
    }

    /// Expresses an input-basis operator in the eigenbasis.
    pub fn to_eigenbasis(&self, op: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        self.basis_transform.adjoint() * op * &self.basis_transform
    }

    /// Expresses an eigenbasis operator in the input basis.
    pub fn from_eigenbasis(&self, op: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        &self.basis_transform * op * self.basis_transform.adjoint()
    }
}

fn symmetrize<T: Real>(m: DMatrix<C<T>>) -> DMatrix<C<T>> {
    let half = re(T::of(0.5));
    (&m + m.adjoint()) * half
}

fn check_gaps<T: Real>(frequencies: &DVector<T>, rel: T) -> Result<()> {
    let n = frequencies.len();
    if n < 2 {
        return Ok(());
    }
    let range = frequencies[n - 1] - frequencies[0];
    let tolerance = rel * range;
    for k in 0..n - 1 {
        let gap = frequencies[k + 1] - frequencies[k];
        if gap <= tolerance {
            return Err(Error::DegenerateSpectrum {
                lower: k + 1,
                upper: k + 2,
                gap: gap.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
    }
    Ok(())
}

fn is_diagonal<T: Real>(m: &DMatrix<C<T>>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C::new(T::zero(), T::zero())))
}

/// Diagonalizes the Hamiltonian and conjugates the coupling operator into
/// the eigenbasis, with eigenfrequencies sorted ascending.
///
/// A Hamiltonian that is already diagonal is only re-ordered: the basis
/// transform is then a permutation matrix (the identity if the diagonal is
/// sorted). Degenerate spectra are rejected.
pub fn eigenbasis<T: Real>(model: &SystemModel<T>) -> Result<EigenSystem<T>> {
    let h = model.hamiltonian();
    let n = h.nrows();
    let tol = model.tolerances();

    let (values, vectors): (Vec<T>, DMatrix<C<T>>) = if is_diagonal(h) {
        let values = (0..n).map(|i| h[(i, i)].re).collect();
        (values, DMatrix::identity(n, n))
    } else {
        let eig = SymmetricEigen::new(h.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
    let frequencies = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut transform = DMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);
    fix_phases(&mut transform);

    check_gaps(&frequencies, tol.degeneracy)?;

    let unitarity = (transform.adjoint() * &transform - DMatrix::identity(n, n))
        .iter()
        .fold(T::zero(), |acc, z| acc.max(z.modulus()));
    if unitarity > tol.hermiticity {
        return Err(Error::NotUnitary {
            residual: unitarity.as_f64(),
            tolerance: tol.hermiticity.as_f64(),
        });
    }

    let coupling = transform.adjoint() * model.coupling_operator() * &transform;
    check_hermitian(&coupling, "coupling in eigenbasis", tol.hermiticity)?;

    Ok(EigenSystem {
        frequencies,
        basis_transform: transform,
        coupling: symmetrize(coupling),
    })
}

/// Rotates each column so its largest-magnitude component is real positive.
fn fix_phases<T: Real>(u: &mut DMatrix<C<T>>) {
    for mut col in u.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.modulus().partial_cmp(&b.modulus()).expect("finite"))
            .expect("non-empty column");
        let m = pivot.modulus();
        if m > T::zero() {
            let phase = pivot.conj() / re(m);
            col *= phase;
        }
    }
}
