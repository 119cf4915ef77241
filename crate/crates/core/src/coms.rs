//! Constants of motion diagonal in the Hamiltonian eigenbasis.
//!
//! Every such constant is a combination of the projectors onto the blocks of
//! the invariant partition. [`brute_force_com_atoms`] recovers the same
//! blocks by exhaustive search over 0/1 observables and serves as an oracle
//! for [`crate::decomposition::invariant_partition`].

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::builtin::{excitation_number_operator, inversion_operator};
use crate::decomposition::{default_epsilon_s, SubspacePartition};
use crate::dynamics::LindbladGenerator;
use crate::error::{Error, Result};
use crate::model::{eigenbasis, max_modulus, EigenSystem, SystemModel};
use crate::scalar::{re, Real, C};

/// Largest dimension accepted by [`brute_force_com_atoms`].
pub const MAX_ENUMERATION_DIM: usize = 16;

/// Relative factor of the generator-level acceptance tolerance.
pub const LINDBLAD_TOLERANCE_FACTOR: f64 = 1e-10;

/// Observable `sum_k I_k |k><k|` given by its eigenbasis values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable<T: Real> {
    values: DVector<T>,
}

impl<T: Real> DiagonalObservable<T> {
    pub fn new(values: DVector<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("observable values must be finite".into()));
        }
        Ok(Self { values })
    }

    /// 0/1 observable with ones on `indices`.
    pub fn indicator(n: usize, indices: &[usize]) -> Self {
        let mut values = DVector::zeros(n);
        for &i in indices {
            values[i] = T::one();
        }
        Self { values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: DVector::from_element(n, T::one()),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn matrix(&self) -> DMatrix<C<T>> {
        DMatrix::from_diagonal(&self.values.map(re))
    }

    /// Whether the values are constant on every block of `part`.
    pub fn is_block_constant(&self, part: &SubspacePartition, tol: T) -> bool {
        part.blocks().iter().all(|b| {
            let v0 = self.values[b[0]];
            b.iter().all(|&i| (self.values[i] - v0).abs() <= tol)
        })
    }
}

/// Block projectors and the number of independent non-trivial constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ComBasis<T: Real> {
    pub projectors: Vec<DiagonalObservable<T>>,
    pub independent_count: usize,
}

pub fn basis_projectors<T: Real>(part: &SubspacePartition) -> ComBasis<T> {
    let n = part.dim();
    ComBasis {
        projectors: part
            .blocks()
            .iter()
            .map(|b| DiagonalObservable::indicator(n, b))
            .collect(),
        independent_count: part.block_count() - 1,
    }
}

/// `max_{k1,k2} |S_{k1k2}|^2 |I_{k1} - I_{k2}|`.
pub fn com_condition_residual<T: Real>(eig: &EigenSystem<T>, obs: &DiagonalObservable<T>) -> Result<T> {
    check_dim(eig.dim(), obs)?;
    Ok(condition_residual(eig.coupling(), obs.values()))
}

fn condition_residual<T: Real>(s: &DMatrix<C<T>>, values: &DVector<T>) -> T {
    let n = values.len();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let r = s[(i, j)].modulus_squared() * (values[i] - values[j]).abs();
            worst = worst.max(r);
        }
    }
    worst
}

/// Max entry of the Heisenberg-picture generator applied to `obs`.
pub fn lindblad_residual<T: Real>(model: &SystemModel<T>, obs: &DiagonalObservable<T>) -> Result<T> {
    let eig = eigenbasis(model)?;
    lindblad_residual_in(
        &LindbladGenerator::new(
            &eig,
            model.reservoir(),
            model.temperature(),
            model.coupling_strength(),
        )?,
        obs,
    )
}

pub fn lindblad_residual_in<T: Real>(
    generator: &LindbladGenerator<T>,
    obs: &DiagonalObservable<T>,
) -> Result<T> {
    check_dim(generator.dim(), obs)?;
    Ok(max_modulus(&generator.apply_adjoint(&obs.matrix())))
}

/// `eps_S^2`: an observable passes the condition iff it only changes value
/// across pairs whose coupling is below the partition threshold.
pub fn default_condition_tolerance<T: Real>(eig: &EigenSystem<T>) -> T {
    let eps = default_epsilon_s(eig);
    eps * eps
}

/// `1e-10 lambda^2 max G` over the reservoir's sample frequencies.
pub fn default_lindblad_tolerance<T: Real>(model: &SystemModel<T>) -> Result<T> {
    let temp = model.temperature();
    let mut g_max = T::zero();
    for w in model.reservoir().sample_frequencies(temp) {
        g_max = g_max.max(model.reservoir().value(temp, w)?);
    }
    let l2 = model.coupling_strength() * model.coupling_strength();
    Ok(T::tol(LINDBLAD_TOLERANCE_FACTOR) * l2 * g_max)
}

/// Exhaustive search over all `2^N` 0/1 observables. Accepted observables
/// have condition residual `<= tol`; the result is the coarsest partition
/// refining all of their level sets.
pub fn brute_force_com_atoms<T: Real>(eig: &EigenSystem<T>, tol: T) -> Result<SubspacePartition> {
    let n = eig.dim();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_DIM,
        });
    }
    let s = eig.coupling();
    let mut labels = vec![0usize; n];
    let mut values = DVector::zeros(n);
    for mask in 0u32..(1u32 << n) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = if mask >> i & 1 == 1 { T::one() } else { T::zero() };
        }
        if condition_residual(s, &values) > tol {
            continue;
        }
        // split every atom by membership in the accepted level set
        let mut seen: Vec<(usize, bool)> = Vec::new();
        for (i, label) in labels.iter_mut().enumerate() {
            let key = (*label, mask >> i & 1 == 1);
            *label = match seen.iter().position(|k| *k == key) {
                Some(p) => p,
                None => {
                    seen.push(key);
                    seen.len() - 1
                }
            };
        }
    }
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); count];
    for (i, l) in labels.into_iter().enumerate() {
        blocks[l].push(i);
    }
    SubspacePartition::from_blocks(blocks, n)
}

/// Constants of motion with a physical name in the two-TLS example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedCom {
    ExcitationNumber,
    PopulationInversion,
    Energy,
}

impl NamedCom {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExcitationNumber => "excitation_number",
            Self::PopulationInversion => "population_inversion",
            Self::Energy => "energy",
        }
    }
}

/// Eigenbasis values of a named two-TLS observable, checked to be a
/// constant of motion and constant on each block of `part`.
pub fn named_com<T: Real>(
    eig: &EigenSystem<T>,
    part: &SubspacePartition,
    which: NamedCom,
    tol: T,
) -> Result<DiagonalObservable<T>> {
    if eig.dim() != 4 {
        return Err(Error::DimensionMismatch {
            what: "two-TLS eigensystem",
            expected: 4,
            found: eig.dim(),
        });
    }
    let values = match which {
        NamedCom::Energy => eig.frequencies().clone(),
        NamedCom::ExcitationNumber => expectation_values(eig, &excitation_number_operator()),
        NamedCom::PopulationInversion => expectation_values(eig, &inversion_operator()),
    };
    let obs = DiagonalObservable::new(values)?;
    let residual = com_condition_residual(eig, &obs)?;
    let value_tol = T::tol(1e-9);
    if residual > tol || !obs.is_block_constant(part, value_tol) {
        return Err(Error::NotAConstantOfMotion {
            name: which.name().into(),
            residual: residual.as_f64(),
        });
    }
    Ok(obs)
}

/// Excitation number and inversion, plus energy when `interacting` is false.
pub fn named_coms_two_tls<T: Real>(
    eig: &EigenSystem<T>,
    part: &SubspacePartition,
    interacting: bool,
) -> Result<Vec<(NamedCom, DiagonalObservable<T>)>> {
    let tol = default_condition_tolerance(eig);
    let mut which = vec![NamedCom::ExcitationNumber, NamedCom::PopulationInversion];
    if !interacting {
        which.push(NamedCom::Energy);
    }
    which
        .into_iter()
        .map(|w| named_com(eig, part, w, tol).map(|o| (w, o)))
        .collect()
}

/// `<k|O|k>` for each eigenvector `k`, with `O` given in the input basis.
fn expectation_values<T: Real>(eig: &EigenSystem<T>, op: &DMatrix<C<T>>) -> DVector<T> {
    let diag = eig.to_eigenbasis(op);
    DVector::from_fn(eig.dim(), |k, _| diag[(k, k)].re)
}

fn check_dim<T: Real>(n: usize, obs: &DiagonalObservable<T>) -> Result<()> {
    if obs.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "observable",
            expected: n,
            found: obs.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::invariant_partition;
    use crate::model::{SpectralFunction, Tolerances};

    fn c(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn chain_plus_singleton() -> EigenSystem<f64> {
        // levels 0-1-2 coupled in a chain, level 3 only dephased
        let mut s = DMatrix::from_element(4, 4, c(0.0));
        s[(0, 1)] = c(0.5);
        s[(1, 0)] = c(0.5);
        s[(1, 2)] = C::new(0.2, 0.3);
        s[(2, 1)] = C::new(0.2, -0.3);
        s[(3, 3)] = c(1.0);
        EigenSystem::from_diagonal(
            DVector::from_vec(vec![0.0, 0.7, 1.1, 2.0]),
            s,
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn projectors_cover_blocks() {
        let eig = chain_plus_singleton();
        let part = invariant_partition(&eig, default_epsilon_s(&eig));
        let basis = basis_projectors::<f64>(&part);
        assert_eq!(basis.independent_count, 1);
        let sum = basis
            .projectors
            .iter()
            .fold(DVector::zeros(4), |acc, p| acc + p.values());
        assert_eq!(sum, DVector::from_element(4, 1.0));
        for p in &basis.projectors {
            assert_eq!(com_condition_residual(&eig, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_block_has_no_independent_com() {
        let part = SubspacePartition::from_blocks(vec![vec![0, 1, 2]], 3).unwrap();
        let basis = basis_projectors::<f64>(&part);
        assert_eq!(basis.independent_count, 0);
        assert_eq!(basis.projectors[0], DiagonalObservable::identity(3));
    }

    #[test]
    fn splitting_a_block_is_detected() {
        let eig = chain_plus_singleton();
        let half = DiagonalObservable::indicator(4, &[0]);
        assert!((com_condition_residual(&eig, &half).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn brute_force_matches_graph_components() {
        let eig = chain_plus_singleton();
        let tol = default_condition_tolerance(&eig);
        let atoms = brute_force_com_atoms(&eig, tol).unwrap();
        assert_eq!(atoms, invariant_partition(&eig, default_epsilon_s(&eig)));
        assert_eq!(atoms.one_based_blocks(), vec![vec![1, 2, 3], vec![4]]);
    }

    #[test]
    fn brute_force_trivial_and_guard() {
        let one = EigenSystem::from_diagonal(
            DVector::from_element(1, 0.0),
            DMatrix::from_element(1, 1, c(1.0)),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(
            brute_force_com_atoms(&one, 0.0).unwrap().one_based_blocks(),
            vec![vec![1]]
        );
        let big = EigenSystem::from_diagonal(
            DVector::from_fn(17, |i, _| i as f64),
            DMatrix::from_element(17, 17, c(0.0)),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_com_atoms(&big, 0.0),
            Err(Error::EnumerationTooLarge { n: 17, .. })
        ));
    }

    #[test]
    fn lindblad_residual_vanishes_exactly_on_coms() {
        let eig = chain_plus_singleton();
        let g = SpectralFunction::ohmic_thermal(0.5, 4.0).unwrap();
        let gen = LindbladGenerator::new(&eig, &g, 0.8, 1.0).unwrap();
        let part = invariant_partition(&eig, default_epsilon_s(&eig));
        for p in basis_projectors::<f64>(&part).projectors {
            assert!(lindblad_residual_in(&gen, &p).unwrap() < 1e-14);
        }
        assert!(lindblad_residual_in(&gen, &DiagonalObservable::identity(4)).unwrap() < 1e-15);
        let half = DiagonalObservable::indicator(4, &[0, 1]);
        assert!(lindblad_residual_in(&gen, &half).unwrap() > 1e-3);
    }
}
