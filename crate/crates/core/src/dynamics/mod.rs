//! Pauli rate equation for populations and closed-form coherence decay.

mod generator;
mod integrator;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::decomposition::{default_epsilon_s, thresholded_coupling, SubspacePartition};
use crate::error::{Error, Result};
use crate::model::{eigenbasis, EigenSystem, SpectralFunction, SystemModel};
use crate::scalar::{re, Real, C};

pub use generator::{unvectorize, vectorize, LindbladGenerator};
pub use integrator::Dopri5;

/// Tolerance on trace and Hermiticity of density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

/// Transition rates between eigenstates.
///
/// `rates[(i, j)]` is the rate of population flow `j -> i`; the diagonal is
/// zero and the total outflow from `i` is the column sum `sum_j rates[(j, i)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix<T: Real> {
    rates: DMatrix<T>,
}

impl<T: Real> RateMatrix<T> {
    pub fn from_rates(mut rates: DMatrix<T>) -> Result<Self> {
        if rates.nrows() != rates.ncols() || rates.nrows() == 0 {
            return Err(Error::InvalidRates(format!(
                "rate matrix must be square and non-empty, got {}x{}",
                rates.nrows(),
                rates.ncols()
            )));
        }
        if rates.iter().any(|r| !r.is_finite() || *r < T::zero()) {
            return Err(Error::InvalidRates("rates must be finite and non-negative".into()));
        }
        rates.fill_diagonal(T::zero());
        Ok(Self { rates })
    }

    pub fn dim(&self) -> usize {
        self.rates.nrows()
    }

    pub fn rates(&self) -> &DMatrix<T> {
        &self.rates
    }

    /// Rate of the transition `from -> to`.
    pub fn rate(&self, to: usize, from: usize) -> T {
        self.rates[(to, from)]
    }

    pub fn outflow(&self, i: usize) -> T {
        self.rates.column(i).sum()
    }

    /// `Q` with `dp/dt = Q p`: off-diagonal rates, minus outflow on the diagonal.
    pub fn generator(&self) -> DMatrix<T> {
        let mut q = self.rates.clone();
        for i in 0..self.dim() {
            q[(i, i)] = -self.outflow(i);
        }
        q
    }

    /// `dp_i/dt = sum_j W_ij p_j - p_i sum_j W_ji`.
    pub fn derivative(&self, p: &DVector<T>) -> DVector<T> {
        let n = self.dim();
        DVector::from_fn(n, |i, _| {
            let mut inflow = T::zero();
            for j in 0..n {
                inflow += self.rates[(i, j)] * p[j];
            }
            inflow - p[i] * self.outflow(i)
        })
    }

    /// Sub-matrix on the given indices, in the order given.
    pub fn restrict(&self, indices: &[usize]) -> RateMatrix<T> {
        let m = indices.len();
        RateMatrix {
            rates: DMatrix::from_fn(m, m, |a, b| self.rates[(indices[a], indices[b])]),
        }
    }

    pub fn min_positive_rate(&self) -> Option<T> {
        self.rates
            .iter()
            .copied()
            .filter(|r| *r > T::zero())
            .reduce(|a, b| a.min(b))
    }

    pub fn max_rate(&self) -> T {
        self.rates.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Largest `|W_ij e^{-w_j/T} - W_ji e^{-w_i/T}|`, relative to the larger
    /// of the two terms. Energies are shifted to the ground state.
    pub fn detailed_balance_residual(&self, frequencies: &DVector<T>, temperature: T) -> T {
        let n = self.dim();
        let w0 = frequencies.min();
        let boltz = |i: usize| (-(frequencies[i] - w0) / temperature).exp();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..i {
                let a = self.rates[(i, j)] * boltz(j);
                let b = self.rates[(j, i)] * boltz(i);
                let scale = a.max(b);
                if scale > T::zero() {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }
}

/// `W_ij = lambda^2 G(w_j - w_i) |S_ji|^2` for `i != j`, with couplings at
/// or below the default partition threshold treated as zero.
pub fn rate_matrix<T: Real>(
    eig: &EigenSystem<T>,
    reservoir: &SpectralFunction<T>,
    temperature: T,
    coupling_strength: T,
) -> Result<RateMatrix<T>> {
    let n = eig.dim();
    let w = eig.frequencies();
    let s = thresholded_coupling(eig, default_epsilon_s(eig));
    let l2 = coupling_strength * coupling_strength;
    let mut rates = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s2 = s[(j, i)].modulus_squared();
            if i != j && s2 > T::zero() && l2 > T::zero() {
                rates[(i, j)] = l2 * reservoir.value(temperature, w[j] - w[i])? * s2;
            }
        }
    }
    RateMatrix::from_rates(rates)
}

/// Coherence damping rates `Gamma[(k1, k2)]`, half the summed total decay
/// out of `k1` and `k2` (pure-dephasing terms from diagonal `S_kk`
/// included). Symmetric, non-negative, zero diagonal.
pub fn coherence_decay_rates<T: Real>(
    eig: &EigenSystem<T>,
    reservoir: &SpectralFunction<T>,
    temperature: T,
    coupling_strength: T,
) -> Result<DMatrix<T>> {
    let out = LindbladGenerator::new(eig, reservoir, temperature, coupling_strength)?
        .total_outflow();
    let n = eig.dim();
    let half = T::of(0.5);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::zero()
        } else {
            half * (out[i] + out[j])
        }
    }))
}

/// Density matrix in the Hamiltonian eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState<T: Real> {
    matrix: DMatrix<C<T>>,
    time: T,
}

impl<T: Real> DensityState<T> {
    /// Checks Hermiticity, unit trace and positivity (all to 1e-9).
    pub fn new(matrix: DMatrix<C<T>>, time: T) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let tol = T::tol(DENSITY_TOLERANCE);
        let herm = crate::model::hermiticity_residual(&matrix);
        if herm > tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (residual {herm})")));
        }
        let state = Self {
            matrix: (&matrix + matrix.adjoint()) * re(T::of(0.5)),
            time,
        };
        let trace = state.trace();
        if (trace - T::one()).abs() > tol {
            return Err(Error::InvalidDensity(format!("trace is {trace}, expected 1")));
        }
        let min_eig = state.min_eigenvalue();
        if min_eig < -tol {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig}"
            )));
        }
        Ok(state)
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(p: &DVector<T>) -> Result<Self> {
        check_distribution(p)?;
        Ok(Self {
            matrix: DMatrix::from_diagonal(&p.map(re)),
            time: T::zero(),
        })
    }

    pub(crate) fn unchecked(matrix: DMatrix<C<T>>, time: T) -> Self {
        Self { matrix, time }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.matrix
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn populations(&self) -> DVector<T> {
        DVector::from_fn(self.dim(), |i, _| self.matrix[(i, i)].re)
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> T {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }

    /// Entrywise L1 distance `sum_ij |rho_ij - sigma_ij|`.
    pub fn l1_distance(&self, other: &DensityState<T>) -> T {
        (&self.matrix - &other.matrix)
            .iter()
            .fold(T::zero(), |acc, z| acc + z.modulus())
    }
}

pub(crate) fn check_distribution<T: Real>(p: &DVector<T>) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    let tol = T::tol(DENSITY_TOLERANCE);
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -tol) {
        return Err(Error::InvalidDistribution(format!("entry {} is {v}", i + 1)));
    }
    let total = p.sum();
    if (total - T::one()).abs() > tol {
        return Err(Error::InvalidDistribution(format!("sums to {total}, expected 1")));
    }
    Ok(())
}

/// Sampled solution of the master equation.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn populations(&self) -> Vec<DVector<T>> {
        self.states.iter().map(DensityState::populations).collect()
    }

    pub fn last(&self) -> &DensityState<T> {
        self.states.last().expect("trajectories are non-empty")
    }

    /// `max_t |Tr rho(t) - 1|`.
    pub fn max_trace_drift(&self) -> T {
        self.states
            .iter()
            .fold(T::zero(), |m, s| m.max((s.trace() - T::one()).abs()))
    }

    /// Largest change of any block's total population relative to `t = 0`.
    pub fn max_block_weight_drift(&self, part: &SubspacePartition) -> T {
        let weight = |s: &DensityState<T>, b: &[usize]| {
            b.iter().fold(T::zero(), |acc, &i| acc + s.matrix()[(i, i)].re)
        };
        let first = &self.states[0];
        let mut worst = T::zero();
        for b in part.blocks() {
            let w0 = weight(first, b);
            for s in &self.states {
                worst = worst.max((weight(s, b) - w0).abs());
            }
        }
        worst
    }
}

/// Integrates the Pauli equation from `p0` and samples it at `times`.
pub fn evolve_populations<T: Real>(
    rates: &RateMatrix<T>,
    p0: &DVector<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    evolve_populations_with(rates, p0, times, &Dopri5::default())
}

pub fn evolve_populations_with<T: Real>(
    rates: &RateMatrix<T>,
    p0: &DVector<T>,
    times: &[T],
    stepper: &Dopri5<T>,
) -> Result<Trajectory<T>> {
    if p0.len() != rates.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial populations",
            expected: rates.dim(),
            found: p0.len(),
        });
    }
    check_distribution(p0)?;
    let q = rates.generator();
    let samples = stepper.integrate(|p| &q * p, p0.clone(), times)?;
    let states = samples
        .iter()
        .zip(times)
        .map(|(p, &t)| DensityState::unchecked(DMatrix::from_diagonal(&p.map(re)), t))
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// `p(t) = exp(Q t) p0` by matrix exponential; an independent check on the
/// stepper.
pub fn exact_populations<T: Real>(rates: &RateMatrix<T>, p0: &DVector<T>, t: T) -> DVector<T> {
    (rates.generator() * t).exp() * p0
}

/// Everything needed to propagate a density matrix in the eigenbasis.
#[derive(Debug, Clone)]
pub struct MasterEquation<T: Real> {
    frequencies: DVector<T>,
    rates: RateMatrix<T>,
    decay: DMatrix<T>,
}

impl<T: Real> MasterEquation<T> {
    pub fn new(model: &SystemModel<T>) -> Result<Self> {
        Self::from_eigensystem(
            &eigenbasis(model)?,
            model.reservoir(),
            model.temperature(),
            model.coupling_strength(),
        )
    }

    pub fn from_eigensystem(
        eig: &EigenSystem<T>,
        reservoir: &SpectralFunction<T>,
        temperature: T,
        coupling_strength: T,
    ) -> Result<Self> {
        Ok(Self {
            frequencies: eig.frequencies().clone(),
            rates: rate_matrix(eig, reservoir, temperature, coupling_strength)?,
            decay: coherence_decay_rates(eig, reservoir, temperature, coupling_strength)?,
        })
    }

    pub fn rates(&self) -> &RateMatrix<T> {
        &self.rates
    }

    pub fn decay_rates(&self) -> &DMatrix<T> {
        &self.decay
    }

    /// Smallest positive rate among transitions and coherence damping.
    pub fn min_positive_rate(&self) -> Option<T> {
        let damping = self.decay.iter().copied().filter(|g| *g > T::zero());
        self.rates
            .min_positive_rate()
            .into_iter()
            .chain(damping)
            .reduce(|a, b| a.min(b))
    }

    /// Populations by numerical integration, coherences by
    /// `rho_kl(t) = rho_kl(0) exp(-Gamma_kl t - i (w_k - w_l) t)`.
    pub fn evolve(&self, rho0: &DensityState<T>, times: &[T]) -> Result<Trajectory<T>> {
        let n = self.frequencies.len();
        if rho0.dim() != n {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: n,
                found: rho0.dim(),
            });
        }
        let pops = evolve_populations(&self.rates, &rho0.populations(), times)?;
        let w = &self.frequencies;
        let states = pops
            .states
            .into_iter()
            .map(|s| {
                let t = s.time();
                let mut m = s.matrix;
                for k in 0..n {
                    for l in 0..n {
                        if k != l {
                            let damp = (-self.decay[(k, l)] * t).exp();
                            let phase = -(w[k] - w[l]) * t;
                            let factor = C::new(damp * phase.cos(), damp * phase.sin());
                            m[(k, l)] = rho0.matrix()[(k, l)] * factor;
                        }
                    }
                }
                DensityState::unchecked(m, t)
            })
            .collect();
        Ok(Trajectory {
            times: times.to_vec(),
            states,
        })
    }
}

/// Evolves `rho0` (given in the eigenbasis) under the model's master equation.
pub fn evolve_density<T: Real>(
    model: &SystemModel<T>,
    rho0: &DensityState<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    MasterEquation::new(model)?.evolve(rho0, times)
}

/// `n` evenly spaced times from 0 to `t_max` inclusive.
pub fn uniform_times<T: Real>(t_max: T, n: usize) -> Vec<T> {
    if n <= 1 {
        return vec![t_max];
    }
    (0..n)
        .map(|k| t_max * T::of(k as f64) / T::of((n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tolerances;

    fn c(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn two_level(s: [[f64; 2]; 2], gap: f64) -> EigenSystem<f64> {
        let m = DMatrix::from_fn(2, 2, |i, j| c(s[i][j]));
        EigenSystem::from_diagonal(DVector::from_vec(vec![0.0, gap]), m, &Tolerances::default())
            .unwrap()
    }

    #[test]
    fn uphill_rate_is_boltzmann_suppressed() {
        let eig = two_level([[0.0, 1.0], [1.0, 0.0]], 1.0);
        let g = SpectralFunction::flat_kms(1.0).unwrap();
        let w = rate_matrix(&eig, &g, 1.0, 1.0).unwrap();
        // downhill 1 -> 0 has rate 1, uphill 0 -> 1 is e^{-1}
        assert!((w.rate(0, 1) - 1.0).abs() < 1e-15);
        assert!((w.rate(1, 0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(w.detailed_balance_residual(eig.frequencies(), 1.0) < 1e-15);
    }

    #[test]
    fn dephasing_and_zero_coupling_give_zero_rates() {
        let g = SpectralFunction::flat_kms(1.0).unwrap();
        let diag = two_level([[1.5, 0.0], [0.0, -0.5]], 1.0);
        assert!(rate_matrix(&diag, &g, 1.0, 1.0).unwrap().rates().iter().all(|r| *r == 0.0));
        let coupled = two_level([[0.0, 1.0], [1.0, 0.0]], 1.0);
        assert!(rate_matrix(&coupled, &g, 1.0, 0.0).unwrap().rates().iter().all(|r| *r == 0.0));
    }

    #[test]
    fn uncoupled_levels_keep_coherence() {
        let eig = EigenSystem::from_diagonal(
            DVector::from_vec(vec![0.0, 1.0, 2.0]),
            DMatrix::from_fn(3, 3, |i, j| if i == 2 && j == 2 { c(1.0) } else { c(0.0) }),
            &Tolerances::default(),
        )
        .unwrap();
        let g = SpectralFunction::flat_kms(1.0).unwrap();
        let gamma = coherence_decay_rates(&eig, &g, 1.0, 1.0).unwrap();
        assert_eq!(gamma[(0, 1)], 0.0);
        assert!(gamma[(0, 2)] > 0.0);
        assert_eq!(gamma, gamma.transpose());
    }

    #[test]
    fn dephasing_decay_uses_diagonal_entries() {
        let a: f64 = 0.5;
        let s = [1.0 + a, -(1.0 + a), 1.0 - a, -1.0 + a];
        let eig = EigenSystem::from_diagonal(
            DVector::from_vec(vec![0.0, 1.0, 1.5, 2.5]),
            DMatrix::from_fn(4, 4, |i, j| if i == j { c(s[i]) } else { c(0.0) }),
            &Tolerances::default(),
        )
        .unwrap();
        let g = SpectralFunction::flat_kms(2.0).unwrap();
        let lambda: f64 = 0.7;
        let gamma = coherence_decay_rates(&eig, &g, 1.0, lambda).unwrap();
        let g0 = lambda * lambda * 2.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let expected = 0.5 * (g0 * s[i] * s[i] + g0 * s[j] * s[j]);
                    assert!((gamma[(i, j)] - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn populations_relax_to_two_level_gibbs() {
        let rates = RateMatrix::from_rates(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, (-1.0f64).exp(), 1.0, 0.0],
        ))
        .unwrap();
        // order (upper, lower): upper decays at 1
        let traj =
            evolve_populations(&rates, &DVector::from_vec(vec![0.1, 0.9]), &uniform_times(20.0, 41))
                .unwrap();
        let p = traj.last().populations();
        let e = (-1.0f64).exp();
        assert!((p[0] - e / (1.0 + e)).abs() < 1e-9);
        assert!(traj.max_trace_drift() < 1e-12);
    }

    #[test]
    fn stepper_matches_matrix_exponential() {
        let rates = RateMatrix::from_rates(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 0.4, 0.1, 0.3, 0.0, 0.9, 0.2, 0.5, 0.0],
        ))
        .unwrap();
        let p0 = DVector::from_vec(vec![0.6, 0.1, 0.3]);
        let traj = evolve_populations(&rates, &p0, &[0.5, 2.0, 7.0]).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = exact_populations(&rates, &p0, *t);
            assert!((s.populations() - exact).amax() < 1e-9);
        }
    }

    #[test]
    fn invalid_initial_distribution_is_rejected() {
        let rates = RateMatrix::from_rates(DMatrix::zeros(2, 2)).unwrap();
        let bad = DVector::from_vec(vec![0.7, 0.7]);
        assert!(matches!(
            evolve_populations(&rates, &bad, &[1.0]),
            Err(Error::InvalidDistribution(_))
        ));
        let neg = DVector::from_vec(vec![1.5, -0.5]);
        assert!(evolve_populations(&rates, &neg, &[1.0]).is_err());
    }

    #[test]
    fn density_state_invariants() {
        assert!(DensityState::new(DMatrix::from_row_slice(1, 1, &[c(1.0)]), 0.0).is_ok());
        let not_trace_one = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(DensityState::new(not_trace_one, 0.0).is_err());
        let not_positive = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.9), c(0.9), c(0.5)]);
        assert!(DensityState::new(not_positive, 0.0).is_err());
        let not_hermitian =
            DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityState::new(not_hermitian, 0.0).is_err());
    }

    #[test]
    fn single_coherence_decays_in_closed_form() {
        let eig = two_level([[0.3, 0.0], [0.0, -0.8]], 1.0);
        let g = SpectralFunction::flat_kms(1.5).unwrap();
        let eq = MasterEquation::from_eigensystem(&eig, &g, 1.0, 1.0).unwrap();
        let rho0 = DensityState::new(
            DMatrix::from_row_slice(2, 2, &[c(0.5), C::new(0.3, 0.2), C::new(0.3, -0.2), c(0.5)]),
            0.0,
        )
        .unwrap();
        let gamma = eq.decay_rates()[(0, 1)];
        assert!((gamma - 0.5 * 1.5 * (0.09 + 0.64)).abs() < 1e-14);
        let traj = eq.evolve(&rho0, &uniform_times(3.0, 7)).unwrap();
        let a0 = rho0.matrix()[(0, 1)].modulus();
        for s in &traj.states {
            let expected = a0 * (-gamma * s.time()).exp();
            assert!((s.matrix()[(0, 1)].modulus() - expected).abs() < 1e-14);
            assert_eq!(s.populations(), rho0.populations());
        }
    }
}
