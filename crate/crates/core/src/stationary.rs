//! Stationary states: block-wise Gibbs distributions mixed by the conserved
//! block weights of the initial state.

use nalgebra::{DMatrix, DVector};

use crate::decomposition::{default_epsilon_s, invariant_partition, SubspacePartition};
use crate::dynamics::{rate_matrix, DensityState, RateMatrix, DENSITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{eigenbasis, EigenSystem, SystemModel};
use crate::scalar::{re, Real};

/// Relative singular-value threshold for the null-space oracle.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

/// `p_i ∝ exp(-w_i / T)`, shifted by the smallest frequency before
/// exponentiating.
pub fn gibbs_distribution<T: Real>(frequencies: &[T], temperature: T) -> DVector<T> {
    let w0 = frequencies
        .iter()
        .copied()
        .reduce(|a, b| a.min(b))
        .unwrap_or(T::zero());
    let weights = DVector::from_iterator(
        frequencies.len(),
        frequencies.iter().map(|&w| (-(w - w0) / temperature).exp()),
    );
    let z = weights.sum();
    weights / z
}

/// Gibbs distribution over the whole spectrum.
pub fn gibbs_state<T: Real>(eig: &EigenSystem<T>, temperature: T) -> DVector<T> {
    gibbs_distribution(eig.frequencies().as_slice(), temperature)
}

/// Total population of each block, normalized by the trace so the weights
/// form a convex combination.
pub fn block_weights<T: Real>(part: &SubspacePartition, rho: &DensityState<T>) -> Result<DVector<T>> {
    if rho.dim() != part.dim() {
        return Err(Error::DimensionMismatch {
            what: "density matrix",
            expected: part.dim(),
            found: rho.dim(),
        });
    }
    let trace = rho.trace();
    if (trace - T::one()).abs() > T::tol(DENSITY_TOLERANCE) {
        return Err(Error::InvalidDensity(format!("trace is {trace}, expected 1")));
    }
    // roundoff can leave tiny negative populations on a valid state
    let w = population_weights(part, &rho.populations()).map(|x| x.max(T::zero()));
    let total = w.sum();
    Ok(w / total)
}

pub(crate) fn population_weights<T: Real>(part: &SubspacePartition, p: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(
        part.block_count(),
        part.blocks()
            .iter()
            .map(|b| b.iter().fold(T::zero(), |acc, &i| acc + p[i])),
    )
}

#[derive(Debug, Clone)]
pub struct StationaryPrediction<T: Real> {
    /// Conserved weight of each block.
    pub weights: DVector<T>,
    /// Gibbs distribution of each block over its own levels, in block order.
    pub block_gibbs: Vec<DVector<T>>,
    /// The diagonal stationary density matrix.
    pub assembled: DensityState<T>,
}

impl<T: Real> StationaryPrediction<T> {
    pub fn populations(&self) -> DVector<T> {
        self.assembled.populations()
    }
}

/// Stationary state reached from `rho0` under `model`, using the default
/// invariant partition.
pub fn stationary_state<T: Real>(
    model: &SystemModel<T>,
    rho0: &DensityState<T>,
) -> Result<StationaryPrediction<T>> {
    let eig = eigenbasis(model)?;
    let part = invariant_partition(&eig, default_epsilon_s(&eig));
    stationary_state_in(&eig, &part, model.temperature(), rho0)
}

/// Stationary state for an already computed eigensystem and partition.
pub fn stationary_state_in<T: Real>(
    eig: &EigenSystem<T>,
    part: &SubspacePartition,
    temperature: T,
    rho0: &DensityState<T>,
) -> Result<StationaryPrediction<T>> {
    if part.dim() != eig.dim() {
        return Err(Error::DimensionMismatch {
            what: "partition",
            expected: eig.dim(),
            found: part.dim(),
        });
    }
    let weights = block_weights(part, rho0)?;
    let w = eig.frequencies();
    let block_gibbs: Vec<DVector<T>> = part
        .blocks()
        .iter()
        .map(|b| {
            let freqs: Vec<T> = b.iter().map(|&i| w[i]).collect();
            gibbs_distribution(&freqs, temperature)
        })
        .collect();
    let mut p = DVector::zeros(eig.dim());
    for ((b, g), &lam) in part.blocks().iter().zip(&block_gibbs).zip(weights.iter()) {
        for (k, &i) in b.iter().enumerate() {
            p[i] = lam * g[k];
        }
    }
    let assembled = DensityState::unchecked(DMatrix::from_diagonal(&p.map(re)), T::zero());
    Ok(StationaryPrediction {
        weights,
        block_gibbs,
        assembled,
    })
}

/// Per-block stationary distributions from the kernel of the restricted
/// rate generator, computed by SVD.
pub fn null_space_stationary<T: Real>(
    rates: &RateMatrix<T>,
    part: &SubspacePartition,
) -> Result<Vec<DVector<T>>> {
    if rates.dim() != part.dim() {
        return Err(Error::DimensionMismatch {
            what: "partition",
            expected: rates.dim(),
            found: part.dim(),
        });
    }
    part.blocks()
        .iter()
        .enumerate()
        .map(|(l, b)| block_kernel(&rates.restrict(b), l))
        .collect()
}

fn block_kernel<T: Real>(rates: &RateMatrix<T>, block: usize) -> Result<DVector<T>> {
    let n = rates.dim();
    if n == 1 {
        return Ok(DVector::from_element(1, T::one()));
    }
    let q = rates.generator();
    let svd = q.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let cutoff = T::of(KERNEL_THRESHOLD) * smax;
    let kernel: Vec<usize> = (0..n).filter(|&k| sigma[k] <= cutoff).collect();
    if kernel.len() != 1 || smax == T::zero() {
        return Err(Error::KernelDimension {
            block: block + 1,
            dimension: if smax == T::zero() { n } else { kernel.len() },
        });
    }
    let v = v_t.row(kernel[0]).transpose();
    let total = v.sum();
    Ok(v / total)
}

/// `max_i |dp_i/dt|` of the Pauli equation at the given populations.
pub fn fixed_point_residual<T: Real>(rates: &RateMatrix<T>, p: &DVector<T>) -> T {
    rates.derivative(p).amax()
}

/// Max entrywise distance between the null-space oracle and block Gibbs.
pub fn oracle_distance<T: Real>(
    eig: &EigenSystem<T>,
    part: &SubspacePartition,
    rates: &RateMatrix<T>,
    temperature: T,
) -> Result<T> {
    let kernels = null_space_stationary(rates, part)?;
    let w = eig.frequencies();
    let mut worst = T::zero();
    for (b, k) in part.blocks().iter().zip(&kernels) {
        let freqs: Vec<T> = b.iter().map(|&i| w[i]).collect();
        worst = worst.max((gibbs_distribution(&freqs, temperature) - k).amax());
    }
    Ok(worst)
}

/// Rate matrix of `model` together with its eigensystem; convenience for
/// callers that need both.
pub fn model_rates<T: Real>(model: &SystemModel<T>) -> Result<(EigenSystem<T>, RateMatrix<T>)> {
    let eig = eigenbasis(model)?;
    let w = rate_matrix(
        &eig,
        model.reservoir(),
        model.temperature(),
        model.coupling_strength(),
    )?;
    Ok((eig, w))
}
