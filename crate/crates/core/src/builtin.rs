//! Two two-level systems sharing a dephasing-type reservoir, with optional
//! exchange interaction, and the closed-form eigenstructure of that model.
//!
//! Product basis order is `(|e1 e2>, |g1 g2>, |e1 g2>, |g1 e2>)`. The
//! analytic eigenstates are labelled `psi_1 = |e1 e2>`, `psi_2 = |g1 g2>`,
//! `psi_3 = cos(phi)|e1 g2> + sin(phi)|g1 e2>` (upper mixed level) and
//! `psi_4 = -sin(phi)|e1 g2> + cos(phi)|g1 e2>` (lower mixed level). The
//! numeric eigenbasis is energy-sorted; [`TwoTlsAnalytics::sorted_to_psi`]
//! maps between the two.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::RateMatrix;
use crate::error::{Error, Result};
use crate::model::{eigenbasis, SpectralFunction, SystemModel};
use crate::scalar::{re, Real, C};

/// Index of `|e1 e2>` in the product basis.
pub const E1E2: usize = 0;
pub const G1G2: usize = 1;
pub const E1G2: usize = 2;
pub const G1E2: usize = 3;

#[derive(Debug, Clone)]
pub struct TwoTlsSpec<T: Real> {
    pub omega1: T,
    pub omega2: T,
    /// Exchange (Rabi) constant; zero for independent emitters.
    pub rabi: T,
    /// Ratio of the second emitter's reservoir coupling to the first's.
    pub asymmetry: T,
    pub coupling_strength: T,
    pub temperature: T,
    pub reservoir: SpectralFunction<T>,
}

impl<T: Real> TwoTlsSpec<T> {
    /// Interacting configuration of the relaxation figure: `omega1 = omega2 = 1`,
    /// `Omega_R = 0.5` (mixed-level splitting 1), `a = 0.5`, `T = 1`, and a
    /// flat KMS reservoir scaled so that the downhill rate in the mixed
    /// block is exactly 1.
    pub fn figure1() -> Self {
        let one = T::one();
        let half = T::of(0.5);
        let mut spec = Self {
            omega1: one,
            omega2: one,
            rabi: half,
            asymmetry: half,
            coupling_strength: one,
            temperature: one,
            reservoir: SpectralFunction::FlatKms { g0: one },
        };
        let phi = spec.mixing_angle().expect("rabi is nonzero");
        let s34 = (T::of(2.0) * phi).sin() * (one - spec.asymmetry);
        spec.reservoir = SpectralFunction::FlatKms {
            g0: one / (spec.coupling_strength * spec.coupling_strength * s34 * s34),
        };
        spec
    }

    /// Independent emitters with distinct frequencies `1` and `1.5`, so the
    /// single-excitation levels are not degenerate.
    pub fn non_interacting() -> Self {
        let one = T::one();
        Self {
            omega1: one,
            omega2: T::of(1.5),
            rabi: T::zero(),
            asymmetry: T::of(0.5),
            coupling_strength: one,
            temperature: one,
            reservoir: SpectralFunction::FlatKms { g0: one },
        }
    }

    pub fn detuning(&self) -> T {
        self.omega1 - self.omega2
    }

    pub fn is_interacting(&self) -> bool {
        self.rabi != T::zero()
    }

    /// `phi = arctan((sqrt(dw^2/4 + Omega^2) - dw/2) / Omega)`, continued to
    /// `Omega = 0` as `0` (dw > 0) or `pi/2` (dw < 0).
    pub fn mixing_angle(&self) -> Result<T> {
        let dw = self.detuning();
        let half = T::of(0.5);
        if self.rabi == T::zero() {
            return if dw > T::zero() {
                Ok(T::zero())
            } else if dw < T::zero() {
                Ok(T::frac_pi_2())
            } else {
                Err(Error::UndefinedMixingAngle)
            };
        }
        let root = (dw * dw * half * half + self.rabi * self.rabi).sqrt();
        Ok(((root - dw * half) / self.rabi).atan())
    }

    fn check(&self) -> Result<()> {
        if !(self.omega1 > T::zero() && self.omega2 > T::zero()) {
            return Err(Error::InvalidParameter(
                "transition frequencies must be positive".into(),
            ));
        }
        if !self.rabi.is_finite() || !self.asymmetry.is_finite() {
            return Err(Error::InvalidParameter(
                "rabi constant and asymmetry must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Lowering operator of the first emitter in the product basis.
pub fn sigma1<T: Real>() -> DMatrix<C<T>> {
    let mut m = DMatrix::zeros(4, 4);
    m[(G1E2, E1E2)] = re(T::one());
    m[(G1G2, E1G2)] = re(T::one());
    m
}

/// Lowering operator of the second emitter in the product basis.
pub fn sigma2<T: Real>() -> DMatrix<C<T>> {
    let mut m = DMatrix::zeros(4, 4);
    m[(E1G2, E1E2)] = re(T::one());
    m[(G1G2, G1E2)] = re(T::one());
    m
}

/// `sigma^z = [sigma^dagger, sigma]`.
pub fn sigma_z<T: Real>(lowering: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    let up = lowering.adjoint();
    &up * lowering - lowering * &up
}

/// `sigma1^dagger sigma1 + sigma2^dagger sigma2`, eigenvalues `(2, 0, 1, 1)`.
pub fn excitation_number_operator<T: Real>() -> DMatrix<C<T>> {
    let (s1, s2) = (sigma1::<T>(), sigma2::<T>());
    s1.adjoint() * &s1 + s2.adjoint() * &s2
}

/// `sigma1^z + sigma2^z`, eigenvalues `(2, -2, 0, 0)`.
pub fn inversion_operator<T: Real>() -> DMatrix<C<T>> {
    sigma_z(&sigma1::<T>()) + sigma_z(&sigma2::<T>())
}

/// Hamiltonian `w1 s1+ s1 + w2 s2+ s2 + Omega (s1+ s2 + s2+ s1)`.
pub fn two_tls_hamiltonian<T: Real>(spec: &TwoTlsSpec<T>) -> DMatrix<C<T>> {
    let (s1, s2) = (sigma1::<T>(), sigma2::<T>());
    let (u1, u2) = (s1.adjoint(), s2.adjoint());
    &u1 * &s1 * re(spec.omega1) + &u2 * &s2 * re(spec.omega2) + (&u1 * &s2 + &u2 * &s1) * re(spec.rabi)
}

/// Coupling operator `sigma1^z + a sigma2^z`.
pub fn two_tls_coupling<T: Real>(spec: &TwoTlsSpec<T>) -> DMatrix<C<T>> {
    sigma_z(&sigma1::<T>()) + sigma_z(&sigma2::<T>()) * re(spec.asymmetry)
}

pub fn two_tls_model<T: Real>(spec: &TwoTlsSpec<T>) -> Result<SystemModel<T>> {
    spec.check()?;
    SystemModel::new(
        two_tls_hamiltonian(spec),
        two_tls_coupling(spec),
        spec.coupling_strength,
        spec.reservoir.clone(),
        spec.temperature,
    )
}

/// Closed-form eigenstructure of the two-TLS Hamiltonian.
#[derive(Debug, Clone)]
pub struct TwoTlsAnalytics<T: Real> {
    /// `E_1 .. E_4` in `psi` order.
    pub energies: [T; 4],
    pub mixing_angle: T,
    /// `(alpha_3, beta_3)` and `(alpha_4, beta_4)`: amplitudes of
    /// `psi_3`, `psi_4` on `|e1 g2>` and `|g1 e2>`.
    pub coefficients: [(T, T); 2],
    /// Column `k` is `psi_{k+1}` in the product basis.
    pub eigenvectors: DMatrix<T>,
    /// `sorted_to_psi[k]` is the `psi` label (1-based) of the `k`-th lowest level.
    pub sorted_to_psi: [usize; 4],
    /// `|<psi_3|S|psi_4>| = |sin 2 phi| (1 - a)`.
    pub mixed_coupling: T,
}

impl<T: Real> TwoTlsAnalytics<T> {
    /// `|psi_k><psi_k|` in the product basis (`k` 1-based).
    pub fn projector(&self, k: usize) -> DMatrix<T> {
        let v = self.eigenvectors.column(k - 1);
        v * v.transpose()
    }

    /// Relabels 0-based sorted indices as 1-based `psi` labels, each block
    /// sorted, blocks ordered by smallest label.
    pub fn psi_blocks(&self, sorted_blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = sorted_blocks
            .iter()
            .map(|b| {
                let mut v: Vec<usize> = b.iter().map(|&k| self.sorted_to_psi[k]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        blocks.sort();
        blocks
    }

    /// 0-based sorted index of `psi_k`.
    pub fn sorted_index(&self, psi: usize) -> usize {
        self.sorted_to_psi
            .iter()
            .position(|&p| p == psi)
            .expect("labels 1..=4")
    }
}

pub fn two_tls_analytics<T: Real>(spec: &TwoTlsSpec<T>) -> Result<TwoTlsAnalytics<T>> {
    spec.check()?;
    let phi = spec.mixing_angle()?;
    let half = T::of(0.5);
    let dw = spec.detuning();
    let mean = (spec.omega1 + spec.omega2) * half;
    let root = (dw * dw * half * half + spec.rabi * spec.rabi).sqrt();
    let energies = [spec.omega1 + spec.omega2, T::zero(), mean + root, mean - root];
    let (s, c) = phi.sin_cos();
    let coefficients = [(c, s), (-s, c)];
    let mut eigenvectors = DMatrix::zeros(4, 4);
    eigenvectors[(E1E2, 0)] = T::one();
    eigenvectors[(G1G2, 1)] = T::one();
    for (k, &(alpha, beta)) in coefficients.iter().enumerate() {
        eigenvectors[(E1G2, 2 + k)] = alpha;
        eigenvectors[(G1E2, 2 + k)] = beta;
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).expect("finite energies"));
    let sorted_to_psi = order.map(|k| k + 1);
    Ok(TwoTlsAnalytics {
        energies,
        mixing_angle: phi,
        coefficients,
        eigenvectors,
        sorted_to_psi,
        mixed_coupling: ((T::of(2.0) * phi).sin() * (T::one() - spec.asymmetry)).abs(),
    })
}

/// Two-state relaxation problem of the mixed block.
#[derive(Debug, Clone)]
pub struct Figure1Setup<T: Real> {
    /// Rates ordered `(p_3, p_4)`: index 0 is the upper level `psi_3`.
    pub rates: RateMatrix<T>,
    /// Initial `(p_3, p_4)` of the three plotted curves.
    pub initial_conditions: Vec<DVector<T>>,
}

/// Restricts the rate matrix of [`TwoTlsSpec::figure1`] to `{psi_3, psi_4}`.
pub fn figure1_setup<T: Real>() -> Result<Figure1Setup<T>> {
    let spec = TwoTlsSpec::<T>::figure1();
    let model = two_tls_model(&spec)?;
    let eig = eigenbasis(&model)?;
    let analytics = two_tls_analytics(&spec)?;
    let all = crate::dynamics::rate_matrix(
        &eig,
        model.reservoir(),
        model.temperature(),
        model.coupling_strength(),
    )?;
    let block = [analytics.sorted_index(3), analytics.sorted_index(4)];
    let initial_conditions = [(0.7, 0.3), (0.3, 0.7), (0.1, 0.9)]
        .iter()
        .map(|&(a, b)| DVector::from_vec(vec![T::of(a), T::of(b)]))
        .collect();
    Ok(Figure1Setup {
        rates: all.restrict(&block),
        initial_conditions,
    })
}
