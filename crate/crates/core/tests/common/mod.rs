//! Seeded random models shared by the integration and acceptance tests.
#![allow(dead_code)]

use lindblad_coms::{
    eigenbasis, DensityState, EigenSystem, Extrapolation, SpectralFunction, SystemModel, C,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C<f64> {
    C::new(re, im)
}

/// Strictly increasing levels starting at 0 with gaps in `[0.2, 1]`.
pub fn spectrum(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    let mut w = 0.0;
    DVector::from_fn(n, |i, _| {
        if i > 0 {
            w += rng.random_range(0.2..1.0);
        }
        w
    })
}

fn entry(rng: &mut impl Rng) -> C<f64> {
    let mag = rng.random_range(0.3..1.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    C::from_polar(mag, phase)
}

/// Hermitian matrix with each off-diagonal pair zero with probability
/// `sparsity` and a real diagonal in `[-1, 1]`.
pub fn sparse_hermitian(rng: &mut impl Rng, n: usize, sparsity: f64) -> DMatrix<C<f64>> {
    let mut s = DMatrix::from_element(n, n, c(0.0, 0.0));
    for i in 0..n {
        s[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            if !rng.random_bool(sparsity) {
                let z = entry(rng);
                s[(i, j)] = z;
                s[(j, i)] = z.conj();
            }
        }
    }
    s
}

/// Hermitian coupling whose graph has exactly the given connected blocks:
/// a random spanning tree per block plus extra edges with probability
/// `extra`, and a nonzero diagonal.
pub fn block_coupling(
    rng: &mut impl Rng,
    n: usize,
    blocks: &[Vec<usize>],
    extra: f64,
) -> DMatrix<C<f64>> {
    let mut s = DMatrix::from_element(n, n, c(0.0, 0.0));
    for i in 0..n {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        s[(i, i)] = c(sign * rng.random_range(0.3..1.0), 0.0);
    }
    for b in blocks {
        for k in 1..b.len() {
            let parent = b[rng.random_range(0..k)];
            let z = entry(rng);
            s[(b[k], parent)] = z;
            s[(parent, b[k])] = z.conj();
        }
        for x in 0..b.len() {
            for y in 0..x {
                let (i, j) = (b[x], b[y]);
                if s[(i, j)].norm() == 0.0 && rng.random_bool(extra) {
                    let z = entry(rng);
                    s[(i, j)] = z;
                    s[(j, i)] = z.conj();
                }
            }
        }
    }
    s
}

/// Random grouping of `0..n` into blocks of size at most `max_size`,
/// with levels shuffled across blocks.
pub fn random_blocks(rng: &mut impl Rng, n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut blocks = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = rng.random_range(1..=max_size.min(rest.len()));
        let mut b = rest[..size].to_vec();
        b.sort_unstable();
        blocks.push(b);
        rest = &rest[size..];
    }
    blocks.sort();
    blocks
}

/// Haar-like random unitary from the QR factor of a random complex matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> DMatrix<C<f64>> {
    let m = DMatrix::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    m.qr().q()
}

/// One of the three reservoir families with random parameters; tables
/// cover `[0, max(range, 1)]` and hold their last value beyond it.
pub fn reservoir(rng: &mut impl Rng, range: f64) -> SpectralFunction<f64> {
    let range = range.max(1.0);
    match rng.random_range(0..3) {
        0 => SpectralFunction::flat_kms(rng.random_range(0.5..2.0)).unwrap(),
        1 => SpectralFunction::ohmic_thermal(rng.random_range(0.5..2.0), rng.random_range(2.0..8.0))
            .unwrap(),
        _ => {
            let points = (0..=8)
                .map(|k| (range * k as f64 / 8.0, rng.random_range(0.5..2.0)))
                .collect();
            SpectralFunction::tabulated(points, Extrapolation::Constant).unwrap()
        }
    }
}

/// Model with eigenbasis coupling `s_eig`, presented in a random basis.
pub fn rotated_model(
    rng: &mut impl Rng,
    w: &DVector<f64>,
    s_eig: &DMatrix<C<f64>>,
    g: SpectralFunction<f64>,
    temperature: f64,
) -> SystemModel<f64> {
    let n = w.len();
    let u = unitary(rng, n);
    let h = &u * DMatrix::from_diagonal(&w.map(|x| c(x, 0.0))) * u.adjoint();
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let s = &u * s_eig * u.adjoint();
    let s = (&s + s.adjoint()) * c(0.5, 0.0);
    SystemModel::new(h, s, 1.0, g, temperature).unwrap()
}

pub struct RandomModel {
    pub model: SystemModel<f64>,
    pub eig: EigenSystem<f64>,
    /// Blocks the coupling was built with (0-based eigen indices).
    pub blocks: Vec<Vec<usize>>,
}

/// Model with prescribed invariant blocks, in a random input basis.
pub fn block_model(rng: &mut impl Rng, n: usize, max_block: usize, extra: f64) -> RandomModel {
    let w = spectrum(rng, n);
    let blocks = random_blocks(rng, n, max_block);
    let s = block_coupling(rng, n, &blocks, extra);
    let g = reservoir(rng, w[n - 1] - w[0]);
    let temperature = rng.random_range(0.5..2.0);
    let model = rotated_model(rng, &w, &s, g, temperature);
    let eig = eigenbasis(&model).unwrap();
    RandomModel { model, eig, blocks }
}

/// Random valid density matrix: a mixture of random pure states.
pub fn density(rng: &mut impl Rng, n: usize) -> DensityState<f64> {
    let mut rho = DMatrix::from_element(n, n, c(0.0, 0.0));
    let mut total = 0.0;
    for _ in 0..3 {
        let v = DVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let v = &v / c(v.norm(), 0.0);
        let weight = rng.random_range(0.1..1.0);
        total += weight;
        rho += &v * v.adjoint() * c(weight, 0.0);
    }
    DensityState::new(rho / c(total, 0.0), 0.0).unwrap()
}

/// Random probability vector.
pub fn distribution(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.random_range(0.01..1.0));
    let total = v.sum();
    v / total
}
