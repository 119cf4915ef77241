//! Reservoir spectral functions.
//!
//! Every family stores `G(omega)` on the non-negative half-line only. Values at
//! negative frequency are produced by the thermal (KMS) completion
//! `G(-w) = exp(-w / T) G(w)`, so the identity `G(w) = exp(w / T) G(-w)` holds
//! structurally rather than being checked at runtime.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Behaviour of a tabulated spectrum beyond its last sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Queries outside the sampled range are an error.
    #[default]
    None,
    /// Hold the nearest end value.
    Constant,
}

/// Sampled `G(omega)` for `omega >= 0` with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable<T> {
    points: Vec<(T, T)>,
    extrapolation: Extrapolation,
    negative_reference: Vec<(T, T)>,
}

impl<T: Real> SpectralTable<T> {
    /// Builds a table from `(omega, G)` samples.
    ///
    /// Samples with `omega < 0` are not used for evaluation; they are kept as
    /// reference data that validation compares against the thermal completion.
    pub fn new(samples: Vec<(T, T)>, extrapolation: Extrapolation) -> Result<Self> {
        let (negative_reference, mut points): (Vec<_>, Vec<_>) =
            samples.into_iter().partition(|&(w, _)| w < T::zero());
        if points.is_empty() {
            return Err(Error::MalformedSpectrum(
                "tabulated spectrum needs at least one sample with omega >= 0".into(),
            ));
        }
        for &(w, g) in points.iter().chain(negative_reference.iter()) {
            if !w.is_finite() || !g.is_finite() {
                return Err(Error::MalformedSpectrum("non-finite sample".into()));
            }
            if g < T::zero() {
                return Err(Error::MalformedSpectrum(format!(
                    "negative spectral density {g} at omega = {w}"
                )));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        if points.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::MalformedSpectrum("repeated sample frequency".into()));
        }
        Ok(Self {
            points,
            extrapolation,
            negative_reference,
        })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn negative_reference(&self) -> &[(T, T)] {
        &self.negative_reference
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    fn lookup(&self, w: T) -> Result<T> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if w < first.0 || w > last.0 {
            return match self.extrapolation {
                Extrapolation::Constant => Ok(if w < first.0 { first.1 } else { last.1 }),
                Extrapolation::None => Err(Error::OutOfTableRange {
                    omega: w.as_f64(),
                    min: first.0.as_f64(),
                    max: last.0.as_f64(),
                }),
            };
        }
        let idx = self.points.partition_point(|&(x, _)| x <= w);
        if idx == 0 {
            return Ok(first.1);
        }
        if idx == self.points.len() {
            return Ok(last.1);
        }
        let (x0, y0) = self.points[idx - 1];
        let (x1, y1) = self.points[idx];
        let s = (w - x0) / (x1 - x0);
        Ok(y0 + (y1 - y0) * s)
    }
}

/// Fourier transform of the reservoir correlation function.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralFunction<T> {
    /// `G(w) = g0` for `w >= 0`.
    FlatKms { g0: T },
    /// `G(w) = eta * w * exp(-w / cutoff) / (1 - exp(-w / T))` for `w >= 0`,
    /// with the limit `eta * T` at `w = 0`.
    OhmicThermal { eta: T, cutoff: T },
    Tabulated(SpectralTable<T>),
}

impl<T: Real> SpectralFunction<T> {
    pub fn flat_kms(g0: T) -> Result<Self> {
        if !(g0.is_finite() && g0 > T::zero()) {
            return Err(Error::MalformedSpectrum(format!("g0 must be positive, got {g0}")));
        }
        Ok(Self::FlatKms { g0 })
    }

    pub fn ohmic_thermal(eta: T, cutoff: T) -> Result<Self> {
        if !(eta.is_finite() && eta > T::zero() && cutoff.is_finite() && cutoff > T::zero()) {
            return Err(Error::MalformedSpectrum(format!(
                "ohmic prefactor and cutoff must be positive, got eta = {eta}, cutoff = {cutoff}"
            )));
        }
        Ok(Self::OhmicThermal { eta, cutoff })
    }

    pub fn tabulated(samples: Vec<(T, T)>, extrapolation: Extrapolation) -> Result<Self> {
        SpectralTable::new(samples, extrapolation).map(Self::Tabulated)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::FlatKms { .. } => "flat-kms",
            Self::OhmicThermal { .. } => "ohmic-thermal",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Same family with every value multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        match self {
            Self::FlatKms { g0 } => Self::flat_kms(*g0 * factor),
            Self::OhmicThermal { eta, cutoff } => Self::ohmic_thermal(*eta * factor, *cutoff),
            Self::Tabulated(table) => {
                let samples = table
                    .points
                    .iter()
                    .chain(table.negative_reference.iter())
                    .map(|&(w, g)| (w, g * factor))
                    .collect();
                Self::tabulated(samples, table.extrapolation)
            }
        }
    }

    /// `G(w)` for `w >= 0`.
    fn non_negative(&self, temperature: T, w: T) -> Result<T> {
        debug_assert!(w >= T::zero());
        match self {
            Self::FlatKms { g0 } => Ok(*g0),
            Self::OhmicThermal { eta, cutoff } => {
                let x = w / temperature;
                // w / (1 - e^{-x}) -> T as w -> 0
                let bose = if x < T::of(1e-8) {
                    temperature * (T::one() + x / T::of(2.0))
                } else {
                    w / -(-x).exp_m1()
                };
                Ok(*eta * bose * (-w / *cutoff).exp())
            }
            Self::Tabulated(table) => table.lookup(w),
        }
    }

    /// Evaluates `G(w)`, completing negative frequencies thermally.
    pub fn value(&self, temperature: T, w: T) -> Result<T> {
        if w >= T::zero() {
            self.non_negative(temperature, w)
        } else {
            let g = self.non_negative(temperature, -w)?;
            Ok((w / temperature).exp() * g)
        }
    }

    /// Frequencies at which the stored half-line is characteristic: table
    /// nodes, or a few multiples of the temperature for analytic families.
    pub fn sample_frequencies(&self, temperature: T) -> Vec<T> {
        match self {
            Self::Tabulated(table) => table.points.iter().map(|&(w, _)| w).collect(),
            Self::OhmicThermal { cutoff, .. } => {
                let mut v: Vec<T> = [0.0, 0.5, 1.0, 2.0]
                    .iter()
                    .map(|&m| T::of(m) * temperature)
                    .collect();
                v.push(*cutoff);
                v
            }
            Self::FlatKms { .. } => [0.0, 0.5, 1.0, 2.0]
                .iter()
                .map(|&m| T::of(m) * temperature)
                .collect(),
        }
    }
}

/// `G(omega)` of `reservoir` at temperature `temperature`.
pub fn spectral_value<T: Real>(
    reservoir: &SpectralFunction<T>,
    temperature: T,
    omega: T,
) -> Result<T> {
    reservoir.value(temperature, omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_kms_at_zero_is_g0() {
        let g = SpectralFunction::flat_kms(1.0).unwrap();
        assert_eq!(spectral_value(&g, 1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn flat_kms_negative_frequency_is_boltzmann_suppressed() {
        let g = SpectralFunction::<f64>::flat_kms(1.0).unwrap();
        let v = spectral_value(&g, 1.0, -1.0).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn kms_ratio_for_every_family() {
        let families = vec![
            SpectralFunction::flat_kms(2.0).unwrap(),
            SpectralFunction::ohmic_thermal(0.3, 4.0).unwrap(),
            SpectralFunction::tabulated(
                vec![(0.0, 1.0), (1.0, 3.0), (3.0, 0.5)],
                Extrapolation::None,
            )
            .unwrap(),
        ];
        let t = 0.8;
        for g in &families {
            for w in [0.5, 1.0, 2.0] {
                let ratio = g.value(t, w).unwrap() / g.value(t, -w).unwrap();
                let expected = f64::exp(w / t);
                assert!(
                    (ratio / expected - 1.0).abs() < 1e-14,
                    "{}: w = {w}",
                    g.family_name()
                );
            }
        }
    }

    #[test]
    fn ohmic_small_frequency_limit() {
        let g = SpectralFunction::<f64>::ohmic_thermal(0.5, 10.0).unwrap();
        let t = 2.0;
        assert!((g.value(t, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let near = g.value(t, 1e-6).unwrap();
        assert!((near - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let g = SpectralFunction::<f64>::tabulated(vec![(0.0, 1.0), (2.0, 3.0)], Extrapolation::None)
            .unwrap();
        assert!((g.value(1.0, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((g.value(1.0, 2.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_refuses_to_extrapolate_by_default() {
        let g = SpectralFunction::<f64>::tabulated(vec![(0.0, 1.0), (2.0, 3.0)], Extrapolation::None)
            .unwrap();
        assert!(matches!(g.value(1.0, 2.5), Err(Error::OutOfTableRange { .. })));
        assert!(matches!(g.value(1.0, -2.5), Err(Error::OutOfTableRange { .. })));
        let held = SpectralFunction::tabulated(
            vec![(0.0, 1.0), (2.0, 3.0)],
            Extrapolation::Constant,
        )
        .unwrap();
        assert_eq!(held.value(1.0, 5.0).unwrap(), 3.0);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(SpectralFunction::<f64>::tabulated(vec![], Extrapolation::None).is_err());
        assert!(SpectralFunction::tabulated(vec![(0.0, -1.0)], Extrapolation::None).is_err());
        assert!(
            SpectralFunction::tabulated(vec![(1.0, 1.0), (1.0, 2.0)], Extrapolation::None)
                .is_err()
        );
        assert!(SpectralFunction::flat_kms(0.0).is_err());
    }

    #[test]
    fn negative_samples_are_reference_only() {
        let g = SpectralFunction::tabulated(
            vec![(0.0, 1.0), (1.0, 1.0), (-1.0, 5.0)],
            Extrapolation::None,
        )
        .unwrap();
        // evaluation ignores the stored negative sample
        assert!((g.value(1.0, -1.0).unwrap() - f64::exp(-1.0)).abs() < 1e-15);
        if let SpectralFunction::Tabulated(t) = &g {
            assert_eq!(t.negative_reference(), &[(-1.0, 5.0)]);
        }
    }
}
