//! Model diagnostics that report every failed invariant instead of stopping
//! at the first.

use crate::decomposition::{default_epsilon_s, invariant_partition};
use crate::model::{eigenbasis, hermiticity_residual, max_modulus, SpectralFunction, SystemModel};
use crate::scalar::Real;

/// Relative tolerance on the thermal symmetry of evaluated spectra.
pub const KMS_TOLERANCE: f64 = 1e-9;
/// Relative tolerance when comparing user-supplied negative-frequency table
/// samples against the thermal completion.
pub const KMS_REFERENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity, when the check is numeric.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn numeric(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: value <= tolerance,
            value: Some(value),
            tolerance: Some(tolerance),
            detail: detail.into(),
        }
    }

    fn flag(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            value: None,
            tolerance: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub dimension: usize,
    pub checks: Vec<Check>,
    /// 1-based blocks of the invariant partition, if the eigenbasis exists.
    pub blocks: Option<Vec<Vec<usize>>>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs every structural check on a possibly invalid model.
pub fn validate<T: Real>(model: &SystemModel<T>) -> ValidationReport {
    let h = model.hamiltonian();
    let s = model.coupling_operator();
    let n = h.nrows();
    let mut checks = Vec::new();

    let shapes_ok = n > 0 && h.ncols() == n && s.nrows() == n && s.ncols() == n;
    checks.push(Check::flag(
        "dimensions",
        shapes_ok,
        format!(
            "hamiltonian {}x{}, coupling operator {}x{}",
            h.nrows(),
            h.ncols(),
            s.nrows(),
            s.ncols()
        ),
    ));
    let temp = model.temperature();
    checks.push(Check::flag(
        "temperature",
        temp.is_finite() && temp > T::zero(),
        format!("T = {temp}"),
    ));
    let lambda = model.coupling_strength();
    checks.push(Check::flag(
        "coupling_strength",
        lambda.is_finite() && lambda >= T::zero(),
        format!("lambda = {lambda}"),
    ));
    if !shapes_ok {
        return ValidationReport {
            dimension: n,
            checks,
            blocks: None,
        };
    }

    let rel = model.tolerances().hermiticity;
    for (name, m) in [("hamiltonian_hermitian", h), ("coupling_hermitian", s)] {
        let scale = max_modulus(m);
        checks.push(Check::numeric(
            name,
            hermiticity_residual(m).as_f64(),
            (rel * scale).as_f64(),
            "max |A - A^dagger| against relative tolerance times max |A|",
        ));
    }

    if temp > T::zero() && temp.is_finite() {
        checks.extend(kms_checks(model.reservoir(), temp));
    }

    let mut blocks = None;
    if checks.iter().all(|c| c.passed) {
        match eigenbasis(model) {
            Ok(eig) => {
                checks.push(Check::flag(
                    "non_degenerate",
                    true,
                    format!(
                        "spectrum resolved at relative gap tolerance {}",
                        model.tolerances().degeneracy
                    ),
                ));
                let w = eig.frequencies();
                let mut failure = None;
                'outer: for i in 0..n {
                    for j in 0..n {
                        if let Err(e) = model.reservoir().value(temp, w[j] - w[i]) {
                            failure = Some(e.to_string());
                            break 'outer;
                        }
                    }
                }
                checks.push(Check::flag(
                    "bohr_frequencies_in_range",
                    failure.is_none(),
                    failure.unwrap_or_else(|| "spectral function defined at all Bohr frequencies".into()),
                ));
                let part = invariant_partition(&eig, default_epsilon_s(&eig));
                blocks = Some(part.one_based_blocks());
            }
            Err(e) => checks.push(Check::flag("non_degenerate", false, e.to_string())),
        }
    }

    ValidationReport {
        dimension: n,
        checks,
        blocks,
    }
}

fn kms_checks<T: Real>(g: &SpectralFunction<T>, temp: T) -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst = T::zero();
    let mut error = None;
    for w in g.sample_frequencies(temp) {
        match (g.value(temp, w), g.value(temp, -w)) {
            (Ok(gp), Ok(gm)) => {
                if gp < T::zero() || gm < T::zero() {
                    error = Some(format!("negative spectral density at omega = {w}"));
                }
                let scale = gp.max(T::default_epsilon());
                worst = worst.max((gp - (w / temp).exp() * gm).abs() / scale);
            }
            (Err(e), _) | (_, Err(e)) => error = Some(e.to_string()),
        }
    }
    match error {
        Some(e) => out.push(Check::flag("spectral_evaluation", false, e)),
        None => out.push(Check::numeric(
            "kms_symmetry",
            worst.as_f64(),
            KMS_TOLERANCE,
            "relative |G(w) - exp(w/T) G(-w)| at sample frequencies",
        )),
    }
    if let SpectralFunction::Tabulated(table) = g {
        if !table.negative_reference().is_empty() {
            let mut worst = T::zero();
            let mut at = T::zero();
            for &(w, g_ref) in table.negative_reference() {
                match g.value(temp, w) {
                    Ok(completed) => {
                        let scale = completed.abs().max(g_ref.abs()).max(T::default_epsilon());
                        let r = (completed - g_ref).abs() / scale;
                        if r > worst {
                            worst = r;
                            at = w;
                        }
                    }
                    Err(e) => {
                        out.push(Check::flag("kms_reference_samples", false, e.to_string()));
                        return out;
                    }
                }
            }
            out.push(Check::numeric(
                "kms_reference_samples",
                worst.as_f64(),
                KMS_REFERENCE_TOLERANCE,
                format!(
                    "negative-frequency samples against exp(-|w|/T) G(|w|); worst at omega = {at}"
                ),
            ));
        }
    }
    out
}
