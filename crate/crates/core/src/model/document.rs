//! JSON model files and initial-state files.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. The Hamiltonian may
//! instead be given as `{"diagonal": [...]}`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Extrapolation, SpectralFunction, SystemModel, Tolerances};
use crate::dynamics::DensityState;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub type MatrixDocument = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianDocument {
    Diagonal { diagonal: Vec<f64> },
    Dense(MatrixDocument),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtrapolationDocument {
    #[default]
    None,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum ReservoirDocument {
    #[serde(rename = "flat-kms")]
    FlatKms { g0: f64 },
    #[serde(rename = "ohmic-thermal")]
    OhmicThermal { eta: f64, cutoff: f64 },
    #[serde(rename = "tabulated")]
    Tabulated {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        extrapolation: ExtrapolationDocument,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermiticity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<f64>,
}

fn default_strength() -> f64 {
    1.0
}

/// On-disk representation of a [`SystemModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub hamiltonian: HamiltonianDocument,
    pub coupling_operator: MatrixDocument,
    #[serde(default = "default_strength")]
    pub coupling_strength: f64,
    pub temperature: f64,
    pub reservoir: ReservoirDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesDocument>,
}

fn matrix_from_document<T: Real>(rows: &MatrixDocument, what: &'static str) -> Result<DMatrix<C<T>>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::NotSquare { what, rows: 0, cols: 0 });
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare {
                what,
                rows: n,
                cols: row.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let [r, im] = rows[i][j];
        C::new(T::of(r), T::of(im))
    }))
}

fn matrix_to_document<T: Real>(m: &DMatrix<C<T>>) -> MatrixDocument {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

/// Validates a parsed document and builds the model.
pub fn model_from_document<T: Real>(doc: &ModelDocument) -> Result<SystemModel<T>> {
    let model = unchecked_from_document::<T>(doc)?;
    model.check()?;
    Ok(model)
}

/// Builds the model without invariant checks (matrix shape, reservoir
/// parameters and numeric parsing are still enforced).
pub fn unchecked_from_document<T: Real>(
    doc: &ModelDocument,
) -> Result<SystemModel<T>> {
    let hamiltonian = match &doc.hamiltonian {
        HamiltonianDocument::Diagonal { diagonal } => {
            if diagonal.is_empty() {
                return Err(Error::NotSquare {
                    what: "hamiltonian",
                    rows: 0,
                    cols: 0,
                });
            }
            DMatrix::from_diagonal(&DVector::from_iterator(
                diagonal.len(),
                diagonal.iter().map(|&x| C::new(T::of(x), T::zero())),
            ))
        }
        HamiltonianDocument::Dense(rows) => matrix_from_document(rows, "hamiltonian")?,
    };
    let coupling = matrix_from_document(&doc.coupling_operator, "coupling_operator")?;
    let reservoir = match &doc.reservoir {
        ReservoirDocument::FlatKms { g0 } => SpectralFunction::flat_kms(T::of(*g0))?,
        ReservoirDocument::OhmicThermal { eta, cutoff } => {
            SpectralFunction::ohmic_thermal(T::of(*eta), T::of(*cutoff))?
        }
        ReservoirDocument::Tabulated {
            points,
            extrapolation,
        } => SpectralFunction::tabulated(
            points.iter().map(|&[w, g]| (T::of(w), T::of(g))).collect(),
            match extrapolation {
                ExtrapolationDocument::None => Extrapolation::None,
                ExtrapolationDocument::Constant => Extrapolation::Constant,
            },
        )?,
    };
    let mut tolerances = Tolerances::default();
    if let Some(t) = &doc.tolerances {
        if let Some(h) = t.hermiticity {
            tolerances.hermiticity = T::of(h);
        }
        if let Some(d) = t.degeneracy {
            tolerances.degeneracy = T::of(d);
        }
        if tolerances.hermiticity < T::zero() || tolerances.degeneracy < T::zero() {
            return Err(Error::InvalidParameter("tolerances must be non-negative".into()));
        }
    }
    Ok(SystemModel::unchecked(
        hamiltonian,
        coupling,
        T::of(doc.coupling_strength),
        reservoir,
        T::of(doc.temperature),
        tolerances,
    ))
}

/// Serializes a model back to its document form.
pub fn model_to_document<T: Real>(model: &SystemModel<T>) -> ModelDocument {
    let reservoir = match model.reservoir() {
        SpectralFunction::FlatKms { g0 } => ReservoirDocument::FlatKms { g0: g0.as_f64() },
        SpectralFunction::OhmicThermal { eta, cutoff } => ReservoirDocument::OhmicThermal {
            eta: eta.as_f64(),
            cutoff: cutoff.as_f64(),
        },
        SpectralFunction::Tabulated(table) => ReservoirDocument::Tabulated {
            points: table
                .points()
                .iter()
                .chain(table.negative_reference())
                .map(|&(w, g)| [w.as_f64(), g.as_f64()])
                .collect(),
            extrapolation: match table.extrapolation() {
                Extrapolation::None => ExtrapolationDocument::None,
                Extrapolation::Constant => ExtrapolationDocument::Constant,
            },
        },
    };
    let defaults = Tolerances::<T>::default();
    let tol = model.tolerances();
    let tolerances = (tol != &defaults).then(|| TolerancesDocument {
        hermiticity: Some(tol.hermiticity.as_f64()),
        degeneracy: Some(tol.degeneracy.as_f64()),
    });
    ModelDocument {
        hamiltonian: HamiltonianDocument::Dense(matrix_to_document(model.hamiltonian())),
        coupling_operator: matrix_to_document(model.coupling_operator()),
        coupling_strength: model.coupling_strength().as_f64(),
        temperature: model.temperature().as_f64(),
        reservoir,
        tolerances,
    }
}

/// Parses and validates a model file's contents.
pub fn load_model<T: Real>(source: &str) -> Result<SystemModel<T>> {
    let doc: ModelDocument = serde_json::from_str(source)?;
    model_from_document(&doc)
}

pub fn load_model_file<T: Real>(path: impl AsRef<Path>) -> Result<SystemModel<T>> {
    load_model(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InitialStateDocument {
    Populations { populations: Vec<f64> },
    Density { density_matrix: MatrixDocument },
}

/// Parses an initial state given in the Hamiltonian eigenbasis, either as
/// `{"populations": [...]}` or `{"density_matrix": [[[re, im], ...], ...]}`.
pub fn initial_state_from_str<T: Real>(source: &str) -> Result<DensityState<T>> {
    let doc: InitialStateDocument = serde_json::from_str(source)?;
    match doc {
        InitialStateDocument::Populations { populations } => DensityState::from_populations(
            &DVector::from_iterator(populations.len(), populations.iter().map(|&p| T::of(p))),
        ),
        InitialStateDocument::Density { density_matrix } => {
            DensityState::new(matrix_from_document(&density_matrix, "density_matrix")?, T::zero())
        }
    }
}
