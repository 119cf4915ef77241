//! Canonical JSON and CSV renderings of analysis results.
//!
//! JSON objects have sorted keys and every float is rounded to 12
//! significant digits, so identical inputs give byte-identical output.
//! Level indices are 1-based.

use nalgebra::{ComplexField, DVector};
use serde_json::{json, Map, Value};

use crate::builtin::{TwoTlsAnalytics, TwoTlsSpec};
use crate::coms::{ComBasis, DiagonalObservable, NamedCom};
use crate::decomposition::SubspacePartition;
use crate::dynamics::Trajectory;
use crate::model::Tolerances;
use crate::scalar::Real;
use crate::stationary::StationaryPrediction;
use crate::validation::ValidationReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits; non-finite values become `null`.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    // normalise negative zero
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

pub fn real<T: Real>(x: T) -> Value {
    number(x.as_f64())
}

pub fn vector<T: Real>(v: &DVector<T>) -> Value {
    Value::Array(v.iter().map(|&x| real(x)).collect())
}

fn one_based(v: &[usize]) -> Value {
    Value::Array(v.iter().map(|&i| json!(i + 1)).collect())
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn tolerances_json<T: Real>(t: &Tolerances<T>) -> Value {
    json!({ "hermiticity": real(t.hermiticity), "degeneracy": real(t.degeneracy) })
}

pub fn partition_report<T: Real>(
    part: &SubspacePartition,
    frequencies: &DVector<T>,
    epsilon_s: T,
    max_off_block: T,
    tolerances: &Tolerances<T>,
) -> Value {
    json!({
        "blocks": part.one_based_blocks(),
        "block_sizes": part.block_sizes(),
        "permutation": one_based(part.permutation()),
        "frequencies": vector(frequencies),
        "epsilon_s": real(epsilon_s),
        "max_off_block_magnitude": real(max_off_block),
        "tolerances": tolerances_json(tolerances),
    })
}

/// Inputs of [`com_report`] beyond the basis itself.
pub struct ComReportParts<'a, T: Real> {
    pub condition_residuals: &'a [T],
    pub lindblad_residuals: &'a [T],
    pub named: &'a [(NamedCom, DiagonalObservable<T>)],
    pub condition_tolerance: T,
    pub lindblad_tolerance: T,
    /// `(atoms, matches)` when the exhaustive cross-check was run.
    pub brute_force: Option<(&'a SubspacePartition, bool)>,
}

pub fn com_report<T: Real>(basis: &ComBasis<T>, parts: &ComReportParts<'_, T>) -> Value {
    let projectors: Vec<Value> = basis
        .projectors
        .iter()
        .enumerate()
        .map(|(l, p)| json!({ "block": l + 1, "values": vector(p.values()) }))
        .collect();
    let named: Vec<Value> = parts
        .named
        .iter()
        .map(|(n, o)| json!({ "name": n.name(), "values": vector(o.values()) }))
        .collect();
    let mut report = json!({
        "projectors": projectors,
        "independent_count": basis.independent_count,
        "residuals": {
            "condition": parts.condition_residuals.iter().map(|&r| real(r)).collect::<Vec<_>>(),
            "lindblad": parts.lindblad_residuals.iter().map(|&r| real(r)).collect::<Vec<_>>(),
        },
        "named": named,
        "tolerances": {
            "condition": real(parts.condition_tolerance),
            "lindblad": real(parts.lindblad_tolerance),
        },
    });
    if let Some((atoms, matches)) = parts.brute_force {
        report["brute_force"] = json!({
            "atoms": atoms.one_based_blocks(),
            "atoms_match_partition": matches,
        });
    }
    report
}

pub fn stationary_report<T: Real>(
    prediction: &StationaryPrediction<T>,
    part: &SubspacePartition,
    fixed_point_residual: T,
    oracle_distance: T,
    kernel_threshold: f64,
) -> Value {
    json!({
        "blocks": part.one_based_blocks(),
        "weights": vector(&prediction.weights),
        "block_distributions": prediction.block_gibbs.iter().map(vector).collect::<Vec<_>>(),
        "assembled_populations": vector(&clip(&prediction.populations())),
        "fixed_point_residual": real(fixed_point_residual),
        "oracle_distance": real(oracle_distance),
        "tolerances": { "kernel_threshold": number(kernel_threshold) },
    })
}

pub fn validation_report(report: &ValidationReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), json!(c.name));
            m.insert("passed".into(), json!(c.passed));
            m.insert("detail".into(), json!(c.detail));
            if let Some(v) = c.value {
                m.insert("value".into(), number(v));
            }
            if let Some(t) = c.tolerance {
                m.insert("tolerance".into(), number(t));
            }
            Value::Object(m)
        })
        .collect();
    let mut v = json!({
        "dimension": report.dimension,
        "passed": report.passed(),
        "checks": checks,
    });
    if let Some(b) = &report.blocks {
        v["blocks"] = json!(b);
    }
    v
}

/// Negative roundoff is shown as zero; the underlying state is untouched.
fn clip<T: Real>(p: &DVector<T>) -> DVector<T> {
    p.map(|x| x.max(T::zero()))
}

/// CSV with header `t,p_1,..,p_N` and, if requested, `abs_rho_i_j` for
/// every `i < j`.
pub fn trajectory_csv<T: Real>(traj: &Trajectory<T>, coherences: bool) -> String {
    let n = traj.states.first().map_or(0, |s| s.dim());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    if coherences {
        for i in 0..n {
            for j in i + 1..n {
                header.push(format!("abs_rho_{}_{}", i + 1, j + 1));
            }
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![csv_number(t.as_f64())];
        row.extend(clip(&s.populations()).iter().map(|p| csv_number(p.as_f64())));
        if coherences {
            for i in 0..n {
                for j in i + 1..n {
                    row.push(csv_number(s.matrix()[(i, j)].modulus().as_f64()));
                }
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn csv_number(x: f64) -> String {
    match number(x) {
        Value::Number(n) => n.to_string(),
        _ => "nan".into(),
    }
}

pub struct TrajectorySummary<T: Real> {
    pub max_trace_drift: T,
    pub max_block_weight_drift: T,
    /// L1 distance of the final state to the stationary prediction.
    pub distance_to_stationary: T,
    pub stationary_populations: DVector<T>,
}

pub fn trajectory_summary<T: Real>(
    traj: &Trajectory<T>,
    part: &SubspacePartition,
    summary: &TrajectorySummary<T>,
) -> Value {
    let last = traj.last();
    json!({
        "final_time": real(last.time()),
        "final_populations": vector(&clip(&last.populations())),
        "final_max_abs_coherence": real(max_coherence(last.matrix())),
        "samples": traj.times.len(),
        "max_trace_drift": real(summary.max_trace_drift),
        "max_block_weight_drift": real(summary.max_block_weight_drift),
        "blocks": part.one_based_blocks(),
        "stationary_populations": vector(&summary.stationary_populations),
        "distance_to_stationary": real(summary.distance_to_stationary),
    })
}

fn max_coherence<T: Real>(m: &nalgebra::DMatrix<crate::scalar::C<T>>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(m[(i, j)].modulus());
            }
        }
    }
    worst
}

pub fn two_tls_analytics_report<T: Real>(spec: &TwoTlsSpec<T>, a: &TwoTlsAnalytics<T>) -> Value {
    let vectors: Vec<Value> = (0..4)
        .map(|k| vector(&a.eigenvectors.column(k).into_owned()))
        .collect();
    json!({
        "parameters": {
            "omega1": real(spec.omega1),
            "omega2": real(spec.omega2),
            "rabi": real(spec.rabi),
            "asymmetry": real(spec.asymmetry),
            "coupling_strength": real(spec.coupling_strength),
            "temperature": real(spec.temperature),
        },
        "product_basis": ["e1e2", "g1g2", "e1g2", "g1e2"],
        "energies": a.energies.iter().map(|&e| real(e)).collect::<Vec<_>>(),
        "mixing_angle": real(a.mixing_angle),
        "coefficients": a.coefficients.iter().map(|&(x, y)| json!([real(x), real(y)])).collect::<Vec<_>>(),
        "eigenvectors": vectors,
        "sorted_to_psi": a.sorted_to_psi,
        "mixed_coupling": real(a.mixed_coupling),
    })
}
