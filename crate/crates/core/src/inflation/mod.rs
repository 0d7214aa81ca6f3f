//! Stochastic inflation: the adjoint Fokker-Planck operator of the first-passage time,
//! Hermitized into Sturm-Liouville form, on flat wells and on the two-field hybrid model.

pub mod cerf;
pub mod diagnostics;
pub mod hermitize;
pub mod hybrid_grid;
pub mod nonuniform;
pub mod potential;
pub mod wells;

pub use cerf::{erf_complex, erf_scaled};
pub use diagnostics::{diagnostics, InflationDiagnostics};
pub use hermitize::{adjoint_fp_central_difference, general_real_eigenvalues, hermitized_coefficients, HermitizedCoefficients};
pub use hybrid_grid::{build_hybrid_grid, hybrid_thresholds, HybridThresholds, NonuniformGrid2D};
pub use nonuniform::{
    assemble_fp_matrix_nonuniform, assemble_spec_scheme, assemble_weighted_scheme, overlap_spectrum, NonuniformOperator,
    Scheme, TensorGrid,
};
pub use potential::{reduced_potential, HybridParams, PotentialModel, ReducedPotential, MPL_GEV};
pub use wells::{
    analytic_well_overlap, gaussian_test_function, overlap_sweep, quantum_well_eigensystem, sweep_argmax, Boundary,
    SweepRow, TestFunction, WellMode, WellVariant,
};

use crate::eigen::{smallest_eigs, EigenResult};
use crate::error::{Error, Result};
use crate::sturm_liouville::{DomainBox, OperatorSpec};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InflationParams {
    #[serde(default)]
    v0: Option<f64>,
    #[serde(default)]
    phi_f: Option<f64>,
    #[serde(default)]
    coeffs: Option<Vec<f64>>,
    #[serde(default, rename = "V0")]
    big_v0: Option<f64>,
    #[serde(default, rename = "M")]
    m: Option<f64>,
    #[serde(default)]
    phi_c: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default = "one")]
    mpl: f64,
}

fn one() -> f64 {
    1.0
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("missing inflation parameter `{name}`")))
}

/// Hermitized operator of a potential model on a uniform box, for spec documents of
/// kind `inflation`. Names: `quantum_well`, `inflection_well` (`v0`, `phi_f`),
/// `polynomial` (`coeffs`), `hybrid` (`V0`, `M`, `phi_c`, `beta` in Planck units).
pub fn inflation_operator_spec(domain: DomainBox, name: &str, params: serde_json::Value) -> Result<OperatorSpec> {
    let p: InflationParams =
        serde_json::from_value(params).map_err(|e| Error::Config(format!("inflation `{name}` params: {e}")))?;
    let model = match name {
        "quantum_well" => PotentialModel::QuantumWell {
            v0: need(p.v0, "v0")?,
            phi_f: need(p.phi_f, "phi_f")?,
        },
        "inflection_well" => PotentialModel::InflectionWell {
            v0: need(p.v0, "v0")?,
            phi_f: need(p.phi_f, "phi_f")?,
        },
        "polynomial" => PotentialModel::Polynomial {
            coeffs: p.coeffs.ok_or_else(|| Error::Config("missing inflation parameter `coeffs`".into()))?,
            lower: domain.lower,
            upper: domain.upper,
        },
        "hybrid" => PotentialModel::Hybrid(HybridParams {
            v0: need(p.big_v0, "V0")?,
            m: need(p.m, "M")?,
            phi_c: need(p.phi_c, "phi_c")?,
            beta: need(p.beta, "beta")?,
        }),
        other => return Err(Error::Config(format!("unknown inflation model `{other}`"))),
    };
    if model.dim() != domain.dim {
        return Err(Error::Config(format!(
            "model `{name}` has {} fields, domain has dimension {}",
            model.dim(),
            domain.dim
        )));
    }
    let rp = reduced_potential(&model)?;
    let hc = hermitized_coefficients(&rp, p.mpl)?;
    OperatorSpec::new(domain, Arc::new(hc), format!("inflation:{name}"))
}

/// Spectrum of the hybrid model on its nonuniform grid, with test-function overlaps.
#[derive(Clone, Debug)]
pub struct HybridSpectrum {
    pub grid: NonuniformGrid2D,
    pub operator: NonuniformOperator,
    pub eigen: EigenResult,
    /// `Psi_n` on the interior nodes, `phi` fastest.
    pub fields: Vec<Vec<f64>>,
    pub test_function: TestFunction,
    pub overlaps: Vec<f64>,
}

pub fn hybrid_spectrum(model: &PotentialModel, scale: f64, k: usize, scheme: Scheme, mpl: f64) -> Result<HybridSpectrum> {
    let grid = build_hybrid_grid(model, scale)?;
    let tensor = grid.tensor()?;
    let rp = reduced_potential(model)?;
    let hc = hermitized_coefficients(&rp, mpl)?;
    let operator = assemble_fp_matrix_nonuniform(&hc, &tensor, scheme)?;
    log::info!(
        "hybrid operator: {} unknowns, {} eliminated, scheme {:?}",
        operator.matrix.dim(),
        operator.eliminated(),
        scheme
    );
    let eigen = smallest_eigs(&operator, k)?;
    let fields = eigen
        .eigenvectors
        .iter()
        .map(|y| operator.to_field(y))
        .collect::<Result<Vec<_>>>()?;
    let t = &grid.thresholds;
    let test_function = TestFunction::Hybrid {
        phi_c: grid.phi_c,
        sigma_phi: t.phi_sto_plus - grid.phi_c,
        sigma_psi: t.psi_sto_plus,
    };
    let test: Vec<f64> = (0..tensor.interior_total())
        .map(|i| test_function.eval(&tensor.interior_point(i)))
        .collect();
    let overlaps = overlap_spectrum(&test, &fields, &tensor, fields.len())?;
    Ok(HybridSpectrum {
        grid,
        operator,
        eigen,
        fields,
        test_function,
        overlaps,
    })
}
