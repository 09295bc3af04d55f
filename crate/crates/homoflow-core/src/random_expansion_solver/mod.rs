//! Consistent random expansions on finite fragments: the constraint system,
//! exact feasibility with replayable certificates, and the density check.

mod certificate;
mod density;
mod fragments;
mod lp;
mod measure;
mod system;

pub use certificate::{
    feasible_set_is_a_point, forced_zeros, replay_certificate, solve_feasibility, solve_fragment, verify_certificate,
    Certificate, CertificateKind, CertificateStep, Clash, Conclusion, Feasibility, ForcedWeight,
};
pub use density::{
    check_cofinal_isomorphism, check_density_criterion, check_measure_consistency, uniform_weight,
    CandidateFamily, ConsistencyReport, CounterexamplePair, DensityOutcome,
};
pub use fragments::{builtin_fragment, hand_encoded_qhat_certificate, qhat_columns, BUILTIN_FRAGMENTS};
pub use measure::RandomExpansionMeasure;
pub use system::{build_constraints, Fragment, FragmentEmbedding, LinearSystem, Row, RowRef};

use crate::error::Result;
use crate::structures::{age_members, ClassSpec};

/// Per-size outcome of the uniqueness probe.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct UniquenessProbe {
    pub size: usize,
    pub fragments: usize,
    pub unique: usize,
}

/// For every age member with at most `size_bound` vertices, the closed
/// fragment it generates has exactly one consistent weighting.
pub fn uniqueness_probe(spec: &ClassSpec, size_bound: usize) -> Result<Vec<UniquenessProbe>> {
    let mut out = Vec::new();
    for size in 1..=size_bound {
        let tops = age_members(spec, size)?;
        let mut unique = 0;
        for t in &tops {
            let sys = build_constraints(spec, &Fragment::closed(spec, vec![t.clone()])?)?;
            if feasible_set_is_a_point(&sys)? {
                unique += 1;
            }
        }
        out.push(UniquenessProbe { size, fragments: tops.len(), unique });
    }
    Ok(out)
}
