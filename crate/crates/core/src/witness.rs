//! The number-entanglement witness, the symmetric-separability decision at
//! small dimension, and symmetric separable channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator_norm, kron, ComplexMatrix, DEFAULT_TOL};
use crate::states::{ppt_min_eigenvalue, spectrum_entropy, DensityMatrix};
use crate::symmetry::{sector_decompose, ChargeFamily, ChargeOperator, SectorDecomposition};

/// Tolerance below which an NE value counts as zero, in bits. Entropies of
/// clipped spectra carry O(tol·log tol) noise, so this sits above the
/// eigenvalue floor.
pub const NE_ZERO_TOL: f64 = 1e-8;

/// Precomputed evaluator for the number entanglement with respect to a local
/// charge on A, lifted to A⊗B. Build once, evaluate per state.
#[derive(Debug, Clone)]
pub struct NeWitness {
    sectors: SectorDecomposition,
    dims: (usize, usize),
}

impl NeWitness {
    pub fn new(n_a: &ChargeOperator, dims: (usize, usize)) -> Result<Self> {
        if n_a.dim() != dims.0 {
            return Err(Error::DimensionMismatch {
                context: "NE witness local charge",
                expected: dims.0,
                got: n_a.dim(),
            });
        }
        let lifted = ChargeOperator::with_grouping_tol(
            kron(n_a.matrix(), &ComplexMatrix::identity(dims.1)),
            n_a.label(),
            n_a.grouping_tol(),
        )?;
        Ok(NeWitness {
            sectors: sector_decompose(&lifted)?,
            dims,
        })
    }

    /// For a charge family with a local pair, witness with respect to N_A.
    pub fn from_family(family: &ChargeFamily) -> Result<Self> {
        let (n_a, _) = family.local_pair().ok_or_else(|| {
            Error::InvalidConfig(
                "NE witness needs a charge family with local charges (sum/product/local)".into(),
            )
        })?;
        NeWitness::new(n_a, family.dims())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn sectors(&self) -> &SectorDecomposition {
        &self.sectors
    }

    /// ΔS = S(ρ|. measured) − S(ρ) in bits.
    ///
    /// Entropies are taken from the eigenvalues of ρ and of the pinched
    /// operator directly; the measured operator is PSD and trace-one up to
    /// roundoff by construction, so no revalidation happens here.
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.sectors.dim() {
            return Err(Error::DimensionMismatch {
                context: "number_entanglement",
                expected: self.sectors.dim(),
                got: rho.dim(),
            });
        }
        let measured = self.sectors.pinch(rho.matrix());
        let s_before = spectrum_entropy(&crate::linalg::hermitian_eigenvalues(rho.matrix())?);
        let s_after = spectrum_entropy(&crate::linalg::hermitian_eigenvalues(&measured)?);
        Ok(s_after - s_before)
    }
}

/// Number entanglement of ρ with respect to the local charge `n_a` on A:
/// the entropy increase under nonselective measurement of N_A ⊗ 1_B.
pub fn number_entanglement(
    rho: &DensityMatrix,
    n_a: &ChargeOperator,
    dims: (usize, usize),
) -> Result<f64> {
    NeWitness::new(n_a, dims)?.evaluate(rho)
}

/// Outcome of the symmetric-separability decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymsepStatus {
    Symsep,
    NotSymsep,
    Unknown,
}

/// Decision plus the evidence trail of which tests fired.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymsepVerdict {
    pub status: SymsepStatus,
    pub evidence: Vec<String>,
}

/// Decide symmetric separability through the localized reduction:
///
/// 1. a commutator with either lifted local charge above `tol` refutes it;
/// 2. NE above `tol` refutes it (witness);
/// 3. a negative partial transpose refutes it;
/// 4. PPT proves it only where PPT is sufficient (d_A·d_B ≤ 6), otherwise
///    the verdict stays `unknown`.
pub fn decide_symsep(rho: &DensityMatrix, family: &ChargeFamily) -> Result<SymsepVerdict> {
    let local = family.localized()?;
    let dims = local.dims();
    if rho.dim() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch {
            context: "decide_symsep",
            expected: dims.0 * dims.1,
            got: rho.dim(),
        });
    }
    let mut evidence = Vec::new();

    for member in local.members() {
        let norm = commutator_norm(rho.matrix(), member.matrix())?;
        if norm > NE_ZERO_TOL {
            evidence.push(format!(
                "commutation failure with {}: norm {norm:.3e}",
                member.label()
            ));
            return Ok(SymsepVerdict {
                status: SymsepStatus::NotSymsep,
                evidence,
            });
        }
    }
    evidence.push("commutes with both local charges".to_string());

    let witness = NeWitness::from_family(&local)?;
    let ne = witness.evaluate(rho)?;
    if ne > NE_ZERO_TOL {
        evidence.push(format!("NE = {ne:.3e} bits > {NE_ZERO_TOL:.0e}"));
        return Ok(SymsepVerdict {
            status: SymsepStatus::NotSymsep,
            evidence,
        });
    }
    evidence.push(format!("NE = {ne:.3e} bits (zero within tolerance)"));

    let rho_bi = rho.with_dims(&[dims.0, dims.1])?;
    let min_pt = ppt_min_eigenvalue(&rho_bi)?;
    if min_pt < -DEFAULT_TOL {
        evidence.push(format!("NPT: min partial-transpose eigenvalue {min_pt:.3e}"));
        return Ok(SymsepVerdict {
            status: SymsepStatus::NotSymsep,
            evidence,
        });
    }
    evidence.push(format!("PPT: min partial-transpose eigenvalue {min_pt:.3e}"));

    if dims.0 * dims.1 <= 6 {
        evidence.push(format!(
            "PPT is sufficient at {}x{}",
            dims.0, dims.1
        ));
        Ok(SymsepVerdict {
            status: SymsepStatus::Symsep,
            evidence,
        })
    } else {
        evidence.push(format!(
            "PPT is not sufficient at {}x{}; no exact decision above dimension 6",
            dims.0, dims.1
        ));
        Ok(SymsepVerdict {
            status: SymsepStatus::Unknown,
            evidence,
        })
    }
}

/// Separable channel with product-form Kraus operators
/// E(ρ) = Σ_j (K_A^j ⊗ K_B^j) ρ (K_A^j ⊗ K_B^j)†.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SepChannelJson", into = "SepChannelJson")]
pub struct SepChannel {
    kraus_pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
    lifted: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct SepChannelJson {
    kraus_pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl From<SepChannel> for SepChannelJson {
    fn from(ch: SepChannel) -> Self {
        SepChannelJson {
            kraus_pairs: ch.kraus_pairs,
        }
    }
}

impl TryFrom<SepChannelJson> for SepChannel {
    type Error = String;
    fn try_from(j: SepChannelJson) -> std::result::Result<Self, String> {
        SepChannel::new(j.kraus_pairs).map_err(|e| e.to_string())
    }
}

impl SepChannel {
    /// Validate trace preservation: Σ (K_A⊗K_B)†(K_A⊗K_B) = 1 within 1e-9.
    pub fn new(kraus_pairs: Vec<(ComplexMatrix, ComplexMatrix)>) -> Result<Self> {
        if kraus_pairs.is_empty() {
            return Err(Error::InvalidConfig("empty Kraus set".into()));
        }
        let lifted: Vec<ComplexMatrix> = kraus_pairs
            .iter()
            .map(|(ka, kb)| kron(ka, kb))
            .collect();
        let n = lifted[0].rows();
        let mut sum = ComplexMatrix::zeros(n, n);
        for k in &lifted {
            if k.rows() != n || !k.is_square() {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator",
                    expected: n,
                    got: k.rows(),
                });
            }
            sum = sum.add(&k.adjoint().matmul(k));
        }
        let deviation = sum.sub(&ComplexMatrix::identity(n)).frobenius_norm();
        if deviation > DEFAULT_TOL * (n as f64).sqrt().max(1.0) {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(SepChannel {
            kraus_pairs,
            lifted,
        })
    }

    /// Single-pair channel from local unitaries.
    pub fn from_local_unitaries(u_a: ComplexMatrix, u_b: ComplexMatrix) -> Result<Self> {
        SepChannel::new(vec![(u_a, u_b)])
    }

    pub fn kraus_pairs(&self) -> &[(ComplexMatrix, ComplexMatrix)] {
        &self.kraus_pairs
    }

    pub fn dim(&self) -> usize {
        self.lifted[0].rows()
    }
}

/// Apply a separable channel; the output is validated and trace-preserving.
pub fn apply_sep_channel(rho: &DensityMatrix, ch: &SepChannel) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            context: "apply_sep_channel",
            expected: ch.dim(),
            got: rho.dim(),
        });
    }
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in &ch.lifted {
        out = out.add(&k.matmul(rho.matrix()).matmul(&k.adjoint()));
    }
    DensityMatrix::new(out, rho.dims())
}

/// Whether every product Kraus operator commutes with the charge.
pub fn is_symmetric_channel(ch: &SepChannel, n: &ChargeOperator, tol: f64) -> bool {
    ch.lifted
        .iter()
        .all(|k| matches!(commutator_norm(k, n.matrix()), Ok(norm) if norm <= tol))
}
