//! Validated quantum-state types, entropies, purification, and the pure-state
//! entanglement entropy.
//!
//! All entropies are in bits (base-2 logarithms).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hermitian_eigenvalues, partial_trace, ComplexMatrix, DEFAULT_TOL,
};

/// Eigenvalues at or below this are treated as exact zeros inside entropies,
/// so that roundoff-negative eigenvalues of PSD matrices never produce NaN.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-12;

/// Dimensions of a fixed bipartition A|B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub d_a: usize,
    pub d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Self {
        BipartiteDims { d_a, d_b }
    }

    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }
}

/// Validated density matrix with subsystem dimension metadata.
///
/// The dimension list records the tensor factors; the canonical bipartition
/// is the first factor against the rest. Validation happens at construction:
/// Hermitian within `1e-9` (relative Frobenius), unit trace within `1e-9`,
/// and minimum eigenvalue at least `-1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityJson", into = "DensityJson")]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl From<DensityMatrix> for DensityJson {
    fn from(d: DensityMatrix) -> Self {
        DensityJson {
            dims: d.dims,
            matrix: d.mat,
        }
    }
}

impl TryFrom<DensityJson> for DensityMatrix {
    type Error = String;
    fn try_from(j: DensityJson) -> std::result::Result<Self, String> {
        DensityMatrix::new(j.matrix, &j.dims).map_err(|e| e.to_string())
    }
}

impl DensityMatrix {
    /// Validate and wrap a matrix as a density operator.
    pub fn new(mat: ComplexMatrix, dims: &[usize]) -> Result<Self> {
        let n = mat.ensure_square()?;
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != n {
            return Err(Error::BadSubsystemDims {
                dims: dims.to_vec(),
                size: n,
            });
        }
        mat.ensure_hermitian(DEFAULT_TOL)?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("trace is {:.12}+{:.3e}i, expected 1", tr.re, tr.im),
            });
        }
        if let Some(min) = psd_violation(&mat, DEFAULT_TOL)? {
            return Err(Error::InvalidDensity {
                reason: format!("minimum eigenvalue {min:.3e} below -{DEFAULT_TOL:.0e}"),
            });
        }
        Ok(DensityMatrix {
            mat,
            dims: dims.to_vec(),
        })
    }

    /// Pure-state density |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::outer(psi.vec()),
            dims: psi.dims().to_vec(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Canonical bipartition: first tensor factor vs. the rest.
    pub fn bipartition(&self) -> BipartiteDims {
        let d_a = self.dims[0];
        let d_b: usize = self.dims[1..].iter().product::<usize>().max(1);
        BipartiteDims::new(d_a, d_b)
    }

    /// Same operator reinterpreted over a different factorization.
    pub fn with_dims(&self, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != self.dim() {
            return Err(Error::BadSubsystemDims {
                dims: dims.to_vec(),
                size: self.dim(),
            });
        }
        Ok(DensityMatrix {
            mat: self.mat.clone(),
            dims: dims.to_vec(),
        })
    }

    /// Purity Tr(ρ²).
    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let red = partial_trace(&self.mat, &self.dims, keep)?;
        let kept: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        DensityMatrix::new(red, &kept)
    }
}

/// Fast PSD gate: attempt a Cholesky factorization of `m + tol·I`; on failure
/// fall back to exact eigenvalues. Returns the offending minimum eigenvalue
/// when the matrix is not PSD within `tol`, `None` otherwise.
fn psd_violation(m: &ComplexMatrix, tol: f64) -> Result<Option<f64>> {
    if cholesky_succeeds(m, tol) {
        return Ok(None);
    }
    let eigs = hermitian_eigenvalues(m)?;
    let min = eigs.first().copied().unwrap_or(0.0);
    Ok(if min < -tol { Some(min) } else { None })
}

/// Cholesky of `m + shift·I` with strictly positive pivots.
fn cholesky_succeeds(m: &ComplexMatrix, shift: f64) -> bool {
    let n = m.rows();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            if i == j {
                sum += shift;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if sum.re <= 0.0 {
                    return false;
                }
                l[i * n + i] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    true
}

/// Normalized pure state with subsystem dimension metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    /// Validate unit norm (within 1e-12) and wrap.
    pub fn new(vec: Vec<Complex64>, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != vec.len() {
            return Err(Error::BadSubsystemDims {
                dims: dims.to_vec(),
                size: vec.len(),
            });
        }
        let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(PureState {
            vec,
            dims: dims.to_vec(),
        })
    }

    /// Normalize then wrap; errors only on the zero vector.
    pub fn normalized(mut vec: Vec<Complex64>, dims: &[usize]) -> Result<Self> {
        let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        for z in &mut vec {
            *z /= norm;
        }
        PureState::new(vec, dims)
    }

    /// Computational basis ket |k⟩.
    pub fn basis_ket(dim: usize, k: usize, dims: &[usize]) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        PureState::new(v, dims)
    }

    pub fn vec(&self) -> &[Complex64] {
        &self.vec
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn bipartition(&self) -> BipartiteDims {
        let d_a = self.dims[0];
        let d_b: usize = self.dims[1..].iter().product::<usize>().max(1);
        BipartiteDims::new(d_a, d_b)
    }

    /// Same vector reinterpreted over a different factorization.
    pub fn with_dims(&self, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != self.vec.len() {
            return Err(Error::BadSubsystemDims {
                dims: dims.to_vec(),
                size: self.vec.len(),
            });
        }
        Ok(PureState {
            vec: self.vec.clone(),
            dims: dims.to_vec(),
        })
    }

    /// Euclidean distance ‖ψ − φ‖₂.
    pub fn distance(&self, other: &PureState) -> f64 {
        self.vec
            .iter()
            .zip(&other.vec)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Shannon entropy in bits of a clipped spectrum.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let mut s = 0.0;
    for &lam in eigenvalues {
        if lam > ENTROPY_EIGENVALUE_FLOOR {
            s -= lam * lam.log2();
        }
    }
    s
}

/// Von Neumann entropy S(ρ) = −Tr(ρ log₂ ρ) in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(rho.matrix())?;
    Ok(spectrum_entropy(&eigs))
}

/// Bipartite entanglement entropy of a pure state: S(Tr_B |ψ⟩⟨ψ|) in bits.
///
/// Computed from the reduced operator on A assembled directly from the state
/// vector, which keeps the cost at `d_A² · d_B`.
pub fn entanglement_entropy(psi: &PureState, dims: BipartiteDims) -> Result<f64> {
    if dims.total() != psi.dim() {
        return Err(Error::DimensionMismatch {
            context: "entanglement_entropy",
            expected: dims.total(),
            got: psi.dim(),
        });
    }
    let red = reduced_on_a(psi.vec(), dims);
    let eigs = hermitian_eigenvalues(&red)?;
    Ok(spectrum_entropy(&eigs))
}

/// Reduced operator Tr_B |ψ⟩⟨ψ| for a vector over A⊗B.
pub(crate) fn reduced_on_a(psi: &[Complex64], dims: BipartiteDims) -> ComplexMatrix {
    let (da, db) = (dims.d_a, dims.d_b);
    let mut red = ComplexMatrix::zeros(da, da);
    for i in 0..da {
        for ip in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..db {
                acc += psi[i * db + j] * psi[ip * db + j].conj();
            }
            red[(i, ip)] = acc;
        }
    }
    red
}

/// Canonical purification |pu(ρ)⟩ = Σ √λᵢ |vᵢ⟩ ⊗ |i⟩ on dimension d².
///
/// Tracing the ancilla (second factor) recovers ρ.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let eig = hermitian_eig(rho.matrix())?;
    let d = rho.dim();
    let mut vec = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= ENTROPY_EIGENVALUE_FLOOR {
            continue;
        }
        let w = lam.sqrt();
        for i in 0..d {
            vec[i * d + k] += eig.eigenvectors[(i, k)] * w;
        }
    }
    PureState::normalized(vec, &[d, d])
}

/// Minimum eigenvalue of the partial transpose on the B factor of the
/// canonical bipartition. `>= -tol` means PPT; PPT is equivalent to
/// separability exactly when d_A·d_B ≤ 6.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let dims = rho.bipartition();
    let (da, db) = (dims.d_a, dims.d_b);
    if da * db != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "ppt_min_eigenvalue",
            expected: da * db,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    let mut pt = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for i in 0..da {
        for ip in 0..da {
            for j in 0..db {
                for jp in 0..db {
                    pt[(i * db + j, ip * db + jp)] = m[(i * db + jp, ip * db + j)];
                }
            }
        }
    }
    let eigs = hermitian_eigenvalues(&pt)?;
    Ok(eigs.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fidelity, bures_distance, kron};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::diagonal(&[1.0, 0.0]), &[2]).unwrap()
    }

    fn ket1() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::diagonal(&[0.0, 1.0]), &[2]).unwrap()
    }

    fn maximally_mixed(d: usize) -> DensityMatrix {
        DensityMatrix::new(
            ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            &[d],
        )
        .unwrap()
    }

    fn bell() -> PureState {
        let inv = 1.0 / 2f64.sqrt();
        PureState::new(vec![c(inv, 0.), c(0., 0.), c(0., 0.), c(inv, 0.)], &[2, 2]).unwrap()
    }

    #[test]
    fn validation_rejects_bad_trace() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(
            DensityMatrix::new(m, &[2]),
            Err(Error::InvalidDensity { .. })
        ));
    }

    #[test]
    fn validation_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(m, &[2]),
            Err(Error::InvalidDensity { .. })
        ));
    }

    #[test]
    fn validation_accepts_boundary_pure_state() {
        let m = ComplexMatrix::diagonal(&[1.0, 0.0, 0.0]);
        assert!(DensityMatrix::new(m, &[3]).is_ok());
    }

    #[test]
    fn entropy_pure_state_is_zero() {
        assert_eq!(von_neumann_entropy(&ket0()).unwrap(), 0.0);
    }

    #[test]
    fn entropy_maximally_mixed() {
        for d in [2usize, 3, 4, 8] {
            let s = von_neumann_entropy(&maximally_mixed(d)).unwrap();
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_direct_evaluation() {
        let rho =
            DensityMatrix::new(ComplexMatrix::diagonal(&[0.5, 0.25, 0.25]), &[3]).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - 1.5).abs() < 1e-12);
    }

    #[test]
    fn entanglement_entropy_product_state() {
        let psi = PureState::new(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], &[2, 2])
            .unwrap();
        let s = entanglement_entropy(&psi, BipartiteDims::new(2, 2)).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn entanglement_entropy_bell_state() {
        let s = entanglement_entropy(&bell(), BipartiteDims::new(2, 2)).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entanglement_entropy_schmidt_formula() {
        // a|00> + sqrt(1-a^2)|11> with a^2 = 0.25.
        let a = 0.5_f64;
        let b = (1.0 - a * a).sqrt();
        let psi =
            PureState::new(vec![c(a, 0.), c(0., 0.), c(0., 0.), c(b, 0.)], &[2, 2]).unwrap();
        let s = entanglement_entropy(&psi, BipartiteDims::new(2, 2)).unwrap();
        let expected = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((s - expected).abs() < 1e-12);
        assert!((expected - 0.8112781244591328).abs() < 1e-12);
    }

    #[test]
    fn entanglement_entropy_symmetric_in_parties() {
        let v = vec![
            c(0.4, 0.1),
            c(-0.2, 0.3),
            c(0.5, 0.0),
            c(0.1, -0.4),
            c(0.3, 0.2),
            c(0.2, 0.2),
        ];
        let psi = PureState::normalized(v, &[2, 3]).unwrap();
        let s_a = entanglement_entropy(&psi, BipartiteDims::new(2, 3)).unwrap();
        // Swap roles by transposing the coefficient matrix.
        let mut w = vec![c(0., 0.); 6];
        for i in 0..2 {
            for j in 0..3 {
                w[j * 2 + i] = psi.vec()[i * 3 + j];
            }
        }
        let phi = PureState::new(w, &[3, 2]).unwrap();
        let s_b = entanglement_entropy(&phi, BipartiteDims::new(3, 2)).unwrap();
        assert!((s_a - s_b).abs() < 1e-9);
    }

    #[test]
    fn purify_pure_state() {
        let pu = purify(&ket0()).unwrap();
        let rho = DensityMatrix::from_pure(&pu);
        let marginal = rho.reduce(&[0]).unwrap();
        assert!(
            marginal
                .matrix()
                .sub(ket0().matrix())
                .frobenius_norm()
                < 1e-9
        );
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let pu = purify(&maximally_mixed(2)).unwrap();
        let s = entanglement_entropy(&pu, BipartiteDims::new(2, 2)).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn purify_random_marginal_round_trip() {
        // Pseudo-random mixed states up to dimension 16.
        for d in [2usize, 3, 5, 16] {
            let mut vals = Vec::with_capacity(d * d);
            let mut x = 0.37_f64;
            for _ in 0..d * d {
                x = (x * 997.13).fract();
                let y = (x * 631.71).fract();
                vals.push(c(x - 0.5, y - 0.5));
            }
            let psi = PureState::normalized(vals, &[d, d]).unwrap();
            let rho = DensityMatrix::from_pure(&psi).reduce(&[0]).unwrap();
            let pu = purify(&rho).unwrap();
            let back = DensityMatrix::from_pure(&pu).reduce(&[0]).unwrap();
            assert!(back.matrix().sub(rho.matrix()).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn ppt_product_state_nonnegative() {
        let prod = kron(ket0().matrix(), maximally_mixed(2).matrix());
        let rho = DensityMatrix::new(prod, &[2, 2]).unwrap();
        assert!(ppt_min_eigenvalue(&rho).unwrap() >= -1e-12);
    }

    #[test]
    fn ppt_bell_state_is_minus_half() {
        let rho = DensityMatrix::from_pure(&bell());
        let min = ppt_min_eigenvalue(&rho).unwrap();
        assert!((min + 0.5).abs() < 1e-12);
    }

    #[test]
    fn ppt_identity_fixed_point() {
        let rho = maximally_mixed(4).with_dims(&[2, 2]).unwrap();
        let min = ppt_min_eigenvalue(&rho).unwrap();
        assert!((min - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fidelity_identity_case() {
        let rho = maximally_mixed(3);
        let f = fidelity(&rho, &rho).unwrap();
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_orthogonal_pure_states() {
        let f = fidelity(&ket0(), &ket1()).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn fidelity_pure_vs_mixed_closed_form() {
        let f = fidelity(&ket0(), &maximally_mixed(2)).unwrap();
        assert!((f - 0.5).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetry() {
        let sigma = DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.6, 0.), c(0.2, 0.1)],
                vec![c(0.2, -0.1), c(0.4, 0.)],
            ]),
            &[2],
        )
        .unwrap();
        let rho = DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.3, 0.), c(-0.1, 0.2)],
                vec![c(-0.1, -0.2), c(0.7, 0.)],
            ]),
            &[2],
        )
        .unwrap();
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        assert!((f1 - f2).abs() < 1e-9);
    }

    #[test]
    fn bures_identity_and_orthogonal() {
        let rho = maximally_mixed(2);
        assert!(bures_distance(&rho, &rho).unwrap() < 1e-7);
        let d = bures_distance(&ket0(), &ket1()).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bures_half_fidelity_value() {
        let d = bures_distance(&ket0(), &maximally_mixed(2)).unwrap();
        let expected = (2.0 * (1.0 - 0.5f64.sqrt())).sqrt();
        assert!((d - expected).abs() < 1e-9);
        assert!((expected - 0.7653668647301796).abs() < 1e-12);
    }

    #[test]
    fn density_json_round_trip() {
        let rho = maximally_mixed(4).with_dims(&[2, 2]).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(rho, back);
        assert!(s.contains("\"dims\":[2,2]"));
    }

    #[test]
    fn density_json_rejects_invalid() {
        // Not trace one.
        let s = r#"{"dims":[2],"matrix":{"rows":2,"cols":2,"re":[[1.0,0.0],[0.0,1.0]],"im":[[0.0,0.0],[0.0,0.0]]}}"#;
        assert!(serde_json::from_str::<DensityMatrix>(s).is_err());
    }
}
