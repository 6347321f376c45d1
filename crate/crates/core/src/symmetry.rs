//! Charge operators, spectral sector decomposition, nonselective measurement,
//! and the twirl retraction onto symmetric states.
//!
//! The twirl over a commuting charge family is computed as the composition of
//! nonselective sector measurements, which is exact for any spectrum. The
//! torus-quadrature average is kept as an independent oracle for charges with
//! integer spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, expi_hermitian, hermitian_eig, kron, ComplexMatrix, DEFAULT_TOL,
};
use crate::states::DensityMatrix;

/// Hermitian charge observable with a degeneracy-grouping policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ChargeJson", into = "ChargeJson")]
pub struct ChargeOperator {
    op: ComplexMatrix,
    label: String,
    grouping_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct ChargeJson {
    label: String,
    matrix: ComplexMatrix,
    grouping_tol: f64,
}

impl From<ChargeOperator> for ChargeJson {
    fn from(c: ChargeOperator) -> Self {
        ChargeJson {
            label: c.label,
            matrix: c.op,
            grouping_tol: c.grouping_tol,
        }
    }
}

impl TryFrom<ChargeJson> for ChargeOperator {
    type Error = String;
    fn try_from(j: ChargeJson) -> std::result::Result<Self, String> {
        ChargeOperator::with_grouping_tol(j.matrix, &j.label, j.grouping_tol)
            .map_err(|e| e.to_string())
    }
}

impl ChargeOperator {
    /// Validate Hermiticity and wrap with the default grouping tolerance.
    pub fn new(op: ComplexMatrix, label: &str) -> Result<Self> {
        Self::with_grouping_tol(op, label, DEFAULT_TOL)
    }

    pub fn with_grouping_tol(op: ComplexMatrix, label: &str, grouping_tol: f64) -> Result<Self> {
        op.ensure_hermitian(DEFAULT_TOL)?;
        Ok(ChargeOperator {
            op,
            label: label.to_string(),
            grouping_tol,
        })
    }

    /// Diagonal charge from real eigenvalues in the computational basis.
    pub fn diagonal(label: &str, values: &[f64]) -> Self {
        ChargeOperator {
            op: ComplexMatrix::diagonal(values),
            label: label.to_string(),
            grouping_tol: DEFAULT_TOL,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.op
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    /// Off-diagonal Frobenius norm; zero for charges diagonal in the
    /// computational basis.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.op.rows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.op[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Diagonal entries as real values; valid once `off_diagonal_norm` is
    /// negligible.
    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.op.rows()).map(|i| self.op[(i, i)].re).collect()
    }
}

/// Single-qudit level-number charge diag(0, 1, ..., d-1).
pub fn level_charge(d: usize) -> ChargeOperator {
    let values: Vec<f64> = (0..d).map(|i| i as f64).collect();
    ChargeOperator::diagonal(&format!("n{d}"), &values)
}

/// Level-number charge with shifted spectrum diag(s0, s0+1, ..., s0+d-1).
pub fn level_charge_shifted(d: usize, s0: i64) -> ChargeOperator {
    let values: Vec<f64> = (0..d).map(|i| (s0 + i as i64) as f64).collect();
    ChargeOperator::diagonal(&format!("n{d}+{s0}"), &values)
}

/// Total sigma-z charge on q qubits: diag(q - 2·popcount(index)).
pub fn sigma_z_total(q: usize) -> ChargeOperator {
    let dim = 1usize << q;
    let values: Vec<f64> = (0..dim)
        .map(|i| q as f64 - 2.0 * (i as u64).count_ones() as f64)
        .collect();
    ChargeOperator::diagonal(&format!("sz{q}"), &values)
}

/// Occupation-number charge on q qubits: diag(popcount(index)).
pub fn ones_count_charge(q: usize) -> ChargeOperator {
    let dim = 1usize << q;
    let values: Vec<f64> = (0..dim).map(|i| (i as u64).count_ones() as f64).collect();
    ChargeOperator::diagonal(&format!("ones{q}"), &values)
}

/// Spectral projectors of a charge, grouped by degenerate eigenvalue.
#[derive(Debug, Clone)]
pub struct SectorDecomposition {
    pub charges: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    pub multiplicities: Vec<usize>,
    // Fast measurement path: eigenbasis columns and the sector id of each.
    basis: ComplexMatrix,
    sector_of: Vec<usize>,
}

impl SectorDecomposition {
    pub fn dim(&self) -> usize {
        self.sector_of.len()
    }

    pub fn sector_count(&self) -> usize {
        self.charges.len()
    }

    /// True when every sector is one-dimensional.
    pub fn is_nondegenerate(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Largest |charge_i - charge_j| over sector representatives.
    pub fn spectral_diameter(&self) -> f64 {
        match (
            self.charges.first(),
            self.charges.last(),
        ) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Σ Π M Π over sectors, computed in the eigenbasis: rotate, zero the
    /// cross-sector blocks, rotate back. Identical to the projector sum.
    pub fn pinch(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.basis;
        let mut b = v.adjoint().matmul(m).matmul(v);
        for i in 0..n {
            for j in 0..n {
                if self.sector_of[i] != self.sector_of[j] {
                    b[(i, j)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        v.matmul(&b).matmul(&v.adjoint())
    }
}

/// Group the spectrum of a Hermitian charge into degenerate sectors.
///
/// Adjacent eigenvalues are merged when their gap is at most
/// `grouping_tol · max(1, |λ|_max)`.
pub fn sector_decompose(n: &ChargeOperator) -> Result<SectorDecomposition> {
    let eig = hermitian_eig(n.matrix())?;
    let dim = n.dim();
    let lam_max = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let threshold = n.grouping_tol() * lam_max.max(1.0);

    let mut sector_of = vec![0usize; dim];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let start_new = match groups.last() {
            Some(group) => {
                let prev = eig.eigenvalues[*group.last().unwrap()];
                lam - prev > threshold
            }
            None => true,
        };
        if start_new {
            groups.push(vec![i]);
        } else {
            groups.last_mut().unwrap().push(i);
        }
        sector_of[i] = groups.len() - 1;
    }

    let mut charges = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for group in &groups {
        let rep = group.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / group.len() as f64;
        charges.push(rep);
        multiplicities.push(group.len());
        let mut proj = ComplexMatrix::zeros(dim, dim);
        for &k in group {
            for r in 0..dim {
                let vrk = eig.eigenvectors[(r, k)];
                for c in 0..dim {
                    proj[(r, c)] += vrk * eig.eigenvectors[(c, k)].conj();
                }
            }
        }
        projectors.push(proj);
    }

    Ok(SectorDecomposition {
        charges,
        projectors,
        multiplicities,
        basis: eig.eigenvectors,
        sector_of,
    })
}

/// N_A ⊗ 1_B + 1_A ⊗ N_B.
pub fn build_sum_charge(
    n_a: &ChargeOperator,
    n_b: &ChargeOperator,
    dims: (usize, usize),
) -> Result<ChargeOperator> {
    check_local_dims(n_a, n_b, dims)?;
    let lifted_a = kron(n_a.matrix(), &ComplexMatrix::identity(dims.1));
    let lifted_b = kron(&ComplexMatrix::identity(dims.0), n_b.matrix());
    ChargeOperator::with_grouping_tol(
        lifted_a.add(&lifted_b),
        &format!("{}+{}", n_a.label(), n_b.label()),
        n_a.grouping_tol().max(n_b.grouping_tol()),
    )
}

/// N_A ⊗ N_B.
pub fn build_product_charge(
    n_a: &ChargeOperator,
    n_b: &ChargeOperator,
    dims: (usize, usize),
) -> Result<ChargeOperator> {
    check_local_dims(n_a, n_b, dims)?;
    ChargeOperator::with_grouping_tol(
        kron(n_a.matrix(), n_b.matrix()),
        &format!("{}x{}", n_a.label(), n_b.label()),
        n_a.grouping_tol().max(n_b.grouping_tol()),
    )
}

fn check_local_dims(
    n_a: &ChargeOperator,
    n_b: &ChargeOperator,
    dims: (usize, usize),
) -> Result<()> {
    if n_a.dim() != dims.0 {
        return Err(Error::DimensionMismatch {
            context: "local charge on A",
            expected: dims.0,
            got: n_a.dim(),
        });
    }
    if n_b.dim() != dims.1 {
        return Err(Error::DimensionMismatch {
            context: "local charge on B",
            expected: dims.1,
            got: n_b.dim(),
        });
    }
    Ok(())
}

/// Nonselective measurement ρ ↦ Σ_N Π_N ρ Π_N.
pub fn nonselective_measure(rho: &DensityMatrix, s: &SectorDecomposition) -> Result<DensityMatrix> {
    if rho.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            context: "nonselective_measure",
            expected: s.dim(),
            got: rho.dim(),
        });
    }
    let pinched = s.pinch(rho.matrix());
    DensityMatrix::new(pinched, rho.dims())
}

/// How a commuting charge family was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Single global charge N_A ⊗ 1 + 1 ⊗ N_B.
    Sum,
    /// Single global charge N_A ⊗ N_B.
    Product,
    /// The pair {N_A ⊗ 1, 1 ⊗ N_B}.
    Local,
    /// Arbitrary commuting set of global charges.
    Custom,
}

impl FamilyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::Sum => "sum",
            FamilyKind::Product => "product",
            FamilyKind::Local => "local",
            FamilyKind::Custom => "custom",
        }
    }
}

/// Commuting set of global charges, with each member's sector decomposition
/// precomputed at construction (the memoized decompositions are what make
/// repeated twirls cheap).
///
/// Wire form: `{"kind": .., "dims": [dA, dB], "members": [..]}` where members
/// are the two local charges for `sum`/`product`/`local` kinds, and global
/// operators for `custom`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct ChargeFamily {
    kind: FamilyKind,
    members: Vec<ChargeOperator>,
    sectors: Vec<SectorDecomposition>,
    local: Option<(ChargeOperator, ChargeOperator)>,
    dims: (usize, usize),
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<(usize, usize)>,
    members: Vec<ChargeOperator>,
}

impl From<ChargeFamily> for FamilyJson {
    fn from(f: ChargeFamily) -> Self {
        let members = match (&f.kind, &f.local) {
            (FamilyKind::Custom, _) => f.members,
            (_, Some((a, b))) => vec![a.clone(), b.clone()],
            _ => f.members,
        };
        FamilyJson {
            kind: f.kind,
            dims: Some(f.dims),
            members,
        }
    }
}

impl TryFrom<FamilyJson> for ChargeFamily {
    type Error = String;
    fn try_from(j: FamilyJson) -> std::result::Result<Self, String> {
        let build = || -> Result<ChargeFamily> {
            match j.kind {
                FamilyKind::Custom => {
                    let dims = j.dims.ok_or_else(|| {
                        Error::InvalidConfig("custom charge family requires dims".into())
                    })?;
                    ChargeFamily::custom(j.members.clone(), dims)
                }
                kind => {
                    if j.members.len() != 2 {
                        return Err(Error::InvalidConfig(format!(
                            "{} charge family needs exactly 2 local members, got {}",
                            kind.as_str(),
                            j.members.len()
                        )));
                    }
                    let dims = j
                        .dims
                        .unwrap_or((j.members[0].dim(), j.members[1].dim()));
                    match kind {
                        FamilyKind::Sum => {
                            ChargeFamily::sum(j.members[0].clone(), j.members[1].clone(), dims)
                        }
                        FamilyKind::Product => {
                            ChargeFamily::product(j.members[0].clone(), j.members[1].clone(), dims)
                        }
                        FamilyKind::Local => {
                            ChargeFamily::local(j.members[0].clone(), j.members[1].clone(), dims)
                        }
                        FamilyKind::Custom => unreachable!(),
                    }
                }
            }
        };
        build().map_err(|e| e.to_string())
    }
}

impl ChargeFamily {
    pub fn sum(n_a: ChargeOperator, n_b: ChargeOperator, dims: (usize, usize)) -> Result<Self> {
        let global = build_sum_charge(&n_a, &n_b, dims)?;
        Self::assemble(FamilyKind::Sum, vec![global], Some((n_a, n_b)), dims)
    }

    pub fn product(n_a: ChargeOperator, n_b: ChargeOperator, dims: (usize, usize)) -> Result<Self> {
        let global = build_product_charge(&n_a, &n_b, dims)?;
        Self::assemble(FamilyKind::Product, vec![global], Some((n_a, n_b)), dims)
    }

    pub fn local(n_a: ChargeOperator, n_b: ChargeOperator, dims: (usize, usize)) -> Result<Self> {
        check_local_dims(&n_a, &n_b, dims)?;
        let lifted_a = ChargeOperator::with_grouping_tol(
            kron(n_a.matrix(), &ComplexMatrix::identity(dims.1)),
            &format!("{}@A", n_a.label()),
            n_a.grouping_tol(),
        )?;
        let lifted_b = ChargeOperator::with_grouping_tol(
            kron(&ComplexMatrix::identity(dims.0), n_b.matrix()),
            &format!("{}@B", n_b.label()),
            n_b.grouping_tol(),
        )?;
        Self::assemble(
            FamilyKind::Local,
            vec![lifted_a, lifted_b],
            Some((n_a, n_b)),
            dims,
        )
    }

    pub fn custom(members: Vec<ChargeOperator>, dims: (usize, usize)) -> Result<Self> {
        Self::assemble(FamilyKind::Custom, members, None, dims)
    }

    fn assemble(
        kind: FamilyKind,
        members: Vec<ChargeOperator>,
        local: Option<(ChargeOperator, ChargeOperator)>,
        dims: (usize, usize),
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidConfig("charge family has no members".into()));
        }
        let total = dims.0 * dims.1;
        for m in &members {
            if m.dim() != total {
                return Err(Error::DimensionMismatch {
                    context: "charge family member",
                    expected: total,
                    got: m.dim(),
                });
            }
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let norm = commutator_norm(members[i].matrix(), members[j].matrix())?;
                let scale = members[i]
                    .matrix()
                    .frobenius_norm()
                    .max(members[j].matrix().frobenius_norm())
                    .max(1.0);
                if norm > DEFAULT_TOL * scale {
                    return Err(Error::NonCommutingFamily { norm });
                }
            }
        }
        let sectors = members
            .iter()
            .map(sector_decompose)
            .collect::<Result<Vec<_>>>()?;
        Ok(ChargeFamily {
            kind,
            members,
            sectors,
            local,
            dims,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn members(&self) -> &[ChargeOperator] {
        &self.members
    }

    pub fn member_sectors(&self) -> &[SectorDecomposition] {
        &self.sectors
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// The local charge pair (N_A, N_B) when this family carries one.
    pub fn local_pair(&self) -> Option<(&ChargeOperator, &ChargeOperator)> {
        self.local.as_ref().map(|(a, b)| (a, b))
    }

    /// The family {N_A ⊗ 1, 1 ⊗ N_B} localizing this one.
    pub fn localized(&self) -> Result<ChargeFamily> {
        match (&self.kind, &self.local) {
            (FamilyKind::Local, _) => Ok(self.clone()),
            (_, Some((a, b))) => ChargeFamily::local(a.clone(), b.clone(), self.dims),
            _ => Err(Error::InvalidConfig(
                "custom charge family carries no local pair to localize".into(),
            )),
        }
    }
}

/// Twirl: the projection of ρ onto the family-symmetric states, computed as
/// the composition of nonselective measurements over the family members.
pub fn twirl(rho: &DensityMatrix, family: &ChargeFamily) -> Result<DensityMatrix> {
    if rho.dim() != family.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "twirl",
            expected: family.total_dim(),
            got: rho.dim(),
        });
    }
    let mut out = rho.clone();
    for sectors in family.member_sectors() {
        out = nonselective_measure(&out, sectors)?;
    }
    Ok(out)
}

/// Independent oracle for [`twirl`]: the uniform torus average
/// (1/G^M) Σ_g T(g) ρ T†(g) on a finite phase grid.
///
/// Exact only for integer charge spectra and requires the grid to exceed the
/// spectral diameter of each member; non-integer spectra are rejected.
pub fn twirl_quadrature_oracle(
    rho: &DensityMatrix,
    family: &ChargeFamily,
    grid_points: usize,
) -> Result<DensityMatrix> {
    if rho.dim() != family.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "twirl_quadrature_oracle",
            expected: family.total_dim(),
            got: rho.dim(),
        });
    }
    if grid_points == 0 {
        return Err(Error::InvalidConfig("grid_points must be positive".into()));
    }
    let mut out = rho.matrix().clone();
    for member in family.members() {
        let eigs = crate::linalg::hermitian_eigenvalues(member.matrix())?;
        for &lam in &eigs {
            let deviation = (lam - lam.round()).abs();
            if deviation > 1e-9 {
                return Err(Error::NonIntegerSpectrum {
                    value: lam,
                    deviation,
                });
            }
        }
        let mut acc = ComplexMatrix::zeros(out.rows(), out.cols());
        for g in 0..grid_points {
            let theta = 2.0 * std::f64::consts::PI * (g as f64) / (grid_points as f64);
            let u = expi_hermitian(member.matrix(), theta)?;
            acc = acc.add(&u.matmul(&out).matmul(&u.adjoint()));
        }
        out = acc.scale_real(1.0 / grid_points as f64);
    }
    DensityMatrix::new(out, rho.dims())
}

/// Whether ρ commutes with the charge within `tol` (Frobenius).
pub fn is_symmetric(rho: &DensityMatrix, n: &ChargeOperator, tol: f64) -> bool {
    match commutator_norm(rho.matrix(), n.matrix()) {
        Ok(norm) => norm <= tol,
        Err(_) => false,
    }
}

/// Whether ρ commutes with every member of the family within `tol`.
pub fn is_family_symmetric(rho: &DensityMatrix, family: &ChargeFamily, tol: f64) -> bool {
    family.members().iter().all(|m| is_symmetric(rho, m, tol))
}

/// Local index data of one global charge sector for diagonal local charges:
/// the contributing A and B levels and the exact (i, j) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSubspace {
    pub charge: f64,
    pub a_indices: Vec<usize>,
    pub b_indices: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

/// For a sum or product family with diagonal local charges, list per global
/// charge n the local subspaces h_A^n, h_B^n (as index sets) and the product
/// kets (i, j) of that charge. The span of the listed kets contains the
/// charge-n eigenspace.
pub fn sector_subspaces(family: &ChargeFamily) -> Result<Vec<SectorSubspace>> {
    let (n_a, n_b) = match (family.kind(), family.local_pair()) {
        (FamilyKind::Sum | FamilyKind::Product, Some(pair)) => pair,
        _ => {
            return Err(Error::InvalidConfig(
                "sector_subspaces needs a sum or product family with local charges".into(),
            ))
        }
    };
    for n in [n_a, n_b] {
        let off = n.off_diagonal_norm();
        if off > n.grouping_tol() * n.matrix().frobenius_norm().max(1.0) {
            return Err(Error::NonDiagonalCharge { norm: off });
        }
    }
    let a_vals = n_a.diagonal_values();
    let b_vals = n_b.diagonal_values();
    let combine = |a: f64, b: f64| -> f64 {
        match family.kind() {
            FamilyKind::Sum => a + b,
            FamilyKind::Product => a * b,
            _ => unreachable!(),
        }
    };

    // Group all (i, j) pairs by combined charge, with tolerance-based merging
    // of nearby values.
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &a) in a_vals.iter().enumerate() {
        for (j, &b) in b_vals.iter().enumerate() {
            entries.push((combine(a, b), i, j));
        }
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let lam_max = entries
        .iter()
        .fold(0.0f64, |acc, &(v, _, _)| acc.max(v.abs()));
    let tol = n_a.grouping_tol().max(n_b.grouping_tol()) * lam_max.max(1.0);

    let mut out: Vec<SectorSubspace> = Vec::new();
    let mut prev_value = f64::NEG_INFINITY;
    for (v, i, j) in entries {
        let start_new = out.is_empty() || v - prev_value > tol;
        prev_value = v;
        if start_new {
            out.push(SectorSubspace {
                charge: v,
                a_indices: vec![i],
                b_indices: vec![j],
                pairs: vec![(i, j)],
            });
        } else {
            let last = out.last_mut().unwrap();
            if !last.a_indices.contains(&i) {
                last.a_indices.push(i);
            }
            if !last.b_indices.contains(&j) {
                last.b_indices.push(j);
            }
            last.pairs.push((i, j));
        }
    }
    for s in &mut out {
        s.a_indices.sort_unstable();
        s.b_indices.sort_unstable();
        s.pairs.sort_unstable();
    }
    Ok(out)
}

/// Index sets (IA, IB) whose product kets all share one global charge.
pub(crate) type ProductRectangle = (Vec<usize>, Vec<usize>);

/// Maximal "product rectangles" IA × IB inside each charge sector: index sets
/// such that every pair (i, j) ∈ IA × IB carries the same global charge. Any
/// product vector supported on such a rectangle lies inside one charge
/// eigenspace, which is what the sector-hull sampler needs.
pub(crate) fn sector_rectangles(
    family: &ChargeFamily,
) -> Result<Vec<(f64, Vec<ProductRectangle>)>> {
    let (n_a, n_b) = match (family.kind(), family.local_pair()) {
        (FamilyKind::Sum | FamilyKind::Product, Some(pair)) => pair,
        _ => {
            return Err(Error::InvalidConfig(
                "sector rectangles need a sum or product family with local charges".into(),
            ))
        }
    };
    for n in [n_a, n_b] {
        let off = n.off_diagonal_norm();
        if off > n.grouping_tol() * n.matrix().frobenius_norm().max(1.0) {
            return Err(Error::NonDiagonalCharge { norm: off });
        }
    }

    // Distinct local eigenvalue groups with their index sets.
    let group = |vals: &[f64], tol: f64| -> Vec<(f64, Vec<usize>)> {
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for idx in order {
            match groups.last_mut() {
                Some((rep, set)) if (vals[idx] - *rep).abs() <= tol => set.push(idx),
                _ => groups.push((vals[idx], vec![idx])),
            }
        }
        groups
    };
    let a_vals = n_a.diagonal_values();
    let b_vals = n_b.diagonal_values();
    let lam_scale = a_vals
        .iter()
        .chain(&b_vals)
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let tol = n_a.grouping_tol().max(n_b.grouping_tol()) * lam_scale;
    let a_groups = group(&a_vals, tol);
    let b_groups = group(&b_vals, tol);

    let is_zero = |v: f64| v.abs() <= tol;
    let mut sectors: Vec<(f64, Vec<ProductRectangle>)> = Vec::new();
    let mut push = |charge: f64, rect: (Vec<usize>, Vec<usize>)| {
        if let Some(existing) = sectors.iter_mut().find(|(c, _)| (*c - charge).abs() <= tol) {
            existing.1.push(rect);
        } else {
            sectors.push((charge, vec![rect]));
        }
    };

    match family.kind() {
        FamilyKind::Sum => {
            // Rectangles cannot span two distinct A-values: a+b = a'+b forces
            // a = a'. One rectangle per contributing eigenvalue pair.
            for (av, aset) in &a_groups {
                for (bv, bset) in &b_groups {
                    push(av + bv, (aset.clone(), bset.clone()));
                }
            }
        }
        FamilyKind::Product => {
            // For n = 0, any A-vector pairs with the B kernel and vice versa;
            // for n != 0 the rectangle is a single eigenvalue pair.
            let all_a: Vec<usize> = (0..a_vals.len()).collect();
            let all_b: Vec<usize> = (0..b_vals.len()).collect();
            let a_zero: Vec<usize> = a_groups
                .iter()
                .filter(|(v, _)| is_zero(*v))
                .flat_map(|(_, s)| s.clone())
                .collect();
            let b_zero: Vec<usize> = b_groups
                .iter()
                .filter(|(v, _)| is_zero(*v))
                .flat_map(|(_, s)| s.clone())
                .collect();
            if !b_zero.is_empty() {
                push(0.0, (all_a, b_zero.clone()));
            }
            if !a_zero.is_empty() {
                push(0.0, (a_zero, all_b));
            }
            for (av, aset) in &a_groups {
                if is_zero(*av) {
                    continue;
                }
                for (bv, bset) in &b_groups {
                    if is_zero(*bv) {
                        continue;
                    }
                    push(av * bv, (aset.clone(), bset.clone()));
                }
            }
        }
        _ => unreachable!(),
    }
    sectors.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(sectors)
}
