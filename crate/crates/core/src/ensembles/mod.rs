//! Seeded random-state generators for every sampled ensemble: Haar pure
//! states, induced mixed states, separable mixtures, symmetric-separable
//! states, measured separable states, and the sector-hull sampler.
//!
//! Reproducibility contract: a sample is a pure function of
//! `(seed, stream_id)`. Parallel drivers hand each sample its own stream, so
//! results are bit-identical for any worker count.

mod registry;

pub use registry::{build_sampler, registered_kinds, Sampler};

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, ComplexMatrix};
use crate::states::{DensityMatrix, PureState};
use crate::symmetry::{sector_rectangles, twirl, ChargeFamily};

/// Counter-based, splittable random stream. Identical `(seed, stream_id)`
/// reproduces identical sequences across runs and worker counts.
///
/// Gaussian variates come from a Box-Muller transform of the uniform stream
/// (with the usual spare-value cache), so the full sequence is pinned by this
/// crate rather than by a distributions library.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
    spare_gaussian: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
            spare_gaussian: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform in [0, 1), 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1], safe to pass to a logarithm.
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.uniform();
        self.spare_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian())
    }

    /// Unit-rate exponential.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze, with the standard
    /// boost for shape < 1.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = self.uniform_open();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.gaussian();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v3 = v * v * v;
            let u = self.uniform_open();
            if u < 1.0 - 0.0331 * x.powi(4) || u.ln() < 0.5 * x * x + d * (1.0 - v3 + v3.ln()) {
                return d * v3;
            }
        }
    }

    /// Flat probability vector on the simplex (normalized unit-rate
    /// exponentials, i.e. Dirichlet(1,...,1)).
    pub fn simplex_weights(&mut self, m: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..m).map(|_| self.exponential()).collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }
}

/// Haar-random pure state on dimension `d` (normalized complex Gaussian).
pub fn haar_pure(d: usize, rng: &mut RngStream) -> PureState {
    let v: Vec<Complex64> = (0..d).map(|_| rng.complex_gaussian()).collect();
    PureState::normalized(v, &[d]).expect("Gaussian vector is almost surely nonzero")
}

/// Haar-random pure vector restricted to a local index subset: the returned
/// full-dimension vector is supported on `support`.
fn haar_on_support(dim: usize, support: &[usize], rng: &mut RngStream) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    let mut norm_sq = 0.0;
    for &idx in support {
        let z = rng.complex_gaussian();
        norm_sq += z.norm_sqr();
        v[idx] = z;
    }
    let norm = norm_sq.sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Mixed state induced by partial-tracing a Haar pure state on `d·k` over a
/// `k`-dimensional ancilla (the Hilbert-Schmidt measure when `k == d`).
pub fn induced_mixed(d: usize, k: usize, rng: &mut RngStream) -> DensityMatrix {
    let psi = haar_pure(d * k, rng);
    let red = crate::states::reduced_on_a(psi.vec(), crate::states::BipartiteDims::new(d, k));
    DensityMatrix::new(red, &[d]).expect("induced state is a valid density")
}

/// Induced mixed state reshaped over a bipartition.
pub fn induced_mixed_bipartite(
    dims: (usize, usize),
    k: usize,
    rng: &mut RngStream,
) -> DensityMatrix {
    induced_mixed(dims.0 * dims.1, k, rng)
        .with_dims(&[dims.0, dims.1])
        .expect("dims factor the sampled dimension")
}

/// Random separable state: Σ pᵢ |aᵢ⟩⟨aᵢ| ⊗ |bᵢ⟩⟨bᵢ| with flat simplex
/// weights and Haar factors.
pub fn random_separable(dims: (usize, usize), m: usize, rng: &mut RngStream) -> DensityMatrix {
    let (da, db) = dims;
    let n = da * db;
    let weights = rng.simplex_weights(m.max(1));
    let mut acc = ComplexMatrix::zeros(n, n);
    for &p in &weights {
        let a = haar_pure(da, rng);
        let b = haar_pure(db, rng);
        let v = kron_vec(a.vec(), b.vec());
        accumulate_outer_upper(&mut acc, &v, p);
    }
    mirror_upper(&mut acc);
    DensityMatrix::new(acc, &[da, db]).expect("separable mixture is a valid density")
}

/// acc += p * v v† on the upper triangle only; call [`mirror_upper`] once
/// after the last term.
fn accumulate_outer_upper(acc: &mut ComplexMatrix, v: &[Complex64], p: f64) {
    let n = v.len();
    for i in 0..n {
        let vip = v[i] * p;
        for j in i..n {
            acc[(i, j)] += vip * v[j].conj();
        }
    }
}

/// Fill the strict lower triangle with the conjugate of the upper.
fn mirror_upper(acc: &mut ComplexMatrix) {
    let n = acc.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            acc[(j, i)] = acc[(i, j)].conj();
        }
    }
}

/// Default mixture size (d_A d_B)²: the Caratheodory bound on the number of
/// extreme points needed to reach any point of the separable set.
pub fn default_mixture_terms(dims: (usize, usize)) -> usize {
    let n = dims.0 * dims.1;
    n * n
}

/// Random state in D^sep_N: a random separable state submitted to the
/// family's nonselective measurement. Always symmetric; also separable for
/// sum and local families.
pub fn random_sep_sym(
    dims: (usize, usize),
    family: &ChargeFamily,
    m: usize,
    rng: &mut RngStream,
) -> Result<DensityMatrix> {
    let sep = random_separable(dims, m, rng);
    twirl(&sep, family)
}

/// Random symmetrically separable state: the LOCAL twirl of a random
/// separable state. Every sample has NE = 0 within tolerance.
pub fn random_symsep(
    dims: (usize, usize),
    family: &ChargeFamily,
    m: usize,
    rng: &mut RngStream,
) -> Result<DensityMatrix> {
    let local = family.localized()?;
    let sep = random_separable(dims, m, rng);
    twirl(&sep, &local)
}

/// Random state of the sector convex hull: a flat mixture, across charge
/// sectors, of product states drawn inside each sector's maximal product
/// rectangles. Symmetric and separable by construction for both sum and
/// product charges, yet generally NOT symmetrically separable.
pub fn random_sector_hull(
    dims: (usize, usize),
    family: &ChargeFamily,
    m_per_sector: usize,
    rng: &mut RngStream,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    let n = da * db;
    let sectors = sector_rectangles(family)?;
    let m_per_sector = m_per_sector.max(1);
    let total_terms = sectors.len() * m_per_sector;
    let weights = rng.simplex_weights(total_terms);
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut w_iter = weights.iter();
    for (_charge, rects) in &sectors {
        for _ in 0..m_per_sector {
            let p = *w_iter.next().unwrap();
            // Pick one maximal rectangle of this sector uniformly.
            let r = if rects.len() == 1 {
                0
            } else {
                (rng.uniform() * rects.len() as f64) as usize % rects.len()
            };
            let (ia, ib) = &rects[r];
            let a = haar_on_support(da, ia, rng);
            let b = haar_on_support(db, ib, rng);
            let v = kron_vec(&a, &b);
            accumulate_outer_upper(&mut acc, &v, p);
        }
    }
    mirror_upper(&mut acc);
    DensityMatrix::new(acc, &[da, db])
}

/// Declarative description of a sampling experiment ensemble.
///
/// `kind` selects a registered sampler strategy; see
/// [`registered_kinds`] for the available names. Parameters not used by a
/// kind are ignored; missing required parameters are reported by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: String,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub params: EnsembleParams,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Ancilla dimension for induced mixed states (default d_A·d_B).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<usize>,
    /// Mixture terms for separable-type samplers (default (d_A·d_B)²).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_terms: Option<usize>,
    /// Terms per charge sector for the sector-hull sampler (default d_A·d_B).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_sector_terms: Option<usize>,
    /// Charge family for the symmetry-aware samplers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<ChargeFamily>,
}

impl EnsembleSpec {
    pub fn new(kind: &str, dims: (usize, usize)) -> Self {
        EnsembleSpec {
            kind: kind.to_string(),
            dims: vec![dims.0, dims.1],
            params: EnsembleParams::default(),
        }
    }

    pub fn with_charge(mut self, family: ChargeFamily) -> Self {
        self.params.charge = Some(family);
        self
    }

    pub fn with_mixture_terms(mut self, m: usize) -> Self {
        self.params.mixture_terms = Some(m);
        self
    }

    pub fn bipartition(&self) -> Result<(usize, usize)> {
        match self.dims.len() {
            0 => Err(Error::InvalidConfig("ensemble dims are empty".into())),
            1 => Ok((self.dims[0], 1)),
            _ => Ok((self.dims[0], self.dims[1..].iter().product())),
        }
    }

    /// Fill defaulted parameters with their effective values so that echoed
    /// configs record exactly what was sampled.
    pub fn resolve_defaults(&mut self) -> Result<()> {
        let dims = self.bipartition()?;
        match self.kind.as_str() {
            "induced_mixed" => {
                self.params.ancilla.get_or_insert(dims.0 * dims.1);
            }
            "separable" | "symsep" | "sep_sym_measured" => {
                self.params
                    .mixture_terms
                    .get_or_insert_with(|| default_mixture_terms(dims));
            }
            "sector_hull" => {
                self.params.per_sector_terms.get_or_insert(dims.0 * dims.1);
            }
            _ => {}
        }
        Ok(())
    }
}
