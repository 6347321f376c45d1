//! Runtime sampler selection: each ensemble kind sits behind the [`Sampler`]
//! trait and is looked up by name, so configs and the CLI pick strategies
//! without touching the call sites.

use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use crate::symmetry::{sector_rectangles, ChargeFamily};

use super::{
    default_mixture_terms, haar_pure, induced_mixed_bipartite, random_sector_hull,
    random_sep_sym, random_separable, random_symsep, EnsembleSpec, RngStream,
};

/// A named sampling strategy producing one density matrix per stream.
///
/// Implementations are pure functions of the stream state; sharing a built
/// sampler across threads is safe.
pub trait Sampler: Send + Sync {
    /// Registry name of this strategy.
    fn kind(&self) -> &'static str;

    /// Dimension list of the produced states.
    fn dims(&self) -> &[usize];

    /// Draw one state.
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix;
}

type BuilderFn = fn(&EnsembleSpec) -> Result<Box<dyn Sampler>>;

/// Name-to-builder table. Builders validate the spec once; sampling is then
/// infallible.
const REGISTRY: &[(&str, BuilderFn)] = &[
    ("haar_pure", build_haar_pure),
    ("induced_mixed", build_induced_mixed),
    ("separable", build_separable),
    ("symsep", build_symsep),
    ("sep_sym_measured", build_sep_sym_measured),
    ("sector_hull", build_sector_hull),
];

/// Names of all registered sampler strategies.
pub fn registered_kinds() -> Vec<&'static str> {
    REGISTRY.iter().map(|(name, _)| *name).collect()
}

/// Look up and build the sampler described by the spec.
pub fn build_sampler(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    match REGISTRY.iter().find(|(name, _)| *name == spec.kind) {
        Some((_, build)) => build(spec),
        None => Err(Error::UnknownEnsembleKind {
            kind: spec.kind.clone(),
            known: registered_kinds().join(", "),
        }),
    }
}

fn require_charge(spec: &EnsembleSpec) -> Result<ChargeFamily> {
    spec.params.charge.clone().ok_or(Error::MissingParam {
        kind: spec.kind.clone(),
        param: "charge",
    })
}

fn check_family_dims(spec: &EnsembleSpec, family: &ChargeFamily) -> Result<(usize, usize)> {
    let dims = spec.bipartition()?;
    if family.dims() != dims {
        return Err(Error::DimensionMismatch {
            context: "ensemble charge family",
            expected: dims.0 * dims.1,
            got: family.total_dim(),
        });
    }
    Ok(dims)
}

struct HaarPureSampler {
    dims: Vec<usize>,
    total: usize,
}

impl Sampler for HaarPureSampler {
    fn kind(&self) -> &'static str {
        "haar_pure"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        let psi = haar_pure(self.total, rng)
            .with_dims(&self.dims)
            .expect("dims factor the total dimension");
        DensityMatrix::from_pure(&psi)
    }
}

fn build_haar_pure(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let dims = spec.bipartition()?;
    Ok(Box::new(HaarPureSampler {
        dims: spec.dims.clone(),
        total: dims.0 * dims.1,
    }))
}

struct InducedMixedSampler {
    dims: Vec<usize>,
    bipartition: (usize, usize),
    ancilla: usize,
}

impl Sampler for InducedMixedSampler {
    fn kind(&self) -> &'static str {
        "induced_mixed"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        induced_mixed_bipartite(self.bipartition, self.ancilla, rng)
            .with_dims(&self.dims)
            .expect("dims factor the sampled dimension")
    }
}

fn build_induced_mixed(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let bipartition = spec.bipartition()?;
    let ancilla = spec
        .params
        .ancilla
        .unwrap_or(bipartition.0 * bipartition.1);
    if ancilla == 0 {
        return Err(Error::InvalidConfig("ancilla dimension must be >= 1".into()));
    }
    Ok(Box::new(InducedMixedSampler {
        dims: spec.dims.clone(),
        bipartition,
        ancilla,
    }))
}

struct SeparableSampler {
    dims: Vec<usize>,
    bipartition: (usize, usize),
    terms: usize,
}

impl Sampler for SeparableSampler {
    fn kind(&self) -> &'static str {
        "separable"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        random_separable(self.bipartition, self.terms, rng)
            .with_dims(&self.dims)
            .expect("dims factor the sampled dimension")
    }
}

fn build_separable(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let bipartition = spec.bipartition()?;
    let terms = spec
        .params
        .mixture_terms
        .unwrap_or_else(|| default_mixture_terms(bipartition));
    Ok(Box::new(SeparableSampler {
        dims: spec.dims.clone(),
        bipartition,
        terms,
    }))
}

struct SymsepSampler {
    dims: Vec<usize>,
    bipartition: (usize, usize),
    family: ChargeFamily,
    terms: usize,
}

impl Sampler for SymsepSampler {
    fn kind(&self) -> &'static str {
        "symsep"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        random_symsep(self.bipartition, &self.family, self.terms, rng)
            .expect("family validated at build time")
            .with_dims(&self.dims)
            .expect("dims factor the sampled dimension")
    }
}

fn build_symsep(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let family = require_charge(spec)?;
    let bipartition = check_family_dims(spec, &family)?;
    // Localize up front so each sample pays no family rebuild.
    let family = family.localized()?;
    let terms = spec
        .params
        .mixture_terms
        .unwrap_or_else(|| default_mixture_terms(bipartition));
    Ok(Box::new(SymsepSampler {
        dims: spec.dims.clone(),
        bipartition,
        family,
        terms,
    }))
}

struct SepSymMeasuredSampler {
    dims: Vec<usize>,
    bipartition: (usize, usize),
    family: ChargeFamily,
    terms: usize,
}

impl Sampler for SepSymMeasuredSampler {
    fn kind(&self) -> &'static str {
        "sep_sym_measured"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        random_sep_sym(self.bipartition, &self.family, self.terms, rng)
            .expect("family validated at build time")
            .with_dims(&self.dims)
            .expect("dims factor the sampled dimension")
    }
}

fn build_sep_sym_measured(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let family = require_charge(spec)?;
    let bipartition = check_family_dims(spec, &family)?;
    let terms = spec
        .params
        .mixture_terms
        .unwrap_or_else(|| default_mixture_terms(bipartition));
    Ok(Box::new(SepSymMeasuredSampler {
        dims: spec.dims.clone(),
        bipartition,
        family,
        terms,
    }))
}

struct SectorHullSampler {
    dims: Vec<usize>,
    bipartition: (usize, usize),
    family: ChargeFamily,
    per_sector: usize,
}

impl Sampler for SectorHullSampler {
    fn kind(&self) -> &'static str {
        "sector_hull"
    }
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn sample(&self, rng: &mut RngStream) -> DensityMatrix {
        random_sector_hull(self.bipartition, &self.family, self.per_sector, rng)
            .expect("family validated at build time")
            .with_dims(&self.dims)
            .expect("dims factor the sampled dimension")
    }
}

fn build_sector_hull(spec: &EnsembleSpec) -> Result<Box<dyn Sampler>> {
    let family = require_charge(spec)?;
    let bipartition = check_family_dims(spec, &family)?;
    // Fails early on non-diagonal local charges or custom families.
    sector_rectangles(&family)?;
    let per_sector = spec
        .params
        .per_sector_terms
        .unwrap_or(bipartition.0 * bipartition.1);
    Ok(Box::new(SectorHullSampler {
        dims: spec.dims.clone(),
        bipartition,
        family,
        per_sector,
    }))
}
