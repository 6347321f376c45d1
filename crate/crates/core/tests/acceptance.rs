//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured margins (visible with `--nocapture`).
//!
//! Every tolerance is pinned here, not configurable.

use nelab_core::ensembles::{
    haar_pure, induced_mixed_bipartite, random_sep_sym, random_symsep, EnsembleSpec, RngStream,
};
use nelab_core::harness::{
    chi_fit, chi_sample, concentration_sweep, histogram_csv, levy_bound_check,
    run_ne_distribution, run_ne_samples, ExperimentConfig,
};
use nelab_core::linalg::{commutator_norm, fidelity, bures_distance, ComplexMatrix};
use nelab_core::states::{
    entanglement_entropy, ppt_min_eigenvalue, BipartiteDims, DensityMatrix, PureState,
};
use nelab_core::symmetry::{
    is_family_symmetric, level_charge, nonselective_measure, sigma_z_total, twirl,
    twirl_quadrature_oracle, ChargeFamily, ChargeOperator, FamilyKind,
};
use nelab_core::witness::{decide_symsep, NeWitness, SymsepStatus};

use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn family_of_kind(kind: FamilyKind, dims: (usize, usize)) -> ChargeFamily {
    let (na, nb) = (level_charge(dims.0), level_charge(dims.1));
    match kind {
        FamilyKind::Sum => ChargeFamily::sum(na, nb, dims),
        FamilyKind::Product => ChargeFamily::product(na, nb, dims),
        FamilyKind::Local => ChargeFamily::local(na, nb, dims),
        FamilyKind::Custom => unreachable!(),
    }
    .expect("level charges build valid families")
}

/// Criterion 1: every sampled symmetrically separable state has NE at most
/// 1e-8 bits, across dimensions 2x2 through 4x4 and all three charge kinds.
#[test]
fn criterion_01_witness_lemma_on_symsep_samples() {
    let dims_list = [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4)];
    let kinds = [FamilyKind::Sum, FamilyKind::Product, FamilyKind::Local];
    let per_cell = 667; // 5 dims x 3 kinds x 667 = 10_005 samples
    let mut max_ne = f64::NEG_INFINITY;
    let mut total = 0usize;
    for (cell, &dims) in dims_list.iter().enumerate() {
        for (kc, &kind) in kinds.iter().enumerate() {
            let family = family_of_kind(kind, dims);
            let witness = NeWitness::from_family(&family).unwrap();
            let m = (dims.0 * dims.1).pow(2);
            for i in 0..per_cell {
                let mut rng = RngStream::new(1000 + cell as u64, (kc * per_cell + i) as u64);
                let rho = random_symsep(dims, &family, m, &mut rng).unwrap();
                let ne = witness.evaluate(&rho).unwrap();
                assert!(
                    ne <= 1e-8,
                    "NE {ne:.3e} above 1e-8 at dims {dims:?} kind {kind:?}"
                );
                assert!(is_family_symmetric(&rho, &family, 1e-8));
                max_ne = max_ne.max(ne);
                total += 1;
            }
        }
    }
    assert!(total >= 10_000);
    println!("ACCEPTANCE 1 witness-lemma: PASS ({total} symsep samples, max NE {max_ne:.2e} bits)");
}

/// Criterion 2: twirl idempotence, fixed-point equivalence, and agreement
/// with the torus-quadrature oracle, all within 1e-8, on 1e3 random
/// densities per dimension setting up to 4x4.
#[test]
fn criterion_02_retraction_laws() {
    let dims_list = [(2usize, 2usize), (2, 3), (3, 3), (4, 4)];
    let mut worst_idem = 0.0f64;
    let mut worst_quad = 0.0f64;
    for (di, &dims) in dims_list.iter().enumerate() {
        for (ki, kind) in [FamilyKind::Sum, FamilyKind::Product].into_iter().enumerate() {
            let family = family_of_kind(kind, dims);
            let diameter = family.member_sectors()[0].spectral_diameter();
            let grid = diameter as usize + 2;
            for i in 0..500usize {
                let mut rng = RngStream::new(2000 + di as u64, (ki * 500 + i) as u64);
                let rho = induced_mixed_bipartite(dims, dims.0 * dims.1, &mut rng);

                let once = twirl(&rho, &family).unwrap();
                let twice = twirl(&once, &family).unwrap();
                let idem = twice.matrix().sub(once.matrix()).frobenius_norm();
                assert!(idem <= 1e-8, "idempotence residual {idem:.3e}");
                worst_idem = worst_idem.max(idem);

                // Fixed points are exactly the symmetric states.
                assert!(is_family_symmetric(&once, &family, 1e-8));
                let moved = once.matrix().sub(rho.matrix()).frobenius_norm();
                let asym = family
                    .members()
                    .iter()
                    .map(|m| commutator_norm(rho.matrix(), m.matrix()).unwrap())
                    .fold(0.0f64, f64::max);
                if asym > 1e-6 {
                    assert!(moved > 1e-8, "asymmetric state left fixed by twirl");
                } else if asym <= 1e-10 {
                    assert!(moved <= 1e-8, "symmetric state moved by twirl");
                }

                let quad = twirl_quadrature_oracle(&rho, &family, grid).unwrap();
                let dev = quad.matrix().sub(once.matrix()).frobenius_norm();
                assert!(dev <= 1e-8, "quadrature oracle disagrees by {dev:.3e}");
                worst_quad = worst_quad.max(dev);
            }
        }
    }
    println!(
        "ACCEPTANCE 2 retraction-laws: PASS (4000 densities, worst idempotence {worst_idem:.2e}, worst oracle gap {worst_quad:.2e})"
    );
}

/// Criterion 3: the worked two-qubit, GHZ, and W-state twirls match their
/// hand-derived golden outputs to 1e-12.
#[test]
fn criterion_03_worked_example_goldens() {
    // (a) a|00> + sqrt(1-a^2)|11> twirls to diag(|a|^2, 0, 0, 1-|a|^2).
    let family = family_of_kind(FamilyKind::Sum, (2, 2));
    for a2 in [0.1, 0.5, 0.9] {
        let psi = PureState::new(
            vec![
                c(f64::sqrt(a2), 0.),
                c(0., 0.),
                c(0., 0.),
                c(f64::sqrt(1.0 - a2), 0.),
            ],
            &[2, 2],
        )
        .unwrap();
        let twirled = twirl(&DensityMatrix::from_pure(&psi), &family).unwrap();
        let golden = ComplexMatrix::diagonal(&[a2, 0.0, 0.0, 1.0 - a2]);
        let dev = twirled.matrix().sub(&golden).frobenius_norm();
        assert!(dev <= 1e-12, "two-qubit golden off by {dev:.3e} at a2={a2}");
        assert_eq!(
            decide_symsep(&twirled, &family).unwrap().status,
            SymsepStatus::Symsep
        );
    }

    // Three-qubit setting: one qubit in A, two in B, occupation charges.
    let n_b = ChargeOperator::diagonal("nB", &[0.0, 1.0, 1.0, 2.0]);
    let ghz_family = ChargeFamily::sum(level_charge(2), n_b.clone(), (2, 4)).unwrap();

    // (b) GHZ twirls to the diagonal mixture of |000> and |111>: the two kets
    // sit in different charge sectors (0 and 3).
    for a2 in [0.25, 0.5] {
        let mut v = vec![c(0., 0.); 8];
        v[0] = c(f64::sqrt(a2), 0.);
        v[7] = c(f64::sqrt(1.0 - a2), 0.);
        let ghz = DensityMatrix::from_pure(&PureState::new(v, &[2, 4]).unwrap());
        let twirled = twirl(&ghz, &ghz_family).unwrap();
        let mut golden = ComplexMatrix::zeros(8, 8);
        golden[(0, 0)] = c(a2, 0.);
        golden[(7, 7)] = c(1.0 - a2, 0.);
        let dev = twirled.matrix().sub(&golden).frobenius_norm();
        assert!(dev <= 1e-12, "GHZ golden off by {dev:.3e}");
        // Symsep by explicit decomposition: both populated kets are product
        // charge eigenkets, so each term commutes with the charge.
        for idx in [0usize, 7] {
            let ket = PureState::basis_ket(8, idx, &[2, 4]).unwrap();
            let term = DensityMatrix::from_pure(&ket);
            let comm = commutator_norm(term.matrix(), ghz_family.members()[0].matrix()).unwrap();
            assert!(comm <= 1e-12);
        }
        // Necessary checks agree, and the decision never refutes it.
        let witness = NeWitness::from_family(&ghz_family).unwrap();
        assert!(witness.evaluate(&twirled).unwrap().abs() <= 1e-12);
        assert!(ppt_min_eigenvalue(&twirled).unwrap() >= -1e-12);
        assert_ne!(
            decide_symsep(&twirled, &ghz_family).unwrap().status,
            SymsepStatus::NotSymsep
        );
    }

    // (c) W states: invariant under the occupation sum charge (all three kets
    // carry charge 1)...
    let (a, b) = (0.6, 0.5);
    let xi = f64::sqrt(1.0 - a * a - b * b);
    let mut v = vec![c(0., 0.); 8];
    v[1] = c(a, 0.); // |0>|01>
    v[2] = c(b, 0.); // |0>|10>
    v[4] = c(xi, 0.); // |1>|00>
    let w = DensityMatrix::from_pure(&PureState::new(v, &[2, 4]).unwrap());
    let unchanged = twirl(&w, &ghz_family).unwrap();
    let inv = unchanged.matrix().sub(w.matrix()).frobenius_norm();
    assert!(inv <= 1e-12, "W state moved by {inv:.3e} under the sum charge");

    // ... and disentangled by the decoupling variant N'_A = diag(0, 3). The
    // golden output is assembled from scratch here: sector 1 keeps the
    // a|001> + b|010> block, sector 3 keeps xi^2 |100><100|.
    let w_family = ChargeFamily::sum(
        ChargeOperator::diagonal("nA'", &[0.0, 3.0]),
        n_b,
        (2, 4),
    )
    .unwrap();
    let mut golden = ComplexMatrix::zeros(8, 8);
    golden[(1, 1)] = c(a * a, 0.);
    golden[(1, 2)] = c(a * b, 0.);
    golden[(2, 1)] = c(a * b, 0.);
    golden[(2, 2)] = c(b * b, 0.);
    golden[(4, 4)] = c(xi * xi, 0.);
    assert!((golden.trace().re - 1.0).abs() <= 1e-12);
    let twirled = twirl(&w, &w_family).unwrap();
    let dev = twirled.matrix().sub(&golden).frobenius_norm();
    assert!(dev <= 1e-12, "W-state golden off by {dev:.3e}");
    // Independent route: the torus quadrature (spectral diameter 5).
    let quad = twirl_quadrature_oracle(&w, &w_family, 8).unwrap();
    let qdev = quad.matrix().sub(&golden).frobenius_norm();
    assert!(qdev <= 1e-8, "quadrature route off by {qdev:.3e}");

    println!("ACCEPTANCE 3 worked-examples: PASS (two-qubit, GHZ, W goldens all within 1e-12)");
}

/// Criterion 4: the pure-state entropy Lipschitz bound and the NE Bures
/// bound are never violated beyond 1e-8 on 1e4 random pairs per setting.
#[test]
fn criterion_04_continuity_bounds() {
    // Pure-state bound needs d_A >= 3.
    let mut worst_hayden = f64::NEG_INFINITY;
    for (si, dims) in [(3usize, 3usize), (3, 4), (4, 4)].into_iter().enumerate() {
        let eta = 8f64.sqrt() * (dims.0 as f64).log2();
        let total = dims.0 * dims.1;
        for i in 0..10_000u64 {
            let mut rng = RngStream::new(4000 + si as u64, i);
            let psi = haar_pure(total, &mut rng).with_dims(&[dims.0, dims.1]).unwrap();
            // Half the pairs are nearby perturbations to probe small distances.
            let phi = if i % 2 == 0 {
                haar_pure(total, &mut rng).with_dims(&[dims.0, dims.1]).unwrap()
            } else {
                let eps = 0.05;
                let noise = haar_pure(total, &mut rng);
                let v: Vec<Complex64> = psi
                    .vec()
                    .iter()
                    .zip(noise.vec())
                    .map(|(p, n)| p + n * eps)
                    .collect();
                PureState::normalized(v, &[dims.0, dims.1]).unwrap()
            };
            let bi = BipartiteDims::new(dims.0, dims.1);
            let ds = (entanglement_entropy(&psi, bi).unwrap()
                - entanglement_entropy(&phi, bi).unwrap())
            .abs();
            let slack = ds - eta * psi.distance(&phi);
            assert!(slack <= 1e-8, "pure-state bound violated by {slack:.3e}");
            worst_hayden = worst_hayden.max(slack);
        }
    }

    // NE is Lipschitz in the Bures distance with eta = 4*sqrt(2)*log2(dA*dB);
    // the minimal-purification Euclidean distance sqrt(2(1-sqrt(F))) is the
    // same number, asserted once below.
    let mut worst_bures = f64::NEG_INFINITY;
    for (si, dims) in [(2usize, 2usize), (2, 3), (3, 3)].into_iter().enumerate() {
        let total = dims.0 * dims.1;
        let eta = 4.0 * 2f64.sqrt() * (total as f64).log2();
        let family = family_of_kind(FamilyKind::Sum, dims);
        let witness = NeWitness::from_family(&family).unwrap();
        for i in 0..10_000u64 {
            let mut rng = RngStream::new(4100 + si as u64, i);
            let rho = induced_mixed_bipartite(dims, total, &mut rng);
            let sigma = if i % 2 == 0 {
                induced_mixed_bipartite(dims, total, &mut rng)
            } else {
                // Nearby mixture.
                let tau = induced_mixed_bipartite(dims, total, &mut rng);
                let eps = 0.02;
                let m = rho.matrix().scale_real(1.0 - eps).add(&tau.matrix().scale_real(eps));
                DensityMatrix::new(m, rho.dims()).unwrap()
            };
            let dne = (witness.evaluate(&sigma).unwrap() - witness.evaluate(&rho).unwrap()).abs();
            let d_bures = bures_distance(&sigma, &rho).unwrap();
            let slack = dne - eta * d_bures;
            assert!(slack <= 1e-8, "NE Bures bound violated by {slack:.3e}");
            worst_bures = worst_bures.max(slack);
        }
    }

    // Purification-norm form of the same bound, asserted once.
    let dims = (2usize, 3usize);
    let mut rng = RngStream::new(4200, 0);
    let rho = induced_mixed_bipartite(dims, 6, &mut rng);
    let sigma = induced_mixed_bipartite(dims, 6, &mut rng);
    let f = fidelity(&rho, &sigma).unwrap();
    let min_purification_distance = (2.0 * (1.0 - f.sqrt())).max(0.0).sqrt();
    let d_bures = bures_distance(&rho, &sigma).unwrap();
    assert!((min_purification_distance - d_bures).abs() <= 1e-12);

    println!(
        "ACCEPTANCE 4 continuity-bounds: PASS (worst pure-state slack {worst_hayden:.2e}, worst NE-Bures slack {worst_bures:.2e})"
    );
}

/// Criterion 5: fidelity never decreases under the nonselective charge
/// measurement (within 1e-9) on 1e4 random pairs.
#[test]
fn criterion_05_fidelity_monotonicity() {
    let mut worst = f64::NEG_INFINITY;
    for (si, dims) in [(2usize, 2usize), (2, 3)].into_iter().enumerate() {
        let total = dims.0 * dims.1;
        let family = family_of_kind(FamilyKind::Sum, dims);
        let sectors = &family.member_sectors()[0];
        for i in 0..5_000u64 {
            let mut rng = RngStream::new(5000 + si as u64, i);
            let rho = induced_mixed_bipartite(dims, total, &mut rng);
            let sigma = induced_mixed_bipartite(dims, total, &mut rng);
            let before = fidelity(&rho, &sigma).unwrap();
            let after = fidelity(
                &nonselective_measure(&rho, sectors).unwrap(),
                &nonselective_measure(&sigma, sectors).unwrap(),
            )
            .unwrap();
            let slack = before - after;
            assert!(slack <= 1e-9, "fidelity dropped by {slack:.3e}");
            worst = worst.max(slack);
        }
    }
    println!("ACCEPTANCE 5 fidelity-monotonicity: PASS (10000 pairs, worst decrease {worst:.2e})");
}

/// Criterion 6: the qudit product-charge sweep concentrates (positive means,
/// strictly decreasing std beyond a 2-SE guard band) and the qubit system
/// beats the qudit system's mean NE at matched total dimension.
#[test]
fn criterion_06_concentration_trend() {
    let start = std::time::Instant::now();
    let configs: Vec<ExperimentConfig> = [3usize, 4, 5, 6]
        .into_iter()
        .map(|d| {
            let family = family_of_kind(FamilyKind::Product, (d, d));
            let spec = EnsembleSpec::new("sep_sym_measured", (d, d)).with_charge(family);
            ExperimentConfig::new(spec, 5_000, 42).with_workers(4)
        })
        .collect();
    let report = concentration_sweep(&configs).unwrap();
    for entry in &report.entries {
        assert!(
            entry.stats.mean > 0.0,
            "mean NE not positive at dims {:?}",
            entry.dims
        );
    }
    assert!(report.std_strictly_decreasing, "std not strictly decreasing");
    assert!(report.std_decreasing_with_guard, "std trend inside noise band");

    // Matched total dimension 16: two qubits per side vs one qudit (d = 4).
    let qudit = {
        let family = family_of_kind(FamilyKind::Product, (4, 4));
        let spec = EnsembleSpec::new("sep_sym_measured", (4, 4)).with_charge(family);
        run_ne_distribution(&ExperimentConfig::new(spec, 4_000, 43).with_workers(4)).unwrap()
    };
    let qubit = {
        let family =
            ChargeFamily::product(sigma_z_total(2), sigma_z_total(2), (4, 4)).unwrap();
        let spec = EnsembleSpec::new("sep_sym_measured", (4, 4)).with_charge(family);
        run_ne_distribution(&ExperimentConfig::new(spec, 4_000, 43).with_workers(4)).unwrap()
    };
    let se = |s: &nelab_core::harness::DistributionStats| s.std / (s.sample_count as f64).sqrt();
    let guard = 2.0 * (se(&qudit) + se(&qubit));
    assert!(
        qubit.mean > qudit.mean + guard,
        "qubit mean {} does not exceed qudit mean {} beyond the guard {guard}",
        qubit.mean,
        qudit.mean
    );

    let stds = report
        .entries
        .iter()
        .map(|e| format!("{:.2e}", e.stats.std))
        .collect::<Vec<_>>()
        .join(" > ");
    println!(
        "ACCEPTANCE 6 concentration-trend: PASS (stds {stds}, qubit mean {:.5} > qudit mean {:.5}, {:.1}s)",
        qubit.mean,
        qudit.mean,
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 7: with a nondegenerate global charge every measured separable
/// state is already diagonal in the unique eigenbasis, so the mean NE
/// vanishes (<= 1e-6 over 1e3 samples).
#[test]
fn criterion_07_nondegenerate_charge_null_test() {
    let n_a = ChargeOperator::diagonal("nA", &[0.0, 1.0]);
    let n_b = ChargeOperator::diagonal("nB", &[0.0, 2.0]);
    let family = ChargeFamily::sum(n_a, n_b, (2, 2)).unwrap();
    assert!(family.member_sectors()[0].is_nondegenerate());
    let witness = NeWitness::from_family(&family).unwrap();
    let mut acc = 0.0;
    let samples = 1_000u64;
    for i in 0..samples {
        let mut rng = RngStream::new(7000, i);
        let rho = random_sep_sym((2, 2), &family, 16, &mut rng).unwrap();
        acc += witness.evaluate(&rho).unwrap();
    }
    let mean = acc / samples as f64;
    assert!(mean.abs() <= 1e-6, "mean NE {mean:.3e} above 1e-6");
    println!("ACCEPTANCE 7 nondegenerate-null: PASS (mean NE {mean:.2e} bits over {samples} samples)");
}

/// Criterion 8: chi-order recovery within 5% at n = 1e5 for
/// k in {1, 2, 3.5, 6}, with the fitted pdf normalized to 1e-6.
#[test]
fn criterion_08_chi_fit_recovery() {
    let cases = [(1.0, 1.0), (2.0, 0.5), (3.5, 2.0), (6.0, 1.3)];
    let mut worst_rel = 0.0f64;
    for (ci, (k, scale)) in cases.into_iter().enumerate() {
        let mut rng = RngStream::new(8000 + ci as u64, 0);
        let samples: Vec<f64> = (0..100_000).map(|_| chi_sample(k, scale, &mut rng)).collect();
        let fit = chi_fit(&samples).unwrap();
        let rel = (fit.k - k).abs() / k;
        assert!(rel <= 0.05, "k = {k}: recovered {:.4} ({rel:.3} rel)", fit.k);
        let norm_err = fit.pdf_normalization_error();
        assert!(norm_err <= 1e-6, "pdf normalization off by {norm_err:.3e}");
        worst_rel = worst_rel.max(rel);
    }
    println!("ACCEPTANCE 8 chi-fit-recovery: PASS (worst relative k error {worst_rel:.4})");
}

/// Criterion 9: for the d = 3 qudit run, the empirical tails sit below the
/// Levy bound with the maximal purification dimension D = 2 dA² dB² at every
/// grid point.
#[test]
fn criterion_09_levy_bound_diagnostic() {
    let d = 3usize;
    let family = family_of_kind(FamilyKind::Product, (d, d));
    let spec = EnsembleSpec::new("sep_sym_measured", (d, d)).with_charge(family);
    let cfg = ExperimentConfig::new(spec, 5_000, 42).with_workers(4);
    let stats = run_ne_distribution(&cfg).unwrap();

    let d_max = 2 * (d * d).pow(2) as u64; // 2 dA^2 dB^2 = 162
    let reach = (stats.max - stats.mean).max(stats.mean - stats.min) * 1.1;
    let alpha_grid: Vec<f64> = (0..=20).map(|i| reach * i as f64 / 20.0).collect();
    let report = levy_bound_check(&stats, d_max, &alpha_grid);
    for entry in &report.entries {
        assert!(
            entry.satisfied,
            "bound violated at alpha {}: tail {} > bound {}",
            entry.alpha, entry.empirical_tail, entry.bound
        );
    }
    println!(
        "ACCEPTANCE 9 levy-diagnostic: PASS (D = {d_max}, bound loose up to D = {})",
        report.max_unviolated_dim
    );
}

/// Criterion 10: identical seeds give byte-identical histogram CSVs for
/// 1, 4, and 8 workers.
#[test]
fn criterion_10_worker_determinism() {
    let family = family_of_kind(FamilyKind::Product, (2, 2));
    let spec = EnsembleSpec::new("sep_sym_measured", (2, 2)).with_charge(family);
    let base = ExperimentConfig::new(spec, 300, 9);

    let runs: Vec<String> = [1usize, 4, 8]
        .into_iter()
        .map(|w| {
            let stats = run_ne_distribution(&base.clone().with_workers(w)).unwrap();
            histogram_csv(&stats.histogram)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);

    // The raw sample streams agree bitwise too.
    let v1 = run_ne_samples(&base.clone().with_workers(1)).unwrap();
    let v8 = run_ne_samples(&base.with_workers(8)).unwrap();
    let bits1: Vec<u64> = v1.iter().map(|x| x.to_bits()).collect();
    let bits8: Vec<u64> = v8.iter().map(|x| x.to_bits()).collect();
    assert_eq!(bits1, bits8);

    println!("ACCEPTANCE 10 determinism: PASS (histogram CSVs identical at workers 1/4/8)");
}
