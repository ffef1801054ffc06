//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Tolerances are pinned in the asserts.

use std::time::Instant;

use num_complex::Complex64;

use qaddlab::channels::{
    apply_to_pure, depolarizing_channel, random_channel, stinespring, validate_channel,
};
use qaddlab::constructions::{
    entropy_tilt_channel, generalized_paulis, pauli_extension_channel, povm_from_functional,
    register_flag_channel, uniform_register_ensemble,
};
use qaddlab::dual::{
    dual_feasibility_check, entropy_output_gradient, octahedral_qubit_states,
    reconstruct_functional, solve_dual, DualOptions, FunctionalSample, LinearFunctional,
};
use qaddlab::harness::{
    qubit_grid_lower_bound, run_experiment, ChannelSource, ExperimentConfig, ExperimentKind,
    StateSource,
};
use qaddlab::msw::{dilate_state, msw_identity_check};
use qaddlab::qmat::entropy::{binary_entropy, entropy_of_matrix, von_neumann_entropy};
use qaddlab::qmat::matrix::ComplexMatrix;
use qaddlab::qmat::random::{
    derive_seed, gaussian_matrix, random_density, random_pure, random_unitary, rng_from,
};
use qaddlab::qmat::state::{tensor_states, DensityMatrix, PureState};
use qaddlab::quantities::{
    ensemble_holevo, entanglement_of_formation, entanglement_of_formation_seeded, holevo_capacity,
    holevo_capacity_seeded, min_output_entropy, min_output_entropy_seeded, product_ensemble,
    wootters_eof, Ensemble, OptimizerOptions, Witness,
};

// -0.75 log2 0.75 - 0.25 log2 0.25, 40-digit scalar arithmetic
const H_34: f64 = 0.811_278_124_459_132_9;

fn h2(x: f64) -> f64 {
    binary_entropy(x).unwrap()
}

fn defaults(seed: u64) -> OptimizerOptions {
    OptimizerOptions::default().with_seed(seed)
}

fn witness_ensemble(est: &qaddlab::quantities::Estimate) -> &Ensemble {
    match &est.witness {
        Witness::Ensemble(e) => e,
        _ => panic!("expected ensemble witness"),
    }
}

#[test]
fn criterion_01_entropy_core() {
    let start = Instant::now();
    let h_mixed = von_neumann_entropy(&DensityMatrix::maximally_mixed(2)).unwrap();
    assert_eq!(h_mixed, 1.0, "H(I/2) must be exactly 1");

    let skew = DensityMatrix::new(ComplexMatrix::diagonal_real(&[0.75, 0.25]), vec![2]).unwrap();
    let h_skew = von_neumann_entropy(&skew).unwrap();
    assert!(
        (h_skew - H_34).abs() <= 1e-12,
        "H(diag(3/4,1/4)) = {h_skew}, expected {H_34}"
    );

    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let dim = 2 + (case % 3) as usize;
        let rho = random_density(&[dim], dim, derive_seed(1, case)).unwrap();
        let u = random_unitary(dim, derive_seed(2, case));
        let rotated = DensityMatrix::new(
            u.matmul(&rho.matrix).matmul(&u.adjoint()).hermitize(),
            vec![dim],
        )
        .unwrap();
        let diff =
            (von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&rotated).unwrap()).abs();
        worst = worst.max(diff);
    }
    assert!(worst <= 1e-9, "unitary invariance violated by {worst}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 1 took {elapsed:.1}s, limit 5s");
    println!(
        "ACCEPTANCE 01 entropy-core: PASS (H(I/2)=1 exact, skew err {:.2e}, invariance {:.2e}, {:.2}s)",
        (h_skew - H_34).abs(),
        worst,
        elapsed
    );
}

#[test]
fn criterion_02_channel_validity() {
    let start = Instant::now();
    let mut rng = rng_from(7);
    let mut worst_tp = 0.0f64;
    let mut worst_cp = 0.0f64;
    let mut worst_roundtrip = 0.0f64;
    for case in 0..100u64 {
        use rand::Rng;
        let d_in = 2 + (rng.gen::<u64>() % 3) as usize;
        let d_out = 2 + (rng.gen::<u64>() % 3) as usize;
        let d_env = 1 + (rng.gen::<u64>() % 4) as usize;
        let d_env = d_env.max(d_in.div_ceil(d_out));
        let n = random_channel(d_in, d_out, d_env, derive_seed(8, case)).unwrap();
        let report = validate_channel(&n);
        assert!(report.pass, "case {case}: {report:?}");
        worst_tp = worst_tp.max(report.tp_residual);
        worst_cp = worst_cp.max((-report.choi_min_eigenvalue).max(0.0));
        let iso = stinespring(&n).unwrap();
        let rho = random_density(&[d_in], d_in, derive_seed(9, case)).unwrap();
        let err = iso
            .reduce(&rho)
            .unwrap()
            .matrix
            .sub(&n.apply_matrix(&rho.matrix))
            .frobenius_norm();
        worst_roundtrip = worst_roundtrip.max(err);
    }
    assert!(worst_tp <= 1e-9, "worst TP residual {worst_tp}");
    assert!(worst_cp <= 1e-10, "worst CP defect {worst_cp}");
    assert!(
        worst_roundtrip <= 1e-10,
        "worst roundtrip {worst_roundtrip}"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 2 took {elapsed:.1}s, limit 30s");
    println!(
        "ACCEPTANCE 02 channel-validity: PASS (tp {:.2e}, cp {:.2e}, stinespring {:.2e}, {:.2}s)",
        worst_tp, worst_cp, worst_roundtrip, elapsed
    );
}

#[test]
fn criterion_03_closed_form_capacity() {
    let start = Instant::now();
    let mut worst_min = 0.0f64;
    let mut worst_chi = 0.0f64;
    for (i, p) in (1..=9).map(|k| k as f64 / 10.0).enumerate() {
        let n = depolarizing_channel(p).unwrap();
        let closed = h2(p / 2.0);

        let grid = qubit_grid_lower_bound(&n, 180).unwrap();
        let est = min_output_entropy_seeded(
            &n,
            &defaults(derive_seed(20, i as u64)),
            &[grid.argmin.clone()],
        )
        .unwrap();
        worst_min = worst_min
            .max((est.value - closed).abs())
            .max((grid.grid_min - closed).abs());

        let chi = holevo_capacity(&n, None, &defaults(derive_seed(21, i as u64))).unwrap();
        worst_chi = worst_chi.max((chi.value - (1.0 - closed)).abs());
    }
    assert!(worst_min <= 1e-6, "min output entropy off by {worst_min}");
    assert!(worst_chi <= 1e-4, "capacity off by {worst_chi}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 120.0,
        "criterion 3 took {elapsed:.1}s, limit 2min"
    );
    println!(
        "ACCEPTANCE 03 closed-form-capacity: PASS (minent err {:.2e}, chi err {:.2e}, {:.2}s)",
        worst_min, worst_chi, elapsed
    );
}

#[test]
fn criterion_04_wootters_oracle() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_below = 0.0f64;
    for case in 0..50u64 {
        let rank = 1 + (case % 4) as usize;
        let rho = random_density(&[2, 2], rank, derive_seed(30, case)).unwrap();
        let closed = wootters_eof(&rho).unwrap();
        let est = entanglement_of_formation(&rho, &defaults(derive_seed(31, case))).unwrap();
        worst_gap = worst_gap.max((est.value - closed).abs());
        worst_below = worst_below.max(closed - est.value);
    }
    assert!(worst_gap <= 1e-3, "eof off closed form by {worst_gap}");
    assert!(
        worst_below <= 1e-6,
        "estimate dipped below the closed form by {worst_below}"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 300.0,
        "criterion 4 took {elapsed:.1}s, limit 5min"
    );
    println!(
        "ACCEPTANCE 04 wootters-oracle: PASS (worst gap {:.2e}, below-by {:.2e}, {:.2}s)",
        worst_gap, worst_below, elapsed
    );
}

#[test]
fn criterion_05_msw_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut residuals = Vec::new();
    for case in 0..20u64 {
        let n = random_channel(2, 2, 2, derive_seed(40, case)).unwrap();
        let rho = random_density(&[2], 2, derive_seed(41, case)).unwrap();
        let pair = dilate_state(&n, &rho).unwrap();
        let report = msw_identity_check(&pair, &defaults(derive_seed(42, case))).unwrap();
        residuals.push(report.residual);
        worst = worst.max(report.residual);
    }
    assert!(worst <= 1e-3, "identity residual {worst}");

    // doubling the budgets must not worsen the residual (within noise)
    let mut worst_increase = 0.0f64;
    for case in 0..5u64 {
        let n = random_channel(2, 2, 2, derive_seed(40, case)).unwrap();
        let rho = random_density(&[2], 2, derive_seed(41, case)).unwrap();
        let pair = dilate_state(&n, &rho).unwrap();
        let doubled =
            msw_identity_check(&pair, &defaults(derive_seed(42, case)).doubled()).unwrap();
        worst_increase = worst_increase.max(doubled.residual - residuals[case as usize]);
    }
    assert!(
        worst_increase <= 1e-9,
        "residual grew by {worst_increase} under budget doubling"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 600.0,
        "criterion 5 took {elapsed:.1}s, limit 10min"
    );
    println!(
        "ACCEPTANCE 05 msw-identity: PASS (worst residual {:.2e}, doubling increase {:.2e}, {:.2}s)",
        worst, worst_increase, elapsed
    );
}

#[test]
fn criterion_06_lp_dual() {
    let start = Instant::now();
    // weak duality on random channels and the symmetric case
    let mut worst_weak = f64::NEG_INFINITY;
    let mut worst_slack = 0.0f64;
    for case in 0..4u64 {
        let n = random_channel(2, 2, 2, derive_seed(50, case)).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let dual_opts = DualOptions {
            seed: derive_seed(51, case),
            optimizer: defaults(derive_seed(52, case)),
            ..Default::default()
        };
        let sol = solve_dual(&n, &rho, &[], &dual_opts).unwrap();
        let feas =
            dual_feasibility_check(&n, &sol.functional(), 10_000, derive_seed(53, case), &[])
                .unwrap();
        assert!(
            feas.min_slack >= -1e-7,
            "case {case}: sampled slack {}",
            feas.min_slack
        );
        let h = entropy_of_matrix(&n.apply_matrix(&rho.matrix).hermitize()).unwrap();
        let chi = holevo_capacity(&n, Some(&rho), &defaults(derive_seed(54, case))).unwrap();
        let margin = (h - sol.value) - chi.value;
        worst_weak = worst_weak.max(-margin);
        assert!(
            margin >= -1e-7,
            "case {case}: weak duality violated by {margin}"
        );

        // equality at signal states of the converged witness
        for (p, v) in witness_ensemble(&chi)
            .probs
            .iter()
            .zip(&witness_ensemble(&chi).states)
        {
            if *p < 1e-3 {
                continue;
            }
            let score = entropy_of_matrix(&apply_to_pure(&n, v).unwrap().matrix).unwrap();
            let slack = score - sol.functional().evaluate_pure(v);
            worst_slack = worst_slack.max(slack.abs());
        }
    }
    assert!(
        worst_slack <= 1e-4,
        "signal-state slack {worst_slack} exceeds 1e-4"
    );

    // symmetric depolarizing: certificate is H2(p/2)·I
    let n = depolarizing_channel(0.5).unwrap();
    let mut dual_opts = DualOptions {
        seed: 55,
        optimizer: defaults(56),
        ..Default::default()
    };
    dual_opts.include_witness = false;
    let sol = solve_dual(
        &n,
        &DensityMatrix::maximally_mixed(2),
        &octahedral_qubit_states(),
        &dual_opts,
    )
    .unwrap();
    let target = ComplexMatrix::identity(2).scale_real(h2(0.25));
    let tau_err = sol.tau.sub(&target).frobenius_norm();
    assert!(tau_err <= 1e-6, "depolarizing certificate off by {tau_err}");
    println!(
        "ACCEPTANCE 06 lp-dual: PASS (weak-duality margin ≥ -{:.2e}, signal slack {:.2e}, symmetric tau err {:.2e}, {:.2}s)",
        worst_weak.max(0.0),
        worst_slack,
        tau_err,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_07_gradient_formula() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let d = 2 + (case % 2) as usize;
        let n = random_channel(d, d, 2, derive_seed(60, case)).unwrap();
        let rho = random_density(&[d], d, derive_seed(61, case)).unwrap();
        let g = entropy_output_gradient(&n, &rho).unwrap();
        let direction = {
            let m = gaussian_matrix(d, d, &mut rng_from(derive_seed(62, case))).hermitize();
            let shift = m.trace().re / d as f64;
            m.sub(&ComplexMatrix::identity(d).scale_real(shift))
        };
        let eps = 1e-5;
        let entropy_at = |t: f64| {
            let mut shifted = rho.matrix.clone();
            shifted.add_scaled(&direction, t);
            entropy_of_matrix(&n.apply_matrix(&shifted).hermitize()).unwrap()
        };
        let fd = (entropy_at(eps) - entropy_at(-eps)) / (2.0 * eps);
        let analytic = -direction.trace_product_re(&g);
        let rel = (fd - analytic).abs() / analytic.abs().max(1.0);
        worst = worst.max(rel);
    }
    assert!(worst <= 1e-5, "gradient mismatch {worst}");
    println!(
        "ACCEPTANCE 07 gradient-formula: PASS (worst relative error {:.2e}, {:.2}s)",
        worst,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_08_functional_reconstruction() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in [2usize, 3, 4] {
        let tau = gaussian_matrix(d, d, &mut rng_from(70 + d as u64)).hermitize();
        let f = LinearFunctional::new(tau.clone()).unwrap();
        let data: Vec<FunctionalSample> = (0..(d + 4) as u64)
            .map(|k| {
                FunctionalSample::probe(
                    &f,
                    &random_pure(&[d], derive_seed(71, d as u64 * 100 + k)).unwrap(),
                )
            })
            .collect();
        let rec = reconstruct_functional(&data).unwrap();
        assert!(
            rec.residual <= 1e-10,
            "d={d}: system residual {}",
            rec.residual
        );
        let err = rec.functional.tau.sub(&tau).frobenius_norm();
        worst = worst.max(err);
        assert!(err <= 1e-8, "d={d}: recovery error {err}");
    }
    println!(
        "ACCEPTANCE 08 functional-reconstruction: PASS (worst recovery {:.2e}, {:.2}s)",
        worst,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_09_gadget_formulas() {
    let start = Instant::now();
    let n = random_channel(2, 2, 2, 80).unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let dual_opts = DualOptions {
        seed: 81,
        optimizer: defaults(82),
        ..Default::default()
    };
    let sol = solve_dual(&n, &rho0, &[], &dual_opts).unwrap();
    let params = povm_from_functional(&sol.functional(), 0.5, 1).unwrap();

    // POVM element spectrum within [0,1]
    let (lo, hi) = params.povm_spectrum_range().unwrap();
    assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12, "spectrum [{lo}, {hi}]");

    // delta ∈ [0,1] over 100 random ensembles
    let (_, flag_predictor) = register_flag_channel(&n, &params).unwrap();
    let mut delta_min = f64::INFINITY;
    let mut delta_max = f64::NEG_INFINITY;
    let mut rng = rng_from(83);
    for case in 0..100u64 {
        use rand::Rng;
        let members = 2 + (rng.gen::<u64>() % 3) as usize;
        let mut probs: Vec<f64> = (0..members).map(|_| rng.gen::<f64>() + 0.01).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let states = (0..members)
            .map(|i| random_pure(&[2], derive_seed(84, case * 8 + i as u64)).unwrap())
            .collect();
        let ens = Ensemble::new(probs, states).unwrap();
        let pred = flag_predictor.predict(&n, &ens).unwrap();
        delta_min = delta_min.min(pred.delta);
        delta_max = delta_max.max(pred.delta);
    }
    assert!(
        delta_min >= -1e-10 && delta_max <= 1.0 + 1e-10,
        "delta range [{delta_min}, {delta_max}]"
    );

    // flagged entropy formula vs materialized outputs
    let (tilted, tilt_predictor) = entropy_tilt_channel(&n, &params).unwrap();
    let mut worst_formula = 0.0f64;
    for case in 0..50u64 {
        let v = random_pure(&[2], derive_seed(85, case)).unwrap();
        let h_mat = entropy_of_matrix(&tilted.apply_pure(&v.amplitudes).hermitize()).unwrap();
        let h_formula = tilt_predictor
            .output_entropy(&n, &DensityMatrix::from_pure(&v))
            .unwrap();
        worst_formula = worst_formula.max((h_mat - h_formula).abs());
    }
    assert!(
        worst_formula <= 1e-8,
        "entropy formula off by {worst_formula}"
    );

    // capacity sandwich with optimizer estimates
    let base_chi = holevo_capacity(&n, Some(&rho0), &defaults(86)).unwrap();
    let h_flagged = entropy_of_matrix(&tilted.apply_matrix(&rho0.matrix).hermitize()).unwrap();
    let (lower, upper) = tilt_predictor.capacity_sandwich(h_flagged).unwrap();
    let tilt_chi = holevo_capacity_seeded(
        &tilted,
        Some(&rho0),
        &defaults(87),
        &[witness_ensemble(&base_chi).clone()],
    )
    .unwrap();
    assert!(
        tilt_chi.value >= lower - 1e-3 && tilt_chi.value <= upper + 1e-3,
        "sandwich [{lower}, {upper}] missed by chi {}",
        tilt_chi.value
    );
    println!(
        "ACCEPTANCE 09 gadget-formulas: PASS (delta in [{:.2e}, {:.3}], formula err {:.2e}, sandwich [{:.6}, {:.6}] chi {:.6}, {:.2}s)",
        delta_min,
        delta_max,
        worst_formula,
        lower,
        upper,
        tilt_chi.value,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_10_pauli_twirl() {
    let start = Instant::now();
    let mut worst_twirl = 0.0f64;
    for d in 2..=5usize {
        let paulis = generalized_paulis(d).unwrap();
        for case in 0..5u64 {
            let rho = random_density(&[d], d, derive_seed(90, d as u64 * 10 + case)).unwrap();
            let target = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            worst_twirl = worst_twirl.max(paulis.twirl(&rho.matrix).sub(&target).frobenius_norm());
        }
    }
    assert!(worst_twirl <= 1e-12, "twirl residual {worst_twirl}");

    let mut worst_identity = 0.0f64;
    for case in 0..5u64 {
        let n = random_channel(2, 2, 2, derive_seed(91, case)).unwrap();
        let extended = pauli_extension_channel(&n).unwrap();
        let est = min_output_entropy(&n, &defaults(derive_seed(92, case))).unwrap();
        let Witness::Pure(ref v) = est.witness else {
            panic!("pure witness")
        };
        let ens = uniform_register_ensemble(&n, v).unwrap();
        let value = ensemble_holevo(&extended, &ens).unwrap();
        let expected = (n.d_out as f64).log2() - est.value;
        worst_identity = worst_identity.max((value - expected).abs());
    }
    assert!(
        worst_identity <= 1e-4,
        "register ensemble identity off by {worst_identity}"
    );
    println!(
        "ACCEPTANCE 10 pauli-twirl: PASS (twirl {:.2e}, ensemble identity {:.2e}, {:.2}s)",
        worst_twirl,
        worst_identity,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_11_easy_directions() {
    let start = Instant::now();
    // the structural inequalities only need the product seeding, so modest
    // budgets keep twenty pairs quick
    let quick = |seed: u64| OptimizerOptions {
        restarts: 8,
        max_iters: 500,
        seed,
        ..Default::default()
    };
    let mut worst_chi = f64::NEG_INFINITY;
    let mut worst_eof = f64::NEG_INFINITY;
    for case in 0..20u64 {
        // chi superadditivity
        let n1 = random_channel(2, 2, 2, derive_seed(100, case)).unwrap();
        let n2 = random_channel(2, 2, 2, derive_seed(101, case)).unwrap();
        let nt = qaddlab::channels::tensor_channels(&n1, &n2).unwrap();
        let e1 = holevo_capacity(&n1, None, &quick(derive_seed(102, case))).unwrap();
        let e2 = holevo_capacity(&n2, None, &quick(derive_seed(103, case))).unwrap();
        let mut probs = Vec::new();
        let mut states = Vec::new();
        for (p1, v1) in witness_ensemble(&e1)
            .probs
            .iter()
            .zip(&witness_ensemble(&e1).states)
        {
            for (p2, v2) in witness_ensemble(&e2)
                .probs
                .iter()
                .zip(&witness_ensemble(&e2).states)
            {
                probs.push(p1 * p2);
                states.push(v1.tensor(v2).unwrap().with_factors(vec![4]).unwrap());
            }
        }
        let seed_ens = Ensemble::new(probs, states).unwrap();
        let mut opts_t = quick(derive_seed(104, case));
        opts_t.ensemble_size = Some(seed_ens.states.len().max(16));
        let et = holevo_capacity_seeded(&nt, None, &opts_t, &[seed_ens]).unwrap();
        worst_chi = worst_chi.max(e1.value + e2.value - et.value);

        // eof subadditivity on rank-2 two-qubit states
        let s1 = random_density(&[2, 2], 2, derive_seed(105, case)).unwrap();
        let s2 = random_density(&[2, 2], 2, derive_seed(106, case)).unwrap();
        let f1 = entanglement_of_formation(&s1, &quick(derive_seed(107, case))).unwrap();
        let f2 = entanglement_of_formation(&s2, &quick(derive_seed(108, case))).unwrap();
        let joint = tensor_states(&s1, &s2)
            .unwrap()
            .permute_factors(&[0, 2, 1, 3])
            .unwrap()
            .with_factors(vec![4, 4])
            .unwrap();
        let seed_ens = product_ensemble(witness_ensemble(&f1), witness_ensemble(&f2)).unwrap();
        let mut opts_j = quick(derive_seed(109, case));
        opts_j.ensemble_size = Some(seed_ens.states.len());
        let ft = entanglement_of_formation_seeded(&joint, &opts_j, &[seed_ens]).unwrap();
        worst_eof = worst_eof.max(ft.value - f1.value - f2.value);
    }
    assert!(
        worst_chi <= 1e-6,
        "chi superadditivity violated by {worst_chi}"
    );
    assert!(
        worst_eof <= 1e-6,
        "eof subadditivity violated by {worst_eof}"
    );
    println!(
        "ACCEPTANCE 11 easy-directions: PASS (chi margin {:.2e}, eof margin {:.2e}, {:.2}s)",
        worst_chi,
        worst_eof,
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_12_determinism() {
    let start = Instant::now();
    let configs = vec![
        ExperimentConfig {
            experiment: ExperimentKind::ChiAdditivity,
            channels: vec![
                ChannelSource::Random {
                    d_in: 2,
                    d_out: 2,
                    d_env: 2,
                    seed: 5,
                },
                ChannelSource::Named("depolarizing:p=0.4".into()),
            ],
            states: vec![],
            optimizer: OptimizerOptions {
                restarts: 6,
                max_iters: 300,
                seed: 12,
                ..Default::default()
            },
            dual: None,
            gadget: None,
            grid_resolution: None,
            violation_tol: 1e-6,
            output: None,
        },
        ExperimentConfig {
            experiment: ExperimentKind::MswCheck,
            channels: vec![],
            states: vec![StateSource::Named("werner:p=0.7".into())],
            optimizer: OptimizerOptions {
                restarts: 6,
                max_iters: 300,
                seed: 13,
                ..Default::default()
            },
            dual: None,
            gadget: None,
            grid_resolution: None,
            violation_tol: 1e-6,
            output: None,
        },
    ];
    for config in &configs {
        let a = run_experiment(config).unwrap().canonical_json().unwrap();
        let b = run_experiment(config).unwrap().canonical_json().unwrap();
        assert_eq!(a.as_bytes(), b.as_bytes(), "report payloads differ");
    }
    println!(
        "ACCEPTANCE 12 determinism: PASS (2 experiment kinds byte-identical, {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Orthogonal check backing criterion 9's first assert: the POVM relation
/// residual from the construction itself.
#[test]
fn criterion_09b_povm_relation() {
    let tau = LinearFunctional::new(
        gaussian_matrix(3, 3, &mut rng_from(200))
            .hermitize()
            .scale_real(0.5),
    )
    .unwrap();
    for q in [0.3, 0.5, 0.9] {
        let params = povm_from_functional(&tau, q, 1).unwrap();
        assert!(params.relation_residual() <= 1e-10);
        let (lo, hi) = params.povm_spectrum_range().unwrap();
        assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
    }
    println!("ACCEPTANCE 09b povm-relation: PASS");
}

/// Complex-amplitude edge: EPR through the identity dilation reproduces all
/// three identity terms exactly. Keeps the suite honest on the rank-one path.
#[test]
fn criterion_05b_rank_one_pair() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
    ];
    let sigma = DensityMatrix::from_pure(&PureState::new(amp, vec![2, 2]).unwrap());
    let pair = qaddlab::msw::channel_from_state(&sigma).unwrap();
    let report = msw_identity_check(&pair, &defaults(210)).unwrap();
    assert!(report.constrained_chi.value.abs() < 1e-9);
    assert!((report.eof.value - 1.0).abs() < 1e-9);
    assert!(report.residual < 1e-9);
    println!("ACCEPTANCE 05b rank-one-pair: PASS");
}
