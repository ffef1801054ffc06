// offline robustness sweep across fresh seeds, stricter than the
// acceptance criteria require
use qaddlab::channels::random_channel;
use qaddlab::dual::{dual_feasibility_check, solve_dual, DualOptions};
use qaddlab::msw::{dilate_state, msw_identity_check};
use qaddlab::qmat::entropy::entropy_of_matrix;
use qaddlab::qmat::random::{derive_seed, random_density};
use qaddlab::qmat::state::DensityMatrix;
use qaddlab::quantities::*;

fn main() {
    // EoF vs closed form, 100 fresh states
    let mut worst_gap: f64 = 0.0;
    let mut worst_below: f64 = 0.0;
    for case in 0..100u64 {
        let rho = random_density(&[2, 2], 1 + (case % 4) as usize, derive_seed(7777, case)).unwrap();
        let closed = wootters_eof(&rho).unwrap();
        let est = entanglement_of_formation(
            &rho,
            &OptimizerOptions::default().with_seed(derive_seed(8888, case)),
        )
        .unwrap();
        worst_gap = worst_gap.max((est.value - closed).abs());
        worst_below = worst_below.max(closed - est.value);
    }
    println!("eof sweep (100): worst gap {worst_gap:.3e}, worst below {worst_below:.3e}");

    // identity residuals, 20 fresh pairs
    let mut worst_residual: f64 = 0.0;
    for case in 0..20u64 {
        let n = random_channel(2, 2, 2, derive_seed(9100, case)).unwrap();
        let rho = random_density(&[2], 2, derive_seed(9200, case)).unwrap();
        let pair = dilate_state(&n, &rho).unwrap();
        let report = msw_identity_check(
            &pair,
            &OptimizerOptions::default().with_seed(derive_seed(9300, case)),
        )
        .unwrap();
        worst_residual = worst_residual.max(report.residual);
    }
    println!("msw sweep (20): worst residual {worst_residual:.3e}");

    // weak duality, 10 fresh channels
    let mut worst_margin: f64 = f64::INFINITY;
    let mut worst_slack: f64 = f64::INFINITY;
    for case in 0..10u64 {
        let n = random_channel(2, 2, 2, derive_seed(9400, case)).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let opts = DualOptions {
            seed: derive_seed(9500, case),
            optimizer: OptimizerOptions::default().with_seed(derive_seed(9600, case)),
            ..Default::default()
        };
        let sol = solve_dual(&n, &rho, &[], &opts).unwrap();
        let feas =
            dual_feasibility_check(&n, &sol.functional(), 10_000, derive_seed(9700, case), &[])
                .unwrap();
        let h = entropy_of_matrix(&n.apply_matrix(&rho.matrix).hermitize()).unwrap();
        let chi = holevo_capacity(
            &n,
            Some(&rho),
            &OptimizerOptions::default().with_seed(derive_seed(9800, case)),
        )
        .unwrap();
        worst_margin = worst_margin.min((h - sol.value) - chi.value);
        worst_slack = worst_slack.min(feas.min_slack);
    }
    println!("dual sweep (10): worst weak-duality margin {worst_margin:+.3e}, worst sampled slack {worst_slack:+.3e}");
}
