use sparse_lowrank::manifold::{
    altmin_solve, masked_svd_init, project_tangent, rcg_solve, retract, riemannian_gradient, rtr_solve, AmbientMatrix,
    FixedRankPoint, MaskedLeastSquares, SmoothCost, SolverOptions,
};
use sparse_lowrank::rng::{gaussian_matrix, seeded};

fn completion_problem(seed: u64) -> (MaskedLeastSquares, DMatrixF) {
    let mut rng = seeded(seed);
    let truth = gaussian_matrix(&mut rng, 15, 2) * gaussian_matrix(&mut rng, 2, 12);
    let entries = (0..15)
        .flat_map(|i| (0..12).map(move |j| (i, j)))
        .filter(|(i, j)| (i * 7 + j * 3) % 5 < 3)
        .map(|(i, j)| (i, j, truth[(i, j)]))
        .collect();
    (MaskedLeastSquares::new(15, 12, entries).unwrap(), truth)
}

type DMatrixF = nalgebra::DMatrix<f64>;

#[test]
fn all_solvers_complete_a_low_rank_matrix() {
    let (cost, truth) = completion_problem(4);
    let x0 = masked_svd_init(&cost, 2, 0.0, 0).unwrap();
    let opts = SolverOptions { max_iters: 20_000, grad_tol: 1e-10, ..Default::default() };
    for trace in [
        rcg_solve(&cost, &x0, &opts).unwrap(),
        rtr_solve(&cost, &x0, &opts).unwrap(),
        altmin_solve(&cost, 2, &x0, &opts).unwrap(),
    ] {
        assert!(trace.is_monotone(), "{}", trace.solver);
        let err = (trace.final_point.to_dense() - &truth).norm() / truth.norm();
        assert!(err < 1e-6, "{}: {err}", trace.solver);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let (cost, _) = completion_problem(9);
    let mut rng = seeded(1);
    let x = FixedRankPoint::from_dense(&(gaussian_matrix(&mut rng, 15, 3) * gaussian_matrix(&mut rng, 3, 12)), 3).unwrap();
    let grad = riemannian_gradient(&cost, &x).unwrap();
    for _ in 0..5 {
        let xi = project_tangent(&x, &AmbientMatrix::Dense(gaussian_matrix(&mut rng, 15, 12))).unwrap();
        let h = 1e-6;
        let fd = (cost.value(&retract(&x, &xi, h).unwrap()) - cost.value(&retract(&x, &xi, -h).unwrap())) / (2.0 * h);
        let exact = grad.inner(&xi);
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}
