use ofwpep_core::linalg::{svec, Matrix};
use ofwpep_core::model::{preset_tabulated, ProblemSetting};
use ofwpep_core::pep::build_dual;
use ofwpep_core::sdp::{
    certify, solve_with, ConeProblem, ConeRow, Sense, SolveStatus, SolverOptions,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const N: usize = 5;

/// Cyclic Jacobi eigenvalues, kept separate from the library's routine.
fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut a = m.to_rows();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn random_sym(rng: &mut StdRng, n: usize) -> Matrix {
    let mut m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.symmetrize();
    m
}

fn random_pd(rng: &mut StdRng, n: usize) -> Matrix {
    let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut m = b.matmul(&b.transpose());
    m.add_scaled(0.5, &Matrix::identity(n));
    m
}

fn dense_row(m: &Matrix) -> ConeRow {
    ConeRow {
        psd: svec(m)
            .into_iter()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .collect(),
        lp: vec![],
    }
}

/// Feasible and dual-feasible by construction: `b = A(X0)` with `X0 ≻ 0` and
/// `C = S0 + Σ y0_i A_i` with `S0 ≻ 0`.
struct Planted {
    problem: ConeProblem,
    x0: Matrix,
    y0: Vec<f64>,
}

fn planted(seed: u64, m: usize) -> Planted {
    let mut rng = StdRng::seed_from_u64(seed);
    let x0 = random_pd(&mut rng, N);
    let s0 = random_pd(&mut rng, N);
    let y0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut c = s0.clone();
    let mut problem = ConeProblem::new(N, 0);
    for &y in &y0 {
        let a = random_sym(&mut rng, N);
        c.add_scaled(y, &a);
        problem.push(dense_row(&a), Sense::Eq, a.inner(&x0));
    }
    problem.c_psd = svec(&c);
    Planted { problem, x0, y0 }
}

fn objective(p: &ConeProblem, x: &Matrix) -> f64 {
    p.c_psd.iter().zip(svec(x)).map(|(c, v)| c * v).sum()
}

#[test]
fn trace_constrained_minimum_is_smallest_eigenvalue() {
    for seed in 0..5 {
        let mut rng = StdRng::seed_from_u64(100 + seed);
        let c = random_sym(&mut rng, N);
        let mut p = ConeProblem::new(N, 0);
        p.c_psd = svec(&c);
        p.push(dense_row(&Matrix::identity(N)), Sense::Eq, 1.0);
        let sol = solve_with(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let want = jacobi_eigenvalues(&c)[0];
        assert!(
            (sol.primal_objective - want).abs() <= 1e-6,
            "{} vs {want}",
            sol.primal_objective
        );
        assert!(certify(&p, &sol, 1e-6).passed());
    }
}

#[test]
fn planted_problems_solve_between_their_witnesses() {
    for seed in 0..8 {
        let pl = planted(seed, 6);
        let sol = solve_with(&pl.problem, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
        let upper = objective(&pl.problem, &pl.x0);
        let lower: f64 = pl.problem.rhs.iter().zip(&pl.y0).map(|(b, y)| b * y).sum();
        assert!(sol.primal_objective <= upper + 1e-7);
        assert!(sol.dual_objective >= lower - 1e-7);
        assert!(
            (sol.primal_objective - sol.dual_objective).abs()
                <= 1e-6 * (1.0 + sol.primal_objective.abs())
        );
        let cert = certify(&pl.problem, &sol, 1e-6);
        assert!(cert.passed(), "{:?}", cert.checks);
        assert!(jacobi_eigenvalues(&sol.x)[0] >= -1e-8);
        assert!(jacobi_eigenvalues(&sol.s)[0] >= -1e-8);
    }
}

#[test]
fn inequality_rows_carry_nonpositive_multipliers() {
    let mut p = ConeProblem::new(2, 0);
    let c = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -2.0]]).unwrap();
    p.c_psd = svec(&c);
    p.push(dense_row(&Matrix::identity(2)), Sense::Le, 3.0);
    let sol = solve_with(&p, &SolverOptions::default()).unwrap();
    assert!((sol.primal_objective + 6.0).abs() <= 1e-6);
    assert!(sol.y[0] <= 1e-9);
    assert!(certify(&p, &sol, 1e-6).passed());
}

#[test]
fn linear_block_picks_cheapest_coordinate() {
    let mut p = ConeProblem::new(0, 4);
    p.c_lp = vec![3.0, -1.0, 2.0, 0.5];
    p.push(
        ConeRow {
            psd: vec![],
            lp: (0..4).map(|k| (k, 1.0)).collect(),
        },
        Sense::Eq,
        1.0,
    );
    let sol = solve_with(&p, &SolverOptions::default()).unwrap();
    assert!((sol.primal_objective + 1.0).abs() <= 1e-6);
    assert!((sol.x_lp[1] - 1.0).abs() <= 1e-5);
}

#[test]
fn scaling_data_scales_the_optimum() {
    let pl = planted(42, 5);
    let base = solve_with(&pl.problem, &SolverOptions::default())
        .unwrap()
        .primal_objective;
    let mut c10 = pl.problem.clone();
    c10.scale_objective(10.0);
    let v = solve_with(&c10, &SolverOptions::default())
        .unwrap()
        .primal_objective;
    assert!((v - 10.0 * base).abs() <= 1e-6 * (1.0 + 10.0 * base.abs()));
    let mut b10 = pl.problem.clone();
    b10.scale_rhs(10.0);
    let v = solve_with(&b10, &SolverOptions::default())
        .unwrap()
        .primal_objective;
    assert!((v - 10.0 * base).abs() <= 1e-6 * (1.0 + 10.0 * base.abs()));
}

#[test]
fn certificate_rejects_perturbed_primal() {
    let pl = planted(7, 6);
    let mut sol = solve_with(&pl.problem, &SolverOptions::default()).unwrap();
    assert!(certify(&pl.problem, &sol, 1e-6).passed());
    sol.x[(0, 1)] += 0.1;
    sol.x[(1, 0)] += 0.1;
    let cert = certify(&pl.problem, &sol, 1e-6);
    assert!(!cert.passed());
    assert!(!cert.check("primal_residual").unwrap().passed || !cert.check("gap").unwrap().passed);
}

#[test]
fn solves_are_bit_reproducible() {
    let pl = planted(3, 6);
    let a = solve_with(&pl.problem, &SolverOptions::default()).unwrap();
    let b = solve_with(&pl.problem, &SolverOptions::default()).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.primal_objective.to_bits(), b.primal_objective.to_bits());
    assert_eq!(a.x.as_slice(), b.x.as_slice());
    assert_eq!(a.y, b.y);
}

#[test]
fn structural_errors_are_reported() {
    let mut p = ConeProblem::new(2, 0);
    p.push(
        ConeRow {
            psd: vec![(9, 1.0)],
            lp: vec![],
        },
        Sense::Eq,
        1.0,
    );
    assert!(p.check().is_err());
    assert!(solve_with(&p, &SolverOptions::default()).is_err());
}

#[test]
fn lagrange_dual_of_two_step_program() {
    let setting = ProblemSetting::unit(2).unwrap();
    let s = preset_tabulated(2, 1.0, 1.0).unwrap();
    let sol = build_dual(&s, &setting)
        .unwrap()
        .lmi
        .solve(&SolverOptions::default())
        .unwrap();
    assert!(sol.lmi_min_eigenvalue >= -1e-7);
    assert!(sol
        .w
        .iter()
        .zip(&build_dual(&s, &setting).unwrap().lmi.vars)
        .all(|(w, v)| !v.nonneg || *w >= -1e-8));
    assert!(sol.value >= 1.7321 - 5e-3);
}
