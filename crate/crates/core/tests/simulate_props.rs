use ofwpep_core::bounds::{ofw_params, potential_phi, potential_psi};
use ofwpep_core::model::{
    preset_anytime, preset_hazan, preset_ofw_new, AnytimeBase, HazanVariant, ParamSchedule,
};
use ofwpep_core::simulate::{
    regret, run_ftrl, run_general, run_ofw_fixed, Domain, GradientSequence,
};
use proptest::prelude::*;

const DIM: usize = 3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vector(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, DIM)
}

fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (vector(-2.0, 2.0), 0.1..3.0f64).prop_map(|(c, r)| Domain::ball(c, r).unwrap()),
        (vector(-2.0, 2.0), vector(0.05, 2.0)).prop_map(|(l, w)| {
            let u = l.iter().zip(&w).map(|(a, b)| a + b).collect();
            Domain::Box { lower: l, upper: u }
        }),
        Just(Domain::Simplex { dim: DIM }),
        prop::collection::vec(vector(-2.0, 2.0), 2..6).prop_map(|v| Domain::hull(v).unwrap()),
    ]
}

/// A point of the domain parametrised by `w ∈ [0,1]^k`.
fn point_in(domain: &Domain, w: &[f64]) -> Vec<f64> {
    match domain {
        Domain::Ball { center, radius } => {
            let dir: Vec<f64> = w.iter().take(DIM).map(|x| x - 0.5).collect();
            let n = norm(&dir);
            let scale = if n > 0.0 { radius * w[DIM] / n } else { 0.0 };
            center
                .iter()
                .zip(&dir)
                .map(|(c, d)| c + scale * d)
                .collect()
        }
        Domain::Box { lower, upper } => (0..DIM)
            .map(|i| lower[i] + w[i] * (upper[i] - lower[i]))
            .collect(),
        Domain::Simplex { dim } => {
            let s: f64 = w[..*dim].iter().map(|x| x + 1e-3).sum();
            w[..*dim].iter().map(|x| (x + 1e-3) / s).collect()
        }
        Domain::Hull { vertices } => {
            let k = vertices.len();
            let s: f64 = w[..k].iter().map(|x| x + 1e-3).sum();
            let mut p = vec![0.0; DIM];
            for (v, x) in vertices.iter().zip(w) {
                for i in 0..DIM {
                    p[i] += (x + 1e-3) / s * v[i];
                }
            }
            p
        }
    }
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 8)
}

fn gradients(max_len: usize, radius: f64) -> impl Strategy<Value = GradientSequence> {
    prop::collection::vec(vector(-1.0, 1.0), 1..=max_len).prop_map(move |gs| {
        GradientSequence(
            gs.into_iter()
                .map(|g| {
                    let n = norm(&g).max(1.0);
                    g.iter().map(|x| radius * x / n).collect()
                })
                .collect(),
        )
    })
}

fn hull_safe_preset(which: usize, t: usize) -> ParamSchedule {
    match which % 4 {
        0 => preset_ofw_new(t, 1.0, 1.0).unwrap(),
        1 => preset_hazan(t, 1.0, 1.0, HazanVariant::Alg27).unwrap(),
        2 => preset_hazan(t, 1.0, 1.0, HazanVariant::Thm44).unwrap(),
        _ => preset_anytime(AnytimeBase::OfwNew, t, 1.0, 1.0).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lmo_beats_every_point(k in domain(), dir in vector(-3.0, 3.0), ws in prop::collection::vec(weights(), 10)) {
        let v = k.lmo(&dir).unwrap();
        for w in &ws {
            let u = point_in(&k, w);
            prop_assert!(dot(&dir, &sub(&v, &u)) <= 1e-9);
        }
    }

    #[test]
    fn iterates_stay_in_the_hull(
        verts in prop::collection::vec(vector(-2.0, 2.0), 2..6),
        w in weights(),
        which in 0usize..4,
        grads in gradients(8, 1.0),
    ) {
        let k = Domain::hull(verts).unwrap();
        let x1 = point_in(&k, &w);
        let s = hull_safe_preset(which, grads.len().max(2));
        let grads = if grads.len() < 2 { GradientSequence(vec![grads.0[0].clone(); 2]) } else { grads };
        let tr = run_general(&s, &k, &x1, &grads).unwrap();
        for x in &tr.x {
            prop_assert!(k.membership_residual(x).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn hull_distance_is_bracketed(
        verts in prop::collection::vec(vector(-2.0, 2.0), 1..6),
        w in weights(),
        u in vector(-1.0, 1.0),
        delta in 0.0..3.0f64,
    ) {
        let k = Domain::hull(verts).unwrap();
        let y = point_in(&k, &w);
        prop_assert!(k.membership_residual(&y).unwrap() <= 1e-9);
        let n = norm(&u);
        prop_assume!(n > 1e-3);
        let x: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + delta * b / n).collect();
        let r = k.membership_residual(&x).unwrap();
        // Any unit direction separates `x` from the hull by at most the distance.
        let dir: Vec<f64> = u.iter().map(|b| -b / n).collect();
        let v = k.lmo(&dir).unwrap();
        let lower = dot(&dir, &v) - dot(&dir, &x);
        prop_assert!(r <= delta + 1e-9);
        prop_assert!(r >= lower - 1e-9);
    }

    #[test]
    fn translation_leaves_directions_alone(
        k in domain(),
        w in weights(),
        c in vector(-5.0, 5.0),
        which in 0usize..4,
        grads in gradients(7, 1.0),
        wstar in weights(),
    ) {
        let t = grads.len().max(2);
        let grads = if grads.len() < 2 { GradientSequence(vec![grads.0[0].clone(); 2]) } else { grads };
        let s = hull_safe_preset(which, t);
        let x1 = point_in(&k, &w);
        let xs = point_in(&k, &wstar);
        let shifted = k.translate(&c);
        let add = |p: &[f64]| -> Vec<f64> { p.iter().zip(&c).map(|(a, b)| a + b).collect() };
        let a = run_general(&s, &k, &x1, &grads).unwrap();
        let b = run_general(&s, &shifted, &add(&x1), &grads).unwrap();
        for (da, db) in a.dirs.iter().zip(&b.dirs) {
            prop_assert!(norm(&sub(da, db)) <= 1e-10);
        }
        for (xa, xb) in a.x.iter().zip(&b.x) {
            prop_assert!(norm(&sub(&add(xa), xb)) <= 1e-9);
        }
        for (va, vb) in a.v.iter().zip(&b.v) {
            prop_assert!(norm(&sub(&add(va), vb)) <= 1e-9);
        }
        prop_assert!((regret(&a, &xs) - regret(&b, &add(&xs))).abs() <= 1e-9);
    }

    #[test]
    fn ftrl_potential_steps(
        center in vector(-1.0, 1.0),
        radius in 0.2..2.0f64,
        w in weights(),
        eta in 0.01..2.0f64,
        grads in gradients(12, 1.5),
    ) {
        let k = Domain::ball(center, radius).unwrap();
        let y1 = point_in(&k, &w);
        let tr = run_ftrl(eta, &k, &y1, &grads).unwrap();
        let mut prev = 0.0;
        for t in 1..=grads.len() {
            let psi = potential_psi(t, &tr, eta).unwrap();
            let g = &grads.0[t - 1];
            prop_assert!(psi - prev <= 0.5 * eta * dot(g, g) + 1e-9, "t = {t}: {} > {}", psi - prev, 0.5 * eta * dot(g, g));
            prev = psi;
        }
    }

    #[test]
    fn lemma_one_steps(
        horizon in 3usize..40,
        diameter in 0.3..3.0f64,
        lipschitz in 0.3..3.0f64,
        w in weights(),
        raw in prop::collection::vec(vector(-1.0, 1.0), 40),
    ) {
        let k = Domain::ball(vec![0.0; DIM], diameter / 2.0).unwrap();
        let x1 = point_in(&k, &w);
        let grads = GradientSequence(raw[..horizon].iter().map(|g| {
            let n = norm(g).max(1.0);
            g.iter().map(|x| lipschitz * x / n).collect()
        }).collect());
        let (eta, sigma) = ofw_params(horizon, lipschitz, diameter);
        let ofw = run_ofw_fixed(eta, sigma, &k, &x1, &grads).unwrap();
        let ftrl = run_ftrl(eta, &k, &x1, &grads).unwrap();
        let c = 3f64.powf(0.75) * (horizon as f64).powf(0.25);
        let cg = 2.0 * diameter / (lipschitz * c);
        let cv = lipschitz / (diameter * c);
        let mut prev = potential_phi(0, &ofw, &ftrl, eta).unwrap();
        prop_assert!(prev.abs() <= 1e-12);
        let mut total = 0.0;
        for t in 1..=horizon {
            let phi = potential_phi(t, &ofw, &ftrl, eta).unwrap();
            let g = &grads.0[t - 1];
            let xv = sub(&ofw.x[t - 1], &ofw.v[t - 1]);
            let budget = cg * dot(g, g) + cv * dot(&xv, &xv);
            prop_assert!(phi - prev <= budget + 1e-8, "t = {t}: {} > {budget}", phi - prev);
            total += phi - prev;
            prev = phi;
        }
        prop_assert!((total - prev).abs() <= 1e-8);
    }

    #[test]
    fn regret_below_final_potential(
        horizon in 3usize..30,
        w in weights(),
        wstar in weights(),
        raw in prop::collection::vec(vector(-1.0, 1.0), 30),
    ) {
        let k = Domain::ball(vec![0.0; DIM], 0.5).unwrap();
        let x1 = point_in(&k, &w);
        let xs = point_in(&k, &wstar);
        let grads = GradientSequence(raw[..horizon].iter().map(|g| {
            let n = norm(g).max(1.0);
            g.iter().map(|x| x / n).collect()
        }).collect());
        let (eta, sigma) = ofw_params(horizon, 1.0, 1.0);
        let ofw = run_ofw_fixed(eta, sigma, &k, &x1, &grads).unwrap();
        let ftrl = run_ftrl(eta, &k, &x1, &grads).unwrap();
        let phi = potential_phi(horizon, &ofw, &ftrl, eta).unwrap();
        let d = sub(&xs, &x1);
        prop_assert!(regret(&ofw, &xs) - dot(&d, &d) / (2.0 * eta) <= phi + 1e-8);
    }

    #[test]
    fn fixed_step_runner_matches_preset(
        horizon in 2usize..25,
        w in weights(),
        raw in prop::collection::vec(vector(-1.0, 1.0), 25),
    ) {
        let k = Domain::ball(vec![0.0; DIM], 0.5).unwrap();
        let x1 = point_in(&k, &w);
        let grads = GradientSequence(raw[..horizon].to_vec());
        let (eta, sigma) = ofw_params(horizon, 1.0, 1.0);
        let a = run_ofw_fixed(eta, sigma, &k, &x1, &grads).unwrap();
        let b = run_general(&preset_ofw_new(horizon, 1.0, 1.0).unwrap(), &k, &x1, &grads).unwrap();
        for t in 0..horizon {
            prop_assert!(norm(&sub(&a.x[t], &b.x[t])) <= 1e-10);
        }
        prop_assert!((regret(&a, &x1) - regret(&b, &x1)).abs() <= 1e-9);
    }
}
