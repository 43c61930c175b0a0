use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::gram::{GramBasis, LinearConstraint, LmiSdp, SymSparse};
use crate::model::{positive, ProblemSetting};
use crate::sdp::SolverOptions;
use crate::{Error, Result};

const LABELS: [&str; 6] = ["g", "G", "x", "v", "y", "y+"];

/// One-step program that searches the potential family for the cheapest
/// per-step budget `λ_g L² + Σ λ_diam D²`.
#[derive(Clone, Debug)]
pub struct PotentialProgram {
    pub eta: f64,
    pub sigma: f64,
    pub lmi: LmiSdp,
    pub a: usize,
    pub b: usize,
    pub lambda_g: usize,
    /// `(p, q)` point labels with their variable.
    pub diameter: Vec<((&'static str, &'static str), usize)>,
    /// `(atom, competitor)` with their variable.
    pub boundary: Vec<((&'static str, &'static str), usize)>,
}

#[derive(Clone, Debug)]
pub struct PotentialSolution {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub lambda_g: f64,
    pub diameter: Vec<((&'static str, &'static str), f64)>,
    pub boundary: Vec<((&'static str, &'static str), f64)>,
    pub lmi_min_eigenvalue: f64,
}

impl PotentialSolution {
    pub fn diameter_multiplier(&self, p: &str, q: &str) -> Option<f64> {
        self.diameter
            .iter()
            .find(|((a, b), _)| (*a == p && *b == q) || (*a == q && *b == p))
            .map(|x| x.1)
    }

    pub fn boundary_multiplier(&self, atom: &str, other: &str) -> Option<f64> {
        self.boundary
            .iter()
            .find(|((a, b), _)| *a == atom && *b == other)
            .map(|x| x.1)
    }
}

impl PotentialProgram {
    /// Pins `b` to a value; the optimum is typically flat in `b`, and `b = 0`
    /// selects the representative with the sparsest multipliers.
    pub fn fix_b(&mut self, value: f64) {
        self.lmi.equalities.push(LinearConstraint {
            coeffs: vec![(self.b, 1.0)],
            rhs: value,
        });
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<PotentialSolution> {
        let sol = self.lmi.solve(opts)?;
        Ok(PotentialSolution {
            value: sol.value,
            a: sol.w[self.a],
            b: sol.w[self.b],
            lambda_g: sol.w[self.lambda_g],
            diameter: self.diameter.iter().map(|&(k, i)| (k, sol.w[i])).collect(),
            boundary: self.boundary.iter().map(|&(k, i)| (k, sol.w[i])).collect(),
            lmi_min_eigenvalue: sol.lmi_min_eigenvalue,
        })
    }
}

/// Builds the potential-design program for step size `eta` and mixing
/// weight `sigma` (`x_{t+1} = σ v_t + (1−σ) x_t`).
pub fn build_potential_design(
    eta: f64,
    sigma: f64,
    setting: &ProblemSetting,
) -> Result<PotentialProgram> {
    setting.check()?;
    let eta = positive("eta", eta)?;
    let sigma = positive("sigma", sigma)?;
    if sigma > 1.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
        });
    }
    let basis = GramBasis::new(LABELS.iter().map(|s| String::from(*s)).collect())?;
    let e = |i: usize| {
        let mut v = vec![0.0; 6];
        v[i] = 1.0;
        v
    };
    let comb = |terms: &[(f64, usize)]| {
        let mut v = vec![0.0; 6];
        for &(c, i) in terms {
            v[i] += c;
        }
        v
    };
    let (g, gsum, x, v, y, yn) = (e(0), e(1), e(2), e(3), e(4), e(5));
    let x_next = comb(&[(sigma, 3), (1.0 - sigma, 2)]);
    let g_next = comb(&[(1.0, 0), (1.0, 1)]);
    let sub = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p - q).collect() };

    // Increment of the potential, split as fixed + a·(…) + b·(…).
    let mut fixed = SymSparse::zeros(6);
    fixed.add_sym_outer(1.0, &g, &sub(&x, &yn));
    fixed.add_sym_outer(1.0, &gsum, &sub(&y, &yn));
    fixed.add_sym_outer(0.5 / eta, &y, &y);
    fixed.add_sym_outer(-0.5 / eta, &yn, &yn);

    let mut inc_a = SymSparse::zeros(6);
    let d1 = sub(&x_next, &yn);
    let d0 = sub(&x, &y);
    inc_a.add_sym_outer(1.0, &d1, &d1);
    inc_a.add_sym_outer(-1.0, &d0, &d0);

    let mut inc_b = SymSparse::zeros(6);
    inc_b.add_sym_outer(eta, &g_next, &d1);
    inc_b.add_sym_outer(-eta, &gsum, &d0);
    inc_b.add_sym_outer(0.5, &x_next, &x_next);
    inc_b.add_sym_outer(-0.5, &yn, &yn);
    inc_b.add_sym_outer(-0.5, &x, &x);
    inc_b.add_sym_outer(0.5, &y, &y);

    let mut lmi = LmiSdp::new(basis);
    lmi.constant = fixed.scaled(-1.0);
    let a = lmi.add_var(String::from("a"), true, 0.0, inc_a.scaled(-1.0));
    let b = lmi.add_var(String::from("b"), true, 0.0, inc_b.scaled(-1.0));
    let l2 = setting.lipschitz * setting.lipschitz;
    let d2 = setting.diameter * setting.diameter;
    let lambda_g = lmi.add_var(
        String::from("lambda_g"),
        true,
        l2,
        SymSparse::sym_outer(&g, &g),
    );

    let x1 = vec![0.0; 6];
    let points: [(&'static str, &Vec<f64>); 5] =
        [("x1", &x1), ("x", &x), ("v", &v), ("y", &y), ("y+", &yn)];
    let mut diameter = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = sub(points[i].1, points[j].1);
            let k = lmi.add_var(
                format!("diam[{},{}]", points[i].0, points[j].0),
                true,
                d2,
                SymSparse::sym_outer(&d, &d),
            );
            diameter.push(((points[i].0, points[j].0), k));
        }
    }

    let dir_v = comb(&[(eta, 0), (eta, 1), (1.0, 2)]);
    let dir_y = comb(&[(eta, 1), (1.0, 4)]);
    let dir_yn = comb(&[(eta, 0), (eta, 1), (1.0, 5)]);
    let atoms: [(&'static str, &Vec<f64>, Vec<f64>); 3] =
        [("v", &v, dir_v), ("y", &y, dir_y), ("y+", &yn, dir_yn)];
    let mut boundary = Vec::new();
    for (name, w, dir) in &atoms {
        for (other, u) in points.iter().filter(|(o, _)| o != name) {
            let k = lmi.add_var(
                format!("brd[{name},{other}]"),
                true,
                0.0,
                SymSparse::sym_outer(dir, &sub(w, u)),
            );
            boundary.push(((*name, *other), k));
        }
    }

    Ok(PotentialProgram {
        eta,
        sigma,
        lmi,
        a,
        b,
        lambda_g,
        diameter,
        boundary,
    })
}
