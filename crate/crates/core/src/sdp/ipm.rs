use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ConeProblem, Residuals, SdpSolution, Sense, SolveStatus, SolverOptions, METHOD};
use crate::linalg::{svec_len, Cholesky, Matrix};
use crate::num::{abs, powf, sqrt};
use crate::{Error, Result};

/// Symmetric matrix entry `A_ij = A_ji = v` with `i ≤ j`.
#[derive(Clone, Copy, Debug)]
struct Entry {
    i: usize,
    j: usize,
    v: f64,
}

#[derive(Clone, Debug)]
struct Row {
    psd: Vec<Entry>,
    lp: Vec<(usize, f64)>,
    support: Vec<usize>,
    local: Matrix,
}

/// Internal problem with slacks added, zero rows removed and rows equilibrated.
struct Scaled {
    n: usize,
    nl: usize,
    c: Matrix,
    cl: Vec<f64>,
    rows: Vec<Row>,
    b: Vec<f64>,
    /// For every LP coordinate, the rows touching it.
    lp_cols: Vec<Vec<(usize, f64)>>,
    /// Original row index of every kept row, and its scale.
    kept: Vec<(usize, f64)>,
    b_scale: f64,
    c_scale: f64,
}

fn svec_pair(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

fn prepare(p: &ConeProblem) -> Result<core::result::Result<Scaled, usize>> {
    p.check()?;
    let n = p.psd_dim;
    let pairs = svec_pair(n);
    let slack_count = p.senses.iter().filter(|s| **s == Sense::Le).count();
    let nl = p.lp_dim + slack_count;
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut kept = Vec::new();
    let mut next_slack = p.lp_dim;
    for (idx, ((row, sense), &rhs)) in p.rows.iter().zip(&p.senses).zip(&p.rhs).enumerate() {
        let mut psd: Vec<Entry> = Vec::new();
        let mut coords: Vec<(usize, f64)> =
            row.psd.iter().copied().filter(|(_, v)| *v != 0.0).collect();
        coords.sort_by_key(|(k, _)| *k);
        let mut norm2 = 0.0;
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (k, v) in coords {
            match merged.last_mut() {
                Some((lk, lv)) if *lk == k => *lv += v,
                _ => merged.push((k, v)),
            }
        }
        for &(k, v) in &merged {
            norm2 += v * v;
            let (i, j) = pairs[k];
            let mv = if i == j {
                v
            } else {
                v * core::f64::consts::FRAC_1_SQRT_2
            };
            psd.push(Entry { i, j, v: mv });
        }
        let mut lp: Vec<(usize, f64)> = Vec::new();
        for &(k, v) in &row.lp {
            if v == 0.0 {
                continue;
            }
            match lp.iter_mut().find(|(lk, _)| *lk == k) {
                Some((_, lv)) => *lv += v,
                None => lp.push((k, v)),
            }
        }
        if *sense == Sense::Le {
            lp.push((next_slack, 1.0));
            next_slack += 1;
        }
        norm2 += lp.iter().map(|(_, v)| v * v).sum::<f64>();
        if norm2 == 0.0 {
            if abs(rhs) > 1e-12 {
                return Ok(Err(idx));
            }
            continue;
        }
        let r = sqrt(norm2);
        for e in &mut psd {
            e.v /= r;
        }
        for (_, v) in &mut lp {
            *v /= r;
        }
        let mut support: Vec<usize> = psd.iter().flat_map(|e| [e.i, e.j]).collect();
        support.sort_unstable();
        support.dedup();
        let mut local = Matrix::zeros(support.len(), support.len());
        for e in &psd {
            let a = support.binary_search(&e.i).unwrap();
            let c = support.binary_search(&e.j).unwrap();
            local[(a, c)] += e.v;
            if a != c {
                local[(c, a)] += e.v;
            }
        }
        rows.push(Row {
            psd,
            lp,
            support,
            local,
        });
        b.push(rhs / r);
        kept.push((idx, r));
    }

    let mut c = crate::linalg::smat(n, &p.c_psd);
    let mut cl = p.c_lp.clone();
    cl.resize(nl, 0.0);
    let b_scale = b.iter().fold(1.0f64, |m, v| m.max(abs(*v)));
    let c_scale = c
        .max_abs()
        .max(cl.iter().fold(1.0f64, |m, v| m.max(abs(*v))));
    for v in &mut b {
        *v /= b_scale;
    }
    c.scale(1.0 / c_scale);
    for v in &mut cl {
        *v /= c_scale;
    }
    let mut lp_cols = vec![Vec::new(); nl];
    for (ri, row) in rows.iter().enumerate() {
        for &(k, v) in &row.lp {
            lp_cols[k].push((ri, v));
        }
    }
    Ok(Ok(Scaled {
        n,
        nl,
        c,
        cl,
        rows,
        b,
        lp_cols,
        kept,
        b_scale,
        c_scale,
    }))
}

impl Scaled {
    /// `⟨A_i, M⟩` for symmetric `M`.
    fn apply(&self, m: &Matrix, ml: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = 0.0;
                for e in &r.psd {
                    s += if e.i == e.j {
                        e.v * m[(e.i, e.i)]
                    } else {
                        2.0 * e.v * m[(e.i, e.j)]
                    };
                }
                for &(k, v) in &r.lp {
                    s += v * ml[k];
                }
                s
            })
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> (Matrix, Vec<f64>) {
        let mut m = Matrix::zeros(self.n, self.n);
        let mut ml = vec![0.0; self.nl];
        for (r, &yi) in self.rows.iter().zip(y) {
            for e in &r.psd {
                m[(e.i, e.j)] += yi * e.v;
                if e.i != e.j {
                    m[(e.j, e.i)] += yi * e.v;
                }
            }
            for &(k, v) in &r.lp {
                ml[k] += yi * v;
            }
        }
        (m, ml)
    }

    /// Schur complement `M_ij = ⟨A_i, X A_j Z⁻¹⟩ + Σ_k a_ik a_jk x_k / z_k`.
    fn schur(&self, x: &Matrix, zinv: &Matrix, xl: &[f64], zl: &[f64]) -> Matrix {
        let m = self.rows.len();
        let n = self.n;
        let mut out = Matrix::zeros(m, m);
        let mut p = Matrix::zeros(n, n);
        for (j, rj) in self.rows.iter().enumerate() {
            if rj.support.is_empty() {
                continue;
            }
            let s = rj.support.len();
            // W = X[:, S] · local
            let mut w = Matrix::zeros(n, s);
            for r in 0..n {
                for (a, &ia) in rj.support.iter().enumerate() {
                    let xa = x[(r, ia)];
                    if xa == 0.0 {
                        continue;
                    }
                    for c in 0..s {
                        w[(r, c)] += xa * rj.local[(a, c)];
                    }
                }
            }
            // P = W · Z⁻¹[S, :]
            for r in 0..n {
                let prow = p.row_mut(r);
                prow.iter_mut().for_each(|v| *v = 0.0);
                for (c, &ic) in rj.support.iter().enumerate() {
                    let wv = w[(r, c)];
                    if wv == 0.0 {
                        continue;
                    }
                    let zrow = zinv.row(ic);
                    for (pv, zv) in prow.iter_mut().zip(zrow) {
                        *pv += wv * zv;
                    }
                }
            }
            for (i, ri) in self.rows.iter().enumerate() {
                let mut acc = 0.0;
                for e in &ri.psd {
                    acc += if e.i == e.j {
                        e.v * p[(e.i, e.i)]
                    } else {
                        e.v * (p[(e.i, e.j)] + p[(e.j, e.i)])
                    };
                }
                out[(i, j)] = acc;
            }
        }
        for (k, col) in self.lp_cols.iter().enumerate() {
            let d = xl[k] / zl[k];
            for &(r1, a1) in col {
                for &(r2, a2) in col {
                    out[(r1, r2)] += a1 * a2 * d;
                }
            }
        }
        out.symmetrize();
        out
    }
}

fn factor_regularized(m: &Matrix) -> Option<Cholesky> {
    if let Some(ch) = m.cholesky() {
        return Some(ch);
    }
    let diag_max = (0..m.rows()).fold(0.0f64, |a, i| a.max(abs(m[(i, i)])));
    let mut delta = 1e-14 * diag_max.max(1e-300);
    for _ in 0..14 {
        let mut r = m.clone();
        for i in 0..r.rows() {
            r[(i, i)] += delta;
        }
        if let Some(ch) = r.cholesky() {
            return Some(ch);
        }
        delta *= 10.0;
    }
    None
}

/// Largest `α` with `X + α dX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky, dx: &Matrix, xl: &[f64], dxl: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    if dx.rows() > 0 {
        let li = chol.factor_inverse();
        let w = li.matmul(dx).matmul(&li.transpose());
        let lmin = w.min_eigenvalue();
        if lmin < 0.0 {
            alpha = -1.0 / lmin;
        }
    }
    for (x, d) in xl.iter().zip(dxl) {
        if *d < 0.0 {
            alpha = alpha.min(-x / d);
        }
    }
    alpha
}

fn mul_sym(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    a.matmul(b).matmul(c)
}

struct Direction {
    dx: Matrix,
    dxl: Vec<f64>,
    dy: Vec<f64>,
    dz: Matrix,
    dzl: Vec<f64>,
}

pub fn solve_with(problem: &ConeProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let sp = match prepare(problem)? {
        Ok(sp) => sp,
        Err(_row) => return Ok(infeasible_stub(problem)),
    };
    let n = sp.n;
    let nl = sp.nl;
    let m = sp.rows.len();
    let nu = (n + nl).max(1) as f64;

    let cnorm =
        sp.c.frobenius_norm()
            .max(sqrt(sp.cl.iter().map(|v| v * v).sum()));
    let bmax = sp.b.iter().fold(0.0f64, |a, v| a.max(abs(*v)));
    let xi = 10.0f64
        .max(sqrt(n as f64))
        .max((n.max(1)) as f64 * (1.0 + bmax) / 2.0);
    let zeta = 10.0f64.max(sqrt(n as f64)).max(cnorm).max(1.0);

    let mut x = Matrix::identity(n).scaled(xi);
    let mut xl = vec![xi; nl];
    let mut y = vec![0.0; m];
    let mut z = Matrix::identity(n).scaled(zeta);
    let mut zl = vec![zeta; nl];

    let bnorm = sqrt(sp.b.iter().map(|v| v * v).sum());
    let mut iters = 0;
    let mut stall = 0;

    let (status, res, pobj, dobj) = loop {
        let ax = sp.apply(&x, &xl);
        let rp: Vec<f64> = sp.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let (aty, atyl) = sp.adjoint(&y);
        let mut rd = sp.c.clone();
        rd.add_scaled(-1.0, &z);
        rd.add_scaled(-1.0, &aty);
        let rdl: Vec<f64> = (0..nl).map(|k| sp.cl[k] - zl[k] - atyl[k]).collect();

        let pobj = sp.c.inner(&x) + sp.cl.iter().zip(&xl).map(|(c, v)| c * v).sum::<f64>();
        let dobj = sp.b.iter().zip(&y).map(|(b, v)| b * v).sum::<f64>();
        let rp_norm = sqrt(rp.iter().map(|v| v * v).sum());
        let rd_norm = sqrt(rd.inner(&rd) + rdl.iter().map(|v| v * v).sum::<f64>());
        let res = Residuals {
            primal: rp_norm / (1.0 + bnorm),
            dual: rd_norm / (1.0 + cnorm),
            gap: abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)),
        };
        if !pobj.is_finite() || !dobj.is_finite() || !res.max().is_finite() {
            return Err(Error::Solver(format!(
                "non-finite iterate at iteration {iters}"
            )));
        }
        if res.max() <= opts.tol {
            break (SolveStatus::Optimal, res, pobj, dobj);
        }
        let xnorm = x.max_abs().max(xl.iter().fold(0.0f64, |a, v| a.max(*v)));
        let znorm = z.max_abs().max(zl.iter().fold(0.0f64, |a, v| a.max(*v)));
        if xnorm > 1e12 || znorm > 1e12 {
            break (SolveStatus::InfeasibleSuspected, res, pobj, dobj);
        }
        if iters >= opts.max_iter {
            break (SolveStatus::MaxIter, res, pobj, dobj);
        }
        if stall >= 5 {
            break (SolveStatus::Stalled, res, pobj, dobj);
        }
        iters += 1;

        let mu = (x.inner(&z) + xl.iter().zip(&zl).map(|(a, b)| a * b).sum::<f64>()) / nu;
        let (Some(chx), Some(chz)) = (x.cholesky(), z.cholesky()) else {
            break (SolveStatus::Stalled, res, pobj, dobj);
        };
        let zinv = chz.inverse();
        let schur = sp.schur(&x, &zinv, &xl, &zl);
        let Some(chm) = factor_regularized(&schur) else {
            break (SolveStatus::Stalled, res, pobj, dobj);
        };
        let x_rd_zinv = {
            let mut t = mul_sym(&x, &rd, &zinv);
            t.symmetrize();
            t
        };
        let a_x_rd_zinv = sp.apply(&x_rd_zinv, &vec![0.0; nl]);
        let lp_rd: Vec<f64> = (0..nl).map(|k| xl[k] * rdl[k] / zl[k]).collect();

        let direction = |rc_zinv: &Matrix, rcl: &[f64]| -> Direction {
            // rhs = rp − A(Rc Z⁻¹) + A(X Rd Z⁻¹)
            let a_rc = sp.apply(rc_zinv, rcl);
            let mut rhs: Vec<f64> = (0..m).map(|i| rp[i] - a_rc[i] + a_x_rd_zinv[i]).collect();
            for (k, col) in sp.lp_cols.iter().enumerate() {
                for &(r, a) in col {
                    rhs[r] += a * lp_rd[k];
                }
            }
            let dy = chm.solve(&rhs);
            let (ady, adyl) = sp.adjoint(&dy);
            let mut dz = rd.clone();
            dz.add_scaled(-1.0, &ady);
            let dzl: Vec<f64> = (0..nl).map(|k| rdl[k] - adyl[k]).collect();
            let mut dx = mul_sym(&x, &dz, &zinv);
            dx.scale(-1.0);
            dx.add_scaled(1.0, rc_zinv);
            dx.symmetrize();
            let dxl: Vec<f64> = (0..nl).map(|k| rcl[k] - xl[k] * dzl[k] / zl[k]).collect();
            Direction {
                dx,
                dxl,
                dy,
                dz,
                dzl,
            }
        };

        // Predictor.
        let neg_x = x.scaled(-1.0);
        let neg_xl: Vec<f64> = xl.iter().map(|v| -v).collect();
        let pred = direction(&neg_x, &neg_xl);
        let ap = max_step(&chx, &pred.dx, &xl, &pred.dxl).min(1.0);
        let ad = max_step(&chz, &pred.dz, &zl, &pred.dzl).min(1.0);
        let mut xa = x.clone();
        xa.add_scaled(ap, &pred.dx);
        let mut za = z.clone();
        za.add_scaled(ad, &pred.dz);
        let mu_aff = (xa.inner(&za)
            + (0..nl)
                .map(|k| (xl[k] + ap * pred.dxl[k]) * (zl[k] + ad * pred.dzl[k]))
                .sum::<f64>())
            / nu;
        let sigma = powf((mu_aff / mu).clamp(0.0, 1.0), 3.0);

        // Corrector.
        let mut rc_zinv = zinv.scaled(sigma * mu);
        rc_zinv.add_scaled(-1.0, &x);
        let mut cross = mul_sym(&pred.dx, &pred.dz, &zinv);
        cross.symmetrize();
        rc_zinv.add_scaled(-1.0, &cross);
        let rcl: Vec<f64> = (0..nl)
            .map(|k| (sigma * mu - pred.dxl[k] * pred.dzl[k]) / zl[k] - xl[k])
            .collect();
        let corr = direction(&rc_zinv, &rcl);
        let ap = (opts.step_fraction * max_step(&chx, &corr.dx, &xl, &corr.dxl)).min(1.0);
        let ad = (opts.step_fraction * max_step(&chz, &corr.dz, &zl, &corr.dzl)).min(1.0);
        if ap < 1e-8 && ad < 1e-8 {
            stall += 1;
        } else {
            stall = 0;
        }
        x.add_scaled(ap, &corr.dx);
        for k in 0..nl {
            xl[k] += ap * corr.dxl[k];
            zl[k] += ad * corr.dzl[k];
        }
        for (yi, d) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * d;
        }
        z.add_scaled(ad, &corr.dz);
    };

    // Undo scaling.
    let bs = sp.b_scale;
    let cs = sp.c_scale;
    x.scale(bs);
    z.scale(cs);
    let mut y_out = vec![0.0; problem.rows.len()];
    for ((orig, r), yi) in sp.kept.iter().zip(&y) {
        y_out[*orig] = cs * yi / r;
    }
    let x_lp: Vec<f64> = xl[..problem.lp_dim].iter().map(|v| v * bs).collect();
    let s_lp: Vec<f64> = zl[..problem.lp_dim].iter().map(|v| v * cs).collect();
    Ok(SdpSolution {
        status,
        x,
        x_lp,
        y: y_out,
        s: z,
        s_lp,
        primal_objective: pobj * bs * cs,
        dual_objective: dobj * bs * cs,
        residuals: res,
        iterations: iters,
        method: METHOD,
    })
}

fn infeasible_stub(p: &ConeProblem) -> SdpSolution {
    SdpSolution {
        status: SolveStatus::InfeasibleSuspected,
        x: Matrix::zeros(p.psd_dim, p.psd_dim),
        x_lp: vec![0.0; p.lp_dim],
        y: vec![0.0; p.rows.len()],
        s: Matrix::zeros(p.psd_dim, p.psd_dim),
        s_lp: vec![0.0; p.lp_dim],
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        residuals: Residuals {
            primal: f64::INFINITY,
            dual: f64::INFINITY,
            gap: f64::INFINITY,
        },
        iterations: 0,
        method: METHOD,
    }
}
