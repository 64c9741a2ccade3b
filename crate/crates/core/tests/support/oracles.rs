//! Reference implementations used only by tests. Nothing here shares code
//! with the library paths it checks.

#![allow(dead_code)]

use rand::Rng;
use rfsched::lp::{LinearProgram, Relation};

/// Best vertex of a small LP with finite bounds, by enumerating every
/// choice of `n` active hyperplanes. `None` when no vertex is feasible.
pub fn vertex_enumeration(
    objective: &[f64],
    rows: &[(Vec<f64>, Relation, f64)],
    bounds: &[(f64, f64)],
) -> Option<(f64, Vec<f64>)> {
    let n = objective.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for (j, &(l, u)) in bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), l));
        planes.push((e, u));
    }
    let feasible = |x: &[f64]| {
        let rows_ok = rows.iter().all(|(a, rel, b)| {
            let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            let tol = 1e-9 * (1.0 + b.abs());
            match rel {
                Relation::Le => lhs <= b + tol,
                Relation::Ge => lhs >= b - tol,
                Relation::Eq => (lhs - b).abs() <= tol,
            }
        });
        let bounds_ok = x.iter().zip(bounds).all(|(&v, &(l, u))| v >= l - 1e-9 && v <= u + 1e-9);
        rows_ok && bounds_ok
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    let p = planes.len();
    if p < n {
        return None;
    }
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if feasible(&x) {
                let v: f64 = objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
        }
        // Next combination.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + p - n {
                break;
            }
            if i == 0 {
                return best;
            }
        }
        idx[i] += 1;
        for k in i + 1..n {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// A random boxed LP with at most 4 variables and 6 rows.
pub struct SmallLp {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
    pub bounds: Vec<(f64, f64)>,
}

impl SmallLp {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(0..=6);
        // Integer-ish data keeps the oracle's vertices well conditioned.
        let coef = |rng: &mut R| (rng.random_range(-10..=10) as f64) / 2.0;
        let objective = (0..n).map(|_| coef(rng)).collect();
        let bounds = (0..n)
            .map(|_| {
                let l = -(rng.random_range(0..=3) as f64);
                let u = l + rng.random_range(1..=6) as f64;
                (l, u)
            })
            .collect();
        let rows = (0..m)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
                let rel = match rng.random_range(0..10) {
                    0 => Relation::Eq,
                    1..=5 => Relation::Le,
                    _ => Relation::Ge,
                };
                (a, rel, coef(rng) * 2.0)
            })
            .collect();
        SmallLp {
            objective,
            rows,
            bounds,
        }
    }

    pub fn to_program(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.objective.clone()).unwrap();
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            lp.set_bounds(j, l, u).unwrap();
        }
        for (a, rel, b) in &self.rows {
            lp.add_dense_constraint(a, *rel, *b).unwrap();
        }
        lp
    }
}
