//! Nelder-Mead simplex minimization with dimension-adaptive coefficients
//! (Gao & Han), which keeps the method usable at a few dozen dimensions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop once the spread of function values falls below this,
    pub ftol: f64,
    /// or once the simplex diameter (max-norm) does.
    pub xtol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_evals: 10_000,
            ftol: 1e-14,
            xtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

pub fn minimize(f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> Minimum {
    let n = x0.len();
    let mut func = Counted { f, evals: 0 };
    if n == 0 || opts.max_evals == 0 {
        let value = if opts.max_evals == 0 { f64::INFINITY } else { func.call(x0) };
        return Minimum {
            x: x0.to_vec(),
            value,
            evals: func.evals,
            iterations: 0,
            converged: n == 0,
        };
    }
    let dim = n as f64;
    let (reflect, expand) = (1.0, 1.0 + 2.0 / dim);
    let contract = 0.75 - 0.5 / dim;
    let shrink = 1.0 - 1.0 / dim;

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        points.push(p);
    }
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    for p in &points {
        if func.evals >= opts.max_evals {
            break;
        }
        values.push(func.call(p));
    }
    if values.len() < points.len() {
        points.truncate(values.len());
        let (best, value) = best_of(&points, &values);
        return Minimum {
            x: best,
            value,
            evals: func.evals,
            iterations: 0,
            converged: false,
        };
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    while func.evals < opts.max_evals {
        // stable sort keeps ties in index order, so runs are reproducible
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = values[worst] - values[best];
        let diameter = points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&points[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.ftol || diameter <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&points[i]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim);

        let along = |out: &mut Vec<f64>, coef: f64, from: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(from) {
                *o = c + coef * (c - w);
            }
        };

        along(&mut trial, reflect, &points[worst]);
        let f_reflect = func.call(&trial);
        if f_reflect < values[best] {
            if func.evals >= opts.max_evals {
                points[worst].clone_from(&trial);
                values[worst] = f_reflect;
                break;
            }
            along(&mut trial2, reflect * expand, &points[worst]);
            let f_expand = func.call(&trial2);
            if f_expand < f_reflect {
                points[worst].clone_from(&trial2);
                values[worst] = f_expand;
            } else {
                points[worst].clone_from(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second] {
            points[worst].clone_from(&trial);
            values[worst] = f_reflect;
            continue;
        }
        if func.evals >= opts.max_evals {
            break;
        }
        let outside = f_reflect < values[worst];
        if outside {
            along(&mut trial2, reflect * contract, &points[worst]);
        } else {
            along(&mut trial2, -contract, &points[worst]);
        }
        let f_contract = func.call(&trial2);
        let accept = if outside {
            f_contract <= f_reflect
        } else {
            f_contract < values[worst]
        };
        if accept {
            points[worst].clone_from(&trial2);
            values[worst] = f_contract;
            continue;
        }
        let anchor = points[best].clone();
        for &i in &order[1..] {
            if func.evals >= opts.max_evals {
                break;
            }
            for (p, a) in points[i].iter_mut().zip(&anchor) {
                *p = a + shrink * (*p - a);
            }
            values[i] = func.call(&points[i]);
        }
    }
    let (x, value) = best_of(&points, &values);
    Minimum {
        x,
        value,
        evals: func.evals,
        iterations,
        converged,
    }
}

fn best_of(points: &[Vec<f64>], values: &[f64]) -> (Vec<f64>, f64) {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (points[best].clone(), values[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(
            f,
            &[-1.2, 1.0],
            &SimplexOptions {
                initial_step: 0.5,
                max_evals: 5000,
                ..Default::default()
            },
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn quadratic_in_twenty_dimensions() {
        let f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (1.0 + i as f64) * (v - 0.1 * i as f64).powi(2))
                .sum::<f64>()
        };
        let m = minimize(
            f,
            &[0.0; 20],
            &SimplexOptions {
                initial_step: 0.5,
                max_evals: 200_000,
                ..Default::default()
            },
        );
        assert!(m.value < 1e-8, "{}", m.value);
    }

    #[test]
    fn respects_evaluation_budget() {
        let mut calls = 0;
        let m = minimize(
            |x: &[f64]| {
                calls += 1;
                x.iter().map(|v| v * v).sum()
            },
            &[3.0, -2.0, 1.0],
            &SimplexOptions {
                max_evals: 17,
                ..Default::default()
            },
        );
        assert_eq!(m.evals, calls);
        assert!(calls <= 17);
        assert!(!m.converged);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + x[0]).powi(4) + x[2].abs();
        let o = SimplexOptions::default();
        assert_eq!(minimize(f, &[1.0, 1.0, 1.0], &o), minimize(f, &[1.0, 1.0, 1.0], &o));
    }
}
