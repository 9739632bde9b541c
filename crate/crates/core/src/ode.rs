//! Fixed-step classical fourth-order Runge-Kutta.

use std::ops::{Add, Mul};

/// Advances `y` from `t` to `t + h` with one classical RK4 step.
pub fn rk4_step<T, const N: usize, E>(
    rhs: &mut impl FnMut(f64, &[T; N]) -> Result<[T; N], E>,
    t: f64,
    y: &[T; N],
    h: f64,
) -> Result<[T; N], E>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let axpy = |a: &[T; N], k: &[T; N], s: f64| -> [T; N] { std::array::from_fn(|i| a[i] + k[i] * s) };

    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &axpy(y, &k1, 0.5 * h))?;
    let k3 = rhs(t + 0.5 * h, &axpy(y, &k2, 0.5 * h))?;
    let k4 = rhs(t + h, &axpy(y, &k3, h))?;
    Ok(std::array::from_fn(|i| {
        y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)
    }))
}

/// Integrates over `[a, b]` in `steps` equal steps, calling `observe` after each.
pub fn rk4_span<T, const N: usize, E>(
    rhs: &mut impl FnMut(f64, &[T; N]) -> Result<[T; N], E>,
    (a, b): (f64, f64),
    steps: usize,
    mut y: [T; N],
    mut observe: impl FnMut(f64, &[T; N]),
) -> Result<[T; N], E>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let h = (b - a) / steps as f64;
    for k in 0..steps {
        let t = a + (b - a) * (k as f64 / steps as f64);
        y = rk4_step(rhs, t, &y, h)?;
        let t_next = if k + 1 == steps {
            b
        } else {
            a + (b - a) * ((k + 1) as f64 / steps as f64)
        };
        observe(t_next, &y);
    }
    Ok(y)
}
