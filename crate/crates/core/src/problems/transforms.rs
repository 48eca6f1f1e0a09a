//! Value and coordinate transformations shared by the BBOB definitions.

/// Oscillation transformation `T_osz`, applied element-wise.
pub fn t_osz(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xh = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xh + 0.049 * ((c1 * xh).sin() + (c2 * xh).sin())).exp()
}

pub fn t_osz_vec(z: &mut [f64]) {
    for v in z.iter_mut() {
        *v = t_osz(*v);
    }
}

/// Position of coordinate `i` along the dimension, in `[0, 1]`.
/// One-dimensional problems collapse to 0.
pub fn ratio(i: usize, dim: usize) -> f64 {
    if dim <= 1 {
        0.0
    } else {
        i as f64 / (dim - 1) as f64
    }
}

/// Asymmetric transformation `T_asy^beta`.
pub fn t_asy(z: &mut [f64], beta: f64) {
    let d = z.len();
    for (i, v) in z.iter_mut().enumerate() {
        if *v > 0.0 {
            *v = v.powf(1.0 + beta * ratio(i, d) * v.sqrt());
        }
    }
}

/// Diagonal of the conditioning matrix `Lambda^alpha`.
pub fn lambda_diag(alpha: f64, dim: usize) -> Vec<f64> {
    (0..dim).map(|i| alpha.powf(0.5 * ratio(i, dim))).collect()
}

pub fn scale_by(z: &mut [f64], diag: &[f64]) {
    for (v, s) in z.iter_mut().zip(diag) {
        *v *= s;
    }
}

/// Boundary penalty `sum max(0, |x| - 5)^2`.
pub fn penalty(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let e = (v.abs() - 5.0).max(0.0);
            e * e
        })
        .sum()
}
