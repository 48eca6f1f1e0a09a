//! Independent scalar reimplementation of the BBOB formulas, written from
//! the COCO function definitions with explicit 1-based loops. Used only as a
//! test oracle.

#![allow(dead_code)]

use metabbo::problems::{BbobFunction, Peaks};

const PI: f64 = std::f64::consts::PI;

fn osz(x: f64) -> f64 {
    let xhat = if x != 0.0 { x.abs().ln() } else { 0.0 };
    let c1 = if x > 0.0 { 10.0 } else { 5.5 };
    let c2 = if x > 0.0 { 7.9 } else { 3.1 };
    let sign = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    };
    sign * (xhat + 0.049 * ((c1 * xhat).sin() + (c2 * xhat).sin())).exp()
}

fn frac(i: usize, d: usize) -> f64 {
    // (i-1)/(D-1) for 1-based i
    if d == 1 {
        0.0
    } else {
        (i - 1) as f64 / (d - 1) as f64
    }
}

fn asy(x: &[f64], beta: f64) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; d];
    for i in 1..=d {
        let v = x[i - 1];
        out[i - 1] = if v > 0.0 { v.powf(1.0 + beta * frac(i, d) * v.sqrt()) } else { v };
    }
    out
}

fn lam(alpha: f64, i: usize, d: usize) -> f64 {
    alpha.powf(0.5 * frac(i, d))
}

fn fpen(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for &v in x {
        let e = v.abs() - 5.0;
        if e > 0.0 {
            s += e * e;
        }
    }
    s
}

fn rastrigin_core(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let mut cos_sum = 0.0;
    let mut sq = 0.0;
    for &v in z {
        cos_sum += (2.0 * PI * v).cos();
        sq += v * v;
    }
    10.0 * (d - cos_sum) + sq
}

fn rosen_core(z: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 1..z.len() {
        let a = z[i - 1];
        let b = z[i];
        s += 100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0);
    }
    s
}

pub fn reference_value(f: BbobFunction, x: &[f64], peaks: Option<&Peaks>) -> f64 {
    use BbobFunction::*;
    let d = x.len();
    let df = d as f64;
    match f {
        Sphere => {
            let mut s = 0.0;
            for &v in x {
                s += v * v;
            }
            s
        }
        Ellipsoidal | EllipsoidalHighCond => {
            let mut s = 0.0;
            for i in 1..=d {
                let z = osz(x[i - 1]);
                s += 10f64.powf(6.0 * frac(i, d)) * z * z;
            }
            s
        }
        Rastrigin | RastriginF15 => {
            let mut z = vec![0.0; d];
            for i in 0..d {
                z[i] = osz(x[i]);
            }
            let z = asy(&z, 0.2);
            let z: Vec<f64> = (1..=d).map(|i| lam(10.0, i, d) * z[i - 1]).collect();
            rastrigin_core(&z)
        }
        BucheRastrigin => {
            let mut z = vec![0.0; d];
            for i in 1..=d {
                let t = osz(x[i - 1]);
                let mut s = 10f64.powf(0.5 * frac(i, d));
                if t > 0.0 && i % 2 == 1 {
                    s *= 10.0;
                }
                z[i - 1] = s * t;
            }
            rastrigin_core(&z) + 100.0 * fpen(x)
        }
        LinearSlope => {
            let mut s = 0.0;
            for i in 1..=d {
                let xopt = 5.0;
                let si = 10f64.powf(frac(i, d));
                let zi = if xopt * x[i - 1] < 25.0 { x[i - 1] } else { xopt };
                s += 5.0 * si.abs() - si * zi;
            }
            s
        }
        AttractiveSector => {
            let mut s = 0.0;
            for i in 1..=d {
                let z = lam(10.0, i, d) * x[i - 1];
                let si = if z > 0.0 { 100.0 } else { 1.0 };
                s += (si * z).powi(2);
            }
            osz(s).powf(0.9)
        }
        StepEllipsoidal => {
            let zhat: Vec<f64> = (1..=d).map(|i| lam(10.0, i, d) * x[i - 1]).collect();
            let mut s = 0.0;
            for i in 1..=d {
                let v = zhat[i - 1];
                let zt = if v.abs() > 0.5 { (0.5 + v).floor() } else { (0.5 + 10.0 * v).floor() / 10.0 };
                s += 10f64.powf(2.0 * frac(i, d)) * zt * zt;
            }
            let first = zhat[0].abs() / 1e4;
            0.1 * if first > s { first } else { s } + fpen(x)
        }
        RosenbrockOriginal | RosenbrockRotated | CompositeGrieRosen => {
            let c = if (df.sqrt() / 8.0) > 1.0 { df.sqrt() / 8.0 } else { 1.0 };
            let off = if f == RosenbrockOriginal { 1.0 } else { 0.5 };
            let z: Vec<f64> = x.iter().map(|&v| c * v + off).collect();
            if f == CompositeGrieRosen {
                let mut s = 0.0;
                for i in 1..d {
                    let si = 100.0 * (z[i - 1].powi(2) - z[i]).powi(2) + (z[i - 1] - 1.0).powi(2);
                    s += si / 4000.0 - si.cos();
                }
                10.0 / (df - 1.0) * s + 10.0
            } else {
                rosen_core(&z)
            }
        }
        Discus => {
            let mut s = 1e6 * osz(x[0]).powi(2);
            for i in 2..=d {
                s += osz(x[i - 1]).powi(2);
            }
            s
        }
        BentCigar => {
            let z = asy(x, 0.5);
            let mut s = z[0] * z[0];
            for i in 2..=d {
                s += 1e6 * z[i - 1] * z[i - 1];
            }
            s
        }
        SharpRidge => {
            let z: Vec<f64> = (1..=d).map(|i| lam(10.0, i, d) * x[i - 1]).collect();
            let mut tail = 0.0;
            for i in 2..=d {
                tail += z[i - 1] * z[i - 1];
            }
            z[0] * z[0] + 100.0 * tail.sqrt()
        }
        DifferentPowers => {
            let mut s = 0.0;
            for i in 1..=d {
                s += x[i - 1].abs().powf(2.0 + 4.0 * frac(i, d));
            }
            s.sqrt()
        }
        Weierstrass => {
            let mut f0 = 0.0;
            for k in 0..=11 {
                f0 += (0.5f64).powi(k) * (2.0 * PI * 3f64.powi(k) * 0.5).cos();
            }
            let mut s = 0.0;
            for i in 1..=d {
                let z = lam(0.01, i, d) * osz(x[i - 1]);
                for k in 0..=11 {
                    s += (0.5f64).powi(k) * (2.0 * PI * 3f64.powi(k) * (z + 0.5)).cos();
                }
            }
            10.0 * (s / df - f0).powi(3) + 10.0 / df * fpen(x)
        }
        Schaffers | SchaffersHighCond => {
            let alpha = if f == Schaffers { 10.0 } else { 1000.0 };
            let a = asy(x, 0.5);
            let z: Vec<f64> = (1..=d).map(|i| lam(alpha, i, d) * a[i - 1]).collect();
            let mut s = 0.0;
            for i in 1..d {
                let si = (z[i - 1].powi(2) + z[i].powi(2)).sqrt();
                s += si.sqrt() + si.sqrt() * (50.0 * si.powf(0.2)).sin().powi(2);
            }
            (s / (df - 1.0)).powi(2) + 10.0 * fpen(x)
        }
        Schwefel => {
            let xopt_abs = 4.2096874633 / 2.0;
            let xhat: Vec<f64> = x.iter().map(|&v| 2.0 * v).collect();
            let mut zhat = vec![0.0; d];
            zhat[0] = xhat[0];
            for i in 2..=d {
                zhat[i - 1] = xhat[i - 1] + 0.25 * (xhat[i - 2] - 2.0 * xopt_abs);
            }
            let mut s = 0.0;
            let mut zs = vec![0.0; d];
            for i in 1..=d {
                let z = 100.0 * (lam(10.0, i, d) * (zhat[i - 1] - 2.0 * xopt_abs) + 2.0 * xopt_abs);
                zs[i - 1] = z / 100.0;
                s += z * z.abs().sqrt().sin();
            }
            -s / (100.0 * df) + 4.189828872724339 + 100.0 * fpen(&zs)
        }
        Gallagher101Peaks | Gallagher21Peaks => {
            let p = peaks.expect("peak data");
            let mut best = f64::NEG_INFINITY;
            for k in 0..p.centers.len() {
                let mut q = 0.0;
                for i in 0..d {
                    let diff = x[i] - p.centers[k][i];
                    q += p.conditioning[k][i] * diff * diff;
                }
                let v = p.weights[k] * (-q / (2.0 * df)).exp();
                if v > best {
                    best = v;
                }
            }
            osz(10.0 - best).powi(2) + fpen(x)
        }
        Katsuura => {
            let mut prod = 1.0;
            for i in 1..=d {
                let z = lam(100.0, i, d) * x[i - 1];
                let mut s = 0.0;
                for j in 1..=32 {
                    let t = 2f64.powi(j) * z;
                    s += (t - t.round()).abs() / 2f64.powi(j);
                }
                prod *= (1.0 + i as f64 * s).powf(10.0 / df.powf(1.2));
            }
            10.0 / (df * df) * prod - 10.0 / (df * df) + fpen(x)
        }
        LunacekBiRastrigin => {
            let mu0 = 2.5;
            let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
            let mu1 = -((mu0 * mu0 - 1.0) / s).sqrt();
            let mut a = 0.0;
            let mut b = 0.0;
            let mut c = 0.0;
            for i in 1..=d {
                let xh = 2.0 * x[i - 1];
                a += (xh - mu0).powi(2);
                b += (xh - mu1).powi(2);
                c += (2.0 * PI * lam(100.0, i, d) * (xh - mu0)).cos();
            }
            let b = df + s * b;
            (if a < b { a } else { b }) + 10.0 * (df - c) + 1e4 * fpen(x)
        }
    }
}
