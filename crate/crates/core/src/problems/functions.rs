//! The 24 noiseless BBOB functions, in the frame `z` where the optional
//! external shift and rotation have already been removed.
//!
//! Each definition follows COCO with the optimum value set to zero, the
//! internal rotations `R`/`Q` set to the identity (rotation is applied once,
//! externally) and every random sign vector `1±` fixed to `+1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transforms::{lambda_diag, penalty, ratio, scale_by, t_asy, t_osz, t_osz_vec};
use crate::Error;

macro_rules! bbob_functions {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// The 24 noiseless BBOB functions, in COCO order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum BbobFunction {
            $($variant),*
        }

        impl BbobFunction {
            pub const ALL: [BbobFunction; 24] = [$(BbobFunction::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(BbobFunction::$variant => $name),*
                }
            }
        }
    };
}

bbob_functions! {
    Sphere => "sphere",
    Ellipsoidal => "ellipsoidal",
    Rastrigin => "rastrigin",
    BucheRastrigin => "buche_rastrigin",
    LinearSlope => "linear_slope",
    AttractiveSector => "attractive_sector",
    StepEllipsoidal => "step_ellipsoidal",
    RosenbrockOriginal => "rosenbrock_original",
    RosenbrockRotated => "rosenbrock_rotated",
    EllipsoidalHighCond => "ellipsoidal_high_cond",
    Discus => "discus",
    BentCigar => "bent_cigar",
    SharpRidge => "sharp_ridge",
    DifferentPowers => "different_powers",
    RastriginF15 => "rastrigin_f15",
    Weierstrass => "weierstrass",
    Schaffers => "schaffers",
    SchaffersHighCond => "schaffers_high_cond",
    CompositeGrieRosen => "composite_grie_rosen",
    Schwefel => "schwefel",
    Gallagher101Peaks => "gallagher_101peaks",
    Gallagher21Peaks => "gallagher_21peaks",
    Katsuura => "katsuura",
    LunacekBiRastrigin => "lunacek_bi_rastrigin",
}

impl BbobFunction {
    /// COCO function number, 1-based.
    pub fn id(self) -> usize {
        Self::ALL.iter().position(|&f| f == self).unwrap() + 1
    }

    /// Functions built from consecutive coordinate pairs need two coordinates.
    pub fn min_dim(self) -> usize {
        use BbobFunction::*;
        match self {
            RosenbrockOriginal | RosenbrockRotated | Schaffers | SchaffersHighCond
            | CompositeGrieRosen => 2,
            _ => 1,
        }
    }

    /// Location of the global optimum in the `z` frame.
    pub fn optimum(self, dim: usize) -> Vec<f64> {
        use BbobFunction::*;
        let v = match self {
            LinearSlope => 5.0,
            RosenbrockRotated | CompositeGrieRosen => 0.5 / rosenbrock_scale(dim),
            Schwefel => SCHWEFEL_OPT / 2.0,
            LunacekBiRastrigin => LUNACEK_MU0 / 2.0,
            _ => 0.0,
        };
        vec![v; dim]
    }
}

impl fmt::Display for BbobFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn normalise_name(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for BbobFunction {
    type Err = Error;

    /// Accepts the canonical snake-case names as well as any spelling that
    /// matches after dropping case and separators (`RosenbrockOriginal`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = normalise_name(s);
        Self::ALL
            .iter()
            .copied()
            .find(|f| normalise_name(f.name()) == key)
            .ok_or_else(|| Error::UnknownFunction(s.to_string()))
    }
}

impl TryFrom<String> for BbobFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<BbobFunction> for String {
    fn from(f: BbobFunction) -> String {
        f.name().to_string()
    }
}

const SCHWEFEL_OPT: f64 = 4.209_687_463_3;
const SCHWEFEL_CONST: f64 = 4.189_828_872_724_339;
const LUNACEK_MU0: f64 = 2.5;

fn rosenbrock_scale(dim: usize) -> f64 {
    ((dim as f64).sqrt() / 8.0).max(1.0)
}

/// Gallagher peak set: locations, heights and per-peak diagonal conditioning.
#[derive(Debug, Clone)]
pub struct Peaks {
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub conditioning: Vec<Vec<f64>>,
}

impl Peaks {
    /// Peak 0 is the global optimum at the origin; the remaining peaks are
    /// drawn from a fixed per-(function, dimension) stream.
    fn build(n_peaks: usize, alpha_top: f64, spread: f64, dim: usize) -> Peaks {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a11_a6e2 ^ ((n_peaks as u64) << 32) ^ dim as u64);
        let local = n_peaks - 1;
        let mut alphas: Vec<f64> = (0..local)
            .map(|j| 1000f64.powf(2.0 * j as f64 / (local - 1) as f64))
            .collect();
        alphas.shuffle(&mut rng);

        let mut centers = vec![vec![0.0; dim]];
        let mut weights = vec![10.0];
        let mut conditioning = Vec::with_capacity(n_peaks);
        let diag_for = |alpha: f64, rng: &mut ChaCha8Rng| {
            let mut d = lambda_diag(alpha, dim);
            d.shuffle(rng);
            let norm = alpha.powf(0.25);
            d.iter().map(|v| v / norm).collect::<Vec<_>>()
        };
        conditioning.push(diag_for(alpha_top, &mut rng));
        for (i, &alpha) in alphas.iter().enumerate() {
            centers.push((0..dim).map(|_| rng.random_range(-spread..spread)).collect());
            weights.push(1.1 + 8.0 * i as f64 / (local - 1) as f64);
            conditioning.push(diag_for(alpha, &mut rng));
        }
        Peaks {
            centers,
            weights,
            conditioning,
        }
    }
}

/// Precomputed per-(function, dimension) constants.
#[derive(Debug, Clone)]
pub struct Landscape {
    func: BbobFunction,
    dim: usize,
    lambda: Vec<f64>,
    peaks: Option<Peaks>,
    weierstrass_f0: f64,
}

impl Landscape {
    pub fn new(func: BbobFunction, dim: usize) -> Landscape {
        use BbobFunction::*;
        let alpha = match func {
            Rastrigin | StepEllipsoidal | AttractiveSector | SharpRidge | RastriginF15 | Schaffers
            | Schwefel => 10.0,
            Weierstrass => 0.01,
            SchaffersHighCond => 1000.0,
            Katsuura | LunacekBiRastrigin => 100.0,
            _ => 1.0,
        };
        let peaks = match func {
            Gallagher101Peaks => Some(Peaks::build(101, 1000.0, 5.0, dim)),
            Gallagher21Peaks => Some(Peaks::build(21, 1.0e6, 4.9, dim)),
            _ => None,
        };
        let weierstrass_f0 = (0..12)
            .map(|k| 0.5f64.powi(k) * (PI * 3f64.powi(k)).cos())
            .sum();
        Landscape {
            func,
            dim,
            lambda: lambda_diag(alpha, dim),
            peaks,
            weierstrass_f0,
        }
    }

    pub fn peaks(&self) -> Option<&Peaks> {
        self.peaks.as_ref()
    }

    /// Objective value (optimality gap) at `z`.
    pub fn value(&self, z: &[f64]) -> f64 {
        use BbobFunction::*;
        debug_assert_eq!(z.len(), self.dim);
        let d = self.dim;
        let df = d as f64;
        match self.func {
            Sphere => z.iter().map(|v| v * v).sum(),
            Ellipsoidal | EllipsoidalHighCond => {
                let mut w = z.to_vec();
                t_osz_vec(&mut w);
                w.iter()
                    .enumerate()
                    .map(|(i, v)| 1e6f64.powf(ratio(i, d)) * v * v)
                    .sum()
            }
            Rastrigin | RastriginF15 => {
                let mut w = z.to_vec();
                t_osz_vec(&mut w);
                t_asy(&mut w, 0.2);
                scale_by(&mut w, &self.lambda);
                rastrigin_sum(&w)
            }
            BucheRastrigin => {
                let w: Vec<f64> = z
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let t = t_osz(v);
                        let s = 10f64.powf(0.5 * ratio(i, d));
                        if t > 0.0 && i % 2 == 0 {
                            10.0 * s * t
                        } else {
                            s * t
                        }
                    })
                    .collect();
                rastrigin_sum(&w) + 100.0 * penalty(z)
            }
            LinearSlope => z
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let s = 10f64.powf(ratio(i, d));
                    let zi = if 5.0 * v < 25.0 { v } else { 5.0 };
                    5.0 * s - s * zi
                })
                .sum(),
            AttractiveSector => {
                let mut w = z.to_vec();
                scale_by(&mut w, &self.lambda);
                let sum: f64 = w
                    .iter()
                    .map(|&v| {
                        let s = if v > 0.0 { 100.0 } else { 1.0 };
                        (s * v) * (s * v)
                    })
                    .sum();
                t_osz(sum).powf(0.9)
            }
            StepEllipsoidal => {
                let mut zh = z.to_vec();
                scale_by(&mut zh, &self.lambda);
                let zt: Vec<f64> = zh
                    .iter()
                    .map(|&v| {
                        if v.abs() > 0.5 {
                            (0.5 + v).floor()
                        } else {
                            (0.5 + 10.0 * v).floor() / 10.0
                        }
                    })
                    .collect();
                let sum: f64 = zt
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 100f64.powf(ratio(i, d)) * v * v)
                    .sum();
                0.1 * (zh[0].abs() / 1e4).max(sum) + penalty(z)
            }
            RosenbrockOriginal => {
                let c = rosenbrock_scale(d);
                let w: Vec<f64> = z.iter().map(|v| c * v + 1.0).collect();
                rosenbrock_sum(&w)
            }
            RosenbrockRotated => {
                let c = rosenbrock_scale(d);
                let w: Vec<f64> = z.iter().map(|v| c * v + 0.5).collect();
                rosenbrock_sum(&w)
            }
            Discus => {
                let mut w = z.to_vec();
                t_osz_vec(&mut w);
                1e6 * w[0] * w[0] + w[1..].iter().map(|v| v * v).sum::<f64>()
            }
            BentCigar => {
                let mut w = z.to_vec();
                t_asy(&mut w, 0.5);
                w[0] * w[0] + 1e6 * w[1..].iter().map(|v| v * v).sum::<f64>()
            }
            SharpRidge => {
                let mut w = z.to_vec();
                scale_by(&mut w, &self.lambda);
                w[0] * w[0] + 100.0 * w[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            DifferentPowers => z
                .iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(2.0 + 4.0 * ratio(i, d)))
                .sum::<f64>()
                .sqrt(),
            Weierstrass => {
                let mut w = z.to_vec();
                t_osz_vec(&mut w);
                scale_by(&mut w, &self.lambda);
                let inner: f64 = w
                    .iter()
                    .map(|&v| {
                        (0..12)
                            .map(|k| 0.5f64.powi(k) * (2.0 * PI * 3f64.powi(k) * (v + 0.5)).cos())
                            .sum::<f64>()
                    })
                    .sum();
                10.0 * (inner / df - self.weierstrass_f0).powi(3) + 10.0 / df * penalty(z)
            }
            Schaffers | SchaffersHighCond => {
                let mut w = z.to_vec();
                t_asy(&mut w, 0.5);
                scale_by(&mut w, &self.lambda);
                let mean = w
                    .windows(2)
                    .map(|p| {
                        let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
                        s.sqrt() + s.sqrt() * (50.0 * s.powf(0.2)).sin().powi(2)
                    })
                    .sum::<f64>()
                    / (df - 1.0);
                mean * mean + 10.0 * penalty(z)
            }
            CompositeGrieRosen => {
                let c = rosenbrock_scale(d);
                let w: Vec<f64> = z.iter().map(|v| c * v + 0.5).collect();
                let sum: f64 = w
                    .windows(2)
                    .map(|p| {
                        let s = 100.0 * (p[0] * p[0] - p[1]).powi(2) + (p[0] - 1.0).powi(2);
                        s / 4000.0 - s.cos()
                    })
                    .sum();
                10.0 * sum / (df - 1.0) + 10.0
            }
            Schwefel => {
                let xh: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
                let mut zh = xh.clone();
                for i in 1..d {
                    zh[i] = xh[i] + 0.25 * (xh[i - 1] - SCHWEFEL_OPT);
                }
                let zz: Vec<f64> = zh
                    .iter()
                    .zip(&self.lambda)
                    .map(|(v, l)| 100.0 * (l * (v - SCHWEFEL_OPT) + SCHWEFEL_OPT))
                    .collect();
                let scaled: Vec<f64> = zz.iter().map(|v| v / 100.0).collect();
                -zz.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>() / (100.0 * df)
                    + SCHWEFEL_CONST
                    + 100.0 * penalty(&scaled)
            }
            Gallagher101Peaks | Gallagher21Peaks => {
                let peaks = self.peaks.as_ref().expect("peaks built for Gallagher");
                let best = peaks
                    .centers
                    .iter()
                    .zip(&peaks.weights)
                    .zip(&peaks.conditioning)
                    .map(|((c, w), cond)| {
                        let q: f64 = z
                            .iter()
                            .zip(c)
                            .zip(cond)
                            .map(|((zi, ci), k)| k * (zi - ci) * (zi - ci))
                            .sum();
                        w * (-q / (2.0 * df)).exp()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                t_osz(10.0 - best).powi(2) + penalty(z)
            }
            Katsuura => {
                let mut w = z.to_vec();
                scale_by(&mut w, &self.lambda);
                let expo = 10.0 / df.powf(1.2);
                let prod: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let s: f64 = (1..=32)
                            .map(|j| {
                                let p = 2f64.powi(j);
                                (p * v - (p * v).round()).abs() / p
                            })
                            .sum();
                        (1.0 + (i + 1) as f64 * s).powf(expo)
                    })
                    .product();
                10.0 / (df * df) * prod - 10.0 / (df * df) + penalty(z)
            }
            LunacekBiRastrigin => {
                let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
                let mu1 = -((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / s).sqrt();
                let xh: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
                let a: f64 = xh.iter().map(|v| (v - LUNACEK_MU0).powi(2)).sum();
                let b: f64 = df + s * xh.iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
                let osc: f64 = xh
                    .iter()
                    .zip(&self.lambda)
                    .map(|(v, l)| (2.0 * PI * l * (v - LUNACEK_MU0)).cos())
                    .sum();
                a.min(b) + 10.0 * (df - osc) + 1e4 * penalty(z)
            }
        }
    }
}

fn rastrigin_sum(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    10.0 * (d - z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>())
        + z.iter().map(|v| v * v).sum::<f64>()
}

fn rosenbrock_sum(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|p| 100.0 * (p[0] * p[0] - p[1]).powi(2) + (p[0] - 1.0).powi(2))
        .sum()
}
