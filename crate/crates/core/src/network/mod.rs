//! Random-feature two-layer networks drawn from the spectral measure of a
//! trigonometric polynomial.

use num_complex::Complex;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barron::barron_norm;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::TrigPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Sigmoid,
    ReluSigmoidal,
    CosineFeature,
}

impl Activation {
    pub fn apply<T: Scalar>(self, t: T) -> T {
        match self {
            Activation::Sigmoid => T::one() / (T::one() + (-t).exp()),
            Activation::ReluSigmoidal => t.max(T::zero()) - (t - T::one()).max(T::zero()),
            Activation::CosineFeature => t.cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unit<T> {
    pub a: Vec<T>,
    pub b: T,
    pub c: T,
}

/// `f_k(x) = Σ_i c_i σ(a_i·x + b_i)`. `k` counts sampled features; the sigmoidal
/// activations spend [`STENCIL`]` + 1` units per feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerNetwork<T> {
    pub k: usize,
    pub activation: Activation,
    pub units: Vec<Unit<T>>,
}

pub const STENCIL: usize = 8;

/// Offset that saturates the logistic to within `e^{-40}` of one.
const SATURATE: f64 = 40.0;

impl<T: Scalar> TwoLayerNetwork<T> {
    pub fn dim(&self) -> usize {
        self.units.first().map_or(0, |u| u.a.len())
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.units
            .iter()
            .map(|u| {
                let t = u.a.iter().zip(x).fold(u.b, |s, (&a, &xi)| s + a * xi);
                u.c * self.activation.apply(t)
            })
            .sum()
    }

    pub fn weight_sum(&self) -> T {
        self.units.iter().map(|u| u.c.abs()).sum()
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// One real cosine ridge `amp·cos(πn·x + phase)` per conjugate pair.
struct Ridge<T> {
    n: Vec<i32>,
    amp: T,
    phase: T,
    weight: T,
}

fn ridges<T: Scalar>(f: &TrigPolynomial<T>) -> Vec<Ridge<T>> {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut out = Vec::new();
    for (n, c) in f.iter() {
        let lead = n.iter().copied().find(|&v| v != 0);
        if lead.is_some_and(|v| v < 0) {
            continue;
        }
        let amp = if lead.is_none() { c.norm() } else { two * c.norm() };
        let nn: i64 = n.iter().map(|&v| (v as i64) * (v as i64)).sum();
        let weight = T::one() + half * T::from_i64(nn).unwrap().sqrt();
        out.push(Ridge {
            n: n.clone(),
            amp,
            phase: c.arg(),
            weight,
        });
    }
    out
}

/// Samples `k` ridges with probability `∝ (1 + ‖n/2‖)·amp` and weights
/// `c_i = C/(k(1 + ‖n/2‖))`, so `E[f_k] = f` and `Σ|c_i| ≤ C` with `C` the Barron norm.
///
/// Sigmoidal activations replace each cosine ridge by a constant unit plus an
/// [`STENCIL`]-knot interpolant of `cos` over the ridge's range on `[0,1]^d`. The ramp
/// `ReLU(t) − ReLU(t−1)` gives the piecewise-linear interpolant, sup error `δ²/8` for
/// knot spacing `δ`; the logistic version adds a smoothing error of order `e^{-4}`
/// per knot. Neither keeps the `2C` budget when the ridge range is wide.
pub fn extract<T: Scalar>(
    f: &TrigPolynomial<T>,
    k: usize,
    seed: u64,
    activation: Activation,
) -> Result<TwoLayerNetwork<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("network width must be at least one".into()));
    }
    if !f.is_real_valued() {
        return Err(Error::InvalidArgument(
            "extraction needs a real-valued polynomial".into(),
        ));
    }
    let r = ridges(f);
    if r.is_empty() {
        return Err(Error::Empty("zero function has no spectral mass to sample".into()));
    }
    let c_total = barron_norm(f);
    if !c_total.is_finite() {
        return Err(Error::NonFinite("Barron norm".into()));
    }
    let probs: Vec<f64> = r.iter().map(|x| (x.weight * x.amp).to_f64_lossy()).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kt = T::from_usize_lossy(k);
    let mut units = Vec::with_capacity(k);
    for _ in 0..k {
        let ridge = &r[dist.sample(&mut rng)];
        let a: Vec<T> = ridge.n.iter().map(|&v| T::PI() * T::from_i32(v).unwrap()).collect();
        let c = c_total / (kt * ridge.weight);
        match activation {
            Activation::CosineFeature => units.push(Unit { a, b: ridge.phase, c }),
            _ => stencil(&mut units, activation, a, ridge.phase, c),
        }
    }
    Ok(TwoLayerNetwork { k, activation, units })
}

/// `c·cos(t)` for `t = a·x + b` over `x ∈ [0,1]^d` as a knot interpolant.
fn stencil<T: Scalar>(units: &mut Vec<Unit<T>>, act: Activation, a: Vec<T>, b: T, c: T) {
    let lo = a.iter().fold(b, |s, &v| s + v.min(T::zero()));
    let hi = a.iter().fold(b, |s, &v| s + v.max(T::zero()));
    let span = (hi - lo).max(T::epsilon());
    let delta = span / T::from_usize_lossy(STENCIL);
    let zeros = vec![T::zero(); a.len()];
    let constant_b = match act {
        Activation::Sigmoid => T::lit(SATURATE),
        _ => T::one(),
    };
    units.push(Unit {
        a: zeros,
        b: constant_b,
        c: c * lo.cos(),
    });
    for j in 0..STENCIL {
        let t0 = lo + delta * T::from_usize_lossy(j);
        let t1 = t0 + delta;
        let jump = c * (t1.cos() - t0.cos());
        // Ramp or logistic step in t, rescaled so one knot spacing maps to the unit interval.
        let (scale, shift) = match act {
            Activation::Sigmoid => (T::lit(8.0) / delta, T::lit(8.0) * (t0 + t1) * T::lit(0.5) / delta),
            _ => (T::one() / delta, t0 / delta),
        };
        units.push(Unit {
            a: a.iter().map(|&v| v * scale).collect(),
            b: b * scale - shift,
            c: jump,
        });
    }
}

/// Mean squared error under the uniform measure, midpoint rule on an `n^d` grid.
pub fn mse<T: Scalar>(net: &TwoLayerNetwork<T>, f: &TrigPolynomial<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    let d = f.dim();
    if !net.units.is_empty() && net.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: net.dim(),
        });
    }
    let total = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let h = T::one() / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let mut x = vec![T::zero(); d];
    let mut acc = T::zero();
    for flat in 0..total {
        let mut r = flat;
        for xi in x.iter_mut().rev() {
            *xi = (T::from_usize_lossy(r % n) + half) * h;
            r /= n;
        }
        let e = f.eval(&x)? - net.eval(&x);
        acc = acc + e * e;
    }
    Ok(acc / T::from_usize_lossy(total))
}

/// Median over seeds of the MSE at each width.
pub fn rate_study<T: Scalar>(
    f: &TrigPolynomial<T>,
    widths: &[usize],
    seeds: &[u64],
    activation: Activation,
    n_quadrature: usize,
) -> Result<Vec<RatePoint>> {
    use rayon::prelude::*;
    widths
        .iter()
        .map(|&k| {
            let runs: Vec<(f64, f64)> = seeds
                .par_iter()
                .map(|&s| {
                    let net = extract(f, k, s, activation)?;
                    Ok((
                        mse(&net, f, n_quadrature)?.to_f64_lossy(),
                        net.weight_sum().to_f64_lossy(),
                    ))
                })
                .collect::<Result<_>>()?;
            let mut errs: Vec<f64> = runs.iter().map(|r| r.0).collect();
            errs.sort_by(f64::total_cmp);
            let median = if errs.len() % 2 == 1 {
                errs[errs.len() / 2]
            } else {
                0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
            };
            Ok(RatePoint {
                k,
                median_mse: median,
                max_weight_sum: runs.iter().map(|r| r.1).fold(0.0, f64::max),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub k: usize,
    pub median_mse: f64,
    pub max_weight_sum: f64,
}

/// Least-squares slope of `log median_mse` against `log k`.
pub fn log_log_slope(points: &[RatePoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.k as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_mse.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub const RATE_CSV_HEADER: &str = "k,median_mse,max_weight_sum";

pub fn rate_csv(points: &[RatePoint]) -> String {
    let mut s = String::from(RATE_CSV_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&format!("{},{:e},{}\n", p.k, p.median_mse, p.max_weight_sum));
    }
    s
}

/// Random real-valued polynomial with zero mean and support in `[−w, w]^d`.
pub fn random_trig<T: Scalar>(dim: usize, w: usize, terms: usize, seed: u64) -> Result<TrigPolynomial<T>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wi = w as i32;
    let mut out = Vec::with_capacity(2 * terms);
    while out.len() < 2 * terms {
        let n: Vec<i32> = (0..dim).map(|_| rng.gen_range(-wi..=wi)).collect();
        if n.iter().all(|&v| v == 0) {
            continue;
        }
        let c = Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
        let neg: Vec<i32> = n.iter().map(|v| -v).collect();
        out.push((n, c));
        out.push((neg, c.conj()));
    }
    TrigPolynomial::from_terms(dim, out, true)
}
