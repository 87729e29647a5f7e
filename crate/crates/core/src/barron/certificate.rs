use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{SineFunction, TrigPolynomial};

/// `Σ_n (1 + ‖n/2‖₂)|ĉ_n|` over the lattice support.
pub fn barron_norm<T: Scalar>(a: &TrigPolynomial<T>) -> T {
    let half = T::lit(0.5);
    a.iter()
        .map(|(n, c)| {
            let nn: i64 = n.iter().map(|&v| (v as i64) * (v as i64)).sum();
            (T::one() + half * T::from_i64(nn).unwrap().sqrt()) * c.norm()
        })
        .sum()
}

/// Barron norm of a sine series through its lattice embedding.
///
/// Each mode spreads over `2^d` lattice points of magnitude `|c|/2^d` at
/// effective frequency `‖ω‖/2`, so this reduces to `Σ_ω |c_ω| (1 + ‖ω‖/2)`.
pub fn sine_barron_norm<T: Scalar>(f: &SineFunction<T>) -> T {
    let half = T::lit(0.5);
    f.iter()
        .map(|(idx, c)| c.abs() * (T::one() + half * T::from_u64(idx.norm_sq()).unwrap().sqrt()))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Computed,
    BoundPropagated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailRecord {
    pub rule: String,
    pub inputs: Vec<f64>,
}

/// A Barron norm value with the bandlimit it applies to and the rules that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct BarronCertificate<T> {
    value: T,
    bandlimit: T,
    provenance: Provenance,
    trail: Vec<TrailRecord>,
}

impl<T: Scalar> BarronCertificate<T> {
    fn build(value: T, bandlimit: T, provenance: Provenance, trail: Vec<TrailRecord>) -> Result<Self> {
        if value.is_nan() || value < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "certificate value must be nonnegative, got {value}"
            )));
        }
        if bandlimit.is_nan() || bandlimit <= T::zero() {
            return Err(Error::InvalidArgument(format!(
                "certificate bandlimit must be positive, got {bandlimit}"
            )));
        }
        Ok(Self {
            value,
            bandlimit,
            provenance,
            trail,
        })
    }

    /// A user-asserted bound.
    pub fn bound(value: T, bandlimit: T) -> Result<Self> {
        Self::build(
            value,
            bandlimit,
            Provenance::BoundPropagated,
            vec![TrailRecord {
                rule: "assume".into(),
                inputs: vec![saturate(value.to_f64_lossy()), saturate(bandlimit.to_f64_lossy())],
            }],
        )
    }

    pub fn computed(a: &TrigPolynomial<T>) -> Self {
        let value = barron_norm(a);
        let w = T::from_usize_lossy(a.radius().max(1));
        Self {
            value,
            bandlimit: w,
            provenance: Provenance::Computed,
            trail: vec![TrailRecord {
                rule: "computed".into(),
                inputs: vec![value.to_f64_lossy()],
            }],
        }
    }

    pub fn from_sine(f: &SineFunction<T>) -> Self {
        let value = sine_barron_norm(f);
        Self {
            value,
            bandlimit: T::from_usize_lossy(f.bandlimit()),
            provenance: Provenance::Computed,
            trail: vec![TrailRecord {
                rule: "computed".into(),
                inputs: vec![value.to_f64_lossy()],
            }],
        }
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn bandlimit(&self) -> T {
        self.bandlimit
    }

    /// Bandlimit rounded up, for attaching to a concrete sine series.
    pub fn integer_bandlimit(&self) -> usize {
        self.bandlimit.ceil().to_usize().unwrap_or(usize::MAX)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn trail(&self) -> &[TrailRecord] {
        &self.trail
    }

    pub fn cast<U: Scalar>(&self) -> BarronCertificate<U> {
        BarronCertificate {
            value: U::lit(self.value.to_f64_lossy()),
            bandlimit: U::lit(self.bandlimit.to_f64_lossy()),
            provenance: self.provenance,
            trail: self.trail.clone(),
        }
    }

    pub(crate) fn derive(&self, others: &[&Self], rule: &str, inputs: &[T], value: T, bandlimit: T) -> Self {
        let mut trail = self.trail.clone();
        for o in others {
            trail.extend(o.trail.iter().cloned());
        }
        trail.push(TrailRecord {
            rule: rule.into(),
            inputs: inputs.iter().map(|v| saturate(v.to_f64_lossy())).collect(),
        });
        Self {
            value,
            bandlimit,
            provenance: Provenance::BoundPropagated,
            trail,
        }
    }
}

/// `‖g₁ + g₂‖ ≤ ‖g₁‖ + ‖g₂‖`, bandlimit `max`.
pub fn bound_add<T: Scalar>(a: &BarronCertificate<T>, b: &BarronCertificate<T>) -> BarronCertificate<T> {
    a.derive(
        &[b],
        "add",
        &[a.value, b.value],
        a.value + b.value,
        a.bandlimit.max(b.bandlimit),
    )
}

/// `‖g₁ g₂‖ ≤ ‖g₁‖ ‖g₂‖`, bandlimits add.
pub fn bound_mul<T: Scalar>(a: &BarronCertificate<T>, b: &BarronCertificate<T>) -> BarronCertificate<T> {
    a.derive(
        &[b],
        "mul",
        &[a.value, b.value],
        a.value * b.value,
        a.bandlimit + b.bandlimit,
    )
}

/// `‖∂_i g‖ ≤ 2πW ‖g‖` for `g ∈ Γ_W`.
pub fn bound_derivative<T: Scalar>(a: &BarronCertificate<T>, w: T) -> BarronCertificate<T> {
    a.derive(
        &[],
        "derivative",
        &[a.value, w],
        T::lit(2.0) * T::PI() * w * a.value,
        a.bandlimit,
    )
}

/// `‖(I − Δ)^{-1} g‖ ≤ ‖g‖`.
pub fn bound_precondition<T: Scalar>(a: &BarronCertificate<T>) -> BarronCertificate<T> {
    a.derive(&[], "precondition", &[a.value], a.value, a.bandlimit)
}

/// Composition with a degree-`P` polynomial in `d` variables:
/// `‖f∘g‖ ≤ d^{P/2} (Σ A_α²)^{1/2} ‖g‖^P`, and `f∘g ∈ Γ_{PW}`.
pub fn poly_composition_bound<T: Scalar>(
    coeffs: &[T],
    degree: u32,
    dim: usize,
    g: &BarronCertificate<T>,
) -> BarronCertificate<T> {
    let p = T::from_u32(degree).unwrap();
    let a_norm = coeffs.iter().map(|&a| a * a).sum::<T>().sqrt();
    let value = T::from_usize_lossy(dim).powf(p / T::lit(2.0)) * a_norm * g.value.powi(degree as i32);
    let w = g.bandlimit * T::from_u32(degree.max(1)).unwrap();
    let inputs = [p, T::from_usize_lossy(dim), a_norm, g.value];
    g.derive(&[], "poly-composition", &inputs, value, w)
}

#[derive(Serialize, Deserialize)]
struct CertificateWire {
    value: Option<f64>,
    #[serde(rename = "W")]
    w: Option<f64>,
    provenance: Provenance,
    trail: Vec<TrailRecord>,
}

/// Trail inputs are audit data; overflowed values are clamped to `±f64::MAX` so the
/// ledger stays valid JSON.
fn saturate(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

// Non-finite values (overflowed ledgers) serialize as null and read back as +inf.
impl<T: Scalar> Serialize for BarronCertificate<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateWire {
            value: finite_or_none(self.value.to_f64_lossy()),
            w: finite_or_none(self.bandlimit.to_f64_lossy()),
            provenance: self.provenance,
            trail: self.trail.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for BarronCertificate<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = CertificateWire::deserialize(d)?;
        BarronCertificate::build(
            T::lit(w.value.unwrap_or(f64::INFINITY)),
            T::lit(w.w.unwrap_or(f64::INFINITY)),
            w.provenance,
            w.trail,
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::embed_sine_to_trig;
    use std::f64::consts::PI;

    fn embed(omega: &[u32]) -> TrigPolynomial<f64> {
        embed_sine_to_trig(&SineFunction::<f64>::mode(omega, 1.0).unwrap())
    }

    #[test]
    fn norm_examples() {
        assert!((barron_norm(&embed(&[3])) - 2.5).abs() < 1e-15);
        assert_eq!(barron_norm(&TrigPolynomial::<f64>::zero(2)), 0.0);
        assert!((barron_norm(&embed(&[3, 4])) - 3.5).abs() < 1e-15);
    }

    #[test]
    fn sine_shortcut_agrees_with_embedding() {
        let f = SineFunction::<f64>::mode(&[3, 4], -2.0).unwrap();
        let g = SineFunction::<f64>::mode(&[1, 2], 0.5).unwrap();
        let h = f.add(&g).unwrap();
        assert!((sine_barron_norm(&h) - barron_norm(&embed_sine_to_trig(&h))).abs() < 1e-14);
    }

    #[test]
    fn algebra_examples() {
        let a = BarronCertificate::<f64>::computed(&embed(&[3]));
        let m = bound_mul(&a, &a);
        assert!((m.value() - 6.25).abs() < 1e-14);
        assert_eq!(m.bandlimit(), 6.0);
        let sq = embed(&[3]).multiply(&embed(&[3])).unwrap();
        assert!(barron_norm(&sq) <= m.value());

        let z = BarronCertificate::<f64>::bound(0.0, 1.0).unwrap();
        assert_eq!(bound_add(&a, &z).value(), a.value());

        let d = bound_derivative(&a, 3.0);
        assert!((d.value() - 15.0 * PI).abs() < 1e-12);
        let dd = embed(&[3]).derivative(0).unwrap();
        assert!(barron_norm(&dd) <= d.value());

        assert_eq!(bound_precondition(&a).value(), a.value());
        assert_eq!(m.provenance(), Provenance::BoundPropagated);
        assert_eq!(m.trail().last().unwrap().rule, "mul");
    }

    #[test]
    fn poly_composition_examples() {
        let g = BarronCertificate::<f64>::bound(2.5, 3.0).unwrap();
        let id = poly_composition_bound(&[1.0], 1, 1, &g);
        assert!((id.value() - 2.5).abs() < 1e-15);
        assert_eq!(id.bandlimit(), 3.0);

        let sq = poly_composition_bound(&[1.0], 2, 1, &g);
        assert!((sq.value() - 6.25).abs() < 1e-14);
        assert_eq!(sq.bandlimit(), 6.0);

        let unit = BarronCertificate::<f64>::bound(1.0, 1.0).unwrap();
        let two = poly_composition_bound(&[1.0, 1.0], 2, 2, &unit);
        assert!((two.value() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((two.value() - 2.828).abs() < 1e-3);
    }

    #[test]
    fn squared_mode_against_composition_bound() {
        let f = SineFunction::<f64>::mode(&[3], 1.0).unwrap();
        let t = embed_sine_to_trig(&f);
        let g = BarronCertificate::<f64>::from_sine(&f);
        let bound = poly_composition_bound(&[1.0], 2, 1, &g);
        let exact = t.multiply(&t).unwrap();
        assert!(barron_norm(&exact) <= bound.value());
        assert!(exact.radius() as f64 <= bound.bandlimit());
    }

    #[test]
    fn invariants_enforced() {
        assert!(BarronCertificate::<f64>::bound(-1.0, 1.0).is_err());
        assert!(BarronCertificate::<f64>::bound(1.0, 0.0).is_err());
    }

    #[test]
    fn json_shape() {
        let a = BarronCertificate::<f64>::bound(2.0, 3.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(bound_add(&a, &a)).unwrap();
        assert_eq!(v["value"], 4.0);
        assert_eq!(v["W"], 3.0);
        assert_eq!(v["trail"].as_array().unwrap().len(), 3);
        assert_eq!(v["trail"][2]["rule"], "add");
        let back: BarronCertificate<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back.value(), 4.0);
        let inf = BarronCertificate::<f64>::bound(f64::INFINITY, 2.0).unwrap();
        let s = serde_json::to_string(&inf).unwrap();
        let back: BarronCertificate<f64> = serde_json::from_str(&s).unwrap();
        assert!(back.value().is_infinite());
    }
}
