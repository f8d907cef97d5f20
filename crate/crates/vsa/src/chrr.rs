//! Circular holographic reduced representations.
//!
//! Each symbol is a vector of angles in (-pi, pi], one per slot, read as
//! points on the complex unit circle. Binding adds angles modulo 2*pi,
//! unbinding negates, similarity averages the cosines of the slotwise
//! differences, and superposition takes the angle of the phasor sum.
//! Every operation returns canonical angles, so vectors stay unitary by
//! construction; no projection step is needed and no transform is
//! involved.

use std::f64::consts::PI;

use crate::error::VsaError;
use crate::seed::SeededRng;
use crate::Result;

const TWO_PI: f64 = 2.0 * PI;

/// Phasor sums below this magnitude have no meaningful direction; the
/// superposition falls back to angle 0.
const DEGENERATE_SUM_FLOOR: f64 = 1e-12;

/// Map a finite angle into the canonical interval (-pi, pi]. Inputs
/// already in the interval are returned bit-for-bit.
pub(crate) fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    // rem_euclid lands in [0, 2*pi], the upper end reachable through
    // rounding of tiny negative inputs.
    let r = angle.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Canonicalize an angle into (-pi, pi]; exactly -pi maps to pi.
/// Errors on non-finite input.
pub fn canonicalize(angle: f64) -> Result<f64> {
    if !angle.is_finite() {
        return Err(VsaError::NonFiniteAngle(angle));
    }
    Ok(wrap_angle(angle))
}

/// A d-dimensional vector of canonical angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularVector {
    angles: Vec<f64>,
}

impl CircularVector {
    /// Wrap raw angles, canonicalizing each into (-pi, pi]. Rejects
    /// empty or non-finite input.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(VsaError::EmptyDimension);
        }
        let mut canonical = angles;
        for a in &mut canonical {
            *a = canonicalize(*a)?;
        }
        Ok(Self { angles: canonical })
    }

    /// The all-zero vector: the identity of binding.
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(VsaError::EmptyDimension);
        }
        Ok(Self {
            angles: vec![0.0; dim],
        })
    }

    /// Draw each angle i.i.d. uniform on (-pi, pi].
    pub fn sample_uniform(dim: usize, rng: &mut SeededRng) -> Result<Self> {
        use rand_distr::{Distribution, Uniform};
        if dim == 0 {
            return Err(VsaError::EmptyDimension);
        }
        let uniform = Uniform::new(-PI, PI);
        Ok(Self {
            // The draw is on [-pi, pi); wrapping sends the -pi endpoint
            // to pi, giving the canonical interval.
            angles: (0..dim).map(|_| wrap_angle(uniform.sample(rng))).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn into_angles(self) -> Vec<f64> {
        self.angles
    }

    /// Slotwise angle addition modulo 2*pi.
    pub fn bind(&self, other: &CircularVector) -> Result<CircularVector> {
        self.check_dim(other)?;
        Ok(CircularVector {
            angles: self
                .angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| wrap_angle(a + b))
                .collect(),
        })
    }

    /// Slotwise negation; the group inverse of binding.
    pub fn invert(&self) -> CircularVector {
        CircularVector {
            angles: self.angles.iter().map(|a| wrap_angle(-a)).collect(),
        }
    }

    /// Mean cosine of the slotwise angle differences, in [-1, 1].
    pub fn similarity(&self, other: &CircularVector) -> Result<f64> {
        self.check_dim(other)?;
        let sum: f64 = self
            .angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| (a - b).cos())
            .sum();
        Ok(sum / self.dim() as f64)
    }

    /// Slotwise angle of the sum of the two unit phasors; the magnitude
    /// of the sum is discarded. Commutative but not associative, so
    /// multi-item combination goes through [`superpose_many`].
    pub fn superpose(&self, other: &CircularVector) -> Result<CircularVector> {
        self.check_dim(other)?;
        let angles = self
            .angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| phasor_sum_angle(&[*a, *b]))
            .collect();
        Ok(CircularVector { angles })
    }

    fn check_dim(&self, other: &CircularVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(VsaError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Angle of the sum of unit phasors, with the degenerate fallback.
fn phasor_sum_angle(angles: &[f64]) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for a in angles {
        re += a.cos();
        im += a.sin();
    }
    if (re * re + im * im).sqrt() < DEGENERATE_SUM_FLOOR {
        0.0
    } else {
        wrap_angle(im.atan2(re))
    }
}

/// Superpose a whole list in one pass: each slot takes the angle of the
/// sum of all unit phasors, accumulated in input order. A single input
/// vector is returned unchanged.
pub fn superpose_many(vectors: &[CircularVector]) -> Result<CircularVector> {
    let first = vectors.first().ok_or(VsaError::EmptySuperposition)?;
    if vectors.len() == 1 {
        return Ok(first.clone());
    }
    let dim = first.dim();
    for v in &vectors[1..] {
        if v.dim() != dim {
            return Err(VsaError::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
    }
    let mut re = vec![0.0f64; dim];
    let mut im = vec![0.0f64; dim];
    for v in vectors {
        for (j, a) in v.angles.iter().enumerate() {
            re[j] += a.cos();
            im[j] += a.sin();
        }
    }
    let angles = re
        .iter()
        .zip(&im)
        .map(|(&x, &y)| {
            if (x * x + y * y).sqrt() < DEGENERATE_SUM_FLOOR {
                0.0
            } else {
                wrap_angle(y.atan2(x))
            }
        })
        .collect();
    Ok(CircularVector { angles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn is_canonical(v: &CircularVector) -> bool {
        v.angles().iter().all(|&a| a > -PI && a <= PI)
    }

    #[test]
    fn canonicalize_fixtures() {
        assert!((canonicalize(3.0 * PI / 2.0).unwrap() + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(canonicalize(-PI).unwrap(), PI);
        assert_eq!(canonicalize(PI).unwrap(), PI);
        assert_eq!(canonicalize(0.0).unwrap(), 0.0);
        assert!(matches!(
            canonicalize(f64::NAN),
            Err(VsaError::NonFiniteAngle(_))
        ));
        assert!(matches!(
            canonicalize(f64::INFINITY),
            Err(VsaError::NonFiniteAngle(_))
        ));
    }

    #[test]
    fn canonicalize_lands_in_interval() {
        let mut rng = rng_from_seed(5);
        use rand::Rng;
        for _ in 0..10_000 {
            let raw: f64 = rng.gen_range(-50.0..50.0);
            let c = canonicalize(raw).unwrap();
            assert!(c > -PI && c <= PI, "{} -> {}", raw, c);
            // Wrapping is a no-op on already-canonical values.
            assert_eq!(wrap_angle(c), c);
        }
        // Tiny negatives whose 2*pi shift rounds to 2*pi exactly.
        let c = canonicalize(-1e-300).unwrap();
        assert!(c > -PI && c <= PI);
    }

    #[test]
    fn sampling_is_deterministic_and_canonical() {
        let a = CircularVector::sample_uniform(64, &mut rng_from_seed(2)).unwrap();
        let b = CircularVector::sample_uniform(64, &mut rng_from_seed(2)).unwrap();
        assert_eq!(a, b);
        assert!(is_canonical(&a));
        assert!(matches!(
            CircularVector::sample_uniform(0, &mut rng_from_seed(2)),
            Err(VsaError::EmptyDimension)
        ));
    }

    #[test]
    fn sample_cosine_mean_is_near_zero() {
        let v = CircularVector::sample_uniform(10_000, &mut rng_from_seed(9)).unwrap();
        let mean: f64 = v.angles().iter().map(|a| a.cos()).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "mean cos {}", mean);
    }

    #[test]
    fn bind_identity_and_fixture() {
        let phi = CircularVector::sample_uniform(16, &mut rng_from_seed(4)).unwrap();
        let zero = CircularVector::zero(16).unwrap();
        assert_eq!(phi.bind(&zero).unwrap(), phi);

        let half = CircularVector::new(vec![FRAC_PI_2]).unwrap();
        let bound = half.bind(&half).unwrap();
        assert_eq!(bound.angles()[0], PI);
    }

    #[test]
    fn bind_group_laws() {
        let mut rng = rng_from_seed(13);
        for _ in 0..1000 {
            let phi = CircularVector::sample_uniform(8, &mut rng).unwrap();
            let theta = CircularVector::sample_uniform(8, &mut rng).unwrap();
            let psi = CircularVector::sample_uniform(8, &mut rng).unwrap();

            // Inverse: phi (x) theta (x) theta^-1 == phi.
            let round = phi.bind(&theta).unwrap().bind(&theta.invert()).unwrap();
            for (a, b) in round.angles().iter().zip(phi.angles()) {
                let mut diff = (a - b).abs();
                if diff > PI {
                    diff = TWO_PI - diff;
                }
                assert!(diff < 1e-12, "inverse law violated by {}", diff);
            }

            // Commutativity is exact: same float additions.
            assert_eq!(phi.bind(&theta).unwrap(), theta.bind(&phi).unwrap());

            // Associativity up to canonicalization.
            let left = phi.bind(&theta).unwrap().bind(&psi).unwrap();
            let right = phi.bind(&theta.bind(&psi).unwrap()).unwrap();
            for (a, b) in left.angles().iter().zip(right.angles()) {
                let mut diff = (a - b).abs();
                if diff > PI {
                    diff = TWO_PI - diff;
                }
                assert!(diff < 1e-12, "associativity violated by {}", diff);
            }
            assert!(is_canonical(&left) && is_canonical(&right));
        }
    }

    #[test]
    fn invert_fixtures() {
        let zero = CircularVector::zero(4).unwrap();
        assert_eq!(zero.invert(), zero);

        let pi_vec = CircularVector::new(vec![PI]).unwrap();
        assert_eq!(pi_vec.invert().angles()[0], PI);

        let theta = CircularVector::sample_uniform(32, &mut rng_from_seed(6)).unwrap();
        assert_eq!(theta.invert().invert(), theta);
    }

    #[test]
    fn similarity_fixtures() {
        let phi = CircularVector::sample_uniform(128, &mut rng_from_seed(3)).unwrap();
        assert_eq!(phi.similarity(&phi).unwrap(), 1.0);

        let shifted = phi
            .bind(&CircularVector::new(vec![PI; 128]).unwrap())
            .unwrap();
        assert!((phi.similarity(&shifted).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_vectors_are_nearly_orthogonal() {
        let mut rng = rng_from_seed(42);
        let mut violations = 0;
        for _ in 0..1000 {
            let a = CircularVector::sample_uniform(1024, &mut rng).unwrap();
            let b = CircularVector::sample_uniform(1024, &mut rng).unwrap();
            if a.similarity(&b).unwrap().abs() >= 0.15 {
                violations += 1;
            }
        }
        assert!(violations <= 10, "{} of 1000 trials exceeded 0.15", violations);
    }

    #[test]
    fn binding_preserves_similarity() {
        let mut rng = rng_from_seed(17);
        let phi = CircularVector::sample_uniform(64, &mut rng).unwrap();
        let theta = CircularVector::sample_uniform(64, &mut rng).unwrap();
        let psi = CircularVector::sample_uniform(64, &mut rng).unwrap();
        let before = phi.similarity(&theta).unwrap();
        let after = phi
            .bind(&psi)
            .unwrap()
            .similarity(&theta.bind(&psi).unwrap())
            .unwrap();
        // cosines of identical slot differences, up to wrap rounding
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn superpose_fixtures() {
        let phi = CircularVector::sample_uniform(32, &mut rng_from_seed(8)).unwrap();
        let doubled = phi.superpose(&phi).unwrap();
        for (a, b) in doubled.angles().iter().zip(phi.angles()) {
            assert!((a - b).abs() < 1e-12);
        }

        let a = CircularVector::new(vec![0.0]).unwrap();
        let b = CircularVector::new(vec![FRAC_PI_2]).unwrap();
        assert!((a.superpose(&b).unwrap().angles()[0] - FRAC_PI_4).abs() < 1e-12);

        // Opposite phasors cancel; the fallback angle is 0.
        let c = CircularVector::new(vec![PI]).unwrap();
        assert_eq!(a.superpose(&c).unwrap().angles()[0], 0.0);
    }

    #[test]
    fn superpose_many_fixtures() {
        let phi = CircularVector::sample_uniform(16, &mut rng_from_seed(30)).unwrap();

        let single = superpose_many(std::slice::from_ref(&phi)).unwrap();
        assert_eq!(single, phi);

        let triple = superpose_many(&[phi.clone(), phi.clone(), phi.clone()]).unwrap();
        for (a, b) in triple.angles().iter().zip(phi.angles()) {
            assert!((a - b).abs() < 1e-12);
        }

        let fan = [
            CircularVector::new(vec![-FRAC_PI_2]).unwrap(),
            CircularVector::new(vec![0.0]).unwrap(),
            CircularVector::new(vec![FRAC_PI_2]).unwrap(),
        ];
        assert_eq!(superpose_many(&fan).unwrap().angles()[0], 0.0);

        assert!(matches!(
            superpose_many(&[]),
            Err(VsaError::EmptySuperposition)
        ));
    }

    #[test]
    fn superposition_stays_unitary() {
        // Circular superposition always returns canonical angles (points
        // on the unit circle), unlike the real-vector algebra where
        // superposing projected vectors breaks the unit spectrum.
        let mut rng = rng_from_seed(50);
        let vs: Vec<CircularVector> = (0..20)
            .map(|_| CircularVector::sample_uniform(64, &mut rng).unwrap())
            .collect();
        let sum = superpose_many(&vs).unwrap();
        assert!(is_canonical(&sum));
    }
}
