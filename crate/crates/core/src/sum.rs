//! Compensated (Neumaier) summation.

use crate::scalar::Real;

/// Running sum with a Neumaier correction term.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier<F> {
    sum: F,
    comp: F,
}

impl<F: Real> Neumaier<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            comp: F::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.comp
    }
}

impl<F: Real> std::iter::FromIterator<F> for Neumaier<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence.
pub fn sum<F: Real, I: IntoIterator<Item = F>>(xs: I) -> F {
    xs.into_iter().collect::<Neumaier<F>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        assert_eq!(sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn harmonic_tail_matches_reverse_order() {
        let fwd = sum((1..=100_000).map(|k| 1.0 / k as f64));
        let rev = sum((1..=100_000).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 1e-15 * fwd);
    }

    #[test]
    fn works_in_single_precision() {
        let s: f32 = sum((0..1000).map(|_| 0.1f32));
        assert!((s - 100.0).abs() < 1e-4);
    }
}
