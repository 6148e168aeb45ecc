use std::collections::BTreeMap;

use num_complex::Complex64;

use super::ket::{BasisKet, PathLabel};
use crate::error::{Result, SwapError};

/// Amplitudes below this magnitude are dropped when a state is assembled.
pub const PRUNE_EPS: f64 = 1e-15;

/// Sparse superposition of basis kets with a common photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    terms: BTreeMap<BasisKet, Complex64>,
    photon_count: usize,
}

impl PureState {
    /// Collects terms, summing repeated kets and dropping vanishing ones.
    pub fn from_terms(terms: impl IntoIterator<Item = (BasisKet, Complex64)>) -> Result<Self> {
        let mut map: BTreeMap<BasisKet, Complex64> = BTreeMap::new();
        let mut photon_count = None;
        for (ket, amp) in terms {
            let n = ket.photon_count();
            match photon_count {
                None => photon_count = Some(n),
                Some(m) if m != n => {
                    return Err(SwapError::InvalidArgument(format!(
                        "mixed photon numbers {m} and {n} in one state"
                    )))
                }
                _ => {}
            }
            *map.entry(ket).or_default() += amp;
        }
        map.retain(|_, a| a.norm() > PRUNE_EPS);
        Ok(Self {
            terms: map,
            photon_count: photon_count.unwrap_or(0),
        })
    }

    pub fn terms(&self) -> &BTreeMap<BasisKet, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, ket: &BasisKet) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Union of paths occupied by any ket.
    pub fn occupied_paths(&self) -> Vec<PathLabel> {
        PathLabel::ALL
            .into_iter()
            .filter(|&p| self.terms.keys().any(|k| !k.modes(p).is_empty()))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, a)| a.norm_sqr() * k.bosonic_weight())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= PRUNE_EPS {
            return Err(SwapError::ZeroAmplitude("cannot normalise a null state".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, a)| (k.clone(), a * factor)).collect(),
            photon_count: self.photon_count,
        }
    }

    /// Keeps only kets satisfying `pred`, without renormalising.
    pub fn filter(&self, pred: impl Fn(&BasisKet) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| pred(k))
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
            photon_count: self.photon_count,
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: Complex64) -> Result<Self> {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(k, a)| (k.clone(), *a))
                .chain(other.terms.iter().map(|(k, a)| (k.clone(), a * factor))),
        )
    }

    /// Relabels every photon's path.
    pub fn map_paths(&self, f: impl Fn(PathLabel) -> PathLabel) -> Result<Self> {
        Self::from_terms(self.terms.iter().map(|(k, a)| {
            let mut out = BasisKet::vacuum();
            for p in PathLabel::ALL {
                for &m in k.modes(p) {
                    out = out.with(f(p), m);
                }
            }
            (out, *a)
        }))
    }
}
