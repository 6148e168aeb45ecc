//! Detection chain: projector settings, Born probabilities, the visibility
//! noise model, simulated four-fold counts and the HOM dip.

mod counts;
mod hom;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};
use crate::linalg::{self, CMatrix};
use crate::state::{bell_state, BasisKet, BellSign, DensityMatrix, OamMode, PathLabel, PureState};

pub(crate) use counts::poisson;
pub use counts::{
    background_rate, derive_seed, format_records, genuine_fourfold_rate, parse_records, simulate_counts,
    subtract_background, BackgroundRates, CountRecord, NoiseModel, PairRates,
};
pub use hom::{fit_hom_dip, hom_dip_model, synthesize_hom_scan, HomFit, HomParams, HomScan};

/// Two-dimensional OAM subspace `{low, high}` measured on both arms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i32, i32)", into = "(i32, i32)")]
pub struct Subspace {
    low: OamMode,
    high: OamMode,
}

impl Subspace {
    /// Orders the two modes so that `low < high`.
    pub fn new(a: impl Into<OamMode>, b: impl Into<OamMode>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if a == b {
            return Err(SwapError::InvalidArgument(format!("degenerate subspace ({a}, {b})")));
        }
        Ok(Self { low: a.min(b), high: a.max(b) })
    }

    /// The six subspaces of `l ∈ {±1, ±2}` in the order of the results table.
    pub fn standard_six() -> [Subspace; 6] {
        [(-1, 1), (-2, 2), (-2, -1), (-2, 1), (-1, 2), (1, 2)]
            .map(|(a, b)| Subspace::new(a, b).expect("distinct modes"))
    }

    pub fn low(self) -> OamMode {
        self.low
    }

    pub fn high(self) -> OamMode {
        self.high
    }

    pub fn check_truncation(self, truncation: u32) -> Result<Self> {
        self.low.check_truncation(truncation)?;
        self.high.check_truncation(truncation)?;
        Ok(self)
    }

    /// AD kets `|ll>, |lh>, |hl>, |hh>`.
    pub fn basis(self) -> Vec<BasisKet> {
        let (l, h) = (self.low, self.high);
        [(l, l), (l, h), (h, l), (h, h)]
            .iter()
            .map(|&(a, d)| BasisKet::vacuum().with(PathLabel::A, a).with(PathLabel::D, d))
            .collect()
    }

    /// `(|l h> - |h l>)/sqrt(2)` on AD.
    pub fn singlet(self) -> PureState {
        bell_state(self.low, self.high, BellSign::Minus, (PathLabel::A, PathLabel::D))
            .expect("distinct modes")
    }

    pub fn singlet_density(self) -> DensityMatrix {
        DensityMatrix::from_pure_in_basis(&self.singlet(), self.basis()).expect("singlet lies in subspace")
    }

    /// Normalised restriction of `rho` to this subspace.
    pub fn restrict(self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let basis = self.basis();
        let m = CMatrix::from_fn(4, 4, |i, j| rho.element(&basis[i], &basis[j]));
        let tr = linalg::trace(&m).re;
        if tr <= 0.0 {
            return Err(SwapError::ZeroAmplitude(format!("state has no weight in subspace {self}")));
        }
        DensityMatrix::new(basis, m.unscale(tr))
    }
}

impl TryFrom<(i32, i32)> for Subspace {
    type Error = SwapError;
    fn try_from((a, b): (i32, i32)) -> Result<Self> {
        Subspace::new(a, b)
    }
}

impl From<Subspace> for (i32, i32) {
    fn from(s: Subspace) -> Self {
        (s.low.0, s.high.0)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.low, self.high)
    }
}

/// Hologram state displayed on one arm, relative to a subspace `{l1, l2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProjectorSpec {
    /// `|l1>`
    Low,
    /// `|l2>`
    High,
    /// `(|l1> + |l2>)/sqrt(2)`
    Diagonal,
    /// `(|l1> + i|l2>)/sqrt(2)`
    Circular,
}

impl ProjectorSpec {
    pub const ALL: [ProjectorSpec; 4] = [
        ProjectorSpec::Low,
        ProjectorSpec::High,
        ProjectorSpec::Diagonal,
        ProjectorSpec::Circular,
    ];

    /// Components on `(|l1>, |l2>)`.
    pub fn vector(self) -> [Complex64; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            ProjectorSpec::Low => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ProjectorSpec::High => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ProjectorSpec::Diagonal => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            ProjectorSpec::Circular => [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// One projector per arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub subspace: Subspace,
    pub arm_a: ProjectorSpec,
    pub arm_d: ProjectorSpec,
}

impl MeasurementSetting {
    /// Position in the canonical 16-setting list.
    pub fn index(&self) -> usize {
        4 * self.arm_a.index() + self.arm_d.index()
    }

    /// Joint projector vector over [`Subspace::basis`].
    pub fn vector(&self) -> [Complex64; 4] {
        let (a, d) = (self.arm_a.vector(), self.arm_d.vector());
        [a[0] * d[0], a[0] * d[1], a[1] * d[0], a[1] * d[1]]
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.vector())
    }

    /// Identifier such as `-1,1/03`.
    pub fn id(&self) -> String {
        format!("{}/{}{}", self.subspace, self.arm_a.index(), self.arm_d.index())
    }

    pub fn parse_id(s: &str) -> Result<Self> {
        let bad = || SwapError::Parse(format!("bad setting id {s:?}"));
        let (sub, arms) = s.split_once('/').ok_or_else(bad)?;
        let (l, h) = sub.split_once(',').ok_or_else(bad)?;
        let subspace = Subspace::new(
            l.parse::<i32>().map_err(|_| bad())?,
            h.parse::<i32>().map_err(|_| bad())?,
        )?;
        let digits: Vec<usize> = arms
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
            .collect::<Result<_>>()?;
        match digits[..] {
            [a, d] => Ok(Self {
                subspace,
                arm_a: ProjectorSpec::from_index(a).ok_or_else(bad)?,
                arm_d: ProjectorSpec::from_index(d).ok_or_else(bad)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// The 16 product settings of a subspace, arm A outermost.
pub fn tomography_settings(subspace: (i32, i32)) -> Result<Vec<MeasurementSetting>> {
    let subspace = Subspace::new(subspace.0, subspace.1)?;
    Ok(settings_for(subspace))
}

pub fn settings_for(subspace: Subspace) -> Vec<MeasurementSetting> {
    ProjectorSpec::ALL
        .iter()
        .flat_map(|&arm_a| {
            ProjectorSpec::ALL
                .iter()
                .map(move |&arm_d| MeasurementSetting { subspace, arm_a, arm_d })
        })
        .collect()
}

/// Born probability `Tr(rho Π_a ⊗ Π_d)`.
pub fn ideal_probability(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<f64> {
    let basis = setting.subspace.basis();
    let idx: Vec<usize> = basis
        .iter()
        .map(|k| {
            rho.index_of(k)
                .ok_or_else(|| SwapError::BasisMismatch(format!("{k} missing from state basis")))
        })
        .collect::<Result<_>>()?;
    let v = setting.vector();
    let mut p = Complex64::default();
    for i in 0..4 {
        for j in 0..4 {
            p += v[i].conj() * rho.matrix()[(idx[i], idx[j])] * v[j];
        }
    }
    Ok(p.re.clamp(0.0, 1.0))
}

/// `V rho + (1 - V) I/4` on a two-qubit subspace.
pub fn apply_visibility_noise(rho: &DensityMatrix, visibility: f64) -> Result<DensityMatrix> {
    check_visibility(visibility)?;
    if rho.dim() != 4 {
        return Err(SwapError::BasisMismatch(format!(
            "visibility noise acts on a 4-dimensional subspace, got {}",
            rho.dim()
        )));
    }
    let mixed = CMatrix::identity(4, 4).unscale(4.0);
    DensityMatrix::new(
        rho.basis().to_vec(),
        rho.matrix().scale(visibility) + mixed.scale(1.0 - visibility),
    )
}

pub(crate) fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(SwapError::InvalidArgument(format!("visibility {v} outside [0, 1]")));
    }
    Ok(())
}

/// The Werner state `V Psi- + (1 - V) I/4` on a subspace.
pub fn werner(subspace: Subspace, visibility: f64) -> Result<DensityMatrix> {
    apply_visibility_noise(&subspace.singlet_density(), visibility)
}

#[cfg(test)]
mod tests;
