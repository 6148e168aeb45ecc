use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};

/// OAM carried by one photon, in units of ħ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OamMode(pub i32);

impl OamMode {
    pub fn ell(self) -> i32 {
        self.0
    }

    pub fn flipped(self) -> Self {
        OamMode(-self.0)
    }

    /// Checks `|ell| <= truncation`.
    pub fn check_truncation(self, truncation: u32) -> Result<Self> {
        if truncation == 0 {
            return Err(SwapError::InvalidArgument("truncation must be at least 1".into()));
        }
        if self.0.unsigned_abs() > truncation {
            return Err(SwapError::InvalidArgument(format!(
                "mode {} exceeds truncation {truncation}",
                self.0
            )));
        }
        Ok(self)
    }
}

impl From<i32> for OamMode {
    fn from(ell: i32) -> Self {
        OamMode(ell)
    }
}

impl fmt::Display for OamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Spatial path of a photon. After the beamsplitter the output ports keep
/// the labels of the input ports they are reflected into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathLabel {
    A,
    B,
    C,
    D,
}

impl PathLabel {
    pub const ALL: [PathLabel; 4] = [PathLabel::A, PathLabel::B, PathLabel::C, PathLabel::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PathLabel::A => "A",
            PathLabel::B => "B",
            PathLabel::C => "C",
            PathLabel::D => "D",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(PathLabel::A),
            "B" => Ok(PathLabel::B),
            "C" => Ok(PathLabel::C),
            "D" => Ok(PathLabel::D),
            other => Err(SwapError::Parse(format!("unknown path label {other:?}"))),
        }
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Occupation of the four paths by photons of given OAM.
///
/// Each path holds a sorted multiset of modes. Before the beamsplitter every
/// occupied path carries exactly one photon; bunched outputs hold two. The
/// ket stands for the normally ordered product of creation operators, so a
/// path holding the same mode twice has squared norm 2 (see
/// [`BasisKet::bosonic_weight`]).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKet {
    slots: [Vec<OamMode>; 4],
}

impl BasisKet {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds a ket from `(path, mode)` pairs; repeated paths accumulate.
    pub fn from_pairs<M: Into<OamMode> + Copy>(pairs: &[(PathLabel, M)]) -> Self {
        pairs
            .iter()
            .fold(Self::vacuum(), |ket, &(p, m)| ket.with(p, m.into()))
    }

    /// Adds one photon.
    pub fn with(mut self, path: PathLabel, mode: OamMode) -> Self {
        let slot = &mut self.slots[path.index()];
        let pos = slot.partition_point(|&m| m <= mode);
        slot.insert(pos, mode);
        self
    }

    pub fn modes(&self, path: PathLabel) -> &[OamMode] {
        &self.slots[path.index()]
    }

    /// Mode in `path` when it holds exactly one photon.
    pub fn mode(&self, path: PathLabel) -> Option<OamMode> {
        match self.modes(path) {
            [m] => Some(*m),
            _ => None,
        }
    }

    pub fn photon_count(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn occupied_paths(&self) -> Vec<PathLabel> {
        PathLabel::ALL
            .into_iter()
            .filter(|p| !self.slots[p.index()].is_empty())
            .collect()
    }

    pub fn is_single_occupancy(&self) -> bool {
        self.slots.iter().all(|s| s.len() <= 1)
    }

    pub fn total_oam(&self) -> i64 {
        self.slots.iter().flatten().map(|m| m.0 as i64).sum()
    }

    /// Keeps only the photons in `paths`.
    pub fn restrict(&self, paths: &[PathLabel]) -> Self {
        let mut out = Self::vacuum();
        for &p in paths {
            out.slots[p.index()] = self.slots[p.index()].clone();
        }
        out
    }

    /// Joins two kets with disjoint occupied paths.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for p in PathLabel::ALL {
            let (mine, theirs) = (&self.slots[p.index()], &other.slots[p.index()]);
            if !mine.is_empty() && !theirs.is_empty() {
                return Err(SwapError::OverlappingPaths(p.to_string()));
            }
            if !theirs.is_empty() {
                out.slots[p.index()] = theirs.clone();
            }
        }
        Ok(out)
    }

    /// Squared norm of the operator-product state this ket denotes:
    /// product over paths and modes of (multiplicity)!.
    pub fn bosonic_weight(&self) -> f64 {
        let mut w = 1.0;
        for slot in &self.slots {
            let mut i = 0;
            while i < slot.len() {
                let mut j = i;
                while j < slot.len() && slot[j] == slot[i] {
                    j += 1;
                }
                w *= (1..=(j - i)).product::<usize>() as f64;
                i = j;
            }
        }
        w
    }

    /// Label such as `A=-1,D=1`; bunched paths list each photon.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for p in PathLabel::ALL {
            for m in self.modes(p) {
                parts.push(format!("{p}={m}"));
            }
        }
        parts.join(",")
    }

    pub fn parse_label(s: &str) -> Result<Self> {
        let mut ket = Self::vacuum();
        if s.is_empty() {
            return Ok(ket);
        }
        for part in s.split(',') {
            let (p, m) = part
                .split_once('=')
                .ok_or_else(|| SwapError::Parse(format!("bad ket label component {part:?}")))?;
            let mode: i32 = m
                .parse()
                .map_err(|_| SwapError::Parse(format!("bad mode in {part:?}")))?;
            ket = ket.with(PathLabel::parse(p)?, OamMode(mode));
        }
        Ok(ket)
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.label())
    }
}
