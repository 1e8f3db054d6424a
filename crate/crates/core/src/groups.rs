//! Group families over the variables `0..p`.
//!
//! A [`GroupStructure`] is a covering of the variables by possibly
//! overlapping groups, each carrying a strictly positive weight per member.
//! The lattice generator emits every discrete half-space of a 1D/2D/3D grid;
//! zeroing a union of such half-spaces leaves a box (or, with diagonal
//! directions, a convex polygon) as the remaining support.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::error::{Error, Result};

/// One group of variables with its per-member weights `d^G_j`.
///
/// Members are 0-based and kept sorted; `weights[i]` belongs to `members[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    members: Vec<usize>,
    weights: Vec<f64>,
}

impl Group {
    /// Group with unit weights. Duplicated indices are merged.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let weights = vec![1.0; members.len()];
        Group { members, weights }
    }

    /// Group from `(member, weight)` pairs. Members are sorted; a repeated
    /// member keeps its last weight.
    pub fn with_weights(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(j, _)| j);
        let mut members: Vec<usize> = Vec::with_capacity(entries.len());
        let mut weights: Vec<f64> = Vec::with_capacity(entries.len());
        for (j, w) in entries {
            if members.last() == Some(&j) {
                *weights.last_mut().unwrap() = w;
            } else {
                members.push(j);
                weights.push(w);
            }
        }
        Group { members, weights }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    /// Iterates `(member, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.members.iter().copied().zip(self.weights.iter().copied())
    }
}

/// First invariant violated by a candidate group family.
///
/// Indices in the messages are 1-based, matching the groups text format.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
    #[error("group {group} references variable {variable} outside 1..={p}")]
    OutOfRange {
        group: usize,
        variable: usize,
        p: usize,
    },
    #[error("group {group} gives variable {variable} non-positive weight {weight}")]
    NonPositiveWeight {
        group: usize,
        variable: usize,
        weight: f64,
    },
    #[error("variable {variable} is not covered by any group")]
    Uncovered { variable: usize },
    #[error("no groups for p = {p}")]
    NoGroups { p: usize },
}

/// Checks emptiness, range, positivity and coverage, in that order, and
/// reports the first failure.
pub fn validate(groups: &[Group], p: usize) -> std::result::Result<(), Violation> {
    if groups.is_empty() {
        return Err(Violation::NoGroups { p });
    }
    let mut covered = vec![false; p];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Violation::EmptyGroup { group: g + 1 });
        }
        for (j, w) in group.iter() {
            if j >= p {
                return Err(Violation::OutOfRange {
                    group: g + 1,
                    variable: j + 1,
                    p,
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Violation::NonPositiveWeight {
                    group: g + 1,
                    variable: j + 1,
                    weight: w,
                });
            }
            covered[j] = true;
        }
    }
    if let Some(j) = covered.iter().position(|&c| !c) {
        return Err(Violation::Uncovered { variable: j + 1 });
    }
    Ok(())
}

/// A validated covering of `0..p` by weighted groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    p: usize,
    groups: Vec<Group>,
    // For each variable j: (group index, (d^G_j)²) over the groups containing j.
    incidence: Vec<Vec<(usize, f64)>>,
}

impl GroupStructure {
    pub fn new(p: usize, groups: Vec<Group>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("p must be at least 1".into()));
        }
        validate(&groups, p)?;
        let mut incidence = vec![Vec::new(); p];
        for (g, group) in groups.iter().enumerate() {
            for (j, w) in group.iter() {
                incidence[j].push((g, w * w));
            }
        }
        Ok(GroupStructure {
            p,
            groups,
            incidence,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `(group index, squared weight)` for every group containing `j`.
    pub fn groups_containing(&self, j: usize) -> &[(usize, f64)] {
        &self.incidence[j]
    }

    /// Re-checks the invariants against an expected variable count.
    pub fn validate(&self, p: usize) -> std::result::Result<(), Violation> {
        validate(&self.groups, p)
    }

    /// Serializes to the groups text format (`G<id>: j:w ...`, 1-based).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# p={} groups={}", self.p, self.groups.len()).unwrap();
        for (g, group) in self.groups.iter().enumerate() {
            write!(out, "G{}:", g + 1).unwrap();
            for (j, w) in group.iter() {
                write!(out, " {}:{}", j + 1, w).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the groups text format. When `p` is `None` it is taken as the
    /// largest referenced index.
    pub fn from_text(text: &str, p: Option<usize>) -> Result<Self> {
        let mut groups = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |column: usize, message: String| Error::Parse {
                line: lineno + 1,
                column,
                message,
            };
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| parse_err(1, "expected `G<id>:`".into()))?;
            let id = head.trim().strip_prefix('G').ok_or_else(|| {
                parse_err(1, format!("group label `{}` must start with `G`", head.trim()))
            })?;
            id.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad group id `{id}`")))?;
            let mut entries = Vec::new();
            for (t, token) in body.split_whitespace().enumerate() {
                let column = t + 2;
                let (j, w) = token
                    .split_once(':')
                    .ok_or_else(|| parse_err(column, format!("expected `index:weight`, got `{token}`")))?;
                let j: usize = j
                    .parse()
                    .map_err(|_| parse_err(column, format!("bad index `{j}`")))?;
                if j == 0 {
                    return Err(parse_err(column, "indices are 1-based".into()));
                }
                let w: f64 = w
                    .parse()
                    .map_err(|_| parse_err(column, format!("bad weight `{w}`")))?;
                entries.push((j - 1, w));
            }
            groups.push(Group::with_weights(entries));
        }
        let p = match p {
            Some(p) => p,
            None => groups
                .iter()
                .filter_map(|g| g.members().last())
                .max()
                .map(|&j| j + 1)
                .unwrap_or(0),
        };
        GroupStructure::new(p, groups)
    }
}

impl fmt::Display for GroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Direction families for half-space generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `±e_i` for every axis.
    AxisAligned,
    /// `±(e_i + e_j)` and `±(e_i − e_j)` for every pair of axes (π/4 planes).
    Diagonal,
}

/// Lattice geometry with row-major variable layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    dims: Vec<usize>,
    orientations: Vec<Orientation>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, orientations: Vec<Orientation>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidDimension(format!(
                "grids have 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDimension(format!("zero extent in {dims:?}")));
        }
        if orientations.is_empty() {
            return Err(Error::InvalidParameter("orientation set is empty".into()));
        }
        let mut orientations = orientations;
        orientations.dedup();
        Ok(GridSpec { dims, orientations })
    }

    pub fn line(p: usize) -> Result<Self> {
        GridSpec::new(vec![p], vec![Orientation::AxisAligned])
    }

    pub fn grid_2d(height: usize, width: usize) -> Result<Self> {
        GridSpec::new(vec![height, width], vec![Orientation::AxisAligned])
    }

    pub fn grid_3d(a: usize, b: usize, c: usize) -> Result<Self> {
        GridSpec::new(vec![a, b, c], vec![Orientation::AxisAligned])
    }

    /// Adds the π/4 direction family.
    pub fn with_diagonals(mut self) -> Self {
        if !self.orientations.contains(&Orientation::Diagonal) {
            self.orientations.push(Orientation::Diagonal);
        }
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn p(&self) -> usize {
        self.dims.iter().product()
    }

    /// `(height, width)` for 2D grids.
    pub fn as_2d(&self) -> Option<(usize, usize)> {
        match self.dims[..] {
            [h, w] => Some((h, w)),
            _ => None,
        }
    }

    /// Lattice coordinate of a variable index (row-major, last axis fastest).
    pub fn coords(&self, index: usize) -> Vec<i64> {
        let mut rest = index;
        let mut out = vec![0i64; self.dims.len()];
        for (axis, &d) in self.dims.iter().enumerate().rev() {
            out[axis] = (rest % d) as i64;
            rest /= d;
        }
        out
    }

    pub fn index(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&c, &d)| acc * d + c as usize)
    }

    /// Direction vectors in generation order.
    pub fn directions(&self) -> Vec<Vec<i64>> {
        let n = self.dims.len();
        let unit = |i: usize| {
            let mut v = vec![0i64; n];
            v[i] = 1;
            v
        };
        let neg = |v: &[i64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let mut out = Vec::new();
        for orientation in &self.orientations {
            match orientation {
                Orientation::AxisAligned => {
                    for i in 0..n {
                        let e = unit(i);
                        out.push(neg(&e));
                        out.push(e);
                    }
                }
                Orientation::Diagonal => {
                    for i in 0..n {
                        for j in i + 1..n {
                            let mut sum = vec![0i64; n];
                            sum[i] = 1;
                            sum[j] = 1;
                            let mut diff = vec![0i64; n];
                            diff[i] = 1;
                            diff[j] = -1;
                            out.push(neg(&sum));
                            out.push(sum);
                            out.push(neg(&diff));
                            out.push(diff);
                        }
                    }
                }
            }
        }
        out
    }
}

/// All singletons `{j}` with unit weight; `Ω` is then the ℓ1 norm.
pub fn make_singletons(p: usize) -> Result<GroupStructure> {
    if p == 0 {
        return Err(Error::InvalidDimension("p must be at least 1".into()));
    }
    GroupStructure::new(p, (0..p).map(|j| Group::new([j])).collect())
}

/// Every nontrivial discrete half-space `{x : ⟨u, x⟩ ≥ c}` of the grid, for
/// each direction `u` of the grid's orientation set and each threshold `c`
/// that yields a nonempty proper subset. Identical member sets are emitted
/// once. Weights are 1.
pub fn make_halfspace_groups(grid: &GridSpec) -> Result<GroupStructure> {
    let p = grid.p();
    let coords: Vec<Vec<i64>> = (0..p).map(|j| grid.coords(j)).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut groups = Vec::new();
    for u in grid.directions() {
        let proj: Vec<i64> = coords
            .iter()
            .map(|x| x.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect();
        let mut levels = proj.clone();
        levels.sort_unstable();
        levels.dedup();
        // The lowest level selects everything.
        for &c in levels.iter().skip(1) {
            let members: Vec<usize> = (0..p).filter(|&j| proj[j] >= c).collect();
            if seen.insert(members.clone()) {
                groups.push(Group::new(members));
            }
        }
    }
    if groups.is_empty() {
        // A single-cell grid has no proper half-space.
        groups.push(Group::new(0..p));
    }
    GroupStructure::new(p, groups)
}
