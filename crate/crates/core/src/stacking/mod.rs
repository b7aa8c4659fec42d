//! Satellite insertions and stacked central configurations: a central
//! configuration that stays central after one or two satellites are placed
//! inside its gaps, with the original satellites keeping their masses.
//!
//! Gap and satellite indices are 0-based. Satellite `i` starts gap `i`.

mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::StackingError;
use crate::model::{residual, Configuration, DihedralMap, MassVector};
use crate::solver::CentralSolution;

pub use search::{
    random_mass_bases, search_fixed_base, search_stacked, search_stacked_with, theorem_two_spot_check,
    MassMode, SearchOptions, STACK_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    OneAddition,
    TwoSameGap,
    TwoSeparatedByOne,
    TwoDistant,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::OneAddition,
        Scenario::TwoSameGap,
        Scenario::TwoSeparatedByOne,
        Scenario::TwoDistant,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::OneAddition => "one_addition",
            Scenario::TwoSameGap => "two_same_gap",
            Scenario::TwoSeparatedByOne => "two_separated_by_one",
            Scenario::TwoDistant => "two_distant",
        }
    }

    pub fn added(&self) -> usize {
        match self {
            Scenario::OneAddition => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = StackingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| StackingError::InvalidSpec(format!("unknown scenario {s:?}")))
    }
}

/// Number of original satellites strictly between two distinct gaps, the
/// shorter way round.
pub fn gap_separation(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// Where new satellites go: one gap split once, one gap split twice, or two
/// gaps split once each. A single split at fraction `t` cuts `θ` into
/// `tθ, (1-t)θ`; a double split cuts it into `t₁θ, t₂θ, (1-t₁-t₂)θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionSpec {
    gaps: Vec<usize>,
    fractions: Vec<f64>,
}

impl InsertionSpec {
    pub fn new(gaps: Vec<usize>, fractions: Vec<f64>) -> Result<Self, StackingError> {
        let bad = |msg: String| Err(StackingError::InvalidSpec(msg));
        if gaps.is_empty() || gaps.len() > 2 || gaps.len() != fractions.len() {
            return bad(format!(
                "expected 1 or 2 gaps with one fraction each, got {} gaps and {} fractions",
                gaps.len(),
                fractions.len()
            ));
        }
        for &t in &fractions {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("fraction {t} is not inside (0, 1)"));
            }
        }
        let (gaps, fractions) = if gaps.len() == 2 && gaps[0] > gaps[1] {
            (vec![gaps[1], gaps[0]], vec![fractions[1], fractions[0]])
        } else {
            (gaps, fractions)
        };
        if gaps.len() == 2 && gaps[0] == gaps[1] && fractions[0] + fractions[1] >= 1.0 {
            return bad(format!(
                "double-split fractions {} + {} must sum below 1",
                fractions[0], fractions[1]
            ));
        }
        Ok(Self { gaps, fractions })
    }

    pub fn single(gap: usize, t: f64) -> Result<Self, StackingError> {
        Self::new(vec![gap], vec![t])
    }

    pub fn same_gap(gap: usize, first: f64, second: f64) -> Result<Self, StackingError> {
        Self::new(vec![gap, gap], vec![first, second])
    }

    pub fn pair(a: usize, b: usize, ta: f64, tb: f64) -> Result<Self, StackingError> {
        if a == b {
            return Err(StackingError::InvalidSpec("use same_gap for one gap".into()));
        }
        Self::new(vec![a, b], vec![ta, tb])
    }

    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn added(&self) -> usize {
        self.gaps.len()
    }

    pub fn check_size(&self, n: usize) -> Result<(), StackingError> {
        if let Some(&g) = self.gaps.iter().find(|&&g| g >= n) {
            return Err(StackingError::InvalidSpec(format!(
                "gap {g} out of range for {n} satellites"
            )));
        }
        Ok(())
    }

    pub fn scenario(&self, n: usize) -> Result<Scenario, StackingError> {
        self.check_size(n)?;
        Ok(match self.gaps[..] {
            [_] => Scenario::OneAddition,
            [a, b] if a == b => Scenario::TwoSameGap,
            [a, b] if gap_separation(a, b, n) == 1 => Scenario::TwoSeparatedByOne,
            _ => Scenario::TwoDistant,
        })
    }

    /// The same insertion seen after relabeling the base by `map`.
    pub fn transformed(&self, map: DihedralMap, n: usize) -> InsertionSpec {
        self.transformed_with_order(map, n).0
    }

    /// Also returns, for each added satellite of the result, its index in `self`.
    pub fn transformed_with_order(&self, map: DihedralMap, n: usize) -> (InsertionSpec, Vec<usize>) {
        let shift = map.shift % n;
        let moved = |g: usize| {
            if map.reflected {
                (2 * n - 1 - g - shift) % n
            } else {
                (g + n - shift) % n
            }
        };
        let same_gap = self.gaps.len() == 2 && self.gaps[0] == self.gaps[1];
        if same_gap {
            let g = moved(self.gaps[0]);
            let (t, order) = if map.reflected {
                (vec![1.0 - self.fractions[0] - self.fractions[1], self.fractions[1]], vec![1, 0])
            } else {
                (self.fractions.clone(), vec![0, 1])
            };
            let spec = InsertionSpec::new(vec![g, g], t).expect("relabeling keeps a spec valid");
            return (spec, order);
        }
        let mut entries: Vec<(usize, f64, usize)> = self
            .gaps
            .iter()
            .zip(&self.fractions)
            .enumerate()
            .map(|(i, (&g, &t))| (moved(g), if map.reflected { 1.0 - t } else { t }, i))
            .collect();
        entries.sort_by_key(|e| e.0);
        let spec = InsertionSpec::new(
            entries.iter().map(|e| e.0).collect(),
            entries.iter().map(|e| e.1).collect(),
        )
        .expect("relabeling keeps a spec valid");
        (spec, entries.iter().map(|e| e.2).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Base(usize),
    Added(usize),
}

/// One gap of the extended configuration: `θ[gap] · (constant + coeffs · t)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Part {
    pub gap: usize,
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl Part {
    fn weight(&self, t: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(t).map(|(c, x)| c * x).sum::<f64>()
    }
}

/// The shape of an insertion, independent of the fraction values.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub n: usize,
    pub parts: Vec<Part>,
    pub roles: Vec<Role>,
}

impl Layout {
    pub fn new(n: usize, gaps: &[usize]) -> Self {
        let k = gaps.len();
        let unit = |i: usize| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let mut parts = Vec::with_capacity(n + k);
        let mut roles = Vec::with_capacity(n + k);
        for g in 0..n {
            roles.push(Role::Base(g));
            let splits: Vec<usize> = (0..k).filter(|&i| gaps[i] == g).collect();
            match splits[..] {
                [] => parts.push(Part { gap: g, constant: 1.0, coeffs: vec![0.0; k] }),
                [i] => {
                    parts.push(Part { gap: g, constant: 0.0, coeffs: unit(i) });
                    roles.push(Role::Added(i));
                    parts.push(Part { gap: g, constant: 1.0, coeffs: unit(i).iter().map(|c| -c).collect() });
                }
                _ => {
                    parts.push(Part { gap: g, constant: 0.0, coeffs: unit(0) });
                    roles.push(Role::Added(0));
                    parts.push(Part { gap: g, constant: 0.0, coeffs: unit(1) });
                    roles.push(Role::Added(1));
                    parts.push(Part { gap: g, constant: 1.0, coeffs: vec![-1.0; k] });
                }
            }
        }
        Self { n, parts, roles }
    }

    pub fn angles(&self, theta: &[f64], t: &[f64]) -> Vec<f64> {
        self.parts.iter().map(|p| theta[p.gap] * p.weight(t)).collect()
    }

    pub fn masses(&self, base: &[f64], added: &[f64]) -> Vec<f64> {
        self.roles
            .iter()
            .map(|r| match *r {
                Role::Base(i) => base[i],
                Role::Added(i) => added[i],
            })
            .collect()
    }

    pub fn merge(&self, extended: &[f64]) -> Vec<f64> {
        let mut theta = vec![0.0; self.n];
        for (p, x) in self.parts.iter().zip(extended) {
            theta[p.gap] += x;
        }
        theta
    }
}

pub fn insert(config: &Configuration, spec: &InsertionSpec) -> Result<Configuration, StackingError> {
    spec.check_size(config.len())?;
    let layout = Layout::new(config.len(), spec.gaps());
    Ok(Configuration::new(layout.angles(config.angles(), spec.fractions()))?)
}

/// Sums the split parts back into the base gaps.
pub fn merge(extended: &Configuration, spec: &InsertionSpec) -> Result<Configuration, StackingError> {
    let n = extended
        .len()
        .checked_sub(spec.added())
        .filter(|&n| n >= 2)
        .ok_or_else(|| StackingError::InvalidSpec("extended configuration is too short".into()))?;
    spec.check_size(n)?;
    let layout = Layout::new(n, spec.gaps());
    Ok(Configuration::new(layout.merge(extended.angles()))?)
}

/// Masses of the extended configuration in insertion order.
pub fn extended_masses(
    n: usize,
    spec: &InsertionSpec,
    masses_base: &[f64],
    masses_added: &[f64],
) -> Result<Vec<f64>, StackingError> {
    if masses_base.len() != n || masses_added.len() != spec.added() {
        return Err(StackingError::InvalidSpec(format!(
            "expected {n} base and {} added masses, got {} and {}",
            spec.added(),
            masses_base.len(),
            masses_added.len()
        )));
    }
    Ok(Layout::new(n, spec.gaps()).masses(masses_base, masses_added))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackVerdict {
    pub stacked: bool,
    pub base_residual: f64,
    pub extended_residual: f64,
}

/// Both the base and the extended configuration must be central. Masses are
/// taken on one common scale.
pub fn check_stacked(
    base: &Configuration,
    spec: &InsertionSpec,
    masses_base: &[f64],
    masses_added: &[f64],
) -> Result<StackVerdict, StackingError> {
    let extended = insert(base, spec)?;
    let mu = extended_masses(base.len(), spec, masses_base, masses_added)?;
    let base_residual = residual(base, masses_base)?.inf_norm;
    let extended_residual = residual(&extended, &mu)?.inf_norm;
    Ok(StackVerdict {
        stacked: base_residual < crate::solver::CENTRAL_TOLERANCE
            && extended_residual < crate::solver::CENTRAL_TOLERANCE,
        base_residual,
        extended_residual,
    })
}

/// A base central configuration and a central extension of it. `spec` acts
/// on `base.config`; `layout` is the extension in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackedPair {
    pub scenario: Scenario,
    pub spec: InsertionSpec,
    pub base: CentralSolution,
    pub extended: CentralSolution,
    pub layout: Configuration,
    pub layout_masses: MassVector,
    /// Mass of each added satellite on the scale of `base.masses`.
    pub added_masses: Vec<f64>,
}

impl StackedPair {
    /// Canonicalizes the base and carries the spec along.
    pub fn assemble(
        base_theta: &[f64],
        base_masses: &[f64],
        spec: &InsertionSpec,
        added_masses: &[f64],
    ) -> Result<Self, StackingError> {
        let n = base_theta.len();
        let scenario = spec.scenario(n)?;
        let raw = Configuration::new(base_theta.to_vec())?;
        let (_, map) = raw.canonical_form();
        let base = CentralSolution::from_parts(&raw, base_masses).map_err(solver_to_stacking)?;
        if added_masses.len() != spec.added() {
            return Err(StackingError::InvalidSpec(format!(
                "expected {} added masses, got {}",
                spec.added(),
                added_masses.len()
            )));
        }
        let (spec, order) = spec.transformed_with_order(map, n);
        let scale = base_masses.iter().sum::<f64>() / n as f64;
        let added: Vec<f64> = order.iter().map(|&i| added_masses[i] / scale).collect();
        let layout = insert(&base.config, &spec)?;
        let mu = extended_masses(n, &spec, base.masses.as_slice(), &added)?;
        let extended = CentralSolution::from_parts(&layout, &mu).map_err(solver_to_stacking)?;
        Ok(Self {
            scenario,
            spec,
            base,
            extended,
            layout,
            layout_masses: MassVector::new(mu)?,
            added_masses: added,
        })
    }

    /// Base satellites carry the same masses before and after the insertion,
    /// up to the common scale.
    pub fn masses_agree(&self, tol: f64) -> bool {
        let n = self.base.config.len();
        let layout = Layout::new(n, self.spec.gaps());
        let mut carried = vec![0.0; n];
        for (role, m) in layout.roles.iter().zip(self.layout_masses.as_slice()) {
            if let Role::Base(i) = *role {
                carried[i] = *m;
            }
        }
        let base = self.base.masses.as_slice();
        let scale = carried.iter().sum::<f64>() / base.iter().sum::<f64>();
        carried.iter().zip(base).all(|(c, b)| (c - scale * b).abs() < tol * scale.max(1.0))
    }

    pub fn verify(&self) -> Result<StackVerdict, StackingError> {
        check_stacked(&self.base.config, &self.spec, self.base.masses.as_slice(), &self.added_masses)
    }
}

fn solver_to_stacking(e: crate::error::SolverError) -> StackingError {
    match e {
        crate::error::SolverError::Model(m) => StackingError::Model(m),
        other => StackingError::InvalidSpec(other.to_string()),
    }
}
