//! Model families, their two parameter axes and sweep schedules.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    RffLinear,
    Tree,
    Boosting,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RffLinear => "rff_linear",
            Family::Tree => "tree",
            Family::Boosting => "boosting",
        }
    }

    /// `(first axis, second axis)`.
    pub fn axes(self) -> (Axis, Axis) {
        match self {
            Family::RffLinear => (Axis::PPc, Axis::PEx),
            Family::Tree => (Axis::PLeaf, Axis::PEns),
            Family::Boosting => (Axis::PBoost, Axis::PEns),
        }
    }

    /// Value of the second axis before it starts to grow.
    pub fn axis2_base(self) -> usize {
        match self {
            Family::RffLinear => 0,
            Family::Tree | Family::Boosting => 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rff_linear" | "rff" => Ok(Family::RffLinear),
            "tree" | "trees" => Ok(Family::Tree),
            "boosting" | "boost" => Ok(Family::Boosting),
            other => Err(Error::Argument(format!(
                "unknown model family '{other}' (expected rff_linear, tree or boosting)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    PPc,
    PEx,
    PLeaf,
    PEns,
    PBoost,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::PPc => "P_PC",
            Axis::PEx => "P_ex",
            Axis::PLeaf => "P_leaf",
            Axis::PEns => "P_ens",
            Axis::PBoost => "P_boost",
        }
    }
}

/// Which of the two axes a schedule step advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchedulePoint {
    pub axis1: usize,
    pub axis2: usize,
}

impl SchedulePoint {
    pub fn new(axis1: usize, axis2: usize) -> Self {
        Self { axis1, axis2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSchedule {
    pub family: Family,
    pub points: Vec<SchedulePoint>,
}

impl SweepSchedule {
    pub fn new(family: Family, points: Vec<SchedulePoint>) -> Self {
        Self { family, points }
    }

    /// Builds points from `(mechanism, value)` steps. Each step moves one axis
    /// to `value` and keeps the other; the second axis starts at its base
    /// value and the first step must set the first axis.
    pub fn from_steps(family: Family, steps: &[(Mechanism, usize)]) -> Result<Self> {
        let mut axis1 = None;
        let mut axis2 = family.axis2_base();
        let mut points = Vec::with_capacity(steps.len());
        for (i, &(mech, value)) in steps.iter().enumerate() {
            match mech {
                Mechanism::First => axis1 = Some(value),
                Mechanism::Second => axis2 = value,
            }
            let a1 = axis1.ok_or_else(|| Error::Schedule {
                index: i,
                reason: format!(
                    "{} is set before any {} value",
                    family.axes().1.name(),
                    family.axes().0.name()
                ),
            })?;
            points.push(SchedulePoint::new(a1, axis2));
        }
        Ok(Self { family, points })
    }

    /// Grows the first axis through `axis1_values` (second axis at its base),
    /// then the second axis through `axis2_values` at the last first-axis value.
    pub fn composite(family: Family, axis1_values: &[usize], axis2_values: &[usize]) -> Result<Self> {
        let steps: Vec<(Mechanism, usize)> = axis1_values
            .iter()
            .map(|&v| (Mechanism::First, v))
            .chain(axis2_values.iter().map(|&v| (Mechanism::Second, v)))
            .collect();
        Self::from_steps(family, &steps)
    }

    /// Composite schedule that switches mechanisms at `switch`: the grid
    /// values below `switch`, then `switch` itself, then `axis2_values`.
    pub fn switch_at(
        family: Family,
        axis1_grid: &[usize],
        switch: usize,
        axis2_values: &[usize],
    ) -> Result<Self> {
        let mut first: Vec<usize> = axis1_grid.iter().copied().filter(|&v| v < switch).collect();
        first.push(switch);
        Self::composite(family, &first, axis2_values)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mechanism that produced each point; the first point counts as `First`.
    pub fn mechanisms(&self) -> Vec<Mechanism> {
        let mut out = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 && p.axis1 == self.points[i - 1].axis1 && p.axis2 != self.points[i - 1].axis2 {
                out.push(Mechanism::Second);
            } else {
                out.push(Mechanism::First);
            }
        }
        out
    }

    /// Checks every point against a training set of `n_train` samples.
    pub fn validate(&self, n_train: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Schedule {
                index: 0,
                reason: "schedule has no points".into(),
            });
        }
        let (a1, a2) = self.family.axes();
        for (index, p) in self.points.iter().enumerate() {
            let fail = |reason: String| Err(Error::Schedule { index, reason });
            match self.family {
                Family::RffLinear => {
                    if p.axis1 == 0 {
                        return fail(format!("{} must be at least 1", a1.name()));
                    }
                    if p.axis1 + 1 > n_train {
                        return fail(format!(
                            "{} = {} exceeds n - 1 = {} (P_phi = {})",
                            a1.name(),
                            p.axis1,
                            n_train.saturating_sub(1),
                            p.axis1 + p.axis2
                        ));
                    }
                }
                Family::Tree | Family::Boosting => {
                    if p.axis1 == 0 {
                        return fail(format!("{} must be at least 1", a1.name()));
                    }
                    if p.axis2 == 0 {
                        return fail(format!("{} must be at least 1", a2.name()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_and_switch() {
        let s = SweepSchedule::composite(Family::Tree, &[2, 10, 100], &[2, 5]).unwrap();
        let pts: Vec<(usize, usize)> = s.points.iter().map(|p| (p.axis1, p.axis2)).collect();
        assert_eq!(pts, vec![(2, 1), (10, 1), (100, 1), (100, 2), (100, 5)]);
        assert_eq!(
            s.mechanisms(),
            vec![
                Mechanism::First,
                Mechanism::First,
                Mechanism::First,
                Mechanism::Second,
                Mechanism::Second
            ]
        );
        let m = SweepSchedule::switch_at(Family::RffLinear, &[10, 50, 200], 60, &[100]).unwrap();
        let pts: Vec<(usize, usize)> = m.points.iter().map(|p| (p.axis1, p.axis2)).collect();
        assert_eq!(pts, vec![(10, 0), (50, 0), (60, 0), (60, 100)]);
    }

    #[test]
    fn validation_names_the_point() {
        let s = SweepSchedule::composite(Family::RffLinear, &[10, 99, 100], &[]).unwrap();
        match s.validate(100) {
            Err(Error::Schedule { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.validate(101).is_ok());
        assert!(SweepSchedule::from_steps(Family::Tree, &[(Mechanism::Second, 3)]).is_err());
        assert!(SweepSchedule::new(Family::Tree, vec![]).validate(10).is_err());
        assert!("trees".parse::<Family>().is_ok());
        assert!("forest".parse::<Family>().is_err());
    }
}
