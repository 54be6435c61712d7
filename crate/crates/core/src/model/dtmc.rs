use std::fmt;

use super::{Matrix, StateSpace};
use crate::numeric::{kahan_sum, PROB_TOL};
use crate::{Error, Result};

/// A discrete-time Markov chain over a [`StateSpace`].
///
/// A `restricted` chain comes from dropping states (see
/// [`crate::umm::restrict`]); its rows and initial vector may be
/// substochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc {
    space: StateSpace,
    init: Vec<f64>,
    trans: Matrix,
    restricted: bool,
}

impl Dtmc {
    /// Builds and validates a chain.
    pub fn new(space: StateSpace, init: Vec<f64>, trans: Matrix) -> Result<Self> {
        let d = Self::from_parts(space, init, trans, false)?;
        let report = validate_dtmc(&d);
        if !report.is_valid() {
            return Err(Error::InvalidModel(report.to_string()));
        }
        Ok(d)
    }

    /// Assembles a chain checking only dimensions. Use [`validate_dtmc`]
    /// to inspect stochasticity.
    pub fn from_parts(
        space: StateSpace,
        init: Vec<f64>,
        trans: Matrix,
        restricted: bool,
    ) -> Result<Self> {
        let n = space.len();
        if trans.rows() != n || trans.cols() != n {
            return Err(Error::Dimension(format!(
                "transition matrix is {}x{}, state space has {n} states",
                trans.rows(),
                trans.cols()
            )));
        }
        if init.len() != n {
            return Err(Error::Dimension(format!(
                "initial vector has {} entries, state space has {n} states",
                init.len()
            )));
        }
        Ok(Self {
            space,
            init,
            trans,
            restricted,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn trans(&self) -> &Matrix {
        &self.trans
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.trans[(from, to)]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.trans.row(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { row: usize, sum: f64, deviation: f64 },
    InitSum { sum: f64, deviation: f64 },
    Entry { row: usize, col: usize, value: f64 },
    InitEntry { index: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum {
                row,
                sum,
                deviation,
            } => write!(f, "row {row} sums to {sum} (deviation {deviation:e})"),
            Violation::InitSum { sum, deviation } => {
                write!(f, "initial vector sums to {sum} (deviation {deviation:e})")
            }
            Violation::Entry { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} outside [0,1]")
            }
            Violation::InitEntry { index, value } => {
                write!(f, "initial entry {index} = {value} outside [0,1]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Reports every stochasticity violation of `d`. Never mutates.
pub fn validate_dtmc(d: &Dtmc) -> ValidationReport {
    let mut violations = Vec::new();
    let sum_ok = |sum: f64| {
        if d.restricted {
            sum <= 1.0 + PROB_TOL
        } else {
            (sum - 1.0).abs() <= PROB_TOL
        }
    };
    for (index, &value) in d.init.iter().enumerate() {
        if !in_unit(value) {
            violations.push(Violation::InitEntry { index, value });
        }
    }
    let sum = kahan_sum(d.init.iter().copied());
    if !sum_ok(sum) {
        violations.push(Violation::InitSum {
            sum,
            deviation: (sum - 1.0).abs(),
        });
    }
    for row in 0..d.trans.rows() {
        for (col, &value) in d.trans.row(row).iter().enumerate() {
            if !in_unit(value) {
                violations.push(Violation::Entry { row, col, value });
            }
        }
        let sum = kahan_sum(d.trans.row(row).iter().copied());
        if !sum_ok(sum) {
            violations.push(Violation::RowSum {
                row,
                sum,
                deviation: (sum - 1.0).abs(),
            });
        }
    }
    ValidationReport { violations }
}
