use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("duplicate constraint name {0:?}")]
    DuplicateConstraint(String),
    #[error("constraint {0:?} references an undeclared variable")]
    UnknownVariable(String),
    #[error("constraint {0:?} has no coefficients")]
    EmptyConstraint(String),
    #[error("variable {name:?} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("non-finite coefficient in {0:?}")]
    NonFinite(String),
}

/// Index of a variable inside the [`MilpModel`] that declared it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }

    /// Amount by which `lhs` misses `rhs`; zero when satisfied.
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            RowSense::Le => (lhs - rhs).max(0.0),
            RowSense::Ge => (rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Linear objective, always maximised.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

/// Solver-independent mixed-integer linear program (maximisation).
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    var_index: HashMap<String, VarId>,
    row_index: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        self.add_variable(name.into(), VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(name.into(), VarKind::Binary, 0.0, 1.0)
    }

    fn add_variable(
        &mut self,
        name: String,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        if lower.is_nan()
            || upper.is_nan()
            || lower > upper
            || lower == f64::INFINITY
            || upper == f64::NEG_INFINITY
        {
            return Err(MilpError::InvalidBounds { name, lower, upper });
        }
        if self.var_index.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(id)
    }

    /// Adds a row; repeated variables in `terms` are merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarId, f64)],
        sense: RowSense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let name = name.into();
        if self.row_index.contains_key(&name) {
            return Err(MilpError::DuplicateConstraint(name));
        }
        if terms.is_empty() {
            return Err(MilpError::EmptyConstraint(name));
        }
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite(name));
        }
        let terms = self.merge_terms(&name, terms)?;
        self.row_index.insert(name.clone(), self.constraints.len());
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) -> Result<(), MilpError> {
        let merged = self.merge_terms("objective", &[(var, coef)])?;
        for (v, c) in merged {
            match self.objective.terms.iter_mut().find(|(id, _)| *id == v) {
                Some(slot) => slot.1 += c,
                None => self.objective.terms.push((v, c)),
            }
        }
        Ok(())
    }

    pub fn set_objective_constant(&mut self, constant: f64) {
        self.objective.constant = constant;
    }

    fn merge_terms(
        &self,
        owner: &str,
        terms: &[(VarId, f64)],
    ) -> Result<Vec<(VarId, f64)>, MilpError> {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for &(v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(MilpError::UnknownVariable(owner.to_string()));
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite(owner.to_string()));
            }
            match merged.iter_mut().find(|(id, _)| *id == v) {
                Some(slot) => slot.1 += c,
                None => merged.push((v, c)),
            }
        }
        Ok(merged)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.row_index.get(name).map(|&i| &self.constraints[i])
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.constant
            + self
                .objective
                .terms
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }

    /// Row activity `Σ a_j x_j` of `row`.
    pub fn row_activity(&self, row: &Constraint, values: &[f64]) -> f64 {
        row.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Rows and bounds violated by more than `tol`, worst first.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for var in &self.variables {
            let x = values[self.var_index[&var.name].0];
            let miss = (var.lower - x).max(x - var.upper).max(0.0);
            if miss > tol {
                out.push((format!("bounds of {}", var.name), miss));
            }
        }
        for row in &self.constraints {
            let miss = row.sense.violation(self.row_activity(row, values), row.rhs);
            if miss > tol {
                out.push((row.name.clone(), miss));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }

    /// Dense value vector in declaration order from a name-keyed assignment.
    pub fn dense_values(&self, named: &BTreeMap<String, f64>) -> Result<Vec<f64>, String> {
        self.variables
            .iter()
            .map(|v| named.get(&v.name).copied().ok_or_else(|| v.name.clone()))
            .collect()
    }

    /// Structural equality keyed by names, ignoring declaration order.
    pub fn equivalent(&self, other: &MilpModel) -> bool {
        let named_terms = |m: &MilpModel, terms: &[(VarId, f64)]| -> BTreeMap<String, f64> {
            terms
                .iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|&(v, c)| (m.variables[v.0].name.clone(), c))
                .collect()
        };
        let vars = |m: &MilpModel| -> BTreeMap<String, (VarKind, f64, f64)> {
            m.variables
                .iter()
                .map(|v| (v.name.clone(), (v.kind, v.lower, v.upper)))
                .collect()
        };
        let rows = |m: &MilpModel| -> BTreeMap<String, (BTreeMap<String, f64>, RowSense, f64)> {
            m.constraints
                .iter()
                .map(|r| (r.name.clone(), (named_terms(m, &r.terms), r.sense, r.rhs)))
                .collect()
        };
        vars(self) == vars(other)
            && rows(self) == rows(other)
            && named_terms(self, &self.objective.terms)
                == named_terms(other, &other.objective.terms)
            && self.objective.constant == other.objective.constant
    }
}

impl fmt::Display for MilpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MILP with {} variables ({} binary) and {} constraints",
            self.variables.len(),
            self.num_binaries(),
            self.constraints.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped on a time, node or iteration limit.
    Limit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Limit => "limit",
        })
    }
}

/// What a solver returned: values by variable name, its objective and status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverAssignment {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
    /// Relative rounding of the reported values: 0 for full double
    /// precision, `5e-8` for a solver that prints 8 significant digits.
    #[serde(default)]
    pub value_precision: f64,
}

impl SolverAssignment {
    pub fn without_solution(status: SolveStatus) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: BTreeMap::new(),
            value_precision: 0.0,
        }
    }
}
