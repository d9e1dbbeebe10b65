//! Abstract MILP representation of the unit-commitment problem.
//!
//! Variables are addressed by [`VarRef`] (kind, unit, period) and mapped to
//! dense column indices. Constraints are sparse rows tagged with their
//! [`Family`]. The objective is always minimized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

mod build;

pub use build::{build_model, build_model_with, thin_all, BuildError, ModelOptions};

use crate::instance::UnitId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarKind {
    /// On/off state, binary.
    OnOff,
    Production,
    /// Maximal possible production; measures spinning reserve.
    MaxPossible,
    /// Storage fill (storage units only).
    Storage,
    /// Power consumption (storage units only).
    Consumption,
    ProductionCost,
    StartupCost,
    ShutdownCost,
    UnderProduction,
    OverProduction,
    UnderReserve,
}

impl VarKind {
    pub const ALL: [VarKind; 11] = [
        VarKind::OnOff,
        VarKind::Production,
        VarKind::MaxPossible,
        VarKind::Storage,
        VarKind::Consumption,
        VarKind::ProductionCost,
        VarKind::StartupCost,
        VarKind::ShutdownCost,
        VarKind::UnderProduction,
        VarKind::OverProduction,
        VarKind::UnderReserve,
    ];

    /// Column name prefix used in emitted model files.
    pub fn prefix(self) -> &'static str {
        match self {
            VarKind::OnOff => "v",
            VarKind::Production => "p",
            VarKind::MaxPossible => "pmax",
            VarKind::Storage => "s",
            VarKind::Consumption => "c",
            VarKind::ProductionCost => "cp",
            VarKind::StartupCost => "cu",
            VarKind::ShutdownCost => "cd",
            VarKind::UnderProduction => "pu",
            VarKind::OverProduction => "po",
            VarKind::UnderReserve => "ru",
        }
    }

    pub fn from_prefix(prefix: &str) -> Option<VarKind> {
        VarKind::ALL.into_iter().find(|k| k.prefix() == prefix)
    }

    pub fn is_per_unit(self) -> bool {
        !matches!(
            self,
            VarKind::UnderProduction | VarKind::OverProduction | VarKind::UnderReserve
        )
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub kind: VarKind,
    pub unit: Option<UnitId>,
    pub period: usize,
    pub column: usize,
}

impl VarRef {
    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::OnOff
    }

    pub fn lower(&self) -> f64 {
        0.0
    }

    pub fn upper(&self) -> f64 {
        if self.is_binary() {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// `kind_j_k` for unit variables, `kind_k` for period variables.
    pub fn name(&self) -> String {
        match self.unit {
            Some(j) => format!("{}_{}_{}", self.kind.prefix(), j, self.period),
            None => format!("{}_{}", self.kind.prefix(), self.period),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    InitOn,
    InitOff,
    MinUp,
    MinDown,
    Bounds,
    RampUp,
    RampDown,
    ShutdownLimit,
    StorageCap,
    ConsumptionCap,
    StorageBalance,
    StorageInitial,
    StorageFinal,
    Demand,
    Reserve,
    ProductionCost,
    ShutdownCost,
    StartupCost,
}

impl Family {
    pub const ALL: [Family; 18] = [
        Family::InitOn,
        Family::InitOff,
        Family::MinUp,
        Family::MinDown,
        Family::Bounds,
        Family::RampUp,
        Family::RampDown,
        Family::ShutdownLimit,
        Family::StorageCap,
        Family::ConsumptionCap,
        Family::StorageBalance,
        Family::StorageInitial,
        Family::StorageFinal,
        Family::Demand,
        Family::Reserve,
        Family::ProductionCost,
        Family::ShutdownCost,
        Family::StartupCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::InitOn => "init_on",
            Family::InitOff => "init_off",
            Family::MinUp => "min_up",
            Family::MinDown => "min_down",
            Family::Bounds => "bounds",
            Family::RampUp => "ramp_up",
            Family::RampDown => "ramp_down",
            Family::ShutdownLimit => "shutdown_limit",
            Family::StorageCap => "storage_cap",
            Family::ConsumptionCap => "consumption_cap",
            Family::StorageBalance => "storage_balance",
            Family::StorageInitial => "storage_initial",
            Family::StorageFinal => "storage_final",
            Family::Demand => "demand",
            Family::Reserve => "reserve",
            Family::ProductionCost => "prod_cost",
            Family::ShutdownCost => "shutdown_cost",
            Family::StartupCost => "startup_cost",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    /// Amount by which `lhs` violates `lhs <sense> rhs`, zero if satisfied.
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Sense::Le => (lhs - rhs).max(0.0),
            Sense::Ge => (rhs - lhs).max(0.0),
            Sense::Eq => (lhs - rhs).abs(),
        }
    }
}

/// Position of a constraint inside its family; rows sort by this key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowKey {
    pub family: Family,
    pub unit: Option<UnitId>,
    pub period: usize,
    pub inner: usize,
}

impl RowKey {
    /// `family[j,k(,inner)]`; inner index 0 is omitted.
    pub fn name(&self) -> String {
        let mut idx: Vec<String> = Vec::with_capacity(3);
        if let Some(j) = self.unit {
            idx.push(j.to_string());
        }
        if self.period > 0 {
            idx.push(self.period.to_string());
        }
        if self.inner > 0 {
            idx.push(self.inner.to_string());
        }
        format!("{}[{}]", self.family, idx.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub key: RowKey,
    pub name: String,
    /// Sorted by column, no duplicates, no zeros.
    pub coefficients: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn family(&self) -> Family {
        self.key.family
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|&(col, a)| a * values[col])
            .sum()
    }

    pub fn violation(&self, values: &[f64]) -> f64 {
        self.sense.violation(self.activity(values), self.rhs)
    }

    /// Row name usable in MPS/LP files: the tag with brackets and commas
    /// replaced by underscores (`bounds[1,2,3]` becomes `bounds_1_2_3`).
    pub fn file_name(&self) -> String {
        let mut out = String::with_capacity(self.name.len());
        for ch in self.name.chars() {
            match ch {
                '[' | ',' => out.push('_'),
                ']' => {}
                c => out.push(c),
            }
        }
        out
    }
}

/// Collects coefficients of a row, merging duplicates and dropping zeros.
#[derive(Debug, Default, Clone)]
pub struct RowBuilder {
    terms: BTreeMap<usize, f64>,
}

impl RowBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, column: usize, coefficient: f64) -> &mut Self {
        *self.terms.entry(column).or_insert(0.0) += coefficient;
        self
    }

    pub fn finish(self) -> Vec<(usize, f64)> {
        self.terms.into_iter().filter(|&(_, a)| a != 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    variables: Vec<VarRef>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(usize, f64)>,
    index: HashMap<(VarKind, Option<UnitId>, usize), usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("variable {0} is declared twice")]
    DuplicateVariable(String),
    #[error("constraint {name} references column {column}, but the model has {columns} columns")]
    UnknownColumn {
        name: String,
        column: usize,
        columns: usize,
    },
    #[error("constraint name {0} is used twice")]
    DuplicateConstraint(String),
}

/// A row as handed to [`MilpModel::from_parts`]: key, terms, sense, rhs.
pub type RowParts = (RowKey, Vec<(usize, f64)>, Sense, f64);

impl MilpModel {
    /// Assembles a model. Variables are sorted by (kind, unit, period) and
    /// renumbered; `constraints` and `objective` refer to positions in the
    /// given `variables` slice and are remapped accordingly. Rows are sorted by
    /// their key.
    pub fn from_parts(
        variables: Vec<(VarKind, Option<UnitId>, usize)>,
        constraints: Vec<RowParts>,
        objective: Vec<(usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut order: Vec<usize> = (0..variables.len()).collect();
        order.sort_by_key(|&i| variables[i]);
        let mut remap = vec![0usize; variables.len()];
        let mut vars = Vec::with_capacity(variables.len());
        let mut index = HashMap::with_capacity(variables.len());
        for (column, &old) in order.iter().enumerate() {
            remap[old] = column;
            let (kind, unit, period) = variables[old];
            let var = VarRef {
                kind,
                unit,
                period,
                column,
            };
            if index.insert((kind, unit, period), column).is_some() {
                return Err(ModelError::DuplicateVariable(var.name()));
            }
            vars.push(var);
        }

        let n = vars.len();
        let remap_row =
            |name: &str, terms: Vec<(usize, f64)>| -> Result<Vec<(usize, f64)>, ModelError> {
                let mut row = RowBuilder::new();
                for (col, a) in terms {
                    let &new = remap.get(col).ok_or_else(|| ModelError::UnknownColumn {
                        name: name.to_owned(),
                        column: col,
                        columns: n,
                    })?;
                    row.add(new, a);
                }
                Ok(row.finish())
            };

        let mut rows = Vec::with_capacity(constraints.len());
        for (key, terms, sense, rhs) in constraints {
            let name = key.name();
            let coefficients = remap_row(&name, terms)?;
            rows.push(LinearConstraint {
                key,
                name,
                coefficients,
                sense,
                rhs,
            });
        }
        rows.sort_by_key(|c| c.key);
        if let Some(w) = rows.windows(2).find(|w| w[0].key == w[1].key) {
            return Err(ModelError::DuplicateConstraint(w[0].name.clone()));
        }
        let objective = remap_row("objective", objective)?;
        Ok(MilpModel {
            variables: vars,
            constraints: rows,
            objective,
            index,
        })
    }

    pub fn variables(&self) -> &[VarRef] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// Sparse objective, sorted by column.
    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn num_columns(&self) -> usize {
        self.variables.len()
    }

    pub fn column(&self, kind: VarKind, unit: Option<UnitId>, period: usize) -> Option<usize> {
        self.index.get(&(kind, unit, period)).copied()
    }

    pub fn binary_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .filter(|v| v.is_binary())
            .map(|v| v.column)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(col, c)| c * values[col]).sum()
    }

    pub fn objective_coefficient(&self, column: usize) -> f64 {
        self.objective
            .binary_search_by_key(&column, |&(c, _)| c)
            .map_or(0.0, |i| self.objective[i].1)
    }
}

/// Row and column counts of a model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ModelStats {
    pub constraints: BTreeMap<Family, usize>,
    pub variables: BTreeMap<VarKind, usize>,
    pub total_constraints: usize,
    pub total_variables: usize,
    pub binaries: usize,
    pub nonzeros: usize,
}

impl ModelStats {
    pub fn family(&self, family: Family) -> usize {
        self.constraints.get(&family).copied().unwrap_or(0)
    }

    pub fn kind(&self, kind: VarKind) -> usize {
        self.variables.get(&kind).copied().unwrap_or(0)
    }
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "variables: {} ({} binary), constraints: {}, nonzeros: {}",
            self.total_variables, self.binaries, self.total_constraints, self.nonzeros
        )?;
        for family in Family::ALL {
            writeln!(f, "  {:<16} {}", family.name(), self.family(family))?;
        }
        Ok(())
    }
}

/// Every family and every kind appears in the result, with zero counts where
/// absent.
pub fn model_stats(model: &MilpModel) -> ModelStats {
    let mut stats = ModelStats {
        constraints: Family::ALL.iter().map(|&f| (f, 0)).collect(),
        variables: VarKind::ALL.iter().map(|&k| (k, 0)).collect(),
        ..ModelStats::default()
    };
    for row in model.constraints() {
        *stats.constraints.entry(row.family()).or_insert(0) += 1;
        stats.nonzeros += row.coefficients.len();
    }
    for var in model.variables() {
        *stats.variables.entry(var.kind).or_insert(0) += 1;
    }
    stats.total_constraints = model.constraints().len();
    stats.total_variables = model.num_columns();
    stats.binaries = model.binary_columns().count();
    stats
}
