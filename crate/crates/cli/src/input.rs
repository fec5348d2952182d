use std::fs;
use std::path::Path;

use serde::Deserialize;
use srr_core::{Budget, DemandSet, DemandVector, FieldSpec, GeneratorMatrix};

use crate::CliError;

/// A field given either as its order or as `{"p", "r", "modulus"}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldArg {
    Order(u64),
    Spec(FieldSpec),
}

impl FieldArg {
    pub fn resolve(self) -> Result<FieldSpec, CliError> {
        match self {
            FieldArg::Order(q) => Ok(FieldSpec::of_order(q)?),
            FieldArg::Spec(f) => Ok(f),
        }
    }
}

/// Problem document shared by `--demands` and `--matrix`. Unknown keys are
/// ignored so that `nq` output can be fed back in.
#[derive(Debug, Default, Deserialize)]
pub struct ProblemFile {
    pub field: Option<FieldArg>,
    pub k: Option<usize>,
    /// Columns, each a list of `k` labels.
    pub matrix: Option<Vec<Vec<u32>>>,
    pub demands: Option<Vec<DemandVector>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DemandsDoc {
    Points(Vec<DemandVector>),
    Problem(ProblemFile),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Columns(Vec<Vec<u32>>),
    Problem(ProblemFile),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: not a valid {what} file: {e}", path.display())))
}

pub fn load_demands(path: &Path) -> Result<ProblemFile, CliError> {
    Ok(match parse::<DemandsDoc>(path, "demands")? {
        DemandsDoc::Points(points) => ProblemFile {
            demands: Some(points),
            ..ProblemFile::default()
        },
        DemandsDoc::Problem(p) => p,
    })
}

pub fn load_matrix(path: &Path) -> Result<ProblemFile, CliError> {
    Ok(match parse::<MatrixDoc>(path, "matrix")? {
        MatrixDoc::Columns(cols) => ProblemFile {
            matrix: Some(cols),
            ..ProblemFile::default()
        },
        MatrixDoc::Problem(p) => p,
    })
}

pub fn demand_set(file: &ProblemFile) -> Result<DemandSet, CliError> {
    let points = file
        .demands
        .clone()
        .ok_or_else(|| CliError::Input("no \"demands\" in the demands file".into()))?;
    let set = DemandSet::new(points)?;
    if let Some(k) = file.k {
        if k != set.k() {
            return Err(CliError::Input(format!("\"k\" is {k} but demand vectors have {} coordinates", set.k())));
        }
    }
    Ok(set)
}

pub fn generator_matrix(file: &ProblemFile, field: &FieldSpec) -> Result<GeneratorMatrix, CliError> {
    let cols = file
        .matrix
        .as_ref()
        .ok_or_else(|| CliError::Input("no \"matrix\" in the matrix file".into()))?;
    let k = match (file.k, cols.first()) {
        (Some(k), _) => k,
        (None, Some(c)) => c.len(),
        (None, None) => return Err(CliError::Input("matrix has no columns".into())),
    };
    Ok(GeneratorMatrix::from_labels(field, k, cols)?)
}

/// `SRR_BUDGET` overrides the enumeration caps.
pub fn budget_from_env() -> Result<Budget, CliError> {
    match std::env::var("SRR_BUDGET") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Budget::with_enumeration_cap)
            .map_err(|_| CliError::Input(format!("SRR_BUDGET must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(Budget::default()),
    }
}
