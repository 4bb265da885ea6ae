use std::fmt::Write as _;

use serde::Serialize;

use iforge_core::dimension::{table2, TableBudget, TableCell, MAX_JACOBIAN_D, MAX_JACOBIAN_PARTICLES};
use iforge_core::Species;

use crate::commands::CommandOutput;
use crate::error::{CliError, CliResult};
use crate::output::to_json;
use crate::reference::{lookup, reference_table, ReferenceCell};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct Table2Args {
    pub species: Vec<Species>,
    pub d: Option<Vec<usize>>,
    pub particles: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub max_jacobian_entries: usize,
    pub timings: bool,
    pub format: Format,
}

impl Default for Table2Args {
    fn default() -> Self {
        let budget = TableBudget::default();
        Table2Args {
            species: vec![Species::Boson, Species::Fermion],
            d: None,
            particles: None,
            trials: budget.trials,
            seed: 0,
            max_jacobian_entries: budget.max_jacobian_entries,
            timings: false,
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// Equals the reference value.
    Match,
    /// Differs from the reference value.
    Mismatch,
    /// Exceeds the species bound or `d^N`.
    BoundViolation,
    /// Computed, but the reference table has no entry.
    Unreferenced,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table2Row {
    #[serde(flatten)]
    pub cell: TableCell,
    pub reference: Option<usize>,
    pub red: bool,
    pub status: CellStatus,
}

/// Cells requested by the arguments: the cartesian product of the given
/// ranges, or every reference cell matching the ones that were given.
/// Explicit grids must fit the budget; reference cells that do not are
/// reported as skipped.
pub fn requested_cells(args: &Table2Args, species: Species) -> Vec<(usize, usize)> {
    match (&args.d, &args.particles) {
        (Some(ds), Some(ns)) => ds.iter().flat_map(|&d| ns.iter().map(move |&n| (d, n))).collect(),
        (ds, ns) => reference_table()
            .into_iter()
            .filter(|c| c.species == species)
            .filter(|c| ds.as_ref().is_none_or(|v| v.contains(&c.d)))
            .filter(|c| ns.as_ref().is_none_or(|v| v.contains(&c.particles)))
            .map(|c| (c.d, c.particles))
            .collect(),
    }
}

fn status(cell: &TableCell, reference: Option<ReferenceCell>) -> CellStatus {
    let Some(rank) = cell.rank() else { return CellStatus::Skipped };
    if rank > cell.bound || rank as u128 > cell.dn_power {
        return CellStatus::BoundViolation;
    }
    match reference {
        Some(r) if r.rank == rank => CellStatus::Match,
        Some(_) => CellStatus::Mismatch,
        None => CellStatus::Unreferenced,
    }
}

pub fn compute(args: &Table2Args) -> CliResult<Vec<Table2Row>> {
    let budget = TableBudget { max_jacobian_entries: args.max_jacobian_entries, trials: args.trials };
    let explicit = args.d.is_some() && args.particles.is_some();
    let mut rows = Vec::new();
    for &species in &args.species {
        let cells = requested_cells(args, species);
        if explicit {
            if let Some((d, n)) = cells.iter().find(|&&(d, n)| !budget.admits(d, n)) {
                return Err(CliError::SizeLimit(format!(
                    "d={d}, N={n} exceeds the Jacobian budget of {} entries (d ≤ {MAX_JACOBIAN_D}, N ≤ {MAX_JACOBIAN_PARTICLES})",
                    budget.max_jacobian_entries
                )));
            }
        }
        for mut cell in table2(&cells, species, budget, args.seed)? {
            if !args.timings {
                cell.seconds = None;
            }
            let reference = lookup(species, cell.d, cell.particles);
            rows.push(Table2Row {
                status: status(&cell, reference),
                reference: reference.map(|r| r.rank),
                red: reference.is_some_and(|r| r.red),
                cell,
            });
        }
    }
    Ok(rows)
}

pub fn render_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("d,N,species,rank,bound,dN_power,tight,seconds,reference,red,status\n");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let c = &r.cell;
        let status = serde_json::to_value(r.status).expect("serializable");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.d,
            c.particles,
            c.species,
            opt(c.rank().map(|x| x.to_string())),
            c.bound,
            c.dn_power,
            opt(c.tight().map(|x| x.to_string())),
            opt(c.seconds.map(|s| format!("{s:.3}"))),
            opt(r.reference.map(|x| x.to_string())),
            r.red,
            status.as_str().unwrap_or_default()
        )
        .unwrap();
    }
    out
}

pub fn failures(rows: &[Table2Row]) -> Vec<String> {
    rows.iter()
        .filter(|r| matches!(r.status, CellStatus::Mismatch | CellStatus::BoundViolation))
        .map(|r| {
            format!(
                "{} d={} N={}: rank {:?}, reference {:?}, bound {}",
                r.cell.species,
                r.cell.d,
                r.cell.particles,
                r.cell.rank(),
                r.reference,
                r.cell.bound
            )
        })
        .collect()
}

pub fn run(args: &Table2Args) -> CliResult<CommandOutput> {
    let rows = compute(args)?;
    let body = match args.format {
        Format::Csv => render_csv(&rows),
        Format::Json => to_json(&rows),
    };
    let failed = failures(&rows);
    let failure = (!failed.is_empty()).then(|| failed.join("; "));
    Ok(CommandOutput { body, failure })
}
