//! Check results and the JSON report tree.

use serde::{Deserialize, Serialize};

use crate::matrix::RMat;
use crate::superring::GeneratorTable;

pub const REPORT_SCHEMA: &str = "twobundle-report/1";

/// Location of the first nonzero coefficient of a residual that should vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    pub row: usize,
    pub col: usize,
    pub monomial: String,
    pub coefficient: String,
}

impl Witness {
    pub fn from_residual(m: &RMat, sample: usize, table: Option<&GeneratorTable>) -> Option<Witness> {
        let (row, col, e) = m.first_nonzero()?;
        let (mono, c) = &e.terms()[0];
        Some(Witness {
            sample,
            row,
            col,
            monomial: mono.display(table),
            coefficient: c.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    pub fn pass(id: impl Into<String>, anchor: impl Into<String>) -> Check {
        Check { id: id.into(), anchor: anchor.into(), passed: true, witness: None, note: None }
    }

    pub fn from_witness(id: impl Into<String>, anchor: impl Into<String>, w: Option<Witness>) -> Check {
        Check { id: id.into(), anchor: anchor.into(), passed: w.is_none(), witness: w, note: None }
    }

    pub fn fail(id: impl Into<String>, anchor: impl Into<String>, note: impl Into<String>) -> Check {
        Check {
            id: id.into(),
            anchor: anchor.into(),
            passed: false,
            witness: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn new(name: impl Into<String>) -> Suite {
        Suite { name: name.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        self.checks.extend(cs);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub crossed_module: String,
    pub truncation: u16,
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<Suite>,
}

impl Report {
    pub fn new(crossed_module: impl Into<String>, truncation: u16, seed: u64, samples: usize) -> Report {
        Report {
            schema: REPORT_SCHEMA.into(),
            crossed_module: crossed_module.into(),
            truncation,
            seed,
            samples,
            suites: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.suites.iter().all(Suite::passed)
    }

    pub fn find(&self, id: &str) -> Option<&Check> {
        self.suites.iter().find_map(|s| s.find(id))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(Suite::failures)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
