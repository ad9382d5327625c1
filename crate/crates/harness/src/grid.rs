use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Everything needed to interpret an output file without the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub experiment: String,
    /// How a single trial is scored.
    pub criterion: String,
    pub base_seed: u64,
    pub trials: usize,
    /// How per-trial seeds are derived from the base seed.
    pub seed_rule: String,
    pub tolerances: BTreeMap<String, f64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Trials whose solver returned an error; they count as failures.
    pub solver_errors: usize,
    pub code_version: String,
}

impl RunMetadata {
    pub fn new(experiment: &str, criterion: &str, base_seed: u64, trials: usize, seed_rule: &str) -> Self {
        RunMetadata {
            experiment: experiment.into(),
            criterion: criterion.into(),
            base_seed,
            trials,
            seed_rule: seed_rule.into(),
            tolerances: BTreeMap::new(),
            parameters: BTreeMap::new(),
            solver_errors: 0,
            code_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.into(), value);
        self
    }

    pub fn parameter(mut self, name: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("parameters serialize to JSON");
        self.parameters.insert(name.into(), v);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes to JSON");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub axis1: usize,
    pub axis2: usize,
    pub successes: usize,
    pub trials: usize,
}

impl Cell {
    pub fn probability(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Success counts over the product of two integer axes, stored
/// axis1-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub cells: Vec<Cell>,
    pub metadata: RunMetadata,
}

impl HeatmapGrid {
    pub(crate) fn from_counts(axis1: Axis, axis2: Axis, counts: &[usize], trials: usize, metadata: RunMetadata) -> Self {
        assert_eq!(counts.len(), axis1.values.len() * axis2.values.len());
        let mut cells = Vec::with_capacity(counts.len());
        for (i, &a) in axis1.values.iter().enumerate() {
            for (j, &b) in axis2.values.iter().enumerate() {
                let successes = counts[i * axis2.values.len() + j];
                assert!(successes <= trials);
                cells.push(Cell { axis1: a, axis2: b, successes, trials });
            }
        }
        HeatmapGrid { axis1, axis2, cells, metadata }
    }

    /// Cell at axis positions (not values).
    pub fn at(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.axis2.values.len() + j]
    }

    /// Cell with the given axis values.
    pub fn get(&self, a: usize, b: usize) -> Option<&Cell> {
        let i = self.axis1.values.iter().position(|&v| v == a)?;
        let j = self.axis2.values.iter().position(|&v| v == b)?;
        Some(self.at(i, j))
    }

    /// Success counts along axis2 for the `i`-th axis1 value.
    pub fn row_successes(&self, i: usize) -> Vec<usize> {
        (0..self.axis2.values.len()).map(|j| self.at(i, j).successes).collect()
    }

    /// Success counts along axis1 for the `j`-th axis2 value.
    pub fn column_successes(&self, j: usize) -> Vec<usize> {
        (0..self.axis1.values.len()).map(|i| self.at(i, j).successes).collect()
    }

    /// `axis1,axis2,successes,trials,probability`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1,axis2,successes,trials,probability\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{:.6}", c.axis1, c.axis2, c.successes, c.trials, c.probability());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HeatmapGrid {
        let a = Axis { name: "K".into(), values: vec![1, 2] };
        let b = Axis { name: "L".into(), values: vec![4, 8, 12] };
        let meta = RunMetadata::new("test", "none", 0, 4, "none");
        HeatmapGrid::from_counts(a, b, &[0, 2, 4, 0, 1, 3], 4, meta)
    }

    #[test]
    fn csv_is_axis1_major() {
        let csv = grid().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "axis1,axis2,successes,trials,probability");
        assert_eq!(lines[2], "1,8,2,4,0.500000");
        assert_eq!(lines[4], "2,4,0,4,0.000000");
    }

    #[test]
    fn lookup_by_value_and_slices() {
        let g = grid();
        assert_eq!(g.get(2, 12).unwrap().successes, 3);
        assert!(g.get(3, 4).is_none());
        assert_eq!(g.row_successes(0), vec![0, 2, 4]);
        assert_eq!(g.column_successes(2), vec![4, 3]);
    }

    #[test]
    fn metadata_json_lists_tolerances() {
        let m = RunMetadata::new("x", "y", 7, 2, "z").tolerance("eps", 1e-6).parameter("n", 50);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["tolerances"]["eps"], 1e-6);
        assert_eq!(v["parameters"]["n"], 50);
        assert_eq!(v["base_seed"], 7);
    }
}
