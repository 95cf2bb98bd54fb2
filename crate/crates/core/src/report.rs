//! Tabular sweep results with deterministic CSV and plot-data output.

use std::fmt::Write as _;

/// One row of a sweep: a parameter value, auxiliary terms, the measured
/// value and its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub terms: Vec<f64>,
    pub value: f64,
    pub reference: f64,
    pub warn: bool,
}

impl SweepRow {
    pub fn abs_error(&self) -> f64 {
        (self.value - self.reference).abs()
    }

    /// Relative error; the absolute error when the reference vanishes.
    pub fn rel_error(&self) -> f64 {
        if self.reference == 0.0 {
            self.abs_error()
        } else {
            self.abs_error() / self.reference.abs()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trend {
    /// Error strictly decreases as the parameter moves toward its limit.
    Decreasing,
    NotDecreasing,
    /// Fewer than two rows.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub scenario: String,
    pub parameter_name: String,
    pub term_names: Vec<String>,
    pub h: f64,
    pub seeds: Vec<u64>,
    pub notes: Vec<String>,
    rows: Vec<SweepRow>,
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl SweepReport {
    pub fn new(scenario: impl Into<String>, parameter_name: impl Into<String>, term_names: &[&str], h: f64) -> Self {
        Self {
            scenario: scenario.into(),
            parameter_name: parameter_name.into(),
            term_names: term_names.iter().map(|s| s.to_string()).collect(),
            h,
            seeds: Vec::new(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Inserts a row keeping rows sorted by parameter (stable for ties).
    pub fn push(&mut self, row: SweepRow) {
        assert_eq!(row.terms.len(), self.term_names.len(), "term count mismatch");
        let at = self.rows.partition_point(|r| r.parameter <= row.parameter);
        self.rows.insert(at, row);
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Absolute errors ordered from the largest parameter to the smallest.
    pub fn errors_toward_zero(&self) -> Vec<f64> {
        self.rows.iter().rev().map(SweepRow::abs_error).collect()
    }

    /// Trend of the absolute error as the parameter decreases (`toward_zero`)
    /// or increases.
    pub fn trend(&self, toward_zero: bool) -> Trend {
        let mut errors: Vec<f64> = self.rows.iter().map(SweepRow::abs_error).collect();
        if toward_zero {
            errors.reverse();
        }
        if errors.len() < 2 {
            Trend::Undetermined
        } else if errors.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else {
            Trend::NotDecreasing
        }
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec![self.parameter_name.clone()];
        cols.extend(self.term_names.iter().cloned());
        cols.extend(["value", "reference", "abs_error", "rel_error", "warn_flag"].map(String::from));
        cols.join(",")
    }

    /// CSV with `#` metadata lines followed by a header and the rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "# scenario={}", self.scenario);
        let _ = writeln!(out, "# h={}", self.h);
        let _ = writeln!(out, "# seeds={}", seeds.join(" "));
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let _ = writeln!(out, "{}", self.csv_header());
        for r in &self.rows {
            let mut cells = vec![r.parameter];
            cells.extend(&r.terms);
            cells.extend([r.value, r.reference, r.abs_error(), r.rel_error()]);
            let _ = writeln!(out, "{},{}", fmt_list(&cells), u8::from(r.warn));
        }
        out
    }

    /// Two whitespace-separated columns: parameter and the named quantity
    /// (`value`, `reference`, `abs_error`, `rel_error` or a term name).
    pub fn plot_data(&self, quantity: &str) -> Option<String> {
        let pick: Box<dyn Fn(&SweepRow) -> f64> = match quantity {
            "value" => Box::new(|r| r.value),
            "reference" => Box::new(|r| r.reference),
            "abs_error" => Box::new(SweepRow::abs_error),
            "rel_error" => Box::new(SweepRow::rel_error),
            name => {
                let k = self.term_names.iter().position(|t| t == name)?;
                Box::new(move |r| r.terms[k])
            }
        };
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{} {}", r.parameter, pick(r));
        }
        Some(out)
    }
}
