use std::io;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Square count matrix; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
struct RawMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl TryFrom<RawMatrix> for ConfusionMatrix {
    type Error = EvalError;

    fn try_from(raw: RawMatrix) -> Result<Self, EvalError> {
        ConfusionMatrix::new(raw.labels, raw.counts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    /// `None` when the class was never predicted.
    pub precision: Option<f64>,
    /// `None` when the class never occurs.
    pub recall: Option<f64>,
    pub support: u64,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        let n = labels.len();
        if n == 0 {
            return Err(EvalError::Shape("matrix needs at least one label".into()));
        }
        if counts.len() != n || counts.iter().any(|row| row.len() != n) {
            return Err(EvalError::Shape(format!("expected a {n}x{n} grid of counts")));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn from_labels<L: std::fmt::Display>(labels: &[L]) -> Self {
        ConfusionMatrix::zeros(labels.iter().map(|l| l.to_string()).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    /// Count one observation. Panics if either label is not in the matrix.
    pub fn record(&mut self, truth: &str, predicted: &str) {
        let t = self.index_of(truth).unwrap_or_else(|| panic!("unknown label {truth}"));
        let p = self.index_of(predicted).unwrap_or_else(|| panic!("unknown label {predicted}"));
        self.counts[t][p] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| i == j || c == 0))
    }

    /// Fraction of observations on the diagonal.
    pub fn accuracy(&self) -> Result<f64, EvalError> {
        let total = self.total();
        if total == 0 {
            return Err(EvalError::EmptyMatrix);
        }
        Ok(self.trace() as f64 / total as f64)
    }

    pub fn per_class_metrics(&self) -> Result<Vec<ClassMetrics>, EvalError> {
        if self.total() == 0 {
            return Err(EvalError::EmptyMatrix);
        }
        let n = self.labels.len();
        Ok((0..n)
            .map(|c| {
                let tp = self.counts[c][c];
                let col: u64 = (0..n).map(|r| self.counts[r][c]).sum();
                let row: u64 = self.counts[c].iter().sum();
                let ratio = |d: u64| (d > 0).then(|| tp as f64 / d as f64);
                ClassMetrics { label: self.labels[c].clone(), precision: ratio(col), recall: ratio(row), support: row }
            })
            .collect())
    }

    /// Relabel rows and columns together: new class `i` is old class
    /// `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self, EvalError> {
        let n = self.labels.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(EvalError::Shape("not a permutation".into()));
        }
        Ok(ConfusionMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            counts: order.iter().map(|&r| order.iter().map(|&c| self.counts[r][c]).collect()).collect(),
        })
    }

    /// Parse CSV with a header row of labels. Rows may start with their own
    /// label, in which case the header has an extra leading cell; row
    /// labels must then repeat the header order. Thousands separators inside
    /// quoted cells ("4,699") are accepted; empty cells count as zero.
    pub fn from_csv<R: io::Read>(reader: R) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;

        let labeled_rows = records.first().is_some_and(|r| r.len() == header.len())
            && records.first().is_some_and(|r| parse_count(&r[0]).is_err());
        let labels: Vec<String> = if labeled_rows { header[1..].to_vec() } else { header.clone() };
        let mut counts = Vec::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            let cells: Vec<&str> = record.iter().collect();
            let cells = if labeled_rows {
                let (row_label, rest) = cells.split_first().expect("non-empty record");
                if labels.get(i).map(String::as_str) != Some(*row_label) {
                    return Err(EvalError::Shape(format!(
                        "row {} is labeled `{row_label}` but the header expects `{}`",
                        i + 1,
                        labels.get(i).map_or("<none>", String::as_str)
                    )));
                }
                rest.to_vec()
            } else {
                cells
            };
            let row = cells
                .iter()
                .map(|c| parse_count(c).map_err(|_| EvalError::Shape(format!("row {}: bad count `{c}`", i + 1))))
                .collect::<Result<Vec<u64>, _>>()?;
            counts.push(row);
        }
        ConfusionMatrix::new(labels, counts)
    }

    /// Write CSV with a leading label column.
    pub fn to_csv<W: io::Write>(&self, writer: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_count(cell: &str) -> Result<u64, std::num::ParseIntError> {
    let cleaned: String = cell.chars().filter(|c| *c != ',' && *c != '_').collect();
    if cleaned.is_empty() {
        Ok(0)
    } else {
        cleaned.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(labels: &[&str], counts: Vec<Vec<u64>>) -> ConfusionMatrix {
        ConfusionMatrix::new(labels.iter().map(|s| s.to_string()).collect(), counts).unwrap()
    }

    #[test]
    fn diagonal_matrix_is_perfect() {
        let cm = m(&["a", "b"], vec![vec![3, 0], vec![0, 4]]);
        assert_eq!(cm.accuracy().unwrap(), 1.0);
        assert!(cm.is_diagonal());
        for c in cm.per_class_metrics().unwrap() {
            assert_eq!((c.precision, c.recall), (Some(1.0), Some(1.0)));
        }
    }

    #[test]
    fn single_class() {
        let cm = m(&["only"], vec![vec![5]]);
        let metrics = cm.per_class_metrics().unwrap();
        assert_eq!((metrics[0].precision, metrics[0].recall), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn empty_matrix_errors() {
        let cm = m(&["a", "b"], vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(cm.accuracy(), Err(EvalError::EmptyMatrix));
        assert_eq!(cm.per_class_metrics(), Err(EvalError::EmptyMatrix));
    }

    #[test]
    fn undefined_precision_is_absent() {
        let cm = m(&["a", "b"], vec![vec![3, 0], vec![2, 0]]);
        let metrics = cm.per_class_metrics().unwrap();
        assert_eq!(metrics[1].precision, None);
        assert_eq!(metrics[1].recall, Some(0.0));
    }

    #[test]
    fn shape_is_checked() {
        assert!(ConfusionMatrix::new(vec!["a".into()], vec![vec![1, 2]]).is_err());
        assert!(ConfusionMatrix::new(vec![], vec![]).is_err());
    }

    #[test]
    fn csv_with_and_without_row_labels() {
        let labeled = "true\\pred,A,B\nA,\"4,699\",2\nB,13,\n";
        let cm = ConfusionMatrix::from_csv(labeled.as_bytes()).unwrap();
        assert_eq!(cm.labels(), ["A", "B"]);
        assert_eq!(cm.counts(), [vec![4699, 2], vec![13, 0]]);

        let bare = "A,B\n1,2\n3,4\n";
        let cm = ConfusionMatrix::from_csv(bare.as_bytes()).unwrap();
        assert_eq!(cm.counts(), [vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn csv_round_trip() {
        let cm = m(&["x", "y", "z"], vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let mut buf = Vec::new();
        cm.to_csv(&mut buf).unwrap();
        assert_eq!(ConfusionMatrix::from_csv(buf.as_slice()).unwrap(), cm);
    }

    #[test]
    fn csv_errors() {
        assert!(ConfusionMatrix::from_csv("A,B\n1,x\n3,4\n".as_bytes()).is_err());
        assert!(ConfusionMatrix::from_csv(",A,B\nB,1,2\nA,3,4\n".as_bytes()).is_err());
        assert!(ConfusionMatrix::from_csv("A,B\n1,2\n".as_bytes()).is_err());
    }
}
