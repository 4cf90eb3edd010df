use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::data::event::CompiledEvent;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{Schema, VarId, Variable};

/// Weighted table of complete assignments, stored as domain codes.
#[derive(Debug, Clone)]
pub struct Dataset<S = f64> {
    schema: Arc<Schema>,
    codes: Vec<u32>,
    weights: Vec<S>,
    /// Set by the skip-and-renormalize estimator policy and by samplers.
    pub provenance: Option<String>,
}

impl<S: Scalar> Dataset<S> {
    /// Builds a dataset from row-major codes.
    pub fn from_codes(schema: Arc<Schema>, codes: Vec<u32>, weights: Option<Vec<S>>) -> Result<Self> {
        let width = schema.len();
        if width == 0 {
            return Err(Error::Dataset("schema has no variables".into()));
        }
        if !codes.len().is_multiple_of(width) {
            return Err(Error::Dataset("code buffer is not a whole number of rows".into()));
        }
        let n = codes.len() / width;
        if n == 0 {
            return Err(Error::Dataset("dataset has no rows".into()));
        }
        for (r, row) in codes.chunks(width).enumerate() {
            for (id, &c) in row.iter().enumerate() {
                if c as usize >= schema.var(id).len() {
                    return Err(Error::Row {
                        row: r + 1,
                        message: format!("code {c} out of range for `{}`", schema.var(id).name()),
                    });
                }
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Dataset(format!(
                        "{} weights for {n} rows",
                        w.len()
                    )));
                }
                for (r, x) in w.iter().enumerate() {
                    if x.is_negative() || !x.to_f64().is_finite() {
                        return Err(Error::Row {
                            row: r + 1,
                            message: "weight must be finite and non-negative".into(),
                        });
                    }
                }
                if w.iter().all(|x| x.is_zero()) {
                    return Err(Error::Dataset("all weights are zero".into()));
                }
                w
            }
            None => vec![S::one(); n],
        };
        Ok(Dataset {
            schema,
            codes,
            weights,
            provenance: None,
        })
    }

    /// Builds a dataset from label rows in schema order.
    pub fn from_labels<R, L>(schema: Schema, rows: R, weights: Option<Vec<S>>) -> Result<Self>
    where
        R: IntoIterator<Item = Vec<L>>,
        L: AsRef<str>,
    {
        let mut codes = Vec::new();
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Row {
                    row: r + 1,
                    message: format!("expected {} values, found {}", schema.len(), row.len()),
                });
            }
            for (id, cell) in row.iter().enumerate() {
                let code = schema.var(id).code(cell.as_ref()).map_err(|e| Error::Row {
                    row: r + 1,
                    message: e.to_string(),
                })?;
                codes.push(code as u32);
            }
        }
        Dataset::from_codes(Arc::new(schema), codes, weights)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        let w = self.width();
        &self.codes[r * w..(r + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[u32], &S)> {
        self.codes.chunks(self.width()).zip(self.weights.iter())
    }

    pub fn weight(&self, r: usize) -> &S {
        &self.weights[r]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn label(&self, r: usize, id: VarId) -> &str {
        self.schema.var(id).label(self.row(r)[id] as usize)
    }

    pub fn column(&self, id: VarId) -> impl Iterator<Item = u32> + '_ {
        self.codes.iter().skip(id).step_by(self.width()).copied()
    }

    pub fn total_weight(&self) -> S {
        crate::scalar::sum(self.weights.iter().cloned())
    }

    /// Weighted mass of rows matching `event`.
    pub fn mass(&self, event: &CompiledEvent) -> S {
        let mut acc = S::zero();
        for (row, w) in self.rows() {
            if event.matches(row) {
                acc = acc + w.clone();
            }
        }
        acc
    }

    /// Copy with `var` set to `codes` (appended, or replacing a same-named
    /// column).
    pub fn with_column(&self, var: Variable, column: &[u32]) -> Result<Dataset<S>> {
        if column.len() != self.len() {
            return Err(Error::Dataset(format!(
                "column has {} entries for {} rows",
                column.len(),
                self.len()
            )));
        }
        let replace = self.schema.id(var.name()).ok();
        let schema = Arc::new(self.schema.with_variable(var));
        let width = schema.len();
        let mut codes = Vec::with_capacity(width * self.len());
        for (r, row) in self.codes.chunks(self.width()).enumerate() {
            codes.extend_from_slice(row);
            match replace {
                Some(id) => codes[r * width + id] = column[r],
                None => codes.push(column[r]),
            }
        }
        let mut out = Dataset::from_codes(schema, codes, Some(self.weights.clone()))?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }

    /// Rows with identical codes merged, weights summed; rows in first-seen
    /// order.
    pub fn compact(&self) -> Dataset<S> {
        let mut index: BTreeMap<&[u32], usize> = BTreeMap::new();
        let mut codes = Vec::new();
        let mut weights: Vec<S> = Vec::new();
        for (row, w) in self.rows() {
            match index.get(row) {
                Some(&i) => weights[i] = weights[i].clone() + w.clone(),
                None => {
                    index.insert(row, weights.len());
                    codes.extend_from_slice(row);
                    weights.push(w.clone());
                }
            }
        }
        Dataset {
            schema: Arc::clone(&self.schema),
            codes,
            weights,
            provenance: self.provenance.clone(),
        }
    }

    /// Converts weights to another scalar type.
    pub fn map_weights<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Dataset<T> {
        Dataset {
            schema: Arc::clone(&self.schema),
            codes: self.codes.clone(),
            weights: self.weights.iter().map(f).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// CSV layout options.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub weight_column: String,
    pub prediction_column: String,
    /// When set and the prediction column is present, its values are loaded
    /// into this variable.
    pub outcome: Option<Variable>,
    /// Cut points per continuous column.
    pub binning: BTreeMap<String, Vec<f64>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            weight_column: "__weight".into(),
            prediction_column: "__prediction".into(),
            outcome: None,
            binning: BTreeMap::new(),
        }
    }
}

fn fmt_cut(x: f64) -> String {
    format!("{x}")
}

/// Interval labels for cut points `c_1 < … < c_m`: `<c_1`, `[c_i,c_{i+1})`,
/// `≥c_m`.
pub fn bin_labels(cuts: &[f64]) -> Result<Vec<String>> {
    if cuts.is_empty() {
        return Err(Error::Schema("binning needs at least one cut point".into()));
    }
    if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema("cut points must be finite and strictly increasing".into()));
    }
    let mut out = vec![format!("<{}", fmt_cut(cuts[0]))];
    for w in cuts.windows(2) {
        out.push(format!("[{},{})", fmt_cut(w[0]), fmt_cut(w[1])));
    }
    out.push(format!("≥{}", fmt_cut(cuts[cuts.len() - 1])));
    Ok(out)
}

fn bin_index(cuts: &[f64], x: f64) -> usize {
    cuts.partition_point(|&c| c <= x)
}

enum Decoder {
    Labels,
    Bins { cuts: Vec<f64>, codes: Vec<u32> },
}

fn decode(var: &Variable, decoder: &Decoder, cell: &str) -> std::result::Result<u32, String> {
    let cell = cell.trim();
    match decoder {
        Decoder::Labels => {
            if let Ok(c) = var.code(cell) {
                return Ok(c as u32);
            }
            // Accept numerically equal spellings such as `1.0` for `1`.
            if let Ok(x) = cell.parse::<f64>() {
                if let Some(i) = var
                    .domain()
                    .iter()
                    .position(|d| d.parse::<f64>().is_ok_and(|y| y == x))
                {
                    return Ok(i as u32);
                }
            }
            Err(format!("value `{cell}` is not in the domain of `{}`", var.name()))
        }
        Decoder::Bins { cuts, codes } => {
            if let Ok(c) = var.code(cell) {
                return Ok(c as u32);
            }
            let x: f64 = cell
                .parse()
                .map_err(|_| format!("cannot parse `{cell}` as a number for `{}`", var.name()))?;
            if !x.is_finite() {
                return Err(format!("non-finite value for `{}`", var.name()));
            }
            Ok(codes[bin_index(cuts, x)])
        }
    }
}

impl<S: Scalar> Dataset<S> {
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, opts: &CsvOptions) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(file, schema, opts)
    }

    /// Reads an RFC-4180 table whose header names every schema variable.
    /// Row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(reader: R, schema: &Schema, opts: &CsvOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let position = |name: &str| header.iter().position(|h| h == name);

        let mut vars: Vec<Variable> = schema.variables().to_vec();
        let mut sources = Vec::with_capacity(vars.len() + 1);
        for v in &vars {
            let col = position(v.name()).ok_or_else(|| {
                Error::Dataset(format!("missing column `{}`", v.name()))
            })?;
            sources.push(col);
        }
        if let Some(outcome) = &opts.outcome {
            if let Some(col) = position(&opts.prediction_column) {
                if schema.contains(outcome.name()) {
                    return Err(Error::Dataset(format!(
                        "outcome `{}` is both a column and the prediction",
                        outcome.name()
                    )));
                }
                vars.push(outcome.clone());
                sources.push(col);
            }
        }
        let weight_col = position(&opts.weight_column);
        for (i, h) in header.iter().enumerate() {
            let known = sources.contains(&i)
                || Some(i) == weight_col
                || *h == opts.prediction_column;
            if !known {
                return Err(Error::Dataset(format!("unexpected column `{h}`")));
            }
        }
        for name in opts.binning.keys() {
            if !vars.iter().any(|v| v.name() == name) {
                return Err(Error::UnknownVariable(name.clone()));
            }
        }
        let decoders = vars
            .iter()
            .map(|v| match opts.binning.get(v.name()) {
                None => Ok(Decoder::Labels),
                Some(cuts) => {
                    let labels = bin_labels(cuts)?;
                    let codes = labels
                        .iter()
                        .map(|l| v.code(l).map(|c| c as u32))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Decoder::Bins {
                        cuts: cuts.clone(),
                        codes,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let mut codes = Vec::new();
        let mut weights = weight_col.map(|_| Vec::new());
        for (r, record) in rdr.records().enumerate() {
            let row = r + 1;
            let record = record.map_err(|e| Error::Row {
                row,
                message: e.to_string(),
            })?;
            for ((var, dec), &col) in vars.iter().zip(&decoders).zip(&sources) {
                let cell = record.get(col).unwrap_or("");
                let code = decode(var, dec, cell).map_err(|message| Error::Row { row, message })?;
                codes.push(code);
            }
            if let (Some(ws), Some(col)) = (weights.as_mut(), weight_col) {
                let cell = record.get(col).unwrap_or("").trim();
                let w: f64 = cell.parse().map_err(|_| Error::Row {
                    row,
                    message: format!("cannot parse weight `{cell}`"),
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Row {
                        row,
                        message: "weight must be finite and non-negative".into(),
                    });
                }
                ws.push(S::from_f64(w));
            }
        }
        Dataset::from_codes(Arc::new(Schema::new(vars)?), codes, weights)
    }

    /// Writes labels with a header; weights are written only when some
    /// weight differs from one.
    pub fn write_csv<W: Write>(&self, writer: W, opts: &CsvOptions) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let with_weights = self.weights.iter().any(|x| !x.is_one());
        let mut header: Vec<&str> = self.schema.names().collect();
        if with_weights {
            header.push(&opts.weight_column);
        }
        w.write_record(&header)?;
        for (r, (row, weight)) in self.rows().enumerate() {
            let mut rec: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(id, &c)| self.schema.var(id).label(c as usize).to_string())
                .collect();
            if with_weights {
                rec.push(format!("{}", weight.to_f64()));
            }
            w.write_record(&rec).map_err(|e| Error::Row {
                row: r + 1,
                message: e.to_string(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xo_schema() -> Schema {
        Schema::new(vec![
            Variable::new("x", ["0", "1"], false).unwrap(),
            Variable::new("o", ["0", "1"], false).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn reads_valid_rows_in_any_column_order() {
        let csv = "o,x\n1,1\n0,1\n0,0\n";
        let d: Dataset = Dataset::read_csv(csv.as_bytes(), &xo_schema(), &CsvOptions::default()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.label(0, 0), "1");
        assert_eq!(d.label(2, 1), "0");
    }

    #[test]
    fn domain_violation_names_row() {
        let csv = "x,o\n1,1\npurple,0\n0,0\n";
        let err = Dataset::<f64>::read_csv(csv.as_bytes(), &xo_schema(), &CsvOptions::default())
            .unwrap_err();
        match err {
            Error::Row { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("purple"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let err = Dataset::<f64>::read_csv("x\n1\n".as_bytes(), &xo_schema(), &CsvOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("missing column `o`"));
    }

    #[test]
    fn binning_labels_and_mapping() {
        let labels = bin_labels(&[25.0, 40.0]).unwrap();
        assert_eq!(labels, vec!["<25", "[25,40)", "≥40"]);
        let schema = Schema::new(vec![Variable::new("age", labels, true).unwrap()]).unwrap();
        let mut opts = CsvOptions::default();
        opts.binning.insert("age".into(), vec![25.0, 40.0]);
        let d: Dataset =
            Dataset::read_csv("age\n18\n25\n39.9\n40\n70\n".as_bytes(), &schema, &opts).unwrap();
        let got: Vec<u32> = d.column(0).collect();
        assert_eq!(got, vec![0, 1, 1, 2, 2]);
        assert!(bin_labels(&[3.0, 3.0]).is_err());
    }

    #[test]
    fn weights_and_prediction_column() {
        let opts = CsvOptions {
            outcome: Some(Variable::new("O", ["neg", "pos"], true).unwrap()),
            ..CsvOptions::default()
        };
        let schema = Schema::new(vec![Variable::new("x", ["0", "1"], false).unwrap()]).unwrap();
        let csv = "x,__prediction,__weight\n1,pos,2.5\n0,neg,0.5\n";
        let d: Dataset = Dataset::read_csv(csv.as_bytes(), &schema, &opts).unwrap();
        assert_eq!(d.schema().len(), 2);
        assert_eq!(d.total_weight(), 3.0);
        let mut out = Vec::new();
        d.write_csv(&mut out, &opts).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,O,__weight\n1,pos,2.5\n0,neg,0.5\n");
    }

    #[test]
    fn rejects_bad_weights() {
        let s = Arc::new(xo_schema());
        assert!(Dataset::from_codes(Arc::clone(&s), vec![0, 0], Some(vec![-1.0])).is_err());
        assert!(Dataset::from_codes(Arc::clone(&s), vec![0, 0], Some(vec![0.0])).is_err());
        assert!(Dataset::<f64>::from_codes(s, vec![], None).is_err());
    }

    #[test]
    fn compact_merges_duplicates() {
        let d: Dataset = Dataset::from_labels(
            xo_schema(),
            vec![vec!["1", "1"], vec!["0", "0"], vec!["1", "1"]],
            None,
        )
        .unwrap();
        let c = d.compact();
        assert_eq!(c.len(), 2);
        assert_eq!(*c.weight(0), 2.0);
    }
}
