//! Uniformly sampled functions on [a, b].

use std::io::{Read, Write};

use crate::error::{FracError, Result};

/// Samples f(a + i·h), i = 0..=n, with h = (b − a)/n.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(FracError::Grid(format!(
                "need at least 3 samples (n >= 2), got {}",
                values.len()
            )));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(FracError::Grid(format!(
                "interval [{a}, {b}] is empty or not finite"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(FracError::Grid(format!("non-finite sample {v}")));
        }
        Ok(Self { a, b, values })
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(FracError::Grid(format!("need n >= 2 intervals, got {n}")));
        }
        let h = (b - a) / n as f64;
        Self::new(a, b, (0..=n).map(|i| f(a + i as f64 * h)).collect())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n() {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n()).map(|i| self.node(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// f' at every node: central differences inside, one-sided second-order at the ends.
    pub fn derivative_samples(&self) -> Vec<f64> {
        let v = &self.values;
        let n = self.n();
        let h = self.h();
        let mut d = vec![0.0; n + 1];
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        for i in 1..n {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d
    }

    /// Reads a two-column CSV with header `t,f`; nodes must be uniformly spaced.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| FracError::Grid(e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "f" {
            return Err(FracError::Grid(format!(
                "expected header \"t,f\", found {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut ts = Vec::new();
        let mut fs = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| FracError::Grid(e.to_string()))?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| FracError::Grid(format!("row {}: {e}", line + 2)))
            };
            ts.push(parse(0)?);
            fs.push(parse(1)?);
        }
        if ts.len() < 3 {
            return Err(FracError::Grid(format!(
                "need at least 3 rows, got {}",
                ts.len()
            )));
        }
        let (a, b) = (ts[0], ts[ts.len() - 1]);
        let g = Self::new(a, b, fs)?;
        let h = g.h();
        for (i, &t) in ts.iter().enumerate() {
            if (t - g.node(i)).abs() > 1e-6 * h {
                return Err(FracError::Grid(format!(
                    "row {}: node {t} is not on the uniform grid (expected {})",
                    i + 2,
                    g.node(i)
                )));
            }
        }
        Ok(g)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| FracError::Grid(e.to_string());
        w.write_record(["t", "f"]).map_err(err)?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([self.node(i).to_string(), v.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| FracError::Grid(e.to_string()))
    }
}
