use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `count` points in `dim` dimensions, stored row-major.
///
/// Point order is significant: embedding pairs are aligned by index.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    dim: usize,
    count: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be positive"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite coordinate {x}")));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| invalid("point cloud must be nonempty"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// A new cloud holding the listed points in the listed order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, data }
    }

    /// Applies `f` to every point, producing a cloud of dimension `out_dim`.
    pub fn map_points(&self, out_dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> PointCloud {
        let mut data = vec![0.0; self.count() * out_dim];
        for (src, dst) in self.points().zip(data.chunks_exact_mut(out_dim)) {
            f(src, dst);
        }
        PointCloud { dim: out_dim, data }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record((0..self.dim).map(|j| format!("x{j}")))?;
        for p in self.points() {
            // `{:?}` on f64 emits the shortest string that parses back to the same bits.
            wtr.write_record(p.iter().map(|x| format!("{x:?}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let dim = rdr.headers()?.len();
        let mut data = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: rec.len() });
            }
            for field in rec.iter() {
                let x: f64 = field
                    .parse()
                    .map_err(|_| invalid(format!("row {}: cannot parse {field:?} as a number", line + 1)))?;
                data.push(x);
            }
        }
        if data.is_empty() {
            return Err(invalid("CSV holds no points"));
        }
        Self::from_flat(dim, data)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CloudJson {
            dim: self.dim,
            count: self.count(),
            points: self.points().map(<[f64]>::to_vec).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CloudJson = serde_json::from_str(s)?;
        if doc.points.len() != doc.count {
            return Err(invalid(format!("count {} disagrees with {} points", doc.count, doc.points.len())));
        }
        let cloud = Self::from_rows(&doc.points)?;
        if cloud.dim != doc.dim {
            return Err(Error::DimensionMismatch { expected: doc.dim, got: cloud.dim });
        }
        Ok(cloud)
    }
}
