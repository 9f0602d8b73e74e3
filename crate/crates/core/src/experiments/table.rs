//! Numeric tables shared by the sweep, the bound curves and the plotter.

use std::io::{Read, Write};

use super::simulate::{log_grid, SimulationTable, TRADEOFF_COLUMNS};
use super::verify::default_delta;
use crate::bounds::{optimal_rv, precision_bound_avg, precision_bound_pnorm, precision_bound_worst, w2_lower_bound, AvgCaseParams, BoundParams};
use crate::error::{invalid, Result};

/// Named numeric columns with possibly empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("table has no column `{name}` (columns: {})", self.headers.join(", "))))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| {
                    let cell = cell.trim();
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| invalid(format!("non-numeric cell `{cell}`")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.headers)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(|c| c.map(|v| format!("{v:?}")).unwrap_or_default()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl From<&SimulationTable> for Table {
    fn from(t: &SimulationTable) -> Self {
        let mut out = Table::new(&TRADEOFF_COLUMNS);
        for r in &t.rows {
            out.rows.push(vec![
                Some(r.m as f64),
                Some(r.r_v),
                r.precision,
                r.recall,
                r.f_beta,
                Some(r.is_rv_star as u8 as f64),
                Some(r.is_fbeta_argmax as u8 as f64),
            ]);
        }
        out
    }
}

pub(crate) const BOUND_COLUMNS: [&str; 7] =
    ["m", "r_V", "precision_worst", "precision_pnorm", "precision_avg", "w2_lower", "is_rv_star"];

/// Every bound as a function of `r_V`, on `points` log-spaced multiples of
/// `rv*` in `[0.05, 2]` plus `rv*` itself, for each `m`. The average-case
/// bound uses `δ² = (R² − r_U²)/2`.
pub fn bound_curve(n: usize, m_list: &[usize], radius: f64, r_u: f64, lipschitz: f64, points: usize) -> Result<Table> {
    let mut out = Table::new(&BOUND_COLUMNS);
    let delta = default_delta(radius, r_u);
    for &m in m_list {
        let rv_star = optimal_rv(n, m, radius, r_u, lipschitz)?;
        let mut grid = log_grid(0.05 * rv_star, 2.0 * rv_star, points.max(2));
        let at = grid.partition_point(|&r| r < rv_star);
        if grid.get(at) != Some(&rv_star) {
            grid.insert(at, rv_star);
        }
        for r_v in grid {
            let p = BoundParams::new(n, m, radius, r_u, r_v, lipschitz)?;
            let avg = precision_bound_avg(&AvgCaseParams::new(p, delta)?)?;
            out.rows.push(vec![
                Some(m as f64),
                Some(r_v),
                Some(precision_bound_worst(&p)),
                Some(precision_bound_pnorm(&p)),
                Some(avg.bound),
                Some(w2_lower_bound(&p)),
                Some((r_v == rv_star) as u8 as f64),
            ]);
        }
    }
    Ok(out)
}
