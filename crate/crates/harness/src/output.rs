//! Result rows and their CSV form. The column set and order are fixed.

use std::io::Write;

use spikes_core::stats::{CountStats, SpaceTimeBox};

use crate::config::MethodChoice;
use crate::error::Result;
use crate::setup::Built;

pub const COLUMNS: [&str; 18] = [
    "model",
    "gamma",
    "gamma2",
    "t0",
    "t1",
    "a",
    "b",
    "n_total",
    "n_conditioned",
    "mean_per_time",
    "sem_mean",
    "var_per_time",
    "sem_var",
    "lambda_theory",
    "dispersion",
    "seed",
    "method",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model: String,
    pub gamma: f64,
    pub gamma2: Option<f64>,
    pub t0: f64,
    pub t1: f64,
    pub a: f64,
    pub b: f64,
    pub n_total: u64,
    pub n_conditioned: u64,
    pub mean_per_time: f64,
    pub sem_mean: f64,
    pub var_per_time: f64,
    pub sem_var: f64,
    pub lambda_theory: Option<f64>,
    pub dispersion: f64,
    pub sem_dispersion: f64,
    pub seed: u64,
    pub method: MethodChoice,
    pub wall_time_s: Option<f64>,
}

impl ResultRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        built: &Built,
        gamma: f64,
        bx: &SpaceTimeBox,
        stats: &CountStats,
        lambda_theory: Option<f64>,
        seed: u64,
        method: MethodChoice,
        wall_time_s: Option<f64>,
    ) -> Self {
        let (mean, sem, var, sem_var) = stats.per_time(bx.duration());
        ResultRow {
            model: built.tag.clone(),
            gamma,
            gamma2: built.gamma2,
            t0: bx.t0,
            t1: bx.t1,
            a: bx.a,
            b: bx.b,
            n_total: stats.n_traj_total,
            n_conditioned: stats.n_traj_conditioned,
            mean_per_time: mean,
            sem_mean: sem,
            var_per_time: var,
            sem_var,
            lambda_theory,
            dispersion: stats.dispersion,
            sem_dispersion: stats.sem_dispersion,
            seed,
            method,
            wall_time_s,
        }
    }

    /// Non-finite values and absent fields are written empty.
    pub fn fields(&self) -> Vec<String> {
        let num = |x: f64| if x.is_finite() { format!("{x}") } else { String::new() };
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let method = match self.method {
            MethodChoice::Exact => "exact",
            MethodChoice::Euler => "euler",
        };
        vec![
            self.model.clone(),
            num(self.gamma),
            opt(self.gamma2),
            num(self.t0),
            num(self.t1),
            num(self.a),
            num(self.b),
            self.n_total.to_string(),
            self.n_conditioned.to_string(),
            num(self.mean_per_time),
            num(self.sem_mean),
            num(self.var_per_time),
            num(self.sem_var),
            opt(self.lambda_theory),
            num(self.dispersion),
            self.seed.to_string(),
            method.to_string(),
            opt(self.wall_time_s),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
