use std::io::Write;

use nalgebra::DVector;

/// One recorded iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `tau_k = gamma_1 + ... + gamma_k`, with `tau_0 = 0`.
    pub tau: f64,
    /// `gamma_k`, the step that produced `x_k` (0 for `k = 0`).
    pub gamma: f64,
    pub x: DVector<f64>,
    /// Direction taken from `x_k`.
    pub s: DVector<f64>,
    /// Frank-Wolfe gap `V(x_k)`.
    pub gap: f64,
    /// `||x_k - x*||` when a reference solution was supplied.
    pub dist: Option<f64>,
}

/// Iterates of one solver run plus summary statistics over all iterates,
/// including those dropped by thinning.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    /// Row spacing; 1 means every iterate was recorded.
    pub stride: usize,
    /// Index of the last iterate.
    pub iterations: usize,
    /// Smallest gap over every iterate of the run.
    pub min_gap: f64,
    /// Whether the running-min gap reached `gap_tol > 0`.
    pub converged: bool,
}

impl SolverTrace {
    pub fn is_thinned(&self) -> bool {
        self.stride > 1
    }

    pub fn last(&self) -> &TraceRow {
        // a trace always holds the k = 0 row
        self.rows.last().expect("trace has at least one row")
    }

    pub fn final_gap(&self) -> f64 {
        self.last().gap
    }

    /// Running minimum of the gap over the recorded rows.
    pub fn running_min_gap(&self) -> Vec<f64> {
        self.rows
            .iter()
            .scan(f64::INFINITY, |m, r| {
                *m = m.min(r.gap);
                Some(*m)
            })
            .collect()
    }

    /// CSV with header `k,tau,gamma,gap,dist,x_0..,s_0..`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.rows.first().map_or(0, |r| r.x.len());
        write_header(&mut w, n, true)?;
        for r in &self.rows {
            write!(w, "{},{},{},{},", r.k, fmt_f64(r.tau), fmt_f64(r.gamma), fmt_f64(r.gap))?;
            if let Some(d) = r.dist {
                write!(w, "{}", fmt_f64(d))?;
            }
            for v in r.x.iter().chain(r.s.iter()) {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn write_header<W: Write>(w: &mut W, n: usize, with_s: bool) -> std::io::Result<()> {
    write!(w, "k,tau,gamma,gap,dist")?;
    for i in 0..n {
        write!(w, ",x_{i}")?;
    }
    if with_s {
        for i in 0..n {
            write!(w, ",s_{i}")?;
        }
    }
    writeln!(w)
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
