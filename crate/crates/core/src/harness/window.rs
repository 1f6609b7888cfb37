//! Quartile crossing times of the exact d_TV curve.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::dist::DistVector;
use crate::exact::measure::step_measure;
use crate::exact::spectral::{EvolveOptions, Evolver};
use crate::group::{GeneratorSet, GroupParams};

pub const UPPER_LEVEL: f64 = 0.75;
pub const LOWER_LEVEL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    /// d_TV(t_lo) = 0.75
    pub t_lo: f64,
    /// d_TV(t_hi) = 0.25
    pub t_hi: f64,
    pub t0: f64,
    /// `(t_hi - t_lo) / t₀`
    pub ratio: f64,
}

fn crossing(ev: &Evolver, level: f64, rel_tol: f64, opts: EvolveOptions) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut guard = 0;
    while ev.tv(hi, opts)? > level {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NonConvergence(format!("no bracket for d_TV = {level}")));
        }
    }
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if ev.tv(mid, opts)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence(format!("bisection for d_TV = {level}")))
}

pub fn window_locate(gs: &GeneratorSet, p: &GroupParams, t0: f64, rel_tol: f64, opts: EvolveOptions) -> Result<Window> {
    if !(t0 > 0.0) {
        return Err(Error::Domain("t0 must be > 0".into()));
    }
    let ev = Evolver::new(&DistVector::identity(p), &step_measure(gs, p), p);
    let t_lo = crossing(&ev, UPPER_LEVEL, rel_tol, opts)?;
    let t_hi = crossing(&ev, LOWER_LEVEL, rel_tol, opts)?;
    Ok(Window {
        t_lo,
        t_hi,
        t0,
        ratio: (t_hi - t_lo) / t0,
    })
}
