//! Tabulated no-click flow and cumulative hazard from a fixed start.
//!
//! Resetting channels restart every segment at the same point, so the flow
//! x(t) and the hazard Λ(t) = ∫ rate(x(s)) ds from that point are tabulated
//! once, as cubic Hermite data (the slopes are the drift and the rate). A click
//! time for an Exp(1) draw E is the root of Λ(t) = E. A second table holds t
//! and x as functions of Λ so that most draws cost one interpolation; cells
//! where the rate vanishes fall back to Newton on the forward table. Past the
//! cutoff, where the flow sits within 1e-12 of the domain width from its fixed
//! point, the hazard is linear with the fixed-point rate.

use crate::error::{Error, Result};
use crate::numerics::ode::{self, Tolerance};
use crate::numerics::{hermite, hermite_slope};
use crate::pdmp::model::PdmpModel;

#[derive(Debug, Clone, Copy)]
struct Node {
    t: f64,
    x: f64,
    dx: f64,
    lam: f64,
    rate: f64,
}

#[derive(Debug, Clone)]
pub struct FlowTable {
    pub x0: f64,
    nodes: Vec<Node>,
    pub t_cut: f64,
    pub lam_cut: f64,
    pub x_fp: f64,
    pub rate_fp: f64,
    inv: Vec<InvNode>,
    guide: Vec<u32>,
    guide_scale: f64,
}

/// Node of the inverse table: time and state as functions of Λ, with slopes
/// 1/rate and drift/rate. `newton` marks a cell starting here whose inverse is
/// not smooth enough (a vanishing rate) and is solved on the forward table.
#[derive(Debug, Clone, Copy)]
struct InvNode {
    lam: f64,
    t: f64,
    x: f64,
    dt: f64,
    dx: f64,
    newton: bool,
}

const MAX_NODES: usize = 400_000;
const STEP_TOL: Tolerance = Tolerance { abs: 1e-14, rel: 1e-14 };

impl FlowTable {
    pub fn build(model: &PdmpModel, x0: f64) -> Result<Self> {
        let fp = model.fixed_point_from(x0);
        let width = model.domain.width();
        let tol_x = 1e-12 * width;
        let node = |t: f64, x: f64, lam: f64| Node { t, x, dx: (model.drift)(x), lam, rate: model.total_rate(x) };
        let mut nodes: Vec<Node>;
        if (x0 - fp).abs() <= tol_x || (model.drift)(x0) == 0.0 {
            nodes = vec![node(0.0, x0, 0.0)];
        } else if let (Some(flow), Some(ls)) = (&model.closed_flow, &model.closed_log_survival) {
            let t_cut = model.cutoff_time(x0, fp, tol_x)?;
            let eval = |t: f64| node(t, model.domain.clamp(flow(x0, t)), -ls(x0, t));
            let n0 = 64;
            nodes = (0..=n0).map(|i| eval(t_cut * i as f64 / n0 as f64)).collect();
            nodes[0] = node(0.0, x0, 0.0);
            refine(&mut nodes, width, |_, t| Ok(eval(t)))?;
        } else {
            nodes = vec![node(0.0, x0, 0.0)];
            let f = |y: &[f64; 2]| [(model.drift)(y[0]), model.total_rate(y[0])];
            let mut y = [x0, 0.0];
            // Integrate until the flow settles; the horizon is generous and
            // hitting it is an error.
            let d0 = (model.drift)(x0).abs();
            let horizon = 1e6 * (fp - x0).abs() / d0;
            let mut settled = false;
            ode::integrate(&f, &mut y, horizon, STEP_TOL, None, |t, y, dy| {
                nodes.push(Node { t, x: y[0], dx: dy[0], lam: y[1], rate: dy[1] });
                if (y[0] - fp).abs() <= tol_x {
                    settled = true;
                    return false;
                }
                nodes.len() < MAX_NODES
            })?;
            if !settled {
                return Err(Error::Numerical(format!("flow from {x0} did not reach its fixed point {fp}")));
            }
            refine(&mut nodes, width, |a: &Node, t| {
                let y = ode::solve(f, [a.x, a.lam], t - a.t, STEP_TOL)?;
                Ok(node(t, y[0], y[1]))
            })?;
        }
        let last = *nodes.last().unwrap();
        let x_fp = if nodes.len() > 1 { fp } else { x0 };
        let rate_fp = model.total_rate(x_fp);
        let mut table = FlowTable {
            x0,
            t_cut: last.t,
            lam_cut: last.lam,
            x_fp,
            rate_fp,
            nodes,
            inv: Vec::new(),
            guide: Vec::new(),
            guide_scale: 0.0,
        };
        table.build_inverse(width)?;
        Ok(table)
    }

    fn build_inverse(&mut self, width: f64) -> Result<()> {
        let inv_node = |n: &Node| InvNode {
            lam: n.lam,
            t: n.t,
            x: n.x,
            dt: 1.0 / n.rate,
            dx: n.dx / n.rate,
            newton: false,
        };
        let mut out: Vec<InvNode> = vec![inv_node(&self.nodes[0])];
        let mut stack: Vec<InvNode> = self.nodes[1..].iter().rev().map(inv_node).collect();
        while let Some(b) = stack.pop() {
            let a = *out.last().unwrap();
            let h = b.lam - a.lam;
            if !(h > 0.0) {
                continue;
            }
            if !(a.dt.is_finite() && b.dt.is_finite()) {
                out.last_mut().unwrap().newton = true;
                out.push(b);
                continue;
            }
            let mut ok = true;
            for s in [0.25, 0.5, 0.75] {
                let (t, x) = self.invert(a.lam + s * h);
                let ti = hermite(a.t, b.t, a.dt, b.dt, h, s);
                let xi = hermite(a.x, b.x, a.dx, b.dx, h, s);
                if (ti - t).abs() > 1e-13 * t || (xi - x).abs() > 1e-13 * width {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.push(b);
            } else if h < 1e-9 * b.lam.max(1e-300) || out.len() + stack.len() > MAX_NODES {
                out.last_mut().unwrap().newton = true;
                out.push(b);
            } else {
                let lam = a.lam + 0.5 * h;
                let (t, x) = self.invert(lam);
                let i = self.nodes.partition_point(|n| n.t <= t).clamp(1, self.nodes.len() - 1) - 1;
                let (na, nb) = (&self.nodes[i], &self.nodes[i + 1]);
                let s = (t - na.t) / (nb.t - na.t);
                let rate = hermite_slope(na.lam, nb.lam, na.rate, nb.rate, nb.t - na.t, s);
                let dx = hermite_slope(na.x, nb.x, na.dx, nb.dx, nb.t - na.t, s);
                stack.push(b);
                stack.push(InvNode { lam, t, x, dt: 1.0 / rate, dx: dx / rate, newton: false });
            }
        }
        let cells = out.len().saturating_sub(1);
        let g = (4 * cells).max(1);
        self.guide_scale = if self.lam_cut > 0.0 { g as f64 / self.lam_cut } else { 0.0 };
        self.guide = Vec::with_capacity(g);
        let mut i = 0usize;
        for j in 0..g {
            let v = j as f64 / self.guide_scale;
            while i + 1 < cells && out[i + 1].lam <= v {
                i += 1;
            }
            self.guide.push(i as u32);
        }
        self.inv = out;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes of the inverse (sampling) table.
    pub fn inverse_len(&self) -> usize {
        self.inv.len()
    }

    /// Click time and pre-click state for an Exp(1) draw, `None` when the
    /// hazard saturates (no click ever).
    #[inline]
    pub fn sample(&self, e: f64) -> Option<(f64, f64)> {
        if e >= self.lam_cut {
            if self.rate_fp <= 0.0 {
                return None;
            }
            return Some((self.t_cut + (e - self.lam_cut) / self.rate_fp, self.x_fp));
        }
        let j = ((e * self.guide_scale) as usize).min(self.guide.len() - 1);
        let mut i = self.guide[j] as usize;
        while self.inv[i + 1].lam <= e {
            i += 1;
        }
        let (a, b) = (&self.inv[i], &self.inv[i + 1]);
        if a.newton {
            return Some(self.invert(e));
        }
        let h = b.lam - a.lam;
        let s = (e - a.lam) / h;
        Some((hermite(a.t, b.t, a.dt, b.dt, h, s), hermite(a.x, b.x, a.dx, b.dx, h, s)))
    }

    /// Solves Λ(t) = e on the forward table by safeguarded Newton.
    fn invert(&self, e: f64) -> (f64, f64) {
        let i = self.nodes.partition_point(|n| n.lam <= e).clamp(1, self.nodes.len() - 1) - 1;
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = b.t - a.t;
        let span = b.lam - a.lam;
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut s = if span > 0.0 { ((e - a.lam) / span).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let v = hermite(a.lam, b.lam, a.rate, b.rate, h, s) - e;
            if v > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let d = hermite_slope(a.lam, b.lam, a.rate, b.rate, h, s) * h;
            let mut next = if d > 0.0 { s - v / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - s).abs() < 1e-15 || hi - lo < 1e-15;
            s = next;
            if done {
                break;
            }
        }
        (a.t + s * h, hermite(a.x, b.x, a.dx, b.dx, h, s))
    }

    fn cell(&self, t: f64) -> usize {
        let i = self.nodes.partition_point(|n| n.t <= t);
        i.saturating_sub(1).min(self.nodes.len().saturating_sub(2))
    }

    pub fn state_at(&self, dt: f64) -> f64 {
        if dt >= self.t_cut || self.nodes.len() < 2 {
            return if dt >= self.t_cut { self.x_fp } else { self.x0 };
        }
        let i = self.cell(dt);
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = b.t - a.t;
        hermite(a.x, b.x, a.dx, b.dx, h, (dt - a.t) / h)
    }

    pub fn hazard_at(&self, dt: f64) -> f64 {
        if dt >= self.t_cut || self.nodes.len() < 2 {
            return self.lam_cut + (dt - self.t_cut).max(0.0) * self.rate_fp;
        }
        let i = self.cell(dt);
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = b.t - a.t;
        hermite(a.lam, b.lam, a.rate, b.rate, h, (dt - a.t) / h)
    }

    /// First time the tabulated flow reaches `c`, if it does before the cutoff.
    pub fn time_to_state(&self, c: f64) -> Option<f64> {
        if self.nodes.len() < 2 {
            return if c == self.x0 { Some(0.0) } else { None };
        }
        let up = self.x_fp > self.x0;
        let past = |x: f64| if up { x >= c } else { x <= c };
        let i = self.nodes.iter().position(|n| past(n.x))?;
        if i == 0 {
            return Some(0.0);
        }
        let (a, b) = (&self.nodes[i - 1], &self.nodes[i]);
        let h = b.t - a.t;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if past(hermite(a.x, b.x, a.dx, b.dx, h, m)) {
                hi = m;
            } else {
                lo = m;
            }
        }
        Some(a.t + hi * h)
    }
}

/// Splits cells until cubic Hermite interpolation of x and Λ matches the
/// evaluator at the quarter points.
fn refine<E>(nodes: &mut Vec<Node>, width: f64, eval: E) -> Result<()>
where
    E: Fn(&Node, f64) -> Result<Node>,
{
    let mut out: Vec<Node> = vec![nodes[0]];
    let mut stack: Vec<Node> = nodes[1..].iter().rev().copied().collect();
    while let Some(b) = stack.pop() {
        let a = *out.last().unwrap();
        let h = b.t - a.t;
        if h <= 0.0 {
            continue;
        }
        let mut ok = true;
        let mut mid = None;
        for s in [0.25, 0.5, 0.75] {
            let exact = eval(&a, a.t + s * h)?;
            let xi = hermite(a.x, b.x, a.dx, b.dx, h, s);
            let li = hermite(a.lam, b.lam, a.rate, b.rate, h, s);
            let tol_lam = 1e-13 * exact.lam.abs().max(1.0);
            if (xi - exact.x).abs() > 1e-13 * width || (li - exact.lam).abs() > tol_lam {
                ok = false;
            }
            if s == 0.5 {
                mid = Some(exact);
            }
        }
        if ok || h < 1e-15 * b.t.abs().max(1e-300) {
            out.push(b);
        } else {
            if out.len() + stack.len() > MAX_NODES {
                return Err(Error::Numerical("flow table refinement exceeded its node budget".into()));
            }
            stack.push(b);
            stack.push(mid.unwrap());
        }
    }
    *nodes = out;
    Ok(())
}
