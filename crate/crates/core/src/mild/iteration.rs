use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::etd::EtdWeights;
use super::nonlinear::{director_terms, eval_fu, minus_pdiv_coeffs};
use super::state::{State, Trajectory};
use crate::domain::{Domain, Regime};
use crate::error::{Error, Result};
use crate::field::{director_parities, velocity_parities, Field, Rank};
use crate::norms::{lp_norm, weighted_sup, DeltaQuantities, KQuantities, WeightedSupSpec};
use crate::ops::{gradient, leray_project};
use crate::semigroup::{decay_factors, scale_modes};

/// Seed of the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialIterate {
    /// `(e^{-tA} a, e^{-tB} b_s, 0)`.
    Linear,
    /// Identically zero; the first update then returns the linear trajectory.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardConfig {
    /// Data exponent of the weights.
    pub p: f64,
    /// Solution exponent of the weights.
    pub q: f64,
    /// Stop once `delta_j <= tol * (k-total of the linear trajectory)`.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialIterate,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { p: 3.0, q: 3.5, tol: 1e-10, max_iter: 40, initial: InitialIterate::Linear }
    }
}

/// Per-iterate record of the Picard run.
#[derive(Clone, Debug, Default)]
pub struct IterationTrace {
    /// `k_j` for `j = 0 ..= iterations_used`.
    pub k: Vec<KQuantities>,
    /// `delta_j` between iterates `j + 1` and `j`.
    pub deltas: Vec<DeltaQuantities>,
    /// `theta_j = delta_j / delta_{j-1}`; `None` for `j = 0` or a zero
    /// denominator.
    pub ratios: Vec<Option<f64>>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Absolute stopping threshold that was applied.
    pub threshold: f64,
    /// Largest `|P_c (u.grad) y|` seen in any source evaluation.
    pub max_transport: f64,
}

/// Spectral sources of one time slice.
#[derive(Clone, Debug)]
pub struct Source {
    /// `-P div G`.
    pub gu: Vec<Vec<Complex64>>,
    /// `F_y` or `F_delta`.
    pub gy: Vec<Vec<Complex64>>,
    pub fx: [f64; 3],
    pub transport: f64,
}

impl Source {
    fn is_finite(&self) -> bool {
        self.fx.iter().all(|v| v.is_finite())
            && self.gu.iter().chain(&self.gy).all(|c| c.iter().all(|z| z.is_finite()))
    }
}

/// Data, horizon and time grid of one mild problem.
#[derive(Clone, Debug)]
pub struct MildProblem {
    domain: Arc<Domain>,
    regime: Regime,
    a: Field,
    /// `b_s` (Neumann) or `b - e` (Dirichlet).
    y0: Field,
    b_mean: [f64; 3],
    b_sup: f64,
    horizon: f64,
    intervals: usize,
}

impl MildProblem {
    /// `a` is projected and made mean-free; `b` is taken by its samples. The
    /// Dirichlet regime needs the unit boundary vector `e`, the Neumann regime
    /// ignores it.
    pub fn new(
        a: &Field,
        b: &Field,
        e: Option<[f64; 3]>,
        horizon: f64,
        intervals: usize,
    ) -> Result<MildProblem> {
        let domain = a.domain().clone();
        let dim = domain.dim();
        if a.rank() != Rank::Vector(dim) {
            return Err(Error::Rank(format!("velocity data must be a {dim}-vector")));
        }
        if a.parities() != velocity_parities(&domain) {
            return Err(Error::BasisMismatch("velocity data lacks the free-slip symmetry".into()));
        }
        if b.rank() != Rank::Vector(3) || !Arc::ptr_eq(b.domain(), &domain) {
            return Err(Error::Rank("director data must be a 3-vector on the velocity domain".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if intervals == 0 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        let regime = domain.regime();
        let b_mean = match regime {
            Regime::Neumann => {
                let m = b.mean();
                [m[0], m[1], m[2]]
            }
            Regime::Dirichlet => {
                let e = e.ok_or_else(|| {
                    Error::InvalidArgument("the Dirichlet regime needs the boundary vector e".into())
                })?;
                let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("|e| must be 1, got {norm}")));
                }
                e
            }
        };
        let values = (0..3)
            .map(|i| b.values(i).iter().map(|v| v - b_mean[i]).collect())
            .collect();
        let y0 = Field::from_values(&domain, Rank::Vector(3), values, &director_parities(&domain))?;
        let y0 = match regime {
            // exact mean removal in coefficient space
            Regime::Neumann => y0.multiply(|i| if i == 0 { 0.0 } else { 1.0 }),
            Regime::Dirichlet => y0,
        };
        let ksq = &domain.ksq;
        let a = leray_project(a)?.multiply(|i| if ksq[i] == 0.0 { 0.0 } else { 1.0 });
        Ok(MildProblem {
            b_sup: b.magnitude().iter().fold(0.0, |m, &v| m.max(v)),
            domain,
            regime,
            a,
            y0,
            b_mean,
            horizon,
            intervals,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Projected, mean-free velocity data.
    pub fn velocity_data(&self) -> &Field {
        &self.a
    }

    /// `b_s` or `b - e`.
    pub fn director_data(&self) -> &Field {
        &self.y0
    }

    /// `b_mean` (Neumann) or `e` (Dirichlet).
    pub fn b_mean(&self) -> [f64; 3] {
        self.b_mean
    }

    /// `||b||_inf`.
    pub fn b_sup(&self) -> f64 {
        self.b_sup
    }

    pub fn times(&self) -> Vec<f64> {
        time_grid(self.horizon, self.intervals)
    }

    /// Same data on a different number of steps.
    pub fn with_intervals(&self, intervals: usize) -> MildProblem {
        MildProblem { intervals: intervals.max(1), ..self.clone() }
    }

    fn assemble(&self, t: f64, wu: &[Vec<Complex64>], wy: &[Vec<Complex64>], x: [f64; 3]) -> Result<State> {
        let decay = decay_factors(&self.domain.ksq, t);
        let lin = |f: &Field, w: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            (0..f.n_components())
                .map(|c| {
                    scale_modes(f.coeffs(c), &decay)
                        .iter()
                        .zip(&w[c])
                        .map(|(a, b)| a + b)
                        .collect()
                })
                .collect()
        };
        let u = Field::from_coeffs(&self.domain, self.a.rank(), lin(&self.a, wu), &self.a.parities())?;
        let y = Field::from_coeffs(&self.domain, Rank::Vector(3), lin(&self.y0, wy), &self.y0.parities())?;
        Ok(State { regime: self.regime, t, u, y, x, b_mean: self.b_mean })
    }

    /// Linear part at time `t`.
    pub fn linear_state_at(&self, t: f64) -> Result<State> {
        let dim = self.domain.dim();
        let n = self.domain.spectral_len();
        let zero = |c: usize| vec![vec![Complex64::default(); n]; c];
        self.assemble(t, &zero(dim), &zero(3), [0.0; 3])
    }

    /// Iterate 0: `(e^{-tA} a, e^{-tB} y_0, 0)` on the time grid.
    pub fn linear_trajectory(&self) -> Result<Trajectory> {
        self.linear_trajectory_at(&self.times())
    }

    /// Linear part on an arbitrary increasing grid.
    pub fn linear_trajectory_at(&self, times: &[f64]) -> Result<Trajectory> {
        let states = times
            .par_iter()
            .map(|&t| self.linear_state_at(t))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(states)
    }

    pub fn zero_trajectory(&self) -> Result<Trajectory> {
        let states = self
            .times()
            .into_iter()
            .map(|t| State {
                regime: self.regime,
                t,
                u: Field::zero_velocity(&self.domain),
                y: Field::zero_director(&self.domain),
                x: [0.0; 3],
                b_mean: self.b_mean,
            })
            .collect();
        Trajectory::new(states)
    }

    /// Nonlinear sources of one slice.
    pub fn source(&self, state: &State) -> Result<Source> {
        let grad_y = gradient(&state.y)?;
        let g = eval_fu(&state.u, &grad_y)?;
        let split = self.regime == Regime::Neumann;
        let terms = director_terms(&state.u, &grad_y, &state.y, state.offset(), split)?;
        Ok(Source {
            gu: minus_pdiv_coeffs(&g),
            gy: (0..3).map(|c| terms.source.coeffs(c).to_vec()).collect(),
            fx: terms.fx,
            transport: terms.transport.iter().fold(0.0, |m, v| m.max(v.abs())),
        })
    }

    /// ETD sweep over `intervals` uniform steps on `[0, horizon]`.
    ///
    /// `source_at(n)` supplies the sources at node `n`; they are consumed in
    /// order and only two are alive at a time. States are emitted at every
    /// `stride`-th node. Returns the states and the largest transport mean.
    pub fn duhamel_sweep(
        &self,
        intervals: usize,
        stride: usize,
        mut source_at: impl FnMut(usize) -> Result<Source>,
    ) -> Result<(Vec<State>, f64)> {
        let h = self.horizon / intervals as f64;
        let stride = stride.max(1);
        let weights = EtdWeights::new(&self.domain.ksq, h);
        let n = self.domain.spectral_len();
        let dim = self.domain.dim();
        let mut wu = vec![vec![Complex64::default(); n]; dim];
        let mut wy = vec![vec![Complex64::default(); n]; 3];
        let mut x = [0.0; 3];
        let checked = |k: usize, src: Source| -> Result<Source> {
            if src.is_finite() {
                Ok(src)
            } else {
                Err(Error::BlowUp {
                    node: k,
                    time: k as f64 * h,
                    what: "non-finite nonlinear source".into(),
                })
            }
        };
        let mut prev = checked(0, source_at(0)?)?;
        let mut transport = prev.transport;
        let mut out = vec![self.assemble(0.0, &wu, &wy, x)?];
        for step in 1..=intervals {
            let next = checked(step, source_at(step)?)?;
            transport = transport.max(next.transport);
            let advance = |w: &mut [Vec<Complex64>], g0: &[Vec<Complex64>], g1: &[Vec<Complex64>]| {
                for ((wc, a), b) in w.iter_mut().zip(g0).zip(g1) {
                    for j in 0..n {
                        wc[j] = wc[j] * weights.decay[j] + a[j] * weights.w_old[j] + b[j] * weights.w_new[j];
                    }
                }
            };
            advance(&mut wu, &prev.gu, &next.gu);
            advance(&mut wy, &prev.gy, &next.gy);
            for i in 0..3 {
                x[i] += 0.5 * h * (prev.fx[i] + next.fx[i]);
            }
            if step % stride == 0 || step == intervals {
                let t = grid_time(self.horizon, intervals, step);
                let state = self.assemble(t, &wu, &wy, x)?;
                if !(state.u.is_finite() && state.y.is_finite() && x.iter().all(|v| v.is_finite())) {
                    return Err(Error::BlowUp { node: step, time: t, what: "non-finite iterate".into() });
                }
                out.push(state);
            }
            prev = next;
        }
        Ok((out, transport))
    }

    /// One Picard update of a trajectory on this problem's grid.
    pub fn duhamel_update(&self, prev: &Trajectory) -> Result<Trajectory> {
        Ok(self.update_with_transport(prev)?.0)
    }

    fn update_with_transport(&self, prev: &Trajectory) -> Result<(Trajectory, f64)> {
        if prev.len() != self.intervals + 1 || !Arc::ptr_eq(prev.domain(), &self.domain) {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} nodes on its own grid, problem expects {}",
                prev.len(),
                self.intervals + 1
            )));
        }
        // sources depend only on the previous iterate: evaluate them all in
        // parallel, then run the sequential recurrence
        let sources: Vec<Result<Source>> = prev.states().par_iter().map(|s| self.source(s)).collect();
        let mut sources = sources.into_iter();
        let (states, transport) = self.duhamel_sweep(self.intervals, 1, |_| {
            sources.next().expect("one source per node")
        })?;
        Ok((Trajectory::new(states)?, transport))
    }

    fn spec(&self, config: &PicardConfig) -> Result<WeightedSupSpec> {
        WeightedSupSpec::new(config.p, config.q, self.domain.dim(), self.domain.omega())
    }
}

pub(crate) fn time_grid(horizon: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|n| grid_time(horizon, intervals, n)).collect()
}

fn grid_time(horizon: f64, intervals: usize, n: usize) -> f64 {
    if n == intervals {
        horizon
    } else {
        horizon * n as f64 / intervals as f64
    }
}

/// Per-node norms entering the k-quantities.
struct NodeNorms {
    u_q: f64,
    grad_y_q: f64,
    y_inf: f64,
    x_abs: f64,
}

fn node_norms(u: &Field, y: &Field, x: [f64; 3], q: f64) -> Result<NodeNorms> {
    Ok(NodeNorms {
        u_q: lp_norm(u, q)?,
        grad_y_q: lp_norm(&gradient(y)?, q)?,
        y_inf: lp_norm(y, f64::INFINITY)?,
        x_abs: x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    })
}

fn aggregate(times: &[f64], norms: &[NodeNorms], spec: &WeightedSupSpec) -> Result<[f64; 4]> {
    let plain = WeightedSupSpec::unweighted();
    let col = |f: fn(&NodeNorms) -> f64| norms.iter().map(f).collect::<Vec<f64>>();
    Ok([
        weighted_sup(times, &col(|n| n.u_q), spec)?,
        weighted_sup(times, &col(|n| n.grad_y_q), spec)?,
        weighted_sup(times, &col(|n| n.y_inf), &plain)?,
        weighted_sup(times, &col(|n| n.x_abs), &plain)?,
    ])
}

/// `k^u, k^{grad y}, k^y, k^x` of a trajectory.
pub fn k_quantities(traj: &Trajectory, spec: &WeightedSupSpec) -> Result<KQuantities> {
    let norms = traj
        .states()
        .par_iter()
        .map(|s| node_norms(&s.u, &s.y, s.x, spec.q))
        .collect::<Result<Vec<_>>>()?;
    let [k_u, k_grad_y, k_y, k_x] = aggregate(&traj.times(), &norms, spec)?;
    Ok(KQuantities { k_u, k_grad_y, k_y, k_x })
}

/// The same suprema applied to `next - prev`.
pub fn delta_quantities(next: &Trajectory, prev: &Trajectory, spec: &WeightedSupSpec) -> Result<DeltaQuantities> {
    if next.len() != prev.len() {
        return Err(Error::InvalidArgument("trajectories have different grids".into()));
    }
    let norms = next
        .states()
        .par_iter()
        .zip(prev.states())
        .map(|(a, b)| {
            let dx = [0, 1, 2].map(|i| a.x[i] - b.x[i]);
            node_norms(&a.u.sub(&b.u)?, &a.y.sub(&b.y)?, dx, spec.q)
        })
        .collect::<Result<Vec<_>>>()?;
    let [d_u, d_grad_y, d_y, d_x] = aggregate(&next.times(), &norms, spec)?;
    Ok(DeltaQuantities { d_u, d_grad_y, d_y, d_x })
}

/// Picard iteration from the configured seed until `delta_j` drops below
/// `tol` times the size of the linear trajectory or `max_iter` updates ran.
/// Non-convergence is reported in the trace, not as an error.
pub fn picard_solve(problem: &MildProblem, config: &PicardConfig) -> Result<(Trajectory, IterationTrace)> {
    if !(config.tol >= 0.0) || config.max_iter == 0 {
        return Err(Error::InvalidArgument("need tol >= 0 and max_iter >= 1".into()));
    }
    let spec = problem.spec(config)?;
    let linear = problem.linear_trajectory()?;
    let k_lin = k_quantities(&linear, &spec)?;
    let mut current = match config.initial {
        InitialIterate::Linear => linear,
        InitialIterate::Zero => problem.zero_trajectory()?,
    };
    let mut trace = IterationTrace {
        threshold: config.tol * k_lin.total(),
        ..IterationTrace::default()
    };
    trace.k.push(match config.initial {
        InitialIterate::Linear => k_lin,
        InitialIterate::Zero => KQuantities::default(),
    });
    for j in 0..config.max_iter {
        let (next, transport) = problem.update_with_transport(&current)?;
        trace.max_transport = trace.max_transport.max(transport);
        let d = delta_quantities(&next, &current, &spec)?;
        trace.k.push(k_quantities(&next, &spec)?);
        let ratio = match trace.deltas.last() {
            Some(prev) if j >= 1 && prev.total() > 0.0 => Some(d.total() / prev.total()),
            _ => None,
        };
        trace.ratios.push(ratio);
        trace.deltas.push(d);
        trace.iterations_used = j + 1;
        current = next;
        if d.total() <= trace.threshold {
            trace.converged = true;
            break;
        }
    }
    Ok((current, trace))
}
