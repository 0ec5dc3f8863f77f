use std::sync::Arc;

use crate::domain::{Domain, Parity, Regime};
use crate::error::{Error, Result};
use crate::field::{Field, Rank};
use crate::ops::gradient;

/// One time slice of an iterate.
///
/// In the Neumann regime `y` is the mean-free director part, `x` the mean
/// correction and `b_mean` the data mean, so `d = x + y + b_mean`. In the
/// Dirichlet regime `y` holds `delta = d - e`, `x` is zero and `b_mean`
/// holds `e`.
#[derive(Clone, Debug)]
pub struct State {
    pub regime: Regime,
    pub t: f64,
    pub u: Field,
    pub y: Field,
    pub x: [f64; 3],
    pub b_mean: [f64; 3],
}

impl State {
    pub fn domain(&self) -> &Arc<Domain> {
        self.u.domain()
    }

    /// Constant part of the director: `x + b_mean`, or `e`.
    pub fn offset(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.x[i] + self.b_mean[i])
    }

    /// Director samples per component.
    pub fn director_values(&self) -> Vec<Vec<f64>> {
        let off = self.offset();
        (0..3)
            .map(|i| self.y.values(i).iter().map(|v| v + off[i]).collect())
            .collect()
    }

    /// The director as a field. Stored with even symmetry because it contains
    /// a constant; its gradient is [`State::grad_director`].
    pub fn director(&self) -> Field {
        Field::from_values(self.domain(), Rank::Vector(3), self.director_values(), &[Parity::EVEN; 3])
            .expect("director has three components")
    }

    /// `grad d = grad y` as a `3 x dim` tensor.
    pub fn grad_director(&self) -> Field {
        gradient(&self.y).expect("director part is a vector field")
    }
}

/// One Picard iterate sampled on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    states: Vec<State>,
}

impl Trajectory {
    /// Validates a shared domain and regime and strictly increasing times.
    pub fn new(states: Vec<State>) -> Result<Trajectory> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("a trajectory needs at least one state".into()))?;
        for w in states.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidArgument(format!(
                    "times must increase strictly, got {} then {}",
                    w[0].t, w[1].t
                )));
            }
        }
        if states
            .iter()
            .any(|s| !Arc::ptr_eq(s.domain(), first.domain()) || s.regime != first.regime)
        {
            return Err(Error::InvalidArgument(
                "trajectory states must share domain and regime".into(),
            ));
        }
        Ok(Trajectory { states })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("non-empty by construction")
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.states[0].domain()
    }

    pub fn regime(&self) -> Regime {
        self.states[0].regime
    }
}
