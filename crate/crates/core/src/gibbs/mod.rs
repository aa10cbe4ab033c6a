//! Quenched Monte Carlo: single-site Metropolis and heat-bath sweeps in
//! checkerboard order, with Dirichlet clamping and a random field.

mod experiment;
pub mod stats;

pub use experiment::{
    run_quenched_experiment, write_records, BoundaryMode, DirichletSet, ExperimentConfig, ExperimentResult,
    FieldConfig, FieldSite, ObservableRecord, ObservableSpec, OutputFormat, Start, SweepConfig,
};

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::disorder::{self, DisorderField, FieldPhases};
use crate::error::{Error, Result};
use crate::lattice::{BoundarySpec, Lattice};
use crate::model::{Model, ModelKind};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMethod {
    Metropolis,
    HeatBath,
}

impl UpdateMethod {
    /// Heat bath where the model has one, Metropolis otherwise.
    pub fn preferred(kind: ModelKind) -> Self {
        let hb = crate::with_model!(kind, M => <M as Model>::HEAT_BATH);
        if hb {
            UpdateMethod::HeatBath
        } else {
            UpdateMethod::Metropolis
        }
    }
}

/// Sweeps between proposal-width adjustments during burn-in.
const TUNE_EVERY: u64 = 20;

pub struct QuenchedState<M: Model> {
    lattice: Arc<Lattice>,
    disorder: Arc<DisorderField<M>>,
    phases: Option<Arc<FieldPhases>>,
    spins: Vec<M::Spin>,
    clamped: Vec<bool>,
    by_color: [Vec<u32>; 2],
    beta: f64,
    width: f64,
    sweeps: u64,
    accepted: u64,
    proposed: u64,
    rng: StreamRng,
}

impl<M: Model> QuenchedState<M> {
    /// Hot start: free spins uniform, clamped spins at the clamp value.
    pub fn new(
        lattice: Arc<Lattice>,
        disorder: Arc<DisorderField<M>>,
        beta: f64,
        boundary: &BoundarySpec,
        mut rng: StreamRng,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta = {beta} must be positive and finite")));
        }
        if disorder.len() != lattice.num_edges() {
            return Err(Error::InvalidArgument("disorder and lattice edge sets differ".into()));
        }
        let n = lattice.num_vertices();
        let clamped = boundary.clamped_mask(n)?;
        let spins = clamped
            .iter()
            .map(|&c| if c { M::clamp_value() } else { M::random_spin(&mut rng) })
            .collect();
        let mut by_color = [Vec::new(), Vec::new()];
        for v in (0..n).filter(|&v| !clamped[v]) {
            by_color[lattice.color(v)].push(v as u32);
        }
        Ok(Self {
            lattice,
            disorder,
            phases: None,
            spins,
            clamped,
            by_color,
            beta,
            width: M::MAX_WIDTH / 2.0,
            sweeps: 0,
            accepted: 0,
            proposed: 0,
            rng,
        })
    }

    /// Attach a random field; only the circle model couples to one.
    pub fn with_phases(mut self, phases: Arc<FieldPhases>) -> Result<Self> {
        if phases.h.len() != self.spins.len() {
            return Err(Error::InvalidArgument("field table does not match the vertex count".into()));
        }
        if M::KIND != ModelKind::Xy && !phases.is_inert() {
            return Err(Error::InvalidArgument(format!("random field is not defined for {}", M::KIND)));
        }
        self.phases = Some(phases);
        Ok(self)
    }

    /// Set every free spin to the clamp value.
    pub fn cold_start(&mut self) {
        for (s, &c) in self.spins.iter_mut().zip(&self.clamped) {
            if !c {
                *s = M::clamp_value();
            }
        }
    }

    pub fn set_spins(&mut self, spins: Vec<M::Spin>) -> Result<()> {
        if spins.len() != self.spins.len() {
            return Err(Error::InvalidArgument("wrong number of spins".into()));
        }
        if spins.iter().zip(&self.spins).zip(&self.clamped).any(|((a, b), &c)| c && a != b) {
            return Err(Error::InvalidArgument("clamped spins cannot be changed".into()));
        }
        self.spins = spins;
        Ok(())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn disorder(&self) -> &DisorderField<M> {
        &self.disorder
    }
    pub fn phases(&self) -> Option<&FieldPhases> {
        self.phases.as_deref()
    }
    pub fn spins(&self) -> &[M::Spin] {
        &self.spins
    }
    pub fn is_clamped(&self, v: usize) -> bool {
        self.clamped[v]
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn acceptance(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Local field of `v`, with edge weights `scale * J_e` and the site field unscaled.
    #[inline]
    fn local_field(&self, v: usize, scale: f64) -> M::Field {
        let mut f = M::zero_field();
        for nb in self.lattice.neighbors(v) {
            let e = nb.edge as usize;
            let l = self.disorder.oriented(e, nb.forward);
            M::add_to_field(&mut f, scale * self.lattice.coupling(e), l, self.spins[nb.vertex as usize]);
        }
        if let Some(p) = &self.phases {
            if p.h[v] != 0.0 {
                M::add_field_term(&mut f, p.h[v], p.phases[v]);
            }
        }
        f
    }

    /// `Σ_{j~v} J_vj I(candidate, Ω_vj, s_j) + h_v cos(θ + ψ_v)`, before the factor `β`.
    pub fn local_energy(&self, v: usize, candidate: M::Spin) -> Result<f64> {
        if self.clamped[v] {
            return Err(Error::ClampedVertex(v));
        }
        Ok(M::field_value(&self.local_field(v, 1.0), candidate))
    }

    pub fn metropolis_sweep(&mut self) {
        for color in 0..2 {
            for k in 0..self.by_color[color].len() {
                let v = self.by_color[color][k] as usize;
                let f = self.local_field(v, self.beta);
                let old = self.spins[v];
                let new = M::propose(&mut self.rng, old, self.width);
                let delta = M::field_value(&f, new) - M::field_value(&f, old);
                self.proposed += 1;
                if delta >= 0.0 || self.rng.random::<f64>() < delta.exp() {
                    self.spins[v] = M::renormalize(new);
                    self.accepted += 1;
                }
            }
        }
        self.sweeps += 1;
    }

    pub fn heat_bath_sweep(&mut self) -> Result<()> {
        if !M::HEAT_BATH {
            return Err(Error::InvalidArgument(format!("{} has no heat-bath update", M::KIND)));
        }
        for color in 0..2 {
            for k in 0..self.by_color[color].len() {
                let v = self.by_color[color][k] as usize;
                let f = self.local_field(v, self.beta);
                self.spins[v] = M::renormalize(M::heat_bath(&mut self.rng, &f));
            }
        }
        self.sweeps += 1;
        Ok(())
    }

    pub fn sweep(&mut self, method: UpdateMethod) -> Result<()> {
        match method {
            UpdateMethod::Metropolis => {
                self.metropolis_sweep();
                Ok(())
            }
            UpdateMethod::HeatBath => self.heat_bath_sweep(),
        }
    }

    /// Rescale the Metropolis step towards 40-60% acceptance and reset the counters.
    pub fn tune_width(&mut self) {
        let rate = self.acceptance();
        if self.proposed > 0 {
            if rate < 0.4 {
                self.width *= 0.5 + rate;
            } else if rate > 0.6 {
                self.width = (self.width * (0.4 + rate)).min(M::MAX_WIDTH);
            }
        }
        self.accepted = 0;
        self.proposed = 0;
    }

    /// Burn-in sweeps; Metropolis widths are tuned along the way.
    pub fn burn_in(&mut self, sweeps: u64, method: UpdateMethod) -> Result<()> {
        for k in 0..sweeps {
            self.sweep(method)?;
            if method == UpdateMethod::Metropolis && (k + 1) % TUNE_EVERY == 0 {
                self.tune_width();
            }
        }
        self.accepted = 0;
        self.proposed = 0;
        Ok(())
    }

    pub fn measure_two_point(&self, x: usize, y: usize) -> f64 {
        M::two_point(self.spins[x], self.spins[y])
    }

    pub fn measure_magnetization(&self, x: usize) -> f64 {
        M::magnetization(self.spins[x])
    }

    /// `-Σ_e J_e I_e`: the instantaneous value whose mean is `-∂ log Z / ∂β`.
    pub fn measure_internal_energy(&self) -> f64 {
        -disorder::interaction_sum(&self.lattice, &self.disorder, &self.spins)
    }

    pub fn measure_internal_energy_per_edge(&self) -> f64 {
        self.measure_internal_energy() / self.lattice.num_edges().max(1) as f64
    }

    /// Exponent of the Gibbs weight at the current configuration.
    pub fn log_weight(&self) -> f64 {
        disorder::log_weight(&self.lattice, &self.disorder, &self.spins, self.phases(), self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::sample_disorder;
    use crate::model::{Su2Model, Xy};
    use crate::rng::{stream, Purpose};
    use num_complex::Complex64;

    fn xy_state(dims: &[i64], beta: f64, boundary: BoundarySpec) -> QuenchedState<Xy> {
        let lat = Arc::new(Lattice::build_box(dims, &[]).unwrap());
        let d = Arc::new(sample_disorder::<Xy>(&lat, beta, 1, 0).unwrap());
        QuenchedState::new(lat, d, beta, &boundary, stream(1, 0, Purpose::Mcmc)).unwrap()
    }

    #[test]
    fn local_energy_single_edge() {
        let lat = Arc::new(Lattice::build_box(&[2], &[]).unwrap());
        let d = Arc::new(DisorderField::<Xy>::identity(&lat));
        let mut s = QuenchedState::new(lat, d, 1.0, &BoundarySpec::Free, stream(0, 0, Purpose::Mcmc)).unwrap();
        s.cold_start();
        assert_eq!(s.local_energy(0, Xy::clamp_value()).unwrap(), 1.0);
    }

    #[test]
    fn clamped_vertices_never_move() {
        let b = BoundarySpec::dirichlet(vec![0, 5, 10]).unwrap();
        let mut s = xy_state(&[4, 4], 1.0, b);
        assert!(matches!(s.local_energy(0, Complex64::new(1.0, 0.0)), Err(Error::ClampedVertex(0))));
        for _ in 0..500 {
            s.heat_bath_sweep().unwrap();
            s.metropolis_sweep();
        }
        for v in [0, 5, 10] {
            assert_eq!(s.spins()[v], Xy::clamp_value());
        }
    }

    #[test]
    fn tuning_reaches_the_acceptance_window() {
        let lat = Arc::new(Lattice::build_box(&[6, 6], &[]).unwrap());
        let d = Arc::new(sample_disorder::<Su2Model>(&lat, 4.0, 2, 0).unwrap());
        let mut s = QuenchedState::new(lat, d, 4.0, &BoundarySpec::Free, stream(2, 0, Purpose::Mcmc)).unwrap();
        s.burn_in(400, UpdateMethod::Metropolis).unwrap();
        for _ in 0..100 {
            s.metropolis_sweep();
        }
        let a = s.acceptance();
        assert!((0.3..=0.7).contains(&a), "acceptance {a}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let lat = Arc::new(Lattice::build_box(&[3], &[]).unwrap());
        let d = Arc::new(DisorderField::<Xy>::identity(&lat));
        assert!(QuenchedState::new(lat.clone(), d.clone(), 0.0, &BoundarySpec::Free, stream(0, 0, Purpose::Mcmc)).is_err());
        let other = Arc::new(Lattice::build_box(&[4], &[]).unwrap());
        let d4 = Arc::new(DisorderField::<Xy>::identity(&other));
        assert!(QuenchedState::new(lat, d4, 1.0, &BoundarySpec::Free, stream(0, 0, Purpose::Mcmc)).is_err());
    }

    #[test]
    fn aligned_spins_give_minus_edge_count() {
        let mut s = xy_state(&[3, 3], 1.0, BoundarySpec::Free);
        let lat = s.lattice.clone();
        s.disorder = Arc::new(DisorderField::identity(&lat));
        s.cold_start();
        assert_eq!(s.measure_internal_energy(), -(lat.num_edges() as f64));
        assert_eq!(s.measure_two_point(0, 8), 1.0);
    }
}
