//! Quenched disorder fields, random-field phases and gauge transformations.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::model::{Model, ModelKind};
use crate::rng::{self, Purpose};
use crate::spin::sampling;

/// One disorder value per canonical edge; the reverse orientation is derived on read.
#[derive(Debug, Clone)]
pub struct DisorderField<M: Model> {
    links: Vec<M::Link>,
}

impl<M: Model> PartialEq for DisorderField<M> {
    fn eq(&self, other: &Self) -> bool {
        self.links == other.links
    }
}

impl<M: Model> DisorderField<M> {
    pub fn from_links(lat: &Lattice, links: Vec<M::Link>) -> Result<Self> {
        if links.len() != lat.num_edges() {
            return Err(Error::InvalidArgument(format!(
                "{} disorder values for {} edges",
                links.len(),
                lat.num_edges()
            )));
        }
        Ok(Self { links })
    }

    /// `ω ≡ 0` / `Ω ≡ Id`.
    pub fn identity(lat: &Lattice) -> Self {
        Self { links: vec![M::link_identity(); lat.num_edges()] }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Value on the canonical orientation of edge `e`.
    pub fn canonical(&self, e: usize) -> M::Link {
        self.links[e]
    }

    pub fn links(&self) -> &[M::Link] {
        &self.links
    }

    #[inline]
    pub fn oriented(&self, e: usize, forward: bool) -> M::Link {
        if forward {
            self.links[e]
        } else {
            M::link_reverse(self.links[e])
        }
    }

    /// Value on the oriented edge `i -> j`.
    pub fn read(&self, lat: &Lattice, i: usize, j: usize) -> Result<M::Link> {
        let (e, fwd) = lat
            .edge_between(i, j)
            .ok_or_else(|| Error::InvalidArgument(format!("vertices {i} and {j} are not adjacent")))?;
        Ok(self.oriented(e, fwd))
    }

    pub fn to_record(&self, lat: &Lattice) -> DisorderRecord {
        DisorderRecord {
            model: M::KIND,
            edges: lat
                .edges()
                .iter()
                .zip(&self.links)
                .map(|(&(i, j), &l)| EdgeValue {
                    from: lat.vertex(i).to_vec(),
                    to: lat.vertex(j).to_vec(),
                    value: M::link_to_flat(l),
                })
                .collect(),
        }
    }

    pub fn from_record(lat: &Lattice, rec: &DisorderRecord) -> Result<Self> {
        if rec.model != M::KIND {
            return Err(Error::SpaceMismatch(format!("record is for {}, expected {}", rec.model, M::KIND)));
        }
        let mut links = vec![None; lat.num_edges()];
        for ev in &rec.edges {
            let i = lat.index_of(&ev.from).ok_or_else(|| Error::PathOutsideLattice(ev.from.clone()))?;
            let j = lat.index_of(&ev.to).ok_or_else(|| Error::PathOutsideLattice(ev.to.clone()))?;
            let (e, fwd) = lat
                .edge_between(i, j)
                .ok_or_else(|| Error::Parse(format!("{:?} and {:?} are not adjacent", ev.from, ev.to)))?;
            let l = M::link_from_flat(&ev.value)?;
            links[e] = Some(if fwd { l } else { M::link_reverse(l) });
        }
        let links = links
            .into_iter()
            .enumerate()
            .map(|(e, l)| l.ok_or_else(|| Error::Parse(format!("edge {e} missing from record"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { links })
    }
}

/// Text form of a disorder field: edge endpoints and the flat value on that orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRecord {
    pub model: ModelKind,
    pub edges: Vec<EdgeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeValue {
    pub from: Vec<i64>,
    pub to: Vec<i64>,
    pub value: Vec<f64>,
}

/// Independent draws from the disorder law at concentration `u` on every edge.
///
/// Edge `e` with coupling `J_e` uses concentration `u J_e`, and its stream is keyed by
/// `(master_seed, replica, e)` so the field does not depend on scheduling.
pub fn sample_disorder<M: Model>(lat: &Lattice, u: f64, master_seed: u64, replica: u64) -> Result<DisorderField<M>> {
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("disorder concentration u = {u} must be nonnegative")));
    }
    let base = rng::stream(master_seed, replica, Purpose::Disorder);
    let links = (0..lat.num_edges())
        .map(|e| {
            let mut r = rng::substream(&base, e as u64);
            M::sample_link(&mut r, u * lat.coupling(e))
        })
        .collect();
    Ok(DisorderField { links })
}

/// Random-field strengths `h_j` with phases `ψ_j`, stored as `e^{iψ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPhases {
    pub h: Vec<f64>,
    pub phases: Vec<Complex64>,
}

impl FieldPhases {
    pub fn zero(n: usize) -> Self {
        Self { h: vec![0.0; n], phases: vec![Complex64::new(1.0, 0.0); n] }
    }

    pub fn is_inert(&self) -> bool {
        self.h.iter().all(|&h| h == 0.0)
    }

    pub fn angles(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.arg().rem_euclid(std::f64::consts::TAU)).collect()
    }
}

/// `ψ_j` von Mises with concentration `h_j`; negative `h_j` centers the law at `π`.
pub fn sample_field_phases<R: Rng + ?Sized>(h: &[f64], rng: &mut R) -> FieldPhases {
    let phases = h
        .iter()
        .map(|&hj| {
            let p = sampling::von_mises_phase(rng, hj.abs());
            if hj < 0.0 {
                -p
            } else {
                p
            }
        })
        .collect();
    FieldPhases { h: h.to_vec(), phases }
}

/// `Σ_e J_e I(s_i, Ω_e, s_j)` over unoriented edges.
pub fn interaction_sum<M: Model>(lat: &Lattice, disorder: &DisorderField<M>, spins: &[M::Spin]) -> f64 {
    lat.edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| lat.coupling(e) * M::interaction(spins[i], disorder.canonical(e), spins[j]))
        .sum()
}

/// `Σ_j h_j cos(θ_j + ψ_j)`.
pub fn field_sum<M: Model>(phases: &FieldPhases, spins: &[M::Spin]) -> f64 {
    spins
        .iter()
        .zip(phases.h.iter().zip(&phases.phases))
        .map(|(&s, (&h, &p))| M::field_term(s, h, p))
        .sum()
}

/// Exponent of the quenched Gibbs weight: `β Σ_e J_e I_e + Σ_j h_j cos(θ_j + ψ_j)`.
pub fn log_weight<M: Model>(
    lat: &Lattice,
    disorder: &DisorderField<M>,
    spins: &[M::Spin],
    phases: Option<&FieldPhases>,
    beta: f64,
) -> f64 {
    beta * interaction_sum(lat, disorder, spins) + phases.map_or(0.0, |p| field_sum::<M>(p, spins))
}

pub struct Gauged<M: Model> {
    pub disorder: DisorderField<M>,
    pub spins: Option<Vec<M::Spin>>,
    pub phases: Option<FieldPhases>,
}

/// Joint change of variables by the vertex gauge `g`.
pub fn gauge_transform<M: Model>(
    lat: &Lattice,
    disorder: &DisorderField<M>,
    spins: Option<&[M::Spin]>,
    gauge: &[M::Gauge],
    phases: Option<&FieldPhases>,
) -> Result<Gauged<M>> {
    let n = lat.num_vertices();
    if gauge.len() != n {
        return Err(Error::InvalidArgument(format!("gauge has {} values for {n} vertices", gauge.len())));
    }
    let links = lat
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| M::gauge_link(gauge[i], disorder.canonical(e), gauge[j]))
        .collect();
    let spins = match spins {
        Some(s) if s.len() != n => {
            return Err(Error::InvalidArgument(format!("{} spins for {n} vertices", s.len())));
        }
        Some(s) => Some(s.iter().zip(gauge).map(|(&s, &g)| M::gauge_spin(g, s)).collect()),
        None => None,
    };
    let phases = phases.map(|p| FieldPhases {
        h: p.h.clone(),
        phases: p.phases.iter().zip(gauge).map(|(&p, &g)| M::gauge_phase(g, p)).collect(),
    });
    Ok(Gauged { disorder: DisorderField { links }, spins, phases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Heisenberg, Su2Model, Xy};
    use crate::quad;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reverse_reads_are_inverse() {
        let lat = Lattice::build_box(&[3, 3], &[]).unwrap();
        let d = sample_disorder::<Su2Model>(&lat, 1.0, 5, 0).unwrap();
        for &(i, j) in lat.edges() {
            let a = d.read(&lat, i, j).unwrap();
            let b = d.read(&lat, j, i).unwrap();
            let p = a.mul(b);
            assert!((p.a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_replica_dependent() {
        let lat = Lattice::build_box(&[4, 4], &[]).unwrap();
        let a = sample_disorder::<Xy>(&lat, 2.0, 9, 3).unwrap();
        let b = sample_disorder::<Xy>(&lat, 2.0, 9, 3).unwrap();
        let c = sample_disorder::<Xy>(&lat, 2.0, 9, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_disorder::<Xy>(&lat, -1.0, 9, 3).is_err());
    }

    #[test]
    fn xy_edge_mean_matches_bessel_ratio() {
        let lat = Lattice::build_box(&[2], &[]).unwrap();
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|r| sample_disorder::<Xy>(&lat, 2.0, 1, r).unwrap().canonical(0).re).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        let num = quad::periodic_trapezoid(|w| w.cos() * (2.0 * w.cos()).exp(), 256);
        let den = quad::periodic_trapezoid(|w| (2.0 * w.cos()).exp(), 256);
        assert!((m - num / den).abs() < 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn heisenberg_disorder_concentrates_at_large_beta() {
        let lat = Lattice::build_box(&[6, 6], &[]).unwrap();
        let d = sample_disorder::<Heisenberg>(&lat, 50.0, 2, 0).unwrap();
        let m = d.links().iter().map(|l| l[(2, 2)]).sum::<f64>() / d.len() as f64;
        assert!((m - 1.0).abs() < 0.1);
    }

    #[test]
    fn field_phases_concentrate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sample_field_phases(&vec![60.0; 10_000], &mut rng);
        let m = p.phases.iter().map(|z| z.re).sum::<f64>() / 10_000.0;
        assert!(m >= 0.99);
        let p = sample_field_phases(&vec![-60.0; 1000], &mut rng);
        assert!(p.phases.iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn record_round_trip() {
        let lat = Lattice::build_box(&[3, 2], &[]).unwrap();
        let d = sample_disorder::<Heisenberg>(&lat, 1.0, 4, 0).unwrap();
        let rec = d.to_record(&lat);
        let text = serde_json::to_string(&rec).unwrap();
        let back: DisorderRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(DisorderField::<Heisenberg>::from_record(&lat, &back).unwrap(), d);
        assert!(DisorderField::<Xy>::from_record(&lat, &back).is_err());
    }
}
