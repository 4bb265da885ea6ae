//! Index algebra between mode occupations, mode assignments and N-qudit
//! tensors, plus the post-selection predicate.
//!
//! Mode `d(k-1)+l` (1-based) is internal state `l` of spatial mode `k`. A
//! Fock state is post-selected when every group of `d` consecutive modes
//! holds exactly one particle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tensor::{CoefficientTensor, ZERO_AMPLITUDE};
use crate::{json, Error, Result, C64};

/// Particle count per mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeOccupation {
    counts: Vec<usize>,
}

impl ModeOccupation {
    pub fn new(counts: Vec<usize>) -> Self {
        ModeOccupation { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of modes `n`.
    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    /// Number of particles `N`.
    pub fn particles(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `∏_j r_j!`, the multiplicity of identical-particle permutations.
    pub fn factorial_product(&self) -> f64 {
        self.counts.iter().map(|&r| factorial(r)).product()
    }
}

impl From<Vec<usize>> for ModeOccupation {
    fn from(counts: Vec<usize>) -> Self {
        ModeOccupation::new(counts)
    }
}

/// Nondecreasing list of occupied modes (1-based) with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeAssignment {
    modes: Vec<usize>,
}

impl ModeAssignment {
    pub fn new(mut modes: Vec<usize>) -> Result<Self> {
        if modes.contains(&0) {
            return Err(Error::InvalidArgument("modes are 1-based".into()));
        }
        modes.sort_unstable();
        Ok(ModeAssignment { modes })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    /// Inverse of [`occupation_to_assignment`] for a system of `n` modes.
    pub fn to_occupation(&self, n: usize) -> Result<ModeOccupation> {
        let mut counts = vec![0; n];
        for &m in &self.modes {
            if m > n {
                return Err(Error::dim(format!("mode {m} outside 1..={n}")));
            }
            counts[m - 1] += 1;
        }
        Ok(ModeOccupation::new(counts))
    }
}

pub fn occupation_to_assignment(r: &ModeOccupation) -> ModeAssignment {
    let modes = r
        .counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c))
        .collect();
    ModeAssignment { modes }
}

/// True iff every group of `d` modes holds exactly one particle.
pub fn is_post_selected(r: &ModeOccupation, d: usize) -> Result<bool> {
    let n = r.particles();
    if d == 0 || r.modes() != d * n {
        return Err(Error::dim(format!(
            "occupation over {} modes cannot be grouped for d={d}, N={n}",
            r.modes()
        )));
    }
    Ok(r.counts.chunks(d).all(|group| group.iter().sum::<usize>() == 1))
}

/// `j_k = a_k - d(k-1)`, failing unless particle `k` sits in group `k`.
pub fn assignment_to_qudit_index(a: &ModeAssignment, d: usize) -> Result<Vec<usize>> {
    let not_interpretable = || {
        let n = d * a.modes.len();
        let occ = a.to_occupation(n.max(a.modes.last().copied().unwrap_or(0)));
        Error::NotInterpretable(occ.map(|o| o.counts).unwrap_or_default())
    };
    a.modes
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let lo = d * k;
            if m > lo && m <= lo + d {
                Ok(m - lo)
            } else {
                Err(not_interpretable())
            }
        })
        .collect()
}

/// Embedding of `|j_1, …, j_N⟩` as the assignment `(j_1, d + j_2, …)`.
pub fn qudit_index_to_assignment(indices: &[usize], d: usize) -> Result<ModeAssignment> {
    let modes = indices
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            if j == 0 || j > d {
                Err(Error::dim(format!("qudit index {j} outside 1..={d}")))
            } else {
                Ok(d * k + j)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeAssignment { modes })
}

/// One Fock basis state with its amplitude. Amplitudes refer to normalized
/// Fock states `∏_j (a†_j)^{r_j} / √(r_j!) |vac⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockTerm {
    pub occupation: ModeOccupation,
    #[serde(with = "json::complex")]
    pub amplitude: C64,
}

/// Second-quantized state as a sparse superposition of Fock states with a
/// fixed particle number over `n` modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockDoc", into = "FockDoc")]
pub struct FockSuperposition {
    modes: usize,
    particles: usize,
    terms: Vec<FockTerm>,
}

#[derive(Serialize, Deserialize)]
struct FockDoc {
    n: usize,
    #[serde(rename = "N")]
    particles: usize,
    terms: Vec<FockTerm>,
}

impl TryFrom<FockDoc> for FockSuperposition {
    type Error = Error;

    fn try_from(doc: FockDoc) -> Result<Self> {
        let mut s = FockSuperposition::empty(doc.n, doc.particles);
        for t in doc.terms {
            s.add(t.occupation, t.amplitude)?;
        }
        Ok(s)
    }
}

impl From<FockSuperposition> for FockDoc {
    fn from(s: FockSuperposition) -> Self {
        FockDoc { n: s.modes, particles: s.particles, terms: s.terms }
    }
}

impl FockSuperposition {
    pub fn empty(modes: usize, particles: usize) -> Self {
        FockSuperposition { modes, particles, terms: Vec::new() }
    }

    /// Builds a superposition, merging repeated occupations.
    pub fn from_terms(modes: usize, particles: usize, terms: impl IntoIterator<Item = (Vec<usize>, C64)>) -> Result<Self> {
        let mut s = Self::empty(modes, particles);
        for (occ, amp) in terms {
            s.add(ModeOccupation::new(occ), amp)?;
        }
        Ok(s)
    }

    /// Adds `amplitude` to the coefficient of `occupation`.
    pub fn add(&mut self, occupation: ModeOccupation, amplitude: C64) -> Result<()> {
        if occupation.modes() != self.modes {
            return Err(Error::dim(format!(
                "occupation over {} modes added to a {}-mode state",
                occupation.modes(),
                self.modes
            )));
        }
        if occupation.particles() != self.particles {
            return Err(Error::dim(format!(
                "occupation with {} particles added to an {}-particle state",
                occupation.particles(),
                self.particles
            )));
        }
        match self.terms.iter_mut().find(|t| t.occupation == occupation) {
            Some(t) => t.amplitude += amplitude,
            None => self.terms.push(FockTerm { occupation, amplitude }),
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn terms(&self) -> &[FockTerm] {
        &self.terms
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    pub fn amplitude_of(&self, occupation: &[usize]) -> C64 {
        self.terms
            .iter()
            .find(|t| t.occupation.counts() == occupation)
            .map_or(C64::new(0.0, 0.0), |t| t.amplitude)
    }

    /// Terms sorted lexicographically by occupation vector.
    pub fn sorted(mut self) -> Self {
        self.terms.sort_by(|a, b| a.occupation.cmp(&b.occupation));
        self
    }
}

/// `Ω_a`: the physical state of an N-qudit tensor.
pub fn omega(c: &CoefficientTensor) -> FockSuperposition {
    let d = c.d();
    let n_particles = c.parties();
    let mut terms: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    for (flat, &amp) in c.amplitudes().iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let mut counts = vec![0; d * n_particles];
        for (k, j) in c.multi_index(flat).into_iter().enumerate() {
            counts[d * k + j - 1] = 1;
        }
        terms.insert(counts, amp);
    }
    FockSuperposition {
        modes: d * n_particles,
        particles: n_particles,
        terms: terms
            .into_iter()
            .map(|(counts, amplitude)| FockTerm { occupation: ModeOccupation::new(counts), amplitude })
            .collect(),
    }
}

/// `Ω_a^{-1}` on post-selected superpositions. Terms that are not
/// post-selected must carry negligible amplitude.
pub fn omega_inverse(state: &FockSuperposition, d: usize, particles: usize) -> Result<CoefficientTensor> {
    if state.modes != d * particles || state.particles != particles {
        return Err(Error::dim(format!(
            "state over {} modes with {} particles does not match d={d}, N={particles}",
            state.modes, state.particles
        )));
    }
    let mut out = CoefficientTensor::zeros(d, particles);
    for term in &state.terms {
        if !is_post_selected(&term.occupation, d)? {
            let magnitude = term.amplitude.norm();
            if magnitude > ZERO_AMPLITUDE {
                return Err(Error::ProjectionMissing { occupation: term.occupation.counts.clone(), magnitude });
            }
            continue;
        }
        let idx = assignment_to_qudit_index(&occupation_to_assignment(&term.occupation), d)?;
        let at = out.flat_index(&idx)?;
        out.amplitudes_mut()[at] += term.amplitude;
    }
    Ok(out)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn occ(v: &[usize]) -> ModeOccupation {
        ModeOccupation::new(v.to_vec())
    }

    #[test]
    fn assignments_from_table() {
        let a = occupation_to_assignment(&occ(&[1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0]));
        assert_eq!(a.modes(), &[1, 5, 9, 10]);
        assert_eq!(occupation_to_assignment(&occ(&[1, 0, 0, 0, 1, 0])).modes(), &[1, 5]);
        assert_eq!(occupation_to_assignment(&occ(&[1, 1, 1])).modes(), &[1, 2, 3]);
        assert_eq!(occupation_to_assignment(&occ(&[2, 0, 0, 0])).modes(), &[1, 1]);
    }

    #[test]
    fn post_selection_predicate() {
        assert!(is_post_selected(&occ(&[1, 0, 0, 1, 0, 1, 1, 0]), 2).unwrap());
        assert!(!is_post_selected(&occ(&[1, 0, 1, 1, 0, 0]), 2).unwrap());
        assert!(!is_post_selected(&occ(&[2, 0, 0, 0]), 2).unwrap());
        assert!(!is_post_selected(&occ(&[1, 0, 1, 0, 0, 0]), 3).unwrap());
        assert!(is_post_selected(&occ(&[1, 0, 1]), 2).is_err());
    }

    #[test]
    fn qudit_indices() {
        let a = ModeAssignment::new(vec![1, 5]).unwrap();
        assert_eq!(assignment_to_qudit_index(&a, 3).unwrap(), vec![1, 2]);
        let a = ModeAssignment::new(vec![1, 4, 6, 7]).unwrap();
        assert_eq!(assignment_to_qudit_index(&a, 2).unwrap(), vec![1, 2, 2, 1]);
        let a = ModeAssignment::new(vec![1, 3, 4]).unwrap();
        assert!(matches!(assignment_to_qudit_index(&a, 2), Err(Error::NotInterpretable(_))));
        let a = ModeAssignment::new(vec![1, 3]).unwrap();
        assert!(assignment_to_qudit_index(&a, 3).is_err());
    }

    #[test]
    fn omega_inverse_examples() {
        let s = FockSuperposition::from_terms(6, 2, [(vec![1, 0, 0, 0, 1, 0], C64::new(1.0, 0.0))]).unwrap();
        let t = omega_inverse(&s, 3, 2).unwrap();
        assert_eq!(t, CoefficientTensor::basis(3, &[1, 2]).unwrap());

        let empty = FockSuperposition::empty(4, 2);
        assert_eq!(omega_inverse(&empty, 2, 2).unwrap(), CoefficientTensor::zeros(2, 2));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = FockSuperposition::from_terms(
            4,
            2,
            [(vec![1, 0, 0, 1], C64::new(h, 0.0)), (vec![0, 1, 1, 0], C64::new(h, 0.0))],
        )
        .unwrap();
        let t = omega_inverse(&bell, 2, 2).unwrap();
        assert_eq!(t.get(&[1, 2]).unwrap(), C64::new(h, 0.0));
        assert_eq!(t.get(&[2, 1]).unwrap(), C64::new(h, 0.0));
        assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_inverse_rejects_unprojected_terms() {
        let s = FockSuperposition::from_terms(4, 2, [(vec![2, 0, 0, 0], C64::new(0.5, 0.0))]).unwrap();
        assert!(matches!(omega_inverse(&s, 2, 2), Err(Error::ProjectionMissing { .. })));
        let tiny = FockSuperposition::from_terms(4, 2, [(vec![2, 0, 0, 0], C64::new(1e-16, 0.0))]).unwrap();
        assert!(omega_inverse(&tiny, 2, 2).is_ok());
    }

    #[test]
    fn superposition_rejects_mismatched_terms() {
        let mut s = FockSuperposition::empty(4, 2);
        assert!(s.add(occ(&[1, 0, 0]), C64::new(1.0, 0.0)).is_err());
        assert!(s.add(occ(&[1, 0, 0, 0]), C64::new(1.0, 0.0)).is_err());
        let json = r#"{"n":2,"N":1,"terms":[{"occupation":[1,0,0],"amplitude":{"re":1.0,"im":0.0}}]}"#;
        assert!(serde_json::from_str::<FockSuperposition>(json).is_err());
    }

    proptest! {
        #[test]
        fn assignment_roundtrip(counts in proptest::collection::vec(0usize..3, 1..=16)) {
            prop_assume!(counts.iter().sum::<usize>() <= 6);
            let r = ModeOccupation::new(counts.clone());
            let a = occupation_to_assignment(&r);
            prop_assert_eq!(a.modes().len(), r.particles());
            prop_assert_eq!(a.to_occupation(counts.len()).unwrap(), r);
        }

        #[test]
        fn post_selected_iff_interpretable(d in 1usize..4, n in 1usize..5, seed in any::<u64>()) {
            // Scatter n particles over d*n modes pseudo-randomly.
            let mut counts = vec![0usize; d * n];
            let mut x = seed;
            for _ in 0..n {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                counts[(x >> 33) as usize % (d * n)] += 1;
            }
            let r = ModeOccupation::new(counts);
            let ps = is_post_selected(&r, d).unwrap();
            let interp = assignment_to_qudit_index(&occupation_to_assignment(&r), d).is_ok();
            prop_assert_eq!(ps, interp);
        }

        #[test]
        fn omega_preserves_norm(amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            let c = CoefficientTensor::new(2, 3, amps.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let fock = omega(&c);
            prop_assert!((fock.norm_sqr() - c.norm_sqr()).abs() < 1e-12);
            let back = omega_inverse(&fock, 2, 3).unwrap();
            prop_assert!(back.max_abs_diff(&c).unwrap() == 0.0);
        }
    }
}
