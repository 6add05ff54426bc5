//! Closed-form reduced atom state.
//!
//! For atoms starting in |g,g⟩ or |e,e⟩ the two-atom state stays in X form:
//! populations A, B, C, D on |e,e⟩, |e,g⟩, |g,e⟩, |g,g⟩ and one real corner
//! coherence E = ⟨e,e|ρ|g,g⟩. Each is a double sum over the field weights
//! K^{nm}_{kl} = (tanh s)^{n+m} / cosh²s · C^n_k C^m_k C^n_l C^m_l.
//!
//! Two details are pinned by comparison with the full evolution in
//! [`crate::jcdynamics`]:
//! * the corner coherence carries an overall minus sign, coming from the
//!   (−i)² of two photon exchanges;
//! * for |e,e⟩ each Rabi argument λt√(n−k) becomes λt√(n−k+1), because an
//!   excited atom meeting |p⟩ photons oscillates at λ√(p+1).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fieldprep::{tail_weight, BinomialTable, CouplingParam, SqueezeParam};
use crate::jcdynamics::{AtomState, JCParams};
use crate::numerics::KahanSum;
use crate::tensorops::{CMatrix, DensityOperator, TruncatedFockSpace, C64};

/// Initial atom preparations with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitialAtoms {
    Gg,
    Ee,
}

impl InitialAtoms {
    pub fn label(self) -> &'static str {
        match self {
            Self::Gg => "gg",
            Self::Ee => "ee",
        }
    }

    pub fn atom_state(self) -> AtomState {
        match self {
            Self::Gg => AtomState::Gg,
            Self::Ee => AtomState::Ee,
        }
    }
}

impl fmt::Display for InitialAtoms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InitialAtoms {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gg" => Ok(Self::Gg),
            "ee" => Ok(Self::Ee),
            other => Err(Error::Config(format!("unknown initial state '{other}' (expected gg or ee)"))),
        }
    }
}

/// Field weights K^{nm}_{kl}. Entries are produced on demand from the
/// squeezing amplitudes and the binomial table, so memory stays O(n_max²).
#[derive(Debug, Clone)]
pub struct WeightTable {
    s: SqueezeParam,
    coupling: CouplingParam,
    amplitude: Vec<f64>,
    binom: BinomialTable,
}

impl WeightTable {
    pub fn new(s: SqueezeParam, coupling: CouplingParam, n_max: usize) -> Self {
        Self {
            s,
            coupling,
            amplitude: (0..=n_max).map(|n| s.amplitude(n)).collect(),
            binom: BinomialTable::new(n_max, coupling),
        }
    }

    pub fn s(&self) -> SqueezeParam {
        self.s
    }

    pub fn coupling(&self) -> CouplingParam {
        self.coupling
    }

    pub fn n_max(&self) -> usize {
        self.amplitude.len() - 1
    }

    pub fn tail_weight(&self) -> f64 {
        tail_weight(self.s, self.n_max())
    }

    /// K^{nm}_{kl}; requires k, l ≤ min(n, m) ≤ n_max.
    #[inline]
    pub fn k(&self, n: usize, m: usize, k: usize, l: usize) -> f64 {
        let b = &self.binom;
        self.amplitude[n] * self.amplitude[m] * b.get(n, k) * b.get(m, k) * b.get(n, l) * b.get(m, l)
    }

    /// Σ_n Σ_{k,l ≤ n} K^{nn}_{kl}.
    pub fn diagonal_sum(&self) -> f64 {
        let mut acc = KahanSum::new();
        for n in 0..=self.n_max() {
            for k in 0..=n {
                for l in 0..=n {
                    acc.add(self.k(n, n, k, l));
                }
            }
        }
        acc.value()
    }

    /// Scales the amplitude of level `n`. Fault injection for verification
    /// tests only.
    #[doc(hidden)]
    pub fn corrupt_level(&mut self, n: usize, factor: f64) {
        if let Some(a) = self.amplitude.get_mut(n) {
            *a *= factor;
        }
    }

    /// X-state at interaction time `params` for the given preparation.
    pub fn xstate(&self, initial: InitialAtoms, params: JCParams) -> AtomXState {
        let n_max = self.n_max();
        let lt = params.lambda_t();
        let (sin, cos): (Vec<f64>, Vec<f64>) = (0..=n_max + 2)
            .map(|j| (lt * (j as f64).sqrt()).sin_cos())
            .unzip();
        // The preparation shifts every Rabi index by one photon for |e,e⟩.
        let shift = match initial {
            InitialAtoms::Gg => 0,
            InitialAtoms::Ee => 1,
        };
        let (excited_sq, ground_sq): (Vec<f64>, Vec<f64>) = match initial {
            InitialAtoms::Gg => (sin.iter().map(|x| x * x).collect(), cos.iter().map(|x| x * x).collect()),
            InitialAtoms::Ee => (cos.iter().map(|x| x * x).collect(), sin.iter().map(|x| x * x).collect()),
        };

        let (mut a, mut b, mut c, mut d, mut e) = (
            KahanSum::new(),
            KahanSum::new(),
            KahanSum::new(),
            KahanSum::new(),
            KahanSum::new(),
        );
        for n in 0..=n_max {
            for k in 0..=n {
                let x = n - k + shift;
                for l in 0..=n {
                    let y = n - l + shift;
                    let w = self.k(n, n, k, l);
                    a.add(w * excited_sq[x] * excited_sq[y]);
                    b.add(w * excited_sq[x] * ground_sq[y]);
                    c.add(w * ground_sq[x] * excited_sq[y]);
                    d.add(w * ground_sq[x] * ground_sq[y]);
                }
            }
            if n < n_max {
                for k in 0..=n {
                    let x = n - k + shift;
                    let fk = match initial {
                        InitialAtoms::Gg => sin[x + 1] * cos[x],
                        InitialAtoms::Ee => cos[x + 1] * sin[x],
                    };
                    for l in 0..=n {
                        let y = n - l + shift;
                        let fl = match initial {
                            InitialAtoms::Gg => sin[y + 1] * cos[y],
                            InitialAtoms::Ee => cos[y + 1] * sin[y],
                        };
                        e.add(self.k(n + 1, n, k, l) * fk * fl);
                    }
                }
            }
        }
        AtomXState {
            a: a.value(),
            b: b.value(),
            c: c.value(),
            d: d.value(),
            e_coh: -e.value(),
            params: XStateParams {
                s: self.s.value(),
                r: self.coupling.r(),
                lambda_t: lt,
                initial,
                n_max,
            },
            tail_weight: self.tail_weight(),
        }
    }
}

pub fn weight_table(s: SqueezeParam, coupling: CouplingParam, n_max: usize) -> WeightTable {
    WeightTable::new(s, coupling, n_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateParams {
    pub s: f64,
    pub r: f64,
    pub lambda_t: f64,
    pub initial: InitialAtoms,
    pub n_max: usize,
}

/// Reduced two-atom state in X form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomXState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// ⟨e,e|ρ|g,g⟩.
    pub e_coh: f64,
    pub params: XStateParams,
    pub tail_weight: f64,
}

impl AtomXState {
    /// The 4×4 matrix in the basis {|e,e⟩, |e,g⟩, |g,e⟩, |g,g⟩}.
    pub fn to_density(&self) -> DensityOperator {
        let z = C64::new(0.0, 0.0);
        let r = |x: f64| C64::new(x, 0.0);
        #[rustfmt::skip]
        let m = CMatrix::from_row_slice(4, 4, &[
            r(self.a), z, z, r(self.e_coh),
            z, r(self.b), z, z,
            z, z, r(self.c), z,
            r(self.e_coh), z, z, r(self.d),
        ]);
        DensityOperator::new(TruncatedFockSpace::qubits(2).expect("two qubits"), m, self.tail_weight)
            .expect("4x4 matches two qubits")
    }

    pub fn population_sum(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// Trace window and positivity of the X-form matrix.
    pub fn validate(&self) -> Result<()> {
        let sum = self.population_sum();
        if sum > 1.0 + 1e-10 || sum < 1.0 - self.tail_weight - 1e-10 {
            return Err(Error::InvalidState(format!(
                "populations sum to {sum}, tail weight {:e}",
                self.tail_weight
            )));
        }
        if [self.a, self.b, self.c, self.d].iter().any(|&p| p < -1e-12) {
            return Err(Error::InvalidState("negative population".into()));
        }
        if self.a * self.d < self.e_coh * self.e_coh - 1e-10 {
            return Err(Error::InvalidState(format!(
                "coherence {} exceeds √(A·D) = {}",
                self.e_coh,
                (self.a * self.d).sqrt()
            )));
        }
        Ok(())
    }

    pub fn components(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e_coh]
    }
}

pub fn xstate_gg(s: SqueezeParam, coupling: CouplingParam, params: JCParams, n_max: usize) -> AtomXState {
    WeightTable::new(s, coupling, n_max).xstate(InitialAtoms::Gg, params)
}

pub fn xstate_ee(s: SqueezeParam, coupling: CouplingParam, params: JCParams, n_max: usize) -> AtomXState {
    WeightTable::new(s, coupling, n_max).xstate(InitialAtoms::Ee, params)
}

/// max(0, √((B−C)² + 4E²) − B − C): −2 × the negative eigenvalue of the
/// partial transpose of an X state, or 0 when there is none.
pub fn negativity_closed_form(x: &AtomXState) -> f64 {
    let raw = ((x.b - x.c).powi(2) + 4.0 * x.e_coh * x.e_coh).sqrt() - x.b - x.c;
    raw.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(s: f64, r: f64, n_max: usize) -> WeightTable {
        WeightTable::new(
            SqueezeParam::new(s).unwrap(),
            CouplingParam::from_reflection(r).unwrap(),
            n_max,
        )
    }

    fn lt(x: f64) -> JCParams {
        JCParams::new(x).unwrap()
    }

    #[test]
    fn parse_initial() {
        assert_eq!("gg".parse::<InitialAtoms>().unwrap(), InitialAtoms::Gg);
        assert_eq!(" ee ".parse::<InitialAtoms>().unwrap(), InitialAtoms::Ee);
        assert!("eg".parse::<InitialAtoms>().is_err());
    }

    #[test]
    fn vacuum_weights() {
        let t = table(0.0, 0.4, 6);
        assert_eq!(t.k(0, 0, 0, 0), 1.0);
        for n in 0..=6 {
            for m in 0..=6 {
                for k in 0..=n.min(m) {
                    for l in 0..=n.min(m) {
                        if (n, m) != (0, 0) {
                            assert_eq!(t.k(n, m, k, l), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_reflection_keeps_only_k_l_zero() {
        let s = 0.8f64;
        let t = table(s, 0.0, 10);
        for n in 0..=10 {
            let pure = s.tanh().powi(2 * n as i32) / s.cosh().powi(2);
            assert!((t.k(n, n, 0, 0) - pure).abs() < 1e-15);
            for k in 0..=n {
                for l in 0..=n {
                    if k + l > 0 {
                        assert_eq!(t.k(n, n, k, l), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_symmetries() {
        let t = table(0.9, 0.6, 12);
        for n in 0..=12 {
            for m in 0..=12 {
                for k in 0..=n.min(m) {
                    for l in 0..=n.min(m) {
                        let w = t.k(n, m, k, l);
                        assert!(w >= 0.0);
                        assert!((w - t.k(n, m, l, k)).abs() <= 4.0 * f64::EPSILON * w);
                        assert!((w - t.k(m, n, k, l)).abs() <= 4.0 * f64::EPSILON * w);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_sum_is_one_minus_tail() {
        for (s, r, n) in [(0.3, 0.25, 8), (0.65, 0.7, 20), (1.0, 0.99, 42)] {
            let t = table(s, r, n);
            assert!((t.diagonal_sum() - (1.0 - t.tail_weight())).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_time_states() {
        let gg = table(0.65, 0.25, 20).xstate(InitialAtoms::Gg, lt(0.0));
        assert_eq!((gg.a, gg.b, gg.c, gg.e_coh), (0.0, 0.0, 0.0, 0.0));
        assert!((gg.d - (1.0 - gg.tail_weight)).abs() < 1e-13);

        let ee = table(0.65, 0.25, 20).xstate(InitialAtoms::Ee, lt(0.0));
        assert_eq!((ee.b, ee.c, ee.d, ee.e_coh), (0.0, 0.0, 0.0, 0.0));
        assert!((ee.a - (1.0 - ee.tail_weight)).abs() < 1e-13);
    }

    #[test]
    fn vacuum_ground_stays_put() {
        for r in [0.0, 0.5, 1.0] {
            for t in [0.5, 3.0, 11.0] {
                let x = table(0.0, r, 4).xstate(InitialAtoms::Gg, lt(t));
                assert_eq!(x.d, 1.0);
                assert_eq!((x.a, x.b, x.c, x.e_coh), (0.0, 0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn excited_atoms_in_vacuum_follow_single_pair_rabi() {
        // independent vacuum Rabi flops: P_e = cos²(λt) per atom
        for t in [0.3, 1.0, std::f64::consts::FRAC_PI_2, 4.2] {
            let x = table(0.0, 0.0, 4).xstate(InitialAtoms::Ee, lt(t));
            let (pe, pg) = (t.cos().powi(2), t.sin().powi(2));
            assert!((x.a - pe * pe).abs() < 1e-14);
            assert!((x.b - pe * pg).abs() < 1e-14);
            assert!((x.c - pg * pe).abs() < 1e-14);
            assert!((x.d - pg * pg).abs() < 1e-14);
            assert_eq!(x.e_coh, 0.0);
        }
    }

    #[test]
    fn closed_form_measure_cases() {
        let base = table(0.0, 0.0, 4).xstate(InitialAtoms::Gg, lt(0.0));
        let diag = AtomXState { a: 0.25, b: 0.25, c: 0.25, d: 0.25, e_coh: 0.0, ..base };
        assert_eq!(negativity_closed_form(&diag), 0.0);
        let bell = AtomXState { a: 0.5, b: 0.0, c: 0.0, d: 0.5, e_coh: 0.5, ..base };
        assert!((negativity_closed_form(&bell) - 1.0).abs() < 1e-15);
        // PPT X-state: raw expression negative, measure clamped
        let ppt = AtomXState { a: 0.4, b: 0.2, c: 0.2, d: 0.2, e_coh: 0.1, ..base };
        assert_eq!(negativity_closed_form(&ppt), 0.0);
    }

    #[test]
    fn xstates_validate_and_are_symmetric() {
        let t = table(0.65, 0.25, 20);
        for initial in [InitialAtoms::Gg, InitialAtoms::Ee] {
            for step in 0..=15 {
                let x = t.xstate(initial, lt(step as f64));
                x.validate().unwrap();
                assert!((x.b - x.c).abs() < 1e-10);
                x.to_density().validate(1e-12).unwrap();
            }
        }
    }
}
