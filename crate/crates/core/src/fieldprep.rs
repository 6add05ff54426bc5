//! Two-mode squeezed vacuum and its lossy injection into two cavities.
//!
//! The cavity field is built two ways: [`inject`] sums the closed-form
//! coefficients of the mixed two-cavity state, and [`inject_oracle`] applies
//! a numerically exponentiated beam-splitter unitary to each external mode
//! and traces the external modes away. The two must agree element-wise.

use crate::error::{Error, Result};
use crate::numerics::LogFactorials;
use crate::tensorops::{
    mat_exp, partial_trace_sparse, CMatrix, CVector, DensityOperator, StateVector,
    TruncatedFockSpace, C64, MAX_DENSE_DIM,
};

/// Default probability weight allowed to fall beyond the Fock cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Smallest cutoff chosen automatically from a tail tolerance.
pub const MIN_AUTO_N_MAX: usize = 4;
/// Extra Fock levels given to each mode of the beam-splitter oracle.
pub const ORACLE_PAD: usize = 2;

/// Squeezing parameter s ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezeParam(f64);

impl SqueezeParam {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "squeezing parameter must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn tanh(self) -> f64 {
        self.0.tanh()
    }

    /// Amplitude of |n,n⟩: (tanh s)^n / cosh s.
    pub fn amplitude(self, n: usize) -> f64 {
        self.0.tanh().powi(n as i32) / self.0.cosh()
    }
}

/// Beam-splitter reflection coefficient r = cos(θ/2), r ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParam {
    r: f64,
    theta: f64,
}

impl CouplingParam {
    pub fn from_reflection(r: f64) -> Result<Self> {
        if !r.is_finite() || !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "reflection coefficient must lie in [0, 1], got {r}"
            )));
        }
        Ok(Self {
            r,
            theta: 2.0 * r.acos(),
        })
    }

    pub fn r(self) -> f64 {
        self.r
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    /// cos(θ/2), taken as r itself so that r = 0 gives an exact zero.
    pub fn cos_half(self) -> f64 {
        self.r
    }

    /// sin(θ/2) = √(1 − r²).
    pub fn sin_half(self) -> f64 {
        (1.0 - self.r * self.r).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    /// Fixed cutoff per field mode.
    Cutoff(usize),
    /// Smallest cutoff whose discarded weight is ≤ the tolerance.
    TailTolerance(f64),
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::TailTolerance(DEFAULT_TAIL_TOL)
    }
}

impl TruncationPolicy {
    /// Cutoff n_max for squeezing `s`.
    pub fn resolve(self, s: SqueezeParam) -> Result<usize> {
        match self {
            Self::Cutoff(0) => Err(Error::InvalidParameter("n_max must be positive".into())),
            Self::Cutoff(n) => Ok(n),
            Self::TailTolerance(tol) => {
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "tail tolerance must lie in (0, 1), got {tol}"
                    )));
                }
                let t = s.tanh();
                if t == 0.0 {
                    return Ok(MIN_AUTO_N_MAX);
                }
                let raw = (tol.ln() / (2.0 * t.ln())).ceil() - 1.0;
                let mut n = if raw.is_finite() && raw > 0.0 { raw as usize } else { 0 };
                // guard the float rounding of the closed form
                while tail_weight(s, n) > tol {
                    n += 1;
                }
                Ok(n.max(MIN_AUTO_N_MAX))
            }
        }
    }
}

/// Probability beyond cutoff `n_max`: (tanh s)^{2(n_max+1)}.
pub fn tail_weight(s: SqueezeParam, n_max: usize) -> f64 {
    s.tanh().powf(2.0 * (n_max as f64 + 1.0))
}

/// √(n choose k) cosᵏ(θ/2) sinⁿ⁻ᵏ(θ/2).
pub fn binom_coeff(n: i64, k: i64, theta: f64) -> Result<f64> {
    if n < 0 || k < 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "binomial amplitude needs 0 <= k <= n, got n={n}, k={k}"
        )));
    }
    let (n, k) = (n as usize, k as usize);
    let (cos_half, sin_half) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if n <= 20 {
        let choose = (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64);
        return Ok((choose as f64).sqrt() * cos_half.powi(k as i32) * sin_half.powi((n - k) as i32));
    }
    Ok(binom_amplitude_log(&LogFactorials::new(n), n, k, cos_half, sin_half))
}

fn binom_amplitude_log(lf: &LogFactorials, n: usize, k: usize, cos_half: f64, sin_half: f64) -> f64 {
    let pow_ln = |base: f64, e: usize| -> Option<f64> {
        match (e, base) {
            (0, _) => Some(0.0),
            (_, 0.0) => None,
            (e, b) => Some(e as f64 * b.abs().ln()),
        }
    };
    let (Some(pc), Some(ps)) = (pow_ln(cos_half, k), pow_ln(sin_half, n - k)) else {
        return 0.0;
    };
    let sign = if (cos_half < 0.0 && k % 2 == 1) ^ (sin_half < 0.0 && (n - k) % 2 == 1) {
        -1.0
    } else {
        1.0
    };
    sign * (0.5 * lf.ln_choose(n, k) + pc + ps).exp()
}

/// Table of C^n_k for 0 ≤ k ≤ n ≤ n_max at one coupling.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<f64>>,
}

impl BinomialTable {
    pub fn new(n_max: usize, coupling: CouplingParam) -> Self {
        let lf = LogFactorials::new(n_max);
        let (c, s) = (coupling.cos_half(), coupling.sin_half());
        let rows = (0..=n_max)
            .map(|n| (0..=n).map(|k| binom_amplitude_log(&lf, n, k, c, s)).collect())
            .collect();
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.rows[n][k]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }
}

/// Truncated two-mode squeezed vacuum over (mode A, mode B).
#[derive(Debug, Clone)]
pub struct TwoModeSqueezed {
    s: SqueezeParam,
    policy: TruncationPolicy,
    n_max: usize,
    state: StateVector,
}

impl TwoModeSqueezed {
    pub fn s(&self) -> SqueezeParam {
        self.s
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn tail_weight(&self) -> f64 {
        self.state.tail_weight()
    }

    /// Amplitude on |n,n⟩ (zero beyond the cutoff).
    pub fn amplitude(&self, n: usize) -> f64 {
        if n > self.n_max {
            return 0.0;
        }
        self.state.amplitudes()[n * (self.n_max + 1) + n].re
    }
}

pub fn squeezed_state(s: SqueezeParam, policy: TruncationPolicy) -> Result<TwoModeSqueezed> {
    let n_max = policy.resolve(s)?;
    let d = n_max + 1;
    let space = TruncatedFockSpace::new(vec![d, d])?;
    let mut amps = CVector::zeros(d * d);
    for n in 0..=n_max {
        amps[n * d + n] = C64::new(s.amplitude(n), 0.0);
    }
    let state = StateVector::new(space, amps, tail_weight(s, n_max))?;
    Ok(TwoModeSqueezed {
        s,
        policy,
        n_max,
        state,
    })
}

/// Mixed field of the two cavities over (field A, field B), each of
/// dimension n_max + 1.
#[derive(Debug, Clone)]
pub struct CavityFieldState {
    rho: DensityOperator,
    s: SqueezeParam,
    coupling: CouplingParam,
    policy: TruncationPolicy,
    n_max: usize,
}

impl CavityFieldState {
    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn s(&self) -> SqueezeParam {
        self.s
    }

    pub fn coupling(&self) -> CouplingParam {
        self.coupling
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_weight(&self) -> f64 {
        self.rho.tail_weight()
    }
}

fn check_dense(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            dim,
            limit: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

/// Coefficient construction of the injected field:
/// ρ_c = Σ_{n,m} Σ_{k,l ≤ min(n,m)} c_n c_m G^{nm}_{kl} |n−k, n−l⟩⟨m−k, m−l|
/// with G^{nm}_{kl} = C^n_k C^m_k C^n_l C^m_l.
pub fn inject(psi: &TwoModeSqueezed, coupling: CouplingParam) -> Result<CavityFieldState> {
    let n_max = psi.n_max();
    let d = n_max + 1;
    check_dense(d * d)?;
    let binom = BinomialTable::new(n_max, coupling);
    let amp: Vec<f64> = (0..=n_max).map(|n| psi.amplitude(n)).collect();

    let mut m = CMatrix::zeros(d * d, d * d);
    for n in 0..=n_max {
        for mm in 0..=n_max {
            let w = amp[n] * amp[mm];
            if w == 0.0 {
                continue;
            }
            for k in 0..=n.min(mm) {
                let ck = binom.get(n, k) * binom.get(mm, k);
                for l in 0..=n.min(mm) {
                    let g = ck * binom.get(n, l) * binom.get(mm, l);
                    let row = (n - k) * d + (n - l);
                    let col = (mm - k) * d + (mm - l);
                    m[(row, col)] += C64::new(w * g, 0.0);
                }
            }
        }
    }
    let rho = DensityOperator::new(TruncatedFockSpace::new(vec![d, d])?, m, psi.tail_weight())?;
    Ok(CavityFieldState {
        rho,
        s: psi.s(),
        coupling,
        policy: psi.policy(),
        n_max,
    })
}

/// Beam-splitter generator (θ/2)(ĉf̂† − ĉ†f̂) on (external f ⊗ cavity c),
/// each mode truncated at `cutoff`.
pub fn beam_splitter_generator(theta: f64, cutoff: usize) -> CMatrix {
    let d = cutoff + 1;
    let lower = CMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let id = CMatrix::identity(d, d);
    let f = lower.kronecker(&id);
    let c = id.kronecker(&lower);
    (&c * f.adjoint() - c.adjoint() * &f) * C64::new(theta / 2.0, 0.0)
}

/// Full-space beam-splitter unitary exp[(θ/2)(ĉf̂† − ĉ†f̂)].
pub fn beam_splitter_unitary(theta: f64, cutoff: usize) -> CMatrix {
    mat_exp(&beam_splitter_generator(theta, cutoff), 1.0)
}

/// The beam splitter conserves f̂†f̂ + ĉ†ĉ; this exponentiates the generator
/// restricted to the sector with `photons` quanta, in the basis
/// |photons − j⟩_f |j⟩_c, j = 0..=photons.
pub fn beam_splitter_sector(theta: f64, photons: usize) -> CMatrix {
    let size = photons + 1;
    let half = theta / 2.0;
    let gen = CMatrix::from_fn(size, size, |i, j| {
        // ĉ†f̂ moves one quantum from f to c (j → j + 1), ĉf̂† the reverse
        let value = if i == j + 1 {
            -half * (((photons - j) * (j + 1)) as f64).sqrt()
        } else if j == i + 1 {
            half * ((j * (photons - j + 1)) as f64).sqrt()
        } else {
            0.0
        };
        C64::new(value, 0.0)
    });
    mat_exp(&gen, 1.0)
}

/// Injection by explicit beam-splitter evolution: each external mode meets a
/// vacuum cavity at a beam splitter built on cutoff n_max + [`ORACLE_PAD`],
/// both external modes are traced out and the cavities cropped to n_max.
pub fn inject_oracle(psi: &TwoModeSqueezed, coupling: CouplingParam) -> Result<CavityFieldState> {
    let n_max = psi.n_max();
    let cutoff = n_max + ORACLE_PAD;
    let p = cutoff + 1;
    check_dense(p * p)?;
    let theta = coupling.theta();

    // B|n⟩_f|0⟩_c as entries (flat index on f⊗c, amplitude); the sector
    // unitary supplies column 0 (all n quanta in f).
    let outputs: Vec<Vec<(usize, C64)>> = (0..=n_max)
        .map(|n| {
            let u = beam_splitter_sector(theta, n);
            (0..=n)
                .filter_map(|j| {
                    let amp = u[(j, 0)];
                    (amp != C64::new(0.0, 0.0)).then_some(((n - j) * p + j, amp))
                })
                .collect()
        })
        .collect();

    // Ψ over (f_A, c_A, f_B, c_B) = Σ_n c_n (B|n,0⟩)_A ⊗ (B|n,0⟩)_B
    let space = TruncatedFockSpace::new(vec![p, p, p, p])?;
    let pair = p * p;
    let entries = outputs.iter().enumerate().flat_map(|(n, out)| {
        let c = psi.amplitude(n);
        out.iter().flat_map(move |&(ia, a)| {
            out.iter()
                .map(move |&(ib, b)| (ia * pair + ib, a * b * c))
        })
    });
    let padded = partial_trace_sparse(&space, entries, &[1, 3], psi.tail_weight())?;

    let d = n_max + 1;
    let pm = padded.matrix();
    let idx = |a: usize, b: usize| a * p + b;
    let cropped = CMatrix::from_fn(d * d, d * d, |i, j| {
        pm[(idx(i / d, i % d), idx(j / d, j % d))]
    });
    let rho = DensityOperator::new(TruncatedFockSpace::new(vec![d, d])?, cropped, psi.tail_weight())?;
    Ok(CavityFieldState {
        rho,
        s: psi.s(),
        coupling,
        policy: psi.policy(),
        n_max,
    })
}
