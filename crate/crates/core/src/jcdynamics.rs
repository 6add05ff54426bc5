//! Resonant Jaynes-Cummings evolution of two independent atom-cavity pairs.
//!
//! Atom basis index 0 is |e⟩ and index 1 is |g⟩, so the two-atom basis reads
//! {|e,e⟩, |e,g⟩, |g,e⟩, |g,g⟩}. Single-pair operators act on (atom ⊗ field);
//! composite states use the global order (atom A, atom B, field A, field B).
//!
//! Nothing here uses the closed-form matrix elements of the reduced atom
//! state: the evolution is carried out on the truncated Hilbert space and
//! the field is traced out numerically.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fieldprep::CavityFieldState;
use crate::tensorops::{
    mat_exp, partial_trace, permute_factors, CMatrix, CVector, DensityOperator, Kron, StateVector,
    TruncatedFockSpace, C64, MAX_DENSE_DIM,
};

pub const EXCITED: usize = 0;
pub const GROUND: usize = 1;

/// Initial two-atom state.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomState {
    Gg,
    Ee,
    Eg,
    Ge,
    /// Arbitrary normalised state over (atom A, atom B).
    Pure(StateVector),
}

impl AtomState {
    pub fn vector(&self) -> Result<StateVector> {
        let space = TruncatedFockSpace::qubits(2)?;
        let index = |a: usize, b: usize| a * 2 + b;
        match self {
            Self::Ee => StateVector::basis(space, index(EXCITED, EXCITED)),
            Self::Eg => StateVector::basis(space, index(EXCITED, GROUND)),
            Self::Ge => StateVector::basis(space, index(GROUND, EXCITED)),
            Self::Gg => StateVector::basis(space, index(GROUND, GROUND)),
            Self::Pure(psi) => {
                if psi.space() != &space {
                    return Err(Error::DimensionMismatch {
                        expected: 4,
                        actual: psi.space().total_dim(),
                    });
                }
                if (psi.norm_squared() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidState(format!(
                        "atom state norm² {} is not 1",
                        psi.norm_squared()
                    )));
                }
                Ok(psi.clone())
            }
        }
    }

    pub fn density(&self) -> Result<DensityOperator> {
        Ok(DensityOperator::from_pure(&self.vector()?))
    }
}

/// Dimensionless interaction time λt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JCParams {
    lambda_t: f64,
}

impl JCParams {
    pub fn new(lambda_t: f64) -> Result<Self> {
        if !lambda_t.is_finite() || lambda_t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "interaction time must be finite and >= 0, got {lambda_t}"
            )));
        }
        Ok(Self { lambda_t })
    }

    pub fn lambda_t(self) -> f64 {
        self.lambda_t
    }
}

/// How the single-pair unitary was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryRoute {
    /// Block form with cos/sin of the Rabi-frequency operator.
    ClosedForm,
    /// exp(−i H t) of the interaction Hamiltonian.
    HamiltonianExponential,
}

impl UnitaryRoute {
    pub fn unitary(self, params: JCParams, field_dim: usize) -> Result<CMatrix> {
        match self {
            Self::ClosedForm => jc_unitary(params, field_dim),
            Self::HamiltonianExponential => jc_unitary_oracle(params, field_dim),
        }
    }
}

fn check_field_dim(field_dim: usize) -> Result<()> {
    if field_dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "field dimension must be at least 2, got {field_dim}"
        )));
    }
    Ok(())
}

/// Closed-form JC propagator on (atom ⊗ field), field truncated to
/// `field_dim` levels. Exact except in the column |e, field_dim−1⟩, whose
/// partner |g, field_dim⟩ lies outside the space.
pub fn jc_unitary(params: JCParams, field_dim: usize) -> Result<CMatrix> {
    check_field_dim(field_dim)?;
    let d = field_dim;
    let lt = params.lambda_t();
    let rabi = |n: usize| lt * (n as f64).sqrt();
    // sin(Ω_n t)/Ω_n in units of 1/λ; the n = 0 entry is its limit λt
    let sinc = |n: usize| if n == 0 { lt } else { rabi(n).sin() / (n as f64).sqrt() };

    let mut u = CMatrix::zeros(2 * d, 2 * d);
    let e = |p: usize| EXCITED * d + p;
    let g = |p: usize| GROUND * d + p;
    let minus_i = C64::new(0.0, -1.0);
    for p in 0..d {
        // cos(Ω_{n+1} t) on |e⟩, cos(Ω_n t) on |g⟩
        u[(e(p), e(p))] = C64::new(rabi(p + 1).cos(), 0.0);
        u[(g(p), g(p))] = C64::new(rabi(p).cos(), 0.0);
        // −i â sin(Ω_n t)/Ω_n : |g,p⟩ → |e,p−1⟩ with weight √p · sinc(p)
        if p >= 1 {
            u[(e(p - 1), g(p))] = minus_i * ((p as f64).sqrt() * sinc(p));
        }
        // −i â† sin(Ω_{n+1} t)/Ω_{n+1} : |e,p⟩ → |g,p+1⟩
        if p + 1 < d {
            u[(g(p + 1), e(p))] = minus_i * ((p as f64 + 1.0).sqrt() * sinc(p + 1));
        }
    }
    Ok(u)
}

/// Interaction Hamiltonian divided by λ: [[0, ĉ], [ĉ†, 0]] in the atomic
/// basis {|e⟩, |g⟩}.
pub fn jc_hamiltonian(field_dim: usize) -> Result<CMatrix> {
    check_field_dim(field_dim)?;
    let d = field_dim;
    let mut h = CMatrix::zeros(2 * d, 2 * d);
    for p in 1..d {
        let amp = C64::new((p as f64).sqrt(), 0.0);
        // ⟨e, p−1| ĉ |g, p⟩ and its adjoint
        h[(EXCITED * d + p - 1, GROUND * d + p)] = amp;
        h[(GROUND * d + p, EXCITED * d + p - 1)] = amp;
    }
    Ok(h)
}

/// exp(−i H λt) from the truncated Hamiltonian.
pub fn jc_unitary_oracle(params: JCParams, field_dim: usize) -> Result<CMatrix> {
    let h = jc_hamiltonian(field_dim)?;
    Ok(mat_exp(&(h * C64::new(0.0, -1.0)), params.lambda_t()))
}

/// Composite state after evolution, over (atom A, atom B, field A, field B).
#[derive(Debug, Clone)]
pub struct EvolvedState {
    rho: DensityOperator,
    params: JCParams,
    route: UnitaryRoute,
}

impl EvolvedState {
    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn params(&self) -> JCParams {
        self.params
    }

    pub fn route(&self) -> UnitaryRoute {
        self.route
    }
}

/// Field levels used during evolution: one above the field cutoff, so an
/// excited atom can always deposit its photon.
pub fn evolution_field_dim(field: &CavityFieldState) -> usize {
    field.n_max() + 2
}

/// Copies a two-mode field operator into a larger per-mode dimension.
fn embed_field(rho: &CMatrix, from: usize, to: usize) -> CMatrix {
    let mut out = CMatrix::zeros(to * to, to * to);
    for i in 0..from * from {
        let ri = (i / from) * to + i % from;
        for j in 0..from * from {
            out[(ri, (j / from) * to + j % from)] = rho[(i, j)];
        }
    }
    out
}

fn check_field(field: &CavityFieldState) -> Result<usize> {
    let dims = field.rho().space().factor_dims();
    let d = field.n_max() + 1;
    if dims != [d, d] {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: field.rho().dim(),
        });
    }
    Ok(d)
}

/// Full dense evolution ρ(t) = U_T (ρ_atoms ⊗ ρ_c) U_T† with
/// U_T = U^A ⊗ U^B sharing one λt, using the Hamiltonian exponential.
pub fn evolve(atoms: &AtomState, field: &CavityFieldState, params: JCParams) -> Result<EvolvedState> {
    evolve_with(atoms, field, params, UnitaryRoute::HamiltonianExponential)
}

pub fn evolve_with(
    atoms: &AtomState,
    field: &CavityFieldState,
    params: JCParams,
    route: UnitaryRoute,
) -> Result<EvolvedState> {
    let d_in = check_field(field)?;
    let d = evolution_field_dim(field);
    let total = 4 * d * d;
    if total > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            dim: total,
            limit: MAX_DENSE_DIM,
        });
    }
    let field_space = TruncatedFockSpace::new(vec![d, d])?;
    let field_rho = DensityOperator::new(
        field_space,
        embed_field(field.rho().matrix(), d_in, d),
        field.tail_weight(),
    )?;
    let rho0 = atoms.density()?.kron(&field_rho);

    let u = route.unitary(params, d)?;
    let pair_space = TruncatedFockSpace::new(vec![2, d, 2, d])?;
    let (space, u_t) = permute_factors(&pair_space, &u.kronecker(&u), &[0, 2, 1, 3])?;
    debug_assert_eq!(&space, rho0.space());

    let evolved = &u_t * rho0.matrix() * u_t.adjoint();
    Ok(EvolvedState {
        rho: DensityOperator::new(space, evolved, rho0.tail_weight())?,
        params,
        route,
    })
}

/// Two-atom state Tr_fields ρ(t), basis {|e,e⟩, |e,g⟩, |g,e⟩, |g,g⟩}.
pub fn reduce_atoms(state: &EvolvedState) -> Result<DensityOperator> {
    partial_trace(state.rho(), &[0, 1])
}

/// Field block ⟨atom_out| U |atom_in⟩ of a single-pair unitary.
fn field_block(u: &CMatrix, d: usize, atom_out: usize, atom_in: usize) -> CMatrix {
    u.view((atom_out * d, atom_in * d), (d, d)).into_owned()
}

/// Reduced two-atom state without forming the composite space.
///
/// Writing U = Σ |α⟩⟨α₀| ⊗ V_{αα₀} for each pair,
/// ρ_a(t)_{αβ,α'β'} = Σ ρ_atoms[α₀β₀, α₀'β₀'] · Tr[(V_{α'α₀'}†V_{αα₀} ⊗ V_{β'β₀'}†V_{ββ₀}) ρ_c],
/// which costs O(d⁴) per term instead of O((4d²)³).
pub fn reduced_atoms(
    atoms: &AtomState,
    field: &CavityFieldState,
    params: JCParams,
    route: UnitaryRoute,
) -> Result<DensityOperator> {
    let d_in = check_field(field)?;
    let d = evolution_field_dim(field);
    let u = route.unitary(params, d)?;
    let rho_atoms = atoms.density()?;
    let rho_c = field.rho().matrix();

    let sources: Vec<(usize, usize, C64)> = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, rho_atoms.matrix()[(i, j)]))
        .filter(|(_, _, w)| *w != C64::new(0.0, 0.0))
        .collect();

    let blocks: Vec<Vec<CMatrix>> = (0..2)
        .map(|out| (0..2).map(|inp| field_block(&u, d, out, inp)).collect())
        .collect();
    // overlap[(a', a0', a, a0)] = V_{a'a0'}† V_{a a0}, cropped to the populated levels
    let mut overlaps: HashMap<(usize, usize, usize, usize), CMatrix> = HashMap::new();
    let mut overlap = |ap: usize, a0p: usize, a: usize, a0: usize| -> CMatrix {
        overlaps
            .entry((ap, a0p, a, a0))
            .or_insert_with(|| {
                let full = blocks[ap][a0p].adjoint() * &blocks[a][a0];
                full.view((0, 0), (d_in, d_in)).into_owned()
            })
            .clone()
    };

    // partial[(key)][yA, xA] = Σ_{yB,xB} R[xB,yB] ρ_c[(yA,yB),(xA,xB)]
    let mut partials: HashMap<(usize, usize, usize, usize), CMatrix> = HashMap::new();
    let mut out = CMatrix::zeros(4, 4);
    for i in 0..4 {
        let (alpha, beta) = (i / 2, i % 2);
        for j in i..4 {
            let (alpha_p, beta_p) = (j / 2, j % 2);
            let mut acc = C64::new(0.0, 0.0);
            for &(s, t, weight) in &sources {
                let (alpha0, beta0) = (s / 2, s % 2);
                let (alpha0_p, beta0_p) = (t / 2, t % 2);
                let left = overlap(alpha_p, alpha0_p, alpha, alpha0);
                let key = (beta_p, beta0_p, beta, beta0);
                let partial = partials.entry(key).or_insert_with(|| {
                    let right = overlap(beta_p, beta0_p, beta, beta0);
                    contract_second_mode(rho_c, &right, d_in)
                });
                let mut value = C64::new(0.0, 0.0);
                for ya in 0..d_in {
                    for xa in 0..d_in {
                        value += left[(xa, ya)] * partial[(ya, xa)];
                    }
                }
                acc += weight * value;
            }
            out[(i, j)] = acc;
            if i != j {
                out[(j, i)] = acc.conj();
            }
        }
    }
    DensityOperator::new(TruncatedFockSpace::qubits(2)?, out, field.tail_weight())
}

fn contract_second_mode(rho_c: &CMatrix, right: &CMatrix, d: usize) -> CMatrix {
    let mut partial = CMatrix::zeros(d, d);
    for xa in 0..d {
        for xb in 0..d {
            let col = xa * d + xb;
            for ya in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for yb in 0..d {
                    acc += right[(xb, yb)] * rho_c[(ya * d + yb, col)];
                }
                partial[(ya, xa)] += acc;
            }
        }
    }
    partial
}

/// Diagonal of the total excitation number (atomic excitations plus
/// photons) over (atom A, atom B, field A, field B).
pub fn excitation_number(field_dim: usize) -> CVector {
    let d = field_dim;
    CVector::from_fn(4 * d * d, |i, _| {
        let atoms = i / (d * d);
        let (pa, pb) = ((i % (d * d)) / d, i % d);
        let excited = usize::from(atoms / 2 == EXCITED) + usize::from(atoms % 2 == EXCITED);
        C64::new((excited + pa + pb) as f64, 0.0)
    })
}

/// Tr[N ρ] for a composite state.
pub fn mean_excitation(rho: &DensityOperator) -> Result<f64> {
    let dims = rho.space().factor_dims();
    if dims.len() != 4 || dims[0] != 2 || dims[1] != 2 || dims[2] != dims[3] {
        return Err(Error::InvalidSpace(format!(
            "expected (atom, atom, field, field), got {dims:?}"
        )));
    }
    let n = excitation_number(dims[2]);
    Ok(rho
        .matrix()
        .diagonal()
        .iter()
        .zip(n.iter())
        .map(|(r, n)| (r * n).re)
        .sum())
}
