//! Partial-transpose entanglement test for two qubits.

use crate::error::{Error, Result};
use crate::tensorops::{eig_hermitian, partial_transpose, DensityOperator};

/// Minimum partial-transpose eigenvalue below which a state is called entangled.
pub const ENTANGLEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    /// −2 × sum of negative partial-transpose eigenvalues.
    pub measure: f64,
    /// Partial-transpose spectrum, ascending.
    pub pt_eigenvalues: [f64; 4],
    pub is_entangled: bool,
    pub min_eigenvalue: f64,
}

fn check_two_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.space().factor_dims() != [2, 2] {
        return Err(Error::InvalidSpace(format!(
            "expected two qubits, got factors {:?}",
            rho.space().factor_dims()
        )));
    }
    Ok(())
}

/// Ascending spectrum of the partial transpose over `factor`.
pub fn pt_spectrum(rho: &DensityOperator, factor: usize) -> Result<[f64; 4]> {
    check_two_qubits(rho)?;
    let eig = eig_hermitian(partial_transpose(rho, factor)?.matrix())?;
    let mut out = [0.0; 4];
    out.copy_from_slice(&eig);
    Ok(out)
}

/// Transposes qubit B, diagonalises, and reports the negativity measure.
pub fn negativity_general(rho: &DensityOperator) -> Result<EntanglementReport> {
    let pt_eigenvalues = pt_spectrum(rho, 1)?;
    let negative_sum: f64 = pt_eigenvalues.iter().filter(|&&x| x < 0.0).sum();
    let min_eigenvalue = pt_eigenvalues[0];
    Ok(EntanglementReport {
        measure: (-2.0 * negative_sum).max(0.0),
        pt_eigenvalues,
        is_entangled: min_eigenvalue < -ENTANGLEMENT_TOL,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorops::{CMatrix, CVector, Kron, StateVector, TruncatedFockSpace, C64};

    fn qubit(index: usize) -> DensityOperator {
        let sp = TruncatedFockSpace::qubits(1).unwrap();
        DensityOperator::from_pure(&StateVector::basis(sp, index).unwrap())
    }

    fn bell() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]);
        DensityOperator::from_pure(&StateVector::new(TruncatedFockSpace::qubits(2).unwrap(), v, 0.0).unwrap())
    }

    #[test]
    fn product_state_is_separable() {
        let rho = qubit(1).kron(&qubit(0));
        let rep = negativity_general(&rho).unwrap();
        assert_eq!(rep.measure, 0.0);
        assert!(!rep.is_entangled);
    }

    #[test]
    fn bell_state_is_maximal() {
        let rep = negativity_general(&bell()).unwrap();
        assert!((rep.measure - 1.0).abs() < 1e-12);
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in rep.pt_eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(rep.is_entangled);
    }

    #[test]
    fn werner_state_at_half_mixing() {
        // p|Φ+⟩⟨Φ+| + (1−p) I/4 at p = 0.5: PT minimum (1 − 3p)/4 = −1/8
        let p = 0.5;
        let m = bell().matrix() * C64::new(p, 0.0) + CMatrix::identity(4, 4) * C64::new((1.0 - p) / 4.0, 0.0);
        let rho = DensityOperator::new(TruncatedFockSpace::qubits(2).unwrap(), m, 0.0).unwrap();
        let rep = negativity_general(&rho).unwrap();
        assert!((rep.measure - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_qubit_pairs() {
        let rho = DensityOperator::new(
            TruncatedFockSpace::new(vec![4]).unwrap(),
            CMatrix::identity(4, 4) * C64::new(0.25, 0.0),
            0.0,
        )
        .unwrap();
        assert!(negativity_general(&rho).is_err());
    }
}
