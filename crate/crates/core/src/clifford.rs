//! Clifford representations.
//!
//! Complex mode (even d): `sigma(e_j) = i Gamma_j` with Hermitian `Gamma_j`
//! from the tensor-product chain, so `sigma(e_j)^* = -sigma(e_j)`,
//! `sigma(e_j)^2 = -1`, and the grading `gamma` anticommutes with every
//! `sigma(e_j)`. For d=2: `Gamma = (pauli_x, pauli_y)`, `gamma = pauli_z`.
//! Going from `2k` to `2k+2`:
//!
//! ```text
//! Gamma'_j      = Gamma_j (x) pauli_x   (j <= 2k)
//! Gamma'_{2k+1} = gamma   (x) pauli_x
//! Gamma'_{2k+2} = 1       (x) pauli_y
//! gamma'        = 1       (x) pauli_z
//! ```
//!
//! Real mode (odd d): real symmetric `sigma(eps_j)` with `sigma^2 = +1`, no
//! grading. d=1 is `[1]`; d=3 uses `pauli_x (x) 1`, `pauli_z (x) 1`,
//! `pauli_y (x) pauli_y`.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordMode {
    ComplexEven,
    RealOdd,
}

#[derive(Debug, Clone)]
pub struct CliffordRep {
    dim: usize,
    mode: CliffordMode,
    sigma: Vec<DMatrix<C64>>,
    gamma: Option<DMatrix<C64>>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli() -> [DMatrix<C64>; 3] {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

pub fn clifford_rep(d: usize, mode: CliffordMode) -> Result<CliffordRep> {
    let [px, py, pz] = pauli();
    let i = c(0.0, 1.0);
    match mode {
        CliffordMode::ComplexEven => {
            if d == 0 || d % 2 != 0 {
                return Err(Error::Clifford(format!("complex mode in odd dimension {d}")));
            }
            let mut gammas = vec![px.clone(), py.clone()];
            let mut grading = pz.clone();
            while gammas.len() < d {
                let id = DMatrix::<C64>::identity(grading.nrows(), grading.ncols());
                let mut next: Vec<_> = gammas.iter().map(|g| g.kronecker(&px)).collect();
                next.push(grading.kronecker(&px));
                next.push(id.kronecker(&py));
                grading = id.kronecker(&pz);
                gammas = next;
            }
            let sigma = gammas.into_iter().map(|g| g * i).collect();
            Ok(CliffordRep { dim: d, mode, sigma, gamma: Some(grading) })
        }
        CliffordMode::RealOdd => {
            let sigma = match d {
                1 => vec![DMatrix::from_element(1, 1, c(1.0, 0.0))],
                3 => {
                    let id = DMatrix::<C64>::identity(2, 2);
                    vec![px.kronecker(&id), pz.kronecker(&id), py.kronecker(&py)]
                }
                _ => return Err(Error::Clifford(format!("real mode is available for d = 1 and d = 3, not {d}"))),
            };
            Ok(CliffordRep { dim: d, mode, sigma, gamma: None })
        }
    }
}

impl CliffordRep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> CliffordMode {
        self.mode
    }

    pub fn spinor_dim(&self) -> usize {
        self.sigma[0].nrows()
    }

    pub fn sigma(&self, j: usize) -> &DMatrix<C64> {
        &self.sigma[j]
    }

    /// Real parts of `sigma(eps_j)`; only meaningful in real mode.
    pub fn sigma_real(&self, j: usize) -> DMatrix<f64> {
        self.sigma[j].map(|z| z.re)
    }

    pub fn gamma(&self) -> Option<&DMatrix<C64>> {
        self.gamma.as_ref()
    }

    /// Largest entry of `{sigma_i, sigma_j} - 2 s delta_ij`, with `s = -1`
    /// in complex mode and `+1` in real mode, together with the grading
    /// relations `gamma^2 = 1`, `gamma^* = gamma`, `{gamma, sigma_j} = 0`.
    pub fn algebra_defect(&self) -> f64 {
        let n = self.spinor_dim();
        let id = DMatrix::<C64>::identity(n, n);
        let s = match self.mode {
            CliffordMode::ComplexEven => -1.0,
            CliffordMode::RealOdd => 1.0,
        };
        let mut worst = 0.0f64;
        let max_abs = |m: &DMatrix<C64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let anti = &self.sigma[a] * &self.sigma[b] + &self.sigma[b] * &self.sigma[a];
                let target = if a == b { &id * c(2.0 * s, 0.0) } else { DMatrix::zeros(n, n) };
                worst = worst.max(max_abs(&(anti - target)));
            }
            let adj_target = match self.mode {
                CliffordMode::ComplexEven => -self.sigma[a].clone(),
                CliffordMode::RealOdd => self.sigma[a].clone(),
            };
            worst = worst.max(max_abs(&(self.sigma[a].adjoint() - adj_target)));
        }
        if let Some(g) = &self.gamma {
            worst = worst.max(max_abs(&(g * g - &id)));
            worst = worst.max(max_abs(&(g.adjoint() - g)));
            for sj in &self.sigma {
                worst = worst.max(max_abs(&(g * sj + sj * g)));
            }
        }
        if self.mode == CliffordMode::RealOdd {
            for sj in &self.sigma {
                worst = worst.max(sj.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d2_fixture_values() {
        let r = clifford_rep(2, CliffordMode::ComplexEven).unwrap();
        let i = c(0.0, 1.0);
        let o = c(0.0, 0.0);
        assert_eq!(r.sigma(0), &DMatrix::from_row_slice(2, 2, &[o, i, i, o]));
        assert_eq!(r.sigma(1), &DMatrix::from_row_slice(2, 2, &[o, c(1.0, 0.0), c(-1.0, 0.0), o]));
        assert_eq!(r.gamma().unwrap(), &DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), o, o, c(-1.0, 0.0)]));
        let s1 = r.sigma(0);
        assert_eq!(s1 * s1, -DMatrix::<C64>::identity(2, 2));
        assert_eq!(r.algebra_defect(), 0.0);
    }

    #[test]
    fn higher_even_dimensions() {
        for d in [4, 6] {
            let r = clifford_rep(d, CliffordMode::ComplexEven).unwrap();
            assert_eq!(r.spinor_dim(), 1 << (d / 2));
            assert!(r.algebra_defect() <= 1e-15);
        }
    }

    #[test]
    fn real_modes() {
        let r1 = clifford_rep(1, CliffordMode::RealOdd).unwrap();
        assert_eq!(r1.spinor_dim(), 1);
        assert_eq!(r1.sigma_real(0)[(0, 0)], 1.0);
        let r3 = clifford_rep(3, CliffordMode::RealOdd).unwrap();
        assert_eq!(r3.spinor_dim(), 4);
        assert_eq!(r3.algebra_defect(), 0.0);
        assert!(r3.gamma().is_none());
    }

    #[test]
    fn parity_mismatch_rejected() {
        assert!(clifford_rep(3, CliffordMode::ComplexEven).is_err());
        assert!(clifford_rep(2, CliffordMode::RealOdd).is_err());
        assert!(clifford_rep(0, CliffordMode::ComplexEven).is_err());
    }
}
