//! Directly summed dense Hamiltonians for short chains, used as exact references.

use super::operators::{charge_operator, pauli, vertex_operator_matrix, Pauli};
use super::params::{QecParams, XyzParams};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const MAX_DIM: usize = 4096;

/// Adds c · Π_k op_k(site_k) to `h` (row-major D×D), first site most significant.
fn add_product(h: &mut [f64], d: usize, l: usize, c: f64, ops: &[(usize, &DenseTensor<f64>)]) {
    let dim = d.pow(l as u32);
    let stride = |site: usize| d.pow((l - 1 - site) as u32);
    for col in 0..dim {
        let mut states = vec![(col, c)];
        for &(site, op) in ops {
            let st = stride(site);
            let mut next = Vec::new();
            for &(idx, amp) in &states {
                let s_in = (idx / st) % d;
                for s_out in 0..d {
                    let v = op.get(&[s_out, s_in]);
                    if v != 0.0 {
                        next.push((idx - s_in * st + s_out * st, amp * v));
                    }
                }
            }
            states = next;
        }
        for (row, amp) in states {
            h[row * dim + col] += amp;
        }
    }
}

fn check_dim(d: usize, l: usize) -> Result<usize> {
    let dim = (d as f64).powi(l as i32);
    if l == 0 || dim > MAX_DIM as f64 {
        return Err(Error::dim(format!("dense Hamiltonian of dimension {dim} refused")));
    }
    Ok(dim as usize)
}

pub fn qec_dense_hamiltonian(p: &QecParams, l: usize) -> Result<DenseTensor<f64>> {
    p.validate()?;
    let d = p.local_dim();
    let dim = check_dim(d, l)?;
    let n = charge_operator(p.n_max)?;
    let n2 = n.matmul(&n)?;
    let s = vertex_operator_matrix(p.n_max)?;
    let sd = s.adjoint()?;
    let mut h = vec![0.0; dim * dim];
    for i in 0..l {
        add_product(&mut h, d, l, p.e_c0, &[(i, &n2)]);
        add_product(&mut h, d, l, -p.e_g, &[(i, &n)]);
        add_product(&mut h, d, l, -0.5 * p.e_j0, &[(i, &s)]);
        add_product(&mut h, d, l, -0.5 * p.e_j0, &[(i, &sd)]);
        if i + 1 < l {
            add_product(&mut h, d, l, p.delta * p.e_c0, &[(i, &n), (i + 1, &n)]);
            add_product(&mut h, d, l, -0.5 * p.e_j, &[(i, &sd), (i + 1, &s)]);
            add_product(&mut h, d, l, -0.5 * p.e_j, &[(i, &s), (i + 1, &sd)]);
        }
    }
    DenseTensor::new(vec![dim, dim], h)
}

pub fn xyz_dense_hamiltonian(p: &XyzParams, l: usize) -> Result<DenseTensor<f64>> {
    let dim = check_dim(2, l)?;
    let x = pauli(Pauli::X);
    let iy = pauli(Pauli::IY);
    let z = pauli(Pauli::Z);
    let mut h = vec![0.0; dim * dim];
    for i in 0..l.saturating_sub(1) {
        add_product(&mut h, 2, l, -0.5 * p.jx, &[(i, &x), (i + 1, &x)]);
        add_product(&mut h, 2, l, 0.5 * p.jy, &[(i, &iy), (i + 1, &iy)]);
        add_product(&mut h, 2, l, -0.5 * p.jz, &[(i, &z), (i + 1, &z)]);
    }
    DenseTensor::new(vec![dim, dim], h)
}
