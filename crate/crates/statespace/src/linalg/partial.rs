use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Trace out the complementary sites of a lattice operator.
///
/// `site_dims` lists the per-site dimensions (site 0 is the leftmost,
/// slowest-varying tensor factor) and `keep` the site indices to retain,
/// in ascending order of their position in `keep`. The trace is
/// preserved: `tr(result) = tr(a)`.
pub fn partial_trace(a: &ComplexMatrix, site_dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = site_dims.iter().product();
    if !a.is_square() || a.rows() != total {
        return Err(Error::DimMismatch(format!(
            "partial_trace: operator is {}x{}, lattice dimension is {}",
            a.rows(),
            a.cols(),
            total
        )));
    }
    let mut seen = vec![false; site_dims.len()];
    for &k in keep {
        if k >= site_dims.len() || seen[k] {
            return Err(Error::BadSiteSet(format!("keep index {k} out of range or duplicate")));
        }
        seen[k] = true;
    }

    let keep_dims: Vec<usize> = keep.iter().map(|&k| site_dims[k]).collect();
    let comp: Vec<usize> = (0..site_dims.len()).filter(|v| !keep.contains(v)).collect();
    let comp_dims: Vec<usize> = comp.iter().map(|&k| site_dims[k]).collect();
    let keep_total: usize = keep_dims.iter().product();
    let comp_total: usize = comp_dims.iter().product();

    // Row strides of each site in the full index.
    let mut strides = vec![1usize; site_dims.len()];
    for v in (0..site_dims.len().saturating_sub(1)).rev() {
        strides[v] = strides[v + 1] * site_dims[v + 1];
    }

    let flat = |multi: &[usize], sites: &[usize]| -> usize {
        multi.iter().zip(sites).map(|(&x, &v)| x * strides[v]).sum()
    };
    let unflatten = |mut idx: usize, dims: &[usize]| -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for v in (0..dims.len()).rev() {
            out[v] = idx % dims[v];
            idx /= dims[v];
        }
        out
    };

    let mut out = ComplexMatrix::zeros(keep_total, keep_total);
    for i in 0..keep_total {
        let mi = unflatten(i, &keep_dims);
        let base_i = flat(&mi, keep);
        for j in 0..keep_total {
            let mj = unflatten(j, &keep_dims);
            let base_j = flat(&mj, keep);
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for c in 0..comp_total {
                let mc = unflatten(c, &comp_dims);
                let off = flat(&mc, &comp);
                acc += a[(base_i + off, base_j + off)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli as consts;
    use crate::linalg::{kron, C64};

    #[test]
    fn product_input_recovers_left_factor() {
        let rho = ComplexMatrix::diag_real(&[0.25, 0.75]);
        let sigma = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.5, 0.0)],
        );
        let joint = kron(&rho, &sigma);
        let back = partial_trace(&joint, &[2, 2], &[0]).unwrap();
        // tr(sigma) = 1, so the left factor comes back unchanged.
        assert!(back.approx_eq(&rho, 1e-14));
    }

    #[test]
    fn full_trace_is_one_by_one() {
        let a = crate::sampling::Sampler::new(9).hermitian(4);
        let t = partial_trace(&a, &[2, 2], &[]).unwrap();
        assert_eq!(t.rows(), 1);
        assert!((t[(0, 0)] - a.trace()).norm() < 1e-13);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [C64::new(inv, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(inv, 0.0)];
        let proj = ComplexMatrix::projector(&bell);
        let red = partial_trace(&proj, &[2, 2], &[0]).unwrap();
        assert!(red.approx_eq(&ComplexMatrix::identity(2).scale_re(0.5), 1e-14));
    }

    #[test]
    fn trace_is_preserved_and_order_matters() {
        let a = crate::sampling::Sampler::new(17).hermitian(8);
        let r = partial_trace(&a, &[2, 2, 2], &[0, 2]).unwrap();
        assert!((r.trace() - a.trace()).norm() < 1e-12);

        let z_site2 = kron(&kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), &consts::pauli_z());
        let keep = partial_trace(&z_site2, &[2, 2, 2], &[2]).unwrap();
        assert!(keep.approx_eq(&consts::pauli_z().scale_re(4.0), 1e-13));
    }

    #[test]
    fn rejects_bad_sites() {
        let a = ComplexMatrix::identity(4);
        assert!(matches!(partial_trace(&a, &[2, 2], &[2]), Err(Error::BadSiteSet(_))));
        assert!(matches!(partial_trace(&a, &[2, 2], &[0, 0]), Err(Error::BadSiteSet(_))));
        assert!(matches!(partial_trace(&a, &[2, 2, 2], &[0]), Err(Error::DimMismatch(_))));
    }
}
