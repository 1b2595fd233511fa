//! Small shared linear-algebra pieces: the symplectic form on two modes,
//! symplectic spectra of 4×4 covariances, a vectorized Lyapunov solve, and a
//! scale-robust real-cubic solver.

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector4};
use num_complex::Complex64 as C64;

use crate::error::Error;

/// Symplectic form `J = diag₂(ε)` with `ε = [[0, 1], [−1, 0]]`, for the
/// quadrature ordering `(x_c, p_c, x_m, p_m)`.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    j[(2, 3)] = 1.0;
    j[(3, 2)] = -1.0;
    j
}

/// Frobenius distance of `p·J·pᵀ` from `J`; zero iff `p` is symplectic.
pub fn symplectic_defect(p: &Matrix4<f64>) -> f64 {
    let j = symplectic_form();
    (p * j * p.transpose() - j).norm()
}

/// `‖a − b‖_F / max(‖a‖_F, ‖b‖_F)`, with an absolute fallback when both are
/// near zero.
pub fn rel_frob_diff(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale < 1e-300 { (a - b).norm() } else { (a - b).norm() / scale }
}

fn block_dets(v: &Matrix4<f64>) -> (f64, f64, f64, f64) {
    let a = Matrix2::new(v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]).determinant();
    let b = Matrix2::new(v[(2, 2)], v[(2, 3)], v[(3, 2)], v[(3, 3)]).determinant();
    let c = Matrix2::new(v[(0, 2)], v[(0, 3)], v[(1, 2)], v[(1, 3)]).determinant();
    (a, b, c, v.determinant())
}

fn invariant_eig_pair(sigma: f64, det_v: f64) -> (f64, f64) {
    // Guard both radicands against roundoff dipping just below zero.
    let disc = (sigma * sigma - 4.0 * det_v).max(0.0);
    let hi = 0.5 * (sigma + disc.sqrt());
    // Smaller root via ν₋²·ν₊² = det V: immune to the Σ − √(Σ²−4detV)
    // cancellation that would otherwise swamp ν₋ for hot mechanical states.
    let lo = if hi > 0.0 { (det_v / hi).max(0.0) } else { 0.5 * (sigma - disc.sqrt()).max(0.0) };
    (lo.sqrt(), hi.max(0.0).sqrt())
}

/// Symplectic eigenvalues `(ν₋, ν₊)` of a two-mode covariance matrix, from
/// the invariants `Δ = det A + det B + 2 det C` and `det V`.
pub fn symplectic_eigs(v: &Matrix4<f64>) -> (f64, f64) {
    let (da, db, dc, dv) = block_dets(v);
    invariant_eig_pair(da + db + 2.0 * dc, dv)
}

/// Smallest symplectic eigenvalue `η⁻` of the partial transpose, from
/// `Σ = det A + det B − 2 det C` (partial transposition flips the sign of
/// `det C` and leaves `det V` alone).
pub fn pt_min_symplectic_eig(v: &Matrix4<f64>) -> f64 {
    let (da, db, dc, dv) = block_dets(v);
    invariant_eig_pair(da + db - 2.0 * dc, dv).0
}

/// Symplectic eigenvalues through the spectrum of `J·V` (they appear as
/// `±iν` pairs). Slower route kept as a cross-check on [`symplectic_eigs`].
pub fn symplectic_eigs_via_spectrum(v: &Matrix4<f64>) -> (f64, f64) {
    let jv = symplectic_form() * v;
    let eigs = jv.complex_eigenvalues();
    let mut mags: Vec<f64> = eigs.iter().map(|z| z.im.abs()).collect();
    mags.sort_by(f64::total_cmp);
    // Four eigenvalues in ± pairs: the distinct magnitudes sit at odd slots.
    (0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3]))
}

/// Eigenvalues of a real 4×4 drift matrix.
pub fn drift_eigenvalues(a: &Matrix4<f64>) -> Vector4<C64> {
    a.map(|x| C64::new(x, 0.0)).eigenvalues().expect("4×4 complex eigendecomposition")
}

/// Solve the continuous Lyapunov equation `A·V + V·Aᵀ = −D` by the
/// vectorized 16×16 linear system `(1 ⊗ A + A ⊗ 1)·vec V = −vec D`.
///
/// Returns the symmetrized solution and the residual `‖A·V + V·Aᵀ + D‖_F`.
pub fn solve_lyapunov(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<(Matrix4<f64>, f64), Error> {
    let eye = Matrix4::<f64>::identity();
    let big: SMatrix<f64, 16, 16> = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = SMatrix::<f64, 16, 1>::from_column_slice((-d).as_slice());
    let sol = big.lu().solve(&rhs).ok_or_else(|| Error::InvalidParameter {
        field: "drift",
        reason: "Lyapunov operator 1⊗A + A⊗1 is singular (marginally stable drift)".into(),
    })?;
    let v = Matrix4::from_column_slice(sol.as_slice());
    let v = 0.5 * (v + v.transpose());
    let residual = (a * v + v * a.transpose() + d).norm();
    Ok((v, residual))
}

/// All real roots of `c₃u³ + c₂u² + c₁u + c₀ = 0`, robust to the wildly
/// scaled coefficients of the photon-number cubic (`c₃ ~ g⁴/ω_m²` can sit
/// twenty orders below `c₁`). Finds the root connected to the linear
/// (`c₃, c₂ → 0`) solution by damped Newton, deflates, and polishes.
pub fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let p = |u: f64| ((c3 * u + c2) * u + c1) * u + c0;
    let dp = |u: f64| (3.0 * c3 * u + 2.0 * c2) * u + c1;

    if c3 == 0.0 {
        if c2 == 0.0 {
            return if c1 == 0.0 { vec![] } else { vec![-c0 / c1] };
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            return vec![];
        }
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        let mut roots = vec![q / c2];
        if q != 0.0 {
            roots.push(c0 / q);
        }
        roots.sort_by(f64::total_cmp);
        return roots;
    }

    // Newton from the linear-regime root; damped so a nearby fold cannot
    // fling the iterate away.
    let mut u = if c1 != 0.0 { -c0 / c1 } else { 0.0 };
    for _ in 0..200 {
        let f = p(u);
        let d = dp(u);
        if d == 0.0 {
            break;
        }
        let mut step = f / d;
        let cap = 0.5 * u.abs().max(1.0);
        step = step.clamp(-cap, cap);
        u -= step;
        if step.abs() <= 1e-15 * u.abs().max(1e-300) {
            break;
        }
    }

    // Synthetic division by (u − root), then the stable quadratic formula.
    let b = c2 + c3 * u;
    let c = c1 + b * u;
    let mut roots = vec![u];
    let disc = b * b - 4.0 * c3 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = (q / c3, if q != 0.0 { c / q } else { 0.0 });
        for r in [r1, r2] {
            // One Newton polish against the undeflated cubic.
            let d = dp(r);
            let r = if d != 0.0 { r - p(r) / d } else { r };
            if r.is_finite() {
                roots.push(r);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symplectic_form_squares_to_minus_one() {
        let j = symplectic_form();
        assert_eq!(j * j, -Matrix4::<f64>::identity());
    }

    #[test]
    fn vacuum_symplectic_eigs_are_half() {
        let v = Matrix4::identity() * 0.5;
        let (lo, hi) = symplectic_eigs(&v);
        assert_abs_diff_eq!(lo, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pt_min_symplectic_eig(&v), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_eigs_match_spectrum_route() {
        // Thermal ⊗ squeezed-ish covariance with some correlation.
        let mut v = Matrix4::identity() * 0.7;
        v[(2, 2)] = 3.1;
        v[(3, 3)] = 3.1;
        v[(0, 2)] = 0.4;
        v[(2, 0)] = 0.4;
        v[(1, 3)] = -0.4;
        v[(3, 1)] = -0.4;
        let (a_lo, a_hi) = symplectic_eigs(&v);
        let (b_lo, b_hi) = symplectic_eigs_via_spectrum(&v);
        assert_abs_diff_eq!(a_lo, b_lo, epsilon = 1e-10);
        assert_abs_diff_eq!(a_hi, b_hi, epsilon = 1e-10);
    }

    #[test]
    fn lyapunov_solves_a_known_ou_case() {
        // A = −(1/2)·1 with D = 1 has stationary covariance V = 1.
        let a = -0.5 * Matrix4::<f64>::identity();
        let d = Matrix4::<f64>::identity();
        let (v, res) = solve_lyapunov(&a, &d).unwrap();
        assert!((v - Matrix4::identity()).norm() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn cubic_finds_tiny_leading_coefficient_roots() {
        // (u − 2)(1e−20·u² + 1) = 1e−20 u³ − 2e−20 u² + u − 2.
        let roots = cubic_real_roots(1e-20, -2e-20, 1.0, -2.0);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 2.0, epsilon = 1e-9);

        // Three well-separated real roots: (u−1)(u−2)(u−3).
        let roots = cubic_real_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*r, want, epsilon = 1e-9);
        }
    }
}
