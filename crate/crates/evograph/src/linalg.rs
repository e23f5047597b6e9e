//! Small dense linear-algebra helpers: Gaussian elimination and eigenvalues
//! of reduced Jacobians up to 3x3. Sizes here are bounded by the strategy
//! count (n <= 4 gives reduced systems of dimension <= 3), so direct formulas
//! beat any general-purpose decomposition.

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Returns None when the matrix is numerically singular.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot_tail: Vec<f64> = a[col][col..].to_vec();
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for (entry, &p) in a[row][col..].iter_mut().zip(&pivot_tail) {
                *entry -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Eigenvalues of a real matrix of dimension 1, 2, or 3, as (re, im) pairs.
/// 2x2 uses the quadratic formula on the characteristic polynomial; 3x3 uses
/// the trigonometric/Cardano cubic solution.
pub(crate) fn eigenvalues(m: &[Vec<f64>]) -> Option<Vec<(f64, f64)>> {
    match m.len() {
        0 => Some(Vec::new()),
        1 => Some(vec![(m[0][0], 0.0)]),
        2 => {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                Some(vec![(tr / 2.0 + s, 0.0), (tr / 2.0 - s, 0.0)])
            } else {
                let s = (-disc).sqrt();
                Some(vec![(tr / 2.0, s), (tr / 2.0, -s)])
            }
        }
        3 => Some(cubic_eigenvalues(m)),
        _ => None,
    }
}

/// Roots of det(M - lambda I) for a 3x3 M: solve
/// lambda^3 - tr lambda^2 + p2 lambda - det = 0.
fn cubic_eigenvalues(m: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let tr = m[0][0] + m[1][1] + m[2][2];
    // Sum of principal 2x2 minors.
    let p2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);

    // Depressed cubic t^3 + p t + q with lambda = t + tr/3.
    let shift = tr / 3.0;
    let p = p2 - tr * tr / 3.0;
    let q = -2.0 * tr * tr * tr / 27.0 + tr * p2 / 3.0 - det;

    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    // Scale-aware tolerance: disc has units of (matrix entry)^6.
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-30);
    let tol = 1e-24 * scale.powi(6);

    if disc > tol {
        // One real root, one complex pair.
        let sq = disc.sqrt();
        let u = cbrt(-q / 2.0 + sq);
        let v = cbrt(-q / 2.0 - sq);
        let real = u + v + shift;
        let re_pair = -(u + v) / 2.0 + shift;
        let im_pair = (u - v) * (3.0f64).sqrt() / 2.0;
        vec![(real, 0.0), (re_pair, im_pair), (re_pair, -im_pair)]
    } else if disc >= -tol && p.abs() * p.abs() * p.abs() <= tol.max(1e-280) {
        // Triple root (p ~ q ~ 0).
        vec![(shift, 0.0); 3]
    } else {
        // Three real roots (trigonometric form); clamp guards rounding when
        // disc is within tolerance of zero.
        let r = (-p / 3.0).max(0.0).sqrt();
        if r == 0.0 {
            return vec![(shift, 0.0); 3];
        }
        let cos_arg = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        (0..3)
            .map(|j| (2.0 * r * (phi - two_pi_3 * j as f64).cos() + shift, 0.0))
            .collect()
    }
}

fn cbrt(x: f64) -> f64 {
    x.cbrt()
}
