//! Dense complex solves of size 2 and 3.

use crate::algebra::Scalar;
use crate::error::{Error, Result};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, z| m.max(z.norm()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
            .unwrap();
        if a[piv][col].norm() <= 1e-12 * scale {
            return Err(Error::DegenerateInput("singular system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (x, &t) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * t;
            }
            let t = b[col];
            b[r] -= f * t;
        }
    }
    let mut x = vec![Scalar::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Ok(x)
}

pub fn det3(m: &[[Scalar; 3]; 3]) -> Scalar {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
