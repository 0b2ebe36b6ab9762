use crate::error::{Error, Result};
use crate::matexp::Matrix;

// Degree-13 diagonal Padé approximant of exp (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the degree-13 approximant has backward error
// below the unit roundoff.
const THETA13: f64 = 5.371920351148152;

// Beyond this many squarings the input norm is astronomically large.
const MAX_SQUARINGS: i32 = 1000;

/// Matrix exponential by scaling and squaring with a fixed degree-13 Padé
/// kernel.
pub fn expm(xi: &Matrix) -> Result<Matrix> {
    if !xi.is_square() {
        return Err(Error::Shape(format!("expm of {}x{} matrix", xi.rows(), xi.cols())));
    }
    let norm = xi.norm1();
    if !norm.is_finite() {
        return Err(Error::Overflow("expm: non-finite input".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(Error::Overflow(format!("expm: input norm {norm:.3e}")));
    }
    let a = xi.scale(2f64.powi(-squarings));
    let n = a.rows();
    let ident = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::Overflow(format!("expm: result overflowed (input norm {norm:.3e})")));
    }
    Ok(r)
}

/// Cayley map `(I − ξ/2)⁻¹ (I + ξ/2)`.
pub fn cayley(xi: &Matrix) -> Result<Matrix> {
    if !xi.is_square() {
        return Err(Error::Shape(format!("cayley of {}x{} matrix", xi.rows(), xi.cols())));
    }
    let ident = Matrix::identity(xi.rows());
    let half = xi.scale(0.5);
    (&ident - &half)
        .solve(&(&ident + &half))
        .map_err(|_| Error::Singular("cayley: I - xi/2".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::{hat, random_special_orthogonal};
    use std::f64::consts::PI;

    // Truncated Taylor series summed in extended steps; used as an
    // independent reference for moderately sized inputs.
    fn taylor_reference(xi: &Matrix) -> Matrix {
        let squarings = 6;
        let a = xi.scale(2f64.powi(-squarings));
        let mut term = Matrix::identity(xi.rows());
        let mut sum = term.clone();
        for k in 1..40 {
            term = (&term * &a).scale(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = expm(&hat(&[0.0, 0.0, PI / 2.0])).unwrap();
        let expected = Matrix::from_rows(&[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(r.distance(&expected).unwrap() < 1e-15 * 10.0);
    }

    #[test]
    fn diagonal_case() {
        let r = expm(&Matrix::diagonal(&[0.3, -2.0])).unwrap();
        assert!((r[(0, 0)] - 0.3f64.exp()).abs() < 1e-15);
        assert!((r[(1, 1)] - (-2.0f64).exp()).abs() < 1e-16);
        assert_eq!(r[(0, 1)], 0.0);
    }

    #[test]
    fn agrees_with_taylor_reference() {
        for seed in 0..5u64 {
            let g = random_special_orthogonal(5, seed);
            let xi = (&g + &g.transpose().scale(0.3)).scale(2.0);
            let e = expm(&xi).unwrap();
            let reference = taylor_reference(&xi);
            let rel = e.distance(&reference).unwrap() / reference.norm();
            assert!(rel < 1e-13, "seed {seed}: relative error {rel:e}");
        }
    }

    #[test]
    fn large_norm_is_rejected() {
        let xi = Matrix::diagonal(&[1e308, 1e308]);
        assert!(matches!(expm(&xi), Err(Error::Overflow(_))));
    }

    #[test]
    fn cayley_examples() {
        assert_eq!(cayley(&Matrix::zeros(2, 2)).unwrap(), Matrix::identity(2));
        let c = cayley(&Matrix::from_rows(&[[0.0, -2.0], [2.0, 0.0]])).unwrap();
        let expected = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(c.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn cayley_singular() {
        // I - xi/2 = 0 for xi = 2I.
        assert!(matches!(cayley(&Matrix::identity(2).scale(2.0)), Err(Error::Singular(_))));
    }
}
