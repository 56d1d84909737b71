//! Clebsch–Gordan coefficients for integer angular momenta, Condon–Shortley
//! phase, evaluated exactly from the Racah sum.

use num_rational::Ratio;

use super::ZeemanError;

pub type Rational = Ratio<i128>;

/// Largest angular momentum accepted; keeps every factorial product in i128.
pub const MAX_J: i32 = 5;

/// `sign · √square`, with `square` an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedSqrt {
    pub sign: i8,
    pub square: Rational,
}

impl SignedSqrt {
    pub const ZERO: SignedSqrt = SignedSqrt {
        sign: 0,
        square: Ratio::new_raw(0, 1),
    };

    pub fn value(&self) -> f64 {
        let sq = *self.square.numer() as f64 / *self.square.denom() as f64;
        f64::from(self.sign) * sq.sqrt()
    }
}

fn factorial(n: i32) -> i128 {
    (1..=i128::from(n)).product()
}

fn check_pair(j: i32, m: i32) -> Result<(), ZeemanError> {
    if !(0..=MAX_J).contains(&j) || m.abs() > j {
        return Err(ZeemanError::InvalidQuantumNumbers(format!(
            "j = {j}, m = {m}"
        )));
    }
    Ok(())
}

/// ⟨j1 m1; j2 m2 | j m⟩ as an exact signed square root.
pub fn cg_exact(
    j1: i32,
    m1: i32,
    j2: i32,
    m2: i32,
    j: i32,
    m: i32,
) -> Result<SignedSqrt, ZeemanError> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j, m)?;
    if m1 + m2 != m || j < (j1 - j2).abs() || j > j1 + j2 {
        return Ok(SignedSqrt::ZERO);
    }

    let f = factorial;
    let pref = Rational::new(
        i128::from(2 * j + 1) * f(j + j1 - j2) * f(j - j1 + j2) * f(j1 + j2 - j),
        f(j1 + j2 + j + 1),
    ) * Rational::from_integer(f(j + m) * f(j - m))
        * Rational::from_integer(f(j1 - m1) * f(j1 + m1))
        * Rational::from_integer(f(j2 - m2) * f(j2 + m2));

    let k_min = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = Rational::from_integer(0);
    for k in k_min..=k_max {
        let denom = f(k)
            * f(j1 + j2 - j - k)
            * f(j1 - m1 - k)
            * f(j2 + m2 - k)
            * f(j - j2 + m1 + k)
            * f(j - j1 - m2 + k);
        let term = Rational::new(1, denom);
        sum = if k % 2 == 0 { sum + term } else { sum - term };
    }
    if sum == Rational::from_integer(0) {
        return Ok(SignedSqrt::ZERO);
    }
    let sign = if sum > Rational::from_integer(0) {
        1
    } else {
        -1
    };
    Ok(SignedSqrt {
        sign,
        square: pref * sum * sum,
    })
}

fn check_q(q: i32) -> Result<(), ZeemanError> {
    if !(-1..=1).contains(&q) {
        return Err(ZeemanError::InvalidQuantumNumbers(format!("q = {q}")));
    }
    Ok(())
}

/// ⟨F m; 1 q | F' m'⟩ for a dipole transition.
pub fn clebsch_gordan(f: i32, m: i32, q: i32, f_up: i32, m_up: i32) -> Result<f64, ZeemanError> {
    check_q(q)?;
    Ok(cg_exact(f, m, 1, q, f_up, m_up)?.value())
}

/// Exact square of [`clebsch_gordan`].
pub fn clebsch_gordan_squared(
    f: i32,
    m: i32,
    q: i32,
    f_up: i32,
    m_up: i32,
) -> Result<Rational, ZeemanError> {
    check_q(q)?;
    Ok(cg_exact(f, m, 1, q, f_up, m_up)?.square)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn pi_transition_f2_m0_vanishes() {
        assert_eq!(clebsch_gordan(2, 0, 0, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn known_values() {
        assert_eq!(clebsch_gordan_squared(1, 1, -1, 2, 0).unwrap(), r(1, 6));
        assert!((clebsch_gordan(1, 1, -1, 2, 0).unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan_squared(1, 0, 0, 2, 0).unwrap(), r(2, 3));
        assert_eq!(clebsch_gordan_squared(2, 2, 0, 2, 2).unwrap(), r(2, 3));
        assert_eq!(clebsch_gordan_squared(2, 1, 0, 2, 1).unwrap(), r(1, 6));
        assert_eq!(clebsch_gordan(1, 1, 1, 2, 2).unwrap(), 1.0);
        // ⟨2 m; 1 0 | 2 m⟩ = m/√6 carries the sign of m.
        assert!(clebsch_gordan(2, -2, 0, 2, -2).unwrap() < 0.0);
        // ⟨1 0; 1 0 | 1 0⟩ = 0 and ⟨1 1; 1 -1 | 0 0⟩ = 1/√3.
        assert_eq!(clebsch_gordan(1, 0, 0, 1, 0).unwrap(), 0.0);
        assert_eq!(clebsch_gordan_squared(1, 1, -1, 0, 0).unwrap(), r(1, 3));
    }

    #[test]
    fn selection_rules() {
        assert_eq!(clebsch_gordan(2, 1, 0, 2, 0).unwrap(), 0.0);
        assert_eq!(clebsch_gordan(1, 0, 1, 3, 1).unwrap(), 0.0);
    }

    #[test]
    fn invalid_arguments() {
        assert!(clebsch_gordan(1, 2, 0, 2, 2).is_err());
        assert!(clebsch_gordan(1, 0, 2, 2, 2).is_err());
        assert!(clebsch_gordan(2, 0, 0, 2, 3).is_err());
        assert!(cg_exact(6, 0, 1, 0, 6, 0).is_err());
    }
}
