//! Cross-check of the spherical Bessel recurrences against an independent
//! arbitrary-precision oracle: exact rational summation of the power series
//!   j_n(x) = sum_m (-1)^m x^(n+2m) / (2^m m! (2n+2m+1)!!)
//! for rational arguments. The oracle never touches the recurrence code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use weylrec::special::spherical_bessel_sequence;

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Floor of log2 |r|, good enough for convergence control.
fn log2_abs(r: &BigRational) -> i64 {
    if r.is_zero() {
        return i64::MIN / 2;
    }
    r.numer().bits() as i64 - r.denom().bits() as i64
}

/// Round a rational to f64 through a 64-bit scaled integer quotient.
fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().abs();
    let shift: i64 = 64 - (num.bits() as i64 - den.bits() as i64);
    let q: BigInt = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let v = q.to_f64().expect("64-bit scaled quotient") * (2.0_f64).powi(-shift as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// j_n at the exact rational argument, summed until the terms are 90 bits
/// below the partial sum and decreasing.
fn oracle_jn(x: &BigRational, n: usize) -> f64 {
    if x.is_zero() {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // t_0 = x^n / (2n+1)!!
    let mut term = BigRational::from_integer(BigInt::from(1));
    for _ in 0..n {
        term *= x;
    }
    let mut dfact = BigInt::from(1);
    for j in 0..=n {
        dfact *= BigInt::from(2 * j as i64 + 1);
    }
    term /= BigRational::from_integer(dfact);

    let x2 = x * x;
    let mut sum = term.clone();
    let mut m: i64 = 0;
    loop {
        m += 1;
        let df = 2 * m * (2 * n as i64 + 2 * m + 1);
        let denom = BigRational::from_integer(BigInt::from(df));
        term = -(term * &x2 / &denom);
        sum += &term;
        let log2_df = 63 - df.leading_zeros() as i64;
        let decaying = log2_abs(&x2) + 1 < log2_df;
        let tiny = log2_abs(&term) < log2_abs(&sum) - 90;
        if (decaying && tiny) || m > 4000 {
            break;
        }
    }
    to_f64(&sum)
}

fn check_sequence(x_num: i64, x_den: i64, n_max: usize, rel: f64) {
    let x = ratio(x_num, x_den);
    let xf = x_num as f64 / x_den as f64;
    let seq = spherical_bessel_sequence(xf, n_max).unwrap();
    for n in (0..=n_max).step_by(1 + n_max / 24) {
        let expect = oracle_jn(&x, n);
        let got = seq.order(n);
        if expect.abs() < 1e-280 {
            assert!(
                got.abs() < 1e-275,
                "n = {n}, x = {xf}: expected underflow-scale {expect:.3e}, got {got:.3e}"
            );
        } else {
            let err = ((got - expect) / expect).abs();
            assert!(
                err <= rel,
                "n = {n}, x = {xf}: oracle {expect:.17e}, recurrence {got:.17e}, rel err {err:.3e}"
            );
        }
    }
}

#[test]
fn full_sequence_at_x25_order60() {
    // Every order checked, not just a stride.
    let x = ratio(25, 1);
    let seq = spherical_bessel_sequence(25.0, 60).unwrap();
    for n in 0..=60 {
        let expect = oracle_jn(&x, n);
        let got = seq.order(n);
        let err = ((got - expect) / expect).abs();
        assert!(
            err <= 1e-12,
            "n = {n}: oracle {expect:.17e}, recurrence {got:.17e}, rel err {err:.3e}"
        );
    }
}

#[test]
fn small_arguments_high_orders() {
    check_sequence(1, 3, 60, 1e-12);
    check_sequence(7, 2, 120, 1e-12);
    check_sequence(25, 7, 200, 1e-12);
}

#[test]
fn oscillatory_regime_orders_below_argument() {
    check_sequence(200, 1, 60, 1e-12);
    check_sequence(199, 2, 40, 1e-12);
    check_sequence(150, 1, 150, 1e-12);
}

#[test]
fn turning_point_neighbourhood() {
    check_sequence(77, 2, 120, 1e-12);
    check_sequence(100, 1, 200, 1e-12);
}

#[test]
fn oracle_sanity_against_closed_forms() {
    // The oracle itself must reproduce j_0 and j_1.
    let x = ratio(7, 2);
    let xf = 3.5_f64;
    assert!((oracle_jn(&x, 0) - xf.sin() / xf).abs() < 1e-15);
    let j1 = xf.sin() / (xf * xf) - xf.cos() / xf;
    assert!((oracle_jn(&x, 1) - j1).abs() < 1e-15);
}
