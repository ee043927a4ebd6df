//! Exact rational arithmetic and derivation of the solver parameters.
//!
//! Every scalar the solver compares (loads, capacities, thresholds) is an
//! exact [`Rational`]. The two irrational constants the guarantee depends on
//! are replaced by rational surrogates computed here: the load-bound offset
//! `r` is rounded *up* (spending part of the `zeta` slack) and the layer
//! threshold `delta` is rounded *down*, so that every downstream comparison
//! errs on the side the analysis needs.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator. Comparisons are exact.
pub type Rational = num_rational::BigRational;

/// Shorthand for small rational constants.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for integral rationals.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-bits` as a rational.
pub fn two_pow_neg(bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << bits)
}

/// Floor of `a / b` for `b > 0`, as a big integer.
pub fn floor_div(a: &Rational, b: &Rational) -> BigInt {
    assert!(b.is_positive(), "floor_div by non-positive divisor");
    (a / b).floor().to_integer()
}

/// Largest `k >= 0` with `base^k <= x`, computed exactly.
///
/// Requires `base > 1` and `x >= 1`. Powers of `base` are assembled by
/// repeated squaring so the number of big multiplications is logarithmic in
/// the answer.
pub fn floor_log(base: &Rational, x: &Rational) -> u64 {
    assert!(*base > Rational::one(), "floor_log base must exceed 1");
    assert!(*x >= Rational::one(), "floor_log argument must be >= 1");
    if x < base {
        return 0;
    }
    // powers[j] = base^(2^j), kept while <= x
    let mut powers = vec![base.clone()];
    loop {
        let last = powers.last().unwrap();
        let sq = last * last;
        if sq > *x {
            break;
        }
        powers.push(sq);
    }
    let mut k = 0u64;
    let mut acc = Rational::one();
    for (j, p) in powers.iter().enumerate().rev() {
        let cand = &acc * p;
        if cand <= *x {
            acc = cand;
            k += 1 << j;
        }
    }
    k
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("cannot take the square root of a negative value")]
    NegativeSqrt,
    #[error("precision_bits must be at least 1")]
    ZeroPrecision,
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
    #[error("zeta must be strictly positive")]
    ZetaOutOfRange,
    #[error("parameter derivation did not converge at precision {0} bits")]
    PrecisionExhausted(u32),
}

/// Rational bracket `(lower, upper)` around `sqrt(x)` with
/// `lower^2 <= x <= upper^2` and `upper - lower <= 2^-precision_bits`.
///
/// Perfect squares of rationals are returned exactly as a zero-width
/// bracket.
pub fn sqrt_bounds(
    x: &Rational,
    precision_bits: u32,
) -> Result<(Rational, Rational), ParamsError> {
    if x.is_negative() {
        return Err(ParamsError::NegativeSqrt);
    }
    if precision_bits == 0 {
        return Err(ParamsError::ZeroPrecision);
    }
    let num = x.numer();
    let den = x.denom();
    let root_num = num.sqrt();
    let root_den = den.sqrt();
    if &(&root_num * &root_num) == num && &(&root_den * &root_den) == den {
        let exact = Rational::new(root_num, root_den);
        return Ok((exact.clone(), exact));
    }
    // floor(sqrt(num * den * 4^p)) / (den * 2^p) is a lower bound; the next
    // integer numerator is an upper bound. The bracket width is
    // 1 / (den * 2^p) <= 2^-p.
    let shifted: BigInt = (num * den) << (2 * precision_bits);
    let n = shifted.sqrt();
    let scale: BigInt = den << precision_bits;
    let lower = Rational::new(n.clone(), scale.clone());
    let upper = Rational::new(n + BigInt::one(), scale);
    Ok((lower, upper))
}

/// All derived constants for one `(epsilon, zeta)` configuration.
///
/// `r` and `delta` are the rational surrogates described in the module
/// docs; `mu1`, `mu2` and `eta` are exact functions of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub epsilon: Rational,
    pub zeta: Rational,
    /// Surrogate for the load-bound offset; the solver caps machine loads at
    /// `tau + r`.
    pub r: Rational,
    /// Surrogate for the addability threshold offset.
    pub delta: Rational,
    pub mu1: Rational,
    pub mu2: Rational,
    /// `(delta * (1 - mu2) - 2 * mu2) * mu1`, strictly positive.
    pub eta: Rational,
}

/// Smallest precision (at least 40 bits) whose bracket width `2^-p` fits
/// within `budget`.
fn precision_for(budget: &Rational) -> u32 {
    let mut p = 40u32;
    while two_pow_neg(p) > *budget && p < 1 << 14 {
        p += 16;
    }
    p
}

/// Derive [`Params`] from `epsilon` in `(0, 1)` and `zeta > 0`.
///
/// The surrogate for `r` is an upper rounding of
/// `(epsilon + sqrt(3 - 2 epsilon)) / 2 + (3/4) zeta`, which keeps it inside
/// the permitted window `[base + zeta/4, base + zeta]` while leaving enough
/// headroom for the positivity check in [`verify_params`]. `delta` is a
/// lower rounding of `(sqrt(3 - 2 epsilon) - 1) / 2`, off by at most
/// `2^-40`.
pub fn make_params(epsilon: &Rational, zeta: &Rational) -> Result<Params, ParamsError> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(ParamsError::EpsilonOutOfRange);
    }
    if !zeta.is_positive() {
        return Err(ParamsError::ZetaOutOfRange);
    }
    // The sqrt bracket width must fit in the zeta/4 rounding budget for r.
    let budget = zeta / int(4);
    let mut precision = precision_for(&budget);
    loop {
        let arg = int(3) - epsilon * int(2);
        let (low, up) = sqrt_bounds(&arg, precision)?;
        let r = (epsilon + &up) / int(2) + zeta * rat(3, 4);
        let delta = (&low - int(1)) / int(2);
        let mu1 = rat(1, 4) * int(1).min(zeta.clone());
        let mu2 = rat(1, 4) * delta.clone().min(zeta.clone());
        let eta = (&delta * (int(1) - &mu2) - int(2) * &mu2) * &mu1;
        let width_ok = &up - &low <= budget;
        if width_ok && delta.is_positive() && eta.is_positive() {
            return Ok(Params {
                epsilon: epsilon.clone(),
                zeta: zeta.clone(),
                r,
                delta,
                mu1,
                mu2,
                eta,
            });
        }
        if precision >= 1 << 14 {
            return Err(ParamsError::PrecisionExhausted(precision));
        }
        precision *= 2;
    }
}

/// Evaluate the positivity checks that the running-time analysis depends on,
/// with the surrogates substituted for the exact constants.
///
/// Returns true iff `eta > 0` and the bracketed product
/// `(2r - delta - eps - 1 - tau mu1 mu2 - (1 + 2 tau + r) mu1) * (delta (1 - mu2) - 2 mu2) - (1 - mu2)(1 - r) - mu2 tau`
/// is positive at both `tau = 1` and `tau = 2`. The expression is affine in
/// `tau`, so the endpoint checks cover the whole range.
pub fn verify_params(p: &Params) -> bool {
    if !p.eta.is_positive() {
        return false;
    }
    let one = Rational::one();
    let second_factor = &p.delta * (&one - &p.mu2) - int(2) * &p.mu2;
    for tau in [int(1), int(2)] {
        let first_factor = int(2) * &p.r
            - &p.delta
            - &p.epsilon
            - &one
            - &tau * &p.mu1 * &p.mu2
            - (&one + int(2) * &tau + &p.r) * &p.mu1;
        let value =
            &first_factor * &second_factor - (&one - &p.mu2) * (&one - &p.r) - &p.mu2 * &tau;
        if !value.is_positive() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    /// Independent bisection bracket for sqrt(x), used as the oracle for the
    /// derived sqrt_bounds expectations.
    fn bisect_sqrt(x: &Rational, steps: u32) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = x.clone().max(Rational::one());
        for _ in 0..steps {
            let mid = (&lo + &hi) / int(2);
            if &mid * &mid <= *x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    #[test]
    fn sqrt_bounds_perfect_squares() {
        assert_eq!(sqrt_bounds(&int(1), 40).unwrap(), (int(1), int(1)));
        assert_eq!(sqrt_bounds(&int(4), 40).unwrap(), (int(2), int(2)));
        assert_eq!(sqrt_bounds(&rat(9, 4), 40).unwrap(), (rat(3, 2), rat(3, 2)));
        assert_eq!(sqrt_bounds(&int(0), 40).unwrap(), (int(0), int(0)));
    }

    #[test]
    fn sqrt_bounds_of_14_fifths() {
        let x = rat(14, 5);
        let (lower, upper) = sqrt_bounds(&x, 40).unwrap();
        assert!(&lower * &lower <= x);
        assert!(&upper * &upper >= x);
        assert!(&upper - &lower <= two_pow_neg(40));
        // Overlaps the independent bisection bracket.
        let (blo, bhi) = bisect_sqrt(&x, 50);
        assert!(lower <= bhi && blo <= upper);
        // 1.6733200530... is inside the bracket.
        assert!(lower <= rat(16_733_200_531, 10_000_000_000));
        assert!(upper >= rat(16_733_200_530, 10_000_000_000));
    }

    #[test]
    fn sqrt_bounds_rejects_negative() {
        assert_eq!(
            sqrt_bounds(&int(-1), 40).unwrap_err(),
            ParamsError::NegativeSqrt
        );
    }

    #[test]
    fn make_params_limit_constant() {
        // epsilon = 10^-6, zeta = 10^-4: r stays within a hair of
        // sqrt(3)/2 + zeta and 1 + r matches 1 + sqrt(3)/2 ~ 1.8660254.
        let p = make_params(&rat(1, 1_000_000), &rat(1, 10_000)).unwrap();
        let (lo3, up3) = sqrt_bounds(&int(3), 80).unwrap();
        assert!(p.r >= lo3 / int(2) + rat(1, 40_000));
        assert!(p.r <= up3 / int(2) + rat(1, 10_000) + rat(1, 100_000));
        let one_plus_r = int(1) + &p.r;
        assert!(one_plus_r >= rat(18_660_254, 10_000_000));
        assert!(one_plus_r <= rat(18_660_254, 10_000_000) + rat(2, 10_000));
    }

    #[test]
    fn make_params_mu1_capped_by_one() {
        let p = make_params(&rat(1, 3), &int(2)).unwrap();
        assert_eq!(p.mu1, rat(1, 4));
    }

    #[test]
    fn make_params_delta_matches_sqrt2() {
        // (sqrt(2) - 1) / 2 ~ 0.20710678, approached from below within 2^-40.
        let p = make_params(&rat(1, 2), &rat(1, 10)).unwrap();
        let (lo2, up2) = sqrt_bounds(&int(2), 80).unwrap();
        assert!(p.delta <= (&up2 - int(1)) / int(2));
        assert!(p.delta >= (&lo2 - int(1)) / int(2) - two_pow_neg(40));
        assert!(p.delta >= rat(20_710_678, 100_000_000) - two_pow_neg(39));
        assert!(p.delta <= rat(20_710_679, 100_000_000));
    }

    #[test]
    fn make_params_rejects_bad_domain() {
        assert!(make_params(&int(0), &int(1)).is_err());
        assert!(make_params(&int(1), &int(1)).is_err());
        assert!(make_params(&rat(3, 2), &int(1)).is_err());
        assert!(make_params(&rat(1, 2), &int(0)).is_err());
        assert!(make_params(&rat(1, 2), &rat(-1, 2)).is_err());
    }

    #[test]
    fn verify_params_on_sample_points() {
        for (eps, zeta) in [
            (rat(1, 2), rat(1, 10)),
            (rat(1, 100), rat(1, 100)),
            (rat(99, 100), rat(1, 10)),
        ] {
            let p = make_params(&eps, &zeta).unwrap();
            assert!(verify_params(&p), "verify failed at {eps}, {zeta}");
        }
    }

    #[test]
    fn verify_params_holds_on_grid() {
        for k in (1..100).step_by(7) {
            for zeta in [rat(1, 100), rat(1, 10), int(1)] {
                let p = make_params(&rat(k, 100), &zeta).unwrap();
                assert!(verify_params(&p), "grid failure at {k}/100, {zeta}");
            }
        }
    }

    #[test]
    fn r_strictly_increasing_in_zeta() {
        for k in [1, 9, 50, 90] {
            let eps = rat(k, 100);
            let mut prev = make_params(&eps, &rat(1, 1000)).unwrap().r;
            for zeta in [rat(1, 100), rat(1, 10), int(1), int(3)] {
                let next = make_params(&eps, &zeta).unwrap().r;
                assert!(next > prev);
                prev = next;
            }
        }
    }

    /// At epsilon = 1/9 the two guarantees balance: 1 + r stays within the
    /// surrogate window above 17/9 + zeta/2 and below 17/9 + zeta.
    #[test]
    fn balance_point_at_one_ninth() {
        let zeta = rat(1, 10);
        let p = make_params(&rat(1, 9), &zeta).unwrap();
        let one_plus_r = int(1) + &p.r;
        assert!(one_plus_r <= rat(17, 9) + &zeta);
        assert!(one_plus_r >= rat(17, 9) + &zeta / int(4));
    }

    #[test]
    fn floor_log_basics() {
        assert_eq!(floor_log(&int(2), &int(1)), 0);
        assert_eq!(floor_log(&int(2), &int(2)), 1);
        assert_eq!(floor_log(&int(2), &int(1023)), 9);
        assert_eq!(floor_log(&int(2), &int(1024)), 10);
        assert_eq!(floor_log(&rat(3, 2), &rat(9, 4)), 2);
        assert_eq!(floor_log(&rat(3, 2), &rat(35, 16)), 1);
        // Near-one base with a large answer.
        let base = rat(1600, 1599);
        let x = rat(101, 100);
        let k = floor_log(&base, &x);
        let pow = |e: u64| -> Rational {
            let mut acc = Rational::one();
            let mut sq = base.clone();
            let mut e = e;
            while e > 0 {
                if e & 1 == 1 {
                    acc *= &sq;
                }
                sq = &sq * &sq;
                e >>= 1;
            }
            acc
        };
        assert!(pow(k) <= x && pow(k + 1) > x);
    }

    #[test]
    fn floor_div_rounds_down() {
        assert_eq!(floor_div(&rat(14, 5), &rat(1, 2)), BigInt::from(5));
        assert_eq!(floor_div(&rat(12, 5), &rat(1, 2)), BigInt::from(4));
        assert_eq!(floor_div(&int(0), &rat(1, 3)), BigInt::zero());
    }
}
