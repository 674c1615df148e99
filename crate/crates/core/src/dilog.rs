//! Dilogarithm on [0, 1].
//!
//! Li2(x) = sum_{j>=1} x^j / j^2. The series is used for x <= 1/2 and the
//! reflection Li2(x) + Li2(1-x) = pi^2/6 - log(x) log(1-x) otherwise, so the
//! evaluation stays accurate right up to x = 1 where the variance integrand
//! concentrates.

const PI_SQ_OVER_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Li2 for x in [0, 1].
pub fn li2(x: f64) -> f64 {
    assert!(
        (0.0..=1.0 + 1e-12).contains(&x),
        "li2 domain is [0,1], got {x}"
    );
    let x = x.min(1.0);
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return PI_SQ_OVER_6;
    }
    if x <= 0.5 {
        return li2_series(x);
    }
    let y = 1.0 - x;
    if y < 1e-300 {
        return PI_SQ_OVER_6;
    }
    PI_SQ_OVER_6 - x.ln() * y.ln() - li2_series(y)
}

fn li2_series(x: f64) -> f64 {
    debug_assert!(x <= 0.5 + 1e-15);
    let mut term = x;
    let mut sum = x;
    let mut j = 1.0f64;
    loop {
        j += 1.0;
        term *= x;
        let inc = term / (j * j);
        sum += inc;
        // The negated comparison also terminates on subnormal inputs where
        // the increment underflows to exact zero.
        if !(inc > 1e-17 * sum) {
            return sum;
        }
    }
}
