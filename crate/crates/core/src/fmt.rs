//! Number formatting shared by the CSV writers.

/// Formats `x` with `sig` significant digits in the style of C's `%g`:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros removed.
pub fn fmt_g(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= sig as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_g;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_g(0.0, 12), "0");
        assert_eq!(fmt_g(1.0, 12), "1");
        assert_eq!(fmt_g(-std::f64::consts::PI, 12), "-3.14159265359");
        assert_eq!(fmt_g(0.5, 12), "0.5");
        assert_eq!(fmt_g(1.0e-7, 12), "1e-7");
        assert_eq!(fmt_g(123456.0, 3), "1.23e5");
        assert_eq!(fmt_g(f64::INFINITY, 12), "inf");
    }
}
