//! Number formatting for CSV and plot files.

/// `x` with 9 significant digits, `%g` style: plain decimals for moderate
/// magnitudes, scientific otherwise, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if (-5..9).contains(&exp) {
        if exp >= 0 {
            let (int, frac) = digits.split_at(exp as usize + 1);
            join(int, frac)
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            join("0", &format!("{zeros}{digits}"))
        }
    } else {
        let (lead, frac) = digits.split_at(1);
        format!("{}e{exp}", join(lead, frac))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn join(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn examples() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0 / 6.0), "0.166666667");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(1234.5), "1234.5");
        assert_eq!(sig9(0.1 + 0.2), "0.3");
        assert_eq!(sig9(9.9999999996), "10");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(2.0e-5), "0.00002");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips_to_nine_digits() {
        for &x in &[0.123456789123, 3.14159265358979, 1e-3 / 7.0, 42.0] {
            let y: f64 = sig9(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 1e-8);
        }
    }
}
