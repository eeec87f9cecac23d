//! Locale-free number formatting for the CSV outputs.

/// `v` with 12 significant digits. Plain decimals for moderate magnitudes,
/// exponent notation otherwise.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..=15).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (m, exp) = s.split_once('e').unwrap();
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(7151.234567891234), "7151.23456789");
        assert_eq!(num(2.0e-9), "2e-9");
        assert_eq!(num(-1.5), "-1.5");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::NAN), "nan");
        let x = 0.123456789012345;
        assert!((num(x).parse::<f64>().unwrap() - x).abs() < 1e-12);
    }
}
