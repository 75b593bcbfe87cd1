//! Bit-stable number formatting for CSV output.

/// 17 significant digits in lowercase e-notation; `nan`, `inf`, `-inf`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn formatting() {
        assert_eq!(sci(1.0), "1.0000000000000000e0");
        assert_eq!(sci(-0.00125), "-1.2500000000000000e-3");
        assert_eq!(sci(f64::NAN), "nan");
        assert_eq!(sci(f64::NEG_INFINITY), "-inf");
        let x = std::f64::consts::LN_2;
        assert_eq!(sci(x).parse::<f64>().unwrap(), x);
    }
}
