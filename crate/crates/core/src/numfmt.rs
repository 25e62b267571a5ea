/// Formats `x` with `sig` significant digits, C `%g` style: positional when
/// the decimal exponent is in [-4, sig), scientific otherwise, trailing
/// zeros stripped. Output is locale-free and stable across platforms.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf".into() } else { "inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let (sign, abs) = if x < 0.0 { ("-", -x) } else { ("", x) };
    let sci = format!("{:.*e}", sig - 1, abs);
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp always emits e");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), sig);

    if exp < -4 || exp >= sig as i32 {
        let m = strip_point_zeros(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let out = if exp >= 0 {
        let cut = (exp + 1) as usize;
        let (int, frac) = digits.split_at(cut);
        if frac.is_empty() {
            int.to_string()
        } else {
            strip_point_zeros(&format!("{int}.{frac}"))
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        strip_point_zeros(&format!("0.{zeros}{digits}"))
    };
    format!("{sign}{out}")
}

fn strip_point_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

/// Formats `x` for JSON with 17 significant digits (scientific form), enough
/// to reproduce the exact f64 bit pattern on read-back.
pub fn fmt_json_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    format!("{:.16e}", x)
}
