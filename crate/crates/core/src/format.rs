//! Fixed six-significant-digit number formatting for reports and tables.

use serde::Serializer;

/// Round to 6 significant digits. Negative zero becomes zero.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded + 0.0
}

/// Text form of [`sig6`], shortest representation of the rounded value.
pub fn fmt_sig6(x: f64) -> String {
    format!("{}", sig6(x))
}

pub fn serialize_sig6<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(sig6(*v))
}

pub fn serialize_sig6_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| sig6(*x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_six_significant_digits() {
        assert_eq!(sig6(343.35), 343.35);
        assert_eq!(sig6(120.004800192), 120.005);
        assert_eq!(sig6(0.000123456789), 0.000123457);
        assert_eq!(fmt_sig6(-0.0), "0");
        assert_eq!(fmt_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_sig6(-1234567.0), "-1234570");
    }
}
