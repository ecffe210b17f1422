//! CSV and JSON renderings of a [`ResultTable`].

use std::fmt::Write;

use super::ResultTable;

/// Fixed-point decimal with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::with_capacity(24);
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    }
    out
}

pub const CSV_HEADER: &str = "n,mean,stderr,count";

/// `n,mean,stderr,count` with a header row and LF line endings.
pub fn to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.n,
            format_sig17(r.mean),
            format_sig17(r.stderr),
            r.count
        );
    }
    out
}

/// `{ "metadata": {...}, "rows": [...] }`.
pub fn to_json(table: &ResultTable) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("result tables serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<ResultTable> {
    serde_json::from_str(text)
}
