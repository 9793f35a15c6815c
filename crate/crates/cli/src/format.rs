/// `v` with 15 significant digits in plain decimal notation; scientific
/// notation outside 1e-5 ≤ |v| < 1e15.
pub fn fmt_sig15(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    // round first so that 9.99…e-1 becomes 1.00…e0 before choosing decimals
    let sci = format!("{v:.14e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..15).contains(&exp) {
        return sci;
    }
    format!("{:.*}", (14 - exp).max(0) as usize, v)
}
