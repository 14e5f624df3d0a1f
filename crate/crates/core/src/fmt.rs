//! Float formatting shared by every CSV and text emitter.

/// 17 significant digits in scientific notation; round-trips any `f64`.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}
