//! Thin float helpers backed by `libm` so results are identical with and
//! without `std`.

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Clamped floor `max{0, floor(x)}` as an integer.
pub fn floor_plus(x: f64) -> u32 {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        floor(x) as u32
    }
}

/// Ceiling of a nonnegative real as u64. Values below zero clamp to 0.
pub fn ceil_u64(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        ceil(x) as u64
    }
}

/// `ceil(a / b)` on integers; 0 when `a == 0`.
pub fn ceil_div(a: u64, b: u64) -> u64 {
    if a == 0 {
        0
    } else {
        a.div_ceil(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_plus_clamps() {
        assert_eq!(floor_plus(-3.2), 0);
        assert_eq!(floor_plus(0.0), 0);
        assert_eq!(floor_plus(2.9), 2);
        assert_eq!(floor_plus(f64::NEG_INFINITY), 0);
    }

    #[test]
    fn ceil_div_matches_definition() {
        assert_eq!(ceil_div(0, 5), 0);
        assert_eq!(ceil_div(6, 2), 3);
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(ceil_div(1, 1), 1);
    }

    #[test]
    fn log2_exact_on_powers_of_two() {
        assert_eq!(log2(16384.0), 14.0);
        assert_eq!(log2(1.0), 0.0);
    }
}
