use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeviceClass {
    Normal,
    PaAssist,
    Drop,
}

/// Rule thresholds on data value and normalized channel quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub value_high: f64,
    pub value_low: f64,
    pub quality_low: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { value_high: 0.4, value_low: 0.2, quality_low: 0.3 }
    }
}

/// Valuable devices behind poor links get antenna assistance, worthless
/// ones behind poor links are dropped, everyone else proceeds normally.
pub fn classify(value: f64, quality: f64, t: &Thresholds) -> DeviceClass {
    if quality < t.quality_low && value >= t.value_high {
        DeviceClass::PaAssist
    } else if quality < t.quality_low && value < t.value_low {
        DeviceClass::Drop
    } else {
        DeviceClass::Normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_cases() {
        let t = Thresholds::default();
        assert_eq!(classify(1.0, 0.0, &t), DeviceClass::PaAssist);
        assert_eq!(classify(1.0, 1.0, &t), DeviceClass::Normal);
        assert_eq!(classify(0.0, 0.0, &t), DeviceClass::Drop);
        assert_eq!(classify(0.3, 0.0, &t), DeviceClass::Normal);
        assert_eq!(classify(0.0, 1.0, &t), DeviceClass::Normal);
    }
}
