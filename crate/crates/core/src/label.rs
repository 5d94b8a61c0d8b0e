//! SNR labels shared by synthesis, inference and reporting.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Either a decibel level or the categorical background-noise class.
///
/// Ordering puts `Noise` below every decibel value and decibels in
/// ascending order; nearest-centroid ties resolve toward the lesser label.
#[derive(Debug, Clone, Copy)]
pub enum SnrLabel {
    Decibel(f64),
    Noise,
}

impl SnrLabel {
    pub fn is_noise(&self) -> bool {
        matches!(self, SnrLabel::Noise)
    }

    pub fn db(&self) -> Option<f64> {
        match *self {
            SnrLabel::Decibel(v) => Some(v),
            SnrLabel::Noise => None,
        }
    }

    /// Linear power ratio; noise counts as ratio 0.
    pub fn linear(&self) -> f64 {
        match *self {
            SnrLabel::Decibel(v) => crate::inference::snr_db_to_linear(v),
            SnrLabel::Noise => 0.0,
        }
    }

    /// Directory-safe tag, e.g. `snr_-15dB` or `noise`.
    pub fn tag(&self) -> String {
        match *self {
            SnrLabel::Decibel(v) => format!("snr_{v}dB"),
            SnrLabel::Noise => "noise".to_string(),
        }
    }
}

impl PartialEq for SnrLabel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SnrLabel {}

impl PartialOrd for SnrLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SnrLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (SnrLabel::Noise, SnrLabel::Noise) => Ordering::Equal,
            (SnrLabel::Noise, SnrLabel::Decibel(_)) => Ordering::Less,
            (SnrLabel::Decibel(_), SnrLabel::Noise) => Ordering::Greater,
            // +0.0 and -0.0 are the same level
            (SnrLabel::Decibel(a), SnrLabel::Decibel(b)) => (a + 0.0).total_cmp(&(b + 0.0)),
        }
    }
}

impl fmt::Display for SnrLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnrLabel::Decibel(v) => write!(f, "{v} dB"),
            SnrLabel::Noise => f.write_str("noise"),
        }
    }
}

impl Serialize for SnrLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            SnrLabel::Decibel(v) => serializer.serialize_f64(v),
            SnrLabel::Noise => serializer.serialize_str("noise"),
        }
    }
}

impl<'de> Deserialize<'de> for SnrLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LabelVisitor;

        impl Visitor<'_> for LabelVisitor {
            type Value = SnrLabel;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decibel number or \"noise\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<SnrLabel, E> {
                Ok(SnrLabel::Decibel(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<SnrLabel, E> {
                Ok(SnrLabel::Decibel(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<SnrLabel, E> {
                Ok(SnrLabel::Decibel(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<SnrLabel, E> {
                if v.eq_ignore_ascii_case("noise") {
                    Ok(SnrLabel::Noise)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(LabelVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_sorts_lowest() {
        let mut labels = vec![
            SnrLabel::Decibel(5.0),
            SnrLabel::Noise,
            SnrLabel::Decibel(-15.0),
            SnrLabel::Decibel(0.0),
        ];
        labels.sort();
        assert_eq!(
            labels,
            vec![
                SnrLabel::Noise,
                SnrLabel::Decibel(-15.0),
                SnrLabel::Decibel(0.0),
                SnrLabel::Decibel(5.0)
            ]
        );
        assert_eq!(SnrLabel::Decibel(0.0), SnrLabel::Decibel(-0.0));
    }

    #[test]
    fn json_forms() {
        assert_eq!(
            serde_json::to_string(&SnrLabel::Noise).unwrap(),
            "\"noise\""
        );
        assert_eq!(
            serde_json::to_string(&SnrLabel::Decibel(-15.0)).unwrap(),
            "-15.0"
        );
        let back: SnrLabel = serde_json::from_str("-5").unwrap();
        assert_eq!(back, SnrLabel::Decibel(-5.0));
        let back: SnrLabel = serde_json::from_str("\"noise\"").unwrap();
        assert!(back.is_noise());
        assert!(serde_json::from_str::<SnrLabel>("\"whistle\"").is_err());
    }
}
