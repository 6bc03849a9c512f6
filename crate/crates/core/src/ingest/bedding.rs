//! Slope-versus-strata attitude from slope aspect and bedding dip direction.

use std::fmt;

use super::grid::Grid;
use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bedding {
    /// Lateral slope.
    B1,
    /// Reverse slope.
    B2,
    /// Reverse oblique slope.
    B3,
    /// Dip slope.
    B4,
    /// Down-dip slope.
    B5,
}

impl Bedding {
    pub const ALL: [Bedding; 5] = [Bedding::B1, Bedding::B2, Bedding::B3, Bedding::B4, Bedding::B5];

    pub fn code(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_code(code: i64) -> Option<Self> {
        Self::ALL.get((code as usize).wrapping_sub(1)).copied().filter(|_| code >= 1)
    }

    pub fn description(self) -> &'static str {
        match self {
            Bedding::B1 => "Lateral slope",
            Bedding::B2 => "Reverse slope",
            Bedding::B3 => "Reverse oblique slope",
            Bedding::B4 => "Dip slope",
            Bedding::B5 => "Down-dip slope",
        }
    }
}

impl fmt::Display for Bedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.code())
    }
}

/// Classifies `|aspect - dip_direction|` (degrees). Class intervals are
/// closed on the left and open on the right.
pub fn classify_bedding(aspect_deg: f64, dip_direction_deg: f64) -> Result<Bedding, IngestError> {
    for a in [aspect_deg, dip_direction_deg] {
        if !(0.0..360.0).contains(&a) {
            return Err(IngestError::AngleOutOfRange(a));
        }
    }
    let d = (aspect_deg - dip_direction_deg).abs();
    Ok(match d {
        d if d < 30.0 => Bedding::B4,
        d if d < 60.0 => Bedding::B5,
        d if d < 120.0 => Bedding::B1,
        d if d < 150.0 => Bedding::B3,
        d if d < 210.0 => Bedding::B2,
        d if d < 240.0 => Bedding::B3,
        d if d < 300.0 => Bedding::B1,
        d if d < 330.0 => Bedding::B5,
        _ => Bedding::B4,
    })
}

/// Per-cell bedding class codes (1..=5) for aligned aspect and dip-direction
/// rasters. Cells where either input is nodata become nodata.
pub fn classify_bedding_grid(aspect: &Grid, dip_direction: &Grid) -> Result<Grid, IngestError> {
    if !aspect.geometry.aligned_with(&dip_direction.geometry) {
        return Err(IngestError::Misaligned { expected: aspect.geometry, found: dip_direction.geometry });
    }
    let nodata = -9999.0;
    let values = aspect
        .values
        .iter()
        .zip(&dip_direction.values)
        .map(|(&a, &d)| {
            if aspect.is_nodata(a) || dip_direction.is_nodata(d) {
                Ok(nodata)
            } else {
                classify_bedding(a, d).map(|b| b.code() as f64)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Grid::new(aspect.geometry, nodata, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        assert_eq!(classify_bedding(90.0, 0.0).unwrap(), Bedding::B1);
        assert_eq!(classify_bedding(0.0, 0.0).unwrap(), Bedding::B4);
        assert_eq!(classify_bedding(200.0, 20.0).unwrap(), Bedding::B2);
    }

    #[test]
    fn boundaries_are_left_closed() {
        let cases = [
            (30.0, Bedding::B5),
            (60.0, Bedding::B1),
            (120.0, Bedding::B3),
            (150.0, Bedding::B2),
            (210.0, Bedding::B3),
            (240.0, Bedding::B1),
            (300.0, Bedding::B5),
            (330.0, Bedding::B4),
        ];
        for (d, want) in cases {
            assert_eq!(classify_bedding(d, 0.0).unwrap(), want, "AbsDiff {d}");
        }
    }

    #[test]
    fn out_of_range_angles() {
        assert!(matches!(classify_bedding(360.0, 0.0), Err(IngestError::AngleOutOfRange(_))));
        assert!(classify_bedding(10.0, -1.0).is_err());
        assert!(classify_bedding(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn codes_round_trip() {
        for b in Bedding::ALL {
            assert_eq!(Bedding::from_code(b.code() as i64), Some(b));
        }
        assert_eq!(Bedding::from_code(0), None);
        assert_eq!(Bedding::from_code(6), None);
        assert_eq!(Bedding::B3.to_string(), "B3");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn total_and_symmetric(a in 0.0f64..360.0, b in 0.0f64..360.0) {
            let ab = classify_bedding(a, b).unwrap();
            let ba = classify_bedding(b, a).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }
}
