//! Equirectangular maps as binary portable graymaps (`P5`) or pixmaps (`P6`).
//!
//! An encoded image is the ASCII header `P5\n<width> <height>\n255\n` (or
//! `P6`) followed by one byte (or one RGB byte triple) per pixel, rows
//! top to bottom. Row `i` is the ring at colatitude `(i + ½)π/n_theta`, so
//! the north pole is at the top; column `k` is longitude `2πk/n_phi`.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    /// `0` at the minimum, `255` at the maximum; constant fields are `128`.
    Gray,
    /// Blue ramp for negative values, red ramp for positive ones, white at
    /// zero, scaled by the largest magnitude.
    Diverging,
}

impl Palette {
    pub fn name(&self) -> &'static str {
        match self {
            Palette::Gray => "gray",
            Palette::Diverging => "diverging",
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Palette::Gray => "pgm",
            Palette::Diverging => "ppm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub width: usize,
    pub height: usize,
    pub palette: Palette,
    pub min: f64,
    pub max: f64,
    /// One byte per pixel for gray, three for diverging.
    pub pixels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("{values} values do not fill a {n_theta}x{n_phi} grid")]
    Shape { values: usize, n_theta: usize, n_phi: usize },
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
}

/// Linear value-to-intensity map of a row-major `n_theta × n_phi` field.
pub fn render(values: &[f64], n_theta: usize, n_phi: usize, palette: Palette) -> Result<Rendering, RenderError> {
    if n_theta == 0 || n_phi == 0 || values.len() != n_theta * n_phi {
        return Err(RenderError::Shape {
            values: values.len(),
            n_theta,
            n_phi,
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(RenderError::NonFinite { index });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let to_byte = |t: f64| (255.0 * t.clamp(0.0, 1.0)).round() as u8;
    let pixels = match palette {
        Palette::Gray => {
            let span = max - min;
            values
                .iter()
                .map(|v| if span > 0.0 { to_byte((v - min) / span) } else { 128 })
                .collect()
        }
        Palette::Diverging => {
            let scale = min.abs().max(max.abs());
            values
                .iter()
                .flat_map(|v| {
                    let t = if scale > 0.0 { v / scale } else { 0.0 };
                    if t < 0.0 {
                        let c = to_byte(1.0 + t);
                        [c, c, 255]
                    } else {
                        let c = to_byte(1.0 - t);
                        [255, c, c]
                    }
                })
                .collect()
        }
    };
    Ok(Rendering {
        width: n_phi,
        height: n_theta,
        palette,
        min,
        max,
        pixels,
    })
}

impl Rendering {
    pub fn encode(&self) -> Vec<u8> {
        let magic = match self.palette {
            Palette::Gray => "P5",
            Palette::Diverging => "P6",
        };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_bytes() {
        let r = render(&[0.0, 1.0, 2.0, 4.0], 2, 2, Palette::Gray).unwrap();
        assert_eq!((r.min, r.max), (0.0, 4.0));
        assert_eq!(r.encode(), b"P5\n2 2\n255\n\x00\x40\x80\xff".to_vec());
    }

    #[test]
    fn constant_field_is_uniform() {
        let r = render(&[3.5; 6], 2, 3, Palette::Gray).unwrap();
        assert!(r.pixels.iter().all(|p| *p == 128));
        let d = render(&[0.0; 6], 2, 3, Palette::Diverging).unwrap();
        assert!(d.pixels.iter().all(|p| *p == 255));
    }

    #[test]
    fn diverging_ramps() {
        let r = render(&[-2.0, -1.0, 0.0, 2.0], 1, 4, Palette::Diverging).unwrap();
        assert_eq!(r.pixels, vec![0, 0, 255, 128, 128, 255, 255, 255, 255, 255, 0, 0]);
        assert!(r.encode().starts_with(b"P6\n4 1\n255\n"));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(render(&[0.0; 5], 2, 3, Palette::Gray), Err(RenderError::Shape { .. })));
        assert_eq!(
            render(&[0.0, f64::NAN], 1, 2, Palette::Gray),
            Err(RenderError::NonFinite { index: 1 })
        );
    }
}
