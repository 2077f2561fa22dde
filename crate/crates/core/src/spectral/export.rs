use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Field;

/// Magnitude below which modes are left out of a [`SpectralDump`].
pub const DEFAULT_DUMP_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub kx: i64,
    pub ky: i64,
    pub re: f64,
    pub im: f64,
}

/// JSON snapshot of a field's spectrum: `{"N": .., "modes": [{kx, ky, re, im}, ..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDump {
    #[serde(rename = "N")]
    pub n: usize,
    pub modes: Vec<SpectralMode>,
}

impl Field {
    /// Writes `x,y,value` rows, row-major (`y` outer, `x` inner).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,value")?;
        let xs = self.grid().coordinates();
        for (iy, y) in xs.iter().enumerate() {
            for (ix, x) in xs.iter().enumerate() {
                writeln!(out, "{},{},{}", x, y, self.at(ix, iy))?;
            }
        }
        Ok(())
    }

    /// Every coefficient on the full wavenumber table whose magnitude exceeds
    /// `threshold`, ordered by `(ky, kx)`.
    pub fn spectral_dump(&self, threshold: f64) -> SpectralDump {
        let grid = self.grid();
        let spec = self.spectrum();
        let mut ks = grid.wavenumbers();
        ks.sort_unstable();
        let mut modes = Vec::new();
        for &ky in &ks {
            for &kx in &ks {
                let c = spec.get(kx, ky);
                if c.norm() > threshold {
                    modes.push(SpectralMode { kx, ky, re: c.re, im: c.im });
                }
            }
        }
        SpectralDump { n: grid.size(), modes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize, Mode, TorusGrid};

    #[test]
    fn csv_layout() {
        let g = TorusGrid::new(4).unwrap();
        let f = Field::from_fn(&g, |x, y| x + 10.0 * y);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 17);
        let second: Vec<f64> = lines[2].split(',').map(|t| t.parse().unwrap()).collect();
        assert!((second[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(second[1], 0.0);
    }

    #[test]
    fn dump_of_single_cosine() {
        let g = TorusGrid::new(16).unwrap();
        let f = synthesize(&g, &[Mode::cos(2, -1, 1.0)]).unwrap();
        let dump = f.spectral_dump(DEFAULT_DUMP_THRESHOLD);
        assert_eq!(dump.n, 16);
        assert_eq!(dump.modes.len(), 2);
        for m in &dump.modes {
            assert!((m.re - 0.5).abs() < 1e-14 && m.im.abs() < 1e-14);
            assert_eq!((m.kx.abs(), m.ky.abs()), (2, 1));
            assert_eq!(m.kx.signum(), -m.ky.signum());
        }
        let json = serde_json::to_string(&dump).unwrap();
        assert!(json.starts_with("{\"N\":16,\"modes\":["));
        let back: SpectralDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dump);
    }
}
