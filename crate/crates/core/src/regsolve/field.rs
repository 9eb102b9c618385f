use std::io::Write;

use super::grid::SamplingGrid;
use crate::error::{Error, Result};
use crate::io::write_pgm;

/// Which method produced an indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    LsmMorozov,
    LsmConstant,
    LsmLearned,
    DeepOnet,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::LsmMorozov => "lsm_morozov",
            Provenance::LsmConstant => "lsm_constant",
            Provenance::LsmLearned => "lsm_learned",
            Provenance::DeepOnet => "deeponet",
        }
    }
}

fn write_grid_csv<W: Write>(mut w: W, grid: &SamplingGrid, values: &[f64]) -> Result<()> {
    writeln!(w, "x,y,value")?;
    for (i, v) in values.iter().enumerate() {
        let [x, y] = grid.point(i);
        writeln!(w, "{x:.16e},{y:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Indicator values `I(z) >= 0` on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl IndicatorField {
    pub fn new(grid: SamplingGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::shape(grid.len(), values.len()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NonFinite(format!("indicator value {v}")));
        }
        Ok(IndicatorField {
            grid,
            values,
            provenance,
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Values divided by their maximum (all zeros stay zero).
    pub fn normalized(&self) -> Vec<f64> {
        let m = self.max();
        if m > 0.0 {
            self.values.iter().map(|v| v / m).collect()
        } else {
            self.values.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid_csv(w, &self.grid, &self.values)
    }

    pub fn write_pgm<W: Write>(&self, w: W) -> Result<()> {
        let r = self.grid.resolution();
        write_pgm(w, r, r, &self.values)
    }
}

/// Per-point regularization parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RegField {
    pub grid: SamplingGrid,
    pub alpha: Vec<f64>,
}

impl RegField {
    pub fn new(grid: SamplingGrid, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != grid.len() {
            return Err(Error::shape(grid.len(), alpha.len()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Domain(format!("regularization parameter {a}")));
        }
        Ok(RegField { grid, alpha })
    }

    pub fn constant(grid: SamplingGrid, alpha: f64) -> Result<Self> {
        let n = grid.len();
        RegField::new(grid, vec![alpha; n])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid_csv(w, &self.grid, &self.alpha)
    }

    pub fn write_pgm<W: Write>(&self, w: W) -> Result<()> {
        let r = self.grid.resolution();
        write_pgm(w, r, r, &self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_values() {
        let g = SamplingGrid::new(1.0, 2).unwrap();
        assert!(IndicatorField::new(g.clone(), vec![1.0, -1.0, 0.0, 0.0], Provenance::DeepOnet).is_err());
        assert!(IndicatorField::new(g.clone(), vec![1.0; 3], Provenance::DeepOnet).is_err());
        assert!(RegField::new(g.clone(), vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(RegField::constant(g, 0.3).is_ok());
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let g = SamplingGrid::new(1.0, 2).unwrap();
        let f = IndicatorField::new(g, vec![0.1, 0.2, 0.3, 1.0 / 3.0], Provenance::LsmMorozov).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 5);
        let last: Vec<f64> = lines[4].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, 1.0, 1.0 / 3.0]);
        assert_eq!(f.normalized()[3], 1.0);
    }
}
