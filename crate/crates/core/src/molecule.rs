//! Nuclear configuration and its text format.
//!
//! Charges follow the attractive sign convention: every `Z` is negative, so the
//! external potential `Σ Z_l / ‖r - R_l‖` is negative everywhere.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gaussian::{dist2, Point};

/// Largest nuclear separation covered by the certified kernel range.
pub const MAX_EXTENT: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nucleus {
    pub charge: f64,
    pub position: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoleculeSpec {
    nuclei: Vec<Nucleus>,
    n_orbitals: usize,
}

impl MoleculeSpec {
    pub fn new(nuclei: Vec<Nucleus>, n_orbitals: usize) -> Result<Self> {
        if nuclei.is_empty() {
            return Err(Error::InvalidArgument("molecule has no nuclei".into()));
        }
        if n_orbitals == 0 {
            return Err(Error::InvalidArgument("need at least one orbital".into()));
        }
        for (i, n) in nuclei.iter().enumerate() {
            if !(n.charge < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "nucleus {i}: nuclear charge must be negative, got {}",
                    n.charge
                )));
            }
            if n.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "nucleus {i}: non-finite position"
                )));
            }
            for (j, m) in nuclei[..i].iter().enumerate() {
                if n.position == m.position {
                    return Err(Error::InvalidArgument(format!(
                        "nuclei {j} and {i} share a position"
                    )));
                }
                if dist2(&n.position, &m.position).sqrt() >= MAX_EXTENT {
                    return Err(Error::InvalidArgument(format!(
                        "nuclei {j} and {i} are farther apart than {MAX_EXTENT} bohr"
                    )));
                }
            }
        }
        Ok(Self { nuclei, n_orbitals })
    }

    /// HeH⁺ at 1.4 bohr separation along z, one doubly occupied orbital.
    pub fn heh_plus() -> Self {
        Self::new(
            vec![
                Nucleus {
                    charge: -1.0,
                    position: [0.0, 0.0, -0.7],
                },
                Nucleus {
                    charge: -2.0,
                    position: [0.0, 0.0, 0.7],
                },
            ],
            1,
        )
        .unwrap()
    }

    /// LiH at 3.15 bohr separation along x, two doubly occupied orbitals.
    pub fn lih() -> Self {
        Self::new(
            vec![
                Nucleus {
                    charge: -3.0,
                    position: [-3.15 / 2.0, 0.0, 0.0],
                },
                Nucleus {
                    charge: -1.0,
                    position: [3.15 / 2.0, 0.0, 0.0],
                },
            ],
            2,
        )
        .unwrap()
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn positions(&self) -> Vec<Point> {
        self.nuclei.iter().map(|n| n.position).collect()
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn with_orbitals(&self, n_orbitals: usize) -> Result<Self> {
        Self::new(self.nuclei.clone(), n_orbitals)
    }

    /// `Σ_{k<l} Z_k Z_l / ‖R_k - R_l‖`.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.nuclei.iter().enumerate() {
            for b in &self.nuclei[i + 1..] {
                e += a.charge * b.charge / dist2(&a.position, &b.position).sqrt();
            }
        }
        e
    }

    /// Axis-aligned box spanned by the nuclear positions.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.nuclei[0].position;
        let mut hi = lo;
        for n in &self.nuclei[1..] {
            for d in 0..3 {
                lo[d] = lo[d].min(n.position[d]);
                hi[d] = hi[d].max(n.position[d]);
            }
        }
        (lo, hi)
    }

    /// True if `p` lies in the nuclear bounding box, up to a relative slack of `1e-12`.
    pub fn in_bounding_box(&self, p: &Point) -> bool {
        let (lo, hi) = self.bounding_box();
        let scale = 1.0 + (0..3).map(|d| hi[d] - lo[d]).fold(0.0, f64::max);
        let slack = 1e-12 * scale;
        (0..3).all(|d| p[d] >= lo[d] - slack && p[d] <= hi[d] + slack)
    }

    /// Parse the text format: a header line `orbitals N` and one `Z x y z`
    /// line per nucleus. Blank lines and `#` comments are ignored.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut n_orbitals = None;
        let mut nuclei: Vec<Nucleus> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "orbitals" {
                if fields.len() != 2 {
                    return Err(err(line_no, "expected `orbitals N`".into()));
                }
                let n: usize = fields[1]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad orbital count `{}`", fields[1])))?;
                if n == 0 {
                    return Err(err(line_no, "orbital count must be positive".into()));
                }
                if n_orbitals.replace(n).is_some() {
                    return Err(err(line_no, "duplicate `orbitals` line".into()));
                }
                continue;
            }
            if fields.len() != 4 {
                return Err(err(
                    line_no,
                    format!("expected `Z x y z`, found {} fields", fields.len()),
                ));
            }
            let mut v = [0.0f64; 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|_| err(line_no, format!("not a number: `{f}`")))?;
                if !slot.is_finite() {
                    return Err(err(line_no, format!("not a finite number: `{f}`")));
                }
            }
            if !(v[0] < 0.0) {
                return Err(err(line_no, "nuclear charge must be negative".into()));
            }
            let position = [v[1], v[2], v[3]];
            if nuclei.iter().any(|n| n.position == position) {
                return Err(err(line_no, "duplicate nuclear position".into()));
            }
            nuclei.push(Nucleus {
                charge: v[0],
                position,
            });
        }
        let n_orbitals = n_orbitals.ok_or_else(|| err(0, "missing `orbitals N` line".into()))?;
        if nuclei.is_empty() {
            return Err(err(0, "no nuclei given".into()));
        }
        Self::new(nuclei, n_orbitals).map_err(|e| err(0, e.to_string()))
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("orbitals {}\n", self.n_orbitals);
        for n in &self.nuclei {
            s.push_str(&format!(
                "{} {} {} {}\n",
                n.charge, n.position[0], n.position[1], n.position[2]
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_heh_plus() {
        let text = "# HeH+\norbitals 1\n-1 0 0 -0.7\n-2 0 0 0.7\n";
        let m = MoleculeSpec::parse_str(text, "heh.mol").unwrap();
        assert_eq!(m, MoleculeSpec::heh_plus());
    }

    #[test]
    fn parses_lih() {
        let text = "-3 -1.575 0 0\n-1 1.575 0 0\norbitals 2\n";
        let m = MoleculeSpec::parse_str(text, "lih.mol").unwrap();
        assert_eq!(m, MoleculeSpec::lih());
        assert!((m.nuclear_repulsion() - 3.0 / 3.15).abs() < 1e-15);
    }

    #[test]
    fn rejects_positive_charge_with_line_number() {
        let text = "orbitals 1\n-1 0 0 0\n1 0 0 1\n";
        match MoleculeSpec::parse_str(text, "bad.mol") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(message, "nuclear charge must be negative");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_and_duplicates() {
        let cases = [
            ("orbitals 1\n-1 0 0\n", 2),
            ("orbitals 1\n-1 0 0 x\n", 2),
            ("orbitals 1\n-1 0 0 0\n-2 0 0 0\n", 3),
            ("orbitals two\n-1 0 0 0\n", 1),
        ];
        for (text, expect) in cases {
            match MoleculeSpec::parse_str(text, "bad.mol") {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expect, "{text:?}"),
                other => panic!("unexpected {other:?} for {text:?}"),
            }
        }
        assert!(MoleculeSpec::parse_str("-1 0 0 0\n", "x").is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = MoleculeSpec::lih();
        assert_eq!(MoleculeSpec::parse_str(&m.to_text(), "rt").unwrap(), m);
    }

    #[test]
    fn bounding_box_membership() {
        let m = MoleculeSpec::heh_plus();
        assert!(m.in_bounding_box(&[0.0, 0.0, 0.3]));
        assert!(m.in_bounding_box(&[0.0, 0.0, 0.7]));
        assert!(!m.in_bounding_box(&[0.0, 1e-6, 0.0]));
        assert!(!m.in_bounding_box(&[0.0, 0.0, 0.71]));
    }
}
