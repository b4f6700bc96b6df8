//! Plain-text dumps of mixtures and kernel expansions.
//!
//! One term per line, 17 significant digits, `#` starts a comment.
//! Mixture lines are `coeff x y z sigma`; expansion lines are `weight exponent`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMixture, GaussianTerm};
use crate::kernel::KernelExpansion;

pub fn mixture_to_string(m: &GaussianMixture) -> String {
    let mut s = format!("# coeff x y z sigma ({} terms)\n", m.len());
    for t in m.terms() {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            t.coeff, t.center[0], t.center[1], t.center[2], t.sigma
        );
    }
    s
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn parse_fields<const N: usize>(origin: &str, line: usize, fields: &[&str]) -> Result<[f64; N]> {
    let err = |message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    if fields.len() != N {
        return Err(err(format!("expected {N} fields, found {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| err(format!("not a number: `{f}`")))?;
    }
    Ok(out)
}

pub fn mixture_from_str(text: &str, origin: &str) -> Result<GaussianMixture> {
    data_lines(text)
        .map(|(line, fields)| {
            let [c, x, y, z, sigma] = parse_fields::<5>(origin, line, &fields)?;
            GaussianTerm::new(c, [x, y, z], sigma).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn expansion_to_string(k: &KernelExpansion) -> String {
    let (lo, hi) = k.valid_range();
    let mut s = format!(
        "# weight exponent ({} terms, {:?}, accuracy {:e} on [{:e}, {:e}])\n",
        k.len(),
        k.kernel(),
        k.accuracy(),
        lo,
        hi
    );
    for &(w, eta) in k.pairs() {
        let _ = writeln!(s, "{w:.16e} {eta:.16e}");
    }
    s
}

/// `(weight, exponent)` pairs from an expansion dump.
pub fn expansion_pairs_from_str(text: &str, origin: &str) -> Result<Vec<(f64, f64)>> {
    data_lines(text)
        .map(|(line, fields)| {
            let [w, eta] = parse_fields::<2>(origin, line, &fields)?;
            Ok((w, eta))
        })
        .collect()
}

pub fn write_mixture(path: &Path, m: &GaussianMixture) -> Result<()> {
    Ok(std::fs::write(path, mixture_to_string(m))?)
}

pub fn read_mixture(path: &Path) -> Result<GaussianMixture> {
    let text = std::fs::read_to_string(path)?;
    mixture_from_str(&text, &path.display().to_string())
}
