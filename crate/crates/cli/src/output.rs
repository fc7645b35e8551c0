use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// CSV cell with 17 significant digits, so that repeated runs can be
/// compared byte for byte and values survive a round trip.
pub fn num(x: f64) -> String {
    // Adding +0 turns -0 into +0.
    format!("{:.16e}", x + 0.0)
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            text: columns.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Writes via a temporary sibling and a rename, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Sends `contents` to `path`, or to standard output when there is none.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Static polyline rendering; the viewport is the bounding box plus a 10%
/// margin on every side. The p axis points up.
pub fn svg_polyline(points: &[(f64, f64)], title: &str) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let (w, h) = ((x1 - x0).max(1e-3 * span), (y1 - y0).max(1e-3 * span));
    let (mx, my) = (0.1 * w, 0.1 * h);
    let (vx, vy, vw, vh) = (x0 - mx, -(y1 + my), w + 2.0 * mx, h + 2.0 * my);
    let stroke = 0.004 * vw.max(vh);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx:.9} {vy:.9} {vw:.9} {vh:.9}\" width=\"600\" height=\"{:.0}\">",
        600.0 * vh / vw
    );
    let _ = writeln!(s, "  <title>{}</title>", escape(title));
    let _ = write!(
        s,
        "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.9}\" stroke-linejoin=\"round\" points=\""
    );
    for (i, &(x, y)) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.9},{:.9}", -y);
    }
    s.push_str("\"/>\n</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn svg_viewport_has_margin() {
        let svg = svg_polyline(&[(0.0, 0.0), (10.0, 0.0), (10.0, 5.0)], "a<b");
        assert!(svg.contains("viewBox=\"-1.000000000 -5.500000000 12.000000000 6.000000000\""));
        assert!(svg.contains("a&lt;b"));
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.csv");
        write_atomic(&path, "a\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a\n");
        assert!(!dir.path().join("sub").join("x.csv.tmp").exists());
    }
}
