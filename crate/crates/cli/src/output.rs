use std::fs;
use std::path::Path;

use crate::error::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("writing to memory");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("writing to memory");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

/// Writes through a temporary file so that readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn ramp(t: f64) -> (u8, u8, u8) {
    let lo = (48.0, 18.0, 120.0);
    let hi = (250.0, 230.0, 40.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (mix(lo.0, hi.0), mix(lo.1, hi.1), mix(lo.2, hi.2))
}

/// Heatmap with one rect per cell, rows in y order from the bottom. Cells
/// equal to `sentinel` are drawn grey and left out of the color scale.
pub fn heatmap_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    nx: usize,
    ny: usize,
    values: &[Option<f64>],
    sentinel: Option<f64>,
) -> String {
    const CELL: usize = 16;
    const MARGIN: usize = 60;
    let scaled: Vec<f64> = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| Some(*v) != sentinel)
        .collect();
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = 2 * MARGIN + nx * CELL + 120;
    let height = 2 * MARGIN + ny * CELL;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    s += &format!("<text x=\"{MARGIN}\" y=\"20\" font-size=\"13\">{title}</text>\n");
    for iy in 0..ny {
        for ix in 0..nx {
            let x = MARGIN + ix * CELL;
            let y = MARGIN + (ny - 1 - iy) * CELL;
            let fill = match values[iy * nx + ix] {
                None => "#ffffff".to_string(),
                Some(v) if Some(v) == sentinel => "#9a9a9a".to_string(),
                Some(v) => {
                    let t = if max > min { (v - min) / (max - min) } else { 0.5 };
                    let (r, g, b) = ramp(t);
                    format!("#{r:02x}{g:02x}{b:02x}")
                }
            };
            s += &format!("<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\"/>\n");
        }
    }
    let bottom = MARGIN + ny * CELL;
    s += &format!("<text x=\"{MARGIN}\" y=\"{}\">{x_label}</text>\n", bottom + 20);
    s += &format!(
        "<text x=\"15\" y=\"{MARGIN}\" transform=\"rotate(-90 15 {MARGIN})\" text-anchor=\"end\">{y_label}</text>\n"
    );
    let lx = MARGIN + nx * CELL + 30;
    s += &format!("<g id=\"legend\">\n");
    for i in 0..10 {
        let (r, g, b) = ramp(1.0 - i as f64 / 9.0);
        s += &format!(
            "<rect x=\"{lx}\" y=\"{}\" width=\"16\" height=\"10\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n",
            MARGIN + i * 10
        );
    }
    let (lo, hi) = if scaled.is_empty() {
        ("none".to_string(), "none".to_string())
    } else {
        (format!("{min:.4e}"), format!("{max:.4e}"))
    };
    s += &format!("<text x=\"{}\" y=\"{}\">max {hi}</text>\n", lx + 20, MARGIN + 9);
    s += &format!("<text x=\"{}\" y=\"{}\">min {lo}</text>\n", lx + 20, MARGIN + 99);
    if let Some(sv) = sentinel {
        s += &format!(
            "<rect x=\"{lx}\" y=\"{}\" width=\"16\" height=\"10\" fill=\"#9a9a9a\"/><text x=\"{}\" y=\"{}\">{sv} = unbroken</text>\n",
            MARGIN + 115,
            lx + 20,
            MARGIN + 124
        );
    }
    s += "</g>\n</svg>\n";
    s
}
