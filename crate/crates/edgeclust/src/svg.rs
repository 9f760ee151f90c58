use std::fmt::Write as _;
use std::path::Path;

use edgeclust_core::edge_features::{pca_fit, pca_transform};
use edgeclust_core::{Error, Matrix, Partition, SampleSet};

use crate::error::{AppError, AppResult, StageExt};

pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#e7ba52",
];

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 0.05;
const RADIUS: f64 = 3.0;

/// First two coordinates, or the first two principal components when `d > 2`.
fn plane(s: &SampleSet) -> AppResult<Matrix> {
    match s.dim() {
        0 | 1 => Err(Error::InvalidParameter(format!("plotting needs at least 2 feature columns, got {}", s.dim())))
            .stage("plot"),
        2 => Ok(s.features().clone()),
        _ => {
            let mut model = pca_fit(s.features(), 1.0).stage("plot")?;
            model.components = first_columns(&model.components, 2);
            model.explained_variance.truncate(2);
            pca_transform(&model, s.features()).stage("plot")
        }
    }
}

fn first_columns(m: &Matrix, c: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), c.min(m.cols()));
    for i in 0..m.rows() {
        for j in 0..out.cols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

fn axis(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    (lo - MARGIN * span, hi + MARGIN * span)
}

/// Standalone SVG scatter plot, one fill per cluster.
pub fn svg_string(s: &SampleSet, p: &Partition) -> AppResult<String> {
    if p.is_empty() || s.is_empty() {
        return Err(Error::Empty("plot points")).stage("plot");
    }
    if p.len() != s.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: p.len() }).stage("plot");
    }
    let xy = plane(s)?;
    let (x0, x1) = axis(xy.row_iter().map(|r| r[0]));
    let (y0, y1) = axis(xy.row_iter().map(|r| r[1]));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for (i, r) in xy.row_iter().enumerate() {
        let cx = (r[0] - x0) / (x1 - x0) * WIDTH;
        // SVG y grows downward
        let cy = (y1 - r[1]) / (y1 - y0) * HEIGHT;
        let fill = PALETTE[(p.label(i) - 1) % PALETTE.len()];
        let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{RADIUS}" fill="{fill}"/>"#);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(s: &SampleSet, p: &Partition, path: impl AsRef<Path>) -> AppResult<()> {
    let path = path.as_ref();
    let svg = svg_string(s, p)?;
    std::fs::write(path, svg).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use edgeclust_core::validate_partition;
    use std::collections::BTreeSet;

    fn fills(svg: &str) -> Vec<&str> {
        svg.lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.split("fill=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect()
    }

    #[test]
    fn four_points_two_colors() {
        let s = SampleSet::new(Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap(), None)
            .unwrap();
        let p = validate_partition(&[1, 1, 2, 2]).unwrap();
        let svg = svg_string(&s, &p).unwrap();
        let f = fills(&svg);
        assert_eq!(f.len(), 4);
        assert_eq!(f.iter().collect::<BTreeSet<_>>().len(), 2);
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn palette_cycles_after_twelve() {
        let rows: Vec<[f64; 2]> = (0..13).map(|i| [i as f64, 0.0]).collect();
        let s = SampleSet::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let p = Partition::singletons(13);
        let svg = svg_string(&s, &p).unwrap();
        let f = fills(&svg);
        assert_eq!(f[12], f[0]);
        assert_eq!(f[..12].iter().collect::<BTreeSet<_>>().len(), 12);
    }

    #[test]
    fn three_dims_are_projected() {
        let rows = [[0.0, 0.0, 1.0], [1.0, 2.0, 0.0], [2.0, 1.0, 3.0], [5.0, 1.0, 1.0]];
        let s = SampleSet::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let projected = plane(&s).unwrap();
        assert_eq!(projected.cols(), 2);
        let svg = svg_string(&s, &Partition::single_cluster(4)).unwrap();
        assert_eq!(fills(&svg).len(), 4);
    }

    #[test]
    fn margins_keep_points_inside() {
        let s = SampleSet::new(Matrix::from_rows(&[[-3.0, 10.0], [7.0, 20.0]]).unwrap(), None).unwrap();
        let svg = svg_string(&s, &Partition::singletons(2)).unwrap();
        let first = svg.lines().find(|l| l.starts_with("<circle")).unwrap();
        // 5% of the span on each side maps to 600 / 1.1 * 0.05
        assert!(first.contains(&format!("cx=\"{:.3}\"", 600.0 * 0.05 / 1.1)), "{first}");
    }

    #[test]
    fn empty_partition_or_one_column_rejected() {
        let s = SampleSet::new(Matrix::from_rows(&[[0.0], [1.0]]).unwrap(), None).unwrap();
        assert!(svg_string(&s, &Partition::singletons(2)).is_err());
        let s2 = SampleSet::new(Matrix::from_rows(&[[0.0, 1.0]]).unwrap(), None).unwrap();
        assert!(svg_string(&s2, &Partition::singletons(0)).is_err());
    }
}
