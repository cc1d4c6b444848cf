//! ASCII OFF mesh input and CSV / coordinate-format matrix output.

use std::io::Write as _;
use std::path::Path;

use nalgebra::DVector;

use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use crate::linalg::Csr;

/// Load a closed oriented triangle mesh from an ASCII OFF file. The mesh is
/// chartless: vertex parameters coincide with positions and no analytic
/// immersion data is attached.
pub fn load_off(path: &Path) -> Result<SurfaceMesh> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines
        .next()
        .ok_or(Error::OffParse { line: 0, msg: "empty file".into() })?;
    if header != "OFF" {
        return Err(Error::OffParse { line, msg: format!("expected OFF header, got '{header}'") });
    }
    let (line, counts) = lines
        .next()
        .ok_or(Error::OffParse { line, msg: "missing counts line".into() })?;
    let nums: Vec<usize> = counts
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| Error::OffParse { line, msg: format!("bad count '{t}': {e}") })
        })
        .collect::<Result<_>>()?;
    if nums.len() < 2 {
        return Err(Error::OffParse { line, msg: "counts line needs nv nf [ne]".into() });
    }
    let (nv, nf) = (nums[0], nums[1]);
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or(Error::OffParse { line, msg: "unexpected end of vertex list".into() })?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::OffParse { line, msg: format!("bad coordinate '{t}': {e}") })
            })
            .collect::<Result<_>>()?;
        if coords.len() != 3 {
            return Err(Error::OffParse { line, msg: "vertices must have 3 coordinates".into() });
        }
        positions.push(DVector::from_vec(coords));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or(Error::OffParse { line, msg: "unexpected end of face list".into() })?;
        let toks: Vec<usize> = l
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::OffParse { line, msg: format!("bad face index '{t}': {e}") })
            })
            .collect::<Result<_>>()?;
        if toks.len() != 4 || toks[0] != 3 {
            return Err(Error::OffParse {
                line,
                msg: "only triangle faces ('3 a b c') are supported".into(),
            });
        }
        faces.push([toks[1], toks[2], toks[3]]);
    }
    let corner_params: Vec<[DVector<f64>; 3]> = faces
        .iter()
        .map(|f| {
            [
                positions[f[0]].clone(),
                positions[f[1]].clone(),
                positions[f[2]].clone(),
            ]
        })
        .collect();
    SurfaceMesh::build(
        positions.clone(),
        positions,
        faces,
        corner_params.clone(),
        corner_params,
        None,
        true,
    )
}

/// Write a list of values as one CSV line each, with 17 significant digits
/// (enough for bit-exact f64 round-trips).
pub fn save_csv(values: &[f64], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    for v in values {
        writeln!(f, "{v:.16e}")?;
    }
    Ok(())
}

/// Write a sparse matrix in coordinate (row, col, value) text format.
pub fn save_matrix_coordinate(a: &Csr, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{} {} {}", a.nrows, a.ncols, a.values.len())?;
    for i in 0..a.nrows {
        let (cols, vals) = a.row(i);
        for (c, v) in cols.iter().zip(vals) {
            writeln!(f, "{i} {c} {v:.16e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn icosahedron_off() -> String {
        let mesh = super::super::mesh::icosphere(0, 1.0);
        let mut s = String::from("OFF\n12 20 30\n");
        for p in &mesh.positions {
            s += &format!("{} {} {}\n", p[0], p[1], p[2]);
        }
        for t in &mesh.triangles {
            s += &format!("3 {} {} {}\n", t[0], t[1], t[2]);
        }
        s
    }

    #[test]
    fn load_off_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico.off");
        std::fs::write(&path, icosahedron_off()).unwrap();
        let mesh = load_off(&path).unwrap();
        assert_eq!(mesh.params.len(), 12);
        assert_eq!(mesh.triangles.len(), 20);
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.chartless);
    }

    #[test]
    fn load_off_detects_boundary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("open.off");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "OFF\n4 2 5").unwrap();
        writeln!(f, "0 0 0\n1 0 0\n1 1 0\n0 1 0").unwrap();
        writeln!(f, "3 0 1 2\n3 0 2 3").unwrap();
        drop(f);
        let err = load_off(&path).unwrap_err();
        assert!(matches!(err, Error::Topology(_)), "{err}");
    }

    #[test]
    fn load_off_reports_parse_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.off");
        std::fs::write(&path, "OFF\n1 0 0\n0 0 nope\n").unwrap();
        match load_off(&path).unwrap_err() {
            Error::OffParse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn csv_roundtrips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        let vals = [-2.0, -1.0000000001, 0.3333333333333333, 1e-17, 95.77];
        save_csv(&vals, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(back.len(), 5);
        for (a, b) in vals.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
