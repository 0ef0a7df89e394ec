//! CSV and OBJ writers. Floats use the shortest text that round-trips and
//! lines end in a bare LF, so the output is byte-stable.

use anyhow::Result;
use frontsing_core::criteria::format_float;
use frontsing_core::exec::{map_indices, Execution};
use frontsing_core::front::FrontGerm;
use frontsing_core::singular::{CurvatureProfile, CurvatureSample, Rect, SingularSet};

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{}", e.error()))?;
    Ok(String::from_utf8(bytes)?)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// One row per branch sample. `eta` is empty where it is undefined.
pub fn trace_csv(set: &SingularSet) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["branch_id", "t", "u", "v", "lambda_residual", "eta_u", "eta_v"])?;
    for b in &set.branches {
        for s in &b.samples {
            w.write_record([
                b.id.to_string(),
                format_float(s.t),
                format_float(s.point[0]),
                format_float(s.point[1]),
                format_float(s.lambda),
                opt(s.eta.map(|e| e[0])),
                opt(s.eta.map(|e| e[1])),
            ])?;
        }
    }
    finish(w)
}

/// `t,kappa_s,status` with status `ok`, `pole` or `error`; `kappa_s` is
/// empty unless the status is `ok`.
pub fn curvature_csv(profile: &CurvatureProfile) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["t", "kappa_s", "status"])?;
    for s in &profile.samples {
        let (kappa, status) = match s {
            CurvatureSample::Value(v) => (format_float(v.kappa), "ok"),
            CurvatureSample::Pole { .. } => (String::new(), "pole"),
            CurvatureSample::Error { .. } => (String::new(), "error"),
        };
        w.write_record([format_float(s.t()), kappa, status.to_string()])?;
    }
    finish(w)
}

/// Image of a `grid x grid` vertex lattice, with optional polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub faces: Vec<Vec<usize>>,
    pub lines: Vec<Vec<usize>>,
    /// Vertices before this index belong to the surface, the rest to
    /// polylines.
    pub surface_vertices: usize,
}

impl Mesh {
    /// Samples `f` on `grid` vertices per side of `rect`. Points where `f`
    /// cannot be evaluated are an error.
    pub fn surface(germ: &FrontGerm, rect: Rect, grid: usize, quads: bool, exec: Execution) -> Result<Mesh> {
        anyhow::ensure!(grid >= 2, "mesh grid needs at least 2 vertices per side");
        anyhow::ensure!(germ.dim() == 2, "meshes need a front of dimension 2, got {}", germ.dim());
        let at = |k: usize| {
            let (i, j) = (k % grid, k / grid);
            let s = |a: f64, b: f64, m: usize| a + (b - a) * m as f64 / (grid - 1) as f64;
            [s(rect.u_min, rect.u_max, i), s(rect.v_min, rect.v_max, j)]
        };
        let vertices = map_indices(exec, grid * grid, |k| image(germ, at(k)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut faces = Vec::new();
        for j in 0..grid - 1 {
            for i in 0..grid - 1 {
                let (a, b) = (j * grid + i, j * grid + i + 1);
                let (c, d) = (b + grid, a + grid);
                if quads {
                    faces.push(vec![a, b, c, d]);
                } else {
                    faces.push(vec![a, b, c]);
                    faces.push(vec![a, c, d]);
                }
            }
        }
        Ok(Mesh {
            surface_vertices: vertices.len(),
            vertices,
            faces,
            lines: Vec::new(),
        })
    }

    /// Appends the image of each traced branch as a polyline.
    pub fn add_singular_set(&mut self, germ: &FrontGerm, set: &SingularSet) -> Result<()> {
        for b in &set.branches {
            let first = self.vertices.len();
            for s in &b.samples {
                self.vertices.push(image(germ, s.point)?);
            }
            self.lines.push((first..self.vertices.len()).collect());
        }
        Ok(())
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let vertex = |v: &[f64; 3]| format!("v {} {} {}\n", format_float(v[0]), format_float(v[1]), format_float(v[2]));
        let record = |tag: &str, idx: &[usize]| {
            let idx: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            format!("{tag} {}\n", idx.join(" "))
        };
        out.push_str("o surface\n");
        for v in &self.vertices[..self.surface_vertices] {
            out.push_str(&vertex(v));
        }
        for f in &self.faces {
            out.push_str(&record("f", f));
        }
        if !self.lines.is_empty() {
            out.push_str("o singular_set\n");
            for v in &self.vertices[self.surface_vertices..] {
                out.push_str(&vertex(v));
            }
            for l in &self.lines {
                out.push_str(&record("l", l));
            }
        }
        out
    }
}

fn image(germ: &FrontGerm, p: [f64; 2]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (o, e) in out.iter_mut().zip(germ.map()) {
        *o = e.eval_scalar(&p)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use frontsing_core::oracle::CatalogEntry;

    #[test]
    fn smallest_mesh() {
        let g = CatalogEntry::D4Plus.germ();
        let rect = Rect::square(1.0);
        let tri = Mesh::surface(&g, rect, 2, false, Execution::Sequential).unwrap();
        assert_eq!((tri.vertices.len(), tri.faces.len()), (4, 2));
        let quad = Mesh::surface(&g, rect, 2, true, Execution::Sequential).unwrap();
        assert_eq!(quad.faces, vec![vec![0, 1, 3, 2]]);
        assert_eq!(
            quad.to_obj(),
            "o surface\nv 1 4 -2\nv -1 4 -2\nv -1 4 2\nv 1 4 2\nf 1 2 4 3\n"
        );
    }

    #[test]
    fn faces_reference_vertices() {
        let g = CatalogEntry::D4Minus.germ();
        let m = Mesh::surface(&g, Rect::square(0.3), 7, false, Execution::Parallel).unwrap();
        assert_eq!(m.vertices.len(), 49);
        assert_eq!(m.faces.len(), 72);
        assert!(m.faces.iter().flatten().all(|&i| i < m.vertices.len()));
    }

    #[test]
    fn curvature_rows() {
        let p = CurvatureProfile {
            branch: "b".into(),
            samples: vec![
                CurvatureSample::Pole { t: 0.0 },
                CurvatureSample::Error {
                    t: 0.5,
                    message: "x, y".into(),
                },
            ],
        };
        assert_eq!(curvature_csv(&p).unwrap(), "t,kappa_s,status\n0,,pole\n0.5,,error\n");
    }
}
