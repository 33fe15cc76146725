//! OFF, nOFF and OBJ readers and writers. Coordinates are written with 17
//! significant digits so that a save/load cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::EmbeddedMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    NOff,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "noff" => Some(MeshFormat::NOff),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads a mesh; `format` defaults to the file extension, and OFF files whose
/// header says `nOFF` are accepted either way.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<EmbeddedMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .unwrap_or(MeshFormat::Off);
    match format {
        MeshFormat::Off | MeshFormat::NOff => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

/// Tokens with their 1-based line numbers, comments stripped.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("");
            l.split_whitespace().map(move |t| (i + 1, t))
        })
        .collect()
}

pub fn parse_off(text: &str) -> Result<EmbeddedMesh> {
    let toks = tokens(text);
    let mut it = toks.into_iter().peekable();
    let (line, header) = it.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let dim = match header {
        "OFF" => 3,
        "nOFF" => {
            let (l, d) = it.next().ok_or_else(|| parse_err(line, "missing dimension"))?;
            d.parse::<usize>()
                .map_err(|_| parse_err(l, format!("bad dimension '{d}'")))?
        }
        other => return Err(parse_err(line, format!("unknown header '{other}'"))),
    };
    let mut next_num = |what: &str| -> Result<(usize, &str)> {
        it.next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    };
    let mut read_usize = |what: &str| -> Result<usize> {
        let (l, t) = next_num(what)?;
        t.parse::<usize>()
            .map_err(|_| parse_err(l, format!("bad {what} '{t}'")))
    };
    let nv = read_usize("vertex count")?;
    let nf = read_usize("face count")?;
    let _ne = read_usize("edge count")?;
    let mut positions = Vec::with_capacity(nv * dim);
    for _ in 0..nv * dim {
        let (l, t) = next_num("coordinate")?;
        positions.push(
            t.parse::<f64>()
                .map_err(|_| parse_err(l, format!("bad coordinate '{t}'")))?,
        );
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, t) = next_num("face size")?;
        if t != "3" {
            return Err(parse_err(l, format!("only triangles supported, got {t}-gon")));
        }
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            let (l, t) = next_num("face index")?;
            *slot = t
                .parse::<usize>()
                .map_err(|_| parse_err(l, format!("bad index '{t}'")))?;
            if *slot >= nv {
                return Err(parse_err(l, format!("index {slot} out of range")));
            }
        }
        faces.push(tri);
    }
    EmbeddedMesh::new(dim, positions, faces)
}

pub fn parse_obj(text: &str) -> Result<EmbeddedMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    let mut nv = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("");
        let mut parts = l.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, "bad coordinate")))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                positions.extend(coords);
                nv += 1;
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let k: i64 = first
                            .parse()
                            .map_err(|_| parse_err(line, format!("bad index '{t}'")))?;
                        let resolved = if k < 0 { nv as i64 + k } else { k - 1 };
                        if resolved < 0 || resolved as usize >= nv {
                            return Err(parse_err(line, format!("index {k} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(line, "only triangles supported"));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    EmbeddedMesh::new(3, positions, faces)
}

pub fn write_off(mesh: &EmbeddedMesh) -> String {
    let mut s = String::new();
    let dim = mesh.ambient_dim();
    if dim == 3 {
        s.push_str("OFF\n");
    } else {
        let _ = writeln!(s, "nOFF\n{dim}");
    }
    let _ = writeln!(
        s,
        "{} {} {}",
        mesh.num_vertices(),
        mesh.num_faces(),
        mesh.num_edges()
    );
    for v in 0..mesh.num_vertices() {
        let coords: Vec<String> = mesh.position(v).iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

pub fn write_obj(mesh: &EmbeddedMesh) -> Result<String> {
    if mesh.ambient_dim() != 3 {
        return Err(Error::InvalidSpec("OBJ output requires ambient dimension 3".into()));
    }
    let mut s = String::new();
    for v in 0..mesh.num_vertices() {
        let p = mesh.position(v);
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(s)
}

/// Writes OFF for n = 3 and nOFF otherwise unless OBJ is requested.
pub fn save_mesh(mesh: &EmbeddedMesh, path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<()> {
    let path = path.as_ref();
    let format = format.or_else(|| MeshFormat::from_path(path)).unwrap_or(MeshFormat::Off);
    let text = match format {
        MeshFormat::Obj => write_obj(mesh)?,
        _ => write_off(mesh),
    };
    fs::write(path, text)?;
    Ok(())
}
