//! Gmsh MSH 2.2 ASCII subset: 2-node lines carry boundary tags, 3-node
//! triangles become cells. Point elements (type 15) are skipped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh2D, MeshError};

pub fn read_gmsh(path: impl AsRef<Path>) -> Result<Mesh2D, MeshError> {
    let text = std::fs::read_to_string(path)?;
    read_gmsh_str(&text)
}

fn err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Gmsh { line: line + 1, message: message.into() }
}

pub fn read_gmsh_str(text: &str) -> Result<Mesh2D, MeshError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pos = 0;
    let mut version_seen = false;
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut cells = Vec::new();
    let mut segs = Vec::new();

    let next = |pos: &mut usize| -> Result<(usize, &str), MeshError> {
        while *pos < lines.len() {
            let l = lines[*pos].trim();
            *pos += 1;
            if !l.is_empty() {
                return Ok((*pos - 1, l));
            }
        }
        Err(err(lines.len(), "unexpected end of file"))
    };
    let parse_num = |ln: usize, s: &str| -> Result<u64, MeshError> {
        s.parse::<u64>().map_err(|_| err(ln, format!("expected integer, got '{s}'")))
    };

    while pos < lines.len() {
        let (ln, head) = next(&mut pos)?;
        match head {
            "$MeshFormat" => {
                let (ln, fmt) = next(&mut pos)?;
                let f: Vec<&str> = fmt.split_whitespace().collect();
                if f.len() < 2 || !f[0].starts_with("2.") {
                    return Err(err(ln, format!("unsupported MSH version '{fmt}', need 2.2")));
                }
                if f[1] != "0" {
                    return Err(err(ln, "binary MSH files are not supported"));
                }
                version_seen = true;
                expect_end(&mut pos, &next, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let (ln, cnt) = next(&mut pos)?;
                let n = parse_num(ln, cnt)? as usize;
                nodes.reserve(n);
                for _ in 0..n {
                    let (ln, l) = next(&mut pos)?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 3 {
                        return Err(err(ln, "node line needs id x y [z]"));
                    }
                    let id = parse_num(ln, f[0])?;
                    let x: f64 = f[1].parse().map_err(|_| err(ln, "bad x coordinate"))?;
                    let y: f64 = f[2].parse().map_err(|_| err(ln, "bad y coordinate"))?;
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(err(ln, format!("duplicate node id {id}")));
                    }
                    nodes.push([x, y]);
                }
                expect_end(&mut pos, &next, "$EndNodes")?;
            }
            "$Elements" => {
                let (ln, cnt) = next(&mut pos)?;
                let n = parse_num(ln, cnt)? as usize;
                for _ in 0..n {
                    let (ln, l) = next(&mut pos)?;
                    let f: Vec<u64> =
                        l.split_whitespace().map(|s| parse_num(ln, s)).collect::<Result<_, _>>()?;
                    if f.len() < 3 {
                        return Err(err(ln, "element line too short"));
                    }
                    let (etype, ntags) = (f[1], f[2] as usize);
                    let rest = f.get(3 + ntags..).ok_or_else(|| err(ln, "element line too short"))?;
                    let node = |k: usize| -> Result<usize, MeshError> {
                        let id = rest.get(k).ok_or_else(|| err(ln, "missing element node"))?;
                        node_index.get(id).copied().ok_or_else(|| err(ln, format!("unknown node {id}")))
                    };
                    match etype {
                        1 => {
                            let tag = if ntags > 0 { f[3] } else { 0 };
                            if tag == 0 {
                                return Err(err(ln, "boundary line without a positive physical tag"));
                            }
                            segs.push(([node(0)?, node(1)?], tag as u32));
                        }
                        2 => {
                            let c = [node(0)?, node(1)?, node(2)?];
                            if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                                return Err(err(ln, "triangle with repeated vertices"));
                            }
                            cells.push(c);
                        }
                        15 => {}
                        other => return Err(err(ln, format!("unsupported element type {other}"))),
                    }
                }
                expect_end(&mut pos, &next, "$EndElements")?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // Skip unknown sections such as $PhysicalNames.
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, l) = next(&mut pos)?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return Err(err(ln, format!("unexpected line '{head}'"))),
        }
    }
    if !version_seen {
        return Err(err(0, "missing $MeshFormat section"));
    }
    Mesh2D::new(nodes, cells, &segs)
}

fn expect_end<'a>(
    pos: &mut usize,
    next: &impl Fn(&mut usize) -> Result<(usize, &'a str), MeshError>,
    tag: &str,
) -> Result<(), MeshError> {
    let (ln, l) = next(pos)?;
    if l != tag {
        return Err(err(ln, format!("expected {tag}, got '{l}'")));
    }
    Ok(())
}

pub fn write_gmsh_string(mesh: &Mesh2D) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    writeln!(s, "{}", mesh.n_vertices()).unwrap();
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{} {:?} {:?} 0", i + 1, v[0], v[1]).unwrap();
    }
    s.push_str("$EndNodes\n$Elements\n");
    let nb = mesh.boundary_edges().len();
    writeln!(s, "{}", nb + mesh.n_cells()).unwrap();
    for (k, e) in mesh.boundary_edges().iter().enumerate() {
        writeln!(s, "{} 1 2 {} {} {} {}", k + 1, e.tag, e.tag, e.vertices[0] + 1, e.vertices[1] + 1)
            .unwrap();
    }
    for (k, c) in mesh.cells().iter().enumerate() {
        writeln!(s, "{} 2 2 0 1 {} {} {}", nb + k + 1, c[0] + 1, c[1] + 1, c[2] + 1).unwrap();
    }
    s.push_str("$EndElements\n");
    s
}

pub fn write_gmsh(mesh: &Mesh2D, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, write_gmsh_string(mesh))?;
    Ok(())
}
