//! Terrain, source and target arguments.

use std::path::Path as FsPath;

use anyhow::{bail, Context, Result};
use sdpath::terrain::Format;
use sdpath::{generate, Location, Point3, Terrain, VertexId};

/// Loads a terrain from a file (`.off` or JSON) or builds one from a
/// generator description such as `gen:skinny:100` or `gen:random:5`.
pub fn load_terrain(arg: &str, seed: u64) -> Result<Terrain> {
    let t = if let Some(rest) = arg.strip_prefix("gen:") {
        generated(rest, seed)?
    } else {
        let data = std::fs::read(arg).with_context(|| format!("reading {arg}"))?;
        let format = if is_off(arg, &data) { Format::Off } else { Format::Json };
        Terrain::load(&data, format).with_context(|| format!("loading {arg}"))?
    };
    let report = t.validate();
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        bail!(sdpath::Error::InvalidParameter(format!("invalid terrain: {}", list.join("; "))));
    }
    Ok(t)
}

fn is_off(path: &str, data: &[u8]) -> bool {
    let ext = FsPath::new(path).extension().and_then(|e| e.to_str());
    ext.is_some_and(|e| e.eq_ignore_ascii_case("off")) || data.starts_with(b"OFF")
}

fn generated(desc: &str, seed: u64) -> Result<Terrain> {
    let mut parts = desc.split(':');
    let family = parts.next().unwrap_or_default();
    let param = parts.next();
    let num = |default: f64| -> Result<f64> {
        param.map_or(Ok(default), |p| {
            p.parse().with_context(|| format!("bad generator parameter {p:?}"))
        })
    };
    generate_family(family, num, seed)
}

/// Builds one member of a named family. `param` supplies the family's
/// parameter, falling back to the given default.
pub fn generate_family(
    family: &str,
    param: impl Fn(f64) -> Result<f64>,
    seed: u64,
) -> Result<Terrain> {
    let t = match family {
        "ramp" => generate::ramp(param(1.0)?)?,
        "skinny" => generate::skinny(param(10.0)?)?,
        "nearlevel" => generate::nearlevel(param(0.05)?)?,
        "random" => {
            let n = param(5.0)?;
            if n.fract() != 0.0 || n < 0.0 {
                bail!(sdpath::Error::InvalidParameter(format!("grid size must be an integer, got {n}")));
            }
            generate::random_grid(n as usize, seed)?
        }
        "two-face" => generate::two_face(seed)?,
        "pit" => generate::pit()?,
        "isoline" => generate::isoline_strip()?,
        "triangle" => generate::horizontal_triangle(param(1.0)?)?,
        other => bail!(sdpath::Error::InvalidParameter(format!("unknown terrain family {other:?}"))),
    };
    Ok(t)
}

/// A parsed `v:ID` or `p:x,y[,z]` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum PointArg {
    Vertex(VertexId),
    Point { x: f64, y: f64, z: Option<f64> },
}

impl PointArg {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || sdpath::Error::InvalidParameter(format!("expected v:ID or p:x,y[,z], got {s:?}"));
        if let Some(id) = s.strip_prefix("v:") {
            return Ok(PointArg::Vertex(id.trim().parse().map_err(|_| bad())?));
        }
        let coords = s.strip_prefix("p:").ok_or_else(bad)?;
        let nums = coords
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        match nums[..] {
            [x, y] => Ok(PointArg::Point { x, y, z: None }),
            [x, y, z] => Ok(PointArg::Point { x, y, z: Some(z) }),
            _ => Err(bad().into()),
        }
    }

    /// The surface point, inferring `z` from the terrain when omitted.
    pub fn resolve(&self, t: &Terrain) -> Result<Point3> {
        match *self {
            PointArg::Vertex(v) => {
                if v >= t.vertex_count() {
                    bail!(sdpath::Error::UnknownNode(v));
                }
                Ok(*t.vertex(v))
            }
            PointArg::Point { x, y, z: Some(z) } => Ok(Point3::new(x, y, z)),
            PointArg::Point { x, y, z: None } => t
                .surface_point(x, y)
                .ok_or_else(|| {
                    sdpath::Error::InvalidParameter(format!("no terrain surface above ({x}, {y})")).into()
                }),
        }
    }
}

/// Resolves the source: an explicit vertex, a surface point (inserted as a
/// new vertex), the terrain's stored source, or its highest vertex.
pub fn resolve_source(t: Terrain, arg: Option<&str>) -> Result<(Terrain, VertexId)> {
    let arg = match arg {
        Some(s) => s,
        None => {
            let v = t.source().unwrap_or_else(|| t.highest_vertex());
            return Ok((t, v));
        }
    };
    let parsed = match arg.parse::<VertexId>() {
        Ok(v) => PointArg::Vertex(v),
        Err(_) => PointArg::parse(arg)?,
    };
    match parsed {
        PointArg::Vertex(v) => {
            PointArg::Vertex(v).resolve(&t)?;
            Ok((t, v))
        }
        point => {
            let p = point.resolve(&t)?;
            if let Location::Vertex(v) = t.locate(&p) {
                return Ok((t, v));
            }
            Ok(t.insert_source(&p)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_point_args() {
        assert_eq!(PointArg::parse("v:3").unwrap(), PointArg::Vertex(3));
        assert_eq!(
            PointArg::parse("p:0.5,0.25").unwrap(),
            PointArg::Point { x: 0.5, y: 0.25, z: None }
        );
        assert_eq!(
            PointArg::parse("p:1,2,3").unwrap(),
            PointArg::Point { x: 1.0, y: 2.0, z: Some(3.0) }
        );
        for bad in ["3", "v:x", "p:1", "p:1,2,3,4", "q:1,2"] {
            assert!(PointArg::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn infer_height() {
        let t = generate::ramp(1.0).unwrap();
        let p = PointArg::parse("p:0.5,0.5").unwrap().resolve(&t).unwrap();
        assert_eq!(p, Point3::new(0.5, 0.5, 0.5));
        assert!(PointArg::parse("p:2,2").unwrap().resolve(&t).is_err());
        assert!(PointArg::parse("v:9").unwrap().resolve(&t).is_err());
    }

    #[test]
    fn sources() {
        let t = generate::ramp(1.0).unwrap();
        assert_eq!(resolve_source(t.clone(), None).unwrap().1, 0);
        assert_eq!(resolve_source(t.clone(), Some("2")).unwrap().1, 2);
        assert_eq!(resolve_source(t.clone(), Some("p:1,0")).unwrap().1, 1);
        let (u, s) = resolve_source(t, Some("p:0.25,0.25")).unwrap();
        assert_eq!(s, 4);
        assert_eq!(u.face_count(), 4);
    }

    #[test]
    fn generator_descriptions() {
        assert_eq!(load_terrain("gen:ramp", 0).unwrap().vertex_count(), 4);
        assert_eq!(load_terrain("gen:random:4", 7).unwrap().vertex_count(), 16);
        assert!(load_terrain("gen:skinny:0.5", 0).is_err());
        assert!(load_terrain("gen:random:2.5", 0).is_err());
        assert!(load_terrain("gen:volcano", 0).is_err());
    }
}
