use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::IndexedPoint;
use crate::poly::{parse_rational, Rational};

use super::sample_rng;

/// A tetrahedral mesh with a bivariate value per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeshBivariate {
    pub vertices: Vec<IndexedPoint>,
    pub tetrahedra: Vec<[u32; 4]>,
}

fn mesh_err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshParse {
        line,
        message: message.into(),
    }
}

impl MeshBivariate {
    pub fn new(vertices: Vec<IndexedPoint>, tetrahedra: Vec<[u32; 4]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for t in &tetrahedra {
            if let Some(v) = t.iter().find(|&&v| v as usize >= vertices.len()) {
                return Err(Error::Parse(format!("tetrahedron {t:?} references missing vertex {v}")));
            }
        }
        Ok(MeshBivariate { vertices, tetrahedra })
    }

    /// Reads `nv nt`, then `nv` lines `f1 f2`, then `nt` lines of four
    /// 0-based vertex indices. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::EmptyMesh)?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| mesh_err(hl, format!("bad count {w:?}"))))
            .collect::<Result<_>>()?;
        let [nv, nt] = counts[..] else {
            return Err(mesh_err(hl, "expected `nv nt`"));
        };
        if nv == 0 {
            return Err(Error::EmptyMesh);
        }
        let mut vertices = Vec::with_capacity(nv);
        for i in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| mesh_err(hl, format!("expected {nv} vertices, found {i}")))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            let [x, y] = f[..] else {
                return Err(mesh_err(ln, "expected `f1 f2`"));
            };
            vertices.push(IndexedPoint::new(
                i as u64,
                parse_rational(x).map_err(|e| mesh_err(ln, e.to_string()))?,
                parse_rational(y).map_err(|e| mesh_err(ln, e.to_string()))?,
            ));
        }
        let mut tetrahedra = Vec::with_capacity(nt);
        for i in 0..nt {
            let (ln, l) =
                lines.next().ok_or_else(|| mesh_err(hl, format!("expected {nt} tetrahedra, found {i}")))?;
            let ids: Vec<u32> = l
                .split_whitespace()
                .map(|w| w.parse().map_err(|_| mesh_err(ln, format!("bad vertex index {w:?}"))))
                .collect::<Result<_>>()?;
            let [a, b, c, d] = ids[..] else {
                return Err(mesh_err(ln, "expected four vertex indices"));
            };
            if let Some(v) = [a, b, c, d].into_iter().find(|&v| v as usize >= nv) {
                return Err(mesh_err(ln, format!("vertex {v} out of range")));
            }
            tetrahedra.push([a, b, c, d]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(mesh_err(ln, "unexpected trailing content"));
        }
        Ok(MeshBivariate { vertices, tetrahedra })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        MeshBivariate::parse(&std::fs::read_to_string(path)?)
    }

    /// Distinct edges of all tetrahedra, smaller vertex first, sorted.
    pub fn edges(&self) -> Vec<[u32; 2]> {
        let mut set = BTreeSet::new();
        for t in &self.tetrahedra {
            for i in 0..4 {
                for j in i + 1..4 {
                    if t[i] != t[j] {
                        set.insert([t[i].min(t[j]), t[i].max(t[j])]);
                    }
                }
            }
        }
        set.into_iter().collect()
    }
}

/// Hits among sampled triples, scaled to all triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledCount {
    pub population: u128,
    pub sampled: u64,
    pub exhaustive: bool,
    pub hits: u64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub vertices: usize,
    pub tetrahedra: usize,
    pub edges: usize,
    pub seed: u64,
    /// Vertices whose image is shared with another vertex.
    pub duplicates: u64,
    pub collinear: SampledCount,
    pub concurrent: SampledCount,
}

fn choose3(n: usize) -> u128 {
    let n = n as u128;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn count_triples(n: usize, samples: u64, rng: &mut impl Rng, mut hit: impl FnMut(usize, usize, usize) -> bool) -> SampledCount {
    let population = choose3(n);
    let mut hits = 0;
    let (sampled, exhaustive) = if population == 0 {
        (0, true)
    } else if u128::from(samples) >= population {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    hits += u64::from(hit(i, j, k));
                }
            }
        }
        (population as u64, true)
    } else {
        for _ in 0..samples {
            let i = rng.random_range(0..n);
            let j = loop {
                let j = rng.random_range(0..n);
                if j != i {
                    break j;
                }
            };
            let k = loop {
                let k = rng.random_range(0..n);
                if k != i && k != j {
                    break k;
                }
            };
            hits += u64::from(hit(i, j, k));
        }
        (samples, false)
    };
    let estimate = if sampled == 0 {
        0.0
    } else {
        hits as f64 / sampled as f64 * population as f64
    };
    SampledCount {
        population,
        sampled,
        exhaustive,
        hits,
        estimate,
    }
}

fn same(a: &IndexedPoint, b: &IndexedPoint) -> bool {
    a.x == b.x && a.y == b.y
}

fn cross(o: &IndexedPoint, a: &IndexedPoint, b: &IndexedPoint) -> Rational {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// Three pairwise distinct images on one line.
fn collinear(a: &IndexedPoint, b: &IndexedPoint, c: &IndexedPoint) -> bool {
    !same(a, b) && !same(a, c) && !same(b, c) && cross(a, b, c).is_zero()
}

/// Parameter of `(x, y)` along `a → b`, assuming it lies on that line.
fn along(a: &IndexedPoint, b: &IndexedPoint, x: &Rational, y: &Rational) -> Rational {
    let (dx, dy) = (&b.x - &a.x, &b.y - &a.y);
    ((x - &a.x) * &dx + (y - &a.y) * &dy) / (&dx * &dx + &dy * &dy)
}

fn strictly_inside(t: &Rational) -> bool {
    t.is_positive() && *t < Rational::from_integer(1.into())
}

/// A single point interior to all three segments.
fn concurrent(s: [[&IndexedPoint; 2]; 3]) -> bool {
    if s.iter().any(|[a, b]| same(a, b)) {
        return false;
    }
    let [[a, b], [c, d]] = [s[0], s[1]];
    let (r, q) = ((&b.x - &a.x, &b.y - &a.y), (&d.x - &c.x, &d.y - &c.y));
    let det = &r.0 * &q.1 - &r.1 * &q.0;
    if det.is_zero() {
        return false;
    }
    let t = ((&c.x - &a.x) * &q.1 - (&c.y - &a.y) * &q.0) / &det;
    let (px, py) = (&a.x + &t * &r.0, &a.y + &t * &r.1);
    let [e, f] = s[2];
    let on_third = ((&f.x - &e.x) * (&py - &e.y) - (&f.y - &e.y) * (&px - &e.x)).is_zero();
    strictly_inside(&t)
        && on_third
        && strictly_inside(&along(c, d, &px, &py))
        && strictly_inside(&along(e, f, &px, &py))
}

/// Counts duplicate images exactly and estimates collinear vertex triples
/// and concurrent edge triples from `samples` random triples each, or from
/// all triples when there are no more than `samples`.
pub fn scan_mesh(mesh: &MeshBivariate, samples: u64, seed: u64) -> Result<ScanReport> {
    if mesh.vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut groups: HashMap<(&Rational, &Rational), u64> = HashMap::new();
    for v in &mesh.vertices {
        *groups.entry((&v.x, &v.y)).or_default() += 1;
    }
    let duplicates = groups.values().filter(|&&c| c > 1).sum();

    let vs = &mesh.vertices;
    let collinear = count_triples(vs.len(), samples, &mut sample_rng(seed, 0), |i, j, k| {
        collinear(&vs[i], &vs[j], &vs[k])
    });
    let edges = mesh.edges();
    let seg = |e: [u32; 2]| [&vs[e[0] as usize], &vs[e[1] as usize]];
    let concurrent = count_triples(edges.len(), samples, &mut sample_rng(seed, 1), |i, j, k| {
        concurrent([seg(edges[i]), seg(edges[j]), seg(edges[k])])
    });
    Ok(ScanReport {
        vertices: vs.len(),
        tetrahedra: mesh.tetrahedra.len(),
        edges: edges.len(),
        seed,
        duplicates,
        collinear,
        concurrent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        let m = MeshBivariate::parse("3 1\n1/2 0.25\n-3 2e1\n0 0\n\n0 1 2 2\n").unwrap();
        assert_eq!(m.vertices[0].x, Rational::new(1.into(), 2.into()));
        assert_eq!(m.vertices[0].y, Rational::new(1.into(), 4.into()));
        assert_eq!(m.vertices[1].y, Rational::from_integer(20.into()));
        assert_eq!(m.edges(), vec![[0, 1], [0, 2], [1, 2]]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(MeshBivariate::parse("0 0\n"), Err(Error::EmptyMesh)));
        assert!(matches!(MeshBivariate::parse(""), Err(Error::EmptyMesh)));
        assert!(matches!(MeshBivariate::parse("1 1\n0 0\n0 0 0 4\n"), Err(Error::MeshParse { line: 3, .. })));
        assert!(matches!(MeshBivariate::parse("1 0\n0 x\n"), Err(Error::MeshParse { line: 2, .. })));
        assert!(matches!(MeshBivariate::parse("2 0\n0 0\n"), Err(Error::MeshParse { line: 1, .. })));
    }

    #[test]
    fn all_vertices_coincide() {
        let m = MeshBivariate::parse("4 1\n0 0\n0 0\n0 0\n0 0\n0 1 2 3\n").unwrap();
        let r = scan_mesh(&m, 100, 1).unwrap();
        assert_eq!(r.duplicates, 4);
        assert_eq!(r.collinear.hits, 0);
    }

    #[test]
    fn diagonal_is_all_collinear() {
        let m = MeshBivariate::parse("5 2\n0 0\n1 1\n2 2\n3 3\n4 4\n0 1 2 3\n1 2 3 4\n").unwrap();
        let r = scan_mesh(&m, 1000, 1).unwrap();
        assert!(r.collinear.exhaustive);
        assert_eq!(r.collinear.hits, 10);
        assert_eq!(r.collinear.estimate, 10.0);
        assert_eq!(r.duplicates, 0);
    }

    #[test]
    fn three_diameters_are_concurrent() {
        let m = MeshBivariate::parse("6 3\n1 0\n-1 0\n0 1\n0 -1\n3/5 4/5\n-3/5 -4/5\n0 1 2 3\n2 3 4 5\n0 1 4 5\n").unwrap();
        let r = scan_mesh(&m, 10_000, 1).unwrap();
        assert!(r.concurrent.exhaustive);
        assert!(r.concurrent.hits >= 1);
        // all six vertices lie on the unit circle, so no three are collinear
        assert_eq!(r.collinear.hits, 0);
    }

    #[test]
    fn sampling_is_seeded() {
        let text: String = std::iter::once("30 10\n".to_string())
            .chain((0..30).map(|i| format!("{} {}\n", i % 7, (i * i) % 5)))
            .chain((0..10).map(|t| format!("{} {} {} {}\n", t, t + 5, t + 10, t + 20)))
            .collect();
        let m = MeshBivariate::parse(&text).unwrap();
        let a = scan_mesh(&m, 50, 9).unwrap();
        assert!(!a.collinear.exhaustive);
        assert_eq!(a, scan_mesh(&m, 50, 9).unwrap());
    }

    #[test]
    fn interior_check_excludes_shared_endpoints() {
        let p = |i, x, y| IndexedPoint::from_ints(i, x, y);
        let (o, a, b, c) = (p(0, 0, 0), p(1, 2, 0), p(2, 0, 2), p(3, -2, -2));
        assert!(!concurrent([[&o, &a], [&o, &b], [&o, &c]]));
        let (a2, b2, c2) = (p(4, -2, 0), p(5, 0, -2), p(6, 2, 2));
        assert!(concurrent([[&a, &a2], [&b, &b2], [&c, &c2]]));
    }
}
