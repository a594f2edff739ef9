use num_traits::Zero;

use crate::error::Result;
use crate::poly::{sign, Rational};
use crate::predicates::PredicateKind;
use crate::schemes::SchemeId;
use crate::tables::Component;

use super::compiled::{compiled, Integerized};
use super::{table_id, EvalReport, IndexedPoint};

/// Two incidence forms per wedge test, each two products and two sums.
const WEDGE_OPS: usize = 8;

type Line = [Rational; 3];

fn line(a: &IndexedPoint, b: &IndexedPoint) -> Line {
    [&a.y - &b.y, &b.x - &a.x, &a.x * &b.y - &a.y * &b.x]
}

fn incidence(l: &Line, p: &IndexedPoint) -> Rational {
    &l[0] * &p.x + &l[1] * &p.y + &l[2]
}

fn cross(ax: &Rational, ay: &Rational, bx: &Rational, by: &Rational) -> Rational {
    ax * by - ay * bx
}

/// Sign of a homogeneous vector's scale: the last coordinate when finite,
/// else the first nonzero direction coordinate.
fn normalization(l: &Line) -> i8 {
    [&l[2], &l[0], &l[1]]
        .into_iter()
        .map(sign)
        .find(|&s| s != 0)
        .unwrap_or(0)
}

/// Sign of the 3×3 determinant of three dual points, computed on
/// normalized points with ideal points handled by reduced forms.
pub fn unperturbed_dual_sign(lines: &[Line; 3]) -> i8 {
    let norms = lines.each_ref().map(normalization);
    if norms.contains(&0) {
        return 0;
    }
    let ideal: Vec<usize> = (0..3).filter(|&k| lines[k][2].is_zero()).collect();
    let affine = |k: usize| (&lines[k][0] / &lines[k][2], &lines[k][1] / &lines[k][2]);
    let direction = |k: usize| {
        let n = Rational::from_integer(norms[k].into());
        (&lines[k][0] * &n, &lines[k][1] * &n)
    };
    // moving row k to the bottom: rows 0 and 2 keep parity, row 1 flips it
    let to_bottom = |k: usize| if k == 1 { -1 } else { 1 };
    let normalized = match ideal.len() {
        0 => {
            let (p, q, r) = (affine(0), affine(1), affine(2));
            sign(&cross(&(&q.0 - &p.0), &(&q.1 - &p.1), &(&r.0 - &p.0), &(&r.1 - &p.1)))
        }
        1 => {
            let f = ideal[0];
            let (g, h) = match f {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (pg, ph, d) = (affine(g), affine(h), direction(f));
            to_bottom(f) * sign(&cross(&(&ph.0 - &pg.0), &(&ph.1 - &pg.1), &d.0, &d.1))
        }
        2 => {
            let h = (0..3).find(|k| !ideal.contains(k)).expect("one finite row");
            let (df, dg) = (direction(ideal[0]), direction(ideal[1]));
            to_bottom(h) * sign(&cross(&df.0, &df.1, &dg.0, &dg.1))
        }
        _ => 0,
    };
    normalized * norms[0] * norms[1] * norms[2]
}

/// Sign of `den_k = r × s_k` from the wedge test on the endpoints of the
/// first segment, falling back to the perturbed table when both endpoints
/// sit in the same wedge.
fn wedge_den_sign(
    l: &Line,
    p1: &IndexedPoint,
    p2: &IndexedPoint,
    table: impl FnOnce() -> Result<EvalReport>,
    aux: &mut usize,
) -> Result<i8> {
    *aux += WEDGE_OPS;
    let (sa, sb) = (sign(&incidence(l, p1)), sign(&incidence(l, p2)));
    if sa != sb {
        return Ok(if sa != 0 { sa } else { -sb });
    }
    let r = table()?;
    *aux += r.ops_used;
    Ok(r.sign)
}

pub(crate) fn evaluate(
    slots: &[&IndexedPoint; 6],
    class: &[u32],
    coords: &[(&Rational, &Rational)],
    scheme: SchemeId,
) -> Result<EvalReport> {
    let main = compiled(&table_id(PredicateKind::SegOrderDual, scheme, class, Component::Main))?;
    let den1 = compiled(&table_id(PredicateKind::SegOrderParam, scheme, class, Component::Den1))?;
    let den2 = compiled(&table_id(PredicateKind::SegOrderParam, scheme, class, Component::Den2))?;
    let deg = main.max_deg().max(den1.max_deg()).max(den2.max_deg());
    let mut cache: Option<Integerized> = None;
    fn ints<'a>(c: &'a mut Option<Integerized>, coords: &[(&Rational, &Rational)], deg: u32) -> &'a Integerized {
        c.get_or_insert_with(|| Integerized::new(coords, deg))
    }

    let lines = [line(slots[0], slots[1]), line(slots[2], slots[3]), line(slots[4], slots[5])];
    let mut aux = 0;
    let s1 = wedge_den_sign(&lines[1], slots[0], slots[1], || den1.eval_integerized(ints(&mut cache, coords, deg)), &mut aux)?;
    let s2 = wedge_den_sign(&lines[2], slots[0], slots[1], || den2.eval_integerized(ints(&mut cache, coords, deg)), &mut aux)?;

    let direct = unperturbed_dual_sign(&lines);
    let det = if direct != 0 {
        EvalReport {
            sign: direct,
            depth: 0,
            ops_used: main.table.rows[0].coeff.stats().ops,
            ops_before: 0,
            aux_ops: 0,
        }
    } else {
        main.eval_integerized(ints(&mut cache, coords, deg))?
    };
    let dual_sign = main.table.dual_sign.unwrap_or(-1);
    Ok(EvalReport {
        sign: -dual_sign * det.sign * s1 * s2,
        aux_ops: aux,
        ..det
    })
}
