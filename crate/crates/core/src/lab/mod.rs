//! Synthetic degenerate inputs, depth experiments, the oracle cross-check
//! and the mesh degeneracy scanner.
//!
//! Every random draw comes from ChaCha8 seeded with `seed_from_u64(seed)`;
//! sample `k` of a run reads stream `k`, so sample values do not depend on
//! how a run is split across workers.

mod check;
mod experiment;
mod mesh;

use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::IndexedPoint;
use crate::poly::{int, Rational};

pub use check::{oracle_check, CheckCase, OracleCheckReport};
pub use experiment::{
    run_depth_experiment, run_depth_experiment_sharded, DepthAccumulator, DepthReport, ExperimentConfig, OutputFormat,
};
pub use mesh::{scan_mesh, MeshBivariate, SampledCount, ScanReport};

/// Random generator for sample `k` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// A ratio of two uniform integers in `[-2^31, 2^31)`, the denominator nonzero.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let num: i32 = rng.random();
    let den = loop {
        let d: i32 = rng.random();
        if d != 0 {
            break d;
        }
    };
    Rational::new(num.into(), den.into())
}

fn distinct_rationals<const N: usize>(rng: &mut impl Rng) -> [Rational; N] {
    loop {
        let v: [Rational; N] = std::array::from_fn(|_| random_rational(rng));
        if (0..N).all(|i| (i + 1..N).all(|j| v[i] != v[j])) {
            return v;
        }
    }
}

/// Point on the unit circle with stereographic parameter `t`.
pub fn circle_point(t: &Rational) -> (Rational, Rational) {
    let one = Rational::one();
    let t2 = t * t;
    let d = &one + &t2;
    ((&one - &t2) / &d, (t * int(2)) / d)
}

/// Rotation by the circle point of `t`, then translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidMotion {
    pub t: Rational,
    pub dx: Rational,
    pub dy: Rational,
}

impl RigidMotion {
    pub fn identity() -> Self {
        RigidMotion {
            t: int(0),
            dx: int(0),
            dy: int(0),
        }
    }

    fn random(rng: &mut impl Rng) -> Self {
        RigidMotion {
            t: random_rational(rng),
            dx: random_rational(rng),
            dy: random_rational(rng),
        }
    }

    pub fn apply(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        let (c, s) = circle_point(&self.t);
        (&c * x - &s * y + &self.dx, &s * x + &c * y + &self.dy)
    }
}

/// Images of `(s, s)` for each parameter `s`, indexed 0, 1, 2.
pub fn collinear_from_params(params: &[Rational; 3], motion: &RigidMotion) -> Result<[IndexedPoint; 3]> {
    if params[0] == params[1] || params[0] == params[2] || params[1] == params[2] {
        return Err(Error::DegenerateParameters("collinear parameters must be distinct".into()));
    }
    Ok(std::array::from_fn(|i| {
        let (x, y) = motion.apply(&params[i], &params[i]);
        IndexedPoint::new(i as u64, x, y)
    }))
}

/// Three distinct, exactly collinear points: random positions along
/// `y = x`, then a random rational rotation and translation.
pub fn gen_collinear(seed: u64, k: u64) -> [IndexedPoint; 3] {
    let mut rng = sample_rng(seed, k);
    let params = distinct_rationals::<3>(&mut rng);
    let motion = RigidMotion::random(&mut rng);
    collinear_from_params(&params, &motion).expect("distinct parameters")
}

/// Three diameters of the unit circle through the circle points of `ts`,
/// moved by `motion`. Segment `k` joins indices `2k` and `2k + 1`.
pub fn concurrent_from_params(ts: &[Rational; 3], motion: &RigidMotion) -> Result<[[IndexedPoint; 2]; 3]> {
    if ts[0] == ts[1] || ts[0] == ts[2] || ts[1] == ts[2] {
        return Err(Error::DegenerateParameters("circle parameters must be distinct".into()));
    }
    Ok(std::array::from_fn(|k| {
        let (x, y) = circle_point(&ts[k]);
        let (ax, ay) = motion.apply(&x, &y);
        let (bx, by) = motion.apply(&-x, &-y);
        [
            IndexedPoint::new(2 * k as u64, ax, ay),
            IndexedPoint::new(2 * k as u64 + 1, bx, by),
        ]
    }))
}

/// Three segments meeting at one interior point.
pub fn gen_concurrent(seed: u64, k: u64) -> [[IndexedPoint; 2]; 3] {
    let mut rng = sample_rng(seed, k);
    let ts = distinct_rationals::<3>(&mut rng);
    let motion = RigidMotion::random(&mut rng);
    concurrent_from_params(&ts, &motion).expect("distinct parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{segment_order_param, unperturbed_dual_sign};
    use crate::poly::{rat, sign};
    use crate::schemes::SchemeId;

    fn orient0(p: &[IndexedPoint; 3]) -> Rational {
        (&p[1].x - &p[0].x) * (&p[2].y - &p[0].y) - (&p[1].y - &p[0].y) * (&p[2].x - &p[0].x)
    }

    #[test]
    fn collinear_without_motion() {
        let p = collinear_from_params(&[int(0), int(1), int(2)], &RigidMotion::identity()).unwrap();
        let want = [(0, 0), (1, 1), (2, 2)];
        for (q, (x, y)) in p.iter().zip(want) {
            assert_eq!((q.x.clone(), q.y.clone()), (int(x), int(y)));
        }
    }

    #[test]
    fn half_turn_parameter() {
        assert_eq!(circle_point(&rat(1, 2)), (rat(3, 5), rat(4, 5)));
        let m = RigidMotion {
            t: rat(1, 2),
            dx: int(0),
            dy: int(0),
        };
        let p = collinear_from_params(&[int(0), int(1), int(2)], &m).unwrap();
        assert_eq!((p[1].x.clone(), p[1].y.clone()), (rat(-1, 5), rat(7, 5)));
        assert_eq!(sign(&orient0(&p)), 0);
    }

    #[test]
    fn generated_triples_are_collinear_and_distinct() {
        for k in 0..50 {
            let p = gen_collinear(7, k);
            assert_eq!(sign(&orient0(&p)), 0);
            assert!(p[0] != p[1] && p[1] != p[2] && p[0] != p[2]);
        }
        assert_eq!(gen_collinear(7, 3), gen_collinear(7, 3));
        assert_ne!(gen_collinear(7, 3), gen_collinear(7, 4));
    }

    #[test]
    fn diameters_meet_at_the_center() {
        let s = concurrent_from_params(&[int(0), int(1), int(2)], &RigidMotion::identity()).unwrap();
        assert_eq!((s[0][0].x.clone(), s[0][0].y.clone()), (int(1), int(0)));
        assert_eq!((s[1][0].x.clone(), s[1][0].y.clone()), (int(0), int(1)));
        assert_eq!((s[2][0].x.clone(), s[2][0].y.clone()), (rat(-3, 5), rat(4, 5)));
        assert_eq!((s[2][1].x.clone(), s[2][1].y.clone()), (rat(3, 5), rat(-4, 5)));
        let e = concurrent_from_params(&[int(1), int(1), int(2)], &RigidMotion::identity());
        assert!(matches!(e, Err(Error::DegenerateParameters(_))));
    }

    #[test]
    fn generated_segments_are_concurrent() {
        for k in 0..20 {
            let s = gen_concurrent(11, k);
            let lines = s.each_ref().map(|[a, b]| [&a.y - &b.y, &b.x - &a.x, &a.x * &b.y - &a.y * &b.x]);
            assert_eq!(unperturbed_dual_sign(&lines), 0);
            let r = segment_order_param([&s[0][0], &s[0][1]], [&s[1][0], &s[1][1]], [&s[2][0], &s[2][1]], SchemeId::E)
                .unwrap();
            assert!(r.depth >= 1);
            assert_ne!(r.sign, 0);
        }
    }
}
