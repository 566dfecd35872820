use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{exp_bivector, exp_scaled_series, Multivector, Signature};
use crate::error::Result;

fn sig(p: usize, q: usize) -> Signature {
    Signature::new(p, q).unwrap()
}

fn random_mv(rng: &mut ChaCha8Rng, s: Signature) -> Multivector {
    let coeffs = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Multivector::from_coeffs(s, coeffs).unwrap()
}

/// Central differences computed without the tape.
fn finite_difference(f: impl Fn(&Multivector) -> f64, at: &Multivector) -> Vec<f64> {
    let h = 1e-6;
    (0..at.coeffs().len())
        .map(|i| {
            let mut plus = at.coeffs().to_vec();
            let mut minus = at.coeffs().to_vec();
            plus[i] += h;
            minus[i] -= h;
            let fp = f(&Multivector::from_coeffs(at.signature(), plus).unwrap());
            let fm = f(&Multivector::from_coeffs(at.signature(), minus).unwrap());
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

#[test]
fn records_forward_values_and_ids_in_order() {
    let s = sig(3, 0);
    let mut tape = Tape::new();
    let e1 = tape.leaf(&Multivector::basis(s, &[1]).unwrap());
    let e2 = tape.leaf(&Multivector::basis(s, &[2]).unwrap());
    let prod = tape.geometric_product(e1, e2).unwrap();
    assert_eq!((e1.id(), e2.id(), prod.id()), (0, 1, 2));
    assert_eq!(tape.multivector(prod).unwrap(), Multivector::basis(s, &[1, 2]).unwrap());
}

#[test]
fn rejects_nodes_from_another_tape() {
    let s = sig(2, 0);
    let mut a = Tape::new();
    let mut b = Tape::new();
    let x = a.leaf(&Multivector::one(s));
    let y = b.leaf(&Multivector::one(s));
    assert!(b.geometric_product(x, y).is_err());
    assert!(a.backward(y).is_err());
}

#[test]
fn rejects_shape_mismatches() {
    let mut tape = Tape::new();
    let a = tape.leaf(&Multivector::one(sig(2, 0)));
    let b = tape.leaf(&Multivector::one(sig(1, 1)));
    assert!(tape.add(a, b).is_err());
    let v = tape.leaf_vector(vec![1.0, 2.0]).unwrap();
    assert!(tape.geometric_product(v, v).is_err());
    assert!(tape.scale(a, v).is_err());
    assert!(tape.log_sum_exp(&[]).is_err());
}

#[test]
fn linear_combine_gradient_is_constant() {
    let s = sig(2, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grads_at = |a: &Multivector, b: &Multivector| {
        let mut tape = Tape::new();
        let x = tape.leaf(a);
        let y = tape.leaf(b);
        let c = tape.linear_combine(&[(2.0, x), (-0.5, y)]).unwrap();
        let loss = tape.scalar_part(c).unwrap();
        let g = tape.backward(loss).unwrap();
        (g.wrt(x).unwrap().to_vec(), g.wrt(y).unwrap().to_vec())
    };
    let first = grads_at(&random_mv(&mut rng, s), &random_mv(&mut rng, s));
    let second = grads_at(&random_mv(&mut rng, s), &random_mv(&mut rng, s));
    assert_eq!(first, second);
    assert_eq!(first.0, [2.0, 0.0, 0.0, 0.0]);
}

#[test]
fn scalar_part_gradient_is_unit_at_blade_zero() {
    let s = sig(3, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tape = Tape::new();
    let a = tape.leaf(&random_mv(&mut rng, s));
    let loss = tape.scalar_part(a).unwrap();
    let g = tape.backward(loss).unwrap();
    let mut expected = vec![0.0; 8];
    expected[0] = 1.0;
    assert_eq!(g.wrt(a).unwrap(), expected.as_slice());
}

#[test]
fn norm_squared_gradient_is_twice_the_coefficients() {
    let s = sig(3, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random_mv(&mut rng, s);
    let mut tape = Tape::new();
    let x = tape.leaf(&psi);
    let loss = tape.norm_squared(x).unwrap();
    let g = tape.backward(loss).unwrap();
    let fd = finite_difference(|m| m.norm_squared(), &psi);
    for ((ad, fd), c) in g.wrt(x).unwrap().iter().zip(&fd).zip(psi.coeffs()) {
        assert!((ad - 2.0 * c).abs() < 1e-14);
        assert!((ad - fd).abs() < 1e-8);
    }
}

#[test]
fn scalar_part_of_product_gradient_is_permuted_b() {
    for (p, q) in [(3, 0), (1, 2)] {
        let s = sig(p, q);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_mv(&mut rng, s);
        let b = random_mv(&mut rng, s);
        let mut tape = Tape::new();
        let x = tape.leaf(&a);
        let y = tape.leaf(&b);
        let prod = tape.geometric_product(x, y).unwrap();
        let loss = tape.scalar_part(prod).unwrap();
        let g = tape.backward(loss).unwrap();
        let fd = finite_difference(|m| m.geometric_product(&b).unwrap().scalar_part(), &a);
        for (i, (ad, fd)) in g.wrt(x).unwrap().iter().zip(&fd).enumerate() {
            // <AB>_0 only pairs blade i with itself.
            let e = Multivector::blade(s, i as u32, 1.0).unwrap();
            let sign = e.geometric_product(&e).unwrap().scalar_part();
            assert_eq!(*ad, sign * b.coeffs()[i]);
            assert!((ad - fd).abs() / fd.abs().max(1.0) <= 1e-6);
        }
    }
}

#[test]
fn non_scalar_loss_is_rejected() {
    let s = sig(2, 0);
    let mut tape = Tape::new();
    let x = tape.leaf(&Multivector::basis(s, &[1]).unwrap());
    assert!(tape.backward(x).is_err());
    let v = tape.leaf_vector(vec![1.0, 2.0]).unwrap();
    assert!(tape.backward(v).is_err());
    // Pure grade-0 multivectors count as scalars.
    let c = tape.leaf(&Multivector::scalar(s, 4.0));
    assert!(tape.backward(c).is_ok());
}

type Primitive = (&'static str, Signature, usize, Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>);

/// Every primitive, probed through a random linear read-out so the loss is scalar.
fn primitive_losses() -> Vec<Primitive> {
    let s3 = sig(3, 0);
    let s13 = sig(1, 3);
    let readout = |tape: &mut Tape, x: Var, seed: u64| -> Result<Var> {
        let shape = tape.shape(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = (0..shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = tape.leaf_values(shape, w)?;
        tape.dot(x, w)
    };
    vec![
        (
            "add",
            s3,
            2,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.add(v[0], v[1])?;
                readout(t, o, 1)
            }),
        ),
        (
            "sub",
            s3,
            2,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.sub(v[0], v[1])?;
                readout(t, o, 2)
            }),
        ),
        (
            "linear_combine",
            s13,
            3,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.linear_combine(&[(0.3, v[0]), (-1.7, v[1]), (2.0, v[2])])?;
                readout(t, o, 3)
            }),
        ),
        (
            "scale",
            s3,
            2,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let s = t.scalar_part(v[0])?;
                let o = t.scale(s, v[1])?;
                readout(t, o, 4)
            }),
        ),
        (
            "mul",
            s13,
            2,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.mul(v[0], v[1])?;
                readout(t, o, 5)
            }),
        ),
        (
            "exp",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.exp(v[0])?;
                readout(t, o, 6)
            }),
        ),
        (
            "tanh",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.tanh(v[0])?;
                readout(t, o, 7)
            }),
        ),
        (
            "log_sum_exp",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let a = t.scalar_part(v[0])?;
                let b = t.dirac_scalar(v[0], v[0])?;
                let c = t.scalar_product(v[0], v[0])?;
                t.log_sum_exp(&[a, b, c])
            }),
        ),
        ("dot", s13, 2, Box::new(|t: &mut Tape, v: &[Var]| t.dot(v[0], v[1]))),
        (
            "geometric_product",
            s13,
            2,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.geometric_product(v[0], v[1])?;
                readout(t, o, 8)
            }),
        ),
        (
            "reverse",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.reverse(v[0])?;
                readout(t, o, 9)
            }),
        ),
        (
            "grade_project",
            s13,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let o = t.grade_project(v[0], 2)?;
                readout(t, o, 10)
            }),
        ),
        ("scalar_part", s3, 1, Box::new(|t: &mut Tape, v: &[Var]| t.scalar_part(v[0]))),
        ("scalar_product", s13, 2, Box::new(|t: &mut Tape, v: &[Var]| t.scalar_product(v[0], v[1]))),
        (
            "exp_bivector",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let b = t.grade_project(v[0], 2)?;
                let o = t.exp_bivector(b)?;
                readout(t, o, 11)
            }),
        ),
        (
            "softmax",
            s3,
            1,
            Box::new(move |t: &mut Tape, v: &[Var]| {
                let a = t.scalar_part(v[0])?;
                let b = t.dirac_scalar(v[0], v[0])?;
                let w = t.softmax(&[a, b])?;
                let x = t.scale(w[0], v[0])?;
                let y = t.scale(w[1], v[0])?;
                let o = t.add(x, y)?;
                readout(t, o, 12)
            }),
        ),
    ]
}

#[test]
fn every_primitive_passes_grad_check() {
    for (name, s, leaves, f) in primitive_losses() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let point: Vec<Multivector> = (0..leaves).map(|_| random_mv(&mut rng, s)).collect();
            let err = grad_check(&f, &point, DEFAULT_STEP).unwrap();
            assert!(err <= 1e-5, "{name}: relative error {err}");
        }
    }
}

#[test]
fn linear_function_is_exact() {
    let s = sig(2, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let point = vec![random_mv(&mut rng, s), random_mv(&mut rng, s)];
    let err = grad_check(
        |t, v| {
            let c = t.linear_combine(&[(1.5, v[0]), (-0.25, v[1])])?;
            let d = t.reverse(c)?;
            t.scalar_part(d)
        },
        &point,
        DEFAULT_STEP,
    )
    .unwrap();
    assert!(err <= 1e-9, "{err}");
}

#[test]
fn norm_of_exponential() {
    let s = sig(3, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = rng.random_range(0.0..1.0) / norm;
        let b: Vec<f64> = raw.iter().map(|x| x * scale).collect();
        let point = vec![Multivector::bivector(s, &b).unwrap()];
        let err = grad_check(
            |t, v| {
                let bv = t.grade_project(v[0], 2)?;
                let r = t.exp_bivector(bv)?;
                let r = t.scale_const(1.3, r)?;
                t.norm_squared(r)
            },
            &point,
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(err <= 1e-5, "{err}");
    }
}

#[test]
fn tape_exponential_matches_library() {
    let s = sig(4, 0);
    let b = Multivector::bivector(s, &[0.9, -2.1, 0.3, 1.4, 0.0, -0.6]).unwrap();
    let mut tape = Tape::new();
    let x = tape.leaf(&b);
    let r = tape.exp_bivector(x).unwrap();
    let recorded = tape.multivector(r).unwrap();
    assert_eq!(recorded, exp_scaled_series(&b));
    assert!(recorded.max_abs_diff(&exp_bivector(&b).unwrap()) < 1e-13);
}

#[test]
fn backward_is_linear_in_the_loss() {
    let s = sig(3, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = random_mv(&mut rng, s);
    let b = random_mv(&mut rng, s);
    let grads = |which: u8| {
        let mut tape = Tape::new();
        let x = tape.leaf(&a);
        let y = tape.leaf(&b);
        let prod = tape.geometric_product(x, y).unwrap();
        let l1 = tape.norm_squared(prod).unwrap();
        let l2 = tape.dot(x, y).unwrap();
        let l2 = tape.tanh(l2).unwrap();
        let loss = match which {
            0 => l1,
            1 => l2,
            _ => tape.add(l1, l2).unwrap(),
        };
        let g = tape.backward(loss).unwrap();
        [g.wrt(x).unwrap().to_vec(), g.wrt(y).unwrap().to_vec()]
    };
    let (g1, g2, g12) = (grads(0), grads(1), grads(2));
    for leaf in 0..2 {
        for i in 0..8 {
            assert!((g1[leaf][i] + g2[leaf][i] - g12[leaf][i]).abs() <= 1e-12);
        }
    }
}

#[test]
fn repeated_backward_is_identical() {
    let s = sig(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tape = Tape::new();
    let x = tape.leaf(&random_mv(&mut rng, s));
    let b = tape.grade_project(x, 2).unwrap();
    let r = tape.exp_bivector(b).unwrap();
    let y = tape.geometric_product(r, x).unwrap();
    let loss = tape.dirac_scalar(y, x).unwrap();
    let before = tape.value(y).unwrap().to_vec();
    let g1 = tape.backward(loss).unwrap();
    let g2 = tape.backward(loss).unwrap();
    assert_eq!(g1.wrt(x).unwrap(), g2.wrt(x).unwrap());
    assert_eq!(tape.value(y).unwrap(), before.as_slice());
}

#[test]
fn grad_check_reports_non_finite_values() {
    let s = sig(1, 0);
    let point = vec![Multivector::scalar(s, 700.0)];
    let err = grad_check(
        |t, v| {
            let e = t.exp(v[0])?;
            let e = t.exp(e)?;
            t.scalar_part(e)
        },
        &point,
        DEFAULT_STEP,
    );
    assert!(matches!(err, Err(crate::Error::Numeric(_))));
}
