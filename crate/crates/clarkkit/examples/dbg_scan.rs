use clarkkit::limits::ApproachOpts;
use clarkkit::linalg::CMatrix;
use clarkkit::schur;
use clarkkit::{C64, ClarkFrame};

fn main() {
    let c = |re: f64, im: f64| C64::new(re, im);
    let b = schur::potapov_product(
        2,
        vec![
            schur::PotapovFactor::new(c(0.4, 0.1), {
                let v = nalgebra::DVector::from_vec(vec![c(0.8, 0.0), c(0.6, 0.0)]);
                CMatrix::from_fn(2, |i, j| v[i] * v[j].conj())
            })
            .unwrap(),
            schur::PotapovFactor::new(c(-0.2, 0.3), CMatrix::identity(2)).unwrap(),
        ],
        None,
        None,
    )
    .unwrap();
    let f = ClarkFrame::with_identity(b);
    for theta in [0.7f64, 2.1, 4.4] {
        let lambda = C64::from_polar(1.0, theta);
        let bv = f.boundary_value(lambda, &ApproachOpts::default().with_tol(1e-9));
        println!("theta {theta}: verdict {:?} steps {} est {:.2e}", bv.verdict, bv.steps_used, bv.est_error);
        let s = f.ac_density(lambda);
        match s {
            clarkkit::herglotz::DensitySample::Ac { density, boundary } => {
                println!("  density norm {:.3e}  |I-b*b| {:.3e}", density.op_norm(),
                    CMatrix::identity(2).sub(&boundary.adjoint().mul(&boundary)).op_norm());
            }
            other => println!("  {other:?}"),
        }
    }
}
