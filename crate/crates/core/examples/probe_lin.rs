//! Scratch probe: end-to-end Newton solve on a large ball from the
//! barrier-based initial guess, for sizing runtimes and tolerances.

use minksol::elliptic::{
    newton_solve, BoundaryData, ConvexDomain, GridSpec,
    NewtonOptions, Problem,
};
use minksol::entire::{barrier::BarrierPair, boundary_f::BoundaryValueF};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let radius: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(8.0);
    let h: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.25);
    let c = 2.0;

    let t0 = Instant::now();
    let f = BoundaryValueF::constant(0.0, c).unwrap();
    let pair = Arc::new(BarrierPair::build(f, c, 3, 1.05e3).unwrap());
    println!("barriers in {:.2?}", t0.elapsed());

    let domain = ConvexDomain::ball(vec![0.0; 3], radius).unwrap();
    let grid = GridSpec::cover(&domain, h).unwrap();
    let bd = {
        let p = Arc::clone(&pair);
        BoundaryData::Func(Box::new(move |x: &[f64]| p.upper_sampled(x).expect("range")))
    };
    let problem = Problem::new(domain, grid, c, bd).unwrap();
    let lower = Arc::clone(&pair);
    let mut u = problem.init_field(|x| lower.lower_sampled(x).expect("range"));
    println!("R={radius} h={h} interior={}", problem.interior_count());

    {
        use minksol::elliptic::operator::Workspace;
        use minksol::elliptic::SolitonParams;
        let params = SolitonParams::new(problem.c, 1.0).unwrap();
        let mut ws = Workspace::new(problem.grid.dim(), problem.grid.h);
        let mut bad = 0usize;
        let mut min_h2 = f64::INFINITY;
        let mut bad_rmin = f64::INFINITY;
        let mut bad_rmax = 0.0_f64;
        for &lin in &problem.mask.interior {
            ws.extract_jet(&u, lin, &problem.strides);
            let out = ws.eval(&params);
            min_h2 = min_h2.min(out.h2);
            if !(out.h2 > 0.0 && out.h1 > 0.0) {
                bad += 1;
                let x = problem.grid.point(&problem.grid.to_multi(lin));
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                bad_rmin = bad_rmin.min(r);
                bad_rmax = bad_rmax.max(r);
            }
        }
        println!(
            "init: bad={bad} min_h2={min_h2:.4} bad radius band [{bad_rmin:.3}, {bad_rmax:.3}] (R-h={:.3})",
            radius - h
        );
    }

    let t1 = Instant::now();
    match newton_solve(&problem, 1.0, &mut u, &NewtonOptions::default()) {
        Ok(rep) => println!(
            "newton: iters={} residual={:.3e} lin={} ({:.2?})",
            rep.iters, rep.residual_sup, rep.lin_iters_total, t1.elapsed()
        ),
        Err(e) => {
            println!("newton FAILED: {e} ({:.2?})", t1.elapsed());
            return;
        }
    }

    // Compare against the rotationally symmetric reference along a K-ball.
    let mut worst = 0.0_f64;
    for &p in &[
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.5, 0.0],
        [0.8, 0.8, 0.8],
        [0.0, 0.0, 2.0],
    ] {
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let psi = pair.psi.eval(r).unwrap();
        let got = minksol::elliptic::grid::interp_at(&problem.grid, &u, &p).unwrap();
        worst = worst.max((got - psi).abs());
        println!("  x={p:?} r={r:.3} psi={psi:.6} u={got:.6} diff={:.3e}", got - psi);
    }
    println!("worst K diff = {worst:.3e}");

}
