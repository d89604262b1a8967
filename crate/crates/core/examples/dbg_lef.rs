use hodgeforge_core::toric::fan::{smooth_refine, spanning_fan};
use hodgeforge_core::toric::laurent::LaurentData;
use hodgeforge_core::toric::polytope::LatticePolytope;
use hodgeforge_core::toric::blowup::blowup_strata;
use hodgeforge_core::linalg::rank;

fn main() {
    let p = LatticePolytope::new(vec![[1,0,0],[0,1,0],[0,0,1],[-1,-1,-1]]);
    let fan = smooth_refine(&spanning_fan(&p).unwrap(), &p).unwrap();
    let data = LaurentData::standard(&p);
    let s = blowup_strata(&fan, &p, &data, None).unwrap();
    // identity (1): cup_h(X) . gysin[1][0]  vs  gysin[1][2] . lef_S(H0->H2)
    let g10 = s.gysin_map(1, 0);
    let cup = s.lefschetz_map(0, 2);
    let lhs = cup.mul(&g10);
    let g12 = s.gysin_map(1, 2);
    let lefs = s.lefschetz_map(1, 0);
    let rhs = g12.mul(&lefs);
    eprintln!("identity (1) holds: {}", lhs == rhs);
    if lhs != rhs {
        for c in 0..lhs.cols() {
            for r in 0..lhs.rows() {
                if lhs[(r,c)] != rhs[(r,c)] {
                    eprintln!("  first diff at surface {c}, basis row {r}: {} vs {}", lhs[(r,c)], rhs[(r,c)]);
                    return;
                }
            }
        }
    }
    // identity (2): restr[1][2] . lef_S  vs  lef_curve . restr[1][0]
    let r12 = s.restriction_map(1, 2);
    let lhs2 = r12.mul(&lefs);
    let lefc = s.lefschetz_map(2, 0);
    let r10 = s.restriction_map(1, 0);
    let rhs2 = lefc.mul(&r10);
    eprintln!("identity (2) holds: {}", lhs2 == rhs2);
    if lhs2 != rhs2 {
        'outer: for c in 0..lhs2.cols() {
            for r in 0..lhs2.rows() {
                if lhs2[(r,c)] != rhs2[(r,c)] {
                    eprintln!("  first diff at surface {c}, wall {r}: {} vs {}", lhs2[(r,c)], rhs2[(r,c)]);
                    break 'outer;
                }
            }
        }
    }
    let _ = rank(&g10);
}
