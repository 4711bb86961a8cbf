//! Linear minimization and Euclidean projection on each kind of feasible set.

use nalgebra::{dvector, DVector};
use vifw::sets::{FeasibleSet, TieRule};

fn main() -> vifw::Result<()> {
    let simplex = FeasibleSet::simplex(3)?;
    let cube = FeasibleSet::box_set(dvector![0.0, 0.0], dvector![1.0, 2.0])?;
    let triangle =
        FeasibleSet::vertex_polytope(vec![dvector![0.0, 0.0], dvector![2.0, 0.0], dvector![0.0, 2.0]])?;
    let product = FeasibleSet::product(vec![simplex.clone(), cube.clone()])?;

    let rule = TieRule::default();
    println!("simplex lmo(3,1,2)   = {:?}", simplex.lmo(&dvector![3.0, 1.0, 2.0], rule)?.as_slice());
    println!("simplex lmo(1,1,2)   = {:?}", simplex.lmo(&dvector![1.0, 1.0, 2.0], rule)?.as_slice());
    println!("box lmo(1,-1)        = {:?}", cube.lmo(&dvector![1.0, -1.0], rule)?.as_slice());
    println!("simplex P(0.5,0.5,0.5) = {:?}", simplex.project(&dvector![0.5, 0.5, 0.5])?.as_slice());
    println!("box P(-1,3)          = {:?}", cube.project(&dvector![-1.0, 3.0])?.as_slice());
    println!("triangle P(2,2)      = {:?}", triangle.project(&dvector![2.0, 2.0])?.as_slice());

    let z = DVector::from_vec(vec![0.9, -0.4, 0.2, 1.5, -3.0]);
    println!("product P(z)         = {:.4?}", product.project(&z)?.as_slice());
    println!(
        "diameters: simplex {:.4}, box {:.4}, triangle {:.4}",
        simplex.diameter(),
        cube.diameter(),
        triangle.diameter()
    );
    println!("product has {} vertices", product.vertex_count().unwrap_or(0));
    Ok(())
}
