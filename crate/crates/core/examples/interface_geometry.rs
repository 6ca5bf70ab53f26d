//! Distance, closest point, normal and region label for a few query points on
//! each 2D interface, plus the moving star at three times.
//!
//! cargo run --example interface_geometry

use interface_pinn::problems::find;

fn main() -> interface_pinn::Result<()> {
    let queries = [[0.3, 0.1], [0.0, 0.45], [-0.6, -0.2]];
    for name in ["line2d", "ellipse2d", "sunflower2d", "flower2d"] {
        let p = find(name)?;
        println!("{name}: {}", p.title);
        for x in &queries {
            let d = p.interface.distance(x, 0.0)?;
            let foot = p.interface.closest_point(x, 0.0)?;
            let n = p.interface.normal(&foot, 0.0, p.omega1_side)?;
            let label = p.interface.classify(x, 0.0, p.omega1_side)?;
            println!(
                "  x={x:?}  d={d:.6}  foot=({:.4}, {:.4})  n(Ω₁→Ω₂)=({:.4}, {:.4})  {label:?}",
                foot[0], foot[1], n[0], n[1]
            );
        }
    }
    let star = find("deforming_star")?;
    println!("deforming_star: {}", star.title);
    for t in [0.0, 0.5, 1.0] {
        let x = [1.2 + 0.8 * t, 1.2 + 0.8 * t + 0.5];
        let (lo, hi) = star.interface.bounding_box(t)?.expect("closed curve");
        println!(
            "  t={t}: d({:.2}, {:.2}) = {:.6}, box [{:.3}, {:.3}]×[{:.3}, {:.3}]",
            x[0],
            x[1],
            star.interface.distance(&x, t)?,
            lo[0],
            hi[0],
            lo[1],
            hi[1]
        );
    }
    Ok(())
}
