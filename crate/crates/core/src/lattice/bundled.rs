use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Covolume, ExcludedBall, Generator, LatticeError, LatticeSpec, Region};
use crate::geometry::{Isometry, Model, Point};

const NAMES: [&str; 5] = ["modular", "gamma2", "hecke4", "hecke5", "picard"];

pub fn bundled_names() -> &'static [&'static str] {
    &NAMES
}

fn real_gen(name: &str, a: f64, b: f64, c: f64, d: f64) -> Generator {
    Generator {
        name: name.into(),
        element: Isometry::real(a, b, c, d).expect("bundled generator"),
    }
}

fn unit_disk() -> Vec<ExcludedBall> {
    vec![ExcludedBall {
        center: [0.0, 0.0],
        radius: 1.0,
    }]
}

fn hecke(q: u32, floor: f64) -> LatticeSpec {
    let lambda = 2.0 * (PI / q as f64).cos();
    LatticeSpec::new(
        format!("hecke{q}"),
        Model::H2,
        vec![
            real_gen("S", 0.0, -1.0, 1.0, 0.0),
            real_gen("T", 1.0, lambda, 0.0, 1.0),
        ],
        Some(Covolume {
            value: PI * (1.0 - 2.0 / q as f64),
            source: format!("Gauss-Bonnet for the (2,{q},inf) orbifold: pi(1 - 2/{q})"),
        }),
        Some(2),
        Region {
            x_range: (-lambda / 2.0, lambda / 2.0),
            x2_range: None,
            floor,
            excluded_balls: unit_disk(),
        },
        Point::h2(0.1, 1.7).expect("basepoint"),
    )
    .expect("bundled spec")
}

/// Looks up a bundled lattice by name (`bianchi` is an alias of `picard`).
pub fn bundled(name: &str) -> Result<LatticeSpec, LatticeError> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "modular" | "psl2z" => LatticeSpec::new(
            "modular",
            Model::H2,
            vec![
                real_gen("S", 0.0, -1.0, 1.0, 0.0),
                real_gen("T", 1.0, 1.0, 0.0, 1.0),
            ],
            Some(Covolume {
                value: PI / 3.0,
                source: "Gauss-Bonnet for the (2,3,inf) orbifold: 2(pi - pi/2 - pi/3)".into(),
            }),
            Some(2),
            Region {
                x_range: (-0.5, 0.5),
                x2_range: None,
                floor: 0.8,
                excluded_balls: unit_disk(),
            },
            Point::h2(0.1, 1.7)?,
        )?,
        "gamma2" => LatticeSpec::new(
            "gamma2",
            Model::H2,
            vec![
                real_gen("A", 1.0, 2.0, 0.0, 1.0),
                real_gen("B", 1.0, 0.0, 2.0, 1.0),
            ],
            Some(Covolume {
                value: 2.0 * PI,
                source: "index 6 in PSL2(Z): 6 * pi/3".into(),
            }),
            Some(2),
            Region {
                x_range: (-1.0, 1.0),
                x2_range: None,
                floor: 0.03,
                excluded_balls: vec![
                    ExcludedBall {
                        center: [-0.5, 0.0],
                        radius: 0.5,
                    },
                    ExcludedBall {
                        center: [0.5, 0.0],
                        radius: 0.5,
                    },
                ],
            },
            Point::h2(0.3, 1.2)?,
        )?,
        "hecke4" => hecke(4, 0.65),
        "hecke5" => hecke(5, 0.55),
        "picard" | "bianchi" => {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let i = Complex64::new(0.0, 1.0);
            let gen = |name: &str, m: [Complex64; 4]| Generator {
                name: name.into(),
                element: Isometry::complex(m[0], m[1], m[2], m[3]).expect("bundled generator"),
            };
            LatticeSpec::new(
                "picard",
                Model::H3,
                vec![
                    gen("S", [zero, -one, one, zero]),
                    gen("T", [one, one, zero, one]),
                    gen("U", [one, i, zero, one]),
                ],
                Some(Covolume {
                    value: 0.305_321_864_725_2,
                    source: "Humbert: |D|^(3/2) zeta_K(2) / (4 pi^2) with D = -4".into(),
                }),
                None,
                Region {
                    x_range: (-0.5, 0.5),
                    x2_range: Some((-0.5, 0.5)),
                    floor: 0.65,
                    excluded_balls: unit_disk(),
                },
                Point::h3(0.1, 0.2, 1.6)?,
            )?
        }
        other => {
            return Err(LatticeError::UnknownLattice(
                other.to_string(),
                NAMES.join(", "),
            ))
        }
    };
    Ok(spec)
}
