//! Two-dimensional domains described by point-membership predicates.
//!
//! Every shape lives inside the computational box `[-1, 1]^2`. Membership is
//! tested on the *open* interior, so points on an analytic boundary report
//! `false`; the grid builder turns the lattice nodes just outside a domain
//! into its pinned boundary layer.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Horizontal and vertical scale of the heart curve inside the box.
const HEART_SCALE: f64 = 0.78;
/// Vertical shift that centers the heart curve inside the box.
const HEART_SHIFT: f64 = -0.08;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// The full box `(-1, 1)^2`.
    Square,
    Rectangle {
        half_width: f64,
        half_height: f64,
    },
    Disk {
        radius: f64,
    },
    Ellipse {
        semi_axis_a: f64,
        semi_axis_b: f64,
    },
    Triangle {
        vertices: [Point; 3],
    },
    /// The box with the closed lower-right quadrant `[0, 1) x (-1, 0]` removed.
    LShape,
    /// Two square bulbs joined by a horizontal neck `|x| <= neck_half_width`,
    /// `|y| < neck_half_height`. The bulbs fill `neck_half_width < |x| < 1`
    /// with half side `(1 - neck_half_width) / 2`.
    Dumbbell {
        neck_half_width: f64,
        neck_half_height: f64,
    },
    /// The implicit curve `(X^2 + Y^2 - 1)^3 - X^2 Y^3 < 0`, scaled into the box.
    Heart,
    /// The box with a closed disk removed.
    SquareMinusDisk {
        center: Point,
        radius: f64,
    },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Rectangle { .. } => "rectangle",
            Shape::Disk { .. } => "disk",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Triangle { .. } => "triangle",
            Shape::LShape => "l_shape",
            Shape::Dumbbell { .. } => "dumbbell",
            Shape::Heart => "heart",
            Shape::SquareMinusDisk { .. } => "square_minus_disk",
        }
    }

    pub fn default_dumbbell() -> Self {
        Shape::Dumbbell {
            neck_half_width: 0.5,
            neck_half_height: 0.1,
        }
    }

    pub fn default_square_minus_disk() -> Self {
        Shape::SquareMinusDisk {
            center: [0.3, 0.3],
            radius: 0.35,
        }
    }

    /// Isosceles right triangle filling the lower-left half of the box.
    pub fn default_triangle() -> Self {
        Shape::Triangle {
            vertices: [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]],
        }
    }

    fn contains(&self, p: Point) -> bool {
        let [x, y] = p;
        match *self {
            Shape::Square => x.abs() < 1.0 && y.abs() < 1.0,
            Shape::Rectangle {
                half_width,
                half_height,
            } => x.abs() < half_width && y.abs() < half_height,
            Shape::Disk { radius } => x * x + y * y < radius * radius,
            Shape::Ellipse {
                semi_axis_a,
                semi_axis_b,
            } => {
                let (u, v) = (x / semi_axis_a, y / semi_axis_b);
                u * u + v * v < 1.0
            }
            Shape::Triangle { vertices } => {
                let orient = cross(vertices[0], vertices[1], vertices[2]).signum();
                (0..3).all(|k| cross(vertices[k], vertices[(k + 1) % 3], p) * orient > 0.0)
            }
            Shape::LShape => x.abs() < 1.0 && y.abs() < 1.0 && !(x >= 0.0 && y <= 0.0),
            Shape::Dumbbell {
                neck_half_width,
                neck_half_height,
            } => {
                let bulb_half = 0.5 * (1.0 - neck_half_width);
                let ax = x.abs();
                if ax >= 1.0 {
                    false
                } else if ax > neck_half_width {
                    y.abs() < bulb_half
                } else {
                    y.abs() < neck_half_height
                }
            }
            Shape::Heart => {
                let u = x / HEART_SCALE;
                let v = (y - HEART_SHIFT) / HEART_SCALE;
                let r = u * u + v * v - 1.0;
                r * r * r - u * u * v * v * v < 0.0
            }
            Shape::SquareMinusDisk { center, radius } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                x.abs() < 1.0 && y.abs() < 1.0 && dx * dx + dy * dy > radius * radius
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            Shape::Square | Shape::LShape | Shape::Heart => Ok(()),
            Shape::Rectangle {
                half_width,
                half_height,
            } => {
                positive("half_width", half_width)?;
                positive("half_height", half_height)
            }
            Shape::Disk { radius } => positive("radius", radius),
            Shape::Ellipse {
                semi_axis_a,
                semi_axis_b,
            } => {
                positive("semi_axis_a", semi_axis_a)?;
                positive("semi_axis_b", semi_axis_b)
            }
            Shape::Triangle { vertices } => {
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidDomain("non-finite triangle vertex".into()));
                }
                let area2 = cross(vertices[0], vertices[1], vertices[2]);
                let scale = vertices
                    .iter()
                    .flatten()
                    .fold(1.0_f64, |m, c| m.max(c.abs()));
                if area2.abs() <= 1e-12 * scale * scale {
                    return Err(Error::InvalidDomain("triangle vertices are collinear".into()));
                }
                Ok(())
            }
            Shape::Dumbbell {
                neck_half_width,
                neck_half_height,
            } => {
                positive("neck_half_width", neck_half_width)?;
                positive("neck_half_height", neck_half_height)?;
                if neck_half_width >= 1.0 {
                    return Err(Error::InvalidDomain("neck_half_width must be below 1".into()));
                }
                if neck_half_height >= 0.5 * (1.0 - neck_half_width) {
                    return Err(Error::InvalidDomain(
                        "neck must be thinner than the bulbs".into(),
                    ));
                }
                Ok(())
            }
            Shape::SquareMinusDisk { center, radius } => {
                positive("radius", radius)?;
                if !center[0].is_finite() || !center[1].is_finite() {
                    return Err(Error::InvalidDomain("non-finite disk center".into()));
                }
                Ok(())
            }
        }
    }
}

fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// A validated shape plus the puncture points that become pinned nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct DomainSpec {
    shape: Shape,
    punctures: Vec<Point>,
}

impl DomainSpec {
    pub fn new(shape: Shape, punctures: Vec<Point>) -> Result<Self> {
        shape.validate()?;
        for p in &punctures {
            if !shape.contains(*p) {
                return Err(Error::InvalidDomain(format!(
                    "puncture ({}, {}) lies outside the {}",
                    p[0],
                    p[1],
                    shape.name()
                )));
            }
        }
        Ok(DomainSpec { shape, punctures })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn punctures(&self) -> &[Point] {
        &self.punctures
    }

    pub fn square() -> Self {
        DomainSpec {
            shape: Shape::Square,
            punctures: Vec::new(),
        }
    }

    /// Open-interior membership. Punctures do not affect it.
    pub fn contains(&self, p: Point) -> bool {
        self.shape.contains(p)
    }
}

pub fn contains(domain: &DomainSpec, p: Point) -> bool {
    domain.contains(p)
}

#[derive(Serialize, Deserialize)]
struct RawDomain {
    shape: String,
    #[serde(default)]
    params: Value,
    #[serde(default)]
    punctures: Vec<Point>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RectangleParams {
    half_width: f64,
    half_height: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskParams {
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipseParams {
    semi_axis_a: f64,
    semi_axis_b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangleParams {
    vertices: [Point; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DumbbellParams {
    neck_half_width: f64,
    neck_half_height: f64,
}

impl Default for DumbbellParams {
    fn default() -> Self {
        DumbbellParams {
            neck_half_width: 0.5,
            neck_half_height: 0.1,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SquareMinusDiskParams {
    center: Point,
    radius: f64,
}

impl Default for SquareMinusDiskParams {
    fn default() -> Self {
        SquareMinusDiskParams {
            center: [0.3, 0.3],
            radius: 0.35,
        }
    }
}

fn params<T: serde::de::DeserializeOwned>(v: Value) -> std::result::Result<T, String> {
    let v = if v.is_null() { json!({}) } else { v };
    serde_json::from_value(v).map_err(|e| e.to_string())
}

impl TryFrom<RawDomain> for DomainSpec {
    type Error = String;

    fn try_from(raw: RawDomain) -> std::result::Result<Self, String> {
        let shape = match raw.shape.as_str() {
            "square" => {
                params::<EmptyParams>(raw.params)?;
                Shape::Square
            }
            "rectangle" => {
                let p: RectangleParams = params(raw.params)?;
                Shape::Rectangle {
                    half_width: p.half_width,
                    half_height: p.half_height,
                }
            }
            "disk" => {
                let p: DiskParams = params(raw.params)?;
                Shape::Disk { radius: p.radius }
            }
            "ellipse" => {
                let p: EllipseParams = params(raw.params)?;
                Shape::Ellipse {
                    semi_axis_a: p.semi_axis_a,
                    semi_axis_b: p.semi_axis_b,
                }
            }
            "triangle" => {
                let p: TriangleParams = params(raw.params)?;
                Shape::Triangle {
                    vertices: p.vertices,
                }
            }
            "l_shape" => {
                params::<EmptyParams>(raw.params)?;
                Shape::LShape
            }
            "dumbbell" => {
                let p: DumbbellParams = params(raw.params)?;
                Shape::Dumbbell {
                    neck_half_width: p.neck_half_width,
                    neck_half_height: p.neck_half_height,
                }
            }
            "heart" => {
                params::<EmptyParams>(raw.params)?;
                Shape::Heart
            }
            "square_minus_disk" => {
                let p: SquareMinusDiskParams = params(raw.params)?;
                Shape::SquareMinusDisk {
                    center: p.center,
                    radius: p.radius,
                }
            }
            other => return Err(format!("unknown shape `{other}`")),
        };
        DomainSpec::new(shape, raw.punctures).map_err(|e| e.to_string())
    }
}

impl From<DomainSpec> for RawDomain {
    fn from(d: DomainSpec) -> Self {
        let params = match d.shape {
            Shape::Square | Shape::LShape | Shape::Heart => json!({}),
            Shape::Rectangle {
                half_width,
                half_height,
            } => json!({ "half_width": half_width, "half_height": half_height }),
            Shape::Disk { radius } => json!({ "radius": radius }),
            Shape::Ellipse {
                semi_axis_a,
                semi_axis_b,
            } => json!({ "semi_axis_a": semi_axis_a, "semi_axis_b": semi_axis_b }),
            Shape::Triangle { vertices } => json!({ "vertices": vertices }),
            Shape::Dumbbell {
                neck_half_width,
                neck_half_height,
            } => json!({ "neck_half_width": neck_half_width, "neck_half_height": neck_half_height }),
            Shape::SquareMinusDisk { center, radius } => {
                json!({ "center": center, "radius": radius })
            }
        };
        RawDomain {
            shape: d.shape.name().to_string(),
            params,
            punctures: d.punctures,
        }
    }
}
